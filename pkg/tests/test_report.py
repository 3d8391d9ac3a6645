import xml.etree.ElementTree as ET

import pytest

from zsclab.report import grid_csv, heatmap_svg, read_score_table, score_table, scores_csv, write_matrix
from zsclab.xplay import AgentPool, PairingResult, PoolMember, aggregate_scores, crossplay_matrix

from .helpers import CURTAIN_READER, MATCHED, REVERSED, p1, p2


@pytest.fixture
def pool(env):
    members = [
        PoolMember("b0", "base", p1(env, [1, 2]), p2(env, MATCHED)),
        PoolMember("b1", "base", p1(env, [2, 1]), p2(env, REVERSED)),
        PoolMember("a0", "ap", p1(env, [[3, 3], [1, 1]], frozen=0), p2(env, CURTAIN_READER)),
        PoolMember("a1", "ap", p1(env, [[3, 3], [0, 0]], frozen=0), p2(env, CURTAIN_READER)),
    ]
    return AgentPool(members, frozenset({"base"}))


def test_grid_csv_roundtrip_values():
    text = grid_csv(["x", "y"], [[0.1 + 0.2, None], [-10.0, 5.0]])
    assert text.splitlines() == ["p1\\p2,x,y", "x,0.30000000000000004,NA", "y,-10.0,5.0"]


def test_heatmap_svg(env, pool):
    m = crossplay_matrix(pool, env, 20)
    svg = heatmap_svg(m, title="demo")
    root = ET.fromstring(svg)
    ns = "{http://www.w3.org/2000/svg}"
    cells = [r for r in root.iter(ns + "rect")][1:]
    assert len(cells) == 16
    texts = [t.text for t in root.iter(ns + "text")]
    assert "-10.0" in texts and "10.0" in texts
    # extremes map to the ends of the scale
    fills = {c.get("fill") for c in cells}
    assert "#440154" in fills and "#fde725" in fills


def test_constant_matrix_svg(env):
    members = [PoolMember(f"b{i}", "b", p1(env, [1, 2]), p2(env, MATCHED)) for i in range(2)]
    m = crossplay_matrix(AgentPool(members), env, 5)
    assert heatmap_svg(m).count('fill="#fde725"') == 4


def test_score_outputs(tmp_path, env, pool):
    m = crossplay_matrix(pool, env, 50)
    rep = aggregate_scores(m, pool)
    table = score_table(rep)
    lines = table.splitlines()
    assert lines[0].split() == ["Algorithm", "Self-Play", "Intra-XP", "Inter-XP", "1SZSC-XP"]
    assert lines[1].startswith("base") and lines[1].endswith("N/A")
    path = tmp_path / "scores.csv"
    path.write_text(scores_csv(rep))
    names, labels, cols = read_score_table(path)
    assert names == ["sp", "intra_xp", "inter_xp", "one_szsc_xp"]
    assert labels == ["base", "ap"]
    assert cols[3][0] is None and cols[0] == [10.0, 5.0]


def test_write_matrix(tmp_path, env, pool):
    m = crossplay_matrix(pool, env, 1)
    paths = write_matrix(m, tmp_path, "xp")
    assert [p.name for p in paths] == ["xp.csv", "xp.stderr.csv", "xp.svg"]
    stderr_rows = paths[1].read_text().splitlines()[1:]
    assert all(v == "0.0" for row in stderr_rows for v in row.split(",")[1:])


def test_read_score_table_errors(tmp_path):
    bad = tmp_path / "s.csv"
    bad.write_text("a,b\nx,1,2\n")
    with pytest.raises(ValueError):
        read_score_table(bad)
    bad.write_text("a,b\nx,abc\n")
    with pytest.raises(ValueError, match="abc"):
        read_score_table(bad)


def test_pairing_result_in_table():
    from zsclab.report import _fmt_score

    assert _fmt_score(PairingResult(2.75, 0.0123, 10)) == "2.75 ± 0.01"
    assert _fmt_score(None) == "N/A"
