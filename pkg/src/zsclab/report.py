"""CSV, text and SVG renderings of cross-play results."""

from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Optional, Sequence
from xml.sax.saxutils import escape

from .xplay import SCORE_NAMES, CrossPlayMatrix, PairingResult, ScoreReport

SCORE_TITLES = {
    "sp": "Self-Play",
    "intra_xp": "Intra-XP",
    "inter_xp": "Inter-XP",
    "one_szsc_xp": "1SZSC-XP",
}

# viridis anchors, dark to bright
_PALETTE = [
    (0.0, (0x44, 0x01, 0x54)),
    (0.25, (0x3B, 0x52, 0x8B)),
    (0.5, (0x21, 0x91, 0x8C)),
    (0.75, (0x5E, 0xC9, 0x62)),
    (1.0, (0xFD, 0xE7, 0x25)),
]


def _num(x: Optional[float]) -> str:
    return "NA" if x is None else repr(float(x))


def grid_csv(labels: Sequence[str], grid: Sequence[Sequence[float]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["p1\\p2", *labels])
    for label, row in zip(labels, grid):
        w.writerow([label, *(_num(v) for v in row)])
    return buf.getvalue()


def write_matrix(matrix: CrossPlayMatrix, out_dir: Path, name: str) -> list[Path]:
    """``<name>.csv`` (means), ``<name>.stderr.csv`` and ``<name>.svg``."""
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = [out_dir / f"{name}.csv", out_dir / f"{name}.stderr.csv", out_dir / f"{name}.svg"]
    paths[0].write_text(grid_csv(matrix.labels, matrix.means()), encoding="utf-8")
    paths[1].write_text(grid_csv(matrix.labels, matrix.stderrs()), encoding="utf-8")
    paths[2].write_text(heatmap_svg(matrix, title=name), encoding="utf-8")
    return paths


def _color(t: float) -> str:
    t = min(1.0, max(0.0, t))
    for (t0, c0), (t1, c1) in zip(_PALETTE, _PALETTE[1:]):
        if t <= t1:
            u = 0.0 if t1 == t0 else (t - t0) / (t1 - t0)
            rgb = [round(a + (b - a) * u) for a, b in zip(c0, c1)]
            return "#{:02x}{:02x}{:02x}".format(*rgb)
    return "#{:02x}{:02x}{:02x}".format(*_PALETTE[-1][1])


def heatmap_svg(matrix: CrossPlayMatrix, title: str = "", cell: int = 44) -> str:
    """Heatmap of cell means on a linear scale from the matrix min to max."""
    means = matrix.means()
    flat = [v for row in means for v in row]
    lo, hi = min(flat), max(flat)
    P = matrix.size
    left, top = 120, 60
    width = left + P * cell + 20
    height = top + P * cell + 60
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="Helvetica, Arial, sans-serif">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{left}" y="24" font-size="15">{escape(title)}</text>',
        f'<text x="{left}" y="44" font-size="11" fill="#555">'
        f"rows: player 1 | columns: player 2 | scale {lo:.1f} to {hi:.1f}</text>",
    ]
    for i, label in enumerate(matrix.labels):
        y = top + i * cell + cell / 2 + 4
        out.append(
            f'<text x="{left - 6}" y="{y:.1f}" font-size="10" text-anchor="end">{escape(label)}</text>'
        )
        x = left + i * cell + cell / 2
        yb = top + P * cell + 14
        out.append(
            f'<text x="{x:.1f}" y="{yb}" font-size="10" text-anchor="end" '
            f'transform="rotate(-45 {x:.1f} {yb})">{escape(label)}</text>'
        )
    for i, row in enumerate(means):
        for j, v in enumerate(row):
            t = 1.0 if hi == lo else (v - lo) / (hi - lo)
            x, y = left + j * cell, top + i * cell
            ink = "black" if t > 0.6 else "white"
            out.append(
                f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" fill="{_color(t)}" '
                f'stroke="white" stroke-width="1"/>'
            )
            out.append(
                f'<text x="{x + cell / 2:.1f}" y="{y + cell / 2 + 4:.1f}" font-size="11" '
                f'text-anchor="middle" fill="{ink}">{v:.1f}</text>'
            )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _fmt_score(r: Optional[PairingResult]) -> str:
    return "N/A" if r is None else f"{r.mean:.2f} ± {r.stderr:.2f}"


def score_table(report: ScoreReport) -> str:
    """Plain-text table: one row per algorithm, one column per score."""
    header = ["Algorithm", *(SCORE_TITLES[n] for n in SCORE_NAMES)]
    rows = [
        [label, *(_fmt_score(scores[n]) for n in SCORE_NAMES)]
        for label, scores in report.scores.items()
    ]
    widths = [max(len(r[c]) for r in [header, *rows]) for c in range(len(header))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip() for r in [header, *rows]]
    return "\n".join(lines) + "\n"


def scores_csv(report: ScoreReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["algorithm", *(f"{n}{suffix}" for n in SCORE_NAMES for suffix in ("", "_stderr"))])
    for label, scores in report.scores.items():
        row = [label]
        for n in SCORE_NAMES:
            r = scores[n]
            row += ["NA", "NA"] if r is None else [repr(r.mean), repr(r.stderr)]
        w.writerow(row)
    return buf.getvalue()


def pearson_csv(names: Sequence[str], matrix: Sequence[Sequence[Optional[float]]]) -> str:
    return grid_csv(list(names), matrix).replace("p1\\p2", "score", 1)


def read_score_table(path: Path) -> tuple[list[str], list[str], list[list[Optional[float]]]]:
    """Parse a score CSV: first column labels, other columns numbers or ``NA``.

    Columns whose header ends in ``_stderr`` are skipped.
    """
    with path.open(encoding="utf-8", newline="") as f:
        rows = [r for r in csv.reader(f) if r]
    if len(rows) < 2:
        raise ValueError(f"{path}: need a header row and at least one data row")
    header = rows[0]
    keep = [c for c in range(1, len(header)) if not header[c].endswith("_stderr")]
    labels, columns = [], [[] for _ in keep]
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ValueError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
        labels.append(row[0])
        for slot, c in enumerate(keep):
            cell = row[c].strip()
            if cell.upper() in ("NA", "N/A", ""):
                columns[slot].append(None)
                continue
            try:
                columns[slot].append(float(cell))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: bad number {cell!r}") from None
    return [header[c] for c in keep], labels, columns
