import pytest

from zsclab.anyplay import FixedIntent, UniformIntent
from zsclab.config import load_config, member_train_config, parse_config
from zsclab.env import ConfigError, EnvConfig

FULL = """
# experiment
[env]
num_objects = 3
curtain_penalty = -4.5   # cheaper curtain

[train]
num_episodes = 1000
alpha = 0.2

[anyplay]
lambda = 8
eval_protocol = uniform

[eval]
n_games = 100
base_seed = 9

[experiment]
output_dir = runs/out

[pool.baseline]
algorithm = baseline
count = 3
seed_base = 10
zsc_exempt = yes

[pool.ap4]
algorithm = anyplay
count = 2
num_intents = 4
seeds = 7, 99
"""


def test_full_config(tmp_path):
    path = tmp_path / "exp.ini"
    path.write_text(FULL)
    cfg = load_config(path)
    assert cfg.env == EnvConfig(num_objects=3, curtain_penalty=-4.5)
    assert (cfg.train.num_episodes, cfg.train.alpha) == (1000, 0.2)
    assert cfg.anyplay.lam == 8.0 and cfg.anyplay.eval_protocol == UniformIntent()
    assert (cfg.n_games, cfg.base_seed) == (100, 9)
    assert cfg.output_dir == tmp_path / "runs" / "out"
    base, ap = cfg.pools
    assert (base.label, base.seeds, base.zsc_exempt, base.num_intents) == ("baseline", (10, 11, 12), True, 1)
    assert (ap.label, ap.seeds, ap.num_intents) == ("ap4", (7, 99), 4)
    assert member_train_config(cfg, 99).seed == 99
    assert member_train_config(cfg, 99).num_episodes == 1000


def test_defaults_when_sections_absent():
    cfg = parse_config("[env]\n[pool.b]\ncount = 2\n")
    assert cfg.env == EnvConfig()
    assert cfg.pools[0].algorithm == "baseline" and cfg.pools[0].seeds == (0, 1)
    assert cfg.train.num_episodes == 50_000 and cfg.n_games == 2500


def test_bare_pool_section():
    cfg = parse_config("[env]\n[pool]\nlabel = ap\nnum_intents = 2\ncount = 1\n")
    assert cfg.pools[0].algorithm == "anyplay" and cfg.pools[0].num_intents == 2


def test_fixed_protocol():
    cfg = parse_config("[env]\n[anyplay]\neval_protocol = fixed:3\n[pool.a]\ncount=1\n")
    assert cfg.anyplay.eval_protocol == FixedIntent(3)


@pytest.mark.parametrize(
    "text,needle",
    [
        ("[train]\nalpha = 0.1\n", "[env]"),
        ("[env]\ncolour = red\n[pool.a]\ncount=1\n", "colour"),
        ("[env]\n[widgets]\n[pool.a]\ncount=1\n", "widgets"),
        ("[env]\nnum_objects = two\n[pool.a]\ncount=1\n", "num_objects"),
        ("[env]\nnum_objects = 1\n[pool.a]\ncount=1\n", "num_objects"),
        ("[env]\n", "pool"),
        ("[env]\n[pool.a]\ncount = 0\n", "count"),
        ("[env]\n[pool.a]\ncount = 2\nseeds = 1\n", "seeds"),
        ("[env]\n[pool.a]\ncount = 1\nalgorithm = ppo\n", "algorithm"),
        ("[env]\n[pool.a]\ncount = 1\n[pool.a]\ncount = 1\n", "a"),
        ("[env]\n[pool]\ncount = 1\n", "label"),
        ("[env]\n[pool.a b]\ncount = 1\n", "label"),
        ("[env]\n[eval]\nn_games = 0\n[pool.a]\ncount = 1\n", "n_games"),
        ("[env]\n[anyplay]\neta = 0\n[pool.a]\ncount = 1\n", "eta"),
        ("[env]\n[train]\nalpha = 2\n[pool.a]\ncount = 1\n", "alpha"),
        ("no section header\n", "malformed"),
    ],
)
def test_errors(text, needle):
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    assert needle in str(exc.value)
