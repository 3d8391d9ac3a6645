"""INI experiment configuration.

Sections: ``[env]`` (required), ``[train]``, ``[anyplay]``, ``[eval]``,
``[experiment]`` (``output_dir``) and one ``[pool.<label>]`` per algorithm::

    [pool.baseline]
    algorithm = baseline
    count = 10
    seed_base = 0
    zsc_exempt = true

    [pool.anyplay4]
    algorithm = anyplay
    count = 10
    num_intents = 4
    seeds = 100, 101, 102

A bare ``[pool]`` section with a ``label`` key is accepted as well.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

from .anyplay import AnyPlayConfig, parse_eval_protocol
from .env import ConfigError, EnvConfig
from .qlearn import TrainConfig
from .xplay import DEFAULT_GAMES

ALGORITHMS = ("baseline", "anyplay")


@dataclass(frozen=True)
class PoolSpec:
    label: str
    algorithm: str
    count: int
    num_intents: int = 1
    seeds: tuple[int, ...] = ()
    zsc_exempt: bool = False


@dataclass
class ExperimentConfig:
    env: EnvConfig = field(default_factory=EnvConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    anyplay: AnyPlayConfig = field(default_factory=AnyPlayConfig)
    n_games: int = DEFAULT_GAMES
    base_seed: int = 0
    pools: list[PoolSpec] = field(default_factory=list)
    output_dir: Path | None = None


def _get(section: configparser.SectionProxy, key: str, kind, default):
    if key not in section:
        return default
    raw = section[key].strip()
    try:
        if kind is bool:
            return section.getboolean(key)
        return kind(raw)
    except ValueError:
        raise ConfigError(f"[{section.name}] {key} = {raw!r} is not a valid {kind.__name__}") from None


def _unknown(section: configparser.SectionProxy, allowed: set[str]) -> None:
    extra = set(section.keys()) - allowed
    if extra:
        raise ConfigError(f"[{section.name}] unknown keys: {', '.join(sorted(extra))}")


def _env(section: configparser.SectionProxy) -> EnvConfig:
    d = EnvConfig()
    keys = {
        "num_objects": int,
        "num_messages": int,
        "reward_p1_leave": float,
        "reward_p2_leave": float,
        "curtain_penalty": float,
        "reward_correct": float,
        "reward_incorrect": float,
    }
    _unknown(section, set(keys))
    cfg = EnvConfig(**{k: _get(section, k, t, getattr(d, k)) for k, t in keys.items()})
    cfg.validate()
    return cfg


def _train(section: configparser.SectionProxy | None) -> TrainConfig:
    d = TrainConfig()
    if section is None:
        return d
    keys = {
        "num_episodes": int,
        "alpha": float,
        "gamma": float,
        "epsilon_start": float,
        "epsilon_end": float,
        "epsilon_anneal_fraction": float,
        "epoch_size": int,
    }
    _unknown(section, set(keys))
    cfg = TrainConfig(**{k: _get(section, k, t, getattr(d, k)) for k, t in keys.items()})
    cfg.validate()
    return cfg


def _anyplay(section: configparser.SectionProxy | None) -> AnyPlayConfig:
    d = AnyPlayConfig()
    if section is None:
        return d
    _unknown(
        section,
        {
            "num_intents",
            "lambda",
            "eta",
            "warmup_fraction",
            "intent_loss_drop_threshold",
            "return_gain_threshold",
            "lambda_multiplier",
            "max_restarts",
            "eval_protocol",
        },
    )
    cfg = AnyPlayConfig(
        num_intents=_get(section, "num_intents", int, d.num_intents),
        lam=_get(section, "lambda", float, d.lam),
        eta=_get(section, "eta", float, d.eta),
        warmup_fraction=_get(section, "warmup_fraction", float, d.warmup_fraction),
        intent_loss_drop_threshold=_get(
            section, "intent_loss_drop_threshold", float, d.intent_loss_drop_threshold
        ),
        return_gain_threshold=_get(section, "return_gain_threshold", float, d.return_gain_threshold),
        lambda_multiplier=_get(section, "lambda_multiplier", float, d.lambda_multiplier),
        max_restarts=_get(section, "max_restarts", int, d.max_restarts),
        eval_protocol=parse_eval_protocol(section["eval_protocol"])
        if "eval_protocol" in section
        else d.eval_protocol,
    )
    cfg.validate()
    return cfg


def _pool(label: str, section: configparser.SectionProxy, default_intents: int) -> PoolSpec:
    _unknown(
        section,
        {"label", "algorithm", "count", "num_intents", "seeds", "seed_base", "zsc_exempt"},
    )
    algorithm = section.get("algorithm", "").strip()
    if not algorithm:
        algorithm = "anyplay" if "num_intents" in section else "baseline"
    if algorithm not in ALGORITHMS:
        raise ConfigError(f"[{section.name}] algorithm must be one of {ALGORITHMS}")
    count = _get(section, "count", int, 0)
    if count < 1:
        raise ConfigError(f"[{section.name}] count must be >= 1")
    if "seeds" in section:
        try:
            seeds = tuple(int(s) for s in section["seeds"].replace(",", " ").split())
        except ValueError:
            raise ConfigError(f"[{section.name}] seeds must be integers") from None
        if len(seeds) != count:
            raise ConfigError(f"[{section.name}] lists {len(seeds)} seeds for count = {count}")
    else:
        base = _get(section, "seed_base", int, 0)
        seeds = tuple(base + i for i in range(count))
    num_intents = 1
    if algorithm == "anyplay":
        num_intents = _get(section, "num_intents", int, default_intents)
        if num_intents < 1:
            raise ConfigError(f"[{section.name}] num_intents must be >= 1")
    return PoolSpec(
        label=label,
        algorithm=algorithm,
        count=count,
        num_intents=num_intents,
        seeds=seeds,
        zsc_exempt=_get(section, "zsc_exempt", bool, False),
    )


def parse_config(text: str, base_dir: str | os.PathLike | None = None) -> ExperimentConfig:
    parser = configparser.ConfigParser(
        comment_prefixes=("#", ";"), inline_comment_prefixes=("#",), interpolation=None
    )
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    if not parser.has_section("env"):
        raise ConfigError("missing required section [env]")
    get = lambda name: parser[name] if parser.has_section(name) else None  # noqa: E731

    cfg = ExperimentConfig(
        env=_env(parser["env"]),
        train=_train(get("train")),
        anyplay=_anyplay(get("anyplay")),
    )
    ev = get("eval")
    if ev is not None:
        _unknown(ev, {"n_games", "base_seed"})
        cfg.n_games = _get(ev, "n_games", int, cfg.n_games)
        cfg.base_seed = _get(ev, "base_seed", int, cfg.base_seed)
        if cfg.n_games < 1:
            raise ConfigError("[eval] n_games must be >= 1")
    exp = get("experiment")
    if exp is not None:
        _unknown(exp, {"output_dir"})
        if "output_dir" in exp:
            out = Path(exp["output_dir"].strip())
            cfg.output_dir = out if out.is_absolute() or base_dir is None else Path(base_dir) / out

    for name in parser.sections():
        if name == "pool":
            label = parser[name].get("label", "").strip()
            if not label:
                raise ConfigError("[pool] needs a label key")
        elif name.startswith("pool."):
            label = name[len("pool."):].strip()
        else:
            if name not in ("env", "train", "anyplay", "eval", "experiment"):
                raise ConfigError(f"unknown section [{name}]")
            continue
        if any(p.label == label for p in cfg.pools):
            raise ConfigError(f"duplicate pool label {label!r}")
        if not label.replace("-", "").replace("_", "").replace("+", "").isalnum():
            raise ConfigError(f"pool label {label!r} may only use letters, digits, - _ +")
        cfg.pools.append(_pool(label, parser[name], cfg.anyplay.num_intents))
    if not cfg.pools:
        raise ConfigError("config defines no [pool.<label>] section")
    return cfg


def load_config(path: str | os.PathLike) -> ExperimentConfig:
    path = Path(path)
    return parse_config(path.read_text(encoding="utf-8"), base_dir=path.parent)


def member_train_config(cfg: ExperimentConfig, seed: int) -> TrainConfig:
    return replace(cfg.train, seed=seed)
