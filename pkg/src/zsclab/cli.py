"""Command-line entry point: ``zsclab <subcommand> ...``.

Exit codes: 0 success, 2 configuration error, 3 acceptance assertion failed,
4 I/O or parse error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Sequence

from .anyplay import RestartExhausted
from .config import load_config
from .env import ConfigError
from .experiment import (
    checkerboard_check,
    intent_sweep,
    load_pool_dir,
    replace_dir,
    train_pool,
    uniform_check,
    write_pool_dir,
)
from .policy import FingerprintMismatch, ParseError, RoleMismatch, VersionError
from .report import pearson_csv, read_score_table, score_table, scores_csv, write_matrix
from .xplay import EmptyCell, aggregate_scores, crossplay_matrix, pearson_matrix

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ASSERT = 3
EXIT_IO = 4


class AssertionFailed(Exception):
    pass


def _jobs(value: int | None) -> int:
    if value is not None:
        return max(1, value)
    raw = os.environ.get("ANYPLAY_JOBS", "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"ANYPLAY_JOBS={raw!r} is not an integer") from None


def _say(msg: str) -> None:
    print(msg, file=sys.stderr)


# -- subcommands -------------------------------------------------------------


def cmd_train_pool(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    out = Path(args.out) if args.out else cfg.output_dir
    if out is None:
        raise ConfigError("no output directory: pass --out or set [experiment] output_dir")
    members = train_pool(cfg, _jobs(args.jobs))
    write_pool_dir(out, cfg, members)
    for m in members:
        d = m.diagnostics
        last = d.extrinsic_return[-1] if d.extrinsic_return else float("nan")
        _say(f"{m.run_id}: seed {m.seed}, last-epoch return {last:.2f}, restarts {d.restart_count}")
    print(f"wrote {2 * len(members)} policies to {out}")
    return EXIT_OK


def cmd_crossplay(args: argparse.Namespace) -> int:
    root = Path(args.artifact_dir)
    loaded = load_pool_dir(root)
    n_games = args.games if args.games is not None else loaded.n_games
    seed = args.seed if args.seed is not None else loaded.base_seed
    if n_games < 1:
        raise ConfigError("--games must be >= 1")
    matrix = crossplay_matrix(loaded.pool, loaded.env, n_games, seed, _jobs(args.jobs))
    report = aggregate_scores(matrix, loaded.pool, strict=False)
    out = Path(args.out) if args.out else root / "crossplay"
    out.mkdir(parents=True, exist_ok=True)
    write_matrix(matrix, out, "crossplay")
    table = score_table(report)
    (out / "scores.txt").write_text(table, encoding="utf-8")
    (out / "scores.csv").write_text(scores_csv(report), encoding="utf-8")
    names = ["sp", "intra_xp", "inter_xp", "one_szsc_xp"]
    (out / "pearson.csv").write_text(pearson_csv(names, report.pearson), encoding="utf-8")
    print(table, end="")
    return EXIT_OK


def _build_fig4(root: Path, args: argparse.Namespace, intents: list[int]) -> list[str]:
    results = intent_sweep(
        intents,
        seeds=args.seeds,
        num_episodes=args.episodes,
        n_games=args.games,
        base_seed=args.seed,
        jobs=_jobs(args.jobs),
    )
    lines = [
        f"intent sweep: seeds={args.seeds} episodes={args.episodes} games={args.games} seed={args.seed}",
    ]
    failures = []
    for r in results:
        name = f"n{r.num_intents}"
        write_matrix(r.matrix, root, name)
        flat = [v for row in r.matrix.means() for v in row]
        lines.append(f"{name}: min {min(flat):.3f} max {max(flat):.3f}")
        if r.num_intents == 1:
            ok, msg = checkerboard_check(r.matrix)
            lines.append(f"  checkerboard: {'PASS' if ok else 'FAIL'} ({msg})")
            if not ok:
                failures.append(name)
        elif r.num_intents == 4:
            ok, msg = uniform_check(r.matrix)
            lines.append(f"  uniform: {'PASS' if ok else 'FAIL'} ({msg})")
            if not ok:
                failures.append(name)
    (root / "summary.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return failures


def cmd_reproduce_fig4(args: argparse.Namespace) -> int:
    try:
        intents = [int(s) for s in args.intents.split(",") if s.strip()]
    except ValueError:
        raise ConfigError(f"--intents {args.intents!r} must be comma-separated integers") from None
    if not intents or min(intents) < 1 or len(set(intents)) != len(intents):
        raise ConfigError("--intents needs distinct positive integers")
    if args.seeds < 1 or args.games < 1 or args.episodes < 1:
        raise ConfigError("--seeds, --games and --episodes must be >= 1")
    out = Path(args.out)
    failures: list[str] = []
    replace_dir(out, lambda root: failures.extend(_build_fig4(root, args, intents)), marker="summary.txt")
    print((out / "summary.txt").read_text(encoding="utf-8"), end="")
    if failures:
        raise AssertionFailed(f"assertion failed for matrix {', '.join(failures)}")
    return EXIT_OK


def cmd_pearson(args: argparse.Namespace) -> int:
    names, _, columns = read_score_table(Path(args.scores))
    text = pearson_csv(names, pearson_matrix(columns))
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    print(text, end="")
    return EXIT_OK


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="zsclab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    tp = sub.add_parser("train-pool", help="train every pool member listed in a config")
    tp.add_argument("config")
    tp.add_argument("--out", help="artifact directory (overrides [experiment] output_dir)")
    tp.add_argument("--jobs", type=int)
    tp.set_defaults(func=cmd_train_pool)

    xp = sub.add_parser("crossplay", help="cross-play matrix, scores and heatmap for a trained pool")
    xp.add_argument("artifact_dir")
    xp.add_argument("--games", type=int)
    xp.add_argument("--seed", type=int)
    xp.add_argument("--out")
    xp.add_argument("--jobs", type=int)
    xp.set_defaults(func=cmd_crossplay)

    fg = sub.add_parser("reproduce-fig4", help="intent-count sweep with one cross-play matrix per count")
    fg.add_argument("--seeds", type=int, default=10)
    fg.add_argument("--intents", default="1,2,3,4,5,6")
    fg.add_argument("--out", default="fig4")
    fg.add_argument("--jobs", type=int)
    fg.add_argument("--games", type=int, default=2500)
    fg.add_argument("--episodes", type=int, default=50_000)
    fg.add_argument("--seed", type=int, default=0, help="base seed for match play")
    fg.set_defaults(func=cmd_reproduce_fig4)

    pc = sub.add_parser("pearson", help="correlations between the columns of a score table")
    pc.add_argument("scores")
    pc.add_argument("--out")
    pc.set_defaults(func=cmd_pearson)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, RestartExhausted, EmptyCell) as exc:
        _say(f"error: {exc}")
        return EXIT_CONFIG
    except AssertionFailed as exc:
        _say(f"error: {exc}")
        return EXIT_ASSERT
    except (OSError, ValueError, KeyError, ParseError, VersionError, FingerprintMismatch, RoleMismatch) as exc:
        _say(f"error: {exc}")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
