"""Pool training, artifact directories and the intent-sweep experiment."""

from __future__ import annotations

import json
import shutil
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Iterable, Sequence, TypeVar

from .anyplay import AnyPlayConfig, FixedIntent, FrozenBestIntent, train_anyplay
from .config import ExperimentConfig, PoolSpec, member_train_config
from .env import Env, EnvConfig, make_env
from .policy import FingerprintMismatch, PolicyArtifact, load_policy, save_policy
from .qlearn import TrainConfig, TrainDiagnostics, train_baseline
from .xplay import AgentPool, CrossPlayMatrix, PoolMember, crossplay_matrix

MANIFEST = "manifest.json"

T = TypeVar("T")
R = TypeVar("R")


def run_tasks(fn: Callable[[T], R], tasks: Sequence[T], jobs: int = 1) -> list[R]:
    """Map in input order, optionally on a process pool."""
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as ex:
        return list(ex.map(fn, tasks))


@dataclass
class TrainedMember:
    run_id: str
    label: str
    algorithm: str
    seed: int
    p1: PolicyArtifact
    p2: PolicyArtifact
    diagnostics: TrainDiagnostics

    def pool_member(self) -> PoolMember:
        return PoolMember(self.run_id, self.label, self.p1, self.p2)


@dataclass(frozen=True)
class MemberTask:
    run_id: str
    label: str
    algorithm: str
    seed: int
    num_intents: int
    env: EnvConfig
    train: TrainConfig
    anyplay: AnyPlayConfig


def member_tasks(cfg: ExperimentConfig) -> list[MemberTask]:
    tasks = []
    for pool in cfg.pools:
        for i, seed in enumerate(pool.seeds):
            tasks.append(
                MemberTask(
                    run_id=f"{pool.label}-{i:02d}",
                    label=pool.label,
                    algorithm=pool.algorithm,
                    seed=seed,
                    num_intents=pool.num_intents,
                    env=cfg.env,
                    train=member_train_config(cfg, seed),
                    anyplay=replace(cfg.anyplay, num_intents=pool.num_intents),
                )
            )
    return tasks


def train_member(task: MemberTask) -> TrainedMember:
    env = make_env(task.env)
    common = dict(seed=task.seed, env=env, algorithm=task.label)
    if task.algorithm == "baseline":
        p1, p2, diag = train_baseline(env, task.train)
        return TrainedMember(
            task.run_id,
            task.label,
            task.algorithm,
            task.seed,
            PolicyArtifact.from_table(p1, num_intents=1, frozen_intent=None, **common),
            PolicyArtifact.from_table(p2, num_intents=1, frozen_intent=None, **common),
            diag,
        )
    arts = train_anyplay(env, task.train, task.anyplay)
    protocol = task.anyplay.eval_protocol
    if isinstance(protocol, FrozenBestIntent):
        frozen = arts.frozen_intent.value
    elif isinstance(protocol, FixedIntent):
        frozen = protocol.z
    else:
        frozen = None
    N = task.num_intents
    return TrainedMember(
        task.run_id,
        task.label,
        task.algorithm,
        task.seed,
        PolicyArtifact.from_table(arts.specializer, num_intents=N, frozen_intent=frozen, **common),
        PolicyArtifact.from_table(arts.accommodator, num_intents=N, frozen_intent=None, **common),
        arts.diagnostics,
    )


def train_pool(cfg: ExperimentConfig, jobs: int = 1) -> list[TrainedMember]:
    return run_tasks(train_member, member_tasks(cfg), jobs)


# -- artifact directories ------------------------------------------------------


def _json(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def _write_pool_dir(root: Path, cfg: ExperimentConfig, members: Iterable[TrainedMember]) -> None:
    (root / "policies").mkdir(parents=True)
    (root / "diagnostics").mkdir()
    entries = []
    for m in members:
        p1_rel = f"policies/{m.run_id}.p1.policy"
        p2_rel = f"policies/{m.run_id}.p2.policy"
        save_policy(m.p1, root / p1_rel)
        save_policy(m.p2, root / p2_rel)
        (root / "diagnostics" / f"{m.run_id}.json").write_text(
            _json(m.diagnostics.to_dict()), encoding="utf-8"
        )
        entries.append(
            {
                "run_id": m.run_id,
                "label": m.label,
                "algorithm": m.algorithm,
                "seed": m.seed,
                "num_intents": m.p1.num_intents,
                "p1": p1_rel,
                "p2": p2_rel,
            }
        )
    manifest = {
        "env": cfg.env.fingerprint(),
        "zsc_exempt": sorted(p.label for p in cfg.pools if p.zsc_exempt),
        "eval": {"n_games": cfg.n_games, "base_seed": cfg.base_seed},
        "members": entries,
    }
    (root / MANIFEST).write_text(_json(manifest), encoding="utf-8")


def replace_dir(out: Path, build: Callable[[Path], None], marker: str = MANIFEST) -> None:
    """Build into a sibling temp dir and swap it in; nothing partial survives.

    An existing ``out`` is replaced only if it is empty or holds ``marker``,
    i.e. it was written by us.
    """
    out = Path(out)
    if out.exists() and not (out / marker).exists() and any(out.iterdir()):
        raise FileExistsError(f"{out} exists and is not an artifact directory; refusing to replace it")
    out.parent.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=f".{out.name}.", dir=out.parent))
    try:
        build(tmp)
        if out.exists():
            shutil.rmtree(out)
        tmp.rename(out)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise


def write_pool_dir(out: Path, cfg: ExperimentConfig, members: Sequence[TrainedMember]) -> None:
    replace_dir(out, lambda root: _write_pool_dir(root, cfg, members))


@dataclass
class LoadedPool:
    env: Env
    pool: AgentPool
    n_games: int
    base_seed: int


def load_pool_dir(root: Path) -> LoadedPool:
    root = Path(root)
    manifest = json.loads((root / MANIFEST).read_text(encoding="utf-8"))
    env = make_env(EnvConfig.from_fingerprint(manifest["env"]))
    members = []
    for entry in manifest["members"]:
        p1 = load_policy(root / entry["p1"])
        p2 = load_policy(root / entry["p2"])
        for art in (p1, p2):
            if art.env_fingerprint != env.fingerprint:
                raise FingerprintMismatch(
                    f"{entry['run_id']}: policy environment [{art.env_fingerprint}] "
                    f"differs from pool environment [{env.fingerprint}]"
                )
        members.append(PoolMember(entry["run_id"], entry["label"], p1, p2))
    pool = AgentPool(members, frozenset(manifest.get("zsc_exempt", [])))
    ev = manifest.get("eval", {})
    return LoadedPool(env, pool, int(ev.get("n_games", 2500)), int(ev.get("base_seed", 0)))


# -- intent sweep ----------------------------------------------------------------


@dataclass
class SweepResult:
    num_intents: int
    matrix: CrossPlayMatrix


def sweep_config(
    num_intents: int, seeds: int, num_episodes: int, base: ExperimentConfig | None = None
) -> ExperimentConfig:
    cfg = base or ExperimentConfig()
    cfg = replace(cfg, train=replace(cfg.train, num_episodes=num_episodes))
    cfg.pools = [
        PoolSpec(
            label=f"anyplay-n{num_intents}",
            algorithm="anyplay",
            count=seeds,
            num_intents=num_intents,
            seeds=tuple(range(seeds)),
        )
    ]
    return cfg


def intent_sweep(
    intents: Sequence[int],
    seeds: int = 10,
    num_episodes: int = 50_000,
    n_games: int = 2500,
    base_seed: int = 0,
    jobs: int = 1,
) -> list[SweepResult]:
    """Train ``seeds`` runs per intent count and build each cross-play matrix."""
    configs = [sweep_config(n, seeds, num_episodes) for n in intents]
    tasks = [t for cfg in configs for t in member_tasks(cfg)]
    trained = run_tasks(train_member, tasks, jobs)
    out = []
    for idx, n in enumerate(intents):
        members = [m.pool_member() for m in trained[idx * seeds:(idx + 1) * seeds]]
        env = make_env(configs[idx].env)
        matrix = crossplay_matrix(AgentPool(members), env, n_games, base_seed, jobs)
        out.append(SweepResult(n, matrix))
    return out


def checkerboard_check(matrix: CrossPlayMatrix) -> tuple[bool, str]:
    """Single-intent criterion: a cell at or below -9 and an off-diagonal cell at or above 9."""
    means = matrix.means()
    P = matrix.size
    off = [means[i][j] for i in range(P) for j in range(P) if i != j]
    low = any(v <= -9 for row in means for v in row)
    high = any(v >= 9 for v in off)
    diag = [means[i][i] for i in range(P)]
    msg = (
        f"diagonal min {min(diag):.2f}; off-diagonal cells >= 9: {sum(v >= 9 for v in off)}, "
        f"<= -9: {sum(v <= -9 for v in off)} of {len(off)}"
    )
    return low and high, msg


def uniform_check(matrix: CrossPlayMatrix, spread: float = 0.25, floor: float = 4.5) -> tuple[bool, str]:
    """Four-intent criterion: every cell >= floor and max - min < spread."""
    flat = [v for row in matrix.means() for v in row]
    lo, hi = min(flat), max(flat)
    return lo >= floor and hi - lo < spread, f"cells in [{lo:.3f}, {hi:.3f}], spread {hi - lo:.3f}"
