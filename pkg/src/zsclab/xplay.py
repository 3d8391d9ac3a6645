"""Pairwise match play, cross-play matrices and the four cooperative scores."""

from __future__ import annotations

import math
import random
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .env import Env, Role
from .policy import PolicyArtifact, RoleMismatch
from .qlearn import NO_INTENT
from .seeding import pairing_seed

DEFAULT_GAMES = 2500
SCORE_NAMES = ("sp", "intra_xp", "inter_xp", "one_szsc_xp")


class EmptyCell(ValueError):
    """A score has no constituent pairings in this pool."""


class DegenerateInput(ValueError):
    pass


@dataclass(frozen=True)
class PairingResult:
    mean: float
    stderr: float
    n_games: int
    # return value -> count; kept so pooled statistics are exact
    histogram: tuple[tuple[float, int], ...] = field(default=(), compare=False, repr=False)

    @classmethod
    def from_counts(cls, counts: Counter | dict[float, int]) -> "PairingResult":
        items = tuple(sorted((float(v), int(c)) for v, c in counts.items() if c))
        n = sum(c for _, c in items)
        if n < 1:
            raise ValueError("a pairing needs at least one game")
        if len(items) == 1:
            return cls(items[0][0], 0.0, n, items)
        mean = math.fsum(v * c for v, c in items) / n
        ss = math.fsum(c * (v - mean) ** 2 for v, c in items)
        return cls(mean, math.sqrt(ss / (n - 1)) / math.sqrt(n), n, items)


def pool_results(results: Iterable[PairingResult]) -> PairingResult:
    """Combine cells as if all their games were one sample."""
    counts: Counter = Counter()
    for r in results:
        if not r.histogram:
            raise ValueError("pooling needs per-game histograms")
        for v, c in r.histogram:
            counts[v] += c
    if not counts:
        raise EmptyCell("no games to pool")
    return PairingResult.from_counts(counts)


# -- matches -----------------------------------------------------------------


class _Seat:
    """Greedy lookups for one side of a match, with its intent protocol."""

    def __init__(self, artifact: PolicyArtifact, env: Env):
        self.actions = artifact.greedy_actions(env)
        self.conditioned = artifact.intent_conditioned
        self.frozen = artifact.frozen_intent
        self.num_intents = artifact.num_intents

    def pick_intent(self, rng: random.Random) -> int:
        if not self.conditioned:
            return NO_INTENT
        if self.frozen is not None:
            return self.frozen
        return rng.randrange(self.num_intents)


def play_match(
    p1: PolicyArtifact,
    p2: PolicyArtifact,
    env: Env,
    n_games: int = DEFAULT_GAMES,
    seed: int = 0,
) -> PairingResult:
    """Monte Carlo estimate of the greedy pair's expected return.

    A specializer with a frozen intent plays that intent every game; one
    without plays a uniformly drawn intent per game (drawn before the object).
    """
    if p1.role is not Role.PLAYER1:
        raise RoleMismatch(f"row policy has role {p1.role.value}, expected p1")
    if p2.role is not Role.PLAYER2:
        raise RoleMismatch(f"column policy has role {p2.role.value}, expected p2")
    p1.check_env(env)
    p2.check_env(env)
    if n_games < 1:
        raise ValueError("n_games must be >= 1")
    seat1 = _Seat(p1, env)
    act2 = _Seat(p2, env).actions[NO_INTENT]
    rng = random.Random(seed)
    # returns depend only on (intent, object): tabulate once
    outcome: dict[tuple[int, int], float] = {}
    for z, act1 in seat1.actions.items():
        for k in range(env.num_objects):
            a1 = act1[k]
            a2 = None if a1 == env.p1_leave else act2[env.p2_obs_after(a1, k)]
            outcome[z, k] = env.episode_return(k, a1, a2)
    counts: Counter = Counter()
    K = env.num_objects
    for _ in range(n_games):
        z = seat1.pick_intent(rng)
        counts[outcome[z, rng.randrange(K)]] += 1
    return PairingResult.from_counts(counts)


def analytic_std(p1: PolicyArtifact, p2: PolicyArtifact, env: Env) -> tuple[float, float]:
    """Exact (mean, std) of one game's return for a greedy pair."""
    seat1 = _Seat(p1, env)
    act2 = _Seat(p2, env).actions[NO_INTENT]
    if not seat1.conditioned:
        intents = [(NO_INTENT, 1.0)]
    elif seat1.frozen is not None:
        intents = [(seat1.frozen, 1.0)]
    else:
        intents = [(z, 1.0 / seat1.num_intents) for z in range(seat1.num_intents)]
    values = []
    for z, pz in intents:
        for k in range(env.num_objects):
            a1 = seat1.actions[z][k]
            a2 = None if a1 == env.p1_leave else act2[env.p2_obs_after(a1, k)]
            values.append((pz / env.num_objects, env.episode_return(k, a1, a2)))
    mean = math.fsum(w * v for w, v in values)
    var = math.fsum(w * (v - mean) ** 2 for w, v in values)
    return mean, math.sqrt(var)


# -- pools and matrices --------------------------------------------------------


@dataclass(frozen=True)
class PoolMember:
    run_id: str
    label: str
    p1: PolicyArtifact
    p2: PolicyArtifact


@dataclass
class AgentPool:
    members: list[PoolMember]
    zsc_exempt: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        unknown = set(self.zsc_exempt) - set(self.labels)
        if unknown:
            raise ValueError(f"zsc_exempt labels not in pool: {sorted(unknown)}")
        for m in self.members:
            if m.p1.role is not Role.PLAYER1 or m.p2.role is not Role.PLAYER2:
                raise RoleMismatch(f"member {m.run_id} needs one p1 and one p2 policy")

    @property
    def labels(self) -> list[str]:
        return list(dict.fromkeys(m.label for m in self.members))

    def indices(self, label: str) -> list[int]:
        return [i for i, m in enumerate(self.members) if m.label == label]


@dataclass
class CrossPlayMatrix:
    cells: list[list[PairingResult]]
    labels: list[str]  # run ids, one per row/column

    @property
    def size(self) -> int:
        return len(self.cells)

    def means(self) -> list[list[float]]:
        return [[c.mean for c in row] for row in self.cells]

    def stderrs(self) -> list[list[float]]:
        return [[c.stderr for c in row] for row in self.cells]


def _cell(args: tuple) -> PairingResult:
    p1, p2, env, n_games, seed = args
    return play_match(p1, p2, env, n_games, seed)


def crossplay_matrix(
    pool: AgentPool,
    env: Env,
    n_games: int = DEFAULT_GAMES,
    base_seed: int = 0,
    jobs: int = 1,
) -> CrossPlayMatrix:
    """Entry (i, j) pairs member i's Player 1 with member j's Player 2."""
    members = pool.members
    if not members:
        raise ValueError("pool is empty")
    P = len(members)
    tasks = [
        (members[i].p1, members[j].p2, env, n_games, pairing_seed(base_seed, i, j))
        for i in range(P)
        for j in range(P)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            flat = list(ex.map(_cell, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        flat = [_cell(t) for t in tasks]
    cells = [flat[i * P:(i + 1) * P] for i in range(P)]
    return CrossPlayMatrix(cells, [m.run_id for m in members])


# -- scores --------------------------------------------------------------------


def score_cells(matrix: CrossPlayMatrix, pool: AgentPool, label: str, score: str) -> list[tuple[int, int]]:
    """Matrix coordinates that make up ``score`` for ``label``."""
    P = matrix.size
    mine = set(pool.indices(label))
    lab = [m.label for m in pool.members]
    if score == "sp":
        return [(i, i) for i in sorted(mine)]
    if score == "intra_xp":
        return [(i, j) for i in range(P) for j in range(P) if i != j and i in mine and j in mine]
    if score == "inter_xp":
        return [
            (i, j)
            for i in range(P)
            for j in range(P)
            if (i in mine) != (j in mine) and lab[i] != lab[j]
        ]
    if score == "one_szsc_xp":
        exempt = {i for i in range(P) if lab[i] in pool.zsc_exempt}
        return [
            (i, j)
            for i in range(P)
            for j in range(P)
            if (i in mine and j in exempt) or (i in exempt and j in mine)
        ]
    raise ValueError(f"unknown score {score!r}")


def score(matrix: CrossPlayMatrix, pool: AgentPool, label: str, name: str) -> PairingResult:
    if name == "intra_xp" and len(pool.indices(label)) < 2:
        raise EmptyCell(f"{label}: intra-XP needs at least two members")
    if name == "one_szsc_xp":
        if label in pool.zsc_exempt:
            raise EmptyCell(f"{label} is in the non-ZSC set; 1SZSC-XP does not apply")
        if not pool.zsc_exempt:
            raise EmptyCell("1SZSC-XP needs a non-empty non-ZSC set")
    coords = score_cells(matrix, pool, label, name)
    if not coords:
        raise EmptyCell(f"{label}: no pairings for {name}")
    return pool_results(matrix.cells[i][j] for i, j in coords)


@dataclass
class ScoreReport:
    scores: dict[str, dict[str, Optional[PairingResult]]]
    pearson: list[list[Optional[float]]]

    def vector(self, name: str) -> list[Optional[float]]:
        return [None if s[name] is None else s[name].mean for s in self.scores.values()]


def aggregate_scores(matrix: CrossPlayMatrix, pool: AgentPool, strict: bool = True) -> ScoreReport:
    """Per-label SP / intra-XP / inter-XP / 1SZSC-XP plus their Pearson matrix.

    1SZSC-XP is absent for labels in the non-ZSC set and for every label
    when that set is empty; inter-XP is absent in a one-label pool.  With
    ``strict=False`` any other missing score is recorded as absent instead of
    raising :class:`EmptyCell`.
    """
    table: dict[str, dict[str, Optional[PairingResult]]] = {}
    for label in pool.labels:
        row: dict[str, Optional[PairingResult]] = {}
        for name in SCORE_NAMES:
            if name == "one_szsc_xp" and (label in pool.zsc_exempt or not pool.zsc_exempt):
                row[name] = None
                continue
            if name == "inter_xp" and len(pool.labels) < 2:
                row[name] = None  # single-algorithm pool: nothing to cross with
                continue
            try:
                row[name] = score(matrix, pool, label, name)
            except EmptyCell:
                if strict:
                    raise
                row[name] = None
        table[label] = row
    report = ScoreReport(table, [])
    report.pearson = pearson_matrix([report.vector(n) for n in SCORE_NAMES])
    return report


def pearson(xs: Sequence[Optional[float]], ys: Sequence[Optional[float]]) -> float:
    """Sample Pearson r over positions where both values are present."""
    if len(xs) != len(ys):
        raise ValueError("vectors differ in length")
    pairs = [(x, y) for x, y in zip(xs, ys) if x is not None and y is not None]
    if len(pairs) < 3:
        raise DegenerateInput(f"need >= 3 complete pairs, got {len(pairs)}")
    n = len(pairs)
    mx = math.fsum(x for x, _ in pairs) / n
    my = math.fsum(y for _, y in pairs) / n
    sxy = math.fsum((x - mx) * (y - my) for x, y in pairs)
    sxx = math.fsum((x - mx) ** 2 for x, _ in pairs)
    syy = math.fsum((y - my) ** 2 for _, y in pairs)
    if sxx == 0.0 or syy == 0.0:
        raise DegenerateInput("constant vector")
    r = sxy / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def pearson_matrix(columns: Sequence[Sequence[Optional[float]]]) -> list[list[Optional[float]]]:
    """Symmetric correlation matrix; ``None`` where a pair is degenerate."""
    k = len(columns)
    out: list[list[Optional[float]]] = [[None] * k for _ in range(k)]
    for a in range(k):
        for b in range(a, k):
            try:
                r = pearson(columns[a], columns[b])
            except DegenerateInput:
                r = None
            if a == b and r is not None:
                r = 1.0
            out[a][b] = out[b][a] = r
    return out
