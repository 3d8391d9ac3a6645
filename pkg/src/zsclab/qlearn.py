"""Tabular independent Q-learning for the two players of the referential game.

Both learners see the same team reward.  Player 1 never acts twice, so its
transition is terminal and its target is the whole return that follows its
action; Player 2's target is the reward of its own step.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .env import ConfigError, Env, Role

NO_INTENT = -1


class QTable:
    """Sparse action-value table; missing rows read as all zeros.

    Rows are keyed by ``(obs_id, intent)`` with ``intent == NO_INTENT`` for
    tables that are not intent-conditioned.
    """

    def __init__(self, role: Role, num_actions: int):
        self.role = role
        self.num_actions = num_actions
        self.rows: dict[tuple[int, int], list[float]] = {}

    def row(self, obs: int, intent: int = NO_INTENT) -> list[float]:
        """Mutable row, created on first touch."""
        key = (obs, intent)
        r = self.rows.get(key)
        if r is None:
            r = self.rows[key] = [0.0] * self.num_actions
        return r

    def get(self, obs: int, action: int, intent: int = NO_INTENT) -> float:
        r = self.rows.get((obs, intent))
        return 0.0 if r is None else r[action]

    def set(self, obs: int, action: int, value: float, intent: int = NO_INTENT) -> None:
        self.row(obs, intent)[action] = value

    def values(self, obs: int, intent: int = NO_INTENT) -> list[float]:
        r = self.rows.get((obs, intent))
        return list(r) if r is not None else [0.0] * self.num_actions

    @property
    def intent_conditioned(self) -> bool:
        return any(intent != NO_INTENT for _, intent in self.rows)

    def entries(self) -> list[tuple[int, int, int, float]]:
        """All stored ``(obs, intent, action, value)`` rows in id order."""
        out = []
        for (obs, intent), r in sorted(self.rows.items()):
            out.extend((obs, intent, a, v) for a, v in enumerate(r))
        return out

    def copy(self) -> "QTable":
        t = QTable(self.role, self.num_actions)
        t.rows = {k: list(v) for k, v in self.rows.items()}
        return t

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, QTable):
            return NotImplemented
        return (
            self.role == other.role
            and self.num_actions == other.num_actions
            and self.rows == other.rows
        )

    def __repr__(self) -> str:
        return f"QTable({self.role.value}, rows={len(self.rows)})"


@dataclass(frozen=True)
class TrainConfig:
    num_episodes: int = 50_000
    alpha: float = 0.1
    gamma: float = 1.0
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    epsilon_anneal_fraction: float = 0.8
    epoch_size: int = 500
    seed: int = 0

    def validate(self) -> None:
        if self.num_episodes < 0:
            raise ConfigError("num_episodes must be >= 0")
        if not 0.0 < self.alpha <= 1.0:
            raise ConfigError("alpha must lie in (0, 1]")
        if not 0.0 <= self.gamma <= 1.0:
            raise ConfigError("gamma must lie in [0, 1]")
        if not 0.0 <= self.epsilon_end <= self.epsilon_start <= 1.0:
            raise ConfigError("need 0 <= epsilon_end <= epsilon_start <= 1")
        if not 0.0 < self.epsilon_anneal_fraction <= 1.0:
            raise ConfigError("epsilon_anneal_fraction must lie in (0, 1]")
        if self.epoch_size < 1:
            raise ConfigError("epoch_size must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")

    def epsilon(self, episode: int) -> float:
        span = self.epsilon_anneal_fraction * self.num_episodes
        frac = 1.0 if span <= 0 else min(1.0, episode / span)
        return self.epsilon_start + (self.epsilon_end - self.epsilon_start) * frac


@dataclass
class TrainDiagnostics:
    """Per-epoch training curves.

    ``extrinsic_return`` and ``intent_loss`` average the behaviour episodes of
    each epoch.  ``greedy_return`` and ``greedy_intent_loss`` are exact
    evaluations of the greedy policies at the end of each epoch (empty for
    the baseline learner).
    """

    extrinsic_return: list[float] = field(default_factory=list)
    intent_loss: list[float] = field(default_factory=list)
    greedy_return: list[float] = field(default_factory=list)
    greedy_intent_loss: list[float] = field(default_factory=list)
    lambda_history: list[float] = field(default_factory=list)
    restart_count: int = 0
    episodes_run: int = 0

    @property
    def epochs(self) -> int:
        return len(self.extrinsic_return)

    def to_dict(self) -> dict:
        return {
            "extrinsic_return": self.extrinsic_return,
            "intent_loss": self.intent_loss,
            "greedy_return": self.greedy_return,
            "greedy_intent_loss": self.greedy_intent_loss,
            "lambda_history": self.lambda_history,
            "restart_count": self.restart_count,
            "episodes_run": self.episodes_run,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TrainDiagnostics":
        return cls(
            extrinsic_return=list(data["extrinsic_return"]),
            intent_loss=list(data["intent_loss"]),
            greedy_return=list(data.get("greedy_return", [])),
            greedy_intent_loss=list(data.get("greedy_intent_loss", [])),
            lambda_history=list(data["lambda_history"]),
            restart_count=int(data["restart_count"]),
            episodes_run=int(data["episodes_run"]),
        )


class EpochTracker:
    """Accumulates per-episode statistics into per-epoch means."""

    def __init__(self, diagnostics: TrainDiagnostics, epoch_size: int):
        self.diag = diagnostics
        self.epoch_size = epoch_size
        self._ret = 0.0
        self._loss = 0.0
        self._n = 0

    def add(self, extrinsic: float, intent_loss: float = 0.0) -> bool:
        """Record one episode; True when this closed an epoch."""
        self._ret += extrinsic
        self._loss += intent_loss
        self._n += 1
        self.diag.episodes_run += 1
        if self._n == self.epoch_size:
            self.flush()
            return True
        return False

    @property
    def pending(self) -> int:
        return self._n

    def flush(self) -> None:
        if self._n:
            self.diag.extrinsic_return.append(self._ret / self._n)
            self.diag.intent_loss.append(self._loss / self._n)
        self._ret = self._loss = 0.0
        self._n = 0


def greedy_action(row: list[float], legal: range | list[int] | None = None) -> int:
    """Argmax over ``legal`` (default: every action); ties go to the lowest id."""
    if legal is None:
        legal = range(len(row))
    best = -1
    best_v = 0.0
    for a in legal:
        v = row[a]
        if best < 0 or v > best_v:
            best, best_v = a, v
    if best < 0:
        raise ValueError("no legal actions")
    return best


def epsilon_greedy(
    row: list[float], legal: range | list[int], epsilon: float, rng: random.Random
) -> int:
    # always one uniform draw for the coin, plus one more when exploring
    if rng.random() < epsilon:
        return legal[rng.randrange(len(legal))]
    return greedy_action(row, legal)


def q_update(
    table: QTable,
    key: tuple[int, int],
    action: int,
    reward: float,
    next_key: tuple[int, int] | None,
    next_legal: range | list[int] | None,
    done: bool,
    alpha: float,
    gamma: float = 1.0,
) -> float:
    """One-step Q-learning backup; returns the TD error against the old value."""
    if done and next_key is not None:
        raise ValueError("terminal transitions have no next observation")
    target = reward
    if not done:
        if next_key is None:
            raise ValueError("non-terminal transition needs next_key")
        nxt = table.values(*next_key)
        legal = range(len(nxt)) if next_legal is None else next_legal
        target += gamma * max(nxt[a] for a in legal)
    row = table.row(*key)
    td = target - row[action]
    row[action] += alpha * td
    return td


def train_baseline(
    env: Env, config: TrainConfig, rng: random.Random | None = None
) -> tuple[QTable, QTable, TrainDiagnostics]:
    """Self-play independent Q-learning without intents."""
    config.validate()
    if rng is None:
        rng = random.Random(config.seed)
    cfg = env.config
    p1 = QTable(Role.PLAYER1, env.num_p1_actions)
    p2 = QTable(Role.PLAYER2, env.num_p2_actions)
    diag = TrainDiagnostics()
    tracker = EpochTracker(diag, config.epoch_size)
    p1_legal = range(env.num_p1_actions)
    p2_legal = range(env.num_p2_actions)
    alpha, gamma = config.alpha, config.gamma

    for episode in range(config.num_episodes):
        eps = config.epsilon(episode)
        _, obs1, _ = env.reset(rng)
        a1 = epsilon_greedy(p1.row(obs1), p1_legal, eps, rng)
        if a1 == env.p1_leave:
            r1, r2 = cfg.reward_p1_leave, 0.0
        else:
            r1 = cfg.curtain_penalty if a1 == env.p1_curtain else 0.0
            obs2 = env.p2_obs_after(a1, obs1)
            a2 = epsilon_greedy(p2.row(obs2), p2_legal, eps, rng)
            r2 = env.p2_reward(obs1, a2)
            q_update(p2, (obs2, NO_INTENT), a2, r2, None, None, True, alpha, gamma)
        q_update(p1, (obs1, NO_INTENT), a1, r1 + gamma * r2, None, None, True, alpha, gamma)
        tracker.add(r1 + r2)
    tracker.flush()
    return p1, p2, diag


def greedy_policy(table: QTable, num_obs: int, intent: int = NO_INTENT) -> list[int]:
    """Greedy action id for every observation id."""
    return [greedy_action(table.values(o, intent)) for o in range(num_obs)]
