"""Two-player referential game played in alternating turns.

Player 1 sees a hidden object and may leave, send one of ``M`` messages, or
lift the curtain (paying a penalty) so Player 2 sees the object.  Player 2
then leaves or guesses the object.  The team reward is shared.

Actions and observations are plain integers inside the training loops.  The
canonical orderings are

    Player 1 actions:       0 = Leave, 1..M = Message(m), M+1 = LiftCurtain
    Player 2 actions:       0 = Leave, 1..K = Guess(k)
    Player 1 observations:  k = ObjectSeen(k)
    Player 2 observations:  0 = Initial, 1..M = MessageHeard(m),
                            M+1..M+K = CurtainRevealed(k), M+K+1 = P1Left

:class:`Action` and :class:`ObservationKey` are the readable forms of those ids.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, fields
from typing import Callable, Mapping, Union

__all__ = [
    "Action",
    "ConfigError",
    "Env",
    "EnvConfig",
    "EpisodeState",
    "IncompletePolicy",
    "ObservationKey",
    "Phase",
    "PhaseError",
    "Role",
    "StepResult",
    "exact_return",
    "legal_actions",
    "make_env",
    "reset",
    "step",
]


class ConfigError(ValueError):
    pass


class PhaseError(RuntimeError):
    pass


class IncompletePolicy(KeyError):
    pass


class Role(enum.Enum):
    PLAYER1 = "p1"
    PLAYER2 = "p2"


class Phase(enum.Enum):
    P1_TURN = "p1_turn"
    P2_TURN = "p2_turn"
    TERMINAL = "terminal"


@dataclass(frozen=True)
class EnvConfig:
    num_objects: int = 2
    num_messages: int = 2
    reward_p1_leave: float = 1.0
    reward_p2_leave: float = 0.5
    curtain_penalty: float = -5.0
    reward_correct: float = 10.0
    reward_incorrect: float = -10.0

    def validate(self) -> None:
        if self.num_objects < 2:
            raise ConfigError(f"num_objects must be >= 2, got {self.num_objects}")
        if self.num_messages < 1:
            raise ConfigError(f"num_messages must be >= 1, got {self.num_messages}")
        if self.curtain_penalty > 0:
            raise ConfigError("curtain_penalty must be <= 0")
        if not (
            self.reward_correct
            > self.reward_p1_leave
            > self.reward_p2_leave
            > self.reward_incorrect
        ):
            raise ConfigError(
                "rewards must satisfy correct > p1_leave > p2_leave > incorrect"
            )

    def fingerprint(self) -> str:
        """Canonical ``key=value;...`` serialization used to match policies to envs."""
        parts = []
        for f in fields(self):
            value = getattr(self, f.name)
            parts.append(f"{f.name}={value!r}" if isinstance(value, float) else f"{f.name}={value}")
        return ";".join(parts)

    @classmethod
    def from_fingerprint(cls, text: str) -> "EnvConfig":
        kinds = {f.name: f.type for f in fields(cls)}
        values: dict[str, Union[int, float]] = {}
        for part in text.split(";"):
            name, sep, raw = part.partition("=")
            if not sep or name not in kinds:
                raise ConfigError(f"bad env fingerprint component {part!r}")
            values[name] = int(raw) if kinds[name] == "int" else float(raw)
        return cls(**values)


@dataclass(frozen=True)
class Action:
    """Readable action. ``kind`` is one of leave/message/curtain/guess."""

    kind: str
    arg: int | None = None

    def __str__(self) -> str:
        return self.kind if self.arg is None else f"{self.kind}({self.arg})"


LEAVE = Action("leave")
CURTAIN = Action("curtain")


def message(m: int) -> Action:
    return Action("message", m)


def guess(k: int) -> Action:
    return Action("guess", k)


@dataclass(frozen=True)
class ObservationKey:
    role: Role
    kind: str  # object_seen | initial | message_heard | curtain_revealed | p1_left
    arg: int | None = None

    def __str__(self) -> str:
        base = f"{self.role.value}:{self.kind}"
        return base if self.arg is None else f"{base}({self.arg})"


@dataclass(frozen=True)
class EpisodeState:
    object_id: int
    phase: Phase = Phase.P1_TURN
    p1_action: int | None = None
    accumulated_reward: float = 0.0
    step_count: int = 0


@dataclass(frozen=True)
class StepResult:
    next_state: EpisodeState
    obs_p1: int
    obs_p2: int
    reward: float
    done: bool


class Env:
    """Immutable game handle; all per-episode data lives in :class:`EpisodeState`."""

    def __init__(self, config: EnvConfig):
        config.validate()
        self.config = config
        K, M = config.num_objects, config.num_messages
        self.num_objects = K
        self.num_messages = M
        self.num_p1_actions = M + 2
        self.num_p2_actions = K + 1
        self.num_p1_obs = K
        self.num_p2_obs = M + K + 2
        self.p1_leave = 0
        self.p1_curtain = M + 1
        self.p2_leave = 0
        self.obs_initial = 0
        self.obs_p1_left = M + K + 1
        # P2 observation produced by each P1 action, before the object is known;
        # curtain is resolved per object.
        self._p2_obs_after = [self.obs_p1_left] + [1 + m for m in range(M)] + [None]

    def __repr__(self) -> str:
        return f"Env({self.config.fingerprint()})"

    @property
    def fingerprint(self) -> str:
        return self.config.fingerprint()

    def p2_obs_after(self, p1_action: int, object_id: int) -> int:
        """Player 2's observation after Player 1 plays ``p1_action``."""
        if p1_action == self.p1_curtain:
            return self.num_messages + 1 + object_id
        return self._p2_obs_after[p1_action]

    # -- id <-> readable conversions -------------------------------------

    def num_actions(self, role: Role) -> int:
        return self.num_p1_actions if role is Role.PLAYER1 else self.num_p2_actions

    def num_observations(self, role: Role) -> int:
        return self.num_p1_obs if role is Role.PLAYER1 else self.num_p2_obs

    def action_id(self, role: Role, action: Action) -> int:
        M, K = self.num_messages, self.num_objects
        if action.kind == "leave":
            return 0
        if role is Role.PLAYER1:
            if action.kind == "message" and action.arg is not None and 0 <= action.arg < M:
                return 1 + action.arg
            if action.kind == "curtain":
                return M + 1
        elif action.kind == "guess" and action.arg is not None and 0 <= action.arg < K:
            return 1 + action.arg
        raise PhaseError(f"{action} is not a {role.value} action")

    def action_of(self, role: Role, action_id: int) -> Action:
        if not 0 <= action_id < self.num_actions(role):
            raise ValueError(f"action id {action_id} out of range for {role.value}")
        if action_id == 0:
            return LEAVE
        if role is Role.PLAYER1:
            return CURTAIN if action_id == self.p1_curtain else message(action_id - 1)
        return guess(action_id - 1)

    def obs_id(self, key: ObservationKey) -> int:
        M, K = self.num_messages, self.num_objects
        if key.role is Role.PLAYER1:
            if key.kind == "object_seen" and key.arg is not None and 0 <= key.arg < K:
                return key.arg
        elif key.kind == "initial":
            return 0
        elif key.kind == "message_heard" and key.arg is not None and 0 <= key.arg < M:
            return 1 + key.arg
        elif key.kind == "curtain_revealed" and key.arg is not None and 0 <= key.arg < K:
            return M + 1 + key.arg
        elif key.kind == "p1_left":
            return M + K + 1
        raise ValueError(f"invalid observation key {key}")

    def obs_of(self, role: Role, obs_id: int) -> ObservationKey:
        M, K = self.num_messages, self.num_objects
        if not 0 <= obs_id < self.num_observations(role):
            raise ValueError(f"observation id {obs_id} out of range for {role.value}")
        if role is Role.PLAYER1:
            return ObservationKey(role, "object_seen", obs_id)
        if obs_id == 0:
            return ObservationKey(role, "initial")
        if obs_id <= M:
            return ObservationKey(role, "message_heard", obs_id - 1)
        if obs_id <= M + K:
            return ObservationKey(role, "curtain_revealed", obs_id - M - 1)
        return ObservationKey(role, "p1_left")

    # -- dynamics ----------------------------------------------------------

    def reset(self, rng: random.Random) -> tuple[EpisodeState, int, int]:
        object_id = rng.randrange(self.num_objects)
        return EpisodeState(object_id), object_id, self.obs_initial

    def step(self, state: EpisodeState, action: int) -> StepResult:
        cfg = self.config
        if state.phase is Phase.P1_TURN:
            if not 0 <= action < self.num_p1_actions:
                raise PhaseError(f"action {action} is not a player-1 action")
            obs_p2 = self.p2_obs_after(action, state.object_id)
            if action == self.p1_leave:
                reward, phase, done = cfg.reward_p1_leave, Phase.TERMINAL, True
            elif action == self.p1_curtain:
                reward, phase, done = cfg.curtain_penalty, Phase.P2_TURN, False
            else:
                reward, phase, done = 0.0, Phase.P2_TURN, False
            p1_action = action
        elif state.phase is Phase.P2_TURN:
            if not 0 <= action < self.num_p2_actions:
                raise PhaseError(f"action {action} is not a player-2 action")
            reward = self.p2_reward(state.object_id, action)
            obs_p2 = self.p2_obs_after(state.p1_action, state.object_id)
            phase, done, p1_action = Phase.TERMINAL, True, state.p1_action
        else:
            raise PhaseError("step called on a terminal state")
        nxt = EpisodeState(
            object_id=state.object_id,
            phase=phase,
            p1_action=p1_action,
            accumulated_reward=state.accumulated_reward + reward,
            step_count=state.step_count + 1,
        )
        return StepResult(nxt, state.object_id, obs_p2, reward, done)

    def legal_actions(self, state: EpisodeState) -> range:
        if state.phase is Phase.P1_TURN:
            return range(self.num_p1_actions)
        if state.phase is Phase.P2_TURN:
            return range(self.num_p2_actions)
        raise PhaseError("no legal actions in a terminal state")

    # -- exact evaluation --------------------------------------------------

    def p2_reward(self, object_id: int, p2_action: int) -> float:
        cfg = self.config
        if p2_action == self.p2_leave:
            return cfg.reward_p2_leave
        return cfg.reward_correct if p2_action - 1 == object_id else cfg.reward_incorrect

    def episode_return(self, object_id: int, p1_action: int, p2_action: int | None) -> float:
        """Undiscounted return of one episode (``p2_action`` unused after a P1 leave)."""
        cfg = self.config
        if p1_action == self.p1_leave:
            return cfg.reward_p1_leave
        first = cfg.curtain_penalty if p1_action == self.p1_curtain else 0.0
        if p2_action is None:
            raise IncompletePolicy("player 2 must act after a non-leave player-1 action")
        return first + self.p2_reward(object_id, p2_action)

    def exact_return(self, p1_policy: PolicyLike, p2_policy: PolicyLike) -> float:
        """Expected return of a deterministic policy pair over the uniform object draw.

        Policies map observation ids (or :class:`ObservationKey`) to action ids
        (or :class:`Action`); callables are also accepted.
        """
        p1 = _as_lookup(self, Role.PLAYER1, p1_policy)
        p2 = _as_lookup(self, Role.PLAYER2, p2_policy)
        total = 0.0
        for k in range(self.num_objects):
            a1 = p1(k)
            a2 = None if a1 == self.p1_leave else p2(self.p2_obs_after(a1, k))
            total += self.episode_return(k, a1, a2)
        return total / self.num_objects


PolicyLike = Union[Mapping, Callable[[int], Union[int, Action]]]


def _as_lookup(env: Env, role: Role, policy: PolicyLike) -> Callable[[int], int]:
    def lookup(obs: int) -> int:
        if callable(policy):
            action = policy(obs)
        elif obs in policy:
            action = policy[obs]
        else:
            key = env.obs_of(role, obs)
            if key not in policy:
                raise IncompletePolicy(f"{role.value} policy has no action for {key}")
            action = policy[key]
        if isinstance(action, Action):
            return env.action_id(role, action)
        if not 0 <= action < env.num_actions(role):
            raise ValueError(f"{role.value} policy returned invalid action {action}")
        return action

    return lookup


def make_env(config: EnvConfig | None = None) -> Env:
    return Env(config or EnvConfig())


def reset(env: Env, rng: random.Random) -> tuple[EpisodeState, int, int]:
    return env.reset(rng)


def step(env: Env, state: EpisodeState, action: int) -> StepResult:
    return env.step(state, action)


def legal_actions(env: Env, state: EpisodeState) -> range:
    return env.legal_actions(state)


def exact_return(env: Env, p1_policy: PolicyLike, p2_policy: PolicyLike) -> float:
    return env.exact_return(p1_policy, p2_policy)
