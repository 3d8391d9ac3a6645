"""Any-Play: intent-conditioned specializer plus a discriminator on the partner's view.

Each episode samples an intent ``z``.  Player 1 (the specializer) conditions
its table on ``z``; Player 2 (the accommodator) does not see it.  A tabular
softmax discriminator predicts ``z`` from Player 2's observation after the
specializer acts, and ``lambda * log q(z | o)`` is added to the specializer's
target.  The accommodator learns from the extrinsic reward alone.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Union

from .env import ConfigError, Env, Role
from .qlearn import (
    EpochTracker,
    QTable,
    TrainConfig,
    TrainDiagnostics,
    epsilon_greedy,
    greedy_action,
    NO_INTENT,
    greedy_policy,
    q_update,
)
from .seeding import mix64

INTENT_STREAM = 0x1D7E_47A5_0C3B_9E11  # salt for the intent substream


class RestartExhausted(RuntimeError):
    pass


@dataclass(frozen=True)
class Intent:
    value: int
    num_intents: int

    def __post_init__(self) -> None:
        if not 0 <= self.value < self.num_intents:
            raise ValueError(f"intent {self.value} outside [0, {self.num_intents})")

    def one_hot(self) -> list[float]:
        v = [0.0] * self.num_intents
        v[self.value] = 1.0
        return v


@dataclass(frozen=True)
class FrozenBestIntent:
    def __str__(self) -> str:
        return "frozen_best"


@dataclass(frozen=True)
class UniformIntent:
    def __str__(self) -> str:
        return "uniform"


@dataclass(frozen=True)
class FixedIntent:
    z: int

    def __str__(self) -> str:
        return f"fixed:{self.z}"


EvalProtocol = Union[FrozenBestIntent, UniformIntent, FixedIntent]


def parse_eval_protocol(text: str) -> EvalProtocol:
    text = text.strip()
    if text == "frozen_best":
        return FrozenBestIntent()
    if text == "uniform":
        return UniformIntent()
    if text.startswith("fixed:"):
        try:
            return FixedIntent(int(text[len("fixed:"):]))
        except ValueError:
            pass
    raise ConfigError(f"unknown eval_protocol {text!r}")


@dataclass(frozen=True)
class AnyPlayConfig:
    num_intents: int = 4
    lam: float = 20.0
    eta: float = 0.5
    warmup_fraction: float = 0.4
    warmup_epochs: int | None = None
    intent_loss_drop_threshold: float = 0.25
    return_gain_threshold: float = 0.5
    lambda_multiplier: float = 2.0
    max_restarts: int = 8
    eval_protocol: EvalProtocol = FrozenBestIntent()

    def validate(self) -> None:
        if self.num_intents < 1:
            raise ConfigError("num_intents must be >= 1")
        if self.lam < 0:
            raise ConfigError("lambda must be >= 0")
        if self.eta <= 0:
            raise ConfigError("eta must be > 0")
        if self.lambda_multiplier <= 1:
            raise ConfigError("lambda_multiplier must be > 1")
        if self.max_restarts < 0:
            raise ConfigError("max_restarts must be >= 0")
        if not 0 < self.warmup_fraction <= 1:
            raise ConfigError("warmup_fraction must lie in (0, 1]")
        if isinstance(self.eval_protocol, FixedIntent) and not (
            0 <= self.eval_protocol.z < self.num_intents
        ):
            raise ConfigError("fixed eval intent out of range")

    def resolved_warmup(self, total_epochs: int) -> int:
        if self.warmup_epochs is not None:
            return max(1, self.warmup_epochs)
        return max(1, round(self.warmup_fraction * total_epochs))


# -- intents and the discriminator ----------------------------------------


def sample_intent(num_intents: int, rng: random.Random) -> Intent:
    if num_intents < 1:
        raise ValueError("num_intents must be >= 1")
    return Intent(rng.randrange(num_intents), num_intents)


def intent_rng(seed: int) -> random.Random:
    """Seeded substream for intent draws, independent of the main stream."""
    return random.Random(mix64(seed ^ INTENT_STREAM))


def softmax(logits: list[float]) -> list[float]:
    top = max(logits)
    exps = [math.exp(x - top) for x in logits]
    total = math.fsum(exps)
    return [e / total for e in exps]


class Discriminator:
    """Per-observation logits over intents; unseen observations predict uniform."""

    def __init__(self, num_intents: int, eta: float = 0.5):
        self.num_intents = num_intents
        self.eta = eta
        self.logits: dict[int, list[float]] = {}

    def logits_for(self, key: int) -> list[float]:
        row = self.logits.get(key)
        return list(row) if row is not None else [0.0] * self.num_intents

    def predict(self, key: int) -> list[float]:
        return disc_predict(self, key)

    def top1(self, key: int) -> int:
        return greedy_action(self.predict(key))


def disc_predict(disc: Discriminator, key: int) -> list[float]:
    row = disc.logits.get(key)
    if row is None:
        return [1.0 / disc.num_intents] * disc.num_intents
    return softmax(row)


def disc_loss(probs: list[float], z: int) -> float:
    """Categorical cross-entropy against a one-hot target."""
    return -math.log(probs[z])


def disc_gradient(logits: list[float], z: int) -> list[float]:
    """d loss / d logits = softmax(logits) - onehot(z)."""
    p = softmax(logits)
    p[z] -= 1.0
    return p


def disc_update(disc: Discriminator, key: int, z: int, eta: float | None = None) -> float:
    """One SGD step on ``key``'s logits; returns the loss before the step."""
    lr = disc.eta if eta is None else eta
    row = disc.logits.get(key)
    if row is None:
        row = disc.logits[key] = [0.0] * disc.num_intents
    p = softmax(row)
    loss = -math.log(p[z])
    for i in range(len(row)):
        row[i] -= lr * (p[i] - (1.0 if i == z else 0.0))
    return loss


def intrinsic_reward(disc: Discriminator, key: int, z: int, lam: float) -> float:
    return -lam * disc_loss(disc_predict(disc, key), z)


# -- lambda controller -----------------------------------------------------


@dataclass(frozen=True)
class Continue:
    pass


@dataclass(frozen=True)
class Restart:
    new_lambda: float


Decision = Union[Continue, Restart]


def random_policy_return(env: Env) -> float:
    """Expected return when both players act uniformly at random."""
    total = 0.0
    n1, n2 = env.num_p1_actions, env.num_p2_actions
    for k in range(env.num_objects):
        for a1 in range(n1):
            if a1 == env.p1_leave:
                total += env.episode_return(k, a1, None) / n1
                continue
            for a2 in range(n2):
                total += env.episode_return(k, a1, a2) / (n1 * n2)
    return total / env.num_objects


def greedy_evaluation(
    env: Env, spec: QTable, accomm: QTable, disc: Discriminator
) -> tuple[float, float]:
    """Exact (intent loss, self-play return) of the current greedy play-styles.

    Both are averaged uniformly over intents; the loss also over objects.
    """
    N = disc.num_intents
    p2 = greedy_policy(accomm, env.num_p2_obs)
    losses, returns = [], []
    for z in range(N):
        p1 = greedy_policy(spec, env.num_p1_obs, z)
        returns.append(env.exact_return(lambda o: p1[o], lambda o: p2[o]))
        for k in range(env.num_objects):
            losses.append(disc_loss(disc_predict(disc, env.p2_obs_after(p1[k], k)), z))
    return math.fsum(losses) / len(losses), math.fsum(returns) / N


CONTROLLER_WINDOW = 3


def lambda_controller(
    diagnostics: TrainDiagnostics,
    lam: float,
    epoch: int,
    config: AnyPlayConfig,
    *,
    random_return: float,
    total_epochs: int | None = None,
) -> Decision:
    """Decide at the end of warmup whether to restart with a rescaled lambda.

    Only the epoch equal to the warmup length is judged, on trailing means
    (last ``CONTROLLER_WINDOW`` epochs) of the greedy evaluations.  The intent
    loss is measured against its untrained value ``log N``; with one intent the
    intrinsic term vanishes, lambda has no effect, and the run always continues.
    """
    if epoch < 1:
        raise ValueError("epoch must be >= 1")
    warmup = config.resolved_warmup(total_epochs if total_epochs is not None else epoch)
    if epoch != warmup or config.num_intents == 1:
        return Continue()
    window = slice(max(0, epoch - CONTROLLER_WINDOW), epoch)
    losses = diagnostics.greedy_intent_loss[window]
    returns = diagnostics.greedy_return[window]
    initial = math.log(config.num_intents)
    loss_now = math.fsum(losses) / len(losses)
    if (initial - loss_now) / initial < config.intent_loss_drop_threshold:
        return Restart(lam * config.lambda_multiplier)
    if math.fsum(returns) / len(returns) - random_return < config.return_gain_threshold:
        return Restart(lam / config.lambda_multiplier)
    return Continue()


# -- training ----------------------------------------------------------------


@dataclass
class AnyPlayArtifacts:
    specializer: QTable
    accommodator: QTable
    discriminator: Discriminator
    frozen_intent: Intent | None
    diagnostics: TrainDiagnostics
    config: AnyPlayConfig = field(default_factory=AnyPlayConfig)

    @property
    def num_intents(self) -> int:
        return self.discriminator.num_intents


def _train_once(
    env: Env,
    config: TrainConfig,
    ap: AnyPlayConfig,
    lam: float,
    rng: random.Random,
    zrng: random.Random,
    diag: TrainDiagnostics,
) -> tuple[QTable, QTable, Discriminator, Decision]:
    cfg = env.config
    spec = QTable(Role.PLAYER1, env.num_p1_actions)
    accomm = QTable(Role.PLAYER2, env.num_p2_actions)
    disc = Discriminator(ap.num_intents, ap.eta)
    tracker = EpochTracker(diag, config.epoch_size)
    total_epochs = -(-config.num_episodes // config.epoch_size)
    random_return = random_policy_return(env)
    p1_legal = range(env.num_p1_actions)
    p2_legal = range(env.num_p2_actions)
    alpha, gamma, eta = config.alpha, config.gamma, ap.eta
    N = ap.num_intents

    for episode in range(config.num_episodes):
        eps = config.epsilon(episode)
        z = zrng.randrange(N)
        _, obs1, _ = env.reset(rng)
        a1 = epsilon_greedy(spec.row(obs1, z), p1_legal, eps, rng)
        obs2 = env.p2_obs_after(a1, obs1)
        loss = disc_update(disc, obs2, z, eta)
        bonus = -lam * loss
        if a1 == env.p1_leave:
            r1, r2 = cfg.reward_p1_leave, 0.0
        else:
            r1 = cfg.curtain_penalty if a1 == env.p1_curtain else 0.0
            a2 = epsilon_greedy(accomm.row(obs2), p2_legal, eps, rng)
            r2 = env.p2_reward(obs1, a2)
            q_update(accomm, (obs2, NO_INTENT), a2, r2, None, None, True, alpha, gamma)
        q_update(spec, (obs1, z), a1, (r1 + bonus) + gamma * r2, None, None, True, alpha, gamma)
        if tracker.add(r1 + r2, loss):
            g_loss, g_ret = greedy_evaluation(env, spec, accomm, disc)
            diag.greedy_intent_loss.append(g_loss)
            diag.greedy_return.append(g_ret)
            decision = lambda_controller(
                diag, lam, diag.epochs, ap, random_return=random_return, total_epochs=total_epochs
            )
            if isinstance(decision, Restart):
                return spec, accomm, disc, decision
    if tracker.pending:
        tracker.flush()
        g_loss, g_ret = greedy_evaluation(env, spec, accomm, disc)
        diag.greedy_intent_loss.append(g_loss)
        diag.greedy_return.append(g_ret)
    return spec, accomm, disc, Continue()


def train_anyplay(
    env: Env,
    config: TrainConfig,
    ap: AnyPlayConfig,
    rng: random.Random | None = None,
    zrng: random.Random | None = None,
) -> AnyPlayArtifacts:
    """Train a specializer/accommodator pair, restarting when lambda is off-scale.

    ``rng`` drives object draws and exploration exactly as in
    :func:`~zsclab.qlearn.train_baseline`; intents come from ``zrng`` (by
    default a substream derived from ``config.seed``).
    """
    config.validate()
    ap.validate()
    if rng is None:
        rng = random.Random(config.seed)
    if zrng is None:
        zrng = intent_rng(config.seed)
    start = (rng.getstate(), zrng.getstate())
    lam = ap.lam
    tried: list[float] = []
    while True:
        rng.setstate(start[0])
        zrng.setstate(start[1])
        tried.append(lam)
        diag = TrainDiagnostics(lambda_history=list(tried), restart_count=len(tried) - 1)
        spec, accomm, disc, decision = _train_once(env, config, ap, lam, rng, zrng, diag)
        if isinstance(decision, Continue):
            break
        if len(tried) > ap.max_restarts:
            raise RestartExhausted(
                f"lambda controller still unsatisfied after {ap.max_restarts} restarts "
                f"(lambdas tried: {tried})"
            )
        lam = decision.new_lambda
    arts = AnyPlayArtifacts(spec, accomm, disc, None, diag, ap)
    if isinstance(ap.eval_protocol, FrozenBestIntent):
        arts.frozen_intent = select_frozen_intent(arts, env)
    return arts


def specializer_policy(table: QTable, env: Env, z: int) -> list[int]:
    return greedy_policy(table, env.num_p1_obs, z)


def select_frozen_intent(artifacts: AnyPlayArtifacts, env: Env) -> Intent:
    """Intent whose greedy play-style scores best with the training partner."""
    N = artifacts.num_intents
    p2 = greedy_policy(artifacts.accommodator, env.num_p2_obs)
    best, best_v = 0, -math.inf
    for z in range(N):
        p1 = specializer_policy(artifacts.specializer, env, z)
        v = env.exact_return(lambda o: p1[o], lambda o: p2[o])
        if v > best_v:
            best, best_v = z, v
    return Intent(best, N)


def intent_action_map(artifacts: AnyPlayArtifacts, env: Env) -> list[tuple[int, ...]]:
    """Greedy specializer action per object, for each intent."""
    return [
        tuple(specializer_policy(artifacts.specializer, env, z))
        for z in range(artifacts.num_intents)
    ]


def discriminator_accuracy(artifacts: AnyPlayArtifacts, env: Env) -> float:
    """Top-1 accuracy on the observations produced by the greedy specializer."""
    hits = total = 0
    for z in range(artifacts.num_intents):
        policy = specializer_policy(artifacts.specializer, env, z)
        for k in range(env.num_objects):
            obs2 = env.p2_obs_after(policy[k], k)
            hits += artifacts.discriminator.top1(obs2) == z
            total += 1
    return hits / total
