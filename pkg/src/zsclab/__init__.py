"""Tabular Any-Play on a two-player referential game, with cross-play evaluation."""

from .anyplay import (
    AnyPlayConfig,
    Discriminator,
    FixedIntent,
    FrozenBestIntent,
    RestartExhausted,
    UniformIntent,
    train_anyplay,
)
from .env import ConfigError, Env, EnvConfig, Role, exact_return, make_env
from .policy import FingerprintMismatch, PolicyArtifact, load_policy, save_policy
from .qlearn import QTable, TrainConfig, train_baseline
from .xplay import (
    AgentPool,
    CrossPlayMatrix,
    PairingResult,
    PoolMember,
    aggregate_scores,
    crossplay_matrix,
    pearson,
    play_match,
)

__version__ = "0.1.0"

__all__ = [
    "AgentPool",
    "AnyPlayConfig",
    "ConfigError",
    "CrossPlayMatrix",
    "Discriminator",
    "Env",
    "EnvConfig",
    "FingerprintMismatch",
    "FixedIntent",
    "FrozenBestIntent",
    "PairingResult",
    "PolicyArtifact",
    "PoolMember",
    "QTable",
    "RestartExhausted",
    "Role",
    "TrainConfig",
    "UniformIntent",
    "aggregate_scores",
    "crossplay_matrix",
    "exact_return",
    "load_policy",
    "make_env",
    "pearson",
    "play_match",
    "save_policy",
    "train_anyplay",
    "train_baseline",
]
