"""Role-tagged policy artifacts and their text serialization.

File layout (UTF-8, LF)::

    anyplay-policy v1
    role=p1
    algorithm=anyplay
    num_intents=4
    frozen_intent=3
    seed=7
    env=num_objects=2;num_messages=2;...

    <obs_id> <intent_id|-1> <action_id> <value>
    ...

Values are written with ``repr`` (shortest string that round-trips the
double), and rows are sorted by the three ids, so a canonical file survives
load/save byte for byte.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

from .env import Env, Role
from .qlearn import NO_INTENT, QTable, greedy_action

FORMAT_VERSION = 1
MAGIC = "anyplay-policy"
HEADER_KEYS = ("role", "algorithm", "num_intents", "frozen_intent", "seed", "env")


class ParseError(ValueError):
    def __init__(self, path: str | os.PathLike | None, lineno: int, message: str):
        where = f"{path}:{lineno}" if path is not None else f"line {lineno}"
        super().__init__(f"{where}: {message}")
        self.lineno = lineno


class VersionError(ValueError):
    pass


class FingerprintMismatch(ValueError):
    pass


class RoleMismatch(ValueError):
    pass


@dataclass
class PolicyArtifact:
    role: Role
    algorithm: str
    num_intents: int
    frozen_intent: int | None
    seed: int
    env_fingerprint: str
    entries: list[tuple[int, int, int, float]] = field(default_factory=list)
    format_version: int = FORMAT_VERSION

    def __post_init__(self) -> None:
        self.entries = sorted(self.entries, key=lambda e: e[:3])

    @classmethod
    def from_table(
        cls,
        table: QTable,
        *,
        algorithm: str,
        num_intents: int,
        frozen_intent: int | None,
        seed: int,
        env: Env,
    ) -> "PolicyArtifact":
        return cls(
            role=table.role,
            algorithm=algorithm,
            num_intents=num_intents,
            frozen_intent=frozen_intent,
            seed=seed,
            env_fingerprint=env.fingerprint,
            entries=table.entries(),
        )

    @property
    def intent_conditioned(self) -> bool:
        return any(e[1] != NO_INTENT for e in self.entries)

    def to_table(self, env: Env) -> QTable:
        table = QTable(self.role, env.num_actions(self.role))
        for obs, intent, action, value in self.entries:
            table.set(obs, action, value, intent)
        return table

    def greedy_actions(self, env: Env) -> dict[int, list[int]]:
        """Greedy action per observation id, keyed by intent id.

        Non-conditioned tables appear under ``NO_INTENT``; conditioned ones under
        every intent in ``range(num_intents)``.
        """
        table = self.to_table(env)
        n_obs = env.num_observations(self.role)
        intents = range(self.num_intents) if self.intent_conditioned else [NO_INTENT]
        return {
            z: [greedy_action(table.values(o, z)) for o in range(n_obs)] for z in intents
        }

    def check_env(self, env: Env) -> None:
        if self.env_fingerprint != env.fingerprint:
            raise FingerprintMismatch(
                f"policy trained on [{self.env_fingerprint}] but evaluated on [{env.fingerprint}]"
            )


def dumps(artifact: PolicyArtifact) -> str:
    frozen = "none" if artifact.frozen_intent is None else str(artifact.frozen_intent)
    lines = [
        f"{MAGIC} v{artifact.format_version}",
        f"role={artifact.role.value}",
        f"algorithm={artifact.algorithm}",
        f"num_intents={artifact.num_intents}",
        f"frozen_intent={frozen}",
        f"seed={artifact.seed}",
        f"env={artifact.env_fingerprint}",
        "",
    ]
    for obs, intent, action, value in sorted(artifact.entries, key=lambda e: e[:3]):
        lines.append(f"{obs} {intent} {action} {float(value)!r}")
    return "\n".join(lines) + "\n"


def loads(text: str, path: str | os.PathLike | None = None) -> PolicyArtifact:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise ParseError(path, 1, "empty policy file")
    magic, _, version = lines[0].partition(" ")
    if magic != MAGIC or not version.startswith("v"):
        raise ParseError(path, 1, f"expected '{MAGIC} v<N>', got {lines[0]!r}")
    try:
        fmt = int(version[1:])
    except ValueError:
        raise ParseError(path, 1, f"bad format version {version!r}") from None
    if fmt != FORMAT_VERSION:
        raise VersionError(f"unsupported policy format version {fmt}")

    header: dict[str, str] = {}
    for i, key in enumerate(HEADER_KEYS, start=2):
        if i > len(lines):
            raise ParseError(path, i, f"missing header {key!r}")
        name, sep, value = lines[i - 1].partition("=")
        if not sep or name != key:
            raise ParseError(path, i, f"expected '{key}=...', got {lines[i - 1]!r}")
        header[key] = value
    blank = len(HEADER_KEYS) + 2
    if len(lines) < blank - 1 or (len(lines) >= blank and lines[blank - 1] != ""):
        raise ParseError(path, blank, "expected a blank line after the header")

    try:
        role = Role(header["role"])
    except ValueError:
        raise ParseError(path, 2, f"unknown role {header['role']!r}") from None
    ints = {}
    for lineno, key in ((4, "num_intents"), (6, "seed")):
        try:
            ints[key] = int(header[key])
        except ValueError:
            raise ParseError(path, lineno, f"{key} must be an integer") from None
    if header["frozen_intent"] == "none":
        frozen = None
    else:
        try:
            frozen = int(header["frozen_intent"])
        except ValueError:
            raise ParseError(path, 5, "frozen_intent must be an integer or 'none'") from None

    entries = []
    for lineno in range(blank + 1, len(lines) + 1):
        parts = lines[lineno - 1].split(" ")
        if len(parts) != 4:
            raise ParseError(path, lineno, "expected '<obs> <intent> <action> <value>'")
        try:
            obs, intent, action = (int(p) for p in parts[:3])
        except ValueError:
            raise ParseError(path, lineno, "ids must be integers") from None
        try:
            value = float(parts[3])
        except ValueError:
            raise ParseError(path, lineno, f"bad value field {parts[3]!r}") from None
        entries.append((obs, intent, action, value))

    return PolicyArtifact(
        role=role,
        algorithm=header["algorithm"],
        num_intents=ints["num_intents"],
        frozen_intent=frozen,
        seed=ints["seed"],
        env_fingerprint=header["env"],
        entries=entries,
        format_version=fmt,
    )


def save_policy(artifact: PolicyArtifact, path: str | os.PathLike) -> None:
    Path(path).write_bytes(dumps(artifact).encode("utf-8"))


def load_policy(path: str | os.PathLike) -> PolicyArtifact:
    return loads(Path(path).read_bytes().decode("utf-8"), path)
