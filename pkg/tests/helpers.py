"""Hand-built policy artifacts for evaluation tests."""

from zsclab.env import Role
from zsclab.policy import PolicyArtifact
from zsclab.qlearn import NO_INTENT, QTable


def artifact(env, role, actions, *, frozen=None, label="hand", seed=0):
    """``actions`` is a list of action ids per observation, or a list of such lists per intent."""
    per_intent = actions if actions and isinstance(actions[0], (list, tuple)) else None
    table = QTable(role, env.num_actions(role))
    if per_intent is None:
        for obs, a in enumerate(actions):
            table.set(obs, a, 1.0)
        n = 1
    else:
        for z, acts in enumerate(per_intent):
            for obs, a in enumerate(acts):
                table.set(obs, a, 1.0, intent=z)
        n = len(per_intent)
    return PolicyArtifact.from_table(
        table, algorithm=label, num_intents=n, frozen_intent=frozen, seed=seed, env=env
    )


def p1(env, actions, **kw):
    return artifact(env, Role.PLAYER1, actions, **kw)


def p2(env, actions, **kw):
    return artifact(env, Role.PLAYER2, actions, **kw)


# P2 observation ids on the default game: 0 initial, 1-2 messages, 3-4 curtain, 5 left
MATCHED = [0, 1, 2, 0, 0, 0]
REVERSED = [0, 2, 1, 0, 0, 0]
CURTAIN_READER = [0, 0, 0, 1, 2, 0]
