"""QMDP solver: value iteration on the underlying MDP plus alpha-vector
action selection over beliefs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pomdp import PomdpModel

BELIEF_TOL = 1e-9

POLICY_FORMAT = "alpha-policy-v1"


class ValueIterationError(RuntimeError):
    """Raised when value iteration fails to reach the tolerance."""


def value_iteration(model: PomdpModel, tol: float = 1e-6, max_iters: int = 10000) -> np.ndarray:
    """Solve for the optimal Q table by synchronous sweeps.

    Returns a (num_states, num_actions) array within tol of the optimal Q
    in sup norm; its Bellman residual is also at most tol. Sweeps stop
    once the successive difference guarantees both via the contraction
    bound. Raises ValueIterationError if max_iters sweeps are not enough.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    gamma = model.discount
    # |Q_k - Q*| <= gamma / (1 - gamma) * |Q_k - Q_{k-1}|
    stop = tol * min(1.0, (1.0 - gamma) / max(gamma, 1e-12))
    q = np.zeros((model.num_states, model.num_actions))
    for _ in range(max_iters):
        v = q.max(axis=1)
        q_new = np.empty_like(q)
        for a in range(model.num_actions):
            q_new[:, a] = model.rewards[:, a] + model.discount * (model.transitions[a] @ v)
        residual = float(np.max(np.abs(q_new - q)))
        q = q_new
        if residual <= stop:
            return q
    raise ValueIterationError(
        f"no convergence after {max_iters} sweeps (residual {residual:.3e})"
    )


@dataclass(frozen=True, eq=False)
class AlphaVectorPolicy:
    """One alpha vector per action; the policy value of a belief is the
    max inner product and the greedy action attains it."""

    alphas: np.ndarray  # (num_actions, num_states)
    scales: tuple[float, ...]

    def __post_init__(self):
        if self.alphas.ndim != 2 or self.alphas.shape[0] != len(self.scales):
            raise ValueError("alphas must be (num_actions, num_states)")


def extract_alphas(q: np.ndarray, scales) -> AlphaVectorPolicy:
    """Turn a Q table into the QMDP alpha-vector set (one per action)."""
    q = np.asarray(q, dtype=float)
    return AlphaVectorPolicy(alphas=q.T.copy(), scales=tuple(float(s) for s in scales))


def best_action(policy: AlphaVectorPolicy, belief: np.ndarray) -> int:
    """Greedy action index for a belief; ties break to the lowest index.

    The belief must be a proper distribution over the policy's state
    space (entries nonnegative, summing to one within 1e-9).
    """
    b = np.asarray(belief, dtype=float)
    if b.shape != (policy.alphas.shape[1],):
        raise ValueError("belief length does not match the state space")
    if np.any(b < 0) or abs(float(b.sum()) - 1.0) > BELIEF_TOL:
        raise ValueError("belief is not a normalized distribution")
    scores = policy.alphas @ b
    return int(np.argmax(scores))


def save_policy(policy: AlphaVectorPolicy, destination) -> None:
    """Write a policy to a versioned plain-text file.

    Layout: a format line, counts, the action scale labels, then one line
    of '%.17g' state values per action. Floats round-trip exactly.
    """
    lines = [
        POLICY_FORMAT,
        f"actions {policy.alphas.shape[0]}",
        f"states {policy.alphas.shape[1]}",
        "scales " + " ".join(f"{s:.17g}" for s in policy.scales),
    ]
    for row in policy.alphas:
        lines.append(" ".join(f"{x:.17g}" for x in row))
    with open(destination, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_policy(source) -> AlphaVectorPolicy:
    """Read a policy written by save_policy; rejects unknown formats."""
    with open(source, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or lines[0] != POLICY_FORMAT:
        raise ValueError(f"not a {POLICY_FORMAT} file")
    header = dict(ln.split(maxsplit=1) for ln in lines[1:3])
    try:
        num_actions = int(header["actions"])
        num_states = int(header["states"])
    except (KeyError, ValueError) as exc:
        raise ValueError("malformed policy header") from exc
    if not lines[3].startswith("scales "):
        raise ValueError("missing scales line")
    scales = tuple(float(x) for x in lines[3].split()[1:])
    if len(scales) != num_actions:
        raise ValueError("scale count does not match actions")
    body = lines[4:]
    if len(body) != num_actions:
        raise ValueError("alpha row count does not match actions")
    alphas = np.array([[float(x) for x in ln.split()] for ln in body])
    if alphas.shape != (num_actions, num_states):
        raise ValueError("alpha matrix shape mismatch")
    return AlphaVectorPolicy(alphas=alphas, scales=scales)
