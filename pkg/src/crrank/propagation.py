"""CRRank score propagation over the tripartite graph.

One full iteration is a forward phase (transitions -> paths -> crossroads)
followed by a reverse phase (crossroads -> paths -> transitions), each
update damped toward the profile vectors, then renormalization of L, H, C.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .graph import ProfileVectors, WeightMatrices
from .network import DEFAULT_LAMBDA


class DegenerateScores(ValueError):
    pass


@dataclass(frozen=True)
class PropagationConfig:
    alpha: float = 0.85
    tol: float = 1e-9
    max_iter: int = 200
    lam: float = DEFAULT_LAMBDA
    normalize_per_phase: bool = False

    def __post_init__(self):
        # alpha == 0 is allowed: it pins every score to its profile
        if not 0 <= self.alpha < 1:
            raise ValueError(f"alpha must lie in [0, 1), got {self.alpha}")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        if not 0 <= self.lam < 1:
            raise ValueError(f"lambda must lie in [0, 1), got {self.lam}")


@dataclass
class ScoreState:
    L: np.ndarray
    H: np.ndarray
    C: np.ndarray
    iteration: int = 0
    last_delta: float = float("inf")
    deltas: list[float] = field(default_factory=list)

    def converged(self, tol: float) -> bool:
        return self.last_delta < tol


def normalize(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if np.any(v < 0):
        raise DegenerateScores("negative entry in score vector")
    total = v.sum()
    if not total > 0:
        raise DegenerateScores("degenerate score vector")
    return v / total


def _check(mat, vec, name):
    if mat.shape[1] != vec.shape[0]:
        raise ValueError(f"{name}: matrix {mat.shape} does not match vector of length {vec.shape[0]}")


def forward_step(
    L: np.ndarray, mats: WeightMatrices, prof: ProfileVectors, alpha: float
) -> tuple[np.ndarray, np.ndarray]:
    """Transition load -> path popularity -> crossroad importance."""
    _check(mats.X_TP, L, "X_TP")
    H = alpha * (mats.X_TP @ L) + (1 - alpha) * prof.H0
    C = alpha * (mats.Y_PV @ H) + (1 - alpha) * prof.C0
    return H, C


def reverse_step(
    C: np.ndarray, mats: WeightMatrices, prof: ProfileVectors, alpha: float
) -> tuple[np.ndarray, np.ndarray]:
    """Crossroad importance -> path popularity -> transition load."""
    _check(mats.Y_VP, C, "Y_VP")
    H = alpha * (mats.Y_VP @ C) + (1 - alpha) * prof.H0
    L = alpha * (mats.X_PT @ H) + (1 - alpha) * prof.L0
    return H, L


def iterate_crrank(
    mats: WeightMatrices, prof: ProfileVectors, config: PropagationConfig
) -> Iterator[ScoreState]:
    """Yield the state after each full iteration until convergence or max_iter."""
    alpha = config.alpha
    L, H, C = prof.L0.copy(), prof.H0.copy(), prof.C0.copy()
    deltas: list[float] = []
    for it in range(1, config.max_iter + 1):
        H_f, C_new = forward_step(L, mats, prof, alpha)
        if config.normalize_per_phase:
            H_f, C_new = normalize(H_f), normalize(C_new)
        H_new, L_new = reverse_step(C_new, mats, prof, alpha)
        L_new, H_new, C_new = normalize(L_new), normalize(H_new), normalize(C_new)

        delta = float(
            max(np.max(np.abs(L_new - L)), np.max(np.abs(H_new - H)), np.max(np.abs(C_new - C)))
        )
        deltas.append(delta)
        L, H, C = L_new, H_new, C_new
        yield ScoreState(L, H, C, it, delta, list(deltas))
        if delta < config.tol:
            return


def run_crrank(
    mats: WeightMatrices, prof: ProfileVectors, config: PropagationConfig | None = None
) -> ScoreState:
    """Iterate to convergence; hitting max_iter is not an error (check ``last_delta``)."""
    config = config or PropagationConfig()
    state = None
    for state in iterate_crrank(mats, prof, config):
        pass
    return state


@dataclass(frozen=True)
class RankEntry:
    id: int
    score: float
    rank: int


def rank(scores: Sequence[float], ids: Sequence[int]) -> list[RankEntry]:
    """Descending by score, ties by ascending id, ranks 1..n with no shared ranks."""
    if len(scores) != len(ids):
        raise ValueError(f"{len(scores)} scores for {len(ids)} ids")
    order = sorted(zip(ids, scores), key=lambda p: (-p[1], p[0]))
    return [RankEntry(int(i), float(s), r) for r, (i, s) in enumerate(order, 1)]
