"""Trip distribution summaries, curve fits, and rank-change reports."""

from __future__ import annotations

import csv
import json
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .propagation import rank
from .trips import Transition


class FitError(ValueError):
    pass


@dataclass(frozen=True)
class Histogram:
    bins: tuple[tuple[int, int], ...]

    def __post_init__(self):
        xs = [x for x, _ in self.bins]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("histogram x values must be strictly increasing")
        if any(c < 0 for _, c in self.bins):
            raise ValueError("negative histogram count")

    @property
    def x(self) -> np.ndarray:
        return np.array([x for x, _ in self.bins], dtype=float)

    @property
    def counts(self) -> np.ndarray:
        return np.array([c for _, c in self.bins], dtype=float)

    @property
    def total(self) -> int:
        return sum(c for _, c in self.bins)


@dataclass(frozen=True)
class FitResult:
    model: str
    params: dict[str, float]
    rmse: float

    def as_dict(self) -> dict:
        return {"model": self.model, "params": self.params, "rmse": self.rmse}


def visit_rank_histogram(flows: dict[int, int]) -> Histogram:
    """Bin k holds the flow of the k-th most visited crossroad (ties by id)."""
    if not flows:
        raise ValueError("empty flow table")
    ordered = sorted(flows.items(), key=lambda kv: (-kv[1], kv[0]))
    return Histogram(tuple((k, c) for k, (_, c) in enumerate(ordered, 1)))


def path_length_histogram(transitions: Sequence[Transition]) -> Histogram:
    """Trips per path length, length counted in crossroads."""
    if not transitions:
        raise ValueError("no transitions")
    tally: Counter = Counter()
    for t in transitions:
        for p in t.paths:
            tally[len(p.crossroads)] += p.trip_count
    return Histogram(tuple(sorted(tally.items())))


def fit_exponential(hist: Histogram) -> FitResult:
    """Single-term ``a * exp(b * x)`` by least squares on log counts.

    Zero-count bins are skipped. ``rmse`` is measured in log space.
    """
    mask = hist.counts > 0
    x, y = hist.x[mask], np.log(hist.counts[mask])
    if len(x) < 2 or np.ptp(x) == 0:
        raise FitError("need at least 2 positive bins")
    A = np.column_stack([np.ones_like(x), x])
    (ln_a, b), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (ln_a + b * x)
    return FitResult(
        "exponential",
        {"a": float(math.exp(ln_a)), "b": float(b)},
        float(np.sqrt(np.mean(resid**2))),
    )


def fit_gaussian(hist: Histogram) -> FitResult:
    """Moment-matched Gaussian curve ``amp * exp(-(x - mu)^2 / (2 sigma^2))``.

    ``amp = total / (sigma * sqrt(2 pi))`` for unit-width bins, so the curve
    integrates to the histogram's total count.
    """
    x, w = hist.x, hist.counts
    total = w.sum()
    if total <= 0:
        raise FitError("empty histogram")
    mu = float(np.dot(w, x) / total)
    var = float(np.dot(w, (x - mu) ** 2) / total)
    if var <= 0:
        raise FitError("degenerate distribution")
    sigma = math.sqrt(var)
    amp = float(total / (sigma * math.sqrt(2 * math.pi)))
    curve = amp * np.exp(-((x - mu) ** 2) / (2 * var))
    rmse = float(np.sqrt(np.mean((w - curve) ** 2)))
    return FitResult("gaussian", {"mu": mu, "sigma": sigma, "amplitude": amp}, rmse)


@dataclass(frozen=True)
class ReportRow:
    entity_id: int
    initial_rank: int
    final_rank: int

    @property
    def rank_delta(self) -> int:
        # positive: moved up the ranking
        return self.initial_rank - self.final_rank


def rank_report(
    initial: Sequence[float], final: Sequence[float], ids: Sequence[int]
) -> list[ReportRow]:
    """Initial vs final rank per entity, sorted by final rank."""
    if len(initial) != len(ids) or len(final) != len(ids):
        raise ValueError("initial and final scores must cover the same ids")
    r0 = {e.id: e.rank for e in rank(initial, ids)}
    r1 = {e.id: e.rank for e in rank(final, ids)}
    rows = [ReportRow(i, r0[i], r1[i]) for i in r1]
    return sorted(rows, key=lambda r: r.final_rank)


def transition_report(prof, state) -> dict[str, list[ReportRow]]:
    """Rank movement of transitions (L0 -> L) and paths (H0 -> H)."""
    if len(prof.L0) != len(state.L) or len(prof.H0) != len(state.H):
        raise ValueError("profile and final state cover different id sets")
    return {
        "transition": rank_report(prof.L0, state.L, list(range(len(state.L)))),
        "path": rank_report(prof.H0, state.H, list(range(len(state.H)))),
    }


# -- export -----------------------------------------------------------------


def write_histogram(hist: Histogram, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "count"])
        w.writerows(hist.bins)


def write_fit(fit: FitResult | None, path: str | Path, warning: str | None = None) -> None:
    doc = fit.as_dict() if fit else {"model": None, "params": None, "rmse": None}
    if warning:
        doc["warning"] = warning
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def write_report(rows: Sequence[ReportRow], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["entity_id", "initial_rank", "final_rank", "rank_delta"])
        for r in rows:
            w.writerow([r.entity_id, r.initial_rank, r.final_rank, r.rank_delta])
