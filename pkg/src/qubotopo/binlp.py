"""Exact solver for volume-constrained binary linear programs.

Each cut of the decomposition yields a master of the form

    minimize   W - sum_i w_i rho_i
    subject to sum_i rho_i = c,   rho in {0, 1}^n

whose LP relaxation has a feasible polytope with binary vertices, so the
binary optimum is reached by selecting the ``c`` largest weights. Partial
selection keeps the cost linear in ``n`` on average.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .validation import check_count, check_design_vector

__all__ = ["VolumeLP", "solve_greedy", "objective_value"]


@dataclass(frozen=True)
class VolumeLP:
    """Linear objective ``constant - weights . rho`` under an exact count."""

    weights: np.ndarray
    count: int
    constant: float = 0.0

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=float)
        if weights.ndim != 1 or not np.isfinite(weights).all():
            raise ValueError("weights must be a finite 1-D array")
        object.__setattr__(self, "weights", weights)
        check_count("count", self.count, weights.size)

    @property
    def n(self):
        return self.weights.size

    @classmethod
    def from_cut(cls, cut, count):
        """Single-cut master: constant absorbs the cut's expansion point."""
        constant = cut.compliance + float(np.dot(cut.sensitivities, cut.layout))
        return cls(weights=cut.sensitivities, count=count, constant=constant)


def solve_greedy(prob):
    """Layout with ones at the ``count`` largest weights.

    Ties at the selection threshold resolve to the lowest element indices,
    so the chosen index set is lexicographically smallest among optima.
    """
    w = prob.weights
    n, c = prob.n, prob.count
    rho = np.zeros(n, dtype=np.uint8)
    if c == 0:
        return rho
    if c == n:
        rho[:] = 1
        return rho
    top = np.argpartition(-w, c - 1)[:c]
    threshold = w[top].min()
    strict = np.flatnonzero(w > threshold)
    ties = np.flatnonzero(w == threshold)
    rho[strict] = 1
    rho[ties[: c - strict.size]] = 1
    return rho


def objective_value(prob, rho):
    """Exact value of the linear objective at a 0/1 layout."""
    rho = check_design_vector(rho, prob.n)
    return prob.constant - float(np.dot(prob.weights, rho))
