"""QUBO minimization backends: exact enumeration and simulated annealing.

Both backends return a :class:`SampleSet` so callers can swap them behind
one contract. Enumeration is the oracle for small models; the annealer is
the production path, running many independent single-bit-flip Metropolis
restarts with a geometric inverse-temperature ramp. All randomness derives
from one integer seed, so results are reproducible bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "AnnealSchedule",
    "SampleSet",
    "energy",
    "solve_exhaustive",
    "solve_sa",
    "default_beta_range",
    "EXHAUSTIVE_CAP",
]

EXHAUSTIVE_CAP = 24
_CHUNK_BITS = 16


@dataclass(frozen=True)
class AnnealSchedule:
    """Restart count, sweep budget, and inverse-temperature ramp.

    ``beta_initial``/``beta_final`` may be left unset to derive a range
    from the model's coefficient magnitudes.
    """

    reads: int = 1000
    sweeps: int = 1000
    beta_initial: float | None = None
    beta_final: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.reads < 1:
            raise ValueError("reads must be at least 1")
        if self.sweeps < 1:
            raise ValueError("sweeps must be at least 1")
        if self.beta_initial is not None and self.beta_final is not None:
            if not 0 < self.beta_initial < self.beta_final:
                raise ValueError("need 0 < beta_initial < beta_final")

    def with_seed(self, seed):
        return replace(self, seed=int(seed))


@dataclass(frozen=True)
class SampleSet:
    """Distinct sampled assignments sorted by energy.

    Ties sort by the assignment's lexicographic order, so the ordering is
    deterministic. ``counts[i]`` is how many reads ended at row ``i``.
    """

    assignments: np.ndarray
    energies: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        if len(self.assignments) != len(self.energies):
            raise ValueError("assignments and energies disagree in length")
        if np.any(np.diff(self.energies) < 0):
            raise ValueError("energies must be non-decreasing")

    @property
    def best(self):
        return self.assignments[0]

    @property
    def best_energy(self):
        return float(self.energies[0])

    def __len__(self):
        return len(self.energies)


def energy(model, assignment):
    """Exact model value at one 0/1 assignment."""
    return model.energy(assignment)


def default_beta_range(model):
    """Heuristic (hot, cold) inverse temperatures for one model.

    Hot end: 0.1 over the mean coefficient magnitude, so early sweeps
    accept nearly every move. Cold end: 50 over the smallest per-variable
    flip scale, a proxy for the minimal energy gap, so the final sweeps
    freeze even the least-coupled variable.
    """
    sym = model.symmetric_matrix()
    coeffs = np.concatenate([np.abs(model.linear), np.abs(sym[np.triu_indices_from(sym, 1)])])
    coeffs = coeffs[coeffs > 0]
    if coeffs.size == 0:
        return 0.1, 10.0
    flip_scale = np.abs(model.linear) + np.abs(sym).sum(axis=1)
    active = flip_scale[flip_scale > 0]
    gap = active.min() if active.size else coeffs.min()
    beta_hot = 0.1 / coeffs.mean()
    beta_cold = 50.0 / gap
    beta_cold = max(beta_cold, 100.0 * beta_hot)
    return float(beta_hot), float(beta_cold)


def _assignments_from_integers(values, n_bits):
    values = np.asarray(values, dtype=np.int64)
    return ((values[:, None] >> np.arange(n_bits)) & 1).astype(np.uint8)


def _sorted_sample_set(model, assignments):
    """Aggregate duplicate rows and order by (energy, lexicographic bits)."""
    rows = np.atleast_2d(np.asarray(assignments, dtype=np.uint8))
    uniq, counts = np.unique(rows, axis=0, return_counts=True)
    energies = model.energies(uniq) if model.n_vars else np.full(len(uniq), model.constant)
    order = np.argsort(energies, kind="stable")
    return SampleSet(
        assignments=uniq[order],
        energies=energies[order],
        counts=counts[order],
    )


def solve_exhaustive(model, keep=16):
    """Global minimum by enumerating every assignment (hard cap 24 bits).

    Returns the ``keep`` lowest-energy states; the best row is the exact
    ground state (ties resolved toward the smallest bit pattern).
    """
    n = model.n_vars
    if n > EXHAUSTIVE_CAP:
        raise ValueError(f"{n} variables exceed the exhaustive cap of {EXHAUSTIVE_CAP}")
    if n == 0:
        return SampleSet(
            assignments=np.zeros((1, 0), dtype=np.uint8),
            energies=np.array([model.constant]),
            counts=np.array([1]),
        )
    total = 1 << n
    chunk = 1 << min(n, _CHUNK_BITS)
    best_vals = []
    best_idx = []
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total))
        bits = _assignments_from_integers(idx, n)
        vals = model.energies(bits)
        take = min(keep, vals.size)
        local = np.argpartition(vals, take - 1)[:take]
        best_vals.append(vals[local])
        best_idx.append(idx[local])
    vals = np.concatenate(best_vals)
    idx = np.concatenate(best_idx)
    order = np.lexsort((idx, vals))[:keep]
    winners = _assignments_from_integers(idx[order], n)
    sets = _sorted_sample_set(model, winners)
    return sets


def solve_sa(model, schedule=None):
    """Restart-based single-bit-flip Metropolis annealing.

    All restarts run in lockstep as rows of a matrix; each sweep visits
    the variables in index order and each proposal flips one bit. The
    reported assignment per read is the best state that read visited
    (sampled at sweep granularity, including the random start), so the
    final answer can only improve on pure random sampling.
    """
    if schedule is None:
        schedule = AnnealSchedule()
    n = model.n_vars
    if n == 0:
        return SampleSet(
            assignments=np.zeros((1, 0), dtype=np.uint8),
            energies=np.array([model.constant]),
            counts=np.array([schedule.reads]),
        )
    beta0, beta1 = schedule.beta_initial, schedule.beta_final
    if beta0 is None or beta1 is None:
        beta0, beta1 = default_beta_range(model)
    betas = beta0 * (beta1 / beta0) ** (
        np.arange(schedule.sweeps) / max(schedule.sweeps - 1, 1)
    )

    rng = np.random.default_rng(schedule.seed)
    reads = schedule.reads
    sym = model.symmetric_matrix()
    linear = model.linear

    X = rng.integers(0, 2, size=(reads, n)).astype(float)
    fields = linear + X @ sym
    energies = model.energies(X)
    best_X = X.copy()
    best_E = energies.copy()

    for beta in betas:
        uniforms = rng.random((n, reads))
        for i in range(n):
            delta = (1.0 - 2.0 * X[:, i]) * fields[:, i]
            accept = (delta <= 0.0) | (uniforms[i] < np.exp(-beta * np.maximum(delta, 0.0)))
            if not accept.any():
                continue
            sign = 1.0 - 2.0 * X[accept, i]
            X[accept, i] += sign
            fields[accept] += sign[:, None] * sym[i]
            energies[accept] += delta[accept]
        improved = energies < best_E
        if improved.any():
            best_X[improved] = X[improved]
            best_E[improved] = energies[improved]

    return _sorted_sample_set(model, best_X.astype(np.uint8))
