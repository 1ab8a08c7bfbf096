"""Decomposition driver for binary minimum-compliance optimization.

The optimizer alternates between a primal elasticity solve at a fixed 0/1
layout (an upper bound on the compliance) and a cut-constrained binary
master problem (a lower bound). Each primal solve contributes one linear
under-estimator built from its filtered element energies; iterations stop
once the relative bound gap falls below the tolerance.

Masters with a single retained cut are solved exactly by greedy selection.
With several cuts, the problem splits: per-cut greedy solutions fix every
element they agree on, and only the disagreement set goes to a quadratic
binary model solved by an annealing backend.

The volume count walks from full material down to the target in equal
steps; every step re-linearizes around the previous incumbent, solves one
greedy warm-start problem, and then runs the bound loop at the new count.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .anneal import EXHAUSTIVE_CAP, AnnealSchedule, solve_exhaustive, solve_sa
from .binlp import VolumeLP, objective_value, solve_greedy
from .fem import assemble, compliance, element_energies, solve_displacements
from .qubo import build_reduced_qubo, compute_split, cut_value, refine_eta
from .sensitivity import build_kernel, filter_sensitivities

__all__ = [
    "CutRecord",
    "ContinuationPlan",
    "IterationRecord",
    "StageResult",
    "RunResult",
    "pareto_filter",
    "make_cut",
    "repair_layout",
    "solve_stage",
    "run",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CutRecord:
    """One linear under-estimator: compliance, layout, filtered energies."""

    compliance: float
    layout: np.ndarray
    sensitivities: np.ndarray
    iteration: int

    def __post_init__(self):
        if self.compliance <= 0:
            raise ValueError("cut compliance must be positive")
        if np.any(self.sensitivities < 0):
            raise ValueError("cut sensitivities must be nonnegative")


@dataclass(frozen=True)
class ContinuationPlan:
    """Volume schedule ``V_m = 1 - m * step`` down to the target fraction."""

    target_volume: Fraction
    step: Fraction

    def __post_init__(self):
        if not 0 < self.target_volume <= 1:
            raise ValueError("target volume must lie in (0, 1]")
        if self.target_volume < 1:
            if self.step <= 0:
                raise ValueError("volume step must be positive")
            stages = (1 - self.target_volume) / self.step
            if stages.denominator != 1:
                raise ValueError(
                    "volume step must divide 1 - target exactly; "
                    f"(1 - {self.target_volume}) / {self.step} = {stages}"
                )

    @classmethod
    def from_values(cls, target, step):
        return cls(_as_fraction("target volume", target), _as_fraction("volume step", step))

    @property
    def n_stages(self):
        if self.target_volume == 1:
            return 0
        return int((1 - self.target_volume) / self.step)

    def stage_volumes(self):
        return [1 - m * self.step for m in range(1, self.n_stages + 1)]

    def stage_counts(self, n_elements):
        """Per-stage element counts, validated strictly decreasing."""
        counts = [round(n_elements * v) for v in self.stage_volumes()]
        if any(b >= a for a, b in zip([n_elements] + counts, counts)):
            raise ValueError(
                f"volume schedule does not strictly decrease the element count "
                f"on a mesh of {n_elements} elements: {counts}; use a coarser step"
            )
        return counts


def _as_fraction(name, value):
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"{name}: cannot parse {value!r} as a fraction") from None
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(str(value))
    raise TypeError(f"{name}: expected str, int, float or Fraction, got {type(value)}")


@dataclass
class IterationRecord:
    """One row of the run history."""

    stage: int
    iteration: int
    upper: float
    eta: float
    gap: float
    n_pareto: int
    n_free: int
    backend: str
    seconds: float


@dataclass
class StageResult:
    incumbent: np.ndarray
    upper: float
    records: list
    converged: bool


@dataclass
class RunResult:
    """Final layout plus the full iteration history of a run."""

    layout: np.ndarray
    compliance: float
    history: list
    converged: bool
    program_counts: dict

    @property
    def n_binary_programs(self):
        return sum(self.program_counts.values())


def pareto_filter(compliances, k):
    """Indices of cuts whose compliance does not exceed cut ``k``'s."""
    if not 0 <= k < len(compliances):
        raise ValueError("k out of range")
    ref = compliances[k]
    return [j for j in range(k + 1) if compliances[j] <= ref]


def make_cut(mesh, params, kernel, forces, u, rho, iteration):
    """Assemble one cut from a solved displacement field."""
    comp = compliance(forces, u)
    energies = element_energies(mesh, params, u)
    weights = filter_sensitivities(kernel, energies, rho, params.void_stiffness)
    return CutRecord(
        compliance=comp,
        layout=np.array(rho, dtype=np.uint8),
        sensitivities=weights,
        iteration=iteration,
    )


def repair_layout(layout, weights, count):
    """Restore an exact element count with minimal objective damage.

    Over-full layouts drop their lowest-weight solids; under-full layouts
    add the highest-weight voids. Ties resolve to the lowest index.
    """
    layout = np.array(layout, dtype=np.uint8)
    excess = int(layout.sum()) - count
    if excess > 0:
        ones = np.flatnonzero(layout == 1)
        order = np.lexsort((ones, weights[ones]))
        layout[ones[order[:excess]]] = 0
    elif excess < 0:
        zeros = np.flatnonzero(layout == 0)
        order = np.lexsort((zeros, -weights[zeros]))
        layout[zeros[order[:-excess]]] = 1
    return layout


def solve_stage(
    mesh,
    params,
    load,
    kernel,
    count,
    rho_start,
    *,
    stage=1,
    tolerance=5e-4,
    n_eta=10,
    n_alpha=10,
    penalty_cut_scale=1.0,
    penalty_volume_scale=1.0,
    backend="sa",
    schedule=None,
    max_iterations=200,
    solver="direct",
    counters=None,
    seed_offset=0,
):
    """Bound loop at a fixed volume count (the inner decomposition loop).

    Returns the incumbent layout once the relative gap drops below
    ``tolerance``; a loop that exhausts ``max_iterations`` returns
    ``converged=False`` with its diagnostic history intact.
    """
    if schedule is None:
        schedule = AnnealSchedule()
    if counters is None:
        counters = {"init": 0, "single": 0, "split": 0, "qubo": 0}
    forces = load.forces
    pool = []
    upper = np.inf
    incumbent = rho_start
    rho_k = rho_start
    records = []
    converged = False

    for k in range(1, max_iterations + 1):
        t0 = time.perf_counter()
        u = solve_displacements(assemble(mesh, params, rho_k), load, method=solver)
        comp = compliance(forces, u)
        if comp < upper:
            upper = comp
            incumbent = rho_k
        pool.append(make_cut(mesh, params, kernel, forces, u, rho_k, k))
        pareto = pareto_filter([c.compliance for c in pool], len(pool) - 1)
        pareto_cuts = [pool[j] for j in pareto]
        n_free = 0

        if len(pareto_cuts) == 1:
            prob = VolumeLP.from_cut(pareto_cuts[0], count)
            rho_next = solve_greedy(prob)
            eta = objective_value(prob, rho_next)
            backend_used = "greedy"
            counters["single"] += 1
        else:
            split = compute_split(pareto_cuts, count)
            counters["split"] += len(pareto_cuts)
            n_free = split.n_free
            if n_free == 0:
                # every single-cut optimum coincides, hence it also
                # minimizes the max of the cuts
                rho_next = split.sub_solutions[0]
                backend_used = "agree"
            else:
                master = build_reduced_qubo(
                    split,
                    pareto_cuts,
                    mesh.n_elements,
                    upper,
                    n_eta=n_eta,
                    n_alpha=n_alpha,
                    penalty_cut=penalty_cut_scale * upper,
                    penalty_volume=penalty_volume_scale * upper,
                )
                counters["qubo"] += 1
                if backend == "exhaustive":
                    if master.model.n_vars > EXHAUSTIVE_CAP:
                        raise ValueError(
                            f"reduced model needs {master.model.n_vars} bits, over the "
                            f"exhaustive cap of {EXHAUSTIVE_CAP}; use the sa backend"
                        )
                    samples = solve_exhaustive(master.model)
                elif backend == "sa":
                    samples = solve_sa(
                        master.model,
                        schedule.with_seed(schedule.seed + seed_offset + counters["qubo"]),
                    )
                else:
                    raise ValueError(f"unknown backend {backend!r}")
                rho_next = master.decode(samples.best).layout
                backend_used = backend
                violation = int(rho_next.sum()) - count
                if violation != 0:
                    logger.warning(
                        "stage %d iteration %d: annealed layout violates the volume "
                        "count by %+d; repairing",
                        stage,
                        k,
                        violation,
                    )
                    rho_next = repair_layout(
                        rho_next, pareto_cuts[-1].sensitivities, count
                    )
            if any(np.array_equal(rho_next, c.layout) for c in pool):
                newest = split.sub_solutions[-1]
                if not np.array_equal(newest, rho_next):
                    logger.info(
                        "stage %d iteration %d: master repeated a known layout; "
                        "falling back to the newest single-cut solution",
                        stage,
                        k,
                    )
                    rho_next = newest
                    backend_used += "+fallback"
            eta = refine_eta(pareto_cuts, rho_next)

        gap = (upper - eta) / upper
        records.append(
            IterationRecord(
                stage=stage,
                iteration=k,
                upper=upper,
                eta=eta,
                gap=gap,
                n_pareto=len(pareto_cuts),
                n_free=n_free,
                backend=backend_used,
                seconds=time.perf_counter() - t0,
            )
        )
        if backend_used in ("greedy", "agree"):
            # with an exactly solved master the bound can never overshoot
            assert eta <= upper * (1 + tolerance) + 1e-9, (eta, upper)
        elif eta > upper * (1 + tolerance):
            logger.warning(
                "stage %d iteration %d: inexact master bound %.6g above incumbent %.6g",
                stage,
                k,
                eta,
                upper,
            )
        if gap < tolerance:
            converged = True
            break
        rho_k = rho_next

    if not converged:
        logger.warning("stage %d hit the %d-iteration guard", stage, max_iterations)
    return StageResult(
        incumbent=incumbent, upper=upper, records=records, converged=converged
    )


def run(
    mesh,
    params,
    load,
    plan,
    filter_radius,
    *,
    tolerance=5e-4,
    n_eta=10,
    n_alpha=10,
    penalty_cut_scale=1.0,
    penalty_volume_scale=1.0,
    backend="sa",
    schedule=None,
    max_iterations=200,
    solver="direct",
):
    """Full optimization: volume continuation over bound-loop stages."""
    if schedule is None:
        schedule = AnnealSchedule()
    counts = plan.stage_counts(mesh.n_elements)
    kernel = build_kernel(mesh, filter_radius)
    counters = {"init": 0, "single": 0, "split": 0, "qubo": 0}
    history = []
    rho = np.ones(mesh.n_elements, dtype=np.uint8)

    if not counts:
        u = solve_displacements(assemble(mesh, params, rho), load, method=solver)
        return RunResult(
            layout=rho,
            compliance=compliance(load.forces, u),
            history=history,
            converged=True,
            program_counts=counters,
        )

    upper = np.inf
    converged = True
    for stage_no, count in enumerate(counts, start=1):
        u0 = solve_displacements(assemble(mesh, params, rho), load, method=solver)
        cut0 = make_cut(mesh, params, kernel, load.forces, u0, rho, 0)
        rho1 = solve_greedy(VolumeLP.from_cut(cut0, count))
        counters["init"] += 1
        result = solve_stage(
            mesh,
            params,
            load,
            kernel,
            count,
            rho1,
            stage=stage_no,
            tolerance=tolerance,
            n_eta=n_eta,
            n_alpha=n_alpha,
            penalty_cut_scale=penalty_cut_scale,
            penalty_volume_scale=penalty_volume_scale,
            backend=backend,
            schedule=schedule,
            max_iterations=max_iterations,
            solver=solver,
            counters=counters,
            seed_offset=1000 * stage_no,
        )
        history.extend(result.records)
        rho = result.incumbent
        upper = result.upper
        if not result.converged:
            converged = False
            break

    return RunResult(
        layout=rho,
        compliance=upper,
        history=history,
        converged=converged,
        program_counts=counters,
    )
