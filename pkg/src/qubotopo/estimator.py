"""Scikit-learn style front end for the decomposition optimizer.

The estimator stores hyperparameters verbatim, exposes them through
``get_params``/``set_params`` so it composes with the wider ecosystem, and
runs the full optimization on ``fit``. Fitted state lands in
trailing-underscore attributes (``layout_``, ``compliance_``, ...).
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from . import gbd
from .anneal import AnnealSchedule
from .fem import ElasticityParams, LoadCase, MeshSpec, make_load

__all__ = ["GbdTopologyOptimizer"]


class GbdTopologyOptimizer(BaseEstimator):
    """Binary minimum-compliance optimizer on a uniform quadrilateral grid.

    Parameters
    ----------
    nelx, nely : int
        Grid resolution (elements per direction).
    volume_fraction : float or str
        Target fraction of solid elements; strings like ``"1/2"`` are
        parsed exactly.
    volume_step : float or str
        Per-stage decrease of the volume fraction; must divide
        ``1 - volume_fraction`` exactly.
    filter_radius : float
        Sensitivity-averaging radius in element lengths.
    tolerance : float
        Relative bound-gap convergence threshold per stage.
    n_eta, n_alpha : int
        Bit counts of the bound variable and slack encodings.
    penalty_cut_scale, penalty_volume_scale : float
        Multipliers on the incumbent-compliance penalty factors.
    backend : {"sa", "exhaustive"}
        Quadratic-model solver for multi-cut masters.
    reads, sweeps : int
        Annealing restarts and sweeps per restart.
    beta_initial, beta_final : float or None
        Inverse-temperature ramp; ``None`` derives it per model.
    seed : int
        Base seed for the annealing backend.
    bc : {"mbb-half", "cantilever"}
        Boundary-condition preset used when ``fit`` gets no load case.
    young_modulus, poisson_ratio, void_stiffness : float
        Material model; the void stiffness also scales filtered
        sensitivities of empty elements.
    max_iterations : int
        Per-stage iteration guard.
    solver : {"direct", "cg"}
        Linear solver for the primal elasticity systems.

    Attributes
    ----------
    layout_ : ndarray of shape (nely, nelx)
        Final 0/1 material layout, image-like (row 0 on top).
    design_vector_ : ndarray of shape (nelx * nely,)
        The same layout in flat column-major element order.
    compliance_ : float
        Work done by the load on the final layout.
    history_ : list of IterationRecord
        Per-iteration bounds, gaps, and backend usage.
    converged_ : bool
        Whether every continuation stage met the gap tolerance.
    program_counts_ : dict
        Binary programs solved, keyed by kind (init/single/split/qubo).
    n_binary_programs_ : int
        Total of ``program_counts_``.

    Examples
    --------
    >>> opt = GbdTopologyOptimizer(nelx=12, nely=4, volume_step="1/4",
    ...                            backend="sa", reads=50, sweeps=100)
    >>> _ = opt.fit()
    >>> int(opt.design_vector_.sum())
    24
    """

    def __init__(
        self,
        nelx=60,
        nely=20,
        volume_fraction=0.5,
        volume_step="1/24",
        filter_radius=2.0,
        tolerance=5e-4,
        n_eta=10,
        n_alpha=10,
        penalty_cut_scale=1.0,
        penalty_volume_scale=1.0,
        backend="sa",
        reads=1000,
        sweeps=1000,
        beta_initial=None,
        beta_final=None,
        seed=0,
        bc="mbb-half",
        young_modulus=1.0,
        poisson_ratio=0.3,
        void_stiffness=1e-9,
        max_iterations=200,
        solver="direct",
    ):
        self.nelx = nelx
        self.nely = nely
        self.volume_fraction = volume_fraction
        self.volume_step = volume_step
        self.filter_radius = filter_radius
        self.tolerance = tolerance
        self.n_eta = n_eta
        self.n_alpha = n_alpha
        self.penalty_cut_scale = penalty_cut_scale
        self.penalty_volume_scale = penalty_volume_scale
        self.backend = backend
        self.reads = reads
        self.sweeps = sweeps
        self.beta_initial = beta_initial
        self.beta_final = beta_final
        self.seed = seed
        self.bc = bc
        self.young_modulus = young_modulus
        self.poisson_ratio = poisson_ratio
        self.void_stiffness = void_stiffness
        self.max_iterations = max_iterations
        self.solver = solver

    def _mesh(self):
        return MeshSpec(nelx=int(self.nelx), nely=int(self.nely))

    def _plan(self):
        return gbd.ContinuationPlan.from_values(self.volume_fraction, self.volume_step)

    def _schedule(self):
        return AnnealSchedule(
            reads=int(self.reads),
            sweeps=int(self.sweeps),
            beta_initial=self.beta_initial,
            beta_final=self.beta_final,
            seed=int(self.seed),
        )

    def fit(self, X=None, y=None):
        """Run the optimization; ``X`` may be a LoadCase overriding ``bc``."""
        mesh = self._mesh()
        params = ElasticityParams(
            young_modulus=self.young_modulus,
            poisson_ratio=self.poisson_ratio,
            void_stiffness=self.void_stiffness,
        )
        if X is None:
            load = make_load(mesh, self.bc)
        elif isinstance(X, LoadCase):
            if X.n_dofs != mesh.n_dofs:
                raise ValueError(
                    f"load case has {X.n_dofs} DOFs, mesh needs {mesh.n_dofs}"
                )
            load = X
        else:
            raise TypeError("X must be None or a LoadCase")

        result = gbd.run(
            mesh,
            params,
            load,
            self._plan(),
            self.filter_radius,
            tolerance=self.tolerance,
            n_eta=int(self.n_eta),
            n_alpha=int(self.n_alpha),
            penalty_cut_scale=self.penalty_cut_scale,
            penalty_volume_scale=self.penalty_volume_scale,
            backend=self.backend,
            schedule=self._schedule(),
            max_iterations=int(self.max_iterations),
            solver=self.solver,
        )
        self.mesh_ = mesh
        self.design_vector_ = result.layout
        self.layout_ = result.layout.reshape(mesh.nelx, mesh.nely).T
        self.compliance_ = result.compliance
        self.history_ = result.history
        self.converged_ = result.converged
        self.program_counts_ = result.program_counts
        self.n_binary_programs_ = result.n_binary_programs
        self.result_ = result
        return self

    def score(self, X=None, y=None):
        """Negated compliance, so that larger is better."""
        if not hasattr(self, "compliance_"):
            raise AttributeError("call fit before score")
        return -float(self.compliance_)
