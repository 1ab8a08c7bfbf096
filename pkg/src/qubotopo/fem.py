"""2D linear elasticity on a uniform quadrilateral grid.

The design domain is an ``nelx`` x ``nely`` grid of unit-square bilinear
(Q4) plane-stress elements with unit thickness. Nodes are numbered
column-major (down each column of nodes, left to right), each node carrying
an interleaved (x, y) DOF pair. The element DOF order is top-left,
top-right, bottom-right, bottom-left. These conventions are fixed so that
golden tests stay byte-stable.

The global stiffness is ``K(rho) = K0 + sum_i rho_i * K_i`` where ``K_i``
places the element matrix at element ``i`` and ``K0 = eps * sum_i K_i``
keeps the system positive definite for every 0/1 layout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .validation import check_design_vector, check_positive

__all__ = [
    "MeshSpec",
    "ElasticityParams",
    "LoadCase",
    "SolverError",
    "element_stiffness",
    "assemble",
    "solve_displacements",
    "compliance",
    "element_energies",
    "mbb_half_load",
    "cantilever_load",
    "make_load",
    "BC_PRESETS",
]


class SolverError(RuntimeError):
    """Raised when the linear solver fails to reach its residual tolerance."""


@dataclass(frozen=True)
class MeshSpec:
    """Uniform grid of unit-square quadrilateral elements."""

    nelx: int
    nely: int

    def __post_init__(self):
        if self.nelx < 1 or self.nely < 1:
            raise ValueError("mesh must have at least one element per direction")

    @property
    def n_elements(self):
        return self.nelx * self.nely

    @property
    def n_nodes(self):
        return (self.nelx + 1) * (self.nely + 1)

    @property
    def n_dofs(self):
        return 2 * self.n_nodes

    def node_index(self, ix, iy):
        """Node id at grid column ``ix`` (0..nelx) and row ``iy`` (0..nely, top down)."""
        return ix * (self.nely + 1) + iy

    def element_index(self, ex, ey):
        return ex * self.nely + ey

    def element_dofs(self):
        """(n_elements, 8) array of global DOF ids per element.

        Order: top-left, top-right, bottom-right, bottom-left corner, with
        the x DOF before the y DOF at each corner.
        """
        ex, ey = np.divmod(np.arange(self.n_elements), self.nely)
        n_tl = ex * (self.nely + 1) + ey
        n_tr = (ex + 1) * (self.nely + 1) + ey
        dofs = np.column_stack(
            [
                2 * n_tl,
                2 * n_tl + 1,
                2 * n_tr,
                2 * n_tr + 1,
                2 * n_tr + 2,
                2 * n_tr + 3,
                2 * n_tl + 2,
                2 * n_tl + 3,
            ]
        )
        return dofs.astype(np.int64)

    def element_centroids(self):
        """(n_elements, 2) centroid coordinates in element-length units."""
        ex, ey = np.divmod(np.arange(self.n_elements), self.nely)
        return np.column_stack([ex + 0.5, ey + 0.5]).astype(float)


@dataclass(frozen=True)
class ElasticityParams:
    """Isotropic plane-stress material in reduced units."""

    young_modulus: float = 1.0
    poisson_ratio: float = 0.3
    void_stiffness: float = 1e-9

    def __post_init__(self):
        check_positive("young_modulus", self.young_modulus)
        if not 0.0 <= self.poisson_ratio < 0.5:
            raise ValueError("poisson_ratio must lie in [0, 0.5)")
        if not 0.0 < self.void_stiffness < 1.0:
            raise ValueError("void_stiffness must lie in (0, 1)")


@dataclass(frozen=True)
class LoadCase:
    """External force vector plus homogeneous Dirichlet constraints."""

    forces: np.ndarray
    fixed_dofs: np.ndarray

    def __post_init__(self):
        forces = np.asarray(self.forces, dtype=float)
        fixed = np.unique(np.asarray(self.fixed_dofs, dtype=np.int64))
        if fixed.size and (fixed[0] < 0 or fixed[-1] >= forces.size):
            raise ValueError("fixed DOF index out of range")
        if fixed.size and np.any(forces[fixed] != 0.0):
            raise ValueError("forces must vanish on fixed DOFs")
        object.__setattr__(self, "forces", forces)
        object.__setattr__(self, "fixed_dofs", fixed)

    @property
    def n_dofs(self):
        return self.forces.size

    def free_dofs(self):
        mask = np.ones(self.n_dofs, dtype=bool)
        mask[self.fixed_dofs] = False
        return np.flatnonzero(mask)


def element_stiffness(params):
    """8x8 stiffness of the unit-square Q4 plane-stress element.

    Closed form of the exact integral (2x2 Gauss quadrature is exact for
    this element). Symmetric, positive semidefinite with the three rigid
    body modes spanning the null space.
    """
    E = params.young_modulus
    nu = params.poisson_ratio
    k = np.array(
        [
            1 / 2 - nu / 6,
            1 / 8 + nu / 8,
            -1 / 4 - nu / 12,
            -1 / 8 + 3 * nu / 8,
            -1 / 4 + nu / 12,
            -1 / 8 - nu / 8,
            nu / 6,
            1 / 8 - 3 * nu / 8,
        ]
    )
    idx = np.array(
        [
            [0, 1, 2, 3, 4, 5, 6, 7],
            [1, 0, 7, 6, 5, 4, 3, 2],
            [2, 7, 0, 5, 6, 3, 4, 1],
            [3, 6, 5, 0, 7, 2, 1, 4],
            [4, 5, 6, 7, 0, 1, 2, 3],
            [5, 4, 3, 2, 1, 0, 7, 6],
            [6, 3, 4, 1, 2, 7, 0, 5],
            [7, 2, 1, 4, 3, 6, 5, 0],
        ]
    )
    return E / (1 - nu**2) * k[idx]


def assemble(mesh, params, rho):
    """Assemble the global stiffness ``K0 + sum_i rho_i K_i`` in CSC form."""
    rho = check_design_vector(rho, mesh.n_elements)
    ke = element_stiffness(params)
    dofs = mesh.element_dofs()
    scale = params.void_stiffness + rho.astype(float)
    data = (ke[None, :, :] * scale[:, None, None]).ravel()
    rows = np.repeat(dofs, 8, axis=1).ravel()
    cols = np.tile(dofs, (1, 8)).ravel()
    n = mesh.n_dofs
    return sp.coo_matrix((data, (rows, cols)), shape=(n, n)).tocsc()


def solve_displacements(K, load, method="direct", rtol=1e-10, maxiter=None):
    """Solve ``K u = f`` on the free DOFs; fixed DOFs stay zero.

    method="direct" uses a sparse LU factorization plus iterative
    refinement, method="cg" a Jacobi-preconditioned conjugate gradient.

    The verified tolerance is the normwise backward error
    ``|r| / (|f| + |K| |u|) <= rtol``. On layouts whose load path runs
    through void material the displacements blow up to order ``1/eps``
    and no double-precision solver can push the plain ``|r| / |f|`` below
    ``eps_machine * |K| * |u| / |f|``; the backward-error form coincides
    with the plain one whenever displacements are well scaled. A
    SolverError reports the achieved residual when the target is missed.
    """
    free = load.free_dofs()
    f = load.forces
    f_free = f[free]
    u = np.zeros(load.n_dofs)
    if not f_free.any():
        return u
    K_ff = K[np.ix_(free, free)].tocsc()
    f_norm = np.linalg.norm(f_free)
    K_norm = np.max(np.abs(K_ff).sum(axis=1))

    def backward_error(x):
        r = np.linalg.norm(K_ff @ x - f_free)
        return r / (f_norm + K_norm * np.linalg.norm(x))

    if method == "direct":
        lu = spla.splu(K_ff)
        u_free = lu.solve(f_free)
        for _ in range(5):
            if backward_error(u_free) <= rtol:
                break
            u_free = u_free + lu.solve(f_free - K_ff @ u_free)
    elif method == "cg":
        if maxiter is None:
            maxiter = 10 * load.n_dofs
        diag = K_ff.diagonal()
        precond = spla.LinearOperator(K_ff.shape, matvec=lambda x: x / diag)
        u_free, info = spla.cg(K_ff, f_free, rtol=rtol, maxiter=maxiter, M=precond)
        if info > 0:
            raise SolverError(
                f"CG did not converge in {maxiter} iterations "
                f"(backward error {backward_error(u_free):.3e})"
            )
    else:
        raise ValueError(f"unknown solver method {method!r}")
    err = backward_error(u_free)
    if not np.isfinite(err) or err > rtol:
        raise SolverError(f"linear solve backward error {err:.3e} exceeds {rtol:.1e}")
    u[free] = u_free
    return u


def compliance(forces, u):
    """Work done by the external load, ``f . u``."""
    return float(np.dot(np.asarray(forces, dtype=float), u))


def element_energies(mesh, params, u):
    """Per-element strain energy ``u_e . K_e u_e`` of the unit element matrix.

    The element matrix here carries no density factor: the returned values
    are the (positive) derivatives of the compliance with respect to each
    element's density.
    """
    ke = element_stiffness(params)
    ue = u[mesh.element_dofs()]
    return np.einsum("ni,ij,nj->n", ue, ke, ue)


def mbb_half_load(mesh, magnitude=1.0):
    """Half MBB beam: symmetry plane on the left edge, roller bottom-right.

    The x DOF is fixed on every left-edge node, the y DOF at the
    bottom-right corner node, and a downward unit point force acts at the
    top-left node.
    """
    f = np.zeros(mesh.n_dofs)
    f[2 * mesh.node_index(0, 0) + 1] = -float(magnitude)
    left_x = [2 * mesh.node_index(0, iy) for iy in range(mesh.nely + 1)]
    roller = 2 * mesh.node_index(mesh.nelx, mesh.nely) + 1
    return LoadCase(forces=f, fixed_dofs=np.array(left_x + [roller]))


def cantilever_load(mesh, magnitude=1.0):
    """Cantilever: left edge clamped, downward tip load at mid-right node."""
    f = np.zeros(mesh.n_dofs)
    tip = mesh.node_index(mesh.nelx, mesh.nely // 2)
    f[2 * tip + 1] = -float(magnitude)
    fixed = []
    for iy in range(mesh.nely + 1):
        node = mesh.node_index(0, iy)
        fixed.extend([2 * node, 2 * node + 1])
    return LoadCase(forces=f, fixed_dofs=np.array(fixed))


BC_PRESETS = {
    "mbb-half": mbb_half_load,
    "cantilever": cantilever_load,
}


def make_load(mesh, preset="mbb-half"):
    try:
        factory = BC_PRESETS[preset]
    except KeyError:
        raise ValueError(
            f"unknown boundary-condition preset {preset!r}; "
            f"choose from {sorted(BC_PRESETS)}"
        ) from None
    return factory(mesh)
