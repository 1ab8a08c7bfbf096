"""Radius-based averaging of element sensitivities.

Uniform grids with hard 0/1 densities are prone to checkerboard patterns;
averaging each element's strain energy over a disc of neighboring element
centroids suppresses them. Weights decay linearly with centroid distance,
``h = max(0, r - d)``, and the filtered value of a void element is scaled
by the void stiffness so that removed material keeps a vanishing (but
nonzero) sensitivity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .validation import check_array_length, check_design_vector, check_positive

__all__ = ["FilterKernel", "build_kernel", "filter_sensitivities"]


@dataclass(frozen=True)
class FilterKernel:
    """Precomputed neighbor weights for one mesh/radius pair.

    ``weights`` is an (n, n) CSR matrix whose stored entries mark the
    neighbor lists; entries at centroid distance exactly ``radius`` are
    kept with weight zero so membership matches the closed disc.
    """

    radius: float
    weights: sp.csr_matrix
    weight_sums: np.ndarray

    @property
    def n_elements(self):
        return self.weights.shape[0]

    def neighbor_counts(self):
        return np.diff(self.weights.indptr)


def build_kernel(mesh, radius):
    """Neighbor lists and linear-decay weights for all elements.

    Element centroids sit on the integer-offset grid, so the reach of the
    kernel is ``floor(radius)`` elements per axis.
    """
    radius = check_positive("radius", radius)
    nelx, nely = mesh.nelx, mesh.nely
    n = mesh.n_elements
    reach = int(np.floor(radius))
    rows, cols, vals = [], [], []
    for dx in range(-reach, reach + 1):
        for dy in range(-reach, reach + 1):
            dist = np.hypot(dx, dy)
            if dist > radius:
                continue
            ex = np.arange(max(0, -dx), nelx - max(0, dx))
            ey = np.arange(max(0, -dy), nely - max(0, dy))
            if ex.size == 0 or ey.size == 0:
                continue
            gx, gy = np.meshgrid(ex, ey, indexing="ij")
            i = (gx * nely + gy).ravel()
            j = ((gx + dx) * nely + (gy + dy)).ravel()
            rows.append(i)
            cols.append(j)
            vals.append(np.full(i.size, radius - dist))
    weights = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n),
    ).tocsr()
    sums = weights @ np.ones(n)
    return FilterKernel(radius=radius, weights=weights, weight_sums=sums)


def filter_sensitivities(kernel, energies, rho, void_scale):
    """Weighted-average energies, scaled down on void elements.

    Returns ``w_i = sum_l h_il e_l / sum_l h_il`` for solid elements and
    ``void_scale`` times that quotient where ``rho_i = 0``.
    """
    n = kernel.n_elements
    energies = check_array_length("energies", energies, n)
    rho = check_design_vector(rho, n)
    averaged = (kernel.weights @ energies) / kernel.weight_sums
    return np.where(rho == 1, averaged, void_scale * averaged)
