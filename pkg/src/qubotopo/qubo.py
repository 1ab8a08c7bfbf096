"""Quadratic pseudo-Boolean models of the cut-constrained master problem.

The multi-cut master is a mixed-integer linear program: minimize a bound
variable ``eta`` subject to one linear under-estimator (cut) per retained
iterate and an exact volume count. Converting it for an annealing backend
takes three steps:

* slack variables turn each cut inequality into an equality,
* ``eta`` and each slack get a fixed-point binary expansion on ``[0, U]``
  where ``U`` is the incumbent compliance,
* the equalities move into the objective as squared penalties.

A splitting pass shrinks the model first: solving each cut's single-cut
master exactly (greedy) fixes every element on which all those solutions
agree, leaving a small disagreement set for the quadratic model.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .binlp import VolumeLP, solve_greedy
from .validation import check_count, check_design_vector, check_positive

__all__ = [
    "BinaryEncoding",
    "QuboModel",
    "QuboBuilder",
    "SplitResult",
    "MasterQubo",
    "DecodedMaster",
    "compute_split",
    "build_reduced_qubo",
    "build_full_qubo",
    "cut_value",
    "refine_eta",
    "dump_coefficients",
    "load_coefficients",
]


@dataclass(frozen=True)
class BinaryEncoding:
    """Fixed-point expansion of a bounded value on ``[0, bound]``.

    Bit 0 carries weight ``bound * (1 - 2**-n)`` and bit ``i`` of the
    remaining ``n`` bits carries ``bound / 2**i``, so the lattice step is
    ``bound / 2**n`` and the largest decodable value is
    ``2 * bound * (1 - 2**-n)``.
    """

    bound: float
    n_bits: int

    def __post_init__(self):
        check_positive("bound", self.bound)
        if self.n_bits < 1:
            raise ValueError("n_bits must be at least 1")

    @property
    def n_vars(self):
        return self.n_bits + 1

    @property
    def resolution(self):
        return self.bound / 2**self.n_bits

    @property
    def max_value(self):
        return 2 * self.bound * (1 - 2.0**-self.n_bits)

    def weights(self):
        lead = self.bound * (1 - 2.0**-self.n_bits)
        tail = self.bound / 2.0 ** np.arange(1, self.n_bits + 1)
        return np.concatenate([[lead], tail])

    def decode(self, bits):
        bits = np.asarray(bits, dtype=float)
        if bits.shape != (self.n_vars,):
            raise ValueError(f"expected {self.n_vars} bits, got shape {bits.shape}")
        return float(np.dot(self.weights(), bits))

    def encode(self, value):
        """Bits reproducing an exactly-representable lattice value."""
        steps = value / self.resolution
        m = int(round(steps))
        if abs(steps - m) > 1e-9 or not 0 <= m <= 2 ** (self.n_bits + 1) - 2:
            raise ValueError(f"{value!r} is not representable with {self.n_bits} bits")
        bits = np.zeros(self.n_vars, dtype=np.uint8)
        lead_steps = 2**self.n_bits - 1
        if m >= lead_steps:
            bits[0] = 1
            m -= lead_steps
        for i in range(1, self.n_bits + 1):
            bits[i] = (m >> (self.n_bits - i)) & 1
        return bits


@dataclass
class QuboModel:
    """Constant + linear + pairwise objective over named binary variables.

    Pairwise coefficients are stored upper-triangular without diagonal
    entries; anything diagonal folds into the linear part via ``x*x = x``.
    """

    constant: float
    linear: np.ndarray
    quadratic: dict
    names: tuple

    @property
    def n_vars(self):
        return self.linear.size

    def symmetric_matrix(self):
        """Dense symmetric coupling matrix with zero diagonal (cached)."""
        cached = getattr(self, "_sym", None)
        if cached is None:
            n = self.n_vars
            cached = np.zeros((n, n))
            for (i, j), v in self.quadratic.items():
                cached[i, j] += v
                cached[j, i] += v
            self._sym = cached
        return cached

    def energy(self, assignment):
        x = np.asarray(assignment, dtype=float)
        if x.shape != (self.n_vars,):
            raise ValueError(f"expected {self.n_vars} bits, got shape {x.shape}")
        value = self.constant + float(np.dot(self.linear, x))
        for (i, j), v in self.quadratic.items():
            value += v * x[i] * x[j]
        return value

    def energies(self, assignments):
        """Vectorized energy over an (m, n_vars) batch of assignments."""
        X = np.asarray(assignments, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.n_vars:
            raise ValueError(f"expected (m, {self.n_vars}) batch, got {X.shape}")
        sym = self.symmetric_matrix()
        return self.constant + X @ self.linear + 0.5 * np.einsum(
            "bi,ij,bj->b", X, sym, X
        )


class QuboBuilder:
    """Incremental construction of a QuboModel."""

    def __init__(self):
        self._names = []
        self._index = {}
        self.constant = 0.0
        self._linear = {}
        self._quadratic = {}

    def add_variable(self, name):
        if name in self._index:
            raise ValueError(f"duplicate variable name {name!r}")
        idx = len(self._names)
        self._names.append(name)
        self._index[name] = idx
        return idx

    def add_variables(self, names):
        return [self.add_variable(name) for name in names]

    def add_constant(self, value):
        self.constant += float(value)

    def add_linear(self, i, value):
        self._linear[i] = self._linear.get(i, 0.0) + float(value)

    def add_quadratic(self, i, j, value):
        if i == j:
            self.add_linear(i, value)
            return
        key = (i, j) if i < j else (j, i)
        self._quadratic[key] = self._quadratic.get(key, 0.0) + float(value)

    def add_affine_squared(self, factor, constant, terms):
        """Add ``factor * (constant + sum_k coeff_k x_k)**2``.

        ``terms`` is a sequence of ``(index, coeff)`` pairs with distinct
        indices.
        """
        idx = [i for i, _ in terms]
        if len(set(idx)) != len(idx):
            raise ValueError("affine terms must use distinct variables")
        self.add_constant(factor * constant * constant)
        for i, ci in terms:
            self.add_linear(i, factor * (ci * ci + 2.0 * constant * ci))
        for a in range(len(terms)):
            ia, ca = terms[a]
            for b in range(a + 1, len(terms)):
                ib, cb = terms[b]
                self.add_quadratic(ia, ib, 2.0 * factor * ca * cb)

    def build(self):
        n = len(self._names)
        linear = np.zeros(n)
        for i, v in self._linear.items():
            linear[i] = v
        quadratic = {k: v for k, v in self._quadratic.items() if v != 0.0}
        return QuboModel(
            constant=self.constant,
            linear=linear,
            quadratic=quadratic,
            names=tuple(self._names),
        )


@dataclass(frozen=True)
class SplitResult:
    """Classical/annealer partition of the multi-cut master.

    Every cut's single-cut master is solved exactly; ``fixed_indices``
    collects the elements on which all those solutions agree (with common
    values ``fixed_values``) and ``free_indices`` the disagreement set left
    for the quadratic model. ``residual_constants[j]`` is the cut constant
    after substituting the agreed elements.
    """

    count: int
    free_indices: np.ndarray
    fixed_indices: np.ndarray
    fixed_values: np.ndarray
    sub_solutions: list
    residual_constants: np.ndarray

    @property
    def n_free(self):
        return self.free_indices.size

    @property
    def reduced_count(self):
        return self.count - int(self.fixed_values.sum())


def compute_split(cuts, count):
    """Solve each cut's master exactly and split agree/disagree elements."""
    if len(cuts) < 1:
        raise ValueError("need at least one cut")
    solutions = [solve_greedy(VolumeLP.from_cut(cut, count)) for cut in cuts]
    stacked = np.stack(solutions)
    agree = (stacked == stacked[0]).all(axis=0)
    fixed_indices = np.flatnonzero(agree)
    free_indices = np.flatnonzero(~agree)
    fixed_values = stacked[0, fixed_indices]
    residuals = np.array(
        [
            cut.compliance
            - float(
                np.dot(
                    cut.sensitivities[fixed_indices],
                    fixed_values.astype(float) - cut.layout[fixed_indices],
                )
            )
            for cut in cuts
        ]
    )
    return SplitResult(
        count=count,
        free_indices=free_indices,
        fixed_indices=fixed_indices,
        fixed_values=fixed_values,
        sub_solutions=solutions,
        residual_constants=residuals,
    )


@dataclass(frozen=True)
class DecodedMaster:
    layout: np.ndarray
    eta: float
    alphas: np.ndarray


@dataclass(frozen=True)
class MasterQubo:
    """A QuboModel plus the bookkeeping needed to decode assignments."""

    model: QuboModel
    n_rho: int
    count: int
    element_ids: np.ndarray
    fixed_ids: np.ndarray
    fixed_values: np.ndarray
    eta_encoding: BinaryEncoding
    alpha_encodings: list
    penalty_cut: float
    penalty_volume: float

    @property
    def n_layout_bits(self):
        return self.element_ids.size

    def _eta_slice(self):
        start = self.n_layout_bits
        return slice(start, start + self.eta_encoding.n_vars)

    def _alpha_slice(self, j):
        start = self.n_layout_bits + self.eta_encoding.n_vars
        for enc in self.alpha_encodings[:j]:
            start += enc.n_vars
        enc = self.alpha_encodings[j]
        return slice(start, start + enc.n_vars)

    def decode(self, assignment):
        """Map a bit assignment back to (full layout, eta, slacks)."""
        bits = np.asarray(assignment, dtype=np.uint8)
        if bits.shape != (self.model.n_vars,):
            raise ValueError(
                f"expected {self.model.n_vars} bits, got shape {bits.shape}"
            )
        layout = np.zeros(self.n_rho, dtype=np.uint8)
        layout[self.fixed_ids] = self.fixed_values
        layout[self.element_ids] = bits[: self.n_layout_bits]
        eta = self.eta_encoding.decode(bits[self._eta_slice()])
        alphas = np.array(
            [
                enc.decode(bits[self._alpha_slice(j)])
                for j, enc in enumerate(self.alpha_encodings)
            ]
        )
        return DecodedMaster(layout=layout, eta=eta, alphas=alphas)

    def encode_feasible(self, layout, eta, alphas):
        """Assignment bits for lattice-exact (layout, eta, alphas) values."""
        layout = check_design_vector(layout, self.n_rho)
        bits = [layout[self.element_ids]]
        bits.append(self.eta_encoding.encode(eta))
        for enc, alpha in zip(self.alpha_encodings, alphas):
            bits.append(enc.encode(alpha))
        return np.concatenate(bits)


def _build_master(
    cuts,
    n_rho,
    count,
    upper_bound,
    element_ids,
    fixed_ids,
    fixed_values,
    cut_constants,
    n_eta,
    n_alpha,
    penalty_cut,
    penalty_volume,
):
    upper_bound = check_positive("upper_bound", upper_bound)
    penalty_cut = upper_bound if penalty_cut is None else float(penalty_cut)
    penalty_volume = upper_bound if penalty_volume is None else float(penalty_volume)

    builder = QuboBuilder()
    rho_idx = builder.add_variables([f"rho[{e}]" for e in element_ids])
    eta_enc = BinaryEncoding(upper_bound, n_eta)
    eta_idx = builder.add_variables([f"eta[{b}]" for b in range(eta_enc.n_vars)])
    alpha_encs = []
    alpha_idx = []
    for j in range(len(cuts)):
        enc = BinaryEncoding(upper_bound, n_alpha)
        alpha_encs.append(enc)
        alpha_idx.append(
            builder.add_variables([f"alpha{j}[{b}]" for b in range(enc.n_vars)])
        )

    eta_weights = eta_enc.weights()
    # objective: the decoded bound variable itself
    for i, w in zip(eta_idx, eta_weights):
        builder.add_linear(i, w)

    # one squared equality per cut: constant - w.rho + alpha - eta = 0
    for j, cut in enumerate(cuts):
        terms = [
            (idx, -float(cut.sensitivities[e]))
            for idx, e in zip(rho_idx, element_ids)
        ]
        terms += list(zip(alpha_idx[j], alpha_encs[j].weights()))
        terms += [(i, -w) for i, w in zip(eta_idx, eta_weights)]
        builder.add_affine_squared(penalty_cut, cut_constants[j], terms)

    # exact volume count, scaled to match the fractional form
    target = count - int(np.sum(fixed_values))
    builder.add_affine_squared(
        penalty_volume / n_rho**2,
        -float(target),
        [(i, 1.0) for i in rho_idx],
    )

    return MasterQubo(
        model=builder.build(),
        n_rho=n_rho,
        count=count,
        element_ids=np.asarray(element_ids, dtype=np.int64),
        fixed_ids=np.asarray(fixed_ids, dtype=np.int64),
        fixed_values=np.asarray(fixed_values, dtype=np.uint8),
        eta_encoding=eta_enc,
        alpha_encodings=alpha_encs,
        penalty_cut=penalty_cut,
        penalty_volume=penalty_volume,
    )


def build_reduced_qubo(
    split,
    cuts,
    n_rho,
    upper_bound,
    n_eta=10,
    n_alpha=10,
    penalty_cut=None,
    penalty_volume=None,
):
    """Quadratic model over the disagreement set of a split master.

    At any assignment satisfying all encoded equalities the model value
    equals the decoded bound variable exactly; each violated equality
    contributes its penalty factor times the squared residual. The cut
    constants absorb both the agreed elements and each cut's expansion
    point restricted to the free set.
    """
    if split.n_free == 0:
        raise ValueError("all single-cut solutions agree; no quadratic model needed")
    if len(cuts) != split.residual_constants.size:
        raise ValueError("cut pool does not match the split")
    check_count("reduced count", split.reduced_count, split.n_free)
    constants = [
        split.residual_constants[j]
        + float(
            np.dot(
                cut.sensitivities[split.free_indices],
                cut.layout[split.free_indices].astype(float),
            )
        )
        for j, cut in enumerate(cuts)
    ]
    return _build_master(
        cuts,
        n_rho,
        split.count,
        upper_bound,
        split.free_indices,
        split.fixed_indices,
        split.fixed_values,
        constants,
        n_eta,
        n_alpha,
        penalty_cut,
        penalty_volume,
    )


def build_full_qubo(
    cuts,
    n_rho,
    count,
    upper_bound,
    n_eta=10,
    n_alpha=10,
    penalty_cut=None,
    penalty_volume=None,
):
    """Quadratic model over every design variable (no splitting).

    Only practical for small meshes; the reduced builder is the production
    path.
    """
    if len(cuts) < 1:
        raise ValueError("need at least one cut")
    count = check_count("count", count, n_rho)
    all_ids = np.arange(n_rho)
    constants = [
        cut.compliance + float(np.dot(cut.sensitivities, cut.layout.astype(float)))
        for cut in cuts
    ]
    return _build_master(
        cuts,
        n_rho,
        count,
        upper_bound,
        all_ids,
        np.empty(0, dtype=np.int64),
        np.empty(0, dtype=np.uint8),
        constants,
        n_eta,
        n_alpha,
        penalty_cut,
        penalty_volume,
    )


def cut_value(cut, rho):
    """Linear under-estimator of one cut evaluated at a layout."""
    diff = np.asarray(rho, dtype=float) - cut.layout.astype(float)
    return cut.compliance - float(np.dot(cut.sensitivities, diff))


def refine_eta(cuts, rho):
    """Tight continuous bound at a fixed layout: the largest cut value.

    Recomputing the bound variable from the layout avoids the quantization
    error of its binary expansion.
    """
    if len(cuts) < 1:
        raise ValueError("need at least one cut")
    return max(cut_value(cut, rho) for cut in cuts)


def dump_coefficients(model, path):
    """Write the plain-text coefficient form: ``i j value`` per term.

    ``i i`` rows carry linear terms; the constant rides in a header
    comment. Floats are written with ``repr`` so parsing round-trips
    exactly.
    """
    lines = [f"# constant {model.constant!r}"]
    for i, v in enumerate(model.linear):
        if v != 0.0:
            lines.append(f"{i} {i} {v!r}")
    for (i, j) in sorted(model.quadratic):
        lines.append(f"{i} {j} {model.quadratic[(i, j)]!r}")
    text = "\n".join(lines) + "\n"
    with open(path, "w") as fh:
        fh.write(text)


def load_coefficients(path):
    """Parse a coefficient file written by :func:`dump_coefficients`."""
    constant = 0.0
    linear = {}
    quadratic = {}
    n = 0
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                fields = line[1:].split()
                if len(fields) == 2 and fields[0] == "constant":
                    try:
                        constant = float(fields[1])
                    except ValueError:
                        raise ValueError(
                            f"line {lineno}: bad constant {fields[1]!r}"
                        ) from None
                continue
            fields = line.split()
            if len(fields) != 3:
                raise ValueError(f"line {lineno}: expected 'i j value', got {line!r}")
            try:
                i, j = int(fields[0]), int(fields[1])
                v = float(fields[2])
            except ValueError:
                raise ValueError(f"line {lineno}: expected 'i j value', got {line!r}") from None
            if i < 0 or j < 0:
                raise ValueError(f"line {lineno}: negative variable index")
            n = max(n, i + 1, j + 1)
            if i == j:
                linear[i] = linear.get(i, 0.0) + v
            else:
                key = (i, j) if i < j else (j, i)
                quadratic[key] = quadratic.get(key, 0.0) + v
    lin = np.zeros(n)
    for i, v in linear.items():
        lin[i] = v
    return QuboModel(
        constant=constant,
        linear=lin,
        quadratic=quadratic,
        names=tuple(f"x{i}" for i in range(n)),
    )
