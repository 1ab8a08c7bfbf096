"""A four-variable mixed-integer validation problem with a known optimum.

    minimize   v + w + t + (u - 2)^2
    subject to v + 2w + t + u <= 3
               v + w + t >= 1
               v + w = 1
               v, w, t binary,  u real in [0, 3]

The unique optimum is (u, v, w, t) = (2, 1, 0, 0). Encoding ``u`` and the
two slacks in binary and squaring the constraints with penalty factor 4
gives a small quadratic model whose ground state recovers that optimum up
to the bit resolution of ``u`` — a complete end-to-end check of the
slack/encode/penalty pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qubo import BinaryEncoding, QuboBuilder

__all__ = ["ToySolution", "ToyQubo", "build_toy_qubo"]

PENALTY = 4.0


@dataclass(frozen=True)
class ToySolution:
    u: float
    v: int
    w: int
    t: int
    alpha1: float
    alpha2: int


@dataclass(frozen=True)
class ToyQubo:
    model: object
    u_encoding: BinaryEncoding
    alpha1_encoding: BinaryEncoding

    def decode(self, assignment):
        bits = np.asarray(assignment, dtype=np.uint8)
        if bits.shape != (self.model.n_vars,):
            raise ValueError(
                f"expected {self.model.n_vars} bits, got shape {bits.shape}"
            )
        nu = self.u_encoding.n_vars
        na = self.alpha1_encoding.n_vars
        v, w, t = (int(b) for b in bits[:3])
        u_bits = bits[3 : 3 + nu]
        a1_bits = bits[3 + nu : 3 + nu + na]
        a2_bits = bits[3 + nu + na :]
        return ToySolution(
            u=self.u_encoding.decode(u_bits),
            v=v,
            w=w,
            t=t,
            alpha1=self.alpha1_encoding.decode(a1_bits),
            alpha2=int(a2_bits.sum()),
        )


def build_toy_qubo(n_u, n_alpha1, penalty=PENALTY):
    """Quadratic model of the validation problem.

    ``n_u`` and ``n_alpha1`` control the bit resolution of ``u`` (bounded
    by 3) and of the first slack (also bounded by 3). The second slack is
    an integer in [0, 2] and needs exactly two unit-weight bits.
    """
    if n_u < 1 or n_alpha1 < 1:
        raise ValueError("bit counts must be at least 1")
    u_enc = BinaryEncoding(3.0, n_u)
    a1_enc = BinaryEncoding(3.0, n_alpha1)

    b = QuboBuilder()
    v = b.add_variable("v")
    w = b.add_variable("w")
    t = b.add_variable("t")
    u_idx = b.add_variables([f"u[{i}]" for i in range(u_enc.n_vars)])
    a1_idx = b.add_variables([f"alpha1[{i}]" for i in range(a1_enc.n_vars)])
    a2_idx = b.add_variables(["alpha2[0]", "alpha2[1]"])

    u_terms = list(zip(u_idx, u_enc.weights()))
    a1_terms = list(zip(a1_idx, a1_enc.weights()))

    # objective: v + w + t + (u - 2)^2
    b.add_linear(v, 1.0)
    b.add_linear(w, 1.0)
    b.add_linear(t, 1.0)
    b.add_affine_squared(1.0, -2.0, u_terms)
    # v + 2w + t + u - 3 + alpha1 = 0
    b.add_affine_squared(
        penalty, -3.0, [(v, 1.0), (w, 2.0), (t, 1.0)] + u_terms + a1_terms
    )
    # -v - w - t + 1 + alpha2 = 0
    b.add_affine_squared(
        penalty,
        1.0,
        [(v, -1.0), (w, -1.0), (t, -1.0), (a2_idx[0], 1.0), (a2_idx[1], 1.0)],
    )
    # v + w = 1
    b.add_affine_squared(penalty, -1.0, [(v, 1.0), (w, 1.0)])

    return ToyQubo(model=b.build(), u_encoding=u_enc, alpha1_encoding=a1_enc)
