"""2x2 matrix utilities: induced norms, trace-determinant stability test.

Everything is closed-form (no iterative solvers) so these can sit inside
simulation inner loops.
"""

from __future__ import annotations

import math
from enum import Enum

from .maps import Matrix2


class NormKind(Enum):
    LINF = "linf"
    L1 = "l1"
    L2SPECTRAL = "spectral"


def vec_norm(x: float, y: float, norm: NormKind) -> float:
    """Vector norm matching the induced matrix norm of the same kind."""
    if norm is NormKind.LINF:
        return max(abs(x), abs(y))
    if norm is NormKind.L1:
        return abs(x) + abs(y)
    return math.hypot(x, y)


def induced_norm(m: Matrix2, norm: NormKind) -> float:
    """Operator norm of m induced by the matching vector norm.

    LINF: max absolute row sum.  L1: max absolute column sum.
    L2SPECTRAL: sqrt of the largest eigenvalue of m^T m, from the closed-form
    quadratic for the 2x2 Gram matrix.
    """
    if norm is NormKind.LINF:
        return max(abs(m.a11) + abs(m.a12), abs(m.a21) + abs(m.a22))
    if norm is NormKind.L1:
        return max(abs(m.a11) + abs(m.a21), abs(m.a12) + abs(m.a22))
    # Gram matrix of m; symmetric, eigenvalues real and non-negative.
    g11 = m.a11 * m.a11 + m.a21 * m.a21
    g12 = m.a11 * m.a12 + m.a21 * m.a22
    g22 = m.a12 * m.a12 + m.a22 * m.a22
    tr = g11 + g22
    det = g11 * g22 - g12 * g12
    disc = tr * tr - 4.0 * det
    lam_max = 0.5 * (tr + math.sqrt(disc if disc > 0.0 else 0.0))
    return math.sqrt(lam_max if lam_max > 0.0 else 0.0)


def mat_vec(m: Matrix2, x: float, y: float) -> tuple[float, float]:
    return m.a11 * x + m.a12 * y, m.a21 * x + m.a22 * y


def mat_mul(m: Matrix2, n: Matrix2) -> Matrix2:
    return Matrix2(
        m.a11 * n.a11 + m.a12 * n.a21,
        m.a11 * n.a12 + m.a12 * n.a22,
        m.a21 * n.a11 + m.a22 * n.a21,
        m.a21 * n.a12 + m.a22 * n.a22,
    )


def trace_det_stable(m: Matrix2) -> bool:
    """True iff both eigenvalues of m lie strictly inside the unit circle.

    Equivalent closed form for 2x2 matrices: |tr m| < 1 + det m < 2, with
    strict inequalities.  Callers needing a tolerance at the boundary apply
    their own margin.
    """
    tr = m.a11 + m.a22
    det = m.a11 * m.a22 - m.a12 * m.a21
    return abs(tr) < 1.0 + det and det < 1.0


def eigen_moduli(m: Matrix2) -> tuple[float, float]:
    """Moduli of the two (possibly complex) eigenvalues, closed form."""
    tr = m.a11 + m.a22
    det = m.a11 * m.a22 - m.a12 * m.a21
    disc = tr * tr - 4.0 * det
    if disc >= 0.0:
        r = math.sqrt(disc)
        return abs(0.5 * (tr - r)), abs(0.5 * (tr + r))
    mod = math.sqrt(det)  # conjugate pair: |lambda|^2 = det > 0 here
    return mod, mod
