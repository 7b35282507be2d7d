"""Polynomial invariant families and their amplitude bound.

Within a segment the invariant is ``I = (f . sigma) / 2`` with components
written in the segment's local labels.  ``f1`` and ``f2`` are polynomials in
normalized time ``s in [0, 1]``; ``f3`` follows from ``f1^2 + f2^2 + f3^2 = c^2``.
Each polynomial is the smoothstep (cubic) interpolant of its boundary values
plus a combination of null-space polynomials, which vanish together with their
first derivatives at both ends.  ``v_max`` bounds the null-space weights so
that ``f3`` can never reach zero.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .planner import ReferenceAxis


DEFAULT_DEGREE = 18
DEFAULT_EPSILON = 1e-5
DEFAULT_GRID = 2001


class ZeroHamiltonian(ValueError):
    """A boundary Hamiltonian has zero norm, so the invariant direction is undefined."""


class DegenerateBoundary(ValueError):
    """``C3 <= 0`` somewhere, i.e. the cubic base path touches ``f3 = 0``."""


class DomainViolation(ValueError):
    """``c^2 - f1^2 - f2^2 <= 0`` during evaluation, so ``f3`` is not real."""


def boundary_invariant(h, ref_axis, c=1.0):
    """Local ``(f1, f2)`` of the invariant commuting with ``h`` at a boundary."""
    local = ref_axis.to_local(h)
    r = np.sqrt(local @ local)
    if r == 0.0:
        raise ZeroHamiltonian("boundary Hamiltonian is zero")
    return c * local[0] / r, c * local[1] / r


def constraint_matrix(n):
    """Rows ``xi(0)``, ``xi'(0)``, ``xi(1)``, ``xi'(1)`` for monomials of degree ``<= n``."""
    if n < 3:
        raise ValueError("degree must be at least 3")
    a = np.zeros((4, n + 1))
    a[0, 0] = 1.0
    a[1, 1] = 1.0
    a[2, :] = 1.0
    a[3, :] = np.arange(n + 1)
    return a


def cubic_solution(f_start, f_end):
    """Coefficients of ``f_start + (f_end - f_start)(3 s^2 - 2 s^3)``."""
    d = f_end - f_start
    return np.array([f_start, 0.0, 3.0 * d, -2.0 * d])


def _householder(x):
    # LAPACK/Eigen-style reflector: H x = beta e1 with H = I - tau v v^T, v[0] = 1
    c0 = x[0]
    tail = x[1:]
    tsq = tail @ tail
    if tsq <= np.finfo(float).tiny:
        return np.r_[1.0, np.zeros_like(tail)], 0.0
    beta = np.sqrt(c0 * c0 + tsq)
    if c0 >= 0:
        beta = -beta
    v = np.r_[1.0, tail / (c0 - beta)]
    return v, (beta - c0) / beta


def _bidiagonal_left_factor(m):
    """Orthogonal left factor ``Q`` of a Golub-Kahan bidiagonalization ``m = Q B P^T``."""
    m = np.array(m, dtype=float)
    rows, cols = m.shape
    reflectors = []
    for k in range(cols):
        v, tau = _householder(m[k:, k])
        reflectors.append((k, v, tau))
        m[k:, k:] -= tau * np.outer(v, v @ m[k:, k:])
        if k < cols - 2:
            w, tau_r = _householder(m[k, k + 1:])
            m[k:, k + 1:] -= tau_r * np.outer(m[k:, k + 1:] @ w, w)
    q = np.eye(rows)
    for k, v, tau in reversed(reflectors):
        q[k:, :] -= tau * np.outer(v, v @ q[k:, :])
    return q


def nullspace_basis(a):
    """Orthonormal basis of ``null(a)`` as columns.

    ``a`` must have full row rank.  The basis is the trailing block of the
    left factor from bidiagonalizing ``a^T``, which is the first stage of a
    divide-and-conquer SVD.  Any orthonormal basis spans the same family, but
    ``v_max`` depends on the particular basis, and this choice fixes it
    deterministically.
    """
    a = np.asarray(a, dtype=float)
    r = a.shape[0]
    return _bidiagonal_left_factor(a.T)[:, r:]


@lru_cache(maxsize=16)
def _nullspace_cached(n):
    u = nullspace_basis(constraint_matrix(n))
    u.setflags(write=False)
    return u


@lru_cache(maxsize=32)
def vandermonde(n, points):
    """``xi(s)`` and ``xi'(s)`` on ``points`` uniform samples of ``[0, 1]``."""
    s = np.linspace(0.0, 1.0, points)
    x = np.vander(s, n + 1, increasing=True)
    dx = np.zeros_like(x)
    dx[:, 1:] = x[:, :-1] * np.arange(1, n + 1)
    x.setflags(write=False)
    dx.setflags(write=False)
    return x, dx


def _bound_terms(f_start, f_end, basis, c, points):
    n = basis.shape[0] - 1
    x, _ = vandermonde(n, points)
    s = x[:, 1]
    step = 3 * s**2 - 2 * s**3
    e1 = (f_start[0] + (f_end[0] - f_start[0]) * step) / c
    e2 = (f_start[1] + (f_end[1] - f_start[1]) * step) / c
    if basis.shape[1] == 0:
        total = np.zeros_like(s)
    else:
        total = np.abs(x @ basis).sum(axis=1)
    # n_k = sign(e_k) * S, with sign(0) taken as +1; only |n_k| and e_k n_k matter
    c1 = 2.0 * total**2
    c2 = total * (np.abs(e1) + np.abs(e2))
    c3 = 1.0 - e1**2 - e2**2
    return c1, c2, c3


def c3_profile(f_start, f_end, c=1.0, points=10_001):
    """``C3(s) = 1 - e1^2 - e2^2`` of the cubic base path on a uniform grid."""
    s = np.linspace(0.0, 1.0, points)
    step = 3 * s**2 - 2 * s**3
    e1 = (f_start[0] + (f_end[0] - f_start[0]) * step) / c
    e2 = (f_start[1] + (f_end[1] - f_start[1]) * step) / c
    return 1.0 - e1**2 - e2**2


def compute_vmax(f_start, f_end, basis, c=1.0, grid_points=DEFAULT_GRID):
    """Largest weight bound keeping ``f1^2 + f2^2 < c^2`` on the grid.

    At each grid point the worst case of ``|v_j| <= v`` gives
    ``-(v/c)^2 C1 - 2 (v/c) C2 + C3 > 0``; its positive root is taken in the
    cancellation-free form ``C3 / (C2 + sqrt(C2^2 + C1 C3))``.  Returns
    ``inf`` when the basis is empty.
    """
    c1, c2, c3 = _bound_terms(np.asarray(f_start), np.asarray(f_end), basis, c, grid_points)
    if np.any(c3 <= 0):
        raise DegenerateBoundary("C3 <= 0 on the base path; reference pulse changes sign")
    denom = c2 + np.sqrt(c2**2 + c1 * c3)
    with np.errstate(divide="ignore"):
        root = np.where(denom > 0, c3 / np.where(denom > 0, denom, 1.0), np.inf)
    return float(c * root.min())


@dataclass(frozen=True, eq=False)
class SegmentFamily:
    """Invariant family of one segment.

    ``m1`` and ``m2`` map ``theta = (c, v_1, ..., v_m)`` to monomial
    coefficients of ``f1`` and ``f2``.
    """

    segment: object
    degree: int
    c: float
    f_start: tuple
    f_end: tuple
    m1: np.ndarray
    m2: np.ndarray
    v_max: float
    f3_sign: float
    epsilon: float = DEFAULT_EPSILON

    @property
    def n_free(self):
        return self.m1.shape[1] - 1

    @property
    def bound(self):
        return (1.0 - self.epsilon) * self.v_max

    @property
    def basis(self):
        return self.m1[:, 1:]

    def coefficients(self, v1, v2):
        """Monomial coefficients of ``f1`` and ``f2`` for free weights ``v1``, ``v2``."""
        theta1 = np.r_[self.c, np.asarray(v1, dtype=float)]
        theta2 = np.r_[self.c, np.asarray(v2, dtype=float)]
        return self.m1 @ theta1, self.m2 @ theta2

    def weights(self, theta_norm):
        """Split a shared normalized vector of length ``2m`` into scaled ``(v1, v2)``."""
        theta_norm = np.asarray(theta_norm, dtype=float)
        m = self.n_free
        if theta_norm.shape != (2 * m,):
            raise ValueError(f"expected {2 * m} normalized parameters, got {theta_norm.shape}")
        scale = self.v_max if np.isfinite(self.v_max) else 0.0
        return theta_norm[:m] * scale, theta_norm[m:] * scale


def build_family(segment, degree=DEFAULT_DEGREE, c=1.0, epsilon=DEFAULT_EPSILON,
                 grid_points=DEFAULT_GRID):
    """Family for one :class:`~invariantctl.planner.Segment`."""
    f_start = boundary_invariant(segment.h_start, segment.ref_axis, c)
    f_end = boundary_invariant(segment.h_end, segment.ref_axis, c)
    basis = _nullspace_cached(degree)
    m = basis.shape[1]
    mats = []
    for k in range(2):
        mk = np.zeros((degree + 1, m + 1))
        mk[:4, 0] = cubic_solution(f_start[k], f_end[k]) / c
        mk[:, 1:] = basis
        mk.setflags(write=False)
        mats.append(mk)
    v_max = compute_vmax(f_start, f_end, basis, c, grid_points)
    return SegmentFamily(
        segment=segment,
        degree=degree,
        c=float(c),
        f_start=f_start,
        f_end=f_end,
        m1=mats[0],
        m2=mats[1],
        v_max=v_max,
        f3_sign=float(np.sign(segment.h3_const)),
        epsilon=epsilon,
    )


def build_families(plan, degree=DEFAULT_DEGREE, c=1.0, epsilon=DEFAULT_EPSILON,
                   grid_points=DEFAULT_GRID):
    return tuple(build_family(s, degree, c, epsilon, grid_points) for s in plan.segments)


def eval_family(fam, v1, v2, s):
    """Evaluate ``(f1, f2, f3, df1/ds, df2/ds)`` at normalized times ``s``.

    Raises
    ------
    DomainViolation
        If ``f1^2 + f2^2 >= c^2`` at any requested point.
    """
    s = np.asarray(s, dtype=float)
    p1, p2 = fam.coefficients(v1, v2)
    x = np.vander(np.ravel(s), fam.degree + 1, increasing=True)
    dp = np.arange(1, fam.degree + 1)
    f1, f2 = (x @ p1).reshape(s.shape), (x @ p2).reshape(s.shape)
    d1 = (x[:, :-1] @ (p1[1:] * dp)).reshape(s.shape)
    d2 = (x[:, :-1] @ (p2[1:] * dp)).reshape(s.shape)
    rest = fam.c**2 - f1**2 - f2**2
    if np.any(rest <= 0):
        raise DomainViolation(f"c^2 - f1^2 - f2^2 reaches {np.min(rest):.3g}")
    f3 = fam.f3_sign * np.sqrt(rest)
    return f1, f2, f3, d1, d2


def eval_family_grid(fam, v1, v2, points):
    """Same as :func:`eval_family` on ``points`` uniform samples using cached Vandermonde matrices."""
    x, dx = vandermonde(fam.degree, points)
    p1, p2 = fam.coefficients(v1, v2)
    f1, f2 = x @ p1, x @ p2
    d1, d2 = dx @ p1, dx @ p2
    rest = fam.c**2 - f1**2 - f2**2
    if np.any(rest <= 0):
        raise DomainViolation(f"c^2 - f1^2 - f2^2 reaches {np.min(rest):.3g}")
    return f1, f2, fam.f3_sign * np.sqrt(rest), d1, d2


def extremal_weights(fam, s_star, scale=1.0):
    """Weights ``v_j = scale * v_max * sign(e_k) * sign(u_j(s*))`` maximizing ``|f_k(s*)|``."""
    x = np.vander(np.atleast_1d(float(s_star)), fam.degree + 1, increasing=True)[0]
    u = x @ fam.basis
    su = np.where(u >= 0, 1.0, -1.0)
    out = []
    for mk in (fam.m1, fam.m2):
        e = x @ mk[:, 0] * fam.c
        se = 1.0 if e >= 0 else -1.0
        out.append(scale * fam.v_max * se * su)
    return tuple(out)


__all__ = [
    "DEFAULT_DEGREE", "DEFAULT_EPSILON", "DEFAULT_GRID",
    "ZeroHamiltonian", "DegenerateBoundary", "DomainViolation",
    "ReferenceAxis", "boundary_invariant", "constraint_matrix", "cubic_solution",
    "nullspace_basis", "vandermonde", "c3_profile", "compute_vmax", "SegmentFamily",
    "build_family", "build_families", "eval_family", "eval_family_grid", "extremal_weights",
]
