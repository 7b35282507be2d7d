"""Second-order Dyson noise operators for telegraph noise.

For a Pauli observable ``O`` the noisy expectation is
``E{O} = Tr[V_O rho_T O]`` with ``rho_T`` the closed-system final state.
Expanding the toggling-frame propagator to second order in the couplings and
averaging over zero-mean noise gives, per noise axis with coupling ``g``,

    V_O = I + g^2 [ sum I_full[a,b] O s_a O s_b - X - O X^dagger O ],
    X   = sum I_gt[a,b] s_a s_b,

where ``s_a = U(T) sigma_a U(T)^dagger`` and the kernels are double integrals
of ``y_a(r) y_b(r') exp(-2 gamma |r - r'|)`` over the full square and over the
ordered region ``r > r'``.  Indices run over ``x, y, z`` only since the
identity component of a conjugated traceless operator is zero.
"""

from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from . import _kernels
from .dynamics import control_unitaries
from .qubit import KET_0, PAULIS, SIGMA_0, bloch_vector, density, density_from_bloch

AXIS_INDEX = {"x": 0, "y": 1, "z": 2}


class SingularObservable(ValueError):
    """Observable is not one of the Pauli matrices."""


@dataclass(frozen=True, eq=False)
class InteractionCoeffs:
    """``y[axis][k, a] = Tr[U(t_k)^dagger sigma_axis U(t_k) sigma_a] / 2``."""

    t: np.ndarray
    y: dict
    u_final: np.ndarray


def interaction_coeffs(p, axes=("x", "z"), unitaries=None):
    u = control_unitaries(p) if unitaries is None else unitaries
    y = {ax: _kernels.conjugation_coeffs(u, AXIS_INDEX[ax]) for ax in axes}
    return InteractionCoeffs(t=p.t, y=y, u_final=u[-1])


def trapezoid_weights(n_points, dt):
    w = np.full(n_points, dt)
    w[0] = w[-1] = dt / 2
    return w


@dataclass(frozen=True, eq=False)
class DysonKernels:
    """Per noise axis ``(I_full, I_gt, I_lt)`` as 3x3 arrays over ``(a, b)``."""

    full: dict
    gt: dict
    lt: dict


def _ordered_sum(w, ya, q):
    """``S[i, b] = sum_{j < i} w_j y_b(j) q^(i - j)`` by a first-order recursion."""
    x = w[:, None] * ya
    return lfilter([0.0, q], [1.0, -q], x, axis=0)


def dyson_kernels(coeffs, gamma, dt=None):
    """Trapezoidal double integrals in ``O(N)`` per axis.

    The diagonal ``r = r'`` is split evenly between the two ordered halves,
    so ``I_gt + I_lt = I_full`` holds exactly.
    """
    t = coeffs.t
    dt = (t[-1] - t[0]) / (len(t) - 1) if dt is None else dt
    w = trapezoid_weights(len(t), dt)
    q = np.exp(-2.0 * gamma * dt)
    full, gt, lt = {}, {}, {}
    for ax, ya in coeffs.y.items():
        s = _ordered_sum(w, ya, q)
        wy = w[:, None] * ya
        strict = wy.T @ s
        diag = 0.5 * (wy.T @ wy)
        g = strict + diag
        gt[ax] = g
        lt[ax] = g.T.copy()
        full[ax] = g + g.T
    return DysonKernels(full, gt, lt)


def dyson_kernels_direct(coeffs, gamma, dt=None):
    """``O(N^2)`` reference for :func:`dyson_kernels`."""
    t = coeffs.t
    dt = (t[-1] - t[0]) / (len(t) - 1) if dt is None else dt
    w = trapezoid_weights(len(t), dt)
    c = np.exp(-2.0 * gamma * np.abs(t[:, None] - t[None, :]))
    lower = np.tril(np.ones_like(c), -1) + 0.5 * np.eye(len(t))
    full, gt, lt = {}, {}, {}
    for ax, ya in coeffs.y.items():
        wy = w[:, None] * ya
        full[ax] = wy.T @ c @ wy
        gt[ax] = wy.T @ (c * lower) @ wy
        lt[ax] = wy.T @ (c * lower.T) @ wy
    return DysonKernels(full, gt, lt)


def _observable(o):
    if isinstance(o, str):
        try:
            return PAULIS[AXIS_INDEX[o]]
        except KeyError:
            raise SingularObservable(f"unknown observable {o!r}") from None
    if isinstance(o, (int, np.integer)):
        if not 0 <= o < 3:
            raise SingularObservable(f"observable index {o} out of range")
        return PAULIS[o]
    o = np.asarray(o, dtype=complex)
    for s in PAULIS:
        if np.allclose(o, s, atol=1e-12):
            return s
    raise SingularObservable("observable must be sigma_x, sigma_y or sigma_z")


def rotated_paulis(u_final):
    return [u_final @ s @ u_final.conj().T for s in PAULIS]


def assemble_vo(coeffs, kernels, couplings, o):
    """Noise operator ``V_O`` for Pauli ``o``.

    ``couplings`` maps noise axis to ``g``.  ``O^-1 = O`` for Pauli observables.
    """
    obs = _observable(o)
    st = rotated_paulis(coeffs.u_final)
    v = SIGMA_0.copy()
    for ax, g in couplings.items():
        if g == 0.0:
            continue
        kf, kg = kernels.full[ax], kernels.gt[ax]
        acc = np.zeros((2, 2), dtype=complex)
        x = np.zeros((2, 2), dtype=complex)
        for a in range(3):
            osa = obs @ st[a]
            for b in range(3):
                acc += kf[a, b] * (osa @ obs @ st[b])
                x += kg[a, b] * (st[a] @ st[b])
        acc -= x + obs @ x.conj().T @ obs
        v = v + g * g * acc
    return v


@dataclass(frozen=True, eq=False)
class DysonResult:
    expectations: np.ndarray
    rho: np.ndarray
    v_ops: tuple


def dyson_expectations(p, noise, psi0=KET_0, unitaries=None):
    """``E{sigma_i} = Tr[V_i rho_T sigma_i]`` for ``i = x, y, z``."""
    coeffs = interaction_coeffs(p, unitaries=unitaries)
    kernels = dyson_kernels(coeffs, noise.gamma, p.dt)
    couplings = {"x": noise.g_x, "z": noise.g_z}
    u = coeffs.u_final
    rho_t = u @ density(psi0) @ u.conj().T
    vs = tuple(assemble_vo(coeffs, kernels, couplings, i) for i in range(3))
    e = np.array([np.real(np.trace(vs[i] @ rho_t @ PAULIS[i])) for i in range(3)])
    return DysonResult(expectations=e, rho=density_from_bloch(e), v_ops=vs)


def cost_from_expectations(e, psi_target):
    """``J = (1 - sum_i E_i w_i) / 2`` with ``w_i = <psi|sigma_i|psi>``."""
    w = bloch_vector(density(psi_target))
    return 0.5 * (1.0 - float(np.dot(e, w)))


def whitebox_cost(p, noise, psi_target, psi0=KET_0):
    """Infidelity predicted by the second-order noise operators."""
    return cost_from_expectations(dyson_expectations(p, noise, psi0).expectations, psi_target)
