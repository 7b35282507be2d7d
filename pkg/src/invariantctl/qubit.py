"""Exact 2x2 algebra for a single qubit.

Vectors of Pauli coefficients are plain ``numpy`` arrays of shape ``(3,)``;
operators are ``(2, 2)`` complex arrays and pure states ``(2,)`` complex
arrays.  A Pauli vector ``v`` stands for the operator ``(v . sigma) / 2``.
"""

import numpy as np

SIGMA_0 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)

KET_0 = np.array([1, 0], dtype=complex)
KET_1 = np.array([0, 1], dtype=complex)

HERMITIAN_TOL = 1e-12


class DegenerateSpectrum(ValueError):
    """Raised when a Hamiltonian has no unique ground state."""


def pauli_expand(v, offset=0.0):
    """Return ``offset * I + (v . sigma) / 2``."""
    vx, vy, vz = np.asarray(v, dtype=float)
    return np.array(
        [[offset + vz / 2, (vx - 1j * vy) / 2],
         [(vx + 1j * vy) / 2, offset - vz / 2]],
        dtype=complex,
    )


def pauli_coefficients(m):
    """Inverse of :func:`pauli_expand`: returns ``(v, offset)`` for Hermitian ``m``."""
    m = np.asarray(m)
    offset = np.real(m[0, 0] + m[1, 1]) / 2
    v = np.array([np.real(np.trace(m @ s)) for s in PAULIS])
    return v, offset


def expm_pauli(v, offset, dt):
    """Closed-form ``exp(-i (offset I + v.sigma/2) dt)``.

    Uses ``exp(-i a n.sigma) = cos(a) I - i sin(a) n.sigma`` with
    ``a = |v| dt / 2``.
    """
    v = np.asarray(v, dtype=float)
    norm = np.sqrt(v @ v)
    half = 0.5 * norm * dt
    phase = np.exp(-1j * offset * dt)
    if norm == 0.0:
        return phase * SIGMA_0.copy()
    nx, ny, nz = v / norm
    c, s = np.cos(half), np.sin(half)
    return phase * np.array(
        [[c - 1j * s * nz, -1j * s * (nx - 1j * ny)],
         [-1j * s * (nx + 1j * ny), c + 1j * s * nz]],
        dtype=complex,
    )


def is_hermitian(m, tol=HERMITIAN_TOL):
    m = np.asarray(m)
    return bool(np.max(np.abs(m - m.conj().T)) <= tol)


def fix_phase(psi):
    """Rotate the global phase so the first nonzero amplitude is real positive."""
    psi = np.asarray(psi, dtype=complex)
    for amp in psi:
        if abs(amp) > 1e-15:
            return psi * (abs(amp) / amp)
    return psi


def ground_state(h):
    """Lowest eigenpair of a Hermitian 2x2 matrix.

    Returns
    -------
    (psi, energy)
        ``psi`` is normalized with its first nonzero amplitude real positive.

    Raises
    ------
    DegenerateSpectrum
        If the two eigenvalues are closer than ``1e-12``.
    """
    h = np.asarray(h, dtype=complex)
    if not is_hermitian(h):
        raise ValueError("matrix is not Hermitian")
    vals, vecs = np.linalg.eigh(h)
    if vals[1] - vals[0] < 1e-12:
        raise DegenerateSpectrum(f"eigenvalue gap {vals[1] - vals[0]:.3g} below 1e-12")
    psi = vecs[:, 0]
    return fix_phase(psi / np.linalg.norm(psi)), float(vals[0])


def hamiltonian_from_ground_state(psi, scale=1.0, upper=1.0):
    """Hermitian matrix having ``psi`` as ground state with eigenvalue ``-scale``.

    The eigenbasis is ``psi`` augmented by the null vector of ``<psi|``,
    which for a qubit is ``(-conj(b), conj(a))``.  The second eigenvalue is
    ``upper * scale``; ``upper`` must lie in ``(-1, 1]``.
    """
    psi = np.asarray(psi, dtype=complex)
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > 1e-10:
        raise ValueError("state must be normalized")
    if not -1.0 < upper <= 1.0:
        raise ValueError("upper eigenvalue must lie in (-1, 1]")
    if scale <= 0:
        raise ValueError("scale must be positive")
    a, b = psi
    perp = np.array([-np.conj(b), np.conj(a)])
    q = np.column_stack([psi, perp])
    lam = np.diag([-1.0, upper]) * scale
    h = q @ lam @ q.conj().T
    # q is unitary, so q^-1 = q^dagger; symmetrize away rounding
    return (h + h.conj().T) / 2


def density(psi):
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def bloch_vector(rho):
    """Components ``Tr[rho sigma_i]`` of a density matrix."""
    rho = np.asarray(rho, dtype=complex)
    return np.array([
        2 * np.real(rho[0, 1]),
        -2 * np.imag(rho[0, 1]),
        np.real(rho[0, 0] - rho[1, 1]),
    ])


def density_from_bloch(b):
    """``(I + b.sigma) / 2``."""
    return pauli_expand(b, 0.5)


def state_from_hamiltonian_vector(h):
    """Ground state of ``(h . sigma) / 2``."""
    return ground_state(pauli_expand(h))[0]
