"""Compiled inner loops for propagation.

A 2x2 unitary is handled as its four complex entries ``(a, b, c, d)`` for
``[[a, b], [c, d]]``.
"""

import os

os.environ.setdefault("NUMBA_THREADING_LAYER", "workqueue")

import numba as nb  # noqa: E402
import numpy as np  # noqa: E402


@nb.njit(cache=True, inline="always")
def _expm(hx, hy, hz, dt):
    norm = np.sqrt(hx * hx + hy * hy + hz * hz)
    half = 0.5 * norm * dt
    c = np.cos(half)
    if norm == 0.0:
        return complex(c, 0.0), 0j, 0j, complex(c, 0.0)
    s = np.sin(half) / norm
    a = complex(c, -s * hz)
    d = complex(c, s * hz)
    b = complex(-s * hy, -s * hx)
    cc = complex(s * hy, -s * hx)
    return a, b, cc, d


@nb.njit(cache=True)
def step_unitaries(h, dt):
    """``exp(-i h_k . sigma dt / 2)`` for each row of ``h`` (shape ``(n, 3)``)."""
    n = h.shape[0]
    out = np.empty((n, 2, 2), dtype=np.complex128)
    for k in range(n):
        a, b, c, d = _expm(h[k, 0], h[k, 1], h[k, 2], dt)
        out[k, 0, 0] = a
        out[k, 0, 1] = b
        out[k, 1, 0] = c
        out[k, 1, 1] = d
    return out


@nb.njit(cache=True)
def cumulative_unitaries(steps_u):
    """``U_0 = I``, ``U_{k+1} = E_k U_k``."""
    n = steps_u.shape[0]
    out = np.empty((n + 1, 2, 2), dtype=np.complex128)
    out[0, 0, 0] = 1.0
    out[0, 0, 1] = 0.0
    out[0, 1, 0] = 0.0
    out[0, 1, 1] = 1.0
    for k in range(n):
        e = steps_u[k]
        u = out[k]
        out[k + 1, 0, 0] = e[0, 0] * u[0, 0] + e[0, 1] * u[1, 0]
        out[k + 1, 0, 1] = e[0, 0] * u[0, 1] + e[0, 1] * u[1, 1]
        out[k + 1, 1, 0] = e[1, 0] * u[0, 0] + e[1, 1] * u[1, 0]
        out[k + 1, 1, 1] = e[1, 0] * u[0, 1] + e[1, 1] * u[1, 1]
    return out


@nb.njit(cache=True)
def propagate_states(steps_u, psi0):
    n = steps_u.shape[0]
    out = np.empty((n + 1, 2), dtype=np.complex128)
    out[0] = psi0
    for k in range(n):
        e = steps_u[k]
        p0 = out[k, 0]
        p1 = out[k, 1]
        out[k + 1, 0] = e[0, 0] * p0 + e[0, 1] * p1
        out[k + 1, 1] = e[1, 0] * p0 + e[1, 1] * p1
    return out


@nb.njit(cache=True)
def noisy_step_table(h, dt, dx, dz):
    """Step unitaries for the four noise sign combinations.

    Index ``2 * (bx < 0) + (bz < 0)``; the noise adds ``(bx dx, 0, bz dz)``
    to the Pauli vector.
    """
    n = h.shape[0]
    out = np.empty((n, 4, 2, 2), dtype=np.complex128)
    for k in range(n):
        for combo in range(4):
            bx = -1.0 if combo >= 2 else 1.0
            bz = -1.0 if combo % 2 == 1 else 1.0
            a, b, c, d = _expm(h[k, 0] + bx * dx, h[k, 1], h[k, 2] + bz * dz, dt)
            out[k, combo, 0, 0] = a
            out[k, combo, 0, 1] = b
            out[k, combo, 1, 0] = c
            out[k, combo, 1, 1] = d
    return out


@nb.njit(cache=True)
def _run_chunk(table, psi0, b0x, offx, flx, b0z, offz, flz, lo, hi, track, bloch_acc,
               rho_acc, e_acc, e2_acc):
    n = table.shape[0]
    for r in range(lo, hi):
        p0 = psi0[0]
        p1 = psi0[1]
        bx = b0x[r]
        bz = b0z[r]
        ix = offx[r]
        ex = offx[r + 1]
        iz = offz[r]
        ez = offz[r + 1]
        if track:
            bloch_acc[0, 0] += 2.0 * (p0.conjugate() * p1).real
            bloch_acc[0, 1] += 2.0 * (p0.conjugate() * p1).imag
            bloch_acc[0, 2] += abs(p0) ** 2 - abs(p1) ** 2
        for k in range(n):
            while ix < ex and flx[ix] <= k:
                bx = -bx
                ix += 1
            while iz < ez and flz[iz] <= k:
                bz = -bz
                iz += 1
            combo = (2 if bx < 0 else 0) + (1 if bz < 0 else 0)
            e = table[k, combo]
            q0 = e[0, 0] * p0 + e[0, 1] * p1
            q1 = e[1, 0] * p0 + e[1, 1] * p1
            p0 = q0
            p1 = q1
            if track:
                cr = p0.conjugate() * p1
                bloch_acc[k + 1, 0] += 2.0 * cr.real
                bloch_acc[k + 1, 1] += 2.0 * cr.imag
                bloch_acc[k + 1, 2] += abs(p0) ** 2 - abs(p1) ** 2
        rho_acc[0, 0] += p0 * p0.conjugate()
        rho_acc[0, 1] += p0 * p1.conjugate()
        rho_acc[1, 0] += p1 * p0.conjugate()
        rho_acc[1, 1] += p1 * p1.conjugate()
        cr = p0.conjugate() * p1
        sx = 2.0 * cr.real
        sy = 2.0 * cr.imag
        sz = abs(p0) ** 2 - abs(p1) ** 2
        e_acc[0] += sx
        e_acc[1] += sy
        e_acc[2] += sz
        e2_acc[0] += sx * sx
        e2_acc[1] += sy * sy
        e2_acc[2] += sz * sz


@nb.njit(cache=True, parallel=True)
def run_ensemble(table, psi0, b0x, offx, flx, b0z, offz, flz, chunk, track):
    """Propagate all realizations; partial sums per fixed-size chunk.

    Chunk boundaries do not depend on the thread count, so the caller's
    ordered reduction over chunks is bit-stable.
    """
    n = table.shape[0]
    nreal = b0x.shape[0]
    nchunks = (nreal + chunk - 1) // chunk
    nb_rows = n + 1 if track else 1
    bloch = np.zeros((nchunks, nb_rows, 3))
    rho = np.zeros((nchunks, 2, 2), dtype=np.complex128)
    e1 = np.zeros((nchunks, 3))
    e2 = np.zeros((nchunks, 3))
    for c in nb.prange(nchunks):
        lo = c * chunk
        hi = min(nreal, lo + chunk)
        _run_chunk(table, psi0, b0x, offx, flx, b0z, offz, flz, lo, hi, track,
                   bloch[c], rho[c], e1[c], e2[c])
    return bloch, rho, e1, e2


@nb.njit(cache=True)
def conjugation_coeffs(u, axis):
    """``y[k, a] = Tr[U_k^dagger sigma_axis U_k sigma_a] / 2`` for ``a = x, y, z``."""
    n = u.shape[0]
    out = np.empty((n, 3))
    for k in range(n):
        a = u[k, 0, 0]
        b = u[k, 0, 1]
        c = u[k, 1, 0]
        d = u[k, 1, 1]
        # M = U^dagger S U with S the chosen Pauli; only M00 and M10 are needed
        if axis == 0:
            m00 = a.conjugate() * c + c.conjugate() * a
            m10 = b.conjugate() * c + d.conjugate() * a
        elif axis == 1:
            m00 = -1j * (a.conjugate() * c - c.conjugate() * a)
            m10 = -1j * (b.conjugate() * c - d.conjugate() * a)
        else:
            m00 = a.conjugate() * a - c.conjugate() * c
            m10 = b.conjugate() * a - d.conjugate() * c
        out[k, 0] = m10.real
        out[k, 1] = m10.imag
        out[k, 2] = m00.real
    return out
