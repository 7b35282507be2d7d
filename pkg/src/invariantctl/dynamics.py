"""Closed-system propagation, fidelity and purity."""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .qubit import KET_0, bloch_vector, density

CSV_FMT = "%.17g"


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Bloch vectors (and optionally pure states) sampled at ``times``."""

    times: np.ndarray
    bloch: np.ndarray
    states: np.ndarray = None

    @property
    def purity(self):
        r2 = np.sum(self.bloch**2, axis=1)
        return (1.0 + r2) / 2.0

    def to_csv(self, path):
        data = np.column_stack([self.times, self.bloch, self.purity])
        np.savetxt(path, data, delimiter=",", header="t,bx,by,bz,purity", comments="",
                   fmt=CSV_FMT)


def step_unitaries(p):
    """Left-endpoint step propagators ``exp(-i H(t_k) dt)``, ``k < steps``."""
    h = np.ascontiguousarray(p.h[:-1])
    return _kernels.step_unitaries(h, p.dt)


def control_unitaries(p):
    """``U_ctrl(t_k)`` for every grid time, shape ``(steps + 1, 2, 2)``."""
    return _kernels.cumulative_unitaries(step_unitaries(p))


def _bloch_of_states(states):
    cr = states[:, 0].conj() * states[:, 1]
    return np.column_stack([2 * cr.real, 2 * cr.imag,
                            np.abs(states[:, 0])**2 - np.abs(states[:, 1])**2])


def propagate_closed(p, psi0=KET_0):
    """Pure-state trajectory under the piecewise-constant control Hamiltonian."""
    psi0 = np.asarray(psi0, dtype=complex)
    if abs(np.linalg.norm(psi0) - 1.0) > 1e-12:
        raise ValueError("initial state must be normalized")
    states = _kernels.propagate_states(step_unitaries(p), psi0)
    return Trajectory(times=p.t.copy(), bloch=_bloch_of_states(states), states=states)


def fidelity(rho, psi_target):
    """``<psi|rho|psi>`` clamped to ``[0, 1]``."""
    psi = np.asarray(psi_target, dtype=complex)
    val = float(np.real(psi.conj() @ np.asarray(rho) @ psi))
    if val < -1e-9 or val > 1 + 1e-9:
        raise ValueError(f"fidelity {val} outside [0, 1]; rho is not a density matrix")
    return min(max(val, 0.0), 1.0)


def purity(rho):
    rho = np.asarray(rho)
    return float(np.real(np.trace(rho @ rho)))


def final_density(traj):
    return density(traj.states[-1])


def final_fidelity(p, psi_target, psi0=KET_0):
    return fidelity(final_density(propagate_closed(p, psi0)), psi_target)


__all__ = ["Trajectory", "step_unitaries", "control_unitaries", "propagate_closed",
           "fidelity", "purity", "final_density", "final_fidelity", "bloch_vector"]
