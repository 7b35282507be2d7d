"""Random telegraph noise and Monte Carlo simulation of the noisy qubit.

The noisy Hamiltonian is ``H_ctrl + g_x b_x(t) sigma_x + g_z b_z(t) sigma_z``
with independent telegraph processes ``b_x, b_z`` in ``{-1, +1}``.  Noise
paths are drawn per realization from ``SeedSequence(seed, spawn_key=(r,))``
so results do not depend on thread count or on how realizations are batched.
"""

import hashlib
import json
from dataclasses import asdict, dataclass

import numpy as np

from . import _kernels
from .dynamics import Trajectory, fidelity
from .qubit import KET_0, bloch_vector

CHUNK = 256
CSV_FMT = "%.17g"


@dataclass(frozen=True)
class NoiseModel:
    """Switching rate ``gamma`` (1/us) and couplings ``g_x``, ``g_z`` (rad/us)."""

    gamma: float = 0.02
    g_x: float = 0.2
    g_z: float = 0.26
    seed: int = 0
    realizations: int = 2000

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if self.realizations < 1:
            raise ValueError("realizations must be at least 1")

    @classmethod
    def from_ratios(cls, gamma=0.02, gx_over_gamma=10.0, gz_over_gamma=13.0, **kw):
        return cls(gamma=gamma, g_x=gx_over_gamma * gamma, g_z=gz_over_gamma * gamma, **kw)

    def scaled(self, factor):
        return NoiseModel(self.gamma, self.g_x * factor, self.g_z * factor, self.seed,
                          self.realizations)


def _flip_steps(rng, gamma, T, dt):
    """Grid indices from which each switch takes effect (``ceil(tau / dt)``)."""
    times = []
    t = rng.exponential(1.0 / gamma)
    while t < T:
        times.append(t)
        t += rng.exponential(1.0 / gamma)
    return np.ceil(np.asarray(times) / dt).astype(np.int64)


@dataclass(frozen=True, eq=False)
class RtnPaths:
    """Ensemble of telegraph paths stored as initial values plus switch indices.

    Realization ``r`` starts at ``beta0[r]`` and switches sign at each grid
    index in ``flips[offsets[r]:offsets[r + 1]]``.  Repeated indices cancel.
    """

    beta0: np.ndarray
    offsets: np.ndarray
    flips: np.ndarray
    steps: int

    def values_at(self, indices):
        """``(realizations, len(indices))`` array of ``beta(t_k)`` at grid indices ``k``."""
        n = len(self.beta0)
        owner = np.repeat(np.arange(n), np.diff(self.offsets))
        out = np.empty((n, len(indices)))
        for j, k in enumerate(indices):
            count = np.bincount(owner[self.flips <= k], minlength=n)
            out[:, j] = self.beta0 * (1 - 2 * (count % 2))
        return out

    def dense(self):
        """``(realizations, steps)`` array of left-endpoint values ``beta(t_k)``."""
        return self.values_at(range(self.steps))

    def switch_counts(self):
        return np.diff(self.offsets)


def sample_rtn(gamma, T, steps, rngs):
    """Sample one telegraph path per generator in ``rngs``."""
    dt = T / steps
    beta0 = np.empty(len(rngs), dtype=np.float64)
    parts = []
    offsets = np.zeros(len(rngs) + 1, dtype=np.int64)
    for r, rng in enumerate(rngs):
        beta0[r] = 1.0 if rng.random() < 0.5 else -1.0
        f = _flip_steps(rng, gamma, T, dt)
        parts.append(f)
        offsets[r + 1] = offsets[r] + len(f)
    flips = np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)
    return RtnPaths(beta0, offsets, flips.astype(np.int64), steps)


def realization_rngs(seed, count, stream=0):
    """Independent generators for realizations ``0..count-1`` of a stream."""
    return [np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream, r)))
            for r in range(count)]


def sample_noise_pair(noise, T, steps):
    """``(x paths, z paths)`` for all realizations of ``noise``."""
    rngs = realization_rngs(noise.seed, noise.realizations)
    px = sample_rtn(noise.gamma, T, steps, rngs)
    pz = sample_rtn(noise.gamma, T, steps, rngs)
    return px, pz


@dataclass(frozen=True, eq=False)
class EnsembleResult:
    rho: np.ndarray
    expectations: np.ndarray
    std_errors: np.ndarray
    trajectory: Trajectory = None

    def fidelity(self, psi_target):
        return fidelity(self.rho, psi_target)


def propagate_noisy_ensemble(p, noise, psi0=KET_0, track=False, paths=None):
    """Ensemble-averaged final state of the noisy qubit.

    Parameters
    ----------
    track : bool
        Also return the averaged Bloch trajectory (for purity curves).
    paths : tuple, optional
        Pre-sampled ``(x paths, z paths)`` to reuse across pulses.
    """
    if paths is None:
        paths = sample_noise_pair(noise, p.T, p.steps)
    px, pz = paths
    if px.steps != p.steps:
        raise ValueError("noise paths were sampled on a different grid")
    h = np.ascontiguousarray(p.h[:-1])
    table = _kernels.noisy_step_table(h, p.dt, 2.0 * noise.g_x, 2.0 * noise.g_z)
    bloch, rho, e1, e2 = _kernels.run_ensemble(
        table, np.asarray(psi0, dtype=complex), px.beta0, px.offsets, px.flips,
        pz.beta0, pz.offsets, pz.flips, CHUNK, track)
    n = len(px.beta0)
    rho = rho.sum(axis=0) / n
    rho = (rho + rho.conj().T) / 2
    mean = e1.sum(axis=0) / n
    var = np.maximum(e2.sum(axis=0) / n - mean**2, 0.0)
    se = np.sqrt(var / max(n - 1, 1))
    traj = None
    if track:
        traj = Trajectory(times=p.t.copy(), bloch=bloch.sum(axis=0) / n)
    return EnsembleResult(rho=rho, expectations=bloch_vector(rho), std_errors=se,
                          trajectory=traj)


def theta_seed(theta, base_seed):
    """Deterministic 63-bit seed from a parameter vector and a base seed."""
    digest = hashlib.sha256(np.ascontiguousarray(theta, dtype=np.float64).tobytes()
                            + int(base_seed).to_bytes(8, "little", signed=True)).digest()
    return int.from_bytes(digest[:8], "little") >> 1


def sample_theta(rng, count, dim, epsilon=1e-5, alpha=0.1):
    """Normalized parameters ``(2x - 1)(1 - epsilon)`` with ``x ~ Beta(alpha, alpha)``."""
    x = rng.beta(alpha, alpha, size=(count, dim))
    return (2.0 * x - 1.0) * (1.0 - epsilon)


@dataclass(frozen=True, eq=False)
class Dataset:
    theta: np.ndarray
    expectations: np.ndarray
    fidelity: np.ndarray
    manifest: dict

    def to_csv(self, path):
        d = self.theta.shape[1]
        header = ",".join([f"theta_{j}" for j in range(d)] + ["Ex", "Ey", "Ez", "fidelity"])
        data = np.column_stack([self.theta, self.expectations, self.fidelity])
        np.savetxt(path, data, delimiter=",", header=header, comments="", fmt=CSV_FMT)

    def write_manifest(self, path):
        with open(path, "w") as fh:
            json.dump(self.manifest, fh, indent=2, sort_keys=True)


def generate_dataset(evaluate, dim, count, seed, epsilon=1e-5, alpha=0.1, first_zero=False,
                     manifest=None):
    """Sample ``count`` normalized parameter vectors and evaluate each.

    ``evaluate(theta) -> (expectations, fidelity)``.  With ``first_zero`` the
    first entry is the cubic (all-zero) member.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(1,)))
    thetas = sample_theta(rng, count, dim, epsilon, alpha)
    if first_zero:
        thetas[0] = 0.0
    exps = np.empty((count, 3))
    fids = np.empty(count)
    for i, th in enumerate(thetas):
        exps[i], fids[i] = evaluate(th)
    info = {"seed": seed, "count": count, "dim": dim, "epsilon": epsilon,
            "beta_shape": alpha}
    info.update(manifest or {})
    return Dataset(thetas, exps, fids, info)


def noise_manifest(noise):
    return asdict(noise)
