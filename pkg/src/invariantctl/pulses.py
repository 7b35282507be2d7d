"""Control waveforms from invariant family members."""

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .family import DomainViolation, eval_family

CSV_FMT = "%.17g"


@dataclass(frozen=True, eq=False)
class PulseSet:
    """Waveforms ``hx, hy, hz`` sampled at ``t`` (``steps + 1`` uniform points)."""

    t: np.ndarray
    hx: np.ndarray
    hy: np.ndarray
    hz: np.ndarray
    theta: np.ndarray = field(default_factory=lambda: np.zeros(0))
    case_id: int = 0
    # (left limit, right limit) of the Cartesian pulse vector at each interior joint
    joints: tuple = ()
    min_abs_f3: float = float("nan")
    ref_axes: tuple = ()

    @property
    def steps(self):
        return len(self.t) - 1

    @property
    def T(self):
        return float(self.t[-1])

    @property
    def dt(self):
        return self.T / self.steps

    @property
    def h(self):
        """Stacked ``(steps + 1, 3)`` array."""
        return np.column_stack([self.hx, self.hy, self.hz])

    def to_csv(self, path):
        np.savetxt(path, np.column_stack([self.t, self.hx, self.hy, self.hz]),
                   delimiter=",", header="t,hx,hy,hz", comments="", fmt=CSV_FMT)

    def to_json(self, path):
        data = {
            "steps": self.steps,
            "T": self.T,
            "case": self.case_id,
            "theta": self.theta.tolist(),
            "t": self.t.tolist(),
            "hx": self.hx.tolist(),
            "hy": self.hy.tolist(),
            "hz": self.hz.tolist(),
        }
        with open(path, "w") as fh:
            json.dump(data, fh)

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="") as fh:
            header = next(csv.reader(fh))
        if [h.strip() for h in header] != ["t", "hx", "hy", "hz"]:
            raise ValueError(f"unexpected waveform header {header}")
        arr = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(t=arr[:, 0], hx=arr[:, 1], hy=arr[:, 2], hz=arr[:, 3])

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            d = json.load(fh)
        return cls(t=np.array(d["t"]), hx=np.array(d["hx"]), hy=np.array(d["hy"]),
                   hz=np.array(d["hz"]), theta=np.array(d.get("theta", [])),
                   case_id=int(d.get("case", 0)))


def constant_pulse(h, T, steps):
    """Pulse holding the Pauli vector ``h`` fixed."""
    t = np.linspace(0.0, T, steps + 1)
    h = np.asarray(h, dtype=float)
    return PulseSet(t=t, hx=np.full_like(t, h[0]), hy=np.full_like(t, h[1]),
                    hz=np.full_like(t, h[2]))


def _segment_pulse(fam, v1, v2, s):
    seg = fam.segment
    f1, f2, f3, d1, d2 = eval_family(fam, v1, v2, s)
    rate = 1.0 / seg.duration
    h3 = seg.h3_const
    h1 = (f1 * h3 - d2 * rate) / f3
    h2 = (f2 * h3 + d1 * rate) / f3
    local = np.stack([h1, h2, np.full_like(h1, h3)], axis=-1)
    return seg.ref_axis.to_cartesian(local), float(np.min(np.abs(f3)))


def check_theta(theta_norm, families, epsilon=None):
    theta_norm = np.asarray(theta_norm, dtype=float)
    m = families[0].n_free
    if theta_norm.shape != (2 * m,):
        raise ValueError(f"expected {2 * m} normalized parameters, got shape {theta_norm.shape}")
    eps = families[0].epsilon if epsilon is None else epsilon
    if np.any(np.abs(theta_norm) > 1.0 - eps):
        raise DomainViolation("normalized parameters must satisfy |theta| <= 1 - epsilon")
    return theta_norm


def synthesize(plan, families, theta_norm, steps=5000, check=True):
    """Sample the pulses generated by ``theta_norm`` on ``steps + 1`` uniform times.

    ``theta_norm`` holds ``2m`` values ``v / v_max`` shared by all segments.
    Each sample is evaluated in the segment whose half-open window contains
    it; the final sample belongs to the last segment.
    """
    if check:
        theta_norm = check_theta(theta_norm, families)
    theta_norm = np.asarray(theta_norm, dtype=float)
    T = plan.T
    t = np.linspace(0.0, T, steps + 1)
    h = np.empty((steps + 1, 3))
    ends = np.array([s.t_end for s in plan.segments])
    idx = np.searchsorted(ends, t, side="right")
    idx[-1] = len(plan.segments) - 1
    min_f3 = np.inf
    joints = []
    prev_end = None
    for j, (seg, fam) in enumerate(zip(plan.segments, families)):
        v1, v2 = fam.weights(theta_norm)
        mask = idx == j
        s = (t[mask] - seg.t_start) / seg.duration
        vals, mf3 = _segment_pulse(fam, v1, v2, np.r_[0.0, s, 1.0])
        h[mask] = vals[1:-1]
        min_f3 = min(min_f3, mf3)
        if prev_end is not None:
            joints.append((prev_end, vals[0]))
        prev_end = vals[-1]
    return PulseSet(
        t=t, hx=h[:, 0].copy(), hy=h[:, 1].copy(), hz=h[:, 2].copy(),
        theta=theta_norm.copy(), case_id=plan.case_id, joints=tuple(joints),
        min_abs_f3=min_f3, ref_axes=tuple(s.ref_axis for s in plan.segments),
    )


@dataclass(frozen=True)
class PhysicalityReport:
    max_amplitude: float
    all_finite: bool
    max_joint_jump: float
    max_reference_jump: float
    min_abs_f3: float

    def ok(self, joint_tol):
        return self.all_finite and self.max_joint_jump < joint_tol and self.min_abs_f3 > 0


def verify_physicality(p):
    """Amplitude, continuity and ``f3`` summary of a pulse set.

    Jumps of the two non-reference pulses at a joint are measured on the
    axes that are non-reference on both sides; jumps of reference pulses are
    reported separately since a change of reference axis may legitimately
    switch which pulse is held constant.
    """
    h = p.h
    finite = bool(np.all(np.isfinite(h)))
    jump = 0.0
    ref_jump = 0.0
    for k, (left, right) in enumerate(p.joints):
        refs = {p.ref_axes[k].labels[2], p.ref_axes[k + 1].labels[2]}
        diff = np.abs(np.asarray(left) - np.asarray(right))
        for ax in range(3):
            if ax in refs:
                ref_jump = max(ref_jump, diff[ax])
            else:
                jump = max(jump, diff[ax])
    return PhysicalityReport(
        max_amplitude=float(np.max(np.abs(h))) if finite else float("inf"),
        all_finite=finite,
        max_joint_jump=float(jump),
        max_reference_jump=float(ref_jump),
        min_abs_f3=float(p.min_abs_f3),
    )
