"""Trajectory splitting into subtrajectories with fixed reference pulses.

Starting from an initial Hamiltonian along z, a target Hamiltonian falls into
one of four cases.  Each case yields one to three segments; inside a segment
one "reference" control amplitude is held constant and must keep its sign at
both ends, which is what keeps the synthesized pulses bounded.
"""

import enum
from dataclasses import dataclass

import numpy as np


class UnsupportedInitial(ValueError):
    """The initial Hamiltonian is not of the form ``(0, 0, h_z)`` with ``h_z != 0``."""


class ReferenceAxis(enum.Enum):
    """Reference axis with its ``(sigma_1, sigma_2, sigma_3)`` relabeling.

    The value is the tuple of Cartesian indices (x=0, y=1, z=2) that the
    local labels 1, 2, 3 refer to.
    """

    X = (1, 2, 0)
    Y = (2, 0, 1)
    Z = (0, 1, 2)

    @property
    def labels(self):
        return self.value

    def to_local(self, v):
        """Cartesian ``(x, y, z)`` -> local ``(1, 2, 3)`` components."""
        v = np.asarray(v, dtype=float)
        return v[list(self.value)]

    def to_cartesian(self, local):
        """Local ``(1, 2, 3)`` components (last axis) -> Cartesian ``(x, y, z)``."""
        local = np.asarray(local, dtype=float)
        out = np.empty_like(local)
        for k, idx in enumerate(self.value):
            out[..., idx] = local[..., k]
        return out


@dataclass(frozen=True)
class Segment:
    t_start: float
    t_end: float
    h_start: tuple
    h_end: tuple
    ref_axis: ReferenceAxis
    h3_const: float

    def __post_init__(self):
        if not self.t_end > self.t_start:
            raise ValueError("segment must have positive duration")
        i3 = self.ref_axis.labels[2]
        if self.h_start[i3] != self.h3_const or self.h_end[i3] != self.h3_const:
            raise ValueError("reference component of boundary Hamiltonians must equal h3_const")
        if self.h3_const == 0.0:
            raise ValueError("reference pulse must be nonzero")

    @property
    def duration(self):
        return self.t_end - self.t_start


@dataclass(frozen=True)
class SubtrajectoryPlan:
    segments: tuple
    case_id: int

    @property
    def T(self):
        return self.segments[-1].t_end

    @property
    def h_initial(self):
        return np.array(self.segments[0].h_start)

    @property
    def h_final(self):
        return np.array(self.segments[-1].h_end)

    def to_dict(self):
        return {
            "case": self.case_id,
            "T": self.T,
            "segments": [
                {
                    "t_start": s.t_start,
                    "t_end": s.t_end,
                    "ref_axis": s.ref_axis.name,
                    "h3_const": s.h3_const,
                    "h_start": list(s.h_start),
                    "h_end": list(s.h_end),
                }
                for s in self.segments
            ],
        }


def _zero_tol(h0, hT, rel_tol):
    scale = max(np.max(np.abs(h0)), np.max(np.abs(hT)))
    return rel_tol * scale


def _check_initial(h0, tol):
    if abs(h0[0]) >= tol or abs(h0[1]) >= tol or abs(h0[2]) < tol:
        raise UnsupportedInitial(
            f"initial Hamiltonian must be (0, 0, h_z) with h_z != 0, got {tuple(float(x) for x in h0)}"
        )


def classify_target(h0, hT, rel_tol=1e-12):
    """Case number (1-4) for steering the ground state of ``h0`` to that of ``hT``."""
    h0 = np.asarray(h0, dtype=float)
    hT = np.asarray(hT, dtype=float)
    tol = _zero_tol(h0, hT, rel_tol)
    _check_initial(h0, tol)
    if h0[2] * hT[2] > 0 and abs(hT[2]) >= tol:
        return 1
    if abs(hT[0]) >= tol:
        return 2
    if abs(hT[1]) >= tol:
        return 3
    return 4


def _vec(*c):
    return tuple(float(x) for x in c)


def build_plan(h0, hT, T, rel_tol=1e-12):
    """Split ``[0, T]`` into segments according to the target's case.

    For case 1 with ``h_z(T) != h_z(0)`` the target is rescaled by the
    positive factor ``h_z(0) / h_z(T)``, which keeps its ground state and
    makes the z pulse constant over the whole window.
    """
    h0 = np.asarray(h0, dtype=float)
    hT = np.asarray(hT, dtype=float)
    if not T > 0:
        raise ValueError("T must be positive")
    tol = _zero_tol(h0, hT, rel_tol)
    case = classify_target(h0, hT, rel_tol)
    # snap sub-threshold components to exact zeros
    h0 = np.where(np.abs(h0) < tol, 0.0, h0)
    hT = np.where(np.abs(hT) < tol, 0.0, hT)
    hz0 = h0[2]
    start = _vec(*h0)

    if case == 1:
        end = _vec(*(hT * (hz0 / hT[2]))) if hT[2] != hz0 else _vec(*hT)
        end = (end[0], end[1], hz0)
        segs = [Segment(0.0, T, start, end, ReferenceAxis.Z, hz0)]
    elif case == 2:
        mid = _vec(hT[0], (h0[1] + hT[1]) / 2, hz0)
        segs = [
            Segment(0.0, T / 2, start, mid, ReferenceAxis.Z, hz0),
            Segment(T / 2, T, mid, _vec(*hT), ReferenceAxis.X, float(hT[0])),
        ]
    elif case == 3:
        mid = _vec((h0[0] + hT[0]) / 2, hT[1], hz0)
        segs = [
            Segment(0.0, T / 2, start, mid, ReferenceAxis.Z, hz0),
            Segment(T / 2, T, mid, _vec(*hT), ReferenceAxis.Y, float(hT[1])),
        ]
    else:
        m1 = _vec(hz0, hT[1], hz0)
        m2 = _vec(hz0, hT[1], hT[2])
        segs = [
            Segment(0.0, T / 3, start, m1, ReferenceAxis.Z, hz0),
            Segment(T / 3, 2 * T / 3, m1, m2, ReferenceAxis.X, hz0),
            Segment(2 * T / 3, T, m2, _vec(*hT), ReferenceAxis.Z, float(hT[2])),
        ]
    return SubtrajectoryPlan(tuple(segs), case)


def boundary_hamiltonians(plan):
    """All boundary Hamiltonians of a plan in time order."""
    out = [np.array(plan.segments[0].h_start)]
    out.extend(np.array(s.h_end) for s in plan.segments)
    return out
