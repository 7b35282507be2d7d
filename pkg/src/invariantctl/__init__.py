"""Singularity-free invariant-based pulse engineering for a single qubit."""

from .planner import ReferenceAxis, Segment, SubtrajectoryPlan, UnsupportedInitial, build_plan, classify_target
from .family import SegmentFamily, build_families, build_family, compute_vmax, eval_family
from .pulses import PulseSet, synthesize, verify_physicality
from .dynamics import Trajectory, fidelity, propagate_closed, purity
from .noise import NoiseModel, generate_dataset, propagate_noisy_ensemble, sample_rtn
from .dyson import dyson_expectations, whitebox_cost
from .search import SearchConfig, optimize_known_noise, optimize_unknown_noise, random_search

__version__ = "0.1.0"
