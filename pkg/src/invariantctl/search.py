"""Random search with a shrinking hyperrectangle over normalized parameters."""

from dataclasses import dataclass, field

import numpy as np

from .dyson import cost_from_expectations, dyson_expectations
from .noise import NoiseModel, propagate_noisy_ensemble, sample_theta, theta_seed
from .pulses import synthesize

CSV_FMT = "%.17g"


@dataclass(frozen=True)
class SearchConfig:
    init_points: int = 1
    samples_per_iter: int = 100
    iterations: int = 100
    shrink: float = 0.05
    seed: int = 0
    epsilon: float = 1e-5

    def __post_init__(self):
        if not 0.0 < self.shrink < 1.0:
            raise ValueError("shrink must lie in (0, 1)")
        if self.samples_per_iter < 1:
            raise ValueError("samples_per_iter must be at least 1")
        if self.init_points < 1:
            raise ValueError("init_points must be at least 1")


@dataclass
class SearchTrace:
    best_cost: list = field(default_factory=list)
    centers: list = field(default_factory=list)
    sides: list = field(default_factory=list)
    evaluations: int = 0

    def record(self, cost, center, side):
        self.best_cost.append(float(cost))
        self.centers.append(np.array(center))
        self.sides.append(np.array(side))

    def to_csv(self, path):
        n = len(self.best_cost)
        data = np.column_stack([np.arange(n), self.best_cost,
                                [np.max(s) if len(s) else 0.0 for s in self.sides]])
        np.savetxt(path, data, delimiter=",", header="iter,best_cost,side_max", comments="",
                   fmt=CSV_FMT)


def rectangle_sides(center):
    """``2 min(1 - c, 1 + c)`` per coordinate."""
    return 2.0 * np.minimum(1.0 - center, 1.0 + center)


def random_search(cost, init, config=SearchConfig()):
    """Minimize ``cost`` over the box ``|theta| <= 1 - epsilon``.

    Parameters
    ----------
    cost : callable
        Maps a normalized parameter vector to a float.
    init : array_like, shape ``(k, d)``
        Initial points; the best becomes the first center.

    Returns
    -------
    theta_opt, best_cost, trace
    """
    rng = np.random.default_rng(np.random.SeedSequence(config.seed, spawn_key=(2,)))
    lim = 1.0 - config.epsilon
    init = np.clip(np.atleast_2d(np.asarray(init, dtype=float)), -lim, lim)
    costs = [cost(x) for x in init]
    trace = SearchTrace(evaluations=len(init))
    k = int(np.argmin(costs))
    center, best = init[k].copy(), float(costs[k])
    scale = 1.0
    trace.record(best, center, rectangle_sides(center))
    for _ in range(config.iterations):
        side = scale * rectangle_sides(center)
        pts = center + (rng.random((config.samples_per_iter, len(center))) - 0.5) * side
        pts = np.clip(pts, -lim, lim)
        vals = np.array([cost(x) for x in pts])
        trace.evaluations += len(pts)
        j = int(np.argmin(vals))
        if vals[j] < best:
            # sides follow the new center; the accumulated shrink is kept
            center, best = pts[j].copy(), float(vals[j])
        else:
            scale *= 1.0 - config.shrink
        trace.record(best, center, scale * rectangle_sides(center))
    return center, best, trace


@dataclass(eq=False)
class OptimizationReport:
    theta: np.ndarray
    pulse: object
    cost: float
    fidelity_whitebox: float
    fidelity_mc: float
    trace: SearchTrace

    def summary(self):
        return {
            "theta": self.theta.tolist(),
            "cost": self.cost,
            "fidelity_whitebox": self.fidelity_whitebox,
            "fidelity_mc": self.fidelity_mc,
            "evaluations": self.trace.evaluations,
            "iterations": len(self.trace.best_cost) - 1,
        }


def whitebox_objective(plan, families, noise, psi_target, steps):
    def cost(theta):
        p = synthesize(plan, families, theta, steps)
        return cost_from_expectations(dyson_expectations(p, noise).expectations, psi_target)
    return cost


def mc_objective(plan, families, noise, psi_target, steps):
    """Monte Carlo infidelity with noise paths pinned by a hash of ``theta``."""
    def cost(theta):
        p = synthesize(plan, families, theta, steps)
        nm = NoiseModel(noise.gamma, noise.g_x, noise.g_z, theta_seed(theta, noise.seed),
                        noise.realizations)
        return 1.0 - propagate_noisy_ensemble(p, nm).fidelity(psi_target)
    return cost


def _finish(plan, families, noise, psi_target, steps, theta, best, trace, mc_check):
    p = synthesize(plan, families, theta, steps)
    wb = 1.0 - cost_from_expectations(dyson_expectations(p, noise).expectations, psi_target)
    mc = float("nan")
    if mc_check:
        mc = propagate_noisy_ensemble(p, noise).fidelity(psi_target)
    return OptimizationReport(theta, p, best, wb, mc, trace)


def optimize_known_noise(plan, families, noise, psi_target, config=SearchConfig(), steps=5000,
                         mc_check=False):
    """Whitebox search started from the cubic (all-zero) member."""
    dim = 2 * families[0].n_free
    init = np.zeros((1, dim))
    if config.init_points > 1:
        rng = np.random.default_rng(np.random.SeedSequence(config.seed, spawn_key=(3,)))
        init = np.vstack([init, sample_theta(rng, config.init_points - 1, dim, config.epsilon)])
    cost = whitebox_objective(plan, families, noise, psi_target, steps)
    theta, best, trace = random_search(cost, init, config)
    return _finish(plan, families, noise, psi_target, steps, theta, best, trace, mc_check)


def optimize_unknown_noise(plan, families, noise, psi_target, config=SearchConfig(init_points=1000),
                           steps=5000, cost=None):
    """Search driven by a black-box evaluator (Monte Carlo by default)."""
    dim = 2 * families[0].n_free
    rng = np.random.default_rng(np.random.SeedSequence(config.seed, spawn_key=(3,)))
    init = sample_theta(rng, config.init_points, dim, config.epsilon)
    if cost is None:
        cost = mc_objective(plan, families, noise, psi_target, steps)
    theta, best, trace = random_search(cost, init, config)
    rep = _finish(plan, families, noise, psi_target, steps, theta, best, trace, False)
    rep.fidelity_mc = 1.0 - best
    return rep
