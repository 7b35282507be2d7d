"""``invariantctl`` command-line front end."""

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .dynamics import fidelity, propagate_closed
from .dyson import cost_from_expectations, dyson_expectations
from .family import build_families
from .noise import (NoiseModel, generate_dataset, propagate_noisy_ensemble, sample_noise_pair,
                    sample_theta)
from .planner import UnsupportedInitial, build_plan
from .presets import DEFAULT_CONVENTION, initial_hamiltonian, target_hamiltonian
from .pulses import PulseSet, synthesize
from .qubit import density, state_from_hamiltonian_vector
from .search import SearchConfig, optimize_known_noise, optimize_unknown_noise

SEED_ENV = "INVARIANTCTL_SEED"
CSV_FMT = "%.17g"


@dataclass
class RunConfig:
    """Resolved run settings; units are part of the field names."""

    omega_mhz: float = 0.4
    T_us: float = 3.2
    steps: int = 5000
    gamma_mhz: float = 0.02
    gx_over_gamma: float = 10.0
    gz_over_gamma: float = 13.0
    degree: int = 18
    epsilon: float = 1e-5
    grid_points: int = 2001
    target: object = "vi"
    initial: object = None
    convention: str = DEFAULT_CONVENTION
    seed: int = 0
    realizations: int = 2000
    dataset_count: int = 500
    optimizer: dict = field(default_factory=dict)

    @property
    def omega(self):
        """Angular frequency in rad/us."""
        return 2.0 * np.pi * self.omega_mhz

    @classmethod
    def from_dict(cls, d):
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    def noise(self, realizations=None):
        return NoiseModel.from_ratios(
            self.gamma_mhz, self.gx_over_gamma, self.gz_over_gamma, seed=self.seed,
            realizations=self.realizations if realizations is None else realizations)

    def search_config(self):
        opts = dict(self.optimizer)
        opts.setdefault("seed", self.seed)
        opts.setdefault("epsilon", self.epsilon)
        return SearchConfig(**opts)

    def hamiltonians(self):
        if self.initial is None:
            h0 = initial_hamiltonian(self.omega, self.convention)
        else:
            h0 = np.asarray(self.initial, dtype=float)
        if isinstance(self.target, str):
            hT = target_hamiltonian(self.target, self.omega, self.convention)
        else:
            hT = np.asarray(self.target, dtype=float)
        return h0, hT


def _parse_target(text):
    parts = text.split(",")
    if len(parts) == 3:
        return [float(x) for x in parts]
    return text


def resolve_config(args):
    data = {}
    if args.config:
        with open(args.config) as fh:
            data = json.load(fh)
    cfg = RunConfig.from_dict(data)
    if args.target is not None:
        cfg = replace(cfg, target=_parse_target(args.target))
    if os.environ.get(SEED_ENV):
        cfg = replace(cfg, seed=int(os.environ[SEED_ENV]))
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    return cfg


class Pipeline:
    """Plan, families and target state for a resolved config."""

    def __init__(self, cfg):
        self.cfg = cfg
        h0, hT = cfg.hamiltonians()
        self.plan = build_plan(h0, hT, cfg.T_us)
        self.families = build_families(self.plan, cfg.degree, 1.0, cfg.epsilon, cfg.grid_points)
        self.psi0 = state_from_hamiltonian_vector(self.plan.h_initial)
        self.psi_target = state_from_hamiltonian_vector(self.plan.h_final)

    @property
    def dim(self):
        return 2 * self.families[0].n_free

    def synth(self, theta):
        return synthesize(self.plan, self.families, theta, self.cfg.steps)


def _out_dir(args):
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)


def _emit(obj):
    json.dump(obj, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


def cmd_plan(cfg, args):
    pipe = Pipeline(cfg)
    out = pipe.plan.to_dict()
    _emit(out)
    if args.out:
        _write_json(_out_dir(args) / "plan.json", out)
    return 0


def cmd_vmax(cfg, args):
    pipe = Pipeline(cfg)
    rows = [{"segment": i + 1, "ref_axis": f.segment.ref_axis.name, "v_max_over_c": f.v_max / f.c}
            for i, f in enumerate(pipe.families)]
    for r in rows:
        print(f"{r['segment']},{r['ref_axis']},{r['v_max_over_c']:.17g}")
    if args.out:
        path = _out_dir(args) / "vmax.csv"
        with open(path, "w") as fh:
            fh.write("segment,ref_axis,v_max_over_c\n")
            for r in rows:
                fh.write(f"{r['segment']},{r['ref_axis']},{r['v_max_over_c']:.17g}\n")
    return 0


def _theta_from_source(pipe, source, seed):
    if source == "zeros":
        return np.zeros(pipe.dim)
    if source == "random":
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(4,)))
        return sample_theta(rng, 1, pipe.dim, pipe.cfg.epsilon)[0]
    theta = np.loadtxt(source, delimiter=",", ndmin=1)
    return theta.ravel()


def cmd_synth(cfg, args):
    pipe = Pipeline(cfg)
    theta = _theta_from_source(pipe, args.theta, cfg.seed)
    p = pipe.synth(theta)
    out = _out_dir(args)
    p.to_csv(out / "waveform.csv")
    np.savetxt(out / "theta.csv", theta[None, :], delimiter=",", fmt=CSV_FMT)
    _emit({"waveform": str(out / "waveform.csv"), "case": pipe.plan.case_id,
           "max_amplitude": float(np.max(np.abs(p.h)))})
    return 0


def simulate_pulse(pipe, p, mode, realizations=None):
    """Trajectory and summary dict for a pulse under the chosen evaluator."""
    cfg = pipe.cfg
    if mode == "closed":
        traj = propagate_closed(p, pipe.psi0)
        rho = density(traj.states[-1])
        exps = traj.bloch[-1]
    elif mode == "mc":
        res = propagate_noisy_ensemble(p, cfg.noise(realizations), pipe.psi0, track=True)
        traj, rho, exps = res.trajectory, res.rho, res.expectations
    elif mode == "dyson":
        traj = propagate_closed(p, pipe.psi0)
        res = dyson_expectations(p, cfg.noise(), pipe.psi0)
        rho, exps = res.rho, res.expectations
    else:
        raise ValueError(f"unknown mode {mode!r}")
    summary = {
        "mode": mode,
        "fidelity": fidelity(rho, pipe.psi_target) if mode != "dyson"
        else 1.0 - cost_from_expectations(exps, pipe.psi_target),
        "expectations": [float(x) for x in exps],
        "final_purity": float(traj.purity[-1]) if mode != "dyson"
        else float(np.real(np.trace(rho @ rho))),
    }
    return traj, summary


def cmd_simulate(cfg, args):
    pipe = Pipeline(cfg)
    p = PulseSet.from_csv(args.pulse) if args.pulse else pipe.synth(np.zeros(pipe.dim))
    traj, summary = simulate_pulse(pipe, p, args.mode)
    out = _out_dir(args)
    traj.to_csv(out / "trajectory.csv")
    summary["config"] = asdict(cfg)
    _write_json(out / "summary.json", summary)
    _emit({k: v for k, v in summary.items() if k != "config"})
    return 0


def cmd_dataset(cfg, args):
    pipe = Pipeline(cfg)
    count = args.count or cfg.dataset_count
    evaluator = args.evaluator
    noise = cfg.noise()
    paths = sample_noise_pair(noise, cfg.T_us, cfg.steps) if evaluator == "mc" else None

    def evaluate(theta):
        p = pipe.synth(theta)
        if evaluator == "mc":
            r = propagate_noisy_ensemble(p, noise, pipe.psi0, paths=paths)
            return r.expectations, r.fidelity(pipe.psi_target)
        e = dyson_expectations(p, noise, pipe.psi0).expectations
        return e, 1.0 - cost_from_expectations(e, pipe.psi_target)

    ds = generate_dataset(evaluate, pipe.dim, count, cfg.seed, cfg.epsilon,
                          manifest={"evaluator": evaluator, "config": asdict(cfg)})
    out = _out_dir(args)
    ds.to_csv(out / "dataset.csv")
    ds.write_manifest(out / "manifest.json")
    _emit({"count": count, "fidelity_mean": float(ds.fidelity.mean()),
           "fidelity_min": float(ds.fidelity.min()), "fidelity_max": float(ds.fidelity.max())})
    return 0


def cmd_optimize(cfg, args):
    pipe = Pipeline(cfg)
    scfg = cfg.search_config()
    noise = cfg.noise()
    if args.evaluator == "dyson":
        rep = optimize_known_noise(pipe.plan, pipe.families, noise, pipe.psi_target, scfg,
                                   cfg.steps)
    else:
        rep = optimize_unknown_noise(pipe.plan, pipe.families, noise, pipe.psi_target, scfg,
                                     cfg.steps)
    out = _out_dir(args)
    rep.pulse.to_csv(out / "waveform.csv")
    rep.trace.to_csv(out / "trace.csv")
    report = rep.summary()
    report["evaluator"] = args.evaluator
    report["config"] = asdict(cfg)
    _write_json(out / "report.json", report)
    _emit({k: v for k, v in report.items() if k not in ("config", "theta")})
    return 0


COMMANDS = {
    "plan": cmd_plan,
    "vmax": cmd_vmax,
    "synth": cmd_synth,
    "simulate": cmd_simulate,
    "dataset": cmd_dataset,
    "optimize": cmd_optimize,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--target", help="preset i..vi or explicit 'hx,hy,hz' in rad/us")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output directory")
    common.add_argument("--threads", type=int, help="cap on compiled worker threads")

    parser = argparse.ArgumentParser(prog="invariantctl",
                                     description="Invariant-based qubit pulse engineering")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("plan", parents=[common], help="print the subtrajectory plan")
    sub.add_parser("vmax", parents=[common], help="per-segment parameter bounds")
    p = sub.add_parser("synth", parents=[common], help="synthesize a waveform")
    p.add_argument("--theta", default="zeros", help="zeros, random, or a CSV file")
    p = sub.add_parser("simulate", parents=[common], help="simulate a waveform")
    p.add_argument("--pulse", help="waveform CSV (default: cubic member)")
    p.add_argument("--mode", choices=("closed", "mc", "dyson"), default="closed")
    p = sub.add_parser("dataset", parents=[common], help="sample and evaluate pulses")
    p.add_argument("--count", type=int)
    p.add_argument("--evaluator", choices=("dyson", "mc"), default="dyson")
    p = sub.add_parser("optimize", parents=[common], help="random-search optimization")
    p.add_argument("--evaluator", choices=("dyson", "mc"), default="dyson")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.threads:
        import numba
        numba.set_num_threads(min(args.threads, numba.config.NUMBA_NUM_THREADS))
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg, args)
    except UnsupportedInitial as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
