"""Command-line front end.

Each subcommand reads a JSON config (``--config``) and/or flags, validates
it, runs one experiment and writes CSV traces plus a ``metadata.json`` into
the output directory. Exit status: 0 when every configured assertion
holds, 1 on numeric failure or failed assertion, 2 on a bad config.
"""

import argparse
import csv
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import functions as fns
from .core import DomainError, NumericError, run_axiom_suite
from .ergodic import GOLDEN, KroneckerSystem, estimate_pushforward_barycenter, multi_start_run
from .means import (
    EmpiricalMeasure,
    check_contraction,
    check_diameter_bound,
    check_variance_inequality,
    check_weighted_inequality,
    diameter,
    inductive_mean,
    inductive_mean_batch,
    karcher_mean,
)
from .mollify import (
    ConvergenceError,
    MollifierConfig,
    check_barycenter_contraction,
    check_mollifier_stability,
    l1_distance,
    max_grid_deviation,
    mollified_function,
)
from .spaces import EuclideanSpace, parse_space

COMMANDS = ("space-check", "mean", "karcher", "ergodic", "holbrook", "mollify")
OUTPUT_ENV = "HADAMARD_MEANS_OUTPUT"
DEFAULT_THRESHOLD = 0.05

POSITIVE_INTS = ("n_max", "samples", "quadrature_n", "samples_per_eval", "atoms",
                 "starts", "sequences", "length", "grid_n")
POSITIVE_FLOATS = ("tol", "threshold", "relative_threshold", "decay_ratio")


class ConfigError(ValueError):
    pass


def parse_alpha(value):
    """``"golden"``, a decimal, or a comma-separated list of either."""
    if isinstance(value, (int, float)):
        return [float(value)]
    if isinstance(value, (list, tuple)):
        return [GOLDEN if v == "golden" else float(v) for v in value]
    return [GOLDEN if v.strip() == "golden" else float(v) for v in str(value).split(",")]


def parse_system_flag(text):
    kind, _, d = text.partition(":")
    try:
        return {"type": kind, "d": int(d)}
    except ValueError:
        raise ConfigError(f"system: expected torus:<d> or cyclic:<d>, got {text!r}") from None


def build_system(spec):
    kind = spec.get("type")
    if kind == "torus":
        alpha = parse_alpha(spec["alpha"])
        if "d" in spec and len(alpha) != spec["d"]:
            raise ConfigError(f"system.alpha: torus:{spec['d']} needs {spec['d']} components")
        return KroneckerSystem.torus(alpha, ergodic=spec.get("ergodic"))
    if kind == "cyclic":
        return KroneckerSystem.cyclic(spec["d"], spec.get("generator", 1))
    raise ConfigError(f"system.type: unknown {kind!r}")


def validate(config):
    """Diagnostics for ``config``; an empty list means it is runnable."""
    diags = []
    cmd = config.get("command")
    if cmd not in COMMANDS:
        return [f"command: expected one of {', '.join(COMMANDS)}, got {cmd!r}"]

    space = None
    if "space" not in config:
        diags.append("space: required")
    else:
        try:
            space = parse_space(config["space"])
        except ValueError as exc:
            diags.append(f"space: {exc}")

    for key in POSITIVE_INTS:
        if key in config:
            v = config[key]
            if not isinstance(v, int) or isinstance(v, bool) or v < 1:
                diags.append(f"{key}: must be a positive integer, got {v!r}")
    for key in POSITIVE_FLOATS:
        if key in config:
            v = config[key]
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not v > 0:
                diags.append(f"{key}: must be positive, got {v!r}")
    seeds = config.get("seeds", [0])
    if not isinstance(seeds, list) or not seeds or not all(isinstance(s, int) for s in seeds):
        diags.append(f"seeds: must be a nonempty list of integers, got {seeds!r}")

    needs = {
        "space-check": ["samples"],
        "ergodic": ["system", "function", "n_max"],
        "holbrook": ["atoms", "n_max"],
        "mollify": ["system", "function", "eta_schedule"],
    }.get(cmd, [])
    for key in needs:
        if key not in config:
            diags.append(f"{key}: required for {cmd}")
    if cmd == "karcher" and "points" not in config and "atoms" not in config:
        diags.append("atoms: karcher needs 'atoms' (random) or 'points'")
    if cmd == "mean" and "points" not in config and not (
            "sequences" in config and "length" in config):
        diags.append("points: mean needs 'points' or both 'sequences' and 'length'")
    if cmd == "space-check" and config.get("suite", "axioms") not in ("axioms", "lemmas"):
        diags.append(f"suite: expected 'axioms' or 'lemmas', got {config.get('suite')!r}")

    if "system" in config:
        sysc = config["system"]
        if not isinstance(sysc, dict):
            diags.append("system: must be an object")
        elif sysc.get("type") not in ("torus", "cyclic"):
            diags.append(f"system.type: expected 'torus' or 'cyclic', got {sysc.get('type')!r}")
        elif sysc["type"] == "torus":
            if "alpha" not in sysc:
                diags.append("alpha: required for a torus system")
            else:
                try:
                    alpha = parse_alpha(sysc["alpha"])
                    if "d" in sysc and len(alpha) != sysc["d"]:
                        diags.append(f"alpha: torus:{sysc['d']} needs {sysc['d']} components")
                except (TypeError, ValueError):
                    diags.append(f"alpha: cannot parse {sysc['alpha']!r}")
        elif not isinstance(sysc.get("d"), int) or sysc["d"] < 1:
            diags.append("system.d: cyclic system needs a positive integer order")

    if "function" in config:
        f = config["function"]
        name = f.get("name") if isinstance(f, dict) else None
        if name not in fns.NAMES:
            diags.append(f"function.name: expected one of {', '.join(fns.NAMES)}, got {name!r}")
        elif space is not None:
            try:
                fns.check_compatible(name, space)
            except ValueError as exc:
                diags.append(f"function: {exc}")

    if "eta_schedule" in config:
        etas = config["eta_schedule"]
        if not isinstance(etas, list) or not etas:
            diags.append("eta_schedule: must be a nonempty list")
        else:
            for eta in etas:
                if not isinstance(eta, (int, float)) or not eta > 0:
                    diags.append(f"eta_schedule: eta must be positive, got {eta!r}")
    stab = config.get("stability")
    if stab is not None:
        for key in ("eps", "eta", "width"):
            if not isinstance(stab.get(key), (int, float)) or not stab[key] > 0:
                diags.append(f"stability.{key}: must be positive")
    if cmd in ("holbrook",) and space is not None and config.get("atoms", 2) < 2:
        diags.append("atoms: holbrook needs at least 2 atoms")
    return diags


def _output_dir(config):
    base = config.get("output_dir") or os.environ.get(OUTPUT_ENV) or "runs"
    path = Path(base)
    if "name" in config:
        path = path / config["name"]
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v
                        for v in row])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


class _Run:
    """Collects files, assertions and metadata for one command."""

    def __init__(self, config):
        self.config = config
        self.out = _output_dir(config)
        self.files = []
        self.checks = []
        self.meta = {}

    def csv(self, name, header, rows):
        path = self.out / name
        _write_csv(path, header, rows)
        self.files.append(str(path))

    def json(self, name, obj):
        path = self.out / name
        path.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")
        self.files.append(str(path))

    def check(self, name, ok, detail):
        self.checks.append({"assertion": name, "passed": bool(ok), "detail": detail})

    @property
    def passed(self):
        return all(c["passed"] for c in self.checks)


def _seeds(config):
    return config.get("seeds", [0])


def _cmd_space_check(run, space):
    cfg = run.config
    suite = cfg.get("suite", "axioms")
    atol = cfg.get("atol", 1e-8 if suite == "axioms" else 1e-6)
    rtol = cfg.get("rtol", 1e-8)
    rows = []
    total = 0
    for seed in _seeds(cfg):
        rng = np.random.default_rng(seed)
        if suite == "axioms":
            results = run_axiom_suite(space, rng, cfg["samples"], atol, rtol,
                                      cfg.get("scale", 1.0))
        else:
            results = lemma_suite(space, rng, cfg["samples"], atol, rtol)
        for name, slacks in results.items():
            bad = sum(not s.holds for s in slacks)
            total += bad
            rows.append((seed, name, len(slacks), bad, min(s.slack for s in slacks)))
    run.csv("checks.csv", ("seed", "checker", "samples", "violations", "min_slack"), rows)
    expect = cfg.get("expect_violations", False)
    run.check("expect_violations" if expect else "no_violations",
              (total > 0) == expect, {"violations": total})


def lemma_suite(space, rng, samples, atol=1e-6, rtol=1e-8, seq_len=12, atoms=5):
    """Random instances of the inductive-mean and barycenter inequalities.

    Returns a dict mapping checker name to a list of slacks.
    """
    out = {k: [] for k in ("contraction", "weighted_inequality", "diameter_bound",
                           "variance_inequality", "barycenter_contraction")}
    for _ in range(samples):
        a = [space.random_point(rng) for _ in range(seq_len)]
        b = [space.random_point(rng) for _ in range(seq_len)]
        z = space.random_point(rng)
        k = int(rng.integers(1, seq_len))
        m = int(rng.integers(1, seq_len - k + 1))
        out["contraction"].append(check_contraction(a, b, space, atol, rtol))
        out["weighted_inequality"].append(
            check_weighted_inequality(a, z, k, m, space, atol, rtol))
        out["diameter_bound"].append(check_diameter_bound(a, k, m, space, atol, rtol))
        pts = np.stack(a[:atoms])
        w = rng.uniform(0.1, 1.0, size=atoms)
        mu = EmpiricalMeasure(pts, w)
        bary = karcher_mean(mu, space, tol=1e-12, max_iter=1000).point
        out["variance_inequality"].append(
            check_variance_inequality(mu, space, z, bary, atol, rtol))
        nu = EmpiricalMeasure(np.stack(b[:atoms]), w)
        out["barycenter_contraction"].append(
            check_barycenter_contraction(mu, nu, space, atol, rtol, tol=1e-12))
    return out


def _cmd_mean(run, space):
    cfg = run.config
    if "points" in cfg:
        pts = [space.from_json(p) for p in cfg["points"]]
        s = inductive_mean(pts, space)
        run.json("mean.json", {"inductive_mean": s})
        return
    rows = []
    tol = cfg.get("tolerance", 1e-10)
    gap = cfg.get("min_order_gap")
    for seed in _seeds(cfg):
        rng = np.random.default_rng(seed)
        seqs = np.stack([[space.random_point(rng) for _ in range(cfg["length"])]
                         for _ in range(cfg["sequences"])])
        means = inductive_mean_batch(seqs, space)
        if gap is not None:
            devs = space.distance(means, inductive_mean_batch(seqs[:, ::-1], space))
        elif isinstance(space, EuclideanSpace):
            devs = np.max(np.abs(means - seqs.mean(axis=1)), axis=-1)
        else:
            devs = [space.distance(m, karcher_mean(q, space).point)
                    for m, q in zip(means, seqs)]
        rows.extend((seed, i, float(d)) for i, d in enumerate(np.atleast_1d(devs)))
    run.csv("mean.csv", ("seed", "sequence", "deviation"), rows)
    devs = [r[2] for r in rows]
    if gap is not None:
        run.check("order_dependence", min(devs) > gap, {"min_gap": min(devs), "required": gap})
    elif isinstance(space, EuclideanSpace):
        run.check("arithmetic_mean", max(devs) <= tol, {"max_dev": max(devs), "tolerance": tol})


def _cmd_karcher(run, space):
    cfg = run.config
    if "points" in cfg:
        pts = np.stack([space.from_json(p) for p in cfg["points"]])
        mu = EmpiricalMeasure(pts, cfg.get("weights"))
    else:
        rng = np.random.default_rng(_seeds(cfg)[0])
        mu = EmpiricalMeasure(fns.random_atoms(space, cfg["atoms"], rng,
                                               cfg.get("max_cond", 100.0)))
    res = karcher_mean(mu, space, tol=cfg.get("tol"), max_iter=cfg.get("max_iter", 500))
    run.json("karcher.json", res.to_dict())
    run.check("converged", res.converged, {"iterations": res.iterations,
                                           "final_step": res.final_step})


def _starts(cfg, system):
    if "starts" in cfg:
        rng = np.random.default_rng(_seeds(cfg)[0])
        return system.haar_sample(rng, cfg["starts"])
    start = cfg.get("start", 0)
    return np.asarray(system.element(start))[None]


def _reference(cfg, system, A, space):
    ref = cfg.get("reference", "auto")
    if ref == "auto":
        res = estimate_pushforward_barycenter(system, A, cfg.get("quadrature_n", 10_000),
                                              space)
        return res.point, {"converged": res.converged, "iterations": res.iterations}
    return space.from_json(ref), {"explicit": True}


def _write_traces(run, traces, label):
    for key, tr in zip(label, traces):
        run.csv(f"trace-{key}.csv", ("n", "delta_to_reference", "diameter_bound"), tr.rows())


def _cmd_ergodic(run, space):
    cfg = run.config
    system = build_system(cfg["system"])
    fcfg = cfg["function"]
    A = fns.build(fcfg["name"], space, fcfg.get("params"))
    ref, ref_info = _reference(cfg, system, A, space)
    starts = _starts(cfg, system)
    traces = multi_start_run(system, A, starts, cfg["n_max"], space, reference=ref,
                             checkpoints=cfg.get("checkpoints", [100]))
    _write_traces(run, traces, range(len(traces)))
    finals = [tr.final_delta for tr in traces]
    run.meta.update(ergodic=system.ergodic, reference=ref, reference_solver=ref_info,
                    starts=starts, final_deltas=finals,
                    warnings=traces[0].metadata["warnings"])
    if "threshold" in cfg or "min_final_delta" not in cfg:
        cfg.setdefault("threshold", DEFAULT_THRESHOLD)
        need = cfg.get("min_pass", len(finals))
        ok = sum(f <= cfg["threshold"] for f in finals)
        run.check("final_delta_below_threshold", ok >= need,
                  {"passing_starts": ok, "required": need, "threshold": cfg["threshold"]})
    if "min_final_delta" in cfg:
        run.check("final_delta_above_floor", min(finals) >= cfg["min_final_delta"],
                  {"min_final": min(finals), "floor": cfg["min_final_delta"]})
    if cfg["n_max"] > 100:
        trend = [tr.final_delta < tr.delta_at(100) or tr.final_delta == 0.0
                 for tr in traces]
        run.meta["below_value_at_100"] = trend
        if cfg.get("check_trend", False):
            run.check("decreasing_trend", all(trend), {"per_start": trend})


def _cmd_holbrook(run, space):
    cfg = run.config
    d = cfg["atoms"]
    system = KroneckerSystem.cyclic(d, cfg.get("generator", 1))
    rel = cfg.get("relative_threshold", 0.05)
    ratio = cfg.get("decay_ratio", 0.25)
    per_seed = []
    for seed in _seeds(cfg):
        rng = np.random.default_rng(seed)
        atoms = fns.random_atoms(space, d, rng, cfg.get("max_cond", 100.0))
        bary = karcher_mean(atoms, space, tol=cfg.get("tol"))
        tr = multi_start_run(system, fns.cyclic_atoms(atoms), [0], cfg["n_max"], space,
                             reference=bary.point, checkpoints=[100])[0]
        diam = diameter(atoms, space)
        run.csv(f"trace-seed{seed}.csv", ("n", "delta_to_reference", "diameter_bound"),
                tr.rows())
        at100 = tr.delta_at(100) if cfg["n_max"] >= 100 else float("nan")
        ok_rel = tr.final_delta <= rel * diam
        ok_ratio = cfg["n_max"] < 100 or tr.final_delta <= ratio * at100
        per_seed.append({"seed": seed, "final_delta": tr.final_delta, "delta_at_100": at100,
                         "diameter": diam, "karcher_converged": bary.converged,
                         "visits": tr.metadata["visits"]})
        run.check(f"seed{seed}_relative", ok_rel and bary.converged,
                  {"final": tr.final_delta, "bound": rel * diam})
        run.check(f"seed{seed}_decay", ok_ratio, {"final": tr.final_delta, "at_100": at100})
    run.meta["per_seed"] = per_seed


def _cmd_mollify(run, space):
    cfg = run.config
    system = build_system(cfg["system"])
    fcfg = cfg["function"]
    A = fns.build(fcfg["name"], space, fcfg.get("params"))
    qn = cfg.get("quadrature_n", 10_000)
    spe = cfg.get("samples_per_eval", 64)
    rows = []
    for eta in cfg["eta_schedule"]:
        mc = MollifierConfig(eta, spe, _seeds(cfg)[0], tol=cfg.get("tol"))
        Ae = mollified_function(A, mc, system, space)
        l1 = l1_distance(A, Ae, qn, system, space)
        dev = max_grid_deviation(A, Ae, cfg.get("grid_n", 1000), system, space)
        rows.append((eta, l1, dev))
    run.csv("mollify.csv", ("eta", "l1_estimate", "max_grid_deviation"), rows)
    l1s = [r[1] for r in rows]
    if cfg.get("strictly_decreasing", False):
        run.check("l1_strictly_decreasing", all(x > y for x, y in zip(l1s, l1s[1:])),
                  {"l1": l1s})
    if "final_max" in cfg:
        run.check("final_l1_below", l1s[-1] <= cfg["final_max"],
                  {"final": l1s[-1], "bound": cfg["final_max"]})
    stab = cfg.get("stability")
    if stab is not None:
        B = fns.perturb(A, stab.get("at", 0.7), stab["width"], stab.get("shift", 0.5))
        mc = MollifierConfig(stab["eta"], stab.get("samples_per_eval", 200))
        res = check_mollifier_stability(A, B, mc, system, space, stab["eps"], qn,
                                        stab.get("grid_n", 200))
        run.csv("stability.csv", ("eta", "eps", "max_deviation"),
                [(stab["eta"], stab["eps"], res.lhs)])
        run.check("stability", res.holds, res.to_dict())


_HANDLERS = {
    "space-check": _cmd_space_check,
    "mean": _cmd_mean,
    "karcher": _cmd_karcher,
    "ergodic": _cmd_ergodic,
    "holbrook": _cmd_holbrook,
    "mollify": _cmd_mollify,
}


def run(config, stderr=None):
    """Run a validated config. Returns the process exit status."""
    stderr = stderr or sys.stderr
    config = json.loads(json.dumps(config))
    diags = validate(config)
    if diags:
        for d in diags:
            print(f"config error: {d}", file=stderr)
        return 2
    space = parse_space(config["space"])
    t0 = time.perf_counter()
    r = _Run(config)
    try:
        _HANDLERS[config["command"]](r, space)
    except (DomainError, NumericError, ConvergenceError, ArithmeticError) as exc:
        print(f"{config['command']} failed: {type(exc).__name__}: {exc}", file=stderr)
        print(f"inputs: {json.dumps(_jsonable(config), sort_keys=True)}", file=stderr)
        r.check("numeric", False, str(exc))
    except ConfigError as exc:
        print(f"config error: {exc}", file=stderr)
        return 2
    r.json("metadata.json", {
        "config": config,
        "version": __version__,
        "wall_time": time.perf_counter() - t0,
        "assertions": r.checks,
        "passed": r.passed,
        **r.meta,
    })
    for c in r.checks:
        print(f"{'PASS' if c['passed'] else 'FAIL'} {c['assertion']}: "
              f"{json.dumps(_jsonable(c['detail']), sort_keys=True)}", file=stderr)
    return 0 if r.passed else 1


def _parser():
    p = argparse.ArgumentParser(prog="hadamard-means", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", type=Path, help="JSON config; flags override it")
        s.add_argument("--space")
        s.add_argument("--system", help="torus:<d> or cyclic:<d>")
        s.add_argument("--alpha", help="'golden', a decimal, or a comma list")
        s.add_argument("--generator", type=int)
        s.add_argument("--function", help="named orbit function")
        s.add_argument("--n-max", type=int)
        s.add_argument("--samples", type=int)
        s.add_argument("--atoms", type=int)
        s.add_argument("--starts", type=int)
        s.add_argument("--sequences", type=int)
        s.add_argument("--length", type=int)
        s.add_argument("--quadrature-n", type=int)
        s.add_argument("--samples-per-eval", type=int)
        s.add_argument("--eta-schedule", help="comma-separated etas")
        s.add_argument("--tol", type=float)
        s.add_argument("--threshold", type=float)
        s.add_argument("--seed", type=int, action="append", dest="seeds")
        s.add_argument("--suite", choices=("axioms", "lemmas"))
        s.add_argument("--output-dir", help=f"default: ${OUTPUT_ENV} or ./runs")
        s.add_argument("--name", help="subdirectory of the output directory")
    return p


def config_from_args(args):
    """Merge ``--config`` contents with explicitly given flags."""
    cfg = {}
    if args.config is not None:
        try:
            cfg = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"config: cannot read {args.config}: {exc}") from None
    cfg["command"] = args.command
    simple = ("space", "n_max", "samples", "atoms", "starts", "sequences", "length",
              "quadrature_n", "samples_per_eval", "tol", "threshold", "seeds", "suite",
              "output_dir", "name")
    for key in simple:
        v = getattr(args, key)
        if v is not None:
            cfg[key] = v
    if args.system is not None:
        cfg["system"] = {**cfg.get("system", {}), **parse_system_flag(args.system)}
    if args.alpha is not None:
        cfg.setdefault("system", {"type": "torus", "d": 1})["alpha"] = args.alpha
    if args.generator is not None:
        cfg.setdefault("system", {"type": "cyclic"})["generator"] = args.generator
    if args.function is not None:
        cfg["function"] = {**cfg.get("function", {}), "name": args.function}
    if args.eta_schedule is not None:
        try:
            cfg["eta_schedule"] = [float(x) for x in args.eta_schedule.split(",")]
        except ValueError:
            raise ConfigError(f"eta_schedule: cannot parse {args.eta_schedule!r}") from None
    return cfg


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
