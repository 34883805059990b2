"""Command-line front end: subcommand dispatch, config handling, JSON/CSV out.

Exit codes: 0 on success or a passing verdict, 1 on a failing verdict,
2 on usage or configuration errors.  All numeric output is deterministic
for a fixed config (sorted-key JSON, no timestamps), so reruns are
byte-identical.

Experiment configs are JSON key-value documents; precedence is
CLI overrides > config file > built-in defaults, and unknown keys are a
hard error.
"""

from __future__ import annotations

import argparse
import copy
import json
import math
import sys

import numpy as np

from . import __version__, io, verify
from .choquet import (
    choquet_p_norm,
    distribution,
    dyadic_sum_norm_of,
    lebesgue_distribution,
    lorentz_norm_of,
)
from .content import ContentParams, content_oracle, content_value, dyadic_content
from .grid import CellSet, GridError, GridFunction, Sampler, make_grid
from .interp import InterpPair, interpolation_norm, k_profile
from .operators import MaximalParams, RieszParams, maximal, riesz


class ConfigError(ValueError):
    pass


def _emit(doc: dict, out_path=None):
    text = io.dumps(doc)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_csv(series, path):
    lines = ["label,value"] + [f"{label},{value!r}" for label, value in series]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def sampler_from_config(cfg: dict) -> Sampler:
    cfg = dict(cfg)
    kind = cfg.pop("kind")
    if kind == "constant":
        s = Sampler.constant(cfg.pop("value"))
    elif kind == "radial_power":
        s = Sampler.radial_power(
            cfg.pop("exponent"), cfg.pop("center", (0.0, 0.0)), cfg.pop("annulus", None)
        )
    elif kind == "ball_indicator":
        s = Sampler.ball_indicator(cfg.pop("center", (0.0, 0.0)), cfg.pop("radius"))
    elif kind == "linear":
        s = Sampler.linear(cfg.pop("coeffs"), cfg.pop("offset", 0.0))
    elif kind == "bump":
        s = Sampler.bump(cfg.pop("center", (0.0, 0.0)), cfg.pop("radius"), cfg.pop("amplitude", 1.0))
    else:
        raise ConfigError(f"unknown sampler kind {kind!r}")
    if cfg:
        raise ConfigError(f"unknown sampler keys: {sorted(cfg)}")
    return s


def shape_from_config(cfg: dict) -> verify.Shape:
    cfg = dict(cfg)
    kind = cfg.pop("shape")
    from .domains import Shape

    if kind == "ball":
        s = Shape.ball(cfg.pop("center"), cfg.pop("radius"))
    elif kind == "rectangle":
        s = Shape.rectangle(cfg.pop("center"), *cfg.pop("sides"))
    elif kind == "l_shape":
        s = Shape.l_shape(cfg.pop("anchor"), cfg.pop("size"))
    elif kind == "punctured_ball":
        s = Shape.punctured_ball(cfg.pop("center"), cfg.pop("radius"))
    else:
        raise ConfigError(f"unknown shape kind {kind!r}")
    if cfg:
        raise ConfigError(f"unknown shape keys: {sorted(cfg)}")
    return s


EXPERIMENT_DEFAULTS = {
    "poincare": {
        "shape": {"shape": "ball", "center": [0.0, 0.0], "radius": 1.0},
        "sampler": {"kind": "linear", "coeffs": [1.0, 0.0]},
        "delta": 2.0, "p": 1.5, "q": 1.5, "depths": [4, 5, 6],
        "c_ball": 0.25, "root_side": None, "b_scan": True, "seed": 20240501,
    },
    "poincare_weak": {
        "shape": {"shape": "ball", "center": [0.0, 0.0], "radius": 1.0},
        "sampler": {"kind": "linear", "coeffs": [1.0, 0.0]},
        "delta": 2.0, "p": 1.0, "depths": [4, 5, 6],
        "c_ball": 0.25, "root_side": None, "seed": 20240501,
    },
    "poincare_sobolev": {
        "shape": {"shape": "ball", "center": [0.0, 0.0], "radius": 1.0},
        "sampler": {"kind": "linear", "coeffs": [1.0, 0.0]},
        "mu": 0.0, "delta": 2.0, "p": 1.5, "q": 6.0, "depths": [4, 5, 6],
        "c_ball": 0.25, "root_side": None, "seed": 20240501,
    },
    "compact_support": {
        "shape": {"shape": "ball", "center": [0.0, 0.0], "radius": 1.0},
        "sampler": {"kind": "bump", "center": [0.0, 0.0], "radius": 0.7},
        "delta": 2.0, "p": 1.5, "q": 1.5, "mu": 0.0, "depths": [4, 5, 6],
        "root_side": None, "seed": 20240501,
    },
    "riesz_bound": {
        "sampler": {"kind": "ball_indicator", "center": [0.0, 0.0], "radius": 0.5},
        "alpha": 1.0, "mu": 0.0, "delta": 2.0, "p": 1.5, "q": 6.0,
        "depths": [4, 5, 6], "dim": 2, "root_side": 2.0, "seed": 20240501,
    },
    "maximal_bound": {
        "sampler": {"kind": "ball_indicator", "center": [0.0, 0.0], "radius": 0.5},
        "delta": 2.0, "mu": 0.0, "p": 1.5, "s": 1.5, "r": 1.5,
        "depths": [4, 5, 6], "dim": 2, "root_side": 2.0, "seed": 20240501,
    },
    "hedberg": {
        "sampler": {"kind": "ball_indicator", "center": [0.0, 0.0], "radius": 0.5},
        "alpha": 1.0, "mu": 0.0, "delta": 2.0, "p": 1.5, "q": 1.5,
        "depths": [5, 6, 7], "dim": 2, "root_side": 2.0, "seed": 20240501,
    },
    "sharpness_poincare": {
        "delta": 2.0, "mu": 0.0, "p": 1.05, "s": 4.0, "q": 4.0, "eta": -0.8,
        "eps_list": [0.25, 0.125, 0.0625, 0.03125], "depth": 8, "dim": 2,
        "root_side": 2.0, "qt": "inf", "seed": 20240501,
    },
    "sharpness_riesz": {
        "delta": 2.0, "mu": 0.0, "alpha": 1.0, "p": 1.5, "s": 8.0, "q": 8.0,
        "eta": -1.3, "eps_list": [0.5, 0.25, 0.125, 0.0625], "depth": 10,
        "dim": 2, "root_side": 20.48, "qt": "inf", "outer_radius": 10.0,
        "seed": 20240501,
    },
}


def resolve_config(experiment: str, file_cfg: dict, overrides: dict) -> dict:
    if experiment not in EXPERIMENT_DEFAULTS:
        raise ConfigError(
            f"unknown experiment {experiment!r}; choose from {sorted(EXPERIMENT_DEFAULTS)}"
        )
    cfg = copy.deepcopy(EXPERIMENT_DEFAULTS[experiment])
    for source in (file_cfg, overrides):
        for key, value in source.items():
            if key not in cfg:
                raise ConfigError(f"unknown config key {key!r} for experiment {experiment!r}")
            cfg[key] = value
    return cfg


def run_experiment(experiment: str, cfg: dict) -> verify.ExperimentReport:
    c = dict(cfg)
    c.pop("seed", None)
    if experiment == "poincare":
        return verify.poincare_check(
            shape_from_config(c["shape"]), sampler_from_config(c["sampler"]),
            c["delta"], c["p"], c["q"], c["depths"],
            c_ball=c["c_ball"], root_side=c["root_side"], b_scan=c["b_scan"],
        )
    if experiment == "poincare_weak":
        return verify.poincare_weak_check(
            shape_from_config(c["shape"]), sampler_from_config(c["sampler"]),
            c["delta"], c["p"], c["depths"], c_ball=c["c_ball"], root_side=c["root_side"],
        )
    if experiment == "poincare_sobolev":
        return verify.poincare_sobolev_check(
            shape_from_config(c["shape"]), sampler_from_config(c["sampler"]),
            c["mu"], c["delta"], c["p"], c["q"], c["depths"],
            c_ball=c["c_ball"], root_side=c["root_side"],
        )
    if experiment == "compact_support":
        return verify.compact_support_check(
            shape_from_config(c["shape"]), sampler_from_config(c["sampler"]),
            c["delta"], c["p"], c["q"], c["mu"], c["depths"], root_side=c["root_side"],
        )
    if experiment == "riesz_bound":
        return verify.riesz_boundedness_check(
            sampler_from_config(c["sampler"]), c["alpha"], c["mu"], c["delta"],
            c["p"], c["q"], c["depths"], dim=c["dim"], root_side=c["root_side"],
        )
    if experiment == "maximal_bound":
        return verify.maximal_inequality_check(
            sampler_from_config(c["sampler"]), c["delta"], c["mu"], c["p"],
            c["s"], c["r"], c["depths"], dim=c["dim"], root_side=c["root_side"],
        )
    if experiment == "hedberg":
        return verify.hedberg_constant_check(
            sampler_from_config(c["sampler"]), c["alpha"], c["mu"], c["delta"],
            c["p"], c["q"], c["depths"], dim=c["dim"], root_side=c["root_side"],
        )
    if experiment == "sharpness_poincare":
        _, report = verify.sharpness_poincare(
            c["delta"], c["mu"], c["p"], c["s"], c["q"], c["eta"], c["eps_list"],
            depth=c["depth"], dim=c["dim"], root_side=c["root_side"], qt=_parse_q(c["qt"]),
        )
        return report
    if experiment == "sharpness_riesz":
        _, report = verify.sharpness_riesz(
            c["delta"], c["mu"], c["alpha"], c["p"], c["s"], c["q"], c["eta"],
            c["eps_list"], depth=c["depth"], dim=c["dim"], root_side=c["root_side"],
            qt=_parse_q(c["qt"]), outer_radius=c["outer_radius"],
        )
        return report
    raise ConfigError(f"unknown experiment {experiment!r}")


def _selftest(seed: int = 20240501) -> dict:
    rng = np.random.default_rng(seed)
    checks = []

    def record(name, ok):
        checks.append({"name": name, "pass": bool(ok)})

    # oracle equivalence on small grids
    ok = True
    g1 = make_grid(1, 3, 1.0, origin=(0.0,))
    g2 = make_grid(2, 2, 1.0, origin=(0.0, 0.0))
    for grid, n_sets in ((g1, 40), (g2, 20)):
        for _ in range(n_sets):
            cells = CellSet(grid, rng.random(grid.shape) < rng.random())
            for delta in (0.5, 1.0, grid.dim):
                a = content_value(cells, delta)
                b = content_oracle(cells, delta)
                ok &= abs(a - b) <= 1e-12 * max(1.0, abs(a))
    record("oracle_equivalence", ok)

    # delta = dim gives the Lebesgue measure
    ok = True
    for _ in range(50):
        cells = CellSet(g2, rng.random(g2.shape) < 0.5)
        ok &= abs(content_value(cells, 2.0) - cells.measure) <= 1e-12
    record("measure_coincidence", ok)

    # norm identities on random step functions
    ok = True
    for _ in range(25):
        vals = rng.choice([0.0, 0.5, 1.0, 2.5], size=g2.shape)
        f = GridFunction(g2, vals)
        dist = distribution(f, 1.3)
        for p in (0.7, 1.0, 1.5, 2.0):
            lpq = lorentz_norm_of(dist, p, p)
            lp = choquet_p_norm(f, p, 1.3)
            ok &= lpq == lp
        for nu in (0.5, 2.0, 3.0):
            lhs = lorentz_norm_of(distribution(f.power(nu), 1.3), 1.5, 2.0)
            rhs = lorentz_norm_of(dist, nu * 1.5, nu * 2.0) ** nu
            ok &= abs(lhs - rhs) <= 1e-10 * max(1.0, rhs)
    record("norm_identities", ok)

    return {"seed": seed, "checks": checks, "all_pass": all(c["pass"] for c in checks)}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="capnorm", description=__doc__)
    parser.add_argument("--version", action="version", version=f"capnorm {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_content = sub.add_parser("content", help="dyadic content of a cell set")
    p_content.add_argument("--set", required=True, dest="set_path")
    p_content.add_argument("--delta", required=True, type=float)
    p_content.add_argument("--cover-out")
    p_content.add_argument("--out")

    p_norm = sub.add_parser("norm", help="Choquet-Lorentz norms of a grid function")
    p_norm.add_argument("--fn", required=True)
    p_norm.add_argument("--delta", required=True, type=float)
    p_norm.add_argument("--p", required=True, type=float)
    p_norm.add_argument("--q", default=None)
    p_norm.add_argument("--dyadic", action="store_true", help="dyadic-level sum form")
    p_norm.add_argument("--lebesgue", action="store_true", help="Lebesgue-measure Lorentz norm")
    p_norm.add_argument("--out")

    p_max = sub.add_parser("maximal", help="fractional maximal function")
    p_max.add_argument("--fn", required=True)
    p_max.add_argument("--mu", required=True, type=float)
    p_max.add_argument("--out")

    p_riesz = sub.add_parser("riesz", help="Riesz potential")
    p_riesz.add_argument("--fn", required=True)
    p_riesz.add_argument("--alpha", required=True, type=float)
    p_riesz.add_argument("--out")

    p_interp = sub.add_parser("interp", help="K-functional and interpolation norm")
    p_interp.add_argument("--fn", required=True)
    p_interp.add_argument("--p0", required=True, type=float)
    p_interp.add_argument("--p1", required=True, type=float)
    p_interp.add_argument("--eta", required=True, type=float)
    p_interp.add_argument("--q", required=True, type=float)
    p_interp.add_argument("--delta", required=True, type=float)
    p_interp.add_argument("--out")

    p_verify = sub.add_parser("verify", help="run an inequality experiment")
    p_verify.add_argument("experiment")
    p_verify.add_argument("--config", help="JSON config file")
    p_verify.add_argument("--set", action="append", default=[], dest="overrides",
                          metavar="KEY=JSON", help="override one config key")
    p_verify.add_argument("--out")
    p_verify.add_argument("--csv")

    sub.add_parser("selftest", help="oracle-equivalence and identity suites")
    return parser


def _parse_q(text):
    if text is None:
        return None
    if str(text).lower() in ("inf", "infinity"):
        return math.inf
    return float(text)


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "content":
            cells = io.read_cellset(args.set_path)
            sol = dyadic_content(cells, ContentParams(args.delta))
            doc = io.cover_to_dict(sol)
            if args.cover_out:
                _emit(doc, args.cover_out)
                _emit({"delta": sol.delta, "value": sol.value}, args.out)
            else:
                _emit(doc, args.out)
            return 0

        if args.command == "norm":
            f = io.read_gridfunction(args.fn)
            q = _parse_q(args.q)
            q_eff = args.p if q is None else q
            if args.lebesgue:
                dist = lebesgue_distribution(f)
            else:
                dist = distribution(f, args.delta)
            if args.dyadic:
                norm = dyadic_sum_norm_of(dist, args.p, q_eff)
            else:
                norm = lorentz_norm_of(dist, args.p, q_eff)
            _emit(
                {
                    "norm": norm,
                    "p": args.p,
                    "q": "inf" if q_eff == math.inf else q_eff,
                    "delta": args.delta,
                    "dyadic_sum": bool(args.dyadic),
                    "lebesgue": bool(args.lebesgue),
                    "distribution": {
                        "thresholds": dist.thresholds.tolist(),
                        "plateaus": dist.plateaus.tolist(),
                    },
                },
                args.out,
            )
            return 0

        if args.command == "maximal":
            f = io.read_gridfunction(args.fn)
            _emit(io.gridfunction_to_dict(maximal(f, MaximalParams(args.mu))), args.out)
            return 0

        if args.command == "riesz":
            f = io.read_gridfunction(args.fn)
            _emit(io.gridfunction_to_dict(riesz(f, RieszParams(args.alpha))), args.out)
            return 0

        if args.command == "interp":
            f = io.read_gridfunction(args.fn)
            pair = InterpPair(p0=args.p0, p1=args.p1, delta=args.delta,
                              eta=args.eta, q_interp=args.q)
            t_grid, k_vals = k_profile(f, pair)
            interp = interpolation_norm(f, pair)
            direct = lorentz_norm_of(distribution(f, args.delta), pair.p, args.q)
            _emit(
                {
                    "t_grid": t_grid.tolist(),
                    "k_values": k_vals.tolist(),
                    "interp_norm": interp,
                    "direct_norm": direct,
                    "ratio": interp / direct if direct > 0 else 0.0,
                    "target_p": pair.p,
                },
                args.out,
            )
            return 0

        if args.command == "verify":
            file_cfg = {}
            if args.config:
                try:
                    file_cfg = io.load_path(args.config)
                except FileNotFoundError:
                    print(f"config file not found: {args.config}", file=sys.stderr)
                    return 2
            overrides = {}
            for item in args.overrides:
                key, _, raw = item.partition("=")
                if not _:
                    raise ConfigError(f"override must look like key=value, got {item!r}")
                overrides[key] = json.loads(raw)
            cfg = resolve_config(args.experiment, file_cfg, overrides)
            report = run_experiment(args.experiment, cfg)
            doc = report.to_dict()
            doc["config"] = cfg
            _emit(doc, args.out)
            if args.csv:
                _emit_csv(report.series, args.csv)
            return 0 if report.verdict else 1

        if args.command == "selftest":
            doc = _selftest()
            _emit(doc)
            return 0 if doc["all_pass"] else 1

    except (ConfigError, GridError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    parser.error("no command handled")
    return 2


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
