"""Command-line front end: solve systems, report discrepancy statistics
and bound verdicts, emit plot-ready histograms and trend tables.

Every JSON artifact embeds a run manifest (command, inputs, parameters,
version, seed, timestamp); --no-timestamp drops the one volatile field so
identical invocations produce identical bytes.  Exit codes: 0 success,
2 degenerate system, 64 unreadable input, 65 unsupported dimension.
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .cycles import (
    angle_discrepancy,
    argument_histogram,
    axis_radius_discrepancy,
    modulus_histogram,
    pushforward_discrepancy_sup,
    radius_discrepancy,
)
from .et_bounds import (
    EtSizeBreakdown,
    et_size,
    make_report,
    multivariate_discrepancy_bounds,
    tomography_bound,
    univariate_discrepancy_bounds,
    univariate_et_size,
)
from .experiments import (
    ExperimentConfig,
    HomogeneousPolynomial,
    discrepancy_trend,
    fitted_rate_constant,
    trend_csv,
    tube_measure_estimate,
)
from .lattice import UnsupportedDimensionError, convex_hull
from .laurent import LaurentError, ParseError, SystemSpec, parse_polynomial, system_from_json
from .resultants import DegenerateSystemError
from .solver import SolverError, univariate_roots, zero_cycle
from .window import (
    WindowSpec,
    fourier_bound,
    fourier_coefficient,
    g_reference_integrals,
    half_ramp_mass,
    window_integrals,
)

EXIT_OK = 0
EXIT_DEGENERATE = 2
EXIT_PARSE = 64
EXIT_DIMENSION = 65


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


def _manifest(args, command: str, extra: dict | None = None) -> dict:
    out = {
        "command": command,
        "tool": "torus-equidist",
        "version": __version__,
        "parameters": extra or {},
    }
    if getattr(args, "system", None):
        out["system_file"] = args.system
    if getattr(args, "inline", None):
        out["inline"] = args.inline
    if getattr(args, "seed", None) is not None:
        out["seed"] = args.seed
    if not getattr(args, "no_timestamp", False):
        out["timestamp"] = datetime.now(timezone.utc).isoformat()
    return out


def _emit(args, text: str):
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_system(args) -> SystemSpec:
    if args.system:
        with open(args.system) as fh:
            return system_from_json(fh.read())
    if args.inline:
        chunks = [c.strip() for c in args.inline.split(";") if c.strip()]
        polys = [parse_polynomial(c) for c in chunks]
        n = max(p.n for p in polys)
        if len(polys) == 1 and n == 1:
            return SystemSpec(polys)
        lifted = [parse_polynomial(c, n=n) for c in chunks]
        return SystemSpec(lifted)
    raise ParseError("one of --system or --inline is required", 0)


def _cycle_payload(cyc) -> dict:
    return json.loads(cyc.to_json())


def cmd_solve(args) -> int:
    system = _load_system(args)
    if system.n > 2:
        raise UnsupportedDimensionError("solving is implemented for n <= 2")
    cyc = zero_cycle(system) if system.n == 2 else univariate_roots(system.polynomials[0])
    payload = {
        "manifest": _manifest(args, "solve"),
        "cycle": _cycle_payload(cyc),
        "bernstein": system.bernstein_number,
        "certified": cyc.degree == system.bernstein_number,
    }
    if args.format == "csv":
        _emit(args, cyc.to_csv())
    else:
        _emit(args, json.dumps(payload, sort_keys=True) + "\n")
    return EXIT_OK


def _eta_payload(b: EtSizeBreakdown) -> dict:
    return {
        "eta_lower": b.eta_interval[0],
        "eta_upper": b.eta_interval[1],
        "witness_w": list(b.witness_w),
        "bernstein": b.bernstein,
        "exact": b.exact,
        "per_direction": [
            {"v": list(v), "log_abs_res": la, "abs_dot_w": dw}
            for v, la, dw in b.per_direction
        ],
        "supnorm_intervals": [list(s) for s in b.supnorm_intervals],
    }


def cmd_eta(args) -> int:
    system = _load_system(args)
    breakdown = et_size(system)
    payload = {"manifest": _manifest(args, "eta"), "eta": _eta_payload(breakdown)}
    _emit(args, json.dumps(payload, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_report(args) -> int:
    system = _load_system(args)
    eps_list = [float(e) for e in args.eps.split(",")] if args.eps else [0.1, 0.2]
    if system.n > 2:
        raise UnsupportedDimensionError("reports are implemented for n <= 2")
    cyc = zero_cycle(system) if system.n == 2 else univariate_roots(system.polynomials[0])
    ang = angle_discrepancy(cyc)
    theta, theta_wit = pushforward_discrepancy_sup(cyc)
    breakdown = et_size(system)
    n = system.n
    reports = []
    eta_lo, eta_hi = (max(breakdown.eta_interval[0], 1e-300),
                      max(breakdown.eta_interval[1], 1e-300))
    if n == 1:
        (alo, ahi), _ = univariate_discrepancy_bounds(system.polynomials[0], eps_list[0])
        reports.append(make_report("univariate_angle", ang.value, alo, ahi))
        for e in eps_list:
            _, (rlo, rhi) = univariate_discrepancy_bounds(system.polynomials[0], e)
            reports.append(make_report(f"univariate_radius_{e}",
                                       radius_discrepancy(cyc, e), rlo, rhi))
    else:
        blo = multivariate_discrepancy_bounds(eta_lo, n, eps_list[0])[0]
        bhi = multivariate_discrepancy_bounds(eta_hi, n, eps_list[0])[0]
        reports.append(make_report("angle_vs_eta", ang.value, blo, bhi))
        for e in eps_list:
            rlo = multivariate_discrepancy_bounds(eta_lo, n, e)[1]
            rhi = multivariate_discrepancy_bounds(eta_hi, n, e)[1]
            reports.append(make_report(f"radius_vs_eta_{e}",
                                       radius_discrepancy(cyc, e), rlo, rhi))
    tb = tomography_bound(min(theta, 1.0), n)
    reports.append(make_report("angle_vs_projections", ang.value, tb, tb))
    payload = {
        "manifest": _manifest(args, "report", {"eps": eps_list}),
        "degree": cyc.degree,
        "angle_discrepancy": ang.value,
        "angle_exact": ang.exact,
        "witness_box": {"alpha": list(ang.witness.alpha),
                        "beta": list(ang.witness.beta),
                        "mode": ang.witness.mode},
        "radius_discrepancy": {str(e): radius_discrepancy(cyc, e) for e in eps_list},
        "pushforward_sup": theta,
        "pushforward_sup_witness": list(theta_wit),
        "axis_radius": {str(e): axis_radius_discrepancy(cyc, e) for e in eps_list},
        "eta": _eta_payload(breakdown),
        "bounds": [
            {"name": r.name, "measured": r.measured,
             "bound_lower": r.bound_interval[0], "bound_upper": r.bound_interval[1],
             "verdict": r.verdict}
            for r in reports
        ],
    }
    _emit(args, json.dumps(payload, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_hist(args) -> int:
    system = _load_system(args)
    if system.n > 2:
        raise UnsupportedDimensionError("histograms are implemented for n <= 2")
    cyc = zero_cycle(system) if system.n == 2 else univariate_roots(system.polynomials[0])
    bins = args.bins
    aedges, amass = argument_histogram(cyc, bins)
    medges, mmass = modulus_histogram(cyc, bins)
    if args.format == "json":
        payload = {
            "manifest": _manifest(args, "hist", {"bins": bins}),
            "argument": {"edges": aedges.tolist(), "mass": amass.tolist()},
            "modulus": {"edges": medges.tolist(), "mass": mmass.tolist()},
            "degree": cyc.degree,
        }
        _emit(args, json.dumps(payload, sort_keys=True) + "\n")
        return EXIT_OK
    lines = ["kind,axis,bin_lo,bin_hi,mass"]
    for kind, edges, mass in (("argument", aedges, amass), ("modulus", medges, mmass)):
        for axis in range(mass.shape[0]):
            for b in range(mass.shape[1]):
                lines.append(
                    f"{kind},{axis + 1},{edges[b]!r},{edges[b + 1]!r},{mass[axis, b]}")
    _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_window_check(args) -> int:
    rng = np.random.default_rng(args.seed or 0)
    rows = []

    def row(name, value, expected, tol):
        ok = abs(value - expected) <= tol
        rows.append({"check": name, "value": value, "expected": expected,
                     "tolerance": tol, "pass": bool(ok)})

    g0, g1, g2 = g_reference_integrals()
    row("g_mass", g0, 0.5, 1e-12)
    row("g_deriv_mass", g1, 1.0, 1e-12)
    row("g_second_deriv_mass", g2, 3.0, 1e-12)
    specs = [WindowSpec(0.0, 1.0, 0.5), WindowSpec(0.0, 0.0, 1.0)]
    for _ in range(args.specs):
        alpha = rng.uniform(-2.5, 1.0)
        beta = alpha + rng.uniform(0.0, 2.0)
        tau = rng.uniform(0.05, 0.5 * (2 * np.pi - (beta - alpha)) * 0.9)
        specs.append(WindowSpec(alpha, beta, tau))
    for i, w in enumerate(specs):
        i0, i1, i2 = window_integrals(w)
        row(f"spec{i}_mass", i0, w.beta - w.alpha + w.tau, 1e-9)
        row(f"spec{i}_deriv_mass", i1, 2.0, 1e-9)
        row(f"spec{i}_second_deriv_mass", i2, 6.0 / w.tau, 1e-9 / w.tau + 1e-9)
        row(f"spec{i}_half_ramp", half_ramp_mass(w), w.tau / 2.0, 1e-9)
        c0 = fourier_coefficient(w, 0)
        row(f"spec{i}_c0", c0.real, (w.beta - w.alpha + w.tau) / (2 * np.pi), 1e-12)
        worst = 0.0
        for a in range(1, args.max_freq + 1):
            excess = abs(fourier_coefficient(w, a)) - fourier_bound(w, a)
            worst = max(worst, excess)
        row(f"spec{i}_fourier_bound_excess", worst, 0.0, 1e-12)
    all_pass = all(r["pass"] for r in rows)
    payload = {
        "manifest": _manifest(args, "window-check",
                              {"specs": args.specs, "max_freq": args.max_freq}),
        "rows": rows,
        "all_pass": all_pass,
    }
    _emit(args, json.dumps(payload, sort_keys=True) + "\n")
    return EXIT_OK if all_pass else 1


def cmd_trend(args) -> int:
    if args.config:
        with open(args.config) as fh:
            obj = json.load(fh)
    else:
        obj = json.load(sys.stdin)
    polys = [convex_hull(v) for v in obj["base_polytopes"]]
    config = ExperimentConfig(
        base_polytopes=polys,
        kappa_list=[int(k) for k in obj["kappa_list"]],
        trials=obj.get("trials", 3),
        seed=int(obj.get("seed", args.seed or 0)),
        coefficient_law=obj.get("coefficient_law", "signs"),
        eps_list=tuple(obj.get("eps_list", [0.2])),
    )
    rows = discrepancy_trend(config)
    if args.format == "json":
        payload = {
            "manifest": _manifest(args, "trend", obj),
            "fitted_rate_constant": fitted_rate_constant(rows),
            "rows": [
                {
                    "kappa": r.kappa, "trials": r.trials, "accepted": r.accepted,
                    "rejected": r.rejected, "mean_dang": r.mean_d_ang,
                    "max_dang": r.max_d_ang,
                    "mean_drad": {str(e): v for e, v in r.mean_d_rad.items()},
                    "rate": r.rate_expected, "dilation_rate": r.dilation_rate,
                    "angle_bound_ok": r.angle_bound_ok,
                    "radius_bound_ok": r.radius_bound_ok,
                }
                for r in rows
            ],
        }
        _emit(args, json.dumps(payload, sort_keys=True) + "\n")
    else:
        _emit(args, trend_csv(rows, config.eps_list))
    return EXIT_OK


def cmd_tube(args) -> int:
    if args.config:
        with open(args.config) as fh:
            obj = json.load(fh)
    else:
        obj = json.load(sys.stdin)
    terms = {
        tuple(int(x) for x in t["e"]): complex(t["c"][0], t["c"][1])
        for t in obj["polynomial"]["terms"]
    }
    f = HomogeneousPolynomial(int(obj["polynomial"]["nvars"]), terms)
    result = tube_measure_estimate(
        f, float(obj["delta"]), int(obj.get("samples", 200000)),
        seed=int(obj.get("seed", args.seed or 5)))
    payload = {
        "manifest": _manifest(args, "tube", obj),
        "estimate": result.estimate,
        "sigma": result.sigma,
        "bound_conservative": result.bound_conservative,
        "bound_strict": result.bound_strict,
        "bound_integer": result.bound_integer,
        "verdict": result.verdict,
    }
    _emit(args, json.dumps(payload, sort_keys=True) + "\n")
    return EXIT_OK


def build_parser() -> _Parser:
    p = _Parser(prog="torus-equidist",
                description="zero cycles of sparse torus systems and their "
                            "equidistribution statistics")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, system=True):
        if system:
            sp.add_argument("--system", help="system JSON file")
            sp.add_argument("--inline", help="inline polynomials separated by ';'")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--format", choices=["json", "csv"], default="json")
        sp.add_argument("--out", help="output file (default stdout)")
        sp.add_argument("--no-timestamp", action="store_true",
                        help="omit the timestamp from the manifest")

    sp = sub.add_parser("solve", help="compute the certified zero cycle")
    common(sp)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("report", help="discrepancies, size and bound verdicts")
    common(sp)
    sp.add_argument("--eps", help="comma-separated radius parameters")
    sp.set_defaults(func=cmd_report)

    sp = sub.add_parser("eta", help="Erdos-Turan size breakdown")
    common(sp)
    sp.set_defaults(func=cmd_eta)

    sp = sub.add_parser("hist", help="argument and modulus histograms")
    common(sp)
    sp.add_argument("--bins", type=int, default=24)
    sp.set_defaults(func=cmd_hist)

    sp = sub.add_parser("window-check", help="window lemma verification table")
    common(sp, system=False)
    sp.add_argument("--specs", type=int, default=6)
    sp.add_argument("--max-freq", type=int, default=200)
    sp.set_defaults(func=cmd_window_check)

    sp = sub.add_parser("trend", help="dilation-family discrepancy trends")
    common(sp, system=False)
    sp.add_argument("--config", help="experiment config JSON (default stdin)")
    sp.set_defaults(func=cmd_trend)

    sp = sub.add_parser("tube", help="projective tube-measure experiment")
    common(sp, system=False)
    sp.add_argument("--config", help="tube config JSON (default stdin)")
    sp.set_defaults(func=cmd_tube)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        sys.stderr.write(f"input error: {exc}\n")
        return EXIT_PARSE
    except (json.JSONDecodeError, FileNotFoundError, KeyError) as exc:
        sys.stderr.write(f"input error: {exc}\n")
        return EXIT_PARSE
    except UnsupportedDimensionError as exc:
        sys.stderr.write(f"unsupported dimension: {exc}\n")
        return EXIT_DIMENSION
    except DegenerateSystemError as exc:
        sys.stderr.write(f"degenerate system: {exc}\n")
        return EXIT_DEGENERATE
    except (LaurentError, SolverError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
