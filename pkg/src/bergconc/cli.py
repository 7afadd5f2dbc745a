"""Batch verification front end.

Subcommands
-----------
verify-exact   exact rational suite: the central S_l <= D_l scan (proven
               range n <= 3, exploratory n >= 4), coefficient bounds,
               partial-fraction and terminating-sum identities, numeric
               root cross-checks and the k-th moment integral bounds
profile        concentration profiles I(s) vs. the sharp curve theta(s)
fock           Gaussian-weight limit inequality and convergence tables
lemma22        log-curvature bound for the derivative growth envelope
isoperimetry   circle equality L^2 = 4 pi s + 4 s^2 in hyperbolic metric
all            everything above with default parameter grids

Exit codes: 0 all checks pass (findings allowed), 1 any VIOLATION,
2 any NON_CONVERGENT without violation, 64 usage error.

Reports are deterministic for a fixed configuration and version; every
float travels with an error estimate and exact rationals are serialized
as "num/den" strings.  A resolved-configuration manifest is embedded in
each report.
"""

from __future__ import annotations

import argparse
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

import numpy as np

from . import __version__, concentration, fock, symmetric
from .bergman import MU, NU, AnalyticPolynomial, SpaceParams, kernel_polynomial, monomial_norm
from .bergman import isoperimetric_residual
from .errors import NonConvergentError, ToolkitError, ViolationError
from .report import (FINDING, NON_CONVERGENT, PASS, VIOLATION, CheckRecord,
                     VerificationReport, profile_csv, records_csv)

USAGE_ERROR = 64

_DEFAULTS = {
    "verify-exact": {"n": "1..3", "alpha": "2,5/2,3,7/2,10", "l_max": "200", "k_max": "60"},
    "profile": {"functions": "one", "n": "0", "alpha": "2", "variant": "mu",
                "s_grid": "0.05:100:40"},
    "fock": {"n": "0..4", "k_max": "25"},
    "lemma22": {"n": "0..6", "alpha": "2,5/2,7/2"},
    "isoperimetry": {"r_grid": "0.05:0.95:19"},
}
_COMMON_DEFAULTS = {"tol": "1e-10", "jobs": "1", "format": "json"}


# ---------------------------------------------------------------------------
# small parsers (argparse `type=` callables raise ArgumentTypeError)


def _fail(msg):
    raise argparse.ArgumentTypeError(msg)


def parse_rationals(text: str) -> list[Fraction]:
    try:
        vals = [Fraction(tok.strip()) for tok in text.split(",") if tok.strip()]
    except (ValueError, ZeroDivisionError):
        _fail(f"not a comma list of rationals: {text!r}")
    if not vals:
        _fail("empty rational list")
    return vals


def parse_int_range(text: str) -> list[int]:
    try:
        if ".." in text:
            lo, hi = text.split("..")
            out = list(range(int(lo), int(hi) + 1))
        else:
            out = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        _fail(f"not an integer list or lo..hi range: {text!r}")
    if not out:
        _fail("empty integer range")
    return out


def parse_geometric_grid(text: str) -> list[float]:
    try:
        lo, hi, count = text.split(":")
        lo, hi, count = float(lo), float(hi), int(count)
    except ValueError:
        _fail(f"grid must be lo:hi:count, got {text!r}")
    if not (0 < lo < hi and count >= 2):
        _fail(f"grid needs 0 < lo < hi and count >= 2, got {text!r}")
    return [float(v) for v in np.geomspace(lo, hi, count)]


def parse_linear_grid(text: str) -> list[float]:
    try:
        lo, hi, count = text.split(":")
        lo, hi, count = float(lo), float(hi), int(count)
    except ValueError:
        _fail(f"grid must be lo:hi:count, got {text!r}")
    if not (lo < hi and count >= 2):
        _fail(f"grid needs lo < hi and count >= 2, got {text!r}")
    return [float(v) for v in np.linspace(lo, hi, count)]


def parse_functions(text: str) -> list[str]:
    specs = [tok.strip() for tok in text.split(",") if tok.strip()]
    for spec in specs:
        if spec == "one":
            continue
        if spec.startswith("monomial:"):
            try:
                k = int(spec.split(":", 1)[1])
            except ValueError:
                _fail(f"monomial degree must be an integer: {spec!r}")
            if k < 0:
                _fail(f"monomial degree must be >= 0: {spec!r}")
            continue
        if spec.startswith("kernel:"):
            try:
                complex(spec.split(":", 1)[1].replace("i", "j"))
            except ValueError:
                _fail(f"kernel center must be a complex number: {spec!r}")
            continue
        _fail(f"unknown function spec {spec!r} (use one, monomial:K, kernel:W)")
    if not specs:
        _fail("empty function list")
    return specs


def build_function(spec: str, alpha: Fraction) -> AnalyticPolynomial:
    if spec == "one":
        return AnalyticPolynomial([1.0])
    if spec.startswith("monomial:"):
        k = int(spec.split(":", 1)[1])
        coeffs = [0.0] * k + [1.0 / float(monomial_norm(k, alpha)) ** 0.5]
        return AnalyticPolynomial(coeffs)
    if spec.startswith("kernel:"):
        w = complex(spec.split(":", 1)[1].replace("i", "j"))
        return kernel_polynomial(w, alpha, tol=1e-12)
    raise ValueError(f"unknown function spec {spec!r}")


# ---------------------------------------------------------------------------
# task runners (module level so process pools can pickle them)


def _run_symmetric_scan(p):
    result = symmetric.main_inequality_scan(p["n"], p["alpha"], p["l_max"])
    negative = result["first_negative_l"] is not None
    verdict = FINDING if (negative and p["n"] >= 4) else PASS
    detail = result["verdict"]
    if negative:
        detail += f"; first negative margin at l={result['first_negative_l']}"
    return CheckRecord(
        "symmetric-scan", {"n": p["n"], "alpha": p["alpha"], "l_max": p["l_max"]},
        verdict,
        values={"min_margin": result["min_margin"], "argmin_l": result["argmin_l"],
                "equality_l": list(result["equality_l"])},
        detail=detail,
    ), None


def _run_c_scan(p):
    result = symmetric.c_coefficient_scan(p["n"], p["alpha"], p["k_max"])
    return CheckRecord(
        "c-coefficient-scan", {"n": p["n"], "alpha": p["alpha"], "k_max": p["k_max"]},
        PASS, values={"final_gap": result["final_gap"]},
    ), None


def _run_b_identities(p):
    result = symmetric.b_weight_identity_checks(
        p["n"], p["alpha"], range(p["n"], p["k_max"] + 1), range(0, p["l_max"] + 1))
    return CheckRecord(
        "b-weight-identities", {"n": p["n"], "alpha": p["alpha"],
                                "k_max": p["k_max"], "l_max": p["l_max"]},
        PASS, values=result,
    ), None


def _run_roots(p):
    data = symmetric.roots_and_residues(p["n"], float(p["alpha"]))
    checks = symmetric.residue_cross_checks(data, p["alpha"], l_max=p["l_max"])
    bad = (checks["residue_sum_err"] > 1e-10 or checks["partial_fraction_err"] > 1e-10
           or checks["moment_identity_err"] > 1e-9 or checks["vieta_err"] > 1e-10)
    if bad:
        raise ViolationError(f"root/residue cross-checks out of tolerance: {checks}")
    return CheckRecord(
        "roots-residues", {"n": p["n"], "alpha": p["alpha"], "l_max": p["l_max"]},
        PASS, values=checks,
    ), None


def _run_moment_scan(p):
    worst = None
    finding = False
    for k in range(p["n"], p["k_max"] + 1):
        res = symmetric.moment_bound_check(k, p["n"], p["alpha"], tol=p["tol"])
        finding = finding or res["finding"]
        if worst is None or res["margin"] < worst["margin"]:
            worst = res
    verdict = FINDING if finding else PASS
    return CheckRecord(
        "moment-bound-scan", {"n": p["n"], "alpha": p["alpha"], "k_max": p["k_max"]},
        verdict,
        values={"worst_margin": worst["margin"], "worst_k": worst["k"],
                "error": worst["error"]},
    ), None


def _run_n3_recursion(p):
    worst = symmetric.n3_recursion_check(p["alpha"], p["l_max"])
    return CheckRecord(
        "n3-recursion", {"alpha": p["alpha"], "l_max": p["l_max"]},
        PASS, values={"min_margin": worst},
    ), None


def _run_vandermonde(p):
    count = 0
    for m in range(0, p["m_max"] + 1):
        for beta in p["betas"]:
            for l in p["ls"]:
                symmetric.vandermonde_identity_check(m, beta, l)
                count += 1
    return CheckRecord(
        "terminating-sum-identity",
        {"m_max": p["m_max"], "betas": p["betas"], "ls": p["ls"]},
        PASS, values={"instances": count},
    ), None


def _run_profile(p):
    params = SpaceParams(alpha=p["alpha"], n=p["n"])
    f = build_function(p["function"], p["alpha"])
    profile = concentration.concentration_profile(
        f, params, p["s_grid"], variant=p["variant"], tol=p["tol"],
        label=p["function"])
    rep = concentration.bound_report(profile)
    values = {
        "worst_margin": rep.worst_margin, "worst_s": rep.worst_s,
        "strict": rep.strict,
    }
    if p.get("ode"):
        ode = concentration.ode_convexity_check(profile)
        values["min_ode_residual"] = ode["min_ode_residual"]
        values["min_second_difference"] = ode["min_second_difference"]
    verdict = PASS if rep.passed else VIOLATION
    rows = [(p["function"], p["n"], p["alpha"], p["variant"], smp)
            for smp in profile.samples]
    return CheckRecord(
        "profile", {"function": p["function"], "n": p["n"], "alpha": p["alpha"],
                    "variant": p["variant"]},
        verdict, values=values,
    ), rows


def _run_fock_pair(p):
    res = fock.fock_limit_check(p["k"], p["n"], tol=p["tol"])
    return CheckRecord(
        "fock-limit", {"n": p["n"], "k": p["k"]},
        PASS, values={"integral": res["integral"], "bound": res["bound"],
                      "margin": res["margin"]},
    ), None


def _run_fock_convergence(p):
    res = fock.fock_convergence_table(p["k"], p["n"], p["R_list"], tol=p["tol"])
    verdict = PASS if res["gaps_strictly_shrinking"] else FINDING
    return CheckRecord(
        "fock-convergence", {"n": p["n"], "k": p["k"], "R_list": p["R_list"]},
        verdict,
        values={"limit": res["limit"], "gaps": [row["gap"] for row in res["rows"]]},
    ), None


def _run_curvature(p):
    res = concentration.curvature_margin_scan(p["n"], p["alpha"])
    if res["margin_at_zero"] != 0:
        raise ViolationError(f"curvature margin at t=0 is {res['margin_at_zero']}, not 0")
    return CheckRecord(
        "curvature-margin", {"n": p["n"], "alpha": p["alpha"]},
        PASS,
        values={"min_margin": res["min_margin"],
                "min_polynomial_margin": res["min_polynomial_margin"],
                "margin_at_zero": res["margin_at_zero"]},
    ), None


def _run_isoperimetry(p):
    float_res, exact_res = isoperimetric_residual(p["r"])
    if exact_res != 0 or abs(float_res) > 1e-12:
        raise ViolationError(
            f"circle equality residual out of tolerance at r={p['r']}: "
            f"float {float_res!r}, exact {exact_res}")
    return CheckRecord(
        "isoperimetry", {"r": p["r"]},
        PASS, values={"float_residual": float_res, "exact_residual": exact_res},
    ), None


_RUNNERS = {
    "symmetric-scan": _run_symmetric_scan,
    "c-coefficient-scan": _run_c_scan,
    "b-weight-identities": _run_b_identities,
    "roots-residues": _run_roots,
    "moment-bound-scan": _run_moment_scan,
    "n3-recursion": _run_n3_recursion,
    "terminating-sum-identity": _run_vandermonde,
    "profile": _run_profile,
    "fock-limit": _run_fock_pair,
    "fock-convergence": _run_fock_convergence,
    "curvature-margin": _run_curvature,
    "isoperimetry": _run_isoperimetry,
}


def run_task(task):
    name, params = task
    started = time.perf_counter()
    try:
        record, rows = _RUNNERS[name](params)
    except ViolationError as exc:
        record, rows = CheckRecord(name, params, VIOLATION, detail=str(exc)), None
    except NonConvergentError as exc:
        record, rows = CheckRecord(name, params, NON_CONVERGENT, detail=str(exc)), None
    return record, rows, time.perf_counter() - started


# ---------------------------------------------------------------------------
# task construction per subcommand


def _tasks_verify_exact(cfg):
    tasks = []
    for n in cfg["n"]:
        for alpha in cfg["alpha"]:
            base = {"n": n, "alpha": alpha, "tol": cfg["tol"]}
            tasks.append(("symmetric-scan", base | {"l_max": cfg["l_max"]}))
            tasks.append(("c-coefficient-scan", base | {"k_max": cfg["k_max"]}))
            tasks.append(("b-weight-identities",
                          base | {"k_max": min(50, cfg["k_max"]),
                                  "l_max": min(50, cfg["l_max"])}))
            tasks.append(("roots-residues", base | {"l_max": min(50, cfg["l_max"])}))
            tasks.append(("moment-bound-scan", base | {"k_max": cfg["k_max"]}))
            if n == 3:
                tasks.append(("n3-recursion",
                              {"alpha": alpha, "l_max": cfg["l_max"]}))
    tasks.append(("terminating-sum-identity", {
        "m_max": 40,
        "betas": [Fraction(2), Fraction(7, 3), Fraction(11, 4)],
        "ls": [Fraction(-3, 2), Fraction(0), Fraction(1), Fraction(11, 2), Fraction(20)],
    }))
    return tasks


def _tasks_profile(cfg):
    variants = [MU, NU] if cfg["variant"] == "both" else [cfg["variant"]]
    tasks = []
    for spec in cfg["functions"]:
        for n in cfg["n"]:
            for alpha in cfg["alpha"]:
                for variant in variants:
                    tasks.append(("profile", {
                        "function": spec, "n": n, "alpha": alpha,
                        "variant": variant, "s_grid": cfg["s_grid"],
                        "tol": cfg["tol"], "ode": cfg["ode"],
                    }))
    return tasks


def _tasks_fock(cfg):
    tasks = []
    for n in cfg["n"]:
        for k in range(n, cfg["k_max"] + 1):
            tasks.append(("fock-limit", {"n": n, "k": k, "tol": cfg["tol"]}))
    for n, k in ((0, 2), (1, 2), (2, 4)):
        tasks.append(("fock-convergence", {
            "n": n, "k": k, "R_list": [1e2, 1e3, 1e4], "tol": cfg["tol"]}))
    return tasks


def _tasks_lemma22(cfg):
    return [("curvature-margin", {"n": n, "alpha": alpha})
            for n in cfg["n"] for alpha in cfg["alpha"]]


def _tasks_isoperimetry(cfg):
    return [("isoperimetry", {"r": r}) for r in cfg["r_grid"]]


# ---------------------------------------------------------------------------
# configuration plumbing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


def _read_config_file(path: str) -> dict:
    out = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"config line is not key = value: {raw.rstrip()}")
            key, value = line.split("=", 1)
            out[key.strip().replace("-", "_")] = value.strip()
    return out


_PARSERS = {
    "alpha": parse_rationals,
    "n": parse_int_range,
    "l_max": int,
    "k_max": int,
    "s_grid": parse_geometric_grid,
    "r_grid": parse_linear_grid,
    "functions": parse_functions,
    "variant": str,
    "tol": float,
    "jobs": int,
    "format": str,
    "ode": lambda v: str(v).lower() in ("1", "true", "yes"),
}


def _resolve(command: str, args: argparse.Namespace) -> dict:
    layers = dict(_COMMON_DEFAULTS)
    layers["ode"] = "false"
    for cmd in ([command] if command != "all" else list(_DEFAULTS)):
        for key, val in _DEFAULTS[cmd].items():
            layers.setdefault(key, val)
    if args.config:
        layers.update(_read_config_file(args.config))
    for key in _PARSERS:
        flag = getattr(args, key, None)
        if flag is not None:
            layers[key] = flag
    resolved = {}
    for key, raw in layers.items():
        if key not in _PARSERS:
            raise ValueError(f"unknown configuration key {key!r}")
        resolved[key] = _PARSERS[key](raw) if isinstance(raw, str) else raw
    if resolved.get("variant") not in (None, "mu", "nu", "both"):
        raise ValueError(f"variant must be mu, nu or both, got {resolved['variant']!r}")
    if resolved.get("format") not in ("json", "csv"):
        raise ValueError(f"format must be json or csv, got {resolved['format']!r}")
    return resolved


def build_parser() -> _Parser:
    parser = _Parser(prog="bergconc", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for command in ("verify-exact", "profile", "fock", "lemma22", "isoperimetry", "all"):
        p = sub.add_parser(command)
        p.add_argument("--alpha", help="comma list of rational weights, e.g. 2,5/2,3")
        p.add_argument("--n", help="derivative orders: comma list or lo..hi")
        p.add_argument("--l-max", dest="l_max", help="scan depth for l-indexed checks")
        p.add_argument("--k-max", dest="k_max", help="scan depth for k-indexed checks")
        p.add_argument("--s-grid", dest="s_grid",
                       help="geometric measure grid lo:hi:count")
        p.add_argument("--r-grid", dest="r_grid", help="linear radius grid lo:hi:count")
        p.add_argument("--functions", help="one | monomial:K | kernel:W, comma list")
        p.add_argument("--variant", choices=("mu", "nu", "both"))
        p.add_argument("--ode", action="store_const", const="true",
                       help="also run the comparison-argument checks per profile")
        p.add_argument("--tol", help="target tolerance for numeric checks")
        p.add_argument("--jobs", help="parallel workers (default 1)")
        p.add_argument("--out", help="write the report here instead of stdout")
        p.add_argument("--format", choices=("json", "csv"))
        p.add_argument("--config", help="key = value configuration file")
    return parser


_TASK_BUILDERS = {
    "verify-exact": _tasks_verify_exact,
    "profile": _tasks_profile,
    "fock": _tasks_fock,
    "lemma22": _tasks_lemma22,
    "isoperimetry": _tasks_isoperimetry,
}


def _build_tasks(command: str, cfg: dict):
    if command == "all":
        tasks = []
        for cmd in ("verify-exact", "profile", "fock", "lemma22", "isoperimetry"):
            tasks.extend(_TASK_BUILDERS[cmd](cfg))
        return tasks
    return _TASK_BUILDERS[command](cfg)


def _config_echo(cfg: dict) -> dict:
    return {k: cfg[k] for k in sorted(cfg)}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _resolve(args.command, args)
        tasks = _build_tasks(args.command, cfg)
    except (ValueError, OSError, argparse.ArgumentTypeError) as exc:
        parser.error(str(exc))

    started = time.perf_counter()
    results = []
    if cfg["jobs"] > 1:
        with ProcessPoolExecutor(max_workers=cfg["jobs"]) as pool:
            results = list(pool.map(run_task, tasks))
    else:
        results = [run_task(t) for t in tasks]

    records = [rec for rec, _, _ in results]
    profile_rows = []
    for _, rows, _ in results:
        if rows:
            profile_rows.extend(rows)
    profile_rows.sort(key=lambda row: (row[0], row[1], str(row[2]), row[3], row[4].s))

    timings = {
        "total_seconds": time.perf_counter() - started,
        "per_check": {
            f"{rec.name} {idx}": elapsed
            for idx, (rec, _, elapsed) in enumerate(results)
        },
    }
    report = VerificationReport(command=args.command, config=_config_echo(cfg),
                                records=records, timings=timings)

    if cfg["format"] == "csv":
        text = profile_csv(profile_rows) if profile_rows else records_csv(records)
    else:
        text = report.to_json()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
            if not text.endswith("\n"):
                fh.write("\n")
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    return report.exit_code()


if __name__ == "__main__":
    sys.exit(main())
