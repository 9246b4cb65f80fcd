"""Command-line front end.

Every subcommand accepts a declarative JSON config (--config) and/or
flags; flags override file values, every knob has a default, and unknown
keys are rejected.  Results are written atomically as CSV (RFC 4180,
17 significant digits, `# schema=1` header) or JSON, with a companion
matplotlib figure rendered next to the output unless --no-figure.

Exit codes: 0 success, 2 validation error, 3 resource-limit outcome;
errors emit a machine-readable JSON record on stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from fractions import Fraction

import numpy as np

from . import fields, report, series, spectral, zeromodes
from .errors import InvalidParameterError, PauliLabError, ResourceLimitError


def parse_real(text) -> float:
    """Real number, accepting rational syntax like '2/7'."""
    if isinstance(text, (int, float)):
        return float(text)
    s = str(text).strip()
    if "/" in s:
        return float(Fraction(s))
    return float(s)


def _knob(name, typ, default, help_text):
    return {"name": name, "type": typ, "default": default, "help": help_text}


_COMMON = [
    _knob("output", str, None, "output file (default <subcommand>.<format>)"),
    _knob("format", str, "csv", "output format: csv or json"),
    _knob("figure", str, None, "figure path (default alongside the output)"),
    _knob("no_figure", bool, False, "disable figure rendering"),
    _knob("seed", int, 12345, "seed for randomized verifications"),
    _knob("workers", int, 0, "worker threads for the summation pool (0 = auto)"),
]

_FIELD = [
    _knob("preset", str, None,
          "field preset: constant | cosine | axes (alias th3) | "
          "equal-angle (alias th4) | gaussian | bump"),
    _knob("field_config", str, None, "JSON file with a serialized field spec"),
    _knob("b0", float, 0.0, "mean value (constant/cosine presets)"),
    _knob("cos_amp", float, 1.0, "cosine amplitude (cosine preset)"),
    _knob("cos_freq", str, "1,0", "cosine frequency 'f1,f2' (cosine preset)"),
    _knob("s", parse_real, None, "series exponent s"),
    _knob("t", parse_real, None, "series exponent t (rational syntax allowed)"),
    _knob("K", int, None, "number of directions (equal-angle preset)"),
    _knob("amplitude", float, 5.0, "profile amplitude (gaussian/bump presets)"),
    _knob("radius", float, 1.0, "profile radius (gaussian/bump presets)"),
]

KNOBS = {
    "series-eval": _COMMON + [
        _knob("s", parse_real, 3.0, "exponent s > 1"),
        _knob("t", parse_real, 1.0, "exponent t > 0 (rational syntax allowed)"),
        _knob("r", float, 0.0, "series argument"),
        _knob("tol", float, 1e-10, "certified tolerance (direct route)"),
        _knob("route", str, "direct", "evaluation route: direct | taylor | osc"),
    ],
    "series-asym": _COMMON + [
        _knob("s", parse_real, 2.0, "exponent s > 1"),
        _knob("t", parse_real, 1.0, "exponent t > 0"),
        _knob("law", str, "power", "asymptotic law: power | log"),
        _knob("r_min", float, 1e3, "window start"),
        _knob("r_max", float, 1e6, "window end"),
        _knob("n_points", int, 16, "log-spaced grid size"),
        _knob("rel_tol", float, 5e-3, "per-point relative tolerance"),
    ],
    "vdc-verify": _COMMON + [
        _knob("trials", int, 1000, "number of fuzzed sequences"),
        _knob("n_max", int, 512, "max sequence length"),
    ],
    "field-build": _FIELD + _COMMON + [
        _knob("ray", str, "1,0", "sampling ray direction 'd1,d2'"),
        _knob("r_max", float, 20.0, "sampling ray extent"),
        _knob("n_samples", int, 256, "samples along the ray"),
    ],
    "poisson-check": _FIELD + _COMMON + [
        _knob("h", float, 0.01, "base grid spacing"),
        _knob("extent", float, 1.0, "grid half-width"),
        _knob("levels", int, 2, "number of h-halvings"),
    ],
    "zero-modes": _FIELD + _COMMON + [
        _knob("m_max", int, 6, "largest power probed by the shell test"),
        _knob("margin", float, 0.2, "dead zone half-width around kappa = -1"),
        _knob("r_lo", float, 1e2, "shell window start"),
        _knob("r_hi", float, 1e4, "shell window end"),
    ],
    "spectrum": _FIELD + _COMMON + [
        _knob("L", float, 8.0, "box half-width"),
        _knob("n", int, 128, "grid points per side"),
        _knob("k", int, 32, "number of eigenvalues"),
        _knob("tol", float, 1e-9, "eigensolver tolerance"),
        _knob("sign", str, "-", "operator sector: - (a*a) or + (a a*)"),
        _knob("gap_hint", float, None, "cluster threshold hint (threshold = hint/4)"),
        _knob("export_matrix", str, None, "write the operator as sparse triplets"),
    ],
    "gap-probe": _FIELD + _COMMON + [
        _knob("eps", str, "0.2,0.1,0.05,0.02", "comma list of probe scales"),
        _knob("box", float, None, "integration radius (default auto)"),
    ],
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="paulilab",
        description="Numerical laboratory for 2D Pauli operators with almost periodic fields",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name, knobs in KNOBS.items():
        p = sub.add_parser(name)
        p.add_argument("--config", type=str, default=None,
                       help="JSON config file; flags override its values")
        seen = set()
        for kn in knobs:
            if kn["name"] in seen:
                continue
            seen.add(kn["name"])
            flag = "--" + kn["name"].replace("_", "-")
            if kn["type"] is bool:
                p.add_argument(flag, action="store_const", const=True, default=None,
                               help=kn["help"])
            else:
                p.add_argument(flag, type=kn["type"], default=None, help=kn["help"])
    return parser


def resolve_knobs(subcommand: str, cli_args: dict, config: dict) -> dict:
    """Merge defaults, config-file values and explicit flags (strictly)."""
    knobs = {k["name"]: k for k in KNOBS[subcommand]}
    unknown = set(config) - set(knobs) - {"subcommand"}
    if unknown:
        raise InvalidParameterError(f"unknown config keys: {sorted(unknown)}")
    if config.get("subcommand", subcommand) != subcommand:
        raise InvalidParameterError("config subcommand does not match the invocation")
    out = {}
    for name, kn in knobs.items():
        if cli_args.get(name) is not None:
            out[name] = cli_args[name]
        elif name in config:
            raw = config[name]
            out[name] = kn["type"](raw) if not isinstance(raw, bool) and kn["type"] is not str else raw
        else:
            out[name] = kn["default"]
    return out


def _build_field(k: dict):
    if k.get("field_config"):
        with open(k["field_config"]) as fh:
            return fields.spec_from_config(json.load(fh))
    preset = k.get("preset")
    if preset is None:
        raise InvalidParameterError("need --preset or --field-config to define the field")
    if preset == "constant":
        return fields.ModesField(float(k["b0"]), ())
    if preset == "cosine":
        f1, f2 = (float(x) for x in str(k["cos_freq"]).split(","))
        return fields.cosine_field(float(k["b0"]), [((f1, f2), float(k["cos_amp"]))])
    if preset in ("axes", "th3"):
        if k.get("s") is None or k.get("t") is None:
            raise InvalidParameterError("axes preset needs --s and --t")
        return fields.axes_cosine_family(float(k["s"]), float(k["t"]))
    if preset in ("equal-angle", "th4"):
        if k.get("t") is None or k.get("K") is None:
            raise InvalidParameterError("equal-angle preset needs --t and --K")
        t = k["t"]
        t_arg = str(Fraction(t).limit_denominator(10**6)) if isinstance(t, float) and t != int(t) else t
        return fields.equal_angle_family(t_arg, int(k["K"]))
    if preset == "gaussian":
        return fields.DecayingField("gaussian", float(k["amplitude"]), float(k["radius"]))
    if preset == "bump":
        return fields.DecayingField("bump", float(k["amplitude"]), float(k["radius"]))
    raise InvalidParameterError(f"unknown field preset {preset!r}")


def _output_path(k: dict, subcommand: str) -> str:
    if k["output"]:
        return k["output"]
    ext = "json" if k["format"] == "json" else "csv"
    return f"{subcommand.replace('-', '_')}.{ext}"


def _emit(k: dict, subcommand: str, header, rows, summary, draw=None) -> str:
    path = _output_path(k, subcommand)
    if k["format"] == "json":
        report.write_json(path, summary)
    elif k["format"] == "csv":
        report.write_csv(path, header, rows)
    else:
        raise InvalidParameterError(f"unknown format {k['format']!r}")
    if draw is not None and not k["no_figure"]:
        report.render_figure(k["figure"] or report.figure_path(path), draw)
    return path


def _run_series_eval(k: dict) -> str:
    params = series.SeriesParams(float(k["s"]), float(k["t"]))
    route = k["route"]
    if route == "direct":
        cv = series.eval_g_direct(params, k["r"], k["tol"])
    elif route == "taylor":
        cv = series.eval_g_taylor(params, k["r"])
    elif route == "osc":
        cv = series.eval_g_osc(params, k["r"])
    else:
        raise InvalidParameterError(f"unknown route {route!r}")
    header = ["s", "t", "r", "route", "value", "tail_bound", "terms_used", "certified"]
    row = [float(k["s"]), float(k["t"]), k["r"], route, cv.value, cv.tail_bound,
           cv.terms_used, cv.certified]
    summary = {"config": _json_safe(k), "subcommand": "series-eval",
               "result": {"value": cv.value, "tail_bound": cv.tail_bound,
                          "terms_used": cv.terms_used, "certified": cv.certified}}
    return _emit(k, "series-eval", header, [row], summary)


def _run_series_asym(k: dict) -> str:
    params = series.SeriesParams(float(k["s"]), float(k["t"]))
    grid = np.geomspace(k["r_min"], k["r_max"], k["n_points"])
    fit = series.fit_asymptotics(params, grid, k["law"], rel_tol=k["rel_tol"])
    g = [series._eval_for_fit(params, float(r), k["rel_tol"], "direct") for r in grid]
    header = ["r", "g", "fit"]
    if k["law"] == "power":
        fit_vals = [fit.prefactor * r**fit.exponent for r in grid]
    else:
        fit_vals = [fit.prefactor + fit.exponent * math.log(r) for r in grid]
    rows = [(float(r), float(v), float(f)) for r, v, f in zip(grid, g, fit_vals)]
    summary = {
        "config": _json_safe(k), "subcommand": "series-asym",
        "result": {"exponent": fit.exponent, "prefactor": fit.prefactor,
                   "residual": fit.residual, "r_window": list(fit.r_window)},
    }

    def draw(ax):
        ax.loglog(grid, g, "o", ms=4, label="evaluated")
        ax.loglog(grid, fit_vals, "-", label="fitted law")
        ax.set_xlabel("r")
        ax.set_ylabel("g(r)")
        ax.legend()

    return _emit(k, "series-asym", header, rows, summary, draw)


def _run_vdc_verify(k: dict) -> str:
    from .expsums import vdc_bound

    rng = np.random.RandomState(k["seed"])
    rows = []
    violations = 0
    min_slack = math.inf
    for trial in range(k["trials"]):
        N = int(rng.randint(1, k["n_max"] + 1))
        H = int(rng.randint(1, N + 1))
        b = rng.uniform(-10.0, 10.0, size=N)
        lhs, rhs = vdc_bound(b, H)
        ok = lhs <= rhs
        violations += not ok
        min_slack = min(min_slack, rhs - lhs)
        rows.append((trial, N, H, float(lhs), float(rhs), bool(ok)))
    header = ["trial", "N", "H", "lhs", "rhs", "ok"]
    summary = {
        "config": _json_safe(k), "subcommand": "vdc-verify",
        "result": {"trials": k["trials"], "violations": violations,
                   "min_slack": min_slack},
    }

    def draw(ax):
        lh = [r[3] for r in rows]
        rh = [r[4] for r in rows]
        ax.scatter(rh, lh, s=5, alpha=0.5)
        top = max(rh)
        ax.plot([0, top], [0, top], "k--", lw=1, label="lhs = rhs")
        ax.set_xlabel("rhs bound")
        ax.set_ylabel("lhs")
        ax.legend()

    return _emit(k, "vdc-verify", header, rows, summary, draw)


def _run_field_build(k: dict) -> str:
    spec = _build_field(k)
    cfg = fields.spec_to_config(spec)
    d1, d2 = (float(x) for x in str(k["ray"]).split(","))
    norm = math.hypot(d1, d2)
    if norm == 0:
        raise InvalidParameterError("ray direction must be nonzero")
    d1, d2 = d1 / norm, d2 / norm
    rs = np.linspace(0.0, k["r_max"], k["n_samples"])
    b_vals = fields.field_grid(spec, rs * d1, rs * d2)
    phi_vals = [fields.scalar_potential(spec, (r * d1, r * d2)) for r in rs]
    rows = [(float(r), float(b), float(p)) for r, b, p in zip(rs, b_vals, phi_vals)]
    header = ["r", "b", "phi"]
    summary = {"config": _json_safe(k), "subcommand": "field-build",
               "result": {"field": cfg, "mean_value": fields.mean_value(spec)}}

    def draw(ax):
        ax.plot(rs, b_vals, label="b along ray")
        ax.plot(rs, phi_vals, label="phi along ray")
        ax.set_xlabel("r")
        ax.legend()

    return _emit(k, "field-build", header, rows, summary, draw)


def _run_poisson_check(k: dict) -> str:
    spec = _build_field(k)
    rows = []
    residuals = []
    h = k["h"]
    for level in range(k["levels"] + 1):
        dims = int(round(2.0 * k["extent"] / h)) + 1
        grid = fields.sample_potential_grid(
            spec, (-k["extent"], -k["extent"]), h, (dims, dims), with_A=False
        )
        r = fields.poisson_residual(spec, grid)
        residuals.append((h, r))
        ratio = residuals[-2][1] / r if level > 0 else None
        rows.append((level, h, r, ratio if ratio is not None else ""))
        h /= 2.0
    header = ["level", "h", "residual", "ratio"]
    summary = {"config": _json_safe(k), "subcommand": "poisson-check",
               "result": {"residuals": [{"h": hh, "residual": rr} for hh, rr in residuals],
                          "ratios": [residuals[i - 1][1] / residuals[i][1]
                                     for i in range(1, len(residuals))]}}

    def draw(ax):
        hs = [hh for hh, _ in residuals]
        rs = [rr for _, rr in residuals]
        ax.loglog(hs, rs, "o-", label="residual")
        ax.loglog(hs, [rs[0] * (hh / hs[0]) ** 2 for hh in hs], "k--", lw=1,
                  label="h^2 slope")
        ax.set_xlabel("h")
        ax.set_ylabel("max |Lap phi - b|")
        ax.legend()

    return _emit(k, "poisson-check", header, rows, summary, draw)


def _run_zero_modes(k: dict) -> str:
    spec = _build_field(k)
    pred = zeromodes.predict_dim_ker(spec)
    rows = []
    fits = []
    if not isinstance(spec, fields.ModesField):
        for m in range(k["m_max"] + 1):
            out = zeromodes.integrability_test(
                spec, m, margin=k["margin"], r_window=(k["r_lo"], k["r_hi"])
            )
            verdict = {True: "integrable", False: "divergent", None: "indeterminate"}[
                out.integrable
            ]
            rows.append((m, out.kappa, out.kappa - (-1.0), verdict))
            fits.append({"m": m, "kappa": out.kappa, "verdict": verdict,
                         "margin": out.margin, "r_window": list(out.r_window)})
    header = ["m", "kappa", "kappa_margin", "verdict"]
    count = sum(1 for f in fits if f["verdict"] == "integrable")
    summary = {"config": _json_safe(k), "subcommand": "zero-modes",
               "result": {"prediction": _json_safe(pred.to_record()),
                          "kappa_fits": fits,
                          "integrable_count": count}}

    def draw(ax):
        if fits:
            ms = [f["m"] for f in fits]
            ks = [f["kappa"] for f in fits]
            ax.plot(ms, ks, "o-", label="fitted kappa")
            ax.axhline(-1.0, color="k", ls="--", lw=1, label="L2 boundary")
            ax.set_xlabel("power m")
            ax.set_ylabel("kappa")
            ax.legend()

    return _emit(k, "zero-modes", header, rows, summary, draw if fits else None)


def _run_spectrum(k: dict) -> str:
    spec = _build_field(k)
    op = spectral.build_annihilation(spec, k["L"], k["n"])
    mat = spectral.assemble_pauli(op, k["sign"])
    if k["export_matrix"]:
        spectral.export_triplets(op.matrix, k["export_matrix"])
    res = spectral.low_spectrum(mat, k["k"], k["tol"])
    count, thr = spectral.zero_cluster(res, k["gap_hint"])
    rows = [(i, ev, rn, "" if res.converged else "flagged")
            for i, ev, rn in res.to_rows()]
    header = ["index", "eigenvalue", "residual", "flag"]
    summary = {"config": _json_safe(k), "subcommand": "spectrum",
               "result": {"spectrum": _json_safe(res.to_record()),
                          "zero_cluster_count": count, "threshold": thr,
                          "operator_hash": op.potential_hash}}

    def draw(ax):
        ev = np.asarray(res.eigenvalues)
        ax.semilogy(np.arange(len(ev)), np.maximum(ev, 1e-18), "o", ms=4)
        if thr:
            ax.axhline(thr, color="r", ls="--", lw=1, label="cluster threshold")
            ax.legend()
        ax.set_xlabel("index")
        ax.set_ylabel("eigenvalue")

    return _emit(k, "spectrum", header, rows, summary, draw)


def _run_gap_probe(k: dict) -> str:
    spec = _build_field(k)
    eps_list = [float(x) for x in str(k["eps"]).split(",")]
    rows = []
    for eps in eps_list:
        q = zeromodes.variational_gap_probe(spec, eps, box=k["box"])
        rows.append((eps, q))
    header = ["eps", "quotient"]
    slope = None
    if len(rows) >= 2:
        le = np.log([r[0] for r in rows])
        lq = np.log([r[1] for r in rows])
        slope = float(np.polyfit(le, lq, 1)[0])
    summary = {"config": _json_safe(k), "subcommand": "gap-probe",
               "result": {"quotients": [{"eps": e, "quotient": q} for e, q in rows],
                          "loglog_slope": slope}}

    def draw(ax):
        es = [r[0] for r in rows]
        qs = [r[1] for r in rows]
        ax.loglog(es, qs, "o-", label="Rayleigh quotient")
        ax.loglog(es, [qs[0] * (e / es[0]) ** 2 for e in es], "k--", lw=1,
                  label="eps^2 slope")
        ax.set_xlabel("eps")
        ax.set_ylabel("quotient")
        ax.legend()

    return _emit(k, "gap-probe", header, rows, summary, draw)


def _json_safe(obj):
    if isinstance(obj, dict):
        return {key: _json_safe(v) for key, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, float) and math.isinf(obj):
        return "infinity"
    return obj


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        cli_args = {key.replace("-", "_"): v for key, v in vars(args).items()
                    if key not in ("subcommand", "config")}
        config = {}
        if args.config:
            with open(args.config) as fh:
                config = json.load(fh)
        k = resolve_knobs(args.subcommand, cli_args, config)
        if k["workers"]:
            os.environ["PAULILAB_WORKERS"] = str(k["workers"])
        handler = HANDLERS[args.subcommand]
        path = handler(k)
        print(path)
        return 0
    except ResourceLimitError as exc:
        _error_record(exc, 3)
        return 3
    except (InvalidParameterError, PauliLabError, FileNotFoundError,
            json.JSONDecodeError, ValueError, KeyError) as exc:
        _error_record(exc, 2)
        return 2


def _error_record(exc, code):
    record = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    for attr in ("achievable_tol", "suggestion", "minimal_r"):
        if getattr(exc, attr, None) is not None:
            record[attr] = getattr(exc, attr)
    print(json.dumps(record, sort_keys=True), file=sys.stderr)


HANDLERS = {
    "series-eval": _run_series_eval,
    "series-asym": _run_series_asym,
    "vdc-verify": _run_vdc_verify,
    "field-build": _run_field_build,
    "poisson-check": _run_poisson_check,
    "zero-modes": _run_zero_modes,
    "spectrum": _run_spectrum,
    "gap-probe": _run_gap_probe,
}


if __name__ == "__main__":
    sys.exit(main())
