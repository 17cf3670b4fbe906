"""Command-line driver.

``fraceig <subcommand> [flags]``; every subcommand accepts ``--config
FILE`` with a JSON object mirroring its flags (explicit flags win). Exit
codes: 0 success, 2 hard invariant failure, 3 report-only anomaly,
64 configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .assembly import (
    UniformGridSpec,
    assemble_form,
    form_to_json,
)
from .audits import (
    converse_linf_bound_audit,
    hardy_audit,
    hopf_fit,
    linf_ratio_audit,
    picone_lane_emden_audit,
    subsolution_sup_audit,
    weighted_holder_audit,
)
from .domain import parse_domain, scale_set
from .errors import (
    ConfigError,
    ConvergenceError,
    FracEigError,
    InvalidDomainError,
    InvalidParameterError,
    InvalidScaleError,
)
from .experiments import (
    EXIT_CONFIG,
    EXIT_HARD_FAIL,
    EXIT_OK,
    EXIT_REPORT_ANOMALY,
    ExperimentConfig,
    run_audit_suite,
    run_convergence,
    run_isolation,
    run_q_continuity,
    run_qscan_super,
    suite_exit_code,
)
from .lane_emden import (
    comparison_check,
    exhaustion_sequence,
    lane_emden_density,
    minimize_free_energy,
)
from .solvers import (
    critical_point_search,
    full_spectrum_q2,
    solve_lambda1,
    solve_lambda1_general,
)
from .util import json_dumps, write_csv


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file whose keys mirror the flags")
    p.add_argument("--domain", help="intervals as 'a,b;c,d'")
    p.add_argument("--h", type=float, help="target cell width")
    p.add_argument("--s", type=float, help="fractional order in (0, 1)")
    p.add_argument("--q", type=float, help="constraint exponent")
    p.add_argument("--seed", type=int, help="RNG seed")
    p.add_argument("--tol", type=float, help="solver tolerance")
    p.add_argument("--out", help="output path")


_DEFAULTS = {
    "domain": "0,1",
    "h": 0.005,
    "s": 0.5,
    "q": 1.5,
    "seed": 1,
    "tol": 1e-10,
    "out": None,
    "max_iter": 5000,
    "k": 10,
    "restarts": 50,
    "cluster_tol": 1e-6,
    "samples": 200,
    "route": "eigen",
    "radii": "0.25,0.5,1",
    "center": 0.0,
    "domain1": None,
    "domain2": None,
    "f_bound": None,
    "x0": None,
    "r": None,
    "delta": 0.5,
    "q_list": None,
    "h_list": None,
    "q_max": 2.4,
    "steps": 5,
    "out_csv": None,
    "plot": False,
}


def _settings(args: argparse.Namespace) -> dict:
    """Defaults, overlaid by the config file, overlaid by explicit flags."""
    merged = dict(_DEFAULTS)
    cfg_path = getattr(args, "config", None)
    if cfg_path:
        try:
            with open(cfg_path) as fh:
                file_cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {cfg_path!r}: {exc}") from exc
        if not isinstance(file_cfg, dict):
            raise ConfigError("config file must hold a JSON object")
        for k, v in file_cfg.items():
            key = k.replace("-", "_")
            if key not in merged and key not in ("experiment", "audit"):
                raise ConfigError(f"unknown config key {k!r}")
            merged[key] = v
    for k, v in vars(args).items():
        if k in ("func", "config") or v is None or v is False:
            continue
        merged[k] = v
    return merged


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _form_from(settings: dict):
    omega = parse_domain(str(settings["domain"]))
    grid = UniformGridSpec(float(settings["h"]))
    return assemble_form(omega, grid, float(settings["s"]))


def cmd_assemble(args) -> int:
    st = _settings(args)
    form = _form_from(st)
    _emit(form_to_json(form), st["out"])
    return EXIT_OK


def cmd_lambda1(args) -> int:
    st = _settings(args)
    form = _form_from(st)
    q = float(st["q"])
    if 1.0 < q <= 2.0:
        res = solve_lambda1(form, q, tol=float(st["tol"]),
                            max_iter=int(st["max_iter"]), seed=int(st["seed"]))
    else:
        res = solve_lambda1_general(form, q, tol=float(st["tol"]), seed=int(st["seed"]))
    _emit(json_dumps(res.to_dict()), st["out"])
    return EXIT_OK


def cmd_spectrum(args) -> int:
    st = _settings(args)
    form = _form_from(st)
    pairs = full_spectrum_q2(form, int(st["k"]))
    doc = {
        "s": form.s,
        "domain": str(form.domain),
        "n": form.n,
        "eigenvalues": [lam for lam, _ in pairs],
        "eigenvectors": [u.values for _, u in pairs],
    }
    _emit(json_dumps(doc), st["out"])
    return EXIT_OK


def cmd_search(args) -> int:
    st = _settings(args)
    form = _form_from(st)
    found = critical_point_search(
        form, float(st["q"]), int(st["restarts"]), seed=int(st["seed"]),
        tol=float(st["tol"]), cluster_tol=float(st["cluster_tol"]),
    )
    doc = {
        "s": form.s,
        "q": float(st["q"]),
        "failures": found.failures,
        "clusters": [
            {
                "lambda": g[0].lam,
                "multiplicity": len(g),
                "sign_changes": [p.sign_changes for p in g],
            }
            for g in found.clusters()
        ],
    }
    _emit(json_dumps(doc), st["out"])
    return EXIT_OK


def _density_csv(form, w) -> tuple[list[str], list[dict]]:
    cols = ["node", "x", "w"]
    rows = [
        {"node": i, "x": float(form.nodes[i]), "w": float(w[i])}
        for i in range(form.n)
    ]
    return cols, rows


def cmd_lane_emden(args) -> int:
    st = _settings(args)
    form = _form_from(st)
    q = float(st["q"])
    route = str(st["route"])
    if route not in ("eigen", "energy", "both"):
        raise ConfigError(f"route must be eigen|energy|both, got {route!r}")
    results = []
    if route in ("eigen", "both"):
        results.append(lane_emden_density(form, q, seed=int(st["seed"])))
    if route in ("energy", "both"):
        results.append(minimize_free_energy(form, q, seed=int(st["seed"])))
    cols, rows = _density_csv(form, results[0].w.values)
    if st["out"] and str(st["out"]).endswith(".json"):
        _emit(json_dumps({"results": [r.to_dict() for r in results]}), st["out"])
    else:
        if st["out"]:
            write_csv(st["out"], cols, rows)
        else:
            _emit(json_dumps({"results": [r.to_dict() for r in results]}), None)
    if route == "both":
        d = float(np.linalg.norm(results[0].w.values - results[1].w.values))
        scale = float(np.linalg.norm(results[0].w.values))
        if d > 1e-6 * scale:
            return EXIT_HARD_FAIL
    return EXIT_OK


def cmd_exhaustion(args) -> int:
    st = _settings(args)
    omega = parse_domain(str(st["domain"]))
    radii = _float_list(str(st["radii"]))
    seq = exhaustion_sequence(
        omega, float(st["s"]), float(st["q"]), radii,
        UniformGridSpec(float(st["h"])), center=float(st["center"]),
    )
    cols = ["radius", "node", "x", "w"]
    rows = []
    for step in seq.steps:
        for i in range(seq.ambient.n):
            rows.append(
                {
                    "radius": step.radius,
                    "node": i,
                    "x": float(seq.ambient.nodes[i]),
                    "w": float(step.ambient_values[i]),
                }
            )
    if st["out"]:
        write_csv(st["out"], cols, rows)
    for warning in seq.warnings:
        sys.stderr.write(warning + "\n")
    return EXIT_OK


def cmd_compare(args) -> int:
    st = _settings(args)
    if not st["domain1"] or not st["domain2"]:
        raise ConfigError("compare needs --domain1 and --domain2")
    report = comparison_check(
        parse_domain(str(st["domain1"])),
        parse_domain(str(st["domain2"])),
        float(st["s"]),
        float(st["q"]),
        UniformGridSpec(float(st["h"])),
    )
    _emit(json_dumps(report.to_dict()), st["out"])
    return EXIT_OK if report.passed else EXIT_HARD_FAIL


def cmd_audit(args) -> int:
    st = _settings(args)
    which = args.which
    form = _form_from(st)
    q = float(st["q"])
    samples = int(st["samples"])
    seed = int(st["seed"])
    if which == "hardy":
        report = hardy_audit(form, samples, seed)
    elif which == "picone":
        w = lane_emden_density(form, q, tol=1e-10, seed=seed)
        report = picone_lane_emden_audit(form, q, w, samples, seed)
    elif which == "holder":
        report = weighted_holder_audit(form, q, samples, seed)
    elif which == "converse-linf":
        w = lane_emden_density(form, q, tol=1e-10, seed=seed)
        report = converse_linf_bound_audit(form, q, w)
    elif which == "linf-ratio":
        results = []
        for t in (1.0, 2.0, 4.0):
            omega_t = scale_set(form.domain, t)
            form_t = assemble_form(
                omega_t, UniformGridSpec(t * float(st["h"])), form.s
            )
            solver = solve_lambda1 if q <= 2.0 else solve_lambda1_general
            results.append((f"t={t:g}", form_t, solver(form_t, q)))
        report = linf_ratio_audit(results, q, form.s)
    elif which == "hopf":
        w = lane_emden_density(form, q, tol=1e-10, seed=seed)
        fit = hopf_fit(w, form.domain, form.s)
        _emit(json_dumps(fit.to_dict()), st["out"])
        return EXIT_OK
    elif which == "subsolution":
        w = lane_emden_density(form, q, tol=1e-10, seed=seed)
        lo, hi = form.domain.hull
        x0 = float(st["x0"]) if st["x0"] is not None else 0.5 * (lo + hi)
        r = float(st["r"]) if st["r"] is not None else 0.45 * (hi - lo)
        fb = (
            float(st["f_bound"])
            if st["f_bound"] is not None
            else float(np.max(w.w.values)) ** (q - 1.0)
        )
        rep = subsolution_sup_audit(form, w.w, fb, x0, r, float(st["delta"]))
        _emit(json_dumps(rep.to_dict()), st["out"])
        return EXIT_OK
    else:  # pragma: no cover - argparse restricts choices
        raise ConfigError(f"unknown audit {which!r}")
    _emit(json_dumps(report.to_dict()), st["out"])
    return EXIT_OK if report.passed else EXIT_HARD_FAIL


def cmd_experiment(args) -> int:
    st = _settings(args)
    name = args.which
    config = ExperimentConfig(
        experiment=name,
        domain=str(st["domain"]),
        s=float(st["s"]),
        q=float(st["q"]),
        q_list=_float_list(st["q_list"]) if st["q_list"] else [],
        h=float(st["h"]),
        h_list=_float_list(st["h_list"]) if st["h_list"] else [],
        tol=float(st["tol"]),
        restarts=int(st["restarts"]),
        samples=int(st["samples"]),
        seed=int(st["seed"]),
        radii=_float_list(str(st["radii"])) if st["radii"] else [],
        center=float(st["center"]) if st["center"] is not None else None,
        q_max=float(st["q_max"]),
        steps=int(st["steps"]),
        out_json=st["out"],
        out_csv=st["out_csv"],
        plot=bool(st["plot"]),
    )
    if name == "suite":
        reports = run_audit_suite(config)
        if not config.out_json:
            sys.stdout.write(
                json_dumps({"reports": [r.to_dict() for r in reports]})
            )
        return suite_exit_code(reports)
    if name == "isolation":
        report = run_isolation(config)
        if not config.out_json:
            sys.stdout.write(json_dumps(report.to_dict()))
        return EXIT_OK if report.passed else EXIT_REPORT_ANOMALY
    if name == "qcont":
        doc = run_q_continuity(config)
        if not config.out_json:
            sys.stdout.write(json_dumps(doc))
        return EXIT_OK if doc["pass"] else EXIT_REPORT_ANOMALY
    if name == "qscan":
        doc = run_qscan_super(config)
        if not config.out_json:
            sys.stdout.write(json_dumps(doc))
        return EXIT_OK
    if name == "convergence":
        doc = run_convergence(config)
        if not config.out_json:
            sys.stdout.write(json_dumps(doc))
        return EXIT_OK if doc["decreasing"] else EXIT_REPORT_ANOMALY
    raise ConfigError(f"unknown experiment {name!r}")  # pragma: no cover


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fraceig",
        description="Nonlocal fractional-order eigenvalue and ground-state toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("assemble", help="assemble and serialize a discrete form")
    _add_common(p)
    p.set_defaults(func=cmd_assemble)

    p = sub.add_parser("lambda1", help="first constrained eigenvalue")
    _add_common(p)
    p.add_argument("--max-iter", dest="max_iter", type=int)
    p.set_defaults(func=cmd_lambda1)

    p = sub.add_parser("spectrum", help="linear (q = 2) eigenpairs")
    _add_common(p)
    p.add_argument("--k", type=int)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("search", help="random-restart critical point search")
    _add_common(p)
    p.add_argument("--restarts", type=int)
    p.add_argument("--cluster-tol", dest="cluster_tol", type=float)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("lane-emden", help="positive ground state")
    _add_common(p)
    p.add_argument("--route", choices=["eigen", "energy", "both"])
    p.set_defaults(func=cmd_lane_emden)

    p = sub.add_parser("exhaustion", help="densities of ball cuts on one grid")
    _add_common(p)
    p.add_argument("--radii")
    p.add_argument("--center", type=float)
    p.set_defaults(func=cmd_exhaustion)

    p = sub.add_parser("compare", help="nodal monotonicity under inclusion")
    _add_common(p)
    p.add_argument("--domain1")
    p.add_argument("--domain2")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("audit", help="inequality audits")
    p.add_argument(
        "which",
        choices=[
            "hardy", "picone", "holder", "hopf",
            "converse-linf", "linf-ratio", "subsolution",
        ],
    )
    _add_common(p)
    p.add_argument("--samples", type=int)
    p.add_argument("--f-bound", dest="f_bound", type=float)
    p.add_argument("--x0", type=float)
    p.add_argument("--r", type=float)
    p.add_argument("--delta", type=float)
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("experiment", help="batch experiments")
    p.add_argument(
        "which", choices=["isolation", "qcont", "qscan", "convergence", "suite"]
    )
    _add_common(p)
    p.add_argument("--q-list", dest="q_list")
    p.add_argument("--h-list", dest="h_list")
    p.add_argument("--restarts", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--radii")
    p.add_argument("--center", type=float)
    p.add_argument("--q-max", dest="q_max", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--out-csv", dest="out_csv")
    p.add_argument("--plot", action="store_true", default=None)
    p.set_defaults(func=cmd_experiment)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (ConfigError, InvalidDomainError, InvalidParameterError, InvalidScaleError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CONFIG
    except ConvergenceError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_HARD_FAIL
    except FracEigError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_HARD_FAIL


if __name__ == "__main__":
    sys.exit(main())
