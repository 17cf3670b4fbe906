"""Named batch experiments with bit-reproducible JSON/CSV outputs.

Each runner takes an :class:`ExperimentConfig`, computes a result object,
and (optionally) writes a JSON document plus a flat CSV table. All scalar
reductions go through the fixed-order summation in :mod:`fraceig.util`,
so identical configs produce byte-identical outputs.

Exit-code contract (used by the CLI): 0 all hard invariants pass,
2 hard invariant failure, 3 report-only anomaly, 64 configuration error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict

import numpy as np

from .assembly import (
    UniformGridSpec,
    assemble_form,
    lq_norm,
    energy,
)
from .audits import (
    converse_linf_bound_audit,
    hardy_audit,
    min_principle_audit,
    picone_lane_emden_audit,
    sign_lemma_audit,
    weighted_holder_audit,
)
from .domain import intersect_ball, parse_domain
from .errors import ConfigError, EmptyDomainError
from .lane_emden import comparison_check, exhaustion_sequence, lane_emden_density
from .report import AuditReport
from .solvers import (
    conjugate_exponent,
    critical_point_search,
    faber_krahn_check,
    solve_lambda1,
    solve_lambda1_general,
)
from .util import block_sum, json_dumps, map_cells, write_csv

EXIT_OK = 0
EXIT_HARD_FAIL = 2
EXIT_REPORT_ANOMALY = 3
EXIT_CONFIG = 64


@dataclass
class ExperimentConfig:
    """Parameters of one experiment run; serialized verbatim into outputs."""

    experiment: str = "suite"
    domain: str = "0,1"
    s: float = 0.5
    q: float = 1.5
    q_list: list[float] = field(default_factory=list)
    h: float = 0.005
    h_list: list[float] = field(default_factory=list)
    tol: float = 1e-8
    restarts: int = 50
    samples: int = 100
    seed: int = 1
    radii: list[float] = field(default_factory=list)
    center: float | None = None
    q_max: float = 2.4
    steps: int = 5
    out_json: str | None = None
    out_csv: str | None = None
    plot: bool = False

    def to_dict(self) -> dict:
        return asdict(self)

    def validate(self) -> None:
        try:
            parse_domain(self.domain)
        except Exception as exc:
            raise ConfigError(f"bad domain {self.domain!r}: {exc}") from exc
        if not (0.0 < self.s < 1.0):
            raise ConfigError(f"s must lie in (0, 1), got {self.s}")
        if not (self.h > 0):
            raise ConfigError(f"h must be positive, got {self.h}")
        if not (self.tol > 0):
            raise ConfigError(f"tol must be positive, got {self.tol}")


def _write_outputs(config: ExperimentConfig, doc: dict, columns, rows) -> None:
    if config.out_json:
        with open(config.out_json, "w", newline="") as fh:
            fh.write(json_dumps(doc))
    if config.out_csv:
        write_csv(config.out_csv, columns, rows)
    if config.plot and (config.out_json or config.out_csv):
        from .plots import render_experiment_figure

        stem = (config.out_json or config.out_csv).rsplit(".", 1)[0]
        render_experiment_figure(config.experiment, columns, rows, stem + ".png")


@dataclass
class IsolationReport:
    """Empirical spectral gap above the first critical value."""

    lam1: float
    clusters: list[dict]
    gap: float | None
    gap_refined: float | None
    gap_rel_diff: float | None
    delta_l1: float | None
    witness_found: bool
    all_above_change_sign: bool
    passed: bool
    params: dict

    def to_dict(self) -> dict:
        return {
            "lambda1": self.lam1,
            "clusters": self.clusters,
            "gap": self.gap,
            "gap_refined": self.gap_refined,
            "gap_rel_diff": self.gap_rel_diff,
            "delta_l1": self.delta_l1,
            "witness_found": self.witness_found,
            "all_above_change_sign": self.all_above_change_sign,
            "pass": self.passed,
            "params": dict(self.params),
        }


def _isolation_pass(form, q, restarts, seed, tol):
    """One resolution level: (lam1, points, clusters, gap, witnesses)."""
    lam1 = solve_lambda1(form, q, tol=min(tol, 1e-12)).lam
    found = critical_point_search(form, q, restarts, seed=seed, tol=tol)
    threshold = lam1 * (1.0 + 10.0 * tol)
    above = [p for p in found.points if p.lam > threshold]
    gap = min(p.lam for p in above) - lam1 if above else None
    return lam1, found, above, gap


def run_isolation(config: ExperimentConfig) -> IsolationReport:
    """Random-restart search for the first spectral gap and its stability
    under one grid refinement."""
    config.validate()
    if not (1.0 < config.q < 2.0):
        raise ConfigError(f"isolation needs q in (1, 2), got {config.q}")
    if config.restarts < 20:
        raise ConfigError(f"isolation needs >= 20 restarts, got {config.restarts}")
    omega = parse_domain(config.domain)
    form = assemble_form(omega, UniformGridSpec(config.h), config.s)
    lam1, found, above, gap = _isolation_pass(
        form, config.q, config.restarts, config.seed, config.tol
    )
    fine = assemble_form(omega, UniformGridSpec(config.h / 2.0), config.s)
    # the refinement level only has to reproduce the gap, not the full
    # cluster statistics, so fewer restarts are enough
    _, _, _, gap_refined = _isolation_pass(
        fine, config.q, max(20, config.restarts // 2), config.seed, config.tol
    )
    gap_rel_diff = None
    stable = True
    if gap is not None and gap_refined is not None:
        gap_rel_diff = abs(gap - gap_refined) / max(gap, gap_refined)
        stable = gap_rel_diff <= 0.30
    w = lane_emden_density(form, config.q)
    delta_l1 = None
    clusters = []
    for group in found.clusters():
        lams = [p.lam for p in group]
        sc = [p.sign_changes for p in group]
        clusters.append(
            {
                "lambda": min(lams),
                "lambda_max": max(lams),
                "multiplicity": len(group),
                "sign_changes_min": min(sc),
                "sign_changes_max": max(sc),
            }
        )
    for group in found.clusters():
        if all(p.lam <= lam1 * (1.0 + 10.0 * config.tol) for p in group):
            continue
        for p in group:
            scaled = p.lam ** (1.0 / (config.q - 2.0)) * p.u.values
            d = block_sum(form.measures * np.abs(scaled - w.w.values))
            delta_l1 = d if delta_l1 is None else min(delta_l1, d)
    all_sign = all(p.sign_changes >= 1 for p in above)
    witness = bool(above)
    passed = stable and all_sign and (
        (gap is not None and gap > 0 and (delta_l1 or 0.0) > 0) or not witness
    )
    report = IsolationReport(
        lam1=lam1,
        clusters=clusters,
        gap=gap,
        gap_refined=gap_refined,
        gap_rel_diff=gap_rel_diff,
        delta_l1=delta_l1,
        witness_found=witness,
        all_above_change_sign=all_sign,
        passed=passed,
        params=config.to_dict(),
    )
    rows = [
        {
            "cluster": i,
            "lambda": c["lambda"],
            "multiplicity": c["multiplicity"],
            "sign_changes_min": c["sign_changes_min"],
            "sign_changes_max": c["sign_changes_max"],
        }
        for i, c in enumerate(clusters)
    ]
    _write_outputs(
        config,
        {"config": config.to_dict(), "report": report.to_dict()},
        ["cluster", "lambda", "multiplicity", "sign_changes_min", "sign_changes_max"],
        rows,
    )
    return report


def run_q_continuity(config: ExperimentConfig) -> dict:
    """lambda_1(q) for q decreasing to 2: the error column must shrink."""
    config.validate()
    omega = parse_domain(config.domain)
    q_star = conjugate_exponent(1, config.s)
    q_list = list(config.q_list) or [3.0, 2.5, 2.25, 2.125, 2.0625]
    if any(b >= a for a, b in zip(q_list, q_list[1:])):
        raise ConfigError(f"q-list must be strictly decreasing, got {q_list}")
    for q in q_list:
        if not (2.0 < q < q_star):
            raise ConfigError(f"q={q} outside (2, {q_star})")
    form = assemble_form(omega, UniformGridSpec(config.h), config.s)
    lam2 = solve_lambda1(form, 2.0, tol=1e-12).lam

    def cell(q):
        return solve_lambda1_general(form, q, tol=1e-10, seed=config.seed).lam

    lams = map_cells(cell, q_list)
    rows = []
    for q, lam in zip(q_list, lams):
        rows.append({"q": q, "lambda1": lam, "abs_err": abs(lam - lam2)})
    errs = [r["abs_err"] for r in rows]
    monotone = all(b < a for a, b in zip(errs, errs[1:]))
    final_ok = errs[-1] <= 0.05 * lam2
    doc = {
        "config": config.to_dict(),
        "lambda1_q2": lam2,
        "rows": rows,
        "monotone_decrease": monotone,
        "final_within_5pct": final_ok,
        "pass": monotone and final_ok,
    }
    _write_outputs(config, doc, ["q", "lambda1", "abs_err"], rows)
    return doc


def run_qscan_super(config: ExperimentConfig) -> dict:
    """Super-homogeneous simplicity scan: per q, do all minimal-value
    solutions from 10 seeded restarts coincide up to sign?"""
    config.validate()
    q_star = conjugate_exponent(1, config.s)
    if not (2.0 < config.q_max < q_star):
        raise ConfigError(f"q_max must lie in (2, {q_star}), got {config.q_max}")
    if config.steps < 1:
        raise ConfigError("steps must be >= 1")
    omega = parse_domain(config.domain)
    form = assemble_form(omega, UniformGridSpec(config.h), config.s)
    qs = [2.0] + [
        2.0 + (config.q_max - 2.0) * (k + 1) / config.steps for k in range(config.steps)
    ]
    rows = []
    for q in qs:
        found = critical_point_search(form, q, restarts=10, seed=config.seed, tol=1e-10)
        if not found.points:
            rows.append({"q": q, "lambda_min": math.nan, "hits": 0,
                         "max_pairwise_l2": math.nan, "simple": False})
            continue
        lam_min = found.points[0].lam
        hits = [p for p in found.points if p.lam <= lam_min * (1.0 + 1e-8)]
        worst = 0.0
        ref = hits[0].u.values
        for p in hits[1:]:
            v = p.u.values
            d = min(
                float(np.linalg.norm(v - ref)), float(np.linalg.norm(v + ref))
            )
            worst = max(worst, d)
        rows.append(
            {
                "q": q,
                "lambda_min": lam_min,
                "hits": len(hits),
                "max_pairwise_l2": worst,
                "simple": worst <= 1e-5,
            }
        )
    prefix = 0
    for r in rows:
        if r["simple"]:
            prefix += 1
        else:
            break
    doc = {
        "config": config.to_dict(),
        "rows": rows,
        "simple_prefix": prefix,
        "q_empirical": rows[prefix - 1]["q"] if prefix else None,
    }
    _write_outputs(
        config, doc, ["q", "lambda_min", "hits", "max_pairwise_l2", "simple"], rows
    )
    return doc


def run_convergence(config: ExperimentConfig) -> dict:
    """Self-convergence of lambda_1 under grid halving, with Richardson limit."""
    config.validate()
    h_list = list(config.h_list) or [config.h * 4, config.h * 2, config.h]
    if len(h_list) < 3:
        raise ConfigError(f"need at least 3 grid levels, got {len(h_list)}")
    for a, b in zip(h_list, h_list[1:]):
        if abs(a / b - 2.0) > 1e-9:
            raise ConfigError(f"h-list must halve at each level, got {h_list}")
    omega = parse_domain(config.domain)

    def cell(h):
        form = assemble_form(omega, UniformGridSpec(h), config.s)
        if config.q <= 2.0:
            return solve_lambda1(form, config.q, tol=1e-12).lam
        return solve_lambda1_general(form, config.q, tol=1e-10).lam

    lams = map_cells(cell, h_list)
    diffs = [abs(a - b) for a, b in zip(lams, lams[1:])]
    order = (
        math.log2(diffs[-2] / diffs[-1]) if diffs[-1] > 0 and diffs[-2] > 0 else None
    )
    richardson = (
        lams[-1] + (lams[-1] - lams[-2]) / (2.0**order - 1.0)
        if order is not None and order > 0
        else lams[-1]
    )
    rows = []
    for i, (h, lam) in enumerate(zip(h_list, lams)):
        rows.append(
            {"h": h, "lambda1": lam, "diff_to_next": diffs[i] if i < len(diffs) else 0.0}
        )
    doc = {
        "config": config.to_dict(),
        "rows": rows,
        "observed_order": order,
        "richardson": richardson,
        "decreasing": all(b < a for a, b in zip(diffs, diffs[1:])),
    }
    _write_outputs(config, doc, ["h", "lambda1", "diff_to_next"], rows)
    return doc


def run_audit_suite(config: ExperimentConfig) -> list[AuditReport]:
    """The full hard-invariant battery on one configuration, fixed order."""
    config.validate()
    if not (1.0 < config.q < 2.0):
        raise ConfigError(f"suite needs q in (1, 2), got {config.q}")
    omega = parse_domain(config.domain)
    form = assemble_form(omega, UniformGridSpec(config.h), config.s)
    w = lane_emden_density(form, config.q, tol=1e-10)
    reports: list[AuditReport] = []
    reports.append(sign_lemma_audit(form, config.samples, config.seed))
    reports.append(min_principle_audit(form, min(config.samples, 20), config.seed))
    reports.append(hardy_audit(form, config.samples, config.seed))
    reports.append(picone_lane_emden_audit(form, config.q, w, config.samples, config.seed))
    reports.append(weighted_holder_audit(form, config.q, config.samples, config.seed))
    reports.append(converse_linf_bound_audit(form, config.q, w))

    lo, hi = omega.hull
    center = config.center if config.center is not None else 0.5 * (lo + hi)
    try:
        inner = intersect_ball(omega, 0.3 * omega.diameter, center)
        reports.append(
            comparison_check(inner, omega, config.s, config.q, UniformGridSpec(config.h))
        )
    except EmptyDomainError:
        pass
    radii = list(config.radii) or [
        0.25 * omega.diameter, 0.5 * omega.diameter, omega.diameter
    ]
    seq = exhaustion_sequence(
        omega, config.s, config.q, radii, UniformGridSpec(config.h), center=center
    )
    worst_mono = math.inf
    for a, b in zip(seq.steps, seq.steps[1:]):
        worst_mono = min(worst_mono, float(np.min(b.ambient_values - a.ambient_values)))
    slack = 1e-8 * float(np.max(seq.steps[-1].ambient_values)) if seq.steps else 0.0
    reports.append(
        AuditReport(
            name="exhaustion_monotone",
            samples=len(seq.steps),
            worst_margin=worst_mono if len(seq.steps) > 1 else 0.0,
            tolerance=slack,
            params={"domain": config.domain, "s": config.s, "q": config.q,
                    "radii": radii, "center": center},
        )
    )
    reports.append(faber_krahn_check(omega, config.s, UniformGridSpec(config.h)))

    # defining identities of the ground state
    lam1 = solve_lambda1(form, config.q, tol=1e-12).lam
    norm_err = abs(
        lq_norm(form, w.w, config.q) - lam1 ** (1.0 / (config.q - 2.0))
    ) / lam1 ** (1.0 / (config.q - 2.0))
    mass = block_sum(form.measures * w.w.values**config.q)
    energy_err = abs(energy(form, w.w) - mass) / mass
    reports.append(
        AuditReport(
            name="normalization_identity",
            samples=2,
            worst_margin=-max(norm_err, energy_err),
            tolerance=1e-8,
            params={"domain": config.domain, "s": config.s, "q": config.q,
                    "lambda1": lam1},
        )
    )
    rows = [
        {
            "name": r.name,
            "samples": r.samples,
            "worst_margin": r.worst_margin,
            "tolerance": r.tolerance,
            "pass": r.passed,
        }
        for r in reports
    ]
    doc = {"config": config.to_dict(), "reports": [r.to_dict() for r in reports]}
    _write_outputs(
        config, doc, ["name", "samples", "worst_margin", "tolerance", "pass"], rows
    )
    return reports


def suite_exit_code(reports: list[AuditReport]) -> int:
    return EXIT_OK if all(r.passed for r in reports) else EXIT_HARD_FAIL


RUNNERS = {
    "isolation": run_isolation,
    "qcont": run_q_continuity,
    "qscan": run_qscan_super,
    "convergence": run_convergence,
    "suite": run_audit_suite,
}


def run_experiment(config: ExperimentConfig):
    if config.experiment not in RUNNERS:
        raise ConfigError(
            f"unknown experiment {config.experiment!r}; choose from {sorted(RUNNERS)}"
        )
    return RUNNERS[config.experiment](config)
