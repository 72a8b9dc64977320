"""Run-report assembly.

One run produces one JSON-serializable dict. Sections appear only when the
corresponding feature ran: no bootstrap means no "bootstrap" key and no
se/ci/significant fields, no cyclic section means no "cyclic" key. The text
renderer consumes the same dict so both outputs always agree; text rounds to
3 decimals, JSON keeps full precision.
"""

from __future__ import annotations

from typing import Mapping

from .assessment import ReliabilityReport
from .cyclic import CyclicFit, TestResult
from .dataset import PreparedData
from .modelspec import ModelSpec, model_document
from .plscore import PlsFit
from .resample import BootstrapResult, CoefficientStats

TOOL_NAME = "plscycle"


def _coef_entry(estimate: float, stats: CoefficientStats | None) -> dict:
    entry: dict = {"estimate": float(estimate)}
    if stats is not None:
        entry["se"] = float(stats.se)
        entry["ci"] = [float(stats.ci[0]), float(stats.ci[1])]
        entry["significant"] = bool(stats.significant)
    return entry


def _fit_section(
    fit: PlsFit,
    block_columns: Mapping[str, tuple[str, ...]],
    path_stats: Mapping[tuple[str, str], CoefficientStats] | None,
    loading_stats: Mapping[tuple[str, str], CoefficientStats] | None,
) -> dict:
    weights = {
        name: {
            col: float(w)
            for col, w in zip(block_columns[name], fit.weights[name])
        }
        for name in fit.constructs
    }
    loadings = {}
    for name in fit.constructs:
        row = {}
        for col, lam in zip(block_columns[name], fit.loadings[name]):
            stats = loading_stats.get((name, col)) if loading_stats else None
            row[col] = _coef_entry(float(lam), stats)
        loadings[name] = row
    paths = []
    for (source, target), value in fit.paths.items():
        stats = path_stats.get((source, target)) if path_stats else None
        paths.append(
            {"source": source, "target": target, **_coef_entry(value, stats)}
        )
    return {
        "converged": bool(fit.converged),
        "iterations": int(fit.iterations),
        # intercepts of the standardized measurement and structural equations
        "location_parameters": 0.0,
        "weights": weights,
        "loadings": loadings,
        "paths": paths,
        "r_squared": {k: float(v) for k, v in fit.r_squared.items()},
    }


def _assessment_section(report: ReliabilityReport) -> dict:
    constructs = []
    for row in report.constructs:
        entry: dict = {"construct": row.construct, "mode": row.mode}
        for field in ("alpha", "composite_reliability", "dijkstra_rho_a", "ave", "eig1", "eig2"):
            value = getattr(row, field)
            if value is not None:
                entry[field] = float(value)
        entry["flags"] = dict(row.flags)
        indicators = []
        for ind in row.indicators:
            item: dict = {"indicator": ind.indicator, "loading": float(ind.loading)}
            if ind.ci is not None:
                item["ci"] = [float(ind.ci[0]), float(ind.ci[1])]
            item["flag"] = ind.flag
            indicators.append(item)
        entry["indicators"] = indicators
        constructs.append(entry)
    return {"constructs": constructs}


def _pair_entries(
    cyc: CyclicFit,
    boot: BootstrapResult | None,
    tests: Mapping[tuple[str, str], TestResult | str] | None,
) -> list[dict]:
    pairs = []
    for (source, target), beta_ce in cyc.cyclic_paths.items():
        entry: dict = {"target": target, "beta_ce": float(beta_ce)}
        if boot is not None and (source, target) in boot.cyclic_paths:
            entry["sigma_ce"] = float(boot.cyclic_paths[(source, target)].se)
        beta_se = cyc.paired_sequential[(source, target)]
        outcome = tests.get((source, target)) if tests else None
        if beta_se is None or isinstance(outcome, str):
            entry["skipped_reason"] = (
                outcome
                if isinstance(outcome, str)
                else f"no direct sequential path {target} -> {source}"
            )
            pairs.append(entry)
            continue
        entry["beta_se"] = float(beta_se)
        entry["abs_diff"] = abs(float(beta_se) - float(beta_ce))
        if boot is not None and (target, source) in boot.paths:
            entry["sigma_se"] = float(boot.paths[(target, source)].se)
        if outcome is not None:
            entry.update(
                {
                    "t": float(outcome.t_statistic),
                    "df": int(outcome.df),
                    "p": float(outcome.p_value),
                    "direction": outcome.direction,
                    "decision": outcome.decision,
                }
            )
        pairs.append(entry)
    return pairs


def build_run_report(
    spec: ModelSpec,
    data: PreparedData,
    fit: PlsFit,
    *,
    version: str,
    seed: int,
    settings: Mapping[str, object],
    assessment: ReliabilityReport | None = None,
    boot: BootstrapResult | None = None,
    cyclic: CyclicFit | None = None,
    tests: Mapping[tuple[str, str], TestResult | str] | None = None,
) -> dict:
    """Assemble the run-report dict; keys for features that did not run are absent."""
    block_columns = {
        name: data.columns[lo:hi] for name, (lo, hi) in data.block_index.items()
    }
    report: dict = {
        "tool": {"name": TOOL_NAME, "version": version},
        "seed": int(seed),
        "model": model_document(spec),
        "settings": dict(settings),
        "data": {
            "n_rows": int(data.n_input),
            "n_effective": int(data.n_effective),
            "missing_policy": data.missing_policy,
            "missing_cells": {k: int(v) for k, v in data.missing_cells.items()},
        },
        "fit": _fit_section(
            fit,
            block_columns,
            boot.paths if boot else None,
            boot.loadings if boot else None,
        ),
    }
    if data.mca_inertia_share:
        report["mca"] = {
            "inertia_shares": {
                k: float(v) for k, v in data.mca_inertia_share.items()
            }
        }
    if assessment is not None:
        report["assessment"] = _assessment_section(assessment)
    if boot is not None:
        report["bootstrap"] = {
            "requested": int(boot.b_requested),
            "effective": int(boot.b_effective),
            "failures": int(boot.failures),
            "level": float(boot.level),
            "seed": int(boot.seed),
        }
    if cyclic is not None:
        source = cyclic.step2_spec.paths[0].source
        step2_columns = {source: (cyclic.score_column,)}
        for name in cyclic.step2_spec.block_names():
            if name != source:
                step2_columns[name] = block_columns[name]
        report["cyclic"] = {
            "source": source,
            "score_column": cyclic.score_column,
            "targets": [p.target for p in cyclic.step2_spec.paths],
            "step2": _fit_section(
                cyclic.step2_fit,
                step2_columns,
                boot.cyclic_paths if boot else None,
                None,
            ),
            "pairs": _pair_entries(cyclic, boot, tests),
        }
    return report


def _fmt(value: object, width: int = 0) -> str:
    if isinstance(value, bool):
        text = "yes" if value else "no"
    elif isinstance(value, float):
        text = f"{value:.3f}"
    else:
        text = str(value)
    return text.ljust(width) if width else text


def _table(header: list[str], rows: list[list[object]]) -> list[str]:
    cells = [[_fmt(v) for v in row] for row in rows]
    widths = [
        max(len(header[j]), *(len(r[j]) for r in cells)) if cells else len(header[j])
        for j in range(len(header))
    ]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths))]
    for row in cells:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
    return lines


def render_text(report: dict) -> str:
    """Aligned-text view of a run report, 3-decimal rounding throughout."""
    out: list[str] = []
    tool = report["tool"]
    out.append(f"{tool['name']} {tool['version']}  (seed {report['seed']})")
    data = report["data"]
    out.append(
        f"rows read: {data['n_rows']}, rows used: {data['n_effective']}, "
        f"missing policy: {data['missing_policy']}"
    )
    out.append("")

    fit = report["fit"]
    status = "converged" if fit["converged"] else "did not converge"
    out.append(f"fit: {status} after {fit['iterations']} iterations")
    out.append("")

    rows = []
    for name, weights in fit["weights"].items():
        for col in weights:
            rows.append(
                [name, col, weights[col], fit["loadings"][name][col]["estimate"]]
            )
    out.extend(_table(["Construct", "Indicator", "Weight", "Loading"], rows))
    out.append("")

    has_ci = any("ci" in p for p in fit["paths"])
    header = ["Path", "Estimate"] + (["SE", "CI low", "CI high", "Sig"] if has_ci else [])
    rows = []
    for p in fit["paths"]:
        row: list[object] = [f"{p['source']} -> {p['target']}", p["estimate"]]
        if has_ci:
            row += [p["se"], p["ci"][0], p["ci"][1], p["significant"]]
        rows.append(row)
    if rows:
        out.extend(_table(header, rows))
        out.append("")
        out.extend(_table(["Construct", "R-squared"], list(map(list, fit["r_squared"].items()))))
        out.append("")

    if "mca" in report:
        shares = report["mca"]["inertia_shares"]
        out.extend(_table(["Construct", "First-dimension inertia share"], list(map(list, shares.items()))))
        out.append("")

    if "assessment" in report:
        rows = []
        for c in report["assessment"]["constructs"]:
            rows.append(
                [
                    c["construct"],
                    c["mode"],
                    c.get("alpha", "-"),
                    c.get("composite_reliability", "-"),
                    c.get("dijkstra_rho_a", "-"),
                    c.get("ave", "-"),
                    c["flags"]["unidimensionality"],
                ]
            )
        out.extend(
            _table(
                ["Construct", "Mode", "Alpha", "CR", "rho_A", "AVE", "Dimensionality"],
                rows,
            )
        )
        out.append("")

    if "bootstrap" in report:
        b = report["bootstrap"]
        out.append(
            f"bootstrap: {b['effective']}/{b['requested']} replicates "
            f"({b['failures']} failed), level {b['level']:g}"
        )
        out.append("")

    if "cyclic" in report:
        cyc = report["cyclic"]
        out.append(f"cyclic source: {cyc['source']} (step-1 score column {cyc['score_column']})")
        rows = []
        notes: list[str] = []
        for pair in cyc["pairs"]:
            label = f"{pair['target']} <=> {cyc['source']}"
            if "skipped_reason" in pair:
                notes.append(f"{label}: skipped ({pair['skipped_reason']})")
                continue
            rows.append(
                [
                    label,
                    pair["beta_se"],
                    pair["beta_ce"],
                    pair["abs_diff"],
                    pair.get("t", "-"),
                    pair.get("p", "-"),
                ]
            )
            if "decision" in pair:
                notes.append(
                    f"{label}: {pair['decision']} "
                    f"(direction {pair['direction']}, df {pair['df']})"
                )
        if rows:
            out.extend(
                _table(
                    ["Effects", "SE", "CE", "Abs (diff.)", "t-statistic", "p-value"],
                    rows,
                )
            )
        out.extend(notes)
        out.append("")

    return "\n".join(out).rstrip() + "\n"
