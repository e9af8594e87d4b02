"""Deterministic rendering of results for the command-line front end.

Two formats: "machine" is canonical JSON (sorted keys, two-space indent,
NaN and infinities mapped to null) and "table" is an aligned plain-text
view of the same content. Neither embeds timestamps, hostnames, worker
counts, or anything else that varies between identical runs; byte-identical
inputs and seeds must give byte-identical reports.
"""

from __future__ import annotations

import dataclasses
import json
import math
from typing import Any

import numpy as np

from .blb import BlbResult
from .chunkglm import GlmFit
from .dnc import CombinedFit
from .onlinesel import CriterionReport, mask_label
from .simharness import CRITERION_NAMES, SimScenario, SimTally, compute_snr, snr_note

__all__ = [
    "machine_report",
    "render_table",
    "criteria_payload",
    "criteria_table",
    "glm_payload",
    "glm_table",
    "blb_payload",
    "blb_table",
    "dnc_payload",
    "dnc_table",
    "sim_payload",
    "sim_table",
    "airline_payload",
    "airline_table",
]


def _jsonable(obj: Any) -> Any:
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return _jsonable(dataclasses.asdict(obj))
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        obj = float(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def machine_report(payload: dict) -> str:
    return json.dumps(_jsonable(payload), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _fmt(value: Any) -> str:
    if value is None:
        return "-"
    if isinstance(value, (float, np.floating)):
        return "-" if not math.isfinite(value) else f"{value:.6g}"
    return str(value)


def render_table(headers: list[str], rows: list[list[Any]]) -> str:
    cells = [[_fmt(v) for v in row] for row in rows]
    widths = [len(h) for h in headers]
    for row in cells:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    lines = [
        "  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)).rstrip(),
        "  ".join("-" * w for w in widths),
    ]
    for row in cells:
        padded = [
            cell.ljust(widths[i]) if i == 0 else cell.rjust(widths[i])
            for i, cell in enumerate(row)
        ]
        lines.append("  ".join(padded).rstrip())
    return "\n".join(lines) + "\n"


def criteria_payload(
    report: CriterionReport,
    extra: dict | None = None,
    names: list[str] | None = None,
    betas: dict[int, object] | None = None,
) -> dict:
    models = []
    for mask in report.masks:
        entry = {
            "mask": mask,
            "label": mask_label(mask, report.p, names),
            "aic": report.aic[mask],
            "bic": report.bic[mask],
            "dic": report.dic[mask],
        }
        if betas is not None:
            entry["beta"] = betas[mask]
        models.append(entry)
    payload = {
        "kind": "criteria",
        "p": report.p,
        "n": report.n,
        "blocks": report.blocks,
        "models": models,
        "best": {
            "aic": mask_label(report.best_aic, report.p, names),
            "bic": mask_label(report.best_bic, report.p, names),
            "dic": mask_label(report.best_dic, report.p, names),
        },
        "degenerate": [mask_label(m, report.p, names) for m in report.degenerate],
    }
    if extra:
        payload.update(extra)
    return payload


def criteria_table(report: CriterionReport, names: list[str] | None = None) -> str:
    rows = [
        [mask_label(mask, report.p, names), report.aic[mask], report.bic[mask],
         report.dic[mask]]
        for mask in report.masks
    ]
    best = (
        f"best: aic={mask_label(report.best_aic, report.p, names)}"
        f"  bic={mask_label(report.best_bic, report.p, names)}"
        f"  dic={mask_label(report.best_dic, report.p, names)}\n"
    )
    head = f"n={report.n}  blocks={report.blocks}\n"
    return head + render_table(["model", "aic", "bic", "dic"], rows) + best


def glm_payload(fit: GlmFit, family: str, columns: list[str], extra: dict | None = None) -> dict:
    payload = {
        "kind": "glm",
        "family": family,
        "columns": columns,
        "beta": fit.beta,
        "se": fit.se,
        "deviance": fit.deviance,
        "iterations": fit.iterations,
        "n": fit.n,
        "converged": fit.converged,
        "rank_deficient": fit.rank_deficient,
        "n_rejected": fit.n_rejected,
    }
    if extra:
        payload.update(extra)
    return payload


def glm_table(fit: GlmFit, family: str, columns: list[str]) -> str:
    rows = [
        [name, fit.beta[i], fit.se[i]] for i, name in enumerate(columns)
    ]
    head = (
        f"family={family}  n={fit.n}  iterations={fit.iterations}"
        f"  deviance={_fmt(fit.deviance)}  converged={str(fit.converged).lower()}\n"
    )
    tail = f"rejected_rows={fit.n_rejected}\n" if fit.n_rejected else ""
    return head + render_table(["term", "estimate", "se"], rows) + tail


def blb_payload(result: BlbResult, columns: list[str], extra: dict | None = None) -> dict:
    payload = {
        "kind": "blb",
        "columns": columns,
        "point": result.point,
        "sd": result.sd,
        "ci_lo": result.ci_lo,
        "ci_hi": result.ci_hi,
        "m_used": result.m_used,
        "s_used": result.s_used,
        "r_used": result.r_used,
    }
    if extra:
        payload.update(extra)
    return payload


def blb_table(result: BlbResult, columns: list[str]) -> str:
    rows = [
        [name, result.point[i], result.sd[i], result.ci_lo[i], result.ci_hi[i]]
        for i, name in enumerate(columns)
    ]
    head = f"m={result.m_used}  s={result.s_used}  r={result.r_used}\n"
    return head + render_table(["term", "estimate", "sd", "ci_lo", "ci_hi"], rows)


def dnc_payload(fit: CombinedFit, columns: list[str], extra: dict | None = None) -> dict:
    payload = {
        "kind": "dnc",
        "columns": columns,
        "beta": fit.beta,
        "se": np.sqrt(np.clip(np.diag(fit.covariance), 0.0, None)),
        "n": fit.n,
        "k_blocks": fit.k_blocks,
    }
    if extra:
        payload.update(extra)
    return payload


def dnc_table(fit: CombinedFit, columns: list[str]) -> str:
    se = np.sqrt(np.clip(np.diag(fit.covariance), 0.0, None))
    rows = [[name, fit.beta[i], se[i]] for i, name in enumerate(columns)]
    head = f"n={fit.n}  blocks={fit.k_blocks}\n"
    return head + render_table(["term", "estimate", "se"], rows)


def sim_payload(scenario: SimScenario, tally: SimTally) -> dict:
    pct = tally.percentages()
    note = snr_note(scenario)
    payload = {
        "kind": "simulate",
        "scenario": {
            "beta_true": list(scenario.beta_true),
            "dependence": scenario.dependence,
            "noise_var": scenario.noise_var,
            "n_k": scenario.n_k,
            "checkpoints": list(scenario.checkpoints),
            "replicates": scenario.replicates,
            "seed": scenario.seed,
        },
        "snr": compute_snr(scenario),
        "selection_pct": {
            crit: {
                f"k{cp}": {
                    mask_label(mask, 4): pct[i, j, mask] for mask in range(16)
                }
                for i, cp in enumerate(tally.checkpoints)
            }
            for j, crit in enumerate(CRITERION_NAMES)
        },
    }
    if note:
        payload["snr_note"] = note
    return payload


def sim_table(scenario: SimScenario, tally: SimTally) -> str:
    pct = tally.percentages()
    headers = ["model"]
    for crit in CRITERION_NAMES:
        for cp in tally.checkpoints:
            headers.append(f"{crit}@k{cp}")
    rows = []
    for mask in range(16):
        row: list[Any] = [mask_label(mask, 4)]
        for j in range(3):
            for i in range(len(tally.checkpoints)):
                row.append(pct[i, j, mask])
        rows.append(row)
    head = (
        f"beta={list(scenario.beta_true)}  dependence={scenario.dependence}"
        f"  replicates={scenario.replicates}  seed={scenario.seed}"
        f"  snr={compute_snr(scenario):.4g}\n"
    )
    note = snr_note(scenario)
    tail = f"note: {note}\n" if note else ""
    return head + render_table(headers, rows) + tail


def airline_payload(summary, out_data: str) -> dict:
    return {
        "kind": "airline-prep",
        "rows_read": summary.n_read,
        "rows_written": summary.n_written,
        "skips": dict(sorted(summary.skips.items())),
        "output": out_data,
    }


def airline_table(summary, out_data: str) -> str:
    rows = [[reason, count] for reason, count in sorted(summary.skips.items())]
    head = (
        f"read={summary.n_read}  written={summary.n_written}  output={out_data}\n"
    )
    if not rows:
        return head
    return head + render_table(["skip_reason", "count"], rows)
