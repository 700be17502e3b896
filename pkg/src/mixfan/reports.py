"""Text tables and CSV emission for search, evaluation, and experiment results.

CSV outputs start with ``#``-prefixed header lines echoing every effective
setting, so any artifact can be reproduced from its own file.
"""

from __future__ import annotations

from .metrics import EvalReport
from .protocol import ComparisonReport, ExperimentCell
from .selection import SearchResult


def header_lines(settings: dict) -> list[str]:
    return [f"# {key}: {value}" for key, value in settings.items()]


def _fmt(x, digits: int = 6) -> str:
    if x is None:
        return "-"
    if isinstance(x, float):
        return f"{x:.{digits}g}"
    return str(x)


def _aligned(rows: list[list[str]]) -> str:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return "\n".join("  ".join(cell.rjust(w) for cell, w in zip(r, widths)) for r in rows)


def selection_table_text(sr: SearchResult) -> str:
    rows = [["r_h", "loglik", "d", "penalty", "value", ""]]
    for c in sr.candidates:
        if c.report is None:
            rows.append([str(c.r_h), "-", "-", "-", "-", f"failed: {c.error}"])
            continue
        mark = "<- selected" if c.r_h == sr.selected_r_h else ""
        rows.append(
            [
                str(c.r_h),
                _fmt(c.report.loglik, 10),
                str(c.report.d),
                _fmt(c.report.penalty, 10),
                _fmt(c.report.value, 10),
                mark,
            ]
        )
    return _aligned(rows)


def selection_table_csv(sr: SearchResult, settings: dict) -> str:
    lines = header_lines(settings)
    lines.append("r_h,loglik,d,penalty,value,selected,error")
    for c in sr.candidates:
        sel = "1" if c.r_h == sr.selected_r_h else "0"
        if c.report is None:
            lines.append(f"{c.r_h},,,,,{sel},{c.error}")
        else:
            r = c.report
            lines.append(f"{c.r_h},{r.loglik!r},{r.d},{r.penalty!r},{r.value!r},{sel},")
    return "\n".join(lines) + "\n"


def eval_report_text(rep: EvalReport) -> str:
    lines = [
        f"cases:    {rep.n}",
        f"accuracy: {rep.accuracy:.6g}",
        f"ce:       {rep.ce:.6g}",
    ]
    if rep.auc is not None:
        lines.append(f"auc:      {rep.auc:.6g}")
    else:
        lines.append("auc:      not computed (defined for binary class variables only)")
    if rep.per_fold:
        rows = [["fold", "n", "accuracy", "ce", "r_h"]]
        for f in rep.per_fold:
            rows.append([str(f.fold), str(f.n), _fmt(f.accuracy), _fmt(f.ce), str(f.selected_r_h)])
        lines.append("")
        lines.append(_aligned(rows))
    return "\n".join(lines) + "\n"


def eval_report_csv(rep: EvalReport, settings: dict) -> str:
    lines = header_lines(settings)
    lines.append(f"# pooled_accuracy: {rep.accuracy!r}")
    lines.append(f"# pooled_ce: {rep.ce!r}")
    lines.append(f"# pooled_auc: {rep.auc!r}" if rep.auc is not None else "# pooled_auc: undefined (non-binary class)")
    lines.append("fold,n,accuracy,ce,selected_r_h")
    for f in rep.per_fold:
        lines.append(f"{f.fold},{f.n},{f.accuracy!r},{f.ce!r},{f.selected_r_h}")
    return "\n".join(lines) + "\n"


def experiment_csv(cells: tuple[ExperimentCell, ...], settings: dict) -> str:
    lines = header_lines(settings)
    lines.append("train_size,replication,seed,status,true_r_h,selected_r_h,structural_diff,accuracy,auc,ce")
    for c in cells:
        fields = [
            str(c.train_size),
            str(c.replication),
            str(c.seed),
            c.status.replace(",", ";"),
            str(c.true_r_h),
            "" if c.selected_r_h is None else str(c.selected_r_h),
            "" if c.structural_diff is None else str(c.structural_diff),
            "" if c.accuracy is None else repr(c.accuracy),
            "" if c.auc is None else repr(c.auc),
            "" if c.ce is None else repr(c.ce),
        ]
        lines.append(",".join(fields))
    return "\n".join(lines) + "\n"


def scatter_csv(rows: list[tuple[str, float, float]], metric: str, settings: dict) -> str:
    """Plot-ready pairs of one metric for two models across datasets."""
    lines = header_lines(settings)
    lines.append(f"dataset,model_a_{metric},model_b_{metric}")
    for name, a, b in rows:
        lines.append(f"{name},{a!r},{b!r}")
    return "\n".join(lines) + "\n"


def comparison_text(rep: ComparisonReport) -> str:
    rows = [["dataset", "n", "acc_a", "acc_b", "ce_a", "ce_b", "z", "p"]]
    for r in rep.rows:
        rows.append(
            [r.name, str(r.n), _fmt(r.acc_a), _fmt(r.acc_b), _fmt(r.ce_a), _fmt(r.ce_b), _fmt(r.mcnemar_z, 4), _fmt(r.mcnemar_p, 4)]
        )
    lines = [_aligned(rows), ""]
    lines.append("z column: signed normal-approximation statistic of the per-dataset")
    lines.append("paired-correctness test (positive favors model a).")
    mag = rep.accuracy_magnitude
    sig = rep.accuracy_significance
    ce = rep.ce_comparison
    lines.append(f"accuracy magnitude  ({mag.method}): statistic={mag.statistic:.6g} p={mag.p_value:.6g}")
    lines.append(f"accuracy significance ({sig.method}): statistic={sig.statistic:.6g} p={sig.p_value:.6g}")
    lines.append(f"ce comparison       ({ce.method}): statistic={ce.statistic:.6g} p={ce.p_value:.6g}")
    return "\n".join(lines) + "\n"
