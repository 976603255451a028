"""Four-class evaluation: per-class correct counts and Se/Sp/Sc.

Sensitivity is the pooled recall over the three abnormal classes, specificity
the recall of the normal class, and the score their average. Classes with no
ground-truth samples leave the affected rates (and then the score) absent
rather than defaulting to 0 or 100.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfig

CLASSES = ("normal", "crackle", "wheeze", "both")
ABNORMAL = ("crackle", "wheeze", "both")


def round2(x: float) -> float:
    """Half-away-from-zero rounding to two decimals, for display."""
    return math.floor(abs(x) * 100.0 + 0.5) / 100.0 * (1 if x >= 0 else -1)


@dataclass(frozen=True)
class MetricsReport:
    correct: dict[str, int]  # samples correctly classified, per true class
    totals: dict[str, int]  # ground-truth samples, per class
    se: float | None  # pooled abnormal recall, percent
    sp: float | None  # normal recall, percent
    sc: float | None  # (se + sp) / 2

    def to_dict(self) -> dict:
        return {
            "correct": dict(self.correct),
            "totals": dict(self.totals),
            "se": None if self.se is None else round2(self.se),
            "sp": None if self.sp is None else round2(self.sp),
            "sc": None if self.sc is None else round2(self.sc),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def format_table(self) -> str:
        lines = [f"{'class':>8} {'correct':>8} {'total':>8}"]
        for cls in CLASSES:
            lines.append(f"{cls:>8} {self.correct[cls]:>8} {self.totals[cls]:>8}")
        fmt = lambda v: "   n/a" if v is None else f"{round2(v):6.2f}"
        lines.append(f"Se={fmt(self.se)}  Sp={fmt(self.sp)}  Sc={fmt(self.sc)}")
        return "\n".join(lines)


def _check_label(label: str) -> str:
    if label not in CLASSES:
        raise InvalidConfig(f"unknown class {label!r}")
    return label


def score(pairs) -> MetricsReport:
    """Aggregate (true, predicted) label pairs into the evaluation report."""
    correct = {cls: 0 for cls in CLASSES}
    totals = {cls: 0 for cls in CLASSES}
    for true, pred in pairs:
        _check_label(true)
        _check_label(pred)
        totals[true] += 1
        if true == pred:
            correct[true] += 1

    n_abnormal = sum(totals[c] for c in ABNORMAL)
    c_abnormal = sum(correct[c] for c in ABNORMAL)
    se = 100.0 * c_abnormal / n_abnormal if n_abnormal else None
    sp = 100.0 * correct["normal"] / totals["normal"] if totals["normal"] else None
    sc = (se + sp) / 2.0 if se is not None and sp is not None else None
    return MetricsReport(correct=correct, totals=totals, se=se, sp=sp, sc=sc)


def confusion(pairs) -> np.ndarray:
    """4x4 count matrix; rows are true classes, columns predictions."""
    index = {cls: i for i, cls in enumerate(CLASSES)}
    matrix = np.zeros((4, 4), dtype=np.int64)
    for true, pred in pairs:
        matrix[index[_check_label(true)], index[_check_label(pred)]] += 1
    return matrix


def merge_reports(a: MetricsReport, b: MetricsReport) -> MetricsReport:
    """Add disjoint partial counts and recompute the rates from the sums."""
    correct = {cls: a.correct[cls] + b.correct[cls] for cls in CLASSES}
    totals = {cls: a.totals[cls] + b.totals[cls] for cls in CLASSES}
    n_abnormal = sum(totals[c] for c in ABNORMAL)
    c_abnormal = sum(correct[c] for c in ABNORMAL)
    se = 100.0 * c_abnormal / n_abnormal if n_abnormal else None
    sp = 100.0 * correct["normal"] / totals["normal"] if totals["normal"] else None
    sc = (se + sp) / 2.0 if se is not None and sp is not None else None
    return MetricsReport(correct=correct, totals=totals, se=se, sp=sp, sc=sc)
