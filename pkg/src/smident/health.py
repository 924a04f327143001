"""Accept/reject metric for stage-1 selections and threshold sweeps.

A selection passes when the selector gap is wide enough and the
remaining (weighted) selector losses are small: delta_b >= 0.31,
L_norm <= 0.2, L_std <= 4.1 by default.  Comparisons are inclusive on
the accept side.  The selector-gap/std/norm triple is what separates
false positives; the residual magnitude and the remaining losses are
recorded for threshold studies but do not enter the default verdict.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence


class HealthCriterion(Enum):
    DELTA_B = "delta_b"
    LOSS_NORM = "loss_norm"
    LOSS_STD = "loss_std"


@dataclass(frozen=True)
class HealthThresholds:
    min_delta_b: float = 0.31
    max_loss_norm: float = 0.2
    max_loss_std: float = 4.1

    def __post_init__(self):
        if not 0.0 <= self.min_delta_b <= 1.0:
            raise ValueError("min_delta_b must be in [0, 1]")
        if self.max_loss_norm < 0.0 or self.max_loss_std < 0.0:
            raise ValueError("loss caps must be >= 0")


@dataclass
class HealthVerdict:
    accepted: bool
    failed_criteria: list[HealthCriterion] = field(default_factory=list)


def evaluate_values(delta_b: float, loss_norm: float, loss_std: float,
                    thresholds: HealthThresholds | None = None) -> HealthVerdict:
    """Verdict from the three decision parameters."""
    thr = thresholds or HealthThresholds()
    failed = []
    if delta_b < thr.min_delta_b:
        failed.append(HealthCriterion.DELTA_B)
    if loss_norm > thr.max_loss_norm:
        failed.append(HealthCriterion.LOSS_NORM)
    if loss_std > thr.max_loss_std:
        failed.append(HealthCriterion.LOSS_STD)
    return HealthVerdict(accepted=not failed, failed_criteria=failed)


def evaluate(result, thresholds: HealthThresholds | None = None) -> HealthVerdict:
    """Verdict for a Stage1Result (or anything with the three fields)."""
    return evaluate_values(result.delta_b, result.loss_norm, result.loss_std, thresholds)


@dataclass
class ThresholdGrid:
    """Cartesian grid of candidate thresholds for precision/recall studies."""

    min_delta_b: Sequence[float]
    max_loss_std: Sequence[float]
    max_loss_norm: Sequence[float]

    def points(self) -> Iterable[HealthThresholds]:
        for db, ls, ln in itertools.product(self.min_delta_b, self.max_loss_std,
                                            self.max_loss_norm):
            yield HealthThresholds(min_delta_b=db, max_loss_norm=ln, max_loss_std=ls)


def precision_recall_sweep(results: Sequence[tuple], grid: ThresholdGrid) -> list[dict]:
    """Confusion counts per grid point over ground-truth-labeled results.

    ``results`` holds ``(stage1_result, true_kind)`` pairs.  A result is a
    true positive when accepted and correct, a false positive when
    accepted and wrong, a false negative when rejected although correct.
    Empty denominators report precision 1.0 (nothing accepted) and
    recall 0.0 (nothing correct).
    """
    if not results:
        raise ValueError("results must be non-empty")
    labeled = [(res.delta_b, res.loss_norm, res.loss_std, res.selected is truth)
               for res, truth in results]
    rows = []
    for thr in grid.points():
        tp = fp = fn = tn = 0
        for delta_b, l_norm, l_std, correct in labeled:
            accepted = evaluate_values(delta_b, l_norm, l_std, thr).accepted
            if accepted and correct:
                tp += 1
            elif accepted:
                fp += 1
            elif correct:
                fn += 1
            else:
                tn += 1
        precision = tp / (tp + fp) if tp + fp else 1.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        rows.append({
            "min_delta_b": thr.min_delta_b,
            "max_loss_std": thr.max_loss_std,
            "max_loss_norm": thr.max_loss_norm,
            "tp": tp, "fp": fp, "fn": fn, "tn": tn,
            "precision": precision, "recall": recall,
        })
    return rows


SWEEP_CSV_HEADER = "min_delta_b,max_loss_std,max_loss_norm,tp,fp,fn,tn,precision,recall"


def write_sweep_csv(rows: Sequence[dict], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(SWEEP_CSV_HEADER + "\n")
        for r in rows:
            fh.write(",".join([
                repr(float(r["min_delta_b"])), repr(float(r["max_loss_std"])),
                repr(float(r["max_loss_norm"])), str(r["tp"]), str(r["fp"]),
                str(r["fn"]), str(r["tn"]),
                repr(float(r["precision"])), repr(float(r["recall"])),
            ]) + "\n")
