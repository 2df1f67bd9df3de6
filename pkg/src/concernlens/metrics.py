"""Classification metrics: binary scores, per-label reports, and the four
multilabel aggregates (micro, macro, weighted, samples).

Zero-division convention: any per-label or pooled precision/recall/F1
whose denominator is zero is reported as 0.0 and flagged, and zero-support
labels still participate in the macro average (as zeros). The one
exception is the samples average, where a sample with an empty gold set
and an empty prediction is counted as 1.0: perfect agreement on "nothing
applies" should not read as failure.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import AlignmentError


def _prf(tp: int, fp: int, fn: int) -> tuple[float, float, float, bool]:
    """Precision, recall, F1 from pooled counts; flag marks zero divisions."""
    flagged = False
    if tp + fp:
        precision = tp / (tp + fp)
    else:
        precision, flagged = 0.0, True
    if tp + fn:
        recall = tp / (tp + fn)
    else:
        recall, flagged = 0.0, True
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1, flagged


@dataclass(frozen=True)
class BinaryMetrics:
    accuracy: float
    precision: float
    recall: float
    f1: float
    confusion: dict[str, int]  # tp / fp / fn / tn
    zero_division_flagged: bool = False

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "confusion": dict(self.confusion),
            "zero_division_flagged": self.zero_division_flagged,
        }


def binary_metrics(pred: Sequence[bool], gold: Sequence[bool]) -> BinaryMetrics:
    pred = np.asarray(pred, dtype=bool)
    gold = np.asarray(gold, dtype=bool)
    if pred.shape != gold.shape or pred.ndim != 1:
        raise AlignmentError("pred and gold must be equal-length 1-D sequences")
    if pred.size == 0:
        raise AlignmentError("binary_metrics requires at least one sample")
    tp = int((pred & gold).sum())
    fp = int((pred & ~gold).sum())
    fn = int((~pred & gold).sum())
    tn = int((~pred & ~gold).sum())
    precision, recall, f1, flagged = _prf(tp, fp, fn)
    return BinaryMetrics(
        accuracy=(tp + tn) / pred.size,
        precision=precision,
        recall=recall,
        f1=f1,
        confusion={"tp": tp, "fp": fp, "fn": fn, "tn": tn},
        zero_division_flagged=flagged,
    )


@dataclass(frozen=True)
class LabelMetrics:
    label: str
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class Aggregate:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class MultilabelReport:
    per_label: tuple[LabelMetrics, ...]
    micro: Aggregate
    macro: Aggregate
    weighted: Aggregate
    samples: Aggregate
    total_support: int

    def to_dict(self) -> dict:
        return {
            "per_label": [
                {
                    "label": m.label,
                    "precision": m.precision,
                    "recall": m.recall,
                    "f1": m.f1,
                    "support": m.support,
                }
                for m in self.per_label
            ],
            "micro_avg": vars(self.micro),
            "macro_avg": vars(self.macro),
            "weighted_avg": vars(self.weighted),
            "samples_avg": vars(self.samples),
            "total_support": self.total_support,
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    def to_csv(self) -> str:
        """One row per label plus the four aggregate rows."""
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["label", "precision", "recall", "f1", "support"])
        for m in self.per_label:
            writer.writerow([m.label, f"{m.precision:.6f}", f"{m.recall:.6f}", f"{m.f1:.6f}", m.support])
        for name, agg in [
            ("micro avg", self.micro),
            ("macro avg", self.macro),
            ("weighted avg", self.weighted),
            ("samples avg", self.samples),
        ]:
            writer.writerow([name, f"{agg.precision:.6f}", f"{agg.recall:.6f}", f"{agg.f1:.6f}", self.total_support])
        return buf.getvalue()


def multilabel_report(
    pred: np.ndarray,
    gold: np.ndarray,
    label_ids: Sequence[str] | None = None,
) -> MultilabelReport:
    """Per-label precision/recall/F1/support plus micro, macro, weighted and
    samples averages over a [n_samples, n_labels] binary pair."""
    pred = np.asarray(pred, dtype=np.int64)
    gold = np.asarray(gold, dtype=np.int64)
    if pred.ndim == 1:
        pred = pred.reshape(-1, 1)
    if gold.ndim == 1:
        gold = gold.reshape(-1, 1)
    if pred.shape != gold.shape:
        raise AlignmentError(f"shape mismatch: pred {pred.shape} vs gold {gold.shape}")
    n, num_labels = pred.shape
    if n == 0:
        raise AlignmentError("multilabel_report requires at least one sample")
    if label_ids is None:
        label_ids = [str(i) for i in range(num_labels)]
    if len(label_ids) != num_labels:
        raise AlignmentError("label_ids misaligned with label columns")

    tp = ((pred == 1) & (gold == 1)).sum(axis=0)
    fp = ((pred == 1) & (gold == 0)).sum(axis=0)
    fn = ((pred == 0) & (gold == 1)).sum(axis=0)
    support = gold.sum(axis=0)

    per_label = []
    for c in range(num_labels):
        p, r, f1, _ = _prf(int(tp[c]), int(fp[c]), int(fn[c]))
        per_label.append(
            LabelMetrics(label=label_ids[c], precision=p, recall=r, f1=f1, support=int(support[c]))
        )

    micro_p, micro_r, micro_f1, _ = _prf(int(tp.sum()), int(fp.sum()), int(fn.sum()))
    micro = Aggregate(micro_p, micro_r, micro_f1)

    # macro: unweighted mean over every label, zero-support ones included
    macro = Aggregate(
        float(np.mean([m.precision for m in per_label])),
        float(np.mean([m.recall for m in per_label])),
        float(np.mean([m.f1 for m in per_label])),
    )

    total_support = int(support.sum())
    if total_support:
        w = support / total_support
        weighted = Aggregate(
            float(sum(w[c] * per_label[c].precision for c in range(num_labels))),
            float(sum(w[c] * per_label[c].recall for c in range(num_labels))),
            float(sum(w[c] * per_label[c].f1 for c in range(num_labels))),
        )
    else:
        weighted = Aggregate(0.0, 0.0, 0.0)

    # samples: per-sample P/R/F1 over its label set, then averaged; a sample
    # where both sides are empty is perfect agreement and scores 1.0
    inter = ((pred == 1) & (gold == 1)).sum(axis=1).astype(np.float64)
    n_pred = (pred == 1).sum(axis=1)
    n_gold = (gold == 1).sum(axis=1)
    both_empty = (n_pred == 0) & (n_gold == 0)
    with np.errstate(invalid="ignore", divide="ignore"):
        sp = np.where(n_pred > 0, inter / np.maximum(n_pred, 1), 0.0)
        sr = np.where(n_gold > 0, inter / np.maximum(n_gold, 1), 0.0)
    sf = np.where(sp + sr > 0, 2 * sp * sr / np.maximum(sp + sr, 1e-300), 0.0)
    sp = np.where(both_empty, 1.0, sp)
    sr = np.where(both_empty, 1.0, sr)
    sf = np.where(both_empty, 1.0, sf)
    samples = Aggregate(float(sp.mean()), float(sr.mean()), float(sf.mean()))

    return MultilabelReport(
        per_label=tuple(per_label),
        micro=micro,
        macro=macro,
        weighted=weighted,
        samples=samples,
        total_support=total_support,
    )


def evaluate_model(model, texts: Sequence[str], gold: np.ndarray, label_ids=None):
    """Predict with a student model and score against gold labels.

    Single-head models yield BinaryMetrics; multi-head models yield a
    MultilabelReport.
    """
    from .students import predict_batch

    _, labels = predict_batch(model, texts)
    gold = np.asarray(gold)
    if model.num_labels == 1:
        return binary_metrics(labels[:, 0].astype(bool), gold.reshape(-1).astype(bool))
    return multilabel_report(labels, gold, label_ids=label_ids)
