"""Server-side evaluation: validate submitted predictions against a task
and compute per-fold plus aggregate scores for the task's measures.

Evaluation is per-fold with mean and population stdev over folds; the
one pooled artifact is the confusion matrix across all folds of repeat 0.
AUC folds that cannot be scored (single observed class, or rows without
confidence scores) are skipped and recorded in the measure's flags.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

from . import measures as M
from .formats.model import Dataset
from .metrics import (
    ConfusionMatrix,
    accuracy,
    auc_binary,
    confusion,
    mae,
    precision_recall_f1_macro,
    rmse,
)
from .tasks import CLASSIFICATION, REGRESSION, Task


@dataclass(frozen=True)
class PredictionRow:
    repeat: int
    fold: int
    row_index: int
    prediction: str | float
    confidences: dict | None = None


@dataclass
class PredictionSet:
    rows: list[PredictionRow]


class PredictionFormatError(ValueError):
    """The uploaded prediction file is structurally unreadable."""

    code = "prediction_format_error"

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class Violation:
    """One semantic failure of a submission against its task."""

    code: str
    message: str
    repeat: int | None = None
    row_index: int | None = None

    def to_dict(self) -> dict:
        doc = {"code": self.code, "message": self.message}
        if self.repeat is not None:
            doc["repeat"] = self.repeat
        if self.row_index is not None:
            doc["row_index"] = self.row_index
        return doc


class ValidationFailed(ValueError):
    code = "validation_failed"

    def __init__(self, violations: list[Violation]):
        super().__init__(
            f"predictions failed validation with {len(violations)} violation(s)")
        self.violations = violations


def parse_predictions_csv(text: str, task: Task) -> PredictionSet:
    """Parse an uploaded prediction file against the task's schema.

    The header must match the task's submission schema exactly (names
    and order).  Structural problems raise PredictionFormatError;
    semantic mismatches are left for validate_predictions.
    """
    schema = task.submission_schema
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise PredictionFormatError("empty prediction file") from None
    if header != schema:
        raise PredictionFormatError(
            f"header {header!r} does not match submission schema {schema!r}")

    conf_labels = list(task.class_labels or ())
    rows = []
    for lineno, record in enumerate(reader, start=2):
        if not record:
            continue
        if len(record) != len(schema):
            raise PredictionFormatError(
                f"expected {len(schema)} fields, got {len(record)}", lineno)
        try:
            repeat = int(record[0])
            fold = int(record[1])
            row_index = int(record[2])
        except ValueError:
            raise PredictionFormatError(
                "repeat, fold and row_index must be integers", lineno) from None
        if task.task_type == REGRESSION:
            try:
                prediction: str | float = float(record[3])
            except ValueError:
                raise PredictionFormatError(
                    f"prediction {record[3]!r} is not a number", lineno) from None
            if not math.isfinite(prediction):
                raise PredictionFormatError(
                    "prediction must be finite", lineno)
        else:
            prediction = record[3]
        confidences = None
        conf_cells = record[4:]
        if any(cell.strip() for cell in conf_cells):
            confidences = {}
            for label, cell in zip(conf_labels, conf_cells):
                if not cell.strip():
                    continue
                try:
                    confidences[label] = float(cell)
                except ValueError:
                    raise PredictionFormatError(
                        f"confidence {cell!r} is not a number", lineno) from None
        rows.append(PredictionRow(repeat, fold, row_index, prediction, confidences))
    return PredictionSet(rows)


def render_predictions_csv(pset: PredictionSet, task: Task) -> str:
    """Canonical CSV rendering of a prediction set (storage form)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(task.submission_schema)
    conf_labels = list(task.class_labels or ())
    for row in sorted(pset.rows, key=lambda r: (r.repeat, r.fold, r.row_index)):
        record = [str(row.repeat), str(row.fold), str(row.row_index)]
        if isinstance(row.prediction, float):
            record.append(repr(row.prediction))
        else:
            record.append(row.prediction)
        for label in conf_labels:
            if row.confidences and label in row.confidences:
                record.append(repr(row.confidences[label]))
            else:
                record.append("")
        writer.writerow(record)
    return buf.getvalue()


def validate_predictions(task: Task, pset: PredictionSet) -> list[Violation]:
    """Check a submission against the task; empty list means ok."""
    violations: list[Violation] = []
    class_labels = set(task.class_labels or ())
    seen: dict[tuple[int, int], PredictionRow] = {}

    for row in pset.rows:
        key = (row.repeat, row.row_index)
        if key in seen:
            violations.append(Violation(
                "duplicate_prediction",
                f"(repeat {row.repeat}, row {row.row_index}) appears more than once",
                row.repeat, row.row_index))
            continue
        seen[key] = row
        if not 0 <= row.repeat < task.splits.repeats:
            violations.append(Violation(
                "unknown_repeat", f"repeat {row.repeat} is not part of the task",
                row.repeat, row.row_index))
            continue
        expected_fold = task.splits.fold_of(row.repeat, row.row_index)
        if expected_fold is None:
            violations.append(Violation(
                "unexpected_row",
                f"row {row.row_index} is not evaluated in repeat {row.repeat}",
                row.repeat, row.row_index))
            continue
        if expected_fold != row.fold:
            violations.append(Violation(
                "fold_mismatch",
                f"row {row.row_index}: expected fold {expected_fold}, got {row.fold}",
                row.repeat, row.row_index))
        if task.task_type == CLASSIFICATION and row.prediction not in class_labels:
            violations.append(Violation(
                "unknown_label",
                f"predicted label {row.prediction!r} is not declared",
                row.repeat, row.row_index))
        if row.confidences is not None:
            missing = class_labels - set(row.confidences)
            extra = set(row.confidences) - class_labels
            if missing or extra:
                violations.append(Violation(
                    "incomplete_confidences",
                    f"confidences must cover exactly the declared classes "
                    f"(missing {sorted(missing)}, extra {sorted(extra)})",
                    row.repeat, row.row_index))
            for label, value in row.confidences.items():
                if not (math.isfinite(value) and 0.0 <= value <= 1.0):
                    violations.append(Violation(
                        "bad_confidence",
                        f"confidence for {label!r} is {value!r}, outside [0, 1]",
                        row.repeat, row.row_index))

    for rep in range(task.splits.repeats):
        for row_index in task.splits.rows():
            if (rep, row_index) not in seen:
                violations.append(Violation(
                    "missing_prediction",
                    f"no prediction for row {row_index} in repeat {rep}",
                    rep, row_index))
    return violations


@dataclass
class FoldScore:
    repeat: int
    fold: int
    value: float

    def to_dict(self) -> dict:
        return {"repeat": self.repeat, "fold": self.fold, "value": self.value}


@dataclass
class MeasureAggregate:
    folds: list[FoldScore] = field(default_factory=list)
    mean: float | None = None
    stdev: float | None = None
    flags: list[dict] = field(default_factory=list)

    def aggregate(self) -> None:
        if not self.folds:
            self.mean = None
            self.stdev = None
            return
        values = [f.value for f in self.folds]
        self.mean = sum(values) / len(values)
        var = sum((v - self.mean) ** 2 for v in values) / len(values)
        self.stdev = math.sqrt(var)

    def to_json_dict(self) -> dict:
        return {
            "folds": [f.to_dict() for f in self.folds],
            "mean": self.mean,
            "stdev": self.stdev,
            "flags": self.flags,
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "MeasureAggregate":
        return cls(
            folds=[FoldScore(f["repeat"], f["fold"], f["value"])
                   for f in doc["folds"]],
            mean=doc["mean"],
            stdev=doc["stdev"],
            flags=list(doc["flags"]),
        )


@dataclass
class EvaluationResult:
    measures: dict[str, MeasureAggregate]
    confusion_matrix: ConfusionMatrix | None = None

    def mean_of(self, measure_id: str) -> float | None:
        agg = self.measures.get(measure_id)
        return agg.mean if agg else None

    def to_json_dict(self) -> dict:
        doc = {mid: agg.to_json_dict() for mid, agg in self.measures.items()}
        if self.confusion_matrix is not None:
            doc["confusion_matrix"] = self.confusion_matrix.to_json_dict()
        return doc

    @classmethod
    def from_json_dict(cls, doc: dict) -> "EvaluationResult":
        cm = doc.get("confusion_matrix")
        return cls(
            measures={mid: MeasureAggregate.from_json_dict(entry)
                      for mid, entry in doc.items() if mid != "confusion_matrix"},
            confusion_matrix=ConfusionMatrix.from_json_dict(cm) if cm else None,
        )


def _fold_auc(y_true: list[str], confidences: list[dict | None],
              classes: tuple[str, ...]) -> float | str:
    """Macro one-vs-rest AUC for one fold, or a skip reason."""
    if any(c is None for c in confidences):
        return "missing_confidences"
    per_class = []
    for label in classes:
        flags = [t == label for t in y_true]
        if not any(flags) or all(flags):
            continue
        per_class.append(auc_binary(flags, [c[label] for c in confidences]))
    if not per_class:
        return "single_class"
    return sum(per_class) / len(per_class)


def evaluate_run(task: Task, ds: Dataset, pset: PredictionSet) -> EvaluationResult:
    """Score a validated submission on every measure of the task."""
    violations = validate_predictions(task, pset)
    if violations:
        raise ValidationFailed(violations)

    target_idx = ds.attribute_index(task.target)
    target_attr = ds.attributes[target_idx]

    def true_value(row_index: int):
        cell = ds.rows[row_index][target_idx]
        if task.task_type == CLASSIFICATION:
            return target_attr.categories[cell]
        return cell

    by_key = {(r.repeat, r.row_index): r for r in pset.rows}
    result = EvaluationResult(
        measures={mid: MeasureAggregate() for mid in task.measures})

    for rep in range(task.splits.repeats):
        for fold in range(task.splits.folds):
            rows = task.splits.test_rows(rep, fold)
            if not rows:
                continue
            preds = [by_key[(rep, i)] for i in rows]
            y_true = [true_value(i) for i in rows]
            y_pred = [p.prediction for p in preds]
            for mid in task.measures:
                agg = result.measures[mid]
                if mid == M.PREDICTIVE_ACCURACY:
                    agg.folds.append(FoldScore(rep, fold, accuracy(y_true, y_pred)))
                elif mid == M.F_MEASURE_MACRO:
                    cm = confusion(y_true, y_pred, task.class_labels)
                    score = precision_recall_f1_macro(cm)["f1"]
                    agg.folds.append(FoldScore(rep, fold, score))
                elif mid == M.AREA_UNDER_ROC_CURVE:
                    outcome = _fold_auc(y_true, [p.confidences for p in preds],
                                        task.class_labels)
                    if isinstance(outcome, str):
                        agg.flags.append(
                            {"repeat": rep, "fold": fold, "skipped": outcome})
                    else:
                        agg.folds.append(FoldScore(rep, fold, outcome))
                elif mid == M.ROOT_MEAN_SQUARED_ERROR:
                    agg.folds.append(FoldScore(rep, fold, rmse(y_true, y_pred)))
                elif mid == M.MEAN_ABSOLUTE_ERROR:
                    agg.folds.append(FoldScore(rep, fold, mae(y_true, y_pred)))

    for agg in result.measures.values():
        agg.aggregate()

    if task.task_type == CLASSIFICATION:
        rows0 = task.splits.rows()
        y_true = [true_value(i) for i in rows0]
        y_pred = [by_key[(0, i)].prediction for i in rows0]
        result.confusion_matrix = confusion(y_true, y_pred, task.class_labels)
    return result


def evaluate_solution(task: Task, ds: Dataset, pset: PredictionSet) -> EvaluationResult:
    """Evaluate uploaded predictions that have no registered flow behind
    them; identical to evaluate_run."""
    return evaluate_run(task, ds, pset)
