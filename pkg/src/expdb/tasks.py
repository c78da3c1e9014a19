"""Task generation: estimation procedures, deterministic stratified
cross-validation splits and the canonical task document.

Split assignments are a pure function of (labels, folds, repeats, seed):
fold membership must be bit-identical across processes and machines so
that independently computed evaluations are comparable.  Randomness
therefore comes from a pinned splitmix64 generator, the shuffle is a
pinned Fisher-Yates, and shuffled indices are dealt round-robin to folds.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

from .formats.model import MISSING, NOMINAL, NUMERIC, Dataset, UnknownAttribute
from .measures import CLASSIFICATION_MEASURES, REGRESSION_MEASURES

CLASSIFICATION = "supervised_classification"
REGRESSION = "supervised_regression"
TASK_TYPES = (CLASSIFICATION, REGRESSION)

_MASK64 = (1 << 64) - 1


class TaskError(ValueError):
    code = "task_error"


class TargetKindMismatch(TaskError):
    code = "target_kind_mismatch"

    def __init__(self, task_type: str, target: str, kind: str):
        super().__init__(
            f"{task_type} requires a "
            f"{'nominal' if task_type == CLASSIFICATION else 'numeric'} target; "
            f"{target!r} is {kind}")


class TooFewInstances(TaskError):
    code = "too_few_instances"

    def __init__(self, folds: int, n: int):
        super().__init__(f"cannot make {folds} folds from {n} instances")
        self.folds = folds
        self.n = n


class InvalidProcedure(TaskError):
    code = "invalid_procedure"


class BadTaskDocument(TaskError):
    code = "bad_task_document"


def splitmix64_next(state: int) -> tuple[int, int]:
    """One step of splitmix64: returns (new state, output)."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, z ^ (z >> 31)


def splitmix64_mix(value: int) -> int:
    """Scramble a 64-bit value (the output of one splitmix64 step)."""
    return splitmix64_next(value & _MASK64)[1]


class _Stream:
    """Sequential splitmix64 outputs from a starting state."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state, out = splitmix64_next(self._state)
        return out


def _fisher_yates(items: list[int], stream: _Stream) -> None:
    for i in range(len(items) - 1, 0, -1):
        j = stream.next_u64() % (i + 1)
        items[i], items[j] = items[j], items[i]


@dataclass(frozen=True)
class EstimationProcedure:
    """k-fold cross-validation, optionally repeated and stratified."""

    folds: int
    repeats: int = 1
    seed: int | None = None
    stratified: bool = True
    kind: str = "crossvalidation"

    def validate(self) -> None:
        if self.kind != "crossvalidation":
            raise InvalidProcedure(f"unknown procedure kind {self.kind!r}")
        if self.folds < 2:
            raise InvalidProcedure("folds must be >= 2")
        if self.repeats < 1:
            raise InvalidProcedure("repeats must be >= 1")
        if self.seed is not None and not 0 <= self.seed <= _MASK64:
            raise InvalidProcedure("seed must fit in 64 bits")


@dataclass
class SplitAssignment:
    """Fold id per (repeat, row index); balanced to within one row."""

    folds: int
    repeats: int
    assignment: dict[tuple[int, int], int]

    def fold_of(self, repeat: int, row: int) -> int | None:
        return self.assignment.get((repeat, row))

    def rows(self) -> list[int]:
        return sorted({row for (_, row) in self.assignment})

    def test_rows(self, repeat: int, fold: int) -> list[int]:
        return sorted(row for (rep, row), f in self.assignment.items()
                      if rep == repeat and f == fold)

    def to_json_obj(self) -> list:
        out = []
        for rep in range(self.repeats):
            pairs = sorted((row, f) for (r, row), f in self.assignment.items()
                           if r == rep)
            out.append([[row, f] for row, f in pairs])
        return out

    @classmethod
    def from_json_obj(cls, folds: int, obj: list) -> "SplitAssignment":
        assignment = {}
        for rep, pairs in enumerate(obj):
            for row, f in pairs:
                assignment[(rep, row)] = f
        return cls(folds=folds, repeats=len(obj), assignment=assignment)


def generate_splits(labels_or_n: int | list[int],
                    proc: EstimationProcedure) -> SplitAssignment:
    """Deterministic fold assignment over rows ``0..n-1``.

    Pass class labels (category indices) for stratified assignment or a
    bare row count for unstratified.  Per repeat j the shuffle stream is
    seeded with ``splitmix64_mix(seed XOR j)``; indices are Fisher-Yates
    shuffled (within each class, classes in ascending index order, when
    stratified) and dealt round-robin to folds 0..k-1.
    """
    proc.validate()
    if proc.seed is None:
        raise InvalidProcedure("procedure seed must be resolved before splitting")
    if isinstance(labels_or_n, int):
        n = labels_or_n
        labels = None
    else:
        labels = list(labels_or_n)
        n = len(labels)
    if proc.folds > n:
        raise TooFewInstances(proc.folds, n)

    stratified = proc.stratified and labels is not None
    assignment: dict[tuple[int, int], int] = {}
    for rep in range(proc.repeats):
        stream = _Stream(splitmix64_mix(proc.seed ^ rep))
        counter = 0
        if stratified:
            groups: dict[int, list[int]] = {}
            for pos, label in enumerate(labels):
                groups.setdefault(label, []).append(pos)
            order = sorted(groups)
        else:
            groups = {0: list(range(n))}
            order = [0]
        for key in order:
            members = list(groups[key])
            _fisher_yates(members, stream)
            for pos in members:
                assignment[(rep, pos)] = counter % proc.folds
                counter += 1
    return SplitAssignment(folds=proc.folds, repeats=proc.repeats,
                           assignment=assignment)


SUBMISSION_BASE_COLUMNS = ["repeat", "fold", "row_index", "prediction"]


@dataclass
class Task:
    """A fully specified, reproducible problem statement."""

    task_id: int
    task_type: str
    dataset_id: int
    target: str
    input_features: list[str]
    procedure: EstimationProcedure
    splits: SplitAssignment
    measures: list[str]
    class_labels: tuple[str, ...] | None = None
    excluded_rows: list[int] = field(default_factory=list)

    @property
    def primary_measure(self) -> str:
        return self.measures[0]

    @property
    def submission_schema(self) -> list[str]:
        columns = list(SUBMISSION_BASE_COLUMNS)
        if self.task_type == CLASSIFICATION and self.class_labels:
            columns.extend(f"confidence.{label}" for label in self.class_labels)
        return columns

    def dataset_url(self) -> str:
        return f"/api/v1/datasets/{self.dataset_id}/file?format=arff"


def create_task(ds: Dataset, dataset_id: int, target: str, task_type: str,
                proc: EstimationProcedure, task_id: int = 0) -> Task:
    """Build a task over a dataset, generating its split assignment.

    Rows with a missing target are excluded from the splits and recorded
    in the task document.  A procedure without a seed gets one derived
    from the task id.
    """
    if task_type not in TASK_TYPES:
        raise InvalidProcedure(f"unknown task type {task_type!r}")
    target_idx = ds.attribute_index(target)  # raises UnknownAttribute
    target_attr = ds.attributes[target_idx]
    if task_type == CLASSIFICATION and target_attr.kind != NOMINAL:
        raise TargetKindMismatch(task_type, target, target_attr.kind)
    if task_type == REGRESSION and target_attr.kind != NUMERIC:
        raise TargetKindMismatch(task_type, target, target_attr.kind)

    if proc.seed is None:
        proc = replace(proc, seed=splitmix64_mix(task_id))
    if task_type == REGRESSION and proc.stratified:
        proc = replace(proc, stratified=False)  # no classes to stratify on
    proc.validate()

    labeled = [i for i, row in enumerate(ds.rows) if row[target_idx] is not MISSING]
    excluded = [i for i, row in enumerate(ds.rows) if row[target_idx] is MISSING]
    if proc.folds > len(labeled):
        raise TooFewInstances(proc.folds, len(labeled))

    if task_type == CLASSIFICATION and proc.stratified:
        labels = [ds.rows[i][target_idx] for i in labeled]
        positional = generate_splits(labels, proc)
    else:
        positional = generate_splits(len(labeled), proc)
    # map positions among labeled rows back to dataset row indices
    assignment = {(rep, labeled[pos]): fold
                  for (rep, pos), fold in positional.assignment.items()}
    splits = SplitAssignment(folds=proc.folds, repeats=proc.repeats,
                             assignment=assignment)

    measures = list(CLASSIFICATION_MEASURES if task_type == CLASSIFICATION
                    else REGRESSION_MEASURES)
    return Task(
        task_id=task_id,
        task_type=task_type,
        dataset_id=dataset_id,
        target=target,
        input_features=[a.name for a in ds.attributes if a.name != target],
        procedure=proc,
        splits=splits,
        measures=measures,
        class_labels=target_attr.categories if target_attr.kind == NOMINAL else None,
        excluded_rows=excluded,
    )


def task_document(task: Task) -> bytes:
    """Canonical JSON (sorted keys, no insignificant whitespace)."""
    doc = {
        "task_id": task.task_id,
        "task_type": task.task_type,
        "dataset_id": task.dataset_id,
        "dataset_url": task.dataset_url(),
        "target": task.target,
        "input_features": task.input_features,
        "procedure": {
            "kind": task.procedure.kind,
            "folds": task.procedure.folds,
            "repeats": task.procedure.repeats,
            "seed": task.procedure.seed,
            "stratified": task.procedure.stratified,
        },
        "splits": {
            "folds": task.splits.folds,
            "repeats": task.splits.repeats,
            "assignment": task.splits.to_json_obj(),
        },
        "measures": task.measures,
        "class_labels": list(task.class_labels) if task.class_labels else None,
        "excluded_rows": task.excluded_rows,
        "submission_schema": task.submission_schema,
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8")


def parse_task_document(blob: bytes) -> Task:
    """Inverse of task_document."""
    try:
        doc = json.loads(blob.decode("utf-8"))
        proc = EstimationProcedure(
            folds=doc["procedure"]["folds"],
            repeats=doc["procedure"]["repeats"],
            seed=doc["procedure"]["seed"],
            stratified=doc["procedure"]["stratified"],
            kind=doc["procedure"]["kind"],
        )
        splits = SplitAssignment.from_json_obj(
            doc["splits"]["folds"], doc["splits"]["assignment"])
        labels = doc["class_labels"]
        return Task(
            task_id=doc["task_id"],
            task_type=doc["task_type"],
            dataset_id=doc["dataset_id"],
            target=doc["target"],
            input_features=list(doc["input_features"]),
            procedure=proc,
            splits=splits,
            measures=list(doc["measures"]),
            class_labels=tuple(labels) if labels is not None else None,
            excluded_rows=list(doc["excluded_rows"]),
        )
    except (KeyError, TypeError, ValueError, UnicodeDecodeError) as exc:
        raise BadTaskDocument(f"not a valid task document: {exc}") from None
