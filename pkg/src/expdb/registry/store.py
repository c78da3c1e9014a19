"""The experiment database proper.

Records are appended as one canonical-JSON line per entity log under
``<root>/log/``; uploaded bytes live content-addressed (SHA-256, lowercase
hex) under ``<root>/blobs/``.  Opening a store replays the logs: the
last line is discarded if it was only partially written, corrupt lines
are skipped with a warning, and records whose references do not resolve
are dropped.  Recovery never fails.

Concurrency: single writer, many readers.  All mutations serialize
through one lock; reads take an immutable snapshot of the indices and
never block the writer.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from ..evaluation import PredictionSet, evaluate_run, render_predictions_csv
from ..formats import (
    SOURCE_FORMATS,
    ArffError,
    ContainerError,
    Dataset,
    InvalidDataset,
    parse_blob,
)
from ..metadata import compute_meta_features
from ..tasks import (
    EstimationProcedure,
    Task,
    UnknownAttribute,
    create_task as build_task,
    parse_task_document,
    task_document,
)
from .errors import (
    BlobIntegrityError,
    ConflictingFlow,
    DuplicateParameter,
    EmptyChallenge,
    InvalidFlowDefinition,
    InvalidParameterValue,
    ParseFailed,
    UnknownChallenge,
    UnknownDataset,
    UnknownFlow,
    UnknownParameter,
    UnknownRun,
    UnknownTask,
)
from .records import (
    PARAMETER_KINDS,
    ChallengeRecord,
    DatasetRecord,
    FlowParameter,
    FlowProperties,
    FlowRecord,
    RunRecord,
)

log = logging.getLogger("expdb.registry")

LOG_NAMES = ("datasets", "flows", "tasks", "runs", "challenges")


@dataclass(frozen=True)
class StoreView:
    """Immutable snapshot of the store indices for read queries."""

    datasets: dict[int, DatasetRecord]
    flows: dict[int, FlowRecord]
    tasks: dict[int, Task]
    runs: dict[int, RunRecord]
    challenges: dict[int, ChallengeRecord]


def _coerce_value(kind: str, value, name: str):
    """Validate and canonicalize a parameter value against its kind."""
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise InvalidParameterValue(name, value, kind)
        return value
    if kind == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise InvalidParameterValue(name, value, kind)
        value = float(value)
        if not math.isfinite(value):
            raise InvalidParameterValue(name, value, kind)
        return value
    if kind == "text":
        if not isinstance(value, str):
            raise InvalidParameterValue(name, value, kind)
        return value
    if kind == "flag":
        if not isinstance(value, bool):
            raise InvalidParameterValue(name, value, kind)
        return value
    raise InvalidFlowDefinition(f"unknown parameter kind {kind!r}")


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="microseconds")


def _canonical_line(doc: dict) -> bytes:
    return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8")


class Store:
    """Open experiment database rooted at a directory."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        (self.root / "log").mkdir(parents=True, exist_ok=True)
        (self.root / "blobs").mkdir(parents=True, exist_ok=True)
        self._lock = threading.RLock()
        self._handles: dict[str, object] = {}
        self._datasets: dict[int, DatasetRecord] = {}
        self._flows: dict[int, FlowRecord] = {}
        self._tasks: dict[int, Task] = {}
        self._runs: dict[int, RunRecord] = {}
        self._challenges: dict[int, ChallengeRecord] = {}
        self._dataset_cache: dict[int, Dataset] = {}
        self.recovery_warnings: list[str] = []
        self._recover()

    # --- lifecycle --------------------------------------------------------

    def close(self) -> None:
        with self._lock:
            for handle in self._handles.values():
                handle.close()
            self._handles.clear()

    def __enter__(self) -> "Store":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    # --- recovery ---------------------------------------------------------

    def _log_path(self, name: str) -> Path:
        return self.root / "log" / f"{name}.jsonl"

    def _warn(self, message: str) -> None:
        self.recovery_warnings.append(message)
        log.warning("%s", message)

    def _read_complete_lines(self, name: str) -> list[bytes]:
        path = self._log_path(name)
        if not path.exists():
            return []
        data = path.read_bytes()
        if not data:
            return []
        parts = data.split(b"\n")
        if parts[-1]:
            self._warn(f"{name}.jsonl: discarding partially written last line")
        return [p for p in parts[:-1] if p]

    def _recover(self) -> None:
        def replay(name, loader, index):
            for i, line in enumerate(self._read_complete_lines(name), start=1):
                try:
                    record_id, record = loader(line)
                except Exception as exc:
                    self._warn(f"{name}.jsonl line {i}: corrupt record skipped ({exc})")
                    continue
                index[record_id] = record

        replay("datasets",
               lambda b: _id_of(DatasetRecord.from_json_dict(json.loads(b)), "dataset_id"),
               self._datasets)
        replay("flows",
               lambda b: _id_of(FlowRecord.from_json_dict(json.loads(b)), "flow_id"),
               self._flows)
        replay("tasks",
               lambda b: _id_of(parse_task_document(b), "task_id"),
               self._tasks)
        replay("runs",
               lambda b: _id_of(RunRecord.from_json_dict(json.loads(b)), "run_id"),
               self._runs)
        replay("challenges",
               lambda b: _id_of(ChallengeRecord.from_json_dict(json.loads(b)), "challenge_id"),
               self._challenges)

        # referential integrity: drop records whose links no longer resolve
        for task_id, task in list(self._tasks.items()):
            if task.dataset_id not in self._datasets:
                self._warn(f"task {task_id} references missing dataset "
                           f"{task.dataset_id}; dropped")
                del self._tasks[task_id]
        for run_id, run in list(self._runs.items()):
            if run.task_id not in self._tasks or (
                    run.flow_id is not None and run.flow_id not in self._flows):
                self._warn(f"run {run_id} references a missing task or flow; dropped")
                del self._runs[run_id]
        for challenge_id, challenge in list(self._challenges.items()):
            if any(t not in self._tasks for t in challenge.task_ids):
                self._warn(f"challenge {challenge_id} references a missing task; dropped")
                del self._challenges[challenge_id]

    def _next_id(self, index: dict) -> int:
        return max(index, default=0) + 1

    def _append(self, name: str, line: bytes) -> None:
        handle = self._handles.get(name)
        if handle is None:
            handle = open(self._log_path(name), "ab")
            self._handles[name] = handle
        handle.write(line + b"\n")
        handle.flush()

    # --- blobs ------------------------------------------------------------

    def put_blob(self, data: bytes) -> str:
        digest = hashlib.sha256(data).hexdigest()
        path = self.root / "blobs" / digest
        if not path.exists():
            tmp = path.with_suffix(".tmp")
            tmp.write_bytes(data)
            os.replace(tmp, path)
        return digest

    def get_blob(self, digest: str) -> bytes:
        path = self.root / "blobs" / digest
        if not path.exists():
            raise BlobIntegrityError(digest)
        data = path.read_bytes()
        if hashlib.sha256(data).hexdigest() != digest:
            raise BlobIntegrityError(digest)
        return data

    # --- snapshot ---------------------------------------------------------

    def view(self) -> StoreView:
        with self._lock:
            return StoreView(
                datasets=dict(self._datasets),
                flows=dict(self._flows),
                tasks=dict(self._tasks),
                runs=dict(self._runs),
                challenges=dict(self._challenges),
            )

    # --- accessors --------------------------------------------------------

    def get_dataset(self, dataset_id: int) -> DatasetRecord:
        with self._lock:
            try:
                return self._datasets[dataset_id]
            except KeyError:
                raise UnknownDataset(dataset_id) from None

    def get_flow(self, flow_id: int) -> FlowRecord:
        with self._lock:
            try:
                return self._flows[flow_id]
            except KeyError:
                raise UnknownFlow(flow_id) from None

    def get_task(self, task_id: int) -> Task:
        with self._lock:
            try:
                return self._tasks[task_id]
            except KeyError:
                raise UnknownTask(task_id) from None

    def get_run(self, run_id: int) -> RunRecord:
        with self._lock:
            try:
                return self._runs[run_id]
            except KeyError:
                raise UnknownRun(run_id) from None

    def get_challenge(self, challenge_id: int) -> ChallengeRecord:
        with self._lock:
            try:
                return self._challenges[challenge_id]
            except KeyError:
                raise UnknownChallenge(challenge_id) from None

    def dataset_data(self, dataset_id: int) -> Dataset:
        """Parsed Dataset for a record, cached per process."""
        record = self.get_dataset(dataset_id)
        with self._lock:
            cached = self._dataset_cache.get(dataset_id)
        if cached is not None:
            return cached
        ds = parse_blob(self.get_blob(record.blob_ref), record.original_format)
        with self._lock:
            self._dataset_cache[dataset_id] = ds
        return ds

    # --- mutations --------------------------------------------------------

    def register_dataset(self, blob: bytes, source_format: str, name: str,
                         default_target: str | None = None) -> DatasetRecord:
        """Parse, profile and persist an uploaded dataset.

        Re-uploading byte-identical content under the same name returns
        the existing record; new content under an existing name gets the
        next version.
        """
        if source_format not in SOURCE_FORMATS:
            raise ParseFailed(f"unknown source format {source_format!r}")
        try:
            ds = parse_blob(blob, source_format)
            ds.validate()
        except (ArffError, ContainerError, InvalidDataset) as exc:
            raise ParseFailed(str(exc)) from exc
        meta = compute_meta_features(ds, default_target)  # raises UnknownAttribute
        digest = hashlib.sha256(blob).hexdigest()

        with self._lock:
            for record in self._datasets.values():
                if record.name == name and record.blob_ref == digest:
                    return record
            version = 1 + max(
                (r.version for r in self._datasets.values() if r.name == name),
                default=0)
            record = DatasetRecord(
                dataset_id=self._next_id(self._datasets),
                name=name,
                version=version,
                original_format=source_format,
                blob_ref=digest,
                meta_features=meta.to_json_dict(),
                upload_time=_now(),
                default_target=default_target,
            )
            self.put_blob(blob)
            self._append("datasets", _canonical_line(record.to_json_dict()))
            self._datasets[record.dataset_id] = record
            self._dataset_cache[record.dataset_id] = ds
            return record

    def register_flow(self, name: str, version: str,
                      parameters: list[FlowParameter] = (),
                      properties: FlowProperties | None = None) -> FlowRecord:
        """Persist an implementation; identical re-registration is a no-op."""
        seen = set()
        canonical = []
        for p in parameters:
            if p.name in seen:
                raise DuplicateParameter(p.name)
            seen.add(p.name)
            if p.kind not in PARAMETER_KINDS:
                raise InvalidFlowDefinition(
                    f"unknown parameter kind {p.kind!r} for {p.name!r}")
            default = (None if p.default is None
                       else _coerce_value(p.kind, p.default, p.name))
            canonical.append(FlowParameter(p.name, p.kind, default))
        properties = properties or FlowProperties()

        with self._lock:
            for record in self._flows.values():
                if record.name == name and record.version == version:
                    if (record.parameters == tuple(canonical)
                            and record.properties == properties):
                        return record
                    raise ConflictingFlow(name, version)
            record = FlowRecord(
                flow_id=self._next_id(self._flows),
                name=name,
                version=version,
                parameters=tuple(canonical),
                properties=properties,
            )
            self._append("flows", _canonical_line(record.to_json_dict()))
            self._flows[record.flow_id] = record
            return record

    def create_task(self, dataset_id: int, target: str | None, task_type: str,
                    proc: EstimationProcedure) -> Task:
        """Generate and persist a task over a stored dataset."""
        record = self.get_dataset(dataset_id)
        if target is None:
            target = record.default_target
        if target is None:
            raise UnknownAttribute("(no target given and dataset has no default)")
        ds = self.dataset_data(dataset_id)
        with self._lock:
            task_id = self._next_id(self._tasks)
            task = build_task(ds, dataset_id, target, task_type, proc, task_id=task_id)
            self._append("tasks", task_document(task))
            self._tasks[task_id] = task
            return task

    def _persist_run(self, task: Task, flow_id: int | None,
                     solution_name: str | None,
                     settings: tuple[tuple[str, object], ...],
                     predictions: PredictionSet) -> RunRecord:
        ds = self.dataset_data(task.dataset_id)
        evaluation = evaluate_run(task, ds, predictions)  # raises ValidationFailed
        csv_bytes = render_predictions_csv(predictions, task).encode("utf-8")
        with self._lock:
            record = RunRecord(
                run_id=self._next_id(self._runs),
                task_id=task.task_id,
                flow_id=flow_id,
                solution_name=solution_name,
                parameter_settings=settings,
                evaluation=evaluation,
                predictions_ref=self.put_blob(csv_bytes),
                upload_time=_now(),
            )
            self._append("runs", _canonical_line(record.to_json_dict()))
            self._runs[record.run_id] = record
            return record

    def submit_run(self, task_id: int, flow_id: int, settings: dict,
                   predictions: PredictionSet) -> RunRecord:
        """Validate, evaluate and persist a run atomically.

        Nothing is persisted when prediction validation fails.
        """
        task = self.get_task(task_id)
        flow = self.get_flow(flow_id)
        canonical = []
        for name in sorted(settings):
            param = flow.parameter(name)
            if param is None:
                raise UnknownParameter(name)
            canonical.append((name, _coerce_value(param.kind, settings[name], name)))
        return self._persist_run(task, flow_id, None, tuple(canonical), predictions)

    def submit_solution(self, task_id: int, solution_name: str,
                        predictions: PredictionSet) -> RunRecord:
        """Evaluate uploaded predictions without a registered flow."""
        task = self.get_task(task_id)
        return self._persist_run(task, None, solution_name, (), predictions)

    def create_challenge(self, name: str, task_ids: list[int]) -> ChallengeRecord:
        if not task_ids:
            raise EmptyChallenge()
        with self._lock:
            for task_id in task_ids:
                if task_id not in self._tasks:
                    raise UnknownTask(task_id)
            record = ChallengeRecord(
                challenge_id=self._next_id(self._challenges),
                name=name,
                task_ids=tuple(task_ids),
            )
            self._append("challenges", _canonical_line(record.to_json_dict()))
            self._challenges[record.challenge_id] = record
            return record


def _id_of(record, attr: str):
    return getattr(record, attr), record


def open_store(root: str | Path) -> Store:
    """Open (or initialize) a store rooted at a writable directory."""
    return Store(root)
