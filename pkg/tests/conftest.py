"""Shared fixtures and builders for registry / server / acceptance tests."""

from __future__ import annotations

import threading
import time

import pytest
import uvicorn

from expdb.evaluation import PredictionRow, PredictionSet
from expdb.registry import open_store
from expdb.server import create_app


def labeled_arff(class_counts: dict[str, int], relation: str = "toy") -> bytes:
    """ARFF text for a two-column dataset: numeric feature + nominal label.

    Rows are laid out class by class in dict order so row index -> label
    is easy to reason about in tests.
    """
    labels = list(class_counts)
    lines = [
        f"@relation {relation}",
        "@attribute x numeric",
        "@attribute class {" + ",".join(labels) + "}",
        "@data",
    ]
    i = 0
    for label, count in class_counts.items():
        for _ in range(count):
            lines.append(f"{float(i)},{label}")
            i += 1
    return ("\n".join(lines) + "\n").encode("utf-8")


def truth_map(ds, target: str) -> dict[int, str]:
    idx = ds.attribute_index(target)
    attr = ds.attributes[idx]
    return {i: attr.categories[row[idx]] for i, row in enumerate(ds.rows)}


def predictions_for(task, ds, correct_rows=None,
                    with_confidences=False) -> PredictionSet:
    """Build a complete submission: truth on ``correct_rows`` (all rows if
    None), a guaranteed-wrong label elsewhere."""
    truth = truth_map(ds, task.target)
    labels = list(task.class_labels)
    rows = []
    for rep in range(task.splits.repeats):
        for fold in range(task.splits.folds):
            for row_index in task.splits.test_rows(rep, fold):
                if correct_rows is None or row_index in correct_rows:
                    label = truth[row_index]
                else:
                    label = labels[(labels.index(truth[row_index]) + 1) % len(labels)]
                conf = None
                if with_confidences:
                    conf = {c: (1.0 if c == label else 0.0)
                            for c in task.class_labels}
                rows.append(PredictionRow(rep, fold, row_index, label, conf))
    return PredictionSet(rows)


def constant_predictions(task, label: str, with_confidences=False) -> PredictionSet:
    rows = []
    for rep in range(task.splits.repeats):
        for fold in range(task.splits.folds):
            for row_index in task.splits.test_rows(rep, fold):
                conf = None
                if with_confidences:
                    conf = {c: (1.0 if c == label else 0.0)
                            for c in task.class_labels}
                rows.append(PredictionRow(rep, fold, row_index, label, conf))
    return PredictionSet(rows)


@pytest.fixture
def store(tmp_path):
    s = open_store(tmp_path / "store")
    yield s
    s.close()


@pytest.fixture
def live_server(store):
    """A real uvicorn server on an ephemeral port, backed by ``store``."""
    config = uvicorn.Config(create_app(store), host="127.0.0.1", port=0,
                            log_level="error")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 10
    while not server.started:
        if time.time() > deadline:
            raise RuntimeError("server did not start")
        time.sleep(0.01)
    port = server.servers[0].sockets[0].getsockname()[1]
    yield f"http://127.0.0.1:{port}"
    server.should_exit = True
    thread.join(timeout=5)
