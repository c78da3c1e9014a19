"""Read-side aggregation queries over a store snapshot.

Every query takes its snapshot once, so results are consistent even
while a writer is appending.  Ranking direction comes from the fixed
measure table; score ties break by earlier upload time, then run id.
"""

from __future__ import annotations

import json

from ..measures import ranking_direction
from .errors import (
    TaskNotInChallenge,
    UnknownChallenge,
    UnknownDataset,
    UnknownFlow,
    UnknownParameter,
)
from .records import FlowRecord, RunRecord
from .store import Store, StoreView


def _flow_brief(flow: FlowRecord) -> dict:
    return {"flow_id": flow.flow_id, "name": flow.name, "version": flow.version}


def _settings_list(run: RunRecord) -> list[dict]:
    return [{"name": n, "value": v} for n, v in run.parameter_settings]


def _settings_key(run: RunRecord) -> str:
    return json.dumps(dict(run.parameter_settings), sort_keys=True)


def _participant_key(run: RunRecord) -> tuple:
    if run.is_solution:
        return ("solution", run.solution_name)
    return ("flow", run.flow_id)


def _score_sort_key(higher_better: bool):
    def key(entry):
        score, run = entry
        return (-score if higher_better else score, run.upload_time, run.run_id)
    return key


def _require_dataset(view: StoreView, dataset_id: int):
    if dataset_id not in view.datasets:
        raise UnknownDataset(dataset_id)
    return view.datasets[dataset_id]


def _require_flow(view: StoreView, flow_id: int):
    if flow_id not in view.flows:
        raise UnknownFlow(flow_id)
    return view.flows[flow_id]


def _dataset_task_ids(view: StoreView, dataset_id: int) -> set[int]:
    return {tid for tid, t in view.tasks.items() if t.dataset_id == dataset_id}


def leaderboard(store: Store, dataset_id: int, measure_id: str) -> list[dict]:
    """Ranked best runs over all tasks of a dataset, one entry per
    (flow, settings) pair (per name, for solutions)."""
    higher = ranking_direction(measure_id)
    view = store.view()
    _require_dataset(view, dataset_id)
    task_ids = _dataset_task_ids(view, dataset_id)

    best: dict[tuple, tuple[float, RunRecord]] = {}
    for run in view.runs.values():
        if run.task_id not in task_ids:
            continue
        score = run.evaluation.mean_of(measure_id)
        if score is None:
            continue
        key = _participant_key(run) + (_settings_key(run),)
        current = best.get(key)
        if current is None or _score_sort_key(higher)((score, run)) < \
                _score_sort_key(higher)(current):
            best[key] = (score, run)

    ordered = sorted(best.values(), key=_score_sort_key(higher))
    entries = []
    for rank, (score, run) in enumerate(ordered, start=1):
        entries.append({
            "rank": rank,
            "flow": (None if run.flow_id is None
                     else _flow_brief(view.flows[run.flow_id])),
            "solution_name": run.solution_name,
            "settings": _settings_list(run),
            "run_id": run.run_id,
            "score": score,
        })
    return entries


def flow_overview(store: Store, flow_id: int) -> dict:
    """Per-task result groups for one flow, best setting marked."""
    view = store.view()
    flow = _require_flow(view, flow_id)
    by_task: dict[int, list[RunRecord]] = {}
    for run in view.runs.values():
        if run.flow_id == flow_id:
            by_task.setdefault(run.task_id, []).append(run)

    groups = []
    for task_id in sorted(by_task):
        task = view.tasks[task_id]
        higher = ranking_direction(task.primary_measure)
        entries = []
        scored = []
        for run in sorted(by_task[task_id], key=lambda r: r.run_id):
            score = run.evaluation.mean_of(task.primary_measure)
            entries.append({
                "settings": _settings_list(run),
                "run_id": run.run_id,
                "score": score,
            })
            if score is not None:
                scored.append((score, run))
        best_score, best_run = (None, None)
        if scored:
            best_score, best_run = min(scored, key=_score_sort_key(higher))
        groups.append({
            "task_id": task_id,
            "primary_measure": task.primary_measure,
            "entries": entries,
            "best_score": best_score,
            "best_run_id": best_run.run_id if best_run else None,
        })
    return {
        "flow": _flow_brief(flow),
        "tasks": groups,
    }


def _value_sort_key(value):
    if value is None:
        return (2, "", 0.0)
    if isinstance(value, bool):
        return (1, str(value), 0.0)
    if isinstance(value, (int, float)):
        return (0, "", float(value))
    return (1, str(value), 0.0)


def parameter_impact(store: Store, flow_id: int, parameter: str,
                     measure_id: str, dataset_id: int | None = None) -> list[dict]:
    """Mean score per observed value of one parameter (unset uses the
    declared default)."""
    ranking_direction(measure_id)  # raises UnknownMeasure
    view = store.view()
    flow = _require_flow(view, flow_id)
    param = flow.parameter(parameter)
    if param is None:
        raise UnknownParameter(parameter)
    task_filter = None
    if dataset_id is not None:
        _require_dataset(view, dataset_id)
        task_filter = _dataset_task_ids(view, dataset_id)

    groups: dict[str, dict] = {}
    for run in view.runs.values():
        if run.flow_id != flow_id:
            continue
        if task_filter is not None and run.task_id not in task_filter:
            continue
        score = run.evaluation.mean_of(measure_id)
        if score is None:
            continue
        value = run.settings_dict().get(parameter, param.default)
        key = json.dumps(value, sort_keys=True)
        group = groups.setdefault(key, {"value": value, "n_runs": 0, "total": 0.0})
        group["n_runs"] += 1
        group["total"] += score

    rows = []
    for group in sorted(groups.values(), key=lambda g: _value_sort_key(g["value"])):
        rows.append({
            "value": group["value"],
            "n_runs": group["n_runs"],
            "mean_score": group["total"] / group["n_runs"],
        })
    return rows


def compare(store: Store, flow_ids: list[int], dataset_ids: list[int],
            measure_id: str) -> dict:
    """Best mean score matrix, flows x datasets; missing cells are null."""
    higher = ranking_direction(measure_id)
    view = store.view()
    flows = [_require_flow(view, fid) for fid in flow_ids]
    datasets = [_require_dataset(view, did) for did in dataset_ids]

    cells = []
    for flow in flows:
        row = []
        for record in datasets:
            task_ids = _dataset_task_ids(view, record.dataset_id)
            scores = [
                run.evaluation.mean_of(measure_id)
                for run in view.runs.values()
                if run.flow_id == flow.flow_id and run.task_id in task_ids
                and run.evaluation.mean_of(measure_id) is not None
            ]
            if not scores:
                row.append(None)
            else:
                row.append(max(scores) if higher else min(scores))
        cells.append(row)
    return {
        "measure": measure_id,
        "flows": [_flow_brief(f) for f in flows],
        "datasets": [{"dataset_id": d.dataset_id, "name": d.name} for d in datasets],
        "cells": cells,
    }


def compare_csv(result: dict) -> str:
    """Plot-ready CSV rendering of a compare matrix."""
    import csv as _csv
    import io

    buf = io.StringIO()
    writer = _csv.writer(buf, lineterminator="\n")
    writer.writerow(["flow"] + [d["name"] for d in result["datasets"]])
    for flow, row in zip(result["flows"], result["cells"]):
        writer.writerow(
            [f"{flow['name']} v{flow['version']}"]
            + ["" if cell is None else repr(cell) for cell in row])
    return buf.getvalue()


def _task_rankings(view: StoreView, task_id: int) -> list[tuple]:
    """Participants of one task ordered best first: [(key, name, score, run)]."""
    task = view.tasks[task_id]
    higher = ranking_direction(task.primary_measure)
    best: dict[tuple, tuple[float, RunRecord]] = {}
    for run in view.runs.values():
        if run.task_id != task_id:
            continue
        score = run.evaluation.mean_of(task.primary_measure)
        if score is None:
            continue
        key = _participant_key(run)
        current = best.get(key)
        if current is None or _score_sort_key(higher)((score, run)) < \
                _score_sort_key(higher)(current):
            best[key] = (score, run)

    def display_name(key, run):
        if key[0] == "solution":
            return key[1]
        return view.flows[key[1]].name

    ordered = sorted(best.items(), key=lambda kv: _score_sort_key(higher)(kv[1]))
    return [(key, display_name(key, run), score, run)
            for key, (score, run) in ordered]


def challenge_leaderboard(store: Store, challenge_id: int) -> list[dict]:
    """Mean-rank aggregation over the challenge's tasks.

    A participant's rank on a task is its position in that task's
    leaderboard by the task's primary measure; participants that skipped
    a task receive rank (participant count on that task) + 1.  Ties in
    mean rank order by name.
    """
    view = store.view()
    if challenge_id not in view.challenges:
        raise UnknownChallenge(challenge_id)
    challenge = view.challenges[challenge_id]

    per_task: dict[int, list[tuple]] = {
        tid: _task_rankings(view, tid) for tid in challenge.task_ids}
    names: dict[tuple, str] = {}
    for rankings in per_task.values():
        for key, name, _, _ in rankings:
            names[key] = name

    rows = []
    for key, name in names.items():
        task_ranks = {}
        for tid, rankings in per_task.items():
            position = next(
                (i for i, (k, _, _, _) in enumerate(rankings, start=1) if k == key),
                None)
            task_ranks[tid] = position if position is not None else len(rankings) + 1
        mean_rank = sum(task_ranks.values()) / len(task_ranks)
        rows.append({
            "participant": name,
            "kind": key[0],
            "flow_id": key[1] if key[0] == "flow" else None,
            "mean_rank": mean_rank,
            "task_ranks": {str(tid): rank for tid, rank in task_ranks.items()},
        })

    rows.sort(key=lambda r: (r["mean_rank"], r["participant"]))
    for rank, row in enumerate(rows, start=1):
        row["rank"] = rank
    return rows


def solve_challenge(store: Store, challenge_id: int, task_id: int,
                    solution_name: str, predictions) -> RunRecord:
    """Submit a solution for one member task of a challenge."""
    challenge = store.get_challenge(challenge_id)
    if task_id not in challenge.task_ids:
        raise TaskNotInChallenge(task_id, challenge_id)
    return store.submit_solution(task_id, solution_name, predictions)


_KIND_ORDER = ("challenge", "dataset", "flow", "task")


def search(store: Store, query: str) -> list[dict]:
    """Case-insensitive substring search over entity names."""
    if not query:
        return []
    needle = query.lower()
    view = store.view()
    hits = []

    for record in view.datasets.values():
        if needle in record.name.lower():
            hits.append({"kind": "dataset", "id": record.dataset_id,
                         "name": record.name, "match_field": "name"})
    for flow in view.flows.values():
        if needle in flow.name.lower():
            hits.append({"kind": "flow", "id": flow.flow_id,
                         "name": flow.name, "match_field": "name"})
    for task_id, task in view.tasks.items():
        dataset = view.datasets.get(task.dataset_id)
        label = f"predict {task.target} on {dataset.name if dataset else '?'}"
        if needle in label.lower():
            hits.append({"kind": "task", "id": task_id,
                         "name": label, "match_field": "name"})
    for challenge in view.challenges.values():
        if needle in challenge.name.lower():
            hits.append({"kind": "challenge", "id": challenge.challenge_id,
                         "name": challenge.name, "match_field": "name"})

    hits.sort(key=lambda h: (_KIND_ORDER.index(h["kind"]), h["id"]))
    return hits
