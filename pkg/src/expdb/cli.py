"""Command-line client for the experiment database API.

All remote commands talk to the server given by ``--server`` or the
``EXPDB_SERVER`` environment variable (flag wins); ``convert`` and
``dataset summarize`` run fully offline.  ``--json`` emits exactly the
server's JSON body on stdout.  Exit codes: 0 success, 1 usage error,
2 server/API error, 3 local I/O or parse error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import httpx

from .formats import (
    ArffError,
    ContainerError,
    InvalidDataset,
    UnsupportedConversion,
    convert,
    parse_blob,
)
from .metadata import dataset_summary

API = "/api/v1"

USAGE_ERROR = 1
API_ERROR = 2
LOCAL_ERROR = 3


class CliError(Exception):
    def __init__(self, exit_code: int, message: str):
        super().__init__(message)
        self.exit_code = exit_code


class Parser(argparse.ArgumentParser):
    """argparse that reports usage problems with exit code 1."""

    def error(self, message):
        raise CliError(USAGE_ERROR, message)


# --- plumbing ---------------------------------------------------------------


def _server_url(args) -> str:
    url = args.server or os.environ.get("EXPDB_SERVER")
    if not url:
        raise CliError(USAGE_ERROR,
                       "no server URL: pass --server or set EXPDB_SERVER")
    return url.rstrip("/")


def _request(args, method: str, path: str, **kwargs) -> httpx.Response:
    url = _server_url(args) + path
    try:
        resp = httpx.request(method, url, timeout=60.0, **kwargs)
    except httpx.HTTPError as exc:
        raise CliError(API_ERROR, f"request failed: {exc}") from None
    if resp.status_code >= 400:
        try:
            err = resp.json()["error"]
            detail = f"{err['code']}: {err['message']}"
        except Exception:
            detail = f"HTTP {resp.status_code}"
        raise CliError(API_ERROR, detail)
    return resp


def _read_file(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise CliError(LOCAL_ERROR, f"cannot read {path}: {exc.strerror}") from None


def _write_output(args, data: bytes) -> None:
    if getattr(args, "output", None):
        try:
            Path(args.output).write_bytes(data)
        except OSError as exc:
            raise CliError(LOCAL_ERROR,
                           f"cannot write {args.output}: {exc.strerror}") from None
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()


def _emit(args, resp: httpx.Response, render=None) -> None:
    if args.json:
        sys.stdout.buffer.write(resp.content)
        sys.stdout.buffer.flush()
        return
    if render is None:
        print(json.dumps(resp.json(), indent=2, sort_keys=True))
    else:
        render(resp.json())


def _table(headers: list[str], rows: list[list]) -> str:
    cells = [headers] + [[str(c) for c in row] for row in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(headers))]
    lines = []
    for r, row in enumerate(cells):
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
        if r == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)


def _format_from_extension(path: str) -> str:
    ext = Path(path).suffix.lower().lstrip(".")
    if ext in ("arff", "mld", "csv"):
        return ext
    raise CliError(USAGE_ERROR,
                   f"cannot infer format from {path!r}; use --from/--to")


def _settings_from_params(pairs: list[str]) -> dict:
    settings = {}
    for pair in pairs or []:
        name, sep, raw = pair.partition("=")
        if not sep or not name:
            raise CliError(USAGE_ERROR, f"--param needs name=value, got {pair!r}")
        try:
            settings[name] = json.loads(raw)
        except json.JSONDecodeError:
            settings[name] = raw
    return settings


def _fmt_score(value) -> str:
    return "" if value is None else f"{value:.6g}"


def _settings_text(settings: list[dict]) -> str:
    return ",".join(f"{s['name']}={s['value']}" for s in settings) or "-"


# --- command handlers ---------------------------------------------------------


def cmd_dataset_upload(args):
    blob = _read_file(args.file)
    fmt = args.format or _format_from_extension(args.file)
    params = {"format": fmt, "name": args.name}
    if args.target:
        params["target"] = args.target
    resp = _request(args, "POST", f"{API}/datasets", params=params, content=blob)
    _emit(args, resp, lambda b: print(f"dataset {b['dataset_id']} uploaded"))


def cmd_dataset_get(args):
    resp = _request(args, "GET", f"{API}/datasets/{args.id}")

    def render(body):
        print(f"dataset {body['dataset_id']}: {body['name']} v{body['version']}")
        mf = body["meta_features"]
        print(f"instances: {mf['n_instances']}, attributes: {mf['n_attributes']} "
              f"({mf['n_numeric']} numeric, {mf['n_nominal']} nominal, "
              f"{mf['n_string']} string)")
        print(f"missing cells: {mf['n_missing_values']} ({mf['pct_missing']:.1%})")
        if "n_classes" in mf:
            print(f"classes: {mf['n_classes']}, entropy: {mf['class_entropy']:.4g} "
                  f"bits, default accuracy: {mf['default_accuracy']:.4g}")

    _emit(args, resp, render)


def cmd_dataset_file(args):
    resp = _request(args, "GET", f"{API}/datasets/{args.id}/file",
                    params={"format": args.format})
    _write_output(args, resp.content)


def cmd_dataset_summarize(args):
    blob = _read_file(args.file)
    fmt = args.format or _format_from_extension(args.file)
    try:
        ds = parse_blob(blob, fmt)
    except (ArffError, ContainerError, InvalidDataset, UnsupportedConversion) as exc:
        raise CliError(LOCAL_ERROR, str(exc)) from None
    summary = dataset_summary(ds)
    if args.json:
        sys.stdout.write(json.dumps(summary.to_json_dict(), sort_keys=True))
        return
    sys.stdout.write(summary.to_text())


def cmd_task_create(args):
    procedure = {"folds": args.folds, "repeats": args.repeats,
                 "stratified": not args.no_stratify}
    if args.seed is not None:
        procedure["seed"] = args.seed
    body = {"dataset_id": args.dataset, "target": args.target,
            "type": args.type, "procedure": procedure}
    resp = _request(args, "POST", f"{API}/tasks", json=body)

    def render(doc):
        print(f"task {doc['task_id']} created: predict {doc['target']!r} "
              f"on dataset {doc['dataset_id']} "
              f"({doc['procedure']['folds']}-fold, seed {doc['procedure']['seed']})")

    _emit(args, resp, render)


def cmd_task_get(args):
    resp = _request(args, "GET", f"{API}/tasks/{args.id}")

    def render(doc):
        proc = doc["procedure"]
        print(f"task {doc['task_id']}: {doc['task_type']}")
        print(f"dataset: {doc['dataset_id']} ({doc['dataset_url']})")
        print(f"target: {doc['target']}")
        print(f"procedure: {proc['folds']}-fold x{proc['repeats']}, "
              f"seed {proc['seed']}, "
              f"{'stratified' if proc['stratified'] else 'unstratified'}")
        print(f"measures: {', '.join(doc['measures'])}")
        print(f"submission columns: {', '.join(doc['submission_schema'])}")

    _emit(args, resp, render)


def cmd_flow_register(args):
    raw = _read_file(args.file)
    try:
        body = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise CliError(LOCAL_ERROR, f"{args.file}: not valid JSON ({exc})") from None
    resp = _request(args, "POST", f"{API}/flows", json=body)
    _emit(args, resp, lambda b: print(f"flow {b['flow_id']} registered"))


def cmd_flow_overview(args):
    resp = _request(args, "GET", f"{API}/flows/{args.id}/overview")

    def render(body):
        flow = body["flow"]
        print(f"flow {flow['flow_id']}: {flow['name']} v{flow['version']}")
        if not body["tasks"]:
            print("no runs yet")
            return
        for group in body["tasks"]:
            print(f"\ntask {group['task_id']} ({group['primary_measure']}), "
                  f"best: {_fmt_score(group['best_score'])} "
                  f"(run {group['best_run_id']})")
            rows = [[_settings_text(e["settings"]), e["run_id"],
                     _fmt_score(e["score"])] for e in group["entries"]]
            print(_table(["settings", "run", "score"], rows))

    _emit(args, resp, render)


def cmd_flow_param_impact(args):
    params = {"param": args.param, "measure": args.measure}
    if args.dataset is not None:
        params["dataset"] = args.dataset
    resp = _request(args, "GET", f"{API}/flows/{args.id}/parameter-impact",
                    params=params)

    def render(rows):
        print(_table(["value", "n_runs", "mean score"],
                     [[json.dumps(r["value"]), r["n_runs"],
                       _fmt_score(r["mean_score"])] for r in rows]))

    _emit(args, resp, render)


def cmd_run_submit(args):
    csv_text = _read_file(args.predictions).decode("utf-8", errors="replace")
    body = {"task_id": args.task, "flow_id": args.flow,
            "settings": _settings_from_params(args.param),
            "predictions": csv_text}
    resp = _request(args, "POST", f"{API}/runs", json=body)

    def render(created):
        print(f"run {created['run_id']} evaluated:")
        _render_evaluation(created["evaluation"])

    _emit(args, resp, render)


def _render_evaluation(evaluation: dict) -> None:
    rows = []
    for measure, agg in sorted(evaluation.items()):
        if measure == "confusion_matrix":
            continue
        rows.append([measure, _fmt_score(agg["mean"]), _fmt_score(agg["stdev"]),
                     len(agg["folds"]), len(agg["flags"])])
    print(_table(["measure", "mean", "stdev", "folds", "flags"], rows))


def cmd_run_get(args):
    resp = _request(args, "GET", f"{API}/runs/{args.id}")

    def render(body):
        who = (f"flow {body['flow_id']}" if body["flow_id"] is not None
               else f"solution {body['solution_name']!r}")
        print(f"run {body['run_id']} on task {body['task_id']} by {who}")
        _render_evaluation(body["evaluation"])

    _emit(args, resp, render)


def cmd_challenge_create(args):
    task_ids = _id_list(args.tasks)
    resp = _request(args, "POST", f"{API}/challenges",
                    json={"name": args.name, "task_ids": task_ids})
    _emit(args, resp, lambda b: print(f"challenge {b['challenge_id']} created"))


def cmd_challenge_leaderboard(args):
    resp = _request(args, "GET", f"{API}/challenges/{args.id}/leaderboard")

    def render(board):
        print(_table(["rank", "participant", "mean rank"],
                     [[r["rank"], r["participant"], f"{r['mean_rank']:.3g}"]
                      for r in board]))

    _emit(args, resp, render)


def cmd_challenge_solve(args):
    csv_text = _read_file(args.predictions).decode("utf-8", errors="replace")
    body = {"task_id": args.task, "name": args.name, "predictions": csv_text}
    resp = _request(args, "POST",
                    f"{API}/challenges/{args.challenge}/solutions", json=body)

    def render(created):
        print(f"solution evaluated as run {created['run_id']}:")
        _render_evaluation(created["evaluation"])

    _emit(args, resp, render)


def cmd_search(args):
    resp = _request(args, "GET", f"{API}/search", params={"q": args.query})

    def render(hits):
        if not hits:
            print("no matches")
            return
        print(_table(["kind", "id", "name"],
                     [[h["kind"], h["id"], h["name"]] for h in hits]))

    _emit(args, resp, render)


def cmd_compare(args):
    params = {"flows": args.flows, "datasets": args.datasets,
              "measure": args.measure, "format": args.format}
    resp = _request(args, "GET", f"{API}/compare", params=params)
    if args.format == "csv":
        _write_output(args, resp.content)
        return

    def render(result):
        headers = ["flow"] + [d["name"] for d in result["datasets"]]
        rows = []
        for flow, cells in zip(result["flows"], result["cells"]):
            rows.append([f"{flow['name']} v{flow['version']}"]
                        + [_fmt_score(c) for c in cells])
        print(_table(headers, rows))

    _emit(args, resp, render)


def cmd_dataset_leaderboard(args):
    resp = _request(args, "GET", f"{API}/datasets/{args.id}/leaderboard",
                    params={"measure": args.measure})

    def render(board):
        rows = []
        for e in board:
            who = e["flow"]["name"] if e["flow"] else e["solution_name"]
            rows.append([e["rank"], who, _settings_text(e["settings"]),
                         e["run_id"], _fmt_score(e["score"])])
        print(_table(["rank", "flow", "settings", "run", "score"], rows))

    _emit(args, resp, render)


def cmd_convert(args):
    blob = _read_file(args.infile)
    source = args.source or _format_from_extension(args.infile)
    target = args.target or _format_from_extension(args.outfile)
    try:
        out = convert(blob, source, target)
    except (ArffError, ContainerError, InvalidDataset, UnsupportedConversion) as exc:
        raise CliError(LOCAL_ERROR, str(exc)) from None
    try:
        Path(args.outfile).write_bytes(out)
    except OSError as exc:
        raise CliError(LOCAL_ERROR,
                       f"cannot write {args.outfile}: {exc.strerror}") from None


def _id_list(raw: str) -> list[int]:
    try:
        return [int(p) for p in raw.split(",") if p.strip()]
    except ValueError:
        raise CliError(USAGE_ERROR,
                       f"expected comma-separated ids, got {raw!r}") from None


# --- parser -------------------------------------------------------------------


def build_parser() -> Parser:
    parser = Parser(prog="expdb", description=__doc__,
                    formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--server", help="server URL (env EXPDB_SERVER)")
    parser.add_argument("--json", action="store_true",
                        help="emit the raw server JSON body")
    sub = parser.add_subparsers(dest="command", required=True)

    # dataset
    dataset = sub.add_parser("dataset", help="dataset operations")
    dsub = dataset.add_subparsers(dest="subcommand", required=True)
    p = dsub.add_parser("upload")
    p.add_argument("file")
    p.add_argument("--name", required=True)
    p.add_argument("--format", choices=["arff", "mld"])
    p.add_argument("--target")
    p.set_defaults(func=cmd_dataset_upload)
    p = dsub.add_parser("get")
    p.add_argument("id", type=int)
    p.set_defaults(func=cmd_dataset_get)
    p = dsub.add_parser("file")
    p.add_argument("id", type=int)
    p.add_argument("--format", choices=["arff", "mld", "csv"], default="arff")
    p.add_argument("--output")
    p.set_defaults(func=cmd_dataset_file)
    p = dsub.add_parser("summarize")
    p.add_argument("file")
    p.add_argument("--format", choices=["arff", "mld"])
    p.set_defaults(func=cmd_dataset_summarize)
    p = dsub.add_parser("leaderboard")
    p.add_argument("id", type=int)
    p.add_argument("--measure", required=True)
    p.set_defaults(func=cmd_dataset_leaderboard)

    # task
    task = sub.add_parser("task", help="task operations")
    tsub = task.add_subparsers(dest="subcommand", required=True)
    p = tsub.add_parser("create")
    p.add_argument("--dataset", type=int, required=True)
    p.add_argument("--target")
    p.add_argument("--type", default="supervised_classification",
                   choices=["supervised_classification", "supervised_regression"])
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--seed", type=int)
    p.add_argument("--no-stratify", action="store_true")
    p.set_defaults(func=cmd_task_create)
    p = tsub.add_parser("get")
    p.add_argument("id", type=int)
    p.set_defaults(func=cmd_task_get)

    # flow
    flow = sub.add_parser("flow", help="flow operations")
    fsub = flow.add_subparsers(dest="subcommand", required=True)
    p = fsub.add_parser("register")
    p.add_argument("file", help="JSON file with name/version/parameters/properties")
    p.set_defaults(func=cmd_flow_register)
    p = fsub.add_parser("overview")
    p.add_argument("id", type=int)
    p.set_defaults(func=cmd_flow_overview)
    p = fsub.add_parser("param-impact")
    p.add_argument("id", type=int)
    p.add_argument("--param", required=True)
    p.add_argument("--measure", required=True)
    p.add_argument("--dataset", type=int)
    p.set_defaults(func=cmd_flow_param_impact)

    # run
    run = sub.add_parser("run", help="run operations")
    rsub = run.add_subparsers(dest="subcommand", required=True)
    p = rsub.add_parser("submit")
    p.add_argument("predictions", help="CSV file in the task's submission schema")
    p.add_argument("--task", type=int, required=True)
    p.add_argument("--flow", type=int, required=True)
    p.add_argument("--param", action="append",
                   help="parameter setting name=value (repeatable)")
    p.set_defaults(func=cmd_run_submit)
    p = rsub.add_parser("get")
    p.add_argument("id", type=int)
    p.set_defaults(func=cmd_run_get)

    # challenge
    challenge = sub.add_parser("challenge", help="challenge operations")
    csub = challenge.add_subparsers(dest="subcommand", required=True)
    p = csub.add_parser("create")
    p.add_argument("--name", required=True)
    p.add_argument("--tasks", required=True, help="comma-separated task ids")
    p.set_defaults(func=cmd_challenge_create)
    p = csub.add_parser("leaderboard")
    p.add_argument("id", type=int)
    p.set_defaults(func=cmd_challenge_leaderboard)
    p = csub.add_parser("solve")
    p.add_argument("predictions")
    p.add_argument("--challenge", type=int, required=True)
    p.add_argument("--task", type=int, required=True)
    p.add_argument("--name", required=True)
    p.set_defaults(func=cmd_challenge_solve)

    # search / compare / convert
    p = sub.add_parser("search", help="keyword search")
    p.add_argument("query")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("compare", help="score matrix of flows x datasets")
    p.add_argument("--flows", required=True, help="comma-separated flow ids")
    p.add_argument("--datasets", required=True, help="comma-separated dataset ids")
    p.add_argument("--measure", required=True)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--output")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("convert", help="convert a dataset file offline")
    p.add_argument("infile")
    p.add_argument("outfile")
    p.add_argument("--from", dest="source", choices=["arff", "mld"],
                   help="source format (default: from extension)")
    p.add_argument("--to", dest="target", choices=["arff", "mld", "csv"],
                   help="target format (default: from extension)")
    p.set_defaults(func=cmd_convert)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.func(args)
        return 0
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
