"""Acceptance suite: one test per criterion, each printing a PASS line
with its elapsed time.  Tolerances and budgets are pinned here.
"""

import hashlib
import random
import shutil
import time
from collections import Counter

import httpx
from fastapi.testclient import TestClient

from expdb.formats import (
    ArffError,
    ContainerError,
    decode_container,
    encode_container,
    parse_arff,
    write_arff,
)
from expdb.metrics import (
    accuracy,
    auc_binary,
    confusion,
    mae,
    precision_recall_f1_macro,
    rmse,
)
from expdb.registry import challenge_leaderboard, open_store
from expdb.server import create_app
from expdb.tasks import EstimationProcedure, generate_splits, splitmix64_next

from conftest import labeled_arff, predictions_for
from datagen import random_dataset
from oracles import brute_accuracy, brute_auc, brute_mae, brute_prf_macro, brute_rmse

TOL = 1e-12


def _report(criterion, description, started):
    print(f"PASS criterion {criterion}: {description} "
          f"({time.perf_counter() - started:.2f}s)")


def test_criterion_1_format_roundtrips():
    started = time.perf_counter()
    rng = random.Random(0xC1)
    for i in range(50):
        ds = random_dataset(rng, min_rows=1, max_rows=200, max_attrs=20)
        ds.validate()
        assert parse_arff(write_arff(ds)) == ds, f"ARFF round-trip failed (case {i})"
        assert decode_container(encode_container(ds)) == ds, \
            f"container round-trip failed (case {i})"
    elapsed = time.perf_counter() - started
    assert elapsed < 10.0, f"took {elapsed:.1f}s, budget 10s"
    _report(1, "50/50 random datasets survive both round-trips", started)


def test_criterion_2_parser_robustness():
    started = time.perf_counter()
    rng = random.Random(0xC2)

    def mutate_bytes(blob: bytearray) -> bytes:
        op = rng.randrange(4)
        if not blob:
            return bytes(rng.randbytes(rng.randint(0, 64)))
        pos = rng.randrange(len(blob))
        if op == 0:
            blob[pos] ^= rng.randint(1, 255)
        elif op == 1:
            del blob[pos:pos + rng.randint(1, 16)]
        elif op == 2:
            blob[pos:pos] = rng.randbytes(rng.randint(1, 16))
        else:
            return bytes(blob[:pos])
        return bytes(blob)

    seeds_arff = [write_arff(random_dataset(rng, max_rows=10, max_attrs=5))
                  for _ in range(20)]
    seeds_mld = [encode_container(random_dataset(rng, max_rows=10, max_attrs=5))
                 for _ in range(20)]

    n_arff = n_mld = 0
    for i in range(6000):
        if i % 3 == 0:
            text = rng.randbytes(rng.randint(0, 200)).decode("latin-1")
        else:
            text = mutate_bytes(
                bytearray(rng.choice(seeds_arff).encode())).decode("latin-1")
        try:
            parse_arff(text)
        except ArffError:
            pass
        n_arff += 1
    for i in range(6000):
        if i % 3 == 0:
            blob = rng.randbytes(rng.randint(0, 200))
        else:
            blob = mutate_bytes(bytearray(rng.choice(seeds_mld)))
        try:
            decode_container(blob)
        except ContainerError:
            pass
        n_mld += 1

    elapsed = time.perf_counter() - started
    assert n_arff + n_mld >= 10_000
    assert elapsed < 60.0, f"took {elapsed:.1f}s, budget 60s"
    _report(2, f"{n_arff + n_mld} fuzzed inputs, zero crashes", started)


def test_criterion_3_metric_oracle_equivalence():
    started = time.perf_counter()
    rng = random.Random(0xC3)
    classes = ("a", "b", "c")

    for _ in range(1000):
        n = rng.randint(1, 30)
        y_true = [rng.choice(classes) for _ in range(n)]
        y_pred = [rng.choice(classes) for _ in range(n)]
        assert abs(accuracy(y_true, y_pred) - brute_accuracy(y_true, y_pred)) <= TOL
        ours = precision_recall_f1_macro(confusion(y_true, y_pred, classes))
        ref = brute_prf_macro(y_true, y_pred, classes)
        for key in ("precision", "recall", "f1"):
            assert abs(ours[key] - ref[key]) <= TOL

    for _ in range(1000):
        n = rng.randint(2, 30)
        labels = [rng.random() < 0.5 for _ in range(n)]
        if all(labels) or not any(labels):
            labels[0] = not labels[0]
        scores = [round(rng.random(), rng.choice([1, 2, 6])) for _ in range(n)]
        ours = auc_binary(labels, scores)
        assert abs(ours - brute_auc(labels, scores)) <= TOL
        flipped = [not t for t in labels]
        assert abs(ours + auc_binary(flipped, scores) - 1.0) <= TOL

    for _ in range(1000):
        n = rng.randint(1, 30)
        y = [rng.uniform(-100, 100) for _ in range(n)]
        p = [rng.uniform(-100, 100) for _ in range(n)]
        assert abs(rmse(y, p) - brute_rmse(y, p)) <= TOL
        assert abs(mae(y, p) - brute_mae(y, p)) <= TOL

    elapsed = time.perf_counter() - started
    assert elapsed < 10.0, f"took {elapsed:.1f}s, budget 10s"
    _report(3, "accuracy/P/R/F1/AUC/RMSE/MAE match brute-force oracles", started)


def test_criterion_4_split_determinism_and_balance():
    started = time.perf_counter()
    state, out = splitmix64_next(0)
    assert out == 0xE220A8397B1DCDAF, "splitmix64 reference vector"

    rng = random.Random(0xC4)
    for _ in range(100):
        n = rng.randint(2, 150)
        k = rng.randint(2, min(n, 10))
        seed = rng.getrandbits(64)
        labels = [rng.randint(0, 4) for _ in range(n)]
        proc = EstimationProcedure(folds=k, repeats=rng.randint(1, 2),
                                   seed=seed, stratified=True)
        first = generate_splits(labels, proc)
        second = generate_splits(labels, proc)
        assert first == second, "identical seed must give bit-identical splits"
        for rep in range(proc.repeats):
            sizes = Counter(f for (r, _), f in first.assignment.items() if r == rep)
            counts = [sizes.get(f, 0) for f in range(k)]
            assert max(counts) - min(counts) <= 1, "fold sizes within 1"
            for cls in set(labels):
                per_fold = Counter(first.assignment[(rep, i)]
                                   for i, lab in enumerate(labels) if lab == cls)
                cls_counts = [per_fold.get(f, 0) for f in range(k)]
                assert max(cls_counts) - min(cls_counts) <= 1, \
                    "per-class counts within 1"

    elapsed = time.perf_counter() - started
    assert elapsed < 5.0, f"took {elapsed:.1f}s, budget 5s"
    _report(4, "100 random split triples deterministic and balanced", started)


def test_criterion_5_end_to_end_rest_loop(live_server, store):
    started = time.perf_counter()
    client = httpx.Client(base_url=live_server, timeout=30.0)

    # 150 rows, 3 classes, counts divisible by k=10
    blob = labeled_arff({"a": 60, "b": 50, "c": 40}, relation="acceptance")
    resp = client.post("/api/v1/datasets",
                       params={"format": "arff", "name": "acceptance",
                               "target": "class"},
                       content=blob)
    assert resp.status_code == 201
    dataset_id = resp.json()["dataset_id"]

    default_accuracy = client.get(
        f"/api/v1/datasets/{dataset_id}").json()["meta_features"]["default_accuracy"]
    assert abs(default_accuracy - 0.4) <= TOL

    resp = client.post("/api/v1/tasks", json={
        "dataset_id": dataset_id, "target": "class",
        "type": "supervised_classification",
        "procedure": {"folds": 10, "seed": 20240809, "stratified": True}})
    assert resp.status_code == 201
    doc = resp.json()

    resp = client.post("/api/v1/flows", json={"name": "majority", "version": "1.0"})
    flow_id = resp.json()["flow_id"]

    schema = doc["submission_schema"]
    lines = [",".join(schema)]
    for rep_pairs in [doc["splits"]["assignment"][0]]:
        for row_index, fold in rep_pairs:
            confidences = ["1.0" if c == "confidence.a" else "0.0"
                           for c in schema[4:]]
            lines.append(",".join(["0", str(fold), str(row_index), "a"]
                                  + confidences))
    csv_text = "\n".join(lines) + "\n"

    resp = client.post("/api/v1/runs", json={
        "task_id": doc["task_id"], "flow_id": flow_id, "settings": {},
        "predictions": csv_text})
    assert resp.status_code == 201, resp.text
    created = resp.json()
    mean_accuracy = created["evaluation"]["predictive_accuracy"]["mean"]
    assert abs(mean_accuracy - default_accuracy) <= TOL, \
        f"majority accuracy {mean_accuracy} != default accuracy {default_accuracy}"

    board = client.get(f"/api/v1/datasets/{dataset_id}/leaderboard",
                       params={"measure": "predictive_accuracy"}).json()
    assert board[0]["rank"] == 1
    assert board[0]["run_id"] == created["run_id"]

    elapsed = time.perf_counter() - started
    assert elapsed < 5.0, f"took {elapsed:.1f}s, budget 5s"
    _report(5, "REST loop: majority accuracy == default accuracy, ranked 1st",
            started)


def test_criterion_6_challenge_scoring(store):
    started = time.perf_counter()
    record = store.register_dataset(labeled_arff({"a": 5, "b": 5}), "arff", "toy",
                                    default_target="class")
    t1 = store.create_task(record.dataset_id, "class", "supervised_classification",
                           EstimationProcedure(folds=2, seed=1))
    t2 = store.create_task(record.dataset_id, "class", "supervised_classification",
                           EstimationProcedure(folds=2, seed=2))
    ds = store.dataset_data(record.dataset_id)

    def submit(task, who, n_correct):
        store.submit_solution(task.task_id, who,
                              predictions_for(task, ds,
                                              correct_rows=set(range(n_correct))))

    # hand-computed table:
    #   t1: alice 1.0 (rank 1), bob 0.8 (rank 2), carol 0.6 (rank 3)
    #   t2: bob 1.0 (rank 1), alice 0.8 (rank 2); carol missing -> 2+1 = 3
    #   mean ranks: alice 1.5, bob 1.5 (tie -> name order), carol 3.0
    submit(t1, "alice", 10)
    submit(t1, "bob", 8)
    submit(t1, "carol", 6)
    submit(t2, "bob", 10)
    submit(t2, "alice", 8)
    challenge = store.create_challenge("cup", [t1.task_id, t2.task_id])

    board = challenge_leaderboard(store, challenge.challenge_id)
    assert [(r["participant"], r["mean_rank"]) for r in board] == [
        ("alice", 1.5), ("bob", 1.5), ("carol", 3.0)]
    assert board[2]["task_ranks"][str(t2.task_id)] == 3  # (n=2) + 1 penalty
    _report(6, "challenge mean-ranks match the hand-computed table", started)


def test_criterion_7_crash_consistency(tmp_path):
    started = time.perf_counter()
    root = tmp_path / "store"
    with open_store(root) as store:
        for i in range(8):
            counts = {"a": 2 + i, "b": 2}
            store.register_dataset(labeled_arff(counts, relation=f"d{i}"),
                                   "arff", f"d{i}", default_target="class")

    log_path = root / "log" / "datasets.jsonl"
    original = log_path.read_bytes()
    rng = random.Random(0xC7)

    for trial in range(20):
        offset = rng.randint(0, len(original))
        work = tmp_path / f"trial{trial}"
        shutil.copytree(root, work)
        (work / "log" / "datasets.jsonl").write_bytes(original[:offset])
        expected = original[:offset].count(b"\n")

        with open_store(work) as recovered:
            view = recovered.view()
            assert len(view.datasets) == expected, \
                f"offset {offset}: {len(view.datasets)} != {expected} complete lines"
            seen = set()
            for record in view.datasets.values():
                key = (record.name, record.version)
                assert key not in seen, "duplicate (name, version)"
                seen.add(key)
                blob = recovered.get_blob(record.blob_ref)
                assert hashlib.sha256(blob).hexdigest() == record.blob_ref
                assert record.meta_features["n_instances"] >= 0
        shutil.rmtree(work)

    _report(7, "20 random log truncations recover exactly the complete lines",
            started)


def test_criterion_8_api_conformance(store):
    started = time.perf_counter()
    app = create_app(store)
    client = TestClient(app, raise_server_exceptions=False)

    def check_error(resp, *allowed):
        assert resp.status_code in allowed, \
            f"{resp.request.method} {resp.request.url}: {resp.status_code} not in {allowed}"
        body = resp.json()
        assert set(body) == {"error"}, body
        assert set(body["error"]) == {"code", "message", "details"}

    # seed minimal content
    blob = labeled_arff({"a": 3, "b": 3})
    resp = client.post("/api/v1/datasets",
                       params={"format": "arff", "name": "toy", "target": "class"},
                       content=blob)
    assert resp.status_code == 201
    dataset_id = resp.json()["dataset_id"]
    doc = client.post("/api/v1/tasks", json={
        "dataset_id": dataset_id, "target": "class",
        "type": "supervised_classification",
        "procedure": {"folds": 2, "seed": 5}}).json()
    task_id = doc["task_id"]
    flow_id = client.post("/api/v1/flows", json={
        "name": "f", "version": "1",
        "parameters": [{"name": "d", "kind": "int", "default": 1}]}).json()["flow_id"]
    task = store.get_task(task_id)
    ds = store.dataset_data(dataset_id)
    from expdb.evaluation import render_predictions_csv
    good_csv = render_predictions_csv(predictions_for(task, ds), task)
    run_id = client.post("/api/v1/runs", json={
        "task_id": task_id, "flow_id": flow_id, "settings": {},
        "predictions": good_csv}).json()["run_id"]
    challenge_id = client.post("/api/v1/challenges", json={
        "name": "cup", "task_ids": [task_id]}).json()["challenge_id"]

    # valid requests succeed
    for path in (f"/api/v1/datasets/{dataset_id}",
                 f"/api/v1/datasets/{dataset_id}/file?format=csv",
                 f"/api/v1/datasets/{dataset_id}/leaderboard?measure=predictive_accuracy",
                 f"/api/v1/tasks/{task_id}",
                 f"/api/v1/flows/{flow_id}/overview",
                 f"/api/v1/flows/{flow_id}/parameter-impact?param=d&measure=predictive_accuracy",
                 f"/api/v1/runs/{run_id}",
                 f"/api/v1/challenges/{challenge_id}/leaderboard",
                 "/api/v1/search?q=toy",
                 f"/api/v1/compare?flows={flow_id}&datasets={dataset_id}"
                 f"&measure=predictive_accuracy"):
        resp = client.get(path)
        assert resp.status_code == 200, f"{path}: {resp.status_code}"

    # unknown ids -> 404 with error schema
    for path in ("/api/v1/datasets/999",
                 "/api/v1/datasets/999/file",
                 "/api/v1/datasets/999/leaderboard?measure=predictive_accuracy",
                 "/api/v1/tasks/999",
                 "/api/v1/flows/999/overview",
                 "/api/v1/flows/999/parameter-impact?param=d&measure=predictive_accuracy",
                 "/api/v1/runs/999",
                 "/api/v1/challenges/999/leaderboard",
                 "/api/v1/compare?flows=999&datasets=1&measure=predictive_accuracy"):
        check_error(client.get(path), 404)
    check_error(client.get("/api/v1/nowhere"), 404)

    # malformed requests -> 400 with error schema
    check_error(client.post("/api/v1/datasets",
                            params={"format": "arff", "name": "x"},
                            content=b"junk"), 400)
    check_error(client.post("/api/v1/datasets",
                            params={"format": "xls", "name": "x"},
                            content=blob), 400)
    check_error(client.post("/api/v1/tasks", json={"dataset_id": "NaN"}), 400)
    check_error(client.post("/api/v1/tasks", content=b"{not json",
                            headers={"content-type": "application/json"}), 400)
    check_error(client.post("/api/v1/runs", json={
        "task_id": task_id, "flow_id": flow_id, "settings": {},
        "predictions": "bad,header\n"}), 400)
    check_error(client.get(f"/api/v1/datasets/{dataset_id}/file?format=hdf5"), 400)
    check_error(client.get("/api/v1/compare?flows=a,b&datasets=1"
                           "&measure=predictive_accuracy"), 400)

    # semantic failures -> 422 with error schema
    check_error(client.post("/api/v1/tasks", json={
        "dataset_id": dataset_id, "target": "class",
        "type": "supervised_regression", "procedure": {"folds": 2}}), 422)
    check_error(client.post("/api/v1/tasks", json={
        "dataset_id": dataset_id, "target": "zz",
        "type": "supervised_classification"}), 422)
    incomplete = "\n".join(good_csv.strip().split("\n")[:-1]) + "\n"
    resp = client.post("/api/v1/runs", json={
        "task_id": task_id, "flow_id": flow_id, "settings": {},
        "predictions": incomplete})
    check_error(resp, 422)
    assert any(d["code"] == "missing_prediction"
               for d in resp.json()["error"]["details"])
    check_error(client.post("/api/v1/runs", json={
        "task_id": task_id, "flow_id": flow_id,
        "settings": {"nope": 1}, "predictions": good_csv}), 422)
    check_error(client.post("/api/v1/challenges",
                            json={"name": "x", "task_ids": []}), 422)
    check_error(client.get(
        f"/api/v1/datasets/{dataset_id}/leaderboard?measure=zz"), 422)

    # conflict -> 409
    check_error(client.post("/api/v1/flows", json={
        "name": "f", "version": "1",
        "parameters": [{"name": "d", "kind": "int", "default": 2}]}), 409)

    # GET sequences leave store bytes unchanged
    def digest():
        h = hashlib.sha256()
        for path in sorted(store.root.rglob("*")):
            if path.is_file():
                h.update(str(path.relative_to(store.root)).encode())
                h.update(path.read_bytes())
        return h.hexdigest()

    before = digest()
    for path in (f"/api/v1/datasets/{dataset_id}",
                 f"/api/v1/datasets/{dataset_id}/file?format=mld",
                 f"/api/v1/tasks/{task_id}",
                 f"/api/v1/runs/{run_id}",
                 "/api/v1/search?q=toy",
                 "/api/v1/nowhere",
                 f"/api/v1/challenges/{challenge_id}/leaderboard"):
        client.get(path)
    assert digest() == before, "GETs must not change store bytes"

    _report(8, "endpoint sweep: statuses, error schema, read-only GETs", started)
