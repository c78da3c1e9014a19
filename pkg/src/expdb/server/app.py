"""REST API over a store: upload datasets, generate tasks, register
flows, evaluate submitted runs, and query the aggregated results.

Every error body has the shape ``{"error": {"code", "message",
"details"}}``.  Malformed bodies are 400, unknown routes and ids 404,
incompatible duplicates 409, semantic failures 422.
"""

from __future__ import annotations

from fastapi import FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response
from starlette.exceptions import HTTPException as StarletteHTTPException

from ..errors import EmptyInput, LengthMismatch
from ..evaluation import (
    PredictionFormatError,
    ValidationFailed,
    parse_predictions_csv,
)
from ..formats import (
    FORMAT_ARFF,
    FORMAT_CSV,
    FORMAT_MLD,
    SOURCE_FORMATS,
    InvalidDataset,
    UnknownAttribute,
    UnsupportedConversion,
    convert,
)
from ..measures import UnknownMeasure
from ..registry import (
    BlobIntegrityError,
    ConflictingFlow,
    DuplicateParameter,
    EmptyChallenge,
    FlowParameter,
    FlowProperties,
    InvalidFlowDefinition,
    InvalidParameterValue,
    ParseFailed,
    Store,
    TaskNotInChallenge,
    UnknownChallenge,
    UnknownDataset,
    UnknownFlow,
    UnknownParameter,
    UnknownRun,
    UnknownTask,
    challenge_leaderboard,
    compare,
    compare_csv,
    flow_overview,
    leaderboard,
    parameter_impact,
    search,
    solve_challenge,
)
from ..tasks import (
    EstimationProcedure,
    InvalidProcedure,
    TargetKindMismatch,
    TooFewInstances,
    task_document,
)
from .schemas import (
    ChallengeCreateRequest,
    ChallengeCreated,
    DatasetCreated,
    FlowCreateRequest,
    FlowCreated,
    RunCreated,
    RunSubmitRequest,
    SolutionSubmitRequest,
    TaskCreateRequest,
)

API = "/api/v1"

_FILE_MEDIA_TYPES = {
    FORMAT_ARFF: "text/plain; charset=utf-8",
    FORMAT_CSV: "text/csv; charset=utf-8",
    FORMAT_MLD: "application/octet-stream",
}


class MalformedQuery(ValueError):
    code = "malformed_query"


_ERROR_STATUS = [
    (UnknownDataset, 404), (UnknownFlow, 404), (UnknownTask, 404),
    (UnknownRun, 404), (UnknownChallenge, 404),
    (ParseFailed, 400), (PredictionFormatError, 400), (MalformedQuery, 400),
    (UnsupportedConversion, 400),
    (ConflictingFlow, 409),
    (ValidationFailed, 422), (UnknownAttribute, 422), (TargetKindMismatch, 422),
    (TooFewInstances, 422), (InvalidProcedure, 422), (UnknownParameter, 422),
    (InvalidParameterValue, 422), (InvalidFlowDefinition, 422),
    (DuplicateParameter, 422), (EmptyChallenge, 422), (TaskNotInChallenge, 422),
    (UnknownMeasure, 422), (EmptyInput, 422), (LengthMismatch, 422),
    (InvalidDataset, 422),
    (BlobIntegrityError, 500),
]


def _error_response(status: int, code: str, message: str,
                    details: list | None = None) -> JSONResponse:
    return JSONResponse(
        status_code=status,
        content={"error": {"code": code, "message": message,
                           "details": details or []}},
    )


def _error_details(exc: Exception) -> list:
    if isinstance(exc, ValidationFailed):
        return [v.to_dict() for v in exc.violations]
    return []


def create_app(store: Store) -> FastAPI:
    app = FastAPI(title="expdb", docs_url=None, redoc_url=None, openapi_url=None)
    app.state.store = store

    for exc_type, status in _ERROR_STATUS:
        def handler(request: Request, exc: Exception, _status=status):
            code = getattr(exc, "code", "error")
            return _error_response(_status, code, str(exc), _error_details(exc))
        app.add_exception_handler(exc_type, handler)

    @app.exception_handler(RequestValidationError)
    def validation_handler(request: Request, exc: RequestValidationError):
        details = [
            {"loc": [str(p) for p in err.get("loc", [])],
             "message": err.get("msg", "")}
            for err in exc.errors()
        ]
        return _error_response(400, "malformed_body", "request failed validation",
                               details)

    @app.exception_handler(StarletteHTTPException)
    def http_handler(request: Request, exc: StarletteHTTPException):
        code = {404: "not_found", 405: "method_not_allowed"}.get(
            exc.status_code, "http_error")
        return _error_response(exc.status_code, code, str(exc.detail))

    @app.exception_handler(Exception)
    def fallback_handler(request: Request, exc: Exception):
        return _error_response(500, "internal_error", str(exc))

    # --- datasets ----------------------------------------------------------

    @app.post(API + "/datasets", status_code=201, response_model=DatasetCreated)
    async def upload_dataset(request: Request, name: str,
                             format: str = Query(...),
                             target: str | None = None):
        if format not in SOURCE_FORMATS:
            raise MalformedQuery(f"format must be one of {list(SOURCE_FORMATS)}")
        blob = await request.body()
        record = store.register_dataset(blob, format, name, default_target=target)
        return DatasetCreated(dataset_id=record.dataset_id)

    @app.get(API + "/datasets/{dataset_id}")
    def get_dataset(dataset_id: int):
        return store.get_dataset(dataset_id).to_json_dict()

    @app.get(API + "/datasets/{dataset_id}/file")
    def download_dataset(dataset_id: int, format: str = Query(FORMAT_ARFF)):
        record = store.get_dataset(dataset_id)
        if format not in _FILE_MEDIA_TYPES:
            raise MalformedQuery(
                f"format must be one of {sorted(_FILE_MEDIA_TYPES)}")
        blob = store.get_blob(record.blob_ref)
        converted = convert(blob, record.original_format, format)
        return Response(content=converted, media_type=_FILE_MEDIA_TYPES[format])

    @app.get(API + "/datasets/{dataset_id}/leaderboard")
    def dataset_leaderboard(dataset_id: int, measure: str = Query(...),
                            limit: int = Query(100, ge=0),
                            offset: int = Query(0, ge=0)):
        return leaderboard(store, dataset_id, measure)[offset:offset + limit]

    # --- tasks --------------------------------------------------------------

    @app.post(API + "/tasks", status_code=201)
    def create_task(body: TaskCreateRequest):
        proc = EstimationProcedure(
            folds=body.procedure.folds,
            repeats=body.procedure.repeats,
            seed=body.procedure.seed,
            stratified=body.procedure.stratified,
        )
        task = store.create_task(body.dataset_id, body.target, body.type, proc)
        return Response(content=task_document(task), status_code=201,
                        media_type="application/json")

    @app.get(API + "/tasks/{task_id}")
    def get_task(task_id: int):
        task = store.get_task(task_id)
        return Response(content=task_document(task), media_type="application/json")

    # --- flows --------------------------------------------------------------

    @app.post(API + "/flows", status_code=201, response_model=FlowCreated)
    def register_flow(body: FlowCreateRequest):
        record = store.register_flow(
            body.name, body.version,
            [FlowParameter(p.name, p.kind, p.default) for p in body.parameters],
            FlowProperties(
                task_types=tuple(body.properties.task_types),
                handles_missing=body.properties.handles_missing,
                handles_nominal=body.properties.handles_nominal,
            ),
        )
        return FlowCreated(flow_id=record.flow_id)

    @app.get(API + "/flows/{flow_id}/overview")
    def get_flow_overview(flow_id: int):
        return flow_overview(store, flow_id)

    @app.get(API + "/flows/{flow_id}/parameter-impact")
    def get_parameter_impact(flow_id: int, param: str = Query(...),
                             measure: str = Query(...),
                             dataset: int | None = Query(None)):
        return parameter_impact(store, flow_id, param, measure, dataset)

    # --- runs ---------------------------------------------------------------

    @app.post(API + "/runs", status_code=201, response_model=RunCreated)
    def submit_run(body: RunSubmitRequest):
        task = store.get_task(body.task_id)
        store.get_flow(body.flow_id)
        pset = parse_predictions_csv(body.predictions, task)
        record = store.submit_run(body.task_id, body.flow_id, body.settings, pset)
        return RunCreated(run_id=record.run_id,
                          evaluation=record.evaluation.to_json_dict())

    @app.get(API + "/runs/{run_id}")
    def get_run(run_id: int):
        return store.get_run(run_id).to_json_dict()

    # --- challenges ---------------------------------------------------------

    @app.post(API + "/challenges", status_code=201, response_model=ChallengeCreated)
    def create_challenge(body: ChallengeCreateRequest):
        record = store.create_challenge(body.name, body.task_ids)
        return ChallengeCreated(challenge_id=record.challenge_id)

    @app.get(API + "/challenges/{challenge_id}/leaderboard")
    def get_challenge_leaderboard(challenge_id: int,
                                  limit: int = Query(100, ge=0),
                                  offset: int = Query(0, ge=0)):
        return challenge_leaderboard(store, challenge_id)[offset:offset + limit]

    @app.post(API + "/challenges/{challenge_id}/solutions", status_code=201,
              response_model=RunCreated)
    def submit_solution(challenge_id: int, body: SolutionSubmitRequest):
        store.get_challenge(challenge_id)
        task = store.get_task(body.task_id)
        pset = parse_predictions_csv(body.predictions, task)
        record = solve_challenge(store, challenge_id, body.task_id, body.name, pset)
        return RunCreated(run_id=record.run_id,
                          evaluation=record.evaluation.to_json_dict())

    # --- search and comparison ----------------------------------------------

    @app.get(API + "/search")
    def search_entities(q: str = Query(""), limit: int = Query(100, ge=0),
                        offset: int = Query(0, ge=0)):
        return search(store, q)[offset:offset + limit]

    @app.get(API + "/compare")
    def compare_entities(flows: str = Query(...), datasets: str = Query(...),
                         measure: str = Query(...),
                         format: str = Query("json")):
        if format not in ("json", "csv"):
            raise MalformedQuery("format must be json or csv")
        result = compare(store, _id_list(flows, "flows"),
                         _id_list(datasets, "datasets"), measure)
        if format == "csv":
            return Response(content=compare_csv(result),
                            media_type="text/csv; charset=utf-8")
        return result

    return app


def _id_list(raw: str, name: str) -> list[int]:
    try:
        return [int(part) for part in raw.split(",") if part.strip()]
    except ValueError:
        raise MalformedQuery(f"{name} must be a comma-separated list of ids") from None
