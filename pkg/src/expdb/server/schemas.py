"""Pydantic request/response models for the REST API."""

from __future__ import annotations

from typing import Any, Literal

from pydantic import BaseModel, Field


class ProcedureOverrides(BaseModel):
    folds: int = 10
    repeats: int = 1
    seed: int | None = None
    stratified: bool = True


class TaskCreateRequest(BaseModel):
    dataset_id: int
    target: str | None = None
    type: Literal["supervised_classification", "supervised_regression"]
    procedure: ProcedureOverrides = Field(default_factory=ProcedureOverrides)


class FlowParameterModel(BaseModel):
    name: str
    kind: Literal["int", "float", "text", "flag"]
    default: Any = None


class FlowPropertiesModel(BaseModel):
    task_types: list[str] = Field(default_factory=list)
    handles_missing: bool = False
    handles_nominal: bool = False


class FlowCreateRequest(BaseModel):
    name: str
    version: str
    parameters: list[FlowParameterModel] = Field(default_factory=list)
    properties: FlowPropertiesModel = Field(default_factory=FlowPropertiesModel)


class RunSubmitRequest(BaseModel):
    task_id: int
    flow_id: int
    settings: dict[str, Any] = Field(default_factory=dict)
    predictions: str  # inline CSV text in the task's submission schema


class ChallengeCreateRequest(BaseModel):
    name: str
    task_ids: list[int]


class SolutionSubmitRequest(BaseModel):
    task_id: int
    name: str
    predictions: str


class DatasetCreated(BaseModel):
    dataset_id: int


class FlowCreated(BaseModel):
    flow_id: int


class RunCreated(BaseModel):
    run_id: int
    evaluation: dict


class ChallengeCreated(BaseModel):
    challenge_id: int
