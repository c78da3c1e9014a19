"""Persistent record types and their JSON log representations."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..evaluation import EvaluationResult

PARAMETER_KINDS = ("int", "float", "text", "flag")


@dataclass(frozen=True)
class DatasetRecord:
    dataset_id: int
    name: str
    version: int
    original_format: str
    blob_ref: str
    meta_features: dict
    upload_time: str
    default_target: str | None = None

    def to_json_dict(self) -> dict:
        return {
            "dataset_id": self.dataset_id,
            "name": self.name,
            "version": self.version,
            "original_format": self.original_format,
            "blob_ref": self.blob_ref,
            "meta_features": self.meta_features,
            "upload_time": self.upload_time,
            "default_target": self.default_target,
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "DatasetRecord":
        return cls(
            dataset_id=doc["dataset_id"],
            name=doc["name"],
            version=doc["version"],
            original_format=doc["original_format"],
            blob_ref=doc["blob_ref"],
            meta_features=doc["meta_features"],
            upload_time=doc["upload_time"],
            default_target=doc["default_target"],
        )


@dataclass(frozen=True)
class FlowParameter:
    name: str
    kind: str
    default: object = None

    def to_json_dict(self) -> dict:
        return {"name": self.name, "kind": self.kind, "default": self.default}


@dataclass(frozen=True)
class FlowProperties:
    task_types: tuple[str, ...] = ()
    handles_missing: bool = False
    handles_nominal: bool = False

    def to_json_dict(self) -> dict:
        return {
            "task_types": list(self.task_types),
            "handles_missing": self.handles_missing,
            "handles_nominal": self.handles_nominal,
        }


@dataclass(frozen=True)
class FlowRecord:
    flow_id: int
    name: str
    version: str
    parameters: tuple[FlowParameter, ...] = ()
    properties: FlowProperties = field(default_factory=FlowProperties)

    def parameter(self, name: str) -> FlowParameter | None:
        for p in self.parameters:
            if p.name == name:
                return p
        return None

    def to_json_dict(self) -> dict:
        return {
            "flow_id": self.flow_id,
            "name": self.name,
            "version": self.version,
            "parameters": [p.to_json_dict() for p in self.parameters],
            "properties": self.properties.to_json_dict(),
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "FlowRecord":
        return cls(
            flow_id=doc["flow_id"],
            name=doc["name"],
            version=doc["version"],
            parameters=tuple(
                FlowParameter(p["name"], p["kind"], p["default"])
                for p in doc["parameters"]),
            properties=FlowProperties(
                task_types=tuple(doc["properties"]["task_types"]),
                handles_missing=doc["properties"]["handles_missing"],
                handles_nominal=doc["properties"]["handles_nominal"],
            ),
        )


@dataclass(frozen=True)
class RunRecord:
    run_id: int
    task_id: int
    flow_id: int | None
    solution_name: str | None
    parameter_settings: tuple[tuple[str, object], ...]
    evaluation: EvaluationResult
    predictions_ref: str
    upload_time: str

    @property
    def is_solution(self) -> bool:
        return self.flow_id is None

    def settings_dict(self) -> dict:
        return dict(self.parameter_settings)

    def to_json_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "task_id": self.task_id,
            "flow_id": self.flow_id,
            "solution_name": self.solution_name,
            "parameter_settings": [
                {"name": n, "value": v} for n, v in self.parameter_settings],
            "evaluation": self.evaluation.to_json_dict(),
            "predictions_ref": self.predictions_ref,
            "upload_time": self.upload_time,
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "RunRecord":
        return cls(
            run_id=doc["run_id"],
            task_id=doc["task_id"],
            flow_id=doc["flow_id"],
            solution_name=doc["solution_name"],
            parameter_settings=tuple(
                (s["name"], s["value"]) for s in doc["parameter_settings"]),
            evaluation=EvaluationResult.from_json_dict(doc["evaluation"]),
            predictions_ref=doc["predictions_ref"],
            upload_time=doc["upload_time"],
        )


@dataclass(frozen=True)
class ChallengeRecord:
    challenge_id: int
    name: str
    task_ids: tuple[int, ...]
    aggregate_rule: str = "mean-rank"

    def to_json_dict(self) -> dict:
        return {
            "challenge_id": self.challenge_id,
            "name": self.name,
            "task_ids": list(self.task_ids),
            "aggregate_rule": self.aggregate_rule,
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "ChallengeRecord":
        return cls(
            challenge_id=doc["challenge_id"],
            name=doc["name"],
            task_ids=tuple(doc["task_ids"]),
            aggregate_rule=doc["aggregate_rule"],
        )
