"""Registry error types.

The unknown-id family maps to HTTP 404 at the API layer; the semantic
family (bad parameters, validation, empty challenge) to 422; conflicts
to 409.
"""

from __future__ import annotations


class RegistryError(Exception):
    code = "registry_error"


class UnknownDataset(RegistryError):
    code = "unknown_dataset"

    def __init__(self, dataset_id):
        super().__init__(f"no dataset with id {dataset_id!r}")
        self.dataset_id = dataset_id


class UnknownFlow(RegistryError):
    code = "unknown_flow"

    def __init__(self, flow_id):
        super().__init__(f"no flow with id {flow_id!r}")
        self.flow_id = flow_id


class UnknownTask(RegistryError):
    code = "unknown_task"

    def __init__(self, task_id):
        super().__init__(f"no task with id {task_id!r}")
        self.task_id = task_id


class UnknownRun(RegistryError):
    code = "unknown_run"

    def __init__(self, run_id):
        super().__init__(f"no run with id {run_id!r}")
        self.run_id = run_id


class UnknownChallenge(RegistryError):
    code = "unknown_challenge"

    def __init__(self, challenge_id):
        super().__init__(f"no challenge with id {challenge_id!r}")
        self.challenge_id = challenge_id


class ParseFailed(RegistryError):
    code = "parse_failed"

    def __init__(self, details: str):
        super().__init__(f"dataset upload failed to parse: {details}")
        self.details = details


class DuplicateParameter(RegistryError):
    code = "duplicate_parameter"

    def __init__(self, name: str):
        super().__init__(f"parameter {name!r} declared more than once")
        self.name = name


class ConflictingFlow(RegistryError):
    code = "conflicting_flow"

    def __init__(self, name: str, version: str):
        super().__init__(
            f"flow {name!r} version {version!r} already registered with a "
            f"different definition")


class InvalidFlowDefinition(RegistryError):
    code = "invalid_flow_definition"


class UnknownParameter(RegistryError):
    code = "unknown_parameter"

    def __init__(self, name: str):
        super().__init__(f"flow declares no parameter named {name!r}")
        self.name = name


class InvalidParameterValue(RegistryError):
    code = "invalid_parameter_value"

    def __init__(self, name: str, value, kind: str):
        super().__init__(f"value {value!r} does not fit {kind} parameter {name!r}")
        self.name = name


class EmptyChallenge(RegistryError):
    code = "empty_challenge"

    def __init__(self):
        super().__init__("a challenge needs at least one task")


class TaskNotInChallenge(RegistryError):
    code = "task_not_in_challenge"

    def __init__(self, task_id, challenge_id):
        super().__init__(
            f"task {task_id!r} is not part of challenge {challenge_id!r}")


class BlobIntegrityError(RegistryError):
    code = "blob_integrity_error"

    def __init__(self, digest: str):
        super().__init__(f"stored blob {digest} does not match its digest")
        self.digest = digest
