"""Persistent experiment database: records, storage and aggregation queries."""

from .errors import (
    BlobIntegrityError,
    ConflictingFlow,
    DuplicateParameter,
    EmptyChallenge,
    InvalidFlowDefinition,
    InvalidParameterValue,
    ParseFailed,
    RegistryError,
    TaskNotInChallenge,
    UnknownChallenge,
    UnknownDataset,
    UnknownFlow,
    UnknownParameter,
    UnknownRun,
    UnknownTask,
)
from .queries import (
    challenge_leaderboard,
    compare,
    compare_csv,
    flow_overview,
    leaderboard,
    parameter_impact,
    search,
    solve_challenge,
)
from .records import (
    ChallengeRecord,
    DatasetRecord,
    FlowParameter,
    FlowProperties,
    FlowRecord,
    RunRecord,
)
from .store import Store, StoreView, open_store

__all__ = [
    "BlobIntegrityError", "ConflictingFlow", "DuplicateParameter",
    "EmptyChallenge", "InvalidFlowDefinition", "InvalidParameterValue",
    "ParseFailed", "RegistryError", "TaskNotInChallenge", "UnknownChallenge",
    "UnknownDataset", "UnknownFlow", "UnknownParameter", "UnknownRun",
    "UnknownTask",
    "challenge_leaderboard", "compare", "compare_csv", "flow_overview",
    "leaderboard", "parameter_impact", "search", "solve_challenge",
    "ChallengeRecord", "DatasetRecord", "FlowParameter", "FlowProperties",
    "FlowRecord", "RunRecord",
    "Store", "StoreView", "open_store",
]
