"""Small error types shared across modules."""

from __future__ import annotations


class EmptyInput(ValueError):
    code = "empty_input"

    def __init__(self, what: str = "input"):
        super().__init__(f"{what} must be non-empty")


class LengthMismatch(ValueError):
    code = "length_mismatch"

    def __init__(self, n_true: int, n_pred: int):
        super().__init__(f"length mismatch: {n_true} true vs {n_pred} predicted")
