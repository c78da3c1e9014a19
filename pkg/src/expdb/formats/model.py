"""In-memory tabular dataset model shared by all codecs.

A Dataset is a relation name, an ordered list of typed attributes and a
list of rows.  Cells are plain Python values: ``float`` for numeric
columns, ``int`` (index into the category list) for nominal columns,
``str`` for string columns, or the ``MISSING`` sentinel.  NaN/Inf never
appear in a Dataset; missing numeric values are represented explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

NUMERIC = "numeric"
NOMINAL = "nominal"
STRING = "string"

KINDS = (NUMERIC, NOMINAL, STRING)


class _Missing:
    """Singleton marker for a missing cell."""

    __slots__ = ()
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "MISSING"

    def __bool__(self) -> bool:
        return False


MISSING = _Missing()

Cell = float | int | str | _Missing


class InvalidDataset(ValueError):
    """A Dataset violates one of its structural invariants."""

    code = "invalid_dataset"


class UnknownAttribute(KeyError):
    """Lookup of an attribute name that the dataset does not declare."""

    code = "unknown_attribute"

    def __init__(self, name: str):
        super().__init__(name)
        self.name = name

    def __str__(self) -> str:
        return f"dataset has no attribute named {self.name!r}"


@dataclass(frozen=True)
class AttributeSpec:
    """One typed column: ``kind`` is numeric, nominal or string.

    ``categories`` is the ordered label list for nominal attributes and
    empty otherwise.
    """

    name: str
    kind: str
    categories: tuple[str, ...] = ()

    def validate(self) -> None:
        if not self.name:
            raise InvalidDataset("attribute name must be non-empty")
        if self.kind not in KINDS:
            raise InvalidDataset(f"unknown attribute kind {self.kind!r}")
        if self.kind == NOMINAL:
            if not self.categories:
                raise InvalidDataset(
                    f"nominal attribute {self.name!r} has no categories")
            if len(set(self.categories)) != len(self.categories):
                raise InvalidDataset(
                    f"nominal attribute {self.name!r} has duplicate categories")
        elif self.categories:
            raise InvalidDataset(
                f"{self.kind} attribute {self.name!r} must not declare categories")

    def to_dict(self) -> dict:
        d = {"name": self.name, "kind": self.kind}
        if self.kind == NOMINAL:
            d["categories"] = list(self.categories)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "AttributeSpec":
        return cls(
            name=d["name"],
            kind=d["kind"],
            categories=tuple(d.get("categories") or ()),
        )


@dataclass
class Dataset:
    """Parsed tabular data with missing-value support."""

    relation: str
    attributes: list[AttributeSpec]
    rows: list[tuple]

    def validate(self) -> None:
        """Raise InvalidDataset on any invariant violation."""
        if not self.attributes:
            raise InvalidDataset("dataset must have at least one attribute")
        names = [a.name for a in self.attributes]
        if len(set(names)) != len(names):
            raise InvalidDataset("attribute names must be unique")
        for attr in self.attributes:
            attr.validate()
        width = len(self.attributes)
        for i, row in enumerate(self.rows):
            if len(row) != width:
                raise InvalidDataset(
                    f"row {i} has {len(row)} cells, expected {width}")
            for attr, cell in zip(self.attributes, row):
                _check_cell(attr, cell, i)

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def attribute_index(self, name: str) -> int:
        for i, attr in enumerate(self.attributes):
            if attr.name == name:
                return i
        raise UnknownAttribute(name)

    def column(self, name: str) -> list:
        idx = self.attribute_index(name)
        return [row[idx] for row in self.rows]


def _check_cell(attr: AttributeSpec, cell, row_index: int) -> None:
    if cell is MISSING:
        return
    if attr.kind == NUMERIC:
        if type(cell) is not float:
            raise InvalidDataset(
                f"row {row_index}, column {attr.name!r}: expected float, "
                f"got {type(cell).__name__}")
        if not math.isfinite(cell):
            raise InvalidDataset(
                f"row {row_index}, column {attr.name!r}: non-finite numeric cell")
    elif attr.kind == NOMINAL:
        if type(cell) is not int:
            raise InvalidDataset(
                f"row {row_index}, column {attr.name!r}: expected category index, "
                f"got {type(cell).__name__}")
        if not 0 <= cell < len(attr.categories):
            raise InvalidDataset(
                f"row {row_index}, column {attr.name!r}: category index {cell} "
                f"out of range")
    else:
        if type(cell) is not str:
            raise InvalidDataset(
                f"row {row_index}, column {attr.name!r}: expected str, "
                f"got {type(cell).__name__}")
