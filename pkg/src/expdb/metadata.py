"""Per-dataset profiling: structural counts, distributional meta-features
and a human-readable summary.

Standard deviations are population (divide by n) so single-value columns
profile to 0 instead of being undefined.  Class entropy is reported in
bits.  Mode ties break to the lexicographically smallest label so
profiles are reproducible.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

from .errors import EmptyInput
from .formats.model import (
    MISSING,
    NOMINAL,
    NUMERIC,
    STRING,
    Dataset,
    UnknownAttribute,
)

__all__ = [
    "EmptyInput", "MetaFeatureSet", "NumericStats", "NominalStats",
    "DatasetSummary", "class_entropy", "default_accuracy",
    "compute_meta_features", "dataset_summary",
]


@dataclass
class NumericStats:
    name: str
    min: float | None
    max: float | None
    mean: float | None
    stdev: float | None
    n_missing: int

    def to_dict(self) -> dict:
        return {"name": self.name, "min": self.min, "max": self.max,
                "mean": self.mean, "stdev": self.stdev, "n_missing": self.n_missing}


@dataclass
class NominalStats:
    name: str
    n_distinct_observed: int
    mode_label: str | None

    def to_dict(self) -> dict:
        return {"name": self.name, "n_distinct_observed": self.n_distinct_observed,
                "mode_label": self.mode_label}


@dataclass
class MetaFeatureSet:
    n_instances: int
    n_attributes: int
    n_numeric: int
    n_nominal: int
    n_string: int
    n_missing_values: int
    pct_missing: float
    numeric_stats: list[NumericStats] = field(default_factory=list)
    nominal_stats: list[NominalStats] = field(default_factory=list)
    # classification profile, present only for a nominal target with
    # at least one observed label
    n_classes: int | None = None
    class_entropy: float | None = None
    default_accuracy: float | None = None
    minority_class_fraction: float | None = None

    def to_json_dict(self) -> dict:
        doc = {
            "n_instances": self.n_instances,
            "n_attributes": self.n_attributes,
            "n_numeric": self.n_numeric,
            "n_nominal": self.n_nominal,
            "n_string": self.n_string,
            "n_missing_values": self.n_missing_values,
            "pct_missing": self.pct_missing,
            "numeric_stats": [s.to_dict() for s in self.numeric_stats],
            "nominal_stats": [s.to_dict() for s in self.nominal_stats],
        }
        if self.n_classes is not None:
            doc["n_classes"] = self.n_classes
            doc["class_entropy"] = self.class_entropy
            doc["default_accuracy"] = self.default_accuracy
            doc["minority_class_fraction"] = self.minority_class_fraction
        return doc


def class_entropy(labels: list[int]) -> float:
    """Shannon entropy, in bits, of the observed class distribution."""
    if not labels:
        raise EmptyInput("labels")
    total = len(labels)
    h = 0.0
    for count in Counter(labels).values():
        p = count / total
        h -= p * math.log2(p)
    return h


def default_accuracy(labels: list[int]) -> float:
    """Accuracy of always predicting the majority class."""
    if not labels:
        raise EmptyInput("labels")
    return max(Counter(labels).values()) / len(labels)


def _numeric_stats(name: str, cells: list) -> NumericStats:
    present = [c for c in cells if c is not MISSING]
    n_missing = len(cells) - len(present)
    if not present:
        return NumericStats(name, None, None, None, None, n_missing)
    lo, hi = min(present), max(present)
    scale = max(abs(lo), abs(hi))
    if scale == 0.0:
        return NumericStats(name, lo, hi, 0.0, 0.0, n_missing)
    # rescale by a power of two: division stays exact, squared deviations
    # cannot overflow, and fsum keeps the result independent of row order
    s2 = math.ldexp(1.0, min(math.frexp(scale)[1], 1023))
    z = [x / s2 for x in present]
    mean_z = math.fsum(z) / len(z)
    var_z = math.fsum((x - mean_z) * (x - mean_z) for x in z) / len(z)
    return NumericStats(name, lo, hi, mean_z * s2, math.sqrt(var_z) * s2, n_missing)


def _nominal_stats(name: str, categories: tuple[str, ...], cells: list) -> NominalStats:
    present = [c for c in cells if c is not MISSING]
    counts = Counter(present)
    if not counts:
        return NominalStats(name, 0, None)
    best = max(counts.values())
    mode = min(categories[i] for i, c in counts.items() if c == best)
    return NominalStats(name, len(counts), mode)


def compute_meta_features(ds: Dataset, target: str | None = None) -> MetaFeatureSet:
    """Profile a dataset; a nominal ``target`` adds the class fields."""
    if target is not None:
        target_idx = ds.attribute_index(target)  # raises UnknownAttribute
    n_missing = sum(1 for row in ds.rows for cell in row if cell is MISSING)
    n_cells = len(ds.rows) * len(ds.attributes)

    features = MetaFeatureSet(
        n_instances=len(ds.rows),
        n_attributes=len(ds.attributes),
        n_numeric=sum(1 for a in ds.attributes if a.kind == NUMERIC),
        n_nominal=sum(1 for a in ds.attributes if a.kind == NOMINAL),
        n_string=sum(1 for a in ds.attributes if a.kind == STRING),
        n_missing_values=n_missing,
        pct_missing=(n_missing / n_cells) if n_cells else 0.0,
    )
    for i, attr in enumerate(ds.attributes):
        cells = [row[i] for row in ds.rows]
        if attr.kind == NUMERIC:
            features.numeric_stats.append(_numeric_stats(attr.name, cells))
        elif attr.kind == NOMINAL:
            features.nominal_stats.append(
                _nominal_stats(attr.name, attr.categories, cells))

    if target is not None and ds.attributes[target_idx].kind == NOMINAL:
        labels = [row[target_idx] for row in ds.rows if row[target_idx] is not MISSING]
        if labels:
            counts = Counter(labels)
            features.n_classes = len(ds.attributes[target_idx].categories)
            features.class_entropy = class_entropy(labels)
            features.default_accuracy = default_accuracy(labels)
            features.minority_class_fraction = min(counts.values()) / len(labels)
    return features


PREVIEW_ROWS = 10


@dataclass
class DatasetSummary:
    relation: str
    shape: tuple[int, int]
    attribute_table: list[dict]
    preview: list[str]

    def to_json_dict(self) -> dict:
        return {"relation": self.relation, "shape": list(self.shape),
                "attribute_table": self.attribute_table, "preview": self.preview}

    def to_text(self) -> str:
        lines = [
            f"relation: {self.relation}",
            f"instances: {self.shape[0]}, attributes: {self.shape[1]}",
            "",
        ]
        width = max((len(e["name"]) for e in self.attribute_table), default=4)
        lines.append(f"{'name'.ljust(width)}  kind     missing")
        for entry in self.attribute_table:
            lines.append(
                f"{entry['name'].ljust(width)}  {entry['kind'].ljust(7)}  {entry['n_missing']}")
        if self.preview:
            lines.append("")
            lines.append(f"first {len(self.preview)} rows:")
            lines.extend(self.preview)
        return "\n".join(lines) + "\n"


def _render_cell(attr, cell) -> str:
    if cell is MISSING:
        return "?"
    if attr.kind == NUMERIC:
        return repr(cell)
    if attr.kind == NOMINAL:
        return attr.categories[cell]
    return cell


def dataset_summary(ds: Dataset) -> DatasetSummary:
    """Shape, per-attribute missing counts and a first-rows preview."""
    table = []
    for i, attr in enumerate(ds.attributes):
        n_missing = sum(1 for row in ds.rows if row[i] is MISSING)
        table.append({"name": attr.name, "kind": attr.kind, "n_missing": n_missing})
    preview = [
        ",".join(_render_cell(a, c) for a, c in zip(ds.attributes, row))
        for row in ds.rows[:PREVIEW_ROWS]
    ]
    return DatasetSummary(
        relation=ds.relation,
        shape=(len(ds.rows), len(ds.attributes)),
        attribute_table=table,
        preview=preview,
    )
