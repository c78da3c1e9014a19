"""MLD1 binary container codec.

Layout (bit-exact):

    bytes 0-3    magic ``MLD1``
    bytes 4-7    header length H, u32 little-endian
    bytes 8-8+H  UTF-8 JSON ContainerHeader
    payload      immediately after the header

Array payloads are little-endian and row-major; offsets are relative to
the payload start.  Numeric columns are grouped into one ``f64le``
matrix, nominal columns into one ``i64le`` matrix, and each string
column becomes a ``utf8-catalog`` array (u32le count, then per string a
u32le byte length followed by the UTF-8 bytes).

Missing cells are encoded as NaN (numeric), -1 (nominal) and the length
sentinel 0xFFFFFFFF (string); the in-memory Dataset keeps the explicit
MISSING marker so none of these sentinels leak into computation.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass

from .model import (
    MISSING,
    NOMINAL,
    NUMERIC,
    STRING,
    AttributeSpec,
    Dataset,
    InvalidDataset,
)

MAGIC = b"MLD1"
FORMAT_VERSION = 1

DTYPE_F64 = "f64le"
DTYPE_I64 = "i64le"
DTYPE_UTF8 = "utf8-catalog"

_MISSING_STRING_LEN = 0xFFFFFFFF


class ContainerError(ValueError):
    code = "container_error"


class BadMagic(ContainerError):
    code = "bad_magic"

    def __init__(self):
        super().__init__("not an MLD1 container (bad magic)")


class UnsupportedVersion(ContainerError):
    code = "unsupported_version"

    def __init__(self, version):
        super().__init__(f"unsupported container version {version!r}")
        self.version = version


class CorruptHeader(ContainerError):
    code = "corrupt_header"

    def __init__(self, reason: str):
        super().__init__(f"corrupt container header: {reason}")
        self.reason = reason


class RangeOverlap(ContainerError):
    code = "range_overlap"

    def __init__(self, reason: str = "array byte ranges overlap or are out of order"):
        super().__init__(reason)


class TruncatedPayload(ContainerError):
    code = "truncated_payload"

    def __init__(self, expected: int, got: int):
        super().__init__(f"payload truncated: need {expected} bytes, have {got}")
        self.expected = expected
        self.got = got


class CorruptPayload(ContainerError):
    code = "corrupt_payload"

    def __init__(self, reason: str):
        super().__init__(f"corrupt container payload: {reason}")
        self.reason = reason


@dataclass(frozen=True)
class ArrayInfo:
    name: str
    dtype: str
    shape: tuple[int, int]
    byte_offset: int
    byte_length: int

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "dtype": self.dtype,
            "shape": list(self.shape),
            "byte_offset": self.byte_offset,
            "byte_length": self.byte_length,
        }


@dataclass(frozen=True)
class ContainerHeader:
    format_version: int
    relation: str
    arrays: tuple[ArrayInfo, ...]
    attributes: tuple[AttributeSpec, ...]

    def to_json_bytes(self) -> bytes:
        doc = {
            "format_version": self.format_version,
            "relation": self.relation,
            "arrays": [a.to_dict() for a in self.arrays],
            "attributes": [a.to_dict() for a in self.attributes],
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8")


def _string_array_name(attr_name: str) -> str:
    return f"string:{attr_name}"


def encode_container(ds: Dataset) -> bytes:
    """Encode a valid Dataset as MLD1 bytes."""
    numeric_cols = [i for i, a in enumerate(ds.attributes) if a.kind == NUMERIC]
    nominal_cols = [i for i, a in enumerate(ds.attributes) if a.kind == NOMINAL]
    string_cols = [i for i, a in enumerate(ds.attributes) if a.kind == STRING]
    n = len(ds.rows)

    chunks: list[bytes] = []
    arrays: list[ArrayInfo] = []
    offset = 0

    def add_array(name: str, dtype: str, cols: int, payload: bytes) -> None:
        nonlocal offset
        arrays.append(ArrayInfo(name, dtype, (n, cols), offset, len(payload)))
        chunks.append(payload)
        offset += len(payload)

    if numeric_cols:
        values = []
        for row in ds.rows:
            for c in numeric_cols:
                cell = row[c]
                values.append(float("nan") if cell is MISSING else cell)
        add_array("numeric", DTYPE_F64, len(numeric_cols),
                  struct.pack(f"<{len(values)}d", *values))
    if nominal_cols:
        values = []
        for row in ds.rows:
            for c in nominal_cols:
                cell = row[c]
                values.append(-1 if cell is MISSING else cell)
        add_array("nominal", DTYPE_I64, len(nominal_cols),
                  struct.pack(f"<{len(values)}q", *values))
    for c in string_cols:
        parts = [struct.pack("<I", n)]
        for row in ds.rows:
            cell = row[c]
            if cell is MISSING:
                parts.append(struct.pack("<I", _MISSING_STRING_LEN))
            else:
                raw = cell.encode("utf-8")
                parts.append(struct.pack("<I", len(raw)))
                parts.append(raw)
        add_array(_string_array_name(ds.attributes[c].name), DTYPE_UTF8, 1,
                  b"".join(parts))

    header = ContainerHeader(
        format_version=FORMAT_VERSION,
        relation=ds.relation,
        arrays=tuple(arrays),
        attributes=tuple(ds.attributes),
    )
    header_bytes = header.to_json_bytes()
    return MAGIC + struct.pack("<I", len(header_bytes)) + header_bytes + b"".join(chunks)


def _require(condition: bool, reason: str) -> None:
    if not condition:
        raise CorruptHeader(reason)


def parse_header(blob: bytes) -> tuple[ContainerHeader, bytes]:
    """Validate magic + header and return (header, payload bytes).

    The payload is not inspected here; header-level invariants (schema,
    offset ordering, range containment) are fully checked first.
    """
    if len(blob) < 4 or blob[:4] != MAGIC:
        raise BadMagic()
    if len(blob) < 8:
        raise CorruptHeader("truncated header length field")
    (header_len,) = struct.unpack("<I", blob[4:8])
    if 8 + header_len > len(blob):
        raise CorruptHeader("declared header extends past end of blob")
    try:
        doc = json.loads(blob[8:8 + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptHeader(f"header is not valid JSON: {exc}") from None
    _require(isinstance(doc, dict), "header must be a JSON object")

    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise UnsupportedVersion(version)
    _require(isinstance(doc.get("relation"), str), "relation must be a string")

    raw_attrs = doc.get("attributes")
    _require(isinstance(raw_attrs, list) and raw_attrs,
             "attributes must be a non-empty list")
    attributes = []
    for entry in raw_attrs:
        _require(isinstance(entry, dict), "attribute entries must be objects")
        _require(isinstance(entry.get("name"), str), "attribute name must be a string")
        _require(entry.get("kind") in (NUMERIC, NOMINAL, STRING),
                 "unknown attribute kind")
        cats = entry.get("categories", [])
        _require(isinstance(cats, list) and all(isinstance(c, str) for c in cats),
                 "categories must be a list of strings")
        attributes.append(AttributeSpec.from_dict(entry))
    try:
        for attr in attributes:
            attr.validate()
    except InvalidDataset as exc:
        raise CorruptHeader(str(exc)) from None
    names = [a.name for a in attributes]
    _require(len(set(names)) == len(names), "duplicate attribute names")

    raw_arrays = doc.get("arrays")
    _require(isinstance(raw_arrays, list), "arrays must be a list")
    arrays = []
    for entry in raw_arrays:
        _require(isinstance(entry, dict), "array entries must be objects")
        _require(isinstance(entry.get("name"), str), "array name must be a string")
        _require(entry.get("dtype") in (DTYPE_F64, DTYPE_I64, DTYPE_UTF8),
                 "unknown array dtype")
        shape = entry.get("shape")
        _require(isinstance(shape, list) and len(shape) == 2
                 and all(isinstance(v, int) and not isinstance(v, bool) and v >= 0
                         for v in shape),
                 "array shape must be two non-negative integers")
        for key in ("byte_offset", "byte_length"):
            v = entry.get(key)
            _require(isinstance(v, int) and not isinstance(v, bool) and v >= 0,
                     f"array {key} must be a non-negative integer")
        arrays.append(ArrayInfo(entry["name"], entry["dtype"],
                                (shape[0], shape[1]),
                                entry["byte_offset"], entry["byte_length"]))

    for info in arrays:
        if info.dtype in (DTYPE_F64, DTYPE_I64):
            expected = info.shape[0] * info.shape[1] * 8
            _require(info.byte_length == expected,
                     f"array {info.name!r} byte length disagrees with shape")

    cursor = 0
    for info in arrays:
        if info.byte_offset < cursor:
            raise RangeOverlap()
        cursor = info.byte_offset + info.byte_length

    payload = blob[8 + header_len:]
    if cursor > len(payload):
        raise TruncatedPayload(cursor, len(payload))

    header = ContainerHeader(
        format_version=version,
        relation=doc["relation"],
        arrays=tuple(arrays),
        attributes=tuple(attributes),
    )
    return header, payload


def decode_container(blob: bytes) -> Dataset:
    """Decode MLD1 bytes back into a Dataset."""
    header, payload = parse_header(blob)
    attributes = list(header.attributes)
    numeric_attrs = [a for a in attributes if a.kind == NUMERIC]
    nominal_attrs = [a for a in attributes if a.kind == NOMINAL]
    string_attrs = [a for a in attributes if a.kind == STRING]

    expected_names = []
    if numeric_attrs:
        expected_names.append("numeric")
    if nominal_attrs:
        expected_names.append("nominal")
    expected_names.extend(_string_array_name(a.name) for a in string_attrs)
    got_names = [a.name for a in header.arrays]
    if got_names != expected_names:
        raise CorruptHeader(
            f"expected arrays {expected_names}, header declares {got_names}")

    by_name = {a.name: a for a in header.arrays}
    row_counts = {a.shape[0] for a in header.arrays}
    if len(row_counts) > 1:
        raise CorruptHeader("arrays disagree on row count")
    n = row_counts.pop() if row_counts else 0

    numeric_data = None
    if numeric_attrs:
        info = by_name["numeric"]
        if info.dtype != DTYPE_F64 or info.shape[1] != len(numeric_attrs):
            raise CorruptHeader("numeric array has wrong dtype or shape")
        raw = payload[info.byte_offset:info.byte_offset + info.byte_length]
        numeric_data = struct.unpack(f"<{n * len(numeric_attrs)}d", raw)
    nominal_data = None
    if nominal_attrs:
        info = by_name["nominal"]
        if info.dtype != DTYPE_I64 or info.shape[1] != len(nominal_attrs):
            raise CorruptHeader("nominal array has wrong dtype or shape")
        raw = payload[info.byte_offset:info.byte_offset + info.byte_length]
        nominal_data = struct.unpack(f"<{n * len(nominal_attrs)}q", raw)
    string_data = {}
    for attr in string_attrs:
        info = by_name[_string_array_name(attr.name)]
        if info.dtype != DTYPE_UTF8 or info.shape[1] != 1:
            raise CorruptHeader(f"string array for {attr.name!r} has wrong dtype or shape")
        raw = payload[info.byte_offset:info.byte_offset + info.byte_length]
        string_data[attr.name] = _decode_catalog(raw, n, attr.name)

    rows = []
    num_i = {a.name: i for i, a in enumerate(numeric_attrs)}
    nom_i = {a.name: i for i, a in enumerate(nominal_attrs)}
    for r in range(n):
        row = []
        for attr in attributes:
            if attr.kind == NUMERIC:
                value = numeric_data[r * len(numeric_attrs) + num_i[attr.name]]
                if math.isnan(value):
                    row.append(MISSING)
                elif math.isinf(value):
                    raise CorruptPayload(
                        f"non-finite value in numeric column {attr.name!r}")
                else:
                    row.append(value)
            elif attr.kind == NOMINAL:
                value = nominal_data[r * len(nominal_attrs) + nom_i[attr.name]]
                if value == -1:
                    row.append(MISSING)
                elif 0 <= value < len(attr.categories):
                    row.append(value)
                else:
                    raise CorruptPayload(
                        f"category index {value} out of range in {attr.name!r}")
            else:
                row.append(string_data[attr.name][r])
        rows.append(tuple(row))
    return Dataset(relation=header.relation, attributes=attributes, rows=rows)


def _decode_catalog(raw: bytes, expected_count: int, column: str) -> list:
    if len(raw) < 4:
        raise CorruptPayload(f"string array for {column!r} shorter than its count field")
    (count,) = struct.unpack("<I", raw[:4])
    if count != expected_count:
        raise CorruptPayload(
            f"string array for {column!r} declares {count} entries, expected {expected_count}")
    out = []
    cursor = 4
    for _ in range(count):
        if cursor + 4 > len(raw):
            raise CorruptPayload(f"string array for {column!r} ends mid-entry")
        (length,) = struct.unpack("<I", raw[cursor:cursor + 4])
        cursor += 4
        if length == _MISSING_STRING_LEN:
            out.append(MISSING)
            continue
        if cursor + length > len(raw):
            raise CorruptPayload(f"string array for {column!r} ends mid-entry")
        try:
            out.append(raw[cursor:cursor + length].decode("utf-8"))
        except UnicodeDecodeError:
            raise CorruptPayload(
                f"string array for {column!r} contains invalid UTF-8") from None
        cursor += length
    if cursor != len(raw):
        raise CorruptPayload(f"string array for {column!r} has trailing bytes")
    return out
