"""ARFF text codec.

Parses the dense ARFF subset (numeric / nominal / string attributes) and
writes a canonical form: lowercase keywords, one row per line, ``?`` for
missing cells, shortest round-trip decimal for numerics, single quotes
around any token that would not survive re-tokenization.

``date`` attributes and sparse ``{i v, ...}`` rows are rejected with
structured errors instead of being misparsed.  All parse errors carry a
1-based line number.
"""

from __future__ import annotations

import math

from .model import MISSING, NOMINAL, NUMERIC, STRING, AttributeSpec, Dataset


class ArffError(ValueError):
    """Base class for ARFF parse errors; ``line`` is 1-based."""

    code = "arff_error"

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message)
        self.line = line


class MalformedHeader(ArffError):
    code = "malformed_header"

    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}", line)
        self.reason = reason


class MissingSection(ArffError):
    code = "missing_section"

    def __init__(self, section: str):
        super().__init__(f"missing @{section} section")
        self.section = section


class ArityMismatch(ArffError):
    code = "arity_mismatch"

    def __init__(self, line: int, expected: int, got: int):
        super().__init__(
            f"line {line}: expected {expected} fields, got {got}", line)
        self.expected = expected
        self.got = got


class UnknownNominalValue(ArffError):
    code = "unknown_nominal_value"

    def __init__(self, line: int, column: str, token: str):
        super().__init__(
            f"line {line}: value {token!r} not in categories of {column!r}", line)
        self.column = column
        self.token = token


class BadNumericValue(ArffError):
    code = "bad_numeric_value"

    def __init__(self, line: int, column: str, token: str):
        super().__init__(
            f"line {line}: {token!r} is not a finite number ({column!r})", line)
        self.column = column
        self.token = token


class MalformedRow(ArffError):
    code = "malformed_row"

    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}", line)
        self.reason = reason


class InvalidEncoding(ArffError):
    code = "invalid_encoding"


_ESCAPES = {"n": "\n", "t": "\t", "r": "\r"}
_WS = " \t"


def _scan_token(text: str, pos: int, stop: str) -> tuple[str, bool, int]:
    """Scan one token starting at ``pos``.

    Returns (token, was_quoted, position after token).  ``stop`` is the
    set of delimiter characters that end a bare token.  Raises ValueError
    with a reason string on lexical problems; callers wrap it with the
    right error class and line number.
    """
    n = len(text)
    while pos < n and text[pos] in _WS:
        pos += 1
    if pos < n and text[pos] in "'\"":
        quote = text[pos]
        pos += 1
        out = []
        while pos < n:
            c = text[pos]
            if c == "\\":
                if pos + 1 >= n:
                    raise ValueError("dangling escape")
                nxt = text[pos + 1]
                out.append(_ESCAPES.get(nxt, nxt))
                pos += 2
            elif c == quote:
                pos += 1
                # only whitespace may sit between the quote and the delimiter
                end = pos
                while end < n and text[end] in _WS and text[end] not in stop:
                    end += 1
                if end < n and text[end] not in stop:
                    raise ValueError("unexpected text after closing quote")
                return "".join(out), True, end
            else:
                out.append(c)
                pos += 1
        raise ValueError("unterminated quote")
    start = pos
    while pos < n and text[pos] not in stop:
        pos += 1
    return text[start:pos].rstrip(_WS), False, pos


def _split_csv(line: str, lineno: int) -> list[tuple[str, bool]]:
    """Split a data row into (token, quoted) fields on commas."""
    fields = []
    pos = 0
    while True:
        try:
            token, quoted, pos = _scan_token(line, pos, ",")
        except ValueError as exc:
            raise MalformedRow(lineno, str(exc)) from None
        fields.append((token, quoted))
        if pos >= len(line):
            return fields
        pos += 1  # skip the comma


def _keyword(line: str) -> str:
    """Leading @keyword of a header line, lowercased."""
    i = 0
    while i < len(line) and line[i] not in _WS:
        i += 1
    return line[:i].lower()


def _parse_nominal_spec(spec: str, lineno: int) -> tuple[str, ...]:
    if not spec.endswith("}"):
        raise MalformedHeader(lineno, "nominal specification missing closing }")
    body = spec[1:-1]
    categories = []
    pos = 0
    while True:
        try:
            token, quoted, pos = _scan_token(body, pos, ",")
        except ValueError as exc:
            raise MalformedHeader(lineno, str(exc)) from None
        if not token and not quoted and pos >= len(body) and not categories:
            break  # `{}`: empty list, rejected below
        categories.append(token)
        if pos >= len(body):
            break
        pos += 1
    if not categories:
        raise MalformedHeader(lineno, "empty nominal category list")
    if len(set(categories)) != len(categories):
        raise MalformedHeader(lineno, "duplicate nominal category")
    return tuple(categories)


def _parse_attribute_line(line: str, lineno: int) -> AttributeSpec:
    rest = line[len("@attribute"):]
    try:
        name, quoted, pos = _scan_token(rest, 0, _WS)
    except ValueError as exc:
        raise MalformedHeader(lineno, str(exc)) from None
    if not name:
        raise MalformedHeader(lineno, "@attribute missing name")
    spec = rest[pos:].strip(_WS)
    if not spec:
        raise MalformedHeader(lineno, f"attribute {name!r} missing type")
    lowered = spec.lower()
    if lowered in ("numeric", "real", "integer"):
        return AttributeSpec(name, NUMERIC)
    if lowered == "string":
        return AttributeSpec(name, STRING)
    if spec.startswith("{"):
        return AttributeSpec(name, NOMINAL, _parse_nominal_spec(spec, lineno))
    if lowered.startswith("date"):
        raise MalformedHeader(lineno, "date attributes are not supported")
    raise MalformedHeader(lineno, f"unknown attribute type {spec!r}")


def parse_arff(text: str) -> Dataset:
    """Parse one complete ARFF document into a Dataset."""
    relation = None
    attributes: list[AttributeSpec] = []
    seen_names: set[str] = set()
    rows: list[tuple] = []
    in_data = False

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip(_WS)
        if not line or line.startswith("%"):
            continue

        if not in_data:
            keyword = _keyword(line)
            if keyword == "@relation":
                if relation is not None:
                    raise MalformedHeader(lineno, "duplicate @relation")
                if attributes:
                    raise MalformedHeader(lineno, "@relation after @attribute")
                rest = line[len("@relation"):]
                try:
                    name, quoted, pos = _scan_token(rest, 0, _WS)
                except ValueError as exc:
                    raise MalformedHeader(lineno, str(exc)) from None
                if not name and not quoted:
                    raise MalformedHeader(lineno, "@relation missing name")
                if rest[pos:].strip(_WS):
                    raise MalformedHeader(lineno, "unexpected text after relation name")
                relation = name
            elif keyword == "@attribute":
                if relation is None:
                    raise MalformedHeader(lineno, "@attribute before @relation")
                attr = _parse_attribute_line(line, lineno)
                if attr.name in seen_names:
                    raise MalformedHeader(lineno, f"duplicate attribute {attr.name!r}")
                seen_names.add(attr.name)
                attributes.append(attr)
            elif keyword == "@data":
                if relation is None:
                    raise MalformedHeader(lineno, "@data before @relation")
                if not attributes:
                    raise MissingSection("attribute")
                if line[len("@data"):].strip(_WS):
                    raise MalformedHeader(lineno, "unexpected text after @data")
                in_data = True
            else:
                raise MalformedHeader(lineno, f"unexpected line {line!r}")
            continue

        if line.startswith("{"):
            # sparse rows are out of scope; count the declared pairs
            body = line[1:-1] if line.endswith("}") else line[1:]
            got = len([p for p in body.split(",") if p.strip(_WS)])
            raise ArityMismatch(lineno, len(attributes), got)
        fields = _split_csv(line, lineno)
        if len(fields) != len(attributes):
            raise ArityMismatch(lineno, len(attributes), len(fields))
        row = []
        for attr, (token, quoted) in zip(attributes, fields):
            row.append(_convert_cell(attr, token, quoted, lineno))
        rows.append(tuple(row))

    if relation is None:
        raise MissingSection("relation")
    if not in_data:
        if not attributes:
            raise MissingSection("attribute")
        raise MissingSection("data")
    return Dataset(relation=relation, attributes=attributes, rows=rows)


def _convert_cell(attr: AttributeSpec, token: str, quoted: bool, lineno: int):
    if token == "?" and not quoted:
        return MISSING
    if attr.kind == NUMERIC:
        try:
            value = float(token)
        except ValueError:
            raise BadNumericValue(lineno, attr.name, token) from None
        if not math.isfinite(value):
            raise BadNumericValue(lineno, attr.name, token)
        return value
    if attr.kind == NOMINAL:
        try:
            return attr.categories.index(token)
        except ValueError:
            raise UnknownNominalValue(lineno, attr.name, token) from None
    return token


_NEEDS_QUOTE = set(" \t,'\"\\%{}\n\r")


def _quote(token: str) -> str:
    """Quote a token iff it would not survive bare re-tokenization."""
    if token and token != "?" and not (set(token) & _NEEDS_QUOTE):
        return token
    out = ["'"]
    for c in token:
        if c == "\\":
            out.append("\\\\")
        elif c == "'":
            out.append("\\'")
        elif c == "\n":
            out.append("\\n")
        elif c == "\r":
            out.append("\\r")
        elif c == "\t":
            out.append("\\t")
        else:
            out.append(c)
    out.append("'")
    return "".join(out)


def format_number(value: float) -> str:
    """Shortest decimal that round-trips to the same 64-bit float."""
    return repr(value)


def write_arff(ds: Dataset) -> str:
    """Serialize a Dataset to canonical ARFF text."""
    out = [f"@relation {_quote(ds.relation)}"]
    for attr in ds.attributes:
        if attr.kind == NOMINAL:
            spec = "{" + ",".join(_quote(c) for c in attr.categories) + "}"
        else:
            spec = attr.kind
        out.append(f"@attribute {_quote(attr.name)} {spec}")
    out.append("@data")
    for row in ds.rows:
        cells = []
        for attr, cell in zip(ds.attributes, row):
            if cell is MISSING:
                cells.append("?")
            elif attr.kind == NUMERIC:
                cells.append(format_number(cell))
            elif attr.kind == NOMINAL:
                cells.append(_quote(attr.categories[cell]))
            else:
                cells.append(_quote(cell))
        out.append(",".join(cells))
    return "\n".join(out) + "\n"
