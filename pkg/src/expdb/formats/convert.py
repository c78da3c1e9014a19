"""Conversion between the supported exchange formats.

``arff`` and ``mld`` are full codecs; ``csv`` is export-only (header row
of attribute names, missing cells as empty fields, RFC-4180 quoting).
"""

from __future__ import annotations

import csv
import io

from .arff import InvalidEncoding, format_number, parse_arff, write_arff
from .container import decode_container, encode_container
from .model import MISSING, NOMINAL, NUMERIC, Dataset

FORMAT_ARFF = "arff"
FORMAT_MLD = "mld"
FORMAT_CSV = "csv"

SOURCE_FORMATS = (FORMAT_ARFF, FORMAT_MLD)
TARGET_FORMATS = (FORMAT_ARFF, FORMAT_MLD, FORMAT_CSV)


class UnsupportedConversion(ValueError):
    code = "unsupported_conversion"

    def __init__(self, source: str, target: str):
        super().__init__(f"cannot convert from {source!r} to {target!r}")
        self.source = source
        self.target = target


def parse_blob(blob: bytes, source: str) -> Dataset:
    """Parse bytes in a source format (arff or mld) into a Dataset."""
    if source == FORMAT_ARFF:
        try:
            text = blob.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise InvalidEncoding(f"ARFF input is not valid UTF-8: {exc}") from None
        return parse_arff(text)
    if source == FORMAT_MLD:
        return decode_container(blob)
    raise UnsupportedConversion(source, FORMAT_ARFF)


def serialize(ds: Dataset, target: str) -> bytes:
    if target == FORMAT_ARFF:
        return write_arff(ds).encode("utf-8")
    if target == FORMAT_MLD:
        return encode_container(ds)
    if target == FORMAT_CSV:
        return write_csv(ds).encode("utf-8")
    raise UnsupportedConversion(FORMAT_ARFF, target)


def write_csv(ds: Dataset) -> str:
    """Render a Dataset as CSV text with a header row."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([a.name for a in ds.attributes])
    for row in ds.rows:
        out = []
        for attr, cell in zip(ds.attributes, row):
            if cell is MISSING:
                out.append("")
            elif attr.kind == NUMERIC:
                out.append(format_number(cell))
            elif attr.kind == NOMINAL:
                out.append(attr.categories[cell])
            else:
                out.append(cell)
        writer.writerow(out)
    return buf.getvalue()


def convert(blob: bytes, source: str, target: str) -> bytes:
    """Re-encode ``blob`` from one format to another.

    CSV is a valid target only; parse errors from the source codec
    propagate unchanged.
    """
    if source not in SOURCE_FORMATS:
        raise UnsupportedConversion(source, target)
    if target not in TARGET_FORMATS:
        raise UnsupportedConversion(source, target)
    return serialize(parse_blob(blob, source), target)
