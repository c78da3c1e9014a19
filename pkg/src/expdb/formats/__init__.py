"""Dataset exchange formats: ARFF text, MLD1 binary container, CSV export."""

from .arff import (
    ArffError,
    ArityMismatch,
    BadNumericValue,
    InvalidEncoding,
    MalformedHeader,
    MalformedRow,
    MissingSection,
    UnknownNominalValue,
    parse_arff,
    write_arff,
)
from .container import (
    BadMagic,
    ContainerError,
    ContainerHeader,
    CorruptHeader,
    CorruptPayload,
    RangeOverlap,
    TruncatedPayload,
    UnsupportedVersion,
    decode_container,
    encode_container,
)
from .convert import (
    FORMAT_ARFF,
    FORMAT_CSV,
    FORMAT_MLD,
    SOURCE_FORMATS,
    TARGET_FORMATS,
    UnsupportedConversion,
    convert,
    parse_blob,
    serialize,
    write_csv,
)
from .model import (
    KINDS,
    MISSING,
    NOMINAL,
    NUMERIC,
    STRING,
    AttributeSpec,
    Dataset,
    InvalidDataset,
    UnknownAttribute,
)

__all__ = [
    "ArffError", "ArityMismatch", "BadNumericValue", "InvalidEncoding",
    "MalformedHeader", "MalformedRow", "MissingSection", "UnknownNominalValue",
    "parse_arff", "write_arff",
    "BadMagic", "ContainerError", "ContainerHeader", "CorruptHeader",
    "CorruptPayload", "RangeOverlap", "TruncatedPayload", "UnsupportedVersion",
    "decode_container", "encode_container",
    "FORMAT_ARFF", "FORMAT_CSV", "FORMAT_MLD", "SOURCE_FORMATS", "TARGET_FORMATS",
    "UnsupportedConversion", "convert", "parse_blob", "serialize", "write_csv",
    "KINDS", "MISSING", "NOMINAL", "NUMERIC", "STRING",
    "AttributeSpec", "Dataset", "InvalidDataset", "UnknownAttribute",
]
