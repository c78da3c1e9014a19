import json
import random
import struct

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from expdb.formats import (
    MISSING,
    AttributeSpec,
    BadMagic,
    ContainerError,
    CorruptHeader,
    CorruptPayload,
    Dataset,
    RangeOverlap,
    TruncatedPayload,
    UnsupportedVersion,
    decode_container,
    encode_container,
    parse_arff,
)

from datagen import random_dataset

BASIC = "@relation t\n@attribute a numeric\n@attribute c {x,y}\n@data\n1.0,x\n2.0,y\n"


def numeric_dataset(rows, cols):
    attrs = [AttributeSpec(f"n{i}", "numeric") for i in range(cols)]
    data = [tuple(float(r * cols + c) for c in range(cols)) for r in range(rows)]
    return Dataset("nums", attrs, data)


def make_blob(header: dict, payload: bytes = b"") -> bytes:
    raw = json.dumps(header).encode("utf-8")
    return b"MLD1" + struct.pack("<I", len(raw)) + raw + payload


def test_output_starts_with_magic():
    blob = encode_container(numeric_dataset(1, 1))
    assert blob[:4] == b"MLD1"


def test_numeric_only_single_array_3x2():
    blob = encode_container(numeric_dataset(3, 2))
    header_len = struct.unpack("<I", blob[4:8])[0]
    header = json.loads(blob[8:8 + header_len])
    assert len(header["arrays"]) == 1
    (arr,) = header["arrays"]
    assert arr["shape"] == [3, 2]
    assert arr["byte_length"] == 48  # 3*2*8, verified by decoding below
    assert decode_container(blob) == numeric_dataset(3, 2)


def test_roundtrip_arff_example():
    ds = parse_arff(BASIC)
    assert decode_container(encode_container(ds)) == ds


def test_roundtrip_missing_values_all_kinds():
    attrs = [
        AttributeSpec("a", "numeric"),
        AttributeSpec("c", "nominal", ("x", "y")),
        AttributeSpec("s", "string"),
    ]
    rows = [
        (1.5, 0, "hello"),
        (MISSING, MISSING, MISSING),
        (-0.0, 1, ""),
    ]
    ds = Dataset("m", attrs, rows)
    back = decode_container(encode_container(ds))
    assert back == ds
    assert back.rows[1] == (MISSING, MISSING, MISSING)
    assert back.rows[2][2] == ""  # empty string is not missing


def test_roundtrip_zero_rows():
    attrs = [AttributeSpec("a", "numeric"), AttributeSpec("s", "string")]
    ds = Dataset("empty", attrs, [])
    assert decode_container(encode_container(ds)) == ds


def test_bad_magic():
    with pytest.raises(BadMagic):
        decode_container(b"XXXX" + b"\x00" * 20)
    with pytest.raises(BadMagic):
        decode_container(b"")
    with pytest.raises(BadMagic):
        decode_container(b"ML")


def test_truncated_payload():
    blob = encode_container(numeric_dataset(3, 2))
    with pytest.raises(TruncatedPayload) as exc:
        decode_container(blob[:-8])
    assert exc.value.expected == 48
    assert exc.value.got == 40


def test_unsupported_version():
    blob = make_blob({"format_version": 2, "relation": "t", "arrays": [],
                      "attributes": [{"name": "a", "kind": "numeric"}]})
    with pytest.raises(UnsupportedVersion) as exc:
        decode_container(blob)
    assert exc.value.version == 2


def test_corrupt_header_bad_json():
    raw = b"{not json"
    blob = b"MLD1" + struct.pack("<I", len(raw)) + raw
    with pytest.raises(CorruptHeader):
        decode_container(blob)


def test_corrupt_header_length_past_end():
    blob = b"MLD1" + struct.pack("<I", 9999) + b"{}"
    with pytest.raises(CorruptHeader):
        decode_container(blob)


def test_range_overlap():
    header = {
        "format_version": 1,
        "relation": "t",
        "attributes": [
            {"name": "a", "kind": "numeric"},
            {"name": "b", "kind": "numeric"},
        ],
        "arrays": [
            {"name": "numeric", "dtype": "f64le", "shape": [1, 2],
             "byte_offset": 8, "byte_length": 16},
        ],
    }
    # single array whose offset precedes a previously covered range is fine;
    # craft two overlapping ranges via a string attribute
    header["attributes"].append({"name": "s", "kind": "string"})
    header["arrays"].append({"name": "string:s", "dtype": "utf8-catalog",
                             "shape": [1, 1], "byte_offset": 0, "byte_length": 8})
    blob = make_blob(header, b"\x00" * 24)
    with pytest.raises(RangeOverlap):
        decode_container(blob)


def test_corrupt_payload_nominal_index_out_of_range():
    ds = Dataset("t", [AttributeSpec("c", "nominal", ("x", "y"))], [(0,), (1,)])
    blob = encode_container(ds)
    # nominal payload is the last 16 bytes; patch first index to 7
    patched = blob[:-16] + struct.pack("<q", 7) + blob[-8:]
    with pytest.raises(CorruptPayload):
        decode_container(patched)


def test_corrupt_payload_bad_utf8():
    ds = Dataset("t", [AttributeSpec("s", "string")], [("ab",)])
    blob = encode_container(ds)
    patched = blob[:-2] + b"\xff\xfe"
    with pytest.raises(CorruptPayload):
        decode_container(patched)


def test_header_validated_before_payload():
    # both a bogus version and a truncated payload: version wins
    ds = numeric_dataset(2, 1)
    blob = encode_container(ds)
    header_len = struct.unpack("<I", blob[4:8])[0]
    header = json.loads(blob[8:8 + header_len])
    header["format_version"] = 3
    with pytest.raises(UnsupportedVersion):
        decode_container(make_blob(header, b""))


def test_roundtrip_random_corpus():
    rng = random.Random(977)
    for _ in range(30):
        ds = random_dataset(rng, max_rows=60)
        back = decode_container(encode_container(ds))
        assert back == ds


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_roundtrip_property(seed):
    ds = random_dataset(random.Random(seed), max_rows=25, max_attrs=6)
    assert decode_container(encode_container(ds)) == ds


@settings(max_examples=120, deadline=None)
@given(st.binary(max_size=400))
def test_decode_totality_on_arbitrary_bytes(blob):
    try:
        decode_container(blob)
    except ContainerError:
        pass


@settings(max_examples=100, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1), st.data())
def test_decode_totality_on_mutated_blobs(seed, data):
    rng = random.Random(seed)
    blob = bytearray(encode_container(random_dataset(rng, max_rows=8, max_attrs=4)))
    mutation = data.draw(st.sampled_from(["flip", "truncate", "extend", "zero"]))
    pos = data.draw(st.integers(min_value=0, max_value=max(len(blob) - 1, 0)))
    if mutation == "flip":
        blob[pos] ^= data.draw(st.integers(min_value=1, max_value=255))
    elif mutation == "truncate":
        blob = blob[:pos]
    elif mutation == "extend":
        blob.extend(data.draw(st.binary(max_size=16)))
    else:
        blob[pos] = 0
    try:
        decode_container(bytes(blob))
    except ContainerError:
        pass
