from __future__ import annotations

from datetime import datetime, timedelta, timezone

import pytest
from hypothesis import given
from hypothesis import strategies as st

from iotcred import codec
from iotcred.errors import DecodeError
from iotcred.model import VerifiableCredential
from iotcred.schemas import build_fixture_corpus, fixture_names

from .conftest import FIXTURES

# Encodings of plain values from RFC 8949 Appendix A (deterministic subset).
RFC8949_VECTORS = [
    (0, "00"),
    (1, "01"),
    (10, "0a"),
    (23, "17"),
    (24, "1818"),
    (25, "1819"),
    (100, "1864"),
    (1000, "1903e8"),
    (1000000, "1a000f4240"),
    (1000000000000, "1b000000e8d4a51000"),
    (18446744073709551615, "1bffffffffffffffff"),
    (-1, "20"),
    (-10, "29"),
    (-100, "3863"),
    (-1000, "3903e7"),
    (False, "f4"),
    (True, "f5"),
    (None, "f6"),
    (b"", "40"),
    (bytes.fromhex("01020304"), "4401020304"),
    ("", "60"),
    ("a", "6161"),
    ("IETF", "6449455446"),
    ('"\\', "62225c"),
    ("ü", "62c3bc"),
    ("水", "63e6b0b4"),
    ([], "80"),
    ([1, 2, 3], "83010203"),
    ([1, [2, 3], [4, 5]], "8301820203820405"),
    (list(range(1, 26)), "98190102030405060708090a0b0c0d0e0f101112131415161718181819"),
    ({}, "a0"),
    ({"a": 1, "b": [2, 3]}, "a26161016162820203"),
    (["a", {"b": "c"}], "826161a161626163"),
    ({"a": "A", "b": "B", "c": "C", "d": "D", "e": "E"}, "a56161614161626142616361436164614461656145"),
    (datetime(2013, 3, 21, 20, 4, 0, tzinfo=timezone.utc), "c11a514b67b0"),
]

# Bitcoin Core base58 encode/decode vectors.
BASE58_VECTORS = [
    ("", ""),
    ("61", "2g"),
    ("626262", "a3gV"),
    ("636363", "aPEr"),
    ("73696d706c792061206c6f6e6720737472696e67", "2cFupjhnEsSn59qHXstmK2ffpLv2"),
    ("00eb15231dfceb60925886b67d065299925915aeb172c06647", "1NS17iag9jJgTHD1VXjvLCEnZuQ3rJDE9L"),
    ("516b6fcd0f", "ABnLTmg"),
    ("bf4f89001e670274dd", "3SEo3LWLoPntC"),
    ("572e4794", "3EFU7m"),
    ("ecac89cad93923c02321", "EJDM8drfXA6uyA"),
    ("10c8511e", "Rt5zm"),
    ("00000000000000000000", "1111111111"),
]


@pytest.mark.parametrize("value,expected", RFC8949_VECTORS)
def test_binary_matches_rfc8949_vectors(value, expected):
    assert codec.encode_deterministic_binary(value).hex() == expected
    assert codec.decode_deterministic_binary(bytes.fromhex(expected)) == value


@pytest.mark.parametrize("hexdata,text", BASE58_VECTORS)
def test_base58_vectors(hexdata, text):
    assert codec.b58encode(bytes.fromhex(hexdata)) == text
    assert codec.b58decode(text) == bytes.fromhex(hexdata)


def test_base58_rejects_foreign_characters():
    with pytest.raises(DecodeError):
        codec.b58decode("0OIl")


@pytest.mark.parametrize(
    "data",
    [
        "1817",  # 23 written with a one-byte argument
        "190017",  # 23 written with a two-byte argument
        "a2616201616102",  # keys out of order
        "a2616101616102",  # duplicate key
        "0000",  # trailing byte
        "f93c00",  # half-precision float
        "fb3ff199999999999a",  # double
        "c07818",  # unsupported tag 0 wrapping text
        "5f",  # indefinite-length byte string
        "9f01ff",  # indefinite-length array
        "a10101",  # integer map key
        "62c3",  # truncated text
        "61ff",  # invalid UTF-8
    ],
)
def test_binary_decoder_is_strict(data):
    with pytest.raises(DecodeError):
        codec.decode_deterministic_binary(bytes.fromhex(data))


def test_canonical_text_layout():
    tree = {"b": 1, "a": [True, None, "é"], "c": b"\x00\x01", "t": datetime(2023, 8, 1, 10, 11, 12, tzinfo=timezone.utc)}
    assert codec.encode_canonical_text(tree) == (
        '{"a":[true,null,"é"],"b":1,"c":"12","t":"2023-08-01T10:11:12Z"}'.encode()
    )


@pytest.mark.parametrize("text", [b"1.5", b'{"a":1e3}', b"NaN", b"[Infinity]", b"\xff"])
def test_canonical_text_rejects_floats_and_bad_utf8(text):
    with pytest.raises(DecodeError):
        codec.decode_canonical_text(text)


def test_encoders_reject_floats():
    with pytest.raises(TypeError):
        codec.encode_canonical_text({"x": 1.5})
    with pytest.raises(TypeError):
        codec.encode_deterministic_binary([0.5])


@pytest.mark.parametrize("value", [2**64, -(2**64) - 1])
def test_integers_beyond_64_bits_are_rejected_by_both_encodings(value):
    with pytest.raises(ValueError):
        codec.encode_canonical_text([value])
    with pytest.raises(ValueError):
        codec.encode_deterministic_binary([value])


def test_time_helpers():
    moment = datetime(2023, 8, 1, 12, 11, 12, 999, tzinfo=timezone(timedelta(hours=2)))
    assert codec.format_time(moment) == "2023-08-01T10:11:12Z"
    assert codec.parse_time("2023-08-01T10:11:12Z") == codec.utc(moment)
    with pytest.raises(ValueError):
        codec.utc(datetime(2023, 1, 1))
    for bad in ("2023-08-01T10:11:12", "2023-08-01 10:11:12Z", "2023-13-01T00:00:00Z", "2023-8-1T10:11:12Z",
                "2023-02-30T00:00:00Z", "2023-08-01T10:11:12.5Z", 5):
        with pytest.raises(DecodeError):
            codec.parse_time(bad)


plain = st.recursive(
    st.none()
    | st.booleans()
    | st.integers(min_value=-(2**64), max_value=2**64 - 1)
    | st.text(max_size=20)
    | st.binary(max_size=20),
    lambda children: st.lists(children, max_size=5) | st.dictionaries(st.text(max_size=8), children, max_size=5),
    max_leaves=20,
)


@given(plain)
def test_binary_round_trip_of_plain_trees(tree):
    def normal(node):  # the decoder returns lists for tuples
        if isinstance(node, dict):
            return {k: normal(v) for k, v in node.items()}
        if isinstance(node, list):
            return [normal(v) for v in node]
        return node

    encoded = codec.encode_deterministic_binary(tree)
    assert codec.decode_deterministic_binary(encoded) == normal(tree)
    assert codec.encode_deterministic_binary(codec.decode_deterministic_binary(encoded)) == encoded


@given(st.dictionaries(st.text(max_size=6), st.integers(-(2**64), 2**64 - 1), max_size=8), st.randoms())
def test_encoding_ignores_insertion_order(mapping, rnd):
    items = list(mapping.items())
    rnd.shuffle(items)
    shuffled = dict(items)
    assert codec.encode_canonical_text(shuffled) == codec.encode_canonical_text(mapping)
    assert codec.encode_deterministic_binary(shuffled) == codec.encode_deterministic_binary(mapping)


@given(st.binary(max_size=64))
def test_base58_round_trip(data):
    assert codec.b58decode(codec.b58encode(data)) == data


@given(st.binary(max_size=40))
def test_binary_decoder_never_crashes(data):
    try:
        codec.decode_deterministic_binary(data)
    except DecodeError:
        pass


def test_corpus_matches_frozen_fixture_files():
    for name, vc in zip(fixture_names(), build_fixture_corpus()):
        assert codec.encode_canonical_text(vc) == (FIXTURES / f"{name}.txt.json").read_bytes(), name
        assert codec.encode_deterministic_binary(vc) == (FIXTURES / f"{name}.bin").read_bytes(), name


def test_fixture_files_decode_to_equal_credentials():
    for name, vc in zip(fixture_names(), build_fixture_corpus()):
        from_text = codec.decode_canonical_text((FIXTURES / f"{name}.txt.json").read_bytes(), VerifiableCredential)
        from_binary = codec.decode_deterministic_binary((FIXTURES / f"{name}.bin").read_bytes(), VerifiableCredential)
        assert from_text == vc == from_binary


def test_write_corpus_reproduces_sizes_csv(tmp_path):
    codec.write_corpus(zip(fixture_names(), build_fixture_corpus()), tmp_path)
    assert (tmp_path / "sizes.csv").read_bytes() == (FIXTURES / "sizes.csv").read_bytes()


def test_signing_input_excludes_proofs():
    vc = build_fixture_corpus()[0]
    assert codec.signing_input(vc) == codec.encode_canonical_text(vc.unsigned())
    assert b'"proof"' not in codec.signing_input(vc)
    assert b'"proof"' in codec.encode_canonical_text(vc)
