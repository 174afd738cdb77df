"""Deterministic text and binary encodings.

Model objects expose ``to_tree()`` / ``from_tree()`` and are converted to a
plain *tree* made of ``None``, ``bool``, ``int``, ``str``, ``bytes``,
``datetime``, ``list`` and ``dict`` (string keys).  Two encodings are derived
from the tree:

* canonical text -- sorted-key, whitespace-free UTF-8 JSON.  Byte strings are
  rendered as base58 and instants as RFC 3339 UTC with seconds precision.
* deterministic binary -- CBOR under the core deterministic encoding rules
  (shortest argument heads, definite lengths, map keys sorted bytewise by
  their encoded form).  Byte strings stay byte strings and instants are
  tag 1 epoch integers.

The binary decoder is strict: any input that is not exactly what the encoder
would have produced is rejected, so each value has one binary form.
"""

from __future__ import annotations

import csv
import json
import re
import struct
from dataclasses import dataclass
from datetime import date, datetime, timezone
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable

from .errors import DecodeError


class EncodingKind(Enum):
    CANONICAL_TEXT = "canonical-text"
    DETERMINISTIC_BINARY = "deterministic-binary"


# ---------------------------------------------------------------------------
# base58 (bitcoin alphabet, no multibase prefix)
# ---------------------------------------------------------------------------

_B58_ALPHABET = "123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz"
_B58_INDEX = {c: i for i, c in enumerate(_B58_ALPHABET)}


def b58encode(data: bytes) -> str:
    zeros = len(data) - len(data.lstrip(b"\x00"))
    n = int.from_bytes(data, "big")
    out = []
    while n:
        n, rem = divmod(n, 58)
        out.append(_B58_ALPHABET[rem])
    return "1" * zeros + "".join(reversed(out))


def b58decode(text: str) -> bytes:
    zeros = len(text) - len(text.lstrip("1"))
    n = 0
    for ch in text:
        try:
            n = n * 58 + _B58_INDEX[ch]
        except KeyError:
            raise DecodeError(f"invalid base58 character {ch!r}") from None
    body = n.to_bytes((n.bit_length() + 7) // 8, "big") if n else b""
    return b"\x00" * zeros + body


# ---------------------------------------------------------------------------
# instants
# ---------------------------------------------------------------------------


def utc(moment: datetime) -> datetime:
    """Normalise to an aware UTC datetime truncated to whole seconds."""
    if not isinstance(moment, datetime):
        raise TypeError(f"expected datetime, got {type(moment).__name__}")
    if moment.tzinfo is None:
        raise ValueError("naive datetimes are not accepted; attach a timezone")
    return moment.astimezone(timezone.utc).replace(microsecond=0)


def format_time(moment: datetime) -> str:
    return utc(moment).strftime("%Y-%m-%dT%H:%M:%SZ")


_TIME = re.compile(r"(\d{4})-(\d{2})-(\d{2})T(\d{2}):(\d{2}):(\d{2})Z")


def parse_time(text: str) -> datetime:
    """Parse the one accepted layout, ``YYYY-MM-DDTHH:MM:SSZ``."""
    if not isinstance(text, str) or not text.endswith("Z"):
        raise DecodeError(f"timestamp must be RFC 3339 UTC ending in 'Z': {text!r}")
    match = _TIME.fullmatch(text)
    if match is None:
        raise DecodeError(f"bad timestamp {text!r}")
    try:
        return datetime(*map(int, match.groups()), tzinfo=timezone.utc)
    except ValueError as exc:
        raise DecodeError(f"bad timestamp {text!r}") from exc


def as_time(value: Any) -> datetime:
    if isinstance(value, datetime):
        return utc(value)
    return parse_time(value)


def as_bytes(value: Any) -> bytes:
    if isinstance(value, bytes):
        return value
    if isinstance(value, str):
        return b58decode(value)
    raise DecodeError(f"expected bytes or base58 text, got {type(value).__name__}")


def parse_date(text: str) -> date:
    try:
        return date.fromisoformat(text)
    except (TypeError, ValueError) as exc:
        raise DecodeError(f"bad calendar date {text!r}") from exc


# ---------------------------------------------------------------------------
# tree helpers
# ---------------------------------------------------------------------------


def to_tree(value: Any) -> Any:
    if hasattr(value, "to_tree"):
        return value.to_tree()
    return value


def _text_tree(node: Any) -> Any:
    if node is None or isinstance(node, (bool, str)):
        return node
    if isinstance(node, int):
        if not -(2**64) <= node < 2**64:
            raise ValueError(f"integer {node} is outside the 64-bit range both encodings share")
        return node
    if isinstance(node, bytes):
        return b58encode(node)
    if isinstance(node, datetime):
        return format_time(node)
    if isinstance(node, (list, tuple)):
        return [_text_tree(x) for x in node]
    if isinstance(node, dict):
        out = {}
        for key, item in node.items():
            if not isinstance(key, str):
                raise TypeError(f"map keys must be strings, got {key!r}")
            out[key] = _text_tree(item)
        return out
    raise TypeError(f"cannot encode {type(node).__name__}")


# ---------------------------------------------------------------------------
# canonical text
# ---------------------------------------------------------------------------


def encode_canonical_text(value: Any) -> bytes:
    tree = _text_tree(to_tree(value))
    return json.dumps(
        tree, sort_keys=True, separators=(",", ":"), ensure_ascii=False, allow_nan=False
    ).encode("utf-8")


def _reject_floats(text: str):
    raise DecodeError(f"non-integer number {text!r} is not allowed")


def decode_canonical_text(data: bytes, cls: type | None = None) -> Any:
    try:
        tree = json.loads(
            data.decode("utf-8"),
            parse_float=_reject_floats,
            parse_constant=_reject_floats,
        )
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DecodeError(str(exc)) from exc
    return _from_tree(cls, tree)


def _from_tree(cls: type | None, tree: Any) -> Any:
    if cls is None:
        return tree
    try:
        return cls.from_tree(tree)
    except DecodeError:
        raise
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise DecodeError(f"cannot build {cls.__name__}: {exc!r}") from exc


# ---------------------------------------------------------------------------
# deterministic CBOR
# ---------------------------------------------------------------------------

_TAG_EPOCH = 1


def _head(major: int, arg: int) -> bytes:
    if arg < 24:
        return bytes([(major << 5) | arg])
    if arg < 0x100:
        return bytes([(major << 5) | 24, arg])
    if arg < 0x10000:
        return bytes([(major << 5) | 25]) + struct.pack(">H", arg)
    if arg < 0x100000000:
        return bytes([(major << 5) | 26]) + struct.pack(">I", arg)
    if arg < 0x10000000000000000:
        return bytes([(major << 5) | 27]) + struct.pack(">Q", arg)
    raise ValueError(f"integer {arg} does not fit a 64-bit CBOR argument")


def _cbor(node: Any, out: bytearray) -> None:
    if node is None:
        out.append(0xF6)
    elif node is True:
        out.append(0xF5)
    elif node is False:
        out.append(0xF4)
    elif isinstance(node, int):
        if node >= 0:
            out += _head(0, node)
        else:
            out += _head(1, -1 - node)
    elif isinstance(node, bytes):
        out += _head(2, len(node))
        out += node
    elif isinstance(node, str):
        raw = node.encode("utf-8")
        out += _head(3, len(raw))
        out += raw
    elif isinstance(node, datetime):
        out += _head(6, _TAG_EPOCH)
        _cbor(int(utc(node).timestamp()), out)
    elif isinstance(node, (list, tuple)):
        out += _head(4, len(node))
        for item in node:
            _cbor(item, out)
    elif isinstance(node, dict):
        pairs = []
        for key, item in node.items():
            if not isinstance(key, str):
                raise TypeError(f"map keys must be strings, got {key!r}")
            encoded_key = bytearray()
            _cbor(key, encoded_key)
            pairs.append((bytes(encoded_key), item))
        pairs.sort(key=lambda p: p[0])
        out += _head(5, len(pairs))
        for encoded_key, item in pairs:
            out += encoded_key
            _cbor(item, out)
    else:
        raise TypeError(f"cannot encode {type(node).__name__}")


def encode_deterministic_binary(value: Any) -> bytes:
    out = bytearray()
    _cbor(to_tree(value), out)
    return bytes(out)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        end = self.pos + n
        if end > len(self.data):
            raise DecodeError("truncated input")
        chunk = self.data[self.pos:end]
        self.pos = end
        return chunk

    def head(self) -> tuple[int, int]:
        initial = self.take(1)[0]
        major, info = initial >> 5, initial & 0x1F
        if major == 7:
            return major, info
        if info < 24:
            return major, info
        widths = {24: 1, 25: 2, 26: 4, 27: 8}
        if info not in widths:
            raise DecodeError(f"unsupported additional info {info}")
        arg = int.from_bytes(self.take(widths[info]), "big")
        # shortest-form rule
        minimum = {24: 24, 25: 0x100, 26: 0x10000, 27: 0x100000000}[info]
        if arg < minimum:
            raise DecodeError("non-shortest integer head")
        return major, arg

    def item(self, depth: int = 0) -> Any:
        if depth > 64:
            raise DecodeError("nesting too deep")
        major, arg = self.head()
        if major == 0:
            return arg
        if major == 1:
            return -1 - arg
        if major == 2:
            return self.take(arg)
        if major == 3:
            try:
                return self.take(arg).decode("utf-8")
            except UnicodeDecodeError as exc:
                raise DecodeError("invalid UTF-8 in text string") from exc
        if major == 4:
            return [self.item(depth + 1) for _ in range(arg)]
        if major == 5:
            result = {}
            previous = None
            for _ in range(arg):
                start = self.pos
                key = self.item(depth + 1)
                if not isinstance(key, str):
                    raise DecodeError("map keys must be text strings")
                encoded_key = self.data[start:self.pos]
                if previous is not None and encoded_key <= previous:
                    raise DecodeError("map keys out of order or duplicated")
                previous = encoded_key
                result[key] = self.item(depth + 1)
            return result
        if major == 6:
            if arg != _TAG_EPOCH:
                raise DecodeError(f"unsupported tag {arg}")
            seconds = self.item(depth + 1)
            if isinstance(seconds, bool) or not isinstance(seconds, int):
                raise DecodeError("epoch tag must wrap an integer")
            try:
                return datetime.fromtimestamp(seconds, tz=timezone.utc)
            except (OverflowError, OSError, ValueError) as exc:
                raise DecodeError("epoch out of range") from exc
        # major 7
        simple = {20: False, 21: True, 22: None}
        if arg in simple:
            return simple[arg]
        raise DecodeError(f"unsupported simple/float value {arg}")


def decode_deterministic_binary(data: bytes, cls: type | None = None) -> Any:
    reader = _Reader(bytes(data))
    tree = reader.item()
    if reader.pos != len(reader.data):
        raise DecodeError("trailing bytes after item")
    return _from_tree(cls, tree)


def encode(value: Any, kind: EncodingKind) -> bytes:
    if kind is EncodingKind.CANONICAL_TEXT:
        return encode_canonical_text(value)
    return encode_deterministic_binary(value)


def decode(data: bytes, kind: EncodingKind, cls: type | None = None) -> Any:
    if kind is EncodingKind.CANONICAL_TEXT:
        return decode_canonical_text(data, cls)
    return decode_deterministic_binary(data, cls)


# ---------------------------------------------------------------------------
# signing input and size accounting
# ---------------------------------------------------------------------------


def signing_input(signed: Any) -> bytes:
    """Canonical text of a credential or presentation with its proofs removed."""
    return encode_canonical_text(signed.unsigned())


@dataclass(frozen=True)
class SizeReport:
    subject_id: str
    text_bytes: int
    binary_bytes: int

    @property
    def ratio(self) -> Fraction:
        return Fraction(self.text_bytes, self.binary_bytes)


def size_report(value: Any) -> SizeReport:
    tree = to_tree(value)
    subject_id = tree.get("id", "") if isinstance(tree, dict) else ""
    return SizeReport(
        subject_id=str(subject_id),
        text_bytes=len(encode_canonical_text(value)),
        binary_bytes=len(encode_deterministic_binary(value)),
    )


def write_corpus(named: Iterable[tuple[str, Any]], directory: Path) -> list[SizeReport]:
    """Write ``<name>.txt.json`` / ``<name>.bin`` pairs plus ``sizes.csv``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    reports = []
    rows = []
    for name, value in named:
        (directory / f"{name}.txt.json").write_bytes(encode_canonical_text(value))
        (directory / f"{name}.bin").write_bytes(encode_deterministic_binary(value))
        report = size_report(value)
        reports.append(report)
        rows.append((name, report.text_bytes, report.binary_bytes, f"{float(report.ratio):.4f}"))
    with open(directory / "sizes.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("name", "text_bytes", "binary_bytes", "ratio"))
        writer.writerows(rows)
    return reports
