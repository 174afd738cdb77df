"""Credential subject schemas for the seven IoT credential kinds.

Subjects exist in two forms: typed dataclasses for construction, and the
plain mapping tree stored in ``credentialSubject``.  :func:`validate_subject`
works on the tree and never raises, so arbitrary input yields a list of named
violations instead of a crash.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from datetime import date, datetime, timezone
from typing import Any, Mapping, Union

from . import codec
from .errors import DecodeError, MalformedDid, SubjectInvalid, WindowValidityMismatch
from .matrix import CredentialKind, IssuerKind, MatrixPoint, MatrixTag, Scope, TrustLevel, Validity
from .model import Did, KeyPair, VerifiableCredential, sign_credential

__all__ = [
    "CredentialKind",
    "StaticIdentitySubject",
    "DynamicIdentitySubject",
    "OwnershipSubject",
    "CommunicationSubject",
    "CapabilitySubject",
    "ConfigurationSubject",
    "OnboardingSubject",
    "validate_subject",
    "build_credential",
    "build_fixture_corpus",
]

_VERSION_RE = re.compile(r"\d+(?:\.\d+)*")
_PROTOCOL_RE = re.compile(r"[^\s/]+(?:/[^\s/]+)?")
COMMUNICATION_CATEGORIES = ("wired", "wireless", "cellular", "satellite")
CONFIGURATION_CATEGORIES = ("thresholds", "security", "communication", "user", "other")


def _ts(moment: datetime) -> str:
    return codec.format_time(moment)


# ---------------------------------------------------------------------------
# typed subjects
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StaticIdentitySubject:
    id: Did
    serial_no: str
    manufactured_date: datetime
    manufacturer: Did
    model_no: str
    batch_no: str

    def to_tree(self) -> dict:
        return {
            "id": str(self.id),
            "serialNo": self.serial_no,
            "manufacturedDate": _ts(self.manufactured_date),
            "manufacturer": str(self.manufacturer),
            "modelNo": self.model_no,
            "batchNo": self.batch_no,
        }

    @classmethod
    def from_tree(cls, tree: dict) -> StaticIdentitySubject:
        return cls(
            Did.parse(tree["id"]),
            tree["serialNo"],
            codec.parse_time(tree["manufacturedDate"]),
            Did.parse(tree["manufacturer"]),
            tree["modelNo"],
            tree["batchNo"],
        )


@dataclass(frozen=True)
class DynamicIdentitySubject:
    id: Did
    firmware_version: str
    last_updated: datetime
    update_history: tuple[tuple[str, datetime], ...] = ()
    attributes: Mapping[str, str] = field(default_factory=dict)

    def to_tree(self) -> dict:
        tree = {
            "id": str(self.id),
            "firmwareVersion": self.firmware_version,
            "lastUpdatedDate": _ts(self.last_updated),
        }
        if self.update_history:
            tree["updateHistory"] = [{"version": v, "date": _ts(d)} for v, d in self.update_history]
        if self.attributes:
            tree["attributes"] = dict(self.attributes)
        return tree

    @classmethod
    def from_tree(cls, tree: dict) -> DynamicIdentitySubject:
        history = tuple((h["version"], codec.parse_time(h["date"])) for h in tree.get("updateHistory", ()))
        return cls(
            Did.parse(tree["id"]),
            tree["firmwareVersion"],
            codec.parse_time(tree["lastUpdatedDate"]),
            history,
            dict(tree.get("attributes", {})),
        )


@dataclass(frozen=True)
class OwnershipSubject:
    device_id: Did
    owner: Did
    purchased: date
    transaction_ref: str | None = None

    def to_tree(self) -> dict:
        tree = {"deviceId": str(self.device_id), "owner": str(self.owner), "purchasedDate": self.purchased.isoformat()}
        if self.transaction_ref is not None:
            tree["transactionRef"] = self.transaction_ref
        return tree

    @classmethod
    def from_tree(cls, tree: dict) -> OwnershipSubject:
        return cls(
            Did.parse(tree["deviceId"]),
            Did.parse(tree["owner"]),
            codec.parse_date(tree["purchasedDate"]),
            tree.get("transactionRef"),
        )


@dataclass(frozen=True)
class CommunicationSubject:
    """Supported protocols per category; entries may carry ``/<version>``."""

    device_id: Did
    wired: frozenset[str] = frozenset()
    wireless: frozenset[str] = frozenset()
    cellular: frozenset[str] = frozenset()
    satellite: frozenset[str] = frozenset()

    def to_tree(self) -> dict:
        tree: dict[str, Any] = {"deviceId": str(self.device_id)}
        for category in COMMUNICATION_CATEGORIES:
            tree[category] = sorted(getattr(self, category))
        return tree

    @classmethod
    def from_tree(cls, tree: dict) -> CommunicationSubject:
        return cls(Did.parse(tree["deviceId"]), *(frozenset(tree[c]) for c in COMMUNICATION_CATEGORIES))


@dataclass(frozen=True)
class CapabilitySubject:
    device_id: Did
    computation: Mapping[str, Any] = field(default_factory=dict)
    memory: Mapping[str, Any] = field(default_factory=dict)
    other: Mapping[str, Any] = field(default_factory=dict)

    def to_tree(self) -> dict:
        return {
            "deviceId": str(self.device_id),
            "computation": dict(self.computation),
            "memory": dict(self.memory),
            "other": dict(self.other),
        }

    @classmethod
    def from_tree(cls, tree: dict) -> CapabilitySubject:
        return cls(Did.parse(tree["deviceId"]), dict(tree["computation"]), dict(tree["memory"]), dict(tree["other"]))


@dataclass(frozen=True)
class ConfigurationSubject:
    device_id: Did
    thresholds: Mapping[str, Any] = field(default_factory=dict)
    security: Mapping[str, Any] = field(default_factory=dict)
    communication: Mapping[str, Any] = field(default_factory=dict)
    user: Mapping[str, Any] = field(default_factory=dict)
    other: Mapping[str, Any] = field(default_factory=dict)
    attestation_evidence: bytes | None = None
    trusted_hardware: bool = False

    def to_tree(self) -> dict:
        tree: dict[str, Any] = {"deviceId": str(self.device_id)}
        for category in CONFIGURATION_CATEGORIES:
            tree[category] = dict(getattr(self, category))
        if self.attestation_evidence is not None:
            tree["attestationEvidence"] = codec.b58encode(self.attestation_evidence)
        if self.trusted_hardware:
            tree["trustedHardware"] = True
        return tree

    @classmethod
    def from_tree(cls, tree: dict) -> ConfigurationSubject:
        evidence = tree.get("attestationEvidence")
        return cls(
            Did.parse(tree["deviceId"]),
            *(dict(tree[c]) for c in CONFIGURATION_CATEGORIES),
            attestation_evidence=codec.b58decode(evidence) if evidence is not None else None,
            trusted_hardware=bool(tree.get("trustedHardware", False)),
        )


@dataclass(frozen=True)
class OnboardingSubject:
    device_id: Did
    onboardee_identity: Mapping[str, Any]
    onboarder_identity: Mapping[str, Any]
    onboardee_configuration: Mapping[str, Any] = field(default_factory=dict)
    onboardee_ownership: Mapping[str, Any] = field(default_factory=dict)
    onboardee_other: Mapping[str, Any] = field(default_factory=dict)
    onboarder_other: Mapping[str, Any] = field(default_factory=dict)

    @property
    def onboarder(self) -> Did:
        return Did.parse(self.onboarder_identity["id"])

    def to_tree(self) -> dict:
        return {
            "deviceId": str(self.device_id),
            "onboardee": {
                "identity": dict(self.onboardee_identity),
                "configuration": dict(self.onboardee_configuration),
                "ownership": dict(self.onboardee_ownership),
                "other": dict(self.onboardee_other),
            },
            "onboarder": {"identity": dict(self.onboarder_identity), "other": dict(self.onboarder_other)},
        }

    @classmethod
    def from_tree(cls, tree: dict) -> OnboardingSubject:
        ee, er = tree["onboardee"], tree["onboarder"]
        return cls(
            Did.parse(tree["deviceId"]),
            dict(ee["identity"]),
            dict(er["identity"]),
            dict(ee["configuration"]),
            dict(ee["ownership"]),
            dict(ee["other"]),
            dict(er["other"]),
        )


Subject = Union[
    StaticIdentitySubject,
    DynamicIdentitySubject,
    OwnershipSubject,
    CommunicationSubject,
    CapabilitySubject,
    ConfigurationSubject,
    OnboardingSubject,
]

SUBJECT_TYPES: dict[CredentialKind, type] = {
    CredentialKind.STATIC_IDENTITY: StaticIdentitySubject,
    CredentialKind.DYNAMIC_IDENTITY: DynamicIdentitySubject,
    CredentialKind.OWNERSHIP: OwnershipSubject,
    CredentialKind.COMMUNICATION: CommunicationSubject,
    CredentialKind.CAPABILITY: CapabilitySubject,
    CredentialKind.CONFIGURATION: ConfigurationSubject,
    CredentialKind.ONBOARDING: OnboardingSubject,
}


def subject_tree(subject: Subject | Mapping) -> dict:
    return subject.to_tree() if hasattr(subject, "to_tree") else dict(subject)


def subject_from_tree(kind: CredentialKind, tree: Mapping) -> Subject:
    violations = validate_subject(kind, tree)
    if violations:
        raise SubjectInvalid(violations)
    return SUBJECT_TYPES[kind].from_tree(tree)


def credential_kind(vc: VerifiableCredential) -> CredentialKind:
    return CredentialKind.from_tag(vc.kind_tag)


def subject_device(vc: VerifiableCredential) -> Did:
    """The device a credential is about (``id`` or ``deviceId``)."""
    body = vc.credential_subject
    return Did.parse(body["id"] if "id" in body else body["deviceId"])


def named_parties(vc: VerifiableCredential) -> set[Did]:
    """DIDs a credential names as parties that may legitimately hold it."""
    parties = {subject_device(vc)}
    body = vc.credential_subject
    try:
        if "owner" in body:
            parties.add(Did.parse(body["owner"]))
        onboarder = body.get("onboarder", {}).get("identity", {}).get("id")
        if onboarder is not None:
            parties.add(Did.parse(onboarder))
    except (MalformedDid, AttributeError):
        pass
    return parties


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------


def _is_plain(value: Any, depth: int = 0) -> bool:
    if depth > 8:
        return False
    if value is None or isinstance(value, (str, bool, int)):
        return not isinstance(value, float)
    if isinstance(value, list):
        return all(_is_plain(v, depth + 1) for v in value)
    if isinstance(value, dict):
        return all(isinstance(k, str) and _is_plain(v, depth + 1) for k, v in value.items())
    return False


class _Checker:
    def __init__(self, body: Any):
        self.body = body
        self.violations: list[str] = []

    def fail(self, message: str) -> None:
        self.violations.append(message)

    def allowed_keys(self, required: tuple, optional: tuple = ()) -> None:
        for key in required:
            if key not in self.body:
                self.fail(f"missing field {key}")
        for key, value in self.body.items():
            if key not in required and key not in optional:
                self.fail(f"unexpected field {key}")
            elif value is None:
                self.fail(f"{key} must not be null")

    def did(self, key: str) -> Did | None:
        value = self.body.get(key)
        if value is None:
            return None
        try:
            return Did.parse(value)
        except MalformedDid:
            self.fail(f"{key} is not a valid DID")
            return None

    def text(self, key: str, non_empty: bool = False) -> str | None:
        value = self.body.get(key)
        if value is None:
            return None
        if not isinstance(value, str):
            self.fail(f"{key} must be a string")
            return None
        if non_empty and not value:
            self.fail(f"{key} must be non-empty")
        return value

    def instant(self, key: str) -> datetime | None:
        value = self.body.get(key)
        if value is None:
            return None
        try:
            return codec.parse_time(value)
        except DecodeError:
            self.fail(f"{key} must be an RFC 3339 UTC timestamp")
            return None

    def mapping(self, key: str, container: Any = None) -> dict | None:
        source = self.body if container is None else container
        value = source.get(key)
        if value is None:
            if container is not None and key in source:
                self.fail(f"{key} must not be null")
            return None
        if not isinstance(value, dict) or not _is_plain(value):
            self.fail(f"{key} must be a map of plain values")
            return None
        return value


def _check_static(c: _Checker, issuer: Did | None, **_) -> None:
    c.allowed_keys(("id", "serialNo", "manufacturedDate", "manufacturer", "modelNo", "batchNo"))
    c.did("id")
    c.text("serialNo", non_empty=True)
    c.instant("manufacturedDate")
    manufacturer = c.did("manufacturer")
    c.text("modelNo", non_empty=True)
    c.text("batchNo")
    if issuer is not None and manufacturer is not None and manufacturer != issuer:
        c.fail("manufacturer must match the credential issuer")


def _check_dynamic(c: _Checker, manufactured: datetime | None = None, **_) -> None:
    c.allowed_keys(("id", "firmwareVersion", "lastUpdatedDate"), ("updateHistory", "attributes"))
    c.did("id")
    version = c.text("firmwareVersion")
    if version is not None and not _VERSION_RE.fullmatch(version):
        c.fail("firmwareVersion must be a dotted numeric version")
    last = c.instant("lastUpdatedDate")
    if manufactured is not None and last is not None and last < manufactured:
        c.fail("lastUpdatedDate precedes the manufacturing date")
    history = c.body.get("updateHistory")
    if history is not None:
        if not isinstance(history, list):
            c.fail("updateHistory must be a list")
        else:
            previous = None
            for entry in history:
                if not isinstance(entry, dict) or set(entry) != {"version", "date"}:
                    c.fail("updateHistory entries need exactly version and date")
                    continue
                if not isinstance(entry["version"], str) or not _VERSION_RE.fullmatch(entry["version"]):
                    c.fail("updateHistory version must be a dotted numeric version")
                try:
                    when = codec.parse_time(entry["date"])
                except DecodeError:
                    c.fail("updateHistory date must be an RFC 3339 UTC timestamp")
                    continue
                if previous is not None and when <= previous:
                    c.fail("updateHistory dates must be strictly increasing")
                previous = when
            if previous is not None and last is not None and last <= previous:
                c.fail("lastUpdatedDate must follow every updateHistory entry")
    attributes = c.mapping("attributes")
    if attributes is not None and not all(isinstance(v, str) for v in attributes.values()):
        c.fail("attributes values must be strings")


def _check_ownership(c: _Checker, **_) -> None:
    c.allowed_keys(("deviceId", "owner", "purchasedDate"), ("transactionRef",))
    device = c.did("deviceId")
    owner = c.did("owner")
    purchased = c.text("purchasedDate")
    if purchased is not None:
        try:
            codec.parse_date(purchased)
        except DecodeError:
            c.fail("purchasedDate must be a calendar date YYYY-MM-DD")
    c.text("transactionRef")
    if device is not None and device == owner:
        c.fail("deviceId and owner must differ")


def _check_communication(c: _Checker, **_) -> None:
    c.allowed_keys(("deviceId",) + COMMUNICATION_CATEGORIES)
    c.did("deviceId")
    total = 0
    for category in COMMUNICATION_CATEGORIES:
        entries = c.body.get(category)
        if entries is None:
            continue
        if not isinstance(entries, list) or not all(isinstance(e, str) for e in entries):
            c.fail(f"{category} must be a list of protocol names")
            continue
        if len(set(entries)) != len(entries):
            c.fail(f"{category} contains duplicate entries")
        for entry in entries:
            if not _PROTOCOL_RE.fullmatch(entry):
                c.fail(f"{category} entry {entry!r} is not 'name' or 'name/version'")
        total += len(entries)
    if total == 0:
        c.fail("at least one communication category must be non-empty")


_CAPABILITY_INTEGERS = {"clockSpeedHz", "noOfCores", "ramBytes", "flashBytes"}


def _check_capability(c: _Checker, **_) -> None:
    c.allowed_keys(("deviceId", "computation", "memory", "other"))
    c.did("deviceId")
    sections = [c.mapping(name) for name in ("computation", "memory", "other")]
    for name, section in zip(("computation", "memory"), sections):
        if section is None:
            continue
        for key, value in section.items():
            if key in _CAPABILITY_INTEGERS and (isinstance(value, bool) or not isinstance(value, int)):
                c.fail(f"{name}.{key} must be an integer")
            elif isinstance(value, int) and not isinstance(value, bool) and value <= 0:
                c.fail(f"{name}.{key} must be positive")
    if all(not s for s in sections):
        c.fail("at least one of computation, memory or other must be non-empty")


def _check_configuration(c: _Checker, **_) -> None:
    c.allowed_keys(("deviceId",) + CONFIGURATION_CATEGORIES, ("attestationEvidence", "trustedHardware"))
    c.did("deviceId")
    sections = [c.mapping(name) for name in CONFIGURATION_CATEGORIES]
    if all(not s for s in sections):
        c.fail("at least one configuration category must be non-empty")
    evidence = c.body.get("attestationEvidence")
    has_evidence = False
    if evidence is not None:
        try:
            has_evidence = isinstance(evidence, str) and len(codec.b58decode(evidence)) > 0
        except DecodeError:
            pass
        if not has_evidence:
            c.fail("attestationEvidence must be non-empty base58")
    trusted = c.body.get("trustedHardware", False)
    if not isinstance(trusted, bool):
        c.fail("trustedHardware must be a boolean")
        trusted = False
    if not has_evidence and not trusted:
        c.fail("configuration requires attestation evidence or trusted hardware")


def _check_onboarding(c: _Checker, **_) -> None:
    c.allowed_keys(("deviceId", "onboardee", "onboarder"))
    c.did("deviceId")
    onboardee = c.body.get("onboardee")
    onboarder = c.body.get("onboarder")
    if onboardee is not None:
        if not isinstance(onboardee, dict) or set(onboardee) != {"identity", "configuration", "ownership", "other"}:
            c.fail("onboardee needs exactly identity, configuration, ownership and other")
        else:
            sections = [c.mapping(k, onboardee) for k in ("identity", "configuration", "ownership", "other")]
            if not sections[0]:
                c.fail("onboardee identity must be non-empty")
    if onboarder is not None:
        if not isinstance(onboarder, dict) or set(onboarder) != {"identity", "other"}:
            c.fail("onboarder needs exactly identity and other")
        else:
            identity = c.mapping("identity", onboarder)
            c.mapping("other", onboarder)
            if not identity:
                c.fail("onboarder identity must be non-empty")
            else:
                try:
                    Did.parse(identity.get("id"))
                except MalformedDid:
                    c.fail("onboarder identity must carry the onboarder DID as id")


_CHECKERS = {
    CredentialKind.STATIC_IDENTITY: _check_static,
    CredentialKind.DYNAMIC_IDENTITY: _check_dynamic,
    CredentialKind.OWNERSHIP: _check_ownership,
    CredentialKind.COMMUNICATION: _check_communication,
    CredentialKind.CAPABILITY: _check_capability,
    CredentialKind.CONFIGURATION: _check_configuration,
    CredentialKind.ONBOARDING: _check_onboarding,
}


def validate_subject(
    kind: CredentialKind,
    body: Any,
    *,
    issuer: Did | None = None,
    manufactured: datetime | None = None,
) -> list[str]:
    """Structural violations of ``body`` for ``kind``; empty when valid."""
    if hasattr(body, "to_tree"):
        try:
            body = body.to_tree()
        except Exception as exc:  # noqa: BLE001 - validation must be total
            return [f"subject cannot be rendered: {exc}"]
    if not isinstance(body, dict):
        return ["subject must be a map"]
    checker = _Checker(body)
    try:
        _CHECKERS[kind](checker, issuer=issuer, manufactured=manufactured)
    except Exception as exc:  # noqa: BLE001
        checker.fail(f"subject could not be checked: {exc!r}")
    return checker.violations


# ---------------------------------------------------------------------------
# credential construction
# ---------------------------------------------------------------------------


def default_credential_id(kind: CredentialKind, issuer: Did, subject: dict, valid_from: datetime) -> str:
    digest = hashlib.sha256(
        codec.encode_canonical_text(
            {"kind": kind.value, "issuer": str(issuer), "subject": subject, "validFrom": valid_from}
        )
    ).hexdigest()[:16]
    return f"urn:iot:vc:{digest}"


def check_window(validity: Validity, valid_from: datetime, valid_until: datetime | None) -> None:
    if validity is Validity.INDEFINITE and valid_until is not None:
        raise WindowValidityMismatch("indefinite credentials carry no validUntil")
    if validity is not Validity.INDEFINITE and valid_until is None:
        raise WindowValidityMismatch(f"{validity.value} credentials must carry validUntil")


def build_credential(
    kind: CredentialKind,
    subject: Subject | Mapping,
    issuer: Did,
    point: MatrixPoint,
    window: tuple[datetime, datetime | None],
    schema_ref: str | None = None,
    status_ref: str | None = None,
    *,
    issuer_kind: IssuerKind,
    credential_id: str | None = None,
) -> VerifiableCredential:
    """Unsigned credential of ``kind`` with its matrix placement recorded."""
    tree = subject_tree(subject)
    violations = validate_subject(kind, tree, issuer=issuer)
    if violations:
        raise SubjectInvalid(violations)
    valid_from, valid_until = window
    valid_from = codec.utc(valid_from)
    valid_until = codec.utc(valid_until) if valid_until is not None else None
    check_window(point.validity, valid_from, valid_until)
    trusted = kind is CredentialKind.CONFIGURATION and bool(tree.get("trustedHardware", False))
    credential_id = credential_id or default_credential_id(kind, issuer, tree, valid_from)
    return VerifiableCredential(
        id=credential_id,
        types=("VerifiableCredential", kind.tag),
        issuer=issuer,
        valid_from=valid_from,
        valid_until=valid_until,
        credential_subject=tree,
        credential_schema=schema_ref or kind.schema_uri,
        credential_status=status_ref or credential_id,
        matrix=MatrixTag(issuer_kind, point, trusted),
    )


def schema_definition(kind: CredentialKind) -> dict:
    """Registry entry describing the subject layout of ``kind``."""
    fields = {
        CredentialKind.STATIC_IDENTITY: ["id", "serialNo", "manufacturedDate", "manufacturer", "modelNo", "batchNo"],
        CredentialKind.DYNAMIC_IDENTITY: ["id", "firmwareVersion", "lastUpdatedDate", "updateHistory?", "attributes?"],
        CredentialKind.OWNERSHIP: ["deviceId", "owner", "purchasedDate", "transactionRef?"],
        CredentialKind.COMMUNICATION: ["deviceId", *COMMUNICATION_CATEGORIES],
        CredentialKind.CAPABILITY: ["deviceId", "computation", "memory", "other"],
        CredentialKind.CONFIGURATION: ["deviceId", *CONFIGURATION_CATEGORIES, "attestationEvidence?", "trustedHardware?"],
        CredentialKind.ONBOARDING: ["deviceId", "onboardee", "onboarder"],
    }[kind]
    return {"id": kind.schema_uri, "type": kind.tag, "fields": fields}


# ---------------------------------------------------------------------------
# fixture corpus
# ---------------------------------------------------------------------------

FIXTURE_DIDS: dict[str, Did] = {
    "manufacturer": Did("iot", "manufacturer:123456789"),
    "device": Did("iot", "device:123456789"),
    "owner": Did("iot", "user:123456789"),
    "buyer": Did("iot", "user:987654321"),
    "provider": Did("iot", "provider:123456789"),
    "edge": Did("iot", "edge:123456789"),
    "verifier": Did("iot", "verifier:123456789"),
    "regulator": Did("iot", "regulator:123456789"),
}

#: An instant inside the validity window of every fixture credential.
FIXTURE_CLOCK = datetime(2023, 8, 1, 10, 11, 12, tzinfo=timezone.utc)


def fixture_seed(name: str) -> bytes:
    return hashlib.sha256(b"iotcred fixture seed/" + name.encode()).digest()


def fixture_keys() -> dict[str, KeyPair]:
    from .model import generate_key_pair

    return {name: generate_key_pair(fixture_seed(name)) for name in FIXTURE_DIDS}


def _t(text: str) -> datetime:
    return codec.parse_time(text)


def fixture_specs() -> list[tuple[str, CredentialKind, IssuerKind, str, Any, MatrixPoint, tuple, str]]:
    """(name, kind, issuer kind, issuer party, subject, point, window, id) rows."""
    d = FIXTURE_DIDS
    device = d["device"]
    return [
        (
            "static_identity", CredentialKind.STATIC_IDENTITY, IssuerKind.MANUFACTURER, "manufacturer",
            StaticIdentitySubject(device, "123456789", _t("2022-12-01T00:01:02Z"), d["manufacturer"], "XYZ", "12345"),
            MatrixPoint(TrustLevel.VERIFIED, Scope.GENERAL_PUBLIC, Validity.INDEFINITE),
            (_t("2023-04-01T10:11:12Z"), None),
            "did:iot:device:vc:123456789",
        ),
        (
            "dynamic_identity", CredentialKind.DYNAMIC_IDENTITY, IssuerKind.MANUFACTURER, "manufacturer",
            DynamicIdentitySubject(device, "1.2.3", _t("2023-04-01T00:01:02Z")),
            MatrixPoint(TrustLevel.VERIFIED, Scope.CONNECTED_NETWORKS, Validity.MEDIUM_TERM),
            (_t("2023-04-01T00:01:02Z"), _t("2024-04-01T00:01:02Z")),
            "did:iot:device:vc:dyn:123456789",
        ),
        (
            "ownership", CredentialKind.OWNERSHIP, IssuerKind.MANUFACTURER, "manufacturer",
            OwnershipSubject(device, d["owner"], date(2022, 1, 1)),
            MatrixPoint(TrustLevel.VERIFIED, Scope.INDIVIDUAL, Validity.LONG_TERM),
            (_t("2022-01-01T00:00:00Z"), _t("2027-01-01T00:00:00Z")),
            "did:iot:device:vc:own:123456789",
        ),
        (
            "communication", CredentialKind.COMMUNICATION, IssuerKind.MANUFACTURER, "manufacturer",
            CommunicationSubject(
                device,
                wired=frozenset({"ethernet"}),
                wireless=frozenset({"bluetooth/4.0", "zigbee"}),
                cellular=frozenset({"5g-sa"}),
            ),
            MatrixPoint(TrustLevel.CONSORTIUM, Scope.GENERAL_PUBLIC, Validity.INDEFINITE),
            (_t("2023-04-01T10:11:12Z"), None),
            "did:iot:device:vc:comm:123456789",
        ),
        (
            "capability", CredentialKind.CAPABILITY, IssuerKind.MANUFACTURER, "manufacturer",
            CapabilitySubject(
                device,
                computation={"clockSpeedHz": 240_000_000, "cpuArch": "xtensa-lx6", "noOfCores": 2},
                memory={"ramBytes": 520 * 1024, "flashBytes": 4 * 1024 * 1024},
                other={"sensors": "temperature,humidity"},
            ),
            MatrixPoint(TrustLevel.VERIFIED, Scope.GENERAL_PUBLIC, Validity.LONG_TERM),
            (_t("2023-04-01T10:11:12Z"), _t("2033-04-01T10:11:12Z")),
            "did:iot:device:vc:cap:123456789",
        ),
        (
            "configuration", CredentialKind.CONFIGURATION, IssuerKind.MANUFACTURER, "manufacturer",
            ConfigurationSubject(
                device,
                thresholds={"maxThroughputBps": 250_000},
                security={"signature": "Ed25519", "encryption": "ChaCha20-Poly1305"},
                communication={"port": 5683, "protocol": "coap"},
                user={"deviceName": "greenhouse-sensor-1"},
                attestation_evidence=hashlib.sha256(b"firmware 1.2.3 measurement").digest(),
            ),
            MatrixPoint(TrustLevel.VERIFIED, Scope.SAME_NETWORK, Validity.SESSION),
            (_t("2023-08-01T10:00:00Z"), _t("2023-08-01T12:00:00Z")),
            "did:iot:device:vc:config:123456789",
        ),
        (
            "onboarding", CredentialKind.ONBOARDING, IssuerKind.SERVICE_PROVIDER, "provider",
            OnboardingSubject(
                device,
                onboardee_identity={"id": str(device), "serialNo": "123456789", "modelNo": "XYZ"},
                onboarder_identity={"id": str(d["provider"]), "service": "coap://onboard.example.net"},
                onboardee_configuration={"network": "greenhouse-mesh"},
                onboardee_ownership={"owner": str(d["owner"])},
                onboarder_other={"protocol": "fdo"},
            ),
            MatrixPoint(TrustLevel.ANCHORED, Scope.SAME_NETWORK, Validity.SESSION),
            (_t("2023-08-01T10:00:00Z"), _t("2023-08-01T11:00:00Z")),
            "did:iot:device:vc:onboard:123456789",
        ),
    ]


def build_fixture_corpus(keys: Mapping[str, KeyPair] | None = None) -> list[VerifiableCredential]:
    """Seven signed sample credentials, one per kind; byte-identical across runs."""
    keys = keys if keys is not None else fixture_keys()
    corpus = []
    for _name, kind, issuer_kind, party, subject, point, window, vc_id in fixture_specs():
        issuer = FIXTURE_DIDS[party]
        vc = build_credential(kind, subject, issuer, point, window, issuer_kind=issuer_kind, credential_id=vc_id)
        corpus.append(sign_credential(vc, keys[party], issuer.url("key-1"), window[0]))
    return corpus


def fixture_names() -> list[str]:
    return [row[0] for row in fixture_specs()]
