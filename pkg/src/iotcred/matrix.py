"""Coordinates of the credential design matrix.

Three axes classify any credential: trust/interoperability, scope and
validity.  Issuers come in four kinds.  The admissibility tables built on this
vocabulary live in :mod:`iotcred.policy`.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class TrustLevel(Enum):
    """Trust/interoperability label.  ``rank`` orders the labels; Anchored and
    Linked share a rank but remain distinct labels."""

    SELF_ISSUED = "SelfIssued"
    VERIFIED = "Verified"
    ANCHORED = "Anchored"
    LINKED = "Linked"
    CROSS_VERIFIED = "CrossVerified"
    CONSORTIUM = "Consortium"
    REGULATOR = "Regulator"

    @property
    def rank(self) -> int:
        return _TRUST_RANK[self]


_TRUST_RANK = {
    TrustLevel.SELF_ISSUED: 0,
    TrustLevel.VERIFIED: 1,
    TrustLevel.ANCHORED: 2,
    TrustLevel.LINKED: 2,
    TrustLevel.CROSS_VERIFIED: 3,
    TrustLevel.CONSORTIUM: 4,
    TrustLevel.REGULATOR: 5,
}


def trust_between(low: TrustLevel, high: TrustLevel) -> frozenset[TrustLevel]:
    """All labels whose rank lies in ``[low.rank, high.rank]``."""
    return frozenset(t for t in TrustLevel if low.rank <= t.rank <= high.rank)


class Scope(Enum):
    INDIVIDUAL = "Individual"
    SAME_NETWORK = "SameNetwork"
    CONNECTED_NETWORKS = "ConnectedNetworks"
    GENERAL_PUBLIC = "GeneralPublic"

    @property
    def breadth(self) -> int:
        return list(Scope).index(self)


class Validity(Enum):
    PER_CALL = "PerCall"
    SESSION = "Session"
    MEDIUM_TERM = "MediumTerm"
    LONG_TERM = "LongTerm"
    INDEFINITE = "Indefinite"

    @property
    def duration_rank(self) -> int:
        return list(Validity).index(self)


class IssuerKind(Enum):
    MANUFACTURER = "Manufacturer"
    REGULATOR = "Regulator"
    SERVICE_PROVIDER = "ServiceProvider"
    OWNER = "Owner"


def parse_enum(enum_cls, text: str):
    """Look an enum member up by value (``"SelfIssued"``) or name (``"SELF_ISSUED"``)."""
    for member in enum_cls:
        if text in (member.value, member.name) or text.lower() == member.value.lower():
            return member
    choices = ", ".join(m.value for m in enum_cls)
    raise ValueError(f"unknown {enum_cls.__name__} {text!r}; expected one of {choices}")


@dataclass(frozen=True)
class MatrixPoint:
    trust: TrustLevel
    scope: Scope
    validity: Validity

    def to_tree(self) -> dict:
        return {"trust": self.trust.value, "scope": self.scope.value, "validity": self.validity.value}

    @classmethod
    def from_tree(cls, tree: dict) -> MatrixPoint:
        return cls(
            trust=TrustLevel(tree["trust"]),
            scope=Scope(tree["scope"]),
            validity=Validity(tree["validity"]),
        )


@dataclass(frozen=True)
class MatrixTag:
    """Matrix placement recorded inside a credential at issuance."""

    issuer_kind: IssuerKind
    point: MatrixPoint
    trusted_hardware: bool = False

    def to_tree(self) -> dict:
        tree = {"issuerKind": self.issuer_kind.value, **self.point.to_tree()}
        tree["trustedHardware"] = self.trusted_hardware
        return tree

    @classmethod
    def from_tree(cls, tree: dict) -> MatrixTag:
        trusted = tree.get("trustedHardware", False)
        if not isinstance(trusted, bool):
            raise TypeError("trustedHardware must be a boolean")
        return cls(IssuerKind(tree["issuerKind"]), MatrixPoint.from_tree(tree), trusted)


class CredentialKind(Enum):
    """The seven credential kinds; ``tag`` is the second entry of ``type``."""

    STATIC_IDENTITY = "StaticIdentity"
    DYNAMIC_IDENTITY = "DynamicIdentity"
    OWNERSHIP = "Ownership"
    COMMUNICATION = "Communication"
    CAPABILITY = "Capability"
    CONFIGURATION = "Configuration"
    ONBOARDING = "Onboarding"

    @property
    def tag(self) -> str:
        return _KIND_TAGS[self]

    @property
    def schema_uri(self) -> str:
        return f"schema:iot:{self.value}:v1"

    @classmethod
    def from_tag(cls, tag: str) -> CredentialKind:
        for kind, known in _KIND_TAGS.items():
            if known == tag:
                return kind
        if tag in _TAG_ALIASES:
            return _TAG_ALIASES[tag]
        raise ValueError(f"unknown credential type tag {tag!r}")


_KIND_TAGS = {
    CredentialKind.STATIC_IDENTITY: "StaticIoTIdentityVC",
    CredentialKind.DYNAMIC_IDENTITY: "DynamicIoTIdentityVC",
    CredentialKind.OWNERSHIP: "IoTOwnershipVC",
    CredentialKind.COMMUNICATION: "IoTCommunicationVC",
    CredentialKind.CAPABILITY: "IoTCapabilityVC",
    CredentialKind.CONFIGURATION: "IoTConfigVC",
    CredentialKind.ONBOARDING: "IoTOnboardingVC",
}

#: Spellings accepted on input but never produced.
_TAG_ALIASES = {"IoTComunicationVC": CredentialKind.COMMUNICATION}
