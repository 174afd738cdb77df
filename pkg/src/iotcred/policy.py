"""Admissibility of (issuer kind, credential kind, matrix point) triples.

Two static tables decide every verdict: the region each issuer kind may
occupy in the matrix, and the constraints each credential kind places on
issuer, trust, scope and validity.  A triple is admissible iff the point lies
inside both.  Hedged statements about issuers ("typically", "generally") are
frozen into the sets below.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from .matrix import (
    CredentialKind,
    IssuerKind,
    MatrixPoint,
    Scope,
    TrustLevel,
    Validity,
    trust_between,
)

ALL_TRUST = frozenset(TrustLevel)
ALL_SCOPE = frozenset(Scope)
ALL_VALIDITY = frozenset(Validity)
ALL_ISSUERS = frozenset(IssuerKind)

AXES = ("issuer", "trust", "scope", "validity")


@dataclass(frozen=True)
class Violation:
    rule: str
    axis: str
    message: str

    def to_tree(self) -> dict:
        return {"rule": self.rule, "axis": self.axis, "message": self.message}


@dataclass(frozen=True)
class Region:
    trust: frozenset[TrustLevel]
    scope: frozenset[Scope]
    validity: frozenset[Validity]
    rationale: str


@dataclass(frozen=True)
class KindRule:
    issuers: frozenset[IssuerKind]
    trust: frozenset[TrustLevel]
    scope: frozenset[Scope]
    validity: frozenset[Validity]
    messages: dict
    rationale: str


ISSUER_REGIONS: dict[IssuerKind, Region] = {
    IssuerKind.MANUFACTURER: Region(
        trust=trust_between(TrustLevel.VERIFIED, TrustLevel.CONSORTIUM),
        scope=ALL_SCOPE,
        validity=ALL_VALIDITY,
        rationale="a lone manufacturer is Verified; consortium membership lifts it to Consortium; any scope or lifetime",
    ),
    IssuerKind.REGULATOR: Region(
        trust=trust_between(TrustLevel.CROSS_VERIFIED, TrustLevel.REGULATOR),
        scope=frozenset({Scope.CONNECTED_NETWORKS, Scope.GENERAL_PUBLIC}),
        validity=frozenset({Validity.MEDIUM_TERM, Validity.LONG_TERM}),
        rationale="top trust band; network-wide or public scope; medium to long lifetimes",
    ),
    IssuerKind.SERVICE_PROVIDER: Region(
        trust=trust_between(TrustLevel.VERIFIED, TrustLevel.ANCHORED),
        scope=frozenset({Scope.SAME_NETWORK, Scope.CONNECTED_NETWORKS}),
        validity=frozenset({Validity.PER_CALL, Validity.SESSION, Validity.MEDIUM_TERM}),
        rationale="middle trust band; own and affiliated networks; per-call to medium lifetimes",
    ),
    IssuerKind.OWNER: Region(
        trust=frozenset({TrustLevel.SELF_ISSUED, TrustLevel.LINKED}),
        scope=frozenset({Scope.INDIVIDUAL, Scope.SAME_NETWORK}),
        validity=ALL_VALIDITY,
        rationale="self-asserted, or linked once the owner's identity is established; owner-controlled scope",
    ),
}


def _rule(issuers=ALL_ISSUERS, trust=ALL_TRUST, scope=ALL_SCOPE, validity=ALL_VALIDITY, *, rationale, messages):
    return KindRule(frozenset(issuers), frozenset(trust), frozenset(scope), frozenset(validity), messages, rationale)


_BEYOND_INDIVIDUAL = ALL_SCOPE - {Scope.INDIVIDUAL}
_LONG_LIVED = {Validity.LONG_TERM, Validity.INDEFINITE}
_SHORT_LIVED = {Validity.PER_CALL, Validity.SESSION}

KIND_RULES: dict[CredentialKind, KindRule] = {
    CredentialKind.STATIC_IDENTITY: _rule(
        issuers={IssuerKind.MANUFACTURER},
        validity={Validity.INDEFINITE},
        rationale="factory-issued, immutable device attributes",
        messages={
            "issuer": "static identity must be issued by the device manufacturer",
            "validity": "static identity must be indefinite",
        },
    ),
    CredentialKind.DYNAMIC_IDENTITY: _rule(
        issuers={IssuerKind.MANUFACTURER},
        validity={Validity.SESSION, Validity.MEDIUM_TERM, Validity.LONG_TERM},
        rationale="firmware-bound identity, reissued by the manufacturer after each update",
        messages={
            "issuer": "dynamic identity must be issued by the device manufacturer",
            "validity": "dynamic identity must be session, medium-term or long-term",
        },
    ),
    CredentialKind.OWNERSHIP: _rule(
        issuers={IssuerKind.MANUFACTURER},
        trust=ALL_TRUST - {TrustLevel.SELF_ISSUED},
        validity=ALL_VALIDITY - {Validity.PER_CALL},
        rationale="manufacturer-issued and reissued on every transfer; never self-issued",
        messages={
            "issuer": "ownership must be issued by the device manufacturer",
            "trust": "ownership must not be self-issued",
            "validity": "ownership cannot be per-call",
        },
    ),
    CredentialKind.COMMUNICATION: _rule(
        scope=_BEYOND_INDIVIDUAL,
        validity=_LONG_LIVED,
        rationale="protocol support rarely changes and is consulted by peers",
        messages={
            "scope": "communication credentials must reach beyond individual scope",
            "validity": "communication credentials must be long-term or indefinite",
        },
    ),
    CredentialKind.CAPABILITY: _rule(
        scope=_BEYOND_INDIVIDUAL,
        validity=_LONG_LIVED,
        rationale="hardware capabilities rarely change and are consulted by peers",
        messages={
            "scope": "capability credentials must reach beyond individual scope",
            "validity": "capability credentials must be long-term or indefinite",
        },
    ),
    CredentialKind.CONFIGURATION: _rule(
        issuers={IssuerKind.MANUFACTURER},
        trust=trust_between(TrustLevel.VERIFIED, TrustLevel.CONSORTIUM),
        scope={Scope.SAME_NETWORK, Scope.CONNECTED_NETWORKS},
        validity=_SHORT_LIVED,
        rationale="manufacturer-issued, short-lived and network-bound",
        messages={
            "issuer": "configuration must be issued by the manufacturer unless self-issued on trusted hardware",
            "trust": "configuration trust must be Verified to Consortium unless self-issued on trusted hardware",
            "scope": "configuration scope is limited to the same or connected networks",
            "validity": "configuration must be per-call or per-session",
        },
    ),
    CredentialKind.ONBOARDING: _rule(
        issuers={IssuerKind.MANUFACTURER, IssuerKind.SERVICE_PROVIDER},
        scope={Scope.SAME_NETWORK},
        validity=_SHORT_LIVED,
        rationale="enrolment material must stay current and local to the joining network",
        messages={
            "issuer": "onboarding must be issued by a manufacturer or service provider",
            "scope": "onboarding scope is limited to the same network",
            "validity": "onboarding must be per-call or per-session",
        },
    ),
}

# Devices with trusted hardware may self-issue configuration credentials: the
# owner, at SelfIssued trust, in the same network/validity shape.
_TRUSTED_HARDWARE_CONFIGURATION = KindRule(
    issuers=frozenset({IssuerKind.OWNER}),
    trust=frozenset({TrustLevel.SELF_ISSUED}),
    scope=KIND_RULES[CredentialKind.CONFIGURATION].scope,
    validity=KIND_RULES[CredentialKind.CONFIGURATION].validity,
    messages={
        **KIND_RULES[CredentialKind.CONFIGURATION].messages,
        "trust": "self-issued configuration on trusted hardware must carry SelfIssued trust",
    },
    rationale="owner self-issues on devices with trusted hardware",
)


def issuer_region(kind: IssuerKind) -> Region:
    return ISSUER_REGIONS[kind]


def kind_rule(kind: CredentialKind, trusted_hardware: bool = False, issuer: IssuerKind | None = None) -> KindRule:
    """The rule governing ``kind``; the trusted-hardware exception replaces
    the Configuration rule for owner-issued credentials only."""
    if kind is CredentialKind.CONFIGURATION and trusted_hardware and issuer is IssuerKind.OWNER:
        return _TRUSTED_HARDWARE_CONFIGURATION
    return KIND_RULES[kind]


def _labels(values) -> str:
    return ", ".join(v.value for v in sorted(values, key=lambda v: list(type(v)).index(v)))


def check_admissible(
    issuer: IssuerKind,
    kind: CredentialKind,
    point: MatrixPoint,
    trusted_hardware: bool = False,
) -> list[Violation]:
    """Every violated rule for the triple; an empty list means admissible."""
    region = issuer_region(issuer)
    rule = kind_rule(kind, trusted_hardware, issuer)
    found: list[Violation] = []
    coords = {"trust": point.trust, "scope": point.scope, "validity": point.validity}

    for axis, value in coords.items():
        allowed = getattr(region, axis)
        if value not in allowed:
            found.append(
                Violation(
                    f"region.{issuer.value}.{axis}",
                    axis,
                    f"{issuer.value} issuers cover {axis} {{{_labels(allowed)}}}, not {value.value}",
                )
            )

    if issuer not in rule.issuers:
        found.append(Violation(f"{kind.value}.issuer", "issuer", rule.messages["issuer"]))
    for axis, value in coords.items():
        if value not in getattr(rule, axis):
            found.append(Violation(f"{kind.value}.{axis}", axis, rule.messages[axis]))
    return found


def is_admissible(issuer, kind, point, trusted_hardware=False) -> bool:
    return not check_admissible(issuer, kind, point, trusted_hardware)


def all_triples():
    """The full 4 x 7 x 4 x 5 = 560 issuer/point combinations."""
    for issuer, trust, scope, validity in product(IssuerKind, TrustLevel, Scope, Validity):
        yield issuer, MatrixPoint(trust, scope, validity)


def enumerate_admissible(kind: CredentialKind, trusted_hardware: bool = False) -> list[tuple[IssuerKind, MatrixPoint]]:
    """Admissible cells built by intersecting the two tables axis by axis."""
    cells = []
    for issuer in IssuerKind:
        rule = kind_rule(kind, trusted_hardware, issuer)
        if issuer not in rule.issuers:
            continue
        region = ISSUER_REGIONS[issuer]
        trust = [t for t in TrustLevel if t in region.trust & rule.trust]
        scope = [s for s in Scope if s in region.scope & rule.scope]
        validity = [v for v in Validity if v in region.validity & rule.validity]
        cells.extend((issuer, MatrixPoint(t, s, v)) for t, s, v in product(trust, scope, validity))
    return cells


@dataclass(frozen=True)
class NamedRule:
    """A policy statement with a stable identifier matching ``Violation.rule``."""

    rule: str
    kind: CredentialKind | None
    issuer: IssuerKind | None
    statement: str


NAMED_RULES: tuple[NamedRule, ...] = (
    NamedRule("region.Manufacturer.trust", None, IssuerKind.MANUFACTURER,
              "manufacturers issue from Verified up to Consortium trust"),
    NamedRule("region.Regulator.trust", None, IssuerKind.REGULATOR,
              "regulators issue from CrossVerified up to the top trust level"),
    NamedRule("region.Regulator.validity", None, IssuerKind.REGULATOR,
              "regulators issue medium- to long-term credentials only"),
    NamedRule("region.ServiceProvider.trust", None, IssuerKind.SERVICE_PROVIDER,
              "service providers issue from Verified up to Anchored trust"),
    NamedRule("region.ServiceProvider.validity", None, IssuerKind.SERVICE_PROVIDER,
              "service-provider credentials are shorter-lived"),
    NamedRule("region.Owner.trust", None, IssuerKind.OWNER,
              "owners issue self-issued or linked credentials"),
    NamedRule("StaticIdentity.issuer", CredentialKind.STATIC_IDENTITY, None,
              "only the device manufacturer issues the static identity"),
    NamedRule("Ownership.trust", CredentialKind.OWNERSHIP, None,
              "ownership is never self-issued"),
    NamedRule("Communication.validity", CredentialKind.COMMUNICATION, None,
              "communication credentials are long-term or indefinite"),
    NamedRule("Capability.scope", CredentialKind.CAPABILITY, None,
              "capability credentials reach beyond individual scope"),
    NamedRule("Configuration.validity", CredentialKind.CONFIGURATION, None,
              "configuration credentials last one call or one session"),
    NamedRule("Onboarding.issuer", CredentialKind.ONBOARDING, None,
              "manufacturers or service providers issue onboarding credentials"),
    NamedRule("Onboarding.scope", CredentialKind.ONBOARDING, None,
              "onboarding credentials stay within the joining network"),
)


def export_table() -> dict:
    """The whole policy as a tree suitable for canonical text export."""

    def names(values):
        return [v.value for v in sorted(values, key=lambda v: list(type(v)).index(v))]

    return {
        "issuerRegions": {
            issuer.value: {
                "trust": names(region.trust),
                "scope": names(region.scope),
                "validity": names(region.validity),
                "rationale": region.rationale,
            }
            for issuer, region in ISSUER_REGIONS.items()
        },
        "kindRules": {
            kind.value: {
                "issuers": names(rule.issuers),
                "trust": names(rule.trust),
                "scope": names(rule.scope),
                "validity": names(rule.validity),
                "rationale": rule.rationale,
            }
            for kind, rule in KIND_RULES.items()
        },
        "trustedHardwareConfiguration": {
            "issuers": names(_TRUSTED_HARDWARE_CONFIGURATION.issuers),
            "trust": names(_TRUSTED_HARDWARE_CONFIGURATION.trust),
        },
    }


def explain(kind: CredentialKind) -> list[str]:
    """Human-readable rows for one credential kind and every issuer region."""
    rule = KIND_RULES[kind]
    lines = [f"{kind.value} ({kind.tag}): {rule.rationale}"]
    lines.append(f"  issuers:  {_labels(rule.issuers)}")
    lines.append(f"  trust:    {_labels(rule.trust)}")
    lines.append(f"  scope:    {_labels(rule.scope)}")
    lines.append(f"  validity: {_labels(rule.validity)}")
    if kind is CredentialKind.CONFIGURATION:
        lines.append("  trusted hardware: Owner may self-issue at SelfIssued trust")
    for named in NAMED_RULES:
        if named.kind is kind:
            lines.append(f"  rule {named.rule}: {named.statement}")
    lines.append("issuer regions:")
    for issuer, region in ISSUER_REGIONS.items():
        marker = "*" if issuer in rule.issuers else " "
        lines.append(
            f" {marker}{issuer.value}: trust {{{_labels(region.trust)}}} scope {{{_labels(region.scope)}}} "
            f"validity {{{_labels(region.validity)}}} -- {region.rationale}"
        )
    return lines
