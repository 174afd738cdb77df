from __future__ import annotations

from itertools import product

import pytest
from hypothesis import given
from hypothesis import strategies as st

from iotcred import codec
from iotcred.matrix import (
    CredentialKind,
    IssuerKind,
    MatrixPoint,
    Scope,
    TrustLevel,
    Validity,
    parse_enum,
    trust_between,
)
from iotcred.policy import (
    NAMED_RULES,
    all_triples,
    check_admissible,
    enumerate_admissible,
    explain,
    export_table,
    is_admissible,
    issuer_region,
)

# ---------------------------------------------------------------------------
# An independent oracle: the admissibility tables restated with plain strings
# and integer ranks, sharing no code with the library.
# ---------------------------------------------------------------------------

RANK = {"SelfIssued": 0, "Verified": 1, "Anchored": 2, "Linked": 2, "CrossVerified": 3, "Consortium": 4, "Regulator": 5}
SCOPES = ["Individual", "SameNetwork", "ConnectedNetworks", "GeneralPublic"]
VALIDITIES = ["PerCall", "Session", "MediumTerm", "LongTerm", "Indefinite"]
ISSUERS = ["Manufacturer", "Regulator", "ServiceProvider", "Owner"]


def _region_ok(issuer: str, trust: str, scope: str, validity: str) -> bool:
    r = RANK[trust]
    if issuer == "Manufacturer":
        return 1 <= r <= 4
    if issuer == "Regulator":
        return r >= 3 and scope in ("ConnectedNetworks", "GeneralPublic") and validity in ("MediumTerm", "LongTerm")
    if issuer == "ServiceProvider":
        return 1 <= r <= 2 and scope in ("SameNetwork", "ConnectedNetworks") and validity in ("PerCall", "Session", "MediumTerm")
    if issuer == "Owner":
        return trust in ("SelfIssued", "Linked") and scope in ("Individual", "SameNetwork")
    raise AssertionError(issuer)


def _kind_ok(kind: str, issuer: str, trust: str, scope: str, validity: str, trusted_hardware: bool) -> bool:
    if kind == "StaticIdentity":
        return issuer == "Manufacturer" and validity == "Indefinite"
    if kind == "DynamicIdentity":
        return issuer == "Manufacturer" and validity in ("Session", "MediumTerm", "LongTerm")
    if kind == "Ownership":
        return issuer == "Manufacturer" and trust != "SelfIssued" and validity != "PerCall"
    if kind in ("Communication", "Capability"):
        return validity in ("LongTerm", "Indefinite") and scope != "Individual"
    if kind == "Configuration":
        shape = validity in ("PerCall", "Session") and scope in ("SameNetwork", "ConnectedNetworks")
        attested = issuer == "Manufacturer" and 1 <= RANK[trust] <= 4
        self_issued = trusted_hardware and issuer == "Owner" and trust == "SelfIssued"
        return shape and (attested or self_issued)
    if kind == "Onboarding":
        return issuer in ("Manufacturer", "ServiceProvider") and validity in ("PerCall", "Session") and scope == "SameNetwork"
    raise AssertionError(kind)


def oracle(kind: str, issuer: str, trust: str, scope: str, validity: str, trusted_hardware: bool = False) -> bool:
    return _region_ok(issuer, trust, scope, validity) and _kind_ok(kind, issuer, trust, scope, validity, trusted_hardware)


def point(trust: str, scope: str, validity: str) -> MatrixPoint:
    return MatrixPoint(TrustLevel(trust), Scope(scope), Validity(validity))


def rules_hit(issuer: str, kind: str, p: MatrixPoint, trusted_hardware: bool = False) -> set[str]:
    return {v.rule for v in check_admissible(IssuerKind(issuer), CredentialKind(kind), p, trusted_hardware)}


# Hand-picked witnesses: for each named rule an admissible triple the rule
# governs, and a triple violating that rule and nothing else.
WITNESSES = {
    "region.Manufacturer.trust": (
        ("Manufacturer", "Capability", ("Consortium", "GeneralPublic", "Indefinite")),
        ("Manufacturer", "Capability", ("Regulator", "GeneralPublic", "Indefinite")),
    ),
    "region.Regulator.trust": (
        ("Regulator", "Communication", ("Regulator", "GeneralPublic", "LongTerm")),
        ("Regulator", "Communication", ("Anchored", "GeneralPublic", "LongTerm")),
    ),
    "region.Regulator.validity": (
        ("Regulator", "Capability", ("CrossVerified", "ConnectedNetworks", "LongTerm")),
        ("Regulator", "Capability", ("CrossVerified", "ConnectedNetworks", "Indefinite")),
    ),
    "region.ServiceProvider.trust": (
        ("ServiceProvider", "Onboarding", ("Anchored", "SameNetwork", "Session")),
        ("ServiceProvider", "Onboarding", ("CrossVerified", "SameNetwork", "Session")),
    ),
    "region.ServiceProvider.validity": (
        ("ServiceProvider", "Onboarding", ("Verified", "SameNetwork", "PerCall")),
        ("ServiceProvider", "Communication", ("Verified", "SameNetwork", "LongTerm")),
    ),
    "region.Owner.trust": (
        ("Owner", "Communication", ("Linked", "SameNetwork", "LongTerm")),
        ("Owner", "Communication", ("Verified", "SameNetwork", "LongTerm")),
    ),
    "StaticIdentity.issuer": (
        ("Manufacturer", "StaticIdentity", ("Verified", "GeneralPublic", "Indefinite")),
        ("Owner", "StaticIdentity", ("Linked", "SameNetwork", "Indefinite")),
    ),
    "Ownership.trust": (
        ("Manufacturer", "Ownership", ("Verified", "Individual", "LongTerm")),
        # SelfIssued lies outside the manufacturer region too, so the rule is
        # witnessed together with that region rule.
        ("Manufacturer", "Ownership", ("SelfIssued", "Individual", "LongTerm")),
    ),
    "Communication.validity": (
        ("Manufacturer", "Communication", ("Verified", "ConnectedNetworks", "LongTerm")),
        ("Manufacturer", "Communication", ("Verified", "ConnectedNetworks", "MediumTerm")),
    ),
    "Capability.scope": (
        ("Manufacturer", "Capability", ("Verified", "SameNetwork", "Indefinite")),
        ("Manufacturer", "Capability", ("Verified", "Individual", "Indefinite")),
    ),
    "Configuration.validity": (
        ("Manufacturer", "Configuration", ("Verified", "SameNetwork", "PerCall")),
        ("Manufacturer", "Configuration", ("Verified", "SameNetwork", "MediumTerm")),
    ),
    "Onboarding.issuer": (
        ("ServiceProvider", "Onboarding", ("Anchored", "SameNetwork", "Session")),
        ("Owner", "Onboarding", ("Linked", "SameNetwork", "Session")),
    ),
    "Onboarding.scope": (
        ("Manufacturer", "Onboarding", ("Verified", "SameNetwork", "Session")),
        ("Manufacturer", "Onboarding", ("Verified", "ConnectedNetworks", "Session")),
    ),
}

# Rejecting witnesses that necessarily trip a second, related rule.
EXPECTED_COMPANIONS = {"Ownership.trust": {"region.Manufacturer.trust"}}


def test_every_named_rule_has_witnesses():
    assert set(WITNESSES) == {r.rule for r in NAMED_RULES}


@pytest.mark.parametrize("rule", sorted(WITNESSES))
def test_named_rule_witnesses(rule):
    (a_issuer, a_kind, a_point), (r_issuer, r_kind, r_point) = WITNESSES[rule]
    assert rules_hit(a_issuer, a_kind, point(*a_point)) == set()
    assert rules_hit(r_issuer, r_kind, point(*r_point)) == {rule} | EXPECTED_COMPANIONS.get(rule, set())


@pytest.mark.parametrize("kind", [k.value for k in CredentialKind])
@pytest.mark.parametrize("trusted_hardware", [False, True])
def test_check_admissible_matches_independent_oracle(kind, trusted_hardware):
    for issuer, trust, scope, validity in product(ISSUERS, RANK, SCOPES, VALIDITIES):
        expected = oracle(kind, issuer, trust, scope, validity, trusted_hardware)
        got = is_admissible(IssuerKind(issuer), CredentialKind(kind), point(trust, scope, validity), trusted_hardware)
        assert got == expected, (kind, issuer, trust, scope, validity, trusted_hardware)


# --- examples ----------------------------------------------------------------


def test_issuer_region_examples():
    assert point("Consortium", "GeneralPublic", "Indefinite").trust in issuer_region(IssuerKind.MANUFACTURER).trust
    manufacturer = issuer_region(IssuerKind.MANUFACTURER)
    assert Scope.GENERAL_PUBLIC in manufacturer.scope and Validity.INDEFINITE in manufacturer.validity
    assert TrustLevel.VERIFIED not in issuer_region(IssuerKind.OWNER).trust
    assert Validity.PER_CALL not in issuer_region(IssuerKind.REGULATOR).validity


def test_self_issued_ownership_is_refused_with_message():
    violations = check_admissible(IssuerKind.OWNER, CredentialKind.OWNERSHIP, point("SelfIssued", "Individual", "LongTerm"))
    assert "ownership must not be self-issued" in [v.message for v in violations]


def test_admissible_examples():
    assert is_admissible(IssuerKind.MANUFACTURER, CredentialKind.STATIC_IDENTITY, point("Verified", "GeneralPublic", "Indefinite"))
    assert is_admissible(IssuerKind.SERVICE_PROVIDER, CredentialKind.ONBOARDING, point("Anchored", "SameNetwork", "Session"))


def test_regulator_long_term_configuration_reports_all_violations():
    violations = check_admissible(
        IssuerKind.REGULATOR, CredentialKind.CONFIGURATION, point("Regulator", "GeneralPublic", "LongTerm")
    )
    axes = {v.axis for v in violations}
    assert len(violations) >= 2
    assert {"issuer", "validity"} <= axes


def test_trusted_hardware_self_issued_configuration():
    p = point("SelfIssued", "SameNetwork", "Session")
    assert not is_admissible(IssuerKind.OWNER, CredentialKind.CONFIGURATION, p)
    assert is_admissible(IssuerKind.OWNER, CredentialKind.CONFIGURATION, p, trusted_hardware=True)
    # the flag only widens Configuration
    assert not is_admissible(IssuerKind.OWNER, CredentialKind.OWNERSHIP, p, trusted_hardware=True)


def test_enumeration_examples():
    static = enumerate_admissible(CredentialKind.STATIC_IDENTITY)
    assert static and all(i is IssuerKind.MANUFACTURER and p.validity is Validity.INDEFINITE for i, p in static)
    assert all(p.validity is not Validity.LONG_TERM for _, p in enumerate_admissible(CredentialKind.CONFIGURATION))


@pytest.mark.parametrize("kind", list(CredentialKind))
@pytest.mark.parametrize("trusted_hardware", [False, True])
def test_enumeration_is_exactly_the_accepting_set(kind, trusted_hardware):
    cells = enumerate_admissible(kind, trusted_hardware)
    assert len(cells) == len(set(cells))
    accepting = [(i, p) for i, p in all_triples() if is_admissible(i, kind, p, trusted_hardware)]
    assert set(cells) == set(accepting)


def test_lattice_sizes():
    assert len(list(all_triples())) == 560
    assert len(set(all_triples())) == 560


# --- properties ----------------------------------------------------------------

triples = st.tuples(st.sampled_from(IssuerKind), st.sampled_from(CredentialKind), st.sampled_from(TrustLevel),
                    st.sampled_from(Scope), st.sampled_from(Validity))


@given(triples)
def test_verdict_depends_only_on_the_tables(triple):
    issuer, kind, trust, scope, validity = triple
    p = MatrixPoint(trust, scope, validity)
    first = check_admissible(issuer, kind, p)
    assert check_admissible(issuer, kind, p) == first
    assert ((issuer, p) in enumerate_admissible(kind)) == (not first)


@given(triples)
def test_anchored_and_linked_agree_on_rank_only_rules(triple):
    issuer, kind, trust, scope, validity = triple
    # Owner's region names labels, not a rank interval.
    if issuer is IssuerKind.OWNER:
        return
    a = is_admissible(issuer, kind, MatrixPoint(TrustLevel.ANCHORED, scope, validity))
    b = is_admissible(issuer, kind, MatrixPoint(TrustLevel.LINKED, scope, validity))
    assert a == b


def test_raising_trust_within_region_keeps_admissibility():
    for issuer, kind in product(IssuerKind, CredentialKind):
        region = issuer_region(issuer).trust
        for cell_issuer, p in enumerate_admissible(kind):
            if cell_issuer is not issuer:
                continue
            for higher in TrustLevel:
                if higher.rank > p.trust.rank and higher in region:
                    raised = MatrixPoint(higher, p.scope, p.validity)
                    # only an upper trust bound in the kind rule may intervene
                    hits = {v.axis for v in check_admissible(issuer, kind, raised)}
                    assert hits <= {"trust"}, (issuer, kind, p, higher)
                    if kind is not CredentialKind.CONFIGURATION:
                        assert not hits


def test_trust_ranks_form_a_preorder():
    assert min(TrustLevel, key=lambda t: t.rank) is TrustLevel.SELF_ISSUED
    assert max(TrustLevel, key=lambda t: t.rank) is TrustLevel.REGULATOR
    assert TrustLevel.ANCHORED.rank == TrustLevel.LINKED.rank
    assert trust_between(TrustLevel.VERIFIED, TrustLevel.ANCHORED) == {
        TrustLevel.VERIFIED, TrustLevel.ANCHORED, TrustLevel.LINKED
    }


def test_parse_enum_accepts_values_and_names():
    assert parse_enum(TrustLevel, "SelfIssued") is TrustLevel.SELF_ISSUED
    assert parse_enum(TrustLevel, "SELF_ISSUED") is TrustLevel.SELF_ISSUED
    assert parse_enum(Validity, "longterm") is Validity.LONG_TERM
    with pytest.raises(ValueError):
        parse_enum(Scope, "Planet")


def test_export_table_is_canonical_and_complete():
    table = export_table()
    assert set(table["issuerRegions"]) == {i.value for i in IssuerKind}
    assert set(table["kindRules"]) == {k.value for k in CredentialKind}
    text = codec.encode_canonical_text(table)
    assert codec.decode_canonical_text(text) == table


def test_explain_lists_rules_and_regions():
    lines = explain(CredentialKind.ONBOARDING)
    assert lines[0].startswith("Onboarding (IoTOnboardingVC)")
    assert any("rule Onboarding.scope" in line for line in lines)
    assert any(line.strip().startswith("*") for line in lines)
