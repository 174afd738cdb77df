from __future__ import annotations

from datetime import date, datetime, timezone

import pytest
from hypothesis import given
from hypothesis import strategies as st

from iotcred import codec
from iotcred.errors import SubjectInvalid, WindowValidityMismatch
from iotcred.lifecycle import Verdict, verify_credential
from iotcred.matrix import CredentialKind, IssuerKind, MatrixPoint, Scope, TrustLevel, Validity
from iotcred.model import Did, VerifiableCredential
from iotcred.policy import check_admissible
from iotcred.schemas import (
    FIXTURE_CLOCK,
    FIXTURE_DIDS,
    SUBJECT_TYPES,
    CapabilitySubject,
    CommunicationSubject,
    ConfigurationSubject,
    DynamicIdentitySubject,
    OwnershipSubject,
    StaticIdentitySubject,
    build_credential,
    build_fixture_corpus,
    credential_kind,
    fixture_names,
    fixture_specs,
    named_parties,
    schema_definition,
    subject_device,
    subject_from_tree,
    validate_subject,
)

T0 = datetime(2023, 1, 1, tzinfo=timezone.utc)
T1 = datetime(2024, 1, 1, tzinfo=timezone.utc)
DEVICE = FIXTURE_DIDS["device"]
MANUFACTURER = FIXTURE_DIDS["manufacturer"]
OWNER = FIXTURE_DIDS["owner"]
INDEFINITE = MatrixPoint(TrustLevel.VERIFIED, Scope.GENERAL_PUBLIC, Validity.INDEFINITE)
LONG = MatrixPoint(TrustLevel.VERIFIED, Scope.INDIVIDUAL, Validity.LONG_TERM)


def test_static_identity_example():
    subject = StaticIdentitySubject(DEVICE, "123456789", T0, MANUFACTURER, "XYZ", "12345")
    vc = build_credential(CredentialKind.STATIC_IDENTITY, subject, MANUFACTURER, INDEFINITE, (T0, None),
                          issuer_kind=IssuerKind.MANUFACTURER)
    assert vc.types == ("VerifiableCredential", "StaticIoTIdentityVC")
    assert vc.credential_subject["serialNo"] == "123456789"
    assert vc.matrix.point == INDEFINITE and vc.matrix.issuer_kind is IssuerKind.MANUFACTURER
    assert vc.credential_schema == "schema:iot:StaticIdentity:v1"
    assert vc.credential_status == vc.id and vc.proofs == ()


def test_ownership_example():
    subject = OwnershipSubject(DEVICE, OWNER, date(2022, 1, 1))
    vc = build_credential(CredentialKind.OWNERSHIP, subject, MANUFACTURER, LONG, (T0, T1),
                          issuer_kind=IssuerKind.MANUFACTURER)
    assert vc.kind_tag == "IoTOwnershipVC"
    assert vc.credential_subject["purchasedDate"] == "2022-01-01"
    assert vc.credential_subject["owner"] == "did:iot:user:123456789"


def test_window_must_match_validity():
    subject = StaticIdentitySubject(DEVICE, "1", T0, MANUFACTURER, "XYZ", "1")
    with pytest.raises(WindowValidityMismatch):
        build_credential(CredentialKind.STATIC_IDENTITY, subject, MANUFACTURER, INDEFINITE, (T0, T1),
                         issuer_kind=IssuerKind.MANUFACTURER)
    with pytest.raises(WindowValidityMismatch):
        build_credential(CredentialKind.OWNERSHIP, OwnershipSubject(DEVICE, OWNER, date(2022, 1, 1)), MANUFACTURER,
                         LONG, (T0, None), issuer_kind=IssuerKind.MANUFACTURER)


def test_build_refuses_invalid_subjects():
    with pytest.raises(SubjectInvalid) as info:
        build_credential(CredentialKind.OWNERSHIP, OwnershipSubject(DEVICE, DEVICE, date(2022, 1, 1)), MANUFACTURER,
                         LONG, (T0, T1), issuer_kind=IssuerKind.MANUFACTURER)
    assert "deviceId and owner must differ" in info.value.violations
    # the manufacturer named in a static identity must be its issuer
    subject = StaticIdentitySubject(DEVICE, "1", T0, OWNER, "XYZ", "1")
    with pytest.raises(SubjectInvalid):
        build_credential(CredentialKind.STATIC_IDENTITY, subject, MANUFACTURER, INDEFINITE, (T0, None),
                         issuer_kind=IssuerKind.MANUFACTURER)


def test_validation_examples():
    empty_comm = CommunicationSubject(DEVICE)
    assert "at least one communication category must be non-empty" in validate_subject(
        CredentialKind.COMMUNICATION, empty_comm
    )
    zero_cores = CapabilitySubject(DEVICE, computation={"noOfCores": 0})
    assert "computation.noOfCores must be positive" in validate_subject(CredentialKind.CAPABILITY, zero_cores)
    unattested = ConfigurationSubject(DEVICE, user={"name": "x"})
    assert "configuration requires attestation evidence or trusted hardware" in validate_subject(
        CredentialKind.CONFIGURATION, unattested
    )
    assert validate_subject(CredentialKind.CONFIGURATION, ConfigurationSubject(DEVICE, user={"n": "x"}, trusted_hardware=True)) == []
    assert validate_subject(CredentialKind.CONFIGURATION, ConfigurationSubject(DEVICE, user={"n": "x"}, attestation_evidence=b"\x01")) == []


def test_more_validation_rules():
    comm = {"deviceId": str(DEVICE), "wired": ["eth", "eth"], "wireless": ["bad entry"], "cellular": [], "satellite": []}
    problems = validate_subject(CredentialKind.COMMUNICATION, comm)
    assert "wired contains duplicate entries" in problems
    assert any("wireless entry" in p for p in problems)

    dyn = DynamicIdentitySubject(DEVICE, "1.2", T1, update_history=(("1.0", T1), ("1.1", T0)))
    assert "updateHistory dates must be strictly increasing" in validate_subject(CredentialKind.DYNAMIC_IDENTITY, dyn)
    stale = DynamicIdentitySubject(DEVICE, "1.2", T0, update_history=(("1.1", T1),))
    assert "lastUpdatedDate must follow every updateHistory entry" in validate_subject(
        CredentialKind.DYNAMIC_IDENTITY, stale
    )
    early = DynamicIdentitySubject(DEVICE, "1.2", T0)
    assert "lastUpdatedDate precedes the manufacturing date" in validate_subject(
        CredentialKind.DYNAMIC_IDENTITY, early, manufactured=T1
    )
    assert "firmwareVersion must be a dotted numeric version" in validate_subject(
        CredentialKind.DYNAMIC_IDENTITY, DynamicIdentitySubject(DEVICE, "v1", T0)
    )

    static = StaticIdentitySubject(DEVICE, "1", T0, MANUFACTURER, "XYZ", "1").to_tree()
    assert "serialNo must be non-empty" in validate_subject(CredentialKind.STATIC_IDENTITY, {**static, "serialNo": ""})
    assert "unexpected field colour" in validate_subject(CredentialKind.STATIC_IDENTITY, {**static, "colour": "red"})

    onboarding = dict(build_fixture_corpus()[6].credential_subject)
    onboarding["onboarder"] = {"identity": {}, "other": {}}
    assert "onboarder identity must be non-empty" in validate_subject(CredentialKind.ONBOARDING, onboarding)


def test_fixture_corpus_shape():
    corpus = build_fixture_corpus()
    assert len(corpus) == 7
    assert [credential_kind(vc) for vc in corpus] == list(CredentialKind)
    assert build_fixture_corpus() == corpus
    assert fixture_names()[0] == "static_identity"


def test_fixture_corpus_is_admissible_and_valid():
    for (_, kind, issuer_kind, _, _, point, _, _), vc in zip(fixture_specs(), build_fixture_corpus()):
        assert check_admissible(issuer_kind, kind, point, vc.matrix.trusted_hardware) == []
        assert validate_subject(kind, vc.credential_subject, issuer=vc.issuer) == []


def test_fixture_corpus_verifies_end_to_end(shared_world):
    for vc in shared_world.corpus.values():
        report = verify_credential(vc, FIXTURE_CLOCK, shared_world.registry)
        assert report.verdict is Verdict.ACCEPT, report.lines()


def test_kind_tag_and_subject_bijection():
    for vc in build_fixture_corpus():
        decoded = codec.decode_deterministic_binary(codec.encode_deterministic_binary(vc), VerifiableCredential)
        kind = credential_kind(decoded)
        assert decoded.kind_tag == kind.tag
        typed = subject_from_tree(kind, decoded.credential_subject)
        assert isinstance(typed, SUBJECT_TYPES[kind])
        assert typed.to_tree() == vc.credential_subject
    assert len({k.tag for k in CredentialKind}) == 7
    for kind in CredentialKind:
        assert CredentialKind.from_tag(kind.tag) is kind
    with pytest.raises(ValueError):
        CredentialKind.from_tag("IoTVC")
    # the single-m spelling is read but never written
    assert CredentialKind.from_tag("IoTComunicationVC") is CredentialKind.COMMUNICATION
    assert CredentialKind.COMMUNICATION.tag == "IoTCommunicationVC"


def test_subject_from_tree_rejects_invalid():
    with pytest.raises(SubjectInvalid):
        subject_from_tree(CredentialKind.OWNERSHIP, {"deviceId": "nope"})


def test_parties_and_devices():
    corpus = build_fixture_corpus()
    assert all(subject_device(vc) == DEVICE for vc in corpus)
    assert named_parties(corpus[2]) == {DEVICE, OWNER}
    assert named_parties(corpus[6]) == {DEVICE, FIXTURE_DIDS["provider"]}


def test_schema_definitions():
    for kind in CredentialKind:
        definition = schema_definition(kind)
        assert definition["id"] == f"schema:iot:{kind.value}:v1" and definition["type"] == kind.tag


# --- totality ------------------------------------------------------------------

json_like = st.recursive(
    st.none() | st.booleans() | st.integers(-(2**63), 2**63) | st.text(max_size=12),
    lambda children: st.lists(children, max_size=4) | st.dictionaries(st.text(max_size=12), children, max_size=4),
    max_leaves=12,
)


@given(st.sampled_from(CredentialKind), json_like)
def test_validation_is_total_on_arbitrary_input(kind, body):
    problems = validate_subject(kind, body)
    assert isinstance(problems, list) and all(isinstance(p, str) for p in problems)
    if not isinstance(body, dict):
        assert problems


@given(st.data())
def test_damaged_fixture_subjects_always_yield_a_violation(data):
    corpus = build_fixture_corpus()
    index = data.draw(st.integers(0, 6))
    kind = list(CredentialKind)[index]
    body = dict(corpus[index].credential_subject)
    key = data.draw(st.sampled_from(sorted(body)))
    damage = data.draw(st.sampled_from(["drop", "null", "list", "number"]))
    if damage == "drop":
        if key in ("updateHistory", "attributes", "transactionRef", "attestationEvidence", "trustedHardware"):
            return
        # dropping one communication category is fine while others remain
        if kind is CredentialKind.COMMUNICATION and key != "deviceId":
            return
        del body[key]
    elif damage == "null":
        body[key] = None
    elif damage == "list":
        body[key] = [[]]
    else:
        body[key] = -7
    problems = validate_subject(kind, body, issuer=corpus[index].issuer)
    assert problems, (kind, key, damage)


def test_damaged_did_values():
    body = dict(build_fixture_corpus()[2].credential_subject)
    body["owner"] = "did:bad"
    assert validate_subject(CredentialKind.OWNERSHIP, body)
    assert Did.parse(body["deviceId"]) == DEVICE
