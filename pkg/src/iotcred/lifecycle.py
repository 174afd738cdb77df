"""Credential life cycle: issuance, verification, revocation, dynamic
identity reissue and two-party ownership transfer.

Every operation takes the clock as a parameter; nothing here reads the
ambient time.  Verification consults only the registry.
"""

from __future__ import annotations

import hashlib
import hmac
from dataclasses import dataclass, field, replace
from datetime import datetime
from enum import Enum
from typing import Any, Iterable, Mapping

from . import codec
from .errors import (
    BadBuyerProof,
    BadSellerProof,
    DuplicateActiveCredential,
    FirmwareUnchanged,
    NoExistingIdentity,
    NotCurrentOwner,
    NotFound,
    OwnershipRevoked,
    PolicyViolation,
)
from .matrix import CredentialKind, IssuerKind, MatrixPoint
from .model import Did, DidUrl, KeyPair, Proof, VerifiableCredential, VerifiablePresentation, make_proof
from .policy import check_admissible
from .registry import Registry, StatusState, revocation_message
from .schemas import (
    DynamicIdentitySubject,
    OwnershipSubject,
    build_credential,
    named_parties,
    subject_device,
    subject_tree,
    validate_subject,
)

#: Kinds of which a device may hold only one Active credential at a time.
SINGLE_ACTIVE_KINDS = frozenset({CredentialKind.OWNERSHIP, CredentialKind.DYNAMIC_IDENTITY})


class LifecycleState(Enum):
    ISSUED = "Issued"
    ACTIVE = "Active"
    EXPIRED = "Expired"
    REVOKED = "Revoked"


class Verdict(Enum):
    ACCEPT = "Accept"
    REJECT = "Reject"


CREDENTIAL_CHECKS = ("schema", "signature", "window", "status", "policy")
PRESENTATION_CHECKS = ("holderBinding", "challenge", "audience")


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""
    target: str | None = None

    def to_tree(self) -> dict:
        tree = {"check": self.name, "passed": self.passed, "detail": self.detail}
        if self.target is not None:
            tree["target"] = self.target
        return tree


@dataclass
class VerificationReport:
    checks: list[Check] = field(default_factory=list)

    @property
    def verdict(self) -> Verdict:
        return Verdict.ACCEPT if self.checks and all(c.passed for c in self.checks) else Verdict.REJECT

    @property
    def accepted(self) -> bool:
        return self.verdict is Verdict.ACCEPT

    def add(self, name: str, passed: bool, detail: str = "", target: str | None = None) -> None:
        self.checks.append(Check(name, passed, detail, target))

    def failed(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def outcome(self, name: str, target: str | None = None) -> bool:
        matches = [c.passed for c in self.checks if c.name == name and (target is None or c.target == target)]
        if not matches:
            raise KeyError(name)
        return all(matches)

    def to_tree(self) -> dict:
        return {"verdict": self.verdict.value, "checks": [c.to_tree() for c in self.checks]}

    def lines(self) -> list[str]:
        out = [f"verdict: {self.verdict.value}"]
        for c in self.checks:
            target = f" [{c.target}]" if c.target else ""
            out.append(f"{'pass' if c.passed else 'FAIL'} {c.name}{target}: {c.detail}")
        return out


@dataclass
class IssuerContext:
    """An issuer's identity plus the credentials it has issued so far."""

    issuer_kind: IssuerKind
    did: Did
    key: KeyPair
    method: DidUrl
    issued: dict[str, VerifiableCredential] = field(default_factory=dict)

    def remember(self, vc: VerifiableCredential) -> None:
        self.issued[vc.id] = vc


# ---------------------------------------------------------------------------
# state queries
# ---------------------------------------------------------------------------


def state_of(credential_id: str, clock: datetime, registry: Registry) -> LifecycleState:
    record = registry.check_status(credential_id)
    if record.state is StatusState.REVOKED:
        return LifecycleState.REVOKED
    if record.valid_until is not None and codec.utc(clock) > record.valid_until:
        return LifecycleState.EXPIRED
    return LifecycleState.ACTIVE


def active_credential_ids(registry: Registry, device: Did, kind: CredentialKind, clock: datetime) -> list[str]:
    """Ids of ``kind`` credentials about ``device`` that are Active at ``clock``."""
    found = []
    for record in registry.statuses():
        if record.subject == device and record.kind_tag == kind.tag:
            if state_of(record.credential_id, clock, registry) is LifecycleState.ACTIVE:
                found.append(record.credential_id)
    return found


# ---------------------------------------------------------------------------
# issuance and revocation
# ---------------------------------------------------------------------------


def _trusted_hardware(kind: CredentialKind, tree: Mapping) -> bool:
    return kind is CredentialKind.CONFIGURATION and tree.get("trustedHardware") is True


def prepare(
    ctx: IssuerContext,
    kind: CredentialKind,
    subject: Any,
    point: MatrixPoint,
    window: tuple[datetime, datetime | None],
    *,
    credential_id: str | None = None,
) -> VerifiableCredential:
    """Run the policy and subject checks and build the unsigned credential."""
    tree = subject_tree(subject)
    violations = check_admissible(ctx.issuer_kind, kind, point, _trusted_hardware(kind, tree))
    if violations:
        raise PolicyViolation(violations)
    return build_credential(
        kind, tree, ctx.did, point, window, issuer_kind=ctx.issuer_kind, credential_id=credential_id
    )


def _ensure_single_active(vc: VerifiableCredential, clock: datetime, registry: Registry) -> None:
    kind = CredentialKind.from_tag(vc.kind_tag)
    if kind in SINGLE_ACTIVE_KINDS:
        device = subject_device(vc)
        existing = active_credential_ids(registry, device, kind, clock)
        if existing:
            raise DuplicateActiveCredential(f"{device} already holds an Active {kind.value} credential {existing[0]}")


def issue(
    ctx: IssuerContext,
    kind: CredentialKind,
    subject: Any,
    point: MatrixPoint,
    window: tuple[datetime, datetime | None],
    clock: datetime,
    registry: Registry,
    *,
    credential_id: str | None = None,
) -> VerifiableCredential:
    """Check, sign and register a credential; its status starts Active."""
    unsigned = prepare(ctx, kind, subject, point, window, credential_id=credential_id)
    _ensure_single_active(unsigned, clock, registry)
    vc = unsigned.with_proof(make_proof(ctx.key, ctx.method, codec.signing_input(unsigned), clock))
    registry.register_status(vc)
    ctx.remember(vc)
    return vc


def revoke(
    ctx: IssuerContext,
    credential_id: str,
    at: datetime,
    registry: Registry,
    reason: str | None = None,
):
    proof = make_proof(ctx.key, ctx.method, revocation_message(credential_id, codec.utc(at), reason), at)
    return registry.set_status(credential_id, proof, at, reason)


def reissue_dynamic_identity(
    ctx: IssuerContext,
    device: Did,
    new_firmware: str,
    at: datetime,
    registry: Registry,
) -> tuple[VerifiableCredential, str]:
    """Replace the device's Active dynamic identity after a firmware update.

    The previous version is appended to ``updateHistory``; the new
    credential keeps the old matrix point and window length.  Returns the new
    credential and the id of the revoked one.
    """
    at = codec.utc(at)
    active = [
        i for i in active_credential_ids(registry, device, CredentialKind.DYNAMIC_IDENTITY, at) if i in ctx.issued
    ]
    if not active:
        raise NoExistingIdentity(f"{device} has no Active dynamic identity issued by {ctx.did}")
    old = ctx.issued[active[0]]
    current = DynamicIdentitySubject.from_tree(old.credential_subject)
    if current.firmware_version == new_firmware:
        raise FirmwareUnchanged(f"{device} already runs firmware {new_firmware}")
    subject = replace(
        current,
        firmware_version=new_firmware,
        last_updated=at,
        update_history=current.update_history + ((current.firmware_version, current.last_updated),),
    )
    until = at + (old.valid_until - old.valid_from) if old.valid_until is not None else None
    point = old.matrix.point
    prepare(ctx, CredentialKind.DYNAMIC_IDENTITY, subject, point, (at, until))
    revoke(ctx, old.id, at, registry, reason="firmware update")
    new = issue(ctx, CredentialKind.DYNAMIC_IDENTITY, subject, point, (at, until), at, registry)
    return new, old.id


# ---------------------------------------------------------------------------
# ownership transfer
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TransferRequest:
    current_vc_id: str
    seller: Did
    buyer: Did
    device: Did
    at: datetime
    seller_proof: Proof | None = None
    buyer_proof: Proof | None = None

    def __post_init__(self):
        object.__setattr__(self, "at", codec.utc(self.at))

    def payload(self) -> dict:
        return {
            "currentOwnershipVcId": self.current_vc_id,
            "seller": str(self.seller),
            "buyer": str(self.buyer),
            "device": str(self.device),
            "at": self.at,
        }

    def transaction_ref(self) -> str:
        return hashlib.sha256(codec.encode_canonical_text(self.payload())).hexdigest()

    def to_tree(self) -> dict:
        tree = self.payload()
        if self.seller_proof is not None:
            tree["sellerProof"] = self.seller_proof.to_tree()
        if self.buyer_proof is not None:
            tree["buyerProof"] = self.buyer_proof.to_tree()
        return tree

    @classmethod
    def from_tree(cls, tree: dict) -> TransferRequest:
        def proof(key):
            return Proof.from_tree(tree[key]) if tree.get(key) is not None else None

        return cls(
            current_vc_id=tree["currentOwnershipVcId"],
            seller=Did.parse(tree["seller"]),
            buyer=Did.parse(tree["buyer"]),
            device=Did.parse(tree["device"]),
            at=codec.as_time(tree["at"]),
            seller_proof=proof("sellerProof"),
            buyer_proof=proof("buyerProof"),
        )


def transfer_draft(request: TransferRequest, current: VerifiableCredential) -> VerifiableCredential:
    """The unsigned successor ownership credential.

    It is a pure function of the request and the current credential, so the
    seller, the buyer and the manufacturer all derive the same bytes.  Its
    ``transactionRef`` is the digest of the request payload, which binds the
    parties' signatures to (current id, seller, buyer, device, at).
    """
    ref = request.transaction_ref()
    subject = OwnershipSubject(request.device, request.buyer, request.at.date(), ref)
    until = None
    if current.valid_until is not None:
        until = request.at + (current.valid_until - current.valid_from)
    return build_credential(
        CredentialKind.OWNERSHIP,
        subject,
        current.issuer,
        current.matrix.point,
        (request.at, until),
        issuer_kind=current.matrix.issuer_kind,
        credential_id=f"urn:iot:vc:own:{ref[:16]}",
    )


def transfer_message(request: TransferRequest, current: VerifiableCredential) -> bytes:
    """Bytes the seller and the buyer each sign."""
    return codec.signing_input(transfer_draft(request, current))


def countersign(
    request: TransferRequest,
    current: VerifiableCredential,
    role: str,
    key: KeyPair,
    method: DidUrl,
) -> TransferRequest:
    """Attach the seller's or the buyer's proof to ``request``."""
    proof = make_proof(key, method, transfer_message(request, current), request.at)
    if role == "seller":
        return replace(request, seller_proof=proof)
    if role == "buyer":
        return replace(request, buyer_proof=proof)
    raise ValueError(f"role must be 'seller' or 'buyer', not {role!r}")


def transfer_ownership(request: TransferRequest, ctx: IssuerContext, registry: Registry) -> VerifiableCredential:
    """Execute a countersigned transfer at the manufacturer.

    All checks run before any state changes, so a rejected request leaves the
    current credential Active and issues nothing.  The new credential carries
    the issuer's, the buyer's and the seller's proofs, in that order.
    """
    current = ctx.issued.get(request.current_vc_id)
    if current is None:
        raise NotFound(f"{ctx.did} has not issued {request.current_vc_id}")
    if state_of(current.id, request.at, registry) is not LifecycleState.ACTIVE:
        raise OwnershipRevoked(f"{current.id} is no longer Active")
    body = current.credential_subject
    if body.get("owner") != str(request.seller) or body.get("deviceId") != str(request.device):
        raise NotCurrentOwner(f"{request.seller} does not own {request.device} under {current.id}")
    draft = transfer_draft(request, current)
    message = codec.signing_input(draft)
    for role, proof, party, error in (
        ("seller", request.seller_proof, request.seller, BadSellerProof),
        ("buyer", request.buyer_proof, request.buyer, BadBuyerProof),
    ):
        if proof is None or proof.verification_method.did != party or not registry.proof_authorized(
            party, proof, message
        ):
            raise error(f"{role} proof missing or not valid for {party}")
    violations = check_admissible(draft.matrix.issuer_kind, CredentialKind.OWNERSHIP, draft.matrix.point)
    if violations:
        raise PolicyViolation(violations)

    revoke(ctx, current.id, request.at, registry, reason="ownership transferred")
    issuer_proof = make_proof(ctx.key, ctx.method, message, request.at)
    new = replace(draft, proofs=(issuer_proof, request.buyer_proof, request.seller_proof))
    registry.register_status(new)
    ctx.remember(new)
    return new


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------


def _credential_checks(vc: VerifiableCredential, clock: datetime, registry: Registry, report, target) -> None:
    clock = codec.utc(clock)

    # schema
    try:
        kind = CredentialKind.from_tag(vc.kind_tag)
    except ValueError:
        kind = None
    if kind is None:
        report.add("schema", False, f"unknown credential type {vc.kind_tag!r}", target)
    else:
        problems = validate_subject(kind, vc.credential_subject, issuer=vc.issuer)
        if vc.credential_schema != kind.schema_uri:
            problems.append(f"credentialSchema {vc.credential_schema} does not match {kind.schema_uri}")
        report.add("schema", not problems, "; ".join(problems) or kind.schema_uri, target)

    # signature: every proof must verify; the first must come from the issuer
    message = codec.signing_input(vc)
    if registry.try_resolve(vc.issuer) is None:
        report.add("signature", False, f"issuer {vc.issuer} does not resolve", target)
    elif not vc.proofs:
        report.add("signature", False, "no proof", target)
    else:
        bad = [
            str(p.verification_method)
            for p in vc.proofs
            if not registry.proof_authorized(p.verification_method.did, p, message)
        ]
        issuer_first = vc.proofs[0].verification_method in registry.authorized_keys(vc.issuer)
        if bad:
            report.add("signature", False, "proof does not verify: " + ", ".join(bad), target)
        elif not issuer_first:
            report.add("signature", False, "first proof is not from the issuer", target)
        else:
            report.add("signature", True, f"{len(vc.proofs)} proof(s) verified", target)

    # window
    if clock < vc.valid_from:
        report.add("window", False, f"not valid before {codec.format_time(vc.valid_from)}", target)
    elif vc.valid_until is not None and clock > vc.valid_until:
        report.add("window", False, f"expired at {codec.format_time(vc.valid_until)}", target)
    else:
        report.add("window", True, "within validity window", target)

    # status
    try:
        record = registry.check_status(vc.credential_status)
        active = record.state is StatusState.ACTIVE and record.credential_id == vc.id
        report.add("status", active, record.state.value, target)
    except NotFound:
        report.add("status", False, "no status record", target)

    # policy
    if vc.matrix is None or kind is None:
        report.add("policy", False, "no matrix placement recorded", target)
    else:
        trusted = _trusted_hardware(kind, vc.credential_subject)
        violations = check_admissible(vc.matrix.issuer_kind, kind, vc.matrix.point, trusted)
        if vc.matrix.trusted_hardware != trusted:
            report.add("policy", False, "trustedHardware flag disagrees with the subject", target)
        else:
            report.add("policy", not violations, "; ".join(v.message for v in violations) or "admissible", target)


def verify_credential(vc: VerifiableCredential, clock: datetime, registry: Registry) -> VerificationReport:
    """Schema, signature, window, status and policy checks, in that order."""
    report = VerificationReport()
    _credential_checks(vc, clock, registry, report, None)
    return report


def verify_presentation(
    vp: VerifiablePresentation,
    expected_challenge: bytes,
    expected_audience: Did,
    clock: datetime,
    registry: Registry,
) -> VerificationReport:
    """Each credential's checks, then holder binding, challenge and audience."""
    report = VerificationReport()
    for vc in vp.credentials:
        _credential_checks(vc, clock, registry, report, vc.id)

    holder_doc = registry.try_resolve(vp.holder)
    unnamed = [vc.id for vc in vp.credentials if vp.holder not in named_parties(vc)]
    if vp.proof is None:
        report.add("holderBinding", False, "presentation is unsigned")
    elif holder_doc is None:
        report.add("holderBinding", False, f"holder {vp.holder} does not resolve")
    elif not registry.proof_authorized(vp.holder, vp.proof, codec.signing_input(vp)):
        report.add("holderBinding", False, "proof does not verify under the holder's or its controller's keys")
    elif unnamed:
        report.add("holderBinding", False, "credentials do not name the holder: " + ", ".join(unnamed))
    else:
        report.add("holderBinding", True, "controller" if vp.controller_signed else "subject")

    challenge_ok = hmac.compare_digest(bytes(vp.challenge), bytes(expected_challenge))
    report.add("challenge", challenge_ok, "matches" if challenge_ok else "unexpected challenge")
    audience_ok = vp.audience == expected_audience
    report.add("audience", audience_ok, str(vp.audience))
    return report


def verify_all(credentials: Iterable[VerifiableCredential], clock: datetime, registry: Registry):
    return {vc.id: verify_credential(vc, clock, registry) for vc in credentials}


__all__ = [
    "LifecycleState",
    "Verdict",
    "Check",
    "VerificationReport",
    "IssuerContext",
    "TransferRequest",
    "state_of",
    "active_credential_ids",
    "issue",
    "revoke",
    "reissue_dynamic_identity",
    "transfer_draft",
    "transfer_message",
    "countersign",
    "transfer_ownership",
    "verify_credential",
    "verify_presentation",
]
