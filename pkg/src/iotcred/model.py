"""Identifiers, documents, credentials, presentations and key material.

All types are frozen dataclasses.  Sequence fields are tuples; the one
exception is ``VerifiableCredential.credential_subject``, a plain mapping
tree that callers must treat as read-only.
"""

from __future__ import annotations

import hashlib
import os
import re
from dataclasses import dataclass, field, replace
from datetime import datetime
from enum import Enum
from typing import Iterable, Sequence

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PrivateKey, Ed25519PublicKey
from cryptography.hazmat.primitives.asymmetric.x25519 import X25519PrivateKey, X25519PublicKey
from cryptography.hazmat.primitives.kdf.hkdf import HKDF

from . import codec
from .errors import (
    BadSeedLength,
    DuplicateFragment,
    EmptyChallenge,
    EmptyCredentialList,
    EmptyKeyList,
    KeyMismatch,
    MalformedDid,
    MalformedDocument,
)
from .matrix import MatrixTag

DID_CORE_CONTEXT = "https://www.w3.org/ns/did/v1"
ED25519_CONTEXT = "https://w3id.org/security/suites/ed25519-2018/v1"
X25519_CONTEXT = "https://w3id.org/security/suites/x25519-2019/v1"
VC_CONTEXT = "https://www.w3.org/2018/credentials/v1"

_METHOD_RE = re.compile(r"[a-z0-9]+")
_MSID_RE = re.compile(r"[A-Za-z0-9._-]+(?::[A-Za-z0-9._-]+)*")
_FRAGMENT_RE = re.compile(r"[A-Za-z0-9._~-]+")


class KeyType(Enum):
    ED25519 = "Ed25519VerificationKey2018"
    X25519 = "X25519KeyAgreementKey2019"


class ProofType(Enum):
    ED25519 = "Ed25519Signature2018"


_KEY_LENGTH = {KeyType.ED25519: 32, KeyType.X25519: 32}
_SIGNATURE_LENGTH = {ProofType.ED25519: 64}


# ---------------------------------------------------------------------------
# DIDs
# ---------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class Did:
    """``did:<method>:<method-specific-id>``."""

    method: str
    id: str

    def __post_init__(self):
        if not isinstance(self.method, str) or not _METHOD_RE.fullmatch(self.method):
            raise MalformedDid(f"bad DID method {self.method!r}")
        if not isinstance(self.id, str) or not _MSID_RE.fullmatch(self.id):
            raise MalformedDid(f"bad method-specific identifier {self.id!r}")

    def __str__(self) -> str:
        return f"did:{self.method}:{self.id}"

    @classmethod
    def parse(cls, text: str) -> Did:
        if not isinstance(text, str) or not text.startswith("did:"):
            raise MalformedDid(f"missing 'did:' prefix in {text!r}")
        method, sep, rest = text[4:].partition(":")
        if not sep:
            raise MalformedDid(f"missing method-specific identifier in {text!r}")
        return cls(method, rest)

    def url(self, fragment: str) -> DidUrl:
        return DidUrl(self, fragment)


def parse_did(text: str) -> Did:
    return Did.parse(text)


@dataclass(frozen=True, order=True)
class DidUrl:
    did: Did
    fragment: str

    def __post_init__(self):
        if not isinstance(self.fragment, str) or not _FRAGMENT_RE.fullmatch(self.fragment):
            raise MalformedDid(f"bad DID URL fragment {self.fragment!r}")

    def __str__(self) -> str:
        return f"{self.did}#{self.fragment}"

    @classmethod
    def parse(cls, text: str) -> DidUrl:
        if not isinstance(text, str):
            raise MalformedDid(f"DID URL must be text, got {text!r}")
        base, sep, fragment = text.partition("#")
        if not sep:
            raise MalformedDid(f"DID URL {text!r} has no fragment")
        return cls(Did.parse(base), fragment)


# ---------------------------------------------------------------------------
# DID documents
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VerificationMethod:
    id: DidUrl
    key_type: KeyType
    public_key: bytes

    def __post_init__(self):
        if len(self.public_key) != _KEY_LENGTH[self.key_type]:
            raise MalformedDocument(
                f"{self.key_type.value} keys are {_KEY_LENGTH[self.key_type]} bytes, "
                f"got {len(self.public_key)}"
            )

    def to_tree(self) -> dict:
        return {"id": str(self.id), "type": self.key_type.value, "publicKeyBase58": self.public_key}

    @classmethod
    def from_tree(cls, tree: dict) -> VerificationMethod:
        return cls(DidUrl.parse(tree["id"]), KeyType(tree["type"]), codec.as_bytes(tree["publicKeyBase58"]))


@dataclass(frozen=True)
class ServiceEndpoint:
    id: DidUrl
    service_type: str
    endpoint: str

    def __post_init__(self):
        if not self.endpoint:
            raise MalformedDocument(f"service {self.id} has an empty endpoint")

    def to_tree(self) -> dict:
        return {"id": str(self.id), "type": self.service_type, "serviceEndpoint": self.endpoint}

    @classmethod
    def from_tree(cls, tree: dict) -> ServiceEndpoint:
        return cls(DidUrl.parse(tree["id"]), str(tree["type"]), str(tree["serviceEndpoint"]))


@dataclass(frozen=True)
class DidDocument:
    id: Did
    verification_methods: tuple[VerificationMethod, ...]
    authentication: tuple[DidUrl, ...]
    services: tuple[ServiceEndpoint, ...] = ()
    controller: Did | None = None
    key_agreement: tuple[DidUrl, ...] = ()
    contexts: tuple[str, ...] = (DID_CORE_CONTEXT, ED25519_CONTEXT)

    def __post_init__(self):
        if not self.contexts or self.contexts[0] != DID_CORE_CONTEXT:
            raise MalformedDocument(f"first @context must be {DID_CORE_CONTEXT}")
        seen = set()
        for vm in self.verification_methods:
            if vm.id.did != self.id:
                raise MalformedDocument(f"verification method {vm.id} is not under {self.id}")
            if vm.id.fragment in seen:
                raise DuplicateFragment(f"duplicate fragment #{vm.id.fragment}")
            seen.add(vm.id.fragment)
        services = set()
        for svc in self.services:
            if svc.id in services:
                raise DuplicateFragment(f"duplicate service id {svc.id}")
            services.add(svc.id)
        for ref in self.authentication:
            vm = self.find_method(ref)
            if vm is None or vm.key_type is not KeyType.ED25519:
                raise MalformedDocument(f"authentication reference {ref} does not resolve to a signing key")
        for ref in self.key_agreement:
            vm = self.find_method(ref)
            if vm is None or vm.key_type is not KeyType.X25519:
                raise MalformedDocument(f"keyAgreement reference {ref} does not resolve to an agreement key")

    def find_method(self, ref: DidUrl) -> VerificationMethod | None:
        for vm in self.verification_methods:
            if vm.id == ref:
                return vm
        return None

    def authentication_methods(self) -> list[VerificationMethod]:
        return [self.find_method(ref) for ref in self.authentication]

    def agreement_method(self) -> VerificationMethod | None:
        return self.find_method(self.key_agreement[0]) if self.key_agreement else None

    def find_service(self, service_type: str) -> ServiceEndpoint | None:
        return next((s for s in self.services if s.service_type == service_type), None)

    def to_tree(self) -> dict:
        tree = {
            "@context": list(self.contexts),
            "id": str(self.id),
            "verificationMethod": [vm.to_tree() for vm in self.verification_methods],
            "authentication": [str(ref) for ref in self.authentication],
            "service": [svc.to_tree() for svc in self.services],
        }
        if self.controller is not None:
            tree["controller"] = str(self.controller)
        if self.key_agreement:
            tree["keyAgreement"] = [str(ref) for ref in self.key_agreement]
        return tree

    @classmethod
    def from_tree(cls, tree: dict) -> DidDocument:
        controller = tree.get("controller")
        return cls(
            id=Did.parse(tree["id"]),
            verification_methods=tuple(VerificationMethod.from_tree(x) for x in tree["verificationMethod"]),
            authentication=tuple(DidUrl.parse(x) for x in tree["authentication"]),
            services=tuple(ServiceEndpoint.from_tree(x) for x in tree["service"]),
            controller=Did.parse(controller) if controller is not None else None,
            key_agreement=tuple(DidUrl.parse(x) for x in tree.get("keyAgreement", ())),
            contexts=tuple(tree["@context"]),
        )


def build_did_document(
    did: Did,
    controller: Did | None,
    keys: Sequence[VerificationMethod],
    services: Sequence[ServiceEndpoint] = (),
    *,
    agreement_keys: Sequence[VerificationMethod] = (),
    authentication: Sequence[DidUrl] | None = None,
) -> DidDocument:
    """Assemble a document whose authentication defaults to the first key."""
    if not keys:
        raise EmptyKeyList(f"document for {did} needs at least one key")
    contexts = [DID_CORE_CONTEXT, ED25519_CONTEXT]
    if agreement_keys:
        contexts.append(X25519_CONTEXT)
    return DidDocument(
        id=did,
        verification_methods=tuple(keys) + tuple(agreement_keys),
        authentication=tuple(authentication) if authentication is not None else (keys[0].id,),
        services=tuple(services),
        controller=controller,
        key_agreement=tuple(vm.id for vm in agreement_keys),
        contexts=tuple(contexts),
    )


# ---------------------------------------------------------------------------
# keys
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KeyPair:
    public_key: bytes
    seed: bytes = field(repr=False)
    agreement_public: bytes | None = None
    agreement_secret: bytes | None = field(default=None, repr=False)
    key_type: KeyType = KeyType.ED25519

    def sign(self, message: bytes) -> bytes:
        return Ed25519PrivateKey.from_private_bytes(self.seed).sign(message)

    def shared_secret(self, peer_public: bytes) -> bytes:
        if self.agreement_secret is None:
            raise KeyMismatch("key pair has no agreement key")
        private = X25519PrivateKey.from_private_bytes(self.agreement_secret)
        return private.exchange(X25519PublicKey.from_public_bytes(peer_public))

    def verification_method(self, ref: DidUrl) -> VerificationMethod:
        return VerificationMethod(ref, KeyType.ED25519, self.public_key)

    def agreement_method(self, ref: DidUrl) -> VerificationMethod:
        if self.agreement_public is None:
            raise KeyMismatch("key pair has no agreement key")
        return VerificationMethod(ref, KeyType.X25519, self.agreement_public)


def generate_key_pair(seed: bytes, *, agreement: bool = True) -> KeyPair:
    """Derive a signing pair (and an X25519 agreement pair) from a 32-byte seed."""
    if not isinstance(seed, (bytes, bytearray)) or len(seed) != 32:
        raise BadSeedLength(f"seed must be exactly 32 bytes, got {len(seed) if seed is not None else None}")
    seed = bytes(seed)
    signing = Ed25519PrivateKey.from_private_bytes(seed)
    public = signing.public_key().public_bytes_raw()
    if not agreement:
        return KeyPair(public_key=public, seed=seed)
    agreement_secret = HKDF(
        algorithm=hashes.SHA256(), length=32, salt=None, info=b"iotcred/x25519-agreement"
    ).derive(seed)
    agreement_public = X25519PrivateKey.from_private_bytes(agreement_secret).public_key().public_bytes_raw()
    return KeyPair(public, seed, agreement_public, agreement_secret)


def random_key_pair() -> KeyPair:
    return generate_key_pair(os.urandom(32))


def verify_signature(public_key: bytes, message: bytes, signature: bytes) -> bool:
    try:
        Ed25519PublicKey.from_public_bytes(public_key).verify(signature, message)
    except (InvalidSignature, ValueError):
        return False
    return True


# ---------------------------------------------------------------------------
# proofs, credentials, presentations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Proof:
    verification_method: DidUrl
    created: datetime
    proof_value: bytes
    proof_type: ProofType = ProofType.ED25519

    def __post_init__(self):
        object.__setattr__(self, "created", codec.utc(self.created))
        if len(self.proof_value) != _SIGNATURE_LENGTH[self.proof_type]:
            raise MalformedDocument(f"{self.proof_type.value} proofs carry 64-byte signatures")

    def to_tree(self) -> dict:
        return {
            "type": self.proof_type.value,
            "created": self.created,
            "verificationMethod": str(self.verification_method),
            "proofValue": self.proof_value,
        }

    @classmethod
    def from_tree(cls, tree: dict) -> Proof:
        return cls(
            verification_method=DidUrl.parse(tree["verificationMethod"]),
            created=codec.as_time(tree["created"]),
            proof_value=codec.as_bytes(tree["proofValue"]),
            proof_type=ProofType(tree["type"]),
        )


def make_proof(key: KeyPair, method: DidUrl, message: bytes, at: datetime) -> Proof:
    return Proof(method, at, key.sign(message))


def sign_payload(key: KeyPair, method: DidUrl, payload, at: datetime) -> Proof:
    """Proof over the canonical text of an arbitrary tree."""
    return make_proof(key, method, codec.encode_canonical_text(payload), at)


def verify_proof(proof: Proof, message: bytes, public_key: bytes) -> bool:
    return verify_signature(public_key, message, proof.proof_value)


@dataclass(frozen=True)
class VerifiableCredential:
    id: str
    types: tuple[str, ...]
    issuer: Did
    valid_from: datetime
    credential_subject: dict
    credential_schema: str
    credential_status: str
    valid_until: datetime | None = None
    matrix: MatrixTag | None = None
    proofs: tuple[Proof, ...] = ()
    contexts: tuple[str, ...] = (VC_CONTEXT,)

    def __post_init__(self):
        object.__setattr__(self, "valid_from", codec.utc(self.valid_from))
        if self.valid_until is not None:
            object.__setattr__(self, "valid_until", codec.utc(self.valid_until))
            if self.valid_until <= self.valid_from:
                raise MalformedDocument("validUntil must be strictly after validFrom")
        if "VerifiableCredential" not in self.types:
            raise MalformedDocument("types must contain 'VerifiableCredential'")
        if not isinstance(self.credential_subject, dict):
            raise MalformedDocument("credentialSubject must be a mapping")

    @property
    def kind_tag(self) -> str | None:
        extra = [t for t in self.types if t != "VerifiableCredential"]
        return extra[0] if extra else None

    def unsigned(self) -> VerifiableCredential:
        return replace(self, proofs=())

    def with_proof(self, proof: Proof) -> VerifiableCredential:
        return replace(self, proofs=self.proofs + (proof,))

    def to_tree(self) -> dict:
        tree = {
            "@context": list(self.contexts),
            "id": self.id,
            "type": list(self.types),
            "issuer": str(self.issuer),
            "validFrom": self.valid_from,
            "credentialSubject": self.credential_subject,
            "credentialSchema": {"id": self.credential_schema, "type": "IoTCredentialSchema"},
            "credentialStatus": {"id": self.credential_status, "type": "IoTStatusRecord"},
        }
        if self.valid_until is not None:
            tree["validUntil"] = self.valid_until
        if self.matrix is not None:
            tree["iotMatrix"] = self.matrix.to_tree()
        if self.proofs:
            tree["proof"] = [p.to_tree() for p in self.proofs]
        return tree

    @classmethod
    def from_tree(cls, tree: dict) -> VerifiableCredential:
        matrix = tree.get("iotMatrix")
        until = tree.get("validUntil")
        return cls(
            id=str(tree["id"]),
            types=tuple(tree["type"]),
            issuer=Did.parse(tree["issuer"]),
            valid_from=codec.as_time(tree["validFrom"]),
            credential_subject=tree["credentialSubject"],
            credential_schema=tree["credentialSchema"]["id"],
            credential_status=tree["credentialStatus"]["id"],
            valid_until=codec.as_time(until) if until is not None else None,
            matrix=MatrixTag.from_tree(matrix) if matrix is not None else None,
            proofs=tuple(Proof.from_tree(p) for p in tree.get("proof", ())),
            contexts=tuple(tree["@context"]),
        )


def sign_credential(
    vc: VerifiableCredential,
    key: KeyPair,
    method: DidUrl,
    at: datetime,
    *,
    document: DidDocument | None = None,
) -> VerifiableCredential:
    """Append a proof over the proof-less canonical form.

    When ``document`` is given, ``method`` must resolve in it to ``key``'s
    public key.
    """
    if document is not None:
        vm = document.find_method(method)
        if vm is None or vm.public_key != key.public_key:
            raise KeyMismatch(f"{method} does not resolve to the signing key in {document.id}")
    return vc.with_proof(make_proof(key, method, codec.signing_input(vc), at))


@dataclass(frozen=True)
class VerifiablePresentation:
    id: str
    holder: Did
    credentials: tuple[VerifiableCredential, ...]
    challenge: bytes
    audience: Did
    proof: Proof | None = None
    contexts: tuple[str, ...] = (VC_CONTEXT,)

    @property
    def controller_signed(self) -> bool:
        return self.proof is not None and self.proof.verification_method.did != self.holder

    def unsigned(self) -> VerifiablePresentation:
        return replace(self, proof=None)

    def to_tree(self) -> dict:
        tree = {
            "@context": list(self.contexts),
            "id": self.id,
            "type": ["VerifiablePresentation"],
            "holder": str(self.holder),
            "verifiableCredential": [vc.to_tree() for vc in self.credentials],
            "challenge": self.challenge,
            "audience": str(self.audience),
        }
        if self.proof is not None:
            tree["proof"] = self.proof.to_tree()
        return tree

    @classmethod
    def from_tree(cls, tree: dict) -> VerifiablePresentation:
        proof = tree.get("proof")
        return cls(
            id=str(tree["id"]),
            holder=Did.parse(tree["holder"]),
            credentials=tuple(VerifiableCredential.from_tree(x) for x in tree["verifiableCredential"]),
            challenge=codec.as_bytes(tree["challenge"]),
            audience=Did.parse(tree["audience"]),
            proof=Proof.from_tree(proof) if proof is not None else None,
            contexts=tuple(tree["@context"]),
        )


def sign_presentation(
    credentials: Iterable[VerifiableCredential],
    holder: Did,
    holder_key: KeyPair,
    challenge: bytes,
    audience: Did,
    *,
    method: DidUrl,
    at: datetime,
    presentation_id: str | None = None,
) -> VerifiablePresentation:
    """Wrap credentials for ``audience`` and sign with the holder's (or its
    controller's) key.  ``method`` names the key used."""
    credentials = tuple(credentials)
    if not credentials:
        raise EmptyCredentialList("a presentation needs at least one credential")
    if not challenge:
        raise EmptyChallenge("challenge must be non-empty")
    if presentation_id is None:
        digest = hashlib.sha256(bytes(challenge) + str(holder).encode()).hexdigest()[:16]
        presentation_id = f"urn:iot:vp:{digest}"
    vp = VerifiablePresentation(presentation_id, holder, credentials, bytes(challenge), audience)
    proof = make_proof(holder_key, method, codec.signing_input(vp), at)
    return replace(vp, proof=proof)
