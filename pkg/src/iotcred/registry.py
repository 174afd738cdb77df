"""Verifiable data registry: DID documents, schemas, credential status and
batch-level credentials.

:class:`Registry` implements every operation once on top of four storage
primitives; :class:`MemoryRegistry` and :class:`FileRegistry` only provide
those primitives, which keeps the two observationally equivalent.  Every
value passes through canonical text on its way into storage, so both stores
hand back identical trees.

Mutations are serialized by a re-entrant lock (and, for the file store, an
inter-process file lock).  Every mutating call must carry a proof from a key
controlling the affected DID.
"""

from __future__ import annotations

import base64
import functools
import hashlib
import os
import tempfile
import threading
from contextlib import contextmanager
from dataclasses import dataclass, replace
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Any, Iterator

from filelock import FileLock

from . import codec
from .errors import (
    AlreadyRegistered,
    AlreadyRevoked,
    IssuerMismatch,
    KindNotBatchable,
    MalformedDid,
    MalformedDocument,
    NotFound,
    UnauthorizedRevoker,
    UnauthorizedUpdate,
)
from .matrix import CredentialKind
from .model import Did, DidDocument, DidUrl, Proof, VerifiableCredential, verify_proof

AREAS = ("dids", "schemas", "status", "batch")
BATCHABLE = frozenset({CredentialKind.COMMUNICATION, CredentialKind.CAPABILITY})


class StatusState(Enum):
    ACTIVE = "Active"
    REVOKED = "Revoked"


@dataclass(frozen=True)
class StatusRecord:
    """Per-credential status.  Besides the state it keeps the facts a
    verifier or issuer needs without holding the credential itself."""

    credential_id: str
    state: StatusState = StatusState.ACTIVE
    revoked_at: datetime | None = None
    reason: str | None = None
    issuer: Did | None = None
    subject: Did | None = None
    kind_tag: str | None = None
    valid_until: datetime | None = None

    def __post_init__(self):
        if (self.state is StatusState.REVOKED) != (self.revoked_at is not None):
            raise MalformedDocument("revokedAt must be present exactly when the state is Revoked")

    def to_tree(self) -> dict:
        tree: dict[str, Any] = {"credentialId": self.credential_id, "state": self.state.value}
        for key, value in (
            ("revokedAt", self.revoked_at),
            ("reason", self.reason),
            ("issuer", str(self.issuer) if self.issuer else None),
            ("subject", str(self.subject) if self.subject else None),
            ("kind", self.kind_tag),
            ("validUntil", self.valid_until),
        ):
            if value is not None:
                tree[key] = value
        return tree

    @classmethod
    def from_tree(cls, tree: dict) -> StatusRecord:
        def opt(key, convert):
            return convert(tree[key]) if tree.get(key) is not None else None

        return cls(
            credential_id=tree["credentialId"],
            state=StatusState(tree["state"]),
            revoked_at=opt("revokedAt", codec.as_time),
            reason=tree.get("reason"),
            issuer=opt("issuer", Did.parse),
            subject=opt("subject", Did.parse),
            kind_tag=tree.get("kind"),
            valid_until=opt("validUntil", codec.as_time),
        )


@dataclass(frozen=True)
class BatchKey:
    manufacturer: Did
    model_no: str
    batch_no: str | None = None

    def __post_init__(self):
        if not self.model_no:
            raise MalformedDocument("modelNo must be non-empty")

    def storage_key(self) -> str:
        return "|".join((str(self.manufacturer), self.model_no, self.batch_no or ""))

    def model_level(self) -> BatchKey:
        return replace(self, batch_no=None)


def revocation_message(credential_id: str, at: datetime, reason: str | None = None) -> bytes:
    """Bytes an issuer signs to revoke ``credential_id``."""
    payload = {"credentialId": credential_id, "state": StatusState.REVOKED.value, "at": at}
    if reason is not None:
        payload["reason"] = reason
    return codec.encode_canonical_text(payload)


def schema_message(uri: str, definition: dict) -> bytes:
    return codec.encode_canonical_text({"id": uri, "definition": definition})


def _credential_subject(vc: VerifiableCredential) -> Did | None:
    body = vc.credential_subject
    try:
        return Did.parse(body.get("id", body.get("deviceId")))
    except MalformedDid:
        return None


@functools.lru_cache(maxsize=256)
def _parse_document(data: bytes) -> DidDocument:
    # Documents are immutable values, so a stored byte string always parses
    # to the same document; caching keeps repeated resolution cheap.
    return DidDocument.from_tree(codec.decode_canonical_text(data))


class Registry:
    """Operations shared by every store; subclasses supply storage."""

    def __init__(self) -> None:
        self._lock = threading.RLock()

    # -- storage primitives -------------------------------------------------

    def _read(self, area: str, key: str) -> bytes | None:
        raise NotImplementedError

    def _write(self, area: str, key: str, data: bytes) -> None:
        raise NotImplementedError

    def _keys(self, area: str) -> list[str]:
        raise NotImplementedError

    def _append_log(self, line: bytes) -> None:
        raise NotImplementedError

    def _log_lines(self) -> list[bytes]:
        raise NotImplementedError

    @contextmanager
    def _mutation(self) -> Iterator[None]:
        with self._lock:
            yield

    def close(self) -> None:
        """Release resources; the in-memory store has none."""

    # -- helpers ------------------------------------------------------------

    def _get(self, area: str, key: str) -> Any:
        data = self._read(area, key)
        return None if data is None else codec.decode_canonical_text(data)

    def _put(self, area: str, key: str, tree: Any, op: str) -> None:
        data = codec.encode_canonical_text(tree)
        self._write(area, key, data)
        record = {"op": op, "area": area, "key": key, "sha256": hashlib.sha256(data).hexdigest()}
        self._append_log(codec.encode_canonical_text(record))

    # -- DID documents ------------------------------------------------------

    def resolve(self, did: Did) -> DidDocument:
        data = self._read("dids", str(did))
        if data is None:
            raise NotFound(f"no DID document registered for {did}")
        return _parse_document(data)

    def try_resolve(self, did: Did) -> DidDocument | None:
        try:
            return self.resolve(did)
        except NotFound:
            return None

    def authorized_keys(self, did: Did, document: DidDocument | None = None) -> dict[DidUrl, bytes]:
        """Keys allowed to act for ``did``: its own authentication keys plus
        those of its registered controller."""
        document = document if document is not None else self.try_resolve(did)
        keys: dict[DidUrl, bytes] = {}
        if document is None:
            return keys
        for vm in document.authentication_methods():
            keys[vm.id] = vm.public_key
        if document.controller is not None and document.controller != document.id:
            controller = self.try_resolve(document.controller)
            if controller is not None:
                for vm in controller.authentication_methods():
                    keys[vm.id] = vm.public_key
        return keys

    def proof_authorized(self, did: Did, proof: Proof, message: bytes, document: DidDocument | None = None) -> bool:
        key = self.authorized_keys(did, document).get(proof.verification_method)
        return key is not None and verify_proof(proof, message, key)

    def register_did_document(self, doc: DidDocument, signer_proof: Proof) -> None:
        """Store ``doc``.  A first registration must be signed by a key of
        the new document (or its controller); an update by a key of the
        currently registered document (or its controller)."""
        if not isinstance(doc, DidDocument):
            raise MalformedDocument("expected a DID document")
        message = codec.encode_canonical_text(doc)
        with self._mutation():
            current = self.try_resolve(doc.id)
            basis = doc if current is None else current
            if not self.proof_authorized(doc.id, signer_proof, message, basis):
                raise UnauthorizedUpdate(f"{signer_proof.verification_method} may not write {doc.id}")
            self._put("dids", str(doc.id), doc.to_tree(), "register" if current is None else "update")

    def list_dids(self) -> list[Did]:
        return sorted(Did.parse(k) for k in self._keys("dids"))

    # -- schemas ------------------------------------------------------------

    def register_schema(self, uri: str, definition: dict, publisher_proof: Proof) -> None:
        publisher = publisher_proof.verification_method.did
        with self._mutation():
            if not self.proof_authorized(publisher, publisher_proof, schema_message(uri, definition)):
                raise UnauthorizedUpdate(f"{publisher_proof.verification_method} may not publish schemas")
            self._put("schemas", uri, {"id": uri, "publisher": str(publisher), "definition": definition}, "schema")

    def schema(self, uri: str) -> dict:
        tree = self._get("schemas", uri)
        if tree is None:
            raise NotFound(f"no schema registered under {uri}")
        return tree["definition"]

    # -- status -------------------------------------------------------------

    def _issuer_signed(self, vc: VerifiableCredential) -> bool:
        message = codec.signing_input(vc)
        return any(self.proof_authorized(vc.issuer, p, message) for p in vc.proofs)

    def register_status(self, vc: VerifiableCredential) -> StatusRecord:
        """Create the Active status record for a freshly issued credential."""
        with self._mutation():
            if not self._issuer_signed(vc):
                raise UnauthorizedUpdate(f"{vc.id} carries no proof from its issuer {vc.issuer}")
            if self._read("status", vc.credential_status) is not None:
                raise AlreadyRegistered(f"status for {vc.credential_status} already exists")
            record = StatusRecord(
                credential_id=vc.id,
                issuer=vc.issuer,
                subject=_credential_subject(vc),
                kind_tag=vc.kind_tag,
                valid_until=vc.valid_until,
            )
            self._put("status", vc.credential_status, record.to_tree(), "status")
            return record

    def check_status(self, credential_id: str) -> StatusRecord:
        tree = self._get("status", credential_id)
        if tree is None:
            raise NotFound(f"no status record for {credential_id}")
        return StatusRecord.from_tree(tree)

    def set_status(
        self,
        credential_id: str,
        issuer_proof: Proof,
        at: datetime,
        reason: str | None = None,
    ) -> StatusRecord:
        """Revoke a credential.  ``issuer_proof`` must sign
        :func:`revocation_message` under a key controlling the issuer DID."""
        at = codec.utc(at)
        with self._mutation():
            record = self.check_status(credential_id)
            message = revocation_message(credential_id, at, reason)
            if record.issuer is None or not self.proof_authorized(record.issuer, issuer_proof, message):
                raise UnauthorizedRevoker(f"{issuer_proof.verification_method} may not revoke {credential_id}")
            if record.state is StatusState.REVOKED:
                raise AlreadyRevoked(f"{credential_id} was revoked at {codec.format_time(record.revoked_at)}")
            updated = replace(record, state=StatusState.REVOKED, revoked_at=at, reason=reason)
            self._put("status", credential_id, updated.to_tree(), "revoke")
            return updated

    def statuses(self) -> list[StatusRecord]:
        return [self.check_status(k) for k in sorted(self._keys("status"))]

    # -- batch credentials --------------------------------------------------

    def publish_batch_credential(self, key: BatchKey, vc: VerifiableCredential) -> None:
        try:
            kind = CredentialKind.from_tag(vc.kind_tag)
        except ValueError:
            kind = None
        if kind not in BATCHABLE:
            raise KindNotBatchable(f"{vc.kind_tag} credentials describe a single device")
        if vc.issuer != key.manufacturer:
            raise IssuerMismatch(f"{vc.id} is issued by {vc.issuer}, not {key.manufacturer}")
        with self._mutation():
            if self._read("status", vc.credential_status) is None:
                self.register_status(vc)
            elif not self._issuer_signed(vc):
                raise UnauthorizedUpdate(f"{vc.id} carries no proof from its issuer {vc.issuer}")
            self._put("batch", key.storage_key(), vc.to_tree(), "batch")

    def lookup_batch_credential(self, key: BatchKey) -> VerifiableCredential:
        """Batch-level entry first, then the model-level entry."""
        for candidate in (key, key.model_level()):
            tree = self._get("batch", candidate.storage_key())
            if tree is not None:
                return VerifiableCredential.from_tree(tree)
        raise NotFound(f"no batch or model credential for {key.storage_key()}")

    # -- observation --------------------------------------------------------

    def snapshot(self) -> dict:
        """Every stored value plus the operations log, for equivalence checks."""
        state = {area: {k: self._read(area, k) for k in sorted(self._keys(area))} for area in AREAS}
        state["log"] = list(self._log_lines())
        return state


class MemoryRegistry(Registry):
    def __init__(self) -> None:
        super().__init__()
        self._areas: dict[str, dict[str, bytes]] = {area: {} for area in AREAS}
        self._log: list[bytes] = []

    def _read(self, area, key):
        return self._areas[area].get(key)

    def _write(self, area, key, data):
        self._areas[area][key] = data

    def _keys(self, area):
        return list(self._areas[area])

    def _append_log(self, line):
        self._log.append(line)

    def _log_lines(self):
        return list(self._log)


def _file_name(key: str) -> str:
    digest = hashlib.sha256(key.encode("utf-8")).digest()
    return base64.urlsafe_b64encode(digest).decode("ascii").rstrip("=") + ".json"


class FileRegistry(Registry):
    """Directory-backed store: ``dids/``, ``schemas/``, ``status/``,
    ``batch/`` hold one canonical-text file per key, named by a URL-safe hash
    of the key; ``log.ndjson`` is the append-only operations log."""

    def __init__(self, root: str | os.PathLike) -> None:
        super().__init__()
        self.root = Path(root)
        for area in AREAS:
            (self.root / area).mkdir(parents=True, exist_ok=True)
        self._log_path = self.root / "log.ndjson"
        self._log_path.touch(exist_ok=True)
        self._file_lock = FileLock(str(self.root / ".lock"))

    @contextmanager
    def _mutation(self):
        with self._lock, self._file_lock:
            yield

    def _read(self, area, key):
        path = self.root / area / _file_name(key)
        if not path.exists():
            return None
        return codec.encode_canonical_text(codec.decode_canonical_text(path.read_bytes())["value"])

    def _write(self, area, key, data):
        record = codec.encode_canonical_text({"key": key, "value": codec.decode_canonical_text(data)})
        directory = self.root / area
        fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
        with os.fdopen(fd, "wb") as handle:
            handle.write(record)
        os.replace(tmp, directory / _file_name(key))

    def _keys(self, area):
        return [codec.decode_canonical_text(p.read_bytes())["key"] for p in (self.root / area).glob("*.json")]

    def _append_log(self, line):
        with open(self._log_path, "ab") as handle:
            handle.write(line + b"\n")

    def _log_lines(self):
        return [line for line in self._log_path.read_bytes().split(b"\n") if line]

    def close(self) -> None:
        if self._file_lock.is_locked:
            self._file_lock.release(force=True)

    def reopen(self) -> FileRegistry:
        self.close()
        return FileRegistry(self.root)
