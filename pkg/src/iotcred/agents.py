"""Holder and verifier agents over simulated constrained links.

* :func:`seal` / :func:`open_envelope` — authenticated encrypted messages
  between two DIDs: X25519 key agreement, HKDF-SHA256, ChaCha20-Poly1305, and
  an outer Ed25519 signature over everything except the signature bytes.
* :func:`transmit` — closed-form fragmentation on a link with an MTU and a
  fixed per-fragment header.
* :func:`run_scenario` — scripted exchanges under three delegation
  strategies with per-participant traffic counters.
* :class:`EdgeCache` / :func:`cache_sync` — status caching at an edge gateway
  with age tracking.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field, replace
from datetime import datetime, timedelta
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.ciphers.aead import ChaCha20Poly1305
from cryptography.hazmat.primitives.kdf.hkdf import HKDF

from . import codec
from .errors import (
    AuthenticationFailure,
    BadSignature,
    DecodeError,
    MalformedInput,
    NoAgreementKey,
    NotFound,
    UnknownScript,
)
from .lifecycle import (
    Verdict,
    VerificationReport,
    countersign,
    transfer_ownership,
    verify_credential,
    verify_presentation,
    TransferRequest,
)
from .model import Did, DidDocument, DidUrl, KeyPair, Proof, ProofType, VerifiablePresentation, sign_presentation
from .registry import Registry, StatusRecord, StatusState
from .world import (
    DELEGATE_FRAGMENT,
    OWNER_WALLET_SERVICE,
    World,
    build_world,
    party_document,
    sign_document,
)

NONCE_BYTES = 12
_HKDF_INFO = b"iotcred/envelope/v1"


# ---------------------------------------------------------------------------
# secure envelope
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SecureEnvelope:
    sender: Did
    recipient: Did
    nonce: bytes
    ciphertext: bytes
    proof: Proof

    def signed_tree(self) -> dict:
        """Everything the sender's signature covers: all fields except the
        signature bytes themselves."""
        return {
            "from": str(self.sender),
            "to": str(self.recipient),
            "nonce": self.nonce,
            "ct": self.ciphertext,
            "proof": {
                "type": self.proof.proof_type.value,
                "created": self.proof.created,
                "verificationMethod": str(self.proof.verification_method),
            },
        }

    def to_tree(self) -> dict:
        return {
            "from": str(self.sender),
            "to": str(self.recipient),
            "nonce": self.nonce,
            "ct": self.ciphertext,
            "proof": self.proof.to_tree(),
        }

    @classmethod
    def from_tree(cls, tree: dict) -> SecureEnvelope:
        if set(tree) != {"from", "to", "nonce", "ct", "proof"}:
            raise DecodeError("envelope fields do not match")
        return cls(
            Did.parse(tree["from"]),
            Did.parse(tree["to"]),
            codec.as_bytes(tree["nonce"]),
            codec.as_bytes(tree["ct"]),
            Proof.from_tree(tree["proof"]),
        )

    def to_bytes(self) -> bytes:
        return codec.encode_deterministic_binary(self)

    @classmethod
    def from_bytes(cls, data: bytes) -> SecureEnvelope:
        return codec.decode_deterministic_binary(data, cls)


def _signing_message(sender: Did, recipient: Did, nonce: bytes, ciphertext: bytes, method: DidUrl, at) -> bytes:
    return codec.encode_canonical_text(
        {
            "from": str(sender),
            "to": str(recipient),
            "nonce": nonce,
            "ct": ciphertext,
            "proof": {"type": ProofType.ED25519.value, "created": codec.utc(at), "verificationMethod": str(method)},
        }
    )


def _content_key(shared: bytes, nonce: bytes, sender: Did, recipient: Did) -> bytes:
    info = _HKDF_INFO + b"|" + str(sender).encode() + b"|" + str(recipient).encode()
    return HKDF(algorithm=hashes.SHA256(), length=32, salt=nonce, info=info).derive(shared)


def _aad(sender: Did, recipient: Did) -> bytes:
    return codec.encode_canonical_text({"from": str(sender), "to": str(recipient)})


def seal(
    sender: Did,
    sender_key: KeyPair,
    sender_method: DidUrl,
    recipient_doc: DidDocument,
    payload: bytes,
    nonce: bytes,
    at: datetime,
) -> SecureEnvelope:
    """Encrypt ``payload`` to the recipient's agreement key, then sign."""
    agreement = recipient_doc.agreement_method()
    if agreement is None:
        raise NoAgreementKey(f"{recipient_doc.id} publishes no key agreement method")
    if len(nonce) != NONCE_BYTES:
        raise MalformedInput(f"nonce must be {NONCE_BYTES} bytes")
    recipient = recipient_doc.id
    key = _content_key(sender_key.shared_secret(agreement.public_key), nonce, sender, recipient)
    ciphertext = ChaCha20Poly1305(key).encrypt(nonce, payload, _aad(sender, recipient))
    message = _signing_message(sender, recipient, nonce, ciphertext, sender_method, at)
    proof = Proof(sender_method, at, sender_key.sign(message))
    return SecureEnvelope(sender, recipient, bytes(nonce), ciphertext, proof)


def open_envelope(
    recipient: Did,
    recipient_key: KeyPair,
    envelope: SecureEnvelope | bytes,
    registry: Registry,
) -> bytes:
    """Verify the sender's signature, then decrypt.

    Raises :class:`BadSignature` when the signature (which binds the
    recipient DID) fails, :class:`AuthenticationFailure` when decryption
    fails, and :class:`DecodeError` for malformed bytes.
    """
    if isinstance(envelope, (bytes, bytearray)):
        envelope = SecureEnvelope.from_bytes(bytes(envelope))
    message = codec.encode_canonical_text(envelope.signed_tree())
    if not registry.proof_authorized(envelope.sender, envelope.proof, message):
        raise BadSignature(f"envelope signature does not verify for {envelope.sender}")
    if envelope.recipient != recipient:
        raise AuthenticationFailure(f"envelope is addressed to {envelope.recipient}, not {recipient}")
    try:
        sender_doc = registry.resolve(envelope.sender)
    except NotFound as exc:
        raise BadSignature(str(exc)) from exc
    agreement = sender_doc.agreement_method()
    if agreement is None:
        raise NoAgreementKey(f"{envelope.sender} publishes no key agreement method")
    key = _content_key(recipient_key.shared_secret(agreement.public_key), envelope.nonce, envelope.sender, recipient)
    try:
        return ChaCha20Poly1305(key).decrypt(envelope.nonce, envelope.ciphertext, _aad(envelope.sender, recipient))
    except (InvalidTag, ValueError) as exc:
        raise AuthenticationFailure("ciphertext failed authentication") from exc


# ---------------------------------------------------------------------------
# links
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LinkProfile:
    name: str
    mtu: int
    overhead: int

    def __post_init__(self):
        if self.mtu <= 0 or self.overhead < 0 or self.mtu <= self.overhead:
            raise MalformedInput(f"link {self.name}: need mtu > overhead >= 0, got {self.mtu}/{self.overhead}")

    @property
    def capacity(self) -> int:
        """Payload bytes per fragment."""
        return self.mtu - self.overhead


#: Defaults.  The MQTT-like and CoAP-like header sizes model those protocols'
#: fixed overheads; every MTU (and the BLE/LoRa headers) is a configurable
#: engineering choice.
DEFAULT_LINKS: dict[str, LinkProfile] = {
    p.name: p
    for p in (
        LinkProfile("mqtt-like", 256, 2),
        LinkProfile("coap-like", 256, 4),
        LinkProfile("ble-like", 244, 3),
        LinkProfile("lora-like", 51, 13),
    )
}


def load_link_profiles(path: str | Path) -> dict[str, LinkProfile]:
    """Read ``[{"name": ..., "mtu": ..., "overhead": ...}, ...]`` from JSON."""
    entries = json.loads(Path(path).read_text())
    return {e["name"]: LinkProfile(str(e["name"]), int(e["mtu"]), int(e["overhead"])) for e in entries}


@dataclass(frozen=True)
class Transmission:
    payload_bytes: int
    fragments: int
    total_bytes: int


def transmit(link: LinkProfile, payload: bytes | int) -> Transmission:
    """Fragment a payload: ``ceil(L / (mtu - overhead))`` fragments, each
    carrying ``overhead`` header bytes."""
    length = payload if isinstance(payload, int) else len(payload)
    fragments = -(-length // link.capacity)
    return Transmission(length, fragments, length + fragments * link.overhead)


# ---------------------------------------------------------------------------
# scenarios
# ---------------------------------------------------------------------------


class DelegationStrategy(Enum):
    AUTONOMOUS = "Autonomous"
    EDGE_PROXY = "EdgeProxy"
    OWNER_WALLET = "OwnerWallet"


class Script(Enum):
    PRESENT_IDENTITY = "PresentIdentity"
    ONBOARD_DEVICE = "OnboardDevice"
    TRANSFER_OWNERSHIP = "TransferOwnership"


def parse_script(name: str) -> Script:
    for script in Script:
        if name in (script.value, script.name) or name.lower() == script.value.lower():
            return script
    raise UnknownScript(f"unknown script {name!r}; expected one of {', '.join(s.value for s in Script)}")


@dataclass
class Counters:
    messages: int = 0
    bytes: int = 0
    fragments: int = 0
    payload_bytes: int = 0


@dataclass
class ScenarioMetrics:
    strategy: DelegationStrategy
    script: Script
    participants: dict[str, Counters]
    report: VerificationReport
    transcript: list[str] = field(default_factory=list)

    @property
    def verdict(self) -> Verdict:
        return self.report.verdict

    def sent(self, participant: str) -> Counters:
        return self.participants.get(participant, Counters())

    def rows(self) -> list[dict]:
        return [
            {
                "strategy": self.strategy.value,
                "participant": name,
                "messages": c.messages,
                "bytes": c.bytes,
                "fragments": c.fragments,
                "verdict": self.verdict.value,
            }
            for name, c in sorted(self.participants.items())
        ]


METRIC_COLUMNS = ("strategy", "participant", "messages", "bytes", "fragments", "verdict")


def write_metrics(path: str | Path, metrics: Iterable[ScenarioMetrics]) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=METRIC_COLUMNS)
        writer.writeheader()
        for m in metrics:
            writer.writerows(m.rows())


class Network:
    """Deterministic in-process delivery.  Messages between parties travel
    as sealed envelopes; registry reads are public and travel in the clear."""

    REGISTRY = "registry"

    def __init__(self, world: World, links: LinkProfile | Mapping[str, LinkProfile], at: datetime):
        self.world = world
        self.links = links
        self.at = at
        self.counters: dict[str, Counters] = {}
        self.transcript: list[str] = []
        self._sequence = 0

    def link(self, a: str, b: str) -> LinkProfile:
        """The profile for hop ``a``-``b``; a mapping is keyed by the two
        names sorted and joined with ``-`` and may hold a ``default``."""
        if isinstance(self.links, LinkProfile):
            return self.links
        hop = "-".join(sorted((a, b)))
        return self.links.get(hop) or self.links.get("default") or DEFAULT_LINKS["coap-like"]

    def _count(self, sender: str, recipient: str, wire: bytes, label: str) -> None:
        sent = transmit(self.link(sender, recipient), wire)
        c = self.counters.setdefault(sender, Counters())
        c.messages += 1
        c.bytes += sent.total_bytes
        c.fragments += sent.fragments
        c.payload_bytes += len(wire)
        self.transcript.append(f"{sender} -> {recipient}: {label} ({sent.total_bytes} B, {sent.fragments} frag)")

    def send(self, sender: str, recipient: str, payload: bytes, label: str) -> bytes:
        """Seal, count and deliver ``payload``; returns what the recipient reads."""
        self._sequence += 1
        w = self.world
        nonce = hashlib.sha256(f"{self._sequence}|{sender}|{recipient}".encode()).digest()[:NONCE_BYTES]
        envelope = seal(
            w.dids[sender], w.keys[sender], w.method(sender), w.document(recipient), payload, nonce, self.at
        )
        wire = envelope.to_bytes()
        self._count(sender, recipient, wire, label)
        return open_envelope(w.dids[recipient], w.keys[recipient], wire, w.registry)

    def query_status(self, sender: str, credential_id: str) -> StatusRecord:
        """A status lookup by ``sender``: request and response are counted."""
        self._count(sender, self.REGISTRY, codec.encode_deterministic_binary({"statusOf": credential_id}), "status query")
        record = self.world.registry.check_status(credential_id)
        self._count(self.REGISTRY, sender, codec.encode_deterministic_binary(record), "status")
        return record


# ---------------------------------------------------------------------------
# edge cache
# ---------------------------------------------------------------------------


@dataclass
class CacheEntry:
    record: StatusRecord
    synced_at: datetime
    changed: bool = False


@dataclass(frozen=True)
class CachedVerdict:
    verdict: Verdict
    state: StatusState
    age: timedelta
    stale: bool


@dataclass
class EdgeCache:
    """Status records held at an edge gateway.  A verdict is flagged stale
    once the entry is older than ``max_age``."""

    entries: dict[str, CacheEntry] = field(default_factory=dict)
    last_sync: datetime | None = None
    max_age: timedelta = timedelta(0)

    def track(self, credential_id: str, registry: Registry, at: datetime) -> None:
        self.entries[credential_id] = CacheEntry(registry.check_status(credential_id), codec.utc(at))

    def verdict(self, credential_id: str, at: datetime) -> CachedVerdict:
        entry = self.entries.get(credential_id)
        if entry is None:
            raise NotFound(f"{credential_id} is not cached")
        age = codec.utc(at) - entry.synced_at
        state = entry.record.state
        verdict = Verdict.ACCEPT if state is StatusState.ACTIVE else Verdict.REJECT
        return CachedVerdict(verdict, state, age, age > self.max_age)


def cache_sync(cache: EdgeCache, registry: Registry, at: datetime) -> EdgeCache:
    """Refresh every cached record; entries whose state moved are marked."""
    if not cache.entries:
        return cache
    at = codec.utc(at)
    for credential_id, entry in cache.entries.items():
        fresh = registry.check_status(credential_id)
        cache.entries[credential_id] = CacheEntry(fresh, at, fresh.state is not entry.record.state)
    cache.last_sync = at
    return cache


# ---------------------------------------------------------------------------
# scripted exchanges
# ---------------------------------------------------------------------------

#: Who acts for the device under each strategy.
DEVICE_AGENT = {
    DelegationStrategy.AUTONOMOUS: "device",
    DelegationStrategy.EDGE_PROXY: "edge",
    DelegationStrategy.OWNER_WALLET: "owner",
}


def _challenge(world: World, verifier: str, label: str) -> bytes:
    return hashlib.sha256(f"{label}|{verifier}|{codec.format_time(world.clock)}".encode()).digest()[:16]


def _request(challenge: bytes, audience: Did) -> bytes:
    return codec.encode_deterministic_binary({"challenge": challenge, "audience": str(audience)})


def _read_request(data: bytes) -> tuple[bytes, Did]:
    tree = codec.decode_deterministic_binary(data)
    return codec.as_bytes(tree["challenge"]), Did.parse(tree["audience"])


class _Run:
    def __init__(self, strategy: DelegationStrategy, net: Network, cache: EdgeCache):
        self.strategy = strategy
        self.net = net
        self.world = net.world
        self.cache = cache

    @property
    def agent(self) -> str:
        return DEVICE_AGENT[self.strategy]

    def check_own_status(self, credentials) -> None:
        """The device-side agent confirms its credentials are still Active."""
        for vc in credentials:
            if self.strategy is DelegationStrategy.EDGE_PROXY:
                state = self.cache.verdict(vc.credential_status, self.world.clock).state
            else:
                state = self.net.query_status(self.agent, vc.credential_status).state
            if state is not StatusState.ACTIVE:
                raise AuthenticationFailure(f"{vc.id} is {state.value}; refusing to present")

    def present(self, subject: str, credentials, verifier: str, label: str) -> VerificationReport:
        """Challenge/response presentation of ``subject``'s credentials.

        For the device: Autonomous signs with the device key, EdgeProxy with
        the delegated key the owner placed in the device document (after a
        one-byte consent from the device), OwnerWallet with the owner's key
        as controller; the verifier finds the wallet through the device
        document's service entry.
        """
        w, net = self.world, self.net
        challenge = _challenge(w, verifier, label)
        audience = w.dids[verifier]
        holder = w.dids[subject]
        if subject != "device":
            presenter, key, method = subject, w.keys[subject], w.method(subject)
        elif self.strategy is DelegationStrategy.AUTONOMOUS:
            presenter, key, method = "device", w.keys["device"], w.method("device")
        elif self.strategy is DelegationStrategy.EDGE_PROXY:
            presenter, key, method = "edge", w.keys["edge"], holder.url(DELEGATE_FRAGMENT)
        else:
            wallet = w.document("device").find_service(OWNER_WALLET_SERVICE)
            if wallet is None:
                raise NotFound("device document lists no owner wallet")
            presenter = next(n for n, d in w.dids.items() if str(d) == wallet.endpoint)
            key, method = w.keys[presenter], w.method(presenter)

        request = net.send(verifier, presenter, _request(challenge, audience), f"{label} challenge")
        if subject == "device":
            if self.strategy is DelegationStrategy.EDGE_PROXY:
                net.send("edge", "device", request, "consent request")
                net.send("device", "edge", b"\x01", "consent")
            self.check_own_status(credentials)
        got_challenge, got_audience = _read_request(request)
        vp = sign_presentation(credentials, holder, key, got_challenge, got_audience, method=method, at=w.clock)
        received = net.send(presenter, verifier, codec.encode_deterministic_binary(vp), f"{label} presentation")
        vp = codec.decode_deterministic_binary(received, VerifiablePresentation)
        if verifier == "device":
            for vc in vp.credentials:
                net.query_status("device", vc.credential_status)
        return verify_presentation(vp, challenge, audience, w.clock, w.registry)

    # -- scripts ------------------------------------------------------------

    def present_identity(self) -> VerificationReport:
        return self.present("device", [self.world.corpus["static_identity"]], "verifier", "identity")

    def onboard_device(self) -> VerificationReport:
        """Mutual authentication: each side presents the onboarding credential
        to the other, and both must accept."""
        onboarding = self.world.corpus["onboarding"]
        device_side = self.present("device", [onboarding], "provider", "onboardee")
        provider_side = self.present("provider", [onboarding], self.agent, "onboarder")
        return VerificationReport(device_side.checks + provider_side.checks)

    def transfer_ownership(self) -> VerificationReport:
        """Seller and buyer countersign, the manufacturer executes, the new
        credential is delivered to the device-side agent, and the seller hands
        control of the device document to the buyer."""
        w, net = self.world, self.net
        current = w.corpus["ownership"]
        request = TransferRequest(current.id, w.dids["owner"], w.dids["buyer"], w.dids["device"], w.clock)
        request = countersign(request, current, "seller", w.keys["owner"], w.method("owner"))
        net.send("owner", "buyer", codec.encode_deterministic_binary(request), "transfer request")
        request = countersign(request, current, "buyer", w.keys["buyer"], w.method("buyer"))
        received = net.send("buyer", "manufacturer", codec.encode_deterministic_binary(request), "countersigned")
        request = codec.decode_deterministic_binary(received, TransferRequest)
        new = transfer_ownership(request, w.context("manufacturer"), w.registry)
        recipient = "buyer" if self.strategy is DelegationStrategy.OWNER_WALLET else self.agent
        net.send("manufacturer", recipient, codec.encode_deterministic_binary(new), "ownership credential")
        if recipient != "buyer":
            net.send(recipient, "manufacturer", b"\x01", "receipt")

        device = w.document("device")
        services = tuple(
            replace(s, endpoint=str(w.dids["buyer"])) if s.service_type == OWNER_WALLET_SERVICE else s
            for s in device.services
        )
        delegates = {DELEGATE_FRAGMENT: w.keys["edge"]}
        updated = party_document(
            "device", w.dids["device"], w.keys["device"], controller=w.dids["buyer"], services=services,
            delegates=delegates,
        )
        w.registry.register_did_document(updated, sign_document(updated, w.keys["owner"], w.dids["owner"], w.clock))
        report = verify_credential(new, w.clock, w.registry)
        handed_over = w.document("device").controller == w.dids["buyer"]
        report.add("controllerUpdate", handed_over, f"device controller is {w.document('device').controller}")
        return report


def run_scenario(
    strategy: DelegationStrategy | str,
    script: Script | str,
    links: LinkProfile | Mapping[str, LinkProfile] | None = None,
    clock: datetime | None = None,
    *,
    world: World | None = None,
    cache: EdgeCache | None = None,
) -> ScenarioMetrics:
    """Run ``script`` under ``strategy`` in a fresh fixture world (unless one
    is supplied) and return per-participant traffic and the final report."""
    if isinstance(strategy, str):
        strategy = next((s for s in DelegationStrategy if strategy in (s.value, s.name)), None) or _bad_strategy(
            strategy
        )
    script = parse_script(script) if isinstance(script, str) else script
    if world is None:
        world = build_world() if clock is None else build_world(clock=clock)
    links = links if links is not None else DEFAULT_LINKS["coap-like"]
    net = Network(world, links, world.clock)
    if cache is None:
        cache = EdgeCache()
        for vc in world.corpus.values():
            cache.track(vc.credential_status, world.registry, world.clock)
    run = _Run(strategy, net, cache)
    report = {
        Script.PRESENT_IDENTITY: run.present_identity,
        Script.ONBOARD_DEVICE: run.onboard_device,
        Script.TRANSFER_OWNERSHIP: run.transfer_ownership,
    }[script]()
    return ScenarioMetrics(strategy, script, dict(net.counters), report, net.transcript)


def _bad_strategy(name: str):
    raise MalformedInput(f"unknown strategy {name!r}; expected one of {', '.join(s.value for s in DelegationStrategy)}")
