"""A ready-made deployment: parties, DID documents, schemas and the fixture
credentials, registered in a registry.

The device's document names its owner as controller, lists the owner's
wallet as a service, and (after an update signed by the owner) carries a
delegated signing key held by the edge gateway.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime

from . import codec
from .lifecycle import IssuerContext
from .matrix import CredentialKind, IssuerKind
from .model import (
    Did,
    DidDocument,
    KeyPair,
    ServiceEndpoint,
    VerifiableCredential,
    build_did_document,
    make_proof,
)
from .registry import MemoryRegistry, Registry, schema_message
from .schemas import FIXTURE_CLOCK, FIXTURE_DIDS, build_fixture_corpus, fixture_keys, fixture_names, schema_definition

SIGNING_FRAGMENT = "key-1"
AGREEMENT_FRAGMENT = "key-agreement-1"
DELEGATE_FRAGMENT = "delegate-edge"
OWNER_WALLET_SERVICE = "IoTOwnerWallet"
EDGE_PROXY_SERVICE = "IoTEdgeProxy"

#: Parties whose documents are controlled by another party.
CONTROLLERS = {"device": "owner"}

ISSUER_KINDS = {"manufacturer": IssuerKind.MANUFACTURER, "provider": IssuerKind.SERVICE_PROVIDER,
                "regulator": IssuerKind.REGULATOR, "owner": IssuerKind.OWNER, "buyer": IssuerKind.OWNER}


def party_document(
    name: str,
    did: Did,
    key: KeyPair,
    *,
    controller: Did | None = None,
    services=(),
    delegates: dict[str, KeyPair] | None = None,
) -> DidDocument:
    methods = [key.verification_method(did.url(SIGNING_FRAGMENT))]
    for fragment, delegate in (delegates or {}).items():
        methods.append(delegate.verification_method(did.url(fragment)))
    return build_did_document(
        did,
        controller,
        methods,
        services,
        agreement_keys=[key.agreement_method(did.url(AGREEMENT_FRAGMENT))],
        authentication=[m.id for m in methods],
    )


def sign_document(doc: DidDocument, key: KeyPair, signer: Did, at: datetime):
    """Proof over a document's canonical text by ``signer``'s signing key."""
    return make_proof(key, signer.url(SIGNING_FRAGMENT), codec.encode_canonical_text(doc), at)


@dataclass
class World:
    registry: Registry
    keys: dict[str, KeyPair]
    dids: dict[str, Did]
    corpus: dict[str, VerifiableCredential]
    clock: datetime
    contexts: dict[str, IssuerContext] = field(default_factory=dict)

    def context(self, party: str) -> IssuerContext:
        if party not in self.contexts:
            did = self.dids[party]
            self.contexts[party] = IssuerContext(
                ISSUER_KINDS.get(party, IssuerKind.OWNER), did, self.keys[party], did.url(SIGNING_FRAGMENT)
            )
        return self.contexts[party]

    def method(self, party: str):
        return self.dids[party].url(SIGNING_FRAGMENT)

    def document(self, party: str) -> DidDocument:
        return self.registry.resolve(self.dids[party])


def build_world(registry: Registry | None = None, *, clock: datetime = FIXTURE_CLOCK) -> World:
    """Register every fixture party, the seven schemas and the fixture
    corpus; all writes are dated ``clock``."""
    registry = registry if registry is not None else MemoryRegistry()
    keys = fixture_keys()
    dids = dict(FIXTURE_DIDS)

    for name, did in dids.items():
        controller = dids[CONTROLLERS[name]] if name in CONTROLLERS else None
        services = ()
        if name == "device":
            services = (
                ServiceEndpoint(did.url("wallet"), OWNER_WALLET_SERVICE, str(dids["owner"])),
                ServiceEndpoint(did.url("edge"), EDGE_PROXY_SERVICE, str(dids["edge"])),
            )
        doc = party_document(name, did, keys[name], controller=controller, services=services)
        registry.register_did_document(doc, sign_document(doc, keys[name], did, clock))

    # The owner, as controller, authorizes the edge gateway to sign for the device.
    device = registry.resolve(dids["device"])
    delegated = party_document(
        "device",
        dids["device"],
        keys["device"],
        controller=device.controller,
        services=device.services,
        delegates={DELEGATE_FRAGMENT: keys["edge"]},
    )
    registry.register_did_document(delegated, sign_document(delegated, keys["owner"], dids["owner"], clock))

    for kind in CredentialKind:
        definition = schema_definition(kind)
        proof = make_proof(keys["manufacturer"], dids["manufacturer"].url(SIGNING_FRAGMENT),
                           schema_message(kind.schema_uri, definition), clock)
        registry.register_schema(kind.schema_uri, definition, proof)

    corpus_list = build_fixture_corpus(keys)
    world = World(registry, keys, dids, dict(zip(fixture_names(), corpus_list)), clock)
    for vc in corpus_list:
        registry.register_status(vc)
        party = next(name for name, did in dids.items() if did == vc.issuer)
        world.context(party).remember(vc)
    return world
