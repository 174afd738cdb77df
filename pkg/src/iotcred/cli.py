"""Command-line interface over a file-backed registry.

Exit codes: 0 success, 2 policy violation, 3 verification reject,
4 not found, 5 malformed input.  The registry directory comes from
``--registry`` or the ``IOTCRED_REGISTRY`` environment variable; credentials
the CLI issues or receives are kept under ``<registry>/wallet``.
"""

from __future__ import annotations

import argparse
import hashlib
import os
import secrets
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

from . import codec
from .agents import DEFAULT_LINKS, DelegationStrategy, Script, load_link_profiles, run_scenario, write_metrics
from .errors import DecodeError, IotCredError, MalformedInput, NotFound, PolicyViolation
from .lifecycle import (
    IssuerContext,
    LifecycleState,
    TransferRequest,
    countersign,
    issue,
    revoke,
    state_of,
    transfer_ownership,
    verify_credential,
    verify_presentation,
)
from .matrix import CredentialKind, IssuerKind, MatrixPoint, Scope, TrustLevel, Validity, parse_enum
from .model import (
    Did,
    DidDocument,
    DidUrl,
    KeyPair,
    ServiceEndpoint,
    VerifiableCredential,
    VerifiablePresentation,
    generate_key_pair,
    make_proof,
    sign_presentation,
)
from .policy import enumerate_admissible, explain, export_table
from .registry import FileRegistry
from .schemas import build_fixture_corpus, fixture_names
from .world import SIGNING_FRAGMENT, build_world, party_document, sign_document

ENV_REGISTRY = "IOTCRED_REGISTRY"
DEFAULT_REGISTRY = "iotcred-registry"


class Cli:
    """Per-invocation state: parsed arguments, clock, output stream."""

    def __init__(self, args: argparse.Namespace, out):
        self.args = args
        self.out = out
        self.root = Path(args.registry or os.environ.get(ENV_REGISTRY) or DEFAULT_REGISTRY)
        self.clock = codec.parse_time(args.clock) if args.clock else datetime.now(timezone.utc).replace(microsecond=0)
        self._registry: FileRegistry | None = None

    @property
    def registry(self) -> FileRegistry:
        if self._registry is None:
            self._registry = FileRegistry(self.root)
        return self._registry

    def close(self) -> None:
        if self._registry is not None:
            self._registry.close()

    # -- output -------------------------------------------------------------

    def emit(self, line: str = "") -> None:
        print(line, file=self.out)

    def emit_tree(self, value) -> None:
        self.emit(codec.encode_canonical_text(value).decode("utf-8"))

    def emit_report(self, report) -> None:
        if self.args.format == "canonical-text":
            self.emit_tree(report.to_tree())
        else:
            for line in report.lines():
                self.emit(line)

    # -- wallet -------------------------------------------------------------

    @property
    def wallet(self) -> Path:
        path = self.root / "wallet"
        path.mkdir(parents=True, exist_ok=True)
        return path

    def store(self, vc: VerifiableCredential) -> Path:
        name = hashlib.sha256(vc.id.encode()).hexdigest()[:24] + ".json"
        path = self.wallet / name
        path.write_bytes(codec.encode_canonical_text(vc))
        return path

    def wallet_credentials(self) -> list[VerifiableCredential]:
        return [
            codec.decode_canonical_text(p.read_bytes(), VerifiableCredential) for p in sorted(self.wallet.glob("*.json"))
        ]

    def credential(self, ref: str) -> VerifiableCredential:
        """A credential by file path or by id from the wallet."""
        path = Path(ref)
        if path.is_file():
            return codec.decode_canonical_text(path.read_bytes(), VerifiableCredential)
        for vc in self.wallet_credentials():
            if vc.id == ref:
                return vc
        raise NotFound(f"no credential {ref} in {self.wallet}")

    def issuer_context(self, did: Did, key: KeyPair, method: DidUrl, kind: IssuerKind) -> IssuerContext:
        ctx = IssuerContext(kind, did, key, method)
        for vc in self.wallet_credentials():
            if vc.issuer == did:
                ctx.remember(vc)
        return ctx


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def _read_tree(path: str):
    try:
        return codec.decode_canonical_text(Path(path).read_bytes())
    except OSError as exc:
        raise MalformedInput(f"cannot read {path}: {exc.strerror}") from exc


def _load_key(path: str) -> KeyPair:
    tree = _read_tree(path)
    try:
        return generate_key_pair(bytes.fromhex(tree["seed"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedInput(f"{path} is not a key file") from exc


def _method(did: Did, explicit: str | None) -> DidUrl:
    return DidUrl.parse(explicit) if explicit else did.url(SIGNING_FRAGMENT)


def _enum(enum_cls, text: str):
    try:
        return parse_enum(enum_cls, text)
    except ValueError as exc:
        raise MalformedInput(str(exc)) from exc


def _hex(text: str) -> bytes:
    try:
        return bytes.fromhex(text)
    except ValueError as exc:
        raise MalformedInput(f"{text!r} is not hex") from exc


def _write_or_emit(cli: Cli, value, out: str | None) -> None:
    if out:
        Path(out).write_bytes(codec.encode_canonical_text(value))
        cli.emit(f"wrote {out}")
    else:
        cli.emit_tree(value)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_keygen(cli: Cli) -> int:
    seed = _hex(cli.args.seed) if cli.args.seed else secrets.token_bytes(32)
    key = generate_key_pair(seed)
    tree = {
        "seed": seed.hex(),
        "publicKeyBase58": codec.b58encode(key.public_key),
        "agreementKeyBase58": codec.b58encode(key.agreement_public),
    }
    _write_or_emit(cli, tree, cli.args.out)
    return 0


def cmd_did_create(cli: Cli) -> int:
    a = cli.args
    did = Did.parse(a.did)
    key = _load_key(a.key)
    services = []
    for entry in a.service or ():
        service_type, _, endpoint = entry.partition("=")
        if not endpoint:
            raise MalformedInput(f"--service expects TYPE=ENDPOINT, got {entry!r}")
        services.append(ServiceEndpoint(did.url(f"service-{len(services) + 1}"), service_type, endpoint))
    controller = Did.parse(a.controller) if a.controller else None
    doc = party_document(str(did), did, key, controller=controller, services=services)
    cli.registry.register_did_document(doc, sign_document(doc, key, did, cli.clock))
    cli.emit_tree(doc)
    return 0


def cmd_did_resolve(cli: Cli) -> int:
    cli.emit_tree(cli.registry.resolve(Did.parse(cli.args.did)))
    return 0


def cmd_did_update(cli: Cli) -> int:
    a = cli.args
    doc = codec.decode_canonical_text(Path(a.document).read_bytes(), DidDocument)
    signer = Did.parse(a.signer)
    key = _load_key(a.key)
    proof = make_proof(key, _method(signer, a.method), codec.encode_canonical_text(doc), cli.clock)
    cli.registry.register_did_document(doc, proof)
    cli.emit_tree(doc)
    return 0


def cmd_vc_issue(cli: Cli) -> int:
    a = cli.args
    kind = _enum(CredentialKind, a.kind)
    issuer_kind = _enum(IssuerKind, a.issuer_kind)
    point = MatrixPoint(_enum(TrustLevel, a.trust), _enum(Scope, a.scope), _enum(Validity, a.validity))
    issuer = Did.parse(a.issuer)
    ctx = IssuerContext(issuer_kind, issuer, _load_key(a.key), _method(issuer, a.method))
    subject = _read_tree(a.subject)
    valid_from = codec.parse_time(a.valid_from) if a.valid_from else cli.clock
    valid_until = codec.parse_time(a.valid_until) if a.valid_until else None
    vc = issue(ctx, kind, subject, point, (valid_from, valid_until), cli.clock, cli.registry, credential_id=a.id)
    cli.store(vc)
    cli.emit_tree(vc)
    return 0


def cmd_vc_verify(cli: Cli) -> int:
    report = verify_credential(cli.credential(cli.args.credential), cli.clock, cli.registry)
    cli.emit_report(report)
    return 0 if report.accepted else 3


def cmd_vc_status(cli: Cli) -> int:
    record = cli.registry.check_status(cli.args.credential)
    state = state_of(cli.args.credential, cli.clock, cli.registry)
    cli.emit(f"state: {state.value}")
    cli.emit_tree(record.to_tree())
    return 0 if state is LifecycleState.ACTIVE else 3


def cmd_vc_revoke(cli: Cli) -> int:
    a = cli.args
    issuer = Did.parse(a.issuer)
    ctx = IssuerContext(IssuerKind.MANUFACTURER, issuer, _load_key(a.key), _method(issuer, a.method))
    record = revoke(ctx, a.credential, cli.clock, cli.registry, a.reason)
    cli.emit_tree(record.to_tree())
    return 0


def cmd_vc_transfer_init(cli: Cli) -> int:
    a = cli.args
    current = cli.credential(a.current)
    at = codec.parse_time(a.at) if a.at else cli.clock
    request = TransferRequest(current.id, Did.parse(a.seller), Did.parse(a.buyer), Did.parse(a.device), at)
    _write_or_emit(cli, request, a.out)
    return 0


def cmd_vc_transfer_sign(cli: Cli) -> int:
    a = cli.args
    request = codec.decode_canonical_text(Path(a.request).read_bytes(), TransferRequest)
    current = cli.credential(request.current_vc_id)
    signer = request.seller if a.role == "seller" else request.buyer
    request = countersign(request, current, a.role, _load_key(a.key), _method(signer, a.method))
    _write_or_emit(cli, request, a.out or a.request)
    return 0


def cmd_vc_transfer(cli: Cli) -> int:
    a = cli.args
    request = codec.decode_canonical_text(Path(a.request).read_bytes(), TransferRequest)
    issuer = Did.parse(a.issuer)
    current = cli.credential(request.current_vc_id)
    ctx = cli.issuer_context(issuer, _load_key(a.key), _method(issuer, a.method), current.matrix.issuer_kind)
    new = transfer_ownership(request, ctx, cli.registry)
    cli.store(new)
    cli.emit_tree(new)
    return 0


def cmd_vp_create(cli: Cli) -> int:
    a = cli.args
    holder = Did.parse(a.holder)
    credentials = [cli.credential(ref) for ref in a.credential]
    vp = sign_presentation(
        credentials,
        holder,
        _load_key(a.key),
        _hex(a.challenge),
        Did.parse(a.audience),
        method=_method(holder, a.method),
        at=cli.clock,
    )
    _write_or_emit(cli, vp, a.out)
    return 0


def cmd_vp_verify(cli: Cli) -> int:
    a = cli.args
    vp = codec.decode_canonical_text(Path(a.presentation).read_bytes(), VerifiablePresentation)
    report = verify_presentation(vp, _hex(a.challenge), Did.parse(a.audience), cli.clock, cli.registry)
    cli.emit_report(report)
    return 0 if report.accepted else 3


def cmd_policy_explain(cli: Cli) -> int:
    for line in explain(_enum(CredentialKind, cli.args.kind)):
        cli.emit(line)
    return 0


def cmd_policy_enumerate(cli: Cli) -> int:
    kind = _enum(CredentialKind, cli.args.kind)
    cells = enumerate_admissible(kind, cli.args.trusted_hardware)
    for issuer, point in cells:
        cli.emit(f"{issuer.value}\t{point.trust.value}\t{point.scope.value}\t{point.validity.value}")
    cli.emit(f"{len(cells)} admissible of 560")
    return 0


def cmd_policy_export(cli: Cli) -> int:
    _write_or_emit(cli, export_table(), cli.args.out)
    return 0


def cmd_size_report(cli: Cli) -> int:
    a = cli.args
    named: list[tuple[str, object]] = []
    if a.corpus:
        named.extend(zip(fixture_names(), build_fixture_corpus()))
    for ref in a.files or ():
        named.append((Path(ref).stem, _read_tree(ref)))
    if not named:
        raise MalformedInput("nothing to measure: pass --corpus or files")
    if a.out:
        reports = codec.write_corpus(named, Path(a.out))
    else:
        reports = [codec.size_report(value) for _, value in named]
    cli.emit(f"{'name':<20} {'text_bytes':>10} {'binary_bytes':>12} {'ratio':>7}")
    for (name, _), r in zip(named, reports):
        cli.emit(f"{name:<20} {r.text_bytes:>10} {r.binary_bytes:>12} {float(r.ratio):>7.4f}")
    return 0


def cmd_scenario_run(cli: Cli) -> int:
    a = cli.args
    profiles = load_link_profiles(a.links_config) if a.links_config else dict(DEFAULT_LINKS)
    if a.link not in profiles:
        raise MalformedInput(f"unknown link profile {a.link!r}; known: {', '.join(sorted(profiles))}")
    strategies = list(DelegationStrategy) if a.strategy == "all" else [_enum(DelegationStrategy, a.strategy)]
    results = [run_scenario(s, a.script, profiles[a.link], cli.clock if a.clock else None) for s in strategies]
    cli.emit("strategy     participant  messages  bytes  fragments  verdict")
    for metrics in results:
        for row in metrics.rows():
            cli.emit(
                f"{row['strategy']:<12} {row['participant']:<12} {row['messages']:>8} {row['bytes']:>6}"
                f" {row['fragments']:>10}  {row['verdict']}"
            )
    if a.metrics_out:
        write_metrics(a.metrics_out, results)
    return 0 if all(m.report.accepted for m in results) else 3


def cmd_world_init(cli: Cli) -> int:
    """Populate the registry with the fixture deployment and write the
    parties' key files to ``<registry>/keys``."""
    world = build_world(cli.registry, clock=cli.clock)
    keys = cli.root / "keys"
    keys.mkdir(exist_ok=True)
    for name, key in world.keys.items():
        (keys / f"{name}.json").write_bytes(codec.encode_canonical_text({"seed": key.seed.hex()}))
    for vc in world.corpus.values():
        cli.store(vc)
    for name, did in world.dids.items():
        cli.emit(f"{name:<13} {did}")
    cli.emit(f"{len(world.corpus)} credentials in {cli.wallet}")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with the malformed-input status rather than 2,
    which is reserved for policy violations."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(5, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="iotcred", description="IoT self-sovereign identity toolkit")
    parser.add_argument("--registry", help=f"registry directory (env {ENV_REGISTRY}, default ./{DEFAULT_REGISTRY})")
    parser.add_argument("--clock", help="fixed current time, RFC 3339 UTC (e.g. 2023-08-01T10:11:12Z)")
    parser.add_argument("--format", choices=("table", "canonical-text"), default="table")
    groups = parser.add_subparsers(dest="group", required=True)

    p = groups.add_parser("keygen", help="derive key material from a 32-byte seed")
    p.add_argument("--seed", help="64 hex characters; random when omitted")
    p.add_argument("--out")
    p.set_defaults(func=cmd_keygen)

    did = groups.add_parser("did", help="DID document operations").add_subparsers(dest="action", required=True)
    p = did.add_parser("create")
    p.add_argument("--did", required=True)
    p.add_argument("--key", required=True, help="key file from keygen")
    p.add_argument("--controller")
    p.add_argument("--service", action="append", help="TYPE=ENDPOINT, repeatable")
    p.set_defaults(func=cmd_did_create)
    p = did.add_parser("resolve")
    p.add_argument("did")
    p.set_defaults(func=cmd_did_resolve)
    p = did.add_parser("update")
    p.add_argument("--document", required=True)
    p.add_argument("--signer", required=True, help="DID whose key signs the update")
    p.add_argument("--key", required=True)
    p.add_argument("--method")
    p.set_defaults(func=cmd_did_update)

    vc = groups.add_parser("vc", help="credential operations").add_subparsers(dest="action", required=True)
    p = vc.add_parser("issue")
    p.add_argument("--kind", required=True)
    p.add_argument("--issuer-kind", required=True)
    p.add_argument("--trust", required=True)
    p.add_argument("--scope", required=True)
    p.add_argument("--validity", required=True)
    p.add_argument("--subject", required=True, help="canonical-text subject file")
    p.add_argument("--issuer", required=True)
    p.add_argument("--key", required=True)
    p.add_argument("--method")
    p.add_argument("--valid-from")
    p.add_argument("--valid-until")
    p.add_argument("--id")
    p.set_defaults(func=cmd_vc_issue)
    for name, func in (("verify", cmd_vc_verify), ("status", cmd_vc_status)):
        p = vc.add_parser(name)
        p.add_argument("credential", help="credential id or file")
        p.set_defaults(func=func)
    p = vc.add_parser("revoke")
    p.add_argument("credential")
    p.add_argument("--issuer", required=True)
    p.add_argument("--key", required=True)
    p.add_argument("--method")
    p.add_argument("--reason")
    p.set_defaults(func=cmd_vc_revoke)
    p = vc.add_parser("transfer-init", help="seller drafts a transfer request")
    p.add_argument("--current", required=True)
    p.add_argument("--seller", required=True)
    p.add_argument("--buyer", required=True)
    p.add_argument("--device", required=True)
    p.add_argument("--at")
    p.add_argument("--out")
    p.set_defaults(func=cmd_vc_transfer_init)
    p = vc.add_parser("transfer-sign", help="seller or buyer countersigns a request")
    p.add_argument("--request", required=True)
    p.add_argument("--role", choices=("seller", "buyer"), required=True)
    p.add_argument("--key", required=True)
    p.add_argument("--method")
    p.add_argument("--out")
    p.set_defaults(func=cmd_vc_transfer_sign)
    p = vc.add_parser("transfer", help="manufacturer executes a countersigned request")
    p.add_argument("--request", required=True)
    p.add_argument("--issuer", required=True)
    p.add_argument("--key", required=True)
    p.add_argument("--method")
    p.set_defaults(func=cmd_vc_transfer)

    vp = groups.add_parser("vp", help="presentation operations").add_subparsers(dest="action", required=True)
    p = vp.add_parser("create")
    p.add_argument("--holder", required=True)
    p.add_argument("--key", required=True)
    p.add_argument("--method")
    p.add_argument("--challenge", required=True, help="hex")
    p.add_argument("--audience", required=True)
    p.add_argument("--credential", action="append", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_vp_create)
    p = vp.add_parser("verify")
    p.add_argument("presentation")
    p.add_argument("--challenge", required=True)
    p.add_argument("--audience", required=True)
    p.set_defaults(func=cmd_vp_verify)

    pol = groups.add_parser("policy", help="design matrix policy").add_subparsers(dest="action", required=True)
    p = pol.add_parser("explain")
    p.add_argument("--kind", required=True)
    p.set_defaults(func=cmd_policy_explain)
    p = pol.add_parser("enumerate")
    p.add_argument("--kind", required=True)
    p.add_argument("--trusted-hardware", action="store_true")
    p.set_defaults(func=cmd_policy_enumerate)
    p = pol.add_parser("export")
    p.add_argument("--out")
    p.set_defaults(func=cmd_policy_export)

    size = groups.add_parser("size", help="encoding size comparison").add_subparsers(dest="action", required=True)
    p = size.add_parser("report")
    p.add_argument("--corpus", action="store_true", help="measure the fixture corpus")
    p.add_argument("--out", help="also write both encodings and sizes.csv here")
    p.add_argument("files", nargs="*", help="canonical-text files to measure")
    p.set_defaults(func=cmd_size_report)

    sc = groups.add_parser("scenario", help="delegation scenarios").add_subparsers(dest="action", required=True)
    p = sc.add_parser("run")
    p.add_argument("--strategy", default="all", help="Autonomous, EdgeProxy, OwnerWallet or all")
    p.add_argument("--script", default=Script.PRESENT_IDENTITY.value)
    p.add_argument("--link", default="coap-like")
    p.add_argument("--links-config", help="JSON list of {name, mtu, overhead}")
    p.add_argument("--metrics-out", help="CSV metrics table")
    p.set_defaults(func=cmd_scenario_run)

    world = groups.add_parser("world", help="fixture deployment").add_subparsers(dest="action", required=True)
    p = world.add_parser("init")
    p.set_defaults(func=cmd_world_init)
    return parser


def main(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cli = Cli(args, out)
    except DecodeError as exc:
        print(f"error: MalformedInput: {exc}", file=err)
        return 5
    try:
        return args.func(cli)
    except PolicyViolation as exc:
        for violation in exc.violations:
            print(getattr(violation, "message", violation), file=out)
        print(f"error: {type(exc).__name__}: {exc}", file=err)
        return exc.exit_code
    except IotCredError as exc:
        for violation in getattr(exc, "violations", ()) or ():
            print(violation, file=out)
        print(f"error: {type(exc).__name__}: {exc}", file=err)
        return exc.exit_code
    finally:
        cli.close()


if __name__ == "__main__":
    sys.exit(main())
