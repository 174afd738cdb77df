"""Exception hierarchy.

Every error carries an ``exit_code`` so the command line can map failures to
stable process exit statuses without a lookup table.
"""

from __future__ import annotations


class IotCredError(Exception):
    """Base class for all library errors."""

    exit_code = 1


# -- malformed input (exit 5) ------------------------------------------------


class MalformedInput(IotCredError):
    exit_code = 5


class MalformedDid(MalformedInput):
    pass


class BadSeedLength(MalformedInput):
    pass


class MalformedDocument(MalformedInput):
    pass


class DuplicateFragment(MalformedDocument):
    pass


class EmptyKeyList(MalformedDocument):
    pass


class EmptyChallenge(MalformedInput):
    pass


class EmptyCredentialList(MalformedInput):
    pass


class DecodeError(MalformedInput):
    """Raised when canonical text or binary input cannot be decoded."""


class KeyMismatch(MalformedInput):
    """The signing key does not match the verification method it claims."""


class SubjectInvalid(MalformedInput):
    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = list(violations)


class WindowValidityMismatch(MalformedInput):
    pass


class UnknownScript(MalformedInput):
    pass


class KindNotBatchable(MalformedInput):
    pass


# -- not found (exit 4) ------------------------------------------------------


class NotFound(IotCredError):
    exit_code = 4


class NoExistingIdentity(NotFound):
    pass


# -- policy (exit 2) ---------------------------------------------------------


class PolicyViolation(IotCredError):
    exit_code = 2

    def __init__(self, violations: list):
        super().__init__("; ".join(v.message for v in violations))
        self.violations = list(violations)


class DuplicateActiveCredential(PolicyViolation):
    """A second Active credential of a single-instance kind was requested."""

    def __init__(self, message: str):
        IotCredError.__init__(self, message)
        self.violations = []


# -- authorization / verification (exit 3) -----------------------------------


class Rejected(IotCredError):
    exit_code = 3


class UnauthorizedUpdate(Rejected):
    pass


class UnauthorizedRevoker(Rejected):
    pass


class AlreadyRevoked(Rejected):
    pass


class IssuerMismatch(Rejected):
    pass


class FirmwareUnchanged(Rejected):
    pass


class NotCurrentOwner(Rejected):
    pass


class BadSellerProof(Rejected):
    pass


class BadBuyerProof(Rejected):
    pass


class OwnershipRevoked(Rejected):
    pass


class NoAgreementKey(Rejected):
    pass


class AuthenticationFailure(Rejected):
    """Envelope failed authentication (decryption or signature)."""


class BadSignature(AuthenticationFailure):
    """Envelope signature does not verify under the sender's registered keys."""


class AlreadyRegistered(Rejected):
    """A status record for this credential already exists."""
