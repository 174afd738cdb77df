"""Self-sovereign identity toolkit for IoT devices.

Modules:

* :mod:`iotcred.model` — DIDs, DID documents, keys, credentials, presentations
* :mod:`iotcred.codec` — canonical text and deterministic binary encodings
* :mod:`iotcred.matrix` / :mod:`iotcred.policy` — the credential design matrix
  and its admissibility tables
* :mod:`iotcred.schemas` — subject schemas for the seven credential kinds
* :mod:`iotcred.registry` — verifiable data registry (memory and file stores)
* :mod:`iotcred.lifecycle` — issuance, verification, revocation, transfer
* :mod:`iotcred.agents` — secure envelopes, links and delegation scenarios
* :mod:`iotcred.cli` — the ``iotcred`` command
"""

from __future__ import annotations

__version__ = "0.1.0"
