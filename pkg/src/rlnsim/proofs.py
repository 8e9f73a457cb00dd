"""Pluggable proof contract with a constraint-checking mock backend.

The mock backend stands in for a real zkSNARK: the prover re-checks the
three circuit constraints (membership, share validity, nullifier
derivation) against its private witness and, only if they hold, emits a
MAC over the canonical public inputs under a simulation-global key.  The
verifier recomputes the MAC, so altering any public input after proving
breaks verification.  This is neither zero-knowledge nor sound against a
prover holding the key; the simulator controls all honest provers and
models adversaries through the forge backend instead.
"""

from __future__ import annotations

import hashlib
import hmac
import os
import random
from dataclasses import dataclass

from .core import share_coefficient
from .field import (
    DOMAIN_COMMITMENT,
    DOMAIN_NULLIFIER,
    add,
    fe_to_bytes,
    hash_to_field,
    mul,
)
from .merkle import AuthPath, verify_path

MOCK_BACKEND = 0x01

CONSTRAINT_MEMBERSHIP = "membership"
CONSTRAINT_SHARE = "share"
CONSTRAINT_NULLIFIER = "nullifier"


class ConstraintViolatedError(Exception):
    def __init__(self, constraint: str):
        super().__init__(f"witness violates the {constraint} constraint")
        self.constraint = constraint


@dataclass(frozen=True)
class PublicInputs:
    """Exactly the verifier-visible values; x doubles as the message hash."""

    x: int
    epoch: int
    nullifier: int
    y: int
    root: int

    def to_bytes(self) -> bytes:
        return (
            fe_to_bytes(self.x)
            + self.epoch.to_bytes(8, "big")
            + fe_to_bytes(self.nullifier)
            + fe_to_bytes(self.y)
            + fe_to_bytes(self.root)
        )


@dataclass(frozen=True)
class PrivateInputs:
    """The witness; never serialized into bundles or logs."""

    sk: int
    leaf_index: int
    auth_path: AuthPath


@dataclass(frozen=True)
class Proof:
    backend: int
    payload: bytes


class ProofSystem:
    """Prover/verifier pair sharing one simulation-global binding key."""

    def __init__(self, key: bytes):
        self.key = key

    @classmethod
    def from_seed(cls, seed: int) -> "ProofSystem":
        digest = hashlib.sha256(b"proof-backend-key" + seed.to_bytes(8, "big")).digest()
        return cls(digest)

    def _tag(self, pub: PublicInputs) -> bytes:
        return hmac.new(self.key, pub.to_bytes(), hashlib.sha256).digest()

    def prove(self, priv: PrivateInputs, pub: PublicInputs) -> Proof:
        """Emit a binding proof after locally checking all three constraints."""
        pk = hash_to_field(DOMAIN_COMMITMENT, [priv.sk])
        if priv.auth_path.index != priv.leaf_index or not verify_path(
            pub.root, pk, priv.auth_path
        ):
            raise ConstraintViolatedError(CONSTRAINT_MEMBERSHIP)
        a1 = share_coefficient(priv.sk, pub.epoch)
        if pub.y != add(priv.sk, mul(a1, pub.x)):
            raise ConstraintViolatedError(CONSTRAINT_SHARE)
        if pub.nullifier != hash_to_field(DOMAIN_NULLIFIER, [a1]):
            raise ConstraintViolatedError(CONSTRAINT_NULLIFIER)
        return Proof(backend=MOCK_BACKEND, payload=self._tag(pub))

    def verify(self, pub: PublicInputs, proof: Proof) -> bool:
        if proof.backend != MOCK_BACKEND:
            return False
        try:
            expected = self._tag(pub)
        except (ValueError, OverflowError):
            return False  # unencodable public inputs can never have been proven
        return hmac.compare_digest(proof.payload, expected)


def forge(pub: PublicInputs, rng: random.Random | None = None) -> Proof:
    """Adversarial backend: claims to be the mock backend with a junk payload."""
    payload = rng.randbytes(32) if rng is not None else os.urandom(32)
    return Proof(backend=MOCK_BACKEND, payload=payload)
