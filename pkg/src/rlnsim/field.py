"""Prime-field arithmetic and domain-separated hashing to the field.

All protocol values live in the scalar field of BN254, a 254-bit prime
field commonly used by zkSNARK tooling.  Field elements are plain Python
ints in ``[0, P)``; the helpers here keep arithmetic and serialization
canonical.
"""

from __future__ import annotations

import hashlib
import random

# Order of the BN254 scalar field.
P = 0x30644E72E131A029B85045B68181585D2833E84879B9709143E1F593F0000001

FE_BYTES = 32

# Domain-separation tags for every use of the hash function.
DOMAIN_COMMITMENT = 0x01  # identity commitments and tree nodes
DOMAIN_MSG = 0x02  # message hashes and bundle ids
DOMAIN_COEFF = 0x03  # per-epoch share-line coefficient
DOMAIN_NULLIFIER = 0x04  # internal nullifiers
DOMAIN_SLASH_COMMIT = 0x05  # commit-reveal slash commitments

_DOMAINS = (
    DOMAIN_COMMITMENT,
    DOMAIN_MSG,
    DOMAIN_COEFF,
    DOMAIN_NULLIFIER,
    DOMAIN_SLASH_COMMIT,
)


def add(a: int, b: int) -> int:
    return (a + b) % P


def sub(a: int, b: int) -> int:
    return (a - b) % P


def mul(a: int, b: int) -> int:
    return (a * b) % P


def inv(a: int) -> int:
    """Multiplicative inverse; undefined for zero."""
    if a % P == 0:
        raise ZeroDivisionError("0 has no multiplicative inverse in the field")
    return pow(a, P - 2, P)


def fe_to_bytes(a: int) -> bytes:
    """Canonical 32-byte big-endian encoding; requires 0 <= a < P."""
    if not 0 <= a < P:
        raise ValueError(f"value out of field range: {a}")
    return a.to_bytes(FE_BYTES, "big")


def fe_from_bytes(data: bytes) -> int:
    if len(data) != FE_BYTES:
        raise ValueError(f"field element must be {FE_BYTES} bytes, got {len(data)}")
    value = int.from_bytes(data, "big")
    if value >= P:
        raise ValueError("non-canonical field element (value >= P)")
    return value


def hash_to_field(domain: int, inputs: list[int | bytes] | tuple[int | bytes, ...]) -> int:
    """Hash an ordered list of field elements / byte strings into the field.

    The digest stream is: the one-byte domain tag, then each input in
    order.  Field elements contribute their canonical 32-byte form; byte
    strings are prefixed with their 8-byte big-endian length so that
    adjacent inputs can never be re-split.
    """
    if domain not in _DOMAINS:
        raise ValueError(f"unknown domain tag: {domain:#x}")
    h = hashlib.sha256()
    h.update(bytes([domain]))
    for item in inputs:
        if isinstance(item, bool):
            raise TypeError("bool is not a valid hash input")
        if isinstance(item, int):
            h.update(fe_to_bytes(item))
        elif isinstance(item, (bytes, bytearray)):
            h.update(len(item).to_bytes(8, "big"))
            h.update(bytes(item))
        else:
            raise TypeError(f"unsupported hash input type: {type(item).__name__}")
    return int.from_bytes(h.digest(), "big") % P


def rand_fe(rng: random.Random) -> int:
    """Uniform field element via rejection sampling."""
    while True:
        v = rng.getrandbits(P.bit_length())
        if v < P:
            return v
