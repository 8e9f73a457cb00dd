"""Identity keys, Shamir share derivation, nullifiers, and epoch arithmetic.

A member's secret key ``sk`` defines, for each epoch, the degree-1 line

    y = sk + a1 * x        with  a1 = H(sk, epoch)

Publishing a message reveals one point ``(x, y)`` on that line with
``x = H(m)``.  Two distinct points from the same epoch reconstruct the
line and hence ``sk`` (its value at ``x = 0``); a single point reveals
nothing.  The internal nullifier ``H(a1)`` links the two points without
identifying the member.
"""

from __future__ import annotations

import math
import random
import secrets
from dataclasses import dataclass
from fractions import Fraction

from .field import (
    DOMAIN_COEFF,
    DOMAIN_COMMITMENT,
    DOMAIN_MSG,
    DOMAIN_NULLIFIER,
    P,
    add,
    hash_to_field,
    inv,
    mul,
    rand_fe,
    sub,
)

EPOCH_BYTES = 8


class DuplicateShareError(Exception):
    """Both shares have the same x: a duplicate message, not a rate violation."""


@dataclass(frozen=True)
class Identity:
    sk: int
    pk: int

    @classmethod
    def from_sk(cls, sk: int) -> "Identity":
        return cls(sk=sk, pk=hash_to_field(DOMAIN_COMMITMENT, [sk]))


@dataclass(frozen=True)
class Share:
    """One point on a member's per-epoch secret line."""

    x: int
    y: int


@dataclass(frozen=True)
class EpochConfig:
    """Epoch length plus the delay bounds that determine the gap threshold."""

    T: int
    network_delay: float = 0.0
    clock_asynchrony: float = 0.0

    def __post_init__(self) -> None:
        if self.T < 1:
            raise ValueError("epoch length T must be >= 1 second")
        if self.network_delay < 0 or self.clock_asynchrony < 0:
            raise ValueError("delays must be non-negative")

    @property
    def thr(self) -> int:
        return compute_thr(self.network_delay, self.clock_asynchrony, self.T)


def keygen(rng: random.Random | None = None) -> Identity:
    """Draw a uniform secret key and its commitment.

    Pass a seeded ``random.Random`` for reproducible identities in tests;
    the default draws from the OS entropy pool.
    """
    if rng is None:
        rng = secrets.SystemRandom()
    return Identity.from_sk(rand_fe(rng))


def message_hash(m: bytes) -> int:
    return hash_to_field(DOMAIN_MSG, [m])


def share_coefficient(sk: int, epoch: int) -> int:
    """Slope a1 = H(sk, epoch) of the member's line for this epoch."""
    return hash_to_field(DOMAIN_COEFF, [sk, epoch])


def compute_share(sk: int, epoch: int, m: bytes) -> Share:
    x = message_hash(m)
    a1 = share_coefficient(sk, epoch)
    return Share(x=x, y=add(sk, mul(a1, x)))


def compute_internal_nullifier(sk: int, epoch: int) -> int:
    """Double hash H(H(sk, epoch)); collides for two messages in one epoch."""
    return hash_to_field(DOMAIN_NULLIFIER, [share_coefficient(sk, epoch)])


def recover_secret(s1: Share, s2: Share) -> int:
    """Intercept of the unique line through two distinct-x shares.

    Raises DuplicateShareError when the x coordinates coincide, which
    signals a resent message rather than a rate violation.
    """
    if s1.x == s2.x:
        raise DuplicateShareError("shares have identical x coordinate")
    slope = mul(sub(s2.y, s1.y), inv(sub(s2.x, s1.x)))
    return sub(s1.y, mul(slope, s1.x))


def current_epoch(unix_time: float, T: int) -> int:
    """Epoch index floor(unix_time / T).

    The quotient is floored: the reference arithmetic example
    1644810116 / 30 -> 54827003 only holds under floor.
    """
    if T < 1:
        raise ValueError("epoch length T must be >= 1 second")
    if isinstance(unix_time, int):
        return unix_time // T
    return math.floor(unix_time / T)


def compute_thr(network_delay: float, clock_asynchrony: float, T: int) -> int:
    """Maximum epoch gap ceil((network_delay + clock_asynchrony) / T)."""
    if T < 1:
        raise ValueError("epoch length T must be >= 1 second")
    if network_delay < 0 or clock_asynchrony < 0:
        raise ValueError("delays must be non-negative")
    # Fraction keeps the ceiling exact even for float-valued delays.
    total = Fraction(network_delay) + Fraction(clock_asynchrony)
    return math.ceil(total / T)


def epoch_to_bytes(epoch: int) -> bytes:
    if not 0 <= epoch < 1 << 64:
        raise ValueError(f"epoch index out of 64-bit range: {epoch}")
    return epoch.to_bytes(EPOCH_BYTES, "big")


def epoch_from_bytes(data: bytes) -> int:
    if len(data) != EPOCH_BYTES:
        raise ValueError(f"epoch must be {EPOCH_BYTES} bytes, got {len(data)}")
    return int.from_bytes(data, "big")
