"""Frozen input/output vectors for the share derivation pipeline.

Twenty seeded (sk, epoch, m) cases with their derived (x, y, nullifier,
pk), plus one epoch arithmetic example, for regression testing and
cross-implementation conformance.
"""

import json
import random

from .core import Identity, compute_internal_nullifier, compute_share, current_epoch
from .field import rand_fe

VECTOR_SEED = 0x524C4E
VECTOR_COUNT = 20

EPOCH_EXAMPLE_UNIX_TIME = 1644810116
EPOCH_EXAMPLE_T = 30


def generate_vectors(count: int = VECTOR_COUNT) -> dict:
    rng = random.Random(VECTOR_SEED)
    cases = []
    for i in range(count):
        sk = rand_fe(rng)
        epoch = rng.randrange(1 << 32)
        m = f"vector message {i:02d} ".encode() + rng.randbytes(8)
        share = compute_share(sk, epoch, m)
        nullifier = compute_internal_nullifier(sk, epoch)
        cases.append(
            {
                "sk": f"{sk:#x}",
                "epoch": epoch,
                "m": m.hex(),
                "x": f"{share.x:#x}",
                "y": f"{share.y:#x}",
                "nullifier": f"{nullifier:#x}",
                "pk": f"{Identity.from_sk(sk).pk:#x}",
            }
        )
    return {
        "schema": 1,
        "epoch_example": {
            "unix_time": EPOCH_EXAMPLE_UNIX_TIME,
            "T": EPOCH_EXAMPLE_T,
            "epoch": current_epoch(EPOCH_EXAMPLE_UNIX_TIME, EPOCH_EXAMPLE_T),
        },
        "cases": cases,
    }


def vectors_text() -> str:
    return json.dumps(generate_vectors(), sort_keys=True, indent=2) + "\n"
