import dataclasses
import random

import pytest

from rlnsim.core import compute_internal_nullifier, compute_share, keygen
from rlnsim.merkle import MerkleTree
from rlnsim.proofs import (
    CONSTRAINT_MEMBERSHIP,
    CONSTRAINT_NULLIFIER,
    CONSTRAINT_SHARE,
    ConstraintViolatedError,
    PrivateInputs,
    Proof,
    ProofSystem,
    PublicInputs,
    forge,
)


@pytest.fixture
def system():
    return ProofSystem.from_seed(1234)


def honest_instance(rng, epoch=7, m=b"payload", leaf_index=3, depth=6):
    ident = keygen(rng)
    tree = MerkleTree(depth)
    tree.set_leaf(leaf_index, ident.pk)
    share = compute_share(ident.sk, epoch, m)
    pub = PublicInputs(
        x=share.x,
        epoch=epoch,
        nullifier=compute_internal_nullifier(ident.sk, epoch),
        y=share.y,
        root=tree.root,
    )
    priv = PrivateInputs(sk=ident.sk, leaf_index=leaf_index, auth_path=tree.auth_path(leaf_index))
    return ident, tree, pub, priv


def test_prove_verify_roundtrip(system):
    rng = random.Random(1)
    for _ in range(20):
        _, _, pub, priv = honest_instance(rng)
        proof = system.prove(priv, pub)
        assert system.verify(pub, proof)


def test_perturbed_share_violates_share_constraint(system):
    rng = random.Random(2)
    _, _, pub, priv = honest_instance(rng)
    bad = dataclasses.replace(pub, y=(pub.y + 1))
    with pytest.raises(ConstraintViolatedError) as info:
        system.prove(priv, bad)
    assert info.value.constraint == CONSTRAINT_SHARE


def test_wrong_root_violates_membership(system):
    rng = random.Random(3)
    _, _, pub, priv = honest_instance(rng)
    other = MerkleTree(6)
    other.set_leaf(0, 42)
    bad = dataclasses.replace(pub, root=other.root)
    with pytest.raises(ConstraintViolatedError) as info:
        system.prove(priv, bad)
    assert info.value.constraint == CONSTRAINT_MEMBERSHIP


def test_wrong_nullifier_violates_nullifier(system):
    rng = random.Random(4)
    _, _, pub, priv = honest_instance(rng)
    bad = dataclasses.replace(pub, nullifier=(pub.nullifier + 1))
    with pytest.raises(ConstraintViolatedError) as info:
        system.prove(priv, bad)
    assert info.value.constraint == CONSTRAINT_NULLIFIER


def test_binding_each_public_field(system):
    # flipping any public input after proving must break verification
    rng = random.Random(5)
    for _ in range(100):
        _, _, pub, priv = honest_instance(
            rng, epoch=rng.randrange(1 << 30), m=rng.randbytes(10)
        )
        proof = system.prove(priv, pub)
        for field_name in ("x", "epoch", "nullifier", "y", "root"):
            tampered = dataclasses.replace(pub, **{field_name: getattr(pub, field_name) + 1})
            assert not system.verify(tampered, proof)


def test_forge_rejected(system):
    rng = random.Random(6)
    _, _, pub, _ = honest_instance(rng)
    accepted = 0
    for _ in range(1000):
        if system.verify(pub, forge(pub, rng)):
            accepted += 1
    assert accepted == 0


def test_forge_never_matches_honest_payload(system):
    rng = random.Random(7)
    for _ in range(200):
        _, _, pub, priv = honest_instance(rng, m=rng.randbytes(6))
        honest = system.prove(priv, pub)
        assert forge(pub, rng).payload != honest.payload


def test_verify_rejects_unknown_backend(system):
    rng = random.Random(8)
    _, _, pub, priv = honest_instance(rng)
    proof = system.prove(priv, pub)
    assert not system.verify(pub, Proof(backend=0x7F, payload=proof.payload))


def test_keyed_backends_disagree():
    rng = random.Random(9)
    _, _, pub, priv = honest_instance(rng)
    a = ProofSystem.from_seed(1)
    b = ProofSystem.from_seed(2)
    proof = a.prove(priv, pub)
    assert a.verify(pub, proof)
    assert not b.verify(pub, proof)


def test_public_inputs_serialization_layout():
    pub = PublicInputs(x=1, epoch=2, nullifier=3, y=4, root=5)
    data = pub.to_bytes()
    assert len(data) == 32 + 8 + 32 + 32 + 32
    assert data[:32] == (1).to_bytes(32, "big")
    assert data[32:40] == (2).to_bytes(8, "big")
    assert data[40:72] == (3).to_bytes(32, "big")
