import dataclasses
import random

import pytest

from rlnsim.core import (
    EpochConfig,
    Share,
    compute_internal_nullifier,
    keygen,
)
from rlnsim.field import P, rand_fe
from rlnsim.merkle import RegistryEvent
from rlnsim.proofs import Proof, ProofSystem, forge
from rlnsim.registry import Registry
from rlnsim.relay import (
    Decision,
    FifoSet,
    MessageBundle,
    NotRegisteredError,
    PeerState,
    RateLimitLocalError,
)

CFG = EpochConfig(T=30, network_delay=6, clock_asynchrony=4)  # thr == 1
DEPTH = 8


@pytest.fixture
def system():
    return ProofSystem.from_seed(99)


@pytest.fixture
def registry():
    return Registry(tree_depth=DEPTH)


def new_peer(account, system, offset=0.0):
    return PeerState(
        account=account,
        epoch_config=CFG,
        proof_system=system,
        tree_depth=DEPTH,
        clock_offset=offset,
    )


def register_peer(peer, registry, seed):
    ident = keygen(random.Random(seed))
    slot = registry.register(ident.pk, 100, account=peer.account)
    peer.adopt_identity(ident, slot)
    peer.sync_tree(registry)
    return ident


def test_publish_roundtrip(system, registry):
    alice = new_peer("alice", system)
    bob = new_peer("bob", system)
    register_peer(alice, registry, 1)
    bob.sync_tree(registry)
    bundle = alice.publish(b"hi", now=1000.0)
    assert bundle.epoch == 1000 // 30
    decision = bob.on_receive(bundle, now=1000.5)
    assert decision.kind is Decision.RELAY


def test_publish_requires_registration(system):
    peer = new_peer("lonely", system)
    with pytest.raises(NotRegisteredError):
        peer.publish(b"hi", now=0.0)


def test_publish_requires_sync(system, registry):
    peer = new_peer("early", system)
    ident = keygen(random.Random(3))
    slot = registry.register(ident.pk, 100)
    peer.adopt_identity(ident, slot)
    # no sync yet: own commitment absent from local tree
    with pytest.raises(NotRegisteredError):
        peer.publish(b"hi", now=0.0)


def test_publish_rate_limited_per_epoch(system, registry):
    alice = new_peer("alice", system)
    register_peer(alice, registry, 1)
    alice.publish(b"one", now=90.0)
    with pytest.raises(RateLimitLocalError):
        alice.publish(b"two", now=91.0)
    # next epoch is fine
    alice.publish(b"three", now=120.0)


def test_seen_cache_drops_second_copy(system, registry):
    alice = new_peer("alice", system)
    bob = new_peer("bob", system)
    register_peer(alice, registry, 1)
    bob.sync_tree(registry)
    bundle = alice.publish(b"hi", now=900.0)
    assert bob.on_receive(bundle, now=900.1).kind is Decision.RELAY
    assert bob.on_receive(bundle, now=900.2).kind is Decision.DROP_DUPLICATE


def test_epoch_gap_two_sided(system, registry):
    alice = new_peer("alice", system)
    bob = new_peer("bob", system)
    register_peer(alice, registry, 1)
    bob.sync_tree(registry)
    now = 3000.0
    current = bob.local_epoch(now)
    # exactly thr behind is still accepted
    ok = alice.make_bundle(b"boundary", current - CFG.thr)
    assert bob.on_receive(ok, now).kind is Decision.RELAY
    stale = alice.make_bundle(b"old", current - CFG.thr - 1)
    assert bob.on_receive(stale, now).kind is Decision.DROP_STALE_EPOCH
    future = alice.make_bundle(b"soon", current + CFG.thr + 1)
    assert bob.on_receive(future, now).kind is Decision.DROP_FUTURE_EPOCH


def test_unknown_root_dropped(system, registry):
    alice = new_peer("alice", system)
    register_peer(alice, registry, 1)
    bundle = alice.publish(b"hi", now=600.0)
    stranger = new_peer("stranger", system)  # never synced; only knows the empty root
    assert stranger.on_receive(bundle, now=600.1).kind is Decision.DROP_UNKNOWN_ROOT


def test_superseded_root_still_accepted(system, registry):
    alice = new_peer("alice", system)
    bob = new_peer("bob", system)
    register_peer(alice, registry, 1)
    bob.sync_tree(registry)
    bundle = alice.publish(b"in flight", now=600.0)
    # a new registration supersedes the root while the bundle is in flight
    other = keygen(random.Random(9))
    registry.register(other.pk, 100)
    bob.sync_tree(registry)
    assert bob.on_receive(bundle, now=600.5).kind is Decision.RELAY


def test_forged_proof_dropped(system, registry):
    alice = new_peer("alice", system)
    bob = new_peer("bob", system)
    register_peer(alice, registry, 1)
    bob.sync_tree(registry)
    honest = alice.publish(b"hi", now=600.0)
    rng = random.Random(5)
    forged = dataclasses.replace(honest, proof=forge(None, rng))
    assert bob.on_receive(forged, now=600.1).kind is Decision.DROP_INVALID_PROOF


def test_share_x_must_match_payload_hash(system, registry):
    alice = new_peer("alice", system)
    bob = new_peer("bob", system)
    register_peer(alice, registry, 1)
    bob.sync_tree(registry)
    honest = alice.publish(b"hi", now=600.0)
    # swap the payload: the attached share no longer matches H(m)
    tampered = dataclasses.replace(honest, payload=b"bye")
    assert bob.on_receive(tampered, now=600.1).kind is Decision.DROP_INVALID_PROOF


def test_rate_violation_recovers_secret(system, registry):
    rng = random.Random(11)
    for _ in range(50):
        registry_local = Registry(tree_depth=DEPTH)
        spammer = new_peer("spammer", system)
        router = new_peer("router", system)
        ident = register_peer(spammer, registry_local, rng.randrange(1 << 30))
        router.sync_tree(registry_local)
        epoch = router.local_epoch(500.0)
        b1 = spammer.make_bundle(b"first " + rng.randbytes(4), epoch)
        b2 = spammer.make_bundle(b"second " + rng.randbytes(4), epoch)
        assert router.on_receive(b1, 500.0).kind is Decision.RELAY
        verdict = router.on_receive(b2, 500.1)
        assert verdict.kind is Decision.SLASH_DETECTED
        assert verdict.recovered_sk == ident.sk


def test_identical_spam_is_duplicate_not_violation(system, registry):
    spammer = new_peer("spammer", system)
    router = new_peer("router", system)
    register_peer(spammer, registry, 2)
    router.sync_tree(registry)
    epoch = router.local_epoch(500.0)
    b1 = spammer.make_bundle(b"same", epoch)
    b2 = spammer.make_bundle(b"same", epoch)
    assert b1 == b2  # crafting is deterministic, so the copies are identical
    assert router.on_receive(b1, 500.0).kind is Decision.RELAY
    assert router.on_receive(b2, 500.1).kind is Decision.DROP_DUPLICATE


def test_no_false_slash_on_distinct_keys(system):
    # distinct members in the same epoch never collide on the nullifier
    rng = random.Random(13)
    epoch = 1000
    seen = set()
    for _ in range(10000):
        sk = rand_fe(rng)
        nullifier = compute_internal_nullifier(sk, epoch)
        assert nullifier not in seen
        seen.add(nullifier)


def test_prune_nullifier_map_boundaries(system, registry):
    peer = new_peer("router", system)
    now = 3000.0
    current = peer.local_epoch(now)
    thr = CFG.thr
    share = Share(x=1, y=2)
    peer.nullifier_map[(current - thr, 7)] = share  # boundary: retained
    peer.nullifier_map[(current - thr - 1, 8)] = share  # too old: removed
    peer.nullifier_map[(current, 9)] = share
    assert peer.prune_nullifier_map(now) == 1
    assert set(peer.nullifier_map) == {(current - thr, 7), (current, 9)}
    assert peer.prune_nullifier_map(now) == 0


def test_initiate_slash_intents(system):
    peer = new_peer("hunter", system)
    commit, reveal = peer.initiate_slash(recovered_sk=1234, salt=b"salty")
    from rlnsim.registry import slash_commitment

    assert commit.commitment == slash_commitment(1234, "hunter", b"salty")
    assert commit.account == "hunter"
    assert reveal.sk == 1234
    assert reveal.salt == b"salty"


def test_sync_tree_tracks_oracle(system, registry):
    peers = [new_peer(f"p{i}", system) for i in range(3)]
    rng = random.Random(17)
    idents = []
    for i in range(10):
        ident = keygen(rng)
        registry.register(ident.pk, 100)
        idents.append(ident)
    for peer in peers:
        peer.sync_tree(registry)
    registry.withdraw(idents[4].sk)
    for peer in peers:
        peer.sync_tree(registry)
        assert peer.tree.root == registry.oracle_root(DEPTH)
    # no new events: syncing again applies nothing
    assert peers[0].sync_tree(registry) == 0


def test_sync_recovers_from_gap(system, registry):
    peer = new_peer("gappy", system)
    for i in range(5):
        registry.register(keygen(random.Random(i)).pk, 100)
    peer.sync_tree(registry)
    # simulate local corruption: the peer thinks it is ahead of the log
    peer.tree.next_sequence = 99
    peer.sync_tree(registry)
    assert peer.tree.root == registry.oracle_root(DEPTH)


def test_one_relay_per_bundle_many_neighbors(system, registry):
    alice = new_peer("alice", system)
    bob = new_peer("bob", system)
    register_peer(alice, registry, 1)
    bob.sync_tree(registry)
    bundle = alice.publish(b"multi-path", now=600.0)
    decisions = [bob.on_receive(bundle, 600.0 + i * 0.01) for i in range(6)]
    assert sum(1 for d in decisions if d.kind is Decision.RELAY) == 1


def test_bundle_serialization_roundtrip(system, registry):
    alice = new_peer("alice", system)
    register_peer(alice, registry, 1)
    bundle = alice.publish(b"wire", now=600.0)
    data = bundle.to_bytes()
    assert MessageBundle.from_bytes(data) == bundle
    assert MessageBundle.from_bytes(data).bundle_id() == bundle.bundle_id()
    with pytest.raises(ValueError):
        MessageBundle.from_bytes(data[:-1])
    with pytest.raises(ValueError):
        MessageBundle.from_bytes(data + b"\x00")


def test_decision_table_total_under_fuzz(system, registry):
    # every random bundle maps to exactly one decision, no exceptions
    alice = new_peer("alice", system)
    router = new_peer("router", system)
    ident = register_peer(alice, registry, 1)
    router.sync_tree(registry)
    rng = random.Random(23)
    now = 2000.0
    epoch_now = router.local_epoch(now)
    kinds = set()
    for _ in range(10000):
        roll = rng.random()
        if roll < 0.15:
            bundle = alice.make_bundle(rng.randbytes(6), epoch_now)
        elif roll < 0.2:
            bundle = alice.make_bundle(rng.randbytes(6), epoch_now + rng.randrange(-40, 40))
        else:
            bundle = MessageBundle(
                payload=rng.randbytes(rng.randrange(0, 12)),
                share=Share(x=rng.randrange(2 * P), y=rng.randrange(2 * P)),
                nullifier=rng.randrange(2 * P),
                epoch=rng.randrange(-5, 1 << 40),
                root=rng.choice([router.tree.root, rng.randrange(P)]),
                proof=rng.choice(
                    [forge(None, rng), Proof(backend=rng.randrange(256), payload=rng.randbytes(8))]
                ),
            )
        verdict = router.on_receive(bundle, now)
        assert isinstance(verdict.kind, Decision)
        kinds.add(verdict.kind)
    assert Decision.RELAY in kinds
    assert Decision.DROP_INVALID_PROOF in kinds


def test_fifo_set_eviction():
    cache = FifoSet(3)
    for i in range(5):
        cache.add(i)
    assert len(cache) == 3
    assert 0 not in cache and 1 not in cache
    assert 4 in cache
