import random

import pytest

from rlnsim.core import (
    DuplicateShareError,
    EpochConfig,
    Share,
    compute_internal_nullifier,
    compute_share,
    compute_thr,
    current_epoch,
    keygen,
    message_hash,
    recover_secret,
    share_coefficient,
)
from rlnsim.field import DOMAIN_COMMITMENT, DOMAIN_NULLIFIER, P, hash_to_field, inv, mul, sub, rand_fe


def test_keygen_distinct_and_reproducible():
    a = keygen(random.Random(1))
    b = keygen(random.Random(2))
    assert a.sk != b.sk
    assert keygen(random.Random(1)) == a


def test_keygen_commitment_recomputes():
    for seed in range(10):
        ident = keygen(random.Random(seed))
        assert ident.pk == hash_to_field(DOMAIN_COMMITMENT, [ident.sk])


def test_share_deterministic():
    ident = keygen(random.Random(7))
    assert compute_share(ident.sk, 9, b"m") == compute_share(ident.sk, 9, b"m")


def test_distinct_messages_distinct_x():
    rng = random.Random(8)
    for _ in range(50):
        sk = rand_fe(rng)
        s1 = compute_share(sk, 3, b"first")
        s2 = compute_share(sk, 3, b"second")
        assert s1.x != s2.x


def test_recovery_from_two_shares():
    # Two shares of one epoch always reconstruct the exact secret.
    rng = random.Random(9)
    for _ in range(1000):
        sk = rand_fe(rng)
        epoch = rng.randrange(1 << 40)
        m1 = rng.randbytes(12)
        m2 = rng.randbytes(12)
        if message_hash(m1) == message_hash(m2):
            continue
        s1 = compute_share(sk, epoch, m1)
        s2 = compute_share(sk, epoch, m2)
        assert recover_secret(s1, s2) == sk


def test_recovery_known_lines():
    # y = 2 + 3x through (1,5) and (2,8)
    assert recover_secret(Share(1, 5), Share(2, 8)) == 2
    # horizontal line through (0,7) and (5,7)
    assert recover_secret(Share(0, 7), Share(5, 7)) == 7


def test_recovery_rejects_equal_x():
    with pytest.raises(DuplicateShareError):
        recover_secret(Share(3, 9), Share(3, 1))


def test_cross_epoch_shares_do_not_recover():
    rng = random.Random(10)
    hits = 0
    for _ in range(1000):
        sk = rand_fe(rng)
        epoch = rng.randrange(1 << 40)
        s1 = compute_share(sk, epoch, b"m1")
        s2 = compute_share(sk, epoch + 1 + rng.randrange(100), b"m2")
        if recover_secret(s1, s2) == sk:
            hits += 1
    assert hits == 0


def test_single_share_hides_secret():
    # For any candidate secret there is a coefficient explaining the share,
    # so one share carries no information about sk.
    rng = random.Random(11)
    for _ in range(200):
        sk = rand_fe(rng)
        share = compute_share(sk, 4, b"msg")
        candidate = rand_fe(rng)
        assert share.x != 0
        a1_candidate = mul(sub(share.y, candidate), inv(share.x))
        assert (candidate + a1_candidate * share.x) % P == share.y


def test_nullifier_deterministic_and_linked_to_coefficient():
    rng = random.Random(12)
    for _ in range(100):
        sk = rand_fe(rng)
        epoch = rng.randrange(1 << 40)
        assert compute_internal_nullifier(sk, epoch) == compute_internal_nullifier(sk, epoch)
        # the nullifier is a pure function of the same coefficient the share uses
        a1 = share_coefficient(sk, epoch)
        assert compute_internal_nullifier(sk, epoch) == hash_to_field(DOMAIN_NULLIFIER, [a1])


def test_nullifier_changes_with_epoch_and_key():
    rng = random.Random(13)
    for _ in range(100):
        sk1 = rand_fe(rng)
        sk2 = rand_fe(rng)
        epoch = rng.randrange(1 << 40)
        assert compute_internal_nullifier(sk1, epoch) != compute_internal_nullifier(sk1, epoch + 1)
        assert compute_internal_nullifier(sk1, epoch) != compute_internal_nullifier(sk2, epoch)


def test_epoch_reference_example():
    assert current_epoch(1644810116, 30) == 54827003


def test_epoch_boundaries():
    assert current_epoch(0, 30) == 0
    assert current_epoch(29, 30) == 0
    assert current_epoch(30, 30) == 1
    assert current_epoch(59.9, 30) == 1


def test_thr_examples():
    assert compute_thr(6, 4, 5) == 2
    assert compute_thr(0, 0, 30) == 0
    assert compute_thr(7, 4, 5) == 3
    assert compute_thr(0.05, 0.0, 30) == 1


def test_thr_rejects_bad_args():
    with pytest.raises(ValueError):
        compute_thr(1, 1, 0)
    with pytest.raises(ValueError):
        compute_thr(-1, 0, 30)


def test_epoch_config_derives_thr():
    cfg = EpochConfig(T=5, network_delay=6, clock_asynchrony=4)
    assert cfg.thr == 2
    with pytest.raises(ValueError):
        EpochConfig(T=0)
