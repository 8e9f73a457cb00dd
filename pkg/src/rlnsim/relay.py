"""Per-peer protocol state: publishing, routing decisions, and slash initiation.

Incoming bundles run through a fixed decision ladder, cheapest check
first: seen-cache, epoch gap, known root, proof, then the nullifier map.
The nullifier map is where rate violations surface: a second bundle for
the same (epoch, nullifier) with a different share hands us two points
on the sender's secret line, and the recovered key feeds the two-phase
slashing flow against the registry.
"""

from __future__ import annotations

import enum
import io
from collections import OrderedDict, deque
from dataclasses import dataclass

from .core import (
    EpochConfig,
    Identity,
    Share,
    compute_internal_nullifier,
    compute_share,
    current_epoch,
    message_hash,
    recover_secret,
)
from .field import DOMAIN_MSG, P, fe_to_bytes, hash_to_field
from .merkle import MerkleTree, SequenceGapError
from .proofs import Proof, ProofSystem, PrivateInputs, PublicInputs
from .registry import Registry, slash_commitment


class RateLimitLocalError(Exception):
    """Honest self-restraint: one publish per epoch."""


class NotRegisteredError(Exception):
    pass


@dataclass(frozen=True)
class MessageBundle:
    """The wire unit: payload plus everything a router needs to judge it."""

    payload: bytes
    share: Share
    nullifier: int
    epoch: int
    root: int
    proof: Proof

    def to_bytes(self) -> bytes:
        out = io.BytesIO()
        out.write(len(self.payload).to_bytes(8, "big"))
        out.write(self.payload)
        out.write(fe_to_bytes(self.share.x))
        out.write(fe_to_bytes(self.share.y))
        out.write(fe_to_bytes(self.nullifier))
        out.write(self.epoch.to_bytes(8, "big"))
        out.write(fe_to_bytes(self.root))
        out.write(bytes([self.proof.backend]))
        out.write(len(self.proof.payload).to_bytes(8, "big"))
        out.write(self.proof.payload)
        return out.getvalue()

    @classmethod
    def from_bytes(cls, data: bytes) -> "MessageBundle":
        buf = io.BytesIO(data)

        def take(n: int) -> bytes:
            chunk = buf.read(n)
            if len(chunk) != n:
                raise ValueError("truncated bundle")
            return chunk

        payload = take(int.from_bytes(take(8), "big"))
        x = int.from_bytes(take(32), "big")
        y = int.from_bytes(take(32), "big")
        nullifier = int.from_bytes(take(32), "big")
        epoch = int.from_bytes(take(8), "big")
        root = int.from_bytes(take(32), "big")
        backend = take(1)[0]
        proof_payload = take(int.from_bytes(take(8), "big"))
        if buf.read(1):
            raise ValueError("trailing bytes after bundle")
        return cls(
            payload=payload,
            share=Share(x=x, y=y),
            nullifier=nullifier,
            epoch=epoch,
            root=root,
            proof=Proof(backend=backend, payload=proof_payload),
        )

    def bundle_id(self) -> int:
        return hash_to_field(DOMAIN_MSG, [self.to_bytes()])


class Decision(enum.Enum):
    RELAY = "relay"
    DROP_STALE_EPOCH = "drop_stale_epoch"
    DROP_FUTURE_EPOCH = "drop_future_epoch"
    DROP_UNKNOWN_ROOT = "drop_unknown_root"
    DROP_INVALID_PROOF = "drop_invalid_proof"
    DROP_DUPLICATE = "drop_duplicate"
    SLASH_DETECTED = "slash_detected"


@dataclass(frozen=True)
class RoutingDecision:
    kind: Decision
    recovered_sk: int | None = None


@dataclass(frozen=True)
class CommitIntent:
    commitment: int
    account: str


@dataclass(frozen=True)
class RevealIntent:
    sk: int
    account: str
    salt: bytes


class FifoSet:
    """Bounded membership set with first-in-first-out eviction."""

    def __init__(self, capacity: int):
        self.capacity = capacity
        self._items: OrderedDict[int, None] = OrderedDict()

    def __contains__(self, item: int) -> bool:
        return item in self._items

    def __len__(self) -> int:
        return len(self._items)

    def add(self, item: int) -> None:
        if item in self._items:
            return
        self._items[item] = None
        while len(self._items) > self.capacity:
            self._items.popitem(last=False)


def craft_bundle(
    tree: MerkleTree,
    identity: Identity,
    leaf_index: int,
    m: bytes,
    epoch: int,
    proof_system: ProofSystem,
) -> MessageBundle:
    """Build a fully proven bundle for an identity present in the given tree."""
    share = compute_share(identity.sk, epoch, m)
    nullifier = compute_internal_nullifier(identity.sk, epoch)
    pub = PublicInputs(x=share.x, epoch=epoch, nullifier=nullifier, y=share.y, root=tree.root)
    priv = PrivateInputs(sk=identity.sk, leaf_index=leaf_index, auth_path=tree.auth_path(leaf_index))
    proof = proof_system.prove(priv, pub)
    return MessageBundle(
        payload=m, share=share, nullifier=nullifier, epoch=epoch, root=tree.root, proof=proof
    )


class PeerState:
    """All protocol state owned by one peer."""

    def __init__(
        self,
        account: str,
        epoch_config: EpochConfig,
        proof_system: ProofSystem,
        tree_depth: int = 20,
        clock_offset: float = 0.0,
        root_window: int = 10,
        seen_cache_size: int = 4096,
    ):
        self.account = account
        self.epoch_config = epoch_config
        self.proof_system = proof_system
        self.clock_offset = clock_offset

        self.identity: Identity | None = None
        self.leaf_index: int | None = None
        self.tree = MerkleTree(tree_depth)
        self.recent_roots: deque[int] = deque(maxlen=root_window)
        self.recent_roots.append(self.tree.root)
        self.nullifier_map: dict[tuple[int, int], Share] = {}
        self.seen = FifoSet(seen_cache_size)
        self.last_published_epoch: int | None = None

    def adopt_identity(self, identity: Identity, leaf_index: int) -> None:
        self.identity = identity
        self.leaf_index = leaf_index

    def local_epoch(self, now: float) -> int:
        return current_epoch(now + self.clock_offset, self.epoch_config.T)

    def _require_registered(self) -> tuple[Identity, int]:
        if self.identity is None or self.leaf_index is None:
            raise NotRegisteredError("peer has no registered identity")
        if self.tree.leaf(self.leaf_index) != self.identity.pk:
            raise NotRegisteredError("own commitment not present in the local tree yet")
        return self.identity, self.leaf_index

    def make_bundle(self, m: bytes, epoch: int) -> MessageBundle:
        """Craft a bundle for an arbitrary epoch, without rate bookkeeping."""
        identity, leaf_index = self._require_registered()
        return craft_bundle(self.tree, identity, leaf_index, m, epoch, self.proof_system)

    def publish(self, m: bytes, now: float) -> MessageBundle:
        """One bundle per epoch; epochs must advance between publishes."""
        self._require_registered()
        epoch = self.local_epoch(now)
        if self.last_published_epoch is not None and epoch <= self.last_published_epoch:
            raise RateLimitLocalError(f"already published in epoch {self.last_published_epoch}")
        bundle = self.make_bundle(m, epoch)
        self.last_published_epoch = epoch
        return bundle

    @staticmethod
    def _well_formed(bundle: MessageBundle) -> bool:
        values = (bundle.share.x, bundle.share.y, bundle.nullifier, bundle.root)
        if not all(0 <= v < P for v in values):
            return False
        return 0 <= bundle.epoch < 1 << 64

    def on_receive(self, bundle: MessageBundle, now: float) -> RoutingDecision:
        """Classify a received bundle; every bundle gets exactly one decision."""
        if not self._well_formed(bundle):
            # unencodable fields can never verify; drop before touching caches
            return RoutingDecision(Decision.DROP_INVALID_PROOF)
        bundle_id = bundle.bundle_id()
        if bundle_id in self.seen:
            return RoutingDecision(Decision.DROP_DUPLICATE)
        self.seen.add(bundle_id)

        epoch_now = self.local_epoch(now)
        thr = self.epoch_config.thr
        if bundle.epoch < epoch_now - thr:
            return RoutingDecision(Decision.DROP_STALE_EPOCH)
        if bundle.epoch > epoch_now + thr:
            return RoutingDecision(Decision.DROP_FUTURE_EPOCH)

        if bundle.root not in self.recent_roots:
            return RoutingDecision(Decision.DROP_UNKNOWN_ROOT)

        # The share's x must be the hash of the carried payload; otherwise the
        # nullifier map would record a point off the sender's line.
        if bundle.share.x != message_hash(bundle.payload):
            return RoutingDecision(Decision.DROP_INVALID_PROOF)
        pub = PublicInputs(
            x=bundle.share.x,
            epoch=bundle.epoch,
            nullifier=bundle.nullifier,
            y=bundle.share.y,
            root=bundle.root,
        )
        if not self.proof_system.verify(pub, bundle.proof):
            return RoutingDecision(Decision.DROP_INVALID_PROOF)

        key = (bundle.epoch, bundle.nullifier)
        previous = self.nullifier_map.get(key)
        if previous is None:
            self.nullifier_map[key] = bundle.share
            return RoutingDecision(Decision.RELAY)
        if previous == bundle.share:
            return RoutingDecision(Decision.DROP_DUPLICATE)
        if previous.x == bundle.share.x:
            # Equal x with unequal y cannot come from two honest proofs; treat
            # it as a duplicate of the same message rather than a violation.
            return RoutingDecision(Decision.DROP_DUPLICATE)
        return RoutingDecision(
            Decision.SLASH_DETECTED, recovered_sk=recover_secret(previous, bundle.share)
        )

    def prune_nullifier_map(self, now: float) -> int:
        """Drop entries older than the gap threshold; returns how many."""
        horizon = self.local_epoch(now) - self.epoch_config.thr
        stale = [key for key in self.nullifier_map if key[0] < horizon]
        for key in stale:
            del self.nullifier_map[key]
        return len(stale)

    def initiate_slash(self, recovered_sk: int, salt: bytes) -> tuple[CommitIntent, RevealIntent]:
        """Commit first, reveal at least one transaction later."""
        commitment = slash_commitment(recovered_sk, self.account, salt)
        return (
            CommitIntent(commitment=commitment, account=self.account),
            RevealIntent(sk=recovered_sk, account=self.account, salt=salt),
        )

    def sync_tree(self, registry: Registry) -> int:
        """Apply new registry events; returns the number applied.

        Each intermediate root enters the recent-roots window so bundles
        proven against a just-superseded root are still routable.  Any
        disagreement about the local position, a gap or a local sequence
        beyond the log, triggers a full rebuild from event zero.
        """
        try:
            return self._apply_events(registry)
        except (SequenceGapError, ValueError):
            self.tree = MerkleTree(self.tree.depth)
            self.recent_roots.append(self.tree.root)
            return self._apply_events(registry)

    def _apply_events(self, registry: Registry) -> int:
        events = registry.events_since(self.tree.next_sequence)
        for event in events:
            self.tree.apply_event(event)
            if not self.recent_roots or self.recent_roots[-1] != self.tree.root:
                self.recent_roots.append(self.tree.root)
        return len(events)
