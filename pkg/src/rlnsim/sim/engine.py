"""Deterministic discrete-event engine: topology, gossip, scripted actors, slashing.

Everything runs on one logical thread.  The event queue is keyed by
(integer microseconds, insertion sequence), all randomness flows from
named streams derived from the config seed, and registry transactions
apply synchronously in event order.  Identical configs therefore replay
identical traces.
"""

import hashlib
import heapq
import itertools
import random

from ..core import Identity, Share, keygen, message_hash
from ..field import P
from ..proofs import ProofSystem, forge
from ..registry import (
    CommitExpiredError,
    NoMatchingCommitError,
    NotAMemberError,
    Registry,
    RevealNotEarliestError,
)
from ..relay import (
    Decision,
    MessageBundle,
    NotRegisteredError,
    PeerState,
    RateLimitLocalError,
    craft_bundle,
)
from .config import ScriptEntry, SimConfig
from .report import SimReport, build_report

US = 1_000_000
MAX_REVEAL_ATTEMPTS = 50


class InvalidTopologyError(Exception):
    pass


class InvalidDistributionError(Exception):
    pass


def derive_rng(seed: int, label: str) -> random.Random:
    """Independent deterministic stream for one purpose."""
    digest = hashlib.sha256(seed.to_bytes(8, "big") + label.encode()).digest()
    return random.Random(int.from_bytes(digest, "big"))


def build_topology(spec, n: int, rng: random.Random) -> list[set[int]]:
    """Adjacency sets; the random kind is always connected (spanning tree plus extras)."""
    adjacency: list[set[int]] = [set() for _ in range(n)]

    def link(a: int, b: int) -> None:
        adjacency[a].add(b)
        adjacency[b].add(a)

    if spec.kind == "complete":
        for a in range(n):
            for b in range(a + 1, n):
                link(a, b)
    elif spec.kind == "ring":
        if n < 3:
            raise InvalidTopologyError("ring needs at least 3 peers")
        for a in range(n):
            link(a, (a + 1) % n)
    elif spec.kind == "random":
        if not 2 <= spec.avg_degree < n:
            raise InvalidTopologyError(
                f"avg_degree must be in [2, peers); got {spec.avg_degree}"
            )
        # random spanning tree first, so the graph is connected
        order = list(range(n))
        rng.shuffle(order)
        for i in range(1, n):
            link(order[i], rng.choice(order[:i]))
        target_links = round(spec.avg_degree * n / 2)
        candidates = [(a, b) for a in range(n) for b in range(a + 1, n) if b not in adjacency[a]]
        rng.shuffle(candidates)
        links = n - 1
        for a, b in candidates:
            if links >= target_links:
                break
            link(a, b)
            links += 1
    else:
        raise InvalidTopologyError(f"unknown topology kind {spec.kind!r}")
    return adjacency


def _check_delay(spec) -> None:
    if spec.kind not in ("fixed", "uniform"):
        raise InvalidDistributionError(f"unknown delay kind {spec.kind!r}")
    if spec.lo < 0 or spec.hi < spec.lo:
        raise InvalidDistributionError(f"bad delay range [{spec.lo}, {spec.hi}]")


class Simulation:
    """Peers, registry, topology, and the pending event queue."""

    def __init__(self, config: SimConfig):
        config.validate()
        _check_delay(config.delay)
        self.config = config
        n = config.peers
        self.names = [f"p{i}" for i in range(n)]
        self.index = {name: i for i, name in enumerate(self.names)}

        self.adjacency = build_topology(config.topology, n, derive_rng(config.seed, "topology"))
        delay_rng = derive_rng(config.seed, "delays")
        self.link_delay_us: dict[tuple[int, int], int] = {}
        for a in range(n):
            for b in sorted(self.adjacency[a]):
                if a < b:
                    self.link_delay_us[(a, b)] = round(config.delay.sample(delay_rng) * US)

        offset_rng = derive_rng(config.seed, "offsets")
        offsets = [offset_rng.uniform(-config.clock_offset, config.clock_offset) for _ in range(n)]

        self.registry = Registry(
            policy=config.deposit,
            tree_depth=config.tree_depth,
            commit_window=config.commit_window,
        )
        self.proof_system = ProofSystem.from_seed(config.seed)
        self.peers = [
            PeerState(
                account=self.names[i],
                epoch_config=config.epoch,
                proof_system=self.proof_system,
                tree_depth=config.tree_depth,
                clock_offset=offsets[i],
            )
            for i in range(n)
        ]

        key_rng = derive_rng(config.seed, "keys")
        self.identities: dict[str, list[tuple[Identity, int]]] = {}
        for i, name in enumerate(self.names):
            ident = keygen(key_rng)
            slot = self.registry.register(ident.pk, config.deposit.v, account=name)
            self.identities[name] = [(ident, slot)]
        for name in self.names:
            for _ in range(config.extra_identities.get(name, 0)):
                ident = keygen(key_rng)
                slot = self.registry.register(ident.pk, config.deposit.v, account=name)
                self.identities[name].append((ident, slot))
        for i, name in enumerate(self.names):
            self.peers[i].sync_tree(self.registry)
            ident, slot = self.identities[name][0]
            self.peers[i].adopt_identity(ident, slot)
        self.sk_owner = {
            ident.sk: name for name, pairs in self.identities.items() for ident, _ in pairs
        }

        self.script_rng = derive_rng(config.seed, "script")
        self.registry_rng = derive_rng(config.seed, "registry")
        self.salt_rng = derive_rng(config.seed, "salts")

        self._seq = itertools.count()
        self.queue: list[tuple[int, int, str, tuple]] = []
        for entry in config.script:
            self._schedule(round(entry.time * US), "script", (entry,))
        sync_us = round(config.effective_sync_interval * US)
        for i in range(n):
            self._schedule(sync_us, "sync", (i,))
        watch_us = round(config.watch_interval * US)
        self.watch_position: dict[str, int] = {}
        for name in config.copiers:
            self.watch_position[name] = len(self.registry.tx_log)
            self._schedule(watch_us, "watch", (name,))

        # (account, sk) -> "pending" | "rewarded" | reason the claim died
        self.slash_state: dict[tuple[str, int], str] = {}
        self.stats = {
            "decisions": {kind.value: 0 for kind in Decision},
            "bundles": {},
            "detections": [],
            "slashes": [],
            "reveal_failures": [],
            "withdrawals": [],
            "script_errors": [],
            "messages": [],
        }

    # -- time and identity helpers

    def _wall(self, t_us: int) -> float:
        return self.config.start_time + t_us / US

    def _schedule(self, t_us: int, kind: str, payload: tuple) -> None:
        heapq.heappush(self.queue, (t_us, next(self._seq), kind, payload))

    def initial_state_digest(self) -> str:
        h = hashlib.sha256()
        h.update(repr(sorted(self.link_delay_us.items())).encode())
        h.update(repr([sorted(a) for a in self.adjacency]).encode())
        h.update(repr([p.clock_offset for p in self.peers]).encode())
        h.update(self.registry.dump().encode())
        h.update(self.registry.oracle_root().to_bytes(32, "big"))
        return h.hexdigest()

    def link_count(self) -> int:
        return len(self.link_delay_us)

    # -- bundle bookkeeping

    def _track_bundle(self, bundle: MessageBundle, origin: int, kind: str) -> dict:
        bid = f"{bundle.bundle_id():#066x}"
        info = self.stats["bundles"].get(bid)
        if info is None:
            info = {
                "origin": self.names[origin],
                "kind": kind,
                "epoch": bundle.epoch,
                "received_by": set(),
                "relayed_by": set(),
                "relay_count": 0,
            }
            self.stats["bundles"][bid] = info
        return info

    def _send_to(self, t_us: int, frm: int, to: int, bundle: MessageBundle) -> None:
        pair = (min(frm, to), max(frm, to))
        delay = self.link_delay_us[pair]
        self._schedule(t_us + delay, "deliver", (to, frm, bundle))

    def _broadcast(self, t_us: int, origin: int, bundle: MessageBundle, kind: str) -> None:
        self._track_bundle(bundle, origin, kind)
        for neighbor in sorted(self.adjacency[origin]):
            self._send_to(t_us, origin, neighbor, bundle)

    # -- event handlers

    def _ev_deliver(self, t_us: int, to: int, frm: int, bundle: MessageBundle) -> None:
        peer = self.peers[to]
        decision = peer.on_receive(bundle, self._wall(t_us))
        self.stats["decisions"][decision.kind.value] += 1
        bid = f"{bundle.bundle_id():#066x}"
        info = self.stats["bundles"].get(bid)
        if info is not None:
            info["received_by"].add(self.names[to])
        if decision.kind is Decision.RELAY:
            if info is not None:
                info["relayed_by"].add(self.names[to])
                info["relay_count"] += 1
            for neighbor in sorted(self.adjacency[to] - {frm}):
                self._send_to(t_us, to, neighbor, bundle)
        elif decision.kind is Decision.SLASH_DETECTED:
            self._on_detection(t_us, to, decision.recovered_sk)

    def _on_detection(self, t_us: int, peer_idx: int, sk: int) -> None:
        name = self.names[peer_idx]
        own = any(ident.sk == sk for ident, _ in self.identities[name])
        # reporting yourself is just an expensive withdrawal, so nobody does
        muted = name in self.config.mute_detectors or own
        self.stats["detections"].append(
            {"peer": name, "sk": f"{sk:#x}", "time_us": t_us, "muted": muted}
        )
        if muted:
            return
        self._start_claim(t_us, peer_idx, sk)

    def _start_claim(self, t_us: int, peer_idx: int, sk: int) -> None:
        name = self.names[peer_idx]
        if (name, sk) in self.slash_state:
            return
        self.slash_state[(name, sk)] = "pending"
        salt = self.salt_rng.randbytes(16)
        commit, reveal = self.peers[peer_idx].initiate_slash(sk, salt)
        jitter = round(self.registry_rng.uniform(0, self.config.submit_jitter) * US)
        self._schedule(t_us + jitter, "commit", (commit, reveal))

    def _ev_commit(self, t_us: int, commit, reveal) -> None:
        self.registry.slash_commit(commit.commitment, commit.account)
        wait = round(self.config.confirmation_latency * US)
        jitter = round(self.registry_rng.uniform(0, self.config.submit_jitter) * US)
        self._schedule(t_us + wait + jitter, "reveal", (reveal, 1))

    def _ev_reveal(self, t_us: int, reveal, attempt: int) -> None:
        key = (reveal.account, reveal.sk)
        try:
            reward = self.registry.slash_reveal(reveal.sk, reveal.account, reveal.salt)
        except RevealNotEarliestError as exc:
            self.stats["reveal_failures"].append(
                {
                    "account": reveal.account,
                    "sk": f"{reveal.sk:#x}",
                    "error": type(exc).__name__,
                    "time_us": t_us,
                }
            )
            if attempt < MAX_REVEAL_ATTEMPTS:
                wait = round(self.config.confirmation_latency * US)
                jitter = round(self.registry_rng.uniform(0, self.config.submit_jitter) * US)
                self._schedule(t_us + wait + jitter, "reveal", (reveal, attempt + 1))
            else:
                self.slash_state[key] = "starved"
            return
        except (NotAMemberError, CommitExpiredError, NoMatchingCommitError) as exc:
            self.stats["reveal_failures"].append(
                {
                    "account": reveal.account,
                    "sk": f"{reveal.sk:#x}",
                    "error": type(exc).__name__,
                    "time_us": t_us,
                }
            )
            self.slash_state[key] = type(exc).__name__
            return
        self.slash_state[key] = "rewarded"
        self.stats["slashes"].append(
            {
                "slasher": reveal.account,
                "sk": f"{reveal.sk:#x}",
                "owner": self.sk_owner.get(reveal.sk, "unknown"),
                "reward": reward,
                "time_us": t_us,
            }
        )

    def _ev_sync(self, t_us: int, peer_idx: int) -> None:
        peer = self.peers[peer_idx]
        peer.sync_tree(self.registry)
        peer.prune_nullifier_map(self._wall(t_us))
        self._schedule(
            t_us + round(self.config.effective_sync_interval * US), "sync", (peer_idx,)
        )

    def _ev_watch(self, t_us: int, name: str) -> None:
        """Copier: scan new reveal transactions and mirror any disclosed opening."""
        position = self.watch_position[name]
        for record in self.registry.tx_since(position):
            if record.kind == "slash_reveal" and record.account != name:
                sk = record.detail.get("sk")
                if sk is not None:
                    self._start_claim(t_us, self.index[name], sk)
        self.watch_position[name] = len(self.registry.tx_log)
        self._schedule(t_us + round(self.config.watch_interval * US), "watch", (name,))

    # -- scripted actions

    def _ev_script(self, t_us: int, entry: ScriptEntry) -> None:
        actor = self.index[entry.actor]
        try:
            handler = getattr(self, "_act_" + entry.action)
            handler(t_us, actor, entry.params)
        except (RateLimitLocalError, NotRegisteredError, NotAMemberError, KeyError) as exc:
            self.stats["script_errors"].append(
                {
                    "actor": entry.actor,
                    "action": entry.action,
                    "error": f"{type(exc).__name__}: {exc}",
                    "time_us": t_us,
                }
            )

    def _note_message(self, t_us: int, actor: int, bundle: MessageBundle, sk: int) -> None:
        self.stats["messages"].append(
            {
                "actor": self.names[actor],
                "epoch": bundle.epoch,
                "owner": self.sk_owner.get(sk, "unknown"),
                "time_us": t_us,
            }
        )

    def _act_publish(self, t_us: int, actor: int, params: dict) -> None:
        payload = str(params["text"]).encode()
        bundle = self.peers[actor].publish(payload, self._wall(t_us))
        self._note_message(t_us, actor, bundle, self.peers[actor].identity.sk)
        self._broadcast(t_us, actor, bundle, "honest")

    def _act_publish_multi(self, t_us: int, actor: int, params: dict) -> None:
        """One message per owned identity in the current epoch (aggregate quota)."""
        texts = [str(t) for t in params["texts"]]
        peer = self.peers[actor]
        pairs = self.identities[self.names[actor]]
        for text, (ident, slot) in zip(texts, pairs):
            if ident is peer.identity:
                bundle = peer.publish(text.encode(), self._wall(t_us))
            else:
                epoch = peer.local_epoch(self._wall(t_us))
                bundle = craft_bundle(
                    peer.tree, ident, slot, text.encode(), epoch, self.proof_system
                )
            self._note_message(t_us, actor, bundle, ident.sk)
            self._broadcast(t_us, actor, bundle, "honest")

    def _act_spam_pair(self, t_us: int, actor: int, params: dict) -> None:
        """Two messages under one sk in one epoch, each sent to a different neighbor."""
        peer = self.peers[actor]
        epoch = peer.local_epoch(self._wall(t_us))
        first = peer.make_bundle(str(params["text1"]).encode(), epoch)
        second = peer.make_bundle(str(params["text2"]).encode(), epoch)
        neighbors = sorted(self.adjacency[actor])
        if len(neighbors) < 2:
            raise KeyError("spam_pair needs at least two neighbors")
        self._note_message(t_us, actor, first, peer.identity.sk)
        self._note_message(t_us, actor, second, peer.identity.sk)
        self._track_bundle(first, actor, "spam")
        self._track_bundle(second, actor, "spam")
        self._send_to(t_us, actor, neighbors[0], first)
        self._send_to(t_us, actor, neighbors[1], second)

    def _act_flood_copies(self, t_us: int, actor: int, params: dict) -> None:
        """The same bundle pushed repeatedly down every link."""
        peer = self.peers[actor]
        epoch = peer.local_epoch(self._wall(t_us))
        bundle = peer.make_bundle(str(params["text"]).encode(), epoch)
        copies = int(params.get("copies", 3))
        self._note_message(t_us, actor, bundle, peer.identity.sk)
        self._track_bundle(bundle, actor, "honest")
        for neighbor in sorted(self.adjacency[actor]):
            for _ in range(copies):
                jitter = round(self.script_rng.uniform(0, 0.2) * US)
                pair = (min(actor, neighbor), max(actor, neighbor))
                self._schedule(
                    t_us + self.link_delay_us[pair] + jitter,
                    "deliver",
                    (neighbor, actor, bundle),
                )

    def _act_epoch_probe(self, t_us: int, actor: int, params: dict) -> None:
        """One bundle per epoch offset; pins the freshness window boundaries."""
        peer = self.peers[actor]
        current = peer.local_epoch(self._wall(t_us))
        thr = self.config.epoch.thr
        offsets = [int(o) for o in params["offsets"]]
        if len(set(offsets)) != len(offsets):
            raise KeyError("epoch_probe offsets must be distinct")
        prefix = str(params.get("text_prefix", "probe"))
        for offset in offsets:
            if offset < -thr:
                kind = "stale"
            elif offset > thr:
                kind = "future"
            else:
                kind = "fresh"
            bundle = peer.make_bundle(f"{prefix}{offset}".encode(), current + offset)
            self._broadcast(t_us, actor, bundle, kind)

    def _act_forge_flood(self, t_us: int, actor: int, params: dict) -> None:
        """Well-shaped bundles with garbage proofs; payload hash is even correct."""
        peer = self.peers[actor]
        epoch = peer.local_epoch(self._wall(t_us))
        for _ in range(int(params.get("count", 10))):
            payload = self.script_rng.randbytes(12)
            bundle = MessageBundle(
                payload=payload,
                share=Share(x=message_hash(payload), y=self.script_rng.randrange(P)),
                nullifier=self.script_rng.randrange(P),
                epoch=epoch,
                root=peer.tree.root,
                proof=forge(None, self.script_rng),
            )
            self._broadcast(t_us, actor, bundle, "forged")

    def _act_withdraw(self, t_us: int, actor: int, params: dict) -> None:
        name = self.names[actor]
        ident, _slot = self.identities[name][0]
        refund = self.registry.withdraw(ident.sk, account=name)
        self.stats["withdrawals"].append(
            {"actor": name, "sk": f"{ident.sk:#x}", "refund": refund, "time_us": t_us}
        )

    # -- main loop

    def dispatch(self, event: tuple[int, int, str, tuple]) -> None:
        t_us, _seq, kind, payload = event
        if kind == "deliver":
            self._ev_deliver(t_us, *payload)
        elif kind == "script":
            self._ev_script(t_us, *payload)
        elif kind == "sync":
            self._ev_sync(t_us, *payload)
        elif kind == "watch":
            self._ev_watch(t_us, *payload)
        elif kind == "commit":
            self._ev_commit(t_us, *payload)
        elif kind == "reveal":
            self._ev_reveal(t_us, *payload)
        else:
            raise RuntimeError(f"unknown event kind {kind!r}")

    def run(self, until: float) -> SimReport:
        if until > 0:
            until_us = round(until * US)
            while self.queue and self.queue[0][0] <= until_us:
                self.dispatch(heapq.heappop(self.queue))
            for peer in self.peers:
                peer.sync_tree(self.registry)
        return build_report(self, until)


def build_sim(config: SimConfig) -> Simulation:
    return Simulation(config)


def run(sim: Simulation, until: float) -> SimReport:
    return sim.run(until)
