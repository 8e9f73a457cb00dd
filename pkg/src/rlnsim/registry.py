"""Mock membership contract: ordered member list, deposits, commit-reveal slashing.

The registry is a single serialized state machine standing in for an
on-chain contract.  Every submitted transaction, including ones that
fail, consumes one position in the ordered log, exactly as a reverted
transaction would on chain.  The ordered log is what resolves slashing
races: the earliest committer wins, and a commitment expires after a
fixed number of transactions so it cannot block rivals forever.

A reveal publishes its opening (sk, salt) whether or not it succeeds,
mirroring public calldata.  Arbitration is therefore conservative: a
reveal is turned away while any earlier, unexpired commitment by another
account might still target the same key, i.e. it is either disclosed as
targeting that key or has not been opened at all.  Callers retry after
the blocking commitment is opened or expires.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .field import DOMAIN_COMMITMENT, DOMAIN_SLASH_COMMIT, hash_to_field
from .merkle import MerkleTree, RegistryEvent


class RegistryError(Exception):
    pass


class WrongDepositError(RegistryError):
    pass


class AlreadyRegisteredError(RegistryError):
    pass


class NotAMemberError(RegistryError):
    pass


class NoMatchingCommitError(RegistryError):
    pass


class RevealNotEarliestError(RegistryError):
    """An earlier unexpired commitment may claim this key; retry later."""


class CommitExpiredError(RegistryError):
    pass


@dataclass(frozen=True)
class DepositPolicy:
    """Registration deposit v split into a burned fee f and slashable stake s."""

    v: int = 100
    f: int = 10
    s: int = 90
    reward_fraction: float = 1.0

    def __post_init__(self) -> None:
        if self.v != self.f + self.s:
            raise ValueError("deposit policy requires v == f + s")
        if self.f < 0 or self.s <= 0:
            raise ValueError("deposit policy requires f >= 0 and s > 0")
        if not 0 < self.reward_fraction <= 1:
            raise ValueError("reward_fraction must be in (0, 1]")

    @property
    def reward(self) -> int:
        return int(self.s * self.reward_fraction)


@dataclass(frozen=True)
class SlashCommit:
    commitment: int
    slasher: str
    position: int


@dataclass
class TxRecord:
    """One entry of the public transaction log."""

    position: int
    kind: str
    account: str | None
    status: str  # "ok" | "failed"
    error: str | None = None
    detail: dict = field(default_factory=dict)


def slash_commitment(sk: int, slasher: str, salt: bytes) -> int:
    """Commitment binding the slasher's account so observers cannot reuse it."""
    return hash_to_field(DOMAIN_SLASH_COMMIT, [sk, slasher.encode(), salt])


class Registry:
    def __init__(
        self,
        policy: DepositPolicy | None = None,
        tree_depth: int = 20,
        commit_window: int = 100,
    ):
        self.policy = policy or DepositPolicy()
        self.tree_depth = tree_depth
        # Commit lifetime measured in log positions.
        self.commit_window = commit_window

        self.members: list[int | None] = []
        self.deposits: list[int] = []
        self.fee_pool = 0
        self.event_log: list[RegistryEvent] = []
        self.slash_commits: list[SlashCommit] = []
        self.balances: dict[str, int] = {}
        self.tx_counter = 0
        self.tx_log: list[TxRecord] = []

        self._active: dict[int, int] = {}  # pk -> slot
        self._disclosed: dict[int, int] = {}  # commitment -> sk disclosed by a reveal
        self.total_paid_in = 0
        self.rewards_total = 0
        self.refunds_total = 0

    # -- transaction plumbing

    def _begin_tx(self, kind: str, account: str | None, **detail) -> TxRecord:
        record = TxRecord(
            position=self.tx_counter, kind=kind, account=account, status="ok", detail=detail
        )
        self.tx_counter += 1
        self.tx_log.append(record)
        return record

    @staticmethod
    def _fail(record: TxRecord, exc: RegistryError) -> RegistryError:
        record.status = "failed"
        record.error = type(exc).__name__
        return exc

    def _emit(self, event: RegistryEvent) -> None:
        self.event_log.append(event)

    # -- membership transactions

    def register(self, pk: int, amount: int, account: str | None = None) -> int:
        """Append pk at a fresh slot; deleted slots are never reused."""
        record = self._begin_tx("register", account, pk=pk)
        if amount != self.policy.v:
            raise self._fail(record, WrongDepositError(
                f"deposit must be exactly {self.policy.v}, got {amount}"
            ))
        if pk in self._active:
            raise self._fail(record, AlreadyRegisteredError(f"pk already registered: {pk:#x}"))
        slot = len(self.members)
        self.members.append(pk)
        self.deposits.append(self.policy.s)
        self.fee_pool += self.policy.f
        self.total_paid_in += amount
        self._active[pk] = slot
        self._emit(RegistryEvent.insert(len(self.event_log), slot, pk))
        record.detail["slot"] = slot
        return slot

    def withdraw(self, sk: int, account: str | None = None) -> int:
        """Return the stake s for an active member; the fee f stays burned."""
        record = self._begin_tx("withdraw", account)
        pk = hash_to_field(DOMAIN_COMMITMENT, [sk])
        slot = self._active.get(pk)
        if slot is None:
            raise self._fail(record, NotAMemberError("pk not an active member"))
        del self._active[pk]
        self.members[slot] = None
        refund = self.deposits[slot]
        self.deposits[slot] = 0
        self.refunds_total += refund
        self._emit(RegistryEvent.delete(len(self.event_log), slot))
        record.detail["slot"] = slot
        record.detail["refund"] = refund
        return refund

    # -- slashing

    def slash_commit(self, commitment: int, slasher: str) -> SlashCommit:
        """Store an opaque commitment; reveal arbitrates its meaning later."""
        record = self._begin_tx("slash_commit", slasher, commitment=commitment)
        entry = SlashCommit(commitment=commitment, slasher=slasher, position=record.position)
        self.slash_commits.append(entry)
        return entry

    def slash_reveal(self, sk: int, slasher: str, salt: bytes) -> int:
        """Open a commitment to sk; pays the reward iff this is the winning claim.

        The opening becomes public even when the reveal fails, so later
        arbitration (and copycat attackers) can see it.
        """
        record = self._begin_tx("slash_reveal", slasher, sk=sk)
        commitment = slash_commitment(sk, slasher, salt)
        self._disclosed[commitment] = sk

        own = [e for e in self.slash_commits
               if e.slasher == slasher and e.commitment == commitment]
        if not own:
            raise self._fail(record, NoMatchingCommitError("no commitment matches this opening"))
        claim = min(own, key=lambda e: e.position)
        if record.position - claim.position > self.commit_window:
            raise self._fail(record, CommitExpiredError(
                f"commitment at position {claim.position} expired"
            ))

        pk = hash_to_field(DOMAIN_COMMITMENT, [sk])
        slot = self._active.get(pk)
        if slot is None:
            raise self._fail(record, NotAMemberError("target already withdrawn or slashed"))

        for rival in self.slash_commits:
            if rival.position >= claim.position or rival.slasher == slasher:
                continue
            if record.position - rival.position > self.commit_window:
                continue  # expired, cannot claim anymore
            target = self._disclosed.get(rival.commitment)
            if target is None or target == sk:
                # Unopened rivals might target this key; opened ones that do, win.
                raise self._fail(record, RevealNotEarliestError(
                    f"earlier unexpired commitment at position {rival.position}"
                ))

        del self._active[pk]
        self.members[slot] = None
        stake = self.deposits[slot]
        self.deposits[slot] = 0
        reward = int(stake * self.policy.reward_fraction)
        self.balances[slasher] = self.balances.get(slasher, 0) + reward
        self.rewards_total += reward
        self.fee_pool += stake - reward
        self._emit(RegistryEvent.delete(len(self.event_log), slot))
        record.detail["slot"] = slot
        record.detail["reward"] = reward
        return reward

    # -- event feed and inspection

    def events_since(self, sequence: int) -> list[RegistryEvent]:
        if not 0 <= sequence <= len(self.event_log):
            raise ValueError(f"sequence {sequence} beyond log length {len(self.event_log)}")
        return self.event_log[sequence:]

    def tx_since(self, position: int) -> list[TxRecord]:
        return self.tx_log[position:]

    def oracle_root(self, depth: int | None = None) -> int:
        """Root of a fresh tree built from the full event log (sync oracle)."""
        tree = MerkleTree(depth or self.tree_depth)
        for event in self.event_log:
            tree.apply_event(event)
        return tree.root

    def conservation_totals(self) -> dict[str, int]:
        return {
            "total_paid_in": self.total_paid_in,
            "active_deposits": sum(self.deposits),
            "fee_pool": self.fee_pool,
            "rewards_total": self.rewards_total,
            "refunds_total": self.refunds_total,
        }

    def conservation_holds(self) -> bool:
        t = self.conservation_totals()
        outstanding = t["active_deposits"] + t["fee_pool"] + t["rewards_total"] + t["refunds_total"]
        return outstanding == t["total_paid_in"]

    def dump(self) -> str:
        """Stable structured-text state dump for inspection."""
        lines = ["members:"]
        for slot, pk in enumerate(self.members):
            label = "NIL" if pk is None else f"{pk:#066x}"
            lines.append(f"  {slot}: {label} deposit={self.deposits[slot]}")
        lines.append(f"fee_pool: {self.fee_pool}")
        lines.append("balances:")
        for account in sorted(self.balances):
            lines.append(f"  {account}: {self.balances[account]}")
        t = self.conservation_totals()
        lines.append(f"rewards_total: {t['rewards_total']}")
        lines.append(f"refunds_total: {t['refunds_total']}")
        lines.append(f"total_paid_in: {t['total_paid_in']}")
        lines.append(f"tx_counter: {self.tx_counter}")
        return "\n".join(lines) + "\n"
