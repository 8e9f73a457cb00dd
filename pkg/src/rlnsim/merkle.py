"""Off-chain identity-commitment Merkle tree.

Each peer rebuilds the membership tree locally by replaying the
registry's ordered insert/delete events.  Nodes are stored sparsely:
untouched subtrees fall back to precomputed all-empty defaults, so a
fresh deep tree costs O(depth) hashing and each update touches only the
leaf-to-root path.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

from .field import DOMAIN_COMMITMENT, FE_BYTES, P, fe_to_bytes, hash_to_field

NIL_LEAF = 0

MAX_DEPTH = 32


class DepthOutOfRangeError(Exception):
    pass


class IndexOutOfRangeError(Exception):
    pass


class SequenceGapError(Exception):
    """Events arrived out of order; the caller must re-sync from scratch."""


@dataclass(frozen=True)
class AuthPath:
    """Sibling hashes from leaf to root for one leaf position."""

    index: int
    siblings: tuple[int, ...]


@dataclass(frozen=True)
class RegistryEvent:
    sequence: int
    kind: str  # "insert" | "delete"
    index: int
    pk: int = NIL_LEAF

    @classmethod
    def insert(cls, sequence: int, index: int, pk: int) -> "RegistryEvent":
        return cls(sequence=sequence, kind="insert", index=index, pk=pk)

    @classmethod
    def delete(cls, sequence: int, index: int) -> "RegistryEvent":
        return cls(sequence=sequence, kind="delete", index=index)


def parent_hash(level: int, left: int, right: int) -> int:
    """Interior-node hash; the level byte separates leaf and interior domains."""
    return hash_to_field(DOMAIN_COMMITMENT, [bytes([level]), left, right])


class MerkleTree:
    """Fixed-depth tree over 2**depth leaves, NIL_LEAF when unset."""

    def __init__(self, depth: int):
        if not 1 <= depth <= MAX_DEPTH:
            raise DepthOutOfRangeError(f"depth must be in [1, {MAX_DEPTH}], got {depth}")
        self.depth = depth
        # zeros[l] is the hash of an all-empty subtree of height l.
        self.zeros = [NIL_LEAF]
        for level in range(1, depth + 1):
            self.zeros.append(parent_hash(level, self.zeros[-1], self.zeros[-1]))
        # levels[l] maps node index -> value, absent means all-empty default.
        self.levels: list[dict[int, int]] = [{} for _ in range(depth + 1)]
        self.next_sequence = 0

    @property
    def size(self) -> int:
        return 1 << self.depth

    @property
    def root(self) -> int:
        return self._node(self.depth, 0)

    def _node(self, level: int, index: int) -> int:
        return self.levels[level].get(index, self.zeros[level])

    def _check_index(self, index: int) -> None:
        if not 0 <= index < self.size:
            raise IndexOutOfRangeError(f"leaf index {index} out of range for depth {self.depth}")

    def leaf(self, index: int) -> int:
        self._check_index(index)
        return self._node(0, index)

    def occupied_leaves(self) -> list[tuple[int, int]]:
        """(index, value) pairs for every non-NIL leaf, ascending by index."""
        return sorted(self.levels[0].items())

    def set_leaf(self, index: int, value: int) -> None:
        """Write a leaf and recompute only the hashes on its path to the root."""
        self._check_index(index)
        if not 0 <= value < P:
            raise ValueError(f"leaf value out of field range: {value}")
        self._store(0, index, value)
        node = index
        for level in range(1, self.depth + 1):
            node >>= 1
            left = self._node(level - 1, node * 2)
            right = self._node(level - 1, node * 2 + 1)
            self._store(level, node, parent_hash(level, left, right))

    def _store(self, level: int, index: int, value: int) -> None:
        if value == self.zeros[level]:
            self.levels[level].pop(index, None)
        else:
            self.levels[level][index] = value

    def auth_path(self, index: int) -> AuthPath:
        self._check_index(index)
        siblings = []
        node = index
        for level in range(self.depth):
            siblings.append(self._node(level, node ^ 1))
            node >>= 1
        return AuthPath(index=index, siblings=tuple(siblings))

    def apply_event(self, event: RegistryEvent) -> None:
        """Replay one registry event; events must arrive gapless and in order."""
        if event.sequence != self.next_sequence:
            raise SequenceGapError(
                f"expected sequence {self.next_sequence}, got {event.sequence}"
            )
        if event.kind == "insert":
            self.set_leaf(event.index, event.pk)
        elif event.kind == "delete":
            self.set_leaf(event.index, NIL_LEAF)
        else:
            raise ValueError(f"unknown event kind: {event.kind!r}")
        self.next_sequence += 1

    # -- snapshot format: depth(1B) | next_sequence(8B) | count(8B) | count * (index(8B) | leaf(32B))

    def snapshot_bytes(self) -> bytes:
        out = io.BytesIO()
        out.write(bytes([self.depth]))
        out.write(self.next_sequence.to_bytes(8, "big"))
        occupied = self.occupied_leaves()
        out.write(len(occupied).to_bytes(8, "big"))
        for index, value in occupied:
            out.write(index.to_bytes(8, "big"))
            out.write(fe_to_bytes(value))
        return out.getvalue()

    @classmethod
    def from_snapshot(cls, data: bytes) -> "MerkleTree":
        buf = io.BytesIO(data)
        depth = buf.read(1)
        if len(depth) != 1:
            raise ValueError("truncated snapshot header")
        tree = cls(depth[0])
        tree.next_sequence = int.from_bytes(_read_exact(buf, 8), "big")
        count = int.from_bytes(_read_exact(buf, 8), "big")
        for _ in range(count):
            index = int.from_bytes(_read_exact(buf, 8), "big")
            value = int.from_bytes(_read_exact(buf, FE_BYTES), "big")
            tree.set_leaf(index, value)
        if buf.read(1):
            raise ValueError("trailing bytes after snapshot")
        return tree


def _read_exact(buf: io.BytesIO, n: int) -> bytes:
    data = buf.read(n)
    if len(data) != n:
        raise ValueError("truncated snapshot")
    return data


def verify_path(root: int, leaf: int, path: AuthPath) -> bool:
    """Recompute the leaf-to-root hashes and compare against the claimed root."""
    depth = len(path.siblings)
    if not 0 <= path.index < (1 << depth):
        return False
    node = leaf
    index = path.index
    for level, sibling in enumerate(path.siblings, start=1):
        if index & 1:
            node = parent_hash(level, sibling, node)
        else:
            node = parent_hash(level, node, sibling)
        index >>= 1
    return node == root
