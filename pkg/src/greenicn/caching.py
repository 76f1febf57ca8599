"""Per-router content stores and the ALL / Cachedbit / NbSC caching strategies."""
from __future__ import annotations

import hashlib
from collections import OrderedDict
from dataclasses import dataclass
from functools import lru_cache
from typing import Hashable, Mapping, Sequence

import numpy as np

DEFAULT_CAPACITY = 4096  # chunks; 4 GB at 1 MB per chunk
DEFAULT_BITS_PER_ENTRY = 16
DEFAULT_HASHES = 4


class ContentStore:
    """Fixed-capacity chunk cache with LRU eviction."""

    def __init__(self, capacity: int, owner: Hashable = None):
        if capacity < 0:
            raise ValueError("capacity must be non-negative")
        self.capacity = capacity
        self.owner = owner
        self._entries: OrderedDict = OrderedDict()

    def __len__(self):
        return len(self._entries)

    def __contains__(self, chunk_id):
        return chunk_id in self._entries

    @property
    def entries(self) -> list:
        """Chunks from least to most recently used."""
        return list(self._entries)

    def lookup(self, chunk_id) -> bool:
        if chunk_id in self._entries:
            self._entries.move_to_end(chunk_id)
            return True
        return False

    def insert(self, chunk_id):
        """Insert or refresh ``chunk_id``; returns the evicted chunk, if any."""
        if self.capacity == 0:
            return None
        if chunk_id in self._entries:
            self._entries.move_to_end(chunk_id)
            return None
        victim = None
        if len(self._entries) >= self.capacity:
            victim, _ = self._entries.popitem(last=False)
        self._entries[chunk_id] = True
        return victim


def lru_lookup(store: ContentStore, chunk_id) -> bool:
    return store.lookup(chunk_id)


@dataclass
class ChunkPacket:
    chunk_id: Hashable
    path_length_n: int
    cached_bit: bool = False


def admit_all(store: ContentStore, packet: ChunkPacket) -> bool:
    store.insert(packet.chunk_id)
    return True


def admit_cachedbit(store: ContentStore, packet: ChunkPacket, rng) -> bool:
    """Cache with probability 1/n unless some upstream router already did."""
    if packet.path_length_n < 1:
        raise ValueError(f"malformed header: path length {packet.path_length_n}")
    if packet.chunk_id in store or packet.cached_bit:
        return False
    if rng.random() < 1.0 / packet.path_length_n:
        store.insert(packet.chunk_id)
        packet.cached_bit = True
        return True
    return False


# -- neighbour summaries ---------------------------------------------------

@lru_cache(maxsize=1 << 20)
def _bloom_positions(key: str, bits: int, k: int) -> tuple[int, ...]:
    digest = hashlib.blake2b(key.encode(), digest_size=16).digest()
    h1 = int.from_bytes(digest[:8], "little")
    h2 = int.from_bytes(digest[8:], "little") | 1
    return tuple((h1 + i * h2) % bits for i in range(k))


class BloomFilter:
    def __init__(self, bits: int, hash_count: int):
        if bits <= 0 or hash_count < 1:
            raise ValueError("bloom filter needs bits > 0 and at least one hash")
        self.bits = bits
        self.hash_count = hash_count
        self.array = np.zeros(bits, dtype=bool)

    def positions(self, key) -> tuple[int, ...]:
        return _bloom_positions(repr(key), self.bits, self.hash_count)

    def add(self, key):
        self.array[list(self.positions(key))] = True

    def __contains__(self, key) -> bool:
        arr = self.array
        return all(arr[p] for p in self.positions(key))


@dataclass
class NeighborSummary:
    owner: Hashable
    filter: BloomFilter
    epoch: int

    def __contains__(self, chunk_id) -> bool:
        return chunk_id in self.filter


def rebuild_summary(store: ContentStore, filter_bits: int | None = None, hash_count: int = DEFAULT_HASHES,
                    epoch: int = 0) -> NeighborSummary:
    bits = filter_bits if filter_bits is not None else max(1, DEFAULT_BITS_PER_ENTRY * store.capacity)
    bf = BloomFilter(bits, hash_count)
    idx = [p for chunk in store.entries for p in bf.positions(chunk)]
    if idx:
        bf.array[idx] = True
    return NeighborSummary(store.owner, bf, epoch)


def expected_false_positive_rate(n_entries: int, bits: int, hash_count: int) -> float:
    return (1.0 - np.exp(-hash_count * n_entries / bits)) ** hash_count


# -- strategies ------------------------------------------------------------

REPLY = "reply"
REDIRECT = "redirect"
FORWARD = "forward"


class Strategy:
    """Admission and cooperation policy shared by every router.

    ``admit`` runs at each router the reply passes on its way back to the
    client; ``respond`` decides what a router does with a request.
    """

    name = "none"
    cooperative = False
    greenest = False

    def admit(self, store: ContentStore, packet: ChunkPacket, rng) -> bool:
        return False

    def respond(self, store, chunk_id, summaries, exclude, green, rng):
        return (REPLY, None) if store.lookup(chunk_id) else (FORWARD, None)


class NoCaching(Strategy):
    def respond(self, store, chunk_id, summaries, exclude, green, rng):
        return (FORWARD, None)


class AllStrategy(Strategy):
    name = "all"

    def admit(self, store, packet, rng):
        return admit_all(store, packet)


class CachedbitStrategy(Strategy):
    name = "cachedbit"

    def admit(self, store, packet, rng):
        return admit_cachedbit(store, packet, rng)


class NbscStrategy(CachedbitStrategy):
    name = "nbsc"
    cooperative = True

    def respond(self, store, chunk_id, summaries, exclude, green, rng):
        return nbsc_respond(store, chunk_id, summaries, rng, exclude=exclude,
                            green=green if self.greenest else None)


class GreenNbscStrategy(NbscStrategy):
    name = "nbsc-green"
    greenest = True


STRATEGIES = {cls.name: cls for cls in (NoCaching, AllStrategy, CachedbitStrategy, NbscStrategy, GreenNbscStrategy)}


def make_strategy(name: str) -> Strategy:
    try:
        return STRATEGIES[name]()
    except KeyError:
        raise ValueError(f"unknown strategy {name!r}, choose from {sorted(STRATEGIES)}") from None


def neighbor_matches(chunk_id, summaries: Sequence[NeighborSummary], exclude=()) -> list:
    return [s.owner for s in summaries if s.owner not in exclude and chunk_id in s]


def nbsc_respond(store: ContentStore, chunk_id, summaries: Sequence[NeighborSummary], rng,
                 exclude=(), green: Mapping | None = None):
    """Reply on a local hit, else redirect to a neighbour whose summary claims the chunk.

    Among several matching neighbours one is drawn uniformly, or, when
    ``green`` ratios are given, the greenest one (ties to the first listed).
    Returns ``(action, neighbour)``.
    """
    if store.lookup(chunk_id):
        return (REPLY, None)
    matches = neighbor_matches(chunk_id, summaries, exclude)
    if not matches:
        return (FORWARD, None)
    if green is not None:
        best = max(green[m] for m in matches)
        return (REDIRECT, next(m for m in matches if green[m] == best))
    if len(matches) == 1:
        return (REDIRECT, matches[0])
    return (REDIRECT, matches[int(rng.integers(len(matches)))])
