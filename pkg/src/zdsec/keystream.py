"""Seeded bit sources: the shared key U and Alice's private randomness V.

Bits come from BLAKE2b in counter mode keyed by the seed, with a distinct
personalization string per stream kind, so a key stream and a private
stream never share output even under the same seed.
"""

from __future__ import annotations

import hashlib

_BLOCK_BYTES = 64
_BLOCK_BITS = 8 * _BLOCK_BYTES


def xor_bits(a: str, b: str) -> str:
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} vs {len(b)}")
    if not a:
        return ""
    return format(int(a, 2) ^ int(b, 2), f"0{len(a)}b")


class _CounterBits:
    _domain = b""

    def __init__(self, seed: int):
        self.seed = int(seed)
        self.consumed_bits = 0
        self._key = self.seed.to_bytes(32, "big", signed=True)
        self._counter = 0
        self._buf = ""
        self._pos = 0

    def _refill(self, need: int):
        chunks = [self._buf[self._pos:]]
        have = len(chunks[0])
        while have < need:
            h = hashlib.blake2b(
                self._counter.to_bytes(16, "big"),
                key=self._key,
                person=self._domain,
                digest_size=_BLOCK_BYTES,
            )
            self._counter += 1
            chunks.append(format(int.from_bytes(h.digest(), "big"), f"0{_BLOCK_BITS}b"))
            have += _BLOCK_BITS
        self._buf = "".join(chunks)
        self._pos = 0

    def next_bits(self, n: int) -> str:
        """Return ``n`` fresh bits; never re-reads a consumed position."""
        if n < 0:
            raise ValueError("n must be >= 0")
        if len(self._buf) - self._pos < n:
            self._refill(n)
        out = self._buf[self._pos:self._pos + n]
        self._pos += n
        self.consumed_bits += n
        return out

    def replica(self):
        """A fresh stream with the same seed (e.g. Bob's copy of the key)."""
        return type(self)(self.seed)


class KeyStream(_CounterBits):
    """Shared secret key bits with per-stage consumption accounting.

    Bits drawn since the last :meth:`end_stage` are charged to the current
    stage; ``per_stage_consumption`` holds l(K_t) for closed stages.
    """

    _domain = b"zdsec-key"

    def __init__(self, seed: int):
        super().__init__(seed)
        self.per_stage_consumption: list[int] = []
        self._stage_start = 0

    def end_stage(self) -> int:
        used = self.consumed_bits - self._stage_start
        self.per_stage_consumption.append(used)
        self._stage_start = self.consumed_bits
        return used

    @property
    def n_stages(self) -> int:
        return len(self.per_stage_consumption)


class PrivateRandomness(_CounterBits):
    """Alice's private random bits V_t; Bob and Eve never see them."""

    _domain = b"zdsec-private"


class FixedBits(KeyStream):
    """A key/private stream that replays given bits, for worked examples.

    Reading past the end raises ``IndexError``.
    """

    def __init__(self, bits: str):
        super().__init__(0)
        self.bits = bits

    def next_bits(self, n: int) -> str:
        if n < 0:
            raise ValueError("n must be >= 0")
        if self.consumed_bits + n > len(self.bits):
            raise IndexError("fixed bit source exhausted")
        out = self.bits[self.consumed_bits:self.consumed_bits + n]
        self.consumed_bits += n
        return out

    def replica(self):
        return FixedBits(self.bits)


def key_rate(stream: KeyStream, n_stages: int | None = None) -> float:
    """Key bits per source symbol: sum of l(K_t) over ``n_stages``."""
    if n_stages is None:
        n_stages = stream.n_stages
    if n_stages <= 0:
        raise ValueError("key rate needs at least one stage")
    return sum(stream.per_stage_consumption) / n_stages
