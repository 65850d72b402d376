"""Toy Slepian-Wolf coding by seeded random binning.

The sequence is cut into sub-blocks of ``block_len`` symbols and each
sub-block is hashed into ``ceil(block_len * rate)`` bits with a tabulation
hash (XOR of one random word per (position, symbol)). The bin of the whole
sequence is the tuple of sub-block bins, so the maximum-likelihood sequence
in that bin is the concatenation of per-sub-block ML sequences. Each of
those is found by best-first enumeration of candidates in decreasing
P(s | y), stopping at the first one that lands in the announced bin.

When the bit budget can index every sub-block sequence, the bin is the
sequence itself (identity binning) and decoding is exact.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import SWDecodeFailure
from .source_models import conditional_entropy

DEFAULT_BLOCK_LEN = 20
DEFAULT_CAP = 1 << 16


@dataclass(frozen=True)
class SWResult:
    bins: tuple[int, ...]
    decoded: list[int]
    error: bool
    failed_blocks: int


class SlepianWolfCode:
    """Encoder/decoder pair for messages S with decoder side information Y.

    Parameters
    ----------
    joint_sy : array, shape (|S|, |Y|)
        Joint pmf of (S, Y), known to the decoder.
    rate : float
        Bin bits per symbol before rounding up per sub-block.
    seed : int
        Seeds the hash tables; encoder and decoder must agree on it.
    block_len : int
        Sub-block length.
    cap : int
        Candidates examined per sub-block before declaring failure.
    """

    def __init__(self, joint_sy, rate: float, seed: int, block_len: int = DEFAULT_BLOCK_LEN,
                 cap: int = DEFAULT_CAP):
        j = np.asarray(joint_sy, dtype=np.float64)
        if rate < 0:
            raise ValueError("rate must be >= 0")
        if block_len < 1:
            raise ValueError("block_len must be >= 1")
        self.joint = j
        self.n_messages = j.shape[0]
        self.rate = float(rate)
        self.seed = int(seed)
        self.block_len = int(block_len)
        self.cap = int(cap)
        py = j.sum(axis=0)
        with np.errstate(invalid="ignore", divide="ignore"):
            cond = np.where(py > 0, j / py, 1.0 / self.n_messages)
        self._cond = cond  # P(s | y), columns indexed by y
        self._tables: dict[int, tuple[bool, int, list]] = {}

    @property
    def conditional_entropy(self) -> float:
        return conditional_entropy(self.joint)

    def _blocks(self, n: int):
        return [(a, min(n, a + self.block_len)) for a in range(0, n, self.block_len)]

    def _layout(self, index: int, length: int):
        """(identity?, width in bits, hash table) for sub-block ``index``."""
        key = (index, length)
        if key not in self._tables:
            bits = math.ceil(length * self.rate - 1e-9)
            full = self.n_messages**length
            if full <= 2**bits:
                self._tables[key] = (True, (full - 1).bit_length(), [])
            else:
                rng = np.random.default_rng([self.seed, index, length])
                nbytes = (bits + 7) // 8
                mask = (1 << bits) - 1
                table = [
                    [int.from_bytes(rng.bytes(nbytes), "big") & mask for _ in range(self.n_messages)]
                    for _ in range(length)
                ]
                self._tables[key] = (False, bits, table)
        return self._tables[key]

    def widths(self, n: int) -> list[int]:
        return [self._layout(i, b - a)[1] for i, (a, b) in enumerate(self._blocks(n))]

    def n_bits(self, n: int) -> int:
        return sum(self.widths(n))

    def encode(self, s_seq: Sequence[int]) -> tuple[int, ...]:
        bins = []
        for i, (a, b) in enumerate(self._blocks(len(s_seq))):
            identity, _, table = self._layout(i, b - a)
            if identity:
                v = 0
                for s in s_seq[a:b]:
                    v = v * self.n_messages + int(s)
            else:
                v = 0
                for pos, s in enumerate(s_seq[a:b]):
                    v ^= table[pos][int(s)]
            bins.append(v)
        return tuple(bins)

    def bins_to_bits(self, bins: Sequence[int], n: int) -> str:
        return "".join(format(v, f"0{w}b") if w else "" for v, w in zip(bins, self.widths(n)))

    def bits_to_bins(self, bits: str, n: int) -> tuple[int, ...]:
        out, pos = [], 0
        for w in self.widths(n):
            out.append(int(bits[pos:pos + w], 2) if w else 0)
            pos += w
        if pos != len(bits):
            raise ValueError(f"expected {pos} bin bits, got {len(bits)}")
        return tuple(out)

    def decode(self, bins: Sequence[int], y_seq: Sequence[int]) -> tuple[list[int], list[bool]]:
        """ML sequence in the announced bin; per-sub-block failure flags.

        A failed sub-block (cap hit or bin exhausted) falls back to the
        symbol-wise ML guess.
        """
        n = len(y_seq)
        out, failed = [], []
        for i, ((a, b), target) in enumerate(zip(self._blocks(n), bins)):
            identity, _, table = self._layout(i, b - a)
            if identity:
                digits = []
                v = target
                for _ in range(b - a):
                    v, r = divmod(v, self.n_messages)
                    digits.append(r)
                out.extend(reversed(digits))
                failed.append(False)
                continue
            block, ok = self._search(target, y_seq[a:b], table)
            out.extend(block)
            failed.append(not ok)
        return out, failed

    def _search(self, target: int, ys: Sequence[int], table) -> tuple[list[int], bool]:
        options, deltas, base = [], [], []
        for y in ys:
            col = self._cond[:, int(y)]
            order = sorted((s for s in range(self.n_messages) if col[s] > 0), key=lambda s: (-col[s], s))
            top = math.log(col[order[0]])
            options.append(order)
            deltas.append([top - math.log(col[s]) for s in order])
            base.append(order[0])
        h0 = 0
        for pos, s in enumerate(base):
            h0 ^= table[pos][s]
        if h0 == target:
            return base, True
        # positions with an alternative, cheapest first alternative first
        perm = sorted((p for p in range(len(ys)) if len(options[p]) > 1), key=lambda p: (deltas[p][1], p))
        if not perm:
            return base, False

        def flip(h, j, r_from, r_to):
            p = perm[j]
            return h ^ table[p][options[p][r_from]] ^ table[p][options[p][r_to]]

        def d(j, r):
            return deltas[perm[j]][r]

        heap = [(d(0, 1), 0, 0, 1, ((0, 1),), flip(h0, 0, 0, 1))]
        counter, popped = 1, 0
        while heap:
            cost, _, j, r, changes, h = heapq.heappop(heap)
            popped += 1
            if h == target:
                cand = list(base)
                for jj, rr in changes:
                    cand[perm[jj]] = options[perm[jj]][rr]
                return cand, True
            if popped >= self.cap:
                break
            succ = []
            if r + 1 < len(options[perm[j]]):
                succ.append((cost + d(j, r + 1) - d(j, r), j, r + 1,
                             changes[:-1] + ((j, r + 1),), flip(h, j, r, r + 1)))
            if j + 1 < len(perm):
                succ.append((cost + d(j + 1, 1), j + 1, 1,
                             changes + ((j + 1, 1),), flip(h, j + 1, 0, 1)))
                if r == 1:
                    succ.append((cost - d(j, 1) + d(j + 1, 1), j + 1, 1,
                                 changes[:-1] + ((j + 1, 1),), flip(flip(h, j, 1, 0), j + 1, 0, 1)))
            for c, jj, rr, ch, hh in succ:
                heapq.heappush(heap, (c, counter, jj, rr, ch, hh))
                counter += 1
        return base, False

    def decode_strict(self, bins, y_seq) -> list[int]:
        decoded, failed = self.decode(bins, y_seq)
        if any(failed):
            raise SWDecodeFailure(f"{sum(failed)} of {len(failed)} sub-blocks not decoded")
        return decoded


def slepian_wolf_binning(
    s_seq: Sequence[int],
    y_seq: Sequence[int],
    sw_rate: float,
    seed: int,
    joint_sy,
    block_len: int = DEFAULT_BLOCK_LEN,
    cap: int = DEFAULT_CAP,
) -> SWResult:
    """Bin ``s_seq``, decode with ``y_seq``, and report whether decoding erred."""
    code = SlepianWolfCode(joint_sy, sw_rate, seed, block_len, cap)
    bins = code.encode(s_seq)
    decoded, failed = code.decode(bins, y_seq)
    return SWResult(
        bins=bins,
        decoded=decoded,
        error=list(decoded) != [int(s) for s in s_seq],
        failed_blocks=sum(failed),
    )
