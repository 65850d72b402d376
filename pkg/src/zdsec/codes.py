"""Instantaneous (prefix) codes, Huffman lengths and complete length profiles.

Bits are plain ``str`` objects over ``'0'``/``'1'`` throughout the package.
Symbols are the integers ``0..k-1``.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import AlphabetMismatch, NoCodewordPrefix
from .source_models import SourceModel


@dataclass(frozen=True)
class InstantaneousCode:
    """Prefix-free map ``symbol -> codeword`` (symbol = list index)."""

    codewords: tuple[str, ...]

    def __post_init__(self):
        cws = tuple(self.codewords)
        object.__setattr__(self, "codewords", cws)
        if not cws:
            raise ValueError("a code needs at least one codeword")
        for cw in cws:
            if not cw or set(cw) - {"0", "1"}:
                raise ValueError(f"invalid codeword {cw!r}")
        ordered = sorted(cws)
        for a, b in zip(ordered, ordered[1:]):
            if b.startswith(a):
                raise ValueError(f"not prefix-free: {a!r} is a prefix of {b!r}")
        object.__setattr__(self, "_lookup", {cw: s for s, cw in enumerate(cws)})

    def __len__(self):
        return len(self.codewords)

    def __getitem__(self, symbol: int) -> str:
        return self.codewords[symbol]

    @property
    def alphabet_size(self) -> int:
        return len(self.codewords)

    @property
    def lengths(self) -> tuple[int, ...]:
        return tuple(len(c) for c in self.codewords)

    @property
    def max_len(self) -> int:
        return max(self.lengths)

    @property
    def kraft_sum(self) -> float:
        return float(sum(Fraction(1, 2**n) for n in self.lengths))

    @property
    def is_complete(self) -> bool:
        return sum(Fraction(1, 2**n) for n in self.lengths) == 1

    def symbol_of(self, codeword: str) -> int | None:
        return self._lookup.get(codeword)

    def encode(self, symbols: Iterable[int]) -> str:
        return "".join(self.codewords[s] for s in symbols)

    def to_text(self) -> str:
        return "".join(f"{s}\t{cw}\n" for s, cw in enumerate(self.codewords))

    @classmethod
    def from_text(cls, text: str) -> InstantaneousCode:
        entries = {}
        for line in text.splitlines():
            if not line.strip():
                continue
            sym, cw = line.split("\t")
            entries[int(sym)] = cw.strip()
        if sorted(entries) != list(range(len(entries))):
            raise ValueError("symbols must be 0..k-1")
        return cls(tuple(entries[s] for s in range(len(entries))))


def _pmf(model) -> np.ndarray:
    return model.pmf if isinstance(model, SourceModel) else np.asarray(model, dtype=float)


def build_huffman(model) -> InstantaneousCode:
    """Huffman code for ``model`` (a :class:`SourceModel` or pmf vector).

    Deterministic: the two lowest-probability nodes merge first, ties go to
    the node whose lowest symbol index is smaller, and within a merge the
    node with the lower index takes bit ``0``. A one-symbol alphabet gets
    the codeword ``"0"`` since lengths are positive integers.
    """
    p = _pmf(model)
    k = p.size
    if k == 1:
        return InstantaneousCode(("0",))
    # heap entries: (prob, min symbol index, tree); tree is an int leaf or a pair
    heap = [(float(p[s]), s, s) for s in range(k)]
    heapq.heapify(heap)
    while len(heap) > 1:
        pa, ia, ta = heapq.heappop(heap)
        pb, ib, tb = heapq.heappop(heap)
        zero, one = (ta, tb) if ia < ib else (tb, ta)
        heapq.heappush(heap, (pa + pb, min(ia, ib), (zero, one)))
    codewords = [""] * k
    stack = [(heap[0][2], "")]
    while stack:
        tree, prefix = stack.pop()
        if isinstance(tree, tuple):
            stack.append((tree[0], prefix + "0"))
            stack.append((tree[1], prefix + "1"))
        else:
            codewords[tree] = prefix
    return InstantaneousCode(tuple(codewords))


def huffman_length(model) -> float:
    """L(X): expected Huffman codeword length."""
    code = build_huffman(model)
    return float(np.dot(_pmf(model), code.lengths))


def expected_length(code: InstantaneousCode, model) -> float:
    p = _pmf(model)
    if p.size != code.alphabet_size:
        raise AlphabetMismatch(
            f"code has {code.alphabet_size} symbols, model has {p.size}"
        )
    return float(np.dot(p, code.lengths))


def conditional_huffman_length(joint) -> float:
    """L(X|Y) = sum_y P(y) L(X|Y=y) for ``joint[x, y]``."""
    j = np.asarray(joint, dtype=np.float64)
    total = 0.0
    for y in range(j.shape[1]):
        py = j[:, y].sum()
        if py > 0:
            total += py * huffman_length(j[:, y] / py)
    return total


def enumerate_complete_profiles(alphabet_size: int) -> set[tuple[int, ...]]:
    """All length multisets (sorted tuples) with Kraft sum exactly 1.

    Lengths are bounded by ``alphabet_size - 1``, the depth of any full
    binary tree with that many leaves. A single symbol admits no complete
    profile (its shortest codeword leaves Kraft sum 1/2), so the result is
    empty for ``alphabet_size == 1``.
    """
    k = alphabet_size
    if k < 1:
        raise ValueError("alphabet_size must be >= 1")
    if k == 1:
        return set()
    top = k - 1
    out = set()

    def extend(prefix: list[int], budget: int, remaining: int):
        # budget: unused Kraft mass in units of 2**-top
        if remaining == 0:
            if budget == 0:
                out.add(tuple(prefix))
            return
        lo = prefix[-1] if prefix else 1
        for length in range(lo, top + 1):
            unit = 1 << (top - length)
            # every later codeword is at least as long, so costs at most `unit`
            if unit > budget or remaining * unit < budget:
                continue
            if remaining > budget:
                continue
            prefix.append(length)
            extend(prefix, budget - unit, remaining - 1)
            prefix.pop()

    extend([], 1 << top, k)
    return out


def canonical_code(lengths: Sequence[int]) -> InstantaneousCode:
    """Canonical prefix code: codewords assigned lexicographically by length.

    ``lengths[s]`` is the length for symbol ``s``; ties in length are broken
    by symbol index.
    """
    if sum(Fraction(1, 2**n) for n in lengths) > 1:
        raise ValueError(f"lengths {tuple(lengths)} violate Kraft's inequality")
    order = sorted(range(len(lengths)), key=lambda s: (lengths[s], s))
    codewords = [""] * len(lengths)
    value, prev = 0, lengths[order[0]]
    for i, s in enumerate(order):
        n = lengths[s]
        if i:
            value = (value + 1) << (n - prev)
        codewords[s] = format(value, f"0{n}b")
        prev = n
    return InstantaneousCode(tuple(codewords))


def code_for_profile(profile: Sequence[int], model) -> InstantaneousCode:
    """Best code with the given length multiset for ``model``.

    Probabilities in descending order get lengths in ascending order, which
    minimizes the expected length for a fixed profile.
    """
    p = _pmf(model)
    if len(profile) != p.size:
        raise AlphabetMismatch("profile and model differ in size")
    by_prob = sorted(range(p.size), key=lambda s: (-p[s], s))
    lengths = [0] * p.size
    for s, n in zip(by_prob, sorted(profile)):
        lengths[s] = n
    return canonical_code(lengths)


def parse_prefix(code: InstantaneousCode, bits: str, start: int = 0) -> tuple[int, int]:
    """Decode the codeword at ``bits[start:]``; returns (symbol, consumed)."""
    for n in range(1, min(code.max_len, len(bits) - start) + 1):
        s = code.symbol_of(bits[start:start + n])
        if s is not None:
            return s, n
    raise NoCodewordPrefix(f"no codeword is a prefix of {bits[start:start + code.max_len]!r}")


def decode_all(code: InstantaneousCode, bits: str) -> list[int]:
    out, pos = [], 0
    while pos < len(bits):
        s, n = parse_prefix(code, bits, pos)
        out.append(s)
        pos += n
    return out
