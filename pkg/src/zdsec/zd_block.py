"""Perfectly secret constant-length block scheme (Eve can parse stages).

Each stage emits ``block_len`` bits: the codeword of the current symbol
XORed with fresh key bits, then private random padding up to the block
length. Bob XORs key bits one at a time until a codeword appears and
ignores the rest of the block.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .codes import (
    InstantaneousCode,
    build_huffman,
    code_for_profile,
    enumerate_complete_profiles,
    huffman_length,
)
from .envelope import Envelope, lower_convex_envelope
from .errors import Desync
from .keystream import FixedBits, KeyStream, PrivateRandomness, xor_bits
from .source_models import Distribution, SourceModel


def encode_block(
    code: InstantaneousCode,
    x: int,
    key: KeyStream,
    priv: PrivateRandomness,
    block_len: int | None = None,
    pad: str = "random",
) -> str:
    """One stage of the block encoder.

    ``pad="zeros"`` builds the broken variant that pads with zeros; it
    exists only so the secrecy oracle has something to catch.
    """
    if block_len is None:
        block_len = code.max_len
    cw = code[x]
    if len(cw) > block_len:
        raise ValueError(f"codeword of length {len(cw)} does not fit a {block_len}-bit block")
    body = xor_bits(cw, key.next_bits(len(cw)))
    fill = block_len - len(cw)
    if pad == "random":
        tail = priv.next_bits(fill)
    elif pad == "zeros":
        tail = "0" * fill
    else:
        raise ValueError(f"unknown pad mode {pad!r}")
    return body + tail


def decode_block(code: InstantaneousCode, block: str, key: KeyStream) -> int:
    """Inverse of :func:`encode_block`; consumes exactly l(x) key bits."""
    plain = []
    for i, b in enumerate(block):
        plain.append("1" if b != key.next_bits(1) else "0")
        s = code.symbol_of("".join(plain))
        if s is not None:
            return s
        if i + 1 >= code.max_len:
            break
    raise Desync(f"no codeword within {len(block)}-bit block {block!r}")


def timeshare_schedule(fraction: float, n: int) -> list[int]:
    """Deterministic 0/1 pattern with ``1`` at a long-run rate of ``fraction``.

    Stage t uses the second code iff floor((t+1)f) > floor(t f), so after n
    stages exactly floor(n f) stages used it.
    """
    if not 0.0 <= fraction <= 1.0:
        raise ValueError("fraction must be in [0, 1]")
    return [math.floor((t + 1) * fraction + 1e-12) - math.floor(t * fraction + 1e-12) for t in range(n)]


@dataclass
class BlockTrace:
    blocks: list[str]
    key_bits: int
    coding_bits: int
    n: int

    @property
    def key_rate(self) -> float:
        return self.key_bits / self.n if self.n else 0.0

    @property
    def coding_rate(self) -> float:
        return self.coding_bits / self.n if self.n else 0.0


def encode_sequence(
    codes: InstantaneousCode | Sequence[InstantaneousCode],
    x_seq: Sequence[int],
    key: KeyStream,
    priv: PrivateRandomness,
    schedule: Sequence[int] | None = None,
) -> BlockTrace:
    """Run the block encoder over ``x_seq``; ``schedule[t]`` picks the code."""
    if isinstance(codes, InstantaneousCode):
        codes = [codes]
    blocks = []
    start = key.consumed_bits
    for t, x in enumerate(x_seq):
        code = codes[schedule[t] if schedule is not None else 0]
        blocks.append(encode_block(code, int(x), key, priv))
        key.end_stage()
    return BlockTrace(
        blocks=blocks,
        key_bits=key.consumed_bits - start,
        coding_bits=sum(map(len, blocks)),
        n=len(blocks),
    )


def decode_sequence(
    codes: InstantaneousCode | Sequence[InstantaneousCode],
    blocks: Sequence[str],
    key: KeyStream,
    schedule: Sequence[int] | None = None,
) -> list[int]:
    if isinstance(codes, InstantaneousCode):
        codes = [codes]
    out = []
    for t, block in enumerate(blocks):
        out.append(decode_block(codes[schedule[t] if schedule is not None else 0], block, key))
        key.end_stage()
    return out


def _all_bits(n: int):
    return ("".join(bits) for bits in itertools.product("01", repeat=n))


def block_channel(code: InstantaneousCode, pad: str = "random") -> np.ndarray:
    """Exact P(block | x) by enumerating every key and pad bit pattern.

    Rows are symbols, columns are blocks in lexicographic order.
    """
    L = code.max_len
    index = {b: i for i, b in enumerate(_all_bits(L))}
    chan = np.zeros((code.alphabet_size, 2**L))
    for x in range(code.alphabet_size):
        l = len(code[x])
        for kbits in _all_bits(l):
            for vbits in _all_bits(L - l):
                z = encode_block(code, x, FixedBits(kbits), FixedBits(vbits), pad=pad)
                chan[x, index[z]] += 2.0 ** -(l + (L - l))
    return chan


def block_distribution(code: InstantaneousCode, model: SourceModel, pad: str = "random") -> Distribution:
    """Exact distribution of one emitted block."""
    probs = model.pmf @ block_channel(code, pad)
    return Distribution(tuple(_all_bits(code.max_len)), probs)


def joint_block_distribution(code: InstantaneousCode, model: SourceModel, pad: str = "random") -> np.ndarray:
    """Joint P(x, block) indexed ``[x, block]``."""
    return model.pmf[:, None] * block_channel(code, pad)


def total_variation(p, q) -> float:
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())


def independence_tv(joint: np.ndarray) -> float:
    """TV distance between a joint matrix and the product of its marginals."""
    return total_variation(joint, np.outer(joint.sum(axis=1), joint.sum(axis=0)))


def multistage_joint(
    code: InstantaneousCode, model: SourceModel, stages: int = 2, pad: str = "random"
) -> tuple[np.ndarray, list, list]:
    """Exact joint P(x^T, z^T) of the running encoder over ``stages`` stages.

    Enumerates the whole key stream (enough bits for the longest case) and
    every private pad, and drives the real encoder with them, so key
    offsets that depend on earlier symbols are modelled exactly.
    """
    L, k = code.max_len, model.alphabet_size
    xs = list(itertools.product(range(k), repeat=stages))
    zs = list(itertools.product(list(_all_bits(L)), repeat=stages))
    zi = {z: i for i, z in enumerate(zs)}
    joint = np.zeros((len(xs), len(zs)))
    w = 2.0 ** -(2 * stages * L)
    for a, xseq in enumerate(xs):
        px = math.prod(model.pmf[x] for x in xseq)
        if px == 0:
            continue
        for ubits in _all_bits(stages * L):
            for vbits in _all_bits(stages * L):
                key, priv = FixedBits(ubits), FixedBits(vbits)
                z = tuple(encode_block(code, x, key, priv, pad=pad) for x in xseq)
                joint[a, zi[z]] += px * w
    return joint, xs, zs


@dataclass(frozen=True)
class RegionPoint:
    profile: tuple[int, ...]
    R: float
    R_k: float
    on_envelope: bool = False


def region_points(model: SourceModel) -> tuple[list[RegionPoint], Envelope]:
    """One (R, R_k) point per complete length profile, plus their envelope.

    R is the block length (longest codeword), R_k the expected codeword
    length with the most probable symbols on the shortest codewords.
    """
    if model.alphabet_size < 2:
        raise ValueError("region needs an alphabet of at least 2 symbols")
    raw = []
    for profile in sorted(enumerate_complete_profiles(model.alphabet_size)):
        code = code_for_profile(profile, model)
        raw.append((profile, float(max(profile)), float(np.dot(model.pmf, code.lengths))))
    env = lower_convex_envelope([(r, rk) for _, r, rk in raw])
    points = [
        RegionPoint(p, r, rk, env.contains_on_boundary((r, rk))) for p, r, rk in raw
    ]
    return points, env


def huffman_block_point(model: SourceModel) -> RegionPoint:
    code = build_huffman(model)
    return RegionPoint(tuple(sorted(code.lengths)), float(code.max_len), huffman_length(model))
