"""Separation schemes for causal coding with secrecy.

Quantize causally (time-sharing at most two scalar quantizers), compress
the messages losslessly (Huffman over m-tuples, or Slepian-Wolf binning
when Bob has side information), then one-time-pad the first
n * (h - H(X|W) + r(D)) bits of the result.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .adversary import CipherSystem
from .binning import DEFAULT_BLOCK_LEN, DEFAULT_CAP, SlepianWolfCode
from .causal_rd import (
    DEFAULT_LIMIT,
    Quantizer,
    SIQuantizerPair,
    rc_curve,
    rc_si_curve,
    _message_joint,
)
from .codes import build_huffman
from .errors import Desync, InfeasibleTarget, NoCodewordPrefix
from .keystream import FixedBits, KeyStream, xor_bits
from .source_models import (
    JointSourceModel,
    SourceModel,
    conditional_entropy,
    entropy,
    sample,
    sample_channel,
)


def _px(source) -> SourceModel:
    return source.px if isinstance(source, JointSourceModel) else source


def eve_entropy(source) -> float:
    """H(X|W), or H(X) when there is no side information."""
    if isinstance(source, JointSourceModel):
        return conditional_entropy(source.joint_xw())
    return entropy(source)


@dataclass(frozen=True)
class SeparationScheme:
    """Quantizers, time-share weight, entropy coder and encryption budget.

    ``lam`` is the fraction of symbols (a prefix of the sequence) handled by
    ``quantizers[0]``; the rest use ``quantizers[-1]``. ``key_rate`` is the
    number of padded bits per source symbol.
    """

    source: SourceModel | JointSourceModel
    quantizers: tuple
    lam: float = 1.0
    m: int = 8
    key_rate: float = 0.0
    sw_margin: float = 0.1
    sw_block_len: int = DEFAULT_BLOCK_LEN
    sw_cap: int = DEFAULT_CAP
    sw_seed: int = 0
    _coders: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if not 1 <= len(self.quantizers) <= 2:
            raise ValueError("one or two quantizers")
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError("lam must be in [0, 1]")
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.side_info and not isinstance(self.source, JointSourceModel):
            raise ValueError("SI quantizers need a joint source model")

    @property
    def side_info(self) -> bool:
        return isinstance(self.quantizers[0], SIQuantizerPair)

    def schedule(self, n: int) -> list[int]:
        if len(self.quantizers) == 1:
            return [0] * n
        cut = math.floor(self.lam * n + 1e-9)
        return [0] * cut + [1] * (n - cut)

    def key_bits(self, n: int, coded_bits: int) -> int:
        return min(math.ceil(n * self.key_rate - 1e-9), coded_bits)

    def message(self, q: int, x: int) -> int:
        quant = self.quantizers[q]
        return quant.f[x] if self.side_info else quant.map[x]

    def message_pmf(self, q: int) -> np.ndarray:
        quant = self.quantizers[q]
        fmap = quant.f if self.side_info else quant.map
        out = np.zeros(max(fmap) + 1)
        np.add.at(out, list(fmap), _px(self.source).pmf)
        return out

    def tuple_coder(self, pattern: tuple[int, ...]) -> TupleCoder:
        if pattern not in self._coders:
            self._coders[pattern] = TupleCoder([self.message_pmf(q) for q in pattern])
        return self._coders[pattern]

    def sw_code(self, segment: int, q: int) -> SlepianWolfCode:
        key = ("sw", segment, q)
        if key not in self._coders:
            quant = self.quantizers[q]
            joint_sy = _message_joint(self.source.joint_xy(), quant.f, quant.n_messages)
            rate = conditional_entropy(joint_sy) + self.sw_margin
            self._coders[key] = SlepianWolfCode(
                joint_sy, rate, seed=self.sw_seed * 1000 + segment,
                block_len=self.sw_block_len, cap=self.sw_cap,
            )
        return self._coders[key]


class TupleCoder:
    """Huffman code over the realizable m-tuples of independent messages.

    A tuple with a single realizable value carries no information and is
    coded with zero bits; this is block coding, so the positive-length
    convention of instantaneous codes does not apply.
    """

    def __init__(self, pmfs: Sequence[np.ndarray]):
        supports = [[s for s in range(len(p)) if p[s] > 0] for p in pmfs]
        self.tuples = list(itertools.product(*supports))
        self.index = {t: i for i, t in enumerate(self.tuples)}
        probs = np.array([math.prod(p[s] for p, s in zip(pmfs, t)) for t in self.tuples])
        self.probs = probs / probs.sum()
        self.code = build_huffman(self.probs) if len(self.tuples) > 1 else None

    def encode(self, tup: tuple[int, ...]) -> str:
        if self.code is None:
            return ""
        return self.code[self.index[tup]]

    def decode(self, bits: str, pos: int) -> tuple[tuple[int, ...], int]:
        if self.code is None:
            return self.tuples[0], 0
        plain = ""
        while len(plain) < self.code.max_len and pos + len(plain) < len(bits):
            plain += bits[pos + len(plain)]
            s = self.code.symbol_of(plain)
            if s is not None:
                return self.tuples[s], len(plain)
        raise NoCodewordPrefix(f"no tuple codeword at bit {pos}")

    def expected_bits(self) -> float:
        if self.code is None:
            return 0.0
        return float(np.dot(self.probs, self.code.lengths))


@dataclass
class SeparationOutput:
    z: str
    messages: list[int]
    coded_bits: int
    key_bits: int
    n: int


def _segments(schedule: Sequence[int]) -> list[tuple[int, int, int]]:
    """Maximal runs (start, stop, quantizer) of the schedule."""
    out = []
    for q, grp in itertools.groupby(enumerate(schedule), key=lambda t: t[1]):
        idx = [i for i, _ in grp]
        out.append((idx[0], idx[-1] + 1, q))
    return out


def _lossless_encode(scheme: SeparationScheme, messages: list[int], sched: list[int]) -> str:
    n = len(messages)
    if scheme.side_info:
        parts = []
        for seg, (a, b, q) in enumerate(_segments(sched)):
            sw = scheme.sw_code(seg, q)
            parts.append(sw.bins_to_bits(sw.encode(messages[a:b]), b - a))
        return "".join(parts)
    if n % scheme.m:
        raise ValueError(f"n={n} is not a multiple of m={scheme.m}")
    parts = []
    for a in range(0, n, scheme.m):
        pattern = tuple(sched[a:a + scheme.m])
        parts.append(scheme.tuple_coder(pattern).encode(tuple(messages[a:a + scheme.m])))
    return "".join(parts)


def encode_separation(scheme: SeparationScheme, x_seq: Sequence[int], key: KeyStream) -> SeparationOutput:
    n = len(x_seq)
    sched = scheme.schedule(n)
    messages = [scheme.message(q, int(x)) for q, x in zip(sched, x_seq)]
    b = _lossless_encode(scheme, messages, sched)
    nk = scheme.key_bits(n, len(b))
    z = xor_bits(b[:nk], key.next_bits(nk)) + b[nk:]
    return SeparationOutput(z=z, messages=messages, coded_bits=len(b), key_bits=nk, n=n)


def decode_messages(
    scheme: SeparationScheme, z: str, key: KeyStream, n: int, y_seq: Sequence[int] | None = None
) -> tuple[list[int], list[bool]]:
    """Recover S^n; the flags mark Slepian-Wolf sub-blocks that failed."""
    nk = scheme.key_bits(n, len(z))
    b = xor_bits(z[:nk], key.next_bits(nk)) + z[nk:]
    sched = scheme.schedule(n)
    if scheme.side_info:
        if y_seq is None or len(y_seq) != n:
            raise ValueError("side-information decoding needs y_seq of length n")
        messages, flags, pos = [], [], 0
        for seg, (a, c, q) in enumerate(_segments(sched)):
            sw = scheme.sw_code(seg, q)
            width = sw.n_bits(c - a)
            bins = sw.bits_to_bins(b[pos:pos + width], c - a)
            pos += width
            dec, failed = sw.decode(bins, y_seq[a:c])
            messages.extend(dec)
            flags.extend(failed)
        return messages, flags
    messages, pos = [], 0
    for a in range(0, n, scheme.m):
        tup, used = scheme.tuple_coder(tuple(sched[a:a + scheme.m])).decode(b, pos)
        messages.extend(tup)
        pos += used
    if pos != len(b):
        raise Desync(f"{len(b) - pos} trailing bits after decoding {n} symbols")
    return messages, []


def reproduce(scheme: SeparationScheme, messages: Sequence[int], y_seq: Sequence[int] | None = None) -> list[int]:
    sched = scheme.schedule(len(messages))
    if not scheme.side_info:
        return list(messages)
    return [scheme.quantizers[q].reproduce(s, int(y)) for q, s, y in zip(sched, messages, y_seq)]


def decode_separation(
    scheme: SeparationScheme,
    z: str,
    key: KeyStream,
    n: int,
    y_seq: Sequence[int] | None = None,
    strict: bool = True,
) -> list[int]:
    """Reproduction sequence; raises SWDecodeFailure on a failed bin when strict."""
    from .errors import SWDecodeFailure

    messages, flags = decode_messages(scheme, z, key, n, y_seq)
    if strict and any(flags):
        raise SWDecodeFailure(f"{sum(flags)} Slepian-Wolf sub-blocks failed")
    return reproduce(scheme, messages, y_seq)


def equivocation_bound(source, coded_bits: int, key_bits: int, n: int) -> float:
    """H(X|W) - coded_bits/n + key_bits/n, the per-symbol equivocation guarantee.

    Uses H(Z | X^n) = H(K) for a fresh pad and H(Z) <= l(Z). For a
    variable-length Z the second step is off by at most H(l(Z)) bits, which
    is O(log n), so this is a lower bound up to H(l(Z))/n and exact when the
    coded length is fixed.
    """
    return float(eve_entropy(source) - coded_bits / n + key_bits / n)


def design_separation(
    source: SourceModel | JointSourceModel,
    distortion,
    target_D: float,
    target_h: float,
    m: int = 8,
    sw_margin: float = 0.1,
    sw_block_len: int = DEFAULT_BLOCK_LEN,
    sw_cap: int = DEFAULT_CAP,
    sw_seed: int = 0,
    limit: int = DEFAULT_LIMIT,
    tol: float = 1e-12,
) -> SeparationScheme:
    """Pick the envelope quantizers for ``target_D`` and the pad length for ``target_h``.

    A :class:`JointSourceModel` selects the side-information scheme.
    """
    side_info = isinstance(source, JointSourceModel)
    curve = rc_si_curve(source, distortion, limit) if side_info else rc_curve(source, distortion, limit)
    cap = eve_entropy(source)
    if target_D < curve.d_min - tol:
        raise InfeasibleTarget(
            f"target D={target_D:g} is below D_min={curve.d_min:g}; no quantizer reaches it"
        )
    if target_h > cap + tol:
        name = "H(X|W)" if side_info else "H(X)"
        raise InfeasibleTarget(f"target h={target_h:g} exceeds {name}={cap:.6f} (requires h <= {name})")
    a, b, lam = curve.time_share(target_D)
    r = curve(target_D)
    quantizers = (a.witness,) if a is b or lam >= 1.0 else (a.witness, b.witness)
    if lam <= 0.0 and a is not b:
        quantizers, lam = (b.witness,), 1.0
    return SeparationScheme(
        source=source,
        quantizers=quantizers,
        lam=lam if len(quantizers) == 2 else 1.0,
        m=m,
        key_rate=max(0.0, target_h - cap + r),
        sw_margin=sw_margin,
        sw_block_len=sw_block_len,
        sw_cap=sw_cap,
        sw_seed=sw_seed,
    )


@dataclass(frozen=True)
class RunMetrics:
    n: int
    R_emp: float
    Rk_emp: float
    D_emp: float
    h_bound: float
    sw_error: float
    messages_ok: bool


def _seeds(seed: int) -> list[int]:
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(4)]


def sample_sources(source, n: int, seed: int):
    """x^n, y^n, w^n for a run (y, w are None without side information)."""
    sx, sy, sw, _ = _seeds(seed)
    x = sample(_px(source), n, sx)
    if not isinstance(source, JointSourceModel):
        return x, None, None
    y = sample_channel(source.py_given_x, x, sy)
    w = sample_channel(source.pw_given_y, y, sw)
    return x, y, w


def simulate(scheme: SeparationScheme, distortion, n: int, seed: int) -> RunMetrics:
    d = np.asarray(distortion, dtype=np.float64)
    x, y, _ = sample_sources(scheme.source, n, seed)
    key_seed = _seeds(seed)[3]
    out = encode_separation(scheme, x, KeyStream(key_seed))
    messages, flags = decode_messages(scheme, out.z, KeyStream(key_seed), n, y)
    xhat = reproduce(scheme, messages, y)
    if scheme.side_info:
        sched = scheme.schedule(n)
        wrong = 0
        total = 0
        for seg, (a, c, q) in enumerate(_segments(sched)):
            bl = scheme.sw_block_len
            for s0 in range(a, c, bl):
                s1 = min(c, s0 + bl)
                total += 1
                wrong += messages[s0:s1] != out.messages[s0:s1]
        sw_error = wrong / total if total else 0.0
    else:
        sw_error = 0.0
    return RunMetrics(
        n=n,
        R_emp=out.coded_bits / n,
        Rk_emp=out.key_bits / n,
        D_emp=float(np.mean(d[np.asarray(x), np.asarray(xhat)])),
        h_bound=equivocation_bound(scheme.source, out.coded_bits, out.key_bits, n),
        sw_error=sw_error,
        messages_ok=messages == out.messages,
    )


def as_cipher_system(scheme: SeparationScheme, n: int) -> CipherSystem:
    """The scheme's map (x^n, key) -> Z, for exact equivocation on tiny n."""
    sched = scheme.schedule(n)

    def coded_len(xs):
        return len(_lossless_encode(scheme, [scheme.message(q, x) for q, x in zip(sched, xs)], sched))

    # the pad never exceeds the shortest coded output, so one key length fits all x^n
    k = _px(scheme.source).alphabet_size
    shortest = min(coded_len(xs) for xs in itertools.product(range(k), repeat=n))
    key_bits = scheme.key_bits(n, shortest)

    def encode(xs, key):
        return encode_separation(scheme, xs, FixedBits(key)).z

    longest_pad = max(
        scheme.key_bits(n, coded_len(xs)) for xs in itertools.product(range(k), repeat=n)
    )
    return CipherSystem(encode, max(key_bits, longest_pad))


def prefix_stable(
    scheme: SeparationScheme,
    x_seq: Sequence[int],
    x_alt: Sequence[int],
    t: int,
    key_seed: int,
    y_seq: Sequence[int] | None = None,
    y_alt: Sequence[int] | None = None,
) -> bool | None:
    """Do two runs agreeing on x^t (and y^t) reproduce the same first t symbols?

    Returns None when either run hit a Slepian-Wolf failure, since the
    reproduction is then allowed to depend on the future.
    """
    outs = []
    for xs, ys in ((x_seq, y_seq), (x_alt, y_alt)):
        enc = encode_separation(scheme, xs, KeyStream(key_seed))
        msgs, flags = decode_messages(scheme, enc.z, KeyStream(key_seed), len(xs), ys)
        if any(flags) or msgs != enc.messages:
            return None
        outs.append(reproduce(scheme, msgs, ys))
    return outs[0][:t] == outs[1][:t]
