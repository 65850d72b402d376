"""Exact eavesdropper analytics on small instances.

* No-parsing Eve: with every bit under a one-time pad, all she learns is
  the total length l(B_n), so her posterior on any X_t is
  P(x) Q_{n-1}(L - l(x)) / Q_n(L), where Q_n is the n-fold convolution of
  the codeword-length pmf.
* Parsing Eve: :func:`markov_chain_check` enumerates a whole stage-wise
  encoder and measures how far X_t <-> Z^t <-> K^{t-1} is from holding.
* :func:`exact_equivocation` brute-forces (1/n) H(X^n | W^n, Z).
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable, Hashable, Sequence

import numpy as np

from .codes import InstantaneousCode
from .errors import StateSpaceTooLarge
from .keystream import xor_bits
from .source_models import JointSourceModel, SourceModel

DEFAULT_LENGTH_LIMIT = 10**7
DEFAULT_STATE_LIMIT = 10**6


@dataclass(frozen=True)
class LengthDistribution:
    n: int
    probs: dict[int, float]

    @property
    def support(self) -> list[int]:
        return sorted(self.probs)

    def __getitem__(self, total: int) -> float:
        return self.probs.get(total, 0.0)


@dataclass(frozen=True)
class PosteriorReport:
    n: int
    prior: np.ndarray
    per_length: dict[int, tuple[np.ndarray, float]] = field(repr=False)
    length_probs: dict[int, float] = field(repr=False)
    expected_tv: float
    max_tv: float


def _length_pmf(code: InstantaneousCode, model: SourceModel) -> dict[int, float]:
    if code.alphabet_size != model.alphabet_size:
        raise ValueError("code and model differ in alphabet size")
    pmf: dict[int, float] = defaultdict(float)
    for x, p in enumerate(model.pmf):
        if p > 0:
            pmf[len(code[x])] += float(p)
    return dict(pmf)


def _log_convolutions(code, model, n: int, limit: int) -> tuple[np.ndarray, np.ndarray]:
    """log Q_{n-1} and log Q_n indexed by absolute total length.

    Working in the log domain keeps far tails (e.g. L = n with a 1-bit
    codeword) representable where plain products would underflow.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    lpmf = _length_pmf(code, model)
    size = n * code.max_len + 1
    if size > limit:
        raise StateSpaceTooLarge(f"length DP needs {size} cells (limit {limit})")
    lens = np.array(sorted(lpmf))
    logp = np.log(np.array([lpmf[l] for l in lens]))
    prev = np.full(size, -np.inf)
    prev[0] = 0.0
    cur = prev
    for _ in range(n):
        prev = cur
        cur = np.full(size, -np.inf)
        for l, lp in zip(lens, logp):
            cur[l:] = np.logaddexp(cur[l:], prev[:size - l] + lp)
    return prev, cur


def length_distribution(
    code: InstantaneousCode, model: SourceModel, n: int, limit: int = DEFAULT_LENGTH_LIMIT
) -> LengthDistribution:
    """Exact pmf of l(B_n) = sum of n i.i.d. codeword lengths."""
    _, log_q = _log_convolutions(code, model, n, limit)
    support = np.flatnonzero(np.isfinite(log_q))
    return LengthDistribution(n, {int(L): float(np.exp(log_q[L])) for L in support})


def _posterior_matrix(code, model, n, limit):
    log_prev, log_q = _log_convolutions(code, model, n, limit)
    support = np.flatnonzero(np.isfinite(log_q))
    with np.errstate(divide="ignore"):
        log_px = np.log(model.pmf)
    post = np.zeros((model.alphabet_size, support.size))
    for x in range(model.alphabet_size):
        src = support - len(code[x])
        ok = src >= 0
        vals = np.full(support.size, -np.inf)
        vals[ok] = log_px[x] + log_prev[src[ok]] - log_q[support[ok]]
        post[x] = np.exp(vals)
    post /= post.sum(axis=0, keepdims=True)
    return support, post, log_q


def noparse_posterior(
    code: InstantaneousCode, model: SourceModel, n: int, L: int, limit: int = DEFAULT_LENGTH_LIMIT
) -> np.ndarray:
    """P(X_t = . | l(B_n) = L); the same for every t <= n."""
    support, post, _ = _posterior_matrix(code, model, n, limit)
    hit = np.flatnonzero(support == L)
    if hit.size == 0:
        raise ValueError(f"total length {L} has probability 0 for n={n}")
    return post[:, hit[0]]


def posterior_report(
    code: InstantaneousCode, model: SourceModel, n: int, limit: int = DEFAULT_LENGTH_LIMIT
) -> PosteriorReport:
    support, post, log_q = _posterior_matrix(code, model, n, limit)
    prior = model.pmf
    per_length, length_probs = {}, {}
    tvs = []
    for j, L in enumerate(support):
        tv = 0.5 * float(np.abs(post[:, j] - prior).sum())
        per_length[int(L)] = (post[:, j], tv)
        length_probs[int(L)] = float(np.exp(log_q[L]))
        tvs.append(tv)
    expected = math.fsum(length_probs[int(L)] * tv for L, tv in zip(support, tvs))
    return PosteriorReport(
        n=n,
        prior=prior,
        per_length=per_length,
        length_probs=length_probs,
        expected_tv=expected,
        max_tv=max(tvs),
    )


def convergence_curve(
    code: InstantaneousCode, model: SourceModel, n_list: Sequence[int], limit: int = DEFAULT_LENGTH_LIMIT
) -> list[tuple[int, float]]:
    if list(n_list) != sorted(n_list):
        raise ValueError("n_list must be sorted ascending")
    return [(n, posterior_report(code, model, n, limit).expected_tv) for n in n_list]


# --- parsing eavesdropper: the X_t <-> Z^t <-> K^{t-1} chain ---------------


class StageContext:
    """What a stage encoder may look at and draw from.

    ``x`` is X^t, ``z_prev`` is Z^{t-1}, ``keys_prev`` holds K_1..K_{t-1}
    (the bits each earlier stage drew). Fresh bits come from
    :meth:`take_key` / :meth:`take_private`.
    """

    def __init__(self, x, z_prev, keys_prev, key_bits: str, priv_bits: str):
        self.x = x
        self.z_prev = z_prev
        self.keys_prev = keys_prev
        self._key = key_bits
        self._priv = priv_bits
        self.key_used = ""
        self.private_used = 0

    def take_key(self, n: int) -> str:
        start = len(self.key_used)
        if start + n > len(self._key):
            raise ValueError("stage encoder drew more key bits than declared")
        self.key_used += self._key[start:start + n]
        return self._key[start:start + n]

    def take_private(self, n: int) -> str:
        if self.private_used + n > len(self._priv):
            raise ValueError("stage encoder drew more private bits than declared")
        out = self._priv[self.private_used:self.private_used + n]
        self.private_used += n
        return out


@dataclass(frozen=True)
class StageEncoder:
    """Z_t = fn(ctx) with at most ``key_bits`` / ``private_bits`` fresh bits per stage."""

    fn: Callable[[StageContext], str]
    key_bits: int
    private_bits: int


def block_stage_encoder(code: InstantaneousCode) -> StageEncoder:
    L = code.max_len

    def fn(ctx: StageContext) -> str:
        cw = code[ctx.x[-1]]
        return xor_bits(cw, ctx.take_key(len(cw))) + ctx.take_private(L - len(cw))

    return StageEncoder(fn, key_bits=L, private_bits=L)


def key_reuse_stage_encoder(code: InstantaneousCode) -> StageEncoder:
    """Encrypts stage 1 with fresh key bits, then re-uses K_1 at every later stage."""
    L = code.max_len

    def fn(ctx: StageContext) -> str:
        cw = code[ctx.x[-1]]
        if not ctx.keys_prev:
            k = ctx.take_key(len(cw))
        else:
            k = (ctx.keys_prev[0] * len(cw))[: len(cw)]
        return xor_bits(cw, k) + ctx.take_private(L - len(cw))

    return StageEncoder(fn, key_bits=L, private_bits=L)


def markov_chain_check(
    encoder: StageEncoder, model: SourceModel, horizon: int, limit: int = DEFAULT_STATE_LIMIT
) -> float:
    """max |P(k^{t-1} | x_t, z^t) - P(k^{t-1} | z^t)| at t = ``horizon``.

    Exact: every source sequence, key pattern and private pattern is
    enumerated and pushed through ``encoder``.
    """
    t = horizon
    if t < 1:
        raise ValueError("horizon must be >= 1")
    if t == 1:
        return 0.0
    k = model.alphabet_size
    kb, pb = t * encoder.key_bits, t * encoder.private_bits
    states = k**t * 2 ** (kb + pb)
    if states > limit:
        raise StateSpaceTooLarge(f"{states} states exceed limit {limit}")

    p_kxz: dict = defaultdict(float)
    w = 2.0 ** -(kb + pb)
    for xs in itertools.product(range(k), repeat=t):
        px = math.prod(float(model.pmf[x]) for x in xs)
        if px == 0:
            continue
        for u in itertools.product("01", repeat=kb):
            u = "".join(u)
            for v in itertools.product("01", repeat=pb):
                v = "".join(v)
                zs, keys, kpos, vpos = [], [], 0, 0
                for s in range(t):
                    ctx = StageContext(xs[: s + 1], tuple(zs), tuple(keys), u[kpos:], v[vpos:])
                    zs.append(encoder.fn(ctx))
                    keys.append(ctx.key_used)
                    kpos += len(ctx.key_used)
                    vpos += ctx.private_used
                p_kxz[(tuple(keys[:-1]), xs[-1], tuple(zs))] += px * w

    p_xz: dict = defaultdict(float)
    p_kz: dict = defaultdict(float)
    p_z: dict = defaultdict(float)
    for (kk, x, z), p in p_kxz.items():
        p_xz[(x, z)] += p
        p_kz[(kk, z)] += p
        p_z[z] += p
    xs_by_z = defaultdict(list)
    for x, z in p_xz:
        xs_by_z[z].append(x)

    dev = 0.0
    for (kk, z), pkz in p_kz.items():
        marginal = pkz / p_z[z]
        for x in xs_by_z[z]:
            cond = p_kxz.get((kk, x, z), 0.0) / p_xz[(x, z)]
            dev = max(dev, abs(cond - marginal))
    return dev


# --- equivocation -----------------------------------------------------------


@dataclass(frozen=True)
class CipherSystem:
    """Z = encode(x^n, key) with a uniform key of ``key_bits`` bits."""

    encode: Callable[[tuple, str], Hashable]
    key_bits: int


def _entropy_of(dist: dict) -> float:
    return -math.fsum(p * math.log2(p) for p in dist.values() if p > 0)


def exact_equivocation(
    system: CipherSystem,
    model: SourceModel | JointSourceModel,
    n: int,
    limit: int = DEFAULT_STATE_LIMIT,
) -> float:
    """(1/n) H(X^n | W^n, Z) by exhaustive construction of the joint law.

    With a plain :class:`SourceModel` there is no W and this is
    (1/n) H(X^n | Z).
    """
    if isinstance(model, JointSourceModel):
        px, pwx = model.px.pmf, model.pw_given_x()
    else:
        px, pwx = model.pmf, np.ones((model.alphabet_size, 1))
    k, nw = px.size, pwx.shape[1]
    states = k**n * 2**system.key_bits * nw**n
    if states > limit:
        raise StateSpaceTooLarge(f"{states} states exceed limit {limit}")

    keys = ["".join(b) for b in itertools.product("01", repeat=system.key_bits)]
    kw = 2.0 ** -system.key_bits
    joint_xwz: dict = defaultdict(float)
    for xs in itertools.product(range(k), repeat=n):
        p = math.prod(float(px[x]) for x in xs)
        if p == 0:
            continue
        z_given_x: dict = defaultdict(float)
        for key in keys:
            z_given_x[system.encode(xs, key)] += kw
        for ws in itertools.product(range(nw), repeat=n):
            pw = math.prod(float(pwx[x, w]) for x, w in zip(xs, ws))
            if pw == 0:
                continue
            for z, pz in z_given_x.items():
                joint_xwz[(xs, ws, z)] += p * pw * pz
    joint_wz: dict = defaultdict(float)
    for (_, ws, z), p in joint_xwz.items():
        joint_wz[(ws, z)] += p
    return (_entropy_of(joint_xwz) - _entropy_of(joint_wz)) / n


def otp_prefix_system(code: InstantaneousCode, key_bits: int) -> CipherSystem:
    """Encode x^n with ``code`` and XOR the first ``key_bits`` bits with the key."""

    def encode(xs, key):
        b = code.encode(xs)
        m = min(key_bits, len(b))
        return xor_bits(b[:m], key[:m]) + b[m:]

    return CipherSystem(encode, key_bits)
