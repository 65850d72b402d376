"""Brute-force causal rate-distortion functions and region membership.

r_c(D) is the least output entropy of a deterministic scalar quantizer
with expected distortion at most D; r_c^SI(D) the least H(f(X)|Y) over
encoder/decoder pairs (f, g) where the decoder also sees Y. Their lower
convex envelopes, reached by time-sharing two quantizers, are the causal
rate-distortion functions.

Distortion matrices are indexed ``d[x, xhat]``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .envelope import INFEASIBLE, TOL, Envelope, lower_convex_envelope, pareto_indices
from .errors import StateSpaceTooLarge
from .source_models import JointSourceModel, SourceModel, conditional_entropy, entropy

DEFAULT_LIMIT = 10**6


@dataclass(frozen=True)
class Quantizer:
    """Scalar reproduction map x -> xhat."""

    map: tuple[int, ...]

    def __call__(self, x: int) -> int:
        return self.map[x]

    @property
    def n_messages(self) -> int:
        return max(self.map) + 1

    def __str__(self):
        return "".join(map(str, self.map)) if max(self.map) < 10 else "-".join(map(str, self.map))


@dataclass(frozen=True)
class SIQuantizerPair:
    """Encoder f: x -> s and decoder g: (s, y) -> xhat."""

    f: tuple[int, ...]
    g: tuple[tuple[int, ...], ...]

    @property
    def n_messages(self) -> int:
        return len(self.g)

    def reproduce(self, s: int, y: int) -> int:
        return self.g[s][y]

    def __str__(self):
        return "".join(map(str, self.f))

    def g_str(self) -> str:
        return "|".join("".join(map(str, row)) for row in self.g)


@dataclass(frozen=True)
class RDPoint:
    D: float
    rate: float
    witness: Quantizer | SIQuantizerPair | None = None


@dataclass(frozen=True)
class Quadruple:
    R: float
    R_k: float
    D: float
    h: float


@dataclass
class RDCurve:
    """All evaluated quantizers, their Pareto frontier and its envelope."""

    points: list[RDPoint] = field(repr=False)
    frontier: list[RDPoint]
    envelope: Envelope

    @property
    def d_min(self) -> float:
        return self.frontier[0].D

    def rate(self, D: float):
        """r_c(D) itself (a staircase), or INFEASIBLE below d_min."""
        best = self.witness(D)
        return INFEASIBLE if best is INFEASIBLE else best.rate

    def witness(self, D: float):
        ok = [p for p in self.frontier if p.D <= D + TOL]
        return min(ok, key=lambda p: p.rate) if ok else INFEASIBLE

    def envelope_rate(self, D: float):
        return self.envelope(D)

    __call__ = envelope_rate

    def time_share(self, D: float):
        """Two frontier points and the weight on the first reaching the envelope at D."""
        seg = self.envelope.segment(D)
        if seg is INFEASIBLE:
            return INFEASIBLE
        i, j, lam = seg
        a = self.points[self.envelope.vertex_ids[i]]
        b = self.points[self.envelope.vertex_ids[j]]
        return a, b, lam


def _build_curve(points: list[RDPoint]) -> RDCurve:
    xy = [(p.D, p.rate) for p in points]
    front = [points[i] for i in pareto_indices(xy)]
    return RDCurve(points=points, frontier=front, envelope=lower_convex_envelope(xy))


def _dist(distortion) -> np.ndarray:
    d = np.asarray(distortion, dtype=np.float64)
    if d.ndim != 2 or np.any(d < 0):
        raise ValueError("distortion must be a non-negative matrix")
    return d


def hamming(k: int, k_hat: int | None = None) -> np.ndarray:
    k_hat = k if k_hat is None else k_hat
    return 1.0 - np.eye(k, k_hat)


def rc_curve(model: SourceModel, distortion, limit: int = DEFAULT_LIMIT) -> RDCurve:
    """Enumerate every deterministic quantizer X -> X_hat."""
    d = _dist(distortion)
    k, kh = model.alphabet_size, d.shape[1]
    if d.shape[0] != k:
        raise ValueError("distortion rows must match the source alphabet")
    if kh**k > limit:
        raise StateSpaceTooLarge(f"{kh}^{k} quantizers exceed limit {limit}")
    p = model.pmf
    points = []
    for qmap in itertools.product(range(kh), repeat=k):
        out = np.zeros(kh)
        np.add.at(out, list(qmap), p)
        D = float(sum(p[x] * d[x, qmap[x]] for x in range(k)))
        points.append(RDPoint(D, entropy(out), Quantizer(tuple(qmap))))
    return _build_curve(points)


def _set_partition_maps(k: int):
    """Restricted growth strings: each set partition of range(k) once."""

    def rec(prefix, top):
        if len(prefix) == k:
            yield tuple(prefix)
            return
        for s in range(top + 2):
            yield from rec(prefix + [s], max(top, s))

    yield from rec([], -1)


def _message_joint(pxy: np.ndarray, f: Sequence[int], n_msg: int) -> np.ndarray:
    out = np.zeros((n_msg, pxy.shape[1]))
    for x, s in enumerate(f):
        out[s] += pxy[x]
    return out


def _best_decoder(pxy, d, f, n_msg):
    """Per (s, y) reproduction minimizing the conditional expected distortion."""
    g, D = [], 0.0
    for s in range(n_msg):
        members = [x for x in range(len(f)) if f[x] == s]
        row = []
        for y in range(pxy.shape[1]):
            cost = pxy[members, y] @ d[members]
            best = int(np.argmin(cost))
            row.append(best)
            D += float(cost[best])
        g.append(tuple(row))
    return tuple(g), D


def rc_si_curve(
    joint, distortion, limit: int = DEFAULT_LIMIT, exhaustive: bool = False
) -> RDCurve:
    """r_c^SI frontier and envelope for a joint ``pxy[x, y]``.

    By default f ranges over set partitions of X (message labels do not
    matter) and g is the distortion-optimal decoder for each f, which
    leaves the Pareto frontier unchanged. ``exhaustive=True`` instead tries
    every f: X -> S for |S| = 1..|X| and every g: S x Y -> X_hat; it is the
    independent brute-force route and much slower.
    """
    pxy = joint.joint_xy() if isinstance(joint, JointSourceModel) else np.asarray(joint, dtype=np.float64)
    d = _dist(distortion)
    k, ky = pxy.shape
    kh = d.shape[1]
    if d.shape[0] != k:
        raise ValueError("distortion rows must match the source alphabet")
    points = []
    if not exhaustive:
        if k**k > limit:
            raise StateSpaceTooLarge(f"{k}^{k} encoder maps exceed limit {limit}")
        for f in _set_partition_maps(k):
            n_msg = max(f) + 1
            g, D = _best_decoder(pxy, d, f, n_msg)
            rate = conditional_entropy(_message_joint(pxy, f, n_msg))
            points.append(RDPoint(D, rate, SIQuantizerPair(f, g)))
        return _build_curve(points)

    total = sum(ns**k * kh ** (ns * ky) for ns in range(1, k + 1))
    if total > limit:
        raise StateSpaceTooLarge(f"{total} (f, g) pairs exceed limit {limit}")
    for ns in range(1, k + 1):
        for f in itertools.product(range(ns), repeat=k):
            rate = conditional_entropy(_message_joint(pxy, f, ns))
            for flat in itertools.product(range(kh), repeat=ns * ky):
                g = tuple(tuple(flat[s * ky:(s + 1) * ky]) for s in range(ns))
                D = float(sum(pxy[x, y] * d[x, g[f[x]][y]] for x in range(k) for y in range(ky)))
                points.append(RDPoint(D, rate, SIQuantizerPair(tuple(f), g)))
    return _build_curve(points)


@dataclass(frozen=True)
class RegionReport:
    member: bool
    slack: dict[str, float]
    binding: tuple[str, ...]
    envelope_value: float | None
    no_encryption: bool | None = None


def _report(q: Quadruple, r_env, h_cap: float, tol: float, si: bool) -> RegionReport:
    if r_env is INFEASIBLE:
        return RegionReport(False, {"D": float("-inf")}, ("D",), None, None if not si else False)
    need_key = q.h - h_cap + r_env
    slack = {
        "R": q.R - r_env,
        "h": h_cap - q.h,
        "R_k": q.R_k - (max(0.0, need_key) if si else need_key),
    }
    member = all(v >= -tol for v in slack.values())
    binding = tuple(name for name, v in slack.items() if abs(v) <= tol)
    return RegionReport(member, slack, binding, float(r_env), bool(need_key <= 0) if si else None)


def region_check_no_si(
    model: SourceModel, distortion, q: Quadruple, curve: RDCurve | None = None, tol: float = 1e-12
) -> RegionReport:
    """R >= r(D), h <= H(X), R_k >= h - H(X) + r(D) with r the envelope."""
    curve = rc_curve(model, distortion) if curve is None else curve
    return _report(q, curve(q.D), entropy(model), tol, si=False)


def region_check_si(
    joint: JointSourceModel, distortion, q: Quadruple, curve: RDCurve | None = None, tol: float = 1e-12
) -> RegionReport:
    """Degraded-SI region; ``no_encryption`` is set when h - H(X|W) + r(D) <= 0."""
    curve = rc_si_curve(joint, distortion) if curve is None else curve
    return _report(q, curve(q.D), conditional_entropy(joint.joint_xw()), tol, si=True)
