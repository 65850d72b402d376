"""Finite-alphabet source models and exact information measures (bits)."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

PROB_TOL = 1e-12


def _as_pmf(probs, name="pmf") -> np.ndarray:
    p = np.asarray(probs, dtype=np.float64)
    if p.ndim != 1 or p.size < 1:
        raise ValueError(f"{name} must be a non-empty vector")
    if np.any(p < 0) or not np.all(np.isfinite(p)):
        raise ValueError(f"{name} has negative or non-finite entries")
    if abs(p.sum() - 1.0) > PROB_TOL:
        raise ValueError(f"{name} sums to {p.sum()!r}, not 1")
    p.setflags(write=False)
    return p


def _as_stochastic(mat, rows: int, name: str) -> np.ndarray:
    m = np.asarray(mat, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != rows:
        raise ValueError(f"{name} must have {rows} rows, got shape {m.shape}")
    if np.any(m < 0) or not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has negative or non-finite entries")
    bad = np.abs(m.sum(axis=1) - 1.0) > PROB_TOL
    if np.any(bad):
        raise ValueError(f"{name} rows {np.flatnonzero(bad).tolist()} do not sum to 1")
    m.setflags(write=False)
    return m


@dataclass(frozen=True)
class Distribution:
    """A pmf over an explicit finite support (e.g. bit strings)."""

    support: tuple
    probs: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "support", tuple(self.support))
        object.__setattr__(self, "probs", _as_pmf(self.probs, "probs"))
        if len(self.support) != self.probs.size:
            raise ValueError("support and probs differ in length")

    def __getitem__(self, item) -> float:
        return float(self.probs[self.support.index(item)])

    def as_dict(self) -> dict:
        return dict(zip(self.support, self.probs.tolist()))


@dataclass(frozen=True)
class SourceModel:
    """Memoryless source X ~ P(x) over symbols 0..alphabet_size-1."""

    pmf: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "pmf", _as_pmf(self.pmf))

    @property
    def alphabet_size(self) -> int:
        return int(self.pmf.size)

    def __len__(self):
        return self.alphabet_size

    @classmethod
    def uniform(cls, k: int) -> SourceModel:
        return cls(np.full(k, 1.0 / k))


@dataclass(frozen=True)
class JointSourceModel:
    """Degraded triple P(x) P(y|x) P(w|y).

    ``py_given_x[x, y]`` and ``pw_given_y[y, w]`` are row-stochastic. All
    joint matrices returned here are indexed ``[x, other]``.
    """

    px: SourceModel
    py_given_x: np.ndarray
    pw_given_y: np.ndarray

    def __post_init__(self):
        if not isinstance(self.px, SourceModel):
            object.__setattr__(self, "px", SourceModel(self.px))
        k = self.px.alphabet_size
        pyx = _as_stochastic(self.py_given_x, k, "py_given_x")
        object.__setattr__(self, "py_given_x", pyx)
        object.__setattr__(
            self, "pw_given_y", _as_stochastic(self.pw_given_y, pyx.shape[1], "pw_given_y")
        )

    @classmethod
    def without_side_info(cls, px) -> JointSourceModel:
        """Y and W constant: the no-SI setting as a degenerate joint."""
        px = px if isinstance(px, SourceModel) else SourceModel(px)
        return cls(px, np.ones((px.alphabet_size, 1)), np.ones((1, 1)))

    @property
    def sizes(self) -> tuple[int, int, int]:
        return (self.px.alphabet_size, self.py_given_x.shape[1], self.pw_given_y.shape[1])

    def joint_xyw(self) -> np.ndarray:
        return (
            self.px.pmf[:, None, None]
            * self.py_given_x[:, :, None]
            * self.pw_given_y[None, :, :]
        )

    def joint_xy(self) -> np.ndarray:
        return self.px.pmf[:, None] * self.py_given_x

    def pw_given_x(self) -> np.ndarray:
        return self.py_given_x @ self.pw_given_y

    def pw_given_x_by_summation(self) -> np.ndarray:
        """P(w|x) from the full joint; must match :meth:`pw_given_x`."""
        j = self.joint_xyw().sum(axis=1)
        px = self.px.pmf
        out = np.zeros_like(j)
        nz = px > 0
        out[nz] = j[nz] / px[nz, None]
        # rows of impossible x: fall back to the chain (no joint mass to sum)
        out[~nz] = self.pw_given_x()[~nz]
        return out

    def joint_xw(self) -> np.ndarray:
        return self.px.pmf[:, None] * self.pw_given_x()


def entropy(d) -> float:
    """Shannon entropy in bits, with 0 log 0 = 0.

    Accepts a :class:`Distribution`, a :class:`SourceModel` or any
    probability vector.
    """
    if isinstance(d, Distribution):
        p = d.probs
    elif isinstance(d, SourceModel):
        p = d.pmf
    else:
        p = np.asarray(d, dtype=np.float64).ravel()
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum()) + 0.0


def binary_entropy(p: float) -> float:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p={p} must be in [0, 1]")
    return entropy([p, 1.0 - p])


def conditional_entropy(joint) -> float:
    """H(X|Y) in bits for a joint matrix indexed ``joint[x, y]``."""
    j = np.asarray(joint, dtype=np.float64)
    if j.ndim != 2:
        raise ValueError("joint must be a matrix")
    if np.any(j < 0) or abs(j.sum() - 1.0) > 1e-9:
        raise ValueError("joint must be non-negative and sum to 1")
    total = 0.0
    for y in range(j.shape[1]):
        py = j[:, y].sum()
        if py > 0:
            total += py * entropy(j[:, y] / py)
    return total


def sample(model: SourceModel, n: int, seed: int) -> np.ndarray:
    """n i.i.d. draws from ``model``; deterministic in ``seed``."""
    if n < 0:
        raise ValueError("n must be >= 0")
    rng = np.random.default_rng(seed)
    return rng.choice(model.alphabet_size, size=n, p=model.pmf)


def sample_channel(channel: np.ndarray, inputs: Sequence[int], seed: int) -> np.ndarray:
    """Pass ``inputs`` through a row-stochastic channel, one draw per symbol."""
    rng = np.random.default_rng(seed)
    inputs = np.asarray(inputs, dtype=np.int64)
    cdf = np.cumsum(channel, axis=1)
    u = rng.random(inputs.size)
    out = (u[:, None] >= cdf[inputs]).sum(axis=1)
    return np.minimum(out, channel.shape[1] - 1)


def load_model(path) -> SourceModel | JointSourceModel:
    """Load ``{"pmf": [...], "py_given_x": [[...]], "pw_given_y": [[...]]}``.

    Only ``pmf`` is required. If ``py_given_x`` is present a
    :class:`JointSourceModel` is returned; a missing ``pw_given_y`` then
    means Eve sees nothing (constant W).
    """
    cfg = json.loads(Path(path).read_text())
    return model_from_dict(cfg)


def model_from_dict(cfg: dict) -> SourceModel | JointSourceModel:
    if "pmf" not in cfg:
        raise ValueError("model config needs a 'pmf' entry")
    px = SourceModel(cfg["pmf"])
    if "py_given_x" not in cfg:
        if "pw_given_y" in cfg:
            raise ValueError("'pw_given_y' given without 'py_given_x'")
        return px
    pyx = np.asarray(cfg["py_given_x"], dtype=np.float64)
    pwy = cfg.get("pw_given_y")
    if pwy is None:
        pwy = np.ones((pyx.shape[1], 1))
    return JointSourceModel(px, pyx, pwy)
