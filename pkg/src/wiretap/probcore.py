"""Exact finite probability: distributions, joints and information measures.

All logarithms are base 2.  The conventions ``0 lg 0 = 0`` and
``0 lg inf = 0`` are applied exactly, by masking zero-probability terms
before any logarithm is taken.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Hashable

import numpy as np

from wiretap.errors import check_cap

NORM_TOL = 1e-9
EQ_TOL = 1e-10
INFINITE = math.inf


def bitstring(value: int, width: int) -> str:
    return format(value, f"0{width}b") if width > 0 else ""


def _label_key(label):
    return (type(label).__name__, label)


@dataclass(frozen=True, eq=False)
class Dist:
    """A probability distribution with an explicit, canonically ordered support.

    Labels are fixed-width bitstrings (``"0101"``) or opaque hashable
    symbols.  The constructor sorts labels so that two distributions with
    the same content compare and serialize identically.
    """

    support: tuple
    probs: np.ndarray

    def __post_init__(self):
        support = tuple(self.support)
        probs = np.asarray(self.probs, dtype=float).reshape(-1)
        if len(support) != probs.size:
            raise ValueError("support and probs differ in length")
        if len(set(support)) != len(support):
            raise ValueError("support labels must be pairwise distinct")
        if probs.size and probs.min() < 0:
            raise ValueError("probabilities must be non-negative")
        if abs(probs.sum() - 1.0) > NORM_TOL:
            raise ValueError(f"probabilities sum to {probs.sum()!r}, not 1")
        order = sorted(range(len(support)), key=lambda i: _label_key(support[i]))
        if order != list(range(len(support))):
            support = tuple(support[i] for i in order)
            probs = probs[order]
        probs.setflags(write=False)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_vector(cls, probs, width: int) -> "Dist":
        """Dense distribution over all ``width``-bit strings, index = integer value."""
        probs = np.asarray(probs, dtype=float)
        if probs.size != 1 << width:
            raise ValueError(f"expected {1 << width} probabilities for width {width}")
        return cls(tuple(bitstring(i, width) for i in range(probs.size)), probs)

    @classmethod
    def from_mapping(cls, mapping: dict) -> "Dist":
        return cls(tuple(mapping), np.fromiter(mapping.values(), dtype=float))

    @classmethod
    def uniform(cls, width: int) -> "Dist":
        check_cap("uniform distribution", 1 << width)
        return cls.from_vector(np.full(1 << width, 2.0**-width), width)

    @classmethod
    def point(cls, label: Hashable) -> "Dist":
        return cls((label,), np.ones(1))

    def prob(self, label) -> float:
        try:
            return float(self.probs[self.support.index(label)])
        except ValueError:
            return 0.0

    def as_dict(self) -> dict:
        return dict(zip(self.support, self.probs.tolist()))

    @property
    def width(self) -> int | None:
        """Common bit width of the labels, or ``None`` for opaque labels."""
        if not all(isinstance(s, str) and set(s) <= {"0", "1"} for s in self.support):
            return None
        widths = {len(s) for s in self.support}
        return widths.pop() if len(widths) == 1 else None

    def dense(self) -> np.ndarray:
        """Probability vector over all 2^width strings (zeros filled in)."""
        w = self.width
        if w is None:
            raise ValueError("dense() needs fixed-width bitstring labels")
        check_cap("dense distribution", 1 << w)
        out = np.zeros(1 << w)
        for s, p in zip(self.support, self.probs):
            out[int(s, 2) if s else 0] = p
        return out

    def to_json(self) -> dict:
        w = self.width
        if w is not None and len(self.support) == 1 << w:
            return {"width": w, "probs": self.probs.tolist()}
        return {"support": [str(s) for s in self.support], "probs": self.probs.tolist()}

    def __repr__(self):
        items = ", ".join(f"{s!r}: {p:.6g}" for s, p in zip(self.support, self.probs))
        return f"Dist({{{items}}})"


@dataclass(frozen=True, eq=False)
class JointDist:
    """Joint law of a pair (X, Y); rows index X, columns index Y."""

    rows: tuple
    cols: tuple
    matrix: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=float)
        rows, cols = tuple(self.rows), tuple(self.cols)
        if mat.shape != (len(rows), len(cols)):
            raise ValueError(f"matrix shape {mat.shape} does not match labels")
        if mat.size and mat.min() < 0:
            raise ValueError("joint probabilities must be non-negative")
        if abs(mat.sum() - 1.0) > NORM_TOL:
            raise ValueError(f"joint probabilities sum to {mat.sum()!r}, not 1")
        mat.setflags(write=False)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "matrix", mat)

    @classmethod
    def from_channel(cls, prior, transition, rows=None, cols=None) -> "JointDist":
        """Joint of X ~ prior and Y drawn from row X of a transition matrix."""
        prior = np.asarray(prior, dtype=float)
        transition = np.asarray(transition, dtype=float)
        rows = tuple(range(len(prior))) if rows is None else rows
        cols = tuple(range(transition.shape[1])) if cols is None else cols
        return cls(rows, cols, prior[:, None] * transition)

    @classmethod
    def product(cls, px: Dist, py: Dist) -> "JointDist":
        return cls(px.support, py.support, np.outer(px.probs, py.probs))

    def marginal_x(self) -> Dist:
        return Dist(self.rows, self.matrix.sum(axis=1))

    def marginal_y(self) -> Dist:
        return Dist(self.cols, self.matrix.sum(axis=0))

    def transpose(self) -> "JointDist":
        return JointDist(self.cols, self.rows, self.matrix.T)

    def as_dist(self) -> Dist:
        """The joint as a single distribution over (x, y) pairs."""
        labels = tuple((x, y) for x in self.rows for y in self.cols)
        return Dist(labels, self.matrix.reshape(-1))

    def conditional(self, x) -> Dist:
        """Law of Y given X = x."""
        i = self.rows.index(x)
        row = self.matrix[i]
        total = row.sum()
        if total <= 0:
            raise ValueError(f"conditioning on a zero-probability value {x!r}")
        return Dist(self.cols, row / total)


# -- array-level kernels, shared with the metric engines ----------------------


def vec_entropy(p: np.ndarray) -> float:
    p = np.asarray(p, dtype=float).reshape(-1)
    nz = p[p > 0]
    return float(-(nz * np.log2(nz)).sum())


def vec_sd(p: np.ndarray, q: np.ndarray) -> float:
    return float(0.5 * np.abs(np.asarray(p) - np.asarray(q)).sum())


def vec_kl(p: np.ndarray, q: np.ndarray) -> float:
    p = np.asarray(p, dtype=float).reshape(-1)
    q = np.asarray(q, dtype=float).reshape(-1)
    mask = p > 0
    if np.any(q[mask] <= 0):
        return INFINITE
    with np.errstate(over="ignore"):
        return float((p[mask] * np.log2(p[mask] / q[mask])).sum())


def vec_conditional_entropy(joint: np.ndarray) -> float:
    """H(X|Y) = -sum P(x,y) lg P(x|y) for a joint matrix with rows X."""
    joint = np.asarray(joint, dtype=float)
    py = np.broadcast_to(joint.sum(axis=0), joint.shape)
    mask = joint > 0
    return float(-(joint[mask] * np.log2(joint[mask] / py[mask])).sum())


def vec_mutual_information(joint: np.ndarray) -> float:
    """I(X;Y) of a joint matrix, as H(X) - H(X|Y)."""
    joint = np.asarray(joint, dtype=float)
    return vec_entropy(joint.sum(axis=1)) - vec_conditional_entropy(joint)


def vec_avg_guessing_prob(joint: np.ndarray) -> float:
    """GP(X|Y) = sum_y max_x P(x, y) for a joint matrix with rows X."""
    joint = np.asarray(joint, dtype=float)
    if joint.size == 0:
        return 0.0
    return float(joint.max(axis=0).sum())


def _aligned(p: Dist, q: Dist):
    if p.support == q.support:
        return p.probs, q.probs
    labels = sorted(set(p.support) | set(q.support), key=_label_key)
    pd, qd = p.as_dict(), q.as_dict()
    return (
        np.array([pd.get(s, 0.0) for s in labels]),
        np.array([qd.get(s, 0.0) for s in labels]),
    )


# -- public measures -------------------------------------------------------------


def h_term(x: float) -> float:
    """The summand h(x) = -x lg x, with h(0) = 0."""
    return 0.0 if x <= 0 else -x * math.log2(x)


def entropy(d: Dist) -> float:
    return vec_entropy(d.probs)


def binary_entropy(p: float) -> float:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"binary entropy needs p in [0, 1], got {p}")
    return h_term(p) + h_term(1.0 - p)


def conditional_entropy(j: JointDist) -> float:
    """H(X | Y) for the joint of (X, Y), as sum_y P(y) H(X | Y=y)."""
    py = j.matrix.sum(axis=0)
    total = 0.0
    for k in np.nonzero(py > 0)[0]:
        total += py[k] * vec_entropy(j.matrix[:, k] / py[k])
    return float(total)


def mutual_information(j: JointDist) -> float:
    return entropy(j.marginal_x()) - conditional_entropy(j)


def statistical_distance(p: Dist, q: Dist) -> float:
    a, b = _aligned(p, q)
    return vec_sd(a, b)


def kl_divergence(p: Dist, q: Dist) -> float:
    """D(P; Q) in bits; ``INFINITE`` when P is not absolutely continuous w.r.t. Q."""
    a, b = _aligned(p, q)
    return vec_kl(a, b)


def guessing_prob(d: Dist) -> float:
    return float(d.probs.max())


def min_entropy(d: Dist) -> float:
    return -math.log2(guessing_prob(d))


def avg_guessing_prob(j: JointDist) -> float:
    """GP(X | Z) for the joint of (X, Z)."""
    return vec_avg_guessing_prob(j.matrix)


def avg_min_entropy(j: JointDist) -> float:
    return -math.log2(avg_guessing_prob(j))


def product_of_marginals(j: JointDist) -> JointDist:
    return JointDist(
        j.rows, j.cols, np.outer(j.matrix.sum(axis=1), j.matrix.sum(axis=0))
    )


def entropy_gap_bound(n_support: int, eps: float) -> float:
    """Upper bound 2 eps lg(N / eps) on H(P) - H(Q) when SD(P; Q) = eps."""
    if n_support < 1:
        raise ValueError("support size must be positive")
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"eps must lie in [0, 1], got {eps}")
    if eps == 0:
        return 0.0
    return 2.0 * eps * math.log2(n_support / eps)


MAX_EXPLICIT_SUPPORT = 2**24


def entropy_gap_pair(n: int, k: int) -> tuple[Dist, Dist]:
    """Distributions at distance 2^-k whose entropy gap nearly meets the bound.

    P puts 1 - eps on 0 and 2^-n on each of eps 2^n further points; Q is the
    point mass on 0.  Support is {0, ..., N-1} with N = 1 + eps 2^n.
    """
    if not n > k >= 1:
        raise ValueError(f"need n > k >= 1, got n={n}, k={k}")
    n_support = 1 + (1 << (n - k))
    if n_support > MAX_EXPLICIT_SUPPORT:
        raise ValueError(
            f"support size {n_support} too large for an explicit distribution"
        )
    eps = 2.0**-k
    p = np.full(n_support, 2.0**-n)
    p[0] = 1.0 - eps
    q = np.zeros(n_support)
    q[0] = 1.0
    labels = tuple(range(n_support))
    return Dist(labels, p), Dist(labels, q)


def random_dist(rng: np.random.Generator, size: int, sparsity: float = 0.0) -> np.ndarray:
    """Dirichlet-style random probability vector, optionally with zeroed entries."""
    v = rng.exponential(size=size) ** rng.uniform(0.5, 3.0)
    if sparsity > 0:
        v[rng.random(size) < sparsity] = 0.0
        if not v.any():
            v[rng.integers(size)] = 1.0
    return v / v.sum()


__all__ = [
    "Dist",
    "EQ_TOL",
    "INFINITE",
    "JointDist",
    "NORM_TOL",
    "avg_guessing_prob",
    "avg_min_entropy",
    "binary_entropy",
    "bitstring",
    "conditional_entropy",
    "entropy",
    "entropy_gap_bound",
    "guessing_prob",
    "h_term",
    "kl_divergence",
    "min_entropy",
    "mutual_information",
    "product_of_marginals",
    "entropy_gap_pair",
    "random_dist",
    "statistical_distance",
    "vec_avg_guessing_prob",
    "vec_conditional_entropy",
    "vec_entropy",
    "vec_kl",
    "vec_mutual_information",
    "vec_sd",
]
