"""Security advantages of an encryption function against an adversary channel.

Exact engines work on the induced channel matrix Ch_E[M, z] =
Pr[ChA(E(M)) = z]; Monte-Carlo engines sample through the scheme and
channel using the seeded stream contract.
"""

from __future__ import annotations

import itertools
import math
from typing import Callable, Sequence

import numpy as np

from wiretap.channels import Channel
from wiretap.coding import CodeFn, EncryptionFn
from wiretap.errors import ConvergenceError, check_cap
from wiretap.probcore import (
    JointDist,
    vec_avg_guessing_prob,
    vec_mutual_information,
    vec_sd,
)
from wiretap.report import AdvReport, binomial_half_width, rng_stream

MIS_TOL = 1e-9
MIS_MAX_ITER = 100_000
LN2 = math.log(2.0)


def _params(e, chA: Channel) -> dict:
    return {"scheme": getattr(e, "name", "E"), "channel": chA.describe()}


def induced_matrix(e: EncryptionFn, chA: Channel, msgs=None) -> np.ndarray:
    """Rows are the adversary-ciphertext laws of each message."""
    if chA.in_width != e.c:
        raise ValueError(f"channel expects {chA.in_width} bits, ciphertext has {e.c}")
    n_msgs = (1 << e.m) if msgs is None else len(msgs)
    check_cap("induced channel matrix", n_msgs << chA.out_width)
    return chA.push(e.ciphertext_laws(msgs))


# -- distinguishing security ---------------------------------------------------------


def max_pairwise_sd(laws: np.ndarray) -> tuple[float, tuple[int, int]]:
    best, pair = 0.0, (0, min(1, laws.shape[0] - 1))
    for i in range(laws.shape[0] - 1):
        sds = 0.5 * np.abs(laws[i + 1 :] - laws[i]).sum(axis=1)
        j = int(np.argmax(sds))
        if sds[j] > best:
            best, pair = float(sds[j]), (i, i + 1 + j)
    return best, pair


def _empirical_ml_advantage(z0, z1, rng) -> float:
    """Fit the ML rule on half the samples, score it on the other half."""
    h0, h1 = len(z0) // 2, len(z1) // 2
    tr0, te0, tr1, te1 = z0[:h0], z0[h0:], z1[:h1], z1[h1:]
    keys, inv = np.unique(np.concatenate([tr0, tr1]), return_inverse=True)
    c0 = np.bincount(inv[:h0], minlength=keys.size)
    c1 = np.bincount(inv[h0:], minlength=keys.size)
    # unseen outputs and ties get a fair coin
    vote = np.where(c1 > c0, 1.0, np.where(c0 > c1, 0.0, 0.5))

    def guess(zs):
        idx = np.searchsorted(keys, zs)
        idx = np.minimum(idx, keys.size - 1)
        seen = keys[idx] == zs
        return np.where(seen, vote[idx], 0.5)

    correct = (1.0 - guess(te0)).sum() + guess(te1).sum()
    return 2.0 * correct / (te0.size + te1.size) - 1.0


def adv_ds(
    e: EncryptionFn,
    chA: Channel,
    mode: str = "exact",
    pairs: Sequence[tuple[int, int]] | None = None,
    trials: int = 20_000,
    seed: int = 0,
    distinguisher: Callable | None = None,
) -> AdvReport:
    """max over message pairs of SD(ChA(E(M0)); ChA(E(M1))).

    In exact mode ``pairs`` restricts the maximization (reported as a lower
    bound).  Monte-Carlo mode needs ``pairs``; with no ``distinguisher`` it
    fits the empirical maximum-likelihood rule on half the samples.  A
    distinguisher maps an array of adversary ciphertexts to guessed bits.
    """
    params = _params(e, chA)
    if mode == "exact":
        if pairs is None:
            check_cap("message pairs x outputs", (1 << (2 * e.m)) << chA.out_width)
            laws = induced_matrix(e, chA)
            value, (i, j) = max_pairwise_sd(laws)
            return AdvReport("ds", value, "exact", params, witness=[i, j])
        best, arg = -1.0, None
        for m0, m1 in pairs:
            laws = induced_matrix(e, chA, np.array([m0, m1]))
            sd = vec_sd(laws[0], laws[1])
            if sd > best:
                best, arg = sd, [int(m0), int(m1)]
        return AdvReport("ds", best, "exact", params, witness=arg, lower_bound=True)
    if mode != "mc":
        raise ValueError(f"unknown mode {mode!r}")
    if not pairs:
        raise ValueError("monte-carlo ds needs designated message pairs; the max cannot be sampled")
    best, arg, n_eff = -math.inf, None, trials
    for k, (m0, m1) in enumerate(pairs):
        rng = rng_stream(seed, k)
        z0 = chA.sample_batch(e.encrypt_batch(np.full(trials, m0), rng), rng)
        z1 = chA.sample_batch(e.encrypt_batch(np.full(trials, m1), rng), rng)
        if distinguisher is None:
            adv = _empirical_ml_advantage(z0, z1, rng)
            n = trials - trials // 2
        else:
            correct = np.sum(np.asarray(distinguisher(z0)) == 0) + np.sum(np.asarray(distinguisher(z1)) == 1)
            adv = 2.0 * correct / (2 * trials) - 1.0
            n = trials
        if adv > best:
            best, arg, n_eff = adv, [int(m0), int(m1)], n
    succ = (1.0 + best) / 2.0
    return AdvReport(
        "ds",
        max(best, 0.0),
        "monte-carlo",
        params,
        seed=seed,
        trials=trials,
        half_width=2.0 * binomial_half_width(succ, 2 * n_eff),
        witness=arg,
        lower_bound=True,
    )


# -- mutual-information security ---------------------------------------------------


def adv_mis_r(e: EncryptionFn, chA: Channel) -> AdvReport:
    """I(U; ChA(E(U))) for uniform U."""
    W = induced_matrix(e, chA)
    joint = JointDist.from_channel(np.full(W.shape[0], 1.0 / W.shape[0]), W)
    return AdvReport("mis-r", vec_mutual_information(joint.matrix), "exact", _params(e, chA))


def _divergences(W: np.ndarray, q: np.ndarray) -> np.ndarray:
    """D(W_x || q) in nats for every row x."""
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(W > 0, W / q, 1.0)
        return np.sum(np.where(W > 0, W * np.log(ratio), 0.0), axis=1)


def channel_capacity(
    W: np.ndarray, tol: float = MIS_TOL, max_iter: int = MIS_MAX_ITER
) -> tuple[float, np.ndarray, float]:
    """Capacity in bits by alternating maximization.

    Stops once max_x D(W_x||q) - I(p) (an upper bound on the remaining
    gap) drops below ``tol``; returns (value, input law, gap).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    W = np.asarray(W, dtype=float)
    # identical rows add nothing; keep one representative of each
    _, keep = np.unique(np.round(W, 15), axis=0, return_index=True)
    R = W[keep]
    p = np.full(R.shape[0], 1.0 / R.shape[0])
    for _ in range(max_iter):
        q = p @ R
        D = _divergences(R, q)
        lower = float(p @ D)
        upper = float(D.max())
        if (upper - lower) / LN2 < tol:
            law = np.zeros(W.shape[0])
            law[keep] = p
            return max(lower, 0.0) / LN2, law, (upper - lower) / LN2
        p = p * np.exp(D - upper)
        p /= p.sum()
    raise ConvergenceError(
        f"capacity iteration did not reach gap {tol} within {max_iter} steps "
        f"(last gap {(upper - lower) / LN2:.3e})"
    )


def adv_mis(e: EncryptionFn, chA: Channel, tol: float = MIS_TOL, max_iter: int = MIS_MAX_ITER) -> AdvReport:
    """max over message laws of I(M; ChA(E(M))), the induced channel's capacity."""
    W = induced_matrix(e, chA)
    value, law, gap = channel_capacity(W, tol, max_iter)
    params = dict(_params(e, chA), tol=tol, gap=gap)
    return AdvReport("mis", value, "exact", params, witness=[float(x) for x in law])


# -- semantic security ----------------------------------------------------------------


def _ss_value(W: np.ndarray, support: Sequence[int], f: Sequence[int]) -> float:
    """GP(f(M)|C) - GP(f(M)) for M uniform on ``support``."""
    weight = 1.0 / len(support)
    values = sorted(set(f))
    grouped = np.zeros((len(values), W.shape[1]))
    for x, fx in zip(support, f):
        grouped[values.index(fx)] += weight * W[x]
    prior = grouped.sum(axis=1)
    return float(grouped.max(axis=0).sum() - prior.max())


def ss_restricted_exact(W: np.ndarray, two_point_only: bool = False) -> tuple[float, dict]:
    """SS maximized over deterministic f and uniform M on message subsets.

    With ``two_point_only`` the class shrinks to two-point M with f the
    identity.  Returns (value, maximizer).
    """
    n = W.shape[0]
    best, arg = 0.0, {"support": [0], "f": [0]}
    if two_point_only:
        for a, b in itertools.combinations(range(n), 2):
            v = _ss_value(W, (a, b), (0, 1))
            if v > best:
                best, arg = v, {"support": [a, b], "f": [a, b]}
        return best, arg
    if n > 4:
        raise ValueError("exhaustive restricted SS supports at most 4 messages")
    for size in range(2, n + 1):
        for support in itertools.combinations(range(n), size):
            # only the partition induced by f matters; labels 0..size-1 cover it
            for f in itertools.product(range(size), repeat=size):
                v = _ss_value(W, support, f)
                if v > best:
                    best, arg = v, {"support": list(support), "f": list(f)}
    return best, arg


def ss_by_enumeration(W: np.ndarray, prior: np.ndarray, f: Sequence[int]) -> float:
    """Adversary-minus-simulator success, both maximized by brute force.

    Every deterministic adversary {outputs} -> range(f) is tried, so this is
    only for a handful of outputs.
    """
    values = sorted(set(f))
    d = W.shape[1]
    check_cap("adversary functions", len(values) ** d)
    joint = prior[:, None] * W
    target = np.array([values.index(v) for v in f])
    # success[z, v] = Pr[C = z and f(M) = v]
    success = np.zeros((d, len(values)))
    for x in range(W.shape[0]):
        success[:, target[x]] += joint[x]
    best_adv = max(
        sum(success[z, a[z]] for z in range(d)) for a in itertools.product(range(len(values)), repeat=d)
    )
    mass = np.bincount(target, weights=prior, minlength=len(values))
    best_sim = max(mass[v] for v in range(len(values)))
    return float(best_adv - best_sim)


def adv_ss_bounds(e: EncryptionFn, chA: Channel) -> tuple[AdvReport, AdvReport, AdvReport | None]:
    """(ds/2, ds) sandwich plus a restricted exact SS when 2^m <= 16."""
    ds = adv_ds(e, chA)
    params = _params(e, chA)
    lower = AdvReport("ss", ds.value / 2.0, "analytic-bound", dict(params, side="lower"))
    upper = AdvReport("ss", ds.value, "analytic-bound", dict(params, side="upper"))
    restricted = None
    if e.m <= 4:
        W = induced_matrix(e, chA)
        value, arg = ss_restricted_exact(W, two_point_only=e.m > 2)
        cls = "two-point-identity" if e.m > 2 else "deterministic-f-uniform-subsets"
        restricted = AdvReport("ss-restricted", value, "exact", dict(params, cls=cls), witness=arg)
        if not lower.value - 1e-10 <= value <= upper.value + 1e-10:
            raise AssertionError(f"restricted SS {value} escapes [{lower.value}, {upper.value}]")
    return lower, upper, restricted


# -- recovery security ----------------------------------------------------------------


def adv_rs_r(
    code: CodeFn,
    chA: Channel,
    mode: str = "exact",
    trials: int = 20_000,
    seed: int = 0,
) -> AdvReport:
    """Success of the best guesser of uniform U from ChA(En(U))."""
    if chA.in_width != code.b:
        raise ValueError(f"channel expects {chA.in_width} bits, code emits {code.b}")
    params = {"code": code.name, "channel": chA.describe()}
    words = code.codewords()
    n = words.size
    if mode == "exact":
        check_cap("codewords x outputs", n << chA.out_width)
        best = np.zeros(1 << chA.out_width)
        for start in range(0, n, 256):
            chunk = words[start : start + 256]
            rows = np.zeros((chunk.size, 1 << code.b))
            rows[np.arange(chunk.size), chunk] = 1.0
            np.maximum(best, chA.push(rows).max(axis=0), out=best)
        return AdvReport("rs-r", float(best.sum()) / n, "exact", params)
    if mode != "mc":
        raise ValueError(f"unknown mode {mode!r}")
    rng = rng_stream(seed, 0)
    us = rng.integers(0, n, size=trials)
    zs = chA.sample_batch(words[us], rng)
    hits = 0
    step = max(1, (1 << 22) // n)
    for start in range(0, trials, step):
        z = zs[start : start + step]
        lik = chA.prob(words[None, :], z[:, None])
        hits += int(np.sum(np.argmax(lik, axis=1) == us[start : start + step]))
    rate = hits / trials
    return AdvReport(
        "rs-r", rate, "monte-carlo", params, seed=seed, trials=trials,
        half_width=binomial_half_width(rate, trials),
    )


def psd(j: JointDist) -> float:
    """max SD between conditional column laws over pairs in the row support."""
    mat = j.matrix
    mass = mat.sum(axis=1)
    rows = mat[mass > 0] / mass[mass > 0][:, None]
    if rows.shape[0] < 2:
        return 0.0
    return max_pairwise_sd(rows)[0]


def rs_r_from_matrix(W: np.ndarray) -> float:
    """Bayes-optimal recovery of a uniform input of a transition matrix."""
    return vec_avg_guessing_prob(W / W.shape[0])
