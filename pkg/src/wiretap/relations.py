"""Numerical certification of the implications between security metrics.

Each check evaluates both sides exactly on one (scheme, channel) instance
and returns a RelationCheck carrying the raw slack.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from wiretap.channels import Channel, is_symmetric, make_bsc, power, symmetric_partition
from wiretap.coding import EncryptionFn, is_message_linear, is_separable
from wiretap.metrics import (
    _ss_value,
    adv_ds,
    adv_mis,
    adv_mis_r,
    induced_matrix,
    max_pairwise_sd,
    ss_restricted_exact,
)
from wiretap.probcore import vec_entropy, vec_mutual_information
from wiretap.report import RelationCheck

TOL = 1e-8


def _check(relation, instance, lhs, rhs, note: str = "") -> RelationCheck:
    return RelationCheck(relation, instance, float(lhs), float(rhs), TOL, note=note)


def _name(e, ch) -> str:
    return f"{getattr(e, 'name', 'E')} / {ch.describe()}"


def check_ds_ss(e: EncryptionFn, chA: Channel) -> tuple:
    """restricted SS <= ds, and ds <= 2 * SS of identity f on the best pair."""
    if e.m > 2:
        raise ValueError("the exhaustive restricted SS class needs m <= 2")
    W = induced_matrix(e, chA)
    ds, (i, j) = max_pairwise_sd(W)
    ss, arg = ss_restricted_exact(W)
    ss_pair = _ss_value(W, (i, j), (0, 1))
    inst = _name(e, chA)
    return (
        _check("ss<=ds", inst, ss, ds, note=f"ss maximizer {arg}"),
        _check("ds<=2ss", inst, ds, 2.0 * ss_pair, note=f"pair ({i},{j})"),
    )


def check_mis_to_ds(e: EncryptionFn, chA: Channel, mis: float | None = None) -> RelationCheck:
    ds = adv_ds(e, chA).value
    if mis is None:
        mis = adv_mis(e, chA).value
    return _check("ds<=sqrt(2mis)", _name(e, chA), ds, math.sqrt(2.0 * max(mis, 0.0)))


def ds_to_mis_bound(eps: float, c: int) -> float:
    """2 eps lg(2^c / eps), with the eps -> 0 limit taken as 0."""
    if eps <= 0:
        return 0.0
    return 2.0 * eps * (c - math.log2(eps))


def check_ds_to_mis(e: EncryptionFn, chA: Channel, mis: float | None = None) -> RelationCheck:
    eps = adv_ds(e, chA).value
    if mis is None:
        mis = adv_mis(e, chA).value
    note = f"c={e.c}"
    if chA.out_width > e.c:
        note += f"; adversary output width {chA.out_width} exceeds c"
    return _check("mis<=2eps*lg(2^c/eps)", _name(e, chA), mis, ds_to_mis_bound(eps, e.c), note=note)


def relation_ledger(e: EncryptionFn, chA: Channel) -> list:
    """Every metric-relation bound on one instance, sharing one capacity solve."""
    mis = adv_mis(e, chA).value
    return [*check_ds_ss(e, chA), check_mis_to_ds(e, chA, mis), check_ds_to_mis(e, chA, mis)]


# -- guarded MIS-R -> MIS -------------------------------------------------------------


def check_misr_to_mis(e: EncryptionFn, base_bit_channel: Channel) -> RelationCheck:
    """mis <= mis-r for separable, message-linear E over a symmetric bit channel.

    Preconditions that fail are reported on the check (precondition_met is
    False), not raised.  The induced channel is also run through the
    symmetric-partition test; failing it marks the check uncertified.
    """
    if base_bit_channel.in_width != 1:
        raise ValueError("base channel must take a single bit")
    chA = power(base_bit_channel, e.c)
    inst = _name(e, chA)
    missing = []
    if not is_separable(e):
        missing.append("separable")
    if not is_message_linear(e):
        missing.append("message-linear")
    if not is_symmetric(base_bit_channel):
        missing.append("symmetric base channel")
    if missing:
        return RelationCheck(
            "mis<=mis-r", inst, math.nan, math.nan, TOL, precondition_met=False,
            note="PRECONDITION_NOT_MET: " + ", ".join(missing),
        )
    W = induced_matrix(e, chA)
    partition = symmetric_partition(W)
    mis = adv_mis(e, chA).value
    misr = adv_mis_r(e, chA).value
    note = "induced channel symmetric" if partition is not None else "induced channel NOT symmetric"
    return RelationCheck("mis<=mis-r", inst, mis, misr, TOL, note=note, certified=partition is not None)


# -- MIS-R does not imply DS -----------------------------------------------------------


def majority_block_length(p: float) -> int:
    """Smallest n with exp(-n (1/2 - p)^2 / 2) < 1/4."""
    if not 0.0 <= p < 0.5:
        raise ValueError(f"need 0 <= p < 1/2, got {p}; at p = 1/2 no n exists")
    k = (0.5 - p) ** 2 / 2.0
    n = max(1, math.floor(math.log(4.0) / k))
    while math.exp(-n * k) >= 0.25:
        n += 1
    while n > 1 and math.exp(-(n - 1) * k) < 0.25:
        n -= 1
    return n


@dataclass(frozen=True)
class MajorityAttack:
    """Distinguish 0^m from 1^m by a majority vote on the first n received bits."""

    n: int
    base_width: int
    pair: tuple[int, int]

    def __call__(self, zs) -> np.ndarray:
        zs = np.asarray(zs, dtype=np.int64)
        ones = np.bitwise_count(zs >> self.base_width).astype(np.int64)
        return (2 * ones > self.n).astype(np.int64)

    def describe(self) -> dict:
        return {"attack": "majority", "n": self.n, "pair": list(self.pair)}


def build_prepend_scheme(base: EncryptionFn, p: float, n: int | None = None):
    """Prepend a^n to the base ciphertext.

    a is the first message bit when M is all-zeros or all-ones, otherwise a
    fresh coin, which becomes the high bit of the new coins.  Returns the
    modified scheme and the majority attack on (0^m, 1^m).
    """
    if n is None:
        n = majority_block_length(p)
    elif not 0.0 <= p < 0.5:
        raise ValueError(f"need 0 <= p < 1/2, got {p}")
    m, r, c = base.m, base.r, base.c
    ones = (1 << m) - 1
    block = (1 << n) - 1

    def vec(coins, msgs):
        coins = np.asarray(coins, dtype=np.int64)
        msgs = np.asarray(msgs, dtype=np.int64)
        coin_a = coins >> r
        special = (msgs == 0) | (msgs == ones)
        a = np.where(special, msgs >> (m - 1), coin_a)
        inner = base.apply(coins & ((1 << r) - 1), msgs)
        return ((a * block) << c) | inner

    fn = lambda rr, mm: int(vec(rr, mm))
    scheme = EncryptionFn(r + 1, m, n + c, fn, vec, f"prepend-rep{n}({base.name})")
    return scheme, MajorityAttack(n, c, (0, ones))


def otp_scheme(m: int) -> EncryptionFn:
    """E(R, M) = M xor R; its adversary view is independent of M."""
    vec = lambda coins, msgs: np.asarray(coins, dtype=np.int64) ^ np.asarray(msgs, dtype=np.int64)
    return EncryptionFn(m, m, m, lambda r, x: r ^ x, vec, f"otp({m})")


def _weight_laws(n: int, p: float) -> np.ndarray:
    """Laws of the Hamming weight of BSC_p^n(a^n): rows a = 0, a = 1."""
    w = np.arange(n + 1)
    logc = np.array([math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1) for k in w])
    with np.errstate(divide="ignore", invalid="ignore"):
        lp, lq = math.log(p) if p > 0 else -math.inf, math.log1p(-p)
        zero = np.exp(logc + np.where(w > 0, w * lp, 0.0) + (n - w) * lq)
    return np.vstack([zero, zero[::-1]])


def prepend_pair_ds(n: int, p: float) -> float:
    """SD between the weight laws for a = 0 and a = 1 (the all-zero/one pair)."""
    laws = _weight_laws(n, p)
    return 0.5 * float(np.abs(laws[0] - laws[1]).sum())


def prepend_misr(base: EncryptionFn, base_channel: Channel, p: float, n: int) -> tuple[float, float]:
    """(mis-r of base, mis-r of modified scheme), both exact.

    Given M the prepended block and the base view are independent, and the
    block's Hamming weight is sufficient for M, so the joint of (weight,
    base view) is PA^T diag(pM) PZ and the full output never materializes.
    """
    m = base.m
    PZ = induced_matrix(base, base_channel)
    laws = _weight_laws(n, p)
    PA = np.tile(laws.mean(axis=0), (1 << m, 1))
    PA[0] = laws[0]
    PA[(1 << m) - 1] = laws[1]
    pm = np.full(1 << m, 1.0 / (1 << m))
    joint_out = PA.T @ (pm[:, None] * PZ)
    h_out = vec_entropy(joint_out.reshape(-1))
    h_a_given_m = float(sum(pm[i] * vec_entropy(PA[i]) for i in range(1 << m)))
    h_z_given_m = float(sum(pm[i] * vec_entropy(PZ[i]) for i in range(1 << m)))
    modified = h_out - h_a_given_m - h_z_given_m
    base_misr = vec_mutual_information(pm[:, None] * PZ)
    return base_misr, max(modified, 0.0)


def prepend_report(m: int = 10, p: float = 0.25, n: int = 5) -> dict:
    """Exact separation numbers for the prepend construction on an OTP base."""
    base = otp_scheme(m)
    base_channel = make_bsc(p, base.c)
    base_misr, mod_misr = prepend_misr(base, base_channel, p, n)
    return {
        "m": m,
        "p": p,
        "n": n,
        "ds_pair": prepend_pair_ds(n, p),
        "misr_base": base_misr,
        "misr_modified": mod_misr,
        "misr_increase": mod_misr - base_misr,
    }
