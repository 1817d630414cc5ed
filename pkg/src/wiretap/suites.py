"""Fixed-seed verification suites behind the ``verify`` command.

Each suite returns a list of RelationCheck records.  Randomized property
families are folded into one record per property holding the worst
instance, so a suite's output stays readable.
"""

from __future__ import annotations

import math
from typing import Callable, Iterable

import numpy as np

from wiretap import channels as chans
from wiretap.coding import (
    EncryptionFn,
    decryption_error,
    identity_code,
    parity_code,
    repetition_code,
    xor_linear,
)
from wiretap.hashing import (
    gf_family,
    lhl_instance,
    matrix_family,
    max_collision_prob,
)
from wiretap.metrics import adv_ds, adv_rs_r, induced_matrix
from wiretap.probcore import (
    Dist,
    NORM_TOL,
    entropy_gap_bound,
    h_term,
    entropy_gap_pair,
    random_dist,
    vec_avg_guessing_prob,
    vec_entropy,
    vec_kl,
    vec_mutual_information,
    vec_sd,
)
from wiretap.relations import (
    build_prepend_scheme,
    check_misr_to_mis,
    relation_ledger,
    otp_scheme,
    prepend_report,
)
from wiretap.report import RelationCheck, rng_stream
from wiretap.xtx import (
    RATE_TABLE_P,
    build_xtx,
    ds_bound_bsc_noiseless_receiver,
    noiseless_xtx,
    rate_table,
    rsr_bsc_injective_bound,
    rsr_systematic_reduction,
)

SUITES = ("probcore", "relations", "xtx", "hash")


def worst(relation: str, instance: str, pairs: Iterable[tuple[float, float]], tol: float = 1e-10) -> RelationCheck:
    """One record for a family of lhs <= rhs instances: the one with least slack."""
    pairs = list(pairs)
    lhs, rhs = min(pairs, key=lambda t: t[1] - t[0])
    return RelationCheck(relation, f"{instance} ({len(pairs)} instances)", lhs, rhs, tol)


def random_table_scheme(rng, r: int, m: int, c: int, name: str = "rand") -> EncryptionFn:
    table = rng.integers(0, 1 << c, size=(1 << m, 1 << r))
    vec = lambda coins, msgs: table[np.asarray(msgs), np.asarray(coins)]
    return EncryptionFn(r, m, c, lambda rr, mm: int(table[mm, rr]), vec, name)


def random_matrix_channel(rng, c: int, d: int, sparsity: float = 0.0) -> chans.MatrixChannel:
    rows = np.array([random_dist(rng, 1 << d, sparsity) for _ in range(1 << c)])
    return chans.MatrixChannel(rows, c, d)


# -- probcore ---------------------------------------------------------------------------


def _random_joint(rng, max_side: int = 16) -> np.ndarray:
    a, b = rng.integers(1, max_side + 1, size=2)
    return random_dist(rng, int(a * b), sparsity=rng.choice([0.0, 0.3])).reshape(a, b)


def mi_kl_pairs(rng, n: int = 200):
    """|I(X;Y) - D(J || product of marginals)| per random joint."""
    for _ in range(n):
        j = _random_joint(rng)
        prod = np.outer(j.sum(axis=1), j.sum(axis=0))
        yield abs(vec_mutual_information(j) - vec_kl(j.ravel(), prod.ravel())), 1e-10


def pinsker_pairs(rng, n: int = 1000):
    for _ in range(n):
        k = int(rng.integers(2, 17))
        p, q = random_dist(rng, k, 0.2), random_dist(rng, k, 0.2)
        kl = vec_kl(p, q)
        yield 2.0 * vec_sd(p, q) ** 2, kl


def entropy_gap_pairs(rng, n: int = 500):
    for _ in range(n):
        k = int(rng.integers(2, 33))
        p, q = random_dist(rng, k, 0.2), random_dist(rng, k, 0.2)
        eps = vec_sd(p, q)
        support = int(np.count_nonzero((p > 0) | (q > 0)))
        if eps > 0:
            yield vec_entropy(p) - vec_entropy(q), entropy_gap_bound(support, eps)


def scalar_h_pairs(rng, n: int = 1000):
    for _ in range(n):
        p = rng.uniform(0, 0.5)
        x = rng.uniform(0, 0.5 - p)
        yield abs(h_term(p + x) - h_term(p)), h_term(x)


def marginal_psd_pairs(rng, n: int = 500):
    """SD(P_C; P_{C|M=x}) <= PSD for every x in the support of M."""
    from wiretap.metrics import max_pairwise_sd

    for _ in range(n):
        j = _random_joint(rng, 8)
        pm = j.sum(axis=1)
        rows = j[pm > 0] / pm[pm > 0][:, None]
        psd = max_pairwise_sd(rows)[0] if rows.shape[0] > 1 else 0.0
        pc = j.sum(axis=0)
        yield max(vec_sd(pc, row) for row in rows), psd


def data_processing_pairs(rng, n: int = 500):
    """SD(f(X1); f(X2)) <= SD(X1; X2) for a random channel f."""
    for _ in range(n):
        a, b = int(rng.integers(2, 17)), int(rng.integers(1, 17))
        p, q = random_dist(rng, a, 0.2), random_dist(rng, a, 0.2)
        f = np.array([random_dist(rng, b, 0.3) for _ in range(a)])
        yield vec_sd(p @ f, q @ f), vec_sd(p, q)


def side_info_pairs(rng, n: int = 500):
    """GP(X | Z, R) <= N * GP(X | Z) for R taking N values."""
    for _ in range(n):
        nx, nz, nr = (int(v) for v in rng.integers(1, 9, size=3))
        joint = random_dist(rng, nx * nz * nr, 0.3).reshape(nx, nz, nr)
        with_r = vec_avg_guessing_prob(joint.reshape(nx, nz * nr))
        without = vec_avg_guessing_prob(joint.sum(axis=2))
        yield with_r, nr * without


def gap_pair_checks() -> list[RelationCheck]:
    out = []
    for n, k in ((4, 2), (6, 3)):
        p, q = entropy_gap_pair(n, k)
        eps = 2.0**-k
        sd = vec_sd(p.probs, q.probs)
        gap = vec_entropy(p.probs) - vec_entropy(q.probs)
        inst = f"gap-pair(n={n},k={k})"
        out.append(RelationCheck("sd==2^-k", inst, abs(sd - eps), 0.0))
        out.append(RelationCheck("gap>=0.5eps*lg(N/eps)", inst, 0.5 * eps * math.log2(len(p.support) / eps), gap))
    return out


def suite_probcore(seed: int = 0) -> list[RelationCheck]:
    families: list[tuple[str, Callable, int]] = [
        ("mi==kl(J||I)", mi_kl_pairs, 200),
        ("pinsker", pinsker_pairs, 1000),
        ("entropy-gap", entropy_gap_pairs, 500),
        ("|h(p+x)-h(p)|<=h(x)", scalar_h_pairs, 1000),
        ("sd-to-marginal<=psd", marginal_psd_pairs, 500),
        ("data-processing", data_processing_pairs, 500),
        ("gp-side-info", side_info_pairs, 500),
    ]
    out = []
    for k, (name, gen, count) in enumerate(families):
        out.append(worst(name, f"random, seed {seed}", gen(rng_stream(seed, k), count)))
    return out + gap_pair_checks()


# -- relations ----------------------------------------------------------------------------


def relation_instances(seed: int = 0) -> list[tuple[EncryptionFn, chans.Channel]]:
    """At least 20 small (scheme, adversary channel) pairs with m <= 2, d <= c <= 10."""
    rng = rng_stream(seed, 100)
    out = []
    g = np.array([[1, 0, 1, 1], [0, 1, 1, 0]])
    lin = xor_linear(g, 2)
    for p in (0.1, 0.2, 0.3):
        out.append((lin, chans.make_bsc(p, 4)))
    out.append((lin, chans.make_identity(4)))
    out.append((lin, chans.make_constant(4)))
    for m, r, c in ((1, 1, 2), (1, 2, 3), (2, 1, 3), (2, 2, 4), (2, 3, 4), (1, 3, 4)):
        e = random_table_scheme(rng, r, m, c, f"rand(r={r},m={m},c={c})")
        out.append((e, chans.make_bsc(0.2, c)))
        out.append((e, random_matrix_channel(rng, c, c, sparsity=0.3)))
    for u, m in ((2, 1), (3, 2)):
        x = noiseless_xtx(gf_family(u, m)).encryption()
        out.append((x, chans.make_bsc(0.25, x.c)))
    full = identity_code(2).as_encryption()
    out.append((full, chans.make_identity(2)))
    out.append((full, chans.make_bsc(0.1, 2)))
    small411, _ = build_prepend_scheme(otp_scheme(2), 0.25, 3)
    out.append((small411, chans.make_bsc(0.25, small411.c)))
    return out


def suite_relations(seed: int = 0) -> list[RelationCheck]:
    out = []
    for e, ch in relation_instances(seed):
        out.extend(relation_ledger(e, ch))
    g = np.array([[1, 0, 1, 1], [0, 1, 1, 0]])
    for base in (chans.make_bsc(0.2), chans.make_bsc(0.35), chans.make_bec(0.3)):
        out.append(check_misr_to_mis(xor_linear(g, 2), base))
    # additive-noise channel on the whole ciphertext: E(M) = M G
    noise = chans.XorNoiseChannel(np.array([0.4, 0.3, 0.2, 0.1]))
    lin = xor_linear(np.array([[1, 1]]), 0, "rep-linear(2)")
    w = induced_matrix(lin, noise)
    sym = chans.symmetric_partition(w) is not None
    out.append(RelationCheck("induced-symmetric", f"{lin.name} / {noise.describe()}", 0.0 if sym else 1.0, 0.0))
    rep = prepend_report(10, 0.25, 5)
    inst = "prepend-rep5(otp(10)) / bsc(0.25)"
    out.append(RelationCheck("ds>=1/2", inst, 0.5, rep["ds_pair"]))
    out.append(RelationCheck("misr-increase<0.02", inst, rep["misr_increase"], 0.02))
    return out


# -- xtx ------------------------------------------------------------------------------


def suite_xtx(seed: int = 0) -> list[RelationCheck]:
    out = []
    rsr_id_gaps = []
    for u in range(1, 11):
        for p in (0.1, 0.25, 0.4):
            got = adv_rs_r(identity_code(u), chans.make_bsc(p, u)).value
            rsr_id_gaps.append((abs(got - (1 - p) ** u), 1e-12))
    out.append(worst("rsr(id,bsc)==(1-p)^u", "u=1..10, p in {0.1,0.25,0.4}", rsr_id_gaps, tol=0.0))
    for u in (4, 6):
        for m in (1, 2):
            for p in (0.1, 0.25, 0.4):
                e = noiseless_xtx(gf_family(u, m)).encryption()
                ds = adv_ds(e, chans.make_bsc(p, e.c)).value
                out.append(
                    RelationCheck("ds<=sqrt(2^m(1-p)^u)", f"{e.name} / bsc({p})", ds, ds_bound_bsc_noiseless_receiver(m, u, p))
                )
    out.extend(composite_error_checks())
    out.extend(systematic_checks())
    for row, want in zip(rate_table(RATE_TABLE_P), ((0.5, 1), (0.42, 0.74), (0.34, 0.51), (0.24, 0.32), (0.13, 0.15))):
        got = (row["rate_display"], row["rate2_display"])
        out.append(RelationCheck("rate-table-row", f"p={row['p']}", float(got != want), 0.0, 0.0))
    return out


def composite_error_checks() -> list[RelationCheck]:
    """Composite XtX decryption error against the sum of the code errors."""
    out = []
    fam = gf_family(2, 1)
    en1, en2 = repetition_code(3, 2), repetition_code(3, 3)
    for p in (0.01, 0.05, 0.1):
        s = build_xtx(fam, en1, en2)
        ch1, ch2 = chans.make_bsc(p, en1.b), chans.make_bsc(p, en2.b)
        de = decryption_error(s.encryption(), s.decoder(), chans.parallel(ch1, ch2)).value
        d1 = decryption_error(en1, None, ch1).value
        d2 = decryption_error(en2, None, ch2).value
        out.append(RelationCheck("de<=d1+d2", f"{s.name} / bsc({p})", de, d1 + d2))
    return out


def systematic_checks(us=(2, 4, 6, 8), ps=(0.1, 0.25, 0.4)) -> list[RelationCheck]:
    """Parity-systematic recovery against both the reduction and the BSC bound."""
    out = []
    for u in us:
        code = parity_code(u)
        for p in ps:
            got = adv_rs_r(code, chans.make_bsc(p, u + 1)).value
            rsr_id = adv_rs_r(identity_code(u), chans.make_bsc(p, u)).value
            inst = f"{code.name} / bsc({p})"
            out.append(RelationCheck("rsr<=2^r*rsr_id", inst, got, rsr_systematic_reduction(1, rsr_id)))
            out.append(RelationCheck("rsr<=2^r(1-p)^(u+r)", inst, got, rsr_bsc_injective_bound(u, 1, p)))
    return out


# -- hash -------------------------------------------------------------------------------


def hash_families():
    return [matrix_family(u, m) for u, m in ((2, 1), (3, 2), (4, 1), (4, 2))] + [
        gf_family(u, m) for u, m in ((2, 1), (4, 2), (6, 2), (6, 3), (8, 4))
    ]


def lhl_grid():
    """(family, source, side channel) triples of the leftover-hash grid."""
    for u in (4, 6):
        for m in (1, 2):
            for fam in (matrix_family(u, m), gf_family(u, m)):
                side = {
                    "constant": chans.make_constant(u),
                    "bsc(0.25)": chans.make_bsc(0.25, u),
                    "first-bit": chans.parallel(chans.make_identity(1), chans.make_constant(u - 1)),
                }
                for name, ch in side.items():
                    yield fam, Dist.uniform(u), ch, name


def suite_hash(seed: int = 0) -> list[RelationCheck]:
    out = []
    for fam in hash_families():
        cp = max_collision_prob(fam, method="pairs")
        out.append(RelationCheck("collision<=2^-m", fam.describe(), cp, 2.0**-fam.m, 0.0))
    for fam, src, ch, name in lhl_grid():
        sd, bound = lhl_instance(fam, src, ch)
        out.append(RelationCheck("lhl", f"{fam.describe()} / {name}", sd, bound))
    for u in (4, 6, 8):
        fam = gf_family(u, max(1, u // 2))
        t = fam.table()
        xs = np.arange(1 << u)
        ok = all(np.array_equal(t[:, a ^ xs], t[:, [a]] ^ t[:, xs]) for a in range(1 << u))
        out.append(RelationCheck("gf-linear", fam.describe(), float(not ok), 0.0, 0.0))
    return out


RUNNERS = {
    "probcore": suite_probcore,
    "relations": suite_relations,
    "xtx": suite_xtx,
    "hash": suite_hash,
}


def run_suite(name: str, seed: int = 0) -> list[RelationCheck]:
    if name == "all":
        return [c for s in SUITES for c in RUNNERS[s](seed)]
    if name not in RUNNERS:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)} or all")
    return RUNNERS[name](seed)


__all__ = ["run_suite", "SUITES", "NORM_TOL"]
