"""End-to-end acceptance criteria, one test per criterion.

Each test records a "PASS/FAIL criterion N: ..." line; the lines are echoed
in the pytest terminal summary and also when this file is run directly.
"""

import math
import time

import numpy as np
from wiretap.channels import make_bec, make_bsc, parallel
from wiretap.coding import decryption_error, identity_code, parity_code, repetition_code, xor_linear
from wiretap.hashing import gf_family, lhl_instance, max_collision_prob
from wiretap.metrics import adv_ds, adv_rs_r, induced_matrix
from wiretap.probcore import vec_sd
from wiretap.relations import (
    build_prepend_scheme,
    check_misr_to_mis,
    relation_ledger,
    otp_scheme,
    prepend_report,
)
from wiretap.report import rng_stream
from wiretap.suites import (
    data_processing_pairs,
    entropy_gap_pairs,
    relation_instances,
    hash_families,
    lhl_grid,
    mi_kl_pairs,
    scalar_h_pairs,
    marginal_psd_pairs,
    side_info_pairs,
    pinsker_pairs,
    gap_pair_checks,
    random_matrix_channel,
    random_table_scheme,
)
from wiretap.xtx import (
    RATE_TABLE_P,
    build_xtx,
    ds_bound_bsc_noiseless_receiver,
    noiseless_xtx,
    rate_table,
    rsr_bsc_injective_bound,
    rsr_systematic_reduction,
)

LINES: dict[int, str] = {}


def record(n: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
    LINES[n] = line
    print(line)
    assert ok, line


def test_criterion_1_rate_table():
    t0 = time.perf_counter()
    rows = rate_table(RATE_TABLE_P)
    elapsed = time.perf_counter() - t0
    rate = tuple(r["rate_display"] for r in rows)
    rate2 = tuple(r["rate2_display"] for r in rows)
    ok = rate == (0.5, 0.42, 0.34, 0.24, 0.13) and rate2 == (1, 0.74, 0.51, 0.32, 0.15) and elapsed < 1.0
    record(1, ok, f"Rate={rate} Rate2={rate2} in {elapsed * 1e3:.1f} ms")


def test_criterion_2_identity_recovery_exact():
    worst = 0.0
    for u in range(1, 11):
        for p in (0.1, 0.25, 0.4):
            got = adv_rs_r(identity_code(u), make_bsc(p, u)).value
            worst = max(worst, abs(got - (1 - p) ** u))
    record(2, worst <= 1e-12, f"max |rsr - (1-p)^u| = {worst:.2e} over 30 points")


def test_criterion_3_noiseless_receiver_grid():
    worst_slack, n = math.inf, 0
    for u in (4, 6):
        for m in (1, 2):
            for p in (0.1, 0.25, 0.4):
                e = noiseless_xtx(gf_family(u, m)).encryption()
                ds = adv_ds(e, make_bsc(p, e.c)).value
                worst_slack = min(worst_slack, ds_bound_bsc_noiseless_receiver(m, u, p) - ds)
                n += 1
    record(3, worst_slack >= 0, f"{n} grid points, min(bound - ds) = {worst_slack:.4g}")


def test_criterion_4_metric_relations():
    instances = relation_instances()
    checks = [c for e, ch in instances for c in relation_ledger(e, ch)]
    worst = min(c.slack for c in checks)
    bad = [c.relation for c in checks if not c.passed]
    ok = len(instances) >= 20 and not bad
    record(4, ok, f"{len(instances)} instances, {len(checks)} checks, min slack {worst:.3g}, failures {bad}")


def test_criterion_5_kl_identity_and_two_point():
    kl_worst = max(gap for gap, _ in mi_kl_pairs(rng_stream(0, 0), 200))
    rng = rng_stream(0, 1)
    tp_worst = 0.0
    for _ in range(100):
        e = random_table_scheme(rng, 2, 1, 3)
        W = induced_matrix(e, random_matrix_channel(rng, 3, 3, 0.2))
        joint = 0.5 * W
        prod = np.outer([0.5, 0.5], joint.sum(axis=0))
        tp_worst = max(tp_worst, abs(vec_sd(joint.ravel(), prod.ravel()) - 0.5 * vec_sd(W[0], W[1])))
    ok = kl_worst <= 1e-10 and tp_worst <= 1e-10
    record(5, ok, f"max |I - D(J||I)| = {kl_worst:.1e} (200 joints), max two-point gap = {tp_worst:.1e} (100 schemes)")


def test_criterion_6_property_suites():
    gens = {
        "pinsker": pinsker_pairs,
        "entropy-gap": entropy_gap_pairs,
        "scalar-h": scalar_h_pairs,
        "sd-to-marginal": marginal_psd_pairs,
        "data-processing": data_processing_pairs,
        "side-info": side_info_pairs,
    }
    parts, ok = [], True
    for k, (name, gen) in enumerate(gens.items()):
        pairs = list(gen(rng_stream(6, k), 1000))
        violations = sum(1 for lhs, rhs in pairs if lhs > rhs + 1e-12)
        ok &= len(pairs) >= 500 and violations == 0
        parts.append(f"{name} {violations}/{len(pairs)}")
    record(6, ok, "violations: " + ", ".join(parts))


def test_criterion_7_entropy_gap_construction():
    checks = gap_pair_checks()
    detail = "; ".join(f"{c.instance} {c.relation} slack {c.slack:.3g}" for c in checks)
    record(7, all(c.passed for c in checks), detail)


def test_criterion_8_misr_without_ds():
    small = prepend_report(10, 0.25, 5)
    e, attack = build_prepend_scheme(otp_scheme(10), 0.25)
    mc = adv_ds(
        e, make_bsc(0.25, e.c), mode="mc", pairs=[attack.pair], trials=100_000, seed=0, distinguisher=attack
    )
    ok = small["ds_pair"] >= 0.5 and small["misr_increase"] < 0.02 and mc.value - mc.half_width >= 0.5
    record(
        8,
        ok,
        f"n=5 exact ds {small['ds_pair']:.5f}, mis-r increase {small['misr_increase']:.5f}; "
        f"n={attack.n} majority attack ds {mc.value:.5f} +/- {mc.half_width:.5f} (1e5 trials)",
    )


def test_criterion_9_linear_schemes_symmetric_channels():
    g = np.array([[1, 0, 1, 1], [0, 1, 1, 0]])
    worst, all_sym, n = math.inf, True, 0
    for r in (0, 1, 2):
        for base in (make_bsc(0.05), make_bsc(0.2), make_bsc(0.35), make_bec(0.3)):
            c = check_misr_to_mis(xor_linear(g, r), base)
            all_sym &= c.precondition_met and c.certified
            worst = min(worst, c.rhs + 1e-6 - c.lhs)
            n += 1
    record(9, worst >= 0 and all_sym, f"{n} instances, min(misr + 1e-6 - mis) = {worst:.3g}, all induced symmetric: {all_sym}")


def test_criterion_10_decoding_and_recovery_bounds():
    de_worst, n_de = math.inf, 0
    grids = [(gf_family(2, 1), repetition_code(3, 2), repetition_code(3, 3)),
             (gf_family(2, 1), repetition_code(5, 2), repetition_code(3, 3)),
             (gf_family(3, 1), repetition_code(3, 3), identity_code(4))]
    for fam, en1, en2 in grids:
        for p in (0.01, 0.05, 0.1, 0.2):
            s = build_xtx(fam, en1, en2)
            ch1, ch2 = make_bsc(p, en1.b), make_bsc(p, en2.b)
            de = decryption_error(s.encryption(), s.decoder(), parallel(ch1, ch2)).value
            d1 = decryption_error(en1, None, ch1).value
            d2 = decryption_error(en2, None, ch2).value
            de_worst = min(de_worst, d1 + d2 - de)
            n_de += 1
    sys_worst, n_sys = math.inf, 0
    for u in range(1, 9):
        for p in (0.1, 0.25, 0.4):
            got = adv_rs_r(parity_code(u), make_bsc(p, u + 1)).value
            rsr_id = adv_rs_r(identity_code(u), make_bsc(p, u)).value
            sys_worst = min(sys_worst, rsr_systematic_reduction(1, rsr_id) - got, rsr_bsc_injective_bound(u, 1, p) - got)
            n_sys += 1
    ok = de_worst >= 0 and sys_worst >= -1e-12
    record(10, ok, f"DE: {n_de} instances, min(d1+d2-de) = {de_worst:.3g}; systematic rs-r: {n_sys} instances, min slack {sys_worst:.3g}")


def test_criterion_11_universality_and_lhl():
    cp_worst = min(2.0**-f.m - max_collision_prob(f, method="pairs") for f in hash_families())
    kinds = {f.describe().split("(")[0] for f in hash_families()}
    lhl_worst, n = math.inf, 0
    for fam, src, ch, _ in lhl_grid():
        sd, bound = lhl_instance(fam, src, ch)
        lhl_worst = min(lhl_worst, bound - sd)
        n += 1
    ok = cp_worst >= 0 and lhl_worst >= -1e-12 and len(kinds) == 2
    record(11, ok, f"collision slack {cp_worst:.3g} over {len(hash_families())} families {sorted(kinds)}; LHL {n} points, min slack {lhl_worst:.3g}")


if __name__ == "__main__":
    import sys

    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_criterion_")]
    tests.sort(key=lambda f: int(f.__name__.split("_")[2]))
    failed = 0
    for t in tests:
        try:
            t()
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
