import math

import numpy as np
import pytest

from wiretap.channels import MatrixChannel, make_bec, make_bsc, power
from wiretap.coding import EncryptionFn, identity_code, xor_linear
from wiretap.metrics import adv_ds, adv_mis, adv_mis_r
from wiretap.relations import (
    TOL,
    build_prepend_scheme,
    check_ds_ss,
    check_ds_to_mis,
    check_mis_to_ds,
    check_misr_to_mis,
    ds_to_mis_bound,
    relation_ledger,
    otp_scheme,
    prepend_pair_ds,
    prepend_misr,
    majority_block_length,
    prepend_report,
)
from wiretap.suites import relation_instances, random_matrix_channel, random_table_scheme

G = np.array([[1, 0, 1, 1], [0, 1, 1, 0]])


def binom_sd(n, p):
    """SD between Bin(n, p) and Bin(n, 1-p), summed term by term."""
    return 0.5 * sum(
        math.comb(n, k) * abs(p**k * (1 - p) ** (n - k) - (1 - p) ** k * p ** (n - k)) for k in range(n + 1)
    )


def test_fixed_instance_set_is_large_and_small():
    inst = relation_instances()
    assert len(inst) >= 20
    for e, ch in inst:
        assert e.m <= 2 and e.c <= 10 and ch.out_width <= e.c


@pytest.mark.parametrize("idx", range(len(relation_instances())))
def test_relation_ledger_holds(idx):
    e, ch = relation_instances()[idx]
    checks = relation_ledger(e, ch)
    assert [c.relation for c in checks] == ["ss<=ds", "ds<=2ss", "ds<=sqrt(2mis)", "mis<=2eps*lg(2^c/eps)"]
    for c in checks:
        assert c.passed, c.to_json()


def test_relation_ledger_on_random_instances(rng):
    for _ in range(20):
        e = random_table_scheme(rng, 2, 2, 3)
        ch = random_matrix_channel(rng, 3, 2, 0.3)
        assert all(c.passed for c in relation_ledger(e, ch))


def test_ds_ss_needs_small_messages():
    with pytest.raises(ValueError):
        check_ds_ss(identity_code(3).as_encryption(), make_bsc(0.1, 3))


def test_ds_to_mis_bound_values():
    assert ds_to_mis_bound(0.0, 4) == 0.0
    assert ds_to_mis_bound(0.5, 2) == pytest.approx(2 * 0.5 * 3)
    assert ds_to_mis_bound(1.0, 3) == pytest.approx(6.0)


def test_perfectly_hidden_scheme_has_zero_sides():
    otp = otp_scheme(2)
    from wiretap.channels import make_identity

    ch = make_identity(2)
    assert check_ds_to_mis(otp, ch).lhs == pytest.approx(0.0, abs=1e-12)
    assert check_mis_to_ds(otp, ch).passed


def test_checks_record_raw_slack():
    e = identity_code(1).as_encryption()
    c = check_mis_to_ds(e, make_bsc(0.1, 1))
    assert c.tol == TOL == 1e-8
    assert c.slack == pytest.approx(c.rhs - c.lhs)
    assert c.to_json()["pass"] is True


# -- guarded implication ----------------------------------------------------------------


@pytest.mark.parametrize("base", [make_bsc(0.05), make_bsc(0.2), make_bsc(0.35), make_bec(0.3)])
@pytest.mark.parametrize("r", [0, 1, 2])
def test_misr_bounds_mis_for_linear_schemes(base, r):
    e = xor_linear(G, r)
    c = check_misr_to_mis(e, base)
    assert c.precondition_met and c.certified
    assert c.lhs <= c.rhs + 1e-6
    assert c.passed


def test_misr_equals_mis_on_symmetric_instances():
    e = xor_linear(G, 1)
    ch = power(make_bsc(0.2), e.c)
    assert adv_mis(e, ch).value == pytest.approx(adv_mis_r(e, ch).value, abs=1e-8)


def test_misr_guard_reports_unmet_preconditions():
    and_scheme = EncryptionFn(1, 1, 2, lambda r, m: ((m & r) << 1) | r)
    c = check_misr_to_mis(and_scheme, make_bsc(0.1))
    assert not c.precondition_met and not c.passed
    assert c.note.startswith("PRECONDITION_NOT_MET") and "separable" in c.note
    z = MatrixChannel(np.array([[1.0, 0.0], [0.3, 0.7]]), 1, 1)
    c = check_misr_to_mis(xor_linear(G, 1), z)
    assert "symmetric base channel" in c.note
    assert math.isnan(c.lhs)


def test_misr_guard_needs_bit_channel():
    with pytest.raises(ValueError):
        check_misr_to_mis(xor_linear(G, 1), make_bsc(0.1, 2))


def test_mis_can_exceed_misr_without_linearity():
    # a small prepend construction: random messages hide the attack, chosen ones do not
    e, _ = build_prepend_scheme(otp_scheme(3), 0.25, 3)
    ch = make_bsc(0.25, e.c)
    assert adv_mis(e, ch).value > adv_mis_r(e, ch).value + 0.1


# -- mis-r without ds ------------------------------------------------------------------------


def test_majority_block_length():
    assert majority_block_length(0.25) == 45
    for p in (0.0, 0.1, 0.3, 0.45):
        n = majority_block_length(p)
        k = (0.5 - p) ** 2 / 2
        assert math.exp(-n * k) < 0.25 <= math.exp(-(n - 1) * k) or n == 1
    with pytest.raises(ValueError):
        majority_block_length(0.5)


def test_counterexample_layout():
    base = otp_scheme(3)
    e, attack = build_prepend_scheme(base, 0.25, 5)
    assert (e.r, e.m, e.c) == (4, 3, 8)
    assert e(0b0101, 0b000) == 0b000_00101 ^ 0
    assert e(0b0000, 0b111) >> 3 == 0b11111
    # the extra coin decides the block for other messages
    assert e(0b1000, 0b010) >> 3 == 0b11111
    assert e(0b0000, 0b010) >> 3 == 0
    assert attack.pair == (0, 7)
    assert list(attack(np.array([0b11000_000, 0b11100_000]))) == [0, 1]


@pytest.mark.parametrize("n", [1, 3, 5, 9])
def test_pair_distance_is_binomial(n):
    assert prepend_pair_ds(n, 0.25) == pytest.approx(binom_sd(n, 0.25), abs=1e-14)


@pytest.mark.parametrize("m,n", [(3, 3), (4, 5), (2, 4)])
def test_factorized_misr_matches_generic_engine(m, n):
    base = otp_scheme(m)
    e, _ = build_prepend_scheme(base, 0.25, n)
    ch = make_bsc(0.25, e.c)
    base_misr, mod_misr = prepend_misr(base, make_bsc(0.25, m), 0.25, n)
    assert mod_misr == pytest.approx(adv_mis_r(e, ch).value, abs=1e-12)
    assert base_misr == pytest.approx(0.0, abs=1e-12)
    ds = adv_ds(e, ch, pairs=[(0, (1 << m) - 1)]).value
    assert ds == pytest.approx(prepend_pair_ds(n, 0.25), abs=1e-12)


def test_separation_at_ten_bits():
    rep = prepend_report(10, 0.25, 5)
    assert rep["ds_pair"] >= 0.5
    assert 0 <= rep["misr_increase"] < 0.02
    full = prepend_report(10, 0.25, 45)
    assert full["ds_pair"] > 0.999 and full["misr_increase"] < 0.02


def test_majority_attack_monte_carlo():
    e, attack = build_prepend_scheme(otp_scheme(10), 0.25)
    rep = adv_ds(e, make_bsc(0.25, e.c), mode="mc", pairs=[attack.pair], trials=20_000, seed=4, distinguisher=attack)
    assert rep.value - rep.half_width >= 0.5
