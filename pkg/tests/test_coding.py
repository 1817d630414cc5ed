import math

import numpy as np
import pytest

from wiretap.channels import make_bsc, make_identity, parallel
from wiretap.coding import (
    EncryptionFn,
    decryption_error,
    generator_matrix_code,
    identity_code,
    is_message_linear,
    is_separable,
    load_generator_matrix,
    make_systematic,
    parity_code,
    repetition_code,
    xor_linear,
)
from wiretap.errors import SizeCapExceeded, set_size_cap

HAMMING_G = np.array(
    [[1, 0, 0, 0, 1, 1, 0], [0, 1, 0, 0, 1, 0, 1], [0, 0, 1, 0, 0, 1, 1], [0, 0, 0, 1, 1, 1, 1]]
)


def binomial_tail(n, p):
    return sum(math.comb(n, j) * p**j * (1 - p) ** (n - j) for j in range(n // 2 + 1, n + 1))


def shipped_codes():
    return [
        identity_code(5),
        repetition_code(3),
        repetition_code(5, 2),
        parity_code(6),
        generator_matrix_code(HAMMING_G),
        make_systematic(lambda u: u, 4, 4, "sys(copy,4)"),
    ]


def test_repetition_examples():
    rep = repetition_code(3)
    assert rep.encode(1) == 0b111
    assert rep.decode(0b101) == 1
    assert rep.decode(0b100) == 0
    with pytest.raises(ValueError):
        repetition_code(4)


def test_parity_and_copy_systematic():
    assert parity_code(3).encode(0b101) == 0b1010
    copy = make_systematic(lambda u: u, 3, 3)
    assert copy.encode(0b110) == 0b110110


@pytest.mark.parametrize("code", shipped_codes(), ids=lambda c: c.name)
def test_injective_and_round_trip(code):
    assert code.is_injective()
    xs = np.arange(1 << code.a)
    assert np.array_equal(code.decode_array(code.encode_array(xs)), xs)


def test_systematic_prefix_certificate():
    for u in range(1, 13):
        assert parity_code(u).has_prefix_property()


def test_separable_examples():
    lin = xor_linear(HAMMING_G, 3)
    assert is_separable(lin) and is_message_linear(lin)
    and_scheme = EncryptionFn(1, 1, 2, lambda r, m: ((m & r) << 1) | r)
    assert not is_separable(and_scheme)
    coinless = identity_code(3).as_encryption()
    assert is_separable(coinless)


def test_message_linear_examples():
    affine = EncryptionFn(0, 2, 3, lambda r, m: (m << 1) | 1)
    assert not is_message_linear(affine)
    sbox = [0, 1, 1, 1]  # sbox[1] ^ sbox[2] != sbox[3]
    nonlinear = EncryptionFn(0, 2, 2, lambda r, m: sbox[m])
    assert not is_message_linear(nonlinear)
    assert is_message_linear(generator_matrix_code(HAMMING_G).as_encryption())


def test_xor_linear_layout():
    e = xor_linear(np.array([[1, 1, 0, 0]]), 2)
    # coins land in the last two ciphertext bits
    assert e(0b11, 1) == 0b1111
    assert e(0b01, 0) == 0b0001
    with pytest.raises(ValueError):
        xor_linear(np.array([[1, 0]]), 3)


def test_identity_over_identity_has_no_error():
    assert decryption_error(identity_code(4), None, make_identity(4)).value == 0.0


@pytest.mark.parametrize("n", [1, 3, 5, 7])
@pytest.mark.parametrize("p", [0.05, 0.1, 0.3])
def test_repetition_error_is_binomial_tail(n, p):
    got = decryption_error(repetition_code(n), None, make_bsc(p, n)).value
    assert got == pytest.approx(binomial_tail(n, p), abs=1e-14)


def test_repetition_three_exact():
    assert decryption_error(repetition_code(3), None, make_bsc(0.1, 3)).value == pytest.approx(0.028, abs=1e-15)


def test_monte_carlo_agrees_within_three_sigma():
    code = repetition_code(5, 2)
    ch = make_bsc(0.2, 10)
    exact = decryption_error(code, None, ch).value
    mc = decryption_error(code, None, ch, mode="mc", trials=40_000, seed=3)
    assert mc.mode == "monte-carlo" and mc.trials == 40_000
    # max over 4 per-message estimates is biased up slightly; allow the band
    assert abs(mc.value - exact) <= mc.half_width


def test_monte_carlo_is_reproducible():
    code = repetition_code(3)
    a = decryption_error(code, None, make_bsc(0.3, 3), mode="mc", trials=5000, seed=11)
    b = decryption_error(code, None, make_bsc(0.3, 3), mode="mc", trials=5000, seed=11)
    assert a.to_json() == b.to_json()


def test_monte_carlo_large_messages_need_list():
    code = identity_code(16)
    with pytest.raises(ValueError):
        decryption_error(code, None, make_bsc(0.01, 16), mode="mc", trials=100)
    r = decryption_error(code, None, make_bsc(0.01, 16), mode="mc", trials=2000, messages=[0, 7])
    assert r.lower_bound


def test_hamming_corrects_one_error():
    code = generator_matrix_code(HAMMING_G)
    for x in range(16):
        word = code.encode(x)
        for bit in range(7):
            assert code.decode(word ^ (1 << bit)) == x


def test_generator_matrix_file(tmp_path):
    path = tmp_path / "g.txt"
    path.write_text("4 7\n" + "\n".join(" ".join(map(str, row)) for row in HAMMING_G) + "\n")
    code = load_generator_matrix(path)
    assert (code.a, code.b) == (4, 7)
    path.write_text("2 2\n1 0 2 1\n")
    with pytest.raises(ValueError):
        load_generator_matrix(path)


def test_exact_error_respects_cap():
    set_size_cap(2**6)
    with pytest.raises(SizeCapExceeded):
        decryption_error(repetition_code(7), None, make_bsc(0.1, 7))


def test_split_decoding_of_parallel_blocks():
    code = repetition_code(3, 2)
    ch = parallel(make_bsc(0.1, 3), make_identity(3))
    # only the first block is noisy, so the error is one block's tail
    assert decryption_error(code, None, ch).value == pytest.approx(binomial_tail(3, 0.1))
