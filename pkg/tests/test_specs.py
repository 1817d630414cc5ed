import pytest

from wiretap.channels import BSCChannel, ParallelChannel, channels_close, make_bsc, make_identity, parallel
from wiretap.coding import EncryptionFn
from wiretap.errors import SpecParseError
from wiretap.specs import as_encryption, parse_channel, parse_code, parse_hash, parse_scheme
from wiretap.xtx import XtXScheme


def test_bsc_forms():
    ch = parse_channel("bsc(0.25)^6")
    assert isinstance(ch, BSCChannel) and ch.in_width == 6 and ch.p == 0.25
    assert parse_channel("bsc(0.1)", width=4).in_width == 4
    assert parse_channel("bsc(0.1)").in_width == 1


def test_identity_constant_and_widths():
    assert parse_channel("id(3)").out_width == 3
    c = parse_channel("constant", width=5)
    assert (c.in_width, c.out_width) == (5, 0)
    assert parse_channel("const(4,2)").out_width == 2
    with pytest.raises(SpecParseError):
        parse_channel("constant")
    with pytest.raises(SpecParseError):
        parse_channel("id(3)", width=4)


def test_parallel_fills_missing_width():
    ch = parse_channel("par(bsc(0.2), id(2))", width=5)
    assert isinstance(ch, ParallelChannel)
    assert channels_close(ch, parallel(make_bsc(0.2, 3), make_identity(2)))


def test_composition_and_generic_power():
    ch = parse_channel("comp(bsc(0.1)^2, bsc(0.2)^2)")
    # two BSCs in series flip with 0.1*0.8 + 0.9*0.2
    assert channels_close(ch, make_bsc(0.26, 2))
    erasure = parse_channel("bec(0.3)^2")
    assert (erasure.in_width, erasure.out_width) == (2, 4)


def test_xor_noise_channel():
    ch = parse_channel("xor(0.7, 0.1, 0.1, 0.1)")
    assert ch.in_width == 2
    assert ch.prob(0, 3) == pytest.approx(0.1)


def test_matrix_file_round_trip(tmp_path):
    from wiretap.channels import save_matrix_channel

    path = tmp_path / "ch.txt"
    save_matrix_channel(make_bsc(0.3, 2), path)
    assert channels_close(parse_channel(f"matrix({path})"), make_bsc(0.3, 2))
    with pytest.raises(SpecParseError):
        parse_channel(f"matrix({tmp_path}/missing.txt)")


def test_codes_and_hashes():
    assert parse_code("rep(3)").b == 3
    assert (parse_code("rep(3,2)").a, parse_code("rep(3,2)").b) == (2, 6)
    assert parse_code("sys(parity,6)").b == 7
    assert parse_code("id(4)").b == 4
    fam = parse_hash("gf(6,2)")
    assert (fam.u, fam.m, fam.h) == (6, 2, 6)
    assert parse_hash("mx(3,2)").h == 6


def test_generator_matrix_code(tmp_path):
    path = tmp_path / "g.txt"
    path.write_text("1 3\n1 1 1\n")
    code = parse_code(f"genmatrix({path})")
    assert code.encode(1) == 0b111


def test_schemes():
    s = parse_scheme("xtx(hash=gf(6,2), en1=sys(parity,6), en2=id(8))")
    assert isinstance(s, XtXScheme)
    e = as_encryption(s)
    assert (e.r, e.m, e.c) == (12, 2, 15)
    keyed = parse_scheme("xtx(hash=gf(3,1), en1=id(3), en2=id(4), key=5)")
    assert keyed.fixed_key == 5 and as_encryption(keyed).r == 3
    otp = parse_scheme("otp(3)")
    assert isinstance(otp, EncryptionFn) and otp(5, 3) == 6
    assert as_encryption(parse_scheme("rep(3)")).c == 3


@pytest.mark.parametrize(
    "text,pos",
    [
        ("bsc(0.1", 7),
        ("bsc(0.1))", 8),
        ("bsc(0.1)^x", 9),
        ("foo(1)", 0),
        ("rep(4)", 0),
        ("bsc(0.7)", 0),
        ("", 0),
        ("xtx(hash=gf(6,2), en1=id(5), en2=id(8))", 0),
        ("xtx(hash=gf(6,2), en1=id(6))", 0),
        ("xtx(hash=gf(6,2), en1=id(6), en2=id(8), extra=1)", 0),
        ("id(3) $", 6),
    ],
)
def test_parse_errors_carry_position(text, pos):
    with pytest.raises(SpecParseError) as info:
        parse_scheme(text) if text.startswith(("xtx", "rep")) else parse_channel(text)
    assert info.value.pos == pos
    assert "position" in str(info.value)
