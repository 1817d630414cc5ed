"""Encryption functions, error-correcting code fixtures and decryption error.

An encryption function is a deterministic map of (coins R, message M) to a
ciphertext X, all handled as integers of declared bit widths.  Codes are
injective maps with an attached decoder; a code doubles as an encryption
function with no coins.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from wiretap.channels import Channel
from wiretap.errors import check_cap
from wiretap.report import AdvReport, binomial_half_width, rng_stream

MC_MAX_MESSAGE_BITS = 12


def _vectorize(fn: Callable) -> Callable:
    ufunc = np.frompyfunc(fn, 1, 1)
    return lambda xs: np.asarray(ufunc(np.asarray(xs, dtype=np.int64)), dtype=np.int64)


def _vectorize2(fn: Callable) -> Callable:
    ufunc = np.frompyfunc(fn, 2, 1)
    return lambda a, b: np.asarray(
        ufunc(np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64)), dtype=np.int64
    )


@dataclass(frozen=True, eq=False)
class EncryptionFn:
    """X = fn(R, M) with R in {0,1}^r, M in {0,1}^m, X in {0,1}^c.

    ``vec_fn``, when given, must accept broadcastable int64 arrays; it is
    used for whole-table enumeration and Monte-Carlo runs.
    """

    r: int
    m: int
    c: int
    fn: Callable[[int, int], int]
    vec_fn: Callable | None = None
    name: str = "E"

    def __call__(self, coins: int, msg: int) -> int:
        return self.fn(coins, msg)

    @property
    def rate(self) -> float:
        return self.m / self.c

    def apply(self, coins, msgs) -> np.ndarray:
        f = self.vec_fn or _vectorize2(self.fn)
        return np.asarray(f(coins, msgs), dtype=np.int64)

    def table(self, msgs=None) -> np.ndarray:
        """Ciphertexts indexed [message, coins]."""
        check_cap(f"coin space of {self.name}", 1 << self.r)
        if msgs is None:
            check_cap(f"message space of {self.name}", 1 << self.m)
            msgs = np.arange(1 << self.m, dtype=np.int64)
        msgs = np.asarray(msgs, dtype=np.int64)
        check_cap(f"encryption table of {self.name}", msgs.size << self.r)
        coins = np.arange(1 << self.r, dtype=np.int64)
        return self.apply(coins[None, :], msgs[:, None])

    def ciphertext_laws(self, msgs=None) -> np.ndarray:
        """Row i is the law of E(M_i) over all 2^c ciphertexts."""
        check_cap(f"ciphertext space of {self.name}", 1 << self.c)
        tab = self.table(msgs)
        laws = np.zeros((tab.shape[0], 1 << self.c))
        scale = 2.0**-self.r
        for i, row in enumerate(tab):
            laws[i] = np.bincount(row, minlength=1 << self.c) * scale
        return laws

    def encrypt(self, msg: int, rng: np.random.Generator) -> int:
        coins = int(rng.integers(0, 1 << self.r)) if self.r else 0
        return int(self.fn(coins, msg))

    def encrypt_batch(self, msgs, rng: np.random.Generator) -> np.ndarray:
        msgs = np.asarray(msgs, dtype=np.int64)
        coins = rng.integers(0, 1 << self.r, size=msgs.shape) if self.r else np.zeros_like(msgs)
        return self.apply(coins, msgs)


@dataclass(frozen=True, eq=False)
class CodeFn:
    """Injective encoder from a bits to b bits with a decoder from d bits."""

    a: int
    b: int
    encode: Callable[[int], int]
    decode: Callable[[int], int]
    d: int | None = None
    name: str = "code"
    encode_vec: Callable | None = None
    decode_vec: Callable | None = None

    def __post_init__(self):
        if self.d is None:
            object.__setattr__(self, "d", self.b)

    def encode_array(self, xs) -> np.ndarray:
        return (self.encode_vec or _vectorize(self.encode))(xs)

    def decode_array(self, ys) -> np.ndarray:
        return (self.decode_vec or _vectorize(self.decode))(ys)

    def codewords(self) -> np.ndarray:
        check_cap(f"message space of {self.name}", 1 << self.a)
        return self.encode_array(np.arange(1 << self.a, dtype=np.int64))

    def is_injective(self) -> bool:
        words = self.codewords()
        return np.unique(words).size == words.size

    def as_encryption(self) -> EncryptionFn:
        vec = None
        if self.encode_vec is not None:
            enc = self.encode_vec
            vec = lambda coins, msgs: enc(np.broadcast_arrays(coins, msgs)[1])
        return EncryptionFn(0, self.a, self.b, lambda _r, m: self.encode(m), vec, self.name)


@dataclass(frozen=True, eq=False)
class SystematicCode(CodeFn):
    """encode(U) = U || Rd(U), with ``r`` redundancy bits."""

    r: int = 0
    redundancy: Callable[[int], int] = field(default=lambda u: 0)

    def has_prefix_property(self) -> bool:
        check_cap(f"message space of {self.name}", 1 << self.a)
        xs = np.arange(1 << self.a, dtype=np.int64)
        return bool(np.all(self.encode_array(xs) >> self.r == xs))


# -- structural predicates ---------------------------------------------------------


def is_separable(e: EncryptionFn) -> bool:
    """E(R, M) == E(R, 0^m) xor E(0^r, M) for every (R, M)."""
    tab = e.table()
    return bool(np.all(tab == (tab[0][None, :] ^ tab[:, 0][:, None])))


def is_message_linear(e: EncryptionFn) -> bool:
    """M -> E(0^r, M) is GF(2)-linear, including E(0^r, 0^m) = 0^c."""
    check_cap(f"message pairs of {e.name}", 1 << (2 * e.m))
    msgs = np.arange(1 << e.m, dtype=np.int64)
    images = e.apply(np.zeros_like(msgs), msgs)
    if images[0] != 0:
        return False
    return bool(np.all(images[msgs[:, None] ^ msgs[None, :]] == images[:, None] ^ images[None, :]))


# -- code fixtures -----------------------------------------------------------------


def identity_code(n: int) -> CodeFn:
    ident = lambda x: x
    vec = lambda xs: np.asarray(xs, dtype=np.int64).copy()
    return CodeFn(n, n, ident, ident, name=f"id({n})", encode_vec=vec, decode_vec=vec)


def repetition_code(n: int, k: int = 1) -> CodeFn:
    """Each of k bits is sent n times; decoding is a per-block majority vote."""
    if n < 1 or n % 2 == 0:
        raise ValueError(f"repetition length must be odd and positive, got {n}")
    block = (1 << n) - 1
    shifts = np.arange(k - 1, -1, -1, dtype=np.int64)

    def enc_vec(xs):
        xs = np.asarray(xs, dtype=np.int64)
        out = np.zeros_like(xs)
        for s in shifts:
            out = (out << n) | (((xs >> s) & 1) * block)
        return out

    def dec_vec(ys):
        ys = np.asarray(ys, dtype=np.int64)
        out = np.zeros_like(ys)
        for s in shifts:
            ones = np.bitwise_count((ys >> (s * n)) & block).astype(np.int64)
            out = (out << 1) | (ones > n // 2)
        return out

    name = f"rep({n})" if k == 1 else f"rep({n},{k})"
    return CodeFn(
        k,
        n * k,
        lambda x: int(enc_vec(x)),
        lambda y: int(dec_vec(y)),
        name=name,
        encode_vec=enc_vec,
        decode_vec=dec_vec,
    )


def make_systematic(redundancy: Callable[[int], int], u: int, r: int, name: str = "sys") -> SystematicCode:
    """Systematic code U -> U || Rd(U); default decoder keeps the prefix."""
    rd_vec = _vectorize(redundancy)
    enc_vec = lambda xs: (np.asarray(xs, dtype=np.int64) << r) | rd_vec(xs)
    dec_vec = lambda ys: np.asarray(ys, dtype=np.int64) >> r
    return SystematicCode(
        u,
        u + r,
        lambda x: (x << r) | redundancy(x),
        lambda y: y >> r,
        name=name,
        encode_vec=enc_vec,
        decode_vec=dec_vec,
        r=r,
        redundancy=redundancy,
    )


def parity_code(u: int) -> SystematicCode:
    """Single parity bit appended to u data bits."""
    return make_systematic(lambda x: bin(x).count("1") & 1, u, 1, name=f"sys(parity,{u})")


def _gf2_rows_to_ints(rows: Sequence[Sequence[int]]) -> list[int]:
    return [int("".join(str(int(b)) for b in row), 2) for row in rows]


def generator_matrix_code(G, name: str = "genmatrix") -> CodeFn:
    """Linear code with codeword M G (M a row vector of k bits, G k x n).

    Decoding picks the nearest codeword in Hamming distance, ties broken
    towards the smaller message; practical for k <= 12.
    """
    G = np.asarray(G, dtype=np.int64) & 1
    k, n = G.shape
    rows = np.array(_gf2_rows_to_ints(G.tolist()), dtype=np.int64)
    shifts = np.arange(k - 1, -1, -1, dtype=np.int64)

    def enc_vec(xs):
        xs = np.asarray(xs, dtype=np.int64)
        out = np.zeros_like(xs)
        for row, s in zip(rows, shifts):
            out ^= ((xs >> s) & 1) * row
        return out

    words = None

    def dec_vec(ys):
        nonlocal words
        if words is None:
            check_cap(f"codebook of {name}", 1 << k)
            words = enc_vec(np.arange(1 << k, dtype=np.int64))
        ys = np.asarray(ys, dtype=np.int64)
        flat = ys.reshape(-1)
        out = np.empty_like(flat)
        for start in range(0, flat.size, 1024):
            dist = np.bitwise_count(flat[start : start + 1024, None] ^ words[None, :])
            out[start : start + 1024] = dist.argmin(axis=1)
        return out.reshape(ys.shape)

    code = CodeFn(
        k,
        n,
        lambda x: int(enc_vec(x)),
        lambda y: int(dec_vec(y)),
        name=name,
        encode_vec=enc_vec,
        decode_vec=dec_vec,
    )
    return code


def load_generator_matrix(path) -> CodeFn:
    """File format: ``<rows> <cols>`` then one row of 0/1 entries per line."""
    with open(path) as fh:
        tokens = fh.read().split()
    rows, cols = int(tokens[0]), int(tokens[1])
    bits = [int(t) for t in tokens[2:]]
    if len(bits) != rows * cols or not set(bits) <= {0, 1}:
        raise ValueError(f"{path}: expected {rows * cols} binary entries")
    return generator_matrix_code(np.array(bits).reshape(rows, cols), name=f"genmatrix({path})")


def xor_linear(G, r: int, name: str = "xor-linear") -> EncryptionFn:
    """E(R, M) = M G xor embed(R); embed puts R in the last r ciphertext bits.

    Separable and message-linear by construction.
    """
    lin = generator_matrix_code(G)
    c = lin.b
    if r > c:
        raise ValueError(f"cannot embed {r} coin bits into {c} ciphertext bits")
    enc = lin.encode_vec
    vec = lambda coins, msgs: enc(msgs) ^ np.asarray(coins, dtype=np.int64)
    return EncryptionFn(r, lin.a, c, lambda rr, mm: int(enc(mm)) ^ rr, vec, name)


# -- decryption error ------------------------------------------------------------


def _as_scheme(enc) -> EncryptionFn:
    return enc.as_encryption() if isinstance(enc, CodeFn) else enc


def _decoder_table(dec, width: int) -> np.ndarray:
    check_cap("receiver alphabet", 1 << width)
    ys = np.arange(1 << width, dtype=np.int64)
    if hasattr(dec, "decode_array"):
        return dec.decode_array(ys)
    return _vectorize(dec)(ys)


def decryption_error(
    enc,
    dec,
    ch: Channel,
    mode: str = "exact",
    trials: int = 10_000,
    seed: int = 0,
    messages=None,
) -> AdvReport:
    """Max over messages of Pr[dec(ch(enc(M))) != M].

    ``dec`` is a callable on receiver ciphertexts, an object with
    ``decode_array``, or ``None`` to use the code's own decoder.
    """
    scheme = _as_scheme(enc)
    if dec is None:
        dec = enc
    if ch.in_width != scheme.c:
        raise ValueError(f"channel expects {ch.in_width} bits, ciphertext has {scheme.c}")
    params = {"scheme": scheme.name, "channel": ch.describe()}
    if mode == "exact":
        table = _decoder_table(dec, ch.out_width)
        msgs = np.arange(1 << scheme.m, dtype=np.int64) if messages is None else np.asarray(messages)
        errs = np.empty(msgs.size)
        for start in range(0, msgs.size, 64):
            chunk = msgs[start : start + 64]
            laws = ch.push(scheme.ciphertext_laws(chunk))
            wrong = table[None, :] != chunk[:, None]
            errs[start : start + 64] = (laws * wrong).sum(axis=1)
        worst = int(np.argmax(errs))
        return AdvReport(
            "de", float(errs[worst]), "exact", params, witness={"message": int(msgs[worst])},
            lower_bound=messages is not None,
        )
    if mode != "mc":
        raise ValueError(f"unknown mode {mode!r}")
    lower = False
    if messages is None:
        if scheme.m > MC_MAX_MESSAGE_BITS:
            raise ValueError(
                f"monte-carlo DE over all 2^{scheme.m} messages is not samplable; "
                "pass an explicit message list"
            )
        msgs = np.arange(1 << scheme.m, dtype=np.int64)
    else:
        msgs = np.asarray(messages, dtype=np.int64)
        lower = True
    decode = dec.decode_array if hasattr(dec, "decode_array") else _vectorize(dec)
    rates = np.empty(msgs.size)
    for i, msg in enumerate(msgs):
        rng = rng_stream(seed, i)
        xs = scheme.encrypt_batch(np.full(trials, msg), rng)
        ys = ch.sample_batch(xs, rng)
        rates[i] = float(np.mean(decode(ys) != msg))
    worst = int(np.argmax(rates))
    return AdvReport(
        "de",
        float(rates[worst]),
        "monte-carlo",
        params,
        seed=seed,
        trials=trials,
        half_width=binomial_half_width(rates[worst], trials),
        witness={"message": int(msgs[worst])},
        lower_bound=lower,
    )
