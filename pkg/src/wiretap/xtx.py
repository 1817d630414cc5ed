"""Extract-then-xor encryption, its security bounds and rate arithmetic.

Coins are R = H || U with the hash key H in the high bits.  Encryption:
P = hash(H, U), W = P xor M, X = En1(U) || En2(H || W).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal

import numpy as np

from wiretap.coding import CodeFn, EncryptionFn, identity_code
from wiretap.hashing import HashFamily, gf_family

RATE_TABLE_P = (0.5, 0.4, 0.3, 0.2, 0.1)


@dataclass(frozen=True, eq=False)
class XtXScheme:
    fam: HashFamily
    en1: CodeFn
    en2: CodeFn
    fixed_key: int | None = None

    def __post_init__(self):
        if self.en1.a != self.fam.u:
            raise ValueError(f"en1 takes {self.en1.a} bits, hash input is {self.fam.u}")
        if self.en2.a != self.fam.h + self.fam.m:
            raise ValueError(
                f"en2 takes {self.en2.a} bits, needs h + m = {self.fam.h + self.fam.m}"
            )
        if self.fixed_key is not None and not 0 <= self.fixed_key < (1 << self.fam.h):
            raise ValueError("fixed key out of range")

    @property
    def m(self) -> int:
        return self.fam.m

    @property
    def n1(self) -> int:
        return self.en1.b

    @property
    def n2(self) -> int:
        return self.en2.b

    @property
    def name(self) -> str:
        key = "" if self.fixed_key is None else f", key={self.fixed_key}"
        return f"xtx(hash={self.fam.describe()}, en1={self.en1.name}, en2={self.en2.name}{key})"

    def encrypt_with(self, key, u, msg) -> np.ndarray:
        """Ciphertext for explicit coins; broadcasts over arrays."""
        key = np.asarray(key, dtype=np.int64)
        u = np.asarray(u, dtype=np.int64)
        msg = np.asarray(msg, dtype=np.int64)
        pad = self.fam.eval_array(key, u)
        w = pad ^ msg
        hw = (key << self.fam.m) | w
        return (self.en1.encode_array(u) << self.n2) | self.en2.encode_array(hw)

    def encryption(self) -> EncryptionFn:
        u_bits = self.fam.u
        umask = (1 << u_bits) - 1
        if self.fixed_key is None:
            r = self.fam.h + u_bits

            def vec(coins, msgs):
                coins = np.asarray(coins, dtype=np.int64)
                return self.encrypt_with(coins >> u_bits, coins & umask, msgs)
        else:
            r = u_bits
            key = self.fixed_key

            def vec(coins, msgs):
                return self.encrypt_with(key, coins, msgs)

        fn = lambda coins, msg: int(vec(coins, msg))
        return EncryptionFn(r, self.m, self.n1 + self.n2, fn, vec, self.name)

    def decrypt(self, y, dec1=None, dec2=None):
        return xtx_decrypt(self, y, dec1, dec2)

    def decoder(self, dec1=None, dec2=None) -> "XtXDecoder":
        return XtXDecoder(self, dec1 or self.en1, dec2 or self.en2)


@dataclass(frozen=True, eq=False)
class XtXDecoder:
    """Receiver side; each sub-decoder needs ``decode_array`` and width ``d``."""

    scheme: XtXScheme
    dec1: CodeFn
    dec2: CodeFn

    @property
    def d(self) -> int:
        return self.dec1.d + self.dec2.d

    def decode_array(self, ys) -> np.ndarray:
        fam = self.scheme.fam
        ys = np.asarray(ys, dtype=np.int64)
        d2 = self.dec2.d
        u = self.dec1.decode_array(ys >> d2)
        hw = self.dec2.decode_array(ys & ((1 << d2) - 1))
        key = hw >> fam.m
        w = hw & ((1 << fam.m) - 1)
        return fam.eval_array(key, u) ^ w


def build_xtx(fam: HashFamily, en1: CodeFn, en2: CodeFn, fixed_key: int | None = None) -> XtXScheme:
    return XtXScheme(fam, en1, en2, fixed_key)


def xtx_decrypt(scheme: XtXScheme, y, dec1=None, dec2=None):
    """Recover M from a receiver ciphertext y = y1 || y2."""
    out = scheme.decoder(dec1, dec2).decode_array(y)
    return int(out) if np.ndim(out) == 0 else out


def noiseless_xtx(fam: HashFamily) -> XtXScheme:
    return build_xtx(fam, identity_code(fam.u), identity_code(fam.h + fam.m))


# -- bounds ----------------------------------------------------------------------------


def ds_bound_generic(m: int, rsr: float) -> float:
    if not 0.0 <= rsr <= 1.0:
        raise ValueError(f"rs-r advantage must lie in [0, 1], got {rsr}")
    return math.sqrt(2.0**m * rsr)


def _check_p(p: float) -> None:
    if not 0.0 <= p <= 0.5:
        raise ValueError(f"crossover probability must lie in [0, 1/2], got {p}")


def ds_bound_bsc_noiseless_receiver(m: int, u: int, p: float) -> float:
    _check_p(p)
    return math.sqrt(2.0**m * (1.0 - p) ** u)


def ds_bound_bsc_noisy_receiver(m: int, u: int, r: int, p: float) -> float:
    _check_p(p)
    if r < 0:
        raise ValueError("redundancy must be non-negative")
    return math.sqrt(2.0 ** (m + r) * (1.0 - p) ** (u + r))


def rsr_bsc_injective_bound(u: int, r: int, p: float) -> float:
    """Recovery bound for any injective u -> u+r code over a BSC."""
    _check_p(p)
    return 2.0**r * (1.0 - p) ** (u + r)


def rsr_systematic_reduction(r: int, rsr_id: float) -> float:
    return 2.0**r * rsr_id


# -- design ------------------------------------------------------------------------------


def alpha(p: float) -> float:
    return -math.log2(1.0 - p)


@dataclass(frozen=True)
class DesignSpec:
    m: int
    s: int
    p: float
    alpha: float
    u: int
    rate: float
    rate2: float
    rate_limit: float
    rate2_limit: float
    bound_ds: float

    def to_json(self) -> dict:
        return dict(self.__dict__)


def design_u(m: int, s: int, p: float) -> DesignSpec:
    """Smallest u = ceil((2s + m) / alpha) with alpha = lg(1/(1-p))."""
    if m <= 0 or s <= 0:
        raise ValueError("m and s must be positive")
    if p == 0:
        raise ValueError("p = 0 means a noiseless adversary channel; no u gives any security")
    if not 0.0 < p <= 0.5:
        raise ValueError(f"crossover probability must lie in (0, 1/2], got {p}")
    a = alpha(p)
    # guard against the quotient landing a hair above an integer
    u = math.ceil((2 * s + m) / a - 1e-9)
    while (m + u * math.log2(1.0 - p)) / 2.0 > -s + 1e-12:
        u += 1
    return DesignSpec(
        m=m,
        s=s,
        p=p,
        alpha=a,
        u=u,
        rate=m / (u + m),
        rate2=m / u,
        rate_limit=a / (1.0 + a),
        rate2_limit=a,
        bound_ds=ds_bound_bsc_noiseless_receiver(m, u, p),
    )


def round_half_up(x: float, places: int = 2) -> float:
    q = Decimal(1).scaleb(-places)
    return float(Decimal(repr(x)).quantize(q, rounding=ROUND_HALF_UP))


def rate_table(p_list=RATE_TABLE_P) -> list[dict]:
    """Limiting rates per p: full precision plus 2-decimal display values."""
    rows = []
    for p in p_list:
        if not 0.0 < p <= 0.5:
            raise ValueError(f"crossover probability must lie in (0, 1/2], got {p}")
        a = alpha(p)
        rows.append(
            {
                "p": p,
                "rate": a / (1.0 + a),
                "rate2": a,
                "rate_display": round_half_up(a / (1.0 + a)),
                "rate2_display": round_half_up(a),
            }
        )
    return rows


def designed_scheme(spec: DesignSpec) -> XtXScheme:
    """Noiseless-receiver scheme for a design, using the gf-multiply hash."""
    return noiseless_xtx(gf_family(spec.u, spec.m))
