"""Universal hash families and the leftover-hash extraction bound.

Two families, both GF(2)-linear in the input for a fixed key:

``mx(u, m)``
    key is an m x u binary matrix (h = u m bits, row-major, first row in the
    most significant bits); output is the matrix-vector product.
``gf(u, m)``
    key is a field element of GF(2^u) (h = u); output is the low m bits of
    the field product key * input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from wiretap.channels import Channel
from wiretap.errors import check_cap
from wiretap.probcore import Dist, vec_avg_guessing_prob

# Minimum-weight irreducible polynomial of each degree with nonzero constant
# term; among equal weights, the smallest as an integer bit mask.
IRREDUCIBLE = {
    1: 0x3,
    2: 0x7,
    3: 0xb,
    4: 0x13,
    5: 0x25,
    6: 0x43,
    7: 0x83,
    8: 0x11b,
    9: 0x203,
    10: 0x409,
    11: 0x805,
    12: 0x1009,
    13: 0x201b,
    14: 0x4021,
    15: 0x8003,
    16: 0x1002b,
    17: 0x20009,
    18: 0x40009,
    19: 0x80027,
    20: 0x100009,
    21: 0x200005,
    22: 0x400003,
    23: 0x800021,
    24: 0x100001b,
    25: 0x2000009,
    26: 0x400001b,
    27: 0x8000027,
    28: 0x10000003,
    29: 0x20000005,
    30: 0x40000003,
    31: 0x80000009,
    32: 0x10000008d,
    33: 0x200000401,
    34: 0x400000081,
    35: 0x800000005,
    36: 0x1000000201,
    37: 0x2000000053,
    38: 0x4000000063,
    39: 0x8000000011,
    40: 0x10000000039,
    41: 0x20000000009,
    42: 0x40000000081,
    43: 0x80000000059,
    44: 0x100000000021,
    45: 0x20000000001b,
    46: 0x400000000003,
    47: 0x800000000021,
    48: 0x100000000002d,
    49: 0x2000000000201,
    50: 0x400000000001d,
    51: 0x800000000004b,
    52: 0x10000000000009,
    53: 0x20000000000047,
    54: 0x40000000000201,
    55: 0x80000000000081,
    56: 0x100000000000095,
    57: 0x200000000000011,
    58: 0x400000000080001,
    59: 0x800000000000095,
    60: 0x1000000000000003,
    61: 0x2000000000000027,
    62: 0x4000000020000001,
    63: 0x8000000000000003,
    64: 0x1000000000000001b,
}

PAIRWISE_WORK_LIMIT = 2**28


def clmul(a: int, b: int) -> int:
    """Carry-less product of two GF(2)[x] polynomials given as bit masks."""
    r = 0
    while b:
        if b & 1:
            r ^= a
        a <<= 1
        b >>= 1
    return r


def poly_mod(a: int, f: int) -> int:
    df = f.bit_length()
    while a.bit_length() >= df:
        a ^= f << (a.bit_length() - df)
    return a


def gf_mul(a: int, b: int, modulus: int) -> int:
    return poly_mod(clmul(a, b), modulus)


def gf_mul_array(a, b, u: int, modulus: int) -> np.ndarray:
    """Elementwise GF(2^u) product of int64 arrays (u <= 31)."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    a, b = np.broadcast_arrays(a, b)
    r = np.zeros(a.shape, dtype=np.int64)
    for i in range(u):
        r ^= np.where((b >> i) & 1, a << i, 0)
    for deg in range(2 * u - 2, u - 1, -1):
        r ^= np.where((r >> deg) & 1, np.int64(modulus) << (deg - u), 0)
    return r


@lru_cache(maxsize=None)
def is_irreducible_exhaustive(f: int) -> bool:
    """Trial division by every polynomial of degree 1 .. deg(f)/2."""
    n = f.bit_length() - 1
    if n < 1:
        return False
    for g in range(2, 1 << (n // 2 + 1)):
        if poly_mod(f, g) == 0:
            return False
    return True


def _poly_gcd(a: int, b: int) -> int:
    while b:
        a, b = b, poly_mod(a, b)
    return a


def is_irreducible_rabin(f: int) -> bool:
    n = f.bit_length() - 1
    if n == 1:
        return True

    def x_pow_2k(k):
        x = 2
        for _ in range(k):
            x = gf_mul(x, x, f)
        return x

    if x_pow_2k(n) != 2:
        return False
    for q in range(2, n + 1):
        if n % q == 0 and all(q % d for d in range(2, q)):
            if _poly_gcd(f, x_pow_2k(n // q) ^ 2) != 1:
                return False
    return True


@dataclass(frozen=True)
class HashFamily:
    kind: str
    u: int
    m: int
    modulus: int = 0

    def __post_init__(self):
        if self.kind not in ("mx", "gf"):
            raise ValueError(f"unknown hash family kind {self.kind!r}")
        if self.u < 1 or self.m < 0:
            raise ValueError("need u >= 1 and m >= 0")
        if self.kind == "gf":
            if self.m > self.u:
                raise ValueError(f"gf family needs m <= u, got m={self.m}, u={self.u}")
            if self.modulus.bit_length() - 1 != self.u:
                raise ValueError(f"modulus degree must equal u={self.u}")
            certified = (
                is_irreducible_exhaustive(self.modulus)
                if self.u <= 32
                else is_irreducible_rabin(self.modulus)
            )
            if not certified:
                raise ValueError(f"modulus {self.modulus:#x} is reducible")

    @property
    def h(self) -> int:
        return self.u * self.m if self.kind == "mx" else self.u

    def eval(self, key: int, x: int) -> int:
        key, x = int(key), int(x)
        if not 0 <= key < (1 << self.h) or not 0 <= x < (1 << self.u):
            raise ValueError("key or input out of range")
        if self.kind == "gf":
            return gf_mul(key, x, self.modulus) & ((1 << self.m) - 1)
        umask = (1 << self.u) - 1
        out = 0
        for i in range(self.m):
            row = (key >> ((self.m - 1 - i) * self.u)) & umask
            out = (out << 1) | (bin(row & x).count("1") & 1)
        return out

    def eval_array(self, keys, xs) -> np.ndarray:
        """Vectorized ``eval`` with numpy broadcasting (h, u <= 62)."""
        keys = np.asarray(keys, dtype=np.int64)
        xs = np.asarray(xs, dtype=np.int64)
        if self.kind == "gf":
            if self.u > 31:
                raise ValueError("vectorized gf evaluation supports u <= 31")
            return gf_mul_array(keys, xs, self.u, self.modulus) & ((1 << self.m) - 1)
        umask = np.int64((1 << self.u) - 1)
        keys, xs = np.broadcast_arrays(keys, xs)
        out = np.zeros(keys.shape, dtype=np.int64)
        for i in range(self.m):
            row = (keys >> ((self.m - 1 - i) * self.u)) & umask
            out = (out << 1) | (np.bitwise_count(row & xs).astype(np.int64) & 1)
        return out

    def sample_key(self, rng: np.random.Generator) -> int:
        nbytes = (self.h + 7) // 8
        raw = int.from_bytes(rng.bytes(nbytes), "big") if nbytes else 0
        return raw >> (8 * nbytes - self.h)

    def table(self) -> np.ndarray:
        """All outputs, indexed [key, input]."""
        check_cap(f"key space of {self.describe()}", 1 << self.h)
        check_cap(f"input space of {self.describe()}", 1 << self.u)
        keys = np.arange(1 << self.h, dtype=np.int64)[:, None]
        xs = np.arange(1 << self.u, dtype=np.int64)[None, :]
        return self.eval_array(keys, xs)

    def describe(self) -> str:
        return f"{self.kind}({self.u},{self.m})"


def matrix_family(u: int, m: int) -> HashFamily:
    return HashFamily("mx", u, m)


def gf_family(u: int, m: int, modulus: int | None = None) -> HashFamily:
    if modulus is None:
        if u not in IRREDUCIBLE:
            raise ValueError(f"no tabulated modulus for u={u}")
        modulus = IRREDUCIBLE[u]
    return HashFamily("gf", u, m, modulus)


def eval_hash(fam: HashFamily, key: int, x: int) -> int:
    return fam.eval(key, x)


def collision_prob(fam: HashFamily, x1: int, x2: int) -> float:
    """Pr over a uniform key that x1 and x2 collide, by enumerating all keys."""
    check_cap(f"key space of {fam.describe()}", 1 << fam.h)
    keys = np.arange(1 << fam.h, dtype=np.int64)
    same = fam.eval_array(keys, x1) == fam.eval_array(keys, x2)
    return float(same.mean())


def max_collision_prob(fam: HashFamily, method: str = "auto") -> float:
    """Max over distinct input pairs of the key-collision probability.

    ``pairs`` enumerates every (key, U1, U2).  ``differences`` uses
    GF(2)-linearity of both shipped families: U1 and U2 collide under a key
    iff U1 xor U2 hashes to zero, so it enumerates (key, nonzero difference).
    """
    n_keys, n_in = 1 << fam.h, 1 << fam.u
    if method == "auto":
        method = "pairs" if n_keys * n_in * n_in <= PAIRWISE_WORK_LIMIT else "differences"
    table = fam.table()
    if method == "pairs":
        counts = np.zeros((n_in, n_in), dtype=np.int64)
        for row in table:
            counts += row[:, None] == row[None, :]
        np.fill_diagonal(counts, 0)
        return float(counts.max() / n_keys)
    if method == "differences":
        zero_hits = (table[:, 1:] == 0).sum(axis=0)
        return float(zero_hits.max() / n_keys)
    raise ValueError(f"unknown method {method!r}")


def lhl_bound(m: int, gp: float) -> float:
    """Leftover-hash upper bound (1/2) sqrt(2^m GP(U|Z))."""
    if not 0.0 < gp <= 1.0:
        raise ValueError(f"guessing probability must lie in (0, 1], got {gp}")
    return 0.5 * math.sqrt(2.0**m * gp)


def source_joint(u_dist: Dist, side_channel: Channel) -> np.ndarray:
    """Joint matrix P(U = u, Z = z) for Z = side_channel(U)."""
    pu = u_dist.dense()
    return side_channel.push(np.diag(pu))


def lhl_exact_sd(fam: HashFamily, u_dist: Dist, side_channel: Channel) -> float:
    """Exact SD((H, Z, hash(H, U)); (H, Z, V)) by full enumeration."""
    if side_channel.in_width != fam.u or u_dist.width != fam.u:
        raise ValueError("source and side channel must act on u-bit strings")
    joint = source_joint(u_dist, side_channel)
    pz = joint.sum(axis=0)
    n_out = 1 << fam.m
    ideal = pz[:, None] / n_out
    table = fam.table()
    total = 0.0
    chunk = max(1, 2**22 // max(1, joint.size * n_out // joint.shape[0]))
    for start in range(0, table.shape[0], chunk):
        outs = table[start : start + chunk]
        onehot = (outs[:, :, None] == np.arange(n_out)[None, None, :]).astype(float)
        real = np.einsum("uz,kuy->kzy", joint, onehot)
        total += np.abs(real - ideal[None]).sum()
    return float(0.5 * total / table.shape[0])


def lhl_instance(fam: HashFamily, u_dist: Dist, side_channel: Channel) -> tuple[float, float]:
    """(exact SD, bound evaluated at the exact GP(U|Z))."""
    gp = vec_avg_guessing_prob(source_joint(u_dist, side_channel))
    return lhl_exact_sd(fam, u_dist, side_channel), lhl_bound(fam.m, gp)


# -- test vectors --------------------------------------------------------------


def _hex(v: int, bits: int) -> str:
    return format(v, f"0{max(1, (bits + 3) // 4)}x")


def write_test_vectors(fams, path, rng: np.random.Generator, per_family: int = 8) -> None:
    """Lines of ``kind u m key_hex input_hex output_hex``."""
    with open(path, "w") as fh:
        for fam in fams:
            for _ in range(per_family):
                key = fam.sample_key(rng)
                x = int.from_bytes(rng.bytes((fam.u + 7) // 8), "big") >> (
                    8 * ((fam.u + 7) // 8) - fam.u
                )
                y = fam.eval(key, x)
                fh.write(
                    f"{fam.kind} {fam.u} {fam.m} {_hex(key, fam.h)} "
                    f"{_hex(x, fam.u)} {_hex(y, fam.m)}\n"
                )


def check_test_vectors(path) -> list[str]:
    """Re-evaluate every vector; returns descriptions of mismatching lines."""
    bad = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            kind, u, m, key, x, y = parts
            fam = gf_family(int(u), int(m)) if kind == "gf" else matrix_family(int(u), int(m))
            got = fam.eval(int(key, 16), int(x, 16))
            if got != int(y, 16):
                bad.append(f"line {lineno}: expected {y}, got {_hex(got, fam.m)}")
    return bad
