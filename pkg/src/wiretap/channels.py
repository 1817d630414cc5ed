"""Channels over fixed-width bitstrings: construction, composition, simulation.

A channel maps ``in_width``-bit inputs to ``out_width``-bit outputs.  Bit
strings are handled as integers whose most significant bit is the first
character, so the lexicographic order of strings is the integer order.

Every exactly representable channel implements three primitives:

``push(arr)``
    Propagate laws: ``arr[..., x]`` over inputs becomes ``out[..., y]``
    over outputs.  Structured channels (BSC products, parallel
    concatenation) do this without materializing the transition matrix.
``prob(xs, ys)``
    Vectorized transition probabilities ``W[x, y]``.
``sample_batch(xs, rng)``
    One independent channel use per entry of ``xs``.
"""

from __future__ import annotations

from collections import defaultdict
from typing import Callable

import numpy as np

from wiretap.errors import ExactModeUnavailable, check_cap
from wiretap.probcore import NORM_TOL, Dist, bitstring

MAX_SAMPLE_WIDTH = 62
MAX_MATRIX_ENTRIES = 2**28
SYMMETRY_GRID = 1e-9


def _as_int(x, width):
    if isinstance(x, str):
        if len(x) != width or not set(x) <= {"0", "1"}:
            raise ValueError(f"expected a {width}-bit string, got {x!r}")
        return int(x, 2) if x else 0
    x = int(x)
    if not 0 <= x < (1 << width) and not (width == 0 and x == 0):
        raise ValueError(f"input {x} does not fit in {width} bits")
    return x


def _bit_axes(arr, width, k):
    """View of ``arr`` with the last axis split around bit ``k`` (0 = first bit)."""
    lead = arr.shape[:-1]
    return arr.reshape(*lead, 1 << k, 2, 1 << (width - k - 1))


def walsh_hadamard(arr: np.ndarray, width: int) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform along the last axis."""
    out = np.array(arr, dtype=float, copy=True)
    for k in range(width):
        v = _bit_axes(out, width, k)
        a = v[..., 0, :].copy()
        b = v[..., 1, :]
        v[..., 0, :] = a + b
        v[..., 1, :] = a - b
    return out


class Channel:
    """Base class.  Subclasses are immutable after construction."""

    kind = "abstract"
    in_width: int
    out_width: int

    def push(self, arr: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def prob(self, xs, ys) -> np.ndarray:
        raise NotImplementedError

    def sample_batch(self, xs, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    # -- derived operations ----------------------------------------------------

    @property
    def exact(self) -> bool:
        return True

    def _check_push(self, arr):
        if not self.exact:
            raise ExactModeUnavailable(f"{self.describe()} is sampler-only")
        arr = np.asarray(arr, dtype=float)
        if arr.shape[-1] != 1 << self.in_width:
            raise ValueError(
                f"last axis has {arr.shape[-1]} entries, channel expects "
                f"{1 << self.in_width}"
            )
        check_cap(f"output alphabet of {self.describe()}", 1 << self.out_width)
        return arr

    def matrix(self) -> np.ndarray:
        """The full 2^in x 2^out transition matrix."""
        check_cap(f"input alphabet of {self.describe()}", 1 << self.in_width)
        check_cap(f"output alphabet of {self.describe()}", 1 << self.out_width)
        entries = 1 << (self.in_width + self.out_width)
        if entries > MAX_MATRIX_ENTRIES:
            check_cap(f"transition matrix of {self.describe()}", entries)
        return self.push(np.eye(1 << self.in_width))

    def output_dist_given(self, x) -> Dist:
        x = _as_int(x, self.in_width)
        if not self.exact:
            raise ExactModeUnavailable(f"{self.describe()} is sampler-only")
        check_cap(f"output alphabet of {self.describe()}", 1 << self.out_width)
        onehot = np.zeros(1 << self.in_width)
        onehot[x] = 1.0
        return Dist.from_vector(self.push(onehot), self.out_width)

    def sample(self, x, rng: np.random.Generator):
        """One channel use; returns the output as a bitstring if given one."""
        as_str = isinstance(x, str)
        y = int(self.sample_batch(np.array([_as_int(x, self.in_width)]), rng)[0])
        return bitstring(y, self.out_width) if as_str else y

    def _check_sample(self, xs):
        if max(self.in_width, self.out_width) > MAX_SAMPLE_WIDTH:
            raise ValueError(f"sampling supports widths up to {MAX_SAMPLE_WIDTH} bits")
        return np.asarray(xs, dtype=np.int64)

    def describe(self) -> str:
        return self.kind

    def __repr__(self):
        return f"<Channel {self.describe()}: {self.in_width} -> {self.out_width} bits>"


class MatrixChannel(Channel):
    kind = "matrix"

    def __init__(self, matrix, in_width: int | None = None, out_width: int | None = None):
        w = np.array(matrix, dtype=float)
        if w.ndim != 2:
            raise ValueError("transition matrix must be two-dimensional")
        rows, cols = w.shape
        in_width = (rows - 1).bit_length() if in_width is None else in_width
        out_width = (cols - 1).bit_length() if out_width is None else out_width
        if rows != 1 << in_width or cols != 1 << out_width:
            raise ValueError(
                f"matrix shape {w.shape} incompatible with widths {in_width}->{out_width}"
            )
        if w.min() < 0:
            raise ValueError("transition probabilities must be non-negative")
        bad = np.abs(w.sum(axis=1) - 1.0) > NORM_TOL
        if bad.any():
            raise ValueError(f"row {int(np.argmax(bad))} does not sum to 1")
        w.setflags(write=False)
        self.W = w
        self.in_width = in_width
        self.out_width = out_width
        self._cum = None

    def push(self, arr):
        arr = self._check_push(arr)
        return arr @ self.W

    def prob(self, xs, ys):
        return self.W[np.asarray(xs), np.asarray(ys)]

    def sample_batch(self, xs, rng):
        xs = self._check_sample(xs)
        if self._cum is None:
            cum = np.cumsum(self.W, axis=1)
            cum[:, -1] = 1.0
            self._cum = cum
        u = rng.random(xs.shape)
        out = np.empty(xs.shape, dtype=np.int64)
        flat_x, flat_u, flat_o = xs.reshape(-1), u.reshape(-1), out.reshape(-1)
        for start in range(0, flat_x.size, 4096):
            sl = slice(start, start + 4096)
            flat_o[sl] = (self._cum[flat_x[sl]] < flat_u[sl, None]).sum(axis=1)
        return out

    def describe(self):
        return f"matrix({self.in_width}->{self.out_width})"


class BSCChannel(Channel):
    """BSC_p^c: flips each of c bits independently with probability p."""

    kind = "bsc"

    def __init__(self, p: float, c: int):
        if not 0.0 <= p <= 0.5:
            raise ValueError(f"crossover probability must lie in [0, 1/2], got {p}")
        if c < 1:
            raise ValueError("BSC width must be at least 1")
        self.p = float(p)
        self.in_width = self.out_width = c

    def push(self, arr):
        arr = self._check_push(arr)
        out = np.array(arr, copy=True)
        p, c = self.p, self.in_width
        if p == 0:
            return out
        for k in range(c):
            v = _bit_axes(out, c, k)
            out = ((1 - p) * v + p * v[..., ::-1, :]).reshape(out.shape)
        return out

    def prob(self, xs, ys):
        d = np.bitwise_count(np.asarray(xs, dtype=np.int64) ^ np.asarray(ys, dtype=np.int64))
        d = d.astype(float)
        return self.p**d * (1 - self.p) ** (self.in_width - d)

    def sample_batch(self, xs, rng):
        xs = self._check_sample(xs)
        flips = rng.random(xs.shape + (self.in_width,)) < self.p
        weights = np.int64(1) << np.arange(self.in_width - 1, -1, -1, dtype=np.int64)
        return xs ^ (flips.astype(np.int64) @ weights)

    def describe(self):
        return f"bsc({self.p:g})^{self.in_width}"


class IdentityChannel(Channel):
    kind = "id"

    def __init__(self, s: int):
        if s < 0:
            raise ValueError("identity width must be non-negative")
        self.in_width = self.out_width = s

    def push(self, arr):
        return np.array(self._check_push(arr), copy=True)

    def prob(self, xs, ys):
        return (np.asarray(xs) == np.asarray(ys)).astype(float)

    def sample_batch(self, xs, rng):
        return self._check_sample(xs).copy()

    def describe(self):
        return f"id({self.in_width})"


class ConstantChannel(Channel):
    """Output is always the all-zero string; 0 output bits by default."""

    kind = "const"

    def __init__(self, in_width: int, out_width: int = 0):
        self.in_width = in_width
        self.out_width = out_width

    def push(self, arr):
        arr = self._check_push(arr)
        out = np.zeros(arr.shape[:-1] + (1 << self.out_width,))
        out[..., 0] = arr.sum(axis=-1)
        return out

    def prob(self, xs, ys):
        xs = np.asarray(xs)
        return np.broadcast_to(np.asarray(ys) == 0, np.broadcast(xs, ys).shape).astype(float)

    def sample_batch(self, xs, rng):
        return np.zeros_like(self._check_sample(xs))

    def describe(self):
        if self.out_width:
            return f"const({self.in_width},{self.out_width})"
        return f"const({self.in_width})"


class XorNoiseChannel(Channel):
    """X -> X xor E with E drawn afresh from a fixed noise law on c bits."""

    kind = "xor"

    def __init__(self, noise, c: int | None = None):
        noise = noise.dense() if isinstance(noise, Dist) else np.array(noise, dtype=float)
        c = (noise.size - 1).bit_length() if c is None else c
        if noise.size != 1 << c:
            raise ValueError("noise law must cover all c-bit strings")
        if noise.min() < 0 or abs(noise.sum() - 1) > NORM_TOL:
            raise ValueError("noise law must be a probability vector")
        noise.setflags(write=False)
        self.noise = noise
        self.in_width = self.out_width = c
        self._noise_hat = None

    def push(self, arr):
        arr = self._check_push(arr)
        c = self.in_width
        if self._noise_hat is None:
            self._noise_hat = walsh_hadamard(self.noise, c)
        return walsh_hadamard(walsh_hadamard(arr, c) * self._noise_hat, c) / (1 << c)

    def prob(self, xs, ys):
        return self.noise[np.asarray(xs) ^ np.asarray(ys)]

    def sample_batch(self, xs, rng):
        xs = self._check_sample(xs)
        return xs ^ rng.choice(self.noise.size, size=xs.shape, p=self.noise)

    def describe(self):
        return f"xor({self.in_width})"


class ParallelChannel(Channel):
    """(left || right): left acts on the first bits, right on the rest."""

    kind = "par"

    def __init__(self, left: Channel, right: Channel):
        self.left = left
        self.right = right
        self.in_width = left.in_width + right.in_width
        self.out_width = left.out_width + right.out_width

    @property
    def exact(self):
        return self.left.exact and self.right.exact

    def push(self, arr):
        arr = self._check_push(arr)
        lead = arr.shape[:-1]
        a_in, b_in = 1 << self.left.in_width, 1 << self.right.in_width
        t = self.right.push(arr.reshape(*lead, a_in, b_in))
        t = np.swapaxes(t, -1, -2)
        t = self.left.push(t)
        t = np.swapaxes(t, -1, -2)
        return np.ascontiguousarray(t).reshape(*lead, 1 << self.out_width)

    def _split(self, v, lw, rw):
        v = np.asarray(v, dtype=np.int64)
        return v >> rw, v & ((1 << rw) - 1)

    def prob(self, xs, ys):
        x1, x2 = self._split(xs, self.left.in_width, self.right.in_width)
        y1, y2 = self._split(ys, self.left.out_width, self.right.out_width)
        return self.left.prob(x1, y1) * self.right.prob(x2, y2)

    def sample_batch(self, xs, rng):
        xs = self._check_sample(xs)
        x1, x2 = self._split(xs, self.left.in_width, self.right.in_width)
        y1 = self.left.sample_batch(x1, rng)
        y2 = self.right.sample_batch(x2, rng)
        return (y1 << self.right.out_width) | y2

    def describe(self):
        return f"par({self.left.describe()},{self.right.describe()})"


class ComposedChannel(Channel):
    """outer o inner: the input passes through ``inner`` then ``outer``."""

    kind = "comp"

    def __init__(self, outer: Channel, inner: Channel):
        if inner.out_width != outer.in_width:
            raise ValueError(
                f"cannot compose: inner emits {inner.out_width} bits, "
                f"outer expects {outer.in_width}"
            )
        self.outer = outer
        self.inner = inner
        self.in_width = inner.in_width
        self.out_width = outer.out_width

    @property
    def exact(self):
        return self.outer.exact and self.inner.exact

    def push(self, arr):
        arr = self._check_push(arr)
        return self.outer.push(self.inner.push(arr))

    def prob(self, xs, ys):
        xs = np.asarray(xs, dtype=np.int64)
        ys = np.asarray(ys, dtype=np.int64)
        check_cap(f"intermediate alphabet of {self.describe()}", 1 << self.inner.out_width)
        mids = np.arange(1 << self.inner.out_width, dtype=np.int64)
        xb, yb = np.broadcast_arrays(xs, ys)
        a = self.inner.prob(xb[..., None], mids)
        b = self.outer.prob(mids, yb[..., None])
        return (a * b).sum(axis=-1)

    def sample_batch(self, xs, rng):
        return self.outer.sample_batch(self.inner.sample_batch(self._check_sample(xs), rng), rng)

    def describe(self):
        return f"comp({self.outer.describe()},{self.inner.describe()})"


class SamplerChannel(Channel):
    """A channel known only through a seeded randomized function.

    ``fn(xs, rng)`` receives an int64 array of inputs and must return an
    array of outputs of the same shape.
    """

    kind = "sampler"

    def __init__(self, fn: Callable, in_width: int, out_width: int, name: str = "sampler"):
        self.fn = fn
        self.in_width = in_width
        self.out_width = out_width
        self.name = name

    @property
    def exact(self):
        return False

    def push(self, arr):
        raise ExactModeUnavailable(f"{self.describe()} is sampler-only")

    def prob(self, xs, ys):
        raise ExactModeUnavailable(f"{self.describe()} is sampler-only")

    def sample_batch(self, xs, rng):
        return np.asarray(self.fn(self._check_sample(xs), rng), dtype=np.int64)

    def describe(self):
        return self.name


# -- constructors ----------------------------------------------------------------


def make_bsc(p: float, c: int = 1) -> BSCChannel:
    return BSCChannel(p, c)


def make_identity(s: int) -> IdentityChannel:
    return IdentityChannel(s)


def make_constant(in_width: int, out_width: int = 0) -> ConstantChannel:
    return ConstantChannel(in_width, out_width)


def make_bec(e: float) -> MatrixChannel:
    """Binary erasure channel on one bit, output coded as 00 / 11, erasure 01."""
    if not 0.0 <= e <= 1.0:
        raise ValueError(f"erasure probability must lie in [0, 1], got {e}")
    return MatrixChannel([[1 - e, e, 0.0, 0.0], [0.0, e, 0.0, 1 - e]], 1, 2)


def parallel(ch1: Channel, ch2: Channel) -> ParallelChannel:
    return ParallelChannel(ch1, ch2)


def compose(outer: Channel, inner: Channel) -> ComposedChannel:
    return ComposedChannel(outer, inner)


def power(base: Channel, c: int) -> Channel:
    """The channel applying ``base`` independently to each of c input blocks."""
    if c < 1:
        raise ValueError("power needs c >= 1")
    if isinstance(base, BSCChannel) and base.in_width == 1:
        return BSCChannel(base.p, c)
    if c == 1:
        return base
    half = c // 2
    return ParallelChannel(power(base, half), power(base, c - half))


def output_dist_given(ch: Channel, x) -> Dist:
    return ch.output_dist_given(x)


def sample(ch: Channel, x, rng: np.random.Generator):
    return ch.sample(x, rng)


def channels_close(a: Channel, b: Channel, tol: float = 1e-12) -> bool:
    """Entrywise agreement of transition matrices."""
    if (a.in_width, a.out_width) != (b.in_width, b.out_width):
        return False
    return bool(np.abs(a.matrix() - b.matrix()).max() <= tol)


# -- symmetry ----------------------------------------------------------------------


def symmetric_partition(ch_or_matrix) -> list[list[int]] | None:
    """A column partition witnessing symmetry, or ``None`` if none exists.

    Columns are grouped by the multiset of their entries (on a 1e-9 grid).
    Any valid partition refines this grouping, and a union of valid classes
    with equal column multisets is again valid, so the grouping itself is a
    witness whenever one exists.  All-zero columns form their own class.
    """
    w = ch_or_matrix.matrix() if isinstance(ch_or_matrix, Channel) else np.asarray(ch_or_matrix)
    grid = np.rint(w / SYMMETRY_GRID).astype(np.int64)
    classes: dict[tuple, list[int]] = defaultdict(list)
    for j in range(grid.shape[1]):
        classes[tuple(np.sort(grid[:, j]))].append(j)
    partition = []
    for cols in classes.values():
        sub = np.sort(grid[:, cols], axis=1)
        if not (sub == sub[0]).all():
            return None
        partition.append(cols)
    return sorted(partition)


def is_symmetric(ch) -> bool:
    return symmetric_partition(ch) is not None


# -- matrix files ----------------------------------------------------------------


def load_matrix_channel(path) -> MatrixChannel:
    """Read ``<rows> <cols> <in_width> <out_width>`` followed by one row per input."""
    with open(path) as fh:
        tokens = fh.read().split()
    if len(tokens) < 4:
        raise ValueError(f"{path}: missing header")
    rows, cols, in_w, out_w = (int(t) for t in tokens[:4])
    values = np.array([float(t) for t in tokens[4:]])
    if values.size != rows * cols:
        raise ValueError(f"{path}: expected {rows * cols} entries, found {values.size}")
    return MatrixChannel(values.reshape(rows, cols), in_w, out_w)


def save_matrix_channel(ch: Channel, path) -> None:
    w = ch.matrix()
    with open(path, "w") as fh:
        fh.write(f"{w.shape[0]} {w.shape[1]} {ch.in_width} {ch.out_width}\n")
        for row in w:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")
