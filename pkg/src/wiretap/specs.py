"""Parsers for the channel, code, hash and scheme spec strings.

Channels:  bsc(p)  bsc(p)^c  id(n)  const(n)  const(n,d)  constant  bec(e)
           xor(q0,q1,...)  par(A,B)  comp(OUTER,INNER)  matrix(path)  X^c
Codes:     rep(n)  rep(n,k)  id(n)  sys(parity,u)  genmatrix(path)
Hashes:    mx(u,m)  gf(u,m)
Schemes:   xtx(hash=H, en1=C, en2=C[, key=K])  otp(m)  or any code

A channel written without a width (``bsc(0.25)``, ``constant``) takes the
width demanded by its context, e.g. the ciphertext length of the scheme.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from wiretap import channels as chans
from wiretap import coding
from wiretap.errors import SpecParseError
from wiretap.hashing import HashFamily, gf_family, matrix_family
from wiretap.relations import otp_scheme
from wiretap.xtx import build_xtx

_TOKEN = re.compile(r"\s*(?:(?P<num>-?\d+(?:\.\d*)?(?:[eE][-+]?\d+)?)|(?P<name>[A-Za-z_./~][\w.\-/~]*)|(?P<sym>[(),=^]))")


@dataclass
class Node:
    head: str
    args: list = field(default_factory=list)
    kwargs: dict = field(default_factory=dict)
    pos: int = 0
    power: int | None = None


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = []
        pos = 0
        stripped = text.rstrip()
        while pos < len(stripped):
            mt = _TOKEN.match(stripped, pos)
            if not mt or mt.end() == pos:
                bad = pos + len(stripped[pos:]) - len(stripped[pos:].lstrip())
                raise SpecParseError(f"unexpected character {stripped[bad]!r}", text, bad)
            kind = mt.lastgroup
            self.toks.append((kind, mt.group(kind), mt.start(kind)))
            pos = mt.end()
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None, len(self.text))

    def take(self, sym=None):
        tok = self.peek()
        if tok[0] is None:
            raise SpecParseError("unexpected end of spec", self.text, tok[2])
        if sym is not None and tok[1] != sym:
            raise SpecParseError(f"expected {sym!r}, found {tok[1]!r}", self.text, tok[2])
        self.i += 1
        return tok

    def value(self):
        kind, text, pos = self.peek()
        if kind == "num":
            self.i += 1
            return float(text) if any(ch in text for ch in ".eE") else int(text)
        return self.node()

    def node(self) -> Node:
        kind, name, pos = self.take()
        if kind != "name":
            raise SpecParseError(f"expected a name, found {name!r}", self.text, pos)
        node = Node(name.lower(), pos=pos)
        if self.peek()[1] == "(":
            self.take("(")
            if self.peek()[1] != ")":
                while True:
                    k1, t1, _ = self.peek()
                    nxt = self.toks[self.i + 1][1] if self.i + 1 < len(self.toks) else None
                    if k1 == "name" and nxt == "=":
                        self.i += 2
                        node.kwargs[t1.lower()] = self.value()
                    else:
                        node.args.append(self.value())
                    if self.peek()[1] == ",":
                        self.take(",")
                        continue
                    break
            self.take(")")
        if self.peek()[1] == "^":
            self.take("^")
            kind, text, ppos = self.take()
            if kind != "num" or not text.isdigit():
                raise SpecParseError("exponent must be a positive integer", self.text, ppos)
            node.power = int(text)
        return node

    def parse(self) -> Node:
        node = self.node()
        kind, text, pos = self.peek()
        if kind is not None:
            raise SpecParseError(f"trailing input {text!r}", self.text, pos)
        return node


def parse_tree(text: str) -> Node:
    if not text or not text.strip():
        raise SpecParseError("empty spec", text or "", 0)
    return _Parser(text).parse()


def _fail(text, node, msg):
    raise SpecParseError(msg, text, node.pos)


def _want(text, node, n, kinds=(int,)):
    if len(node.args) != n or not all(isinstance(a, kinds) for a in node.args):
        _fail(text, node, f"{node.head} takes {n} numeric argument(s)")
    return node.args


# -- channels -----------------------------------------------------------------------


def _fixed_width(text, node) -> int | None:
    """Input width a channel node pins down on its own, if any."""
    h = node.head
    k = node.power or 1
    if h in ("bsc", "constant") and node.power is None:
        return None
    if h == "const" and node.power is None and not node.args:
        return None
    if h in ("bsc", "bec"):
        return k
    if h in ("id", "const"):
        return int(node.args[0]) * k if node.args else None
    if h == "xor":
        size = len(node.args)
        return (size.bit_length() - 1) * k if size else None
    if h == "par":
        parts = [_fixed_width(text, a) for a in node.args if isinstance(a, Node)]
        return None if None in parts or len(parts) != 2 else sum(parts) * k
    if h == "comp":
        return _fixed_width(text, node.args[1]) if len(node.args) == 2 else None
    if h == "matrix":
        return None  # known only after loading
    return None


def _channel(text, node, width: int | None) -> chans.Channel:
    if not isinstance(node, Node):
        raise SpecParseError("expected a channel", text, 0)
    if node.power is not None:
        base_node = Node(node.head, node.args, node.kwargs, node.pos, None)
        # bsc(p)^c is one structured channel; anything else is a c-fold product
        if node.head == "bsc":
            (p,) = _want(text, node, 1, (int, float))
            return _bsc(text, node, p, node.power)
        base = _channel(text, base_node, 1 if node.head in ("constant", "bec") else None)
        return chans.power(base, node.power)
    h = node.head
    if h == "bsc":
        (p,) = _want(text, node, 1, (int, float))
        return _bsc(text, node, p, width or 1)
    if h == "id":
        (n,) = _want(text, node, 1)
        return chans.make_identity(n)
    if h == "constant":
        if width is None:
            _fail(text, node, "constant needs a width from context; use const(n)")
        return chans.make_constant(width)
    if h == "const":
        if not node.args:
            return _channel(text, Node("constant", pos=node.pos), width)
        args = _want(text, node, len(node.args))
        if len(args) > 2:
            _fail(text, node, "const takes (in_width) or (in_width, out_width)")
        return chans.make_constant(*args)
    if h == "bec":
        (e,) = _want(text, node, 1, (int, float))
        return chans.make_bec(float(e))
    if h == "xor":
        probs = [float(a) for a in _want(text, node, len(node.args), (int, float))]
        try:
            return chans.XorNoiseChannel(np.array(probs))
        except ValueError as exc:
            _fail(text, node, str(exc))
    if h == "par":
        if len(node.args) != 2:
            _fail(text, node, "par takes two channels")
        left, right = node.args
        lw, rw = _fixed_width(text, left), _fixed_width(text, right)
        if lw is None and rw is not None and width is not None:
            lw = width - rw
        if rw is None and lw is not None and width is not None:
            rw = width - lw
        return chans.parallel(_channel(text, left, lw), _channel(text, right, rw))
    if h == "comp":
        if len(node.args) != 2:
            _fail(text, node, "comp takes (OUTER, INNER)")
        inner = _channel(text, node.args[1], width)
        outer = _channel(text, node.args[0], inner.out_width)
        try:
            return chans.compose(outer, inner)
        except ValueError as exc:
            _fail(text, node, str(exc))
    if h == "matrix":
        if len(node.args) != 1 or not isinstance(node.args[0], Node):
            _fail(text, node, "matrix takes a file path")
        try:
            return chans.load_matrix_channel(node.args[0].head)
        except (OSError, ValueError) as exc:
            _fail(text, node, str(exc))
    _fail(text, node, f"unknown channel {node.head!r}")


def _bsc(text, node, p, c):
    try:
        return chans.make_bsc(float(p), c)
    except ValueError as exc:
        _fail(text, node, str(exc))


def parse_channel(text: str, width: int | None = None) -> chans.Channel:
    """Build a channel; ``width`` fills in widths the spec string leaves implicit."""
    ch = _channel(text, parse_tree(text), width)
    if width is not None and ch.in_width != width:
        raise SpecParseError(f"channel takes {ch.in_width} bits but {width} are needed", text, 0)
    return ch


# -- codes, hashes, schemes --------------------------------------------------------------


def _code(text, node) -> coding.CodeFn:
    h = node.head
    if node.power is not None:
        _fail(text, node, "codes take no exponent")
    if h == "rep":
        args = _want(text, node, len(node.args))
        if len(args) not in (1, 2):
            _fail(text, node, "rep takes (n) or (n, k)")
        try:
            return coding.repetition_code(*args)
        except ValueError as exc:
            _fail(text, node, str(exc))
    if h == "id":
        (n,) = _want(text, node, 1)
        return coding.identity_code(n)
    if h == "sys":
        if len(node.args) != 2 or not isinstance(node.args[0], Node) or node.args[0].head != "parity":
            _fail(text, node, "sys takes (parity, u)")
        if not isinstance(node.args[1], int):
            _fail(text, node, "sys needs an integer u")
        return coding.parity_code(node.args[1])
    if h == "genmatrix":
        if len(node.args) != 1 or not isinstance(node.args[0], Node):
            _fail(text, node, "genmatrix takes a file path")
        try:
            return coding.load_generator_matrix(node.args[0].head)
        except (OSError, ValueError) as exc:
            _fail(text, node, str(exc))
    _fail(text, node, f"unknown code {node.head!r}")


def parse_code(text: str) -> coding.CodeFn:
    return _code(text, parse_tree(text))


def _hash(text, node) -> HashFamily:
    if node.head not in ("mx", "gf"):
        _fail(text, node, f"unknown hash family {node.head!r}")
    u, m = _want(text, node, 2)
    try:
        return matrix_family(u, m) if node.head == "mx" else gf_family(u, m)
    except ValueError as exc:
        _fail(text, node, str(exc))


def parse_hash(text: str) -> HashFamily:
    return _hash(text, parse_tree(text))


def parse_scheme(text: str):
    """Returns an XtXScheme, or an EncryptionFn for ``otp`` and plain codes."""
    node = parse_tree(text)
    if node.head == "xtx":
        missing = {"hash", "en1", "en2"} - node.kwargs.keys()
        if missing or node.args:
            _fail(text, node, "xtx needs hash=, en1= and en2= (and optionally key=)")
        unknown = node.kwargs.keys() - {"hash", "en1", "en2", "key"}
        if unknown:
            _fail(text, node, f"unknown xtx argument {sorted(unknown)[0]!r}")
        fam = _hash(text, node.kwargs["hash"])
        en1 = _code(text, node.kwargs["en1"])
        en2 = _code(text, node.kwargs["en2"])
        key = node.kwargs.get("key")
        try:
            return build_xtx(fam, en1, en2, key)
        except ValueError as exc:
            _fail(text, node, str(exc))
    if node.head == "otp":
        (m,) = _want(text, node, 1)
        return otp_scheme(m)
    return _code(text, node)


def as_encryption(obj) -> coding.EncryptionFn:
    if isinstance(obj, coding.EncryptionFn):
        return obj
    if isinstance(obj, coding.CodeFn):
        return obj.as_encryption()
    return obj.encryption()
