"""
Per-sub-code decoder: syndrome check on the hard decisions, then successive
cancellation only for sub-codes that fail it.

All routines work on a batch of sub-code instances at once (arrays shaped
``(batch, n_sub)``) that share one frozen set; the batch rows are independent.
SC returns the estimate in the code-bit domain.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product

import numpy as np

from .gn_core import gn_transform, gn_transform_inplace, is_power_of_two, kron_matrix
from .quant import FLOAT, f_exact, f_min, saturate

RATE0 = "rate0"
RATE1 = "rate1"
REP = "rep"
SPC = "spc"
ML = "ml"
BRANCH = "branch"

SPECIAL_MAX_LEN = 32  # Rate-1 / REP / SPC only for spans shorter than this
ML_SPAN = 4


@dataclass(frozen=True)
class NodeOptions:
    rep: bool = True
    spc: bool = True
    ml: bool = True
    special_max_len: int = SPECIAL_MAX_LEN
    ml_span: int = ML_SPAN


PURE = None
EXACT_SC_SHORTCUTS = NodeOptions(spc=False, ml=False)


@dataclass(frozen=True)
class Node:
    kind: str
    start: int
    length: int
    left: "Node" = None
    right: "Node" = None
    patterns: np.ndarray = field(default=None, compare=False, repr=False)

    def leaves(self):
        if self.kind == BRANCH:
            yield from self.left.leaves()
            yield from self.right.leaves()
        else:
            yield self

    def walk(self):
        yield self
        if self.kind == BRANCH:
            yield from self.left.walk()
            yield from self.right.walk()


def node_codewords(frozen_mask):
    """All codewords of a short polar code with the given local frozen mask."""
    length = frozen_mask.size
    info = np.flatnonzero(~frozen_mask)
    msgs = np.array(list(product((0, 1), repeat=info.size)), dtype=np.uint8).reshape(1 << info.size, info.size)
    u = np.zeros((msgs.shape[0], length), dtype=np.uint8)
    u[:, info] = msgs
    if length == 1:
        return u
    return gn_transform(u)


def classify(frozen, n_sub, options=NodeOptions()):
    """
    Split the sub-code decoding tree into special nodes.

    ``options=None`` (``PURE``) gives the plain SC tree whose leaves are single
    bits. Otherwise Rate-0 spans of any length are pruned, Rate-1 / REP / SPC
    spans are taken when shorter than ``special_max_len``, and remaining spans
    of length ``ml_span`` become exhaustive ML nodes.
    """
    if not is_power_of_two(n_sub):
        raise ValueError(f"n_sub must be a power of two, got {n_sub}")
    mask = np.zeros(n_sub, dtype=bool)
    mask[list(frozen)] = True

    def build(start, length):
        fz = mask[start:start + length]
        if length == 1:
            return Node(RATE0 if fz[0] else RATE1, start, 1)
        if options is not None:
            if fz.all():
                return Node(RATE0, start, length)
            if length < options.special_max_len:
                if not fz.any():
                    return Node(RATE1, start, length)
                if options.rep and fz[:-1].all() and not fz[-1]:
                    return Node(REP, start, length)
                if options.spc and fz[0] and not fz[1:].any():
                    return Node(SPC, start, length)
            if options.ml and length == options.ml_span:
                return Node(ML, start, length, patterns=node_codewords(fz))
        half = length // 2
        return Node(BRANCH, start, length, build(start, half), build(start + half, half))

    return build(0, n_sub)


def reference_classify(frozen, n_sub, options=NodeOptions()):
    """
    Leaf list ``[(kind, start, length)]`` from a direct scan, without a tree.

    Walks spans largest-first and emits the first rule that matches; kept
    deliberately separate from :func:`classify` so each can check the other.
    """
    frozen = set(frozen)
    out = []
    stack = [(0, n_sub)]
    while stack:
        start, length = stack.pop()
        idx = range(start, start + length)
        n_frozen = sum(1 for v in idx if v in frozen)
        kind = None
        if length == 1:
            kind = RATE0 if n_frozen else RATE1
        elif options is not None:
            if n_frozen == length:
                kind = RATE0
            elif length < options.special_max_len and n_frozen == 0:
                kind = RATE1
            elif (length < options.special_max_len and options.rep and n_frozen == length - 1
                  and (start + length - 1) not in frozen):
                kind = REP
            elif length < options.special_max_len and options.spc and n_frozen == 1 and start in frozen:
                kind = SPC
            elif options.ml and length == options.ml_span:
                kind = ML
        if kind is None:
            half = length // 2
            stack.append((start + half, half))
            stack.append((start, half))
        else:
            out.append((kind, start, length))
    return out


def syndrome_check(c_hat, frozen):
    """
    True where ``u = c_hat G`` is nonzero on any frozen position.

    Works on a single vector or a batch ``(..., n_sub)``.
    """
    c = np.asarray(c_hat, dtype=np.uint8)
    frozen = np.asarray(list(frozen), dtype=np.int64)
    if frozen.size == 0:
        return np.zeros(c.shape[:-1], dtype=bool) if c.ndim > 1 else False
    u = gn_transform_inplace(np.array(c, dtype=np.uint8, order="C"))
    err = u[..., frozen].any(axis=-1)
    return bool(err) if c.ndim == 1 else err


def hard_decision(llr):
    """Negative LLR -> 1, zero or positive -> 0."""
    return (np.asarray(llr) < 0).astype(np.uint8)


class SCDecoder:
    """
    Successive-cancellation decoder for one frozen set.

    Parameters
    ----------
    frozen : iterable of int
        Frozen positions (value 0) in the message domain.
    n_sub : int
        Code length.
    quant : QuantSpec
        Arithmetic used for the f/g updates. Inputs are expected on its grid.
    options : NodeOptions or None
        Special-node shortcuts; ``None`` is plain SC down to single bits.
    f_kind : {"minsum", "exact"}
        Check-node rule; "exact" only in float mode.

    Instances keep no per-call state and may be reused freely.
    """

    def __init__(self, frozen, n_sub, quant=FLOAT, options=NodeOptions(), f_kind="minsum"):
        if f_kind not in ("minsum", "exact"):
            raise ValueError(f"unknown f_kind {f_kind!r}")
        if f_kind == "exact" and not quant.is_float:
            raise ValueError("exact box-plus is only available in float mode")
        self.frozen = tuple(sorted(frozen))
        self.n_sub = n_sub
        self.quant = quant
        self.options = options
        self.f_kind = f_kind
        self.tree = classify(self.frozen, n_sub, options)
        self._f = f_exact if f_kind == "exact" else f_min

    def decode(self, llr):
        """Decode ``(batch, n_sub)`` (or a single vector) LLRs to code bits."""
        a = np.asarray(llr, dtype=self.quant.dtype)
        single = a.ndim == 1
        if single:
            a = a[None, :]
        if a.shape[-1] != self.n_sub:
            raise ValueError(f"expected {self.n_sub} LLRs, got {a.shape[-1]}")
        out = self._decode(self.tree, a)
        return out[0] if single else out

    def _decode(self, node, a):
        kind = node.kind
        if kind == RATE0:
            return np.zeros(a.shape, dtype=np.uint8)
        if kind == RATE1:
            return (a < 0).astype(np.uint8)
        if kind == REP:
            # same pairwise saturating order as SC through the Rate-0 left children
            v = a
            while v.shape[1] > 1:
                h = v.shape[1] // 2
                v = saturate(v[:, :h] + v[:, h:], self.quant)
            return np.repeat((v < 0).astype(np.uint8), a.shape[1], axis=1)
        if kind == SPC:
            bits = (a < 0).astype(np.uint8)
            odd = (bits.sum(axis=1) & 1).astype(bool)
            if odd.any():
                rows = np.flatnonzero(odd)
                weakest = np.argmin(np.abs(a[rows]), axis=1)
                bits[rows, weakest] ^= 1
            return bits
        if kind == ML:
            signs = 1 - 2 * node.patterns.astype(a.dtype)
            best = np.argmax(a @ signs.T, axis=1)
            return node.patterns[best]
        h = a.shape[1] // 2
        a1 = a[:, :h]
        a2 = a[:, h:]
        if node.left.kind == RATE0:
            left = np.zeros(a1.shape, dtype=np.uint8)
        else:
            left = self._decode(node.left, self._f(a1, a2))
        sign = 1 - 2 * left.astype(a.dtype)
        right = self._decode(node.right, saturate(a2 + sign * a1, self.quant))
        return np.concatenate([left ^ right, right], axis=1)


@lru_cache(maxsize=256)
def get_decoder(frozen, n_sub, quant=FLOAT, options=NodeOptions(), f_kind="minsum"):
    return SCDecoder(frozen, n_sub, quant, options, f_kind)


def sc_decode(llr, frozen, mode="fast", quant=FLOAT, options=None, f_kind="minsum"):
    """
    SC decoding of one sub-code (or a batch sharing ``frozen``).

    ``mode="pure"`` is bit-by-bit SC; ``mode="fast"`` applies the special-node
    shortcuts in ``options`` (all enabled by default).
    """
    a = np.asarray(llr)
    n_sub = a.shape[-1]
    if mode == "pure":
        opts = PURE
    elif mode == "fast":
        opts = NodeOptions() if options is None else options
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return get_decoder(tuple(sorted(frozen)), n_sub, quant, opts, f_kind).decode(a)


@dataclass
class SubDecodeResult:
    """Batched outcome: code bits, error-detected flags and SC usage."""

    c_hat: np.ndarray
    e: np.ndarray
    sc_invoked: np.ndarray


def subdecode(llr, frozen, decoder=None, quant=FLOAT):
    """
    Syndrome-check the hard decisions and run SC only where the check fails.

    When no error is detected the hard decisions are returned untouched.
    """
    a = np.asarray(llr)
    single = a.ndim == 1
    if single:
        a = a[None, :]
    if decoder is None:
        decoder = get_decoder(tuple(sorted(frozen)), a.shape[-1], quant)
    c_hat = hard_decision(a)
    e = syndrome_check(c_hat, frozen)
    if e.any():
        rows = np.flatnonzero(e)
        c_hat[rows] = decoder.decode(a[rows])
    res = SubDecodeResult(c_hat, e, e.copy())
    if single:
        return SubDecodeResult(res.c_hat[0], bool(res.e[0]), bool(res.sc_invoked[0]))
    return res


def node_ml_decision(llr, frozen_mask):
    """Brute-force ML over all local codewords (oracle for node shortcuts)."""
    cw = node_codewords(np.asarray(frozen_mask, dtype=bool))
    metric = np.asarray(llr, dtype=np.float64) @ (1 - 2 * cw.astype(np.float64)).T
    return cw[np.argmax(metric, axis=-1)]


def dense_syndrome(c_hat, frozen):
    """Dense-matrix recomputation of the syndrome (oracle)."""
    c = np.asarray(c_hat, dtype=np.int64)
    g = kron_matrix(c.shape[-1].bit_length() - 1).astype(np.int64)
    u = (c @ g) & 1
    return bool(u[list(frozen)].any()) if frozen else False
