"""
Code specifications: per-graph, per-sub-code frozen sets plus the default
product-polar construction and a JSON file format for arbitrary sets.

The code described by a :class:`CodeSpec` is the set of length-N words whose
every G-graph sub-code (column of the n_sub x n_sub layout) and every Gpi-graph
sub-code (row) has zeros on its frozen positions after the inverse transform.
With identical frozen sets everywhere this is the product of two polar codes,
and the message occupies positions ``I x I`` of ``u = x G_N``.
"""

import json
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.optimize import brentq

from .gn_core import GraphId, gn_transform, is_power_of_two, kron_matrix

SPEC_VERSION = 1
GA_MAX_NSUB = 1024
DEFAULT_DESIGN_ESN0_DB = 6.3


class SpecError(ValueError):
    """Malformed or inconsistent code-spec file."""


# Gaussian approximation ---------------------------------------------------
#
# Two-piece approximation of phi(x) = 1 - E[tanh(l/2)], l ~ N(x, 2x):
#   phi(x) ~ exp(-0.4527 x^0.86 + 0.0218)                 0 <= x < 10
#   phi(x) ~ sqrt(pi/x) exp(-x/4) (1 - 10/(7x))            x >= 10
# Relative error of either piece is a few percent; the pieces miss each other
# by ~0.025 in log(phi) at x = 10, and the bracketed inverse lands on the seam
# for targets inside that gap. Worked in the log domain so that means of
# several thousand do not underflow.

def _log_phi(x):
    if x < 10.0:
        return -0.4527 * x ** 0.86 + 0.0218
    return 0.5 * math.log(math.pi / x) - x / 4.0 + math.log1p(-10.0 / (7.0 * x))


def _check_mean(m):
    """Mean LLR after a check-node combine of two channels of mean ``m``."""
    lp = min(_log_phi(m), 0.0)
    target = lp + math.log(2.0 - math.exp(lp))
    lo = 1e-12
    if m <= lo:
        return lo
    return brentq(lambda x: _log_phi(x) - target, lo, m, xtol=1e-12, rtol=1e-12)


def _ga_recursive(size, m):
    if size == 1:
        return [m]
    # MSB 0 -> check-node (worse) half, MSB 1 -> variable-node half
    return _ga_recursive(size // 2, _check_mean(m)) + _ga_recursive(size // 2, 2.0 * m)


def ga_means(n_sub, design_esn0_db):
    """Mean LLR of each synthetic bit channel, natural index order."""
    if not is_power_of_two(n_sub) or n_sub > GA_MAX_NSUB:
        raise ValueError(f"n_sub must be a power of two <= {GA_MAX_NSUB}, got {n_sub}")
    sigma2 = 10.0 ** (-design_esn0_db / 10.0)
    return np.array(_ga_recursive(n_sub, 2.0 / sigma2))


def gaussian_approx_order(n_sub, design_esn0_db=DEFAULT_DESIGN_ESN0_DB):
    """
    Reliability ordering of the bit channels, least reliable first.

    Ties keep the lower index as the less reliable one.
    """
    return np.argsort(ga_means(n_sub, design_esn0_db), kind="stable")


# Code specification -------------------------------------------------------

def _check_index_set(values, n_sub, where):
    if not isinstance(values, (list, tuple)):
        raise SpecError(f"field {where!r}: expected a list of indices")
    out = []
    for v in values:
        if isinstance(v, bool) or not isinstance(v, (int, np.integer)):
            raise SpecError(f"field {where!r}: non-integer index {v!r}")
        if not 0 <= v < n_sub:
            raise SpecError(f"field {where!r}: index {v} outside [0, {n_sub})")
        out.append(int(v))
    if len(set(out)) != len(out):
        raise SpecError(f"field {where!r}: duplicate indices")
    if out != sorted(out):
        raise SpecError(f"field {where!r}: indices must be ascending")
    return tuple(out)


@dataclass(frozen=True)
class CodeSpec:
    """
    Dimensions and frozen sets of a G_N-coset code under the two-graph decoder.

    ``overrides`` maps ``(GraphId, i)`` to a frozen tuple; sub-codes without an
    override use ``default_frozen``.
    """

    n_sub: int
    k_total: int
    default_frozen: tuple
    overrides: dict = field(default_factory=dict)
    label: str = ""
    construction: dict = field(default_factory=dict)

    def __post_init__(self):
        if not is_power_of_two(self.n_sub) or self.n_sub < 2:
            raise SpecError(f"field 'n_sub': must be a power of two >= 2, got {self.n_sub}")
        object.__setattr__(
            self, "default_frozen",
            _check_index_set(list(self.default_frozen), self.n_sub, "default_frozen"),
        )
        fixed = {}
        for (graph, i), frozen in self.overrides.items():
            graph = GraphId(graph)
            if not 0 <= i < self.n_sub:
                raise SpecError(f"field 'overrides': sub-code index {i} out of range")
            fixed[(graph, int(i))] = _check_index_set(
                list(frozen), self.n_sub, f"overrides[{graph.value},{i}].frozen")
        object.__setattr__(self, "overrides", fixed)
        if self.is_product and self.k_total != (self.n_sub - len(self.default_frozen)) ** 2:
            raise SpecError(
                f"field 'k_total': product code needs K = K_sub^2 = "
                f"{(self.n_sub - len(self.default_frozen)) ** 2}, got {self.k_total}")

    @property
    def N(self):
        return self.n_sub * self.n_sub

    @property
    def is_product(self):
        return all(f == self.default_frozen for f in self.overrides.values())

    @property
    def k_sub(self):
        return self.n_sub - len(self.default_frozen)

    @property
    def rate(self):
        return self.k_total / self.N

    def frozen_for(self, graph, i):
        return self.overrides.get((GraphId(graph), i), self.default_frozen)

    def groups(self, graph):
        """Sub-code indices of ``graph`` grouped by frozen set: ``[(frozen, idx), ...]``."""
        buckets = {}
        for i in range(self.n_sub):
            buckets.setdefault(self.frozen_for(graph, i), []).append(i)
        return [(f, np.array(idx)) for f, idx in sorted(buckets.items())]

    @cached_property
    def encoder(self):
        return Encoder(self)

    def to_json(self):
        return {
            "version": SPEC_VERSION,
            "n_sub": self.n_sub,
            "k_total": self.k_total,
            "default_frozen": list(self.default_frozen),
            "overrides": [
                {"graph": g.value, "i": i, "frozen": list(f)}
                for (g, i), f in sorted(self.overrides.items(), key=lambda kv: (kv[0][0].value, kv[0][1]))
            ],
            "label": self.label,
            "construction": dict(self.construction),
        }

    def __eq__(self, other):
        if not isinstance(other, CodeSpec):
            return NotImplemented
        return self.to_json() == other.to_json()

    __hash__ = None


def build_product_code(n_sub, k_sub, order=None, design_esn0_db=DEFAULT_DESIGN_ESN0_DB, label=""):
    """
    Product-polar code: the same frozen set on every sub-code of both graphs.

    Parameters
    ----------
    n_sub : int
        Sub-code length (sqrt(N)).
    k_sub : int
        Information bits per sub-code; K = k_sub**2.
    order : array_like, optional
        Reliability order, least reliable first. Defaults to the GA order at
        ``design_esn0_db``.
    """
    if not 0 < k_sub <= n_sub:
        raise ValueError(f"k_sub must be in 1..{n_sub}, got {k_sub}")
    meta = {"method": "product"}
    if order is None:
        order = gaussian_approx_order(n_sub, design_esn0_db)
        meta.update(order="ga", design_esn0_db=design_esn0_db)
    order = np.asarray(order)
    if sorted(order.tolist()) != list(range(n_sub)):
        raise ValueError("order must be a permutation of 0..n_sub-1")
    frozen = tuple(sorted(int(v) for v in order[: n_sub - k_sub]))
    meta["k_sub"] = k_sub
    return CodeSpec(n_sub=n_sub, k_total=k_sub * k_sub, default_frozen=frozen,
                    label=label or f"product({n_sub},{k_sub})", construction=meta)


# File format --------------------------------------------------------------

def spec_from_json(obj):
    if not isinstance(obj, dict):
        raise SpecError("top level must be a JSON object")
    for key in ("n_sub", "k_total", "default_frozen"):
        if key not in obj:
            raise SpecError(f"missing field {key!r}")
    version = obj.get("version", SPEC_VERSION)
    if version != SPEC_VERSION:
        raise SpecError(f"field 'version': unsupported version {version!r}")
    n_sub = obj["n_sub"]
    if isinstance(n_sub, bool) or not isinstance(n_sub, int):
        raise SpecError("field 'n_sub': expected an integer")
    k_total = obj["k_total"]
    if isinstance(k_total, bool) or not isinstance(k_total, int) or k_total < 0:
        raise SpecError("field 'k_total': expected a non-negative integer")
    overrides = {}
    raw = obj.get("overrides", [])
    if not isinstance(raw, list):
        raise SpecError("field 'overrides': expected a list")
    for n, entry in enumerate(raw):
        where = f"overrides[{n}]"
        if not isinstance(entry, dict) or not {"graph", "i", "frozen"} <= entry.keys():
            raise SpecError(f"field {where!r}: expected {{graph, i, frozen}}")
        try:
            graph = GraphId(entry["graph"])
        except ValueError:
            raise SpecError(f"field '{where}.graph': expected 'G' or 'Gpi', got {entry['graph']!r}") from None
        i = entry["i"]
        if isinstance(i, bool) or not isinstance(i, int):
            raise SpecError(f"field '{where}.i': expected an integer")
        if (graph, i) in overrides:
            raise SpecError(f"field {where!r}: duplicate override for ({graph.value}, {i})")
        overrides[(graph, i)] = entry["frozen"]
    return CodeSpec(
        n_sub=n_sub,
        k_total=k_total,
        default_frozen=obj["default_frozen"],
        overrides=overrides,
        label=str(obj.get("label", "")),
        construction=dict(obj.get("construction", {})),
    )


def save_spec(spec, path):
    with open(path, "w") as fh:
        json.dump(spec.to_json(), fh, indent=2)
        fh.write("\n")


def load_spec(path):
    with open(path) as fh:
        text = fh.read()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    try:
        spec = spec_from_json(obj)
    except SpecError as exc:
        raise SpecError(f"{path}: {exc}") from None
    return spec


# Encoding -----------------------------------------------------------------

def _rref_gf2(mat):
    """Row-reduce a binary matrix; returns (reduced rows, pivot columns)."""
    m = np.array(mat, dtype=np.uint8) & 1
    rows, cols = m.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(m[r:, c])
        if nz.size == 0:
            continue
        p = r + nz[0]
        if p != r:
            m[[r, p]] = m[[p, r]]
        hit = m[:, c].astype(bool)
        hit[r] = False
        m[hit] ^= m[r]
        pivots.append(c)
        r += 1
    return m[:r], pivots


def constraint_matrix(spec):
    """
    Parity constraints on ``u = x G_N`` (rows of length N) enforced by the
    sub-code frozen sets of both graphs.
    """
    n = spec.n_sub
    a = kron_matrix(int(n).bit_length() - 1)
    rows = []
    for i in range(n):
        # column i of X (graph G): message (U A)[:, i] -> sum_s U[f, s] A[s, i]
        for f in spec.frozen_for(GraphId.G, i):
            row = np.zeros((n, n), dtype=np.uint8)
            row[f, :] = a[:, i]
            rows.append(row.ravel())
        # row i of X (graph Gpi): message (A^T U)[i, :] -> sum_r A[r, i] U[r, f]
        for f in spec.frozen_for(GraphId.GPI, i):
            row = np.zeros((n, n), dtype=np.uint8)
            row[:, f] = a[:, i]
            rows.append(row.ravel())
    if not rows:
        return np.zeros((0, n * n), dtype=np.uint8)
    return np.array(rows)


class Encoder:
    """
    Message <-> codeword maps for a :class:`CodeSpec`.

    The message is written onto ``info_positions`` of ``u`` and ``x = u G_N``.
    Product specs use the ``I x I`` positions directly; other specs go through
    a GF(2) null-space basis of :func:`constraint_matrix`, systematic on its
    free columns (dense elimination, practical up to a few thousand bits).
    """

    def __init__(self, spec):
        self.spec = spec
        n = spec.n_sub
        if spec.is_product:
            info = [v for v in range(n) if v not in set(spec.default_frozen)]
            self.info_positions = np.array([r * n + s for r in info for s in info], dtype=np.int64)
            self._basis = None
        else:
            reduced, pivots = _rref_gf2(constraint_matrix(spec))
            free = np.setdiff1d(np.arange(spec.N), pivots)
            basis = np.zeros((free.size, spec.N), dtype=np.uint8)
            basis[np.arange(free.size), free] = 1
            for r, p in enumerate(pivots):
                basis[:, p] = reduced[r, free]
            self.info_positions = free
            self._basis = basis
        if self.info_positions.size != spec.k_total:
            raise SpecError(
                f"field 'k_total': frozen sets give dimension {self.info_positions.size}, "
                f"file says {spec.k_total}")

    @property
    def k(self):
        return int(self.info_positions.size)

    def message_to_u(self, msg):
        msg = np.asarray(msg, dtype=np.uint8)
        if msg.shape[-1] != self.k:
            raise ValueError(f"message length must be {self.k}, got {msg.shape[-1]}")
        if self._basis is None:
            u = np.zeros(msg.shape[:-1] + (self.spec.N,), dtype=np.uint8)
            u[..., self.info_positions] = msg
            return u
        return ((msg.astype(np.int64) @ self._basis.astype(np.int64)) & 1).astype(np.uint8)

    def encode(self, msg):
        return gn_transform(self.message_to_u(msg))

    def recover(self, x_hat):
        u = gn_transform(np.asarray(x_hat, dtype=np.uint8))
        return u[..., self.info_positions]


def encode(spec, msg):
    """Encode message bits (``(..., K)``) into codewords (``(..., N)``)."""
    return spec.encoder.encode(msg)
