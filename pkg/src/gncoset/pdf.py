"""
Two-graph parallel decoding framework with SC component decoders.

Iteration ``t`` decodes all sub-codes of graph G (t odd) or Gpi (t even). The
input LLR of each bit is the channel value plus a signed damping offset built
from the hard outputs of the previous two iterations:

    L = y + Delta * (1 - 2 c[t-1])
    Delta = delta (= alpha + beta)  if e[t-1] and c[t-1] != c[t-2]
            theta (= alpha - beta)  if e[t-1] and c[t-1] == c[t-2]
            gamma                   if not e[t-1]

where ``e[t-1]`` is the error flag of the sub-code (on the other graph) that
held the bit at ``t-1``. Hard outputs are kept in codeword order, so bit
``(j, i)`` of the other graph and bit ``(i, j)`` of the same graph are simply
position ``k`` of the previous arrays. Before the first iteration everything is
zero and the first pass uses the channel values directly.
"""

import json
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .component_sc import NodeOptions, get_decoder, hard_decision, syndrome_check
from .gn_core import GraphId, subcode_view
from .quant import FLOAT, quantize, saturate

ET_MODES = ("both", "current", "off")


# Damping schedule ---------------------------------------------------------

@dataclass(frozen=True)
class Damping:
    alpha: float
    beta: float
    gamma: float

    @property
    def delta(self):
        return self.alpha + self.beta

    @property
    def theta(self):
        return self.alpha - self.beta


@dataclass(frozen=True)
class DampingSchedule:
    """Per-iteration damping factors; iterations past the end reuse the last entry."""

    entries: tuple
    label: str = ""

    def __post_init__(self):
        if not self.entries:
            raise ValueError("damping schedule needs at least one entry")
        object.__setattr__(self, "entries", tuple(
            e if isinstance(e, Damping) else Damping(*e) for e in self.entries))

    def at(self, t):
        if t < 1:
            raise ValueError(f"iterations count from 1, got {t}")
        return self.entries[min(t, len(self.entries)) - 1]

    def to_json(self):
        return [{"t": t + 1, "alpha": e.alpha, "beta": e.beta, "gamma": e.gamma}
                for t, e in enumerate(self.entries)]

    @classmethod
    def from_json(cls, rows, label=""):
        if isinstance(rows, dict):
            label = rows.get("label", label)
            rows = rows["schedule"]
        if not isinstance(rows, list) or not rows:
            raise ValueError("damping schedule must be a non-empty JSON array")
        rows = sorted(rows, key=lambda r: r["t"])
        if [r["t"] for r in rows] != list(range(1, len(rows) + 1)):
            raise ValueError("damping schedule entries must cover t = 1, 2, ... without gaps")
        return cls(tuple(Damping(float(r["alpha"]), float(r["beta"]), float(r["gamma"]))
                         for r in rows), label)

    @classmethod
    def constant(cls, alpha, beta, gamma):
        return cls((Damping(0.0, 0.0, 0.0), Damping(alpha, beta, gamma)))


def load_schedule(path):
    with open(path) as fh:
        return DampingSchedule.from_json(json.load(fh))


def save_schedule(schedule, path):
    with open(path, "w") as fh:
        json.dump(schedule.to_json(), fh, indent=2)
        fh.write("\n")


def default_schedule():
    """Shipped schedule from ``scripts/tune_damping.py`` (see the file's label)."""
    text = resources.files("gncoset.data").joinpath("default_schedule.json").read_text()
    return DampingSchedule.from_json(json.loads(text))


# LLR generation -----------------------------------------------------------

def delta_select(e_prev, c1, c2, damping):
    """Pick the damping offset magnitude per bit (vectorised)."""
    e_prev = np.asarray(e_prev, dtype=bool)
    differ = np.asarray(c1) != np.asarray(c2)
    return np.where(e_prev, np.where(differ, damping.delta, damping.theta), damping.gamma)


def lgen(y, c1, delta, quant=FLOAT):
    """Regenerated LLR ``y + delta (1 - 2 c1)`` as one saturating addition."""
    y = np.asarray(y)
    offset = np.where(np.asarray(c1, dtype=bool), -np.asarray(delta), np.asarray(delta))
    return saturate(y + offset, quant)


# Decoder ------------------------------------------------------------------

@dataclass
class FrameInput:
    y: np.ndarray
    sigma2: float = None


@dataclass
class DecodeStats:
    """Per-frame counters of one batch decode (arrays over the batch)."""

    iterations: np.ndarray
    et_fired: np.ndarray
    sc_calls: np.ndarray          # (batch, t_max) SC invocations per iteration
    syndrome_ok: np.ndarray       # output passes every row and column check
    t_max: int
    n_sub: int
    trace: list = field(default_factory=list)

    @property
    def subdecode_calls(self):
        return self.iterations * self.n_sub

    @property
    def worst_case_iterations(self):
        return self.t_max

    def frame(self, b):
        return {
            "iterations_used": int(self.iterations[b]),
            "worst_case_iterations": self.t_max,
            "et_fired": bool(self.et_fired[b]),
            "sc_calls_per_iteration": self.sc_calls[b, : self.iterations[b]].tolist(),
            "sc_calls": int(self.sc_calls[b].sum()),
            "subdecode_calls": int(self.subdecode_calls[b]),
            "syndrome_ok": bool(self.syndrome_ok[b]),
        }


def check_all(x, spec, graph):
    """Per-frame: every sub-code of ``graph`` passes its syndrome check."""
    grid = subcode_view(np.ascontiguousarray(x), graph, spec.n_sub)
    ok = np.ones(x.shape[0], dtype=bool)
    for frozen, idx in spec.groups(graph):
        if not frozen:
            continue
        rows = np.ascontiguousarray(grid[:, idx, :]).reshape(-1, spec.n_sub)
        bad = syndrome_check(rows, frozen).reshape(x.shape[0], idx.size)
        ok &= ~bad.any(axis=1)
    return ok


class PDFDecoder:
    """
    Iterative decoder for a :class:`CodeSpec`.

    Parameters
    ----------
    spec : CodeSpec
    schedule : DampingSchedule, optional
        Defaults to :func:`default_schedule`.
    quant : QuantSpec
        Fixed-point format of channel values, damping factors and SC
        internals, or float.
    t_max : int
        Maximum (worst-case) number of iterations.
    et : {"both", "current", "off"}
        Early termination. "current" stops once every sub-code of the current
        iteration passes its syndrome check; "both" additionally requires the
        emitted word to pass the other graph's checks, so that a stop always
        emits a codeword; "off" always runs ``t_max`` iterations.
    llr_form : {"scaled", "channel"}
        "scaled" feeds ``y`` and raw damping factors (noise variance
        cancelled). "channel" uses ``2y/sigma2`` and factors scaled by
        ``2/sigma2``; float mode only, needs ``sigma2`` per call.
    options : NodeOptions or None
        SC shortcuts of the component decoders (None = plain SC).
    """

    def __init__(self, spec, schedule=None, quant=FLOAT, t_max=5, et="both",
                 llr_form="scaled", options=NodeOptions(), f_kind="minsum"):
        if t_max < 1:
            raise ValueError(f"t_max must be >= 1, got {t_max}")
        if et not in ET_MODES:
            raise ValueError(f"et must be one of {ET_MODES}, got {et!r}")
        if llr_form not in ("scaled", "channel"):
            raise ValueError(f"unknown llr_form {llr_form!r}")
        if llr_form == "channel" and not quant.is_float:
            raise ValueError("llr_form='channel' is float-only")
        self.spec = spec
        self.schedule = schedule if schedule is not None else default_schedule()
        self.quant = quant
        self.t_max = t_max
        self.et = et
        self.llr_form = llr_form
        n = spec.n_sub
        self._groups = {}
        for graph in GraphId:
            self._groups[graph] = [
                (frozen, idx, get_decoder(frozen, n, quant, options, f_kind))
                for frozen, idx in spec.groups(graph)
            ]
        # sub-code holding bit k on each graph
        k = np.arange(spec.N)
        self._owner = {GraphId.G: k % n, GraphId.GPI: k // n}

    def _coeffs(self, t, scale):
        d = self.schedule.at(t)
        if self.quant.is_float:
            return d.delta * scale, d.theta * scale, d.gamma * scale
        a, b, g = (int(quantize(v, self.quant)) for v in (d.alpha, d.beta, d.gamma))
        m = self.quant.max_mag
        return min(a + b, m), max(min(a - b, m), -m), g

    def _channel(self, y, sigma2):
        if self.llr_form == "channel":
            if sigma2 is None:
                raise ValueError("llr_form='channel' needs sigma2")
            return 2.0 * y / sigma2, 2.0 / sigma2
        return quantize(y, self.quant), 1.0

    def decode_batch(self, y, sigma2=None, trace=False):
        """
        Decode frames ``y`` of shape ``(batch, N)``.

        Returns ``(x_hat, stats)`` with ``x_hat`` in codeword order.
        """
        y = np.asarray(y, dtype=np.float64)
        if y.ndim != 2 or y.shape[1] != self.spec.N:
            raise ValueError(f"expected frames of length N={self.spec.N}, got shape {y.shape}")
        n = self.spec.n_sub
        batch = y.shape[0]
        lch, scale = self._channel(y, sigma2)

        x_hat = np.zeros((batch, self.spec.N), dtype=np.uint8)
        iterations = np.full(batch, self.t_max, dtype=np.int64)
        et_fired = np.zeros(batch, dtype=bool)
        sc_calls = np.zeros((batch, self.t_max), dtype=np.int64)
        steps = []

        active = np.arange(batch)
        c1 = np.zeros((batch, self.spec.N), dtype=np.uint8)
        c2 = np.zeros_like(c1)
        e1 = np.zeros((batch, n), dtype=bool)
        for t in range(1, self.t_max + 1):
            graph = GraphId.for_iteration(t)
            lt = lch[active]
            if t > 1:
                delta, theta, gamma = self._coeffs(t, scale)
                e_bit = e1[:, self._owner[graph.other]]
                mag = np.where(e_bit, np.where(c1 != c2, delta, theta), gamma)
                lt = saturate(lt + np.where(c1.astype(bool), -mag, mag), self.quant)
                lt = lt.astype(self.quant.dtype, copy=False)
            c_new, e_new = self._decode_graph(lt, graph)
            sc_calls[active, t - 1] = e_new.sum(axis=1)
            if trace:
                steps.append({"t": t, "graph": graph, "frames": active.copy(),
                              "llr": lt.copy(), "c": c_new.copy(), "e": e_new.copy()})
            c2, c1, e1 = c1, c_new, e_new
            if self.et != "off":
                stop = ~e_new.any(axis=1)
                if self.et == "both" and stop.any():
                    stop[stop] = check_all(c_new[stop], self.spec, graph.other)
                if stop.any():
                    done = active[stop]
                    x_hat[done] = c_new[stop]
                    iterations[done] = t
                    et_fired[done] = True
                    keep = ~stop
                    active, c1, c2, e1 = active[keep], c1[keep], c2[keep], e1[keep]
            if active.size == 0:
                break
        x_hat[active] = c1
        syndrome_ok = check_all(x_hat, self.spec, GraphId.G) & check_all(x_hat, self.spec, GraphId.GPI)
        stats = DecodeStats(iterations, et_fired, sc_calls, syndrome_ok, self.t_max, n, steps)
        return x_hat, stats

    def _decode_graph(self, llr, graph):
        """Run every sub-code of ``graph``; returns code bits (codeword order) and flags."""
        n = self.spec.n_sub
        batch = llr.shape[0]
        lgrid = subcode_view(llr, graph, n)
        out = np.zeros((batch, self.spec.N), dtype=np.uint8)
        cgrid = subcode_view(out, graph, n)
        e = np.zeros((batch, n), dtype=bool)
        for frozen, idx, dec in self._groups[graph]:
            rows = np.ascontiguousarray(lgrid[:, idx, :]).reshape(-1, n)
            c = hard_decision(rows)
            if frozen:
                err = syndrome_check(c, frozen)
                if err.any():
                    hit = np.flatnonzero(err)
                    c[hit] = dec.decode(rows[hit])
                e[:, idx] = err.reshape(batch, idx.size)
            cgrid[:, idx, :] = c.reshape(batch, idx.size, n)
        return out, e

    def decode_frame(self, frame):
        y = frame.y if isinstance(frame, FrameInput) else np.asarray(frame)
        sigma2 = frame.sigma2 if isinstance(frame, FrameInput) else None
        x_hat, stats = self.decode_batch(np.asarray(y)[None, :], sigma2)
        return x_hat[0], stats.frame(0)


def decode_frame(frame, spec, schedule=None, quant=FLOAT, t_max=5, **kwargs):
    """One-shot decode of a single frame; returns ``(x_hat, stats_dict)``."""
    y = frame.y if isinstance(frame, FrameInput) else np.asarray(frame)
    if np.asarray(y).shape != (spec.N,):
        raise ValueError(f"frame length {np.asarray(y).shape} does not match N={spec.N}")
    return PDFDecoder(spec, schedule, quant, t_max, **kwargs).decode_frame(frame)


def recover_message(x_hat, spec):
    """Information bits of a decoded word (``u = x G_N`` on the info positions)."""
    x_hat = np.asarray(x_hat)
    if x_hat.shape[-1] != spec.N:
        raise ValueError(f"word length must be N={spec.N}, got {x_hat.shape[-1]}")
    return spec.encoder.recover(x_hat)
