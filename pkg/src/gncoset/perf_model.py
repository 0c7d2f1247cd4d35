"""
Analytical throughput model: component-decoder cycle counts from the SC node
tree, worst-case frame latency, area efficiency and process-node scaling.

Cycle costs are fitted estimates (scripts/fit_node_costs.py), not silicon
measurements.
"""

import json
import math
import os
from dataclasses import asdict, dataclass
from importlib import resources

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp

from .component_sc import BRANCH, ML, RATE0, RATE1, REP, SPC, classify

CLOCK_GHZ = 1.05

# component latency of the N=128 sub-decoder, cycles per information size
SUBDECODER_CYCLES = {111: 24, 115: 19, 119: 18, 122: 13}

# ratio reported / (K / (latency * area)), least squares over all reference KPI rows
AREA_EFF_CALIBRATION = 0.9315

# 16nm -> target node multipliers recovered from the reference 10nm and 7nm columns
SCALING = {"16nm": 1.0, "10nm": 2.300, "7nm": 4.416}


@dataclass(frozen=True)
class NodeCosts:
    """
    Cycles per tree operation. Leaf cost is ``base + slope * log2(length)``;
    each branch costs ``f`` (skipped when its left child is Rate-0) plus ``g``.
    """

    f: int = 1
    g: int = 1
    rate1: int = 0
    rate1_slope: int = 0
    rep: int = 0
    rep_slope: int = 0
    spc: int = 0
    spc_slope: int = 0
    ml: int = 0


# fitted with scripts/fit_node_costs.py against SUBDECODER_CYCLES (GA frozen sets
# at 6.3 dB); f/g come out free, i.e. absorbed into the pipelined leaf units
DEFAULT_NODE_COSTS = NodeCosts(f=0, g=0, rep=4, spc_slope=1, ml=6)


def trace_features(tree):
    """Per-parameter usage counts of a node tree, in :class:`NodeCosts` field order."""
    feat = dict.fromkeys(asdict(NodeCosts()), 0)
    for node in tree.walk():
        if node.kind == BRANCH:
            feat["g"] += 1
            if node.left.kind != RATE0:
                feat["f"] += 1
            continue
        stages = int(math.log2(node.length))
        if node.kind == RATE1:
            feat["rate1"] += 1
            feat["rate1_slope"] += stages
        elif node.kind == REP:
            feat["rep"] += 1
            feat["rep_slope"] += stages
        elif node.kind == SPC:
            feat["spc"] += 1
            feat["spc_slope"] += stages
        elif node.kind == ML:
            feat["ml"] += 1
    return feat


def cycle_count_model(tree, costs=None):
    """Estimated sub-decoder cycles for one SC pass over ``tree``."""
    costs = costs or DEFAULT_NODE_COSTS
    feat = trace_features(tree)
    c = asdict(costs)
    return sum(feat[k] * c[k] for k in feat)


def subcode_cycles(frozen, n_sub, costs=None):
    return cycle_count_model(classify(frozen, n_sub), costs)


def fit_node_costs(samples, max_cost=6):
    """
    Integer fit of :class:`NodeCosts` to ``samples = [(tree, target_cycles)]``.

    Two mixed-integer stages: minimise the worst absolute error, then, at that
    worst error, minimise the summed absolute error plus a small penalty on
    the total cost. Returns ``(costs, max_abs_error)``.
    """
    names = list(asdict(NodeCosts()))
    feats = np.array([[trace_features(t)[n] for n in names] for t, _ in samples], dtype=float)
    target = np.array([c for _, c in samples], dtype=float)
    m, n = feats.shape
    # variables: n costs, m per-sample |error|, 1 worst error
    integrality = np.r_[np.ones(n), np.zeros(m + 1)]
    bounds = Bounds(np.zeros(n + m + 1), np.r_[np.full(n, max_cost), np.full(m + 1, np.inf)])
    eye = np.eye(m)
    rows = [
        np.c_[feats, -eye, np.zeros((m, 1))],      # F p - t <= e_i
        np.c_[-feats, -eye, np.zeros((m, 1))],     # t - F p <= e_i
        np.c_[np.zeros((m, n)), eye, -np.ones((m, 1))],  # e_i <= E
    ]
    cons = [LinearConstraint(np.vstack(rows), -np.inf, np.r_[target, -target, np.zeros(m)])]
    first = milp(np.r_[np.zeros(n + m), 1.0], constraints=cons, integrality=integrality, bounds=bounds)
    worst = first.x[-1]
    cap = LinearConstraint(np.r_[np.zeros(n + m), 1.0][None, :], -np.inf, worst + 1e-9)
    second = milp(np.r_[np.full(n, 1e-3), np.ones(m), 0.0], constraints=cons + [cap],
                  integrality=integrality, bounds=bounds)
    params = {name: int(round(v)) for name, v in zip(names, second.x[:n])}
    costs = NodeCosts(**params)
    err = max(abs(cycle_count_model(t, costs) - c) for t, c in samples)
    return costs, float(err)


@dataclass(frozen=True)
class LatencyTable:
    cycles: dict
    clock_ghz: float = CLOCK_GHZ

    def __post_init__(self):
        if any(c < 1 for c in self.cycles.values()):
            raise ValueError("cycle counts must be >= 1")

    def ns(self, k_sub):
        return self.cycles_for(k_sub) / self.clock_ghz

    def cycles_for(self, k_sub):
        if k_sub not in self.cycles:
            raise ValueError(f"no latency entry for K_sub={k_sub}; have {sorted(self.cycles)}")
        return self.cycles[k_sub]


SUBDECODER_LATENCY = LatencyTable(dict(SUBDECODER_CYCLES))

# inter-iteration overhead in cycles, least squares over the reference latency rows
ITERATION_OVERHEAD_CYCLES = 4.94


def iteration_latency(spec, t_max, table=SUBDECODER_LATENCY, overhead_cycles=ITERATION_OVERHEAD_CYCLES):
    """
    Worst-case decoding latency in ns:
    ``t_max * (slowest sub-decoder cycles + overhead) / clock``.

    ``spec`` may be a CodeSpec (every distinct sub-code K is looked up) or a
    plain K_sub.
    """
    if t_max < 0:
        raise ValueError("t_max must be >= 0")
    if isinstance(spec, (int, np.integer)):
        ks = {int(spec)}
    else:
        ks = {spec.n_sub - len(f) for g in ("G", "Gpi") for f, _ in spec.groups(g)}
    worst = max(table.cycles_for(k) for k in ks)
    return t_max * (worst + overhead_cycles) / table.clock_ghz


def fit_iteration_overhead(rows, table=SUBDECODER_LATENCY):
    """
    Least-squares overhead (cycles) from rows of ``(k_sub, t_max, latency_ns)``.
    """
    num = den = 0.0
    for k_sub, t, lat in rows:
        # lat = t (c + d) / f  ->  residual in d is linear with weight t / f
        w = t / table.clock_ghz
        num += w * (lat - w * table.cycles_for(k_sub))
        den += w * w
    return num / den


@dataclass(frozen=True)
class KpiInput:
    info_bits: int
    latency_ns: float
    area_mm2: float = 1.0
    iterations: int = 0
    esn0_db: float = None

    def __post_init__(self):
        if self.info_bits <= 0 or self.latency_ns <= 0 or self.area_mm2 <= 0:
            raise ValueError("info_bits, latency_ns and area_mm2 must be positive")


def area_efficiency(kpi, calibration=1.0):
    """Information bits per (ns * mm^2), i.e. Gbps/mm^2, times ``calibration``."""
    if calibration <= 0:
        raise ValueError("calibration must be positive")
    return calibration * kpi.info_bits / (kpi.latency_ns * kpi.area_mm2)


def scale_technology(value_16nm, target):
    """Convert a 16nm area efficiency to ``target`` ("16nm", "10nm" or "7nm")."""
    if target not in SCALING:
        raise ValueError(f"unknown process node {target!r}; expected one of {sorted(SCALING)}")
    if value_16nm < 0:
        raise ValueError("value must be non-negative")
    return value_16nm * SCALING[target]


def fit_calibration(rows):
    """Least-squares multiplier from formula values to reported ones."""
    f = np.array([area_efficiency(KpiInput(r["info_bits"], r["latency_ns"], r.get("area_mm2", 1.0)))
                  for r in rows])
    rep = np.array([r["area_eff_16nm"] for r in rows])
    return float(f @ rep / (f @ f))


def fit_scaling(rows, target):
    """Median ratio of a reported column to the 16nm column."""
    return float(np.median([r[f"area_eff_{target}"] / r["area_eff_16nm"] for r in rows]))


def load_scenario(path=None):
    """
    KPI rows from a JSON file; the packaged reference rows by default.

    A bare file name that does not exist locally is looked up among the
    packaged scenarios, so ``table2.json`` works from any directory.
    """
    packaged = resources.files("gncoset.data")
    if path is None:
        path = "table2.json"
    if not os.path.exists(path) and os.path.basename(path) == str(path) and packaged.joinpath(path).is_file():
        text = packaged.joinpath(path).read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    doc = json.loads(text)
    return doc["rows"] if isinstance(doc, dict) else doc


def kpi_rows(rows, calibration=AREA_EFF_CALIBRATION, targets=("10nm", "7nm")):
    """Computed KPI table: one dict per scenario row with model and reported values."""
    out = []
    for r in rows:
        kpi = KpiInput(r["info_bits"], r["latency_ns"], r.get("area_mm2", 1.0),
                       r.get("iterations", 0), r.get("esn0_db"))
        eff = area_efficiency(kpi, calibration)
        row = {
            "info_bits": kpi.info_bits,
            "iterations": kpi.iterations,
            "esn0_db": kpi.esn0_db,
            "latency_ns": kpi.latency_ns,
            "area_mm2": kpi.area_mm2,
            "area_eff_16nm": eff,
        }
        for tgt in targets:
            row[f"area_eff_{tgt}"] = scale_technology(eff, tgt)
        for key in [k for k in r if k.startswith("area_eff_")]:
            row[f"reported_{key}"] = r[key]
        out.append(row)
    return out
