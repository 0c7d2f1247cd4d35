"""Fit the per-node cycle costs to the N=128 sub-decoder latency table.

    python scripts/fit_node_costs.py [--design-esn0 6.3]
"""

import argparse

from gncoset.component_sc import classify
from gncoset.construction import build_product_code
from gncoset.perf_model import SUBDECODER_CYCLES, cycle_count_model, fit_node_costs


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--design-esn0", type=float, default=6.3)
    ap.add_argument("--max-cost", type=int, default=6)
    args = ap.parse_args()
    samples = []
    for k_sub, cycles in SUBDECODER_CYCLES.items():
        spec = build_product_code(128, k_sub, design_esn0_db=args.design_esn0)
        samples.append((k_sub, classify(spec.default_frozen, 128), cycles))
    costs, err = fit_node_costs([(t, c) for _, t, c in samples], args.max_cost)
    print(costs)
    print(f"max |error| = {err:g} cycles")
    for k_sub, tree, cycles in samples:
        print(f"K_sub={k_sub}: table {cycles}, model {cycle_count_model(tree, costs)}")


if __name__ == "__main__":
    main()
