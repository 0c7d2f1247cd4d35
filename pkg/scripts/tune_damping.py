"""Coarse grid search for a constant damping triple (iterations t >= 2).

Writes the winner to src/gncoset/data/default_schedule.json.

    python scripts/tune_damping.py --nsub 16 --ksub 14 --esn0 5.5 --frames 4000
"""

import argparse
import itertools
import json
from pathlib import Path

import numpy as np

from gncoset.channel_sim import SimConfig, simulate_frames
from gncoset.construction import build_product_code
from gncoset.pdf import DampingSchedule
from gncoset.quant import parse_quant

GRID = np.arange(0.0, 1.51, 0.25)
OUT = Path(__file__).resolve().parents[1] / "src" / "gncoset" / "data" / "default_schedule.json"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nsub", type=int, default=16)
    ap.add_argument("--ksub", type=int, default=14)
    ap.add_argument("--esn0", type=float, nargs="+", default=[5.5])
    ap.add_argument("--tmax", type=int, default=5)
    ap.add_argument("--frames", type=int, default=4000)
    ap.add_argument("--quant", default="float")
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--write", action="store_true", help="overwrite the shipped default")
    args = ap.parse_args()

    spec = build_product_code(args.nsub, args.ksub)
    results = []
    for a, b, g in itertools.product(GRID, GRID, GRID):
        sched = DampingSchedule.constant(a, b, g)
        cfg = SimConfig(spec, args.esn0, quant=parse_quant(args.quant), schedule=sched,
                        t_max=args.tmax, max_frames=args.frames, seed=args.seed)
        dec = cfg.decoder()
        errs = sum(simulate_frames(cfg, dec, e, 0, args.frames)["blk_err"] for e in args.esn0)
        results.append((errs, a, b, g))
    results.sort()
    for row in results[:10]:
        print("blk_err=%d alpha=%.2f beta=%.2f gamma=%.2f" % row)
    _, a, b, g = results[0]
    if args.write:
        label = (f"grid search alpha,beta,gamma in 0..1.5 step 0.25; product({args.nsub},{args.ksub}); "
                 f"Es/N0 {args.esn0} dB; t_max {args.tmax}; {args.frames} frames; {args.quant}")
        doc = {"label": label, "schedule": DampingSchedule.constant(a, b, g).to_json()}
        OUT.write_text(json.dumps(doc, indent=2) + "\n")
        print("wrote", OUT)


if __name__ == "__main__":
    main()
