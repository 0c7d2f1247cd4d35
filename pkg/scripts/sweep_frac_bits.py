"""Fraction-bit sweep for the fixed-point component decoder.

For every total width Q and fraction width f, decodes the same random
codewords of one sub-code and counts block errors. The f with the fewest
errors per Q is the candidate default in ``gncoset.quant.DEFAULT_FRAC_BITS``.

    python scripts/sweep_frac_bits.py --nsub 128 --ksub 115 --esn0 7.5 8.0 --frames 50000
"""

import argparse

import numpy as np

from gncoset.component_sc import sc_decode
from gncoset.construction import build_product_code
from gncoset.gn_core import gn_transform
from gncoset.quant import FLOAT, QuantSpec, quantize


def block_errors(y, x, frozen, quant):
    llr = y if quant.is_float else quantize(y, quant)
    return int((sc_decode(llr, frozen, quant=quant) != x).any(axis=1).sum())


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nsub", type=int, default=128)
    ap.add_argument("--ksub", type=int, default=115)
    ap.add_argument("--esn0", type=float, nargs="+", default=[7.5, 8.0])
    ap.add_argument("--frames", type=int, default=50_000)
    ap.add_argument("--widths", type=int, nargs="+", default=[4, 5, 6, 7, 8])
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    frozen = list(build_product_code(args.nsub, args.ksub).default_frozen)
    rng = np.random.default_rng(args.seed)
    frames = []
    for esn0 in args.esn0:
        u = rng.integers(0, 2, (args.frames, args.nsub), dtype=np.uint8)
        u[:, frozen] = 0
        x = gn_transform(u)
        y = 1.0 - 2.0 * x + np.sqrt(10 ** (-esn0 / 10)) * rng.standard_normal(x.shape)
        frames.append((y, x))

    def total(quant):
        return [block_errors(y, x, frozen, quant) for y, x in frames]

    print("format   " + "  ".join(f"{e:>6.2f}dB" for e in args.esn0))
    print(f"float    " + "  ".join(f"{v:8d}" for v in total(FLOAT)))
    for q in args.widths:
        best = None
        for f in range(q - 1):
            errs = total(QuantSpec(q, f))
            print(f"Q{q}F{f:<5d}" + "  ".join(f"{v:8d}" for v in errs))
            if best is None or sum(errs) < best[0]:
                best = (sum(errs), f)
        print(f"  -> Q{q}: f={best[1]}")


if __name__ == "__main__":
    main()
