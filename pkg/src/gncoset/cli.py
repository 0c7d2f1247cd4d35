"""Command-line entry point: ``gncoset {construct,simulate,kpi,codec}``."""

import argparse
import csv
import io
import json
import logging
import os
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .channel_sim import SimConfig, modulate, run_sweep
from .component_sc import NodeOptions
from .construction import DEFAULT_DESIGN_ESN0_DB, SpecError, build_product_code, load_spec, save_spec, spec_from_json
from .pdf import ET_MODES, DampingSchedule, PDFDecoder, default_schedule, load_schedule, recover_message
from .perf_model import (AREA_EFF_CALIBRATION, SCALING, SUBDECODER_LATENCY, area_efficiency, iteration_latency,
                         kpi_rows, load_scenario, KpiInput)
from .quant import parse_quant

log = logging.getLogger("gncoset")


class UsageError(Exception):
    pass


def parse_snr_range(text):
    """``"6.0:0.25:7.5"`` (inclusive), ``"6,6.5"`` or ``"6"`` -> list of floats."""
    text = text.strip()
    try:
        if ":" in text:
            start, step, stop = (float(v) for v in text.split(":"))
            if step <= 0:
                raise UsageError(f"--esn0 step must be positive: {text!r}")
            count = int(np.floor((stop - start) / step + 1e-9)) + 1
            if count < 1:
                raise UsageError(f"--esn0 range is empty: {text!r}")
            return [round(start + n * step, 10) for n in range(count)]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"bad --esn0 value {text!r}; expected start:step:stop or a comma list") from None


def _quant(text):
    try:
        return parse_quant(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _default_workers():
    try:
        return max(1, int(os.environ.get("GNCOSET_THREADS", "1")))
    except ValueError:
        return 1


# construct ----------------------------------------------------------------

def cmd_construct(args):
    spec = build_product_code(args.nsub, args.ksub, design_esn0_db=args.design_esn0, label=args.label or "")
    if args.out:
        save_spec(spec, args.out)
    else:
        json.dump(spec.to_json(), sys.stdout, indent=2)
        sys.stdout.write("\n")
    print(f"N={spec.N} K={spec.k_total} rate={spec.rate:.4f} frozen/sub-code={len(spec.default_frozen)}",
          file=sys.stderr)
    return 0


# simulate -----------------------------------------------------------------

def _sim_config_from_args(args):
    spec = load_spec(args.spec)
    schedule = load_schedule(args.schedule) if args.schedule else default_schedule()
    return SimConfig(
        spec=spec, esn0_db=parse_snr_range(args.esn0), quant=args.quant, schedule=schedule,
        t_max=args.tmax, max_frames=args.max_frames, target_block_errors=args.target_errors,
        seed=args.seed, workers=args.workers, chunk_frames=args.chunk, et=args.et,
    )


def config_to_manifest(cfg):
    return {
        "spec": cfg.spec.to_json(),
        "esn0_db": list(cfg.esn0_db),
        "quant": str(cfg.quant),
        "schedule": {"label": cfg.schedule.label, "schedule": cfg.schedule.to_json()},
        "t_max": cfg.t_max,
        "max_frames": cfg.max_frames,
        "target_block_errors": cfg.target_block_errors,
        "seed": cfg.seed,
        "chunk_frames": cfg.chunk_frames,
        "et": cfg.et,
        "workers": cfg.workers,
    }


def config_from_manifest(doc, workers=None):
    c = doc["config"]
    return SimConfig(
        spec=spec_from_json(c["spec"]), esn0_db=c["esn0_db"], quant=parse_quant(c["quant"]),
        schedule=DampingSchedule.from_json(c["schedule"]), t_max=c["t_max"],
        max_frames=c["max_frames"], target_block_errors=c["target_block_errors"], seed=c["seed"],
        workers=workers or c.get("workers", 1), chunk_frames=c["chunk_frames"], et=c["et"],
    )


def cmd_simulate(args):
    if args.manifest:
        with open(args.manifest) as fh:
            cfg = config_from_manifest(json.load(fh), args.workers_explicit)
    else:
        if not args.spec or not args.esn0:
            raise UsageError("simulate needs --spec and --esn0 (or --manifest)")
        cfg = _sim_config_from_args(args)
    started = datetime.now(timezone.utc)
    t0 = time.perf_counter()
    report = run_sweep(cfg)
    text = report.to_csv(include_timing=args.timing)
    sys.stdout.write(text)
    if args.out:
        run_dir = Path(args.out) / f"{started.strftime('%Y%m%dT%H%M%SZ')}_seed{cfg.seed}"
        run_dir.mkdir(parents=True, exist_ok=True)
        (run_dir / "results.csv").write_text(text)
        manifest = {
            "tool": "gncoset",
            "version": __version__,
            "command": "simulate",
            "started": started.isoformat(),
            "wall_seconds": time.perf_counter() - t0,
            "point_seconds": [p.seconds for p in report.points],
            "partial": report.partial,
            "config": config_to_manifest(cfg),
        }
        (run_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
        print(f"wrote {run_dir}", file=sys.stderr)
    if report.partial:
        print("warning: sweep interrupted, report is partial", file=sys.stderr)
        return 1
    return 0


# kpi ----------------------------------------------------------------------

KPI_COLUMNS = ("info_bits", "iterations", "esn0_db", "latency_ns", "area_mm2", "area_eff")


def cmd_kpi(args):
    calibration = AREA_EFF_CALIBRATION if args.calibration is None else args.calibration
    if args.ksub is not None:
        lat = iteration_latency(args.ksub, args.tmax)
        k = args.ksub * args.ksub
        rows = [{"info_bits": k, "iterations": args.tmax, "esn0_db": None, "latency_ns": lat,
                 "area_mm2": args.area}]
    else:
        rows = load_scenario(args.scenario)
    table = kpi_rows(rows, calibration, targets=tuple(t for t in ("10nm", "7nm")))
    node = args.scale
    header = list(KPI_COLUMNS[:-1]) + [f"area_eff_{node}"]
    if node != "16nm" or any("reported_area_eff_16nm" in r for r in table):
        header.append(f"reported_{node}")
        header.append("rel_err")
    lines = []
    for r in table:
        val = r[f"area_eff_{node}"]
        line = [r["info_bits"], r["iterations"], r["esn0_db"], round(r["latency_ns"], 4), r["area_mm2"],
                 round(val, 2)]
        if "reported_" + node in header:
            rep = r.get(f"reported_area_eff_{node}")
            line.append(rep if rep is not None else "")
            line.append(f"{(val - rep) / rep:+.4%}" if rep else "")
        lines.append(line)
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(["" if v is None else v for v in line] for line in lines)
        sys.stdout.write(buf.getvalue())
    else:
        sys.stdout.write("| " + " | ".join(header) + " |\n")
        sys.stdout.write("|" + "---|" * len(header) + "\n")
        for line in lines:
            sys.stdout.write("| " + " | ".join("" if v is None else str(v) for v in line) + " |\n")
    print(f"calibration={calibration:g} scale({node})={SCALING[node]:g}", file=sys.stderr)
    return 0


# codec --------------------------------------------------------------------

def _read_bits(path, hex_mode, count=None):
    text = sys.stdin.read() if path == "-" else Path(path).read_text()
    text = "".join(text.split())
    if hex_mode:
        try:
            bits = np.unpackbits(np.frombuffer(bytes.fromhex(text), dtype=np.uint8))
        except ValueError:
            raise UsageError("input is not valid hex") from None
        if count is not None:
            if bits.size < count:
                raise UsageError(f"need {count} bits, hex input has {bits.size}")
            bits = bits[:count]
        return bits
    if set(text) - {"0", "1"}:
        raise UsageError("binary input may only contain 0 and 1")
    return np.array([int(c) for c in text], dtype=np.uint8)


def _write_bits(bits, hex_mode):
    if hex_mode:
        return np.packbits(bits).tobytes().hex() + "\n"
    return "".join(str(int(b)) for b in bits) + "\n"


def cmd_codec(args):
    spec = load_spec(args.spec)
    if args.action == "encode":
        msg = _read_bits(args.input, args.hex, spec.k_total)
        if msg.size != spec.k_total:
            raise UsageError(f"message has {msg.size} bits, code needs K={spec.k_total}")
        sys.stdout.write(_write_bits(spec.encoder.encode(msg), args.hex))
        return 0
    if args.real:
        text = sys.stdin.read() if args.input == "-" else Path(args.input).read_text()
        y = np.array([float(v) for v in text.split()])
    else:
        y = modulate(_read_bits(args.input, args.hex, spec.N))
    if y.size != spec.N:
        raise UsageError(f"frame has {y.size} values, code needs N={spec.N}")
    schedule = load_schedule(args.schedule) if args.schedule else None
    dec = PDFDecoder(spec, schedule, args.quant, args.tmax)
    x_hat, stats = dec.decode_frame(y)
    sys.stdout.write(_write_bits(recover_message(x_hat, spec), args.hex))
    print(json.dumps(stats), file=sys.stderr)
    return 0


# parser -------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="gncoset", description="G_N-coset codes with the two-graph parallel SC decoder")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("construct", help="build a product-polar code spec")
    c.add_argument("--nsub", type=int, required=True)
    c.add_argument("--ksub", type=int, required=True)
    c.add_argument("--design-esn0", type=float, default=DEFAULT_DESIGN_ESN0_DB)
    c.add_argument("--label")
    c.add_argument("--out", help="spec JSON path (stdout if omitted)")
    c.set_defaults(func=cmd_construct)

    s = sub.add_parser("simulate", help="Monte-Carlo BLER/BER sweep, CSV on stdout")
    s.add_argument("--spec")
    s.add_argument("--esn0", help="start:step:stop, comma list or single value (dB)")
    s.add_argument("--tmax", type=int, default=5)
    s.add_argument("--quant", type=_quant, default=parse_quant("float"))
    s.add_argument("--schedule", help="damping schedule JSON")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--workers", type=int, default=None)
    s.add_argument("--max-frames", type=int, default=10_000)
    s.add_argument("--target-errors", type=int, default=100)
    s.add_argument("--chunk", type=int, default=256, help="frames per work unit")
    s.add_argument("--et", choices=ET_MODES, default="both")
    s.add_argument("--timing", action="store_true", help="fill the seconds column with wall time")
    s.add_argument("--manifest", help="rerun the configuration stored in a manifest.json")
    s.add_argument("--out", help="base directory for the run directory")
    s.set_defaults(func=cmd_simulate)

    k = sub.add_parser("kpi", help="area-efficiency table")
    k.add_argument("--scenario", help="KPI scenario JSON (packaged reference rows by default)")
    k.add_argument("--scale", choices=sorted(SCALING), default="16nm")
    k.add_argument("--calibration", type=float, default=None)
    k.add_argument("--ksub", type=int, help="model latency for an N=128 sub-code with this K instead")
    k.add_argument("--tmax", type=int, default=5)
    k.add_argument("--area", type=float, default=1.0)
    k.add_argument("--format", choices=("md", "csv"), default="md")
    k.set_defaults(func=cmd_kpi)

    d = sub.add_parser("codec", help="encode or decode one frame")
    d.add_argument("action", choices=("encode", "decode"))
    d.add_argument("--spec", required=True)
    d.add_argument("--msg", "--in", dest="input", default="-", help="input file ('-' = stdin)")
    d.add_argument("--hex", action="store_true", help="hex instead of 0/1 text")
    d.add_argument("--real", action="store_true", help="decode: input is whitespace-separated received samples")
    d.add_argument("--tmax", type=int, default=5)
    d.add_argument("--quant", type=_quant, default=parse_quant("float"))
    d.add_argument("--schedule")
    d.set_defaults(func=cmd_codec)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "simulate":
        args.workers_explicit = args.workers
        if args.workers is None:
            args.workers = _default_workers()
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"gncoset: error: {exc}", file=sys.stderr)
        return 2
    except (SpecError, ValueError, OSError) as exc:
        print(f"gncoset: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
