"""
BPSK over AWGN and a seeded Monte-Carlo BLER/BER harness.

Es/N0 convention: unit-energy BPSK symbols on a real channel, noise variance
``sigma2 = 10 ** (-EsN0_dB / 10)`` per sample.

Every frame draws its message and its unit noise from its own generator seeded
by ``(seed, frame index)``; the noise is scaled by ``sigma`` of the SNR point, so
all points (and all decoder configurations run with the same seed) see common
random numbers. Frames are grouped in fixed chunks and aggregated in chunk
order, which makes reports independent of the worker count.
"""

import csv
import io
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .component_sc import NodeOptions
from .pdf import PDFDecoder, default_schedule
from .quant import FLOAT

log = logging.getLogger(__name__)

CSV_COLUMNS = ("esn0_db", "frames", "blk_err", "bit_err", "bler", "ber",
               "mean_iters", "et_rate", "skip_frac", "seconds")


def modulate(bits):
    """BPSK: 0 -> +1, 1 -> -1."""
    return 1.0 - 2.0 * np.asarray(bits, dtype=np.float64)


def noise_variance(esn0_db):
    return 10.0 ** (-np.asarray(esn0_db, dtype=np.float64) / 10.0)


def awgn(symbols, esn0_db, rng):
    if not np.isfinite(esn0_db):
        raise ValueError("Es/N0 must be finite")
    sigma = np.sqrt(noise_variance(esn0_db))
    return symbols + sigma * rng.standard_normal(np.shape(symbols))


def frame_rng(seed, frame):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(frame,))))


@dataclass
class SimConfig:
    spec: object
    esn0_db: tuple
    quant: object = FLOAT
    schedule: object = None
    t_max: int = 5
    max_frames: int = 10_000
    target_block_errors: int = 100
    seed: int = 0
    workers: int = 1
    chunk_frames: int = 256
    et: str = "both"
    options: object = NodeOptions()

    def __post_init__(self):
        if self.max_frames < 1:
            raise ValueError("max_frames must be >= 1")
        if self.target_block_errors < 1:
            raise ValueError("target_block_errors must be >= 1")
        if self.chunk_frames < 1:
            raise ValueError("chunk_frames must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        self.esn0_db = tuple(float(v) for v in np.atleast_1d(self.esn0_db))
        if self.schedule is None:
            self.schedule = default_schedule()

    def decoder(self):
        return PDFDecoder(self.spec, self.schedule, self.quant, self.t_max,
                          et=self.et, options=self.options)


@dataclass
class PointResult:
    esn0_db: float
    frames: int = 0
    blk_err: int = 0
    bit_err: int = 0
    iterations: int = 0
    et_frames: int = 0
    sc_calls: int = 0
    subdecode_calls: int = 0
    sc_calls_per_iter: list = field(default_factory=list)
    seconds: float = 0.0
    info_bits: int = 0

    @property
    def bler(self):
        return self.blk_err / self.frames if self.frames else float("nan")

    @property
    def ber(self):
        if not self.frames or not self.info_bits:
            return float("nan")
        return self.bit_err / (self.frames * self.info_bits)

    @property
    def mean_iters(self):
        return self.iterations / self.frames if self.frames else float("nan")

    @property
    def et_rate(self):
        return self.et_frames / self.frames if self.frames else float("nan")

    @property
    def skip_frac(self):
        if not self.subdecode_calls:
            return float("nan")
        return 1.0 - self.sc_calls / self.subdecode_calls


@dataclass
class SimReport:
    points: list
    partial: bool = False

    def to_csv(self, include_timing=False):
        """
        CSV text with the standard columns. ``seconds`` is left empty unless
        ``include_timing``, so that reruns compare byte-for-byte.
        """
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for p in self.points:
            w.writerow([
                _fmt(p.esn0_db), p.frames, p.blk_err, p.bit_err, _fmt(p.bler), _fmt(p.ber),
                _fmt(p.mean_iters), _fmt(p.et_rate), _fmt(p.skip_frac),
                _fmt(p.seconds) if include_timing else "",
            ])
        return buf.getvalue()

    def write_csv(self, path, include_timing=False):
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv(include_timing))


def _fmt(v):
    return f"{v:.10g}"


# Worker side --------------------------------------------------------------

_WORKER = {}


def _init_worker(cfg):
    _WORKER["cfg"] = cfg
    _WORKER["dec"] = cfg.decoder()


def simulate_frames(cfg, decoder, esn0_db, start, count):
    """
    Run frames ``start .. start+count-1`` at one SNR point.

    Returns a dict of per-chunk sums (deterministic in its inputs).
    """
    spec = cfg.spec
    enc = spec.encoder
    msgs = np.empty((count, enc.k), dtype=np.uint8)
    noise = np.empty((count, spec.N))
    for n in range(count):
        rng = frame_rng(cfg.seed, start + n)
        msgs[n] = rng.integers(0, 2, enc.k, dtype=np.uint8)
        noise[n] = rng.standard_normal(spec.N)
    x = enc.encode(msgs)
    y = modulate(x) + np.sqrt(noise_variance(esn0_db)) * noise
    x_hat, st = decoder.decode_batch(y, sigma2=float(noise_variance(esn0_db)))
    bit_err = (enc.recover(x_hat) != msgs).sum(axis=1)
    blk = (x_hat != x).any(axis=1)
    return {
        "frames": count,
        "blk_err": int(blk.sum()),
        "bit_err": int(bit_err.sum()),
        "iterations": int(st.iterations.sum()),
        "et_frames": int(st.et_fired.sum()),
        "sc_calls": int(st.sc_calls.sum()),
        "subdecode_calls": int(st.subdecode_calls.sum()),
        "sc_calls_per_iter": st.sc_calls.sum(axis=0).tolist(),
    }


def _worker_chunk(esn0_db, start, count):
    return simulate_frames(_WORKER["cfg"], _WORKER["dec"], esn0_db, start, count)


def _chunks(cfg):
    start = 0
    while start < cfg.max_frames:
        count = min(cfg.chunk_frames, cfg.max_frames - start)
        yield start, count
        start += count


def _absorb(point, res):
    for key in ("frames", "blk_err", "bit_err", "iterations", "et_frames", "sc_calls", "subdecode_calls"):
        setattr(point, key, getattr(point, key) + res[key])
    per = res["sc_calls_per_iter"]
    if len(point.sc_calls_per_iter) < len(per):
        point.sc_calls_per_iter += [0] * (len(per) - len(point.sc_calls_per_iter))
    for t, v in enumerate(per):
        point.sc_calls_per_iter[t] += v


def _done(cfg, point):
    return point.blk_err >= cfg.target_block_errors or point.frames >= cfg.max_frames


def run_sweep(cfg, progress=None):
    """
    Simulate every SNR point of ``cfg`` until ``max_frames`` frames or
    ``target_block_errors`` block errors, whichever comes first (checked at
    chunk boundaries).

    A KeyboardInterrupt ends the sweep early; the report then carries
    ``partial=True`` and only completed chunks.
    """
    points = []
    partial = False
    pool = None
    decoder = None
    try:
        if cfg.workers > 1:
            pool = ProcessPoolExecutor(cfg.workers, initializer=_init_worker, initargs=(cfg,))
        else:
            decoder = cfg.decoder()
        for esn0 in cfg.esn0_db:
            point = PointResult(esn0, info_bits=cfg.spec.k_total)
            points.append(point)
            t0 = time.perf_counter()
            if pool is None:
                for start, count in _chunks(cfg):
                    _absorb(point, simulate_frames(cfg, decoder, esn0, start, count))
                    if _done(cfg, point):
                        break
            else:
                _run_parallel(cfg, pool, esn0, point)
            point.seconds = time.perf_counter() - t0
            log.info("Es/N0 %.3f dB: %d frames, %d block errors", esn0, point.frames, point.blk_err)
            if progress:
                progress(point)
    except KeyboardInterrupt:
        partial = True
        log.warning("sweep interrupted; report is partial")
    finally:
        if pool is not None:
            pool.shutdown(wait=not partial, cancel_futures=True)
    return SimReport(points, partial)


def _run_parallel(cfg, pool, esn0, point):
    pending = []
    chunks = _chunks(cfg)
    window = 2 * cfg.workers
    exhausted = False
    while True:
        while not exhausted and len(pending) < window:
            nxt = next(chunks, None)
            if nxt is None:
                exhausted = True
                break
            pending.append(pool.submit(_worker_chunk, esn0, *nxt))
        if not pending:
            return
        _absorb(point, pending.pop(0).result())
        if _done(cfg, point):
            for fut in pending:
                fut.cancel()
            return
