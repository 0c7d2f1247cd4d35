"""
Fixed-point LLR format and the saturating arithmetic shared by the component
decoder and the LLR generator.

A fixed-point word is an integer on the grid ``value * 2**frac_bits`` clipped to
the symmetric range ``[-M, M]`` with ``M = 2**(total_bits - 1) - 1``. The most
negative two's-complement code is never produced, so negation stays exact.
Float mode (``total_bits is None``) bypasses quantization entirely.
"""

import re
from dataclasses import dataclass

import numpy as np

# frac-bit defaults picked with scripts/sweep_frac_bits.py for unit-amplitude
# BPSK samples; saturation almost never binds, so the finest step wins
DEFAULT_FRAC_BITS = {4: 2, 5: 3, 6: 4, 7: 5, 8: 6}

_QUANT_RE = re.compile(r"^Q(\d+)(?:F(\d+))?$", re.IGNORECASE)


@dataclass(frozen=True)
class QuantSpec:
    total_bits: int | None = None
    frac_bits: int = 0

    def __post_init__(self):
        if self.total_bits is None:
            return
        if not 2 <= self.total_bits <= 16:
            raise ValueError(f"total_bits must be in 2..16, got {self.total_bits}")
        if not 0 <= self.frac_bits <= self.total_bits - 2:
            raise ValueError(
                f"frac_bits must be in 0..{self.total_bits - 2}, got {self.frac_bits}"
            )

    @property
    def is_float(self):
        return self.total_bits is None

    @property
    def max_mag(self):
        """Clip magnitude M on the integer grid (inf in float mode)."""
        if self.is_float:
            return np.inf
        return (1 << (self.total_bits - 1)) - 1

    @property
    def scale(self):
        return 1.0 if self.is_float else float(1 << self.frac_bits)

    @property
    def dtype(self):
        return np.float64 if self.is_float else np.int32

    def __str__(self):
        if self.is_float:
            return "float"
        return f"Q{self.total_bits}F{self.frac_bits}"


FLOAT = QuantSpec()


def parse_quant(text):
    """Parse ``"float"``, ``"Q6"`` or ``"Q6F2"``."""
    if isinstance(text, QuantSpec):
        return text
    text = str(text).strip()
    if text.lower() == "float":
        return FLOAT
    m = _QUANT_RE.match(text)
    if not m:
        raise ValueError(f"bad quantization format {text!r}; expected 'float' or 'Q<bits>[F<frac>]'")
    bits = int(m.group(1))
    if m.group(2) is None:
        frac = DEFAULT_FRAC_BITS.get(bits, max(0, bits - 4))
    else:
        frac = int(m.group(2))
    return QuantSpec(bits, frac)


def quantize(x, spec):
    """
    Map real values onto the fixed-point grid.

    Round to nearest (ties away from zero) of ``x * 2**frac_bits``, then clip
    to ``[-M, M]``. Returns float64 unchanged in float mode.
    """
    arr = np.asarray(x, dtype=np.float64)
    if spec.is_float:
        out = arr.copy()
    else:
        scaled = arr * spec.scale
        rounded = np.sign(scaled) * np.floor(np.abs(scaled) + 0.5)
        m = spec.max_mag
        out = np.clip(rounded, -m, m).astype(np.int32)
    if out.ndim == 0:
        return out.item()
    return out


def dequantize(q, spec):
    return np.asarray(q, dtype=np.float64) / spec.scale


def saturate(x, spec):
    if spec.is_float:
        return x
    m = spec.max_mag
    return np.clip(x, -m, m)


def sat_add(a, b, spec):
    return saturate(np.add(a, b), spec)


def f_min(a, b):
    """Min-sum check-node update: sign(a) sign(b) min(|a|, |b|)."""
    a = np.asarray(a)
    b = np.asarray(b)
    return np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b))


def f_exact(a, b):
    """Exact box-plus, float mode only."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    t = np.tanh(np.clip(a, -40, 40) / 2) * np.tanh(np.clip(b, -40, 40) / 2)
    return 2 * np.arctanh(np.clip(t, -1 + 1e-16, 1 - 1e-16))


def g_comb(a, b, bit, spec):
    """Variable-node update ``b + (1 - 2 bit) a``, saturated."""
    sign = 1 - 2 * np.asarray(bit, dtype=np.int32)
    return saturate(np.asarray(b) + sign * np.asarray(a), spec)
