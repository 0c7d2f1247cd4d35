"""G_N-coset codes under the two-graph parallel decoder with SC component decoders."""

__version__ = "0.1.0"

from .channel_sim import SimConfig, SimReport, awgn, modulate, run_sweep
from .component_sc import SCDecoder, classify, sc_decode, subdecode, syndrome_check
from .construction import CodeSpec, build_product_code, encode, gaussian_approx_order, load_spec, save_spec
from .gn_core import GraphId, gn_transform, kron_matrix, map_index
from .pdf import DampingSchedule, PDFDecoder, decode_frame, default_schedule, recover_message
from .perf_model import area_efficiency, iteration_latency, scale_technology
from .quant import QuantSpec, parse_quant, quantize
