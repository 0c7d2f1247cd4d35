"""
Kronecker-power transform G_N = F^{(x)n} over GF(2) and the index maps
between sub-code coordinates and codeword positions.

Vectors are in natural order throughout; no bit reversal is applied.
A length-N codeword is viewed as an n_sub x n_sub array ``X`` with
``X[r, s] = x[r * n_sub + s]``. Sub-code ``i`` of graph G is column ``i`` of that
array, sub-code ``i`` of graph Gpi is row ``i``.
"""

from enum import Enum

import numpy as np

KRON_MAX_N = 10


class GraphId(str, Enum):
    G = "G"
    GPI = "Gpi"

    @property
    def other(self):
        return GraphId.GPI if self is GraphId.G else GraphId.G

    @classmethod
    def for_iteration(cls, t):
        """G on odd iterations, Gpi on even ones (iterations count from 1)."""
        return cls.G if t % 2 else cls.GPI


def is_power_of_two(n):
    return isinstance(n, (int, np.integer)) and n >= 1 and (n & (n - 1)) == 0


def log2_exact(n):
    if not is_power_of_two(n):
        raise ValueError(f"length must be a power of two, got {n}")
    return int(n).bit_length() - 1


def gn_transform_inplace(buf):
    """
    Multiply the last axis of ``buf`` by G_N over GF(2), in place.

    ``buf`` must be a C-contiguous integer or boolean array whose last axis has
    power-of-two length >= 2. Leading axes are treated as a batch.
    """
    n_len = buf.shape[-1]
    n = log2_exact(n_len)
    if n < 1:
        raise ValueError("transform length must be at least 2")
    if not buf.flags.c_contiguous:
        raise ValueError("buffer must be C-contiguous")
    lead = buf.shape[:-1]
    half = 1
    while half < n_len:
        view = buf.reshape(lead + (n_len // (2 * half), 2, half))
        view[..., 0, :] ^= view[..., 1, :]
        half *= 2
    return buf


def gn_transform(u):
    """
    Return ``u . G_N`` over GF(2) along the last axis.

    Parameters
    ----------
    u : array_like
        Binary vector (or batch of vectors) of length 2**n, n >= 1.

    Returns
    -------
    ndarray of uint8
    """
    arr = np.asarray(u)
    if arr.ndim == 0:
        raise ValueError("expected a vector")
    log2_exact(arr.shape[-1])
    out = np.array(arr, dtype=np.uint8, order="C", copy=True)
    if out.size and np.any(out > 1):
        raise ValueError("entries must be 0 or 1")
    return gn_transform_inplace(out)


def kron_matrix(n):
    """Explicit F^{(x)n} as a dense 2**n x 2**n uint8 matrix (oracle use only)."""
    if n < 0 or n > KRON_MAX_N:
        raise ValueError(f"kron_matrix only supports 0 <= n <= {KRON_MAX_N}, got {n}")
    f = np.array([[1, 0], [1, 1]], dtype=np.uint8)
    g = np.ones((1, 1), dtype=np.uint8)
    for _ in range(n):
        g = np.kron(g, f)
    return g


def map_index(i, j, graph, n_sub):
    """Global codeword position of bit ``j`` of sub-code ``i`` on ``graph``."""
    if not (0 <= i < n_sub and 0 <= j < n_sub):
        raise ValueError(f"coordinates ({i}, {j}) out of range for n_sub={n_sub}")
    graph = GraphId(graph)
    if graph is GraphId.G:
        return j * n_sub + i
    return i * n_sub + j


def unmap_index(k, graph, n_sub):
    """Inverse of :func:`map_index`: returns ``(i, j)``."""
    if not 0 <= k < n_sub * n_sub:
        raise ValueError(f"position {k} out of range for N={n_sub * n_sub}")
    r, s = divmod(k, n_sub)
    if GraphId(graph) is GraphId.G:
        return s, r
    return r, s


def subcode_view(x, graph, n_sub):
    """
    View a batch of codeword-layout arrays ``(..., N)`` as ``(..., n_sub, n_sub)``
    indexed ``[sub-code i, position j]`` for the given graph.
    """
    grid = x.reshape(x.shape[:-1] + (n_sub, n_sub))
    if GraphId(graph) is GraphId.G:
        return np.swapaxes(grid, -1, -2)
    return grid
