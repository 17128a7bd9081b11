"""Shared linear-algebra helpers: DFT matrices, Kronecker products, mutual
coherence, and phase quantization."""

from typing import NamedTuple

import numpy as np

# Refuse Kronecker products beyond ~1 GiB of complex128 entries.
_MAX_KRON_ENTRIES = 1 << 26

_TIE_TOL = 1e-12


class DimensionError(ValueError):
    """An input has an unusable shape or size."""


class DegenerateColumnError(ValueError):
    """A matrix column is identically zero where a nonzero one is required."""


class Coherence(NamedTuple):
    """Mutual coherence value together with the column pair attaining it."""

    value: float
    pair: tuple


def dft_matrix(n):
    """Unnormalized n-point DFT matrix with entry (k, m) = exp(-2πi k m / n).

    Columns are pairwise orthogonal with squared norm n.
    """
    if n < 1:
        raise DimensionError(f"dft_matrix needs n >= 1, got {n}")
    k = np.arange(n)
    phase = (np.outer(k, k) % n) * (-2.0 * np.pi / n)
    return np.exp(1j * phase)


def kron(a, b):
    """Kronecker product with a size guard.

    Thin wrapper over np.kron that rejects results too large to hold.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 2 or b.ndim != 2:
        raise DimensionError("kron expects two matrices")
    entries = a.shape[0] * a.shape[1] * b.shape[0] * b.shape[1]
    if entries > _MAX_KRON_ENTRIES:
        raise DimensionError(
            f"kron result would have {entries} entries "
            f"(limit {_MAX_KRON_ENTRIES})"
        )
    return np.kron(a, b)


def mutual_coherence(a):
    """Largest normalized inner product between distinct columns of a.

    Returns a Coherence(value, pair) where value is in [0, 1] and pair is the
    (i, j) with i < j attaining it. Among pairs within 1e-12 of the maximum
    the lexicographically smallest (i, j) is reported. Raises
    DegenerateColumnError if any column is identically zero.
    """
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[1] < 2:
        raise DimensionError("mutual_coherence needs a matrix with >= 2 columns")
    norms = np.linalg.norm(a, axis=0)
    if np.any(norms == 0.0):
        j = int(np.flatnonzero(norms == 0.0)[0])
        raise DegenerateColumnError(f"column {j} is identically zero")
    an = a / norms
    g = np.abs(an.conj().T @ an)
    np.fill_diagonal(g, 0.0)
    value = float(g.max())
    hits = np.argwhere(g >= value - _TIE_TOL)
    hits = hits[hits[:, 0] < hits[:, 1]]
    pair = (int(hits[0, 0]), int(hits[0, 1]))
    return Coherence(min(value, 1.0), pair)


def quantize_phases(a, bits):
    """Snap every entry's phase to the nearest multiple of 2π/2**bits.

    Moduli are preserved. Entries already on the grid (within 1e-9 radians)
    are returned bitwise unchanged, which makes the operation exactly
    idempotent and leaves DFT matrices whose phases live on the grid intact.
    """
    if bits < 1:
        raise DimensionError(f"quantize_phases needs bits >= 1, got {bits}")
    a = np.asarray(a, dtype=complex)
    step = 2.0 * np.pi / (1 << bits)
    ang = np.angle(a)
    snapped = np.round(ang / step) * step
    quantized = np.abs(a) * np.exp(1j * snapped)
    return np.where(np.abs(ang - snapped) <= 1e-9, a, quantized)


def normalize_columns(a):
    """Scale each column to unit Euclidean norm."""
    a = np.asarray(a)
    norms = np.linalg.norm(a, axis=0)
    if np.any(norms == 0.0):
        j = int(np.flatnonzero(norms == 0.0)[0])
        raise DegenerateColumnError(f"column {j} is identically zero")
    return a / norms
