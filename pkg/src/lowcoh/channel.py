"""Geometric sparse channel model, ULA steering vectors, and on-grid angle
dictionaries.

A channel with N_p paths is

    H = sqrt(n_t n_r / N_p) * sum_l alpha_l a_r(theta_l) a_t(vartheta_l)^H

with unit-norm steering vectors a(θ)_p = exp(-iπ p cos θ)/sqrt(n). Angle
dictionaries sample cos ν uniformly on [-1, 1), which makes the dictionary
rows orthogonal (A A^H proportional to the identity) and lets on-grid
channels be written as Ψ h with h sparse, Ψ = conj(A_t) ⊗ A_r.
"""

from dataclasses import dataclass

import numpy as np

from .numerics import DimensionError, kron


@dataclass(frozen=True)
class PathSet:
    """Path gains and angles of one channel draw."""

    gains: np.ndarray  # complex gains alpha, shape (n_p,)
    aoas: np.ndarray  # angles of arrival theta, shape (n_p,)
    aods: np.ndarray  # angles of departure vartheta, shape (n_p,)
    gain_variance: float = 1.0

    @property
    def n_p(self):
        return len(self.gains)


@dataclass(frozen=True)
class ChannelRealization:
    h: np.ndarray  # n_r x n_t channel matrix
    paths: PathSet


@dataclass(frozen=True)
class AngleDictionary:
    n: int  # array size
    g: int  # grid size, g >= n
    angles: np.ndarray  # grid angles, shape (g,)
    matrix: np.ndarray  # n x g steering dictionary, unit-norm columns


def array_response(n, angle):
    """ULA steering vector, entry p = exp(-iπ p cos angle)/sqrt(n)."""
    if n < 1:
        raise DimensionError(f"array_response needs n >= 1, got {n}")
    p = np.arange(n)
    return np.exp(-1j * np.pi * p * np.cos(angle)) / np.sqrt(n)


def angle_grid(g):
    """Grid of g angles whose cosines are 2k/g - 1 for k = 0..g-1.

    All angles lie in (0, π]; cos = +1 is never hit since k stops at g-1.
    """
    if g < 1:
        raise DimensionError(f"angle_grid needs g >= 1, got {g}")
    cosines = 2.0 * np.arange(g) / g - 1.0
    return np.arccos(cosines)


def build_dictionary(n, g):
    """Steering dictionary over the g-point cosine grid for an n-element ULA."""
    if g < n:
        raise DimensionError(f"grid size {g} must be at least the array size {n}")
    angles = angle_grid(g)
    p = np.arange(n)
    matrix = np.exp(-1j * np.pi * np.outer(p, np.cos(angles))) / np.sqrt(n)
    return AngleDictionary(n=n, g=g, angles=angles, matrix=matrix)


def kron_dictionary(at, ar):
    """Joint transmit/receive dictionary Ψ = conj(A_t) ⊗ A_r.

    Column g_t * ar.g + g_r equals vec of the rank-one steering outer product
    a_r(ν_{g_r}) a_t(ν_{g_t})^H, so on-grid channels vectorize to sparse
    combinations of Ψ's columns.
    """
    return kron(np.conj(at.matrix), ar.matrix)


def generate_channel(n_t, n_r, paths, rng=None, gain_variance=1.0):
    """Draw or realize a geometric N_p-path channel.

    paths is either an int (that many random paths are drawn from rng:
    gains CN(0, gain_variance), cosines of both angle sets uniform on
    [-1, 1]) or a PathSet with explicit gains and angles.
    """
    if isinstance(paths, PathSet):
        path_set = paths
    else:
        n_p = int(paths)
        if n_p < 1:
            raise DimensionError(f"need at least one path, got {n_p}")
        if rng is None:
            raise ValueError("rng is required when drawing random paths")
        gains = rng.standard_normal(n_p) + 1j * rng.standard_normal(n_p)
        gains = gains * np.sqrt(gain_variance / 2.0)
        aoas = np.arccos(rng.uniform(-1.0, 1.0, n_p))
        aods = np.arccos(rng.uniform(-1.0, 1.0, n_p))
        path_set = PathSet(gains, aoas, aods, gain_variance)
    scale = np.sqrt(n_t * n_r / path_set.n_p)
    h = np.zeros((n_r, n_t), dtype=complex)
    for alpha, theta, vartheta in zip(path_set.gains, path_set.aoas, path_set.aods):
        h += alpha * np.outer(
            array_response(n_r, theta), np.conj(array_response(n_t, vartheta))
        )
    return ChannelRealization(h=scale * h, paths=path_set)


def sparsify_on_grid(channel, at, ar):
    """Snap a channel's paths to the nearest grid cells and return the sparse
    coefficient vector h with kron_dictionary(at, ar) @ h = vec of the
    snapped channel.

    Each path contributes sqrt(n_t n_r / N_p) * alpha at index
    g_t * ar.g + g_r; paths snapping to the same cell accumulate, so the
    result has at most N_p nonzeros.
    """
    paths = channel.paths
    h = np.zeros(at.g * ar.g, dtype=complex)
    scale = np.sqrt(at.n * ar.n / paths.n_p)
    cos_t = np.cos(at.angles)
    cos_r = np.cos(ar.angles)
    for alpha, theta, vartheta in zip(paths.gains, paths.aoas, paths.aods):
        g_t = int(np.argmin(np.abs(np.cos(vartheta) - cos_t)))
        g_r = int(np.argmin(np.abs(np.cos(theta) - cos_r)))
        h[g_t * ar.g + g_r] += scale * alpha
    return h
