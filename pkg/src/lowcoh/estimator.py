"""Sparse channel recovery with orthogonal matching pursuit and NMSE scoring."""

from dataclasses import dataclass

import numpy as np

from .numerics import DegenerateColumnError, DimensionError


@dataclass(frozen=True)
class OmpConfig:
    """OMP stopping rules: sparsity budget k, optional relative residual
    tolerance, optional hard iteration cap."""

    k: int
    residual_tol: float = 0.0
    max_iter: int = None


@dataclass(frozen=True)
class Estimate:
    """OMP output: dense coefficient vector (zeros off support), the support
    in selection order, and whether the refit needed ridge regularization."""

    h: np.ndarray
    support: tuple
    ridged: bool = False


def omp(a, y, config):
    """Orthogonal matching pursuit.

    Greedily selects the column of a most correlated with the residual
    (normalized columns, first index wins exact ties), refits all selected
    coefficients by least squares, and repeats until the sparsity budget or
    the residual tolerance is hit. The refit solves the normal equations; a
    relative ridge of 1e-12 is added only when their conditioning exceeds
    1e12, and that is flagged on the result. Selected atoms are never
    re-selected, and the residual norm never increases.
    """
    a = np.asarray(a)
    y = np.asarray(y).ravel()
    if a.ndim != 2 or a.shape[0] != y.shape[0]:
        raise DimensionError(f"matrix {a.shape} does not match y of length {y.shape[0]}")
    norms = np.linalg.norm(a, axis=0)
    if np.any(norms == 0.0):
        j = int(np.flatnonzero(norms == 0.0)[0])
        raise DegenerateColumnError(f"column {j} is identically zero")
    budget = config.k if config.max_iter is None else min(config.k, config.max_iter)
    an = a / norms
    y_norm = float(np.linalg.norm(y))
    residual = y.astype(complex)
    residual_norm = y_norm
    support = []
    coef = np.zeros(0, dtype=complex)
    ridged = False
    while len(support) < budget:
        if residual_norm <= config.residual_tol * y_norm or residual_norm == 0.0:
            break
        corr = np.abs(an.conj().T @ residual)
        corr[support] = -1.0
        support.append(int(np.argmax(corr)))
        asub = a[:, support]
        gram = asub.conj().T @ asub
        rhs = asub.conj().T @ y
        if np.linalg.cond(gram) > 1e12:
            ridge = 1e-12 * float(np.real(np.trace(gram))) / len(support)
            gram = gram + ridge * np.eye(len(support))
            ridged = True
        coef = np.linalg.solve(gram, rhs)
        residual = y - asub @ coef
        new_norm = float(np.linalg.norm(residual))
        assert new_norm <= residual_norm + 1e-9 * (y_norm + 1.0)
        residual_norm = new_norm
    h = np.zeros(a.shape[1], dtype=complex)
    h[support] = coef
    return Estimate(h=h, support=tuple(support), ridged=ridged)


def reconstruct(h_hat, at, ar, rho=1.0):
    """Channel matrix from grid coefficients: A_r unvec(h_hat) A_t^H / sqrt(rho).

    h_hat is indexed g_t * ar.g + g_r (column-major over the receive grid),
    and the sqrt(rho) division inverts the pilot-power scaling applied by the
    measurement model, so feeding OMP the unscaled equivalent matrix and the
    raw measurements lands back on the channel's natural scale.
    """
    if len(h_hat) != at.g * ar.g:
        raise DimensionError(
            f"coefficient vector of length {len(h_hat)} does not match "
            f"grid {at.g} x {ar.g}"
        )
    hd = np.reshape(h_hat, (ar.g, at.g), order="F")
    return (ar.matrix @ hd @ at.matrix.conj().T) / np.sqrt(rho)


def nmse(h_true, h_hat):
    """Normalized mean squared error ||h_hat - h_true||^2 / ||h_true||^2."""
    h_true = np.asarray(h_true)
    h_hat = np.asarray(h_hat)
    denom = float(np.linalg.norm(h_true) ** 2)
    if denom == 0.0:
        raise ValueError("NMSE is undefined for a zero true channel")
    return float(np.linalg.norm(h_hat - h_true) ** 2) / denom
