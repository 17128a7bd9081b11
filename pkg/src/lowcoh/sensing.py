"""Snapshot scheduling, sensing-operator assembly, and the measurement model.

One snapshot applies precoder block F_f with pilot x and combiner block W_r:

    y = sqrt(rho) W_r^H H s + W_r^H n,  s = F_f x / ||F_f x||,  n ~ CN(0, sigma2 I).

Transmit beams are normalized to unit power so rho is the full per-snapshot
transmit power and snr_db = 10 log10(rho/sigma2) is the per-measurement SNR.
Stacking all snapshots gives y = sqrt(rho) Phi vec(H) + v with per-snapshot
rows Phi_m = s_m^T ⊗ W_r^H. The schedule nests frames over pilots over
combiner blocks, so M = (n_t/l_t) * m_x * (n_r/l_r) snapshots.

For DFT codebooks every beam has the same norm sqrt(n_t l_t), so the
normalization is one global scalar and the stacked operator Gram still
factors through the design's block Gram: Phi^H Phi = kron(S, c I_{n_r}) with
c = n_r / (n_t l_t).
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .codebook import BeamCodebook, DesignResult
from .numerics import DimensionError, kron


@dataclass(frozen=True)
class SnapshotSchedule:
    """Snapshot order: (frame, pilot slot, combiner block) triples."""

    entries: tuple
    m_f: int
    m_x: int
    m_r: int

    @property
    def m(self):
        return len(self.entries)


@dataclass(frozen=True)
class SensingSystem:
    """A schedule with its codebooks, plus optional materialized operators.

    phi is the stacked M*l_r x n_t*n_r sensing operator and equivalent is
    phi @ psi; both are heavy and only filled when requested (tests, small
    instances, or the estimator's measurement matrix).
    """

    schedule: SnapshotSchedule
    design: DesignResult
    combiner: BeamCodebook
    phi: Optional[np.ndarray] = None
    psi: Optional[np.ndarray] = None
    equivalent: Optional[np.ndarray] = None


@dataclass(frozen=True)
class MeasurementSet:
    y: np.ndarray  # stacked measurements, length M * l_r
    rho: float
    sigma2: float


def build_schedule(design, combiner):
    """All (frame, pilot, combiner block) combinations, frames outermost."""
    m_f = design.precoder.n // design.precoder.l
    m_x = design.pilot.m_x
    m_r = combiner.n // combiner.l
    entries = tuple(
        (f, x, r)
        for f in range(m_f)
        for x in range(m_x)
        for r in range(m_r)
    )
    return SnapshotSchedule(entries=entries, m_f=m_f, m_x=m_x, m_r=m_r)


def _beam_matrix(design):
    """Unit-power transmit beams, one column per (frame, pilot) pair with the
    pilot slot fastest, matching the schedule's (f, x) nesting."""
    blocks = design.precoder.blocks
    pilots = design.pilot.vectors
    cols = [block @ pilots for block in blocks]  # each n_t x m_x
    beams = np.hstack(cols)
    return beams / np.linalg.norm(beams, axis=0)


def assemble_phi(schedule, design, combiner, psi=None):
    """Materialize the stacked sensing operator Phi (and Phi @ psi if a
    dictionary is given).

    Memory grows as (M * l_r) x (n_t * n_r); intended for verification and
    small instances. Monte-Carlo paths use equivalent_matrix instead.
    """
    beams = _beam_matrix(design)
    wh = [w.conj().T for w in combiner.blocks]
    rows = []
    for f, x, r in schedule.entries:
        s = beams[:, f * schedule.m_x + x]
        rows.append(kron(s[None, :], wh[r]))
    phi = np.vstack(rows)
    equivalent = phi @ psi if psi is not None else None
    return SensingSystem(
        schedule=schedule,
        design=design,
        combiner=combiner,
        phi=phi,
        psi=psi,
        equivalent=equivalent,
    )


def equivalent_matrix(schedule, design, combiner, at, ar):
    """Phi @ Psi assembled without materializing either factor.

    Uses the mixed-product identity per snapshot,
    (s^T ⊗ W^H)(conj(A_t) ⊗ A_r) = (s^T conj(A_t)) ⊗ (W^H A_r),
    with all snapshots formed in one broadcast product.
    """
    if at.n != design.precoder.n or ar.n != combiner.n:
        raise DimensionError("dictionary sizes do not match the codebooks")
    beams = _beam_matrix(design)
    t_rows = beams.T @ np.conj(at.matrix)  # (m_f * m_x) x g_t
    r_blocks = np.stack([w.conj().T @ ar.matrix for w in combiner.blocks])
    # (beam, combiner block, combiner output, g_t, g_r) -> stacked rows in
    # schedule order: frames/pilots outermost, combiner blocks inner.
    full = t_rows[:, None, None, :, None] * r_blocks[None, :, :, None, :]
    m_rows = schedule.m * combiner.l
    return full.reshape(m_rows, at.g * ar.g)


def build_system(design, combiner, at=None, ar=None):
    """SensingSystem with the equivalent measurement matrix filled when
    dictionaries are given; Phi itself is never materialized here."""
    schedule = build_schedule(design, combiner)
    equivalent = None
    if at is not None and ar is not None:
        equivalent = equivalent_matrix(schedule, design, combiner, at, ar)
    return SensingSystem(
        schedule=schedule, design=design, combiner=combiner, equivalent=equivalent
    )


def measure(system, channel, rho, sigma2, rng=None):
    """Run every scheduled snapshot on a channel realization.

    Measurements are exact when sigma2 == 0 (no RNG draws happen); otherwise
    per-antenna noise CN(0, sigma2 I_{n_r}) is drawn in one block for all M
    snapshots and passes through the combiner, so E||y||^2 = M * l_r * n_r *
    sigma2 for a zero channel. Pilot power enters only through rho.
    """
    if sigma2 < 0:
        raise ValueError(f"sigma2 must be nonnegative, got {sigma2}")
    if sigma2 > 0 and rng is None:
        raise ValueError("rng is required for noisy measurements")
    schedule = system.schedule
    beams = _beam_matrix(system.design)
    wh = [w.conj().T for w in system.combiner.blocks]
    n_r = system.combiner.n
    received = np.sqrt(rho) * (channel.h @ beams)  # n_r x (m_f * m_x)
    noise = None
    if sigma2 > 0:
        noise = np.sqrt(sigma2 / 2.0) * (
            rng.standard_normal((schedule.m, n_r))
            + 1j * rng.standard_normal((schedule.m, n_r))
        )
    chunks = []
    for m, (f, x, r) in enumerate(schedule.entries):
        signal = received[:, f * schedule.m_x + x]
        if noise is not None:
            signal = signal + noise[m]
        chunks.append(wh[r] @ signal)
    return MeasurementSet(y=np.concatenate(chunks), rho=rho, sigma2=sigma2)
