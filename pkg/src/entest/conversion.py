"""Heterodyne simulation and correlation-to-displacement conversion.

Heterodyne detection on the m return pulses yields complex outcome vectors
r_1..r_m (length M each).  Conditioned on those outcomes, the stored idler
modes collapse to displaced thermal states whose mean vector is proportional
to the conjugate of the signal-bearing outcome.  A programmed beamsplitter
array -- represented by the Gram-Schmidt orthonormalization of the outcome
vectors -- concentrates that mean into the first few output modes, reducing
the m-ary entanglement test to discrimination of pulse-position-modulated
coherent states in common thermal noise.

The conversion here is exact: output means are computed by projecting onto
the actual orthonormal rows, with no large-M orthogonality approximation, so
residual means on bins below the true one are retained and bins above it
vanish to numerical precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DerivedStats, RandomStream, ScenarioParams, derive_statistics

__all__ = [
    "HeterodyneRecord",
    "OrthoBasis",
    "ConversionOutput",
    "DegenerateRecordError",
    "simulate_heterodyne",
    "gram_schmidt",
    "convert",
]

# Residual norms below this fraction of the input norm signal numerically
# dependent outcome vectors (probability ~0 for Gaussian inputs).
DEGENERACY_THRESHOLD = 1e-9

_REORTH_THRESHOLD = 1.0 / math.sqrt(2.0)


class DegenerateRecordError(ValueError):
    """Raised when outcome vectors are numerically linearly dependent."""


@dataclass(frozen=True)
class HeterodyneRecord:
    """Heterodyne outcomes of one trial: m complex vectors of length M."""

    outcomes: np.ndarray
    true_bin: int

    def __post_init__(self) -> None:
        if self.outcomes.ndim != 2:
            raise ValueError("outcomes must be a (num_bins, modes_per_bin) array")
        m, big_m = self.outcomes.shape
        if big_m < m:
            raise ValueError(f"modes_per_bin ({big_m}) must be >= num_bins ({m})")
        if not 1 <= self.true_bin <= m:
            raise ValueError(f"true_bin {self.true_bin} out of range 1..{m}")


@dataclass(frozen=True)
class OrthoBasis:
    """First m rows of the beamsplitter weight matrix, plus their norms.

    ``rows[i]`` is the i-th orthonormalized outcome direction and ``norms[i]``
    the residual norm of outcome i before normalization.  Rows are pairwise
    orthonormal under the Hermitian inner product, and the span of rows 0..k
    equals the span of outcomes 0..k for every k (orthogonalization is done
    strictly in index order).
    """

    rows: np.ndarray
    norms: np.ndarray


@dataclass(frozen=True)
class ConversionOutput:
    """Conditional idler mode means after the beamsplitter array.

    ``means[i]`` is the complex displacement of output mode i+1, ``thermal``
    the common thermal photon number (identical and independent across modes,
    unchanged by the passive array) and ``norms`` the Gram-Schmidt residual
    norms of the trial.
    """

    means: np.ndarray
    thermal: float
    norms: np.ndarray


def simulate_heterodyne(
    params: ScenarioParams, true_bin: int, stream: RandomStream
) -> HeterodyneRecord:
    """Sample the heterodyne outcomes of all m return pulses.

    Every component is circularly-symmetric complex Gaussian.  The bin
    carrying the signal has per-quadrature variance ``(N_B + kappa*N_S + 1)/2``;
    all other bins carry only background and vacuum, ``(N_B + 1)/2``.  The
    exact per-bin variances are sampled here; pooled-variance coefficients
    enter only through the analytic conversion formulas.
    """
    m, big_m = params.num_bins, params.modes_per_bin
    if not 1 <= true_bin <= m:
        raise ValueError(f"true_bin {true_bin} out of range 1..{m}")
    v_signal = (params.n_noise + params.kappa * params.n_signal + 1.0) / 2.0
    v_background = (params.n_noise + 1.0) / 2.0
    rng = stream.generator()
    z = rng.standard_normal((m, big_m, 2))
    outcomes = z.view(np.complex128)[..., 0]
    scale = np.full(m, math.sqrt(v_background))
    scale[true_bin - 1] = math.sqrt(v_signal)
    outcomes *= scale[:, None]
    return HeterodyneRecord(outcomes=outcomes, true_bin=true_bin)


def gram_schmidt(outcomes: np.ndarray) -> OrthoBasis:
    """Orthonormalize outcome vectors in index order (modified Gram-Schmidt).

    Uses the Hermitian inner product ``<u, v> = sum(conj(u) * v)``.  Residual
    norms are recorded before normalization.  A second orthogonalization sweep
    is applied to any row whose residual norm drops below ``1/sqrt(2)`` of the
    input norm, which bounds the loss of orthogonality independently of the
    conditioning of the input.

    Raises
    ------
    DegenerateRecordError
        If a residual norm falls below ``1e-9`` times the input norm.
    """
    rows = np.array(outcomes, dtype=np.complex128, copy=True)
    if rows.ndim != 2:
        raise ValueError("outcomes must be a 2-d array of row vectors")
    m, big_m = rows.shape
    if m > big_m:
        raise ValueError(f"cannot orthogonalize {m} vectors in dimension {big_m}")
    norms = np.empty(m)
    for i in range(m):
        input_norm = np.linalg.norm(rows[i])
        for k in range(i):
            rows[i] -= np.vdot(rows[k], rows[i]) * rows[k]
        residual = np.linalg.norm(rows[i])
        if residual < _REORTH_THRESHOLD * input_norm:
            for k in range(i):
                rows[i] -= np.vdot(rows[k], rows[i]) * rows[k]
            residual = np.linalg.norm(rows[i])
        if residual < DEGENERACY_THRESHOLD * input_norm:
            raise DegenerateRecordError(
                f"outcome vector {i + 1} is numerically dependent on its "
                f"predecessors (residual {residual:.3e} vs norm {input_norm:.3e})"
            )
        norms[i] = residual
        rows[i] /= residual
    return OrthoBasis(rows=rows, norms=norms)


def convert(
    record: HeterodyneRecord,
    params: ScenarioParams,
    *,
    stats: DerivedStats | None = None,
    basis: OrthoBasis | None = None,
) -> ConversionOutput:
    """Compute the exact conditional idler means after the beamsplitter array.

    The conditional mean vector is ``d = (c_pair / (2 v_het)) * conj(r_h)``;
    output mode i carries ``means[i] = rows[i] . d`` (plain, unconjugated dot
    product, matching the passive linear-optics transform).  Consequences that
    hold exactly, not just in the large-M limit:

    * ``means[i] = 0`` for every ``i > h`` up to rounding, because rows past h
      are Hermitian-orthogonal to ``r_h``;
    * ``means[h]`` is real and non-negative, equal to
      ``c_pair * norms[h] / (2 v_het)``.

    The thermal occupation of every output mode equals ``e_thermal`` from
    :func:`derive_statistics` regardless of the sampled record.
    """
    m, big_m = record.outcomes.shape
    if (m, big_m) != (params.num_bins, params.modes_per_bin):
        raise ValueError(
            f"record shape {(m, big_m)} does not match params "
            f"({params.num_bins}, {params.modes_per_bin})"
        )
    if stats is None:
        stats = derive_statistics(params)
    if basis is None:
        basis = gram_schmidt(record.outcomes)
    coefficient = stats.c_pair / (2.0 * stats.v_het)
    d = coefficient * record.outcomes[record.true_bin - 1].conj()
    means = basis.rows @ d
    return ConversionOutput(means=means, thermal=stats.e_thermal, norms=basis.norms)
