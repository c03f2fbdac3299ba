"""Channel/protocol parameters, derived statistics, and sampling primitives.

Everything downstream (heterodyne simulation, receiver decisions, analytic
error curves) is driven by a handful of scalar statistics of the thermal-loss
channel acting on one arm of a two-mode squeezed vacuum source:

* the per-quadrature heterodyne variance of a return mode,
* the signal-idler correlation coefficient,
* the residual thermal photon number of the conditional idler state,
* the nominal displacement amplitude of the correlated idler bin.

This module also fixes the randomness discipline for the whole package: every
sampling operation consumes an immutable :class:`RandomStream`, backed by a
counter-based bit generator, so that results depend only on
``(master_seed, path)`` and never on scheduling or execution order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ScenarioParams",
    "DerivedStats",
    "DisplacedThermalMode",
    "RandomStream",
    "derive_statistics",
    "vacuum_probability",
    "sample_complex_gaussian",
]


@dataclass(frozen=True)
class ScenarioParams:
    """Parameters of one entanglement-testing scenario.

    Attributes
    ----------
    kappa : float
        Channel transmissivity (ranging: target reflectivity), 0 < kappa <= 1.
    n_signal : float
        Signal brightness per mode (mean photon number), > 0.
    n_noise : float
        Background brightness per mode (mean photon number), >= 0.
    num_bins : int
        Number of candidate bins m (pulse positions), >= 2.
    modes_per_bin : int
        Modes per pulse M. Must satisfy ``modes_per_bin >= num_bins`` so that
        the receiver can orthogonalize m outcome vectors in dimension M.
    """

    kappa: float
    n_signal: float
    n_noise: float
    num_bins: int
    modes_per_bin: int

    def __post_init__(self) -> None:
        if not 0.0 < self.kappa <= 1.0:
            raise ValueError(f"kappa must be in (0, 1], got {self.kappa}")
        if not self.n_signal > 0.0:
            raise ValueError(f"n_signal must be positive, got {self.n_signal}")
        if self.n_noise < 0.0:
            raise ValueError(f"n_noise must be non-negative, got {self.n_noise}")
        if self.num_bins < 2:
            raise ValueError(f"num_bins must be at least 2, got {self.num_bins}")
        if self.modes_per_bin < self.num_bins:
            raise ValueError(
                f"modes_per_bin ({self.modes_per_bin}) must be >= num_bins "
                f"({self.num_bins})"
            )


@dataclass(frozen=True)
class DerivedStats:
    """Scalar statistics derived from :class:`ScenarioParams`.

    ``v_het`` is the per-quadrature heterodyne variance of the signal-bearing
    return mode, ``c_pair`` the signal-idler correlation coefficient,
    ``e_thermal`` the thermal photon number of the conditional idler state and
    ``alpha_one`` the nominal displacement amplitude of the correlated bin.
    """

    v_het: float
    c_pair: float
    e_thermal: float
    alpha_one: float


@dataclass(frozen=True)
class DisplacedThermalMode:
    """A single bosonic mode in a displaced thermal state."""

    mean: complex
    thermal: float

    def __post_init__(self) -> None:
        if self.thermal < 0.0:
            raise ValueError(f"thermal photon number must be >= 0, got {self.thermal}")


@dataclass(frozen=True)
class RandomStream:
    """Immutable handle to a reproducible, splittable random substream.

    The same ``(master_seed, path)`` always yields the same sample sequence;
    distinct paths yield statistically independent streams.  Substreams are
    derived with :meth:`child`, which never mutates the parent, so work items
    (e.g. Monte-Carlo trials) can be dispatched in any order or in parallel
    without changing any result.
    """

    master_seed: int
    path: tuple[int, ...] = ()

    def child(self, *indices: int) -> "RandomStream":
        """Derive an independent substream identified by extra path indices."""
        return RandomStream(self.master_seed, self.path + tuple(int(i) for i in indices))

    def generator(self) -> np.random.Generator:
        """Instantiate the counter-based generator for this stream."""
        seq = np.random.SeedSequence(self.master_seed, spawn_key=self.path)
        return np.random.Generator(np.random.Philox(seq))


def derive_statistics(params: ScenarioParams) -> DerivedStats:
    """Compute the derived scalar statistics of a scenario.

    With kappa, N_S, N_B and M from ``params``:

    * ``v_het   = (N_B + kappa*N_S + 1) / 2``
    * ``c_pair  = sqrt(kappa * N_S * (N_S + 1))``
    * ``e_thermal = N_S * (N_B + 1 - kappa) / (N_B + kappa*N_S + 1)``
    * ``alpha_one = c_pair * sqrt(M / (2 * v_het))``
    """
    kappa, ns, nb = params.kappa, params.n_signal, params.n_noise
    v_het = (nb + kappa * ns + 1.0) / 2.0
    c_pair = math.sqrt(kappa * ns * (ns + 1.0))
    e_thermal = ns * (nb + 1.0 - kappa) / (nb + kappa * ns + 1.0)
    alpha_one = c_pair * math.sqrt(params.modes_per_bin / (2.0 * v_het))
    return DerivedStats(v_het=v_het, c_pair=c_pair, e_thermal=e_thermal, alpha_one=alpha_one)


def log_vacuum_weight(mean_abs_sq: float, thermal: float) -> float:
    """Natural log of the zero-photon weight of a displaced thermal state.

    Safe for arbitrarily large ``|mean|^2``, where the weight itself would
    underflow double precision.
    """
    if thermal < 0.0:
        raise ValueError(f"thermal photon number must be >= 0, got {thermal}")
    return -mean_abs_sq / (thermal + 1.0) - math.log1p(thermal)


def vacuum_probability(mode: DisplacedThermalMode) -> float:
    """Probability of detecting zero photons on a displaced thermal mode.

    ``P(0) = exp(-|mean|^2 / (thermal + 1)) / (1 + thermal)``; strictly
    decreasing in both the displacement magnitude and the thermal occupation.
    """
    return math.exp(log_vacuum_weight(abs(mode.mean) ** 2, mode.thermal))


def click_probability(mean_abs_sq: float, thermal: float) -> float:
    """Probability that on/off detection registers at least one photon."""
    return -math.expm1(log_vacuum_weight(mean_abs_sq, thermal))


def sample_complex_gaussian(
    stream: RandomStream, var_per_quadrature: float, length: int
) -> np.ndarray:
    """Sample a circularly-symmetric complex Gaussian vector.

    Real and imaginary parts of each component are independent zero-mean
    Gaussians with variance ``var_per_quadrature``.  Deterministic given the
    stream.
    """
    if var_per_quadrature <= 0.0:
        raise ValueError(f"var_per_quadrature must be positive, got {var_per_quadrature}")
    if length < 1:
        raise ValueError(f"length must be at least 1, got {length}")
    rng = stream.generator()
    z = rng.standard_normal((length, 2))
    z *= math.sqrt(var_per_quadrature)
    return z.view(np.complex128)[:, 0]
