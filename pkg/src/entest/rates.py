"""Communication-rate analytics for pulse-position-modulated entanglement assistance.

Rates are expressed per mode of a PPM frame: one of m bins carries a signal
pulse of M modes, so a symbol occupies M*m modes and the per-mode rate at
symbol error probability P is ``I(P) / (M*m)`` with I the mutual information
of the m-ary symmetric channel.  The signal brightness per frame mode is
``n_s``; the pulse itself then carries ``N_S = m * n_s`` photons per mode.

Benchmarks: the unassisted (Holevo) capacity of the thermal-loss channel and
the entanglement-assisted classical capacity.  The rate optimizer maximizes
the per-mode rate over (m, M) for either the asymptotic quantum-limit error
or the conditional-nulling recursion error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .theory import BinaryErrorPair, cn_error_recursive, error_pair_components

__all__ = [
    "RatePoint",
    "EaCapacityTerms",
    "GridSpec",
    "mutual_information",
    "entropy_g",
    "classical_capacity",
    "ea_capacity",
    "optimize_rate",
]

_LN2 = math.log(2.0)

ERROR_MODELS = ("helstrom_ea", "cn_recursion")


@dataclass(frozen=True)
class RatePoint:
    """One evaluated/optimized PPM operating point."""

    num_bins: int
    modes_per_bin: int
    error_prob: float
    rate: float
    grid_boundary: bool = False


@dataclass(frozen=True)
class EaCapacityTerms:
    """Intermediate quantities of the entanglement-assisted capacity formula."""

    n_s: float
    n_s_prime: float
    d_term: float
    a_plus: float
    a_minus: float


def mutual_information(p, m: int):
    """Mutual information (bits/symbol) of the m-ary symmetric PPM channel.

    ``I(p) = log2(m) + (1-p) log2(1-p) + p log2(p / (m-1))`` with the
    ``0 log 0`` terms defined as 0.  Accepts scalar or array ``p``.
    """
    if m < 2:
        raise ValueError(f"m must be at least 2, got {m}")
    p = np.asarray(p, dtype=float)
    if np.any(p < 0.0) or np.any(p > 1.0):
        raise ValueError("p must lie in [0, 1]")
    with np.errstate(divide="ignore", invalid="ignore"):
        keep = (1.0 - p) * np.log1p(-p) / _LN2
        confuse = p * np.log(p / (m - 1)) / _LN2
    result = math.log2(m) + np.where(p < 1.0, keep, 0.0) + np.where(p > 0.0, confuse, 0.0)
    return float(result) if result.ndim == 0 else result


def entropy_g(n):
    """Entropy (bits) of a thermal state with mean photon number n; g(0) = 0."""
    n = np.asarray(n, dtype=float)
    if np.any(n < 0.0):
        raise ValueError("mean photon number must be >= 0")
    with np.errstate(divide="ignore", invalid="ignore"):
        result = ((n + 1.0) * np.log1p(n) - np.where(n > 0.0, n * np.log(n), 0.0)) / _LN2
    result = np.where(n > 0.0, result, 0.0)
    return float(result) if result.ndim == 0 else result


def classical_capacity(kappa: float, n_noise: float, n_s: float) -> float:
    """Unassisted classical capacity of the thermal-loss channel (bits/mode).

    ``C = g(kappa*n_s + N_B) - g(N_B)``.
    """
    _check_channel(kappa, n_noise, n_s, allow_zero_signal=True)
    return float(entropy_g(kappa * n_s + n_noise) - entropy_g(n_noise))


def ea_capacity(kappa: float, n_noise: float, n_s: float) -> tuple[float, EaCapacityTerms]:
    """Entanglement-assisted classical capacity (bits/mode) and its terms.

    ``C_E = g(n_s) + g(n_s') - g(A+) - g(A-)`` with ``n_s' = kappa*n_s + N_B``,
    ``A± = (D - 1 ± (n_s' - n_s)) / 2`` and
    ``D = sqrt((n_s + n_s' + 1)^2 - 4*kappa*n_s*(n_s + 1))``.  D is evaluated
    through the cancellation-free rearrangement
    ``D^2 = (n_s*(1-kappa) + N_B + 1)^2 + 4*kappa*n_s*N_B`` so that the
    lossless noiseless point collapses exactly to ``C_E = 2 g(n_s)``.
    """
    _check_channel(kappa, n_noise, n_s, allow_zero_signal=False)
    n_s_prime = kappa * n_s + n_noise
    d_term = math.sqrt((n_s * (1.0 - kappa) + n_noise + 1.0) ** 2 + 4.0 * kappa * n_s * n_noise)
    gap = n_s_prime - n_s
    a_plus = max((d_term - 1.0 + gap) / 2.0, 0.0)
    a_minus = max((d_term - 1.0 - gap) / 2.0, 0.0)
    value = float(
        entropy_g(n_s) + entropy_g(n_s_prime) - entropy_g(a_plus) - entropy_g(a_minus)
    )
    terms = EaCapacityTerms(
        n_s=n_s, n_s_prime=n_s_prime, d_term=d_term, a_plus=a_plus, a_minus=a_minus
    )
    return value, terms


def _check_channel(kappa: float, n_noise: float, n_s: float, allow_zero_signal: bool) -> None:
    if not 0.0 < kappa <= 1.0:
        raise ValueError(f"kappa must be in (0, 1], got {kappa}")
    if n_noise < 0.0:
        raise ValueError(f"n_noise must be >= 0, got {n_noise}")
    if n_s < 0.0 or (n_s == 0.0 and not allow_zero_signal):
        raise ValueError(f"n_s must be {'>= 0' if allow_zero_signal else '> 0'}, got {n_s}")


def _default_modes_grid() -> np.ndarray:
    # 64 points per decade over 1..1e8, rounded to unique integers.
    return np.unique(np.round(np.geomspace(1.0, 1e8, 64 * 8 + 1)).astype(np.int64))


def _default_m_values() -> tuple[int, ...]:
    return tuple(2**k for k in range(1, 17))


@dataclass(frozen=True)
class GridSpec:
    """Search grid for :func:`optimize_rate`.

    ``m_values`` are the PPM bin counts to try (powers of two by default,
    matching the log2(m) bits a symbol encodes); ``modes_grid`` is the shared
    integer M grid, restricted per m to ``M >= m``.  With ``refine`` enabled,
    a linear integer pass around the coarse argmax sharpens M.
    """

    m_values: tuple[int, ...] = field(default_factory=_default_m_values)
    modes_grid: np.ndarray = field(default_factory=_default_modes_grid)
    refine: bool = True

    def __post_init__(self) -> None:
        if len(self.m_values) == 0 or len(self.modes_grid) == 0:
            raise ValueError("grid must contain at least one m and one M value")
        if any(m < 2 for m in self.m_values):
            raise ValueError("every m must be >= 2")


def _error_on_grid(model: str, kappa, n_noise, n_s, m: int, modes: np.ndarray) -> np.ndarray:
    n_signal = m * n_s
    if model == "helstrom_ea":
        with np.errstate(under="ignore"):
            return (m - 1) / m * np.exp(
                -2.0 * modes.astype(float) * kappa * n_signal / n_noise
            )
    p1, p2 = error_pair_components(kappa, n_signal, n_noise, modes)
    return np.atleast_1d(cn_error_recursive(m, BinaryErrorPair(p1, p2)))


def optimize_rate(
    kappa: float,
    n_noise: float,
    n_s: float,
    error_model: str = "helstrom_ea",
    search: GridSpec | None = None,
) -> RatePoint:
    """Maximize the per-mode PPM rate ``I(P) / (M*m)`` over the search grid.

    ``error_model`` selects the symbol error probability: ``helstrom_ea`` for
    the asymptotic entanglement-assisted quantum limit, ``cn_recursion`` for
    the conditional-nulling recursion with the large-M error pair.  Ties are
    broken toward smaller M, then smaller m.  ``grid_boundary`` is set on the
    result when the argmax touches the edge of the search grid (largest m, or
    the extreme usable M), signalling that the grid, not the objective,
    limited the answer.
    """
    if error_model not in ERROR_MODELS:
        raise ValueError(f"error_model must be one of {ERROR_MODELS}, got {error_model!r}")
    if n_s <= 0.0:
        raise ValueError(f"n_s must be positive, got {n_s}")
    if error_model == "helstrom_ea" and n_noise == 0.0:
        raise ValueError("n_noise must be positive for the helstrom_ea model")
    grid = search if search is not None else GridSpec()

    best: RatePoint | None = None
    m_sorted = sorted(grid.m_values)
    usable_m: list[int] = []
    for m in m_sorted:
        modes = grid.modes_grid[grid.modes_grid >= m]
        if modes.size == 0:
            continue
        usable_m.append(m)
        # log2(m) / (m * min M) bounds every rate this m can reach.
        if best is not None and math.log2(m) / (m * float(modes[0])) <= best.rate:
            break
        errors = _error_on_grid(error_model, kappa, n_noise, n_s, m, modes)
        rates = mutual_information(errors, m) / (modes.astype(float) * m)
        k = int(np.argmax(rates))
        candidate = RatePoint(
            num_bins=m, modes_per_bin=int(modes[k]), error_prob=float(errors[k]),
            rate=float(rates[k]),
        )
        if _better(candidate, best):
            best = candidate
    if best is None:
        raise ValueError("empty search grid: no (m, M) point satisfies M >= m")

    if grid.refine:
        best = _refine_modes(best, kappa, n_noise, n_s, error_model, grid)

    boundary = _on_boundary(best, grid, usable_m)
    if boundary != best.grid_boundary:
        best = RatePoint(
            best.num_bins, best.modes_per_bin, best.error_prob, best.rate, boundary
        )
    return best


def _better(candidate: RatePoint, best: RatePoint | None) -> bool:
    if best is None or candidate.rate > best.rate:
        return True
    if candidate.rate < best.rate:
        return False
    if candidate.modes_per_bin != best.modes_per_bin:
        return candidate.modes_per_bin < best.modes_per_bin
    return candidate.num_bins < best.num_bins


def _refine_modes(
    point: RatePoint, kappa, n_noise, n_s, error_model: str, grid: GridSpec
) -> RatePoint:
    """Linear integer sweep of M around the coarse argmax (m fixed)."""
    coarse = grid.modes_grid
    idx = int(np.searchsorted(coarse, point.modes_per_bin))
    lo = int(coarse[max(idx - 1, 0)])
    hi = int(coarse[min(idx + 1, coarse.size - 1)])
    lo = max(lo, point.num_bins)
    if hi <= lo:
        return point
    modes = np.unique(np.round(np.linspace(lo, hi, 257)).astype(np.int64))
    errors = _error_on_grid(error_model, kappa, n_noise, n_s, point.num_bins, modes)
    rates = mutual_information(errors, point.num_bins) / (modes.astype(float) * point.num_bins)
    k = int(np.argmax(rates))
    candidate = RatePoint(
        num_bins=point.num_bins, modes_per_bin=int(modes[k]),
        error_prob=float(errors[k]), rate=float(rates[k]),
    )
    return candidate if _better(candidate, point) else point


def _on_boundary(point: RatePoint, grid: GridSpec, usable_m: list[int]) -> bool:
    if not usable_m:
        return True
    if point.num_bins == max(usable_m) and point.num_bins != min(usable_m):
        return True
    m_floor = max(point.num_bins, int(grid.modes_grid[0]))
    return point.modes_per_bin <= m_floor or point.modes_per_bin >= int(grid.modes_grid[-1])
