"""Closed-form and recursive error analytics for the conditional-nulling receiver.

Three independent routes to the receiver's m-ary error probability live here:

* the exact recursion over the number of remaining hypotheses, driven by the
  per-mode false-alarm/false-negative pair (p1, p2);
* a brute-force enumeration of every click path of the decision automaton,
  used as an oracle for the recursion;
* closed forms for the noiseless limit (p1 = 0), exact and asymptotic.

Asymptotic discrimination-error benchmarks for the entanglement-assisted and
classical-source scenarios are included for comparison curves, along with a
fitter for the error exponent of the recursion.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ScenarioParams

__all__ = [
    "BinaryErrorPair",
    "q_sequence",
    "cn_error_recursive",
    "cn_error_ideal",
    "cn_error_bruteforce",
    "helstrom_ea_asymptotic",
    "helstrom_classical_asymptotic",
    "error_pair_components",
    "fit_error_exponent",
    "ExponentFit",
]

# Below this false-alarm probability the generic branch of Q_n is bypassed in
# favour of its p1 -> 0 limit.
_P1_CUTOFF = 1e-12

BRUTEFORCE_MAX_BINS = 12


@dataclass(frozen=True)
class BinaryErrorPair:
    """Per-mode binary discrimination errors of the nulling receiver.

    ``p_false_alarm`` (p1): a zero-mean mode registers a click.
    ``p_false_negative`` (p2): the displaced-to-vacuum true mode registers
    no click.  Fields may be floats or equal-shaped numpy arrays.
    """

    p_false_alarm: float | np.ndarray
    p_false_negative: float | np.ndarray

    def __post_init__(self) -> None:
        for name, value in (
            ("p_false_alarm", self.p_false_alarm),
            ("p_false_negative", self.p_false_negative),
        ):
            arr = np.asarray(value)
            if np.any(arr < 0.0) or np.any(arr > 1.0):
                raise ValueError(f"{name} must lie in [0, 1]")


def _as_float_or_array(value: np.ndarray):
    return float(value) if value.ndim == 0 else value


def q_sequence(n: int, pair: BinaryErrorPair) -> float | np.ndarray:
    """Success probability of one-by-one scanning over n candidate modes.

    ``Q_n = 1 - p2`` when ``p1 = 0`` and
    ``Q_n = (1 - p2) * (1 - (1 - p1)^n) / (n * p1)`` otherwise; the generic
    branch is evaluated through ``expm1``/``log1p`` so it stays accurate down
    to the p1 cutoff, below which the limit value is used directly.
    """
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    p1 = np.asarray(pair.p_false_alarm, dtype=float)
    p2 = np.asarray(pair.p_false_negative, dtype=float)
    small = p1 < _P1_CUTOFF
    safe_p1 = np.where(small, 0.5, p1)
    with np.errstate(divide="ignore", invalid="ignore"):
        generic = (1.0 - p2) * (-np.expm1(n * np.log1p(-safe_p1))) / (n * safe_p1)
    result = np.where(small, 1.0 - p2, generic)
    return _as_float_or_array(result)


def cn_error_recursive(m: int, pair: BinaryErrorPair) -> float | np.ndarray:
    """Error probability of the conditional-nulling receiver on m hypotheses.

    Iterates, from ``P_1 = 0``,

        ``1 - P_n = (1-p1)^n / n + (n-1)/n * [(1-p2)(1 - P_{n-1}) + p2 * Q_{n-1}]``

    for n = 2..m.  When ``p1 = 0`` the algebraically equivalent form
    ``P_n = (n-1)/n * (p2^2 + (1-p2) * P_{n-1})`` is iterated instead, which
    preserves relative accuracy when the error is many orders of magnitude
    below 1.
    """
    if m < 1:
        raise ValueError(f"m must be at least 1, got {m}")
    p1 = np.asarray(pair.p_false_alarm, dtype=float)
    p2 = np.asarray(pair.p_false_negative, dtype=float)
    shape = np.broadcast_shapes(p1.shape, p2.shape)
    p1b = np.broadcast_to(p1, shape)
    p2b = np.broadcast_to(p2, shape)
    out = np.empty(shape)

    small = p1b < _P1_CUTOFF
    if np.any(small):
        q2 = p2b[small]
        prob = np.zeros_like(q2)
        for n in range(2, m + 1):
            prob = (n - 1) / n * (q2 * q2 + (1.0 - q2) * prob)
        out[small] = prob
    if np.any(~small):
        g1 = p1b[~small]
        g2 = p2b[~small]
        log_q = np.log1p(-g1)
        survive = np.ones_like(g1)  # 1 - P_n
        for n in range(2, m + 1):
            # (n-1) * Q_{n-1} = (1-p2) * (1 - (1-p1)^(n-1)) / p1
            scan = (1.0 - g2) * (-np.expm1((n - 1) * log_q)) / g1
            survive = np.exp(n * log_q) / n + ((1.0 - g2) * survive * (n - 1) + g2 * scan) / n
        out[~small] = np.clip(1.0 - survive, 0.0, 1.0)
    if shape == ():
        return float(out)
    return out


def cn_error_ideal(m: int, alpha_one: float) -> tuple[float, float]:
    """Noiseless-limit error of the nulling receiver: (exact, asymptotic).

    exact  = (1/m) * [m*x + (1-x)^m - 1]          with x = exp(-alpha_one^2)
    approx = (m-1)/2 * exp(-2*alpha_one^2)

    The exact form is evaluated via ``expm1``/``log1p`` so the near-complete
    cancellation at large ``alpha_one`` does not destroy its tiny value.
    """
    if m < 2:
        raise ValueError(f"m must be at least 2, got {m}")
    if alpha_one < 0.0:
        raise ValueError(f"alpha_one must be >= 0, got {alpha_one}")
    a_sq = alpha_one * alpha_one
    with np.errstate(under="ignore"):
        x = np.exp(-a_sq)
        approx = 0.5 * (m - 1) * np.exp(-2.0 * a_sq)
    if x >= 1.0:
        return (m - 1) / m, float(approx)
    exact = x + np.expm1(m * np.log1p(-x)) / m
    return float(max(exact, 0.0)), float(approx)


def cn_error_bruteforce(m: int, pair: BinaryErrorPair) -> float:
    """Error probability by direct enumeration of all automaton click paths.

    Sums, over the uniformly distributed true bin h and every outcome path of
    the displace/scan automaton, the path probability times the correctness
    indicator.  This is an independent check on the recursion: it knows
    nothing of ``Q_n`` or the iteration, only the automaton itself, including
    the decide-last-bin rule when every displaced mode clicks.
    """
    if m < 1:
        raise ValueError(f"m must be at least 1, got {m}")
    if m > BRUTEFORCE_MAX_BINS:
        raise ValueError(f"m = {m} exceeds the brute-force cap of {BRUTEFORCE_MAX_BINS}")
    p1 = float(np.asarray(pair.p_false_alarm))
    p2 = float(np.asarray(pair.p_false_negative))
    success = 0.0
    for h in range(1, m + 1):
        # Click probabilities per mode, displaced phase and scan phase.
        click_displaced = [p1 if k == h else 1.0 - p2 for k in range(1, m + 1)]
        click_scan = [1.0 - p2 if k == h else p1 for k in range(1, m + 1)]
        prefix = 1.0  # all displaced modes before i clicked
        for i in range(1, m + 1):
            enter_scan = prefix * (1.0 - click_displaced[i - 1])
            silent = enter_scan  # no scan click so far
            for j in range(i + 1, m + 1):
                if j == h:
                    success += silent * click_scan[j - 1]
                silent *= 1.0 - click_scan[j - 1]
            if i == h:
                success += silent  # scan exhausted, decide i
            prefix *= click_displaced[i - 1]
        if h == m:
            success += prefix  # every displaced mode clicked, decide m
    return 1.0 - success / m


def helstrom_ea_asymptotic(params: ScenarioParams) -> float:
    """Asymptotic discrimination-error limit with entanglement assistance.

    ``(m-1)/m * exp(-2*M*kappa*N_S / N_B)``; valid in the bright-background,
    dim-signal regime, which is the caller's concern.
    """
    if params.n_noise == 0.0:
        raise ValueError("n_noise must be positive for the asymptotic EA limit")
    m = params.num_bins
    exponent = (
        -2.0 * params.modes_per_bin * params.kappa * params.n_signal / params.n_noise
    )
    with np.errstate(under="ignore"):
        return (m - 1) / m * float(np.exp(exponent))


def helstrom_classical_asymptotic(
    params: ScenarioParams, *, high_noise_approx: bool = False
) -> float:
    """Asymptotic discrimination-error limit for classical coherent probes.

    Exact denominator by default:
    ``(m-1)/m * exp(-2*M*kappa*N_S / (1 + 2*N_B + 2*sqrt(N_B*(1+N_B))))``.
    With ``high_noise_approx=True``, the bright-background simplification
    ``(m-1)/m * exp(-M*kappa*N_S / (2*N_B))`` is reported instead (never
    substituted silently).
    """
    m = params.num_bins
    signal = params.modes_per_bin * params.kappa * params.n_signal
    nb = params.n_noise
    if high_noise_approx:
        if nb == 0.0:
            raise ValueError("n_noise must be positive for the high-noise form")
        exponent = -signal / (2.0 * nb)
    else:
        exponent = -2.0 * signal / (1.0 + 2.0 * nb + 2.0 * np.sqrt(nb * (1.0 + nb)))
    with np.errstate(under="ignore"):
        return (m - 1) / m * float(np.exp(exponent))


def error_pair_components(
    kappa: float, n_signal: float, n_noise: float, modes_per_bin
) -> tuple[float, np.ndarray]:
    """Large-M (p1, p2) of the converted problem, vectorized over M.

    ``p1 = E/(1+E)`` is independent of M; ``p2`` is the vacuum weight of the
    displaced true mode at the nominal amplitude.  Returns ``(p1, p2)`` with
    ``p2`` shaped like ``modes_per_bin``.
    """
    big_m = np.asarray(modes_per_bin, dtype=float)
    v_het = (n_noise + kappa * n_signal + 1.0) / 2.0
    e_thermal = n_signal * (n_noise + 1.0 - kappa) / (n_noise + kappa * n_signal + 1.0)
    alpha_sq = kappa * n_signal * (n_signal + 1.0) * big_m / (2.0 * v_het)
    p1 = e_thermal / (1.0 + e_thermal)
    with np.errstate(under="ignore"):
        p2 = np.exp(-alpha_sq / (e_thermal + 1.0)) / (1.0 + e_thermal)
    return p1, p2


@dataclass(frozen=True)
class ExponentFit:
    """Least-squares error-exponent fit of the recursion transient."""

    slope: float
    floor: float
    m_window: tuple[float, float]
    num_points: int


def fit_error_exponent(
    kappa: float,
    n_signal: float,
    n_noise: float,
    num_bins: int,
    transient_window: tuple[float, float] = (1e-6, 1e-1),
    num_points: int = 60,
    m_search: tuple[float, float] = (1e2, 1e9),
) -> ExponentFit:
    """Fit the decay exponent of the recursion error versus M.

    The false-alarm probability p1 does not vanish with M, so the recursive
    error approaches a floor ``P(p1, p2=0)`` instead of zero; the exponent is
    therefore fit on the transient ``P(M) - floor`` over the M range where the
    transient lies inside ``transient_window``.  The fit is an ordinary
    least-squares line through ``(M, ln transient)`` at ``num_points``
    linearly spaced M values.
    """
    lo, hi = transient_window
    if not 0.0 < lo < hi:
        raise ValueError("transient_window must satisfy 0 < lo < hi")
    p1, _ = error_pair_components(kappa, n_signal, n_noise, 1.0)
    floor = cn_error_recursive(num_bins, BinaryErrorPair(p1, 0.0))

    def transient(big_m: np.ndarray) -> np.ndarray:
        _, p2 = error_pair_components(kappa, n_signal, n_noise, big_m)
        return cn_error_recursive(num_bins, BinaryErrorPair(p1, p2)) - floor

    scan = np.geomspace(m_search[0], m_search[1], 2048)
    values = transient(scan)
    inside = (values >= lo) & (values <= hi)
    if not np.any(inside):
        raise ValueError("transient never enters the requested window on the search range")
    m_lo, m_hi = scan[inside][0], scan[inside][-1]
    grid = np.linspace(m_lo, m_hi, num_points)
    t = transient(grid)
    keep = t > 0.0
    slope = np.polyfit(grid[keep], np.log(t[keep]), 1)[0]
    return ExponentFit(
        slope=float(slope),
        floor=float(floor),
        m_window=(float(m_lo), float(m_hi)),
        num_points=int(np.count_nonzero(keep)),
    )
