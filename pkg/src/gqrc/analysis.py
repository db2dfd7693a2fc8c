"""Signal-to-noise analysis, resource tradeoffs, and scaling schedules.

The statistical noise at finite M is defined as the residual between the
estimated and the exactly computed ideal covariance on the same input
string.  SNR curves summarize the element-wise |signal/noise| ratio by
its median over matrix entries and a stationary window of steps within
each realization, convert to decibels, and then average across
realizations.  The median is used because the plain mean of |signal/noise|
has a Pareto tail of index one (the noise density is finite at zero), so
it has no finite population value and its sample version is dominated by
the single smallest noise entry; the median is scale-equivariant, which
is all the sqrt(M) and (1-R)^2 line laws require.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError, NumericalError
from .gaussian import build_hamiltonian_matrix, crystal_symplectic, max_squeezing_db
from .reservoir import (
    InputEncoding,
    ReservoirParams,
    draw_crystal,
    gamma_table,
    run_ensemble,
    run_ideal,
    washout_length,
)
from .seeds import make_rng

SNR_FLOOR_DB = -20.0


# --------------------------------------------------------------- closed forms


def predicted_shift_m(m_pulses: int, m_prime: int) -> float:
    """SNR height change in dB when the ensemble grows from M to M'."""
    return 5.0 * math.log10(m_prime / m_pulses)


def predicted_shift_r(reflectivity: float, r_prime: float) -> float:
    """Height change of the delay-1 SNR in dB when R changes to R'."""
    return 20.0 * math.log10((1.0 - r_prime) / (1.0 - reflectivity))


def resolution_gain(m_pulses: float, m_prime: float, reflectivity: float) -> float:
    """Extra resolvable delays log_R sqrt(M/M') bought by enlarging M."""
    if not 0.0 < reflectivity < 1.0:
        raise ConfigError("reflectivity must lie inside (0, 1)")
    if m_pulses <= 0 or m_prime <= 0:
        raise ConfigError("pulse counts must be positive")
    return math.log(math.sqrt(m_pulses / m_prime), reflectivity)


@dataclass(frozen=True)
class ScalingSchedule:
    """Joint reflectivity/ensemble-size schedule R(N) = 1 - C/N^2, M ~ N^p."""

    c_const: float = 10.0
    m_coeff: float = 3.0
    m_exponent: float = 6.0

    @classmethod
    def renormalized(cls, base_n: int, base_m: float, c_const: float = 10.0,
                     m_exponent: float = 6.0) -> "ScalingSchedule":
        """Schedule with M(base_n) = base_m."""
        return cls(c_const, base_m / base_n**m_exponent, m_exponent)


def scaling_schedule(sched: ScalingSchedule, n_modes: int) -> tuple[float, int]:
    """(R, M) at reservoir size N; rejects sizes that push R out of (0, 1)."""
    reflectivity = 1.0 - sched.c_const / n_modes**2
    if not 0.0 < reflectivity < 1.0:
        raise ConfigError(
            f"R(N) = 1 - {sched.c_const}/N^2 leaves (0, 1) at N = {n_modes}"
        )
    return reflectivity, int(round(sched.m_coeff * n_modes**sched.m_exponent))


# ------------------------------------------------------------ crystal drawing


def draw_stable_reservoir(
    rng: np.random.Generator,
    n_modes: int,
    reflectivity: float,
    m_pulses: int,
    squeeze_db_limit: float | None = 15.0,
    max_draws: int = 10_000,
    **kwargs,
) -> ReservoirParams:
    """Reservoir with crystals resampled to the model's validity regime.

    The fading-memory argument requires the quadratic form of each crystal
    Hamiltonian to be positive definite (purely imaginary spectrum of the
    propagator generator); the hardware bound caps the per-pass squeezing
    at ``squeeze_db_limit`` dB (pass None to disable).  Raw draws at small
    N essentially always satisfy both, while N >= 10 needs the resampling.
    """

    def accept():
        for _ in range(max_draws):
            spec = draw_crystal(rng, n_modes, **kwargs)
            if np.min(np.linalg.eigvalsh(build_hamiltonian_matrix(spec))) <= 0.0:
                continue
            if squeeze_db_limit is not None:
                if max_squeezing_db(crystal_symplectic(spec)) > squeeze_db_limit:
                    continue
            return spec
        raise NumericalError(
            f"no admissible crystal within {max_draws} draws at N={n_modes}"
        )

    fiber = accept()
    detector = accept()
    limit = squeeze_db_limit if squeeze_db_limit is not None else math.inf
    return ReservoirParams(
        n_modes=n_modes,
        reflectivity=reflectivity,
        m_pulses=m_pulses,
        crystal_fiber=fiber,
        crystal_detector=detector,
        squeeze_db_limit=limit,
    )


# ----------------------------------------------------------------- SNR curves


@dataclass
class SnrCurve:
    """Mean SNR per delay in dB with the fitted line of the decay law."""

    delays: np.ndarray
    snr_db: np.ndarray
    snr_db_stderr: np.ndarray
    fitted_slope_db: float
    fitted_height_db: float
    n_realizations: int
    floor_db: float = SNR_FLOOR_DB


def _fit_snr_line(delays, snr_db, floor_db):
    mask = snr_db > floor_db
    if np.sum(mask) < 2:
        return float("nan"), float("nan")
    slope, intercept = np.polyfit(delays[mask], snr_db[mask], 1)
    return float(slope), float(slope * 1.0 + intercept)


def snr_curve(
    params: ReservoirParams,
    m_pulses: int,
    n_realizations: int,
    d_range,
    seed: int,
    window: int = 100,
    floor_db: float = SNR_FLOOR_DB,
    enc: InputEncoding | None = None,
    squeeze_db_limit: float | None = 15.0,
) -> SnrCurve:
    """Measured SNR of the delayed covariance terms against finite-M noise.

    Per realization: fresh crystals (same N, R as ``params``) and a fresh
    input string; the finite ensemble and the ideal path run on identical
    inputs, the residual between their covariance features is the noise,
    and the element-wise |gamma_d / noise| ratios are summarized by their
    median over the feature entries and a post-washout window of steps
    (see the module docstring for why not the mean).  Realizations enter
    in dB, so the reported curve is mean +- stderr across them.  Identical
    seeds pair realizations across calls (used for shift measurements).
    """
    enc = enc or InputEncoding()
    delays = np.asarray(list(d_range), dtype=int)
    if np.any(delays < 1):
        raise ConfigError("SNR delays start at 1")
    burn = max(washout_length(params.reflectivity), int(delays.max()))
    db_per_real = np.empty((n_realizations, delays.size))
    for real in range(n_realizations):
        crystal_rng = make_rng(seed, "snr-crystals", real)
        loop = draw_stable_reservoir(
            crystal_rng, params.n_modes, params.reflectivity, m_pulses,
            squeeze_db_limit=squeeze_db_limit,
        )
        s_seq = make_rng(seed, "snr-inputs", real).uniform(
            enc.input_domain[0], enc.input_domain[1], burn + window
        )
        ideal = run_ideal(loop, enc, s_seq)
        est, _ = run_ensemble(loop, enc, s_seq, make_rng(seed, "snr-outcomes", real))
        xi = est[burn:] - ideal[burn:]
        gammas = gamma_table(s_seq, loop, enc, range(burn, burn + window), delays)
        with np.errstate(divide="ignore"):
            ratio = np.abs(gammas) / np.abs(xi[:, None, :])
        finite = np.isfinite(ratio)
        if not np.all(finite):  # exactly-zero noise entries are excluded
            ratio = np.where(finite, ratio, np.nan)
            db_per_real[real] = 10.0 * np.log10(np.nanmedian(ratio, axis=(0, 2)))
        else:
            db_per_real[real] = 10.0 * np.log10(np.median(ratio, axis=(0, 2)))
    snr_db = db_per_real.mean(axis=0)
    stderr = db_per_real.std(axis=0, ddof=1) / math.sqrt(n_realizations) \
        if n_realizations > 1 else np.zeros_like(snr_db)
    slope, height = _fit_snr_line(delays.astype(float), snr_db, floor_db)
    return SnrCurve(delays, snr_db, stderr, slope, height, n_realizations, floor_db)


# ----------------------------------------------------- decay and noise checks


@dataclass
class GammaDecayFit:
    delays: np.ndarray
    log10_mean: np.ndarray
    slope: float
    r_squared: float


def gamma_decay(
    n_modes: int,
    reflectivity: float,
    n_realizations: int,
    seed: int,
    d_max: int = 15,
    n_inputs: int = 8,
    enc: InputEncoding | None = None,
    squeeze_db_limit: float | None = 15.0,
) -> GammaDecayFit:
    """Fit of log10<|gamma_d|> vs d against the (1-R)^2 R^(d-1) law.

    Averages |gamma_d| entry-wise over feature entries, several input
    draws per realization, and the realizations (fresh crystal pairs).
    """
    enc = enc or InputEncoding()
    delays = np.arange(1, d_max + 1)
    mean_abs = np.zeros(d_max)
    for real in range(n_realizations):
        loop = draw_stable_reservoir(
            make_rng(seed, "gamma-crystals", real), n_modes, reflectivity, 2,
            squeeze_db_limit=squeeze_db_limit,
        )
        s_vals = make_rng(seed, "gamma-inputs", real).uniform(
            enc.input_domain[0], enc.input_domain[1], n_inputs + d_max
        )
        table = gamma_table(s_vals, loop, enc, range(d_max, d_max + n_inputs), delays)
        mean_abs += np.abs(table).mean(axis=(0, 2)) / n_realizations
    log_mean = np.log10(mean_abs)
    slope, intercept = np.polyfit(delays, log_mean, 1)
    fit = slope * delays + intercept
    ss_res = float(np.sum((log_mean - fit) ** 2))
    ss_tot = float(np.sum((log_mean - log_mean.mean()) ** 2))
    return GammaDecayFit(delays, log_mean, float(slope), 1.0 - ss_res / ss_tot)


@dataclass
class NoiseScalingFit:
    m_grid: np.ndarray
    rms: np.ndarray
    exponent: float


def noise_scaling(
    n_modes: int,
    reflectivity: float,
    m_grid,
    n_realizations: int,
    seed: int,
    window: int = 50,
    enc: InputEncoding | None = None,
) -> NoiseScalingFit:
    """Log-log fit of RMS(est - ideal) against the ensemble size."""
    enc = enc or InputEncoding()
    m_grid = np.asarray(list(m_grid), dtype=int)
    burn = washout_length(reflectivity)
    rms = np.zeros(m_grid.size)
    for real in range(n_realizations):
        loop = draw_stable_reservoir(
            make_rng(seed, "noise-crystals", real), n_modes, reflectivity, 2
        )
        s_seq = make_rng(seed, "noise-inputs", real).uniform(
            enc.input_domain[0], enc.input_domain[1], burn + window
        )
        ideal = run_ideal(loop, enc, s_seq)[burn:]
        for i, m_pulses in enumerate(m_grid):
            est, _ = run_ensemble(
                loop.with_m_pulses(int(m_pulses)), enc, s_seq,
                make_rng(seed, "noise-outcomes", real, int(m_pulses)),
            )
            rms[i] += math.sqrt(np.mean((est[burn:] - ideal) ** 2)) / n_realizations
    exponent = float(np.polyfit(np.log10(m_grid), np.log10(rms), 1)[0])
    return NoiseScalingFit(m_grid, rms, exponent)
