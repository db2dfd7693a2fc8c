"""Round-trip dynamics of the pulse-loop reservoir.

The loop couples a recirculating N-mode reservoir pulse to a fresh
squeezed-vacuum ancilla at a beam splitter; both arms then traverse a
chi(2) crystal and the detector arm is read out by multimode x-homodyne.
Two evaluation paths are provided:

* the ideal (infinite-ensemble) covariance, evaluated exactly by a
  recursion over the input history, and its per-delay additive terms;
* a finite ensemble of M pulses sharing one conditional covariance and
  carrying per-pulse conditional displacements, sampled by Monte Carlo.

The readout features at each step are the N(N+1)/2 upper-triangle entries
of the x-quadrature covariance (estimated or ideal).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

from .errors import ConfigError, NumericalError
from .gaussian import (
    CrystalSpec,
    crystal_symplectic,
    homodyne_kernel,
    matrix_sqrt_psd,
    max_squeezing_db,
    spectral_radius,
    symplecticity_residual,
    SYMPLECTIC_TOL,
    CONDITIONAL_PSD_TOL,
)

WASHOUT_THRESHOLD = 1e-16


@dataclass(frozen=True)
class InputEncoding:
    """Squeezed-vacuum input encoding s -> (r, phi) = (strength, scale * s)."""

    squeeze_strength: float = 1.0
    angle_scale: float = 3.0 * math.pi / 4.0
    input_domain: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        if self.squeeze_strength < 0:
            raise ConfigError("squeeze_strength must be >= 0")
        lo, hi = self.input_domain
        if not lo < hi:
            raise ConfigError(f"input_domain must be an interval, got {self.input_domain}")

    def squeezing_db(self) -> float:
        """Single-mode squeezing level of the encoded ancillas in dB."""
        return 20.0 * self.squeeze_strength * math.log10(math.e)


@dataclass(frozen=True)
class ReservoirParams:
    """Static configuration of one reservoir loop."""

    n_modes: int
    reflectivity: float
    m_pulses: int
    crystal_fiber: CrystalSpec
    crystal_detector: CrystalSpec
    dt: float = 1.0
    squeeze_db_limit: float = 15.0
    enforce_squeeze_limit: bool = False
    initial_state: str = "vacuum"

    def __post_init__(self):
        if self.n_modes < 1:
            raise ConfigError("n_modes must be >= 1")
        if not 0.0 < self.reflectivity < 1.0:
            raise ConfigError(
                f"reflectivity must lie strictly inside (0, 1), got {self.reflectivity}"
            )
        if self.m_pulses < 2:
            raise ConfigError("m_pulses must be >= 2")
        for name, spec in (
            ("crystal_fiber", self.crystal_fiber),
            ("crystal_detector", self.crystal_detector),
        ):
            if spec.n_modes != self.n_modes:
                raise ConfigError(f"{name} has {spec.n_modes} modes, expected {self.n_modes}")
        if self.initial_state not in ("vacuum", "random_squeezed"):
            raise ConfigError(f"unknown initial_state {self.initial_state!r}")
        if self.enforce_squeeze_limit:
            for name, s in (("fiber", self.s1), ("detector", self.s2)):
                db = max_squeezing_db(s)
                if db > self.squeeze_db_limit:
                    raise ConfigError(
                        f"{name} crystal squeezes {db:.2f} dB, above the "
                        f"{self.squeeze_db_limit} dB limit"
                    )

    # cached_property writes to __dict__, bypassing the frozen dataclass guard
    @cached_property
    def s1(self) -> np.ndarray:
        return crystal_symplectic(self.crystal_fiber)

    @cached_property
    def s2(self) -> np.ndarray:
        return crystal_symplectic(self.crystal_detector)

    @property
    def transmissivity(self) -> float:
        return 1.0 - self.reflectivity

    def with_m_pulses(self, m_pulses: int) -> "ReservoirParams":
        return replace(self, m_pulses=m_pulses)


@dataclass
class IdealState:
    """Input-history accumulator of the infinite-ensemble covariance."""

    accum: np.ndarray
    step_index: int = 0

    @classmethod
    def initial(cls, n_modes: int) -> "IdealState":
        return cls(np.zeros((2 * n_modes, 2 * n_modes)), 0)


@dataclass
class EnsembleState:
    """Shared conditional covariance + per-pulse conditional displacements.

    The covariance update of the homodyne back-action is outcome
    independent, so one matrix serves every pulse; ``displacements`` holds
    the M conditional means as columns of a (2N, M) array.
    """

    shared_cov: np.ndarray
    displacements: np.ndarray
    step_index: int = 0

    def __post_init__(self):
        if self.displacements.shape[0] != self.shared_cov.shape[0]:
            raise ValueError("displacement rows must match covariance dimension")

    @property
    def m_pulses(self) -> int:
        return self.displacements.shape[1]


@dataclass(frozen=True)
class OutcomeBatch:
    """Homodyne x-outcomes of the M pulses at one round trip (M x N)."""

    outcomes: np.ndarray
    step_index: int = 0


def single_mode_squeezed_cov(r: float, phi: float) -> np.ndarray:
    """2x2 covariance of a squeezed vacuum with strength r and angle phi."""
    c = math.cosh(2.0 * r)
    s = math.sinh(2.0 * r)
    return np.array(
        [
            [c + math.cos(phi) * s, math.sin(phi) * s],
            [math.sin(phi) * s, c - math.cos(phi) * s],
        ]
    )


def encode_input(s: float, enc: InputEncoding, n_modes: int) -> np.ndarray:
    """Ancilla covariance for input s: N identical squeezed modes."""
    lo, hi = enc.input_domain
    if not lo <= s <= hi:
        raise ValueError(f"input {s} outside domain [{lo}, {hi}]")
    block = single_mode_squeezed_cov(enc.squeeze_strength, enc.angle_scale * s)
    return np.kron(np.eye(n_modes), block)


def draw_crystal(
    rng: np.random.Generator,
    n_modes: int,
    mean_g: float = 0.2,
    spread_g: float = 0.1,
    mean_h: float = 0.3,
    spread_h: float = 0.1,
    dt: float = 1.0,
) -> CrystalSpec:
    """Random crystal: uniform couplings per unordered pair, unit frequencies."""
    if spread_g < 0 or spread_h < 0:
        raise ConfigError("spreads must be >= 0")
    g = np.zeros((n_modes, n_modes))
    h = np.zeros((n_modes, n_modes))
    for i in range(n_modes):
        for j in range(i + 1, n_modes):
            g[i, j] = g[j, i] = rng.uniform(mean_g - spread_g, mean_g + spread_g)
            h[i, j] = h[j, i] = rng.uniform(mean_h - spread_h, mean_h + spread_h)
    return CrystalSpec(np.ones(n_modes), g, h, dt)


def draw_reservoir(
    rng: np.random.Generator,
    n_modes: int,
    reflectivity: float,
    m_pulses: int,
    dt: float = 1.0,
    **kwargs,
) -> ReservoirParams:
    """Reservoir with two independently drawn crystals (fiber first)."""
    crystal_kwargs = {
        k: kwargs.pop(k) for k in ("mean_g", "spread_g", "mean_h", "spread_h") if k in kwargs
    }
    fiber = draw_crystal(rng, n_modes, dt=dt, **crystal_kwargs)
    detector = draw_crystal(rng, n_modes, dt=dt, **crystal_kwargs)
    return ReservoirParams(
        n_modes=n_modes,
        reflectivity=reflectivity,
        m_pulses=m_pulses,
        crystal_fiber=fiber,
        crystal_detector=detector,
        dt=dt,
        **kwargs,
    )


def round_trip_symplectic(params: ReservoirParams) -> np.ndarray:
    """Symplectic matrix of one full round trip (BS + both crystals).

    Block form [[sqrt(R) S1, -sqrt(T) S1], [sqrt(T) S2, sqrt(R) S2]] acting
    on (reservoir arm, ancilla arm); the fiber output of the reservoir arm
    carries sqrt(R) S1 and the detector output sqrt(T) S2.
    """
    sr = math.sqrt(params.reflectivity)
    st = math.sqrt(params.transmissivity)
    s1, s2 = params.s1, params.s2
    s_prime = np.block([[sr * s1, -st * s1], [st * s2, sr * s2]])
    if symplecticity_residual(s_prime) > SYMPLECTIC_TOL:
        raise NumericalError("round-trip matrix lost symplecticity beyond 1e-10")
    return s_prime


def triu_indices(n_modes: int) -> tuple[np.ndarray, np.ndarray]:
    """Row-major upper-triangle indices used by all feature vectors."""
    return np.triu_indices(n_modes)


def features_to_matrix(features: np.ndarray, n_modes: int) -> np.ndarray:
    """Unpack an upper-triangle feature vector into a symmetric N x N matrix."""
    mat = np.zeros((n_modes, n_modes))
    iu = np.triu_indices(n_modes)
    mat[iu] = features
    mat.T[iu] = features
    return mat


def n_features(n_modes: int) -> int:
    return n_modes * (n_modes + 1) // 2


def _x_block(mat: np.ndarray, n_modes: int) -> np.ndarray:
    idx = np.arange(0, 2 * n_modes, 2)
    return mat[np.ix_(idx, idx)]


def ideal_step(
    state: IdealState, s: float, params: ReservoirParams, enc: InputEncoding
) -> tuple[np.ndarray, IdealState]:
    """One step of the infinite-ensemble covariance recursion.

    Emits the x-block upper triangle of
    ``R S2 sigma_anc S2^T + T^2 S2 A S2^T`` and advances the accumulator
    ``A <- S1 (sigma_anc + R A) S1^T``, which sums every delayed ancilla
    contribution without truncation.
    """
    n = params.n_modes
    big_r = params.reflectivity
    big_t = params.transmissivity
    sigma_anc = encode_input(s, enc, n)
    s2 = params.s2
    sigma_out = big_r * (s2 @ sigma_anc @ s2.T) + big_t**2 * (s2 @ state.accum @ s2.T)
    feats = _x_block(sigma_out, n)[np.triu_indices(n)]
    accum = params.s1 @ (sigma_anc + big_r * state.accum) @ params.s1.T
    return feats, IdealState(0.5 * (accum + accum.T), state.step_index + 1)


def gamma_term(
    d: int, s_history, params: ReservoirParams, enc: InputEncoding
) -> np.ndarray:
    """Additive contribution of the input delayed by d steps (N x N x-block).

    ``s_history[-1]`` is the current input, so delay d reads
    ``s_history[-1 - d]``.  The delayed terms carry the prefactor
    ``(1 - R)^2 R^(d-1)``; the d = 0 term is the directly reflected
    ancilla with prefactor R.
    """
    if d < 0:
        raise ValueError("delay must be >= 0")
    s_history = np.atleast_1d(np.asarray(s_history, dtype=float))
    if d >= s_history.size:
        raise ValueError(f"history of length {s_history.size} lacks delay {d}")
    n = params.n_modes
    sigma_anc = encode_input(s_history[-1 - d], enc, n)
    s2 = params.s2
    if d == 0:
        return params.reflectivity * _x_block(s2 @ sigma_anc @ s2.T, n)
    s1_pow = np.linalg.matrix_power(params.s1, d)
    w = s2 @ s1_pow
    pref = params.transmissivity**2 * params.reflectivity ** (d - 1)
    return pref * _x_block(w @ sigma_anc @ w.T, n)


def gamma_table(
    s_sequence,
    params: ReservoirParams,
    enc: InputEncoding,
    step_indices,
    delays,
) -> np.ndarray:
    """gamma_d feature vectors for many (step, delay) pairs.

    Returns an array of shape (len(step_indices), len(delays), N(N+1)/2);
    step indices address ``s_sequence`` absolutely and must be >= max delay.
    """
    s_sequence = np.asarray(s_sequence, dtype=float)
    n = params.n_modes
    iu = np.triu_indices(n)
    delays = list(delays)
    step_indices = list(step_indices)
    # precompute S2 S1^d for every requested delay
    w_by_delay = {}
    s1_pow = np.eye(2 * n)
    max_d = max(delays)
    for d in range(max_d + 1):
        if d > 0:
            s1_pow = params.s1 @ s1_pow
        if d in delays:
            w_by_delay[d] = params.s2 @ s1_pow
    big_r = params.reflectivity
    big_t = params.transmissivity
    out = np.empty((len(step_indices), len(delays), n * (n + 1) // 2))
    for ik, k in enumerate(step_indices):
        if k < max_d:
            raise ValueError(f"step {k} lacks history for delay {max_d}")
        for idd, d in enumerate(delays):
            sigma_anc = encode_input(s_sequence[k - d], enc, n)
            w = w_by_delay[d]
            pref = big_r if d == 0 else big_t**2 * big_r ** (d - 1)
            out[ik, idd] = pref * _x_block(w @ sigma_anc @ w.T, n)[iu]
    return out


def initial_ensemble(
    params: ReservoirParams,
    rng: np.random.Generator | None = None,
    dtype=np.float64,
) -> EnsembleState:
    """Fresh ensemble: vacuum by default, random squeezed modes if configured.

    ``dtype`` sets the per-pulse displacement precision; float32 halves the
    memory traffic of the batched pulse updates at large M, where float
    rounding (~1e-7) sits orders of magnitude below the M^-1/2 sampling
    noise the displacements carry.  All shared matrices stay float64.
    """
    dim = 2 * params.n_modes
    if params.initial_state == "random_squeezed":
        if rng is None:
            raise ValueError("random_squeezed initial state needs an rng")
        blocks = []
        for _ in range(params.n_modes):
            blocks.append(single_mode_squeezed_cov(rng.uniform(0, 0.5), rng.uniform(0, 2 * math.pi)))
        cov = np.zeros((dim, dim))
        for i, b in enumerate(blocks):
            cov[2 * i : 2 * i + 2, 2 * i : 2 * i + 2] = b
    else:
        cov = np.eye(dim)
    return EnsembleState(cov, np.zeros((dim, params.m_pulses), dtype=dtype), 0)


def mc_round_trip(
    ens: EnsembleState,
    s: float,
    params: ReservoirParams,
    enc: InputEncoding,
    rng: np.random.Generator,
) -> tuple[OutcomeBatch, EnsembleState]:
    """One Monte Carlo round trip of the full M-pulse ensemble.

    Propagates the joint reservoir+ancilla state through the beam splitter
    and crystals, samples the x-homodyne outcomes of every pulse with
    covariance equal to the x-block of the detector-arm covariance, and
    conditions the shared covariance (once) and all M displacements
    (batched) on the outcomes.
    """
    n = params.n_modes
    big_r = params.reflectivity
    big_t = params.transmissivity
    s1, s2 = params.s1, params.s2
    sigma_anc = encode_input(s, enc, n)
    sigma_r = ens.shared_cov

    # round-trip covariance blocks of the (fiber, detector) bipartition
    sigma_fiber = s1 @ (big_r * sigma_r + big_t * sigma_anc) @ s1.T
    sigma_hd = s2 @ (big_t * sigma_r + big_r * sigma_anc) @ s2.T
    sigma_corr = math.sqrt(big_r * big_t) * (s1 @ (sigma_r - sigma_anc) @ s2.T)

    x_idx = np.arange(0, 2 * n, 2)
    sigma_hd_x = sigma_hd[np.ix_(x_idx, x_idx)]
    root_x = matrix_sqrt_psd(0.5 * (sigma_hd_x + sigma_hd_x.T))
    kernel = homodyne_kernel(sigma_hd)
    gain = sigma_corr @ kernel

    # batched pulse updates in the ensemble's own precision
    dtype = ens.displacements.dtype
    fiber_op = (math.sqrt(big_r) * s1).astype(dtype)
    detect_op = (math.sqrt(big_t) * s2[x_idx]).astype(dtype)
    r_fiber = fiber_op @ ens.displacements
    x_hd = detect_op @ ens.displacements

    innovation_x = root_x.astype(dtype) @ rng.standard_normal((n, ens.m_pulses), dtype=dtype)
    outcomes = x_hd + innovation_x

    # conditional update: gain @ embedded innovation == gain[:, x] @ x-rows
    new_disp = r_fiber
    new_disp += gain[:, x_idx].astype(dtype) @ innovation_x
    new_cov = sigma_fiber - gain @ sigma_corr.T
    new_cov = 0.5 * (new_cov + new_cov.T)
    if np.min(np.linalg.eigvalsh(new_cov)) < -CONDITIONAL_PSD_TOL:
        raise NumericalError("ensemble covariance lost positivity beyond 1e-8")

    batch = OutcomeBatch(outcomes.T, ens.step_index)
    return batch, EnsembleState(new_cov, new_disp, ens.step_index + 1)


def estimate_covariance(batch: OutcomeBatch) -> np.ndarray:
    """Upper triangle of the M-sample outcome covariance (divisor M)."""
    x = np.asarray(batch.outcomes)
    m = x.shape[0]
    if m < 2:
        raise ValueError("covariance estimation needs at least 2 pulses")
    mean = x.mean(axis=0, dtype=np.float64)
    centered = x - mean.astype(x.dtype)
    cov = (centered.T @ centered).astype(np.float64) / m
    return cov[np.triu_indices(x.shape[1])]


def washout_length(reflectivity: float) -> int:
    """Smallest L with R^L < 1e-16 (initial conditions below precision)."""
    if not 0.0 < reflectivity < 1.0:
        raise ValueError(f"reflectivity must lie inside (0, 1), got {reflectivity}")
    length = math.floor(16.0 / (-math.log10(reflectivity))) + 1
    while reflectivity**length >= WASHOUT_THRESHOLD:
        length += 1
    while length > 1 and reflectivity ** (length - 1) < WASHOUT_THRESHOLD:
        length -= 1
    return length


def verify_echo_state(params: ReservoirParams) -> float:
    """Spectral radius of sqrt(R) S1; equals sqrt(R) < 1 (fading memory)."""
    return spectral_radius(math.sqrt(params.reflectivity) * params.s1)


def run_ideal(
    params: ReservoirParams, enc: InputEncoding, s_sequence
) -> np.ndarray:
    """Ideal-path features for a whole input sequence (L x N(N+1)/2)."""
    s_sequence = np.asarray(s_sequence, dtype=float)
    state = IdealState.initial(params.n_modes)
    feats = np.empty((s_sequence.size, n_features(params.n_modes)))
    for k, s in enumerate(s_sequence):
        feats[k], state = ideal_step(state, s, params, enc)
    return feats


def run_ensemble(
    params: ReservoirParams,
    enc: InputEncoding,
    s_sequence,
    rng: np.random.Generator,
    dtype=np.float64,
) -> tuple[np.ndarray, np.ndarray]:
    """Monte Carlo features and outcome means for a whole input sequence.

    Returns ``(features, means)`` with shapes (L, N(N+1)/2) and (L, N).
    Deterministic given the rng state; the M pulses are advanced jointly
    by batched matrix products (in float32 when requested, see
    :func:`initial_ensemble`).
    """
    s_sequence = np.asarray(s_sequence, dtype=float)
    ens = initial_ensemble(params, rng, dtype=dtype)
    feats = np.empty((s_sequence.size, n_features(params.n_modes)))
    means = np.empty((s_sequence.size, params.n_modes))
    for k, s in enumerate(s_sequence):
        batch, ens = mc_round_trip(ens, s, params, enc, rng)
        feats[k] = estimate_covariance(batch)
        means[k] = batch.outcomes.mean(axis=0, dtype=np.float64)
    return feats, means
