"""Runtime verification suite behind the ``validate`` CLI task.

Fast, seeded smoke checks of the core invariants: symplectic algebra,
echo-state property, statistical-noise scaling, the delay-decay law, and
the SNR line laws.  Tolerances here are the CI thresholds the model
verifiably meets at desk scale; the acceptance test suite pins the
stricter research-grade tolerances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analysis import (
    draw_stable_reservoir,
    gamma_decay,
    noise_scaling,
    predicted_shift_m,
    predicted_shift_r,
    snr_curve,
)
from .reservoir import (
    InputEncoding,
    draw_crystal,
    single_mode_squeezed_cov,
    verify_echo_state,
    washout_length,
)
from .gaussian import crystal_symplectic, spectral_radius, symplecticity_residual
from .seeds import make_rng


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    expected: str
    detail: str = ""

    def row(self) -> dict:
        return {
            "check": self.name,
            "passed": self.passed,
            "value": self.value,
            "expected": self.expected,
            "detail": self.detail,
        }


VALIDATE_SCHEMA = ["check", "passed", "value", "expected", "detail"]


def check_symplecticity(seed: int) -> CheckResult:
    rng = make_rng(seed, "validate-symplectic")
    worst = 0.0
    for _ in range(100):
        spec = draw_crystal(rng, int(rng.integers(1, 7)), dt=float(rng.uniform(0.2, 1.5)))
        worst = max(worst, symplecticity_residual(crystal_symplectic(spec)))
    return CheckResult("symplecticity", worst <= 1e-10, worst,
                       "max |S^T Omega S - Omega| <= 1e-10 over 100 crystals")


def check_echo_state(seed: int) -> CheckResult:
    rng = make_rng(seed, "validate-echo")
    worst = 0.0
    for reflectivity in (0.25, 0.81):
        for _ in range(50):
            params = draw_stable_reservoir(rng, int(rng.integers(2, 7)), reflectivity, 2)
            worst = max(worst, abs(verify_echo_state(params) - math.sqrt(reflectivity)))
    return CheckResult("echo_state", worst <= 1e-8, worst,
                       "|rho(sqrt(R) S1) - sqrt(R)| <= 1e-8 over 100 crystals")


def check_noise_scaling(seed: int) -> CheckResult:
    fit = noise_scaling(2, 0.75, [100, 1000, 10_000], n_realizations=3, seed=seed)
    return CheckResult("noise_scaling_m", abs(fit.exponent + 0.5) <= 0.1,
                       fit.exponent, "RMS(est - ideal) ~ M^(-0.5 +- 0.1)")


def check_gamma_decay(seed: int) -> CheckResult:
    worst_err, worst_r2 = 0.0, 1.0
    for reflectivity in (0.75, 0.9):
        fit = gamma_decay(8, reflectivity, n_realizations=60, seed=seed)
        rel = abs(fit.slope - math.log10(reflectivity)) / abs(math.log10(reflectivity))
        worst_err = max(worst_err, rel)
        worst_r2 = min(worst_r2, fit.r_squared)
    passed = worst_err <= 0.10 and worst_r2 >= 0.90
    return CheckResult("gamma_decay", passed, worst_err,
                       "slope within 10% of log10(R), R^2 >= 0.90 (smoke scale)",
                       f"worst R^2 {worst_r2:.4f}")


def check_snr_m_shift(seed: int) -> CheckResult:
    proto = draw_stable_reservoir(make_rng(seed, "validate-snr-proto"), 4, 0.9, 2)
    low = snr_curve(proto, 500, 6, range(1, 11), seed=seed, window=80)
    high = snr_curve(proto, 5000, 6, range(1, 11), seed=seed, window=80)
    shift = high.fitted_height_db - low.fitted_height_db
    expected = predicted_shift_m(500, 5000)
    return CheckResult("snr_shift_m", abs(shift - expected) <= 1.5, shift,
                       f"height shift {expected:.2f} +- 1.5 dB (smoke scale)")


def check_snr_r_shift(seed: int) -> CheckResult:
    proto_low = draw_stable_reservoir(make_rng(seed, "validate-snr-r"), 4, 0.75, 2)
    proto_high = draw_stable_reservoir(make_rng(seed, "validate-snr-r"), 4, 0.9, 2)
    low = snr_curve(proto_low, 2000, 6, range(1, 11), seed=seed, window=80)
    high = snr_curve(proto_high, 2000, 6, range(1, 11), seed=seed, window=80)
    shift = high.fitted_height_db - low.fitted_height_db
    expected = predicted_shift_r(0.75, 0.9)
    return CheckResult("snr_shift_r", abs(shift - expected) <= 2.0, shift,
                       f"gamma_1 height shift {expected:.2f} +- 2.0 dB (smoke scale)")


def check_encoding_purity(seed: int) -> CheckResult:
    rng = make_rng(seed, "validate-purity")
    enc = InputEncoding()
    worst = 0.0
    for _ in range(200):
        block = single_mode_squeezed_cov(enc.squeeze_strength,
                                         enc.angle_scale * rng.uniform(0, 1))
        worst = max(worst, abs(np.linalg.det(block) - 1.0))
    return CheckResult("encoding_purity", worst <= 1e-12, worst,
                       "det of squeezed blocks = 1 +- 1e-12")


def check_washout(seed: int) -> CheckResult:
    ok = (washout_length(0.1) == 17 and washout_length(0.9) == 350
          and washout_length(0.99) == 3666)
    return CheckResult("washout_lengths", ok, 0.0 if ok else 1.0,
                       "R^L < 1e-16 thresholds at R = 0.1, 0.9, 0.99")


ALL_CHECKS = [
    check_symplecticity,
    check_echo_state,
    check_encoding_purity,
    check_washout,
    check_noise_scaling,
    check_gamma_decay,
    check_snr_m_shift,
    check_snr_r_shift,
]


def run_validation(seed: int) -> list[CheckResult]:
    return [check(seed) for check in ALL_CHECKS]
