"""Linear readout training, capacity, and information processing capacity.

Targets are delayed Legendre polynomials of the scalar input, rescaled to
the configured input interval and normalized to unit second moment under
the uniform input measure, so capacities of different degrees are directly
comparable and the total IPC is bounded by the number of features.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import legendre

from .gaussian import moore_penrose


@dataclass(frozen=True)
class TargetSpec:
    """One benchmark target: Legendre degree D of the input delayed by d."""

    degree: int
    delay: int

    def __post_init__(self):
        if self.degree < 1:
            raise ValueError("degree must be >= 1")
        if self.delay < 0:
            raise ValueError("delay must be >= 0")


@dataclass
class TrainedReadout:
    """Affine readout; weights[0] is the bias."""

    weights: np.ndarray
    training_mse: float


@dataclass
class CapacityReport:
    """Per-(degree, delay) capacities of one trained reservoir."""

    entries: dict[tuple[int, int], float]
    n_features: int
    threshold: float = 0.0

    @property
    def total_ipc(self) -> float:
        return float(sum(self.entries.values()))

    @property
    def normalized_ipc(self) -> float:
        return self.total_ipc / self.n_features

    def degree_sums(self) -> dict[int, float]:
        sums: dict[int, float] = {}
        for (degree, _), value in self.entries.items():
            sums[degree] = sums.get(degree, 0.0) + value
        return sums

    def linear_by_delay(self) -> dict[int, float]:
        return {d: c for (degree, d), c in self.entries.items() if degree == 1}


def legendre_target(s_values, degree: int, input_domain=(0.0, 1.0)) -> np.ndarray:
    """Normalized Legendre polynomial of the inputs on their domain.

    The affine map sends ``input_domain`` onto [-1, 1]; the sqrt(2D + 1)
    factor gives unit second moment under the uniform measure.
    """
    lo, hi = input_domain
    u = (2.0 * np.asarray(s_values, dtype=float) - lo - hi) / (hi - lo)
    coeffs = np.zeros(degree + 1)
    coeffs[degree] = 1.0
    return math.sqrt(2.0 * degree + 1.0) * legendre.legval(u, coeffs)


def build_target(s_sequence, spec: TargetSpec, input_domain=(0.0, 1.0)) -> np.ndarray:
    """Delayed-target vector aligned with ``s_sequence``.

    Entry k holds the normalized degree-D Legendre value of s_{k-d};
    entries with k < d have no history and are NaN so that any window
    touching them fails loudly instead of training on garbage.
    """
    s_sequence = np.asarray(s_sequence, dtype=float)
    if spec.delay >= s_sequence.size:
        raise ValueError(
            f"delay {spec.delay} needs a sequence longer than {s_sequence.size}"
        )
    values = legendre_target(s_sequence, spec.degree, input_domain)
    target = np.full(s_sequence.size, np.nan)
    if spec.delay == 0:
        target[:] = values
    else:
        target[spec.delay :] = values[: -spec.delay]
    return target


def _design_matrix(features: np.ndarray) -> np.ndarray:
    features = np.asarray(features, dtype=float)
    if features.ndim != 2 or features.shape[0] == 0:
        raise ValueError("features must be a nonempty (L, n_features) array")
    return np.hstack([np.ones((features.shape[0], 1)), features])


def train(features, target, ridge: float = 0.0) -> TrainedReadout:
    """Least-squares readout via the Moore-Penrose pseudo-inverse.

    ``ridge`` > 0 switches to Tikhonov-regularized normal equations
    (bias unpenalized); the default reproduces the plain pseudo-inverse.
    """
    target = np.asarray(target, dtype=float)
    design = _design_matrix(features)
    if target.shape != (design.shape[0],):
        raise ValueError("target length must match the number of feature rows")
    if np.any(~np.isfinite(target)) or np.any(~np.isfinite(design)):
        raise ValueError("training window touches undefined (NaN) samples")
    if ridge > 0.0:
        penalty = ridge * np.eye(design.shape[1])
        penalty[0, 0] = 0.0
        weights = np.linalg.solve(design.T @ design + penalty, design.T @ target)
    else:
        weights = moore_penrose(design) @ target
    mse = float(np.mean((design @ weights - target) ** 2))
    return TrainedReadout(weights, mse)


def predict(readout: TrainedReadout, features) -> np.ndarray:
    return _design_matrix(features) @ readout.weights


def capacity(readout: TrainedReadout, features_test, target_test) -> float:
    """Held-out capacity max(0, 1 - MSE / <target^2>), clamped to [0, 1]."""
    target_test = np.asarray(target_test, dtype=float)
    if target_test.size == 0:
        raise ValueError("empty test window")
    if np.any(~np.isfinite(target_test)):
        raise ValueError("test window touches undefined (NaN) samples")
    power = float(np.mean(target_test**2))
    if power <= 0.0:
        raise ValueError("target has zero variance on the test window")
    mse = float(np.mean((predict(readout, features_test) - target_test) ** 2))
    return min(1.0, max(0.0, 1.0 - mse / power))


def default_threshold(n_features: int, test_steps: int) -> float:
    """Spurious-capacity floor ~ 2 x (n_features + 1) / L' per target."""
    return 2.0 * (n_features + 1) / test_steps


def ipc(
    features_train,
    features_test,
    s_sequence,
    train_start: int,
    degree_max: int = 5,
    delay_max: int = 75,
    threshold: float | None = None,
    input_domain=(0.0, 1.0),
    ridge: float = 0.0,
) -> CapacityReport:
    """Capacity over the full (degree, delay) grid and its totals.

    ``features_train`` covers steps [train_start, train_start + L) of
    ``s_sequence`` and ``features_test`` the L' steps immediately after,
    so the test window never precedes training data.  One pseudo-inverse
    of the training design matrix is shared by every target.  Capacities
    below ``threshold`` (default: twice the spurious level, pass 0.0 to
    disable) are zeroed before summation.
    """
    features_train = np.asarray(features_train, dtype=float)
    features_test = np.asarray(features_test, dtype=float)
    s_sequence = np.asarray(s_sequence, dtype=float)
    n_train = features_train.shape[0]
    n_test = features_test.shape[0]
    width = features_train.shape[1]
    if train_start < delay_max:
        raise ValueError(
            f"train_start {train_start} lacks history for delay_max {delay_max}"
        )
    if train_start + n_train + n_test > s_sequence.size:
        raise ValueError("feature windows extend past the input sequence")
    if threshold is None:
        threshold = default_threshold(width, n_test)

    design_train = _design_matrix(features_train)
    design_test = _design_matrix(features_test)
    if ridge > 0.0:
        penalty = ridge * np.eye(width + 1)
        penalty[0, 0] = 0.0
        solve = np.linalg.inv(design_train.T @ design_train + penalty) @ design_train.T
    else:
        solve = moore_penrose(design_train)

    test_start = train_start + n_train
    entries: dict[tuple[int, int], float] = {}
    for degree in range(1, degree_max + 1):
        base = legendre_target(s_sequence, degree, input_domain)
        targets_train = np.empty((n_train, delay_max + 1))
        targets_test = np.empty((n_test, delay_max + 1))
        for delay in range(delay_max + 1):
            targets_train[:, delay] = base[train_start - delay : train_start - delay + n_train]
            targets_test[:, delay] = base[test_start - delay : test_start - delay + n_test]
        weights = solve @ targets_train
        residual = design_test @ weights - targets_test
        mse = np.mean(residual**2, axis=0)
        power = np.mean(targets_test**2, axis=0)
        caps = np.clip(1.0 - mse / power, 0.0, 1.0)
        caps[caps < threshold] = 0.0
        for delay in range(delay_max + 1):
            entries[(degree, delay)] = float(caps[delay])
    return CapacityReport(entries, n_features=width, threshold=threshold)
