"""Phase-space algebra for N-mode Gaussian states.

Conventions used throughout the package:

* quadratures are interleaved, ``(x1, p1, x2, p2, ..., xN, pN)``;
* the vacuum covariance matrix is the identity, so a single-mode squeezed
  state has variances ``exp(+-2r)``;
* symplectic matrices satisfy ``S^T Omega S = Omega`` with the
  block-diagonal form ``Omega = diag([[0, 1], [-1, 0]], ...)``.

All functions are pure; matrices are plain float64 ``numpy`` arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import ConfigError, NumericalError

# Tolerances fixed package-wide (they double as test tolerances).
SYMMETRY_TOL = 1e-12
PSD_TOL = 1e-10
SYMPLECTIC_TOL = 1e-10
CONDITIONAL_PSD_TOL = 1e-8
PINV_RCOND = 1e-12


@dataclass(frozen=True)
class QuadratureLayout:
    """Fixed interleaved quadrature ordering for ``n_modes`` optical modes."""

    n_modes: int

    def __post_init__(self):
        if self.n_modes < 1:
            raise ConfigError(f"n_modes must be >= 1, got {self.n_modes}")

    @property
    def dim(self) -> int:
        return 2 * self.n_modes

    @property
    def x_indices(self) -> np.ndarray:
        return np.arange(0, self.dim, 2)

    @property
    def p_indices(self) -> np.ndarray:
        return np.arange(1, self.dim, 2)


def symplectic_form(n_modes: int) -> np.ndarray:
    """Block-diagonal symplectic form for the interleaved ordering."""
    omega = np.zeros((2 * n_modes, 2 * n_modes))
    for i in range(n_modes):
        omega[2 * i, 2 * i + 1] = 1.0
        omega[2 * i + 1, 2 * i] = -1.0
    return omega


def x_projector(n_modes: int) -> np.ndarray:
    """Projector onto the x-quadratures (ones at x positions)."""
    pi = np.zeros((2 * n_modes, 2 * n_modes))
    idx = np.arange(0, 2 * n_modes, 2)
    pi[idx, idx] = 1.0
    return pi


def _check_square(a: np.ndarray, name: str) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {a.shape}")
    return a


@dataclass(frozen=True)
class GaussianState:
    """Displacement vector and covariance matrix of an N-mode pulse."""

    displacement: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.displacement, dtype=float)
        cov = np.asarray(self.covariance, dtype=float)
        if r.ndim != 1 or cov.shape != (r.size, r.size) or r.size % 2 != 0:
            raise ValueError(
                f"inconsistent state dimensions: r {r.shape}, cov {cov.shape}"
            )
        if np.max(np.abs(cov - cov.T)) > SYMMETRY_TOL:
            raise NumericalError("covariance is not symmetric within 1e-12")
        if np.min(np.linalg.eigvalsh(cov)) < -PSD_TOL:
            raise NumericalError("covariance is not PSD within 1e-10")
        object.__setattr__(self, "displacement", r)
        object.__setattr__(self, "covariance", cov)

    @property
    def n_modes(self) -> int:
        return self.displacement.size // 2

    @classmethod
    def vacuum(cls, n_modes: int) -> "GaussianState":
        return cls(np.zeros(2 * n_modes), np.eye(2 * n_modes))


@dataclass(frozen=True)
class CrystalSpec:
    """Frequencies and quadratic couplings of one chi(2) crystal.

    ``g`` holds the beam-splitter-type couplings (a_i^dag a_j + h.c.) and
    ``h`` the squeezing-type ones (i a_i^dag a_j^dag + h.c.); both are
    symmetric with zero diagonal.  ``dt`` is the interaction time.
    """

    omegas: np.ndarray
    g: np.ndarray
    h: np.ndarray
    dt: float = 1.0

    def __post_init__(self):
        omegas = np.atleast_1d(np.asarray(self.omegas, dtype=float))
        g = np.asarray(self.g, dtype=float)
        h = np.asarray(self.h, dtype=float)
        n = omegas.size
        if g.shape != (n, n) or h.shape != (n, n):
            raise ConfigError(
                f"coupling shapes {g.shape}/{h.shape} do not match {n} modes"
            )
        for name, m in (("g", g), ("h", h)):
            if np.max(np.abs(m - m.T)) > SYMMETRY_TOL:
                raise ConfigError(f"{name} must be symmetric")
            if np.max(np.abs(np.diag(m))) > 0:
                raise ConfigError(f"{name} must have zero diagonal")
        if not self.dt > 0:
            raise ConfigError(f"dt must be > 0, got {self.dt}")
        object.__setattr__(self, "omegas", omegas)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "h", h)

    @property
    def n_modes(self) -> int:
        return self.omegas.size

    @classmethod
    def free(cls, n_modes: int, omega: float = 1.0, dt: float = 1.0) -> "CrystalSpec":
        """Uncoupled crystal (pure phase rotation at frequency ``omega``)."""
        z = np.zeros((n_modes, n_modes))
        return cls(np.full(n_modes, omega), z, z.copy(), dt)


def build_hamiltonian_matrix(spec: CrystalSpec) -> np.ndarray:
    """Quadratic form H with Hamiltonian = (1/2) r^T H r (constants dropped).

    In the interleaved layout the 2x2 diagonal block of mode i is
    ``omega_i * I`` and the off-diagonal block (i, j) is
    ``[[g_ij, h_ij], [h_ij, g_ij]]``; this follows from expanding the
    mode operators as a = (x + i p) / sqrt(2).
    """
    n = spec.n_modes
    h_mat = np.zeros((2 * n, 2 * n))
    for i in range(n):
        h_mat[2 * i, 2 * i] = spec.omegas[i]
        h_mat[2 * i + 1, 2 * i + 1] = spec.omegas[i]
    for i in range(n):
        for j in range(i + 1, n):
            block = np.array(
                [[spec.g[i, j], spec.h[i, j]], [spec.h[i, j], spec.g[i, j]]]
            )
            h_mat[2 * i : 2 * i + 2, 2 * j : 2 * j + 2] = block
            h_mat[2 * j : 2 * j + 2, 2 * i : 2 * i + 2] = block
    return h_mat


def symplectic_from_hamiltonian(h_mat: np.ndarray, dt: float) -> np.ndarray:
    """Propagator exp(Omega H dt) of a quadratic Hamiltonian.

    Raises ``ValueError`` if ``h_mat`` is not symmetric and
    ``NumericalError`` if the result misses the symplecticity residual
    target of 1e-10 (which doubles as the correctness check for the
    underlying Pade/scaling-and-squaring exponential).
    """
    h_mat = _check_square(h_mat, "h_mat")
    if np.max(np.abs(h_mat - h_mat.T)) > SYMMETRY_TOL:
        raise ValueError("h_mat must be symmetric")
    n_modes = h_mat.shape[0] // 2
    s = expm(symplectic_form(n_modes) @ h_mat * dt)
    if symplecticity_residual(s) > SYMPLECTIC_TOL:
        raise NumericalError("matrix exponential lost symplecticity beyond 1e-10")
    return s


def crystal_symplectic(spec: CrystalSpec) -> np.ndarray:
    """Propagator of one crystal over its interaction time."""
    return symplectic_from_hamiltonian(build_hamiltonian_matrix(spec), spec.dt)


def symplecticity_residual(s: np.ndarray) -> float:
    """max |S^T Omega S - Omega|."""
    s = _check_square(s, "S")
    omega = symplectic_form(s.shape[0] // 2)
    return float(np.max(np.abs(s.T @ omega @ s - omega)))


def beamsplitter_symplectic(reflectivity: float, n_modes: int) -> np.ndarray:
    """Beam-splitter coupling of two N-mode pulses (4N x 4N, orthogonal).

    Partial transmission is required: reflectivity strictly inside (0, 1).
    """
    if not 0.0 < reflectivity < 1.0:
        raise ConfigError(
            f"reflectivity must lie strictly inside (0, 1), got {reflectivity}"
        )
    sr = np.sqrt(reflectivity)
    st = np.sqrt(1.0 - reflectivity)
    eye = np.eye(2 * n_modes)
    return np.block([[sr * eye, st * eye], [-st * eye, sr * eye]])


def apply_symplectic(
    displacement: np.ndarray, covariance: np.ndarray, s: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Evolve (r, Gamma) -> (S r, S Gamma S^T)."""
    r = np.asarray(displacement, dtype=float)
    cov = _check_square(covariance, "covariance")
    s = _check_square(s, "S")
    if r.shape[0] != s.shape[1] or cov.shape[0] != s.shape[1]:
        raise ValueError(
            f"dimension mismatch: S {s.shape}, r {r.shape}, cov {cov.shape}"
        )
    cov_out = s @ cov @ s.T
    return s @ r, 0.5 * (cov_out + cov_out.T)


def moore_penrose(a: np.ndarray, rcond: float = PINV_RCOND) -> np.ndarray:
    """SVD pseudo-inverse with relative singular-value cutoff (default 1e-12)."""
    return np.linalg.pinv(np.asarray(a, dtype=float), rcond=rcond)


def homodyne_kernel(sigma_b: np.ndarray) -> np.ndarray:
    """Conditioning kernel (Pi sigma_B Pi)^MP for x-quadrature homodyne.

    ``Pi`` projects onto the x-quadratures; the pseudo-inverse is computed
    on the x-block and re-embedded, so the kernel is symmetric and
    supported only on x rows/columns.
    """
    sigma_b = _check_square(sigma_b, "sigma_b")
    n_modes = sigma_b.shape[0] // 2
    idx = np.arange(0, 2 * n_modes, 2)
    block = sigma_b[np.ix_(idx, idx)]
    inv_block = moore_penrose(0.5 * (block + block.T))
    kernel = np.zeros_like(sigma_b)
    kernel[np.ix_(idx, idx)] = 0.5 * (inv_block + inv_block.T)
    return kernel


def general_dyne_kernel(sigma_b: np.ndarray, sigma_m: np.ndarray) -> np.ndarray:
    """Conditioning kernel (sigma_B + sigma_m)^-1 of a general-dyne measurement.

    Kept for completeness; only its homodyne limit (``sigma_m`` =
    diag(z^-2, z^2) per mode, z -> inf) is exercised by the reservoir,
    where it converges to :func:`homodyne_kernel`.
    """
    sigma_b = _check_square(sigma_b, "sigma_b")
    sigma_m = _check_square(sigma_m, "sigma_m")
    return np.linalg.inv(sigma_b + sigma_m)


def conditional_update(
    r_a: np.ndarray,
    sigma_a: np.ndarray,
    sigma_ab: np.ndarray,
    sigma_b: np.ndarray,
    innovation: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Condition subsystem A on an x-homodyne outcome of subsystem B.

    ``innovation`` is the pre-subtracted outcome residual (measured x minus
    mean x) embedded in a 2N vector with zeros at all p positions; a
    (2N, M) matrix of stacked innovations updates M displacement vectors
    in one call (the covariance update is outcome-independent).

    Returns ``(r_a', sigma_a')`` with
    ``r_a' = r_a + sigma_ab K innovation`` and
    ``sigma_a' = sigma_a - sigma_ab K sigma_ab^T``,
    where ``K`` is :func:`homodyne_kernel` of ``sigma_b``.
    """
    kernel = homodyne_kernel(sigma_b)
    return _conditional_update_with_kernel(r_a, sigma_a, sigma_ab, kernel, innovation)


def _conditional_update_with_kernel(r_a, sigma_a, sigma_ab, kernel, innovation):
    innovation = np.asarray(innovation, dtype=float)
    n_modes = kernel.shape[0] // 2
    p_idx = np.arange(1, 2 * n_modes, 2)
    if innovation.shape[0] != 2 * n_modes:
        raise ValueError("innovation must have 2N rows")
    if np.any(innovation[p_idx] != 0.0):
        raise ValueError("innovation must be zero at all p positions")
    gain = sigma_ab @ kernel
    r_new = np.asarray(r_a, dtype=float) + gain @ innovation
    sigma_new = sigma_a - gain @ sigma_ab.T
    sigma_new = 0.5 * (sigma_new + sigma_new.T)
    if np.min(np.linalg.eigvalsh(sigma_new)) < -CONDITIONAL_PSD_TOL:
        raise NumericalError("conditional covariance lost positivity beyond 1e-8")
    return r_new, sigma_new


def max_squeezing_db(s: np.ndarray) -> float:
    """Squeezing content of a symplectic matrix in decibels.

    The Bloch–Messiah singular values of a symplectic matrix come in pairs
    exp(+-r); the largest one gives 20 log10(s_max) dB, used to validate
    crystal propagators against the hardware squeezing bound.
    """
    s = _check_square(s, "S")
    s_max = np.linalg.svd(s, compute_uv=False)[0]
    return float(20.0 * np.log10(s_max))


def matrix_sqrt_psd(a: np.ndarray) -> np.ndarray:
    """Symmetric square root of a PSD matrix.

    Eigenvalues in [-1e-10, 0) are clipped to zero (round-trip covariances
    accumulate rounding); anything below -1e-10 raises ``NumericalError``.
    """
    a = _check_square(a, "A")
    if np.max(np.abs(a - a.T)) > SYMMETRY_TOL:
        raise ValueError("matrix_sqrt_psd requires a symmetric matrix")
    w, v = np.linalg.eigh(a)
    if w[0] < -PSD_TOL:
        raise NumericalError(f"matrix is not PSD within 1e-10 (min eig {w[0]:.3e})")
    root = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.T
    return 0.5 * (root + root.T)


def spectral_radius(a: np.ndarray) -> float:
    """max |eigenvalue|."""
    return float(np.max(np.abs(np.linalg.eigvals(_check_square(a, "A")))))
