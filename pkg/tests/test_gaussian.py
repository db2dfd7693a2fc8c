import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fock_oracle import FockOracle
from gqrc.errors import ConfigError, NumericalError
from gqrc.gaussian import (
    CrystalSpec,
    GaussianState,
    apply_symplectic,
    beamsplitter_symplectic,
    build_hamiltonian_matrix,
    conditional_update,
    crystal_symplectic,
    general_dyne_kernel,
    homodyne_kernel,
    matrix_sqrt_psd,
    max_squeezing_db,
    moore_penrose,
    spectral_radius,
    symplectic_form,
    symplectic_from_hamiltonian,
    symplecticity_residual,
    x_projector,
)
from gqrc.reservoir import draw_crystal


def random_psd(rng, dim, scale=1.0):
    a = rng.standard_normal((dim, dim))
    return np.eye(dim) + scale * (a @ a.T) / dim


# ---------------------------------------------------------------- hamiltonian


def test_hamiltonian_single_free_mode_is_identity():
    spec = CrystalSpec.free(1, omega=1.0)
    assert np.allclose(build_hamiltonian_matrix(spec), np.eye(2))


def test_hamiltonian_two_mode_squeezing_block():
    # i h (a1+ a2+ - a1 a2) expands to h (x1 p2 + p1 x2) in quadratures
    h = np.array([[0.0, 0.3], [0.3, 0.0]])
    spec = CrystalSpec(np.zeros(2), np.zeros((2, 2)), h)
    h_mat = build_hamiltonian_matrix(spec)
    assert np.allclose(h_mat[0:2, 2:4], [[0.0, 0.3], [0.3, 0.0]])
    assert np.allclose(h_mat[2:4, 0:2], [[0.0, 0.3], [0.3, 0.0]])
    assert np.allclose(h_mat[0:2, 0:2], 0.0)


def test_hamiltonian_always_symmetric():
    rng = np.random.default_rng(7)
    for _ in range(20):
        spec = draw_crystal(rng, int(rng.integers(1, 6)))
        h_mat = build_hamiltonian_matrix(spec)
        assert np.array_equal(h_mat, h_mat.T)


def test_hamiltonian_dimension_mismatch_rejected():
    with pytest.raises(ConfigError):
        CrystalSpec(np.ones(3), np.zeros((2, 2)), np.zeros((2, 2)))
    with pytest.raises(ConfigError):
        CrystalSpec(np.ones(2), np.eye(2), np.zeros((2, 2)))  # nonzero diagonal


def test_propagator_matches_fock_oracle_covariance():
    # full crystal (omega, g, h all active): vacuum covariance S S^T must
    # match the number-basis evolution
    omegas = np.array([0.9, 1.1])
    g = np.array([[0.0, 0.15], [0.15, 0.0]])
    h = np.array([[0.0, 0.25], [0.25, 0.0]])
    spec = CrystalSpec(omegas, g, h, dt=0.7)
    s = crystal_symplectic(spec)
    oracle = FockOracle(2, 18)
    psi = oracle.evolve_vacuum(omegas, g, h, 0.7)
    _, sigma_fock = oracle.quadrature_moments(psi)
    assert np.max(np.abs(sigma_fock - s @ s.T)) < 1e-6


def test_propagator_matches_fock_oracle_displacement():
    # coherent-state first moments transform as r -> S r
    spec = CrystalSpec(np.array([1.0]), np.zeros((1, 1)), np.zeros((1, 1)), dt=np.pi / 2)
    s = crystal_symplectic(spec)
    oracle = FockOracle(1, 30)
    psi0 = oracle.displaced_vacuum([0.7 + 0.2j])
    psi1 = oracle.evolve_state(psi0, [1.0], np.zeros((1, 1)), np.zeros((1, 1)), np.pi / 2)
    r0, _ = oracle.quadrature_moments(psi0)
    r1, _ = oracle.quadrature_moments(psi1)
    assert np.allclose(r1, s @ r0, atol=1e-8)


# ---------------------------------------------------------------- symplectics


def test_symplectic_zero_hamiltonian_is_identity():
    assert np.allclose(symplectic_from_hamiltonian(np.zeros((4, 4)), 1.0), np.eye(4))


def test_symplectic_single_mode_rotation():
    s = symplectic_from_hamiltonian(np.eye(2), np.pi / 2)
    assert np.allclose(s, [[0.0, 1.0], [-1.0, 0.0]], atol=1e-12)


def test_symplectic_two_mode_squeezer_entries():
    h = np.array([[0.0, 0.3], [0.3, 0.0]])
    spec = CrystalSpec(np.zeros(2), np.zeros((2, 2)), h, dt=1.0)
    s = crystal_symplectic(spec)
    ch, sh = np.cosh(0.3), np.sinh(0.3)
    expected = np.array(
        [[ch, 0, sh, 0], [0, ch, 0, -sh], [sh, 0, ch, 0], [0, -sh, 0, ch]]
    )
    assert np.allclose(s, expected, atol=1e-12)


def test_symplectic_rejects_non_symmetric():
    with pytest.raises(ValueError):
        symplectic_from_hamiltonian(np.array([[0.0, 1.0], [0.0, 0.0]]), 1.0)


def test_symplecticity_and_spectral_radius_over_random_specs():
    # module invariant: 1000 random crystals stay symplectic to 1e-10 with
    # unit spectral radius to 1e-8
    rng = np.random.default_rng(42)
    worst_residual = 0.0
    worst_radius = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 5))
        spec = draw_crystal(rng, n, dt=float(rng.uniform(0.2, 1.5)))
        s = crystal_symplectic(spec)
        worst_residual = max(worst_residual, symplecticity_residual(s))
        worst_radius = max(worst_radius, abs(spectral_radius(s) - 1.0))
    assert worst_residual <= 1e-10
    assert worst_radius <= 1e-8


# --------------------------------------------------------------- beamsplitter


def test_beamsplitter_limits_and_entries():
    bs = beamsplitter_symplectic(1.0 - 1e-12, 2)
    assert np.max(np.abs(bs - np.eye(8))) < 1e-6
    bs_half = beamsplitter_symplectic(0.5, 1)
    nonzero = np.abs(bs_half[np.abs(bs_half) > 0])
    assert np.allclose(nonzero, 1 / np.sqrt(2))
    for bad in (0.0, 1.0, -0.2, 1.3):
        with pytest.raises(ConfigError):
            beamsplitter_symplectic(bad, 2)


@given(st.floats(min_value=1e-6, max_value=1 - 1e-6), st.integers(min_value=1, max_value=4))
def test_beamsplitter_orthogonal_and_symplectic(reflectivity, n_modes):
    bs = beamsplitter_symplectic(reflectivity, n_modes)
    assert np.max(np.abs(bs.T @ bs - np.eye(4 * n_modes))) < 1e-12
    assert symplecticity_residual(bs) < 1e-12


# ----------------------------------------------------------- apply_symplectic


def test_apply_symplectic_identity_and_vacuum():
    rng = np.random.default_rng(3)
    r = rng.standard_normal(4)
    cov = random_psd(rng, 4)
    r2, cov2 = apply_symplectic(r, cov, np.eye(4))
    assert np.allclose(r2, r) and np.allclose(cov2, cov)

    spec = draw_crystal(rng, 2)
    s = crystal_symplectic(spec)
    _, cov_out = apply_symplectic(np.zeros(4), np.eye(4), s)
    assert np.allclose(cov_out, s @ s.T)

    bs = beamsplitter_symplectic(0.5, 1)
    _, cov_bs = apply_symplectic(np.zeros(4), np.eye(4), bs)
    assert np.allclose(cov_bs, np.eye(4), atol=1e-14)


def test_apply_symplectic_dimension_mismatch():
    with pytest.raises(ValueError):
        apply_symplectic(np.zeros(2), np.eye(2), np.eye(4))


@settings(max_examples=40)
@given(st.integers(min_value=1, max_value=3), st.integers(min_value=0, max_value=10**6))
def test_apply_symplectic_preserves_psd(n_modes, seed):
    rng = np.random.default_rng(seed)
    cov = random_psd(rng, 2 * n_modes, scale=2.0)
    s = crystal_symplectic(draw_crystal(rng, n_modes))
    _, cov_out = apply_symplectic(np.zeros(2 * n_modes), cov, s)
    assert np.min(np.linalg.eigvalsh(cov_out)) >= -1e-9


# ------------------------------------------------------------ homodyne kernel


def test_homodyne_kernel_identity_gives_projector():
    assert np.allclose(homodyne_kernel(np.eye(4)), x_projector(2))


def test_homodyne_kernel_scalar_case():
    sigma = np.diag([4.0, 1.0, 1.0, 1.0])
    kernel = homodyne_kernel(sigma)
    expected = np.zeros((4, 4))
    expected[0, 0] = 0.25
    expected[2, 2] = 1.0
    assert np.allclose(kernel, expected)


@settings(max_examples=40)
@given(st.integers(min_value=1, max_value=4), st.integers(min_value=0, max_value=10**6))
def test_homodyne_kernel_pseudoinverse_identities(n_modes, seed):
    rng = np.random.default_rng(seed)
    sigma = random_psd(rng, 2 * n_modes, scale=1.5)
    kernel = homodyne_kernel(sigma)
    pi = x_projector(n_modes)
    proj = pi @ sigma @ pi
    assert np.max(np.abs(kernel @ pi - kernel)) < 1e-12
    assert np.max(np.abs(pi @ kernel - kernel)) < 1e-12
    assert np.max(np.abs(kernel @ proj @ kernel - kernel)) < 1e-8
    assert np.max(np.abs(proj @ kernel @ proj - proj)) < 1e-8


def test_general_dyne_kernel_homodyne_limit():
    rng = np.random.default_rng(11)
    sigma = random_psd(rng, 4)
    z = 1e7
    sigma_m = np.kron(np.eye(2), np.diag([z**-2, z**2]))
    limit = general_dyne_kernel(sigma, sigma_m)
    assert np.max(np.abs(limit - homodyne_kernel(sigma))) < 1e-5


# --------------------------------------------------------- conditional update


def test_conditional_update_uncorrelated_subsystems():
    rng = np.random.default_rng(5)
    sigma_a = random_psd(rng, 4)
    sigma_b = random_psd(rng, 4)
    r_a = rng.standard_normal(4)
    innovation = np.array([0.3, 0.0, -0.2, 0.0])
    r2, sigma2 = conditional_update(r_a, sigma_a, np.zeros((4, 4)), sigma_b, innovation)
    assert np.allclose(r2, r_a) and np.allclose(sigma2, sigma_a)


def test_conditional_update_zero_innovation_still_reduces_covariance():
    rng = np.random.default_rng(6)
    sigma_a = random_psd(rng, 2)
    sigma_b = random_psd(rng, 2)
    sigma_ab = 0.2 * rng.standard_normal((2, 2))
    r_a = rng.standard_normal(2)
    r2, sigma2 = conditional_update(r_a, sigma_a, sigma_ab, sigma_b, np.zeros(2))
    kernel = homodyne_kernel(sigma_b)
    assert np.allclose(r2, r_a)
    assert np.allclose(sigma2, sigma_a - sigma_ab @ kernel @ sigma_ab.T)


def test_conditional_update_hand_fixture():
    # one reservoir mode conditioned on one measured mode; exact values
    # computed by hand with rational arithmetic
    sigma_a = np.array([[2.0, 0.5], [0.5, 1.0]])
    sigma_ab = np.array([[0.3, 0.1], [-0.2, 0.4]])
    sigma_b = np.array([[1.25, 0.25], [0.25, 1.5]])
    r_a = np.array([0.1, -0.3])
    innovation = np.array([0.7, 0.0])
    r2, sigma2 = conditional_update(r_a, sigma_a, sigma_ab, sigma_b, innovation)
    assert np.allclose(r2, [67.0 / 250.0, -103.0 / 250.0], atol=1e-14)
    assert np.allclose(
        sigma2,
        [[241.0 / 125.0, 137.0 / 250.0], [137.0 / 250.0, 121.0 / 125.0]],
        atol=1e-14,
    )


def test_conditional_update_rejects_p_innovation():
    with pytest.raises(ValueError):
        conditional_update(np.zeros(2), np.eye(2), 0.1 * np.eye(2), np.eye(2), np.array([0.0, 0.5]))


@settings(max_examples=40)
@given(st.integers(min_value=1, max_value=3), st.integers(min_value=0, max_value=10**6))
def test_conditional_update_never_increases_covariance(n_modes, seed):
    rng = np.random.default_rng(seed)
    dim = 2 * n_modes
    gamma = random_psd(rng, 2 * dim, scale=1.0)
    sigma_a, sigma_b = gamma[:dim, :dim], gamma[dim:, dim:]
    sigma_ab = gamma[:dim, dim:]
    _, sigma2 = conditional_update(np.zeros(dim), sigma_a, sigma_ab, sigma_b, np.zeros(dim))
    assert np.min(np.linalg.eigvalsh(sigma_a - sigma2)) >= -1e-9


def test_conditional_update_batched_matches_per_pulse():
    rng = np.random.default_rng(8)
    dim = 4
    gamma = random_psd(rng, 2 * dim)
    sigma_a, sigma_b = gamma[:dim, :dim], gamma[dim:, dim:]
    sigma_ab = gamma[:dim, dim:]
    r = rng.standard_normal((dim, 5))
    innovations = rng.standard_normal((dim, 5))
    innovations[1::2] = 0.0
    r_batch, sigma_batch = conditional_update(r, sigma_a, sigma_ab, sigma_b, innovations)
    for m in range(5):
        r_m, sigma_m = conditional_update(r[:, m], sigma_a, sigma_ab, sigma_b, innovations[:, m])
        assert np.allclose(r_batch[:, m], r_m, atol=1e-13)
        assert np.allclose(sigma_batch, sigma_m)


# ------------------------------------------------------------------ squeezing


def test_max_squeezing_db_values():
    assert abs(max_squeezing_db(np.eye(4))) < 1e-12
    bs = beamsplitter_symplectic(0.3, 2)
    assert abs(max_squeezing_db(bs)) < 1e-10
    s = np.diag([np.e, 1 / np.e])
    assert abs(max_squeezing_db(s) - 20.0 * np.log10(np.e)) < 1e-10
    s17 = np.diag([np.exp(1.7), np.exp(-1.7)])
    db = max_squeezing_db(s17)
    assert abs(db - 14.77) < 0.02 * 14.77  # ~15 dB hardware bound


# ------------------------------------------------------------- matrix helpers


def test_moore_penrose_identities():
    assert np.allclose(moore_penrose(np.eye(3)), np.eye(3))
    rng = np.random.default_rng(9)
    for shape in [(5, 3), (3, 5), (4, 4)]:
        a = rng.standard_normal(shape)
        if shape == (4, 4):
            a[:, 3] = a[:, 0]  # make it rank deficient
        ap = moore_penrose(a)
        assert np.max(np.abs(a @ ap @ a - a)) < 1e-8
        assert np.max(np.abs(ap @ a @ ap - ap)) < 1e-8
        assert np.max(np.abs((a @ ap).T - a @ ap)) < 1e-8
        assert np.max(np.abs((ap @ a).T - ap @ a)) < 1e-8


def test_matrix_sqrt_psd():
    assert np.allclose(matrix_sqrt_psd(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]))
    rng = np.random.default_rng(10)
    a = random_psd(rng, 6)
    root = matrix_sqrt_psd(a)
    assert np.max(np.abs(root @ root - a)) < 1e-8
    # small negatives are clipped, genuine negatives rejected
    assert np.allclose(matrix_sqrt_psd(np.diag([1.0, -5e-11])), np.diag([1.0, 0.0]))
    with pytest.raises(NumericalError):
        matrix_sqrt_psd(np.diag([1.0, -1e-6]))


def test_spectral_radius_rotation_generator():
    assert abs(spectral_radius(np.array([[0.0, 1.0], [-1.0, 0.0]])) - 1.0) < 1e-12


# ------------------------------------------------------------ state and layout


def test_symplectic_form_blocks():
    omega = symplectic_form(2)
    assert np.allclose(omega[:2, :2], [[0, 1], [-1, 0]])
    assert np.allclose(omega, -omega.T)


def test_gaussian_state_invariants():
    vac = GaussianState.vacuum(3)
    assert vac.n_modes == 3
    assert np.allclose(vac.covariance, np.eye(6))
    with pytest.raises(NumericalError):
        GaussianState(np.zeros(2), np.array([[1.0, 0.5], [0.2, 1.0]]))
    with pytest.raises(NumericalError):
        GaussianState(np.zeros(2), np.array([[1.0, 2.0], [2.0, 1.0]]))
    with pytest.raises(ValueError):
        GaussianState(np.zeros(3), np.eye(3))
