import numpy as np
import pytest

from conftest import smooth_random_tensor, weighted_dot_full, weighted_norm_full
from ridgeflow.errors import NumericalError
from ridgeflow.grid import ProductGrid, make_periodic_grid
from ridgeflow.tt import (
    FttTensor,
    advect_linear_rhs,
    contract_full,
    ftt_from_full,
    hadamard,
    inner_product,
    left_orthogonalize,
    linear_combine,
    linear_form_tensor,
    norm,
    rank_counts_above,
    singular_values,
    spatial_gradient,
    truncate,
)


def gaussian_2d(grid):
    """Samples of exp(-x1^2 - x2^2/10) on a 2D grid (rank one)."""
    x = grid.axes[0].nodes
    y = grid.axes[1].nodes
    return np.exp(-(x[:, None] ** 2)) * np.exp(-(y[None, :] ** 2) / 10.0)


def rotated_gaussian_2d(grid, eps):
    """exp(-(c x1 + s x2)^2 - (-s x1 + c x2)^2 / 10), clockwise angle eps."""
    c, s = np.cos(eps), np.sin(eps)
    x = grid.axes[0].nodes[:, None]
    y = grid.axes[1].nodes[None, :]
    u1 = c * x - s * y
    u2 = s * x + c * y
    return np.exp(-(u1**2)) * np.exp(-(u2**2) / 10.0)


# ---------------------------------------------------------------- from_full


def test_from_full_separable_gaussian_rank_one():
    grid = ProductGrid.cube(-10.0, 10.0, 200, 2)
    v = ftt_from_full(gaussian_2d(grid), grid, 1e-10)
    assert v.ranks == (1, 1, 1)
    full = contract_full(v)
    err = weighted_norm_full(full - gaussian_2d(grid), grid)
    assert err <= 1e-10 * weighted_norm_full(gaussian_2d(grid), grid)


def test_from_full_zero_array(grid2d):
    v = ftt_from_full(np.zeros(grid2d.shape), grid2d, 1e-8)
    assert v.ranks == (1, 1, 1)
    assert norm(v) == 0.0


def test_from_full_random_separable_sum(rng, grid3d):
    # explicit rank-3 sum of separable functions, frozen as the oracle
    mats = [rng.standard_normal((3, g.n)) for g in grid3d.axes]
    full = np.einsum("ki,kj,kl->ijl", *mats)
    v = ftt_from_full(full, grid3d, 1e-10)
    assert v.ranks == (1, 3, 3, 1)
    err = weighted_norm_full(contract_full(v) - full, grid3d)
    assert err <= 1e-10 * weighted_norm_full(full, grid3d)


def test_from_full_guards(grid2d):
    bad = np.zeros(grid2d.shape)
    bad[0, 0] = np.nan
    with pytest.raises(NumericalError, match="nonfinite-input"):
        ftt_from_full(bad, grid2d, 1e-8)


# ----------------------------------------------------------- contract_full


def test_contract_rank_one_outer_product(grid2d, rng):
    f0 = rng.standard_normal(grid2d.axes[0].n)
    f1 = rng.standard_normal(grid2d.axes[1].n)
    v = FttTensor.from_univariate(grid2d, [f0, f1])
    assert np.allclose(contract_full(v), np.outer(f0, f1))


def test_roundtrip_from_full(rng, grid3d):
    u = FttTensor.random(grid3d, (2, 3), rng)
    full = contract_full(u)
    v = ftt_from_full(full, grid3d, 1e-12)
    err = weighted_norm_full(contract_full(v) - full, grid3d)
    assert err <= 1e-11 * weighted_norm_full(full, grid3d)


# ------------------------------------------------------------ linear algebra


def test_linear_combine_block_ranks(rng, grid3d):
    u = FttTensor.random(grid3d, (1, 2), rng)
    v = FttTensor.random(grid3d, (1, 2), rng)
    s = linear_combine([(1.0, u), (1.0, v)])
    assert s.ranks == (1, 2, 4, 1)


def test_linear_combine_matches_full_sum(rng, grid3d):
    terms = [(rng.standard_normal(), FttTensor.random(grid3d, (2, 2), rng)) for _ in range(3)]
    s = linear_combine(terms)
    ref = sum(c * contract_full(t) for c, t in terms)
    err = weighted_norm_full(contract_full(s) - ref, grid3d)
    assert err <= 1e-12 * max(weighted_norm_full(ref, grid3d), 1.0)


def test_linear_combine_cancellation(rng, grid2d):
    u = FttTensor.random(grid2d, (3,), rng)
    z = linear_combine([(1.0, u), (-1.0, u)])
    res = truncate(z, 1e-10)
    assert norm(res.tensor) <= 1e-10 * norm(u)


def test_contract_linearity(rng, grid2d):
    u = FttTensor.random(grid2d, (2,), rng)
    v = FttTensor.random(grid2d, (3,), rng)
    s = linear_combine([(1.0, u), (1.0, v)])
    assert np.allclose(contract_full(s), contract_full(u) + contract_full(v), atol=1e-12)


def test_hadamard_identity_and_ranks(rng, grid2d):
    u = FttTensor.random(grid2d, (2,), rng)
    ones = FttTensor.from_univariate(grid2d, [np.ones(g.n) for g in grid2d.axes])
    p = hadamard(u, ones)
    assert np.max(np.abs(contract_full(p) - contract_full(u))) <= 1e-14
    v = FttTensor.random(grid2d, (3,), rng)
    assert hadamard(u, v).ranks == (1, 6, 1)


def test_hadamard_matches_pointwise_oracle(rng, grid3d):
    u = FttTensor.random(grid3d, (2, 2), rng)
    v = FttTensor.random(grid3d, (2, 3), rng)
    p = hadamard(u, v)
    ref = contract_full(u) * contract_full(v)
    err = weighted_norm_full(contract_full(p) - ref, grid3d)
    assert err <= 1e-12 * weighted_norm_full(ref, grid3d)


def test_inner_product_orthogonal_factors(grid2d):
    x = grid2d.axes[0].nodes
    L = grid2d.axes[0].length
    s = FttTensor.from_univariate(grid2d, [np.sin(2 * np.pi * x / L), np.ones(grid2d.axes[1].n)])
    c = FttTensor.from_univariate(grid2d, [np.cos(2 * np.pi * x / L), np.ones(grid2d.axes[1].n)])
    assert abs(inner_product(s, c)) <= 1e-12


def test_inner_product_matches_full_oracle(rng, grid3d):
    u = FttTensor.random(grid3d, (2, 3), rng)
    v = FttTensor.random(grid3d, (3, 2), rng)
    ref = weighted_dot_full(contract_full(u), contract_full(v), grid3d)
    assert inner_product(u, v) == pytest.approx(ref, rel=1e-12)


def test_grid_mismatch_raises(rng, grid2d):
    other = ProductGrid.cube(-10.0, 10.0, 32, 2)
    u = FttTensor.random(grid2d, (2,), rng)
    v = FttTensor.random(other, (2,), rng)
    with pytest.raises(ValueError, match="grid-mismatch"):
        inner_product(u, v)


# -------------------------------------------------------- orthogonalization


def test_left_orthogonalize_gram_identity(rng, grid3d):
    u = FttTensor.random(grid3d, (3, 4), rng)
    q = left_orthogonalize(u)
    for i in range(u.d - 1):
        core = q.cores[i] * grid3d.axes[i].sqrt_weights[None, :, None]
        mat = core.reshape(-1, core.shape[2])
        assert np.allclose(mat.T @ mat, np.eye(mat.shape[1]), atol=1e-12)


def test_left_orthogonalize_preserves_function(rng, grid2d):
    u = FttTensor.random(grid2d, (4,), rng)
    q = left_orthogonalize(u)
    assert np.allclose(contract_full(q), contract_full(u), atol=1e-12)
    assert norm(q) == pytest.approx(norm(u), rel=1e-13)


def test_left_orthogonalize_idempotent_up_to_sign(rng, grid2d):
    u = left_orthogonalize(FttTensor.random(grid2d, (3,), rng))
    q = left_orthogonalize(u)
    # same function; cores may differ by column signs only
    assert np.allclose(contract_full(q), contract_full(u), atol=1e-12)
    ref = np.abs(u.cores[0])
    assert np.allclose(np.abs(q.cores[0]), ref, atol=1e-12)


# ----------------------------------------------------------------- truncate


@pytest.mark.parametrize("delta", [1e-4, 1e-6, 1e-8])
def test_truncation_contract_oracle(rng, delta):
    grid = ProductGrid.cube(-4.0, 4.0, 32, 3)
    for _ in range(5):
        u = FttTensor.random(grid, (6, 6), rng)
        res = truncate(u, delta)
        diff = contract_full(res.tensor) - contract_full(u)
        assert weighted_norm_full(diff, grid) <= delta * norm(u) * (1 + 1e-12)


def test_truncate_rank_one_cost_is_d_minus_one(grid3d):
    factors = [np.exp(-g.nodes**2) for g in grid3d.axes]
    v = FttTensor.from_univariate(grid3d, factors)
    v = v.scale(1.0 / norm(v))
    res = truncate(v, 1e-10)
    assert res.cost == pytest.approx(grid3d.d - 1, rel=1e-12)
    for s in res.bond_sigmas:
        assert s.size == 1
        assert s[0] == pytest.approx(1.0, rel=1e-12)


def test_truncate_cost_equals_sigma_sum(rng, grid3d):
    u = FttTensor.random(grid3d, (4, 5), rng)
    res = truncate(u, 1e-8)
    assert res.cost == pytest.approx(sum(s.sum() for s in res.bond_sigmas), rel=1e-12)
    # independent recomputation through singular_values
    recomputed = sum(singular_values(res.tensor, b).sum() for b in range(1, grid3d.d))
    assert res.cost == pytest.approx(recomputed, rel=1e-10)


def test_truncate_gradient_traceless(rng, grid3d):
    u = smooth_random_tensor(grid3d, (3, 3), rng)
    res = truncate(u, 1e-8, want_gradient=True)
    d = res.gradient_factor
    assert d is not None
    assert abs(np.trace(d)) <= 1e-12 * (np.linalg.norm(d) + 1)


def test_truncate_zero_tensor_gradient_rejected(grid2d):
    z = FttTensor.zeros(grid2d)
    with pytest.raises(NumericalError, match="zero-tensor-gradient"):
        truncate(z, 1e-8, want_gradient=True)


def test_rotated_gaussian_rank_grows():
    grid = ProductGrid.cube(-10.0, 10.0, 200, 2)
    v = ftt_from_full(rotated_gaussian_2d(grid, np.pi / 4), grid, 1e-6)
    res = truncate(v, 1e-6)
    assert res.tensor.ranks[1] > 1


# --------------------------------------------------------- singular values


def test_singular_values_rank_one(grid3d):
    factors = [np.exp(-g.nodes**2 / 3.0) for g in grid3d.axes]
    v = FttTensor.from_univariate(grid3d, factors)
    for b in range(1, grid3d.d):
        s = singular_values(v, b)
        assert s.size == 1
        assert s[0] == pytest.approx(norm(v), rel=1e-12)


def test_singular_values_match_gram_oracle(rng):
    grid = ProductGrid.cube(-3.0, 5.0, 40, 2)
    u = FttTensor.random(grid, (4,), rng)
    s = singular_values(u, 1)
    full = contract_full(u)
    w0 = grid.axes[0].weights
    w1 = grid.axes[1].weights
    scaled = np.sqrt(w0)[:, None] * full * np.sqrt(w1)[None, :]
    ref = np.linalg.svd(scaled, compute_uv=False)
    assert np.allclose(np.sort(s)[::-1], ref[: s.size], rtol=1e-10, atol=1e-12)


def test_singular_values_descending_and_translation_invariant(rng, grid3d):
    u = FttTensor.random(grid3d, (3, 4), rng)
    base = [singular_values(u, b) for b in range(1, grid3d.d)]
    for s in base:
        assert np.all(np.diff(s) <= 1e-12)
    shifted = u.shift_nodes([5, 11, 3])
    for b, ref in zip(range(1, grid3d.d), base):
        s = singular_values(shifted, b)
        assert np.allclose(s, ref, rtol=1e-10, atol=1e-12)


def test_translation_invariance_of_truncation_ranks(rng, grid3d):
    u = FttTensor.random(grid3d, (4, 4), rng)
    r0 = truncate(u, 1e-6)
    r1 = truncate(u.shift_nodes([7, 2, 9]), 1e-6)
    assert r0.tensor.ranks == r1.tensor.ranks
    for a, b in zip(r0.bond_sigmas, r1.bond_sigmas):
        assert np.allclose(a, b, rtol=1e-10, atol=1e-12)


def test_bad_bond_index(rng, grid2d):
    u = FttTensor.random(grid2d, (2,), rng)
    with pytest.raises(ValueError, match="bad-bond-index"):
        singular_values(u, 2)


# ------------------------------------------------------------------ gradient


def test_spatial_gradient_constant_is_zero(grid3d):
    c = FttTensor.from_univariate(grid3d, [np.ones(g.n) for g in grid3d.axes])
    for comp in spatial_gradient(c):
        assert norm(comp) <= 1e-11


def test_spatial_gradient_ranks_unchanged(rng, grid3d):
    u = FttTensor.random(grid3d, (3, 2), rng)
    for comp in spatial_gradient(u):
        assert comp.ranks == u.ranks


def test_spatial_gradient_gaussian_analytic():
    grid = ProductGrid.cube(-10.0, 10.0, 200, 2)
    x = grid.axes[0].nodes
    y = grid.axes[1].nodes
    v = FttTensor.from_univariate(grid, [np.exp(-(x**2)), np.exp(-(y**2) / 10.0)])
    g1 = spatial_gradient(v)[0]
    ref = -2 * x[:, None] * np.exp(-(x[:, None] ** 2)) * np.exp(-(y[None, :] ** 2) / 10.0)
    assert np.max(np.abs(contract_full(g1) - ref)) <= 1e-8


# -------------------------------------------------------- flow RHS assembly


def test_linear_form_tensor_exact(rng):
    grid = ProductGrid.cube(-2.0, 2.0, 16, 3)
    coeffs = rng.standard_normal(3)
    lf = linear_form_tensor(grid, coeffs)
    assert lf.ranks == (1, 2, 2, 1)
    x = [g.nodes for g in grid.axes]
    ref = (
        coeffs[0] * x[0][:, None, None]
        + coeffs[1] * x[1][None, :, None]
        + coeffs[2] * x[2][None, None, :]
    )
    assert np.allclose(contract_full(lf), ref, atol=1e-13)


def test_advect_linear_rhs_matches_dense_oracle(rng):
    grid = ProductGrid.cube(-6.0, 6.0, 48, 2)
    u = smooth_random_tensor(grid, (3,), rng)
    gen = rng.standard_normal((2, 2))
    rhs = advect_linear_rhs(u, gen, 1e-12)
    full = contract_full(u)
    d0 = grid.axes[0].diff_apply(full, axis=0)
    d1 = grid.axes[1].diff_apply(full, axis=1)
    x = grid.axes[0].nodes[:, None]
    y = grid.axes[1].nodes[None, :]
    ref = (gen[0, 0] * x + gen[0, 1] * y) * d0 + (gen[1, 0] * x + gen[1, 1] * y) * d1
    err = weighted_norm_full(contract_full(rhs) - ref, grid)
    assert err <= 1e-10 * weighted_norm_full(ref, grid)


# ------------------------------------------------------------- rank counting


def test_rank_counts_above(rng, grid2d):
    factors = [np.exp(-g.nodes**2) for g in grid2d.axes]
    v = FttTensor.from_univariate(grid2d, factors)
    counts = rank_counts_above(v, 1e-6)
    assert counts == [1]


# ------------------------------------- finite-difference gradient validation


def ridge_gaussian_samples(grid, amat, theta=0.4):
    """Analytic samples of g(R A x) for an anisotropic 2D Gaussian g."""
    c, s = np.cos(theta), np.sin(theta)
    rot = np.array([[c, -s], [s, c]])
    m = rot @ amat
    x = grid.axes[0].nodes[:, None]
    y = grid.axes[1].nodes[None, :]
    u1 = m[0, 0] * x + m[0, 1] * y
    u2 = m[1, 0] * x + m[1, 1] * y
    return np.exp(-(u1**2) - (u2**2) / 7.0)


def test_gradient_matches_finite_difference(rng):
    import scipy.linalg

    grid = ProductGrid.cube(-9.0, 9.0, 96, 2)
    delta = 1e-10

    def cost(amat):
        vals = ridge_gaussian_samples(grid, amat)
        v = ftt_from_full(vals, grid, delta)
        return truncate(v, delta).cost

    v0 = ftt_from_full(ridge_gaussian_samples(grid, np.eye(2)), grid, delta)
    dmat = truncate(v0, delta, want_gradient=True).gradient_factor

    h = 1e-4
    for _ in range(5):
        w = rng.standard_normal((2, 2))
        w -= np.trace(w) / 2 * np.eye(2)
        fd = (cost(scipy.linalg.expm(h * w)) - cost(scipy.linalg.expm(-h * w))) / (2 * h)
        pairing = float(np.sum(dmat * w))
        assert fd == pytest.approx(pairing, rel=1e-3)
