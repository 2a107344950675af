import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from vepflow import operators as ops
from vepflow.fields import Grid, deviatoric_part, inner_product_l2, lp_norm
from vepflow.scenarios import random_divfree


def band_limited(grid, shape, seed, kmax=None):
    """Random real field with modes |m_i| <= kmax (default n/3 - 1)."""
    rng = np.random.Generator(np.random.Philox(seed))
    kmax = grid.n // 3 - 1 if kmax is None else kmax
    f = rng.standard_normal(shape + grid.shape)
    ws = ops.workspace(grid)
    axes = [np.fft.fftfreq(grid.n, 1.0 / grid.n)] * (grid.dim - 1) + [np.fft.rfftfreq(grid.n, 1.0 / grid.n)]
    mesh = np.meshgrid(*axes, indexing="ij")
    keep = np.all([np.abs(m) <= kmax for m in mesh], axis=0)
    keep.flat[0] = False
    return ws.inv(ws.fwd(f) * keep)


@pytest.fixture(params=[2, 3])
def grid(request):
    return Grid(request.param, 16 if request.param == 3 else 32)


class TestGradient:
    def test_constant(self, grid):
        assert np.max(np.abs(ops.gradient(grid, np.full(grid.shape, 2.0)))) < 1e-13

    def test_sine(self, grid):
        x = grid.coords()[0]
        G = ops.gradient(grid, np.sin(x))
        np.testing.assert_allclose(G[0], np.cos(x), atol=1e-12)
        assert np.max(np.abs(G[1:])) < 1e-12

    def test_layout(self):
        g = Grid(2, 16)
        x, y = g.coords()
        v = np.stack([np.sin(y), np.zeros_like(y)])
        G = ops.gradient(g, v)
        np.testing.assert_allclose(G[0, 1], np.cos(y), atol=1e-12)
        assert np.max(np.abs(G[0, 0])) < 1e-12

    def test_product_rule_against_analytic(self):
        g = Grid(2, 32)
        x, y = g.coords()
        a, b = np.sin(x + 2 * y), np.cos(3 * x - y)
        exact = np.cos(x + 2 * y) * b - 3 * a * np.sin(3 * x - y)
        np.testing.assert_allclose(ops.gradient(g, a * b)[0], exact, atol=1e-12)


class TestSymSkew:
    def test_parts(self):
        G = np.zeros((3, 3))
        G[0, 1] = 1.0
        s, k = ops.sym_part(G), ops.skew_part(G)
        assert s[0, 1] == s[1, 0] == 0.5
        assert k[0, 1] == 0.5 and k[1, 0] == -0.5
        assert np.all(s + k == G)

    def test_orthogonal(self):
        G = np.random.Generator(np.random.Philox(3)).standard_normal((3, 3, 100))
        assert np.max(np.abs(np.sum(ops.sym_part(G) * ops.skew_part(G), axis=(0, 1)))) < 1e-15

    def test_symmetric_input(self):
        S = deviatoric_part(np.random.Generator(np.random.Philox(3)).standard_normal((3, 3)))
        assert np.all(ops.skew_part(S) == 0)


class TestDivergence:
    def test_constant(self, grid):
        S = np.ones((grid.dim, grid.dim) + grid.shape)
        assert np.max(np.abs(ops.divergence_tensor(grid, S))) < 1e-13

    def test_diag_mode(self, grid):
        x = grid.coords()[0]
        S = grid.zeros(grid.dim, grid.dim)
        S[0, 0], S[1, 1] = np.sin(x), -np.sin(x)
        d = ops.divergence_tensor(grid, S)
        np.testing.assert_allclose(d[0], np.cos(x), atol=1e-12)
        assert np.max(np.abs(d[1:])) < 1e-12

    def test_adjoint(self, grid):
        S = band_limited(grid, (grid.dim, grid.dim), 5)
        u = random_divfree(grid, 6, decay=1.5)
        lhs = inner_product_l2(grid, ops.divergence_tensor(grid, S), u)
        rhs = -inner_product_l2(grid, S, ops.gradient(grid, u))
        assert abs(lhs - rhs) <= 1e-11 * max(1.0, abs(lhs))

    def test_grad_div_duality(self, grid):
        f = band_limited(grid, (), 7)
        G = band_limited(grid, (grid.dim,), 8)
        a = inner_product_l2(grid, ops.gradient(grid, f), G)
        b = -inner_product_l2(grid, f, ops.divergence(grid, G))
        assert abs(a - b) <= 1e-11 * max(1.0, abs(a))


class TestLaplacian:
    def test_constant_and_sine(self, grid):
        x = grid.coords()[0]
        assert np.max(np.abs(ops.laplacian(grid, np.ones(grid.shape)))) < 1e-13
        np.testing.assert_allclose(ops.laplacian(grid, np.sin(x)), -np.sin(x), atol=1e-12)

    def test_div_grad(self, grid):
        f = np.random.Generator(np.random.Philox(9)).standard_normal(grid.shape)
        a = ops.laplacian(grid, f)
        b = ops.divergence(grid, ops.gradient(grid, f))
        assert np.max(np.abs(a - b)) <= 1e-12 * np.max(np.abs(a))

    def test_viscous_identity(self, grid):
        # div(2 sym grad v) = lap v for divergence-free v
        v = random_divfree(grid, 4)
        a = ops.divergence_tensor(grid, 2 * ops.sym_part(ops.gradient(grid, v)))
        np.testing.assert_allclose(a, ops.laplacian(grid, v), atol=1e-11 * np.max(np.abs(a)))


class TestAdvect:
    def test_trivial(self, grid):
        X = band_limited(grid, (grid.dim,), 1)
        assert np.max(np.abs(ops.advect(grid, grid.zeros(grid.dim), X))) == 0
        v = random_divfree(grid, 2)
        assert np.max(np.abs(ops.advect(grid, v, np.ones((grid.dim,) + grid.shape)))) < 1e-12

    @pytest.mark.parametrize("rank", [1, 2])
    def test_skew_adjoint(self, grid, rank):
        v = random_divfree(grid, 3)
        X = band_limited(grid, (grid.dim,) * rank, 4)
        val = inner_product_l2(grid, ops.advect(grid, v, X), X)
        scale = lp_norm(grid, v) * lp_norm(grid, X) * lp_norm(grid, ops.gradient(grid, X))
        assert abs(val) <= 1e-10 * scale

    def test_flux_form_matches(self, grid):
        v = random_divfree(grid, 3)
        S = band_limited(grid, (grid.dim, grid.dim), 4)
        a = ops.advect(grid, v, S)
        b = ops.advect_flux(grid, v, S)
        assert np.max(np.abs(a - b)) < 1e-10 * np.max(np.abs(a))


class TestJaumann:
    def test_zero_rotation(self):
        S = deviatoric_part(np.random.Generator(np.random.Philox(0)).standard_normal((3, 3, 10)))
        assert np.all(ops.jaumann_rotation(S, np.zeros_like(S)) == 0)

    def test_hand_computed_3d(self):
        # symbolic 3x3 oracle
        Ssym = sp.diag(1, -1, 0)
        Wsym = sp.Matrix([[0, 1, 0], [-1, 0, 0], [0, 0, 0]])
        expected = np.array((Ssym * Wsym - Wsym * Ssym).tolist(), dtype=float)
        got = ops.jaumann_rotation(np.diag([1.0, -1.0, 0.0]), np.array(Wsym.tolist(), dtype=float))
        np.testing.assert_array_equal(got, expected)
        assert expected[0, 1] == expected[1, 0] == 2.0

    def test_rejects_non_skew(self):
        with pytest.raises(ops.ContractViolation):
            ops.jaumann_rotation(np.eye(3), np.eye(3))

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_algebra(self, seed):
        rng = np.random.Generator(np.random.Philox(seed))
        S = deviatoric_part(rng.standard_normal((3, 3, 50)))
        W = ops.skew_part(rng.standard_normal((3, 3, 50)))
        R = ops.jaumann_rotation(S, W)
        assert np.all(R == np.swapaxes(R, 0, 1))
        nS = np.sqrt(np.sum(S * S, axis=(0, 1)))
        nW = np.sqrt(np.sum(W * W, axis=(0, 1)))
        assert np.all(np.abs(np.trace(R)) <= 1e-12 * nS * nW)
        assert np.all(np.abs(np.sum(R * S, axis=(0, 1))) <= 1e-12 * nS**2 * nW)


class TestLeray:
    def test_gradient_removed(self, grid):
        phi = band_limited(grid, (), 2)
        assert np.max(np.abs(ops.leray_project(grid, ops.gradient(grid, phi)))) < 1e-12

    def test_divfree_unchanged(self, grid):
        u = random_divfree(grid, 5)
        np.testing.assert_allclose(ops.leray_project(grid, u), u, atol=1e-12)

    def test_projection_properties(self, grid):
        rng = np.random.Generator(np.random.Philox(1))
        u, w = rng.standard_normal((2, grid.dim) + grid.shape)
        Pu, Pw = ops.leray_project(grid, u), ops.leray_project(grid, w)
        assert lp_norm(grid, ops.leray_project(grid, Pu) - Pu) <= 1e-13 * lp_norm(grid, u)
        assert ops.spectral_divergence_norm(grid, Pu) <= 1e-12 * lp_norm(grid, u)
        assert abs(inner_product_l2(grid, Pu, w) - inner_product_l2(grid, u, Pw)) <= 1e-12 * lp_norm(grid, u) * lp_norm(grid, w)
        np.testing.assert_allclose(ops.leray_project(grid, 2 * u + w), 2 * Pu + Pw, atol=1e-12)

    def test_mean_mode_kept(self, grid):
        u = np.ones((grid.dim,) + grid.shape)
        np.testing.assert_allclose(ops.leray_project(grid, u), u, atol=1e-14)

    def test_spectral_norm_parseval(self, grid):
        u = random_divfree(grid, 1) + ops.gradient(grid, band_limited(grid, (), 3))
        direct = lp_norm(grid, ops.divergence(grid, u))
        assert ops.spectral_divergence_norm(grid, u) == pytest.approx(direct, rel=1e-10)


class TestDealias:
    def test_band_limited_unchanged(self, grid):
        f = band_limited(grid, (), 1)
        np.testing.assert_allclose(ops.dealias(grid, f), f, atol=1e-13)

    def test_nyquist_removed(self, grid):
        f = np.cos(grid.n / 2 * grid.coords()[0])
        assert np.max(np.abs(ops.dealias(grid, f))) < 1e-13

    def test_idempotent(self, grid):
        f = np.random.Generator(np.random.Philox(2)).standard_normal(grid.shape)
        d = ops.dealias(grid, f)
        np.testing.assert_allclose(ops.dealias(grid, d), d, atol=1e-13)

    def test_mask_rule(self):
        # |m| <= 3 kept on a 12-point axis: 7 signed modes, 4 non-negative ones
        assert ops.workspace(Grid(2, 12)).mask.sum() == 7 * 4
