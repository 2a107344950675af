import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vepflow import oracles
from vepflow import potentials as pot
from vepflow.fields import Grid

SPECS = [pot.ZeroPotential(), pot.QuadraticPotential(2.0), pot.YieldPotential(1.0, 1.0), pot.YieldPotential(0.0, 0.5)]
seeds = st.integers(0, 2**32 - 1)


def rng(seed=0):
    return np.random.Generator(np.random.Philox(seed))


def E12(dim=3):
    T = np.zeros((dim, dim))
    T[0, 1] = T[1, 0] = 1.0
    return T


class TestValue:
    def test_zero_everywhere(self):
        assert pot.pointwise_value(pot.ZeroPotential(), 7 * E12()) == 0.0

    def test_quadratic(self):
        # |E12 sym|^2 = 2
        assert pot.pointwise_value(pot.QuadraticPotential(1.0), E12()) == pytest.approx(1.0)

    def test_yield_boundary(self):
        spec = pot.YieldPotential(1.0, 1.0)
        T = E12() / math.sqrt(2)
        assert pot.pointwise_value(spec, T) == pytest.approx(0.5)
        assert pot.pointwise_value(spec, 1.01 * T) == math.inf

    def test_rejects_non_deviatoric(self):
        with pytest.raises(ValueError):
            pot.pointwise_value(pot.QuadraticPotential(), np.eye(3))

    def test_total_value(self):
        g = Grid(2, 8)
        S = np.zeros((2, 2) + g.shape)
        S[0, 1] = S[1, 0] = 0.5
        assert pot.total_value(pot.QuadraticPotential(1.0), g, S) == pytest.approx(0.25 * g.volume)
        assert pot.total_value(pot.YieldPotential(1.0, 0.1), g, S) == math.inf

    def test_invalid_params(self):
        with pytest.raises(ValueError):
            pot.YieldPotential(1.0, 0.0)
        with pytest.raises(ValueError):
            pot.QuadraticPotential(-1.0)

    def test_from_config(self):
        assert pot.from_config({"kind": "yield", "sigma_yield": 2}) == pot.YieldPotential(1.0, 2.0)
        with pytest.raises(ValueError):
            pot.from_config({"kind": "cubic"})


class TestProx:
    def test_zero_identity(self):
        X = pot.random_deviatoric(rng(), 3)
        np.testing.assert_array_equal(pot.prox_pointwise(pot.ZeroPotential(), 0.3, X), X)

    def test_quadratic_closed_form(self):
        X = pot.random_deviatoric(rng(), 3)
        np.testing.assert_allclose(pot.prox_pointwise(pot.QuadraticPotential(1.0), 1.0, X), X / 2)

    def test_yield_radial_clip(self):
        spec = pot.YieldPotential(1.0, 1.0)
        X = 5 * E12() / math.sqrt(2)
        got = pot.prox_pointwise(spec, 1.0, X)
        np.testing.assert_allclose(got, E12() / math.sqrt(2), atol=1e-15)

    def test_yield_interior(self):
        spec = pot.YieldPotential(1.0, 1.0)
        X = 0.3 * E12()
        np.testing.assert_allclose(pot.prox_pointwise(spec, 1.0, X), 0.15 * E12())

    @pytest.mark.parametrize("tau", [0.0, -1.0])
    def test_invalid_step(self, tau):
        with pytest.raises(pot.InvalidStep):
            pot.prox_pointwise(pot.QuadraticPotential(), tau, E12())

    @settings(max_examples=50, deadline=None)
    @given(seeds, st.sampled_from(SPECS), st.floats(0.05, 5.0))
    def test_feasible_nonexpansive_and_deviatoric(self, seed, spec, tau):
        r = rng(seed)
        X, Y = 3 * pot.random_deviatoric(r, 3), 3 * pot.random_deviatoric(r, 3)
        PX, PY = pot.prox_pointwise(spec, tau, X), pot.prox_pointwise(spec, tau, Y)
        assert np.isfinite(pot.pointwise_value(spec, PX))
        assert np.linalg.norm(PX - PY) <= np.linalg.norm(X - Y) * (1 + 1e-12)
        assert abs(np.trace(PX)) < 1e-12 and np.allclose(PX, PX.T)

    @settings(max_examples=50, deadline=None)
    @given(seeds, st.sampled_from(SPECS[1:]), st.floats(0.05, 5.0))
    def test_optimality_is_subgradient(self, seed, spec, tau):
        X = 2 * pot.random_deviatoric(rng(seed), 3)
        S = pot.prox_pointwise(spec, tau, X)
        ok, worst = pot.subgradient_check(spec, S, (X - S) / tau, samples=200, rng=rng(seed + 1))
        assert ok, worst

    def test_field_matches_pointwise(self):
        spec = pot.YieldPotential(1.0, 0.5)
        F = pot.random_deviatoric(rng(3), 2, 64).reshape(2, 2, 8, 8)
        out = pot.prox_field(spec, 0.2, F)
        np.testing.assert_allclose(out[:, :, 3, 5], pot.prox_pointwise(spec, 0.2, F[:, :, 3, 5]))

    def test_against_brute_force(self):
        r = rng(7)
        for spec in SPECS:
            for X in oracles._sample_regimes(r, 3, 12, getattr(spec, "sigma_yield", 1.0), 0.7, getattr(spec, "a", 0.0)):
                np.testing.assert_allclose(pot.prox_pointwise(spec, 0.7, X), oracles.brute_prox(spec, 0.7, X), atol=1e-6)


class TestMoreau:
    def test_quadratic_envelope(self):
        spec = pot.QuadraticPotential(1.0)
        T = E12()
        # min_S |S|^2/2 + |T-S|^2/(2 eps) = |T|^2 / (2 (1+eps))
        assert pot.moreau_value(spec, 0.5, T) == pytest.approx(2.0 / 3.0)

    @settings(max_examples=40, deadline=None)
    @given(seeds, st.sampled_from(SPECS), st.floats(0.05, 2.0))
    def test_below_potential_and_gradient_matches_fd(self, seed, spec, eps):
        T = 1.5 * pot.random_deviatoric(rng(seed), 3)
        edge = (1 + getattr(spec, "a", 0.0) * eps) * getattr(spec, "sigma_yield", np.inf)
        if abs(np.linalg.norm(T) - edge) < 1e-3:
            return
        assert pot.moreau_value(spec, eps, T) <= pot.pointwise_value(spec, T) + 1e-12
        G = pot.moreau_grad(spec, eps, T)
        fd = oracles.fd_moreau_grad(spec, eps, T)
        assert np.linalg.norm(G - fd) <= 1e-5 * max(np.linalg.norm(G), 1e-8)

    def test_increases_to_potential(self):
        spec = pot.YieldPotential(1.0, 1.0)
        T = 0.4 * E12()
        vals = [pot.moreau_value(spec, e, T) for e in (1.0, 0.1, 0.01, 1e-4)]
        assert all(a <= b for a, b in zip(vals, vals[1:]))
        assert vals[-1] == pytest.approx(pot.pointwise_value(spec, T), rel=1e-3)


class TestConjugate:
    def test_yield_branches(self):
        spec = pot.YieldPotential(1.0, 1.0)
        small, large = 0.5 * E12() / math.sqrt(2), 3 * E12() / math.sqrt(2)
        assert pot.conjugate_pointwise(spec, small) == pytest.approx(0.125)
        assert pot.conjugate_pointwise(spec, large) == pytest.approx(2.5)

    def test_zero_potential(self):
        assert pot.conjugate_pointwise(pot.ZeroPotential(), np.zeros((3, 3))) == 0
        assert pot.conjugate_pointwise(pot.ZeroPotential(), E12()) == math.inf

    @settings(max_examples=40, deadline=None)
    @given(seeds, st.sampled_from(SPECS[1:3]))
    def test_fenchel_young(self, seed, spec):
        r = rng(seed)
        T = pot.prox_pointwise(spec, 1.0, 2 * pot.random_deviatoric(r, 3))
        G = 2 * pot.random_deviatoric(r, 3)
        assert pot.pointwise_value(spec, T) + pot.conjugate_pointwise(spec, G) >= np.sum(T * G) - 1e-12

    def test_against_brute_force(self):
        spec = pot.YieldPotential(1.0, 1.0)
        for G in oracles._sample_regimes(rng(5), 3, 9, 1.0, 1.0, 1.0):
            assert pot.conjugate_pointwise(spec, G) == pytest.approx(oracles.brute_conjugate(spec, G), rel=1e-6)


class TestSubgradientCheck:
    def test_detects_wrong_slope(self):
        spec = pot.QuadraticPotential(1.0)
        T = 0.5 * E12()
        assert pot.subgradient_check(spec, T, T)[0]
        ok, worst = pot.subgradient_check(spec, T, 3 * T)
        assert not ok and worst < 0

    def test_normal_cone_at_yield_boundary(self):
        spec = pot.YieldPotential(1.0, 1.0)
        T = E12() / math.sqrt(2)
        assert pot.subgradient_check(spec, T, T + 4 * T)[0]

    def test_outside_domain(self):
        with pytest.raises(pot.DomainError):
            pot.subgradient_check(pot.YieldPotential(1.0, 0.1), E12(), E12())


def test_selftest_report_small():
    rep = oracles.selftest(n=30, seed=2)
    assert rep and all(v < 1e-5 for v in rep.values())
