import numpy as np
import pytest
from scipy.integrate import quad

from rodfiter.attitude import conj, quat_compose, quat_from_rodrigues
from rodfiter.coning import (
    ConingParams,
    ErrorModel,
    delta_rodrigues_true,
    omega_true,
    quat_true,
    rodrigues_true,
    synthesize_batch,
    synthesize_increments,
    true_coeff_oracle,
    true_increment,
)
from rodfiter.fitting import SampleKind

ALPHA = np.deg2rad(10.0)
OMEGA = 0.74 * np.pi


def rodrigues_rate(g, w):
    # (I + g x / 2 + g g^T / 4) w
    return w + 0.5 * np.cross(g, w) + 0.25 * g * (g @ w)


class TestParams:
    @pytest.mark.parametrize("alpha, Omega", [(-0.1, 1.0), (np.pi / 2, 1.0), (0.1, 0.0)])
    def test_invalid(self, alpha, Omega):
        with pytest.raises(ValueError):
            ConingParams(alpha, Omega)

    def test_bias_shape(self):
        with pytest.raises(ValueError):
            ErrorModel(np.array([np.inf, 0, 0]))
        assert ErrorModel().bias.shape == (3,)


class TestOmega:
    def test_at_zero(self, coning):
        # direct closed-form components: -2 Omega sin^2(a/2), 0, Omega sin(a)
        expected = [-2 * OMEGA * np.sin(ALPHA / 2) ** 2, 0.0, OMEGA * np.sin(ALPHA)]
        np.testing.assert_allclose(omega_true(coning, 0.0), expected, atol=1e-16)
        np.testing.assert_allclose(expected, [-0.03531861, 0, 0.40369356], atol=1e-8)

    def test_constant_magnitude(self, coning):
        t = np.linspace(0, 5, 1001)
        mag = np.linalg.norm(omega_true(coning, t), axis=1)
        np.testing.assert_allclose(mag, 2 * OMEGA * np.sin(ALPHA / 2), rtol=1e-14)
        assert mag[0] == pytest.approx(0.4052356, abs=1e-7)

    def test_zero_cone(self):
        t = np.linspace(0, 1, 11)
        assert not np.any(omega_true(ConingParams(0.0, 2.0), t))


class TestRodrigues:
    def test_at_zero(self, coning):
        np.testing.assert_allclose(rodrigues_true(coning, 0.0), [0, 2 * np.tan(ALPHA / 2), 0], atol=1e-16)
        assert rodrigues_true(coning, 0.0)[1] == pytest.approx(0.1749773, abs=1e-7)

    def test_constant_magnitude(self, coning):
        g = rodrigues_true(coning, np.linspace(0, 3, 2001))
        np.testing.assert_allclose(np.linalg.norm(g, axis=1), 2 * np.tan(ALPHA / 2), atol=1e-14)

    @pytest.mark.parametrize("t", [0.0, 0.123, 0.9, 1.7])
    def test_satisfies_kinematics(self, coning, t):
        h = 1e-6
        fd = (rodrigues_true(coning, t + h) - rodrigues_true(coning, t - h)) / (2 * h)
        np.testing.assert_allclose(fd, rodrigues_rate(rodrigues_true(coning, t), omega_true(coning, t)), atol=2e-6)


class TestDelta:
    def test_zero(self, coning):
        np.testing.assert_array_equal(delta_rodrigues_true(coning, 0.0), [0, 0, 0])

    def test_composition_oracle(self, coning):
        t = np.linspace(0, 2, 201)
        lhs = quat_from_rodrigues(delta_rodrigues_true(coning, t))
        rhs = quat_compose(conj(quat_true(coning, 0.0)), quat_true(coning, t))
        np.testing.assert_allclose(lhs, rhs, atol=1e-13)

    def test_small_time(self, coning):
        t = 1e-4
        dg = delta_rodrigues_true(coning, t)
        inc = true_increment(coning, 0.0, t)
        np.testing.assert_allclose(dg / inc, 1.0, rtol=1e-6, atol=0)

    def test_random_pairs_consistent(self, coning):
        # q(t) = q(t_s) o dq(t_s, t) on 100 random pairs
        rng = np.random.default_rng(11)
        for t_s, dt in zip(rng.uniform(0, 2, 100), rng.uniform(0, 0.5, 100)):
            dq = quat_from_rodrigues(delta_rodrigues_true(coning, t_s + dt, t_s))
            np.testing.assert_allclose(
                quat_compose(quat_true(coning, t_s), dq), quat_true(coning, t_s + dt), atol=1e-12
            )

    def test_general_start_matches_closed_form(self, coning):
        t = np.linspace(0.01, 0.3, 7)
        # t_start = 0 via composition path: force it with a tiny shift of origin
        via_comp = delta_rodrigues_true(coning, t + 1e-300, 1e-300)
        np.testing.assert_allclose(via_comp, delta_rodrigues_true(coning, t), atol=1e-14)


class TestIncrement:
    def test_zero_length(self, coning):
        assert not np.any(true_increment(coning, 0.37, 0.37))

    def test_full_period(self, coning):
        T = 2 * np.pi / OMEGA
        expected = [-2 * OMEGA * np.sin(ALPHA / 2) ** 2 * T, 0, 0]
        np.testing.assert_allclose(true_increment(coning, 0.0, T), expected, atol=1e-15)

    def test_vs_quadrature(self, coning):
        a, b = 0.013, 0.047
        ref = [quad(lambda t, i=i: omega_true(coning, t)[i], a, b, epsabs=1e-15, epsrel=1e-13)[0] for i in range(3)]
        np.testing.assert_allclose(true_increment(coning, a, b), ref, atol=1e-13)


class TestSynthesize:
    def test_increments_telescope(self, coning):
        batch = synthesize_batch(coning, ErrorModel(), 0.24, 0.08, 8)
        np.testing.assert_allclose(batch.samples.sum(axis=0), true_increment(coning, 0.24, 0.32), atol=1e-15)

    def test_rate_bias_offset(self, coning):
        clean = synthesize_batch(coning, ErrorModel(), 0.0, 0.08, 8, SampleKind.RATE)
        biased = synthesize_batch(coning, ErrorModel(np.array([1e-6, 0, 0])), 0.0, 0.08, 8, SampleKind.RATE)
        d = biased.samples - clean.samples
        np.testing.assert_allclose(d[:, 0], 1e-6, rtol=1e-9)
        assert not np.any(d[:, 1:])

    def test_stream(self, coning):
        t_end, inc = synthesize_increments(coning, ErrorModel(), 2.0, 100.0)
        assert inc.shape == (200, 3)
        assert t_end[-1] == 2.0
        np.testing.assert_allclose(inc.sum(axis=0), true_increment(coning, 0.0, 2.0), atol=1e-14)

    def test_invalid_N(self, coning):
        with pytest.raises(ValueError):
            synthesize_batch(coning, ErrorModel(), 0.0, 0.08, 0)


class TestOracle:
    def test_self_convergence(self, coning):
        a = true_coeff_oracle(coning, 0.0, 0.08, 40, 512)
        b = true_coeff_oracle(coning, 0.0, 0.08, 40, 4096)
        np.testing.assert_allclose(a.coeffs, b.coeffs, atol=1e-13)

    def test_reproduces_function(self, coning):
        s = true_coeff_oracle(coning, 0.4, 0.08)
        tau = np.linspace(-1, 1, 33)
        np.testing.assert_allclose(s(tau), delta_rodrigues_true(coning, 0.4 + 0.04 * (1 + tau), 0.4), atol=1e-15)

    def test_machine_floor_plateau(self, coning):
        mags = np.linalg.norm(true_coeff_oracle(coning, 0.0, 0.08).coeffs, axis=1)
        assert mags[1] > 1e-3
        assert np.all(mags[30:] < 1e-16)
        assert np.all(mags[30:] > 0)
