"""Unit-tests for trigonometric polynomials, grid functions and unit-circle sets."""

import math

import numpy as np
import pytest

from circspec.errors import InvalidInput, NonCommensurateShift, WindowOutOfDomain
from circspec.funcspace import (
    FREQ_TOL,
    GridFunction,
    TrigPolynomial,
    UnitCircleSet,
    evaluate,
    make_levitan,
    sup_norm,
    translate,
)
from circspec.utils import TWO_PI

rng = np.random.default_rng(0)


def random_poly(dim=2, n_modes=4, scale=5.0):
    omegas = rng.uniform(-scale, scale, n_modes)
    coeffs = rng.standard_normal((n_modes, dim)) + 1j * rng.standard_normal((n_modes, dim))
    return TrigPolynomial(dim, omegas, coeffs)


class TestEvaluation:
    def test_constant(self):
        f = TrigPolynomial.constant([1.0, 0.0])
        assert np.allclose(f(5.0), [1.0, 0.0])

    def test_half_turn(self):
        f = TrigPolynomial.single(math.pi, 1.0)
        assert np.allclose(f(1.0), [-1.0], atol=1e-15)

    def test_irrational_period(self):
        f = TrigPolynomial.single(math.sqrt(2.0), 1.0)
        assert np.allclose(f(0.0), [1.0])
        assert np.allclose(f(TWO_PI / math.sqrt(2.0)), [1.0], atol=1e-14)

    def test_vectorised_shape(self):
        f = random_poly(dim=3)
        values = f(np.linspace(0, 1, 7))
        assert values.shape == (7, 3)
        assert np.allclose(values[2], f(np.linspace(0, 1, 7)[2]))

    def test_evaluate_grid(self):
        g = TrigPolynomial.single(1.0, 1.0).sample((0.0, 1.0), 0.25)
        assert np.allclose(evaluate(g, 0.5), np.exp(0.5j))

    def test_close_frequencies_merge(self):
        f = TrigPolynomial(1, [1.0, 1.0 + FREQ_TOL / 10], [[1.0], [2.0]])
        assert f.n_modes == 1
        assert f.coeffs[0, 0] == pytest.approx(3.0)

    def test_zero_coefficients_dropped(self):
        f = TrigPolynomial(1, [0.0, 1.0], [[0.0], [1.0]])
        assert f.omegas.tolist() == [1.0]

    def test_nonfinite_rejected(self):
        with pytest.raises(InvalidInput, match="finite"):
            TrigPolynomial(1, [math.nan], [[1.0]])


class TestTranslate:
    def test_constant_invariant(self):
        f = TrigPolynomial.constant(1.0)
        assert np.allclose(translate(f, 7.0).coeffs, [[1.0]])

    def test_half_turn_phase(self):
        f = TrigPolynomial.single(math.pi, 1.0)
        assert np.allclose(f.translate(1.0).coeffs, [[-1.0]], atol=1e-15)

    def test_grid_off_step(self):
        g = GridFunction(0.0, 0.1, np.ones(11))
        with pytest.raises(NonCommensurateShift):
            g.translate(0.25)

    def test_grid_window_moves(self):
        g = GridFunction(0.0, 0.1, np.arange(11.0))
        h = g.translate(0.3)
        assert h.window == pytest.approx((-0.3, 0.7))
        # S(tau) g (t) = g(t + tau)
        assert h(0.0)[0] == pytest.approx(g(0.3)[0])

    def test_group_law(self):
        f = random_poly()
        t = rng.uniform(-3, 3, 5)
        lhs = f.translate(0.7).translate(-1.9)(t)
        rhs = f.translate(0.7 - 1.9)(t)
        assert np.max(np.abs(lhs - rhs)) < 1e-12

    def test_inverse(self):
        f = random_poly()
        assert np.max(np.abs(f.translate(1.0).translate(-1.0).coeffs - f.coeffs)) < 1e-12

    def test_eval_after_translate(self):
        f = random_poly()
        for tau, t in zip(rng.uniform(-4, 4, 5), rng.uniform(-4, 4, 5)):
            assert np.allclose(f.translate(tau)(t), f(t + tau), atol=1e-12)


class TestSupNorm:
    def test_constant_vector(self):
        f = TrigPolynomial.constant([3.0, 4.0])
        assert sup_norm(f, (-2.0, 9.0)) == pytest.approx(5.0)

    def test_unimodular(self):
        f = TrigPolynomial.single(1.0, 1.0)
        value = sup_norm(f, (0.0, 10.0), 0.01)
        assert 0.999 <= value <= 1.0 + 1e-12

    def test_peak_at_origin(self):
        f = TrigPolynomial.from_modes(1, [(0.0, [1.0]), (TWO_PI, [1.0])])
        value = sup_norm(f, (0.0, 1.0), 0.01)
        assert 1.99 <= value <= 2.0 + 1e-12

    def test_monotone_in_window(self):
        f = random_poly()
        small = sup_norm(f, (0.0, 2.0))
        large = sup_norm(f, (-3.0, 8.0))
        assert small <= large

    def test_bounded_by_coefficients(self):
        for _ in range(10):
            f = random_poly(dim=int(rng.integers(1, 4)), n_modes=int(rng.integers(1, 6)))
            assert sup_norm(f, (-10.0, 10.0)) <= f.norm_bound() + 1e-9

    def test_grid_window_outside(self):
        g = GridFunction(0.0, 0.5, np.ones(5))
        with pytest.raises(WindowOutOfDomain):
            sup_norm(g, (0.0, 3.0))

    def test_empty_window(self):
        with pytest.raises(InvalidInput):
            sup_norm(TrigPolynomial.constant(1.0), (1.0, 0.0))


class TestGridFunction:
    def test_needs_two_samples(self):
        with pytest.raises(InvalidInput, match="at least 2"):
            GridFunction(0.0, 0.1, np.ones(1))

    def test_positive_step(self):
        with pytest.raises(InvalidInput):
            GridFunction(0.0, 0.0, np.ones(3))

    def test_no_extrapolation(self):
        g = GridFunction(0.0, 0.1, np.ones(11))
        with pytest.raises(WindowOutOfDomain):
            g.values_at(1.2)

    def test_off_grid_values_interpolate(self):
        f = TrigPolynomial.single(1.0, 1.0)
        g = f.sample((0.0, 10.0), 0.01)
        assert np.allclose(g(3.14159), f(3.14159), atol=1e-8)

    def test_on_grid_values_exact(self):
        g = GridFunction(1.0, 0.25, rng.standard_normal((9, 2)))
        assert np.array_equal(g(1.5), g.samples[2])

    def test_restrict(self):
        g = GridFunction(0.0, 0.5, np.arange(9.0))
        h = g.restrict(1.0, 2.5)
        assert h.window == pytest.approx((1.0, 2.5))
        assert h.samples[:, 0].real.tolist() == [2.0, 3.0, 4.0, 5.0]


class TestLevitan:
    def test_origin(self):
        g = make_levitan((0.0, 1.0), 0.01)
        assert g.samples[0, 0].real == pytest.approx(math.sin(0.25))

    def test_range(self):
        g = make_levitan((0.0, 200.0), 0.01)
        assert g.n == 20001
        assert np.all(np.abs(g.samples.real) <= 1.0)
        assert np.all(g.samples.imag == 0)

    def test_denominator_positive(self):
        t = np.arange(0.0, 200.0, 0.01)
        assert np.all(2.0 + np.cos(t) + np.cos(math.sqrt(2.0) * t) > 0)


class TestUnitCircleSet:
    def test_merge_within_resolution(self):
        s = UnitCircleSet.from_angles([0.1, 0.1005, 2.0], resolution=0.01, scores=[1.0, 2.0, 1.0])
        assert len(s) == 2
        assert s.angles[0] == pytest.approx(0.1005)

    def test_wraparound_cluster(self):
        s = UnitCircleSet.from_angles([TWO_PI - 0.001, 0.002], resolution=0.01)
        assert len(s) == 1

    def test_angles_normalised(self):
        s = UnitCircleSet.from_angles([-1.0, TWO_PI + 1.0], resolution=0.01)
        assert s.angles == pytest.approx((1.0, TWO_PI - 1.0))

    def test_metric_membership(self):
        s = UnitCircleSet.from_angles([1.0], resolution=0.01)
        assert s.contains(1.005)
        assert not s.contains(1.02)

    def test_hausdorff(self):
        a = UnitCircleSet.from_angles([0.0, 1.0], resolution=0.01)
        b = UnitCircleSet.from_angles([0.0, 1.1], resolution=0.01)
        assert a.hausdorff(b) == pytest.approx(0.1)
        assert a.hausdorff(UnitCircleSet.empty(0.01)) == math.inf
        assert UnitCircleSet.empty(0.01).hausdorff(UnitCircleSet.empty(0.01)) == 0.0

    def test_excess(self):
        a = UnitCircleSet.from_angles([0.0, 1.0, 2.0], resolution=0.01)
        b = UnitCircleSet.from_angles([1.0], resolution=0.01)
        assert a.excess(b) == pytest.approx([0.0, 2.0])
        assert b.issubset(a)


class TestDocuments:
    def test_from_dict_scalar_entries(self):
        f = TrigPolynomial.from_dict({"modes": [{"omega": 2.0, "re": 1.0, "im": -1.0}]})
        assert f.dim == 1
        assert f.coeffs[0, 0] == pytest.approx(1.0 - 1.0j)

    def test_from_dict_dimension_mismatch(self):
        with pytest.raises(InvalidInput, match="expected dim"):
            TrigPolynomial.from_dict({"dim": 2, "modes": [{"omega": 0.0, "re": [1.0, 2.0, 3.0]}]})

    def test_to_dict_layout(self):
        f = TrigPolynomial.single(1.5, [1.0 + 2.0j, 0.0])
        assert f.to_dict() == {"dim": 2, "modes": [{"omega": 1.5, "re": [1.0, 0.0], "im": [2.0, 0.0]}]}

    def test_rescaled(self):
        f = TrigPolynomial.single(1.0, 2.0)
        g = f.rescaled(3.0)
        # tau * f(tau s)
        assert np.allclose(g(0.4), 3.0 * f(1.2))

    def test_project(self):
        f = TrigPolynomial.from_modes(1, [(0.0, [1.0]), (1.0, [2.0]), (2.0, [3.0])])
        kept, dropped = f.project([0.0, 2.0])
        assert kept.omegas.tolist() == [0.0, 2.0]
        assert dropped == pytest.approx(2.0)
