"""Unit-tests for periodic systems, evolution operators and monodromy."""

import math

import numpy as np
import pytest
from scipy.linalg import expm

from circspec.errors import InvalidInput, TimeReversed
from circspec.funcspace import TrigPolynomial, UnitCircleSet
from circspec.process import (
    IntegrationSettings,
    PeriodicSystem,
    SystemKind,
    autonomous_gap,
    general_system,
    growth_bound,
    heat_system,
    monodromy,
    multiplier_mismatch,
    propagate,
    propagate_forced,
    solve_forced,
    spectral_gap,
)
from circspec.utils import TWO_PI

RESOLUTION = TWO_PI / 720


class TestSystems:
    def test_constant_coefficient(self, rotation):
        assert np.allclose(rotation.coefficient(0.37), [[0.0, -1.0], [1.0, 0.0]])

    def test_heat_coefficient(self, heat):
        a = heat.coefficient(0.25)
        assert np.allclose(np.diag(a), 0.5 - np.arange(1, 5) ** 2)

    def test_hill_coefficient(self, hill):
        a = hill.coefficient(0.0)
        assert np.allclose(a, [[0.0, 1.0], [-1.5, -0.5]])

    def test_rejects_non_periodic_entry(self):
        with pytest.raises(InvalidInput, match="multiples of 2π"):
            general_system(1, {(0, 0): TrigPolynomial.single(1.0, 1.0)})

    def test_rejects_entry_outside_matrix(self):
        with pytest.raises(InvalidInput, match="outside"):
            general_system(2, {(2, 0): TrigPolynomial.constant(1.0)})

    def test_rejects_non_square_constant(self):
        with pytest.raises(InvalidInput):
            PeriodicSystem.from_dict({"kind": "constant", "constant": [1.0, 2.0]})

    def test_integration_settings(self):
        with pytest.raises(InvalidInput, match="method"):
            IntegrationSettings(method="Euler")
        with pytest.raises(InvalidInput):
            IntegrationSettings(rtol=0.0)

    def test_from_dict_with_period(self):
        sys = PeriodicSystem.from_dict({"kind": "constant", "constant": [[-1.0]]}, period=2.0)
        assert propagate(sys, 0.0, 1.0).matrix[0, 0] == pytest.approx(math.exp(-2.0))

    def test_from_dict_general_with_period(self):
        data = {
            "dim": 1,
            "entries": [{"row": 0, "col": 0, "modes": [{"omega": 0.0, "re": -1.0}, {"omega": 4 * math.pi, "re": 0.5}]}],
        }
        sys = PeriodicSystem.from_dict(data, period=0.5)
        assert sys.kind is SystemKind.GENERAL
        poly = sys.entries[0][1]
        assert poly.omegas.tolist() == pytest.approx([0.0, TWO_PI])
        assert poly.coeffs[:, 0].real.tolist() == pytest.approx([-0.5, 0.25])

    def test_document_layout(self, hill):
        data = hill.to_dict()
        assert data["kind"] == "general"
        assert data["integ"]["max_step"] is None
        again = PeriodicSystem.from_dict(data)
        assert np.allclose(again.coefficient(0.3), hill.coefficient(0.3))

    def test_rescaled_heat(self, heat):
        slow = heat.rescaled(2.0)
        assert slow.heat.diffusion == 2.0
        assert np.allclose(slow.coefficient(0.1), 2.0 * heat.coefficient(0.2))


class TestPropagate:
    def test_identity_at_equal_times(self, hill):
        assert np.array_equal(propagate(hill, 0.4, 0.4).matrix, np.eye(2))

    def test_time_reversed(self, hill):
        with pytest.raises(TimeReversed):
            propagate(hill, 1.0, 0.5)
        with pytest.raises(TimeReversed):
            propagate_forced(hill, 1.0, 0.5, [TrigPolynomial.constant([1.0, 0.0])])

    def test_constant_matches_expm(self, rotation):
        op = propagate(rotation, 0.3, 2.8)
        assert np.max(np.abs(op.matrix - expm(np.array([[0.0, -1.0], [1.0, 0.0]]) * 2.5))) <= 1e-12

    def test_general_integration_matches_expm(self, rotation):
        op = propagate(rotation.as_general(), 0.3, 2.8)
        assert np.max(np.abs(op.matrix - expm(np.array([[0.0, -1.0], [1.0, 0.0]]) * 2.5))) <= 1e-7

    def test_heat_integration_matches_closed_form(self, heat):
        closed = propagate(heat, 0.1, 1.6).matrix
        integrated = propagate(heat.as_general(), 0.1, 1.6).matrix
        assert np.max(np.abs(closed - integrated)) <= 1e-7

    def test_cocycle(self, hill):
        direct = propagate(hill, 0.2, 2.7).matrix
        split = propagate(hill, 1.1, 2.7).matrix @ propagate(hill, 0.2, 1.1).matrix
        assert np.max(np.abs(direct - split)) <= 1e-7

    def test_periodicity(self, hill):
        near = propagate(hill, 0.3, 0.9).matrix
        far = propagate(hill, 3.3, 3.9).matrix
        assert np.max(np.abs(near - far)) <= 1e-8


class TestForced:
    def test_decay_constant_forcing(self, decay):
        x = solve_forced(decay, 0.0, 2.0, [0.0], TrigPolynomial.constant(1.0))
        assert x[0] == pytest.approx(1.0 - math.exp(-2.0), abs=1e-9)

    def test_decay_integrated(self, decay):
        x = solve_forced(decay.as_general(), 0.0, 2.0, [0.5], TrigPolynomial.constant(1.0))
        assert x[0] == pytest.approx(1.0 - 0.5 * math.exp(-2.0), abs=1e-7)

    def test_heat_quadrature(self):
        sys = heat_system(2)
        x = solve_forced(sys, 0.0, 1.5, [0.0, 0.0], TrigPolynomial.constant([1.0, 1.0]))
        assert x[0] == pytest.approx(1.0 - math.exp(-1.5), abs=1e-9)
        assert x[1] == pytest.approx((1.0 - math.exp(-6.0)) / 4.0, abs=1e-9)

    def test_several_forcings(self, decay):
        forcings = [TrigPolynomial.constant(1.0), TrigPolynomial.single(1.0, 1.0)]
        op, integrals = propagate_forced(decay, 0.0, 1.0, forcings)
        assert op.matrix[0, 0] == pytest.approx(math.exp(-1.0))
        # int_0^1 e^{-(1 - xi)} e^{i xi} d xi
        expected = (np.exp(1j) - np.exp(-1.0)) / (1.0 + 1j)
        assert integrals[1, 0] == pytest.approx(expected, abs=1e-9)


class TestMonodromy:
    def test_rotation(self, rotation):
        result = monodromy(rotation)
        assert np.max(np.abs(result.matrix - expm(np.array([[0.0, -1.0], [1.0, 0.0]])))) <= 1e-12
        assert result.unit_circle_part.angles == pytest.approx((1.0, TWO_PI - 1.0))

    def test_heat_closed_form(self, heat):
        P = monodromy(heat).matrix
        assert np.max(np.abs(P - np.diag(np.exp(-np.arange(1, 5) ** 2.0)))) <= 1e-7
        assert len(monodromy(heat).unit_circle_part) == 0

    def test_decay_off_circle(self, decay):
        result = monodromy(decay)
        assert result.eigenvalues[0] == pytest.approx(math.exp(-1.0))
        assert len(result.unit_circle_part) == 0

    def test_anchor_independence(self, hill):
        assert multiplier_mismatch(hill) < 1e-6

    def test_hill_damped(self, hill):
        mus = monodromy(hill).eigenvalues
        assert np.all(np.abs(mus) < 1.0)
        # Liouville: det P = exp(int trace A) = e^{-0.5}
        assert np.prod(mus) == pytest.approx(math.exp(-0.5), abs=1e-7)


class TestGaps:
    def test_spectral_gap(self):
        freqs = UnitCircleSet.from_angles([math.pi], RESOLUTION)
        assert spectral_gap([1.0], freqs) == pytest.approx(2.0)

    def test_empty_is_infinite(self):
        assert spectral_gap([1.0], UnitCircleSet.empty(RESOLUTION)) == math.inf
        assert spectral_gap([], UnitCircleSet.from_angles([0.0], RESOLUTION)) == math.inf

    def test_autonomous_gap(self):
        freqs = UnitCircleSet.from_angles([0.0], RESOLUTION)
        assert autonomous_gap([[0.0]], freqs) == pytest.approx(0.0)
        assert autonomous_gap([[-1.0]], freqs) == pytest.approx(1.0 - math.exp(-1.0))

    def test_autonomous_matches_monodromy(self, rotation):
        freqs = UnitCircleSet.from_angles([0.5, 2.0], RESOLUTION)
        assert autonomous_gap([[0.0, -1.0], [1.0, 0.0]], freqs) == pytest.approx(
            spectral_gap(monodromy(rotation), freqs), abs=1e-10
        )


class TestGrowthBound:
    def test_decay(self, decay):
        bound = growth_bound(decay)
        assert bound.holds()
        assert bound.omega == pytest.approx(-1.0)
        assert bound.N == pytest.approx(1.0)

    def test_hill(self, hill):
        bound = growth_bound(hill)
        assert bound.holds()
        assert bound.N >= 1.0
