"""Unit-tests for the bounded mild solution and its certificates."""

import math

import numpy as np
import pytest

from circspec.errors import CertificationFailure, InvalidInput, Resonance, WindowOutOfDomain, WindowTooShort
from circspec.funcspace import GridFunction, TrigPolynomial
from circspec.solver import (
    MildSolution,
    SolveReport,
    SolverSettings,
    apply_G,
    apply_Tfh,
    forcing_angles,
    iterate_T1,
    project_forcing,
    residual,
    solve_difference,
    solve_linear,
    verify_spectral_inclusion,
    zero_solution,
)
from circspec.utils import TWO_PI

SQRT2 = math.sqrt(2.0)


def decay_oracle(omega):
    """Bounded solution of ``x' = -x + e^{i omega t}``."""
    return lambda t: np.exp(1j * omega * np.asarray(t)) / (1.0 + 1j * omega)


class TestSettings:
    def test_defaults(self):
        settings = SolverSettings()
        assert settings.m_env == 64
        assert settings.resid_tol == 1e-6

    def test_rejected(self):
        with pytest.raises(InvalidInput):
            SolverSettings(m_env=1)
        with pytest.raises(InvalidInput):
            SolverSettings(cond_cap=0.5)


class TestScalarDecay:
    @pytest.mark.parametrize("omega", [0.0, 1.0, SQRT2])
    def test_matches_closed_form(self, decay, omega):
        f = TrigPolynomial.single(omega, 1.0)
        u = solve_linear(decay, f)
        t = np.linspace(-3.0, 7.0, 41)
        assert np.max(np.abs(u(t)[:, 0] - decay_oracle(omega)(t))) <= 1e-8
        assert u.report.residual < 1e-6

    def test_envelope_is_constant(self, decay):
        u = solve_linear(decay, TrigPolynomial.single(1.0, 1.0))
        assert np.allclose(u.envelopes[0, :, 0], 1.0 / (1.0 + 1j), atol=1e-10)

    def test_report(self, decay):
        u = solve_linear(decay, TrigPolynomial.single(1.0, 1.0), SolverSettings(seed=7))
        assert u.report.seed == 7
        assert u.report.gap == pytest.approx(abs(math.exp(-1.0) - np.exp(1j)))
        assert u.report.norm_f == pytest.approx(1.0)
        assert u.report.norm_u == pytest.approx(1.0 / SQRT2, rel=1e-6)
        assert not u.report.near_resonance

    def test_zero_forcing(self, decay):
        u = solve_linear(decay, TrigPolynomial.zero(1))
        assert u.freqs == ()
        assert np.allclose(u(1.3), [0.0])

    def test_dimension_mismatch(self, decay):
        with pytest.raises(InvalidInput, match="dimension"):
            solve_linear(decay, TrigPolynomial.constant([1.0, 0.0]))


class TestResonance:
    def test_zero_frequency(self, zero_system):
        with pytest.raises(Resonance) as info:
            solve_linear(zero_system, TrigPolynomial.constant(1.0))
        assert info.value.gap == pytest.approx(0.0)

    def test_aliased_frequency(self, zero_system):
        with pytest.raises(Resonance):
            solve_linear(zero_system, TrigPolynomial.single(TWO_PI, 1.0))

    def test_rotation_multiplier(self, rotation):
        with pytest.raises(Resonance):
            solve_linear(rotation, TrigPolynomial.single(1.0, [1.0, 0.0]))


class TestCertificates:
    def test_residual_detects_defect(self, decay):
        f = TrigPolynomial.single(1.0, 1.0)
        u = solve_linear(decay, f)
        bad = u.with_envelope_sample(0, 5, 1e-3)
        pair = [(5.0 / 64 - 0.5, 5.0 / 64)]
        assert residual(decay, u, f, pairs=pair) < 1e-8
        assert residual(decay, bad, f, pairs=pair) > 1e-4

    def test_residual_of_wrong_solution(self, decay):
        f = TrigPolynomial.single(1.0, 1.0)
        assert residual(decay, TrigPolynomial.single(1.0, 1.0), f) > 0.1

    def test_certification_failure(self, hill, hill_forcing):
        with pytest.raises(CertificationFailure):
            solve_linear(hill, hill_forcing, SolverSettings(resid_tol=1e-15))

    def test_fixed_point_of_semigroup(self, decay):
        f = TrigPolynomial.single(SQRT2, 1.0)
        u = solve_linear(decay, f)
        for h, t in [(0.7, 2.3), (2.0, -1.1)]:
            assert np.allclose(apply_Tfh(decay, f, u, h, t), u(t), atol=1e-9)

    def test_semigroup_at_zero(self, decay):
        g = TrigPolynomial.single(1.0, 2.0)
        assert np.array_equal(apply_Tfh(decay, g, g, 0.0, 0.4), g(0.4))
        with pytest.raises(InvalidInput):
            apply_Tfh(decay, g, g, -0.1, 0.4)

    def test_iterate_T1_keeps_solution(self, decay):
        f = TrigPolynomial.single(1.0, 1.0)
        u = solve_linear(decay, f)
        g0 = u.sample((0.0, 6.0), 1.0 / 16)
        g3 = iterate_T1(decay, f, g0, 3)
        assert g3.window == pytest.approx((3.0, 6.0))
        assert np.max(np.abs(g3.samples - u(g3.times))) < 1e-6

    def test_iterate_T1_contracts(self, decay):
        f = TrigPolynomial.single(1.0, 1.0)
        u = solve_linear(decay, f)
        g0 = GridFunction(0.0, 1.0 / 16, np.zeros((97, 1)))
        g4 = iterate_T1(decay, f, g0, 4)
        # errors shrink by e^{-1} per period
        assert np.max(np.abs(g4.samples - u(g4.times))) <= 1.01 * math.exp(-4.0) * 1.0

    def test_iterate_T1_window(self, decay):
        f = TrigPolynomial.single(1.0, 1.0)
        with pytest.raises(WindowTooShort):
            iterate_T1(decay, f, GridFunction(0.0, 0.25, np.zeros((9, 1))), 1)

    def test_spectral_inclusion(self, decay):
        f = TrigPolynomial.single(1.0, 1.0)
        report = verify_spectral_inclusion(solve_linear(decay, f), f)
        assert report.holds
        assert len(report.detected) == 1

    def test_spectral_inclusion_violation(self):
        f = TrigPolynomial.single(1.0, 1.0)
        u = TrigPolynomial.from_modes(1, [(1.0, [1.0]), (2.0, [0.5])])
        report = verify_spectral_inclusion(u, f)
        assert not report.holds
        assert report.excess == pytest.approx([2.0], abs=TWO_PI / 720)


class TestHill:
    def test_end_to_end(self, hill, hill_forcing):
        u = solve_linear(hill, hill_forcing)
        assert u.report.residual < 1e-6
        assert u.report.gap > 1e-4
        assert len(u.report.mode_conds) == 3

    def test_solution_frequencies(self, hill, hill_forcing):
        u = solve_linear(hill, hill_forcing).as_trig_polynomial(prune=1e-12)
        harmonics = (u.omegas[:, None] - np.array([1.0, 3.0, SQRT2])[None, :]) / TWO_PI
        assert np.all(np.min(np.abs(harmonics - np.rint(harmonics)), axis=1) < 1e-9)

    def test_document_layout(self, hill, hill_forcing):
        data = solve_linear(hill, hill_forcing).to_dict()
        assert data["m_env"] == 64
        assert len(data["envelopes"]) == 3
        assert len(data["envelopes"][0]["samples"]) == 64


class TestOperators:
    def test_apply_G_constant(self, decay):
        g = TrigPolynomial.constant(1.0)
        assert apply_G(decay, g, 1.0, 2.5)[0] == pytest.approx(1.0 - math.exp(-1.0))

    def test_apply_G_grid(self, decay):
        g = TrigPolynomial.constant(1.0).sample((0.0, 4.0), 0.01)
        assert apply_G(decay, g, 1.0, 2.5)[0] == pytest.approx(1.0 - math.exp(-1.0), abs=1e-8)
        with pytest.raises(WindowOutOfDomain):
            apply_G(decay, g, 1.0, 0.5)

    def test_apply_G_needs_positive_h(self, decay):
        with pytest.raises(InvalidInput):
            apply_G(decay, TrigPolynomial.constant(1.0), 0.0, 1.0)

    def test_forcing_angles(self):
        f = TrigPolynomial.from_modes(1, [(0.0, [1.0]), (TWO_PI, [1.0]), (1.0, [1.0])])
        assert len(forcing_angles(f)) == 2

    def test_zero_solution(self):
        u = zero_solution(3, 16)
        assert u.envelopes.shape == (0, 16, 3)
        assert u.as_trig_polynomial().is_zero


class TestOperatorLaws:
    def test_semigroup_law(self, hill, hill_forcing):
        g = TrigPolynomial.single(0.5, [1.0, -0.5])

        def inner(s):
            return apply_Tfh(hill, hill_forcing, g, 0.6, s)

        for t in (0.3, 1.75):
            composed = apply_Tfh(hill, hill_forcing, inner, 0.4, t)
            assert np.allclose(composed, apply_Tfh(hill, hill_forcing, g, 1.0, t), atol=1e-8)

    def test_G_commutes_with_translation(self, hill, hill_forcing):
        shifted = hill_forcing.translate(1.0)
        for h, t in [(0.5, 0.2), (1.3, 2.7)]:
            assert np.allclose(apply_G(hill, shifted, h, t), apply_G(hill, hill_forcing, h, t + 1.0), atol=1e-9)

    def test_G_keeps_spectrum(self, hill, hill_forcing):
        # (G g)(t) = sum_k e^{i w_k t} q_k(t) with 1-periodic q_k
        h, m = 0.5, 64
        times = np.arange(m) / m
        modes = list(hill_forcing.modes())
        envelopes = np.array(
            [
                [np.exp(-1j * w * t) * apply_G(hill, TrigPolynomial.single(w, c), h, t) for t in times]
                for w, c in modes
            ]
        )
        image = MildSolution(2, tuple(w for w, _ in modes), envelopes, SolveReport())
        for t in (0.37, 5.81):
            assert np.allclose(image(t), apply_G(hill, hill_forcing, h, t), atol=1e-6)
        assert verify_spectral_inclusion(image, hill_forcing).holds

    def test_mode_integrals_are_quasi_periodic(self, hill, hill_forcing):
        for w, c in hill_forcing.modes():
            mode = TrigPolynomial.single(w, c)
            for t in (0.25, 0.9):
                later = apply_G(hill, mode, 1.0, t + 2.0)
                assert np.allclose(later, np.exp(2j * w) * apply_G(hill, mode, 1.0, t), atol=1e-9)


class TestSolveLaws:
    def test_linearity(self, hill, hill_forcing):
        other = TrigPolynomial.from_modes(2, [(0.5, [0.3, 0.0]), (1.0, [0.0, -0.2j])])
        alpha, beta = 2.0, -0.5j
        combined = solve_linear(hill, hill_forcing * alpha + other * beta)
        first, second = solve_linear(hill, hill_forcing), solve_linear(hill, other)
        t = np.linspace(-3.0, 3.0, 13)
        assert np.allclose(combined(t), alpha * first(t) + beta * second(t), atol=1e-8)

    def test_envelope_grid_refinement(self, hill, hill_forcing):
        coarse = solve_linear(hill, hill_forcing)
        fine = solve_linear(hill, hill_forcing, SolverSettings(m_env=128))
        assert np.allclose(fine.envelopes[:, ::2], coarse.envelopes, atol=1e-9)
        t = np.linspace(0.0, 4.0, 17) + 0.013
        assert np.allclose(fine(t), coarse(t), atol=1e-9)

    def test_quasi_periodic_solution(self, hill):
        f = TrigPolynomial.single(SQRT2, [0.0, 1.0])
        u = solve_linear(hill, f)
        t = np.array([0.1, 0.55, 2.3])
        assert np.allclose(u(t + 1.0), np.exp(1j * SQRT2) * u(t), atol=1e-9)


class TestProjection:
    def test_known_frequencies(self):
        f = TrigPolynomial.from_modes(1, [(1.0, [2.0]), (SQRT2, [0.5j])])
        poly, defect = project_forcing(f.sample((0.0, 30.0), 0.05), freqs=[1.0, SQRT2])
        assert defect < 1e-10
        assert np.allclose(poly.coeffs[:, 0], [2.0, 0.5j], atol=1e-10)

    def test_no_frequencies(self):
        g = TrigPolynomial.constant(3.0).sample((0.0, 2.0), 0.1)
        poly, defect = project_forcing(g, freqs=[])
        assert poly.is_zero
        assert defect == pytest.approx(3.0)


class TestDifference:
    def test_constant_family(self):
        u = solve_difference(lambda t: [[0.5]], TrigPolynomial.constant(1.0))
        assert u(0.3)[0] == pytest.approx(2.0)

    def test_monodromy_family(self, decay):
        u = solve_difference(decay, TrigPolynomial.constant(1.0))
        assert u(0.0)[0] == pytest.approx(1.0 / (1.0 - math.exp(-1.0)))

    def test_resonant_family(self):
        with pytest.raises(Resonance):
            solve_difference(lambda t: [[1.0]], TrigPolynomial.constant(1.0))

    def test_shape_mismatch(self):
        with pytest.raises(InvalidInput, match="shape"):
            solve_difference(lambda t: np.eye(2), TrigPolynomial.constant(1.0))
