"""
Bounded mild solutions of ``x' = A(t) x + f(t)`` with 1-periodic A.

For a forcing ``f = sum_k a_k e^{i w_k t}`` whose frequencies avoid the
characteristic multipliers, the unique bounded mild solution with the same
spectrum is ``u(t) = sum_k e^{i w_k t} p_k(t)`` with 1-periodic envelopes
solving

    (I - e^{-i w_k} P(t)) p_k(t) = e^{-i w_k t} b_k(t),

where ``P(t) = U(t, t - 1)`` and ``b_k(t) = int_{t-1}^t U(t, xi) a_k e^{i w_k xi} d xi``.
Envelopes are computed on a uniform grid of one period and trigonometrically
interpolated. Every solve is certified against the mild-solution identity.
"""

import logging
import math
from dataclasses import asdict, dataclass, field, replace
from functools import cached_property
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import solve as dense_solve

from circspec.errors import (
    CertificationFailure,
    InvalidInput,
    NonCommensurateShift,
    Resonance,
    WindowOutOfDomain,
    WindowTooShort,
)
from circspec.funcspace import FREQ_TOL, GridFunction, TrigPolynomial, UnitCircleSet, sup_norm
from circspec.process import (
    RESONANCE_TOL,
    PeriodicSystem,
    monodromy,
    propagate,
    propagate_forced,
    solve_forced,
    spectral_gap,
)
from circspec.spectrum import ResolventSettings, carleman_spectrum, circular_spectrum
from circspec.utils import TWO_PI, complex_pairs, parallel_map, wrap_angle

logger = logging.getLogger(__name__)

NORM_WINDOW = (0.0, 20.0)


@dataclass(frozen=True)
class SolverSettings:
    """
    Linear solver and certification policy.

    Attributes:
        m_env: Envelope samples per period
        resid_tol: Certification threshold for the mild-solution residual
        cond_cap: Largest admissible condition number of a mode system
        n_pairs: Random (s, t) pairs used by the residual
        seed: Seed of the residual's random pairs
        resonance_tol: Spectral gap below which the solve is refused
        max_span: Largest ``t - s`` drawn by the residual
    """

    m_env: int = 64
    resid_tol: float = 1e-6
    cond_cap: float = 1e8
    n_pairs: int = 20
    seed: int = 0
    resonance_tol: float = RESONANCE_TOL
    max_span: float = 3.0

    def __post_init__(self):
        if int(self.m_env) < 2:
            raise InvalidInput("m_env must be at least 2")
        if not (self.resid_tol > 0 and self.cond_cap > 1 and self.resonance_tol > 0):
            raise InvalidInput("solver tolerances must be positive (cond_cap > 1)")
        if int(self.n_pairs) < 1:
            raise InvalidInput("n_pairs must be positive")
        if not self.max_span > 0:
            raise InvalidInput("max_span must be positive")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class SolveReport:
    """Certificate attached to a solution."""

    residual: float = 0.0
    gap: float = math.inf
    mode_conds: List[float] = field(default_factory=list)
    iterations: int = 0
    norm_u: float = 0.0
    norm_f: float = 0.0
    seed: int = 0
    near_resonance: bool = False
    projection_defect: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        if self.projection_defect is None:
            data.pop("projection_defect")
        return data


@dataclass(frozen=True, eq=False)
class MildSolution:
    """
    ``u(t) = sum_k e^{i w_k t} p_k(t)`` with 1-periodic envelopes.

    Attributes:
        dim: State dimension
        freqs: Frequencies w_k of the forcing
        envelopes: Envelope samples ``p_k(j / m)``, shape (K, m, dim)
        report: Solve certificate
    """

    dim: int
    freqs: Tuple[float, ...]
    envelopes: np.ndarray
    report: SolveReport = field(default_factory=SolveReport)

    @property
    def m_env(self) -> int:
        return self.envelopes.shape[1]

    @cached_property
    def _poly(self) -> TrigPolynomial:
        return self.as_trig_polynomial()

    def as_trig_polynomial(self, prune: float = 0.0) -> TrigPolynomial:
        """
        Expand the solution with frequencies ``w_k + 2π n``.

        The Nyquist harmonic of an even envelope grid is split evenly between
        ``+m/2`` and ``-m/2`` so the expansion is real for real envelopes.
        """
        if len(self.freqs) == 0:
            return TrigPolynomial.zero(self.dim)
        m = self.m_env
        harmonics = np.rint(np.fft.fftfreq(m, d=1.0 / m)).astype(int)
        omegas, coeffs = [], []
        for omega, samples in zip(self.freqs, self.envelopes):
            c = np.fft.fft(samples, axis=0) / m
            h = harmonics.copy()
            if m % 2 == 0:
                nyq = int(np.flatnonzero(h == -m // 2)[0])
                c = np.vstack([c, 0.5 * c[nyq][None, :]])
                c[nyq] *= 0.5
                h = np.append(h, m // 2)
            keep = np.linalg.norm(c, axis=1) > prune
            omegas.append(omega + TWO_PI * h[keep])
            coeffs.append(c[keep])
        return TrigPolynomial(self.dim, np.concatenate(omegas), np.vstack(coeffs))

    def __call__(self, t: Union[float, np.ndarray]) -> np.ndarray:
        return self._poly(t)

    def sample(self, window: Tuple[float, float], dt: float) -> GridFunction:
        return self._poly.sample(window, dt)

    def with_envelope_sample(self, mode: int, index: int, delta: Union[complex, Sequence[complex]]) -> "MildSolution":
        """Copy with ``delta`` added to one envelope sample."""
        envelopes = np.array(self.envelopes, dtype=complex)
        envelopes[mode, index] += np.asarray(delta, dtype=complex)
        return MildSolution(self.dim, self.freqs, envelopes, replace(self.report))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "dim": self.dim,
            "m_env": self.m_env,
            "freqs": list(self.freqs),
            "envelopes": [
                {"omega": omega, "samples": [complex_pairs(p) for p in samples]}
                for omega, samples in zip(self.freqs, self.envelopes)
            ],
            "report": self.report.to_dict(),
        }


def zero_solution(dim: int, m_env: int = 64) -> MildSolution:
    return MildSolution(dim, (), np.zeros((0, m_env, dim), dtype=complex), SolveReport(gap=math.inf))


Evaluable = Union[TrigPolynomial, GridFunction, MildSolution, Callable[[float], np.ndarray]]


def _value(g: Evaluable, t: float) -> np.ndarray:
    return np.asarray(g(t), dtype=complex).reshape(-1)


# Operator G and the affine semigroup

def apply_G(sys: PeriodicSystem, g: Union[TrigPolynomial, GridFunction], h: float, t: float) -> np.ndarray:
    """
    ``(G g)(t) = int_{t-h}^t U(t, xi) g(xi) d xi``.

    Raises:
        WindowOutOfDomain: If a grid function does not cover ``[t - h, t]``
    """
    if not h > 0:
        raise InvalidInput(f"h must be positive, got {h}")
    if isinstance(g, GridFunction) and not g.covers(t - h, t):
        raise WindowOutOfDomain(f"[{t - h:.6g}, {t:.6g}] not inside [{g.t0:.6g}, {g.t_end:.6g}]")
    _, integrals = propagate_forced(sys, t - h, t, [g])
    return integrals[0]


def apply_Tfh(sys: PeriodicSystem, f, g: Evaluable, h: float, t: float) -> np.ndarray:
    """
    Affine semigroup ``(T^h_f g)(t) = U(t, t-h) g(t-h) + int_{t-h}^t U(t, xi) f(xi) d xi``.

    ``h = 0`` returns ``g(t)`` unchanged.
    """
    if h < 0:
        raise InvalidInput(f"h must be nonnegative, got {h}")
    if h == 0:
        return _value(g, t)
    op, integrals = propagate_forced(sys, t - h, t, [f])
    return op.matrix @ _value(g, t - h) + integrals[0]


# Linear solve

def _check_forcing(sys: PeriodicSystem, f: TrigPolynomial) -> None:
    if not isinstance(f, TrigPolynomial):
        raise InvalidInput("forcing must be a trigonometric polynomial; project grid forcings first")
    if f.dim != sys.dim:
        raise InvalidInput(f"forcing dimension {f.dim} does not match system dimension {sys.dim}")


def forcing_angles(f: TrigPolynomial, resolution: float = FREQ_TOL) -> UnitCircleSet:
    """``{e^{i w_k}}`` as a unit-circle set."""
    return UnitCircleSet.from_angles(wrap_angle(f.omegas), resolution)


def _gap_gate(sys: PeriodicSystem, f: TrigPolynomial, settings: SolverSettings) -> Tuple[float, bool]:
    gap = spectral_gap(monodromy(sys, 0.0), forcing_angles(f))
    if gap <= settings.resonance_tol:
        raise Resonance(
            f"monodromy spectrum meets the forcing spectrum (gap {gap:.3e} <= {settings.resonance_tol:g})",
            gap=gap,
        )
    near = gap < 10 * settings.resonance_tol
    if near:
        logger.warning(f"near resonance: spectral gap {gap:.3e}")
    return gap, near


def _mode_terms(sys: PeriodicSystem, f: TrigPolynomial, times: np.ndarray) -> List[Tuple[np.ndarray, np.ndarray]]:
    """``(P(t_j), [b_k(t_j)]_k)`` for every envelope time."""
    modes = [TrigPolynomial.single(w, c) for w, c in f.modes()]

    def one(t):
        op, integrals = propagate_forced(sys, t - 1.0, t, modes)
        return op.matrix, integrals

    return parallel_map(one, times)


def _solve_envelopes(
    sys: PeriodicSystem,
    omegas: np.ndarray,
    times: np.ndarray,
    terms: List[Tuple[np.ndarray, np.ndarray]],
    cond_cap: float,
) -> Tuple[np.ndarray, List[float]]:
    d = sys.dim
    eye = np.eye(d, dtype=complex)
    envelopes = np.zeros((len(omegas), len(times), d), dtype=complex)
    conds = np.zeros(len(omegas))
    for j, (t, (period_map, integrals)) in enumerate(zip(times, terms)):
        for k, omega in enumerate(omegas):
            system = eye - np.exp(-1j * omega) * period_map
            cond = float(np.linalg.cond(system))
            conds[k] = max(conds[k], cond)
            if not cond <= cond_cap:
                raise Resonance(
                    f"mode w={omega:.6g} is ill-conditioned at t={t:.4g} (cond {cond:.3e} > {cond_cap:g})",
                    omega=float(omega),
                )
            envelopes[k, j] = dense_solve(system, np.exp(-1j * omega * t) * integrals[k])
    return envelopes, conds.tolist()


def solve_linear(
    sys: PeriodicSystem,
    f: TrigPolynomial,
    settings: Optional[SolverSettings] = None,
    certify: bool = True,
) -> MildSolution:
    """
    Unique bounded mild solution with spectrum inside the forcing's.

    Args:
        sys: Periodic system
        f: Trigonometric-polynomial forcing
        settings: Solver settings
        certify: Run the residual certification (Picard iterates skip it)

    Returns:
        MildSolution with a filled SolveReport

    Raises:
        Resonance: If the spectral gap is below ``resonance_tol`` or a mode
            system is too ill-conditioned
        CertificationFailure: If the residual reaches ``resid_tol``
    """
    settings = settings or SolverSettings()
    _check_forcing(sys, f)
    if f.is_zero:
        solution = zero_solution(sys.dim, settings.m_env)
        solution.report.seed = settings.seed
        return solution

    gap, near = _gap_gate(sys, f, settings)
    times = np.arange(settings.m_env) / settings.m_env
    terms = _mode_terms(sys, f, times)
    envelopes, conds = _solve_envelopes(sys, f.omegas, times, terms, settings.cond_cap)

    report = SolveReport(gap=gap, mode_conds=conds, seed=settings.seed, near_resonance=near)
    solution = MildSolution(sys.dim, tuple(float(w) for w in f.omegas), envelopes, report)
    probe = 1.0 / (4 * settings.m_env)
    report.norm_u = sup_norm(solution._poly, NORM_WINDOW, probe)
    report.norm_f = sup_norm(f, NORM_WINDOW, probe)

    if certify:
        report.residual = residual(sys, solution, f, settings.n_pairs, settings.seed, settings.max_span)
        logger.debug(f"linear solve: {len(f.omegas)} mode(s), gap {gap:.4g}, residual {report.residual:.3e}")
        if not report.residual < settings.resid_tol:
            raise CertificationFailure(
                f"mild-solution residual {report.residual:.3e} >= {settings.resid_tol:g}",
                residual=report.residual,
            )
    return solution


def residual(
    sys: PeriodicSystem,
    u: Evaluable,
    f,
    n_pairs: int = 20,
    seed: int = 0,
    max_span: float = 3.0,
    pairs: Optional[Sequence[Tuple[float, float]]] = None,
) -> float:
    """
    Sup of ``||u(t) - U(t, s) u(s) - int_s^t U(t, xi) f(xi) d xi||`` over probe pairs.

    Args:
        sys: Periodic system
        u: Candidate solution
        f: Forcing (trigonometric polynomial, grid function or vectorised callable)
        n_pairs: Number of random pairs
        seed: Seed of the pair generator
        max_span: Spans ``t - s`` are drawn from ``(0, max_span]``
        pairs: Explicit ``(s, t)`` pairs replacing the random draw

    Returns:
        Largest residual norm
    """
    if pairs is None:
        rng = np.random.default_rng(seed)
        starts = rng.uniform(-5.0, 5.0, size=n_pairs)
        spans = max_span * (1.0 - rng.random(n_pairs))
        pairs = list(zip(starts.tolist(), (starts + spans).tolist()))

    def gap(pair):
        s, t = pair
        return float(np.linalg.norm(_value(u, t) - solve_forced(sys, s, t, _value(u, s), f)))

    return max(parallel_map(gap, pairs), default=0.0)


# Certificates

def inclusion_settings(period: float = 1.0) -> ResolventSettings:
    """Resolvent settings used for spectral-inclusion checks of sampled solutions."""
    return ResolventSettings(
        series_tol=1e-8,
        max_terms=4000,
        radial_deltas=(0.1, 0.05, 0.03, 0.02, 0.01),
        period=period,
    )


@dataclass
class InclusionReport:
    """Detected spectrum of a sampled function against the allowed angles."""

    detected: UnitCircleSet
    allowed: UnitCircleSet
    excess: List[float]
    window: Tuple[float, float]

    @property
    def holds(self) -> bool:
        return not self.excess

    def to_dict(self) -> Dict[str, Any]:
        return {
            "detected": list(self.detected.angles),
            "allowed": list(self.allowed.angles),
            "excess": list(self.excess),
            "holds": self.holds,
            "window": list(self.window),
        }


def verify_spectral_inclusion(
    u: Union[MildSolution, TrigPolynomial, GridFunction],
    f: TrigPolynomial,
    settings: Optional[ResolventSettings] = None,
    dt: float = 1.0 / 32,
) -> InclusionReport:
    """
    Check that the circular spectrum of ``u`` lies inside ``{e^{i w_k}}``.

    Solutions are sampled on a window long enough for the Neumann series at
    the smallest radial distance (at least 40 periods). Violations are
    reported through ``excess``, never raised.
    """
    settings = settings or inclusion_settings()
    resolution = settings.angular_resolution
    allowed = UnitCircleSet.from_angles(wrap_angle(f.omegas * settings.period), resolution)

    if isinstance(u, GridFunction):
        grid = u
    else:
        poly = u._poly if isinstance(u, MildSolution) else u
        bound = max(poly.norm_bound(), settings.series_tol)
        ratio = settings.series_tol * settings.radial_deltas[-1] / bound
        needed = int(math.ceil(math.log(ratio) / math.log(1.0 / (1.0 + settings.radial_deltas[-1])))) if ratio < 1 else 0
        needed = min(needed, settings.max_terms)
        periods = max(40, needed + 2)
        grid = poly.sample((0.0, periods * settings.period), dt)

    report = circular_spectrum(grid, settings, method="scan")
    excess = report.spectrum.excess(allowed, tol=resolution)
    if excess:
        logger.warning(f"spectral inclusion violated at angle(s) {[round(a, 6) for a in excess]}")
    return InclusionReport(report.spectrum, allowed, excess, grid.window)


def iterate_T1(sys: PeriodicSystem, f: TrigPolynomial, g0: GridFunction, n: int) -> GridFunction:
    """
    Apply ``T^1_f`` ``n`` times to a sampled function.

    Each application consumes one period at the start of the window:
    ``new(t) = P(t) g(t - 1) + b(t)``. ``P`` and the per-mode ``b_k`` are
    precomputed on one period of phases and reused through
    ``b_k(t + n) = e^{i w_k n} b_k(t)``.

    Raises:
        NonCommensurateShift: If the grid step does not divide the period
        WindowTooShort: If the window is shorter than ``n + 2`` periods
    """
    if n < 0:
        raise InvalidInput("n must be nonnegative")
    _check_forcing(sys, f)
    if g0.dim != sys.dim:
        raise InvalidInput(f"grid function dimension {g0.dim} does not match system dimension {sys.dim}")
    if n == 0:
        return g0
    per_period = 1.0 / g0.dt
    m = int(round(per_period))
    if abs(per_period - m) > 1e-9 * per_period:
        raise NonCommensurateShift(f"grid step {g0.dt} does not divide the unit period")
    start_index = g0.t0 * m
    if abs(start_index - round(start_index)) > 1e-6:
        raise NonCommensurateShift(f"window start {g0.t0} is not on the phase grid 1/{m}")
    if g0.length < n + 2 - 1e-9:
        raise WindowTooShort(f"{n} application(s) need a window of {n + 2} periods, have {g0.length:.6g}")

    phases = np.arange(m) / m
    terms = _mode_terms(sys, f, phases)
    period_maps = np.stack([pm for pm, _ in terms])  # (m, d, d)
    mode_ints = np.stack([ints for _, ints in terms])  # (m, K, d)
    base = int(round(start_index))

    samples = np.asarray(g0.samples)
    t0 = g0.t0
    for _ in range(n):
        index = base + np.arange(m, len(samples)) + int(round((t0 - g0.t0) * m))
        phase = np.mod(index, m)
        cycles = np.floor_divide(index, m)
        shifted = np.einsum("nij,nj->ni", period_maps[phase], samples[: len(samples) - m])
        weights = np.exp(1j * np.outer(cycles, f.omegas))  # (N, K)
        forced = np.einsum("nk,nkd->nd", weights, mode_ints[phase])
        samples = shifted + forced
        t0 = t0 + 1.0
    return GridFunction(t0, g0.dt, samples)


def project_forcing(
    g: GridFunction,
    settings: Optional[ResolventSettings] = None,
    freqs: Optional[Sequence[float]] = None,
    omega_range: Optional[float] = None,
) -> Tuple[TrigPolynomial, float]:
    """
    Least-squares projection of a grid forcing onto a finite frequency set.

    Frequencies come from ``carleman_spectrum`` unless given.

    Returns:
        Tuple of (projected polynomial, projection defect as the largest sample error)
    """
    if freqs is None:
        if omega_range is None:
            omega_range = math.pi / g.dt
        freqs = carleman_spectrum(g, settings, omega_range).frequencies
    freqs = np.asarray(list(freqs), dtype=float)
    if len(freqs) == 0:
        defect = float(np.max(np.linalg.norm(g.samples, axis=1)))
        return TrigPolynomial.zero(g.dim), defect
    design = np.exp(1j * np.outer(g.times, freqs))
    coeffs, *_ = np.linalg.lstsq(design, g.samples, rcond=None)
    poly = TrigPolynomial(g.dim, freqs, coeffs)
    defect = float(np.max(np.linalg.norm(g.samples - design @ coeffs, axis=1)))
    logger.info(f"projected forcing onto {len(freqs)} frequencies, defect {defect:.3e}")
    return poly, defect


def solve_difference(
    B: Union[PeriodicSystem, Callable[[float], np.ndarray]],
    f: TrigPolynomial,
    settings: Optional[SolverSettings] = None,
) -> MildSolution:
    """
    Bounded solution of ``u(t) = B(t) u(t - 1) + f(t)`` with spectrum in ``f``'s.

    ``B`` is a 1-periodic matrix family, or a periodic system whose
    monodromy family ``P(t)`` is used. Each mode solves
    ``(I - e^{-i w_k} B(t_j)) p_k(t_j) = a_k``.

    Raises:
        Resonance: If some ``B(t_j)`` has an eigenvalue within ``resonance_tol``
            of ``e^{i w_k}``
        CertificationFailure: If the difference identity fails at the probes
    """
    settings = settings or SolverSettings()
    if isinstance(B, PeriodicSystem):
        system = B
        family = lambda t: propagate(system, t - 1.0, t).matrix
    else:
        family = lambda t: np.atleast_2d(np.asarray(B(t), dtype=complex))
    if f.is_zero:
        return zero_solution(f.dim, settings.m_env)

    times = np.arange(settings.m_env) / settings.m_env
    mats = parallel_map(family, times)
    if mats[0].shape != (f.dim, f.dim):
        raise InvalidInput(f"B(t) has shape {mats[0].shape}, forcing dimension is {f.dim}")
    angles = forcing_angles(f)
    gap = min(spectral_gap(np.linalg.eigvals(mat), angles) for mat in mats)
    if gap <= settings.resonance_tol:
        raise Resonance(f"sigma(B) meets the forcing spectrum (gap {gap:.3e})", gap=gap)

    eye = np.eye(f.dim, dtype=complex)
    envelopes = np.zeros((f.n_modes, len(times), f.dim), dtype=complex)
    conds = np.zeros(f.n_modes)
    for j, mat in enumerate(mats):
        for k, (omega, coeff) in enumerate(f.modes()):
            mode_matrix = eye - np.exp(-1j * omega) * mat
            conds[k] = max(conds[k], float(np.linalg.cond(mode_matrix)))
            envelopes[k, j] = dense_solve(mode_matrix, coeff)
    if np.any(conds > settings.cond_cap):
        raise Resonance(f"difference mode system ill-conditioned (cond {conds.max():.3e})", gap=gap)

    report = SolveReport(gap=gap, mode_conds=conds.tolist(), seed=settings.seed, near_resonance=gap < 10 * settings.resonance_tol)
    solution = MildSolution(f.dim, tuple(float(w) for w in f.omegas), envelopes, report)

    rng = np.random.default_rng(settings.seed)
    probes = rng.uniform(-5.0, 5.0, size=settings.n_pairs)
    worst = 0.0
    for t in probes:
        lhs = solution(float(t))
        rhs = family(float(t)) @ solution(float(t) - 1.0) + f(float(t))
        worst = max(worst, float(np.linalg.norm(lhs - rhs)))
    report.residual = worst
    report.norm_u = sup_norm(solution._poly, NORM_WINDOW, 1.0 / (4 * settings.m_env))
    report.norm_f = sup_norm(f, NORM_WINDOW, 1.0 / (4 * settings.m_env))
    if not worst < settings.resid_tol:
        raise CertificationFailure(f"difference-equation residual {worst:.3e} >= {settings.resid_tol:g}", residual=worst)
    return solution
