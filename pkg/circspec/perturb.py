"""
Small nonlinear perturbations ``x' = A(t) x + f(t) + eps H(t, x)``.

The perturbed problem is solved by Picard iteration of the linear solver on a
truncated frequency module, with the nonlinearity cut off outside the ball of
radius ``2 rho M`` (``rho`` the gain of the linear solution operator, ``M``
the size of the forcing). The admissible size of ``eps`` is
``1 / (4 rho l(2 rho M))`` where ``l`` is the local Lipschitz modulus of H.
"""

import itertools
import logging
import math
from dataclasses import asdict, dataclass, field
from functools import cached_property
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial.legendre import leggauss

from circspec.errors import (
    CertificationFailure,
    CutoffActiveAtFixedPoint,
    EpsilonTooLarge,
    InvalidInput,
    IterationDiverged,
    ModuleOverflow,
    Resonance,
)
from circspec.funcspace import FREQ_TOL, TrigPolynomial, sup_norm
from circspec.process import PeriodicSystem, check_unit_period, monodromy, propagate_forced, spectral_gap
from circspec.solver import (
    NORM_WINDOW,
    MildSolution,
    SolverSettings,
    forcing_angles,
    residual,
    solve_linear,
)
from circspec.utils import TWO_PI, parallel_map

logger = logging.getLogger(__name__)

MAX_COMBINATIONS = 1_000_000


# Frequency module

@dataclass(frozen=True)
class FrequencyModule:
    """
    Truncated module ``{sum n_k w_k + 2π m : sum |n_k| <= q, |m| <= m_cap}``.

    Attributes:
        q: Largest combination order
        m_cap: Largest multiple of 2π
    """

    q: int = 3
    m_cap: int = 3

    def __post_init__(self):
        if int(self.q) < 1 or int(self.m_cap) < 0:
            raise InvalidInput("module order q must be >= 1 and m_cap >= 0")

    def members(self, base: Sequence[float]) -> np.ndarray:
        """
        Sorted distinct members generated by ``base``.

        Raises:
            ModuleOverflow: If the combination count is not enumerable
        """
        gens: List[float] = []
        for w in sorted(float(x) for x in base):
            if abs(w) > FREQ_TOL and all(abs(w - g) > FREQ_TOL for g in gens):
                gens.append(w)
        if (2 * self.q + 1) ** len(gens) > MAX_COMBINATIONS:
            raise ModuleOverflow(f"{len(gens)} generators at order {self.q} exceed the enumeration limit")
        sums = [0.0]
        if gens:
            vecs = np.array(list(itertools.product(range(-self.q, self.q + 1), repeat=len(gens))))
            vecs = vecs[np.abs(vecs).sum(axis=1) <= self.q]
            sums = vecs @ np.array(gens)
        shifts = TWO_PI * np.arange(-self.m_cap, self.m_cap + 1)
        values = np.sort((np.asarray(sums)[:, None] + shifts[None, :]).ravel())
        keep = np.concatenate([[True], np.diff(values) > FREQ_TOL])
        return values[keep]


# Nonlinearities

@dataclass(frozen=True)
class LipModulus:
    """Nondecreasing polynomial bound ``l(r) = sum_i a_i r^i`` with ``a_i >= 0``."""

    poly_coeffs: Tuple[float, ...]

    def __post_init__(self):
        coeffs = tuple(float(a) for a in self.poly_coeffs)
        if any(a < 0 or not math.isfinite(a) for a in coeffs):
            raise InvalidInput("Lipschitz modulus coefficients must be finite and nonnegative")
        object.__setattr__(self, "poly_coeffs", coeffs or (0.0,))

    def __call__(self, r: float) -> float:
        return float(sum(a * r ** i for i, a in enumerate(self.poly_coeffs)))

    @property
    def is_zero(self) -> bool:
        return all(a == 0 for a in self.poly_coeffs)


def galerkin_tensor(n_modes: int) -> np.ndarray:
    """
    ``T[j, l, n] = (2/π) int_0^π sin(jx) sin(lx) sin(nx) dx`` for j, l, n = 1..n_modes.

    Gauss-Legendre with ``8 n_modes + 16`` nodes.
    """
    nodes, weights = leggauss(8 * n_modes + 16)
    x = 0.5 * math.pi * (nodes + 1.0)
    w = 0.5 * math.pi * weights
    k = np.arange(1, n_modes + 1)
    basis = np.sin(np.outer(k, x))  # (n, nodes)
    tensor = np.einsum("jq,lq,nq,q->jln", basis, basis, basis, w) * (2.0 / math.pi)
    tensor[np.abs(tensor) < 1e-14] = 0.0
    return tensor


@dataclass(frozen=True, eq=False)
class NemytskyMap:
    """
    Nonlinearity ``H(t, x)`` with ``H(t, 0) = 0`` and ``H(t + 1, x) = H(t, x)``.

    Attributes:
        kind: ``polynomial`` or ``heat_quadratic``
        dim: State dimension
        terms: For polynomial maps, ``(power, coefficient)`` pairs meaning
            ``coefficient(t) * x**power`` taken componentwise
        b: For heat_quadratic maps, the scalar coefficient of ``w^2``
        lip: Local Lipschitz modulus; derived from the coefficients when omitted
    """

    kind: str
    dim: int
    terms: Tuple[Tuple[int, TrigPolynomial], ...] = ()
    b: Optional[TrigPolynomial] = None
    lip: Optional[LipModulus] = None

    def __post_init__(self):
        if self.kind not in ("polynomial", "heat_quadratic"):
            raise InvalidInput(f"unknown nonlinearity kind '{self.kind}'")
        if self.kind == "polynomial":
            for power, coeff in self.terms:
                if int(power) < 1:
                    raise InvalidInput("polynomial powers must be >= 1 so that H(t, 0) = 0")
                if coeff.dim not in (1, self.dim):
                    raise InvalidInput(f"coefficient dimension {coeff.dim} does not match state dimension {self.dim}")
                check_unit_period(coeff, f"coefficient of x^{power}")
        else:
            if self.b is None or self.b.dim != 1:
                raise InvalidInput("heat_quadratic needs a scalar coefficient b")
            check_unit_period(self.b, "heat_quadratic coefficient b")
        if self.lip is None:
            object.__setattr__(self, "lip", self._derived_modulus())

    @classmethod
    def polynomial(cls, dim: int, terms: Sequence[Tuple[int, TrigPolynomial]], lip: Optional[LipModulus] = None) -> "NemytskyMap":
        return cls("polynomial", dim, tuple((int(p), c) for p, c in terms), lip=lip)

    @classmethod
    def heat_quadratic(cls, n_modes: int, b: TrigPolynomial, lip: Optional[LipModulus] = None) -> "NemytskyMap":
        """
        Galerkin projection of ``b(t) v^2`` onto ``n_modes`` sine modes.

        Uses the exact product tensor of :func:`galerkin_tensor` (Gauss-Legendre
        quadrature) instead of collocation on ``4 n_modes`` spatial points.
        """
        return cls("heat_quadratic", n_modes, b=b, lip=lip)

    @cached_property
    def tensor(self) -> np.ndarray:
        return galerkin_tensor(self.dim)

    def _derived_modulus(self) -> LipModulus:
        if self.kind == "heat_quadratic":
            return LipModulus((0.0, 2.0 * self.b.norm_bound() * float(np.linalg.norm(self.tensor))))
        top = max((p for p, _ in self.terms), default=1)
        coeffs = [0.0] * top
        for power, coeff in self.terms:
            size = float(np.max(np.sum(np.abs(coeff.coeffs), axis=0))) if not coeff.is_zero else 0.0
            coeffs[power - 1] += power * size
        return LipModulus(tuple(coeffs))

    def rescaled(self, tau: float) -> "NemytskyMap":
        """The nonlinearity seen on a unit-period clock, ``tau * H(tau s, x)``."""
        tau = float(tau)
        if tau == 1.0:
            return self
        lip = LipModulus(tuple(tau * a for a in self.lip.poly_coeffs))
        if self.kind == "heat_quadratic":
            return NemytskyMap.heat_quadratic(self.dim, self.b.rescaled(tau), lip)
        return NemytskyMap.polynomial(self.dim, [(p, c.rescaled(tau)) for p, c in self.terms], lip)

    def __call__(self, t: float, x: Sequence[complex]) -> np.ndarray:
        """Pointwise value ``H(t, x)``."""
        x = np.asarray(x, dtype=complex)
        if self.kind == "heat_quadratic":
            return self.b(t)[0] * np.einsum("j,l,jln->n", x, x, self.tensor)
        out = np.zeros(self.dim, dtype=complex)
        for power, coeff in self.terms:
            out = out + coeff(t) * x ** power
        return out

    @classmethod
    def from_dict(
        cls,
        data: Dict[str, Any],
        dim: int,
        period: float = 1.0,
        b_default: Optional[TrigPolynomial] = None,
    ) -> "NemytskyMap":
        """
        Parse ``{"kind", "terms": [{"power", "coeff"}], "b", "lip": {"poly_coeffs"}}``.

        Args:
            data: Nonlinearity document
            dim: State dimension of the system it perturbs
            period: Period in the document's own time; the result runs on a unit clock
            b_default: Heat coefficient, already on the unit clock, used when
                the document gives none
        """
        if not isinstance(data, dict):
            raise InvalidInput("nonlinearity must be a mapping")
        tau = float(period)
        lip = None
        if data.get("lip") is not None:
            lip = LipModulus(tuple(tau * float(a) for a in data["lip"].get("poly_coeffs") or ()))
        kind = data.get("kind", "polynomial")
        if kind == "heat_quadratic":
            if data.get("b"):
                b = TrigPolynomial.from_dict(data["b"]).rescaled(tau)
            elif b_default is not None and not b_default.is_zero:
                b = b_default
            else:
                b = TrigPolynomial.constant(tau)
            return cls.heat_quadratic(dim, b, lip)
        terms = []
        for i, term in enumerate(data.get("terms") or []):
            try:
                power = int(term["power"])
                coeff = TrigPolynomial.from_dict(term["coeff"])
            except (KeyError, TypeError, ValueError) as e:
                raise InvalidInput(f"nonlinearity term {i} is malformed: {e}")
            terms.append((power, coeff.rescaled(tau)))
        return cls.polynomial(dim, terms, lip)

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"kind": self.kind}
        if self.kind == "heat_quadratic":
            data["b"] = self.b.to_dict()
        else:
            data["terms"] = [{"power": p, "coeff": c.to_dict()} for p, c in self.terms]
        data["lip"] = {"poly_coeffs": list(self.lip.poly_coeffs)}
        return data


def _pruned(poly: TrigPolynomial, tol: float) -> TrigPolynomial:
    if poly.is_zero or tol <= 0:
        return poly
    keep = np.linalg.norm(poly.coeffs, axis=1) > tol
    return TrigPolynomial(poly.dim, poly.omegas[keep], poly.coeffs[keep])


def nemytsky_expand(H: NemytskyMap, g: TrigPolynomial, prune: float = 0.0) -> TrigPolynomial:
    """Untruncated expansion of ``t -> H(t, g(t))``."""
    if g.dim != H.dim:
        raise InvalidInput(f"function dimension {g.dim} does not match nonlinearity dimension {H.dim}")
    if H.kind == "heat_quadratic":
        tensor = H.tensor
        square = g.product(g, combine=lambda x, y: np.einsum("kj,kl,jln->kn", x, y, tensor))
        return H.b.product(_pruned(square, prune))
    total = TrigPolynomial.zero(H.dim)
    power_cache = {1: g}
    for power, coeff in sorted(H.terms, key=lambda term: term[0]):
        for p in range(2, power + 1):
            if p not in power_cache:
                power_cache[p] = _pruned(power_cache[p - 1].product(g), prune)
        total = total + coeff.product(power_cache[power])
    return total


def nemytsky_apply(
    H: NemytskyMap,
    g: TrigPolynomial,
    order_cap: int = 3,
    m_cap: int = 3,
    base: Optional[Sequence[float]] = None,
    max_modes: int = 512,
) -> Tuple[TrigPolynomial, float]:
    """
    ``H(t, g(t))`` projected onto the truncated frequency module.

    Args:
        H: Nonlinearity
        g: Argument
        order_cap: Module combination order q
        m_cap: Largest multiple of 2π in the module
        base: Module generators (default: the frequencies of ``g``)
        max_modes: Largest admissible number of retained modes

    Returns:
        Tuple of (projected polynomial, mass of the dropped coefficients)

    Raises:
        ModuleOverflow: If more than ``max_modes`` modes survive the projection
    """
    module = FrequencyModule(order_cap, m_cap)
    members = module.members(g.omegas if base is None else base)
    expanded = nemytsky_expand(H, g)
    kept, dropped = expanded.project(members)
    if kept.n_modes > max_modes:
        raise ModuleOverflow(f"{kept.n_modes} modes after truncation exceed max_modes={max_modes}")
    if dropped > 0:
        logger.debug(f"nemytsky truncation dropped mass {dropped:.3e}")
    return kept, dropped


def cutoff_apply(
    H: NemytskyMap,
    g: TrigPolynomial,
    bound: float,
    norm: Optional[float] = None,
    **module_kwargs,
) -> Tuple[TrigPolynomial, float]:
    """
    Cut-off map: ``H(g)`` inside the ball of radius ``bound``, ``H(bound g / ||g||)`` outside.

    Args:
        H: Nonlinearity
        g: Argument
        bound: Ball radius ``2 rho M``
        norm: Sup-norm of ``g`` if already known
        **module_kwargs: Forwarded to ``nemytsky_apply``

    Returns:
        Same as ``nemytsky_apply``
    """
    if not bound > 0:
        raise InvalidInput("cut-off radius must be positive")
    if g.is_zero:
        return TrigPolynomial.zero(H.dim), 0.0
    size = sup_norm(g, NORM_WINDOW, 1.0 / 256) if norm is None else norm
    if size > bound:
        g = g * (bound / size)
    return nemytsky_apply(H, g, **module_kwargs)


# Gains and thresholds

def _mode_gains(sys: PeriodicSystem, freqs: np.ndarray, t: float) -> np.ndarray:
    """``||(I - e^{-iw} P(t))^{-1}|| * ||G_w(t)||`` for each frequency."""
    d = sys.dim
    eye = np.eye(d, dtype=complex)
    forcings = [TrigPolynomial.single(w, np.exp(-1j * w * t) * eye[i]) for w in freqs for i in range(d)]
    op, integrals = propagate_forced(sys, t - 1.0, t, forcings)
    gains = np.zeros(len(freqs))
    for k, w in enumerate(freqs):
        columns = integrals[k * d:(k + 1) * d].T
        inverse = np.linalg.inv(eye - np.exp(-1j * w) * op.matrix)
        gains[k] = np.linalg.norm(inverse, 2) * np.linalg.norm(columns, 2)
    return gains


def estimate_rho(
    sys: PeriodicSystem,
    freqs: Sequence[float],
    m_env: int = 64,
    resonance_tol: float = 1e-4,
) -> float:
    """
    Gain of the linear solution operator over a frequency set.

    The largest mode gain over ``freqs`` and the envelope grid ``j / m_env``;
    a lower estimate of the operator norm.

    Raises:
        Resonance: If some frequency is within ``resonance_tol`` of a multiplier
    """
    freqs = np.asarray(list(freqs), dtype=float)
    if len(freqs) == 0:
        raise InvalidInput("estimate_rho needs at least one frequency")
    gap = spectral_gap(monodromy(sys, 0.0), forcing_angles(TrigPolynomial(1, freqs, np.ones((len(freqs), 1)))))
    if gap <= resonance_tol:
        raise Resonance(f"frequency set meets the monodromy spectrum (gap {gap:.3e})", gap=gap)
    times = np.arange(m_env) / m_env
    gains = parallel_map(lambda t: _mode_gains(sys, freqs, t), times)
    rho = float(np.max(gains))
    logger.debug(f"rho = {rho:.6g} over {len(freqs)} frequencies x {m_env} envelope times")
    return rho


def epsilon_threshold(rho: float, lip: Union[LipModulus, Callable[[float], float]], M: float) -> float:
    """
    ``1 / (4 rho l(2 rho M))``; ``inf`` when ``l(2 rho M) = 0``.
    """
    if not (rho > 0 and M > 0):
        raise InvalidInput("rho and M must be positive")
    slope = float(lip(2.0 * rho * M))
    if slope <= 0:
        return math.inf
    return 1.0 / (4.0 * rho * slope)


# Picard iteration

@dataclass(frozen=True)
class PerturbSettings:
    """
    Perturbation solver policy.

    Attributes:
        q: Module combination order
        m_cap: Largest multiple of 2π in the module
        max_modes: Largest number of modes retained by the Nemytsky projection
        picard_tol: Stop when a Picard step is smaller than this
        max_iter: Iteration cap
        resid_tol: Certification threshold for the final residual
        force: Allow epsilon above the admissible threshold
        prune: Coefficients below this are dropped between iterations
    """

    q: int = 3
    m_cap: int = 3
    max_modes: int = 512
    picard_tol: float = 1e-8
    max_iter: int = 200
    resid_tol: float = 1e-5
    force: bool = False
    prune: float = 1e-14

    def __post_init__(self):
        FrequencyModule(self.q, self.m_cap)
        if int(self.max_modes) < 1 or int(self.max_iter) < 1:
            raise InvalidInput("max_modes and max_iter must be positive")
        if not (self.picard_tol > 0 and self.resid_tol > 0 and self.prune >= 0):
            raise InvalidInput("perturbation tolerances must be positive")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class PerturbReport:
    """Certificate of a perturbed solve."""

    rho: float = 0.0
    M: float = 0.0
    epsilon: float = 0.0
    epsilon_0: float = math.inf
    iterations: int = 0
    contraction_factor: float = 0.0
    final_norm: float = 0.0
    bound_ok: bool = True
    inverse_bound: float = math.inf
    truncation: float = 0.0
    residual: float = 0.0
    steps: List[float] = field(default_factory=list)
    probes: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _fill_thresholds(
    report: PerturbReport,
    sys: PeriodicSystem,
    f: TrigPolynomial,
    H: NemytskyMap,
    settings: PerturbSettings,
    solver_settings: SolverSettings,
) -> float:
    """Write ``rho``, ``M``, ``epsilon_0`` and the inverse bound; return the cut-off radius ``2 rho M``."""
    members = FrequencyModule(settings.q, settings.m_cap).members(f.omegas)
    report.probes = {"freqs": members.tolist(), "m_env": solver_settings.m_env}
    rho = estimate_rho(sys, members, solver_settings.m_env, solver_settings.resonance_tol)
    M = sup_norm(f, NORM_WINDOW, 1.0 / 256)
    if not M > 0:
        M = max(f.norm_bound(), settings.picard_tol)
    radius = 2.0 * rho * M
    slope = H.lip(radius)
    report.rho, report.M, report.epsilon_0 = rho, M, epsilon_threshold(rho, H.lip, M)
    if 1.0 / rho > abs(report.epsilon) * 2.0 * slope:
        report.inverse_bound = M / (1.0 / rho - abs(report.epsilon) * 2.0 * slope)
    return radius


def solve_perturbed(
    sys: PeriodicSystem,
    f: TrigPolynomial,
    H: NemytskyMap,
    epsilon: float,
    settings: Optional[PerturbSettings] = None,
    solver_settings: Optional[SolverSettings] = None,
    start: Optional[TrigPolynomial] = None,
) -> Tuple[MildSolution, PerturbReport]:
    """
    Bounded mild solution of the perturbed equation, locally unique.

    Iterates ``w <- solve_linear(f + eps H_M(w))`` from ``start`` (default:
    the linear solution) on the module generated by ``f``'s frequencies.

    Args:
        sys: Periodic system
        f: Forcing
        H: Nonlinearity
        epsilon: Perturbation size
        settings: Perturbation settings
        solver_settings: Linear solver settings
        start: Initial iterate

    Returns:
        Tuple of (solution, PerturbReport)

    Raises:
        EpsilonTooLarge: If ``|epsilon| >= epsilon_0`` and ``force`` is off
        IterationDiverged: If three consecutive step ratios reach 1, or the
            iteration cap is hit
        CutoffActiveAtFixedPoint: If the limit lies outside the cut-off ball
        CertificationFailure: If the uncut residual reaches ``resid_tol``
    """
    settings = settings or PerturbSettings()
    solver_settings = solver_settings or SolverSettings()
    if H.dim != sys.dim:
        raise InvalidInput(f"nonlinearity dimension {H.dim} does not match system dimension {sys.dim}")
    report = PerturbReport(epsilon=float(epsilon))
    base = f.omegas

    if epsilon == 0:
        solution = solve_linear(sys, f, solver_settings)
        report.iterations = 1
        report.residual = solution.report.residual
        report.final_norm = solution.report.norm_u
        try:
            _fill_thresholds(report, sys, f, H, settings, solver_settings)
        except Resonance as exc:
            # the module may meet a multiplier the forcing itself avoids
            report.rho = report.M = report.epsilon_0 = report.inverse_bound = math.nan
            logger.warning(f"admissible threshold not computed: {exc}")
        return solution, report

    radius = _fill_thresholds(report, sys, f, H, settings, solver_settings)
    rho, M, eps0 = report.rho, report.M, report.epsilon_0
    if abs(epsilon) >= eps0:
        if not settings.force:
            raise EpsilonTooLarge(epsilon, eps0)
        logger.warning(f"epsilon {epsilon:g} exceeds the admissible threshold {eps0:.6g}; continuing (forced)")

    module_kwargs = dict(order_cap=settings.q, m_cap=settings.m_cap, base=base, max_modes=settings.max_modes)
    solution = None
    if start is None:
        solution = solve_linear(sys, f, solver_settings, certify=False)
        current = solution.as_trig_polynomial(prune=settings.prune)
    else:
        current = start

    streak = 0
    for iteration in range(1, settings.max_iter + 1):
        image, dropped = cutoff_apply(H, current, radius, **module_kwargs)
        report.truncation = max(report.truncation, dropped)
        solution = solve_linear(sys, f + epsilon * image, solver_settings, certify=False)
        following = solution.as_trig_polynomial(prune=settings.prune)
        step = (following - current).norm_bound()
        if report.steps and report.steps[-1] > 0:
            ratio = step / report.steps[-1]
            report.contraction_factor = max(report.contraction_factor, ratio)
            streak = streak + 1 if ratio >= 1 else 0
            if streak >= 3:
                raise IterationDiverged(f"Picard steps grew for 3 consecutive iterations (last ratio {ratio:.3g})")
        report.steps.append(step)
        current = following
        report.iterations = iteration
        logger.debug(f"picard iteration {iteration}: step {step:.3e}")
        if step < settings.picard_tol:
            break
    else:
        raise IterationDiverged(f"no convergence to picard_tol={settings.picard_tol:g} in {settings.max_iter} iterations")

    report.final_norm = sup_norm(current, NORM_WINDOW, 1.0 / 256)
    report.bound_ok = report.final_norm <= radius * (1.0 + 1e-6)
    if report.truncation > settings.picard_tol:
        logger.warning(f"frequency-module truncation dropped mass up to {report.truncation:.3e}")
    if not report.bound_ok:
        raise CutoffActiveAtFixedPoint(
            f"fixed point norm {report.final_norm:.6g} exceeds the cut-off radius {radius:.6g}",
        )

    uncut, _ = nemytsky_apply(H, current, **module_kwargs)
    report.residual = residual(
        sys,
        solution,
        f + epsilon * uncut,
        solver_settings.n_pairs,
        solver_settings.seed,
        solver_settings.max_span,
    )
    solution.report.residual = report.residual
    solution.report.iterations = report.iterations
    if not report.residual < settings.resid_tol:
        raise CertificationFailure(
            f"perturbed residual {report.residual:.3e} >= {settings.resid_tol:g}",
            residual=report.residual,
        )
    logger.info(
        f"perturbed solve converged in {report.iterations} iteration(s): rho={rho:.4g}, M={M:.4g}, "
        f"eps0={eps0:.4g}, |w|={report.final_norm:.6g}"
    )
    return solution, report
