"""
Translation resolvent, circular spectrum and Carleman spectrum.

For a bounded function g the transform ``lambda -> R(lambda, S) g`` is
analytic off the unit circle. Points of the circle where it blows up form
the circular spectrum of g. The blow-up is measured by approaching each probed
angle radially and fitting the growth exponent ``s`` in
``||R((1 + delta) e^{i theta}, S) g|| ~ delta^{-s}``: simple poles fit
``s ~ 1`` and regular points fit ``s ~ 0``.

Trigonometric polynomials have the closed form
``R(lambda, S) g(t) = sum_k c_k e^{i w_k t} / (lambda - e^{i w_k tau})``;
grid functions go through the Neumann series of ``S``.
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import simpson
from scipy.optimize import minimize_scalar

from circspec.errors import (
    InvalidInput,
    LambdaOnCircle,
    LambdaOnImaginaryAxis,
    WindowOutOfDomain,
    WindowTooShort,
)
from circspec.funcspace import BoundedFunction, GridFunction, TrigPolynomial, UnitCircleSet
from circspec.utils import TWO_PI, parallel_map, wrap_angle

logger = logging.getLogger(__name__)

CIRCLE_GUARD = 1e-6
NORM_FLOOR = 1e-300
APPROACHES = ("outside", "inside", "both")


@dataclass(frozen=True)
class ResolventSettings:
    """
    Numerical policy for resolvent evaluation and spectrum detection.

    Attributes:
        series_tol: Tail tolerance of the Neumann series
        max_terms: Cap on Neumann terms
        radial_deltas: Strictly decreasing distances from the unit circle
        angle_grid: Number of equispaced angles probed on the circle
        blowup_threshold: Minimum fitted exponent for spectrum membership
        approach: ``outside`` (|lambda| = 1 + delta), ``inside`` or ``both``
        period: Translation step tau; the resolvent is taken for S(tau)
        sup_times: Sample times per period for the finite-window sup
        horizon: Carleman integration horizon
        freq_step: Frequency grid step of the Carleman scan (default 2π/angle_grid)
    """

    series_tol: float = 1e-10
    max_terms: int = 2000
    radial_deltas: Tuple[float, ...] = (1e-1, 3e-2, 1e-2, 3e-3, 1e-3)
    angle_grid: int = 720
    blowup_threshold: float = 0.5
    approach: str = "outside"
    period: float = 1.0
    sup_times: int = 8
    horizon: float = 50.0
    freq_step: Optional[float] = None

    def __post_init__(self):
        deltas = tuple(float(d) for d in self.radial_deltas)
        object.__setattr__(self, "radial_deltas", deltas)
        if len(deltas) < 2:
            raise InvalidInput("radial_deltas needs at least two entries to fit an exponent")
        if any(d <= 0 or d >= 0.5 for d in deltas):
            raise InvalidInput("radial_deltas must lie in (0, 0.5)")
        if any(b >= a for a, b in zip(deltas, deltas[1:])):
            raise InvalidInput("radial_deltas must be strictly decreasing")
        if int(self.angle_grid) < 8:
            raise InvalidInput("angle_grid must be at least 8")
        if not self.series_tol > 0:
            raise InvalidInput("series_tol must be positive")
        if int(self.max_terms) < 1:
            raise InvalidInput("max_terms must be a positive integer")
        if not self.blowup_threshold > 0:
            raise InvalidInput("blowup_threshold must be positive")
        if self.approach not in APPROACHES:
            raise InvalidInput(f"approach must be one of {', '.join(APPROACHES)}")
        if not self.period > 0:
            raise InvalidInput("period must be positive")
        if int(self.sup_times) < 1:
            raise InvalidInput("sup_times must be positive")
        if not self.horizon > 0:
            raise InvalidInput("horizon must be positive")
        if self.freq_step is not None and not self.freq_step > 0:
            raise InvalidInput("freq_step must be positive")

    @property
    def angular_resolution(self) -> float:
        return TWO_PI / int(self.angle_grid)

    @property
    def frequency_step(self) -> float:
        return self.freq_step if self.freq_step is not None else self.angular_resolution

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["radial_deltas"] = list(self.radial_deltas)
        return data


@dataclass
class SpectrumReport:
    """Result of a circular-spectrum estimate."""

    method: str
    spectrum: UnitCircleSet
    per_angle: List[Tuple[float, float]]
    exploratory: bool = False
    period: float = 1.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "method": self.method,
            "angular_resolution": self.spectrum.angular_resolution,
            "spectrum": list(self.spectrum.angles),
            "scores": list(self.spectrum.scores),
            "per_angle": [{"theta": float(th), "exponent": float(s)} for th, s in self.per_angle],
            "exploratory": self.exploratory,
            "period": self.period,
        }


@dataclass
class CarlemanValue:
    """Quadrature value of the Carleman transform with its error budget."""

    value: np.ndarray
    tail_bound: float
    horizon: float
    truncated: bool = False


@dataclass
class FrequencyReport:
    """Detected Carleman frequencies."""

    frequencies: Tuple[float, ...]
    scores: Tuple[float, ...]
    resolution: float
    omega_range: Tuple[float, float]
    per_frequency: List[Tuple[float, float]] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "frequencies": list(self.frequencies),
            "scores": list(self.scores),
            "resolution": self.resolution,
            "omega_range": list(self.omega_range),
        }


@dataclass
class SpectrumComparison:
    circular: UnitCircleSet
    carleman: Tuple[float, ...]
    mapped: UnitCircleSet
    distance: float
    consistent: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "circular": list(self.circular.angles),
            "carleman": list(self.carleman),
            "carleman_on_circle": list(self.mapped.angles),
            "hausdorff": self.distance,
            "consistent": self.consistent,
        }


# Resolvent

def _check_lambda(lam: complex) -> None:
    if abs(abs(lam) - 1.0) <= CIRCLE_GUARD:
        raise LambdaOnCircle(f"|lambda|={abs(lam):.12g} is within {CIRCLE_GUARD:g} of the unit circle")


def resolvent_poly(g: TrigPolynomial, lam: complex, period: float = 1.0) -> TrigPolynomial:
    """Closed-form ``R(lambda, S(period)) g`` as a trigonometric polynomial."""
    _check_lambda(lam)
    poles = np.exp(1j * g.omegas * period)
    return TrigPolynomial(g.dim, g.omegas, g.coeffs / (lam - poles)[:, None])


def _neumann_terms(norm_g: float, modulus: float, settings: ResolventSettings) -> Tuple[int, bool]:
    """Smallest N with ``||g|| q^(N+1) / ||lambda| - 1| < tol``, capped at max_terms."""
    gap = abs(modulus - 1.0)
    if norm_g <= 0:
        return 0, False
    q = 1.0 / modulus if modulus > 1 else modulus
    ratio = settings.series_tol * gap / norm_g
    if ratio >= 1:
        return 0, False
    needed = int(math.floor(math.log(ratio) / math.log(q)))
    needed = max(needed, 0)
    if needed > settings.max_terms:
        return int(settings.max_terms), True
    return needed, False


def _grid_norm(g: GridFunction) -> float:
    return float(np.max(np.linalg.norm(g.samples, axis=1)))


def resolvent_apply(
    g: BoundedFunction,
    lam: complex,
    t: float,
    settings: Optional[ResolventSettings] = None,
) -> np.ndarray:
    """
    Evaluate ``(R(lambda, S) g)(t)``.

    Args:
        g: Trigonometric polynomial (closed form) or grid function (Neumann series)
        lam: Spectral parameter off the unit circle
        t: Evaluation time
        settings: Resolvent settings; ``settings.period`` selects S(tau)

    Returns:
        Complex vector of length ``g.dim``

    Raises:
        LambdaOnCircle: If ``||lambda| - 1| <= 1e-6``
        WindowTooShort: If the series runs past the sampled window
    """
    settings = settings or ResolventSettings()
    lam = complex(lam)
    _check_lambda(lam)
    tau = settings.period

    if isinstance(g, TrigPolynomial):
        return resolvent_poly(g, lam, tau)(float(t))

    modulus = abs(lam)
    n_terms, capped = _neumann_terms(_grid_norm(g), modulus, settings)
    if capped:
        logger.warning(f"Neumann series capped at {settings.max_terms} terms for |lambda|={modulus:.6g}")
    n = np.arange(n_terms + 1)
    if modulus > 1:
        times = float(t) + n * tau
        weights = lam ** (-(n + 1.0))
    else:
        times = float(t) - (n + 1) * tau
        weights = -(lam ** n.astype(float))
    if not g.covers(float(times.min()), float(times.max())):
        raise WindowTooShort(
            f"Neumann series needs {n_terms + 1} translates of {tau:g} from t={t:g}, "
            f"window is [{g.t0:.6g}, {g.t_end:.6g}]"
        )
    return weights @ g.values_at(times)


def _window_times(settings: ResolventSettings) -> np.ndarray:
    return settings.period * np.arange(settings.sup_times) / settings.sup_times


def _poly_block_norms(g: TrigPolynomial, lams: np.ndarray, settings: ResolventSettings) -> np.ndarray:
    """Finite-window sup of ``||R(lambda, S) g||`` for many lambdas at once."""
    if g.is_zero:
        return np.zeros(len(lams))
    poles = np.exp(1j * g.omegas * settings.period)
    kernel = 1.0 / (lams[:, None] - poles[None, :])
    best = np.zeros(len(lams))
    for t in _window_times(settings):
        values = kernel @ (g.coeffs * np.exp(1j * g.omegas * t)[:, None])
        best = np.maximum(best, np.linalg.norm(values, axis=1))
    return best


def _grid_block_norms(
    g: GridFunction,
    lams: np.ndarray,
    modulus: float,
    settings: ResolventSettings,
) -> np.ndarray:
    """Neumann-series norms for lambdas sharing one modulus."""
    shift = g.shift_steps(settings.period)
    if shift <= 0:
        raise InvalidInput("the translation period must be positive")
    n_terms, capped = _neumann_terms(_grid_norm(g), modulus, settings)
    if capped:
        logger.warning(f"Neumann series capped at {settings.max_terms} terms for |lambda|={modulus:.6g}")
    n = np.arange(n_terms + 1)
    offsets = [int(round(p * shift / settings.sup_times)) for p in range(settings.sup_times)]
    if modulus > 1:
        last = max(offsets) + n_terms * shift
        if last > g.n - 1:
            raise WindowTooShort(
                f"{n_terms + 1} forward translates need {last * g.dt:.6g} time units, "
                f"window holds {g.length:.6g}"
            )
        weights = np.power(lams[:, None], -(n[None, :] + 1.0))
        rows = [p + n * shift for p in offsets]
    else:
        first = g.n - 1 - max(offsets) - (n_terms + 1) * shift
        if first < 0:
            raise WindowTooShort(
                f"{n_terms + 1} backward translates need {(g.n - 1 - first) * g.dt:.6g} time units, "
                f"window holds {g.length:.6g}"
            )
        weights = -np.power(lams[:, None], n[None, :].astype(float))
        rows = [g.n - 1 - p - (n + 1) * shift for p in offsets]
    best = np.zeros(len(lams))
    for idx in rows:
        values = weights @ g.samples[idx]
        best = np.maximum(best, np.linalg.norm(values, axis=1))
    return best


def _circle_norms(
    g: BoundedFunction,
    thetas: np.ndarray,
    delta: float,
    settings: ResolventSettings,
) -> np.ndarray:
    """Norm of the resolvent at radius 1 +- delta for every angle in ``thetas``."""
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    sides = {"outside": (1.0 + delta,), "inside": (1.0 - delta,), "both": (1.0 + delta, 1.0 - delta)}
    total = np.zeros(len(thetas))
    for modulus in sides[settings.approach]:
        lams = modulus * np.exp(1j * thetas)
        if isinstance(g, TrigPolynomial):
            total += _poly_block_norms(g, lams, settings)
        else:
            total += _grid_block_norms(g, lams, modulus, settings)
    return total


def resolvent_norm_profile(
    g: BoundedFunction,
    theta: float,
    settings: Optional[ResolventSettings] = None,
) -> List[Tuple[float, float]]:
    """
    Radial profile of the resolvent norm toward ``e^{i theta}``.

    Returns:
        List of ``(delta, norm)`` for each delta in ``settings.radial_deltas``
    """
    settings = settings or ResolventSettings()
    if not 0.0 <= theta < TWO_PI:
        raise InvalidInput(f"theta must lie in [0, 2π), got {theta}")
    return [
        (delta, float(_circle_norms(g, np.array([theta]), delta, settings)[0]))
        for delta in settings.radial_deltas
    ]


# Exponent fitting and peak scans

def fit_exponents(deltas: Sequence[float], norms: np.ndarray, floor: float = 0.0) -> np.ndarray:
    """
    Least-squares blow-up exponents.

    Fits ``log(norm) = -s log(delta) + c`` column by column. Columns whose
    norms never exceed ``floor`` get exponent 0.

    Args:
        deltas: Radial distances, shape (n_deltas,)
        norms: Norms, shape (n_deltas, n_points)
        floor: Norms at or below this are treated as zero

    Returns:
        Exponents, shape (n_points,)
    """
    norms = np.asarray(norms, dtype=float)
    x = np.log(np.asarray(deltas, dtype=float))
    x = x - x.mean()
    y = np.log(np.maximum(norms, NORM_FLOOR))
    y = y - y.mean(axis=0, keepdims=True)
    slope = (x @ y) / (x @ x)
    exponents = -slope
    exponents[np.max(norms, axis=0) <= floor] = 0.0
    return exponents


def _runs(flags: np.ndarray, circular: bool) -> List[Tuple[int, int]]:
    """Contiguous runs of flagged indices as inclusive ``(start, stop)``; wrapped runs overshoot."""
    size = len(flags)
    if not np.any(flags):
        return []
    if np.all(flags):
        return [(0, size - 1)]
    runs: List[Tuple[int, int]] = []
    start = None
    for i, flagged in enumerate(flags):
        if flagged and start is None:
            start = i
        elif not flagged and start is not None:
            runs.append((start, i - 1))
            start = None
    if start is not None:
        runs.append((start, size - 1))
    if circular and len(runs) > 1 and runs[0][0] == 0 and runs[-1][1] == size - 1:
        head = runs.pop(0)
        tail = runs.pop()
        runs.append((tail[0], size + head[1]))
    return runs


def _scan_peaks(
    grid: np.ndarray,
    norm_fn: Callable[[np.ndarray, float], np.ndarray],
    settings: ResolventSettings,
    step: float,
    circular: bool,
) -> Tuple[List[Tuple[float, float]], List[float], np.ndarray]:
    """
    Scan a parameter grid for blow-up and refine every flagged cluster.

    Args:
        grid: Probed parameters (angles or frequencies)
        norm_fn: ``(params, delta) -> norms``
        settings: Resolvent settings (deltas, threshold)
        step: Grid spacing, used to bracket refinement
        circular: Whether the grid wraps around the circle

    Returns:
        Tuple of (peaks as ``(param, exponent)``, per-grid exponents, cluster flags)
    """
    deltas = settings.radial_deltas
    rows = parallel_map(lambda d: norm_fn(grid, d), deltas)
    norms = np.vstack(rows)
    exponents = fit_exponents(deltas, norms, floor=settings.series_tol)
    flags = exponents >= settings.blowup_threshold
    smallest = deltas[-1]

    peaks: List[Tuple[float, float]] = []
    size = len(grid)
    for start, stop in _runs(flags, circular):
        members = np.arange(start, stop + 1)
        if circular:
            params = grid[0] + members * step
        else:
            params = grid[members]
        best = int(np.argmax(norms[-1, members % size]))
        lo, hi = params[0] - step, params[-1] + step
        result = minimize_scalar(
            lambda x: -float(norm_fn(np.array([x]), smallest)[0]),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-10},
        )
        candidate = float(params[best])
        if result.success and -result.fun >= norms[-1, members[best] % size]:
            candidate = float(result.x)
        profile = np.array([norm_fn(np.array([candidate]), d)[0] for d in deltas])[:, None]
        exponent = float(fit_exponents(deltas, profile, floor=settings.series_tol)[0])
        exponent = max(exponent, float(exponents[members[best] % size]))
        peaks.append((candidate, exponent))
    return peaks, list(exponents), flags


def circular_spectrum(
    g: BoundedFunction,
    settings: Optional[ResolventSettings] = None,
    method: str = "auto",
) -> SpectrumReport:
    """
    Estimate the circular spectrum of ``g``.

    Trigonometric polynomials bypass the scan (``method="auto"``): the
    spectrum is ``{w_k tau mod 2π}`` exactly and only the per-angle exponents
    are fitted. Grid functions, or ``method="scan"``, probe every angle of
    the grid, flag exponents above the threshold and refine each flagged
    cluster to its peak.

    Args:
        g: Function to analyse
        settings: Resolvent settings
        method: ``auto`` or ``scan``

    Returns:
        SpectrumReport

    Raises:
        WindowTooShort: If a grid function is too short for the Neumann series
    """
    settings = settings or ResolventSettings()
    if method not in ("auto", "scan"):
        raise InvalidInput(f"unknown spectrum method '{method}'")
    resolution = settings.angular_resolution
    tau = settings.period

    if isinstance(g, TrigPolynomial) and method == "auto":
        if g.is_zero:
            return SpectrumReport("closed_form", UnitCircleSet.empty(resolution), [], period=tau)
        angles = wrap_angle(g.omegas * tau)
        merged = UnitCircleSet.from_angles(angles, resolution)
        per_angle = []
        for theta in merged.angles:
            profile = resolvent_norm_profile(g, theta, settings)
            deltas, norms = zip(*profile)
            per_angle.append((theta, float(fit_exponents(deltas, np.array(norms)[:, None])[0])))
        spectrum = UnitCircleSet(merged.angles, tuple(s for _, s in per_angle), resolution)
        logger.debug(f"closed-form spectrum: {len(spectrum)} angle(s)")
        return SpectrumReport("closed_form", spectrum, per_angle, period=tau)

    grid = resolution * np.arange(settings.angle_grid)
    peaks, exponents, _ = _scan_peaks(
        grid,
        lambda th, d: _circle_norms(g, th, d, settings),
        settings,
        resolution,
        circular=True,
    )
    spectrum = UnitCircleSet.from_angles(
        [wrap_angle(theta) for theta, _ in peaks],
        resolution,
        scores=[s for _, s in peaks],
    )
    exploratory = isinstance(g, GridFunction)
    if exploratory:
        logger.info(f"grid-function spectrum is exploratory: {len(spectrum)} angle(s) detected")
    method_tag = "neumann" if isinstance(g, GridFunction) else "scan"
    return SpectrumReport(method_tag, spectrum, list(zip(grid.tolist(), exponents)), exploratory, tau)


# Carleman transform

def carleman_closed_form(u: TrigPolynomial, lam: complex) -> np.ndarray:
    """``sum_k c_k / (lambda - i w_k)``, valid on both half-planes."""
    lam = complex(lam)
    if lam.real == 0:
        raise LambdaOnImaginaryAxis(f"Re(lambda) = 0 for lambda={lam}")
    if u.is_zero:
        return np.zeros(u.dim, dtype=complex)
    return (1.0 / (lam - 1j * u.omegas)) @ u.coeffs


def _simpson_count(span: float, rate: float, max_step: float = 0.005) -> int:
    intervals = int(math.ceil(span * max(rate, 1.0) / max_step))
    return intervals + (intervals % 2)


def carleman_transform(
    u: BoundedFunction,
    lam: complex,
    horizon: float = 50.0,
) -> CarlemanValue:
    """
    Carleman transform by composite Simpson quadrature.

    For ``Re lambda > 0`` integrates ``int_0^H e^{-lambda t} u(t) dt``; for
    ``Re lambda < 0`` integrates ``-int_0^H e^{lambda t} u(-t) dt``. Grid
    functions are integrated up to their window edge when it comes before
    the horizon, and the truncation is flagged.

    Args:
        u: Function to transform
        lam: Spectral parameter off the imaginary axis
        horizon: Integration horizon H

    Returns:
        CarlemanValue holding the value and the tail bound
        ``||u|| e^{-|Re lambda| H} / |Re lambda|``
    """
    lam = complex(lam)
    if lam.real == 0:
        raise LambdaOnImaginaryAxis(f"Re(lambda) = 0 for lambda={lam}")
    if not horizon > 0:
        raise InvalidInput("Carleman horizon must be positive")
    sign = 1.0 if lam.real > 0 else -1.0
    decay = abs(lam.real)
    truncated = False

    if isinstance(u, TrigPolynomial):
        rate = float(np.max(np.abs(lam - 1j * sign * u.omegas))) if not u.is_zero else abs(lam)
        span = horizon
        s = np.linspace(0.0, span, _simpson_count(span, rate) + 1)
        values = u(sign * s)
        norm_u = u.norm_bound()
    else:
        if sign > 0:
            if u.t0 > 1e-12:
                raise WindowOutOfDomain(f"window starts at {u.t0:.6g}; the transform needs t=0")
            span = min(horizon, u.t_end)
        else:
            if u.t_end < -1e-12:
                raise WindowOutOfDomain(f"window ends at {u.t_end:.6g}; the transform needs t=0")
            span = min(horizon, -u.t0)
        steps = int(math.floor(span / u.dt + 1e-9))
        if steps < 2:
            raise WindowTooShort("fewer than 3 samples on the integration side of t=0")
        steps -= steps % 2
        s = u.dt * np.arange(steps + 1)
        span = float(s[-1])
        values = u.values_at(sign * s)
        norm_u = _grid_norm(u)
        if span < horizon:
            truncated = True
            logger.warning(f"Carleman integration truncated at window edge {span:.6g} < horizon {horizon:g}")

    kernel = np.exp(-decay * s - 1j * sign * lam.imag * s)
    integral = simpson(kernel[:, None] * values, x=s, axis=0)
    value = sign * integral
    tail = norm_u * math.exp(-decay * span) / decay
    return CarlemanValue(np.asarray(value, dtype=complex), float(tail), float(span), truncated)


def _carleman_norms(
    u: BoundedFunction,
    xis: np.ndarray,
    delta: float,
    settings: ResolventSettings,
) -> np.ndarray:
    """``||u^(delta + i xi)|| + ||u^(-delta + i xi)||`` for every xi."""
    xis = np.atleast_1d(np.asarray(xis, dtype=float))
    if isinstance(u, TrigPolynomial):
        if u.is_zero:
            return np.zeros(len(xis))
        total = np.zeros(len(xis))
        for side in (delta, -delta):
            kernel = 1.0 / ((side + 1j * xis)[:, None] - 1j * u.omegas[None, :])
            total += np.linalg.norm(kernel @ u.coeffs, axis=1)
        return total
    total = np.zeros(len(xis))
    for side in (delta, -delta):
        # Vectorised over xi with the same Simpson rule as carleman_transform
        sign = 1.0 if side > 0 else -1.0
        span = min(settings.horizon, u.t_end if sign > 0 else -u.t0)
        steps = int(math.floor(span / u.dt + 1e-9))
        steps -= steps % 2
        if steps < 2:
            raise WindowTooShort("fewer than 3 samples on the integration side of t=0")
        s = u.dt * np.arange(steps + 1)
        values = u.values_at(sign * s)
        weights = np.full(steps + 1, 2.0)
        weights[1:-1:2] = 4.0
        weights[0] = weights[-1] = 1.0
        weights *= u.dt / 3.0
        kernel = np.exp(-delta * s[None, :] - 1j * sign * xis[:, None] * s[None, :]) * weights[None, :]
        total += np.linalg.norm(kernel @ values, axis=1)
    return total


def carleman_spectrum(
    u: BoundedFunction,
    settings: Optional[ResolventSettings] = None,
    omega_range: Optional[float] = None,
) -> FrequencyReport:
    """
    Frequencies where the Carleman transform blows up near the imaginary axis.

    Args:
        u: Function to analyse
        settings: Resolvent settings (deltas, threshold, frequency step)
        omega_range: Half-width Ω of the search range ``[-Ω, Ω]``; defaults to
            ``max |w_k| + 1`` for trigonometric polynomials

    Returns:
        FrequencyReport with the refined peak frequencies
    """
    settings = settings or ResolventSettings()
    if omega_range is None:
        if isinstance(u, TrigPolynomial):
            omega_range = float(np.max(np.abs(u.omegas))) + 1.0 if not u.is_zero else 1.0
        else:
            raise InvalidInput("a frequency search range is required for grid functions")
    if not omega_range > 0:
        raise InvalidInput("frequency search range must be positive")
    step = settings.frequency_step
    count = int(math.floor(2 * omega_range / step)) + 1
    grid = -omega_range + step * np.arange(count)
    peaks, exponents, _ = _scan_peaks(
        grid,
        lambda xs, d: _carleman_norms(u, xs, d, settings),
        settings,
        step,
        circular=False,
    )
    peaks.sort()
    return FrequencyReport(
        tuple(float(x) for x, _ in peaks),
        tuple(float(s) for _, s in peaks),
        step,
        (-float(omega_range), float(omega_range)),
        list(zip(grid.tolist(), exponents)),
    )


def compare_spectra(g: TrigPolynomial, settings: Optional[ResolventSettings] = None) -> SpectrumComparison:
    """
    Compare the circular spectrum with ``closure(e^{i tau sp(g)})``.

    Mismatches are reported through ``consistent`` and the Hausdorff
    distance, never raised.
    """
    settings = settings or ResolventSettings()
    resolution = settings.angular_resolution
    circular = circular_spectrum(g, settings).spectrum
    freqs = carleman_spectrum(g, settings)
    mapped = UnitCircleSet.from_angles(
        [settings.period * xi for xi in freqs.frequencies],
        resolution,
        scores=list(freqs.scores),
    )
    distance = circular.hausdorff(mapped)
    consistent = distance < 2 * resolution
    if not consistent:
        logger.warning(f"circular and Carleman spectra differ: Hausdorff distance {distance:.6g}")
    return SpectrumComparison(circular, freqs.frequencies, mapped, distance, consistent)
