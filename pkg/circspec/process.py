"""
1-periodic evolutionary processes of finite-dimensional linear systems.

A ``PeriodicSystem`` describes ``x' = A(t) x`` with ``A(t + 1) = A(t)``. The
evolution operator ``U(t, s)`` is computed

- in closed form for constant systems (matrix exponential),
- in closed form for the heat Galerkin system, whose drift
  ``diag(-n^2) + a(t) I`` commutes with itself at different times,
- by integrating the matrix ODE ``X' = A X`` otherwise, after reducing
  ``s`` to ``[0, 1)`` and splitting off whole periods as powers of the
  monodromy matrix.
"""

import logging
import math
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from functools import cached_property
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import solve_ivp
from scipy.linalg import eigvals, expm
from scipy.optimize import linear_sum_assignment

from circspec.errors import IntegrationFailure, InvalidInput, TimeReversed
from circspec.funcspace import FREQ_TOL, GridFunction, TrigPolynomial, UnitCircleSet
from circspec.utils import TWO_PI, complex_pairs, wrap_angle

logger = logging.getLogger(__name__)

CIRCLE_TOL = 1e-6
RESONANCE_TOL = 1e-4
NONZERO_TOL = 1e-10

Forcing = Union[TrigPolynomial, GridFunction, Callable[[np.ndarray], np.ndarray]]


class SystemKind(Enum):
    """Representation of the periodic coefficient A(t)."""
    GENERAL = "general"
    CONSTANT = "constant"
    HEAT = "heat"


@dataclass(frozen=True)
class IntegrationSettings:
    """
    Integrator and quadrature policy.

    Attributes:
        rtol: Relative tolerance of the embedded Runge-Kutta integrator
        atol: Absolute tolerance
        max_step: Largest integrator step
        method: ``solve_ivp`` method name
        quad_nodes: Gauss-Legendre nodes per unit length
        quad_tol: Convergence threshold between successive quadrature refinements
        max_refine: Number of panel doublings tried before giving up
    """

    rtol: float = 1e-9
    atol: float = 1e-12
    max_step: float = math.inf
    method: str = "RK45"
    quad_nodes: int = 32
    quad_tol: float = 1e-10
    max_refine: int = 5

    def __post_init__(self):
        if not (self.rtol > 0 and self.atol > 0):
            raise InvalidInput("integration tolerances must be positive")
        if not self.max_step > 0:
            raise InvalidInput("max_step must be positive")
        if self.method not in ("RK45", "DOP853", "RK23"):
            raise InvalidInput(f"unsupported integration method '{self.method}'")
        if int(self.quad_nodes) < 2:
            raise InvalidInput("quad_nodes must be at least 2")
        if not self.quad_tol > 0:
            raise InvalidInput("quad_tol must be positive")
        if int(self.max_refine) < 0:
            raise InvalidInput("max_refine must be nonnegative")

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["max_step"] = None if math.isinf(self.max_step) else self.max_step
        return data


@dataclass(frozen=True)
class HeatSpec:
    """
    Galerkin truncation of ``w_t = d w_xx + a(t) w + b(t) w^2`` on ``(0, π)``.

    Attributes:
        n_modes: Number of sine modes ``sin(n x)``
        a: Scalar 1-periodic drift coefficient
        b: Scalar 1-periodic coefficient of the quadratic term
        diffusion: Diffusion constant d (1 unless time has been rescaled)
    """

    n_modes: int
    a: TrigPolynomial
    b: TrigPolynomial
    diffusion: float = 1.0

    @property
    def decay_rates(self) -> np.ndarray:
        n = np.arange(1, self.n_modes + 1, dtype=float)
        return self.diffusion * n ** 2


def check_unit_period(poly: TrigPolynomial, label: str) -> None:
    if poly.is_zero:
        return
    harmonics = poly.omegas / TWO_PI
    off = np.abs(poly.omegas - TWO_PI * np.rint(harmonics))
    if np.any(off > FREQ_TOL * np.maximum(1.0, np.abs(poly.omegas))):
        raise InvalidInput(f"{label}: frequencies must be integer multiples of 2π for period 1")


def _integral_scalar(a: TrigPolynomial, s: np.ndarray, t: float) -> np.ndarray:
    """``int_s^t a`` for a scalar trigonometric polynomial, vectorised over s."""
    s = np.asarray(s, dtype=float)
    total = np.zeros(s.shape, dtype=complex)
    for omega, c in a.modes():
        if abs(omega) <= FREQ_TOL:
            total += c[0] * (t - s)
        else:
            total += c[0] * (np.exp(1j * omega * t) - np.exp(1j * omega * s)) / (1j * omega)
    return total


@dataclass(frozen=True, eq=False)
class PeriodicSystem:
    """
    Linear 1-periodic system ``x' = A(t) x``.

    Attributes:
        dim: State dimension
        kind: Coefficient representation
        entries: For general systems, ``((row, col), scalar TrigPolynomial)``
        constant: For constant systems, the matrix A
        heat: For heat systems, the Galerkin description
        integ: Integration settings
    """

    dim: int
    kind: SystemKind
    entries: Tuple[Tuple[Tuple[int, int], TrigPolynomial], ...] = ()
    constant: Optional[np.ndarray] = None
    heat: Optional[HeatSpec] = None
    integ: IntegrationSettings = field(default_factory=IntegrationSettings)

    def __post_init__(self):
        if self.dim < 1:
            raise InvalidInput("system dimension must be positive")
        if self.kind is SystemKind.CONSTANT:
            if self.constant is None:
                raise InvalidInput("constant system needs a matrix")
            matrix = np.asarray(self.constant, dtype=complex)
            if matrix.shape != (self.dim, self.dim):
                raise InvalidInput(f"constant matrix has shape {matrix.shape}, expected ({self.dim}, {self.dim})")
            matrix.setflags(write=False)
            object.__setattr__(self, "constant", matrix)
        elif self.kind is SystemKind.HEAT:
            if self.heat is None:
                raise InvalidInput("heat system needs a heat description")
            if self.heat.n_modes != self.dim:
                raise InvalidInput("heat system dimension must equal n_modes")
            for label, poly in (("a", self.heat.a), ("b", self.heat.b)):
                if poly.dim != 1:
                    raise InvalidInput(f"heat coefficient {label} must be scalar")
                check_unit_period(poly, f"heat coefficient {label}")
        else:
            for (row, col), poly in self.entries:
                if not (0 <= row < self.dim and 0 <= col < self.dim):
                    raise InvalidInput(f"entry ({row}, {col}) outside a {self.dim}x{self.dim} matrix")
                if poly.dim != 1:
                    raise InvalidInput(f"entry ({row}, {col}) must be a scalar polynomial")
                check_unit_period(poly, f"entry ({row}, {col})")

    # Coefficient access

    @cached_property
    def _basis(self) -> Tuple[np.ndarray, np.ndarray]:
        """Frequencies and matrices with ``A(t) = sum_k M_k e^{i w_k t}``."""
        if self.kind is SystemKind.CONSTANT:
            return np.zeros(1), self.constant[None, :, :]
        if self.kind is SystemKind.HEAT:
            base = np.diag(-self.heat.decay_rates).astype(complex)
            freqs = [0.0] + [w for w, _ in self.heat.a.modes() if abs(w) > FREQ_TOL]
            mats = {0.0: base}
            for w, c in self.heat.a.modes():
                key = 0.0 if abs(w) <= FREQ_TOL else w
                mats[key] = mats.get(key, np.zeros((self.dim, self.dim), complex)) + c[0] * np.eye(self.dim)
            return np.array(freqs), np.stack([mats[w] for w in freqs])
        lookup: Dict[float, np.ndarray] = {}
        for (row, col), poly in self.entries:
            for w, c in poly.modes():
                key = next((k for k in lookup if abs(k - w) <= FREQ_TOL), w)
                lookup.setdefault(key, np.zeros((self.dim, self.dim), complex))[row, col] += c[0]
        if not lookup:
            return np.zeros(1), np.zeros((1, self.dim, self.dim), complex)
        freqs = np.array(sorted(lookup))
        return freqs, np.stack([lookup[w] for w in freqs])

    def coefficient(self, t: float) -> np.ndarray:
        """The matrix A(t)."""
        freqs, mats = self._basis
        return np.tensordot(np.exp(1j * freqs * float(t)), mats, axes=1)

    # Constructors and transforms

    def with_integration(self, integ: IntegrationSettings) -> "PeriodicSystem":
        return replace(self, integ=integ)

    def as_general(self) -> "PeriodicSystem":
        """Same coefficient as a general system (forces numerical integration)."""
        freqs, mats = self._basis
        entries = []
        for row in range(self.dim):
            for col in range(self.dim):
                coeffs = mats[:, row, col]
                if np.any(coeffs != 0):
                    entries.append(((row, col), TrigPolynomial(1, freqs, coeffs[:, None])))
        return PeriodicSystem(self.dim, SystemKind.GENERAL, tuple(entries), integ=self.integ)

    def rescaled(self, tau: float) -> "PeriodicSystem":
        """
        The system on a unit-period clock.

        If this system has period ``tau`` in its own time t, the returned one
        describes ``y(s) = x(tau s)``, i.e. ``y' = tau A(tau s) y``.
        """
        tau = float(tau)
        if tau == 1.0:
            return self
        if self.kind is SystemKind.CONSTANT:
            return replace(self, constant=self.constant * tau)
        if self.kind is SystemKind.HEAT:
            heat = HeatSpec(
                self.heat.n_modes,
                self.heat.a.rescaled(tau),
                self.heat.b.rescaled(tau),
                self.heat.diffusion * tau,
            )
            return replace(self, heat=heat)
        entries = tuple((pos, poly.rescaled(tau)) for pos, poly in self.entries)
        return replace(self, entries=entries)

    @classmethod
    def from_dict(cls, data: Dict[str, Any], period: float = 1.0) -> "PeriodicSystem":
        """
        Parse the system JSON form.

        Args:
            data: ``{"dim", "kind", "entries" | "constant" | "heat", "integ"}``
            period: Period of the system in its own time; frequencies must be
                multiples of ``2π / period`` and the result runs on a unit clock
        """
        if not isinstance(data, dict):
            raise InvalidInput("system must be a mapping")
        try:
            kind = SystemKind(data.get("kind", "general"))
        except ValueError:
            raise InvalidInput(f"unknown system kind '{data.get('kind')}'")
        integ_data = dict(data.get("integ") or {})
        if integ_data.get("max_step") is None:
            integ_data.pop("max_step", None)
        try:
            integ = IntegrationSettings(**integ_data)
        except TypeError as e:
            raise InvalidInput(f"bad integration settings: {e}")

        tau = float(period)
        if kind is SystemKind.CONSTANT:
            try:
                matrix = np.asarray(data.get("constant"), dtype=complex)
                if data.get("constant_imag") is not None:
                    matrix = matrix + 1j * np.asarray(data["constant_imag"], dtype=float)
            except (TypeError, ValueError) as e:
                raise InvalidInput(f"'constant' is not a numeric matrix: {e}")
            if matrix.ndim != 2:
                raise InvalidInput("'constant' must be a square matrix")
            dim = int(data.get("dim", matrix.shape[0]))
            return cls(dim, kind, constant=matrix * tau, integ=integ)
        if kind is SystemKind.HEAT:
            heat = data.get("heat") or {}
            n_modes = int(heat.get("n_modes", data.get("dim", 1)))
            a = TrigPolynomial.from_dict(heat["a"]) if heat.get("a") else TrigPolynomial.zero(1)
            b = TrigPolynomial.from_dict(heat["b"]) if heat.get("b") else TrigPolynomial.zero(1)
            spec = HeatSpec(n_modes, a.rescaled(tau), b.rescaled(tau), float(heat.get("diffusion", 1.0)) * tau)
            return cls(n_modes, kind, heat=spec, integ=integ)

        dim = int(data.get("dim", 0))
        entries = []
        for i, entry in enumerate(data.get("entries") or []):
            try:
                row, col = int(entry["row"]), int(entry["col"])
            except (KeyError, TypeError, ValueError):
                raise InvalidInput(f"entry {i} needs integer 'row' and 'col'")
            poly = TrigPolynomial.from_dict({"dim": 1, "modes": entry.get("modes", [])})
            entries.append(((row, col), poly.rescaled(tau)))
        return cls(dim, kind, tuple(entries), integ=integ)

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"dim": self.dim, "kind": self.kind.value}
        if self.kind is SystemKind.CONSTANT:
            data["constant"] = self.constant.real.tolist()
            if np.any(self.constant.imag != 0):
                data["constant_imag"] = self.constant.imag.tolist()
        elif self.kind is SystemKind.HEAT:
            data["heat"] = {
                "n_modes": self.heat.n_modes,
                "a": self.heat.a.to_dict(),
                "b": self.heat.b.to_dict(),
            }
            if self.heat.diffusion != 1.0:
                data["heat"]["diffusion"] = self.heat.diffusion
        else:
            data["entries"] = [
                {
                    "row": row,
                    "col": col,
                    "modes": [{"omega": w, "re": float(c[0].real), "im": float(c[0].imag)} for w, c in poly.modes()],
                }
                for (row, col), poly in self.entries
            ]
        data["integ"] = self.integ.to_dict()
        return data


def constant_system(matrix: Sequence[Sequence[complex]], integ: Optional[IntegrationSettings] = None) -> PeriodicSystem:
    matrix = np.atleast_2d(np.asarray(matrix, dtype=complex))
    return PeriodicSystem(matrix.shape[0], SystemKind.CONSTANT, constant=matrix, integ=integ or IntegrationSettings())


def heat_system(
    n_modes: int,
    a: Optional[TrigPolynomial] = None,
    b: Optional[TrigPolynomial] = None,
    integ: Optional[IntegrationSettings] = None,
) -> PeriodicSystem:
    spec = HeatSpec(int(n_modes), a or TrigPolynomial.zero(1), b or TrigPolynomial.zero(1))
    return PeriodicSystem(int(n_modes), SystemKind.HEAT, heat=spec, integ=integ or IntegrationSettings())


def general_system(
    dim: int,
    entries: Dict[Tuple[int, int], TrigPolynomial],
    integ: Optional[IntegrationSettings] = None,
) -> PeriodicSystem:
    items = tuple(sorted(entries.items(), key=lambda kv: kv[0]))
    return PeriodicSystem(int(dim), SystemKind.GENERAL, items, integ=integ or IntegrationSettings())


# Evolution operators

@dataclass(frozen=True)
class EvolutionOperator:
    """``U(t, s)`` with an accumulated error estimate."""

    s: float
    t: float
    matrix: np.ndarray
    err_est: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "s": self.s,
            "t": self.t,
            "matrix": {"re": self.matrix.real.tolist(), "im": self.matrix.imag.tolist()},
            "err_est": self.err_est,
        }


def _integrate_matrix_ode(
    sys: PeriodicSystem,
    s: float,
    t_eval: Sequence[float],
    forcings: Sequence[Callable[[float], np.ndarray]] = (),
) -> Tuple[List[np.ndarray], List[np.ndarray], float]:
    """
    Integrate ``X' = A X`` (and ``Y_k' = A Y_k + f_k``) from ``s``.

    Returns:
        Tuple of (X at each time of ``t_eval``, stacked Y at each time, error estimate)
    """
    d = sys.dim
    k = len(forcings)
    y0 = np.concatenate([np.eye(d, dtype=complex).ravel(), np.zeros(d * k, dtype=complex)])

    def rhs(tau, y):
        a = sys.coefficient(tau)
        x = y[: d * d].reshape(d, d)
        out = [(a @ x).ravel()]
        if k:
            ys = y[d * d:].reshape(d, k)
            f = np.stack([np.asarray(fk(tau), dtype=complex).reshape(d) for fk in forcings], axis=1)
            out.append((a @ ys + f).ravel())
        return np.concatenate(out)

    t_end = float(t_eval[-1])
    sol = solve_ivp(
        rhs,
        (s, t_end),
        y0,
        method=sys.integ.method,
        t_eval=list(t_eval),
        rtol=sys.integ.rtol,
        atol=sys.integ.atol,
        max_step=sys.integ.max_step,
    )
    if not sol.success:
        raise IntegrationFailure(f"integration over [{s:.6g}, {t_end:.6g}] failed: {sol.message}")
    steps = max(1, sol.nfev // 6)
    logger.debug(f"integrated [{s:.6g}, {t_end:.6g}] with {sol.nfev} evaluations")
    xs = [sol.y[: d * d, j].reshape(d, d) for j in range(sol.y.shape[1])]
    ys = [sol.y[d * d:, j].reshape(d, k).T for j in range(sol.y.shape[1])]
    scale = max(float(np.max(np.abs(x))) for x in xs)
    err = (sys.integ.rtol * scale + sys.integ.atol) * steps
    return xs, ys, err


def _heat_diagonal(sys: PeriodicSystem, s: Union[float, np.ndarray], t: float) -> np.ndarray:
    """Diagonal of ``U(t, s)`` for the heat system, shape (..., n_modes)."""
    s = np.asarray(s, dtype=float)
    growth = np.exp(_integral_scalar(sys.heat.a, s, t))
    decay = np.exp(-np.multiply.outer(t - s, sys.heat.decay_rates))
    return growth[..., None] * decay


def propagate(sys: PeriodicSystem, s: float, t: float) -> EvolutionOperator:
    """
    Evolution operator ``U(t, s)``.

    Args:
        sys: Periodic system
        s: Initial time
        t: Final time, ``t >= s``

    Returns:
        EvolutionOperator

    Raises:
        TimeReversed: If ``t < s``
        IntegrationFailure: If the integrator stops early
    """
    s, t = float(s), float(t)
    if t < s:
        raise TimeReversed(f"t={t:.6g} precedes s={s:.6g}")
    if t == s:
        return EvolutionOperator(s, t, np.eye(sys.dim, dtype=complex), 0.0)

    if sys.kind is SystemKind.CONSTANT:
        matrix = expm(sys.constant * (t - s))
        return EvolutionOperator(s, t, matrix, 1e-15 * float(np.max(np.abs(matrix))))
    if sys.kind is SystemKind.HEAT:
        return EvolutionOperator(s, t, np.diag(_heat_diagonal(sys, s, t)), 0.0)

    shift = math.floor(s)
    s0, t0 = s - shift, t - shift
    span = t0 - s0
    whole = int(math.floor(span))
    rest = span - whole
    if whole == 0:
        xs, _, err = _integrate_matrix_ode(sys, s0, [t0])
        return EvolutionOperator(s, t, xs[0], err)

    # U(t, s) = U(s0 + rest, s0) P^whole with P = U(s0 + 1, s0)
    times = [s0 + rest, s0 + 1.0] if rest > 0 else [s0 + 1.0]
    xs, _, err = _integrate_matrix_ode(sys, s0, times)
    period_map = xs[-1]
    partial = xs[0] if rest > 0 else np.eye(sys.dim, dtype=complex)
    matrix = partial @ np.linalg.matrix_power(period_map, whole)
    return EvolutionOperator(s, t, matrix, err * (whole + 1))


def _as_vectorized(forcing: Forcing) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(forcing, (TrigPolynomial, GridFunction)):
        return lambda times: forcing(np.atleast_1d(times))
    return lambda times: np.asarray(forcing(np.atleast_1d(times)), dtype=complex)


def _gauss_nodes(s: float, t: float, panels: int, per_panel: int) -> Tuple[np.ndarray, np.ndarray]:
    x, w = leggauss(per_panel)
    edges = np.linspace(s, t, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _quadrature_integrals(
    sys: PeriodicSystem,
    s: float,
    t: float,
    forcings: Sequence[Forcing],
) -> np.ndarray:
    """``int_s^t U(t, xi) f_k(xi) d xi`` by composite Gauss-Legendre for closed-form kinds."""
    fns = [_as_vectorized(f) for f in forcings]
    panels = max(1, int(math.ceil(t - s - 1e-12)))
    previous = None
    for _ in range(sys.integ.max_refine + 1):
        nodes, weights = _gauss_nodes(s, t, panels, sys.integ.quad_nodes)
        values = np.stack([fn(nodes) for fn in fns])  # (K, M, d)
        if sys.kind is SystemKind.HEAT:
            diag = _heat_diagonal(sys, nodes, t)  # (M, d)
            current = np.einsum("m,md,kmd->kd", weights, diag, values)
        else:
            transfer = expm(sys.constant[None, :, :] * (t - nodes)[:, None, None])  # (M, d, d)
            current = np.einsum("m,mij,kmj->ki", weights, transfer, values)
        if previous is not None and np.max(np.abs(current - previous)) < sys.integ.quad_tol:
            return current
        previous = current
        panels *= 2
    logger.warning(f"quadrature over [{s:.6g}, {t:.6g}] did not reach quad_tol={sys.integ.quad_tol:g}")
    return previous


def propagate_forced(
    sys: PeriodicSystem,
    s: float,
    t: float,
    forcings: Sequence[Forcing],
) -> Tuple[EvolutionOperator, np.ndarray]:
    """
    ``U(t, s)`` together with ``int_s^t U(t, xi) f_k(xi) d xi`` for each forcing.

    General systems integrate one augmented ODE carrying both the matrix and
    the forced states; closed-form kinds use Gauss-Legendre quadrature.

    Returns:
        Tuple of (EvolutionOperator, integrals of shape (K, dim))
    """
    s, t = float(s), float(t)
    if t < s:
        raise TimeReversed(f"t={t:.6g} precedes s={s:.6g}")
    if t == s or not forcings:
        return propagate(sys, s, t), np.zeros((len(forcings), sys.dim), dtype=complex)
    if sys.kind is not SystemKind.GENERAL:
        return propagate(sys, s, t), _quadrature_integrals(sys, s, t, forcings)
    fns = [_as_vectorized(f) for f in forcings]
    scalar_fns = [lambda tau, fn=fn: fn(np.array([tau]))[0] for fn in fns]
    xs, ys, err = _integrate_matrix_ode(sys, s, [t], scalar_fns)
    return EvolutionOperator(s, t, xs[0], err), ys[0]


def solve_forced(sys: PeriodicSystem, s: float, t: float, x0: Sequence[complex], forcing: Forcing) -> np.ndarray:
    """Mild solution ``U(t, s) x0 + int_s^t U(t, xi) f(xi) d xi``."""
    op, integrals = propagate_forced(sys, s, t, [forcing])
    return op.matrix @ np.asarray(x0, dtype=complex) + integrals[0]


# Monodromy

@dataclass(frozen=True)
class Monodromy:
    """Period map ``P(anchor_t) = U(anchor_t, anchor_t - 1)`` and its spectrum."""

    anchor_t: float
    matrix: np.ndarray
    eigenvalues: np.ndarray
    unit_circle_part: UnitCircleSet
    err_est: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "anchor_t": self.anchor_t,
            "matrix": {"re": self.matrix.real.tolist(), "im": self.matrix.imag.tolist()},
            "eigenvalues": [complex_pairs([mu]) for mu in self.eigenvalues],
            "unit_circle_angles": list(self.unit_circle_part.angles),
            "err_est": self.err_est,
        }


def monodromy(
    sys: PeriodicSystem,
    anchor_t: float = 0.0,
    circle_tol: float = CIRCLE_TOL,
    resolution: float = TWO_PI / 720,
) -> Monodromy:
    """
    Monodromy operator at ``anchor_t`` with its eigenvalues.

    Args:
        sys: Periodic system
        anchor_t: Anchor time t of ``P(t) = U(t, t - 1)``
        circle_tol: Eigenvalues with ``||mu| - 1| < circle_tol`` count as on the circle
        resolution: Angular resolution of the unit-circle part

    Returns:
        Monodromy
    """
    op = propagate(sys, anchor_t - 1.0, anchor_t)
    mus = eigvals(op.matrix)
    mus = mus[np.lexsort((mus.imag, mus.real))]
    on_circle = np.abs(np.abs(mus) - 1.0) < circle_tol
    unit = UnitCircleSet.from_angles(wrap_angle(np.angle(mus[on_circle])), resolution)
    return Monodromy(float(anchor_t), op.matrix, mus, unit, op.err_est)


def spectral_gap(P: Union[Monodromy, Sequence[complex]], freqs: UnitCircleSet) -> float:
    """
    ``min |mu - e^{i theta}|`` over eigenvalues mu and angles theta.

    Returns ``inf`` when either set is empty.
    """
    mus = P.eigenvalues if isinstance(P, Monodromy) else np.asarray(P, dtype=complex)
    points = freqs.points()
    if len(mus) == 0 or len(points) == 0:
        return math.inf
    return float(np.min(np.abs(mus[:, None] - points[None, :])))


def autonomous_gap(matrix: Sequence[Sequence[complex]], freqs: UnitCircleSet) -> float:
    """Gap for a constant system from the eigenvalues of A, without integration."""
    exps = np.exp(eigvals(np.atleast_2d(np.asarray(matrix, dtype=complex))))
    return spectral_gap(exps, freqs)


def multiplier_mismatch(sys: PeriodicSystem, anchors: Sequence[float] = (0.0, 0.3, 0.77)) -> float:
    """
    Largest multiset distance between nonzero multipliers at different anchors.

    Multipliers are matched by minimum-cost assignment; differing counts of
    nonzero eigenvalues give ``inf``.
    """
    sets = []
    for anchor in anchors:
        mus = monodromy(sys, anchor).eigenvalues
        sets.append(mus[np.abs(mus) > NONZERO_TOL])
    worst = 0.0
    reference = sets[0]
    for other in sets[1:]:
        if len(other) != len(reference):
            return math.inf
        if len(other) == 0:
            continue
        cost = np.abs(reference[:, None] - other[None, :])
        rows, cols = linear_sum_assignment(cost)
        worst = max(worst, float(np.max(cost[rows, cols])))
    return worst


@dataclass
class GrowthBound:
    """Fitted constants with ``||U(t, s)|| <= N e^{omega (t - s)}`` on the samples."""

    N: float
    omega: float
    samples: List[Tuple[float, float, float]]

    def holds(self, slack: float = 1e-6) -> bool:
        return all(norm <= self.N * math.exp(self.omega * (t - s)) * (1 + slack) for s, t, norm in self.samples)


def growth_bound(
    sys: PeriodicSystem,
    starts: Sequence[float] = (0.0, 0.25, 0.5, 0.75),
    spans: Sequence[float] = (0.25, 0.5, 1.0, 2.0, 3.0, 4.0),
) -> GrowthBound:
    """Fit ``(N, omega)`` from sampled operator norms."""
    samples = []
    for s in starts:
        for span in spans:
            op = propagate(sys, s, s + span)
            samples.append((float(s), float(s + span), float(np.linalg.norm(op.matrix, 2))))
    long_spans = [(t - s, norm) for s, t, norm in samples if t - s >= 1.0]
    if not long_spans:
        long_spans = [(t - s, norm) for s, t, norm in samples]
    omega = max(math.log(max(norm, 1e-300)) / span for span, norm in long_spans)
    big_n = max(1.0, max(norm * math.exp(-omega * (t - s)) for s, t, norm in samples))
    return GrowthBound(big_n, omega, samples)
