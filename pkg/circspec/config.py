"""
Loading of input documents, run configurations and settings overrides.

Documents are read with ``yaml.safe_load``, so JSON and YAML are both
accepted. Inputs given with a period ``tau`` are rescaled to the unit clock
used internally.
"""

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Type, TypeVar, Union

import yaml

from circspec.errors import InvalidInput
from circspec.funcspace import BoundedFunction, TrigPolynomial
from circspec.perturb import NemytskyMap, PerturbSettings
from circspec.process import IntegrationSettings, PeriodicSystem, SystemKind
from circspec.reports import read_grid
from circspec.solver import SolverSettings
from circspec.spectrum import ResolventSettings
from circspec.validator import InputValidator

S = TypeVar("S")

SETTINGS_CLASSES = {
    "resolvent": ResolventSettings,
    "integration": IntegrationSettings,
    "solver": SolverSettings,
    "perturb": PerturbSettings,
}

GRID_SUFFIXES = (".csv", ".dat", ".txt")


def load_document(path: Union[str, Path]) -> Any:
    """
    Read a YAML or JSON document.

    Raises:
        InvalidInput: If the file is missing, empty or not parseable
    """
    path = Path(path)
    if not path.exists():
        raise InvalidInput(f"file not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        try:
            data = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise InvalidInput(f"{path}: invalid YAML/JSON syntax: {e}")
    if data is None:
        raise InvalidInput(f"{path}: document is empty")
    return data


def _checked(result: Tuple[bool, list], path: Path) -> None:
    ok, errors = result
    if not ok:
        raise InvalidInput(f"{path}: " + "; ".join(errors))


def load_system(path: Union[str, Path], period: float = 1.0) -> PeriodicSystem:
    data = load_document(path)
    _checked(InputValidator().validate_system(data), Path(path))
    return PeriodicSystem.from_dict(data, period)


def load_forcing(path: Union[str, Path], period: float = 1.0) -> TrigPolynomial:
    """Forcing on the unit clock, ``tau * f(tau s)``."""
    data = load_document(path)
    _checked(InputValidator().validate_trig(data, "forcing"), Path(path))
    return TrigPolynomial.from_dict(data).rescaled(period)


def load_function(path: Union[str, Path]) -> BoundedFunction:
    """A grid function from a series file, otherwise a trigonometric polynomial document."""
    path = Path(path)
    if path.suffix.lower() in GRID_SUFFIXES:
        return read_grid(path)
    data = load_document(path)
    _checked(InputValidator().validate_trig(data, "function"), path)
    return TrigPolynomial.from_dict(data)


def load_nonlinearity(path: Union[str, Path], sys: PeriodicSystem, period: float = 1.0) -> NemytskyMap:
    data = load_document(path)
    _checked(InputValidator().validate_nonlinearity(data), Path(path))
    b_default = sys.heat.b if sys.kind is SystemKind.HEAT else None
    return NemytskyMap.from_dict(data, sys.dim, period, b_default)


def settings_from_overrides(cls: Type[S], overrides: Optional[Dict[str, Any]] = None, base: Optional[S] = None) -> S:
    """
    Build a settings dataclass from defaults (or ``base``) plus overrides.

    Raises:
        InvalidInput: On unknown keys or rejected values
    """
    overrides = dict(overrides or {})
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(overrides) - names)
    if unknown:
        raise InvalidInput(f"unknown {cls.__name__} setting(s): {', '.join(unknown)}")
    for key, value in overrides.items():
        if isinstance(value, list):
            overrides[key] = tuple(value)
        if key == "max_step" and value is None:
            overrides[key] = float("inf")
    try:
        if base is not None:
            return dataclasses.replace(base, **overrides)
        return cls(**overrides)
    except (TypeError, ValueError) as e:
        raise InvalidInput(f"bad {cls.__name__} settings: {e}")


@dataclass
class RunConfig:
    """
    One command with its inputs, settings overrides and outputs.

    Attributes:
        command: One of spectrum, monodromy, solve, perturb, verify, corpus
        inputs: Paths keyed by system, forcing, nonlinearity, input
        settings: Override mappings keyed by resolvent, integration, solver, perturb
        outputs: Paths keyed by out, series
        seed: Seed recorded in every output
        period: Period tau of the inputs
        window: Series or sampling window
        dt: Series or sampling step
        epsilon: Perturbation size
        force: Allow epsilon above the admissible threshold
        name: Corpus object name
        params: Corpus parameters
    """

    command: str
    inputs: Dict[str, Optional[str]] = field(default_factory=dict)
    settings: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    outputs: Dict[str, Optional[str]] = field(default_factory=dict)
    seed: int = 0
    period: float = 1.0
    window: Optional[Tuple[float, float]] = None
    dt: Optional[float] = None
    epsilon: float = 0.0
    force: bool = False
    name: Optional[str] = None
    params: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: Dict[str, Any], base_dir: Optional[Path] = None) -> "RunConfig":
        """
        Validate and build a run configuration; relative paths resolve against ``base_dir``.
        """
        _checked(InputValidator().validate_run_config(data, base_dir), Path(base_dir or "."))

        def resolve(value: Optional[str]) -> Optional[str]:
            if value is None or base_dir is None or Path(value).is_absolute():
                return value
            return str(Path(base_dir) / value)

        window = data.get("window")
        return cls(
            command=data["command"],
            inputs={k: resolve(v) for k, v in (data.get("inputs") or {}).items()},
            settings={k: dict(v or {}) for k, v in (data.get("settings") or {}).items()},
            outputs={k: resolve(v) for k, v in (data.get("outputs") or {}).items()},
            seed=int(data.get("seed", 0)),
            period=float(data.get("period") or 1.0),
            window=tuple(float(x) for x in window) if window else None,
            dt=float(data["dt"]) if data.get("dt") is not None else None,
            epsilon=float(data.get("epsilon") or 0.0),
            force=bool(data.get("force", False)),
            name=data.get("name"),
            params=dict(data.get("params") or {}),
        )

    def resolved_settings(self) -> Dict[str, Any]:
        """Settings objects for every section, with the run seed and period applied."""
        resolved = {
            section: settings_from_overrides(cls, self.settings.get(section))
            for section, cls in SETTINGS_CLASSES.items()
        }
        resolved["solver"] = dataclasses.replace(resolved["solver"], seed=self.seed)
        resolved["resolvent"] = dataclasses.replace(resolved["resolvent"], period=self.period)
        if self.force:
            resolved["perturb"] = dataclasses.replace(resolved["perturb"], force=True)
        return resolved


def load_run_config(path: Union[str, Path]) -> RunConfig:
    path = Path(path)
    return RunConfig.from_dict(load_document(path), base_dir=path.parent)
