"""
Schema checks for circspec input documents.
"""

from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

COMMANDS = ("spectrum", "monodromy", "solve", "perturb", "verify", "corpus")
SYSTEM_KINDS = ("general", "constant", "heat")
NONLINEARITY_KINDS = ("polynomial", "heat_quadratic")
INPUT_KEYS = ("system", "forcing", "nonlinearity", "input")
OUTPUT_KEYS = ("out", "series")
SETTINGS_SECTIONS = ("resolvent", "integration", "solver", "perturb")


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _is_numeric_list(value: Any) -> bool:
    return isinstance(value, list) and all(_is_number(v) for v in value)


class InputValidator:
    """
    Validates system, forcing, nonlinearity and run-configuration documents.

    Every ``validate_*`` method returns ``(is_valid, errors)``.
    """

    def validate_trig(self, data: Any, label: str = "forcing", dim: Optional[int] = None) -> Tuple[bool, List[str]]:
        """
        Validate a trigonometric polynomial document.

        Args:
            data: Parsed document
            label: Prefix for error messages
            dim: Expected dimension, if known

        Returns:
            Tuple of (is_valid, list_of_errors)
        """
        errors = []
        if not isinstance(data, dict):
            return False, [f"{label}: must be a mapping"]
        modes = data.get("modes")
        if not isinstance(modes, list):
            return False, [f"{label}: missing 'modes' list"]
        if "dim" in data and (not isinstance(data["dim"], int) or data["dim"] < 1):
            errors.append(f"{label}: 'dim' must be a positive integer")
        expected = data.get("dim", dim)

        for i, mode in enumerate(modes):
            if not isinstance(mode, dict):
                errors.append(f"{label}: mode {i} must be a mapping")
                continue
            if not _is_number(mode.get("omega")):
                errors.append(f"{label}: mode {i} needs a numeric 'omega'")
            for part in ("re", "im"):
                if part not in mode:
                    continue
                value = mode[part]
                if _is_number(value):
                    length = 1
                elif _is_numeric_list(value):
                    length = len(value)
                else:
                    errors.append(f"{label}: mode {i} '{part}' must be a number or a list of numbers")
                    continue
                if isinstance(expected, int) and length != expected:
                    errors.append(f"{label}: mode {i} '{part}' has length {length}, expected {expected}")

        return len(errors) == 0, errors

    def validate_system(self, data: Any) -> Tuple[bool, List[str]]:
        """Validate a periodic system document."""
        errors = []
        if not isinstance(data, dict):
            return False, ["system: must be a mapping"]
        kind = data.get("kind", "general")
        if kind not in SYSTEM_KINDS:
            return False, [f"system: unknown kind '{kind}' (expected one of {', '.join(SYSTEM_KINDS)})"]

        if kind == "constant":
            matrix = data.get("constant")
            if not isinstance(matrix, list) or not matrix or not all(_is_numeric_list(row) for row in matrix):
                errors.append("system: 'constant' must be a list of numeric rows")
            elif any(len(row) != len(matrix) for row in matrix):
                errors.append("system: 'constant' must be square")
        elif kind == "heat":
            heat = data.get("heat")
            if not isinstance(heat, dict):
                errors.append("system: heat systems need a 'heat' mapping")
            else:
                n_modes = heat.get("n_modes", data.get("dim"))
                if not isinstance(n_modes, int) or n_modes < 1:
                    errors.append("system: heat 'n_modes' must be a positive integer")
                for key in ("a", "b"):
                    if heat.get(key) is not None:
                        _, sub = self.validate_trig(heat[key], f"system heat '{key}'", dim=1)
                        errors.extend(sub)
        else:
            dim = data.get("dim")
            if not isinstance(dim, int) or dim < 1:
                errors.append("system: general systems need a positive integer 'dim'")
                dim = None
            entries = data.get("entries", [])
            if not isinstance(entries, list):
                errors.append("system: 'entries' must be a list")
                entries = []
            for i, entry in enumerate(entries):
                if not isinstance(entry, dict):
                    errors.append(f"system: entry {i} must be a mapping")
                    continue
                for key in ("row", "col"):
                    value = entry.get(key)
                    if not isinstance(value, int) or value < 0 or (dim is not None and value >= dim):
                        errors.append(f"system: entry {i} '{key}' must be an index below dim")
                _, sub = self.validate_trig({"dim": 1, "modes": entry.get("modes", [])}, f"system entry {i}", dim=1)
                errors.extend(sub)

        if data.get("integ") is not None and not isinstance(data["integ"], dict):
            errors.append("system: 'integ' must be a mapping")

        return len(errors) == 0, errors

    def validate_nonlinearity(self, data: Any) -> Tuple[bool, List[str]]:
        """Validate a nonlinearity document."""
        errors = []
        if not isinstance(data, dict):
            return False, ["nonlinearity: must be a mapping"]
        kind = data.get("kind", "polynomial")
        if kind not in NONLINEARITY_KINDS:
            return False, [f"nonlinearity: unknown kind '{kind}'"]
        if kind == "polynomial":
            terms = data.get("terms")
            if not isinstance(terms, list) or not terms:
                errors.append("nonlinearity: polynomial maps need a non-empty 'terms' list")
                terms = []
            for i, term in enumerate(terms):
                if not isinstance(term, dict):
                    errors.append(f"nonlinearity: term {i} must be a mapping")
                    continue
                power = term.get("power")
                if not isinstance(power, int) or power < 1:
                    errors.append(f"nonlinearity: term {i} 'power' must be an integer >= 1")
                _, sub = self.validate_trig(term.get("coeff"), f"nonlinearity term {i} coeff")
                errors.extend(sub)
        elif data.get("b") is not None:
            _, sub = self.validate_trig(data["b"], "nonlinearity 'b'", dim=1)
            errors.extend(sub)

        lip = data.get("lip")
        if lip is not None:
            coeffs = lip.get("poly_coeffs") if isinstance(lip, dict) else None
            if not _is_numeric_list(coeffs) or any(c < 0 for c in coeffs):
                errors.append("nonlinearity: 'lip.poly_coeffs' must be a list of nonnegative numbers")

        return len(errors) == 0, errors

    def validate_run_config(self, data: Any, base_dir: Optional[Path] = None) -> Tuple[bool, List[str]]:
        """
        Validate a run configuration, including that referenced input files exist.

        Args:
            data: Parsed run configuration
            base_dir: Directory relative input paths are resolved against
        """
        errors = []
        if not isinstance(data, dict):
            return False, ["run config: must be a mapping"]
        command = data.get("command")
        if command not in COMMANDS:
            errors.append(f"run config: 'command' must be one of {', '.join(COMMANDS)}")

        inputs = data.get("inputs") or {}
        if not isinstance(inputs, dict):
            errors.append("run config: 'inputs' must be a mapping")
            inputs = {}
        for key, value in inputs.items():
            if key not in INPUT_KEYS:
                errors.append(f"run config: unknown input '{key}'")
            elif value is not None:
                path = Path(value)
                if base_dir is not None and not path.is_absolute():
                    path = Path(base_dir) / path
                if not path.exists():
                    errors.append(f"run config: input '{key}' not found: {value}")

        outputs = data.get("outputs") or {}
        if not isinstance(outputs, dict) or any(k not in OUTPUT_KEYS for k in outputs):
            errors.append(f"run config: 'outputs' keys must be among {', '.join(OUTPUT_KEYS)}")

        settings = data.get("settings") or {}
        if not isinstance(settings, dict):
            errors.append("run config: 'settings' must be a mapping")
        else:
            for section, overrides in settings.items():
                if section not in SETTINGS_SECTIONS:
                    errors.append(f"run config: unknown settings section '{section}'")
                elif not isinstance(overrides, dict):
                    errors.append(f"run config: settings '{section}' must be a mapping")

        if "seed" in data and not isinstance(data["seed"], int):
            errors.append("run config: 'seed' must be an integer")
        for key in ("period", "dt", "epsilon"):
            if key in data and data[key] is not None and not _is_number(data[key]):
                errors.append(f"run config: '{key}' must be a number")
        if data.get("period") is not None and _is_number(data["period"]) and data["period"] <= 0:
            errors.append("run config: 'period' must be positive")
        window = data.get("window")
        if window is not None and not (_is_numeric_list(window) and len(window) == 2 and window[0] < window[1]):
            errors.append("run config: 'window' must be [a, b] with a < b")
        if command == "corpus" and not isinstance(data.get("name"), str):
            errors.append("run config: corpus runs need a 'name'")

        return len(errors) == 0, errors
