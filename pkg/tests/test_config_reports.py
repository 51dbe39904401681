"""Unit-tests for settings overrides, run configurations, report files and the stage runner."""

import json
import math

import numpy as np
import pytest

from circspec import corpus
from circspec.config import RunConfig, load_document, settings_from_overrides
from circspec.errors import InvalidInput, UnknownCorpusName
from circspec.funcspace import GridFunction, TrigPolynomial
from circspec.pipeline import Pipeline, StageStatus
from circspec.process import IntegrationSettings, PeriodicSystem
from circspec.reports import build_report, read_grid, read_series, to_json_text, write_atomic, write_series
from circspec.solver import SolverSettings
from circspec.spectrum import ResolventSettings
from circspec.utils import complex_pairs, format_duration, parallel_map, wrap_angle
from circspec.validator import InputValidator


class TestOverrides:
    def test_defaults(self):
        assert settings_from_overrides(SolverSettings) == SolverSettings()

    def test_lists_become_tuples(self):
        settings = settings_from_overrides(ResolventSettings, {"radial_deltas": [0.2, 0.1]})
        assert settings.radial_deltas == (0.2, 0.1)

    def test_unknown_key(self):
        with pytest.raises(InvalidInput, match="unknown SolverSettings setting"):
            settings_from_overrides(SolverSettings, {"m_envelope": 8})

    def test_rejected_value(self):
        with pytest.raises(InvalidInput):
            settings_from_overrides(SolverSettings, {"m_env": 1})

    def test_base_and_unbounded_step(self):
        base = IntegrationSettings(rtol=1e-8)
        settings = settings_from_overrides(IntegrationSettings, {"max_step": None}, base=base)
        assert settings.rtol == 1e-8
        assert math.isinf(settings.max_step)


class TestRunConfig:
    def test_paths_resolve_against_base(self, tmp_path):
        (tmp_path / "sys.yaml").write_text("kind: constant\nconstant: [[-1.0]]\n")
        data = {"command": "monodromy", "inputs": {"system": "sys.yaml"}, "outputs": {"out": "r.json"}}
        config = RunConfig.from_dict(data, tmp_path)
        assert config.inputs["system"] == str(tmp_path / "sys.yaml")
        assert config.outputs["out"] == str(tmp_path / "r.json")
        assert config.seed == 0
        assert config.period == 1.0

    def test_resolved_settings(self):
        config = RunConfig(command="solve", seed=11, period=2.5, force=True, settings={"solver": {"m_env": 32}})
        settings = config.resolved_settings()
        assert settings["solver"].seed == 11
        assert settings["solver"].m_env == 32
        assert settings["resolvent"].period == 2.5
        assert settings["perturb"].force
        assert settings["integration"] == IntegrationSettings()

    def test_invalid_document(self, tmp_path):
        with pytest.raises(InvalidInput, match="'seed' must be an integer"):
            RunConfig.from_dict({"command": "solve", "seed": "x"}, tmp_path)

    def test_load_document(self, tmp_path):
        path = tmp_path / "empty.yaml"
        path.write_text("")
        with pytest.raises(InvalidInput, match="empty"):
            load_document(path)
        with pytest.raises(InvalidInput, match="file not found"):
            load_document(tmp_path / "nope.yaml")


class TestValidator:
    def test_trig(self):
        validator = InputValidator()
        assert validator.validate_trig({"modes": [{"omega": 1.0, "re": [1.0, 2.0]}]}) == (True, [])
        ok, errors = validator.validate_trig({"dim": 1, "modes": [{"omega": "x", "re": [1.0, 2.0]}]})
        assert not ok
        assert len(errors) == 2

    def test_system(self):
        validator = InputValidator()
        assert validator.validate_system({"kind": "constant", "constant": [[1.0, 0.0], [0.0, 1.0]]})[0]
        ok, errors = validator.validate_system({"kind": "constant", "constant": [[1.0, 0.0]]})
        assert not ok
        assert "square" in errors[0]
        ok, errors = validator.validate_system({"kind": "general", "dim": 1, "entries": [{"row": 1, "col": 0}]})
        assert errors == ["system: entry 0 'row' must be an index below dim"]
        assert not validator.validate_system({"kind": "floquet"})[0]

    def test_heat_system(self):
        validator = InputValidator()
        assert validator.validate_system({"kind": "heat", "heat": {"n_modes": 3}})[0]
        assert not validator.validate_system({"kind": "heat", "heat": {"n_modes": 0}})[0]

    def test_nonlinearity(self):
        validator = InputValidator()
        assert validator.validate_nonlinearity({"kind": "heat_quadratic"})[0]
        ok, errors = validator.validate_nonlinearity({"terms": [{"power": 0, "coeff": {"modes": []}}], "lip": {"poly_coeffs": [-1]}})
        assert not ok
        assert len(errors) == 2

    def test_run_config(self, tmp_path):
        validator = InputValidator()
        ok, errors = validator.validate_run_config(
            {"command": "corpus", "period": -1.0, "window": [2.0, 1.0], "settings": {"grid": {}}}, tmp_path
        )
        assert not ok
        assert "run config: 'period' must be positive" in errors
        assert "run config: 'window' must be [a, b] with a < b" in errors
        assert "run config: unknown settings section 'grid'" in errors
        assert "run config: corpus runs need a 'name'" in errors


class TestJson:
    def test_float_format(self):
        text = to_json_text({"a": 0.1, "b": 2.0, "c": [1, 2.5], "d": math.inf})
        data = json.loads(text)
        assert data == {"a": 0.1, "b": 2.0, "c": [1, 2.5], "d": "inf"}
        assert '"a": 0.10000000000000001' in text
        assert text.endswith("}\n")

    def test_numpy_and_complex(self):
        data = json.loads(to_json_text({"x": np.arange(3), "z": 1 + 2j, "ok": np.bool_(True), "t": (1.0,)}))
        assert data == {"x": [0, 1, 2], "z": [1.0, 2.0], "ok": True, "t": [1.0]}

    def test_write_atomic_creates_directories(self, tmp_path):
        path = write_atomic(tmp_path / "a" / "b" / "r.json", "{}\n")
        assert path.read_text() == "{}\n"
        assert [p.name for p in path.parent.iterdir()] == ["r.json"]

    def test_build_report(self):
        settings = {"solver": SolverSettings().to_dict()}
        first = build_report("solve", {"x": 1}, settings, 3, 2.0)
        second = build_report("solve", {"x": 1}, settings, 3, 2.0)
        assert list(first)[:6] == ["version", "command", "seed", "period", "settings", "settings_hash"]
        assert first["x"] == 1
        assert first["settings_hash"] == second["settings_hash"]
        other = build_report("solve", {"x": 1}, {"solver": SolverSettings(m_env=8).to_dict()}, 3, 2.0)
        assert other["settings_hash"] != first["settings_hash"]


class TestSeries:
    def test_grid_round_trip(self, tmp_path):
        grid = TrigPolynomial.single(1.0, [1.0, 0.5j]).sample((0.0, 2.0), 0.25)
        path = write_series(tmp_path / "g.csv", grid.times, grid.samples, {"note": "x"})
        lines = path.read_text().splitlines()
        assert lines[0].startswith("# circspec ")
        assert lines[1] == "# note: x"
        assert lines[2] == "t,re_0,im_0,re_1,im_1"
        again = read_grid(path)
        assert isinstance(again, GridFunction)
        assert again.window == pytest.approx((0.0, 2.0))
        assert np.array_equal(again.samples, grid.samples)

    def test_real_columns(self, tmp_path):
        path = tmp_path / "r.dat"
        path.write_text("0 1.0 2.0 3.0\n1 4.0 5.0 6.0\n")
        times, values = read_series(path)
        assert times.tolist() == [0.0, 1.0]
        assert values.shape == (2, 3)

    def test_non_uniform_grid(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("t,re_0,im_0\n0,1,0\n0.5,1,0\n2,1,0\n")
        with pytest.raises(InvalidInput, match="uniformly"):
            read_grid(path)

    def test_ragged_rows(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("0,1,0\n1,1\n")
        with pytest.raises(InvalidInput, match="widths"):
            read_series(path)


class TestPipeline:
    def test_results_flow(self):
        pipe = Pipeline("demo")
        pipe.add("a", lambda r: 2).add("b", lambda r: r["a"] + 1)
        assert pipe.run() == {"a": 2, "b": 3}
        summary = pipe.summary()
        assert summary["completed"] == 2
        assert summary["stages"] == 2

    def test_duplicate_stage(self):
        pipe = Pipeline("demo").add("a", lambda r: 1)
        with pytest.raises(ValueError, match="duplicate"):
            pipe.add("a", lambda r: 2)

    def test_failure_skips_later_stages(self):
        def boom(results):
            raise InvalidInput("bad")

        pipe = Pipeline("demo").add("a", lambda r: 1).add("b", boom).add("c", lambda r: 3)
        with pytest.raises(InvalidInput):
            pipe.run()
        assert [stage.status for stage in pipe.stages] == [
            StageStatus.COMPLETED,
            StageStatus.FAILED,
            StageStatus.SKIPPED,
        ]
        assert pipe.stages[1].error == "bad"
        assert pipe.summary()["skipped"] == 1


class TestCorpus:
    def test_levitan(self):
        entry = corpus.build("levitan", {"window": [0.0, 1.0], "dt": 0.5})
        assert entry.kind == "grid"
        assert entry.obj.samples[0, 0] == pytest.approx(math.sin(0.25))
        with pytest.raises(InvalidInput):
            entry.to_dict()

    def test_hill_demo_document(self):
        entry = corpus.build("hill_demo", {"beta": 1.0})
        again = PeriodicSystem.from_dict(entry.to_dict())
        assert np.allclose(again.coefficient(0.0), [[0.0, 1.0], [-2.0, -0.5]])

    def test_unknown(self):
        with pytest.raises(UnknownCorpusName, match="available"):
            corpus.build("nosuch")


class TestUtils:
    def test_format_duration(self):
        assert format_duration(0.25) == "250ms"
        assert format_duration(2.5) == "2.50s"
        assert format_duration(125.0) == "2m 5.0s"
        assert format_duration(3725.0) == "1h 2m 5.0s"

    def test_parallel_map_keeps_order(self, monkeypatch):
        monkeypatch.setenv("CIRCSPEC_THREADS", "4")
        assert parallel_map(lambda x: x * x, range(20)) == [x * x for x in range(20)]

    def test_wrap_angle(self):
        assert wrap_angle(-1e-18) == 0.0
        assert wrap_angle(7.0) == pytest.approx(7.0 - 2.0 * math.pi)

    def test_complex_pairs(self):
        assert complex_pairs([1 + 2j, 3.0]) == [1.0, 2.0, 3.0, 0.0]
