"""
Unit tests for scenarios, the configuration reader and runtime resolution.

This module is licensed under the MIT License.
"""

from pathlib import Path

import pytest

from pairwise_graphlimit.config import (
    BUILTIN_SCENARIOS,
    DEFAULT_OUT,
    ENV_OUT,
    ENV_THREADS,
    Scenario,
    builtin,
    parse_config,
    read_config,
    resolve_runtime,
    select_scenario,
)
from pairwise_graphlimit.embedding import Embedding, NormKind
from pairwise_graphlimit.errors import ConfigError
from pairwise_graphlimit.integrator import IntegratorScheme
from pairwise_graphlimit.kernels import KernelKind


class TestScenario:
    """Test cases for Scenario validation and builders."""

    def test_defaults(self):
        """Test that a bare scenario is valid."""
        scenario = Scenario(name="plain")
        assert scenario.dim == 1
        assert scenario.levels == (8, 16, 32)
        assert scenario.norm_kind() is NormKind.L2_SQUARED

    def test_lists_become_tuples(self):
        """Test that list fields are stored as tuples."""
        assert Scenario(name="x", levels=[4, 8], reference_resolution=16).levels == (4, 8)

    @pytest.mark.parametrize("overrides,match", [
        ({"dim": 0}, "dim"),
        ({"kernel": "custom-radial"}, "kernel"),
        ({"sign": "round"}, "sign"),
        ({"scheme": "rk45"}, "scheme"),
        ({"opinions": "spiral"}, "opinion family"),
        ({"masses": "cells"}, "mass_values"),
        ({"dt": 0.3}, "does not divide"),
        ({"levels": (16, 8)}, "levels"),
        ({"levels": (8, 24)}, "multiple"),
        ({"sample_times": (0.005,)}, "sample time"),
        ({"sample_times": (2.0,)}, "sample time"),
        ({"dim": 2, "opinions": "affine", "norm": "l2-squared", "levels": (4,), "reference_resolution": 8}, "norm"),
        ({"picard_window": -1.0}, "picard_window"),
        ({"picard_horizon": 0.2505}, "picard_horizon"),
        ({"bench_repeats": 0}, "bench"),
        ({"seed": -1}, "seed"),
    ])
    def test_invalid(self, overrides, match):
        """Test that each inconsistency is reported."""
        with pytest.raises(ConfigError, match=match):
            Scenario(name="bad", **overrides)

    def test_all_problems_reported(self):
        """Test that validation lists every problem at once."""
        with pytest.raises(ConfigError) as info:
            Scenario(name="bad", dim=0, bench_repeats=0)
        assert "dim" in str(info.value)
        assert "bench" in str(info.value)

    def test_builders(self):
        """Test the model objects built from a scenario."""
        scenario = Scenario(name="x", kernel="saturating", sign="smooth", sign_width=0.5, scheme="euler", dt=0.01, picard_window=0.1)
        assert scenario.influence().kind is KernelKind.SATURATING
        assert scenario.sign_map().lipschitz_constant == 2.0
        assert scenario.integrator().scheme is IntegratorScheme.EULER
        assert scenario.picard_config().window == 0.1

    def test_with_seed(self):
        """Test seed overrides."""
        scenario = builtin("canonical-1d")
        assert scenario.with_seed(None) is scenario
        assert scenario.with_seed(42).seed == 42


class TestBuiltins:
    """Test cases for the built-in scenarios."""

    def test_names(self):
        """Test that the documented scenarios exist."""
        expected = {"singleton", "pair-symmetric", "pair-asymmetric", "canonical-1d", "canonical-1d-arctan", "canonical-2d", "stress-cubic"}
        assert set(BUILTIN_SCENARIOS) == expected

    @pytest.mark.parametrize("name", sorted(BUILTIN_SCENARIOS))
    def test_initial_data_project(self, name):
        """Test that every built-in projects cleanly at its coarsest level."""
        scenario = builtin(name)
        state = Embedding.project_initial(scenario.initial_opinions(), scenario.initial_masses(), scenario.dim, scenario.levels[0])
        state.validate()

    def test_unknown(self):
        """Test that unknown built-ins are refused."""
        with pytest.raises(ConfigError, match="built-ins are"):
            builtin("nope")


class TestParseConfig:
    """Test cases for parse_config."""

    def test_sections(self):
        """Test typed values, comments and section order."""
        text = """
# studies for the report
[fine]
levels = 8, 16, 32, 64
reference_resolution = 256
dt = 5e-4               # smaller step
masses = sine
picard = yes
; second scenario
[planar]
dim = 2
opinions = affine
matrix = 1, 0.3, 0, 0.8
levels = 4,
reference_resolution = 16
norm = l1
"""
        scenarios = parse_config(text)
        assert list(scenarios) == ["fine", "planar"]
        fine = scenarios["fine"]
        assert fine.levels == (8, 16, 32, 64)
        assert fine.dt == 5e-4
        assert fine.picard is True
        planar = scenarios["planar"]
        assert planar.matrix == (1.0, 0.3, 0.0, 0.8)
        assert planar.levels == (4,)
        assert planar.norm_kind() is NormKind.L1

    def test_extends(self):
        """Test starting from a built-in."""
        scenarios = parse_config("[mine]\nextends = canonical-1d\nlevels = 8, 16\n")
        mine = scenarios["mine"]
        assert mine.name == "mine"
        assert mine.masses == "sine"
        assert mine.reference_resolution == 512
        assert mine.levels == (8, 16)

    def test_nullable(self):
        """Test that 'none' clears nullable fields."""
        assert parse_config("[x]\npicard_window = none\n")["x"].picard_window is None

    def test_integer_widens_to_float(self):
        """Test that integers are accepted for float fields."""
        assert parse_config("[x]\nhorizon = 2\n")["x"].horizon == 2.0

    @pytest.mark.parametrize("text,line,match", [
        ("[x]\nlevels = 8, sixteen\n", 2, "mixes"),
        ("[x]\ncolour = blue\n", 2, "unknown key"),
        ("[x]\ndt = 1e-3\ndt = 1e-3\n", 3, "duplicate key"),
        ("[x]\n[x]\n", 2, "duplicate section"),
        ("dt = 1e-3\n", 1, "outside"),
        ("[x]\njust words\n", 2, "key = value"),
        ("[x\n", 1, "malformed"),
        ("[x]\nextends = nothing\n", 2, "unknown scenario"),
        ("[x]\nrecord_every = 0.5\n", 2, "record_every"),
        ("[x]\n\n\ndim = 0\n", 1, "dim must be"),
        ("[x]\n = 3\n", 2, "missing key"),
        ("[x]\nname = y\n", 2, "unknown key"),
    ])
    def test_errors_carry_line_numbers(self, text, line, match):
        """Test that each parse problem names its line."""
        with pytest.raises(ConfigError, match=match) as info:
            parse_config(text)
        assert info.value.line == line
        assert str(info.value).startswith(f"line {line}:")

    def test_empty(self):
        """Test that a file without sections is refused."""
        with pytest.raises(ConfigError, match="no \\[section\\]"):
            parse_config("# nothing here\n")


class TestReadAndSelect:
    """Test cases for reading files and choosing a scenario."""

    def test_read_config(self, tmp_path):
        """Test reading a file from disk."""
        path = tmp_path / "studies.cfg"
        path.write_text("[only]\nextends = pair-symmetric\n", encoding="utf-8")
        assert list(read_config(path)) == ["only"]

    def test_missing_file(self, tmp_path):
        """Test that unreadable files are configuration errors."""
        with pytest.raises(ConfigError, match="cannot read"):
            read_config(tmp_path / "absent.cfg")

    def test_select_builtin(self):
        """Test the built-in fallback and default."""
        assert select_scenario(None, None).name == "canonical-1d"
        assert select_scenario(None, "singleton").name == "singleton"

    def test_select_from_file(self, tmp_path):
        """Test picking the only section, a named section, and refusing ambiguity."""
        single = tmp_path / "single.cfg"
        single.write_text("[a]\nextends = singleton\n", encoding="utf-8")
        assert select_scenario(single, None).name == "a"

        double = tmp_path / "double.cfg"
        double.write_text("[a]\nextends = singleton\n[b]\nextends = pair-symmetric\n", encoding="utf-8")
        assert select_scenario(double, "b").name == "b"
        with pytest.raises(ConfigError, match="choose one"):
            select_scenario(double, None)
        with pytest.raises(ConfigError, match="not defined"):
            select_scenario(double, "c")


class TestResolveRuntime:
    """Test cases for resolve_runtime."""

    def test_defaults(self):
        """Test the defaults without flags or environment."""
        assert resolve_runtime(None, None, environ={}) == (Path(DEFAULT_OUT), 1)

    def test_environment(self):
        """Test environment overrides of the defaults."""
        environ = {ENV_OUT: "/tmp/runs", ENV_THREADS: "4"}
        assert resolve_runtime(None, None, environ=environ) == (Path("/tmp/runs"), 4)

    def test_flags_win(self):
        """Test that command-line values override the environment."""
        environ = {ENV_OUT: "/tmp/runs", ENV_THREADS: "4"}
        assert resolve_runtime("here", 2, environ=environ) == (Path("here"), 2)

    @pytest.mark.parametrize("threads,environ", [(0, {}), (None, {ENV_THREADS: "many"}), (None, {ENV_THREADS: "-2"})])
    def test_invalid_threads(self, threads, environ):
        """Test that thread counts must be positive integers."""
        with pytest.raises(ConfigError):
            resolve_runtime(None, threads, environ=environ)
