"""
config module - Scenarios, the configuration file reader and the built-in registry

A configuration file is flat text: '[name]' opens a scenario, 'key = value' sets a
field, lines starting with '#' or ';' are comments. Values are converted by
ValueInference and checked against the kind each Scenario field declares:

    [my-run]
    extends = canonical-1d      # start from a built-in scenario
    levels = 8, 16, 32
    dt = 5e-4

Every problem is reported as a ConfigError carrying the 1-based line number.

This module is licensed under the MIT License.
"""

import dataclasses
import logging
import os
from collections.abc import Mapping
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from pairwise_graphlimit.embedding import InitialFunction, NormKind
from pairwise_graphlimit.errors import ConfigError, GraphLimitError
from pairwise_graphlimit.initial_data import InitialData
from pairwise_graphlimit.integrator import IntegratorConfig, IntegratorScheme
from pairwise_graphlimit.kernels import InfluenceKernel, KernelKind, SignKind, SignMap
from pairwise_graphlimit.picard import PicardConfig
from pairwise_graphlimit.rng import DEFAULT_SEED
from pairwise_graphlimit.text_values import TextValue
from pairwise_graphlimit.value_inference import ValueInference
from pairwise_graphlimit.value_kind import ValueKind

logger = logging.getLogger(__name__)

ENV_OUT = "PAIRWISE_GRAPHLIMIT_OUT"
ENV_THREADS = "PAIRWISE_GRAPHLIMIT_THREADS"
DEFAULT_OUT = "results"


def _kind(kind: ValueKind, item: ValueKind | None = None, *, nullable: bool = False) -> dict[str, Any]:
    return {"kind": kind, "item": item, "nullable": nullable}


@dataclass(frozen=True)
class Scenario:
    """
    Everything a study needs: model, initial data, integration and refinement settings.

    Field metadata records the value kind the configuration reader expects.
    """

    name: str = field(metadata=_kind(ValueKind.STRING))
    description: str = field(default="", metadata=_kind(ValueKind.STRING))
    dim: int = field(default=1, metadata=_kind(ValueKind.INTEGER))
    kernel: str = field(default="linear", metadata=_kind(ValueKind.STRING))
    sign: str = field(default="sign", metadata=_kind(ValueKind.STRING))
    sign_width: float = field(default=0.1, metadata=_kind(ValueKind.FLOAT))

    opinions: str = field(default="identity", metadata=_kind(ValueKind.STRING))
    steepness: float = field(default=4.0, metadata=_kind(ValueKind.FLOAT))
    matrix: tuple[float, ...] | None = field(default=None, metadata=_kind(ValueKind.LIST, ValueKind.FLOAT, nullable=True))
    epsilon: float = field(default=0.1, metadata=_kind(ValueKind.FLOAT))
    opinion_values: tuple[float, ...] | None = field(
        default=None, metadata=_kind(ValueKind.LIST, ValueKind.FLOAT, nullable=True)
    )
    masses: str = field(default="uniform", metadata=_kind(ValueKind.STRING))
    amplitude: float = field(default=0.5, metadata=_kind(ValueKind.FLOAT))
    mass_values: tuple[float, ...] | None = field(default=None, metadata=_kind(ValueKind.LIST, ValueKind.FLOAT, nullable=True))

    horizon: float = field(default=1.0, metadata=_kind(ValueKind.FLOAT))
    dt: float = field(default=1e-3, metadata=_kind(ValueKind.FLOAT))
    scheme: str = field(default=IntegratorScheme.RK4.value, metadata=_kind(ValueKind.STRING))
    record_every: int = field(default=10, metadata=_kind(ValueKind.INTEGER))
    min_separation: float = field(default=1e-9, metadata=_kind(ValueKind.FLOAT))
    freeze_masses: bool = field(default=False, metadata=_kind(ValueKind.BOOLEAN))

    levels: tuple[int, ...] = field(default=(8, 16, 32), metadata=_kind(ValueKind.LIST, ValueKind.INTEGER))
    reference_resolution: int = field(default=128, metadata=_kind(ValueKind.INTEGER))
    sample_times: tuple[float, ...] = field(default=(0.5, 1.0), metadata=_kind(ValueKind.LIST, ValueKind.FLOAT))
    norm: str | None = field(default=None, metadata=_kind(ValueKind.STRING, nullable=True))

    picard: bool = field(default=False, metadata=_kind(ValueKind.BOOLEAN))
    picard_resolution: int = field(default=16, metadata=_kind(ValueKind.INTEGER))
    picard_horizon: float = field(default=0.25, metadata=_kind(ValueKind.FLOAT))
    picard_window: float | None = field(default=None, metadata=_kind(ValueKind.FLOAT, nullable=True))
    picard_tolerance: float = field(default=1e-12, metadata=_kind(ValueKind.FLOAT))

    bench_sizes: tuple[int, ...] = field(default=(128, 256, 512), metadata=_kind(ValueKind.LIST, ValueKind.INTEGER))
    bench_repeats: int = field(default=3, metadata=_kind(ValueKind.INTEGER))

    seed: int = field(default=DEFAULT_SEED, metadata=_kind(ValueKind.INTEGER))

    def __post_init__(self) -> None:
        for name in ("matrix", "opinion_values", "mass_values", "levels", "sample_times", "bench_sizes"):
            value = getattr(self, name)
            if isinstance(value, list):
                object.__setattr__(self, name, tuple(value))
        self.validate()

    def validate(self) -> None:
        """
        Raises:
            ConfigError: If the scenario is inconsistent
        """
        problems = []
        if self.dim < 1:
            problems.append(f"dim must be >= 1, got {self.dim}")
        if self.kernel not in (KernelKind.LINEAR.value, KernelKind.SATURATING.value):
            problems.append(f"kernel must be 'linear' or 'saturating', got {self.kernel!r}")
        if self.sign not in {kind.value for kind in SignKind}:
            problems.append(f"unknown sign kind {self.sign!r}")
        if self.scheme not in {kind.value for kind in IntegratorScheme}:
            problems.append(f"unknown scheme {self.scheme!r}")
        if self.opinions not in InitialData.OPINION_FAMILIES:
            problems.append(f"unknown opinion family {self.opinions!r}")
        if self.masses not in InitialData.MASS_FAMILIES:
            problems.append(f"unknown mass family {self.masses!r}")
        if self.opinions == "cells" and self.opinion_values is None:
            problems.append("opinions = cells needs opinion_values")
        if self.masses == "cells" and self.mass_values is None:
            problems.append("masses = cells needs mass_values")
        if not (self.horizon > 0 and self.dt > 0):
            problems.append("horizon and dt must be positive")
        elif abs(round(self.horizon / self.dt) * self.dt - self.horizon) > 1e-9 * max(1.0, self.horizon):
            problems.append(f"dt={self.dt} does not divide horizon={self.horizon}")
        if self.record_every < 1:
            problems.append("record_every must be >= 1")

        levels = list(self.levels)
        if not levels or any(n < 1 for n in levels) or sorted(set(levels)) != levels:
            problems.append(f"levels must be strictly increasing positive integers, got {levels}")
        elif any(self.reference_resolution % n for n in levels):
            problems.append(f"reference_resolution={self.reference_resolution} is not a multiple of every level")

        stride = self.dt * self.record_every
        for t in self.sample_times:
            if not 0 <= t <= self.horizon * (1 + 1e-12) or abs(round(t / stride) * stride - t) > 1e-9 * max(1.0, t):
                problems.append(f"sample time {t} is not a recorded time in [0, {self.horizon}]")
        if self.norm is not None:
            try:
                NormKind(self.norm).check(self.dim)
            except (ValueError, GraphLimitError) as error:
                problems.append(f"norm {self.norm!r}: {error}")
        if self.picard_window is not None and self.picard_window <= 0:
            problems.append("picard_window must be positive")
        if self.picard_resolution < 1:
            problems.append("picard_resolution must be >= 1")
        if not self.picard_horizon > 0 or (
            self.dt > 0 and abs(round(self.picard_horizon / self.dt) * self.dt - self.picard_horizon) > 1e-9
        ):
            problems.append(f"dt={self.dt} does not divide picard_horizon={self.picard_horizon}")
        if not self.bench_sizes or any(p < 1 for p in self.bench_sizes) or self.bench_repeats < 1:
            problems.append("bench_sizes and bench_repeats must be positive")
        if not 0 <= self.seed < 2**64:
            problems.append(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if problems:
            msg = f"scenario {self.name!r}: " + "; ".join(problems)
            raise ConfigError(msg)

    def influence(self) -> InfluenceKernel:
        return InfluenceKernel.from_kind(self.kernel)

    def sign_map(self) -> SignMap:
        return SignMap(self.dim, self.sign, self.sign_width)

    def initial_opinions(self) -> InitialFunction:
        return InitialData.opinions(
            self.opinions,
            self.dim,
            steepness=self.steepness,
            matrix=self.matrix,
            epsilon=self.epsilon,
            values=self.opinion_values,
        )

    def initial_masses(self) -> InitialFunction:
        return InitialData.masses(self.masses, self.dim, amplitude=self.amplitude, values=self.mass_values)

    def integrator(self) -> IntegratorConfig:
        return IntegratorConfig(
            scheme=IntegratorScheme(self.scheme),
            dt=self.dt,
            record_every=self.record_every,
            min_separation=self.min_separation,
        )

    def picard_config(self) -> PicardConfig:
        return PicardConfig(window=self.picard_window, tolerance=self.picard_tolerance)

    def norm_kind(self) -> NormKind:
        return NormKind(self.norm) if self.norm is not None else NormKind.default_for(self.dim)

    def with_seed(self, seed: int | None) -> "Scenario":
        return self if seed is None else dataclasses.replace(self, seed=seed)


BUILTIN_SCENARIOS: dict[str, Scenario] = {
    scenario.name: scenario
    for scenario in (
        Scenario(
            name="singleton",
            description="one particle at rest",
            opinions="cells",
            opinion_values=(0.0,),
            masses="cells",
            mass_values=(1.0,),
            levels=(1,),
            reference_resolution=1,
            dt=1e-2,
            record_every=1,
            bench_sizes=(1, 2, 4),
        ),
        Scenario(
            name="pair-symmetric",
            description="two equal masses at -1 and 1; the gap decays exactly like e^{-t}",
            opinions="cells",
            opinion_values=(-1.0, 1.0),
            masses="cells",
            mass_values=(1.0, 1.0),
            levels=(2,),
            reference_resolution=2,
        ),
        Scenario(
            name="pair-asymmetric",
            description="masses 1.5 and 0.5 at -1 and 1",
            opinions="cells",
            opinion_values=(-1.0, 1.0),
            masses="cells",
            mass_values=(1.5, 0.5),
            levels=(2,),
            reference_resolution=2,
        ),
        Scenario(
            name="canonical-1d",
            description="x0(s) = s, m0(s) = 1 + 0.5 sin(2 pi s)",
            masses="sine",
            levels=(8, 16, 32, 64, 128),
            reference_resolution=512,
            record_every=50,
            sample_times=(0.25, 0.5, 0.75, 1.0),
            picard=True,
        ),
        Scenario(
            name="canonical-1d-arctan",
            description="arctan ramp x0, m0(s) = 1 + 0.5 sin(2 pi s)",
            opinions="arctan",
            masses="sine",
            levels=(8, 16, 32, 64, 128),
            reference_resolution=512,
            record_every=50,
            sample_times=(0.25, 0.5, 0.75, 1.0),
        ),
        Scenario(
            name="canonical-2d",
            description="x0(s) = A s + eps g(s), m0(s) = 1 + 0.5 sin(2 pi s1) sin(2 pi s2)",
            dim=2,
            opinions="affine",
            masses="sine",
            levels=(4, 8, 16),
            reference_resolution=32,
            dt=5e-3,
            record_every=10,
            sample_times=(0.25, 0.5, 0.75, 1.0),
            picard_resolution=4,
        ),
        Scenario(
            name="stress-cubic",
            description="random states for the mass right-hand side benchmark",
            masses="sine",
            levels=(4,),
            reference_resolution=4,
            bench_sizes=(128, 256, 512),
            bench_repeats=3,
        ),
    )
}


def builtin(name: str) -> Scenario:
    """
    Raises:
        ConfigError: If no built-in scenario has that name
    """
    try:
        return BUILTIN_SCENARIOS[name]
    except KeyError:
        msg = f"unknown scenario {name!r}; built-ins are {', '.join(BUILTIN_SCENARIOS)}"
        raise ConfigError(msg) from None


_FIELDS = {item.name: item for item in dataclasses.fields(Scenario)}


def _convert_field(key: str, raw: str, line: int) -> Any:
    spec = _FIELDS[key].metadata
    if spec["nullable"] and TextValue.is_none_like(raw):
        return None
    try:
        value = ValueInference.coerce(raw, spec["kind"], item_kind=spec["item"])
    except ValueError as error:
        raise ConfigError(f"{key}: {error}", line=line) from error
    return tuple(value) if spec["kind"] == ValueKind.LIST else value


def _build(name: str, entries: list[tuple[str, str, int]], header_line: int) -> Scenario:
    base: Scenario | None = None
    overrides: dict[str, Any] = {}
    seen: set[str] = set()
    for key, raw, line in entries:
        if key in seen:
            raise ConfigError(f"duplicate key {key!r} in [{name}]", line=line)
        seen.add(key)
        if key == "extends":
            try:
                base = builtin(raw.strip())
            except ConfigError as error:
                raise ConfigError(error.reason, line=line) from None
            continue
        if key not in _FIELDS or key == "name":
            raise ConfigError(f"unknown key {key!r}", line=line)
        overrides[key] = _convert_field(key, raw, line)

    try:
        if base is not None:
            return dataclasses.replace(base, name=name, **overrides)
        return Scenario(name=name, **overrides)
    except ConfigError as error:
        raise ConfigError(error.reason, line=header_line) from None


def parse_config(text: str) -> dict[str, Scenario]:
    """
    Parse configuration text into scenarios keyed by section name (in file order).

    Raises:
        ConfigError: With the offending line number
    """
    sections: dict[str, tuple[int, list[tuple[str, str, int]]]] = {}
    current: str | None = None
    for number, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.strip()
        if not line or line.startswith(("#", ";")):
            continue
        if line.startswith("["):
            if not line.endswith("]") or not line[1:-1].strip():
                raise ConfigError(f"malformed section header {line!r}", line=number)
            current = line[1:-1].strip()
            if current in sections:
                raise ConfigError(f"duplicate section [{current}]", line=number)
            sections[current] = (number, [])
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", line=number)
        if current is None:
            raise ConfigError("setting outside of a [section]", line=number)
        key, _, value = line.partition("=")
        value = value.split(" #", 1)[0]
        if not key.strip():
            raise ConfigError("missing key before '='", line=number)
        sections[current][1].append((key.strip(), value.strip(), number))

    if not sections:
        raise ConfigError("configuration defines no [section]")
    return {name: _build(name, entries, header) for name, (header, entries) in sections.items()}


def read_config(path: Path) -> dict[str, Scenario]:
    """
    Read and parse a configuration file.

    Raises:
        ConfigError: If the file cannot be read or does not parse
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as error:
        raise ConfigError(f"cannot read {path}: {error.strerror or error}") from error
    scenarios = parse_config(text)
    logger.debug("read %d scenario(s) from %s", len(scenarios), path)
    return scenarios


def select_scenario(config: Path | None, name: str | None) -> Scenario:
    """
    The scenario a command runs: a named section of the config file (the only one
    when the file has exactly one), or a built-in when no file is given.

    Raises:
        ConfigError: If the choice is ambiguous or the name is unknown
    """
    if config is None:
        return builtin(name or "canonical-1d")
    scenarios = read_config(config)
    if name is None:
        if len(scenarios) != 1:
            msg = f"{config} defines {len(scenarios)} scenarios; choose one with --scenario"
            raise ConfigError(msg)
        return next(iter(scenarios.values()))
    if name in scenarios:
        return scenarios[name]
    msg = f"scenario {name!r} is not defined in {config}"
    raise ConfigError(msg)


def resolve_runtime(
    out: str | None,
    threads: int | None,
    environ: Mapping[str, str] | None = None,
) -> tuple[Path, int]:
    """
    Output directory and worker count: command-line values, then the environment, then defaults.

    Raises:
        ConfigError: If the thread count is not a positive integer
    """
    env = os.environ if environ is None else environ
    directory = Path(out or env.get(ENV_OUT) or DEFAULT_OUT)
    if threads is None:
        raw = env.get(ENV_THREADS)
        if raw is None or not raw.strip():
            threads = 1
        elif TextValue.is_int_like(raw):
            threads = TextValue.to_int(raw)
        else:
            msg = f"{ENV_THREADS} must be an integer, got {raw!r}"
            raise ConfigError(msg)
    if threads < 1:
        msg = f"thread count must be >= 1, got {threads}"
        raise ConfigError(msg)
    return directory, threads
