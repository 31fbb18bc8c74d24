"""Scenario definitions: the config text format and the built-in presets.

Config format
-------------
Plain text, one ``key = value`` per line. Blank lines and lines starting
with ``#`` are ignored; keys may appear once. Lists are comma-separated.
Numbers are decimal.

==============  ========  ====================================================
key             required  value
==============  ========  ====================================================
``name``        yes       scenario name (no ``=`` or newline)
``family``      yes       ``normal`` or ``bernoulli``
``means``       yes       per-arm means (success probabilities for bernoulli)
``sds``         normal    per-arm standard deviations; not allowed for bernoulli
``initial_m``   no        initial responses per arm, default 10
``n_grid``      yes       ascending total sample sizes
``reps``        no        replications per N, default 10000
``metrics``     no        ordered output columns, default ``pcs, n1``
``procedure``   no        ``adaptive`` (the only rule), default ``adaptive``
==============  ========  ====================================================

Metric names: ``pcs``, ``n1``, ``second_max``, ``inferior``,
``inferior_over_logn``, ``min_expected_count``, ``min_expected_ratio``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from .engine import ADAPTIVE, TrialConfig
from .models import BERNOULLI, NORMAL, ResponseModel

METRIC_LABELS = {
    "pcs": "PCS",
    "n1": "E(N1)",
    "second_max": "E(2nd max)",
    "inferior": "E(N'inf)",
    "inferior_over_logn": "E(N'inf)/log(N)",
    "min_expected_count": "min E(N'j)",
    "min_expected_ratio": "min E(N'j)/N",
}

KEYS = ("name", "family", "means", "sds", "initial_m", "n_grid", "reps", "metrics", "procedure")


class ConfigParseError(ValueError):
    def __init__(self, msg: str, line: int | None = None, key: str | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"field {key!r}")
        super().__init__(f"{', '.join(where)}: {msg}" if where else msg)
        self.line = line
        self.key = key


class ScenarioError(ValueError):
    """A parsed scenario violates an invariant."""


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    arms: tuple[ResponseModel, ...]
    n_grid: tuple[int, ...]
    initial_m: int = 10
    reps: int = 10_000
    metrics: tuple[str, ...] = ("pcs", "n1")
    procedure: str = ADAPTIVE
    description: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "arms", tuple(self.arms))
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        object.__setattr__(self, "metrics", tuple(self.metrics))
        if not self.name or "=" in self.name or "\n" in self.name:
            raise ScenarioError(f"invalid name {self.name!r}")
        if len(self.arms) < 2:
            raise ScenarioError("need at least 2 arms")
        if len({a.kind for a in self.arms}) != 1:
            raise ScenarioError("all arms must share one family")
        if not self.n_grid:
            raise ScenarioError("n_grid is empty")
        if any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])):
            raise ScenarioError("n_grid not ascending")
        if self.reps < 1:
            raise ScenarioError("reps must be >= 1")
        unknown = [m for m in self.metrics if m not in METRIC_LABELS]
        if unknown:
            raise ScenarioError(f"unknown metrics {unknown}")
        if len(set(self.metrics)) != len(self.metrics):
            raise ScenarioError("duplicate metrics")
        means = [a.true_mean for a in self.arms]
        if {"inferior", "inferior_over_logn"} & set(self.metrics) and means.count(min(means)) > 1:
            raise ScenarioError("inferior metrics need a unique true-worst arm")
        # validates initial_m against the smallest N
        self.config(self.n_grid[0])

    @property
    def family(self) -> str:
        return self.arms[0].kind

    def config(self, total_n: int, seed: int = 0) -> TrialConfig:
        try:
            return TrialConfig(self.arms, total_n, self.initial_m, seed, self.procedure)
        except ValueError as e:
            raise ScenarioError(str(e)) from None

    def columns(self) -> list[str]:
        return ["N"] + [METRIC_LABELS[m] for m in self.metrics]


def _floats(key: str, value: str, line: int) -> list[float]:
    try:
        out = [float(v) for v in value.split(",")]
    except ValueError:
        raise ConfigParseError(f"expected comma-separated numbers, got {value!r}", line, key) from None
    if not all(math.isfinite(v) for v in out):
        raise ConfigParseError("numbers must be finite", line, key)
    return out


def _ints(key: str, value: str, line: int) -> list[int]:
    try:
        return [int(v) for v in value.split(",")]
    except ValueError:
        raise ConfigParseError(f"expected comma-separated integers, got {value!r}", line, key) from None


def parse_config(text: str) -> ScenarioSpec:
    raw: dict[str, tuple[str, int]] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        if "=" not in s:
            raise ConfigParseError("expected 'key = value'", lineno)
        key, value = (p.strip() for p in s.split("=", 1))
        if key not in KEYS:
            raise ConfigParseError("unknown key", lineno, key)
        if key in raw:
            raise ConfigParseError("duplicate key", lineno, key)
        raw[key] = (value, lineno)
    for key in ("name", "family", "means", "n_grid"):
        if key not in raw:
            raise ConfigParseError("missing required key", None, key)

    family, fl = raw["family"]
    means = _floats("means", *raw["means"])
    try:
        if family == NORMAL:
            if "sds" not in raw:
                raise ConfigParseError("normal arms need sds", None, "sds")
            sds = _floats("sds", *raw["sds"])
            if len(sds) != len(means):
                raise ConfigParseError("sds and means differ in length", raw["sds"][1], "sds")
            arms = [ResponseModel.normal(m, s) for m, s in zip(means, sds)]
        elif family == BERNOULLI:
            if "sds" in raw:
                raise ConfigParseError("sds not allowed for bernoulli", raw["sds"][1], "sds")
            arms = [ResponseModel.bernoulli(p) for p in means]
        else:
            raise ConfigParseError(f"unknown family {family!r}", fl, "family")
    except ConfigParseError:
        raise
    except ValueError as e:
        raise ScenarioError(str(e)) from None

    kwargs = {}
    for key in ("initial_m", "reps"):
        if key in raw:
            vals = _ints(key, *raw[key])
            if len(vals) != 1:
                raise ConfigParseError("expected a single integer", raw[key][1], key)
            kwargs[key] = vals[0]
    if "metrics" in raw:
        kwargs["metrics"] = tuple(m.strip() for m in raw["metrics"][0].split(","))
    if "procedure" in raw:
        kwargs["procedure"] = raw["procedure"][0]
    return ScenarioSpec(
        name=raw["name"][0], arms=tuple(arms), n_grid=tuple(_ints("n_grid", *raw["n_grid"])), **kwargs
    )


def load_config(path) -> ScenarioSpec:
    return parse_config(Path(path).read_text())


def serialize(spec: ScenarioSpec) -> str:
    lines = [
        f"name = {spec.name}",
        f"family = {spec.family}",
        "means = " + ", ".join(repr(a.mean) for a in spec.arms),
    ]
    if spec.family == NORMAL:
        lines.append("sds = " + ", ".join(repr(a.sd) for a in spec.arms))
    lines += [
        f"initial_m = {spec.initial_m}",
        "n_grid = " + ", ".join(map(str, spec.n_grid)),
        f"reps = {spec.reps}",
        "metrics = " + ", ".join(spec.metrics),
        f"procedure = {spec.procedure}",
    ]
    return "\n".join(lines) + "\n"


# -- presets -----------------------------------------------------------------

FULL_GRID = (200, 300, 400, 800, 900, 1000, 1500, 2000, 2500, 3000, 3500)
SHORT_GRID = (200, 300, 400, 800, 900, 1000, 1500, 2000)

_N = ResponseModel.normal
_B = ResponseModel.bernoulli
_SD2 = (1.0, math.sqrt(0.7))
_SD3 = (1.0, math.sqrt(0.7), math.sqrt(0.5))

# Initial per-arm sizes come from the calibration sweep at N = 200 (see
# README); identical-arm presets use the value matching the published E(N1).
PRESETS: dict[str, ScenarioSpec] = {}


def _add(name, arms, grid, m0, metrics, description):
    PRESETS[name] = ScenarioSpec(name, arms, grid, m0, 10_000, metrics, description=description)


for i, (a, b, m0) in enumerate([(0.5, 0.0, 11), (0.8, 0.2, 13), (1.0, 0.5, 11)], 1):
    arms = (_N(a, _SD2[0]), _N(b, _SD2[1]))
    _add(f"table1_col{i}", arms, FULL_GRID, m0, ("pcs", "n1"),
         f"two normal arms, means ({a:g}, {b:g}), variances (1, 0.7)")
    _add(f"table5_col{i}", arms, FULL_GRID, m0, ("pcs", "inferior", "inferior_over_logn"),
         f"as table1_col{i}, allocations to the worse arm")

for i, (a, b, m0) in enumerate([(0.5, 0.2, 13), (0.6, 0.3, 12), (0.8, 0.5, 12)], 1):
    arms = (_B(a), _B(b))
    _add(f"table2_col{i}", arms, FULL_GRID, m0, ("pcs", "n1"),
         f"two bernoulli arms, success probabilities ({a:g}, {b:g})")
    _add(f"table6_col{i}", arms, FULL_GRID, m0, ("pcs", "inferior", "inferior_over_logn"),
         f"as table2_col{i}, allocations to the worse arm")

_add("table3_normal", (_N(1, 1), _N(1, 1)), FULL_GRID, 50,
     ("pcs", "n1", "min_expected_count", "min_expected_ratio"), "identical Normal(1, 1) arms")
_add("table3_bernoulli", (_B(0.5), _B(0.5)), FULL_GRID, 50,
     ("pcs", "n1", "min_expected_count", "min_expected_ratio"), "identical Bernoulli(0.5) arms")

for i, (means, m0) in enumerate([((0.9, 0.2, 0.0), 6), ((2.0, 1.2, 0.5), 5)], 1):
    arms = tuple(_N(m, s) for m, s in zip(means, _SD3))
    _add(f"table4_col{i}", arms, SHORT_GRID, m0, ("pcs", "second_max"),
         f"three normal arms, means {means}, variances (1, 0.7, 0.5)")

_add("pregabalin", (_N(-3.60, 2.25), _N(-5.29, 2.20)), SHORT_GRID, 4, ("pcs", "n1"),
     "negated pain scores: pregabalin vs placebo")
_add("fluoxetine", (_B(0.58), _B(0.36)), SHORT_GRID, 14, ("pcs", "n1"),
     "responder rates: fluoxetine vs placebo")


def preset(name: str) -> ScenarioSpec:
    try:
        return PRESETS[name]
    except KeyError:
        raise ScenarioError(f"unknown preset {name!r}; choose from {', '.join(sorted(PRESETS))}") from None
