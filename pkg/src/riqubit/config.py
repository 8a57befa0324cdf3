"""Experiment configuration: JSON-serializable description of one CLI run."""

from __future__ import annotations

import itertools
import json
import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ContractViolation
from .metrics import canonical_metric
from .model import PARAM_FIELDS, QubitState, RIParams, random_state

SCHEMA_VERSION = 1
KINDS = ("simulate", "steady", "resources", "thermalize", "sweep")
ROUTES = ("numeric", "bound")
# axes that are not model parameters but are swept the same way
EXTRA_AXES = ("epsilon", "p0", "metric")
PROTOCOL_KEYS = {"j_max", "n_seeds", "threshold", "window", "seed", "signed", "randomize_jzz"}

_RANDOM_STATE = re.compile(r"^random\((\d+)\)$")


@dataclass(frozen=True)
class Axis:
    """One sweep axis: either explicit ``values`` or a ``min``/``max``/``points`` grid."""

    name: str
    values: tuple | None = None
    min: float | None = None
    max: float | None = None
    points: int | None = None
    scale: str = "linear"

    def __post_init__(self):
        if self.name not in PARAM_FIELDS + EXTRA_AXES:
            raise ContractViolation(
                f"unknown sweep axis {self.name!r}; allowed: {', '.join(PARAM_FIELDS + EXTRA_AXES)}"
            )
        if self.values is not None:
            if any(v is not None for v in (self.min, self.max, self.points)):
                raise ContractViolation(f"axis {self.name!r}: give either values or min/max/points")
            values = tuple(self.values)
            if self.name == "metric":
                values = tuple(canonical_metric(v) for v in values)
            else:
                values = tuple(float(v) for v in values)
            object.__setattr__(self, "values", values)
            count = len(values)
        else:
            if self.name == "metric":
                raise ContractViolation("the metric axis needs explicit values")
            if self.min is None or self.max is None or self.points is None:
                raise ContractViolation(f"axis {self.name!r}: min, max and points are required")
            if self.scale not in ("linear", "log"):
                raise ContractViolation(f"axis {self.name!r}: scale must be 'linear' or 'log'")
            if self.scale == "log" and not (self.min > 0 and self.max > 0):
                raise ContractViolation(f"axis {self.name!r}: log scale needs positive bounds")
            count = int(self.points)
        if count < 2:
            raise ContractViolation(f"axis {self.name!r} needs at least 2 points")

    @property
    def grid(self) -> tuple:
        if self.values is not None:
            return self.values
        if self.scale == "log":
            pts = np.geomspace(self.min, self.max, int(self.points))
        else:
            pts = np.linspace(self.min, self.max, int(self.points))
        return tuple(float(x) for x in pts)

    def to_dict(self) -> dict:
        if self.values is not None:
            return {"name": self.name, "values": list(self.values)}
        return {"name": self.name, "min": self.min, "max": self.max, "points": self.points, "scale": self.scale}

    @classmethod
    def from_dict(cls, data: dict) -> "Axis":
        unknown = set(data) - {"name", "values", "min", "max", "points", "scale"}
        if unknown:
            raise ContractViolation(f"unknown axis fields: {sorted(unknown)}")
        if "name" not in data:
            raise ContractViolation("axis needs a name")
        data = dict(data)
        if "values" in data:
            data["values"] = tuple(data["values"])
        return cls(**data)


def parse_initial_state(value) -> QubitState | str:
    if isinstance(value, QubitState):
        return value
    if isinstance(value, str):
        if not _RANDOM_STATE.match(value.strip()):
            raise ContractViolation(f"initial_state string must look like 'random(SEED)', got {value!r}")
        return value.strip()
    if isinstance(value, dict):
        return QubitState.from_dict(value)
    raise ContractViolation(f"cannot read initial_state from {value!r}")


def resolve_state(value: QubitState | str) -> QubitState:
    """Materialize ``random(SEED)`` through the seeded PCG64 generator."""
    if isinstance(value, QubitState):
        return value
    seed = int(_RANDOM_STATE.match(value).group(1))
    return random_state(np.random.default_rng(seed))


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce one run of the command-line tool.

    ``protocol`` holds the randomized-coupling settings used by ``thermalize``
    (``j_max``, ``n_seeds``, ``threshold``, ``window``, ``seed`` and the two
    exploratory flags). ``route`` picks the numeric search or the closed-form
    bound for ``n*`` in sweeps.
    """

    kind: str
    params: RIParams
    initial_state: QubitState | str = "random(0)"
    n_steps: int = 1000
    epsilon: float = 0.05
    metric: str = "trace_distance"
    sweep_axes: tuple[Axis, ...] = ()
    output_path: str | None = None
    stride: int = 1
    max_steps: int = 10**7
    route: str = "numeric"
    with_ledger: bool = False
    protocol: dict | None = None
    notes: str = ""
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        if self.schema_version != SCHEMA_VERSION:
            raise ContractViolation(f"unsupported schema_version {self.schema_version}")
        if self.kind not in KINDS:
            raise ContractViolation(f"kind must be one of {KINDS}, got {self.kind!r}")
        if not isinstance(self.params, RIParams):
            raise ContractViolation("params must be an RIParams")
        object.__setattr__(self, "initial_state", parse_initial_state(self.initial_state))
        object.__setattr__(self, "metric", canonical_metric(self.metric))
        object.__setattr__(self, "sweep_axes", tuple(self.sweep_axes))
        for name in ("n_steps", "stride", "max_steps"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value:
                raise ContractViolation(f"{name} must be an integer")
        if self.n_steps < 0:
            raise ContractViolation("n_steps must be non-negative")
        if self.stride < 1 or self.max_steps < 1:
            raise ContractViolation("stride and max_steps must be >= 1")
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise ContractViolation("epsilon must be positive")
        if self.route not in ROUTES:
            raise ContractViolation(f"route must be one of {ROUTES}")
        names = [a.name for a in self.sweep_axes]
        if len(set(names)) != len(names):
            raise ContractViolation(f"duplicate sweep axes: {names}")
        if self.kind == "sweep" and not self.sweep_axes:
            raise ContractViolation("a sweep needs at least one axis")
        if self.kind in ("simulate", "steady") and set(names) & {"epsilon", "metric"}:
            raise ContractViolation(f"{self.kind} cannot sweep epsilon or metric")
        if self.route == "bound" and (self.metric != "trace_distance" or "metric" in names):
            raise ContractViolation("the closed-form bound exists for the trace distance only")
        if self.kind == "thermalize":
            proto = self.protocol or {}
            unknown = set(proto) - PROTOCOL_KEYS
            if unknown:
                raise ContractViolation(f"unknown protocol fields: {sorted(unknown)}")
            if "j_max" not in proto:
                raise ContractViolation("thermalize needs protocol.j_max")

    def replace(self, **changes) -> "ExperimentConfig":
        data = {k: getattr(self, k) for k in self.__dataclass_fields__}
        data.update(changes)
        return ExperimentConfig(**data)

    def grid_points(self) -> list[dict]:
        """Row-major product of the sweep axes (last axis varies fastest)."""
        if not self.sweep_axes:
            return [{}]
        names = [a.name for a in self.sweep_axes]
        return [dict(zip(names, combo)) for combo in itertools.product(*(a.grid for a in self.sweep_axes))]

    def to_dict(self) -> dict:
        state = self.initial_state
        return {
            "schema_version": self.schema_version,
            "kind": self.kind,
            "params": self.params.to_dict(),
            "initial_state": state if isinstance(state, str) else state.to_dict(),
            "n_steps": self.n_steps,
            "epsilon": self.epsilon,
            "metric": self.metric,
            "sweep_axes": [a.to_dict() for a in self.sweep_axes],
            "output_path": self.output_path,
            "stride": self.stride,
            "max_steps": self.max_steps,
            "route": self.route,
            "with_ledger": self.with_ledger,
            "protocol": None if self.protocol is None else dict(self.protocol),
            "notes": self.notes,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        allowed = set(cls.__dataclass_fields__)
        unknown = set(data) - allowed
        if unknown:
            raise ContractViolation(f"unknown config fields: {sorted(unknown)}")
        for key in ("kind", "params"):
            if key not in data:
                raise ContractViolation(f"config is missing {key!r}")
        data = dict(data)
        if not isinstance(data["params"], dict):
            raise ContractViolation("params must be an object")
        data["params"] = RIParams.from_dict(data["params"])
        data["sweep_axes"] = tuple(Axis.from_dict(a) for a in data.get("sweep_axes") or ())
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ContractViolation(f"config is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ContractViolation("config must be a JSON object")
        return cls.from_dict(data)

    def save(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n")

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ContractViolation(f"cannot read config {path}: {exc.strerror}") from None
        return cls.from_json(text)
