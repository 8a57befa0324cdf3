"""Thermalization with a few long collisions and randomly drawn couplings.

Each collision draws fresh transverse couplings, so the collision map changes
from step to step. When system and ancilla share a frequency, the couplings
are weak and ``J tau`` is of order one, the state lands on the ancilla's
thermal state within a handful of collisions.
"""

from __future__ import annotations

import math
import statistics
import warnings
from dataclasses import dataclass, field

import numpy as np

from .analytic import eta
from .collision import StepMap, TrajectoryRecord, collision_unitary
from .errors import ContractViolation
from .metrics import n_star_numeric
from .model import QubitState, RIParams, thermal_ancilla
from .thermo import EnergyOperators

RNG_ALGORITHM = "numpy.random.PCG64"
DEFAULT_THRESHOLD = 0.02


class RegimeWarning(UserWarning):
    """The configuration leaves the regime where fast thermalization is expected."""


@dataclass(frozen=True)
class ProtocolConfig:
    """Randomized-coupling protocol settings.

    Attributes:
        omega: Shared level splitting; ``omega_s`` and ``omega_a`` override it
            separately (which breaks the equal-frequency condition).
        j_max: Couplings are drawn from ``uniform(0, j_max)`` each collision.
        tau: Collision time.
        n_max: Number of collisions.
        seed: Seed for the PCG64 generator.
        beta: Ancilla inverse temperature.
        signed: Draw from ``uniform(-j_max, j_max)`` instead (exploratory).
        randomize_jzz: Also draw ``J_zz`` from the same range (exploratory).
    """

    omega: float
    j_max: float
    tau: float
    n_max: int
    seed: int
    beta: float = 1.0
    signed: bool = False
    randomize_jzz: bool = False
    omega_s: float | None = None
    omega_a: float | None = None

    def __post_init__(self):
        if not (self.omega > 0 and math.isfinite(self.omega)):
            raise ContractViolation("omega must be positive and finite")
        if not (self.j_max >= 0 and math.isfinite(self.j_max)):
            raise ContractViolation("j_max must be non-negative and finite")
        if not (self.tau > 0 and math.isfinite(self.tau)):
            raise ContractViolation("tau must be positive and finite")
        if isinstance(self.n_max, bool) or int(self.n_max) != self.n_max or self.n_max < 0:
            raise ContractViolation("n_max must be a non-negative integer")
        if isinstance(self.seed, bool) or int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise ContractViolation("seed must be an integer in [0, 2**64)")
        if not (self.beta >= 0 and math.isfinite(self.beta)):
            raise ContractViolation("beta must be non-negative and finite")
        for name in ("omega_s", "omega_a"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise ContractViolation(f"{name} must be positive")

    @property
    def frequencies(self) -> tuple[float, float]:
        ws = self.omega if self.omega_s is None else self.omega_s
        wa = self.omega if self.omega_a is None else self.omega_a
        return ws, wa

    @property
    def exploratory(self) -> bool:
        return self.signed or self.randomize_jzz

    def base_params(self) -> RIParams:
        ws, wa = self.frequencies
        return RIParams(omega_s=ws, omega_a=wa, beta=self.beta, tau=self.tau)

    def regime_warnings(self) -> list[str]:
        ws, wa = self.frequencies
        out = []
        if ws != wa:
            out.append(f"system and ancilla frequencies differ ({ws} vs {wa}); the fixed point is not thermal")
        if self.j_max > self.omega / 10:
            out.append(f"j_max={self.j_max} is not small against omega={self.omega} (limit omega/10)")
        jt = self.j_max * self.tau
        if not 0.1 <= jt <= 10:
            out.append(f"j_max*tau={jt:g} is outside the order-one band [0.1, 10]")
        return out

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _draw(rng: np.random.Generator, config: ProtocolConfig) -> tuple[float, float, float]:
    low = -config.j_max if config.signed else 0.0
    jx, jy = rng.uniform(low, config.j_max, size=2)
    jz = rng.uniform(low, config.j_max) if config.randomize_jzz else 0.0
    return float(jx), float(jy), float(jz)


def randomized_thermalization(state0: QubitState, config: ProtocolConfig) -> TrajectoryRecord:
    """Run ``config.n_max`` collisions, redrawing the couplings before each one.

    Every collision is recorded together with its energy ledger and the
    couplings it used (``couplings[k]`` produced state ``k + 1``).
    """
    for msg in config.regime_warnings():
        warnings.warn(msg, RegimeWarning, stacklevel=2)
    rng = np.random.Generator(np.random.PCG64(config.seed))
    base = config.base_params()
    ancilla = thermal_ancilla(base.beta, base.omega_a)

    size = config.n_max + 1
    p = np.empty(size)
    c = np.empty(size, dtype=complex)
    ledger = np.full((size, 4), np.nan)
    work = np.zeros(size)
    couplings = np.empty((config.n_max, 3))
    p[0], c[0] = state0.p, state0.c
    pn, cn = state0.p, complex(state0.c)
    total = 0.0
    for k in range(config.n_max):
        jx, jy, jz = _draw(rng, config)
        couplings[k] = (jx, jy, jz)
        params = base.replace(j_xx=jx, j_yy=jy, j_zz=jz)
        u = collision_unitary(params)
        step = StepMap.from_unitary(u, ancilla)
        led = EnergyOperators(params, u).ledger(pn, cn)
        total -= led.w
        pn, cn = step.apply(pn, cn)
        p[k + 1], c[k + 1] = pn, cn
        ledger[k + 1] = (led.w, led.q, led.de_s, led.residual)
        work[k + 1] = total

    meta = {"rng": RNG_ALGORITHM, "seed": int(config.seed), "protocol": config.to_dict()}
    if config.exploratory:
        meta["label"] = "exploratory: signed or J_zz draws"
    return TrajectoryRecord(
        params=base,
        n_steps=config.n_max,
        n=np.arange(size, dtype=np.int64),
        p=p,
        c=c,
        w=ledger[:, 0],
        q=ledger[:, 1],
        de=ledger[:, 2],
        residual=ledger[:, 3],
        work_invested=work,
        couplings=couplings,
        meta=meta,
    )


def distance_to_thermal(record: TrajectoryRecord) -> np.ndarray:
    """Trace distance of every recorded state to the ancilla's thermal state."""
    p_a = record.params.p_a
    return np.sqrt((record.p - p_a) ** 2 + np.abs(record.c) ** 2)


def first_hit(distances: np.ndarray, threshold: float) -> int | None:
    below = np.nonzero(distances < threshold)[0]
    return int(below[0]) if below.size else None


@dataclass(frozen=True)
class RegimeDiagnostics:
    theta_over_phi: float
    j_tau: float
    eta_min: float
    eta_max: float
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def regime_diagnostics(config: ProtocolConfig) -> RegimeDiagnostics:
    """Scale separation and per-collision contraction over the coupling range.

    ``eta`` is sampled on a grid of ``(J_xx, J_yy)`` covering the draw range,
    so the bounds are those of the population map at each possible draw.
    """
    base = config.base_params()
    ws, wa = config.frequencies
    theta = math.hypot(4 * config.j_max, wa - ws)
    phi = math.hypot(0.0, wa + ws)
    low = -config.j_max if config.signed else 0.0
    grid = np.linspace(low, config.j_max, 41)
    rates = [eta(base.replace(j_xx=float(a), j_yy=float(b))) for a in grid for b in grid]
    return RegimeDiagnostics(
        theta_over_phi=theta / phi,
        j_tau=config.j_max * config.tau,
        eta_min=float(min(rates)),
        eta_max=float(max(rates)),
        warnings=config.regime_warnings(),
    )


@dataclass(frozen=True)
class EnsembleSummary:
    seeds_run: int
    success_fraction: float
    median_n_to_threshold: float | None
    threshold: float
    window: int
    hits: list[int | None]
    rng: str = RNG_ALGORITHM

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def run_ensemble(
    state0: QubitState,
    config: ProtocolConfig,
    n_seeds: int,
    threshold: float = DEFAULT_THRESHOLD,
    window: int = 10,
) -> EnsembleSummary:
    """Repeat the protocol for seeds ``config.seed, config.seed + 1, ...``.

    A run succeeds when its trace distance to the thermal state drops below
    ``threshold`` within ``window`` collisions. The median counts only
    successful runs.
    """
    if n_seeds < 1:
        raise ContractViolation("n_seeds must be >= 1")
    if config.n_max < window:
        config = _with(config, n_max=window)
    hits = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RegimeWarning)
        for i in range(n_seeds):
            record = randomized_thermalization(state0, _with(config, seed=config.seed + i))
            hit = first_hit(distance_to_thermal(record)[: window + 1], threshold)
            hits.append(hit)
    ok = [h for h in hits if h is not None]
    return EnsembleSummary(
        seeds_run=n_seeds,
        success_fraction=len(ok) / n_seeds,
        median_n_to_threshold=float(statistics.median(ok)) if ok else None,
        threshold=threshold,
        window=window,
        hits=hits,
    )


def _with(config: ProtocolConfig, **changes) -> ProtocolConfig:
    data = config.to_dict()
    data.update(changes)
    return ProtocolConfig(**data)


def wall_clock_ratio(summary: EnsembleSummary, config: ProtocolConfig,
                     state0: QubitState, short_params: RIParams) -> float:
    """Elapsed time ``n * tau`` of the randomized protocol over that of a short-collision run.

    The short-collision time is ``n* tau`` for ``short_params`` from the same
    initial state and threshold, with ``n*`` from the numeric trace-distance search.
    """
    if summary.median_n_to_threshold is None:
        raise ContractViolation("no successful runs in the ensemble")
    report = n_star_numeric(state0, short_params, summary.threshold)
    short_time = max(report.n_star, 1) * short_params.tau
    return summary.median_n_to_threshold * config.tau / short_time


__all__ = [
    "DEFAULT_THRESHOLD",
    "EnsembleSummary",
    "ProtocolConfig",
    "RNG_ALGORITHM",
    "RegimeDiagnostics",
    "RegimeWarning",
    "distance_to_thermal",
    "first_hit",
    "randomized_thermalization",
    "regime_diagnostics",
    "run_ensemble",
    "wall_clock_ratio",
]
