"""Distances between qubit states and the number of collisions needed to converge."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analytic import DEGENERACY_TOL, eta, steady_population
from .collision import StepMap, collision_unitary
from .errors import ContractViolation, DegenerateParametersError, NonConvergenceError
from .model import QubitState, RIParams, thermal_ancilla
from .thermo import _closed_coefficients

METRICS = ("trace_distance", "infidelity")
DEFAULT_MAX_STEPS = 10**7


def trace_distance(a: QubitState, b: QubitState) -> float:
    """``(1/2) Tr|a - b|``.

    A diagonal target gives ``sqrt(dp^2 + |dc|^2)`` directly; otherwise the
    eigenvalues of the difference matrix are used.
    """
    if b.is_diagonal(0.0):
        return math.sqrt((a.p - b.p) ** 2 + abs(a.c - b.c) ** 2)
    eigs = np.linalg.eigvalsh(a.matrix() - b.matrix())
    return 0.5 * float(np.sum(np.abs(eigs)))


def fidelity(a: QubitState, b: QubitState) -> float:
    """Uhlmann fidelity ``(Tr sqrt(sqrt(a) b sqrt(a)))^2`` in its qubit closed form.

    For 2x2 states ``F = Tr(a b) + 2 sqrt(det a det b)``.
    """
    if a.is_diagonal(0.0) and b.is_diagonal(0.0):
        f = (math.sqrt(a.p * b.p) + math.sqrt((1 - a.p) * (1 - b.p))) ** 2
    else:
        overlap = a.p * b.p + (1 - a.p) * (1 - b.p) + 2 * (a.c * b.c.conjugate()).real
        det_a = max(a.p * (1 - a.p) - abs(a.c) ** 2, 0.0)
        det_b = max(b.p * (1 - b.p) - abs(b.c) ** 2, 0.0)
        f = overlap + 2 * math.sqrt(det_a * det_b)
    return min(max(f, 0.0), 1.0)


def infidelity(a: QubitState, b: QubitState) -> float:
    return 1.0 - fidelity(a, b)


def _trace_to_diagonal(p: float, c: complex, p_t: float) -> float:
    return math.sqrt((p - p_t) ** 2 + (c.real * c.real + c.imag * c.imag))


def _infidelity_to_diagonal(p: float, c: complex, p_t: float) -> float:
    det = max(p * (1 - p) - (c.real * c.real + c.imag * c.imag), 0.0)
    f = p * p_t + (1 - p) * (1 - p_t) + 2 * math.sqrt(det * p_t * (1 - p_t))
    return 1.0 - min(max(f, 0.0), 1.0)


# distances to a diagonal target, on raw (p, c) for the hot loop
_TO_DIAGONAL = {"trace_distance": _trace_to_diagonal, "infidelity": _infidelity_to_diagonal}


def canonical_metric(name: str) -> str:
    aliases = {"trace": "trace_distance", "trace_distance": "trace_distance", "infidelity": "infidelity"}
    try:
        return aliases[name]
    except KeyError:
        raise ContractViolation(f"unknown metric {name!r}; use one of {sorted(aliases)}") from None


def n_star_from_rate(gap: float, rate: float, epsilon: float) -> int:
    """Smallest ``n >= 0`` with ``|rate|**n * gap <= epsilon``.

    Starts from ``ceil(ln(epsilon/gap) / ln|rate|)`` and then corrects by
    direct evaluation so the result is exact at integer boundaries.
    """
    if epsilon <= 0:
        raise ContractViolation("epsilon must be positive")
    gap = abs(gap)
    if gap <= epsilon:
        return 0
    r = abs(rate)
    if not 0.0 < r < 1.0:
        raise DegenerateParametersError(f"need 0 < |eta| < 1 for a finite bound, got eta={rate}", eta=rate)
    n = max(math.ceil(math.log(epsilon / gap) / math.log(r)), 0)
    while r**n * gap > epsilon:
        n += 1
    while n > 0 and r ** (n - 1) * gap <= epsilon:
        n -= 1
    return n


def n_star_bound_diagonal(p0: float, params: RIParams, epsilon: float) -> int:
    """Collisions needed for a diagonal state to come within trace distance ``epsilon``."""
    rate = eta(params)
    if 1.0 - rate < DEGENERACY_TOL:
        raise DegenerateParametersError("degenerate collision map: no convergence", eta=rate)
    return n_star_from_rate(p0 - steady_population(params), rate, epsilon)


@dataclass(frozen=True)
class ConvergenceReport:
    n_star: int
    metric: str
    epsilon: float
    achieved_distance: float
    total_work: float
    p_inf: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def n_star_numeric(
    state0: QubitState,
    params: RIParams,
    epsilon: float,
    metric: str = "trace_distance",
    max_steps: int = DEFAULT_MAX_STEPS,
) -> ConvergenceReport:
    """First collision count at which the state is ``epsilon``-close to the steady state.

    Iterates the exact collision map. The reported work is the invested work
    ``-sum W_I`` of the closed-form ledger up to ``n_star``.

    Raises:
        DegenerateParametersError: no steady state exists.
        NonConvergenceError: no crossing within ``max_steps`` collisions.
    """
    metric = canonical_metric(metric)
    if epsilon <= 0:
        raise ContractViolation("epsilon must be positive")
    p_inf = steady_population(params)
    distance = _TO_DIAGONAL[metric]

    step = StepMap.from_unitary(collision_unitary(params), thermal_ancilla(params.beta, params.omega_a))
    (w_slope, w_icpt), _, _ = _closed_coefficients(params)
    p, c = state0.p, complex(state0.c)
    work = 0.0
    best = (math.inf, 0)
    for n in range(max_steps + 1):
        d = distance(p, c, p_inf)
        if d <= epsilon:
            return ConvergenceReport(n, metric, epsilon, d, work, p_inf)
        if d < best[0]:
            best = (d, n)
        work -= w_slope * p + w_icpt
        p, c = step.apply(p, c)
    raise NonConvergenceError(
        f"{metric} did not reach {epsilon} within {max_steps} collisions (best {best[0]:.3e} at n={best[1]})",
        best_distance=best[0],
        n_best=best[1],
        n_steps=max_steps,
    )
