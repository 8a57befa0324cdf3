"""Work, heat and system-energy bookkeeping for each collision.

Sign conventions: ``w`` is the change of interaction energy over one
collision, ``q > 0`` means energy deposited in the ancilla, ``de_s`` is the
change of the system's internal energy. Energy conservation of the joint
unitary gives ``w + q + de_s = 0``. Cumulative work carries an explicit
minus sign so that positive values are work invested.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .analytic import DEGENERACY_TOL, eta, mixing_weights, steady_population
from .errors import ConsistencyError, ContractViolation, DegenerateParametersError
from .linalg import _ptrace, kron
from .model import QubitState, RIParams, embedded_hamiltonians

FIRST_LAW_TOL = 1e-11


@dataclass(frozen=True)
class StepLedger:
    w: float
    q: float
    de_s: float
    residual: float

    @classmethod
    def from_terms(cls, w: float, q: float, de_s: float) -> "StepLedger":
        return cls(float(w), float(q), float(de_s), float(w + q + de_s))


def _check_first_law(ledger: StepLedger) -> StepLedger:
    if abs(ledger.residual) > FIRST_LAW_TOL:
        raise ConsistencyError(f"first-law residual {ledger.residual:.3e} exceeds {FIRST_LAW_TOL}")
    return ledger


def _check_unitary_matches(params: RIParams, u) -> None:
    if u.params_fingerprint != params.fingerprint():
        raise ContractViolation("collision unitary was built from different parameters")


def step_energetics_numeric(state: QubitState, params: RIParams, u) -> StepLedger:
    """Trace-definition ledger of one collision starting from ``state``.

    ``u`` is the :class:`~riqubit.collision.CollisionUnitary` for ``params``.
    """
    _check_unitary_matches(params, u)
    U = u.u
    Ud = U.conj().T
    rho = kron(state.matrix(), np.diag([params.p_a, 1.0 - params.p_a]))
    h_s, h_a, h_i = embedded_hamiltonians(params)
    w = np.trace((Ud @ h_i @ U - h_i) @ rho).real
    q = np.trace((Ud @ h_a @ U - h_a) @ rho).real
    de_s = np.trace(h_s @ (U @ rho @ Ud - rho)).real
    return _check_first_law(StepLedger.from_terms(w, q, de_s))


class EnergyOperators:
    """Ancilla-averaged energy-change operators for repeated use along a trajectory.

    For each energy term ``X`` this stores ``K_X = Tr_A[(U^dag X U - X)(1 x rho_A)]``,
    so that the per-step change is ``Tr[K_X rho_S]``. This is the trace
    definition, reduced once instead of rebuilt every step.
    """

    def __init__(self, params: RIParams, u):
        _check_unitary_matches(params, u)
        U = u.u
        Ud = U.conj().T
        bath = kron(np.eye(2), np.diag([params.p_a, 1.0 - params.p_a]))
        h_s, h_a, h_i = embedded_hamiltonians(params)
        self.k_w, self.k_q, self.k_e = (_ptrace((Ud @ h @ U - h) @ bath) for h in (h_i, h_a, h_s))

    @staticmethod
    def _expect(k: np.ndarray, p: float, c: complex) -> float:
        return (k[0, 0].real * p + k[1, 1].real * (1.0 - p) + 2.0 * (k[0, 1] * c.conjugate()).real)

    def ledger(self, p: float, c: complex) -> StepLedger:
        c = complex(c)
        return _check_first_law(
            StepLedger.from_terms(
                self._expect(self.k_w, p, c), self._expect(self.k_q, p, c), self._expect(self.k_e, p, c)
            )
        )


def _closed_coefficients(params: RIParams):
    """Coefficients ``(slope, intercept)`` of W, Q, dE_S as affine functions of p."""
    m_theta, m_phi = (float(x) for x in mixing_weights(params.omega_s, params.omega_a, params.j_xx,
                                                        params.j_yy, params.tau))
    p_a = params.p_a
    delta = params.omega_a - params.omega_s
    big = params.omega_a + params.omega_s
    # W = delta*M_theta*(p - p_a) - big*M_phi*(p - (1 - p_a))
    w = (delta * m_theta - big * m_phi, -delta * m_theta * p_a + big * m_phi * (1.0 - p_a))
    # Q = omega_a * [-M_theta*(p - p_a) + M_phi*(p - (1 - p_a))]
    q = (params.omega_a * (m_phi - m_theta), params.omega_a * (m_theta * p_a - m_phi * (1.0 - p_a)))
    # dE_S = omega_s * [M_theta*(p - p_a) + M_phi*(p - (1 - p_a))]
    e = (params.omega_s * (m_theta + m_phi), -params.omega_s * (m_theta * p_a + m_phi * (1.0 - p_a)))
    return w, q, e


def step_energetics_closed(state: QubitState, params: RIParams) -> StepLedger:
    """Closed-form ledger; depends on the state only through its population."""
    (ws, wi), (qs, qi), (es, ei) = _closed_coefficients(params)
    p = state.p
    return StepLedger.from_terms(ws * p + wi, qs * p + qi, es * p + ei)


def energy_change_amplitudes(params: RIParams) -> tuple[float, float]:
    """``(A, B)`` with ``dE_S^(n+1) = (A + B) p_n + p_a (B - A) - B``."""
    m_theta, m_phi = mixing_weights(params.omega_s, params.omega_a, params.j_xx, params.j_yy, params.tau)
    return float(params.omega_s * m_theta), float(params.omega_s * m_phi)


def cumulative_work(trajectory, n_stop: int) -> float:
    """Invested work ``-sum_{k=1..n_stop} W_I^(k)`` read off a recorded trajectory."""
    if trajectory.work_invested is None:
        raise ContractViolation("trajectory was run without a ledger")
    if not 0 <= n_stop <= trajectory.n_steps:
        raise ContractViolation(f"n_stop={n_stop} outside [0, {trajectory.n_steps}]")
    if n_stop == 0:
        return 0.0
    idx = np.searchsorted(trajectory.n, n_stop)
    if idx >= len(trajectory.n) or trajectory.n[idx] != n_stop:
        raise ContractViolation(f"step {n_stop} was not recorded (stride too coarse)")
    return float(trajectory.work_invested[idx])


def cumulative_work_closed(p0: float, params: RIParams, n_stop: int) -> float:
    """Invested work after ``n_stop`` collisions from population ``p0``, summed in closed form.

    ``W_I^(k)`` is affine in ``p_{k-1}`` and ``p_k`` relaxes geometrically, so
    the sum is a geometric series.
    """
    if n_stop < 0:
        raise ValueError("n_stop must be non-negative")
    if n_stop == 0:
        return 0.0
    (slope, intercept), _, _ = _closed_coefficients(params)
    if slope == 0.0 and intercept == 0.0:
        return 0.0
    rate = eta(params)
    if 1.0 - rate < DEGENERACY_TOL:
        return -n_stop * (slope * p0 + intercept)
    p_inf = steady_population(params)
    # sum_{k=0}^{n-1} eta^k; expm1/log1p keep it accurate when eta is close to 1
    gap = 1.0 - rate
    if rate > 0:
        geometric = -np.expm1(n_stop * np.log1p(-gap)) / gap
    else:
        geometric = (1.0 - rate**n_stop) / gap
    total = n_stop * (slope * p_inf + intercept) + slope * (p0 - p_inf) * geometric
    return float(-total)


def asymptotic_housekeeping(params: RIParams) -> tuple[float, float]:
    """Per-collision ``(w_inf, q_inf)`` needed to sustain the steady state.

    Raises:
        DegenerateParametersError: if the map has no steady state.
    """
    p_inf = steady_population(params)
    ledger = step_energetics_closed(QubitState(p_inf), params)
    scale = max(1.0, abs(ledger.w), abs(ledger.q))
    if abs(ledger.w + ledger.q) > 1e-12 * scale:
        raise ConsistencyError(f"housekeeping pair does not cancel: w={ledger.w}, q={ledger.q}")
    return ledger.w, ledger.q


__all__ = [
    "DegenerateParametersError",
    "EnergyOperators",
    "FIRST_LAW_TOL",
    "StepLedger",
    "asymptotic_housekeeping",
    "cumulative_work",
    "cumulative_work_closed",
    "energy_change_amplitudes",
    "step_energetics_closed",
    "step_energetics_numeric",
]
