"""Closed-form relaxation maps for populations and coherences.

Every quantity is built from the two 2x2 blocks of the collision unitary:
the one-excitation block (energy scale ``theta``) and the zero/two-excitation
block (energy scale ``phi``). Ratios like ``sin(theta*tau/2)/theta`` are
evaluated through ``np.sinc`` so that ``theta = 0`` (``J_xx = -J_yy`` with
``omega_a = omega_s``) needs no special case.

The ``*_values`` kernels broadcast over numpy arrays and are what the
property suites sample; the ``RIParams`` wrappers are the public API.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateParametersError
from .model import RIParams, ground_population, theta_phi

DEGENERACY_TOL = 1e-12


def _sin_over(energy, tau):
    """``sin(energy*tau/2) / energy``, finite at ``energy = 0``."""
    return 0.5 * tau * np.sinc(energy * tau / (2 * np.pi))


def mixing_weights(omega_s, omega_a, j_xx, j_yy, tau):
    """Transition probabilities ``(M_theta, M_phi)`` of the two blocks.

    ``M_theta = 4 (J_xx+J_yy)^2 / theta^2 sin^2(theta tau / 2)`` is the swap
    probability |du> <-> |ud>; ``M_phi`` is the same for |dd> <-> |uu>.
    """
    jp = np.add(j_xx, j_yy)
    jm = np.subtract(j_xx, j_yy)
    theta = np.hypot(2 * jp, np.subtract(omega_a, omega_s))
    phi = np.hypot(2 * jm, np.add(omega_a, omega_s))
    m_theta = (2 * jp * _sin_over(theta, tau)) ** 2
    m_phi = (2 * jm * _sin_over(phi, tau)) ** 2
    return m_theta, m_phi


def eta_values(omega_s, omega_a, j_xx, j_yy, tau):
    m_theta, m_phi = mixing_weights(omega_s, omega_a, j_xx, j_yy, tau)
    return 1.0 - m_theta - m_phi


def steady_population_values(omega_s, omega_a, j_xx, j_yy, tau, p_a):
    """Fixed point of the population map; NaN where the map is degenerate."""
    m_theta, m_phi = mixing_weights(omega_s, omega_a, j_xx, j_yy, tau)
    total = m_theta + m_phi
    with np.errstate(invalid="ignore", divide="ignore"):
        p_inf = (m_theta * p_a + m_phi * (1.0 - p_a)) / total
    return np.where(total > DEGENERACY_TOL, p_inf, np.nan)


def _coherence_factors(omega_s, omega_a, j_xx, j_yy, tau):
    """Return ``(K, D)`` with ``c' = K c* + D c`` for the J_zz = 0 map."""
    jp = np.add(j_xx, j_yy)
    jm = np.subtract(j_xx, j_yy)
    delta = np.subtract(omega_a, omega_s)
    big = np.add(omega_a, omega_s)
    theta = np.hypot(2 * jp, delta)
    phi = np.hypot(2 * jm, big)
    s_theta = _sin_over(theta, tau)
    s_phi = _sin_over(phi, tau)
    # 4 (J_xx^2 - J_yy^2) / (theta phi) sin(theta tau/2) sin(phi tau/2)
    k = 4 * jp * jm * s_theta * s_phi
    d = (np.cos(theta * tau / 2) - 1j * delta * s_theta) * (np.cos(phi * tau / 2) + 1j * big * s_phi)
    return k, d


def psi_values(omega_s, omega_a, j_xx, j_yy, tau, chi):
    """Coherence factor of the J_xx-J_yy model: ``c_{n+1} = psi |c_n|``."""
    k, d = _coherence_factors(omega_s, omega_a, j_xx, j_yy, tau)
    return k * np.exp(-1j * chi) + d * np.exp(1j * chi)


def psi_tilde_values(omega_s, omega_a, j_xx, j_yy, j_zz, tau, chi, p_a):
    """Coherence factor with the additional ``J_zz sz.sz`` coupling."""
    k, d = _coherence_factors(omega_s, omega_a, j_xx, j_yy, tau)
    zphase = 2 * np.multiply(j_zz, tau)
    first = k * np.exp(-1j * (chi + zphase))
    second = d * np.exp(1j * (chi + zphase))
    third = 2j * p_a * (k * np.exp(-1j * chi) - d * np.exp(1j * chi)) * np.sin(zphase)
    return first + second + third


def _unpack(params: RIParams):
    return params.omega_s, params.omega_a, params.j_xx, params.j_yy, params.tau


def eta(params: RIParams) -> float:
    """Geometric relaxation rate of the ground population. Independent of beta."""
    return float(eta_values(*_unpack(params)))


def is_degenerate(params: RIParams, tol: float = DEGENERACY_TOL) -> bool:
    """True when ``1 - eta < tol``: populations are frozen by the collision."""
    return 1.0 - eta(params) < tol


def steady_population(params: RIParams) -> float:
    """Ground population of the nonequilibrium steady state.

    Raises:
        DegenerateParametersError: when the map has rate 1 (resonant tau or
            vanishing transverse couplings), where no unique fixed point exists.
    """
    m_theta, m_phi = mixing_weights(*_unpack(params))
    total = float(m_theta + m_phi)
    if total < DEGENERACY_TOL or total <= 1e-300:
        raise DegenerateParametersError(
            "collision map is degenerate (eta = 1): tau*theta and tau*phi hit multiples of 2*pi "
            "or the transverse couplings vanish; populations never relax",
            eta=1.0 - total,
        )
    p_a = params.p_a
    return float((m_theta * p_a + m_phi * (1.0 - p_a)) / total)


def steady_population_short_tau(params: RIParams) -> float:
    """Second-order short-collision limit of the steady population."""
    jx, jy = params.j_xx, params.j_yy
    denom = 2 * (jx * jx + jy * jy)
    if denom == 0:
        raise DegenerateParametersError("short-tau steady state undefined when J_xx = J_yy = 0")
    return (4 * params.p_a * jx * jy + (jx - jy) ** 2) / denom


def predict_population(n, p0: float, params: RIParams):
    """``p_inf + eta**n (p0 - p_inf)``; accepts an integer or an integer array."""
    n_arr = np.asarray(n)
    if np.any(n_arr < 0):
        raise ValueError("n must be non-negative")
    if is_degenerate(params):
        warnings.warn("degenerate collision map: population stays at p0", RuntimeWarning, stacklevel=2)
        out = np.full(n_arr.shape, float(p0))
    else:
        p_inf = steady_population(params)
        out = p_inf + np.power(eta(params), n_arr) * (p0 - p_inf)
    return float(out) if out.ndim == 0 else out


def psi(params: RIParams, chi: float) -> complex:
    return complex(psi_values(*_unpack(params), chi))


def psi_tilde(params: RIParams, chi: float, p_a: float) -> complex:
    ws, wa, jx, jy, tau = _unpack(params)
    return complex(psi_tilde_values(ws, wa, jx, jy, params.j_zz, tau, chi, p_a))


def coherence_sequence(n: int, c0: complex, params: RIParams) -> np.ndarray:
    """Coherences ``c_0 .. c_n`` from the polar-form map, phase re-read each step."""
    if n < 0:
        raise ValueError("n must be non-negative")
    k, d = _coherence_factors(*_unpack(params))
    k, d = complex(k), complex(d)
    zphase = 2 * params.j_zz * params.tau
    p_a = params.p_a
    out = np.empty(n + 1, dtype=complex)
    c = complex(c0)
    out[0] = c
    for i in range(1, n + 1):
        mag = abs(c)
        if mag == 0.0:
            out[i:] = 0.0
            break
        chi = math.atan2(c.imag, c.real)
        e_plus = cmath.exp(1j * chi)
        e_minus = e_plus.conjugate()
        if zphase == 0.0:
            factor = k * e_minus + d * e_plus
        else:
            z_plus = cmath.exp(1j * zphase)
            factor = (
                k * e_minus * z_plus.conjugate()
                + d * e_plus * z_plus
                + 2j * p_a * (k * e_minus - d * e_plus) * math.sin(zphase)
            )
        c = factor * mag
        out[i] = c
    return out


def predict_coherence(n: int, c0: complex, params: RIParams) -> complex:
    return complex(coherence_sequence(n, c0, params)[-1])


@dataclass(frozen=True)
class RelaxationSummary:
    eta: float
    p_inf: float | None
    theta: float
    phi: float
    degenerate: bool
    p_inf_short_tau: float | None

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def summarize(params: RIParams, tol: float = DEGENERACY_TOL) -> RelaxationSummary:
    theta, phi = theta_phi(params)
    rate = eta(params)
    degenerate = 1.0 - rate < tol
    try:
        short = steady_population_short_tau(params)
    except DegenerateParametersError:
        short = None
    return RelaxationSummary(
        eta=rate,
        p_inf=None if degenerate else steady_population(params),
        theta=theta,
        phi=phi,
        degenerate=degenerate,
        p_inf_short_tau=short,
    )


__all__ = [
    "DEGENERACY_TOL",
    "RelaxationSummary",
    "coherence_sequence",
    "eta",
    "eta_values",
    "ground_population",
    "is_degenerate",
    "mixing_weights",
    "predict_coherence",
    "predict_population",
    "psi",
    "psi_tilde",
    "psi_tilde_values",
    "psi_values",
    "steady_population",
    "steady_population_short_tau",
    "steady_population_values",
    "summarize",
]
