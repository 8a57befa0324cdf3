"""Parameters, states and Hamiltonians of the qubit-ancilla collision model."""

from __future__ import annotations

import cmath
import dataclasses
import hashlib
import math
import struct
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation
from .linalg import kron, pauli

POSITIVITY_TOL = 1e-12

PARAM_FIELDS = ("omega_s", "omega_a", "j_xx", "j_yy", "j_zz", "beta", "tau")


@dataclass(frozen=True)
class RIParams:
    """One repeated-interaction configuration (hbar = 1).

    Attributes:
        omega_s: System level splitting.
        omega_a: Ancilla level splitting.
        j_xx, j_yy, j_zz: System-ancilla coupling strengths.
        beta: Inverse temperature of the ancilla bath.
        tau: Duration of each collision.
    """

    omega_s: float
    omega_a: float
    j_xx: float = 0.0
    j_yy: float = 0.0
    j_zz: float = 0.0
    beta: float = 1.0
    tau: float = 0.01

    def __post_init__(self):
        for name in PARAM_FIELDS:
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float, np.floating, np.integer)):
                raise ContractViolation(f"{name} must be a real number, got {value!r}")
            value = float(value)
            if not math.isfinite(value):
                raise ContractViolation(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, value)
        if self.omega_s <= 0 or self.omega_a <= 0:
            raise ContractViolation("omega_s and omega_a must be strictly positive")
        if self.tau <= 0:
            raise ContractViolation("tau must be strictly positive")
        if self.beta < 0:
            raise ContractViolation("beta must be non-negative")

    def replace(self, **changes) -> "RIParams":
        return dataclasses.replace(self, **changes)

    @property
    def p_a(self) -> float:
        """Ground population of the thermal ancilla."""
        return ground_population(self.beta, self.omega_a)

    def fingerprint(self) -> str:
        packed = struct.pack("<7d", *(getattr(self, f) for f in PARAM_FIELDS))
        return hashlib.sha256(packed).hexdigest()[:16]

    def to_dict(self) -> dict:
        return {f: getattr(self, f) for f in PARAM_FIELDS}

    @classmethod
    def from_dict(cls, data: dict) -> "RIParams":
        unknown = set(data) - set(PARAM_FIELDS)
        if unknown:
            raise ContractViolation(f"unknown RIParams fields: {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class QubitState:
    """Qubit density matrix ``[[p, c], [c*, 1-p]]``.

    ``p`` is the ground-state population and ``c`` the coherence.
    """

    p: float
    c: complex = 0j

    def __post_init__(self):
        p = float(self.p)
        c = complex(self.c)
        if not (math.isfinite(p) and math.isfinite(c.real) and math.isfinite(c.imag)):
            raise ContractViolation("state entries must be finite")
        if p < -POSITIVITY_TOL or p > 1 + POSITIVITY_TOL:
            raise ContractViolation(f"population {p} outside [0, 1]")
        p = min(max(p, 0.0), 1.0)
        if abs(c) ** 2 > p * (1 - p) + POSITIVITY_TOL:
            raise ContractViolation(
                f"|c|^2 = {abs(c) ** 2:.3e} exceeds p(1-p) = {p * (1 - p):.3e}; not positive"
            )
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "c", c)

    @property
    def chi(self) -> float:
        """Phase of the coherence, ``atan2(Im c, Re c)``."""
        return cmath.phase(self.c)

    def is_diagonal(self, tol: float = 1e-12) -> bool:
        return abs(self.c) <= tol

    def matrix(self) -> np.ndarray:
        return np.array([[self.p, self.c], [self.c.conjugate(), 1.0 - self.p]], dtype=complex)

    @classmethod
    def from_matrix(cls, rho: np.ndarray) -> "QubitState":
        rho = np.asarray(rho, dtype=complex)
        return cls(p=rho[0, 0].real, c=complex(rho[0, 1]))

    def to_dict(self) -> dict:
        return {"p": self.p, "c_re": self.c.real, "c_im": self.c.imag}

    @classmethod
    def from_dict(cls, data: dict) -> "QubitState":
        unknown = set(data) - {"p", "c_re", "c_im"}
        if unknown:
            raise ContractViolation(f"unknown QubitState fields: {sorted(unknown)}")
        return cls(p=data["p"], c=complex(data.get("c_re", 0.0), data.get("c_im", 0.0)))


def ground_population(beta: float, omega: float) -> float:
    return 1.0 / (1.0 + math.exp(-beta * omega))


def thermal_ancilla(beta: float, omega_a: float) -> QubitState:
    """Gibbs state of ``-(omega_a/2) sigma_z`` at inverse temperature ``beta``."""
    if not (math.isfinite(beta) and beta >= 0):
        raise ContractViolation("beta must be finite and non-negative")
    if not omega_a > 0:
        raise ContractViolation("omega_a must be positive")
    return QubitState(p=ground_population(beta, omega_a))


def random_state(rng: np.random.Generator) -> QubitState:
    """Draw p ~ U(0,1), phase ~ U(0, 2pi), |c| ~ U(0, sqrt(p(1-p)))."""
    p = rng.uniform(0.0, 1.0)
    phase = rng.uniform(0.0, 2 * math.pi)
    mag = rng.uniform(0.0, math.sqrt(p * (1.0 - p)))
    return QubitState(p=p, c=mag * cmath.exp(1j * phase))


def system_hamiltonian(omega_s: float) -> np.ndarray:
    return -0.5 * omega_s * pauli("z")


def ancilla_hamiltonian(omega_a: float) -> np.ndarray:
    return -0.5 * omega_a * pauli("z")


def interaction_hamiltonian(params: RIParams) -> np.ndarray:
    """``J_xx sx.sx + J_yy sy.sy + J_zz sz.sz`` as a 4x4 matrix."""
    jp = params.j_xx + params.j_yy
    jm = params.j_xx - params.j_yy
    jz = params.j_zz
    return np.array(
        [[jz, 0, 0, jm], [0, -jz, jp, 0], [0, jp, -jz, 0], [jm, 0, 0, jz]],
        dtype=complex,
    )


def embedded_hamiltonians(params: RIParams) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(H_S x 1, 1 x H_A, H_I)`` on the joint space."""
    eye = np.eye(2)
    return (
        kron(system_hamiltonian(params.omega_s), eye),
        kron(eye, ancilla_hamiltonian(params.omega_a)),
        interaction_hamiltonian(params),
    )


def total_hamiltonian(params: RIParams) -> np.ndarray:
    """Joint Hamiltonian; entries placed directly so it is exactly Hermitian."""
    ws, wa = params.omega_s, params.omega_a
    diag = np.array([-(wa + ws) / 2, (wa - ws) / 2, (ws - wa) / 2, (wa + ws) / 2])
    h = interaction_hamiltonian(params)
    h[np.diag_indices(4)] += diag
    return h


def theta_phi(params: RIParams) -> tuple[float, float]:
    """Energy scales of the one-excitation (theta) and zero/two-excitation (phi) blocks."""
    theta = math.hypot(2 * (params.j_xx + params.j_yy), params.omega_a - params.omega_s)
    phi = math.hypot(2 * (params.j_xx - params.j_yy), params.omega_a + params.omega_s)
    return theta, phi


def effective_beta(state: QubitState, omega_s: float) -> float | None:
    """Inverse temperature that reproduces the population ratio of a diagonal state.

    Returns ``None`` for states with coherences (no temperature is defined),
    ``+inf``/``-inf`` for pure ground/excited states, and a negative value
    under population inversion.
    """
    if not state.is_diagonal():
        return None
    p = state.p
    if p >= 1.0:
        return math.inf
    if p <= 0.0:
        return -math.inf
    return -math.log((1.0 - p) / p) / omega_s
