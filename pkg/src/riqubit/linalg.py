"""Small exact kernel for 2x2 and 4x4 complex matrices.

Two-qubit operators use the basis ordering |dd>, |du>, |ud>, |uu> with the
system first and the ancilla second, where ``d`` (spin down) is the ground
state of ``-(w/2) sigma_z`` and sits first in each single-qubit basis.
"""

from __future__ import annotations

import numpy as np

from .errors import ContractViolation

STRUCTURAL_TOL = 1e-12

_PAULI = {
    "id": np.array([[1, 0], [0, 1]], dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli(axis: str) -> np.ndarray:
    """Return a fresh copy of the Pauli matrix for ``axis`` in {x, y, z, id}."""
    try:
        return _PAULI[axis].copy()
    except KeyError:
        raise ContractViolation(f"unknown Pauli axis {axis!r}") from None


def max_abs(a: np.ndarray) -> float:
    return float(np.max(np.abs(a))) if a.size else 0.0


def is_hermitian(a: np.ndarray, tol: float = STRUCTURAL_TOL) -> bool:
    return max_abs(a - a.conj().T) <= tol


def is_unitary(u: np.ndarray, tol: float = STRUCTURAL_TOL) -> bool:
    return max_abs(u.conj().T @ u - np.eye(u.shape[0])) <= tol


def exp_2x2_hermitian(h: np.ndarray, t: float) -> np.ndarray:
    """Closed-form ``exp(-i h t)`` for a Hermitian 2x2 ``h``.

    Writes ``h = a*1 + b.sigma`` and uses
    ``exp(-iht) = exp(-iat) [cos(|b|t) 1 - i sin(|b|t) b.sigma/|b|]``.
    ``sin(|b|t)/|b|`` goes through ``np.sinc`` so ``b = 0`` needs no branch.
    """
    h = np.asarray(h, dtype=complex)
    if h.shape != (2, 2) or not np.all(np.isfinite(h)):
        raise ContractViolation("expected a finite 2x2 matrix")
    if not is_hermitian(h):
        raise ContractViolation("exp_2x2_hermitian needs a Hermitian matrix")
    a = 0.5 * (h[0, 0].real + h[1, 1].real)
    bx = h[1, 0].real
    by = h[1, 0].imag
    bz = 0.5 * (h[0, 0].real - h[1, 1].real)
    norm = float(np.sqrt(bx * bx + by * by + bz * bz))
    cos_part = np.cos(norm * t)
    # sin(norm t) / norm
    sin_ratio = t * np.sinc(norm * t / np.pi)
    b_sigma = np.array([[bz, bx - 1j * by], [bx + 1j * by, -bz]], dtype=complex)
    return np.exp(-1j * a * t) * (cos_part * np.eye(2) - 1j * sin_ratio * b_sigma)


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product, system factor first."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def partial_trace_ancilla(rho: np.ndarray) -> np.ndarray:
    """Trace out the second (ancilla) qubit of a 4x4 density matrix."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ContractViolation("expected a 4x4 matrix")
    tr = np.trace(rho)
    if abs(tr - 1.0) > STRUCTURAL_TOL:
        raise ContractViolation(f"density matrix trace is {tr}, expected 1")
    if not is_hermitian(rho):
        raise ContractViolation("density matrix is not Hermitian")
    return _ptrace(rho)


def _ptrace(rho: np.ndarray) -> np.ndarray:
    # unchecked; also used on non-state operators (basis matrices, energy operators)
    return np.einsum("iaja->ij", rho.reshape(2, 2, 2, 2))
