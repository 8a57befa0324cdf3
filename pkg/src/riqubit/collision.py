"""Exact collision unitary and brute-force iteration of the collision map.

This module is the numerical ground truth: nothing in it uses the closed-form
relaxation formulas. A trajectory reduces the exact 4x4 channel to an affine
map on ``(p, c)`` once per parameter set, then iterates it.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConsistencyError, ContractViolation
from .linalg import STRUCTURAL_TOL, _ptrace, exp_2x2_hermitian, kron, partial_trace_ancilla
from .model import POSITIVITY_TOL, QubitState, RIParams, thermal_ancilla, total_hamiltonian
from .thermo import EnergyOperators

# index pairs of the two invariant subspaces in |dd>, |du>, |ud>, |uu> order
CENTER_BLOCK = (1, 2)
OUTER_BLOCK = (0, 3)


@dataclass(frozen=True)
class CollisionUnitary:
    u: np.ndarray
    params_fingerprint: str

    def matches(self, params: RIParams) -> bool:
        return self.params_fingerprint == params.fingerprint()


def collision_unitary(params: RIParams) -> CollisionUnitary:
    """``exp(-i H_tot tau)`` from the exponentials of its two 2x2 blocks."""
    h = total_hamiltonian(params)
    u = np.zeros((4, 4), dtype=complex)
    for block in (CENTER_BLOCK, OUTER_BLOCK):
        ix = np.ix_(block, block)
        u[ix] = exp_2x2_hermitian(h[ix], params.tau)
    u.setflags(write=False)
    return CollisionUnitary(u=u, params_fingerprint=params.fingerprint())


def _channel(rho_s: np.ndarray, u: np.ndarray, rho_a: np.ndarray) -> np.ndarray:
    return _ptrace(u @ kron(rho_s, rho_a) @ u.conj().T)


def ri_step(state: QubitState, u: CollisionUnitary, ancilla: QubitState) -> QubitState:
    """One collision with a fresh ancilla, via the full 4x4 product."""
    if not ancilla.is_diagonal():
        raise ContractViolation("ancilla must be diagonal (no coherences)")
    rho = u.u @ kron(state.matrix(), ancilla.matrix()) @ u.u.conj().T
    reduced = partial_trace_ancilla(rho)
    p = reduced[0, 0].real
    c = complex(reduced[0, 1])
    if p < -POSITIVITY_TOL or p > 1 + POSITIVITY_TOL or abs(c) ** 2 > p * (1 - p) + POSITIVITY_TOL:
        raise ConsistencyError(f"collision produced a non-positive state p={p}, c={c}")
    return QubitState(p=p, c=c)


@dataclass(frozen=True)
class StepMap:
    """The collision channel restricted to qubit states.

    ``p' = rate * p + offset`` and ``c' = alpha * c + gamma * conj(c)``. The
    cross terms between populations and coherences are computed too, so
    that the decoupling is checked rather than assumed.
    """

    rate: float
    offset: float
    alpha: complex
    gamma: complex

    @classmethod
    def from_unitary(cls, u: CollisionUnitary, ancilla: QubitState) -> "StepMap":
        U = u.u
        rho_a = ancilla.matrix()
        ground = _channel(np.diag([1.0, 0.0]).astype(complex), U, rho_a)
        excited = _channel(np.diag([0.0, 1.0]).astype(complex), U, rho_a)
        up = _channel(np.array([[0, 1], [0, 0]], dtype=complex), U, rho_a)  # response to |d><u|
        down = _channel(np.array([[0, 0], [1, 0]], dtype=complex), U, rho_a)
        leak = max(abs(ground[0, 1]), abs(excited[0, 1]), abs(up[0, 0]), abs(down[0, 0]))
        if leak > STRUCTURAL_TOL:
            raise ConsistencyError(f"population and coherence channels mix ({leak:.2e})")
        # rho_01' = alpha * c + gamma * c*  with  c = rho_01, c* = rho_10
        return cls(
            rate=float(ground[0, 0].real - excited[0, 0].real),
            offset=float(excited[0, 0].real),
            alpha=complex(up[0, 1]),
            gamma=complex(down[0, 1]),
        )

    def apply(self, p: float, c: complex) -> tuple[float, complex]:
        return self.rate * p + self.offset, self.alpha * c + self.gamma * c.conjugate()


@dataclass
class TrajectoryRecord:
    """States visited by one run.

    ``n`` lists the recorded collision counts. Ledger arrays (``w``, ``q``,
    ``de``, ``residual``) hold the collision that *produced* the state at the
    same row; row ``n = 0`` carries NaN. ``work_invested`` is the running
    ``-sum W_I`` over every collision, not just the recorded ones.
    """

    params: RIParams
    n_steps: int
    n: np.ndarray
    p: np.ndarray
    c: np.ndarray
    w: np.ndarray | None = None
    q: np.ndarray | None = None
    de: np.ndarray | None = None
    residual: np.ndarray | None = None
    work_invested: np.ndarray | None = None
    couplings: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    @property
    def has_ledger(self) -> bool:
        return self.w is not None

    def state(self, row: int) -> QubitState:
        return QubitState(float(self.p[row]), complex(self.c[row]))

    @property
    def states(self) -> list[QubitState]:
        return [self.state(i) for i in range(len(self.n))]

    @property
    def final(self) -> QubitState:
        return self.state(-1)

    def csv_header(self) -> list[str]:
        header = ["n", "p", "c_re", "c_im"]
        if self.has_ledger:
            header += ["w", "q", "de", "first_law_residual"]
        if self.couplings is not None:
            header += ["j_xx", "j_yy", "j_zz"]
        return header

    def csv_rows(self):
        """Formatted rows; coupling columns hold the draw that produced the row's state."""
        for i in range(len(self.n)):
            row = [str(int(self.n[i])), _fmt(self.p[i]), _fmt(self.c[i].real), _fmt(self.c[i].imag)]
            if self.has_ledger:
                row += [_fmt(x) for x in (self.w[i], self.q[i], self.de[i], self.residual[i])]
            if self.couplings is not None:
                row += ["", "", ""] if i == 0 else [_fmt(x) for x in self.couplings[int(self.n[i]) - 1]]
            yield row

    def to_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.csv_header())
            writer.writerows(self.csv_rows())


def _fmt(x) -> str:
    x = float(x)
    return "" if np.isnan(x) else f"{x:.17g}"


class _NanLedger:
    w = q = de_s = residual = float("nan")


_NAN_LEDGER = _NanLedger()


class _Recorder:
    def __init__(self, n_steps: int, stride: int, with_ledger: bool):
        rows = [0] + list(range(stride, n_steps + 1, stride))
        if rows[-1] != n_steps:
            rows.append(n_steps)
        self.rows = np.array(rows, dtype=np.int64)
        size = len(rows)
        self.p = np.empty(size)
        self.c = np.empty(size, dtype=complex)
        self.ledger = np.full((size, 4), np.nan) if with_ledger else None
        self.work = np.zeros(size) if with_ledger else None
        self.next_row = 0

    def record(self, p, c, ledger=None, work=None):
        i = self.next_row
        self.p[i] = p
        self.c[i] = c
        if ledger is not None:
            self.ledger[i] = (ledger.w, ledger.q, ledger.de_s, ledger.residual)
            self.work[i] = work
        self.next_row += 1

    def finish(self, params, n_steps, **extra) -> TrajectoryRecord:
        ledger = self.ledger
        return TrajectoryRecord(
            params=params,
            n_steps=n_steps,
            n=self.rows,
            p=self.p,
            c=self.c,
            w=None if ledger is None else ledger[:, 0],
            q=None if ledger is None else ledger[:, 1],
            de=None if ledger is None else ledger[:, 2],
            residual=None if ledger is None else ledger[:, 3],
            work_invested=self.work,
            **extra,
        )


def run_trajectory(
    state0: QubitState,
    params: RIParams,
    n_steps: int,
    with_ledger: bool = False,
    stride: int = 1,
) -> TrajectoryRecord:
    """Iterate the collision map ``n_steps`` times with a fresh thermal ancilla each time.

    Args:
        state0: Initial system state (recorded as ``n = 0``).
        params: Model parameters; the unitary is built once and reused.
        n_steps: Number of collisions.
        with_ledger: Also record the trace-definition energetics per collision.
        stride: Record every ``stride``-th state (plus the first and last).
    """
    if n_steps < 0:
        raise ContractViolation("n_steps must be non-negative")
    if stride < 1:
        raise ContractViolation("stride must be >= 1")
    u = collision_unitary(params)
    ancilla = thermal_ancilla(params.beta, params.omega_a)
    step = StepMap.from_unitary(u, ancilla)
    energy = EnergyOperators(params, u) if with_ledger else None

    rec = _Recorder(n_steps, stride, with_ledger)
    p, c = state0.p, complex(state0.c)
    if with_ledger:
        rec.record(p, c, _NAN_LEDGER, 0.0)
    else:
        rec.record(p, c)
    rate, offset, alpha, gamma = step.rate, step.offset, step.alpha, step.gamma
    work = 0.0
    n = 0
    for target in rec.rows[1:]:
        target = int(target)
        ledger = None
        if energy is None:
            for _ in range(target - n):
                p, c = rate * p + offset, alpha * c + gamma * c.conjugate()
        else:
            for _ in range(target - n):
                ledger = energy.ledger(p, c)
                work -= ledger.w
                p, c = rate * p + offset, alpha * c + gamma * c.conjugate()
        n = target
        _check_positive(p, c, n)
        rec.record(p, c, ledger, work)
    return rec.finish(params, n_steps)


def _check_positive(p: float, c: complex, n: int) -> None:
    if p < -POSITIVITY_TOL or p > 1 + POSITIVITY_TOL or abs(c) ** 2 > p * (1 - p) + POSITIVITY_TOL:
        raise ConsistencyError(f"state left the Bloch ball at step {n}: p={p}, c={c}")
