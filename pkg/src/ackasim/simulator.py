"""Dense statevector and density-matrix primitives for small qubit registers.

Conventions used throughout the package:

* Qubit indices follow party order, and qubit 0 is the most significant bit
  of a computational-basis index: |b0 b1 .. b_{n-1}> lives at index
  sum(b_q << (n - 1 - q)).
* A measured bit b corresponds to eigenvalue (-1)**b, so 0 is the +1 outcome.
* The Y basis is oriented so that bit 0 means the +1 eigenstate
  (|0> + i|1>)/sqrt(2).
* States are values: no operation mutates its input.  Measuring removes the
  measured qubit from the register and compacts the remaining indices, so a
  qubit can never be measured twice.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence, Union

import numpy as np

NORM_TOL = 1e-9
MAX_PURE_QUBITS = 12
MAX_MIXED_QUBITS = 10
FORCED_BRANCH_MIN_PROB = 1e-12


class ImpossibleBranchError(ValueError):
    """Raised when a forced measurement branch has (numerically) zero weight."""


class PauliBasis(Enum):
    X = "X"
    Y = "Y"
    Z = "Z"


_SQ = 1.0 / np.sqrt(2.0)
_HADAMARD = np.array([[_SQ, _SQ], [_SQ, -_SQ]], dtype=complex)
_S_DAGGER = np.array([[1.0, 0.0], [0.0, -1.0j]], dtype=complex)

# Rotations mapping each measurement basis onto the computational one,
# with bit 0 <-> the +1 eigenstate.
_TO_COMPUTATIONAL = {
    PauliBasis.X: _HADAMARD,
    PauliBasis.Y: _HADAMARD @ _S_DAGGER,
    PauliBasis.Z: None,
}

PAULI_MATRICES = {
    PauliBasis.X: np.array([[0, 1], [1, 0]], dtype=complex),
    PauliBasis.Y: np.array([[0, -1j], [1j, 0]], dtype=complex),
    PauliBasis.Z: np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class MeasurementResult:
    bit: int
    eigenvalue: int

    def __post_init__(self) -> None:
        if self.bit not in (0, 1):
            raise ValueError(f"bit must be 0 or 1, got {self.bit}")
        if self.eigenvalue != 1 - 2 * self.bit:
            raise ValueError("eigenvalue must equal (-1)**bit")

    @classmethod
    def from_bit(cls, bit: int) -> "MeasurementResult":
        return cls(bit=bit, eigenvalue=1 - 2 * bit)


class PureState:
    """Normalized register of ``num_qubits`` qubits as a dense amplitude vector.

    ``num_qubits == 0`` is allowed only as the residue of measuring the last
    qubit of a register; its single amplitude carries the accumulated phase.
    """

    __slots__ = ("num_qubits", "amplitudes")

    def __init__(self, num_qubits: int, amplitudes) -> None:
        if not 0 <= num_qubits <= MAX_PURE_QUBITS:
            raise ValueError(
                f"num_qubits must be in 0..{MAX_PURE_QUBITS}, got {num_qubits}"
            )
        amps = np.asarray(amplitudes, dtype=complex)
        if amps.shape != (1 << num_qubits,):
            raise ValueError(
                f"expected {1 << num_qubits} amplitudes, got shape {amps.shape}"
            )
        norm_sq = float(np.vdot(amps, amps).real)
        if abs(norm_sq - 1.0) > NORM_TOL:
            raise ValueError(f"squared norm deviates from 1 by {abs(norm_sq - 1.0):.3e}")
        amps = amps.copy() if amps.flags.writeable else amps
        amps.setflags(write=False)
        self.num_qubits = num_qubits
        self.amplitudes = amps

    def __repr__(self) -> str:
        return f"PureState(num_qubits={self.num_qubits})"


class MixedState:
    """Density operator on ``num_qubits`` qubits (Hermitian, trace one)."""

    __slots__ = ("num_qubits", "matrix")

    def __init__(self, num_qubits: int, matrix) -> None:
        if not 1 <= num_qubits <= MAX_MIXED_QUBITS:
            raise ValueError(
                f"num_qubits must be in 1..{MAX_MIXED_QUBITS}, got {num_qubits}"
            )
        dim = 1 << num_qubits
        mat = np.asarray(matrix, dtype=complex)
        if mat.shape != (dim, dim):
            raise ValueError(f"expected a {dim}x{dim} matrix, got shape {mat.shape}")
        if np.abs(mat - mat.conj().T).max() > NORM_TOL:
            raise ValueError("matrix is not Hermitian")
        trace = float(np.trace(mat).real)
        if abs(trace - 1.0) > NORM_TOL:
            raise ValueError(f"trace deviates from 1 by {abs(trace - 1.0):.3e}")
        mat.setflags(write=False)
        self.num_qubits = num_qubits
        self.matrix = mat

    def validate_positive(self, tol: float = NORM_TOL) -> None:
        """Check positive semidefiniteness; O(dim^3), so not run at construction."""
        lowest = float(np.linalg.eigvalsh(self.matrix)[0])
        if lowest < -tol:
            raise ValueError(f"negative eigenvalue {lowest:.3e}")

    def __repr__(self) -> str:
        return f"MixedState(num_qubits={self.num_qubits})"


State = Union[PureState, MixedState]


def _as_first_axis(vec: np.ndarray, n: int, qubit: int) -> np.ndarray:
    """View of a 2**n vector as (2, 2**(n-1)) with ``qubit`` leading."""
    tensor = vec.reshape((2,) * n)
    return np.moveaxis(tensor, qubit, 0).reshape(2, -1)


def _from_first_axis(arr: np.ndarray, n: int, qubit: int) -> np.ndarray:
    tensor = arr.reshape((2,) * n)
    return np.moveaxis(tensor, 0, qubit).reshape(-1)


def prepare_ghz(n: int) -> PureState:
    """Equal superposition of the all-zero and all-one basis states."""
    if not 1 <= n <= MAX_PURE_QUBITS:
        raise ValueError(f"register size must be in 1..{MAX_PURE_QUBITS}, got {n}")
    amps = np.zeros(1 << n, dtype=complex)
    amps[0] = _SQ
    amps[-1] = _SQ
    return PureState(n, amps)


def measure_qubit(
    state: PureState,
    qubit: int,
    basis: PauliBasis,
    rng: np.random.Generator,
    force_bit: int | None = None,
) -> tuple[MeasurementResult, PureState]:
    """Projectively measure one qubit and drop it from the register.

    The outcome is sampled from the Born probabilities unless ``force_bit``
    selects a branch explicitly (used to enumerate outcome patterns), in
    which case a branch of probability below ``FORCED_BRANCH_MIN_PROB``
    raises :class:`ImpossibleBranchError`.

    Returns the measurement result and the normalized post-measurement state
    over the remaining ``num_qubits - 1`` qubits (indices above the measured
    qubit shift down by one).
    """
    n = state.num_qubits
    if n == 0:
        raise ValueError("cannot measure an empty register")
    if not 0 <= qubit < n:
        raise IndexError(f"qubit {qubit} out of range for a {n}-qubit register")
    arr = _as_first_axis(state.amplitudes, n, qubit)
    rot = _TO_COMPUTATIONAL[basis]
    if rot is not None:
        arr = rot @ arr
    probs = np.einsum("ij,ij->i", arr.conj(), arr).real
    if force_bit is None:
        bit = int(rng.random() < probs[1])
    else:
        bit = int(force_bit)
        if bit not in (0, 1):
            raise ValueError(f"force_bit must be 0 or 1, got {force_bit}")
        if probs[bit] < FORCED_BRANCH_MIN_PROB:
            raise ImpossibleBranchError(
                f"branch {bit} of qubit {qubit} has probability {probs[bit]:.3e}"
            )
    branch = arr[bit]
    branch = branch / np.linalg.norm(branch)
    return MeasurementResult.from_bit(bit), PureState(n - 1, branch)


def apply_pauli(state: PureState, qubit: int, pauli: PauliBasis) -> PureState:
    """Apply a single-qubit Pauli operator."""
    n = state.num_qubits
    if not 0 <= qubit < n:
        raise IndexError(f"qubit {qubit} out of range for a {n}-qubit register")
    arr = _as_first_axis(state.amplitudes, n, qubit)
    out = PAULI_MATRICES[pauli] @ arr
    return PureState(n, _from_first_axis(out, n, qubit))


def apply_pauli_z(state: PureState, qubit: int) -> PureState:
    """Negate amplitudes with bit 1 on ``qubit``; cancels a GHZ parity phase."""
    return apply_pauli(state, qubit, PauliBasis.Z)


def pauli_string(text: str) -> list[PauliBasis | None]:
    """Parse a string like ``"XXI"`` into a Pauli list (``I`` = identity)."""
    out: list[PauliBasis | None] = []
    for ch in text.replace(" ", ""):
        if ch == "I":
            out.append(None)
        elif ch in ("X", "Y", "Z"):
            out.append(PauliBasis(ch))
        else:
            raise ValueError(f"unknown Pauli letter {ch!r}")
    return out


def _apply_pauli_rows(mat: np.ndarray, n: int, qubit: int, m2: np.ndarray) -> np.ndarray:
    dim = mat.shape[0]
    tensor = mat.reshape((2,) * n + (dim,))
    tensor = np.moveaxis(tensor, qubit, 0).reshape(2, -1)
    tensor = m2 @ tensor
    tensor = tensor.reshape((2,) * n + (dim,))
    return np.moveaxis(tensor, 0, qubit).reshape(dim, dim)


def stabilizer_expectation(
    state: State, paulis: Sequence[PauliBasis | None]
) -> float:
    """Expectation of a tensor product of Pauli operators (None = identity)."""
    ops = list(paulis)
    if len(ops) != state.num_qubits:
        raise ValueError(
            f"expected {state.num_qubits} Pauli entries, got {len(ops)}"
        )
    if isinstance(state, PureState):
        vec = state.amplitudes
        n = state.num_qubits
        for q, p in enumerate(ops):
            if p is None:
                continue
            vec = _from_first_axis(
                PAULI_MATRICES[p] @ _as_first_axis(vec, n, q), n, q
            )
        value = float(np.vdot(state.amplitudes, vec).real)
    else:
        mat = state.matrix
        n = state.num_qubits
        for q, p in enumerate(ops):
            if p is None:
                continue
            mat = _apply_pauli_rows(mat, n, q, PAULI_MATRICES[p])
        value = float(np.trace(mat).real)
    return min(1.0, max(-1.0, value))


def depolarize_global(state: PureState, p_mix: float) -> MixedState:
    """Mix the projector onto ``state`` with the maximally mixed state.

    ``p_mix`` is the weight of the pure state: 1 leaves it untouched, 0 gives
    the maximally mixed state.
    """
    if not 0.0 <= p_mix <= 1.0:
        raise ValueError(f"p_mix must be in [0, 1], got {p_mix}")
    n = state.num_qubits
    if not 1 <= n <= MAX_MIXED_QUBITS:
        raise ValueError(f"density operators support 1..{MAX_MIXED_QUBITS} qubits")
    dim = 1 << n
    proj = np.outer(state.amplitudes, state.amplitudes.conj())
    mat = p_mix * proj + (1.0 - p_mix) / dim * np.eye(dim)
    return MixedState(n, mat)


def fidelity(state: MixedState, reference: PureState) -> float:
    """<psi| rho |psi> for a mixed state against a pure reference."""
    if state.num_qubits != reference.num_qubits:
        raise ValueError(
            f"qubit count mismatch: {state.num_qubits} vs {reference.num_qubits}"
        )
    value = np.vdot(reference.amplitudes, state.matrix @ reference.amplitudes).real
    return float(value)


def pure_fidelity(a: PureState, b: PureState) -> float:
    """|<a|b>|**2; insensitive to global phase."""
    if a.num_qubits != b.num_qubits:
        raise ValueError(f"qubit count mismatch: {a.num_qubits} vs {b.num_qubits}")
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)


_PAULI_PICKS = (None, PauliBasis.X, PauliBasis.Y, PauliBasis.Z)


def sample_noisy_state(
    reference: PureState, p_mix: float, rng: np.random.Generator
) -> PureState:
    """Stochastic unraveling of :func:`depolarize_global`.

    With probability ``p_mix`` the reference is returned unchanged; otherwise
    a uniformly random Pauli string (identity included) is applied, which
    averages to the maximally mixed state.  Monte-Carlo means of any
    observable over these samples converge to the mixed-state value.
    """
    if not 0.0 <= p_mix <= 1.0:
        raise ValueError(f"p_mix must be in [0, 1], got {p_mix}")
    if rng.random() < p_mix:
        return reference
    n = reference.num_qubits
    vec = reference.amplitudes
    picks = rng.integers(0, 4, size=n)
    for q in range(n):
        p = _PAULI_PICKS[int(picks[q])]
        if p is None:
            continue
        vec = _from_first_axis(PAULI_MATRICES[p] @ _as_first_axis(vec, n, q), n, q)
    if vec is reference.amplitudes:
        return reference
    return PureState(n, vec)
