"""Exact density-matrix predictions for round statistics under white noise.

Deliberately independent of the sampling engine: states are reduced with
explicitly built projectors (kron products of X-eigenvector bras), so the
Monte-Carlo protocol path can be checked against closed linear algebra.
Costs are exponential in the party count, which is fine for the n <= 6
registers these checks run on.
"""

from __future__ import annotations

from functools import reduce
from itertools import product

import numpy as np

from .noise import calibrate_white_noise

_SQ = 1.0 / np.sqrt(2.0)
_X_BRAS = {
    0: np.array([[_SQ, _SQ]], dtype=complex),
    1: np.array([[_SQ, -_SQ]], dtype=complex),
}
_PAULI = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
}
_EYE2 = np.eye(2, dtype=complex)


def _ghz_vector(n: int) -> np.ndarray:
    vec = np.zeros(1 << n, dtype=complex)
    vec[0] = _SQ
    vec[-1] = _SQ
    return vec


def _werner(n: int, p_mix: float) -> np.ndarray:
    vec = _ghz_vector(n)
    dim = 1 << n
    return p_mix * np.outer(vec, vec.conj()) + (1.0 - p_mix) / dim * np.eye(dim)


def _roles(n: int, sender: int, participants) -> tuple[list[int], list[int]]:
    participants = sorted(participants)
    group = sorted([sender, *participants])
    measured = [q for q in range(n) if q not in group]
    return group, measured


def branch_reduced_states(
    n: int, sender: int, participants, fidelity: float
) -> list[tuple[float, int, np.ndarray]]:
    """(probability, parity, normalized reduced density matrix) per X pattern.

    Enumerates every X-outcome pattern of the non-participants on the white
    noise state of target ``fidelity`` and conditions the group's state on
    it.  Parities are the XOR of the pattern bits, i.e. what honest
    announcements hand the sender.
    """
    p_mix = calibrate_white_noise(fidelity, n)
    rho = _werner(n, p_mix)
    group, measured = _roles(n, sender, participants)
    branches = []
    for pattern in product((0, 1), repeat=len(measured)):
        bits = dict(zip(measured, pattern))
        factors = [
            _X_BRAS[bits[q]] if q in bits else _EYE2 for q in range(n)
        ]
        contract = reduce(np.kron, factors)
        sub = contract @ rho @ contract.conj().T
        weight = float(np.trace(sub).real)
        parity = 0
        for b in pattern:
            parity ^= b
        branches.append((weight, parity, sub / weight))
    return branches


def predicted_verification_pass_rate(
    n: int, sender: int, participants, fidelity: float
) -> float:
    """Exact pass probability of one honest verification round.

    Averages the signed stabilizer expectation over the uniform participant
    basis choices (the sender's basis is forced to make the Y count even)
    and over the non-participant outcome branches.
    """
    group, _ = _roles(n, sender, participants)
    sender_pos = group.index(sender)
    m = len(group) - 1
    total = 0.0
    for weight, parity, rho in branch_reduced_states(n, sender, participants, fidelity):
        acc = 0.0
        for picks in product("XY", repeat=m):
            y_count = picks.count("Y")
            sender_letter = "Y" if y_count % 2 else "X"
            k = y_count + (1 if sender_letter == "Y" else 0)
            letters = list(picks)
            letters.insert(sender_pos, sender_letter)
            operator = reduce(np.kron, (_PAULI[c] for c in letters))
            expectation = float(np.trace(rho @ operator).real)
            sign = -1.0 if ((k // 2) + parity) % 2 else 1.0
            acc += (1.0 + sign * expectation) / 2.0
        total += weight * acc / (1 << m)
    return total


def predicted_keygen_agreement(
    n: int, sender: int, participants, fidelity: float
) -> float:
    """Probability that all group members read the same Z bit."""
    total = 0.0
    for weight, _, rho in branch_reduced_states(n, sender, participants, fidelity):
        total += weight * float((rho[0, 0] + rho[-1, -1]).real)
    return total


def predicted_keygen_qber(
    n: int, sender: int, participants, fidelity: float
) -> float:
    """Probability that the sender and the first participant disagree in Z.

    White noise is permutation symmetric, so the value is the same for
    every participant.
    """
    group, _ = _roles(n, sender, participants)
    sender_pos = group.index(sender)
    partner_pos = next(i for i, p in enumerate(group) if p != sender)
    size = len(group)
    total = 0.0
    for weight, _, rho in branch_reduced_states(n, sender, participants, fidelity):
        mismatch = 0.0
        for idx in range(1 << size):
            bit_s = (idx >> (size - 1 - sender_pos)) & 1
            bit_p = (idx >> (size - 1 - partner_pos)) & 1
            if bit_s != bit_p:
                mismatch += float(rho[idx, idx].real)
        total += weight * mismatch
    return total
