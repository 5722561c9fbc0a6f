"""Polyqubit encoding of p qubits in the 2**p levels of one atom.

Atomic level ``m`` written as a p-digit binary number gives the qubit values,
most-significant digit first. The qubits are labelled, from the most
significant digit down, ``("H", "V")`` for p = 2, ``("D", "H", "V")`` for
p = 3 and ``("W", "D", "H", "V")`` for p = 4. Each qubit owns one direction of
the p-dimensional hypercube whose vertices are the atomic levels.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import DomainError
from .linop import PAULI, StateVector

MAX_P = 4
_LABELS = ("W", "D", "H", "V")


class PauliAxis(str, Enum):
    X = "X"
    Y = "Y"
    Z = "Z"


def _axis(axis) -> str:
    try:
        return PauliAxis(axis).value
    except ValueError:
        raise DomainError(f"unknown Pauli axis {axis!r}") from None


def qubit_labels(p: int) -> tuple[str, ...]:
    if not 1 <= p <= MAX_P:
        raise DomainError(f"p must be in 1..{MAX_P}, got {p}")
    return _LABELS[MAX_P - p:]


def hypercube_edges(p: int) -> dict[str, list[tuple[int, int]]]:
    """Edges of the p-cube grouped by the qubit whose digit they flip.

    Each pair ``(m, n)`` has ``m < n`` and the two indices differ only in the
    label's binary digit.
    """
    labels = qubit_labels(p)
    edges = {}
    for k, label in enumerate(labels):
        bit = 1 << (p - 1 - k)
        edges[label] = [(m, m | bit) for m in range(2**p) if not m & bit]
    return edges


@dataclass(frozen=True)
class PolyEncoding:
    p: int
    level_count: int = field(init=False)
    qubit_labels: tuple[str, ...] = field(init=False)
    edge_set: dict[str, list[tuple[int, int]]] = field(init=False, compare=False)

    def __post_init__(self):
        labels = qubit_labels(self.p)
        object.__setattr__(self, "level_count", 2**self.p)
        object.__setattr__(self, "qubit_labels", labels)
        object.__setattr__(self, "edge_set", hypercube_edges(self.p))

    def slot(self, label: str) -> int:
        """Tensor slot (0 = most significant) of a qubit label."""
        try:
            return self.qubit_labels.index(label)
        except ValueError:
            raise DomainError(f"label {label!r} not in {self.qubit_labels}") from None

    def bits(self, level: int) -> tuple[int, ...]:
        return tuple(int(b) for b in format(level, f"0{self.p}b"))

    def level(self, bits: Sequence[int]) -> int:
        if len(bits) != self.p:
            raise DomainError(f"expected {self.p} qubit values, got {len(bits)}")
        if any(b not in (0, 1) for b in bits):
            raise DomainError(f"qubit values must be 0 or 1, got {list(bits)}")
        return int("".join(str(int(b)) for b in bits), 2)

    def table(self) -> list[tuple[int, dict[str, int]]]:
        """Level index against qubit values, one row per atomic level."""
        return [
            (m, dict(zip(self.qubit_labels, self.bits(m))))
            for m in range(self.level_count)
        ]


def transfer_operator(enc: PolyEncoding, m: int, n: int) -> np.ndarray:
    """The 2 x 2**p map |up><m| + |down><n|."""
    _check_pair(enc, m, n)
    t = np.zeros((2, enc.level_count), dtype=complex)
    t[0, m] = 1.0
    t[1, n] = 1.0
    return t


def _check_pair(enc: PolyEncoding, m: int, n: int) -> None:
    d = enc.level_count
    if not (0 <= m < d and 0 <= n < d):
        raise DomainError(f"levels ({m}, {n}) out of range for {d} levels")
    if m == n:
        raise DomainError(f"atomic Pauli needs two distinct levels, got ({m}, {n})")


def atomic_pauli(enc: PolyEncoding, axis, m: int, n: int) -> np.ndarray:
    """Pauli ``axis`` acting on span{|m>, |n>} and zero on every other level."""
    t = transfer_operator(enc, m, n)
    return t.conj().T @ PAULI[_axis(axis)] @ t


def atomic_raising(enc: PolyEncoding, m: int, n: int) -> np.ndarray:
    """T† sigma+ T = |m><n|."""
    t = transfer_operator(enc, m, n)
    sigma_plus = np.array([[0, 1], [0, 0]], dtype=complex)
    return t.conj().T @ sigma_plus @ t


def qubit_pauli(enc: PolyEncoding, axis, label: str) -> np.ndarray:
    """Qubit Pauli as the sum of atomic Paulis over the label's edges."""
    if label not in enc.qubit_labels:
        raise DomainError(f"label {label!r} not in {enc.qubit_labels}")
    axis = _axis(axis)
    return sum(atomic_pauli(enc, axis, m, n) for m, n in enc.edge_set[label])


def embed_qubit_operator(enc: PolyEncoding, op: np.ndarray, label: str) -> np.ndarray:
    """Place a 2x2 ``op`` at the label's tensor slot with identities elsewhere."""
    slot = enc.slot(label)
    left = np.eye(2**slot)
    right = np.eye(2 ** (enc.p - 1 - slot))
    return np.kron(np.kron(left, op), right)


def encode_state(enc: PolyEncoding, qubit_values: Sequence[int]) -> StateVector:
    """Atomic basis ket whose index concatenates ``qubit_values``."""
    ket = np.zeros(enc.level_count, dtype=complex)
    ket[enc.level(qubit_values)] = 1.0
    return StateVector(ket, (2,) * enc.p)


def product_state(enc: PolyEncoding, qubit_states: dict[str, np.ndarray]) -> StateVector:
    """Atomic ket for a product of single-qubit states keyed by label."""
    missing = set(enc.qubit_labels) - set(qubit_states)
    if missing:
        raise DomainError(f"missing qubit states for {sorted(missing)}")
    ket = np.ones(1, dtype=complex)
    for label in enc.qubit_labels:
        ket = np.kron(ket, np.asarray(qubit_states[label], dtype=complex))
    return StateVector(ket, (2,) * enc.p)
