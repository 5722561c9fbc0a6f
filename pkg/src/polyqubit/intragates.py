"""Intra-atomic gates built from atomic Pauli rotations.

A :class:`GatePulseProgram` is a time-ordered list of :class:`PulseGroup`
objects. Pulses inside one group are driven simultaneously, so a group
contributes the single factor ``exp(-i * angle * sum(weight * s_mn))``.
Programs carry their intended target unitary and an explicit global phase.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .constants import TOLERANCES
from .errors import DomainError, StructureError
from .linop import expm, haar_qubit, reduced_states, trace_distance, unitarity_error
from .polyenc import PolyEncoding, atomic_pauli, embed_qubit_operator

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


@dataclass(frozen=True)
class AtomicTerm:
    m: int
    n: int
    axis: str
    weight: float = 1.0


@dataclass(frozen=True)
class PulseGroup:
    terms: tuple[AtomicTerm, ...]
    angle: float

    def generator(self, enc: PolyEncoding) -> np.ndarray:
        gen = np.zeros((enc.level_count,) * 2, dtype=complex)
        for term in self.terms:
            gen += term.weight * atomic_pauli(enc, term.axis, term.m, term.n)
        return gen

    def unitary(self, enc: PolyEncoding) -> np.ndarray:
        return expm(self.generator(enc), self.angle)


@dataclass
class GatePulseProgram:
    enc: PolyEncoding
    steps: list[PulseGroup]
    target: np.ndarray
    global_phase: complex = 1.0
    name: str = ""

    def unitary(self) -> np.ndarray:
        u = np.eye(self.enc.level_count, dtype=complex)
        for group in self.steps:
            u = group.unitary(self.enc) @ u
        return self.global_phase * u

    def then(self, other: "GatePulseProgram", name: str = "") -> "GatePulseProgram":
        """Run ``self`` first, then ``other``."""
        if other.enc != self.enc:
            raise StructureError("cannot compose programs on different encodings")
        return GatePulseProgram(
            self.enc,
            list(self.steps) + list(other.steps),
            other.target @ self.target,
            self.global_phase * other.global_phase,
            name or f"{other.name}*{self.name}",
        )

    def to_dict(self) -> dict:
        pulses = [
            {
                "transition": [t.m, t.n],
                "axis": t.axis,
                "angle": float(g.angle * t.weight),
                "group": i,
            }
            for i, g in enumerate(self.steps)
            for t in g.terms
        ]
        return {
            "name": self.name,
            "p": self.enc.p,
            "global_phase": [float(np.real(self.global_phase)), float(np.imag(self.global_phase))],
            "pulses": pulses,
            "target": {
                "real": np.real(self.target).tolist(),
                "imag": np.imag(self.target).tolist(),
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GatePulseProgram":
        enc = PolyEncoding(int(data["p"]))
        groups: dict[int, list[AtomicTerm]] = {}
        for pulse in data["pulses"]:
            m, n = pulse["transition"]
            groups.setdefault(int(pulse["group"]), []).append(
                AtomicTerm(int(m), int(n), str(pulse["axis"]), float(pulse["angle"]))
            )
        steps = [PulseGroup(tuple(groups[k]), 1.0) for k in sorted(groups)]
        target = np.asarray(data["target"]["real"]) + 1j * np.asarray(data["target"]["imag"])
        re, im = data["global_phase"]
        return cls(enc, steps, target, complex(re, im), data.get("name", ""))


@dataclass(frozen=True)
class VerificationReport:
    name: str
    max_error: float
    unitarity_error: float
    passed: bool = field(default=False)


def verify_program(
    prog: GatePulseProgram, phase_sensitive: bool = True, atol: float = TOLERANCES["gate_match"]
) -> VerificationReport:
    u = prog.unitary()
    target = np.asarray(prog.target)
    if not phase_sensitive:
        overlap = np.trace(target.conj().T @ u)
        if abs(overlap) > 0:
            u = u * np.conj(overlap) / abs(overlap)
    err = float(np.max(np.abs(u - target), initial=0.0))
    unit = unitarity_error(u)
    return VerificationReport(prog.name, err, unit, err < atol and unit < atol)


def _permutation_matrix(perm: Sequence[int]) -> np.ndarray:
    d = len(perm)
    mat = np.zeros((d, d), dtype=complex)
    mat[list(perm), list(range(d))] = 1.0
    return mat


def controlled_x_matrix(enc: PolyEncoding, controls: Iterable[str], target: str) -> np.ndarray:
    """Textbook multi-controlled NOT built by bit manipulation."""
    ctrl_slots = [enc.slot(c) for c in controls]
    tslot = enc.slot(target)
    perm = []
    for m in range(enc.level_count):
        bits = list(enc.bits(m))
        if all(bits[s] for s in ctrl_slots):
            bits[tslot] ^= 1
        perm.append(enc.level(bits))
    return _permutation_matrix(perm)


def swap_matrix(enc: PolyEncoding, a: str, b: str) -> np.ndarray:
    sa, sb = enc.slot(a), enc.slot(b)
    perm = []
    for m in range(enc.level_count):
        bits = list(enc.bits(m))
        bits[sa], bits[sb] = bits[sb], bits[sa]
        perm.append(enc.level(bits))
    return _permutation_matrix(perm)


def deutsch_matrix(p: int, theta: float) -> np.ndarray:
    """Identity on all but the last two levels, which carry the Deutsch block."""
    d = 2**p
    mat = np.eye(d, dtype=complex)
    mat[d - 2:, d - 2:] = [
        [1j * np.cos(theta), np.sin(theta)],
        [np.sin(theta), 1j * np.cos(theta)],
    ]
    return mat


def _label_terms(enc: PolyEncoding, label: str, axis: str, weight: float = 1.0):
    return tuple(AtomicTerm(m, n, axis, weight) for m, n in enc.edge_set[label])


def identity_program(enc: PolyEncoding) -> GatePulseProgram:
    return GatePulseProgram(enc, [], np.eye(enc.level_count, dtype=complex), 1.0, "I")


def rotation_program(enc: PolyEncoding, label: str, axis: str, angle: float) -> GatePulseProgram:
    """exp(-i angle/2 sigma_label^axis), all edges of the label driven at once."""
    from .linop import PAULI

    group = PulseGroup(_label_terms(enc, label, axis), angle / 2)
    local = expm(PAULI[axis], angle / 2)
    return GatePulseProgram(
        enc, [group], embed_qubit_operator(enc, local, label), 1.0, f"R{axis}({label})"
    )


def hadamard_program(enc: PolyEncoding, label: str) -> GatePulseProgram:
    w = 1 / np.sqrt(2)
    terms = _label_terms(enc, label, "X", w) + _label_terms(enc, label, "Z", w)
    return GatePulseProgram(
        enc,
        [PulseGroup(terms, np.pi / 2)],
        embed_qubit_operator(enc, HADAMARD, label),
        1j,
        f"H({label})",
    )


def cnot_program(enc: PolyEncoding, control: str, target: str) -> GatePulseProgram:
    """Pi pulses on the target edges with control = 1, then an S phase on the control.

    For p = 2 with control H and target V this is
    exp(i pi/4) exp(-i pi/4 sigma_H^Z) exp(-i pi/2 s^X_23).
    """
    if enc.p < 2:
        raise DomainError("CNOT needs at least two qubits per atom")
    if control == target:
        raise DomainError("control and target must differ")
    cslot = enc.slot(control)
    enc.slot(target)
    flips = tuple(
        AtomicTerm(m, n, "X")
        for m, n in enc.edge_set[target]
        if enc.bits(m)[cslot] == 1
    )
    steps = [
        PulseGroup(flips, np.pi / 2),
        PulseGroup(_label_terms(enc, control, "Z"), np.pi / 4),
    ]
    return GatePulseProgram(
        enc,
        steps,
        controlled_x_matrix(enc, [control], target),
        np.exp(1j * np.pi / 4),
        f"CNOT({control}->{target})",
    )


def cz_program(enc: PolyEncoding, control: str, target: str) -> GatePulseProgram:
    h = hadamard_program(enc, target)
    prog = h.then(cnot_program(enc, control, target)).then(h)
    prog.name = f"CZ({control},{target})"
    return prog


def swap_program(enc: PolyEncoding, a: str, b: str) -> GatePulseProgram:
    ab = cnot_program(enc, a, b)
    prog = ab.then(cnot_program(enc, b, a)).then(ab)
    prog.target = swap_matrix(enc, a, b)
    prog.name = f"SWAP({a},{b})"
    return prog


def deutsch3_program(theta: float) -> GatePulseProgram:
    """D_3(theta) as a theta pulse on |6>-|7> followed by the U_67 phase group."""
    enc = PolyEncoding(3)
    phase_terms = (
        AtomicTerm(5, 7, "Z", 2.0),
        AtomicTerm(4, 6, "Z", 2.0),
        AtomicTerm(1, 5, "Z"),
        AtomicTerm(3, 7, "Z"),
        AtomicTerm(0, 4, "Z"),
        AtomicTerm(2, 6, "Z"),
    )
    steps = [
        PulseGroup((AtomicTerm(6, 7, "X"),), theta),
        PulseGroup(phase_terms, np.pi / 8),
    ]
    return GatePulseProgram(
        enc, steps, deutsch_matrix(3, theta), np.exp(1j * np.pi / 8), f"D3({theta:.6g})"
    )


def deutsch_p_program(p: int, theta: float) -> GatePulseProgram:
    """General D_p(theta) with phase pairs (l, 2**p - 2 + l % 2), l < 2**p - 2."""
    if not 2 <= p <= 4:
        raise DomainError(f"Deutsch gate needs 2 <= p <= 4, got {p}")
    enc = PolyEncoding(p)
    d = 2**p
    phase_terms = tuple(AtomicTerm(l, d - 2 + l % 2, "Z") for l in range(d - 2))
    steps = [
        PulseGroup((AtomicTerm(d - 2, d - 1, "X"),), theta),
        PulseGroup(phase_terms, np.pi / d),
    ]
    return GatePulseProgram(
        enc, steps, deutsch_matrix(p, theta), np.exp(1j * np.pi / d), f"D{p}({theta:.6g})"
    )


def toffoli_program(p: int = 3) -> GatePulseProgram:
    """p-qubit Toffoli (all but the last qubit control the last) as D_p(pi/2)."""
    prog = deutsch_p_program(p, np.pi / 2) if p != 3 else deutsch3_program(np.pi / 2)
    enc = prog.enc
    prog.target = controlled_x_matrix(enc, enc.qubit_labels[:-1], enc.qubit_labels[-1])
    prog.name = f"Toffoli{p}"
    return prog


def cswap_program() -> GatePulseProgram:
    """Fredkin gate at p = 3: D controls a swap of H and V."""
    enc = PolyEncoding(3)
    outer = cnot_program(enc, "V", "H")
    prog = outer.then(toffoli_program(3)).then(outer)
    perm = []
    for m in range(8):
        d, h, v = enc.bits(m)
        perm.append(enc.level((d, v, h) if d else (d, h, v)))
    prog.target = _permutation_matrix(perm)
    prog.name = "CSWAP(D;H,V)"
    return prog


def standard_programs(p: int) -> list[GatePulseProgram]:
    """Every gate constructor that applies at this p."""
    enc = PolyEncoding(p)
    labels = enc.qubit_labels
    progs = []
    for c in labels:
        for t in labels:
            if c != t:
                progs.append(cnot_program(enc, c, t))
    if p == 3:
        progs.append(toffoli_program(3))
        progs.append(deutsch3_program(np.pi / 3))
        progs.append(cswap_program())
    if p >= 3:
        progs.append(cz_program(enc, labels[0], labels[-1]))
        progs.append(swap_program(enc, labels[-2], labels[-1]))
    progs.append(deutsch_p_program(p, np.pi / 2))
    progs.append(deutsch_p_program(p, 0.7))
    return progs


def spectator_deviation(
    unitary: np.ndarray,
    enc: PolyEncoding,
    spectators: Sequence[str],
    n_states: int = 200,
    seed: int = 0,
) -> float:
    """Largest trace distance between a spectator's reduced state before and
    after ``unitary``, over seeded random product states."""
    if not spectators:
        return 0.0
    rng = np.random.Generator(np.random.Philox(key=seed))
    kets = []
    for _ in range(n_states):
        ket = np.ones(1, dtype=complex)
        for _label in enc.qubit_labels:
            ket = np.kron(ket, haar_qubit(rng))
        kets.append(ket)
    before = np.array(kets).T
    after = unitary @ before
    dims = (2,) * enc.p
    worst = 0.0
    for label in spectators:
        keep = [enc.slot(label)]
        r0 = reduced_states(before, dims, keep)
        r1 = reduced_states(after, dims, keep)
        worst = max(worst, max(trace_distance(a, b) for a, b in zip(r0, r1)))
    return worst
