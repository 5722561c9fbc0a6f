"""Inter-atomic XX and ZZ gate dynamics for two polyqubit ions on one mode.

The composite space is ``ion0 (x) ion1 (x) mode`` with ``2**p`` levels per
ion and ``fock_cutoff + 1`` phonon levels. Units have hbar = 1 and the
strongest tone sets the rate scale.

Every gate Hamiltonian here has the form

    H(t) = exp(i delta t) * sum_a K_a (x) a  +  h.c.

with one small coupling operator ``K_a`` per ion, which is what the
integrator exploits. :func:`hamiltonian_xx` and :func:`hamiltonian_zz` build
the same operator densely, term by term, and are used as the reference.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from .constants import TOLERANCES
from .errors import DomainError, IntegrationError, StructureError
from .linop import PAULI, expm, is_hermitian
from .polyenc import PolyEncoding, atomic_pauli, atomic_raising, qubit_pauli

TWO_PI = 2 * np.pi


class DriveKind(str, Enum):
    XX = "XX"
    ZZ = "ZZ"


@dataclass(frozen=True)
class DriveTone:
    """One laser interaction on one transition of one ion.

    ``strength`` is the sideband coupling g (Lamb-Dicke factor times Rabi or
    differential Stark amplitude). ``phase`` is the bichromatic phase for XX
    tones and the beatnote phase for ZZ tones; it is stored modulo 2 pi.
    """

    ion: int
    transition: tuple[int, int]
    strength: float
    phase: float = 0.0
    kind: DriveKind = DriveKind.XX

    def __post_init__(self):
        if self.ion not in (0, 1):
            raise DomainError(f"ion index must be 0 or 1, got {self.ion}")
        if self.strength < 0:
            raise DomainError(f"tone strength must be >= 0, got {self.strength}")
        m, n = self.transition
        if m == n:
            raise DomainError(f"transition needs two distinct levels, got {self.transition}")
        object.__setattr__(self, "transition", (int(m), int(n)))
        object.__setattr__(self, "phase", float(self.phase) % TWO_PI)
        object.__setattr__(self, "kind", DriveKind(self.kind))


@dataclass(frozen=True)
class BosonicMode:
    detuning: float
    fock_cutoff: int = 12

    def __post_init__(self):
        if self.fock_cutoff < 4:
            raise DomainError(f"fock_cutoff must be >= 4, got {self.fock_cutoff}")

    @property
    def levels(self) -> int:
        return self.fock_cutoff + 1


def annihilation(levels: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, levels)), k=1).astype(complex)


def closure_time(delta: float, loops: int = 1) -> float:
    """Time at which the phonon loop closes ``loops`` times."""
    if delta == 0:
        raise DomainError("detuning must be nonzero")
    return loops * TWO_PI / abs(delta)


def omega_rate(g1: float, g2: float, delta: float) -> float:
    """Two-qubit rate Omega = g1 g2 / delta.

    With this convention the participant populations from |00> go as
    sin^2(Omega t / 2) in the adiabatic limit, so Omega t / pi = 0.5 marks the
    maximally entangled point. It is twice the coefficient of the effective
    sigma sigma coupling.
    """
    if delta == 0:
        raise DomainError("detuning must be nonzero")
    return g1 * g2 / delta


def matched_tones(
    enc: PolyEncoding,
    kind,
    labels: Sequence[str],
    strengths: Sequence[float] = (1.0, 1.0),
    rabi_mismatch: float = 0.0,
    phase_mismatch: float = 0.0,
    mismatch_ions: Sequence[int] = (0, 1),
) -> list[DriveTone]:
    """One tone per edge of each ion's participant qubit.

    Mismatches act on the last edge of the participant label in every ion
    listed in ``mismatch_ions``: its strength is scaled by ``1 + rabi_mismatch``
    and ``phase_mismatch`` is added to its phase.
    """
    if len(labels) != 2 or len(strengths) != 2:
        raise DomainError("need one participant label and one strength per ion")
    tones = []
    for ion, (label, g) in enumerate(zip(labels, strengths)):
        if label not in enc.qubit_labels:
            raise DomainError(f"label {label!r} not in {enc.qubit_labels}")
        edges = enc.edge_set[label]
        for k, edge in enumerate(edges):
            hit = ion in mismatch_ions and k == len(edges) - 1
            tones.append(
                DriveTone(
                    ion,
                    edge,
                    g * (1 + rabi_mismatch) if hit else g,
                    phase_mismatch if hit else 0.0,
                    DriveKind(kind),
                )
            )
    return tones


def _validate_tones(tones: Sequence[DriveTone], enc: PolyEncoding, kind: DriveKind | None = None):
    if not tones:
        raise DomainError("at least one drive tone is required")
    kinds = {t.kind for t in tones}
    if len(kinds) != 1:
        raise DomainError("XX and ZZ tones cannot be mixed in one Hamiltonian")
    found = kinds.pop()
    if kind is not None and found != kind:
        raise DomainError(f"expected {kind.value} tones, got {found.value}")
    for ion in (0, 1):
        used: set[int] = set()
        for tone in tones:
            if tone.ion != ion:
                continue
            m, n = tone.transition
            if not (0 <= m < enc.level_count and 0 <= n < enc.level_count):
                raise DomainError(f"transition {tone.transition} out of range for p={enc.p}")
            if used & {m, n}:
                raise DomainError(
                    f"tones on ion {ion} overlap at levels {sorted(used & {m, n})}"
                )
            used |= {m, n}
    return found


def _embed_ion(op: np.ndarray, ion: int, d: int) -> np.ndarray:
    eye = np.eye(d)
    return np.kron(op, eye) if ion == 0 else np.kron(eye, op)


def hamiltonian_xx(tones, mode: BosonicMode, t: float, p: int = 2) -> np.ndarray:
    """Dense XX (Molmer-Sorensen) Hamiltonian at time t, term by term.

    Each tone adds (g/2) s+_mn (a e^{i delta t} + a† e^{-i delta t}) e^{i phi}
    plus its Hermitian conjugate.
    """
    enc = PolyEncoding(p)
    _validate_tones(tones, enc, DriveKind.XX)
    a = annihilation(mode.levels)
    force = a * np.exp(1j * mode.detuning * t) + a.conj().T * np.exp(-1j * mode.detuning * t)
    d = enc.level_count
    h = np.zeros((d * d * mode.levels,) * 2, dtype=complex)
    for tone in tones:
        raise_op = _embed_ion(atomic_raising(enc, *tone.transition), tone.ion, d)
        term = 0.5 * tone.strength * np.kron(raise_op, force) * np.exp(1j * tone.phase)
        h += term + term.conj().T
    return h


def hamiltonian_zz(tones, mode: BosonicMode, t: float, p: int = 2) -> np.ndarray:
    """Dense ZZ light-shift Hamiltonian at time t.

    Each tone adds (g/2) s^Z_mn (a e^{i(delta t + phi)} + a† e^{-i(delta t + phi)}).
    """
    enc = PolyEncoding(p)
    _validate_tones(tones, enc, DriveKind.ZZ)
    a = annihilation(mode.levels)
    d = enc.level_count
    h = np.zeros((d * d * mode.levels,) * 2, dtype=complex)
    for tone in tones:
        arg = mode.detuning * t + tone.phase
        force = a * np.exp(1j * arg) + a.conj().T * np.exp(-1j * arg)
        sz = _embed_ion(atomic_pauli(enc, "Z", *tone.transition), tone.ion, d)
        h += 0.5 * tone.strength * np.kron(sz, force)
    return h


class GateHamiltonian:
    """Factored form of a gate Hamiltonian for fast repeated application."""

    def __init__(self, tones: Sequence[DriveTone], mode: BosonicMode, p: int = 2):
        self.enc = PolyEncoding(p)
        self.kind = _validate_tones(tones, self.enc)
        self.tones = tuple(tones)
        self.mode = mode
        d = self.enc.level_count
        self.couplings = [np.zeros((d, d), dtype=complex) for _ in range(2)]
        for tone in tones:
            if self.kind is DriveKind.XX:
                up = atomic_raising(self.enc, *tone.transition) * np.exp(1j * tone.phase)
                op = up + up.conj().T
            else:
                op = atomic_pauli(self.enc, "Z", *tone.transition) * np.exp(1j * tone.phase)
            self.couplings[tone.ion] += 0.5 * tone.strength * op
        # sum of per-ion couplings on the two-ion space
        self._atomic = _embed_ion(self.couplings[0], 0, d) + _embed_ion(self.couplings[1], 1, d)
        self._atomic_dag = self._atomic.conj().T
        self._sqrt_n = np.sqrt(np.arange(1, mode.levels))

    @property
    def factor_dims(self) -> tuple[int, int, int]:
        d = self.enc.level_count
        return (d, d, self.mode.levels)

    @property
    def dim(self) -> int:
        d, _, m = self.factor_dims
        return d * d * m

    @property
    def g_ref(self) -> float:
        return max(t.strength for t in self.tones)

    def matrix(self, t: float) -> np.ndarray:
        a = annihilation(self.mode.levels)
        term = np.exp(1j * self.mode.detuning * t) * np.kron(self._atomic, a)
        return term + term.conj().T

    def apply(self, t: float, psi: np.ndarray) -> np.ndarray:
        """H(t) @ psi for psi of shape (dim,) or (dim, batch)."""
        shape = psi.shape
        d2 = self._atomic.shape[0]
        x = psi.reshape(d2, self.mode.levels, -1)
        batch = x.shape[2]
        phase = np.exp(1j * self.mode.detuning * t)
        lowered = (x[:, 1:] * self._sqrt_n[:, None]).reshape(d2, -1)
        raised = (x[:, :-1] * self._sqrt_n[:, None]).reshape(d2, -1)
        out = np.zeros_like(x)
        out[:, :-1] = ((phase * self._atomic) @ lowered).reshape(d2, -1, batch)
        out[:, 1:] += ((np.conj(phase) * self._atomic_dag) @ raised).reshape(d2, -1, batch)
        return out.reshape(shape)

    def norm_bound(self) -> float:
        """Upper bound on ||H(t)|| for every t."""
        k = sum(np.linalg.norm(c, 2) for c in self.couplings)
        return 2 * k * np.sqrt(self.mode.fock_cutoff)


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    factor_dims: tuple[int, ...]
    norm_error: np.ndarray

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    @property
    def max_norm_error(self) -> float:
        return float(np.max(self.norm_error))


def rk4_propagate(
    apply_h: Callable[[float, np.ndarray], np.ndarray],
    psi0: np.ndarray,
    duration: float,
    dt: float,
    sample_every: int | None = None,
    factor_dims: tuple[int, ...] = (),
    suggested_dt: float | None = None,
) -> Trajectory:
    """Integrate i dpsi/dt = H(t) psi with classical fixed-step RK4.

    The step is shrunk so that an integer number of steps spans ``duration``.
    Samples are taken every ``sample_every`` steps (``None`` keeps only the
    endpoints); the final time is always sampled.
    """
    if duration <= 0 or dt <= 0:
        raise DomainError("duration and dt must be positive")
    n_steps = max(1, int(np.ceil(duration / dt - 1e-9)))
    h = duration / n_steps
    stride = n_steps if sample_every is None else max(1, int(sample_every))
    psi = np.array(psi0, dtype=complex)
    norm0 = np.linalg.norm(psi, axis=0)
    abort = TOLERANCES["norm_drift_abort"]

    def rhs(t, y):
        return -1j * apply_h(t, y)

    def drift(y):
        return float(np.max(np.abs(np.linalg.norm(y, axis=0) - norm0)))

    times, states, errors = [0.0], [psi.copy()], [0.0]
    check = min(stride, 64)
    for step in range(1, n_steps + 1):
        t = (step - 1) * h
        k1 = rhs(t, psi)
        k2 = rhs(t + h / 2, psi + (h / 2) * k1)
        k3 = rhs(t + h / 2, psi + (h / 2) * k2)
        k4 = rhs(t + h, psi + h * k3)
        psi = psi + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        sampled = step % stride == 0 or step == n_steps
        if sampled or step % check == 0:
            err = drift(psi) if np.all(np.isfinite(psi)) else np.inf
            if err > abort:
                raise IntegrationError(
                    f"norm drift {err:.3e} exceeds {abort:.0e} at t={step * h:.6g}; "
                    f"reduce dt (try dt <= {suggested_dt or h / 2:.3g})",
                    norm_error=err,
                    suggested_dt=suggested_dt or h / 2,
                )
            if sampled:
                times.append(step * h)
                states.append(psi.copy())
                errors.append(err)
    return Trajectory(np.array(times), np.array(states), factor_dims, np.array(errors))


@dataclass
class SimConfig:
    tones: Sequence[DriveTone]
    mode: BosonicMode
    duration: float
    dt: float
    initial_state: np.ndarray
    p: int = 2
    rng_seed: int = 0
    sample_every: int | None = None

    def __post_init__(self):
        if self.duration <= 0:
            raise DomainError("duration must be positive")
        if self.dt <= 0:
            raise DomainError("dt must be positive")
        if self.dt > self.duration / 100 * (1 + 1e-12):
            raise DomainError(
                f"dt={self.dt:.4g} exceeds duration/100={self.duration / 100:.4g}"
            )
        psi = getattr(self.initial_state, "amplitudes", self.initial_state)
        self.initial_state = np.asarray(psi, dtype=complex)


def evolve(config: SimConfig) -> Trajectory:
    """Integrate the gate Hamiltonian of ``config`` from its initial state.

    ``initial_state`` may hold a batch of kets as columns; each is evolved
    independently under the same Hamiltonian.
    """
    ham = GateHamiltonian(config.tones, config.mode, config.p)
    psi0 = config.initial_state
    if psi0.shape[0] != ham.dim:
        raise StructureError(f"initial state has size {psi0.shape[0]}, expected {ham.dim}")
    norms = np.linalg.norm(psi0, axis=0)
    if np.max(np.abs(norms - 1)) > TOLERANCES["state_norm"] * 10:
        raise DomainError("initial state must be normalised")
    suggested = min(config.dt / 2, 1.0 / ham.norm_bound())
    return rk4_propagate(
        ham.apply,
        psi0,
        config.duration,
        config.dt,
        config.sample_every,
        ham.factor_dims,
        suggested,
    )


def ion_state(enc: PolyEncoding, qubit_states: dict[str, np.ndarray]) -> np.ndarray:
    ket = np.ones(1, dtype=complex)
    for label in enc.qubit_labels:
        ket = np.kron(ket, np.asarray(qubit_states[label], dtype=complex))
    return ket


def composite_state(ion0: np.ndarray, ion1: np.ndarray, levels: int, fock: int = 0) -> np.ndarray:
    vac = np.zeros(levels, dtype=complex)
    vac[fock] = 1.0
    return np.kron(np.kron(ion0, ion1), vac)


def qubit_dims(enc: PolyEncoding, levels: int) -> tuple[int, ...]:
    """Composite dims split down to individual qubits: (2,)*2p + (levels,)."""
    return (2,) * (2 * enc.p) + (levels,)


def participant_slots(enc: PolyEncoding, labels: Sequence[str]) -> list[int]:
    return [enc.slot(labels[0]), enc.p + enc.slot(labels[1])]


def participant_populations(traj: Trajectory, enc: PolyEncoding, labels: Sequence[str]) -> np.ndarray:
    """P(00), P(01), P(10), P(11) of the participant pair at every sample.

    Returns shape ``(samples, 4)`` for single-ket trajectories and
    ``(samples, 4, batch)`` for batched ones.
    """
    states = traj.states
    single = states.ndim == 2
    if single:
        states = states[:, :, None]
    n, _, batch = states.shape
    dims = qubit_dims(enc, traj.factor_dims[-1])
    probs = np.abs(states.reshape((n,) + dims + (batch,))) ** 2
    s0, s1 = participant_slots(enc, labels)
    axes = tuple(1 + i for i in range(len(dims)) if i not in (s0, s1))
    pops = probs.sum(axis=axes).reshape(n, 4, batch)
    return pops[:, :, 0] if single else pops


def effective_hamiltonian(kind, labels: Sequence[str], g1: float, g2: float, delta: float, p: int = 2) -> np.ndarray:
    """Adiabatically eliminated two-ion Hamiltonian, no mode factor.

    Built as (g1 g2 / 2 delta) times the sum over both ions' participant edges
    of products of atomic Paulis, which is the four-term expansion at p = 2.
    """
    if delta == 0:
        raise DomainError("effective Hamiltonian needs nonzero detuning")
    axis = "X" if DriveKind(kind) is DriveKind.XX else "Z"
    enc = PolyEncoding(p)
    d = enc.level_count
    h = np.zeros((d * d, d * d), dtype=complex)
    for e1 in enc.edge_set[labels[0]]:
        for e2 in enc.edge_set[labels[1]]:
            h += np.kron(atomic_pauli(enc, axis, *e1), atomic_pauli(enc, axis, *e2))
    return g1 * g2 / (2 * delta) * h


def effective_hamiltonian_qubit_form(kind, labels, g1, g2, delta, p=2) -> np.ndarray:
    """Same operator written as sigma_d1 (x) sigma_d2 of qubit Paulis."""
    axis = "X" if DriveKind(kind) is DriveKind.XX else "Z"
    enc = PolyEncoding(p)
    return g1 * g2 / (2 * delta) * np.kron(
        qubit_pauli(enc, axis, labels[0]), qubit_pauli(enc, axis, labels[1])
    )


def monoqubit_oracle(
    g1: float,
    g2: float,
    delta: float,
    fock_cutoff: int,
    duration: float,
    dt: float,
    initial: np.ndarray,
    kind=DriveKind.XX,
    sample_every: int | None = None,
) -> Trajectory:
    """Two ordinary qubits driven by sum_a (g_a/2) sigma_a (a e^{i delta t} + h.c.).

    Built from scratch with dense Kronecker products and integrated with the
    same RK4 scheme; it shares no Hamiltonian code with the polyqubit path.
    ``initial`` is a two-qubit ket (size 4); the mode starts in vacuum.
    """
    sigma = PAULI["X" if DriveKind(kind) is DriveKind.XX else "Z"]
    levels = fock_cutoff + 1
    a = annihilation(levels)
    eye2 = np.eye(2)
    coupling = 0.5 * g1 * np.kron(sigma, eye2) + 0.5 * g2 * np.kron(eye2, sigma)
    lower = np.kron(coupling, a)
    raise_ = lower.conj().T

    def apply_h(t, psi):
        ph = np.exp(1j * delta * t)
        return ph * (lower @ psi) + np.conj(ph) * (raise_ @ psi)

    vac = np.zeros(levels, dtype=complex)
    vac[0] = 1.0
    psi0 = np.kron(np.asarray(initial, dtype=complex), vac)
    return rk4_propagate(apply_h, psi0, duration, dt, sample_every, (2, 2, levels))


def monoqubit_ms_oracle(g1, g2, delta, fock_cutoff, duration, dt, initial, sample_every=None) -> Trajectory:
    return monoqubit_oracle(g1, g2, delta, fock_cutoff, duration, dt, initial, DriveKind.XX, sample_every)


def monoqubit_populations(traj: Trajectory) -> np.ndarray:
    n = traj.states.shape[0]
    probs = np.abs(traj.states.reshape(n, 4, -1)) ** 2
    return probs.sum(axis=2)


def effective_trajectory(h_eff: np.ndarray, psi0: np.ndarray, times: np.ndarray) -> np.ndarray:
    """exp(-i h_eff t) psi0 for every t, via one eigendecomposition."""
    if not is_hermitian(h_eff):
        raise DomainError("effective Hamiltonian must be Hermitian")
    evals, evecs = np.linalg.eigh(h_eff)
    coeffs = evecs.conj().T @ psi0
    return np.array([evecs @ (np.exp(-1j * evals * t) * coeffs) for t in times])


@dataclass(frozen=True)
class PhaseSpacePoint:
    t: float
    alpha: complex
    branch_label: str


@dataclass
class PhaseSpaceBranch:
    label: str
    eigenvalue: float | None
    weight: float
    times: np.ndarray
    alpha: np.ndarray

    def points(self) -> list[PhaseSpacePoint]:
        return [PhaseSpacePoint(float(t), complex(a), self.label) for t, a in zip(self.times, self.alpha)]


def _branches(ham: GateHamiltonian, tol: float = 1e-9) -> list[tuple[str, float | None, np.ndarray]]:
    d = ham.enc.level_count
    phases = {round(t.phase, 12) for t in ham.tones}
    if len(phases) == 1:
        phi = phases.pop()
        k = np.kron(ham.couplings[0], np.eye(d)) + np.kron(np.eye(d), ham.couplings[1])
        lam = np.real(np.diag(k) * np.exp(-1j * phi))
        groups: dict[float, list[int]] = {}
        for idx, value in enumerate(lam):
            key = next((g for g in groups if abs(g - value) < tol), value)
            groups.setdefault(key, []).append(idx)
        return [
            (f"lambda={value:+.6g}", float(value), np.array(idx))
            for value, idx in sorted(groups.items(), reverse=True)
        ]
    return [(f"|{i // d},{i % d}>", None, np.array([i])) for i in range(d * d)]


def phase_space_branches(ham: GateHamiltonian, times: np.ndarray, states: np.ndarray) -> list[PhaseSpaceBranch]:
    """Conditional mode amplitude <a> inside each eigenspace of the ZZ force.

    When all beatnote phases agree the collective force operator is diagonal
    in the atomic basis and its distinct eigenvalues label the branches.
    Otherwise each atomic basis state is reported as its own branch.
    ``states`` has shape (samples, dim).
    """
    if ham.kind is not DriveKind.ZZ:
        raise DomainError("phase-space branches are defined for ZZ drives only")
    d = ham.enc.level_count
    levels = ham.mode.levels
    a = annihilation(levels)
    psi = np.asarray(states).reshape(len(times), d * d, levels)
    out = []
    for label, eigenvalue, rows in _branches(ham):
        sub = psi[:, rows, :]
        weight = float(np.sum(np.abs(sub[0]) ** 2))
        if weight < 1e-14:
            continue
        num = np.einsum("trm,mn,trn->t", sub.conj(), a, sub)
        den = np.sum(np.abs(sub) ** 2, axis=(1, 2))
        out.append(PhaseSpaceBranch(label, eigenvalue, weight, np.asarray(times), num / den))
    return out


def phase_space_trajectory(config: SimConfig) -> list[PhaseSpaceBranch]:
    """Evolve a ZZ gate and split the mode amplitude by force eigenvalue."""
    ham = GateHamiltonian(config.tones, config.mode, config.p)
    if ham.kind is not DriveKind.ZZ:
        raise DomainError("phase-space branches are defined for ZZ drives only")
    if config.initial_state.ndim != 1:
        raise StructureError("phase-space trajectory takes a single initial ket")
    traj = evolve(config)
    return phase_space_branches(ham, traj.times, traj.states)


def analytic_alpha(eigenvalue: float, delta: float, t, phase: float = 0.0):
    """Closed-form branch amplitude (lambda/delta) e^{-i phi} (e^{-i delta t} - 1)."""
    t = np.asarray(t)
    return eigenvalue / delta * np.exp(-1j * phase) * (np.exp(-1j * delta * t) - 1)
