"""Seeded parameter sweeps for the inter-atomic gate experiments.

Four experiments are defined:

* ``xx_population``: participant populations through an XX gate, one
  trajectory per random spectator state, next to the monoqubit oracle.
* ``xx_rabi_mismatch``: Bell fidelity at the gate time against a relative
  Rabi mismatch between the two transitions in each ion.
* ``zz_phase_space``: conditional mode amplitude per force eigenvalue for a
  ZZ gate.
* ``zz_phase_mismatch``: Bell fidelity against a beatnote phase offset
  between the two transitions in each ion.

The gate runs at single-loop closure, delta * t_gate = 2 pi with
g = delta / 2, so the two-qubit rate Omega = g**2 / delta puts the
maximally entangled point at Omega t / pi = 0.5.

Spectator qubits start in Haar-random pure states drawn from a Philox
generator keyed by ``(rng_seed, seed_index)``. Because the evolution is
linear, each sweep point evolves the computational basis of the spectator
register once and assembles every seed's final state from it.
"""
from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .dynamics import (
    BosonicMode,
    DriveKind,
    GateHamiltonian,
    SimConfig,
    Trajectory,
    closure_time,
    composite_state,
    evolve,
    ion_state,
    matched_tones,
    monoqubit_oracle,
    monoqubit_populations,
    omega_rate,
    participant_populations,
    participant_slots,
    phase_space_branches,
    qubit_dims,
)
from .errors import DomainError, IntegrationError
from .linop import fidelity, haar_qubit, reduced_states
from .polyenc import PolyEncoding

KET_0 = np.array([1, 0], dtype=complex)
KET_PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)


class Experiment(str, Enum):
    XX_POPULATION = "xx_population"
    XX_RABI_MISMATCH = "xx_rabi_mismatch"
    ZZ_PHASE_SPACE = "zz_phase_space"
    ZZ_PHASE_MISMATCH = "zz_phase_mismatch"

    @property
    def kind(self) -> DriveKind:
        return DriveKind.XX if self.value.startswith("xx") else DriveKind.ZZ


def default_grid(experiment: Experiment) -> tuple[float, ...]:
    if experiment is Experiment.XX_RABI_MISMATCH:
        return tuple(np.linspace(-0.05, 0.05, 21).round(12))
    if experiment is Experiment.ZZ_PHASE_MISMATCH:
        return tuple(np.linspace(-np.pi / 2, np.pi / 2, 21))
    return (0.0,)


@dataclass(frozen=True)
class GateParams:
    """Operating point of one inter-atomic gate."""

    p: int = 2
    labels: tuple[str, str] = ("V", "V")
    strength: float = 1.0
    detuning: float = 2.0
    fock_cutoff: int = 12
    steps_per_loop: int = 4000
    loops: int = 1
    mismatch_ions: tuple[int, ...] = (0, 1)

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "mismatch_ions", tuple(int(i) for i in self.mismatch_ions))
        enc = PolyEncoding(self.p)
        if len(self.labels) != 2 or any(lab not in enc.qubit_labels for lab in self.labels):
            raise DomainError(f"labels must be two of {enc.qubit_labels}, got {self.labels}")
        if self.detuning == 0:
            raise DomainError("detuning must be nonzero")
        if self.loops < 1 or self.steps_per_loop < 100:
            raise DomainError("loops must be >= 1 and steps_per_loop >= 100")

    @property
    def enc(self) -> PolyEncoding:
        return PolyEncoding(self.p)

    @property
    def mode(self) -> BosonicMode:
        return BosonicMode(self.detuning, self.fock_cutoff)

    @property
    def gate_time(self) -> float:
        return closure_time(self.detuning, self.loops)

    @property
    def dt(self) -> float:
        return closure_time(self.detuning) / self.steps_per_loop

    @property
    def omega(self) -> float:
        return omega_rate(self.strength, self.strength, self.detuning)

    def tones(self, kind, rabi_mismatch: float = 0.0, phase_mismatch: float = 0.0):
        return matched_tones(
            self.enc,
            kind,
            self.labels,
            (self.strength, self.strength),
            rabi_mismatch,
            phase_mismatch,
            self.mismatch_ions,
        )


@dataclass
class SweepSpec:
    experiment: Experiment
    grid: tuple[float, ...] | None = None
    seeds: int = 100
    rng_seed: int = 0
    gate: GateParams = field(default_factory=GateParams)
    samples: int = 100
    threads: int = 1

    def __post_init__(self):
        self.experiment = Experiment(self.experiment)
        if self.grid is None:
            self.grid = default_grid(self.experiment)
        self.grid = tuple(float(x) for x in self.grid)
        if not self.grid:
            raise DomainError("parameter grid must not be empty")
        if self.seeds < 1:
            raise DomainError("seeds must be >= 1")
        if self.samples < 1:
            raise DomainError("samples must be >= 1")

    def to_dict(self) -> dict:
        out = asdict(self)
        out["experiment"] = self.experiment.value
        out["gate"]["labels"] = list(self.gate.labels)
        out["gate"]["mismatch_ions"] = list(self.gate.mismatch_ions)
        out["grid"] = list(self.grid)
        return out


@dataclass(frozen=True)
class SweepRecord:
    parameter: float
    mean_fidelity: float
    std_fidelity: float
    min_fidelity: float
    n_seeds: int
    n_failures: int = 0
    reason: str = ""


def spectator_labels(enc: PolyEncoding, labels: Sequence[str]) -> list[tuple[int, str]]:
    return [(ion, lab) for ion in (0, 1) for lab in enc.qubit_labels if lab != labels[ion]]


def seed_rng(rng_seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=np.array([rng_seed, index], dtype=np.uint64)))


def spectator_kets(enc: PolyEncoding, labels: Sequence[str], seeds: int, rng_seed: int) -> list[list[np.ndarray]]:
    """Random spectator kets per seed, ordered as :func:`spectator_labels`."""
    slots = spectator_labels(enc, labels)
    out = []
    for s in range(seeds):
        rng = seed_rng(rng_seed, s)
        out.append([haar_qubit(rng) for _ in slots])
    return out


def spectator_coefficients(kets: list[list[np.ndarray]]) -> np.ndarray:
    """Amplitudes of each seed's spectator register, shape (basis, seeds)."""
    cols = []
    for seed_kets in kets:
        c = np.ones(1, dtype=complex)
        for k in seed_kets:
            c = np.kron(c, k)
        cols.append(c)
    return np.array(cols).T


def basis_initial_states(gate: GateParams, participants: Sequence[np.ndarray]) -> np.ndarray:
    """Composite kets with fixed participants and every spectator basis state.

    Column order matches :func:`spectator_coefficients`.
    """
    enc = gate.enc
    slots = spectator_labels(enc, gate.labels)
    cols = []
    for bits in itertools.product((0, 1), repeat=len(slots)):
        per_ion = [{gate.labels[0]: participants[0]}, {gate.labels[1]: participants[1]}]
        for (ion, lab), b in zip(slots, bits):
            per_ion[ion][lab] = np.eye(2, dtype=complex)[b]
        cols.append(
            composite_state(ion_state(enc, per_ion[0]), ion_state(enc, per_ion[1]), gate.mode.levels)
        )
    return np.array(cols).T


def participant_states_for(experiment: Experiment) -> tuple[np.ndarray, np.ndarray]:
    if experiment.kind is DriveKind.XX:
        return KET_0, KET_0
    return KET_PLUS, KET_PLUS


def run_gate(
    gate: GateParams,
    kind,
    participants: Sequence[np.ndarray],
    coeffs: np.ndarray,
    rabi_mismatch: float = 0.0,
    phase_mismatch: float = 0.0,
    sample_every: int | None = None,
) -> Trajectory:
    """Evolve the spectator basis and return per-seed states as the batch axis."""
    config = SimConfig(
        gate.tones(kind, rabi_mismatch, phase_mismatch),
        gate.mode,
        gate.gate_time,
        gate.dt,
        basis_initial_states(gate, participants),
        gate.p,
        sample_every=sample_every,
    )
    traj = evolve(config)
    states = traj.states @ coeffs
    norms = np.linalg.norm(states, axis=1)
    return Trajectory(traj.times, states, traj.factor_dims, np.max(np.abs(norms - 1), axis=1))


def participant_density(gate: GateParams, kets: np.ndarray) -> np.ndarray:
    """Reduced two-qubit states of the participants, shape (seeds, 4, 4).

    Kets are renormalised first; integrator norm drift is bounded by the
    abort threshold and reported separately, so it is not folded into the
    fidelity.
    """
    kets = kets / np.linalg.norm(kets, axis=0)
    dims = qubit_dims(gate.enc, gate.mode.levels)
    return reduced_states(kets, dims, participant_slots(gate.enc, gate.labels))


def bell_target(gate: GateParams, experiment: Experiment, rng_seed: int = 0) -> np.ndarray:
    """Leading eigenvector of the participant state after the matched gate.

    It is computed once per sweep and then held fixed, which pins the phase
    convention of the Bell state without assuming one.
    """
    participants = participant_states_for(experiment)
    coeffs = spectator_coefficients(spectator_kets(gate.enc, gate.labels, 1, rng_seed))
    traj = run_gate(gate, experiment.kind, participants, coeffs)
    rho = participant_density(gate, traj.final)[0]
    evals, evecs = np.linalg.eigh(rho)
    vec = evecs[:, -1]
    k = int(np.argmax(np.abs(vec)))
    return vec * np.exp(-1j * np.angle(vec[k]))


def analytic_bell(experiment: Experiment) -> np.ndarray:
    """Ideal exp(-i pi/4 sigma sigma) applied to the participant start state."""
    from .linop import PAULI, expm

    sigma = PAULI["X" if experiment.kind is DriveKind.XX else "Z"]
    p0, p1 = participant_states_for(experiment)
    return expm(np.kron(sigma, sigma), np.pi / 4) @ np.kron(p0, p1)


def _mismatch_args(experiment: Experiment, value: float) -> dict:
    if experiment is Experiment.XX_RABI_MISMATCH:
        return {"rabi_mismatch": value}
    if experiment is Experiment.ZZ_PHASE_MISMATCH:
        return {"phase_mismatch": value}
    raise DomainError(f"{experiment.value} is not a mismatch sweep")


def fidelity_samples(spec: SweepSpec, value: float, target: np.ndarray) -> np.ndarray:
    """Bell fidelity for every seed at one sweep value."""
    gate = spec.gate
    coeffs = spectator_coefficients(spectator_kets(gate.enc, gate.labels, spec.seeds, spec.rng_seed))
    traj = run_gate(
        gate,
        spec.experiment.kind,
        participant_states_for(spec.experiment),
        coeffs,
        **_mismatch_args(spec.experiment, value),
    )
    rhos = participant_density(gate, traj.final)
    return np.array([fidelity(rho, target) for rho in rhos])


def _sweep_point(spec: SweepSpec, value: float, target: np.ndarray) -> SweepRecord:
    try:
        fids = fidelity_samples(spec, value, target)
    except IntegrationError as exc:
        nan = float("nan")
        return SweepRecord(value, nan, nan, nan, spec.seeds, spec.seeds, str(exc))
    return SweepRecord(
        value,
        float(np.mean(fids)),
        float(np.std(fids)),
        float(np.min(fids)),
        spec.seeds,
        0,
    )


def _run_mismatch(spec: SweepSpec, expected: Experiment) -> list[SweepRecord]:
    if spec.experiment is not expected:
        raise DomainError(f"expected a {expected.value} spec, got {spec.experiment.value}")
    target = bell_target(spec.gate, spec.experiment, spec.rng_seed)
    if spec.threads > 1:
        with ThreadPoolExecutor(max_workers=spec.threads) as pool:
            return list(pool.map(lambda v: _sweep_point(spec, v, target), spec.grid))
    return [_sweep_point(spec, v, target) for v in spec.grid]


def run_xx_mismatch_sweep(spec: SweepSpec) -> list[SweepRecord]:
    return _run_mismatch(spec, Experiment.XX_RABI_MISMATCH)


def run_zz_phase_mismatch_sweep(spec: SweepSpec) -> list[SweepRecord]:
    return _run_mismatch(spec, Experiment.ZZ_PHASE_MISMATCH)


@dataclass
class PopulationTrace:
    times: np.ndarray
    omega_t_over_pi: np.ndarray
    populations: np.ndarray  # (samples, 4, seeds)
    norm_error: np.ndarray
    oracle: np.ndarray  # (samples, 4)

    def rows(self):
        for s in range(self.populations.shape[2]):
            for i, t in enumerate(self.times):
                yield (
                    float(t),
                    float(self.omega_t_over_pi[i]),
                    s,
                    *(float(x) for x in self.populations[i, :, s]),
                    float(self.norm_error[i]),
                    float(self.oracle[i, 0]),
                    float(self.oracle[i, 3]),
                )


POPULATION_COLUMNS = (
    "t", "omega_t_over_pi", "seed", "P00", "P01", "P10", "P11",
    "norm_error", "oracle_P00", "oracle_P11",
)


def _stride(gate: GateParams, samples: int) -> int:
    total = gate.steps_per_loop * gate.loops
    return max(1, total // samples)


def run_population_trace(spec: SweepSpec) -> PopulationTrace:
    if spec.experiment is not Experiment.XX_POPULATION:
        raise DomainError(f"expected xx_population, got {spec.experiment.value}")
    gate = spec.gate
    stride = _stride(gate, spec.samples)
    coeffs = spectator_coefficients(spectator_kets(gate.enc, gate.labels, spec.seeds, spec.rng_seed))
    traj = run_gate(gate, DriveKind.XX, (KET_0, KET_0), coeffs, sample_every=stride)
    pops = participant_populations(traj, gate.enc, gate.labels)
    mono = monoqubit_oracle(
        gate.strength,
        gate.strength,
        gate.detuning,
        gate.fock_cutoff,
        gate.gate_time,
        gate.dt,
        np.kron(KET_0, KET_0),
        DriveKind.XX,
        stride,
    )
    return PopulationTrace(
        traj.times,
        gate.omega * traj.times / np.pi,
        pops,
        traj.norm_error,
        monoqubit_populations(mono),
    )


PHASE_SPACE_COLUMNS = ("t", "branch_label", "re_alpha", "im_alpha", "seed")


def run_phase_space(spec: SweepSpec) -> dict[int, list]:
    """Branch trajectories for every seed, keyed by seed index."""
    if spec.experiment is not Experiment.ZZ_PHASE_SPACE:
        raise DomainError(f"expected zz_phase_space, got {spec.experiment.value}")
    gate = spec.gate
    stride = _stride(gate, spec.samples)
    coeffs = spectator_coefficients(spectator_kets(gate.enc, gate.labels, spec.seeds, spec.rng_seed))
    traj = run_gate(gate, DriveKind.ZZ, (KET_PLUS, KET_PLUS), coeffs, sample_every=stride)
    ham = GateHamiltonian(gate.tones(DriveKind.ZZ), gate.mode, gate.p)
    return {
        s: phase_space_branches(ham, traj.times, traj.states[:, :, s])
        for s in range(spec.seeds)
    }
