"""Dense complex linear algebra used throughout the package.

Operators are plain square ``numpy`` arrays. Kets travel either as bare 1-d
arrays or wrapped in :class:`StateVector` when the subsystem layout matters
(partial traces need it). Everything here is a pure function.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from math import prod
from typing import Sequence

import numpy as np

from .constants import MAX_HILBERT_DIM, TOLERANCES
from .errors import ContractError, SizingError, StructureError

SIGMA_I = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = {"X": SIGMA_X, "Y": SIGMA_Y, "Z": SIGMA_Z}


@dataclass(frozen=True)
class StateVector:
    """A ket together with the dimensions of the subsystems it lives on."""

    amplitudes: np.ndarray
    factor_dims: tuple[int, ...]

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "factor_dims", tuple(int(d) for d in self.factor_dims))
        if prod(self.factor_dims) != amps.size:
            raise StructureError(
                f"factor_dims {self.factor_dims} do not multiply to {amps.size}"
            )

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def density(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def tensor(self, other: "StateVector") -> "StateVector":
        return StateVector(
            np.kron(self.amplitudes, other.amplitudes),
            self.factor_dims + other.factor_dims,
        )


def basis_ket(dim: int, index: int) -> np.ndarray:
    ket = np.zeros(dim, dtype=complex)
    ket[index] = 1.0
    return ket


def kron(*factors: np.ndarray, max_dim: int = MAX_HILBERT_DIM) -> np.ndarray:
    """Kronecker product; the leftmost factor indexes the coarsest blocks."""
    if not factors:
        raise StructureError("kron needs at least one factor")
    dim = prod(np.shape(f)[0] for f in factors)
    if dim > max_dim:
        raise SizingError(f"tensor product dimension {dim} exceeds cap {max_dim}")
    return reduce(np.kron, (np.asarray(f) for f in factors))


def is_hermitian(h: np.ndarray, atol: float = TOLERANCES["hermitian"]) -> bool:
    return bool(np.max(np.abs(h - h.conj().T), initial=0.0) <= atol)


def unitarity_error(u: np.ndarray) -> float:
    """Max-abs entry of U†U - 1."""
    u = np.asarray(u)
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


def expm(h: np.ndarray, t: float) -> np.ndarray:
    """Return exp(-i h t) for Hermitian ``h`` via its eigendecomposition."""
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise StructureError(f"expected a square matrix, got shape {h.shape}")
    if not is_hermitian(h):
        raise ContractError("expm requires a Hermitian generator")
    h = 0.5 * (h + h.conj().T)
    evals, evecs = np.linalg.eigh(h)
    return (evecs * np.exp(-1j * evals * t)) @ evecs.conj().T


def _check_keep(keep: Sequence[int], n: int) -> list[int]:
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= n for k in keep):
        raise StructureError(f"keep indices {keep} invalid for {n} subsystems")
    return keep


def partial_trace(state, keep: Sequence[int], dims: Sequence[int] | None = None) -> np.ndarray:
    """Reduced density operator on the subsystems listed in ``keep``.

    ``state`` may be a :class:`StateVector`, a bare ket (then ``dims`` is
    required) or a density matrix (``dims`` required). The kept subsystems
    appear in ascending index order. Keeping nothing returns a 1x1 matrix
    holding the trace.
    """
    if isinstance(state, StateVector):
        dims = state.factor_dims
        arr = state.amplitudes
    else:
        if dims is None:
            raise StructureError("partial_trace on a bare array needs factor dims")
        arr = np.asarray(state, dtype=complex)
    dims = tuple(int(d) for d in dims)
    n = len(dims)
    keep = _check_keep(keep, n)
    total = prod(dims)
    dk = prod(dims[k] for k in keep)
    drop = [i for i in range(n) if i not in keep]

    if arr.ndim == 1:
        if arr.size != total:
            raise StructureError(f"state of size {arr.size} does not match dims {dims}")
        psi = np.transpose(arr.reshape(dims), keep + drop).reshape(dk, -1)
        return psi @ psi.conj().T

    if arr.shape != (total, total):
        raise StructureError(f"operator of shape {arr.shape} does not match dims {dims}")
    rho = arr.reshape(dims + dims)
    perm = keep + drop
    rho = np.transpose(rho, perm + [n + i for i in perm])
    rest = total // dk
    rho = rho.reshape(dk, rest, dk, rest)
    return np.einsum("ajbj->ab", rho)


def reduced_states(kets: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Batched partial trace of columns of ``kets`` (shape ``(dim, batch)``).

    Returns an array of shape ``(batch, k, k)``.
    """
    dims = tuple(int(d) for d in dims)
    keep = _check_keep(keep, len(dims))
    drop = [i for i in range(len(dims)) if i not in keep]
    kets = np.asarray(kets)
    batch = kets.shape[1]
    psi = kets.reshape(dims + (batch,))
    dk = prod(dims[k] for k in keep)
    psi = np.transpose(psi, [len(dims)] + keep + drop).reshape(batch, dk, -1)
    return np.einsum("bim,bjm->bij", psi, psi.conj())


def check_density(rho: np.ndarray) -> None:
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise StructureError(f"density operator must be square, got {rho.shape}")
    if not is_hermitian(rho):
        raise ContractError("density operator is not Hermitian")
    if abs(np.trace(rho) - 1.0) > TOLERANCES["density_trace"]:
        raise ContractError(f"density operator trace {np.trace(rho).real:.3e} != 1")
    if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() < -TOLERANCES["density_psd"]:
        raise ContractError("density operator has a negative eigenvalue")


def fidelity(rho: np.ndarray, target) -> float:
    """Overlap <target|rho|target> of a density operator with a pure state."""
    psi = target.amplitudes if isinstance(target, StateVector) else np.asarray(target, complex)
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (psi.size, psi.size):
        raise StructureError(f"rho {rho.shape} and target of size {psi.size} mismatch")
    check_density(rho)
    value = float(np.real(psi.conj() @ rho @ psi))
    tol = TOLERANCES["fidelity_clamp"]
    if value < -tol or value > 1 + tol:
        raise ContractError(f"fidelity {value} outside [0, 1]")
    return min(max(value, 0.0), 1.0)


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    diff = np.asarray(rho) - np.asarray(sigma)
    diff = 0.5 * (diff + diff.conj().T)
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(diff))))


def haar_qubit(rng: np.random.Generator) -> np.ndarray:
    """Haar-uniform single-qubit pure state."""
    v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    return v / np.linalg.norm(v)
