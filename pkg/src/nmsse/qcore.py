"""Two-level-atom linear algebra.

Basis ordering is fixed as ``(e, b)``: index 0 is the excited state,
index 1 the ground state.  Operators are plain ``(2, 2)`` complex arrays
and density matrices are ``(2, 2)`` Hermitian arrays in the same basis.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ContractViolation, DegenerateStateError

NORM_TOL = 1e-9

#: Lowering operator ``|b><e|``.
SIGMA = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)
#: Raising operator ``|e><b|``.
SIGMA_DAG = SIGMA.conj().T
IDENTITY = np.eye(2, dtype=complex)
#: Projector onto the excited state, ``sigma^dag sigma``.
EXCITED_PROJ = SIGMA_DAG @ SIGMA


@dataclass(frozen=True)
class SystemState:
    """Pure state ``amp_e |e> + amp_b |b>`` of the two-level atom.

    ``normalized=False`` marks the unnormalized linear states produced by
    the linear SSE; those are allowed any finite norm.
    """

    amp_e: complex
    amp_b: complex
    normalized: bool = True

    def __post_init__(self):
        object.__setattr__(self, "amp_e", complex(self.amp_e))
        object.__setattr__(self, "amp_b", complex(self.amp_b))
        if not (np.isfinite(self.amp_e) and np.isfinite(self.amp_b)):
            raise ContractViolation("state amplitudes must be finite")
        if self.normalized and abs(self.norm_sq - 1.0) > NORM_TOL:
            raise ContractViolation(
                f"state flagged normalized has norm^2 {self.norm_sq!r}"
            )

    @classmethod
    def from_vector(cls, vec, normalized=True) -> "SystemState":
        vec = np.asarray(vec, dtype=complex).reshape(2)
        return cls(vec[0], vec[1], normalized)

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.amp_e, self.amp_b], dtype=complex)

    @property
    def norm_sq(self) -> float:
        return abs(self.amp_e) ** 2 + abs(self.amp_b) ** 2


def excited() -> SystemState:
    return SystemState(1.0, 0.0)


def ground() -> SystemState:
    return SystemState(0.0, 1.0)


def superposition(amp_e, amp_b) -> SystemState:
    """Normalized state proportional to ``amp_e|e> + amp_b|b>``."""
    return normalize(SystemState(amp_e, amp_b, normalized=False))


class BlochVector(NamedTuple):
    x: float
    y: float
    z: float


def normalize(state: SystemState) -> SystemState:
    norm = np.sqrt(state.norm_sq)
    if norm == 0.0:
        raise DegenerateStateError("cannot normalize a zero-norm state")
    return SystemState(state.amp_e / norm, state.amp_b / norm, normalized=True)


def expectation(state: SystemState, op) -> complex:
    """``<psi|op|psi>`` for a normalized state."""
    if not state.normalized:
        raise ContractViolation("expectation requires a normalized state")
    vec = state.vector
    return complex(vec.conj() @ np.asarray(op) @ vec)


def outer_product(state: SystemState, weight: float = 1.0) -> np.ndarray:
    """``weight * |psi><psi|``.

    The state's own norm is kept, so for a linear (unnormalized) state the
    trace is ``weight * ||psi||^2``.
    """
    if weight < 0:
        raise ContractViolation(f"weight must be non-negative, got {weight}")
    vec = state.vector
    return weight * np.outer(vec, vec.conj())


def bloch(dm) -> BlochVector:
    """Bloch vector of a density matrix.

    x = <sigma> + <sigma^dag>, y = -i<sigma> + i<sigma^dag>,
    z = <sigma^dag sigma> - <sigma sigma^dag>.
    """
    dm = np.asarray(dm)
    coh = dm[0, 1]  # Tr(rho sigma) = rho_eb
    return BlochVector(
        float(2.0 * coh.real),
        float(2.0 * coh.imag),
        float((dm[0, 0] - dm[1, 1]).real),
    )


def bloch_array(rho: np.ndarray) -> np.ndarray:
    """Vectorized :func:`bloch` over leading axes of ``(..., 2, 2)``."""
    coh = rho[..., 0, 1]
    return np.stack(
        [2.0 * coh.real, 2.0 * coh.imag, (rho[..., 0, 0] - rho[..., 1, 1]).real],
        axis=-1,
    )


def bloch_of_vectors(psi: np.ndarray) -> np.ndarray:
    """Bloch components of ``|psi><psi|`` for a stack of vectors ``(..., 2)``.

    No normalization is applied: unnormalized vectors give the Bloch vector
    scaled by their squared norm.
    """
    pe, pb = psi[..., 0], psi[..., 1]
    coh = pe * pb.conj()
    return np.stack(
        [2.0 * coh.real, 2.0 * coh.imag, abs(pe) ** 2 - abs(pb) ** 2], axis=-1
    )


def check_density_matrix(dm, trace_tol=NORM_TOL, herm_tol=1e-12, psd_tol=1e-9):
    """Raise :class:`ContractViolation` unless ``dm`` is a valid density matrix."""
    dm = np.asarray(dm, dtype=complex)
    if dm.shape != (2, 2):
        raise ContractViolation(f"density matrix must be 2x2, got {dm.shape}")
    if np.max(np.abs(dm - dm.conj().T)) > herm_tol:
        raise ContractViolation("density matrix is not Hermitian")
    if abs(np.trace(dm).real - 1.0) > trace_tol:
        raise ContractViolation(f"density matrix trace {np.trace(dm).real!r} != 1")
    if np.min(np.linalg.eigvalsh(dm)) < -psd_tol:
        raise ContractViolation("density matrix has a negative eigenvalue")
    return dm


def fidelity(a: SystemState, b: SystemState) -> float:
    """``|<a|b>|^2`` for two normalized states."""
    return float(abs(np.vdot(a.vector, b.vector)) ** 2)
