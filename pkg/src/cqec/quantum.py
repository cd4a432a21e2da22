"""Dense linear algebra on small qubit registers.

Operators are plain ``numpy`` arrays of shape ``(2**n, 2**n)``; pure states are
vectors of shape ``(2**n,)`` and density matrices have the operator shape.
Qubit 1 is the leftmost letter of a Pauli label and the most significant bit
of the computational-basis index, so ``"XII"`` flips the leading bit.

Pauli strings map every basis vector to a single basis vector times a phase.
:class:`PauliAction` stores that (permutation, phase) pair so the integrators
can apply the operators elementwise, which is both faster than a dense
product and exactly reproducible for any batch shape.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .errors import ContractViolation, DegenerateStateError, NumericalIntegrityError

HERMITIAN_TOL = 1e-9
IMAG_TOL = 1e-6
DEGENERATE_NORM = 1e-12

_SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
_PHASES = (1, -1, 1j, -1j)


@dataclass(frozen=True)
class PauliString:
    """An element of the n-qubit Pauli group, e.g. ``PauliString("ZZI")``."""

    label: str
    phase: complex = 1

    def __post_init__(self):
        if not self.label or any(c not in _SINGLE for c in self.label):
            raise ContractViolation(f"invalid Pauli label {self.label!r}")
        if self.phase not in _PHASES:
            raise ContractViolation(f"Pauli phase must be one of ±1, ±i, got {self.phase!r}")

    @property
    def n_qubits(self) -> int:
        return len(self.label)

    @property
    def is_hermitian(self) -> bool:
        return self.phase in (1, -1)

    def __str__(self):
        prefix = {1: "", -1: "-", 1j: "i", -1j: "-i"}[self.phase]
        return prefix + self.label


def as_pauli(p: PauliString | str) -> PauliString:
    return p if isinstance(p, PauliString) else PauliString(p)


def pauli_matrix(p: PauliString | str) -> np.ndarray:
    """Dense matrix of a Pauli string, qubit 1 as the leftmost tensor factor."""
    p = as_pauli(p)
    mat = reduce(np.kron, (_SINGLE[c] for c in p.label))
    return p.phase * mat


def basis_state(bits: str) -> np.ndarray:
    """Computational basis vector, e.g. ``basis_state("100")`` is |100>."""
    psi = np.zeros(2 ** len(bits), dtype=complex)
    psi[int(bits, 2)] = 1.0
    return psi


def _check_dim(dim: int) -> None:
    if dim < 1 or dim & (dim - 1):
        raise ContractViolation(f"dimension {dim} is not a power of two")


def is_hermitian(a: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    return bool(np.max(np.abs(a - a.conj().T), initial=0.0) <= tol)


def expectation(a: np.ndarray, state: np.ndarray, *, imag_tol: float = IMAG_TOL) -> float:
    """<psi|A|psi> for a vector, tr(rho A) for a density matrix."""
    a = np.asarray(a)
    state = np.asarray(state)
    dim = a.shape[0]
    _check_dim(dim)
    if a.shape != (dim, dim) or state.shape[0] != dim or state.ndim not in (1, 2):
        raise ContractViolation(f"operator {a.shape} does not act on state {state.shape}")
    if state.ndim == 2 and state.shape != (dim, dim):
        raise ContractViolation(f"density matrix must be {dim}x{dim}, got {state.shape}")
    if not is_hermitian(a):
        raise ContractViolation("expectation requires a Hermitian observable")
    if state.ndim == 1:
        value = np.vdot(state, a @ state)
    else:
        value = np.trace(state @ a)
    if abs(value.imag) >= imag_tol:
        raise NumericalIntegrityError(f"expectation has imaginary residue {value.imag:.3g}")
    return float(value.real)


def codeword_fidelity(psi0: np.ndarray, state: np.ndarray) -> float:
    """Overlap <psi0|rho|psi0> (or |<psi0|psi>|^2), clamped to [0, 1]."""
    psi0 = np.asarray(psi0)
    state = np.asarray(state)
    dim = psi0.shape[0]
    if state.shape not in ((dim,), (dim, dim)):
        raise ContractViolation(f"reference {psi0.shape} does not match state {state.shape}")
    if state.ndim == 1:
        f = abs(np.vdot(psi0, state)) ** 2
    else:
        f = np.vdot(psi0, state @ psi0).real
    return float(min(1.0, max(0.0, f)))


def normalize(psi: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(psi)
    if norm <= DEGENERATE_NORM:
        raise DegenerateStateError(f"state norm {norm:.3g} too small to normalize")
    return psi / norm


def renormalize(rho: np.ndarray) -> np.ndarray:
    tr = np.trace(rho).real
    if tr <= DEGENERATE_NORM:
        raise DegenerateStateError(f"density matrix trace {tr:.3g} too small to renormalize")
    return rho / tr


@dataclass(frozen=True, eq=False)
class PauliAction:
    """Monomial form of a Pauli string: ``(P psi)[i] = phase[i] * psi[perm[i]]``.

    All ``apply``/``left``/``right`` methods broadcast over leading batch axes.
    """

    perm: np.ndarray
    phase: np.ndarray
    label: str = ""

    def __post_init__(self):
        inv = np.argsort(self.perm)
        inv.setflags(write=False)
        object.__setattr__(self, "_inv", inv)
        object.__setattr__(self, "_inv_phase", self.phase[inv])
        object.__setattr__(self, "_diagonal", bool(np.all(self.perm == np.arange(len(self.perm)))))
        object.__setattr__(self, "_outer_phase", self.phase[:, None] * self.phase.conj()[None, :])

    @classmethod
    def from_pauli(cls, p: PauliString | str) -> PauliAction:
        p = as_pauli(p)
        mat = pauli_matrix(p)
        perm = np.argmax(np.abs(mat), axis=1)
        phase = mat[np.arange(len(perm)), perm]
        perm.setflags(write=False)
        phase.setflags(write=False)
        return cls(perm, phase, str(p))

    @property
    def dim(self) -> int:
        return len(self.perm)

    @property
    def is_diagonal(self) -> bool:
        return self._diagonal

    def matrix(self) -> np.ndarray:
        mat = np.zeros((self.dim, self.dim), dtype=complex)
        mat[np.arange(self.dim), self.perm] = self.phase
        return mat

    def apply(self, psi: np.ndarray) -> np.ndarray:
        """P psi for states of shape (..., dim)."""
        if self._diagonal:
            return psi * self.phase
        return psi[..., self.perm] * self.phase

    def left(self, rho: np.ndarray) -> np.ndarray:
        """P rho for matrices of shape (..., dim, dim)."""
        if self._diagonal:
            return rho * self.phase[:, None]
        return rho[..., self.perm, :] * self.phase[:, None]

    def right(self, rho: np.ndarray) -> np.ndarray:
        """rho P for matrices of shape (..., dim, dim)."""
        if self._diagonal:
            return rho * self.phase
        return rho[..., :, self._inv] * self._inv_phase

    def sandwich(self, rho: np.ndarray) -> np.ndarray:
        """P rho P^+ for matrices of shape (..., dim, dim)."""
        if self._diagonal:
            return rho * self._outer_phase
        return rho[..., self.perm[:, None], self.perm[None, :]] * self._outer_phase

    def expect_pure(self, psi: np.ndarray) -> np.ndarray:
        """Re <psi|P|psi> over the trailing axis."""
        return np.sum((psi.conj() * self.apply(psi)).real, axis=-1)

    def expect_mixed(self, rho: np.ndarray) -> np.ndarray:
        """Re tr(P rho) over the trailing two axes."""
        cols = np.arange(self.dim)
        return np.sum((rho[..., self.perm, cols] * self.phase).real, axis=-1)

    def rotate(self, rho: np.ndarray, theta) -> np.ndarray:
        """U rho U^+ with U = exp(-i theta P) = cos(theta) - i sin(theta) P, for P^2 = 1.

        ``theta`` broadcasts over the leading axes of ``rho``.
        """
        c = np.cos(theta)[..., None, None]
        s = np.sin(theta)[..., None, None]
        comm = self.right(rho) - self.left(rho)
        return (c * c) * rho + (s * s) * self.sandwich(rho) + (1j * c * s) * comm
