"""
Bosonic Operator Algebra

Truncated Fock-space ladder operators, tensor embedding into multi-mode
layouts, and the unitary exponentials (displacement, squeezing) used to
build and transform cavity-optomechanical Hamiltonians.

Version: 1.0
"""

import logging
from dataclasses import dataclass
from functools import reduce
from typing import Any, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg, special

from validation import (
    QptConfig, InvalidDimensionError, LayoutMismatchError,
    HermiticityViolationError, NumericFailureError,
)

logger = logging.getLogger(__name__)


###############################################################################
# FOCK SPACE LAYOUT
###############################################################################

@dataclass(frozen=True)
class FockSpaceLayout:
    """Ordered truncation dims of the modes; basis order is row-major (first mode slowest)"""

    mode_dims: Tuple[int, ...]
    labels: Tuple[str, ...] = ()

    def __post_init__(self):
        dims = tuple(int(d) for d in self.mode_dims)
        if not dims:
            raise InvalidDimensionError("Layout needs at least one mode")
        for d in dims:
            if d < 2:
                raise InvalidDimensionError(f"Mode dimension {d} is below 2")
        labels = tuple(self.labels) or tuple(f"mode{i}" for i in range(len(dims)))
        if len(labels) != len(dims):
            raise LayoutMismatchError(f"{len(labels)} labels for {len(dims)} modes")
        if len(set(labels)) != len(labels):
            raise LayoutMismatchError(f"Mode labels must be unique: {labels}")
        object.__setattr__(self, 'mode_dims', dims)
        object.__setattr__(self, 'labels', labels)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.mode_dims))

    @property
    def n_modes(self) -> int:
        return len(self.mode_dims)

    def index_of(self, label: str) -> Optional[int]:
        return self.labels.index(label) if label in self.labels else None

    def with_dims(self, dims: Sequence[int]) -> 'FockSpaceLayout':
        return FockSpaceLayout(tuple(dims), self.labels)


###############################################################################
# OPERATOR MATRIX
###############################################################################

@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Dense complex operator tied to a layout; entries are read-only"""

    layout: FockSpaceLayout
    entries: np.ndarray
    hermitian_hint: bool = False

    def __post_init__(self):
        entries = np.array(self.entries, dtype=complex)
        n = self.layout.total_dim
        if entries.shape != (n, n):
            raise LayoutMismatchError(f"Matrix shape {entries.shape} does not match layout dim {n}")
        entries.setflags(write=False)
        object.__setattr__(self, 'entries', entries)

    def _check_layout(self, other: 'OperatorMatrix') -> None:
        if other.layout.mode_dims != self.layout.mode_dims:
            raise LayoutMismatchError(
                f"Layouts differ: {self.layout.mode_dims} vs {other.layout.mode_dims}")

    def dagger(self) -> 'OperatorMatrix':
        return OperatorMatrix(self.layout, self.entries.conj().T, self.hermitian_hint)

    def __matmul__(self, other: 'OperatorMatrix') -> 'OperatorMatrix':
        self._check_layout(other)
        return OperatorMatrix(self.layout, self.entries @ other.entries)

    def __add__(self, other: 'OperatorMatrix') -> 'OperatorMatrix':
        self._check_layout(other)
        return OperatorMatrix(self.layout, self.entries + other.entries)

    def __sub__(self, other: 'OperatorMatrix') -> 'OperatorMatrix':
        self._check_layout(other)
        return OperatorMatrix(self.layout, self.entries - other.entries)

    def __mul__(self, scalar: complex) -> 'OperatorMatrix':
        return OperatorMatrix(self.layout, self.entries * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> 'OperatorMatrix':
        return OperatorMatrix(self.layout, -self.entries)

    def commutator(self, other: 'OperatorMatrix') -> 'OperatorMatrix':
        self._check_layout(other)
        return OperatorMatrix(self.layout, self.entries @ other.entries - other.entries @ self.entries)

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.entries - self.entries.conj().T)))

    def unitarity_error(self) -> float:
        eye = np.eye(self.layout.total_dim)
        return float(np.max(np.abs(self.entries.conj().T @ self.entries - eye)))

    def check_hermitian(self, tol: float = QptConfig.HERMITICITY_TOL) -> 'OperatorMatrix':
        err = self.hermiticity_error()
        if err > tol:
            raise HermiticityViolationError(f"max|H - H^dag| = {err:.3e} exceeds {tol:.1e}")
        return self


###############################################################################
# SINGLE-MODE OPERATORS
###############################################################################

def _check_dim(dim: int) -> int:
    if int(dim) < 2:
        raise InvalidDimensionError(f"Mode dimension {dim} is below 2")
    return int(dim)


def single_mode(dim: int, label: str = 'mode') -> FockSpaceLayout:
    return FockSpaceLayout((_check_dim(dim),), (label,))


def ladder(dim: int) -> np.ndarray:
    """Raw truncated a with <n-1|a|n> = sqrt(n); a†a is exact, [a, a†] fails only at the last row"""
    dim = _check_dim(dim)
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(complex)


def annihilation(dim: int) -> OperatorMatrix:
    return OperatorMatrix(single_mode(dim), ladder(dim))


def number_operator(dim: int) -> OperatorMatrix:
    dim = _check_dim(dim)
    return OperatorMatrix(single_mode(dim), np.diag(np.arange(dim, dtype=float)))


def quadrature(dim: int) -> np.ndarray:
    """X = a + a†"""
    a = ladder(dim)
    return a + a.conj().T


def quadrature_extent(dim: int) -> float:
    """Largest eigenvalue of the truncated a + a†: √2 times the top Hermite root"""
    nodes, _ = special.roots_hermite(_check_dim(dim))
    return float(np.sqrt(2.0) * np.max(nodes))


###############################################################################
# TENSOR EMBEDDING
###############################################################################

def _raw(op) -> np.ndarray:
    return op.entries if isinstance(op, OperatorMatrix) else np.asarray(op, dtype=complex)


def embed_product(layout: FockSpaceLayout, factors: Mapping[int, Any]) -> np.ndarray:
    """Kronecker product placing each factor on its mode and identity elsewhere"""
    for i in factors:
        if not 0 <= i < layout.n_modes:
            raise LayoutMismatchError(f"Mode index {i} outside layout with {layout.n_modes} modes")
    parts = []
    for i, d in enumerate(layout.mode_dims):
        if i not in factors:
            parts.append(np.eye(d, dtype=complex))
            continue
        op = _raw(factors[i])
        if op.shape != (d, d):
            raise LayoutMismatchError(f"Factor of shape {op.shape} on mode {i} with dim {d}")
        parts.append(op)
    return reduce(np.kron, parts)


def tensor_embed(op, mode_index: int, layout: FockSpaceLayout) -> OperatorMatrix:
    return OperatorMatrix(layout, embed_product(layout, {mode_index: op}))


def identity(layout: FockSpaceLayout) -> OperatorMatrix:
    return OperatorMatrix(layout, np.eye(layout.total_dim, dtype=complex))


def interior_mask(layout: FockSpaceLayout, margins: Sequence[int]) -> np.ndarray:
    """Boolean mask of basis states whose index on every mode is below dim - margin"""
    if len(margins) != layout.n_modes:
        raise LayoutMismatchError(f"{len(margins)} margins for {layout.n_modes} modes")
    grids = np.meshgrid(*[np.arange(d) for d in layout.mode_dims], indexing='ij')
    mask = np.ones(layout.mode_dims, dtype=bool)
    for grid, d, m in zip(grids, layout.mode_dims, margins):
        mask &= grid < d - m
    return mask.reshape(-1)


def mode_expectation(state: np.ndarray, layout: FockSpaceLayout, mode_index: int,
                     op) -> complex:
    """<psi| op_mode |psi> without building the embedded matrix"""
    op = _raw(op)
    psi = np.asarray(state, dtype=complex).reshape(layout.mode_dims)
    applied = np.moveaxis(np.tensordot(op, psi, axes=([1], [mode_index])), 0, mode_index)
    return complex(np.vdot(psi, applied))


###############################################################################
# MATRIX EXPONENTIALS
###############################################################################

def matrix_exp(op: OperatorMatrix) -> OperatorMatrix:
    """exp(op); Hermitian and anti-Hermitian generators go through eigh so unitaries stay unitary"""
    m = op.entries
    try:
        if np.allclose(m, m.conj().T, atol=1e-14):
            w, v = linalg.eigh(m)
            result = (v * np.exp(w)) @ v.conj().T
        elif np.allclose(m, -m.conj().T, atol=1e-14):
            w, v = linalg.eigh(1j * m)
            result = (v * np.exp(-1j * w)) @ v.conj().T
        else:
            result = linalg.expm(m)
    except (linalg.LinAlgError, ValueError) as e:
        raise NumericFailureError(f"Failed to exponentiate operator: {e}") from e

    if not np.all(np.isfinite(result)):
        raise NumericFailureError("Matrix exponential produced non-finite entries")
    return OperatorMatrix(op.layout, result)


def displacement(dim: int, x: float) -> OperatorMatrix:
    """D(x) = exp[x(b - b†)], so that D† b D = b - x for real x"""
    b = ladder(dim)
    return matrix_exp(OperatorMatrix(single_mode(dim), x * (b - b.conj().T)))


def squeeze(dim: int, z: complex) -> OperatorMatrix:
    """S(z) = exp[(z a†² - z* a²)/2]; real z=r gives S† X S = e^r X.

    The drive unitary exp[(ζ* a² - ζ a†²)/2] is squeeze(dim, -ζ).
    """
    a = ladder(dim)
    ad = a.conj().T
    generator = 0.5 * (z * (ad @ ad) - np.conj(z) * (a @ a))
    return matrix_exp(OperatorMatrix(single_mode(dim), generator))


def vacuum(layout: FockSpaceLayout) -> np.ndarray:
    state = np.zeros(layout.total_dim, dtype=complex)
    state[0] = 1.0
    return state
