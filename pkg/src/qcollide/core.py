"""Finite-dimensional operator algebra for the joint internal space.

Everything downstream (scattering maps, collision thermodynamics) works on a
small bipartite system A⊗B with Hamiltonian H_Y = H_A ⊗ I + I ⊗ H_B. This
module provides the validated container types (:class:`InternalSystem`,
:class:`DensityMatrix`, :class:`CouplingOperator`) plus the handful of exact
operations they need: Kronecker assembly of product states, von Neumann
entropy, and unitaries generated by Hermitian operators.

Units: hbar = k_B = 1 throughout. All objects are immutable after
construction and safe to share across threads.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

HBAR = 1.0

# tolerances used by the validating constructors
_HERM_TOL = 1e-10
_TRACE_TOL = 1e-10
_PSD_TOL = 1e-10
_EIG_CUTOFF = 1e-14


class DimensionMismatchError(ValueError):
    """Operands live on incompatible Hilbert spaces."""


def _as_complex_matrix(a, name: str) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {m.shape}")
    return m


def _check_hermitian(m: np.ndarray, tol: float, name: str) -> None:
    defect = np.abs(m - m.conj().T).max()
    if defect > tol:
        raise ValueError(f"{name} is not Hermitian (defect {defect:.3e} > {tol:g})")


@dataclass(frozen=True)
class InternalSystem:
    """Joint internal system A⊗B with its eigendecomposition.

    Eigenvalues are sorted ascending; ``eigvecs[:, j]`` is the eigenvector of
    ``eigvals[j]`` expressed in the basis H_A and H_B were given in. Optional
    ``labels`` name the eigenstates (e.g. ``("dndn", "dnup", "updn", "upup")``
    for two spins) and are used for sector-resolved reporting.
    """

    dim_a: int
    dim_b: int
    h_a: np.ndarray
    h_b: np.ndarray
    h_y: np.ndarray
    eigvals: np.ndarray
    eigvecs: np.ndarray
    labels: tuple[str, ...] | None = None

    @classmethod
    def from_parts(
        cls,
        h_a,
        h_b,
        labels: tuple[str, ...] | None = None,
        eigvals=None,
        eigvecs=None,
    ) -> "InternalSystem":
        """Build H_Y = H_A ⊗ I + I ⊗ H_B and eigendecompose it.

        Callers that know an exact eigenbasis (and want a specific labelling
        of degenerate eigenstates) may pass ``eigvals``/``eigvecs`` explicitly;
        they are validated rather than recomputed.
        """
        h_a = _as_complex_matrix(h_a, "h_a")
        h_b = _as_complex_matrix(h_b, "h_b")
        _check_hermitian(h_a, 1e-12, "h_a")
        _check_hermitian(h_b, 1e-12, "h_b")
        da, db = h_a.shape[0], h_b.shape[0]
        h_y = np.kron(h_a, np.eye(db)) + np.kron(np.eye(da), h_b)
        if eigvals is None or eigvecs is None:
            eigvals, eigvecs = np.linalg.eigh(h_y)
        else:
            eigvals = np.asarray(eigvals, dtype=float)
            eigvecs = np.asarray(eigvecs, dtype=complex)
        sys = cls(
            dim_a=da,
            dim_b=db,
            h_a=h_a,
            h_b=h_b,
            h_y=h_y,
            eigvals=np.asarray(eigvals, dtype=float),
            eigvecs=np.asarray(eigvecs, dtype=complex),
            labels=labels,
        )
        sys._validate()
        return sys

    def _validate(self) -> None:
        n = self.dim
        recon = np.kron(self.h_a, np.eye(self.dim_b)) + np.kron(np.eye(self.dim_a), self.h_b)
        if np.abs(self.h_y - recon).max() > 1e-12:
            raise ValueError("h_y does not equal h_a ⊗ I + I ⊗ h_b")
        if np.any(np.diff(self.eigvals) < -1e-12):
            raise ValueError("eigenvalues must be sorted ascending")
        unit_defect = np.abs(self.eigvecs.conj().T @ self.eigvecs - np.eye(n)).max()
        if unit_defect > _HERM_TOL:
            raise ValueError(f"eigenvector matrix not unitary (defect {unit_defect:.3e})")
        resid = np.abs(self.h_y @ self.eigvecs - self.eigvecs * self.eigvals).max()
        scale = max(1.0, np.abs(self.eigvals).max())
        if resid > 1e-9 * scale:
            raise ValueError(f"eigendecomposition residual too large ({resid:.3e})")
        if self.labels is not None and len(self.labels) != n:
            raise ValueError("labels length must equal system dimension")

    @property
    def dim(self) -> int:
        return self.dim_a * self.dim_b

    def gap(self, j_prime: int, j: int) -> float:
        """Energy gap e_{j'} - e_j between two eigenstates."""
        return float(self.eigvals[j_prime] - self.eigvals[j])

    @property
    def span(self) -> float:
        """Full spectral width e_max - e_min (the system's energy scale)."""
        return float(self.eigvals[-1] - self.eigvals[0])

    def to_eigenbasis(self, matrix: np.ndarray) -> np.ndarray:
        """Rotate an operator from the construction basis to the eigenbasis."""
        m = _as_complex_matrix(matrix, "matrix")
        if m.shape[0] != self.dim:
            raise DimensionMismatchError(
                f"operator dim {m.shape[0]} != system dim {self.dim}")
        return self.eigvecs.conj().T @ m @ self.eigvecs

    def from_eigenbasis(self, matrix: np.ndarray) -> np.ndarray:
        m = _as_complex_matrix(matrix, "matrix")
        if m.shape[0] != self.dim:
            raise DimensionMismatchError(
                f"operator dim {m.shape[0]} != system dim {self.dim}")
        return self.eigvecs @ m @ self.eigvecs.conj().T

    def label_index(self, label: str) -> int:
        if self.labels is None:
            raise KeyError("system has no eigenstate labels")
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"unknown eigenstate label {label!r}") from None


@dataclass(frozen=True)
class DensityMatrix:
    """Validated density matrix (Hermitian, unit trace, PSD within tolerance).

    ``validate=False`` skips the strict checks; it is used for states produced
    by numerical maps, where trace/Hermiticity defects are themselves reported
    diagnostics rather than construction errors.
    """

    matrix: np.ndarray
    dim: int = field(init=False)

    def __init__(self, matrix, validate: bool = True):
        m = _as_complex_matrix(matrix, "density matrix")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dim", m.shape[0])
        if validate:
            _check_hermitian(m, _HERM_TOL, "density matrix")
            tr = np.trace(m)
            if abs(tr - 1.0) > _TRACE_TOL:
                raise ValueError(f"trace must be 1, got {tr}")
            min_eig = np.linalg.eigvalsh(0.5 * (m + m.conj().T)).min()
            if min_eig < -_PSD_TOL:
                raise ValueError(f"not positive semidefinite (min eig {min_eig:.3e})")

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def conjugated(self, u: np.ndarray) -> "DensityMatrix":
        """Return U ρ U† without revalidating (unitary conjugation is exact)."""
        return DensityMatrix(u @ self.matrix @ u.conj().T, validate=False)


@dataclass(frozen=True)
class CouplingOperator:
    """Dimensionless Hermitian interaction operator on the internal space."""

    nu: np.ndarray

    def __init__(self, nu):
        m = _as_complex_matrix(nu, "nu")
        _check_hermitian(m, 1e-12, "nu")
        object.__setattr__(self, "nu", m)

    @property
    def dim(self) -> int:
        return self.nu.shape[0]


def tensor_factorize(rho_a: DensityMatrix, rho_b: DensityMatrix) -> DensityMatrix:
    """Kronecker product ρ_A ⊗ ρ_B of two density matrices."""
    return DensityMatrix(np.kron(rho_a.matrix, rho_b.matrix))


def von_neumann_entropy(rho: DensityMatrix, negative_tol: float = _PSD_TOL) -> float:
    """Von Neumann entropy -Tr[ρ ln ρ] in units of k_B (natural log).

    Eigenvalues in ``[-negative_tol, 0)`` are clamped to zero; anything more
    negative raises. Eigenvalues below 1e-14 contribute nothing (0·ln 0 := 0).
    """
    eig = np.linalg.eigvalsh(0.5 * (rho.matrix + rho.matrix.conj().T))
    if eig.min() < -negative_tol:
        raise ValueError(f"density matrix not PSD (min eig {eig.min():.3e})")
    eig = np.clip(eig, 0.0, None)
    eig = eig[eig > _EIG_CUTOFF]
    return float(-(eig * np.log(eig)).sum())


def unitary_from_generator(h: np.ndarray, scale: float) -> np.ndarray:
    """exp(-i * scale * H) for Hermitian H, via eigendecomposition.

    The eigendecomposition route keeps the result unitary to rounding for any
    scale, unlike a truncated series.
    """
    h = _as_complex_matrix(h, "h")
    _check_hermitian(h, 1e-10, "h")
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * scale * w)) @ v.conj().T
