"""Dense global evolution matrix and a verified unitary eigendecomposition.

The global operator on ``N`` sites is a ``2N x 2N`` complex matrix acting on
flattened states (index ``2*x + alpha``, ``alpha = 0`` for the left mover).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ConvergenceError, DimensionError, NonUnitaryError, NumericContractError
from .lattice import LatticeSpec, LocalRule, PotentialProfile

__all__ = [
    "SpectralResult",
    "assemble_global_U",
    "unitarity_residual",
    "eigendecompose_unitary",
    "omega_from_eigenvalue",
    "DEGENERACY_TOL",
]

UNITARY_INPUT_TOL = 1e-8
RESIDUAL_TOL = 1e-10
DEGENERACY_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class SpectralResult:
    """Eigenfrequencies sorted ascending in ``(-pi, pi]``.

    ``vectors[:, j]`` is the eigenvector for ``omegas[j]``, i.e.
    ``U @ vectors[:, j] == exp(-1j * omegas[j]) * vectors[:, j]``.
    """

    omegas: np.ndarray
    vectors: np.ndarray
    residuals: np.ndarray

    def __len__(self) -> int:
        return self.omegas.shape[0]

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.exp(-1j * self.omegas)

    def lowest_positive(self, count: int) -> np.ndarray:
        """Indices of the ``count`` smallest strictly positive frequencies."""
        idx = np.flatnonzero(self.omegas > 0)
        return idx[:count]

    def nearest(self, omega: float) -> int:
        return int(np.argmin(np.abs(self.omegas - omega)))

    def site_density(self, j: int) -> np.ndarray:
        """Probability density over sites of eigenvector ``j``."""
        v = self.vectors[:, j].reshape(-1, 2)
        return np.sum(np.abs(v) ** 2, axis=1)


def assemble_global_U(
    rule: LocalRule,
    potential: PotentialProfile | None,
    lattice: LatticeSpec,
) -> np.ndarray:
    """Dense matrix whose action on ``state.flatten()`` equals one step."""
    N = lattice.N
    if potential is None:
        potential = PotentialProfile.zero(lattice)
    if potential.N != N:
        raise DimensionError(f"potential has {potential.N} sites, lattice has {N}")
    U = np.zeros((2 * N, 2 * N), dtype=np.complex128)
    phases = potential.site_phases
    wm, w0, wp = rule.matrices
    for x in range(N):
        rows = slice(2 * x, 2 * x + 2)
        for offset, w in ((-1, wm), (0, w0), (1, wp)):
            y = (x + offset) % N
            # += so that N = 2 (where x-1 == x+1) accumulates both neighbours
            U[rows, 2 * y : 2 * y + 2] += phases[x] * w
    return U


def unitarity_residual(U: np.ndarray) -> float:
    """``max |U^dag U - I|`` entry-wise."""
    U = np.asarray(U)
    return float(np.abs(U.conj().T @ U - np.eye(U.shape[0])).max())


def omega_from_eigenvalue(lam) -> np.ndarray:
    """Frequency ``omega`` with ``lam = exp(-1j*omega)``, mapped into ``(-pi, pi]``."""
    omega = -np.angle(lam)
    return np.where(omega <= -math.pi, math.pi, omega)


def _orthonormalize_clusters(omegas: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    # Schur vectors are already orthonormal; this only guards against drift
    # inside numerically degenerate groups, in a fixed column order.
    out = vectors.copy()
    start = 0
    n = omegas.shape[0]
    while start < n:
        stop = start + 1
        while stop < n and omegas[stop] - omegas[stop - 1] < DEGENERACY_TOL:
            stop += 1
        if stop - start > 1:
            q, r = np.linalg.qr(out[:, start:stop])
            d = np.diag(r)
            phase = np.where(np.abs(d) > 0, d / np.where(d == 0, 1, np.abs(d)), 1.0)
            out[:, start:stop] = q * phase
        start = stop
    return out


def eigendecompose_unitary(U) -> SpectralResult:
    """Eigenpairs of a unitary matrix with verified residuals.

    Uses the complex Schur form ``U = Z T Z^dag``.  For a normal matrix the
    triangular factor is diagonal up to rounding, so the columns of ``Z``
    are an orthonormal eigenbasis, including inside degenerate clusters.

    Raises
    ------
    NonUnitaryError
        If ``max |U^dag U - I| > 1e-8`` or the matrix is not square with even size.
    ConvergenceError
        If LAPACK's QR iteration fails to converge.
    NumericContractError
        If any eigen-residual exceeds ``1e-10 * ||U||``.
    """
    U = np.asarray(U, dtype=np.complex128)
    if U.ndim != 2 or U.shape[0] != U.shape[1] or U.shape[0] % 2:
        raise NonUnitaryError(f"expected a square matrix of even size, got {U.shape}")
    if not np.all(np.isfinite(U)):
        raise NonUnitaryError("matrix has non-finite entries")
    res = unitarity_residual(U)
    if res > UNITARY_INPUT_TOL:
        raise NonUnitaryError(f"matrix is not unitary (residual {res:.3e})")

    try:
        T, Z = scipy.linalg.schur(U, output="complex")
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"Schur iteration budget exhausted: {exc}") from exc

    omegas = omega_from_eigenvalue(np.diag(T))
    order = np.argsort(omegas, kind="stable")
    omegas = omegas[order]
    vectors = _orthonormalize_clusters(omegas, Z[:, order])

    lam = np.exp(-1j * omegas)
    residuals = np.linalg.norm(U @ vectors - vectors * lam, axis=0)
    bound = RESIDUAL_TOL * max(np.linalg.norm(U, 2), 1.0)
    worst = float(residuals.max())
    if worst > bound:
        raise NumericContractError(f"eigen-residual {worst:.3e} exceeds {bound:.3e}")
    return SpectralResult(omegas=omegas, vectors=vectors, residuals=residuals)
