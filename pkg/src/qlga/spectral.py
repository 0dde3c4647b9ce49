r"""Plane waves, the dispersion relation and the conserved ``(k, epsilon)`` basis.

For a wave number ``k`` the homogeneous step acts on ``chi * exp(1j*k*x)`` as
the 2x2 matrix

.. math::

   D(k) = e^{-ik} w_{-1} + w_0 + e^{ik} w_{+1},

whose eigenvalues ``exp(-1j*omega)`` satisfy
``cos(omega) = cos(k) cos(theta) cos(rho) + sin(theta) sin(rho)``.

Branch convention: ``epsilon = +1`` is the eigenvector with eigenvalue
``exp(-1j*omega_k)`` where ``omega_k`` in ``[0, pi]``; ``epsilon = -1`` has
``exp(+1j*omega_k)``.  Spinors are unit length with their first non-zero
component real and positive, and plane waves carry a ``1/sqrt(N)`` factor so
the basis ``|k, epsilon>`` is orthonormal.

Where ``D(k)`` is a multiple of the identity (``omega_k`` equal to 0 or pi)
the two branches collide.  There the spinors are taken from the first-order
splitting of ``D`` around ``k``: ``epsilon = +1`` gets the direction whose
frequency grows with ``k`` (the right-moving continuation).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import BandEdgeError
from .lattice import (
    LatticeSpec,
    LocalRule,
    RuleParams,
    StateVector,
    build_rule,
)

__all__ = [
    "PlaneWaveIndex",
    "DispersionPoint",
    "FourierSpectrum",
    "transfer_matrix_D",
    "dispersion_omega",
    "dispersion_point",
    "group_velocity",
    "mode_velocity",
    "continuum_mass_term",
    "effective_mass",
    "branch_spinor",
    "branch_basis",
    "plane_wave",
    "fourier_amplitudes",
    "left_moving_probability",
]

EPSILONS = (1, -1)
BRANCH_COLLISION_GAP = 1e-7
_GAUGE_TOL = 1e-12


@dataclass(frozen=True)
class PlaneWaveIndex:
    n: int
    epsilon: int = 1

    def __post_init__(self):
        if self.epsilon not in EPSILONS:
            raise ValueError(f"branch label must be +1 or -1, got {self.epsilon!r}")

    def k(self, lattice: LatticeSpec) -> float:
        return 2.0 * math.pi * (self.n % lattice.N) / lattice.N


@dataclass(frozen=True)
class DispersionPoint:
    k: float
    omega: float


def _branch_column(epsilon: int) -> int:
    return 0 if epsilon == 1 else 1


@dataclass(frozen=True, eq=False)
class FourierSpectrum:
    """Amplitudes ``<k, epsilon | Psi>`` on the lattice wave-number grid.

    ``amps[n, 0]`` is the ``epsilon = +1`` amplitude at ``k = 2*pi*n/N``
    and ``amps[n, 1]`` the ``epsilon = -1`` one.  ``closed_form`` records
    whether the values came from an analytic expression (packets) or a
    numeric transform.
    """

    lattice: LatticeSpec
    params: RuleParams
    amps: np.ndarray
    closed_form: bool = False

    def amplitude(self, n: int, epsilon: int) -> complex:
        return complex(self.amps[n % self.lattice.N, _branch_column(epsilon)])

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def total_probability(self) -> float:
        return float(self.probabilities.sum())

    def reconstruct(self) -> StateVector:
        """Sum the plane waves back into a position-space state."""
        basis = branch_basis(self.params.theta, self.params.rho, self.lattice.N)
        G = np.einsum("nab,nb->na", basis, self.amps)
        N = self.lattice.N
        return StateVector(self.lattice, math.sqrt(N) * np.fft.ifft(G, axis=0))

    def evolved(self, t: int) -> FourierSpectrum:
        """Spectrum after ``t`` homogeneous steps (pure phase rotation)."""
        omega = dispersion_omega(self.lattice.wave_numbers, self.params)
        phase = np.stack([np.exp(-1j * omega * t), np.exp(1j * omega * t)], axis=1)
        return FourierSpectrum(self.lattice, self.params, self.amps * phase, self.closed_form)


def transfer_matrix_D(k: float, rule: LocalRule) -> np.ndarray:
    """The 2x2 matrix by which one step multiplies a plane-wave spinor."""
    return np.exp(-1j * k) * rule.w_minus + rule.w_zero + np.exp(1j * k) * rule.w_plus


def _half_angle_terms(k, params: RuleParams):
    cc = math.cos(params.theta) * math.cos(params.rho)
    k = np.asarray(k, dtype=np.float64)
    s2 = cc * np.sin(k / 2) ** 2 + math.sin((params.theta - params.rho) / 2) ** 2
    c2 = cc * np.cos(k / 2) ** 2 + math.sin((params.theta + params.rho) / 2) ** 2
    # s2 + c2 == 1 identically; clamp rounding below zero
    return np.clip(s2, 0.0, 1.0), np.clip(c2, 0.0, 1.0)


def dispersion_omega(k, params: RuleParams):
    """Principal frequency ``omega_k`` in ``[0, pi]``; the branches are ``+-omega_k``.

    Evaluated through ``sin^2(omega/2)`` and ``cos^2(omega/2)`` so that
    frequencies near 0 and pi keep full relative precision.
    """
    s2, c2 = _half_angle_terms(k, params)
    omega = 2.0 * np.arctan2(np.sqrt(s2), np.sqrt(c2))
    return float(omega) if omega.ndim == 0 else omega


def dispersion_point(k: float, params: RuleParams) -> DispersionPoint:
    kk = float(k) % (2 * math.pi)
    if kk >= 2 * math.pi:  # tiny negative k rounds up to 2*pi
        kk = 0.0
    return DispersionPoint(k=kk, omega=dispersion_omega(k, params))


def _band_edge_limit(k: float, omega: float, params: RuleParams) -> float:
    # second-order implicit differentiation at sin(omega) = 0:
    # (d omega/dk)^2 = cos(theta)cos(rho) cos(k) / cos(omega)
    cc = math.cos(params.theta) * math.cos(params.rho)
    ratio = cc * math.cos(k) / math.cos(omega)
    if ratio < 0 or not math.isfinite(ratio):
        raise BandEdgeError(
            f"no finite group velocity at band edge k={k:.6g} for {params}"
        )
    return math.sqrt(ratio)


def group_velocity(k, params: RuleParams):
    """``d omega_k / dk = cos(theta) cos(rho) sin(k) / sin(omega_k)``.

    At a band edge where ``sin(omega_k) = 0`` (massless rule at ``k = 0``,
    for example) the right-moving limit is returned; where no real limit
    exists :class:`~qlga.errors.BandEdgeError` is raised.
    """
    k_arr = np.asarray(k, dtype=np.float64)
    omega = np.asarray(dispersion_omega(k_arr, params))
    cc = math.cos(params.theta) * math.cos(params.rho)
    sin_w = np.sin(omega)
    edge = np.abs(sin_w) < 1e-12
    with np.errstate(divide="ignore", invalid="ignore"):
        v = np.where(edge, 0.0, cc * np.sin(k_arr) / np.where(edge, 1.0, sin_w))
    if np.any(edge):
        v = np.array(v, dtype=np.float64, ndmin=1)
        flat_k = np.atleast_1d(k_arr)
        flat_w = np.atleast_1d(omega)
        for i in np.flatnonzero(np.atleast_1d(edge)):
            v[i] = _band_edge_limit(float(flat_k[i]), float(flat_w[i]), params)
        v = v.reshape(k_arr.shape)
    return float(v) if np.ndim(v) == 0 else v


def mode_velocity(k: float, epsilon: int, params: RuleParams) -> float:
    """Signed group velocity of the plane wave ``|k, epsilon>``."""
    try:
        return epsilon * float(group_velocity(k, params))
    except BandEdgeError:
        return 0.0


def continuum_mass_term(params: RuleParams) -> tuple[float, float]:
    """Coefficients of ``omega^2 ~ quad * k^2 + mass`` near ``k = 0``.

    Returns ``(cos(theta) cos(rho), 2 (1 - cos(theta - rho)))``; the second
    entry vanishes exactly when the rule is massless.
    """
    quad = math.cos(params.theta) * math.cos(params.rho)
    mass = 2.0 * (1.0 - math.cos(params.theta - params.rho))
    return quad, mass


def effective_mass(params: RuleParams) -> float:
    """Rest mass in lattice units from ``E^2 = p^2 c^2 + m^2 c^4``.

    With ``c^2 = quad`` and ``m^2 c^4 = mass`` this is ``sqrt(mass) / quad``.
    """
    quad, mass = continuum_mass_term(params)
    if quad <= 0:
        raise ValueError("effective mass undefined for an inverted band (cos(theta)cos(rho) <= 0)")
    return math.sqrt(mass) / quad


def _gauge(v: np.ndarray) -> np.ndarray:
    v = v / np.linalg.norm(v)
    for i, c in enumerate(v):
        if abs(c) > _GAUGE_TOL:
            v = v * (abs(c) / c)
            v[i] = abs(c)  # exactly real, no rounding residue
            return v
    return v


def _null_vector(M: np.ndarray) -> np.ndarray:
    # M is 2x2 of rank one; a row (a, b) is annihilated by (b, -a)
    row = M[0] if np.linalg.norm(M[0]) >= np.linalg.norm(M[1]) else M[1]
    return np.array([row[1], -row[0]])


def _collision_spinors(k: float, rule: LocalRule, lam: complex) -> tuple[np.ndarray, np.ndarray]:
    dD = -1j * np.exp(-1j * k) * rule.w_minus + 1j * np.exp(1j * k) * rule.w_plus
    H = 1j * np.conj(lam) * dD
    H = 0.5 * (H + H.conj().T)
    mu, vecs = np.linalg.eigh(H)
    if abs(mu[1] - mu[0]) < 1e-12:
        return np.array([0.0, 1.0 + 0j]), np.array([1.0 + 0j, 0.0])
    # eigenvalue lam*(1 - i*dk*mu): larger mu is the right-moving direction
    return vecs[:, 1], vecs[:, 0]


def branch_spinor(k: float, params: RuleParams, epsilon: int = 1) -> np.ndarray:
    """Unit spinor ``chi`` with ``D(k) chi = exp(-1j*epsilon*omega_k) chi``."""
    if epsilon not in EPSILONS:
        raise ValueError(f"branch label must be +1 or -1, got {epsilon!r}")
    rule = build_rule(params)
    D = transfer_matrix_D(k, rule)
    omega = dispersion_omega(k, params)
    if 2.0 * math.sin(omega) < BRANCH_COLLISION_GAP:
        plus, minus = _collision_spinors(k, rule, np.exp(-1j * omega))
        return _gauge(plus if epsilon == 1 else minus)
    lam = np.exp(-1j * epsilon * omega)
    return _gauge(_null_vector(D - lam * np.eye(2)))


@lru_cache(maxsize=64)
def _branch_basis_cached(theta: float, rho: float, N: int) -> np.ndarray:
    params = RuleParams(theta, rho)
    basis = np.empty((N, 2, 2), dtype=np.complex128)
    for n in range(N):
        k = 2.0 * math.pi * n / N
        for b, eps in enumerate(EPSILONS):
            basis[n, :, b] = branch_spinor(k, params, eps)
    basis.setflags(write=False)
    return basis


def branch_basis(theta: float, rho: float, N: int) -> np.ndarray:
    """``basis[n, :, b]`` is the spinor for ``k = 2*pi*n/N`` and branch ``(+1, -1)[b]``."""
    return _branch_basis_cached(float(theta), float(rho), int(N))


def plane_wave(index: PlaneWaveIndex, params: RuleParams, lattice: LatticeSpec) -> StateVector:
    """Unit-norm plane wave ``sum_x chi exp(1j*k*x) |x> / sqrt(N)``."""
    n = index.n % lattice.N
    chi = branch_basis(params.theta, params.rho, lattice.N)[n, :, _branch_column(index.epsilon)]
    k = 2.0 * math.pi * n / lattice.N
    phases = np.exp(1j * k * lattice.sites) / math.sqrt(lattice.N)
    return StateVector(lattice, phases[:, None] * chi[None, :])


def fourier_amplitudes(state: StateVector, params: RuleParams) -> FourierSpectrum:
    """Expand ``state`` in the orthonormal plane-wave basis ``|k, epsilon>``."""
    N = state.lattice.N
    basis = branch_basis(params.theta, params.rho, N)
    F = np.fft.fft(state.amps, axis=0) / math.sqrt(N)
    amps = np.einsum("nab,na->nb", basis.conj(), F)
    return FourierSpectrum(state.lattice, params, amps)


def left_moving_probability(spectrum: FourierSpectrum) -> float:
    """Total weight on plane waves whose signed group velocity is negative."""
    lattice, params = spectrum.lattice, spectrum.params
    probs = spectrum.probabilities
    total = 0.0
    for n, k in enumerate(lattice.wave_numbers):
        for b, eps in enumerate(EPSILONS):
            if mode_velocity(k, eps, params) < 0:
                total += probs[n, b]
    return float(total)
