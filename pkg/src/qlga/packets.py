"""Binomial wave packets and trajectory diagnostics."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .lattice import LatticeSpec, RuleParams, StateVector, probability_density
from .spectral import (
    EPSILONS,
    FourierSpectrum,
    branch_basis,
    branch_spinor,
    fourier_amplitudes,
)

__all__ = [
    "WavePacketSpec",
    "PacketDiagnostics",
    "binomial_weights",
    "wave_packet",
    "packet_momentum_amplitudes",
    "track_packet",
    "well_regions",
]


@dataclass(frozen=True)
class WavePacketSpec:
    """Carrier wave number ``k0``, centre site ``x0``, even width ``s``."""

    k0: float
    x0: int
    s: int
    epsilon: int = 1

    def __post_init__(self):
        if int(self.s) != self.s or self.s < 0 or self.s % 2:
            raise ValueError(f"packet width must be an even non-negative integer, got {self.s!r}")
        if self.epsilon not in EPSILONS:
            raise ValueError(f"branch label must be +1 or -1, got {self.epsilon!r}")

    @classmethod
    def from_mode(cls, n0: int, lattice: LatticeSpec, x0: int, s: int, epsilon: int = 1):
        return cls(2.0 * math.pi * n0 / lattice.N, x0, s, epsilon)

    def check(self, lattice: LatticeSpec) -> None:
        if self.s > lattice.N:
            raise ValueError(f"packet width {self.s} exceeds lattice size {lattice.N}")
        if not 0 <= self.x0 < lattice.N:
            raise ValueError(f"packet centre {self.x0} outside [0, {lattice.N})")

    def wraps(self, lattice: LatticeSpec) -> bool:
        """True when the support overlaps itself on the ring."""
        return self.s + 1 > lattice.N


@dataclass(frozen=True, eq=False)
class PacketDiagnostics:
    peak_positions: np.ndarray
    unwrapped_peaks: np.ndarray
    peak_probabilities: np.ndarray
    measured_group_velocity: float
    region_probabilities: np.ndarray
    regions: tuple[tuple[int, int], ...]
    norms: np.ndarray


def binomial_weights(s: int) -> np.ndarray:
    """``C(s, j) / C(s, s/2)`` for ``j = 0..s`` without forming large integers."""
    half = s // 2
    w = np.empty(s + 1)
    w[half] = 1.0
    for j in range(half, s):
        w[j + 1] = w[j] * (s - j) / (j + 1)
    w[:half] = w[s:half:-1]
    return w


def wave_packet(spec: WavePacketSpec, params: RuleParams, lattice: LatticeSpec) -> StateVector:
    """Plane wave windowed by binomial coefficients, renormalized to unit norm.

    Site ``x0 - s/2 + j`` receives ``C(s, j) exp(1j*k0*x) chi(k0)``.  Sites
    are reduced mod ``N`` and accumulated, so a support that wraps onto
    itself adds up instead of overwriting.
    """
    spec.check(lattice)
    chi = branch_spinor(spec.k0, params, spec.epsilon)
    xs = spec.x0 - spec.s // 2 + np.arange(spec.s + 1)
    coeff = binomial_weights(spec.s) * np.exp(1j * spec.k0 * xs)
    envelope = np.zeros(lattice.N, dtype=np.complex128)
    np.add.at(envelope, xs % lattice.N, coeff)
    amps = envelope[:, None] * chi[None, :]
    return StateVector(lattice, amps / np.linalg.norm(amps))


def _log_central_binomial(s: int) -> float:
    return math.lgamma(2 * s + 1) - 2.0 * math.lgamma(s + 1)


def packet_momentum_amplitudes(
    spec: WavePacketSpec, params: RuleParams, lattice: LatticeSpec
) -> FourierSpectrum:
    """Closed-form plane-wave amplitudes of :func:`wave_packet`.

    ``<k, eps|Psi> = chi(k, eps)^dag chi(k0) exp(1j (k0 - k) x0)
    (2 cos((k0 - k)/2))^s / sqrt(C(2s, s) N)``.

    When the support wraps onto itself the binomial norm no longer applies;
    the numeric transform is returned instead with ``closed_form=False``.
    """
    spec.check(lattice)
    if spec.wraps(lattice):
        warnings.warn(
            f"packet of width {spec.s} wraps a lattice of {lattice.N} sites; "
            "closed form unavailable, using the numeric transform",
            RuntimeWarning,
            stacklevel=2,
        )
        return fourier_amplitudes(wave_packet(spec, params, lattice), params)

    N = lattice.N
    k = lattice.wave_numbers
    dk = spec.k0 - k
    c = np.cos(dk / 2)
    if spec.s == 0:
        envelope = np.ones_like(c)
    else:
        with np.errstate(divide="ignore"):
            log_mag = spec.s * np.log(np.abs(2.0 * c)) - 0.5 * _log_central_binomial(spec.s)
        envelope = np.exp(log_mag)  # s is even, so the sign of the cosine drops out
    envelope = envelope * np.exp(1j * dk * spec.x0) / math.sqrt(N)

    chi0 = branch_spinor(spec.k0, params, spec.epsilon)
    basis = branch_basis(params.theta, params.rho, N)
    overlaps = np.einsum("nab,a->nb", basis.conj(), chi0)
    return FourierSpectrum(lattice, params, overlaps * envelope[:, None], closed_form=True)


def _unwrap(peaks: np.ndarray, N: int) -> np.ndarray:
    steps = np.diff(peaks)
    # shortest signed hop on the ring
    half = (N - 1) // 2
    steps = (steps + half) % N - half
    return np.concatenate([[peaks[0]], peaks[0] + np.cumsum(steps)])


def track_packet(
    trajectory: Sequence[StateVector],
    regions: Sequence[tuple[int, int]] | None = None,
) -> PacketDiagnostics:
    """Peak positions, measured group velocity and per-region probabilities.

    ``regions`` are half-open site intervals ``[start, stop)``; the default is
    the whole lattice.  Ties in the argmax go to the smallest site index.
    """
    if len(trajectory) == 0:
        raise ValueError("trajectory is empty")
    N = trajectory[0].lattice.N
    regions = tuple((int(a), int(b)) for a, b in (regions or [(0, N)]))
    dens = np.array([probability_density(s) for s in trajectory])
    peaks = np.argmax(dens, axis=1)
    unwrapped = _unwrap(peaks, N)
    T = len(trajectory) - 1
    velocity = float(unwrapped[-1] - unwrapped[0]) / T if T else 0.0
    region_probs = np.stack([dens[:, a:b].sum(axis=1) for a, b in regions], axis=1)
    return PacketDiagnostics(
        peak_positions=peaks,
        unwrapped_peaks=unwrapped,
        peak_probabilities=dens[np.arange(len(peaks)), peaks],
        measured_group_velocity=velocity,
        region_probabilities=region_probs,
        regions=regions,
        norms=np.sqrt(dens.sum(axis=1)),
    )


def well_regions(lattice: LatticeSpec) -> list[tuple[int, int]]:
    """Left of, inside and right of the square well, in that order."""
    a, b = lattice.N // 4, (3 * lattice.N) // 4
    return [(0, a), (a, b), (b, lattice.N)]
