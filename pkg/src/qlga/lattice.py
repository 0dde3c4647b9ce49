r"""Core types and the exact one-step evolution of the one-particle QLGA.

A state lives on a periodic lattice of ``N`` sites.  Each site carries a
two-component spinor ``(psi_minus, psi_plus)`` holding the left- and
right-moving amplitudes, stored as an ``(N, 2)`` complex array.  One time
step is

.. math::

   \psi'(x) = e^{-i\phi(x)}\,\bigl[w_{-1}\psi(x-1) + w_0\psi(x) + w_{+1}\psi(x+1)\bigr]

with the three 2x2 matrices fixed by the two rule angles ``(theta, rho)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import DimensionError, NumericContractError

__all__ = [
    "LatticeSpec",
    "RuleParams",
    "LocalRule",
    "PotentialProfile",
    "Spinor",
    "StateVector",
    "build_rule",
    "verify_unitarity",
    "square_well",
    "basis_state",
    "random_state",
    "step",
    "evolve",
    "probability_density",
    "translate",
]

MINUS, PLUS = 0, 1
STEP_UNITARITY_TOL = 1e-10


@dataclass(frozen=True)
class LatticeSpec:
    """Periodic one-dimensional lattice with ``N`` sites."""

    N: int

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise ValueError(f"lattice needs an integer N >= 2, got {self.N!r}")
        object.__setattr__(self, "N", int(self.N))

    @property
    def sites(self) -> np.ndarray:
        return np.arange(self.N)

    @property
    def wave_numbers(self) -> np.ndarray:
        """Allowed wave numbers ``2*pi*n/N`` for ``n = 0..N-1``."""
        return 2.0 * np.pi * np.arange(self.N) / self.N


@dataclass(frozen=True)
class RuleParams:
    """The two rule angles (radians).  Any finite real is accepted."""

    theta: float
    rho: float

    def __post_init__(self):
        if not (math.isfinite(self.theta) and math.isfinite(self.rho)):
            raise ValueError("rule angles must be finite")

    def canonical(self) -> RuleParams:
        """Both angles wrapped into ``[-pi, pi)`` for reporting."""
        wrap = lambda a: (a + math.pi) % (2.0 * math.pi) - math.pi  # noqa: E731
        return RuleParams(wrap(self.theta), wrap(self.rho))


def _frozen(a, dtype=np.complex128) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class LocalRule:
    """The scattering matrices ``w_minus``, ``w_zero``, ``w_plus``.

    ``w_minus`` acts on the spinor arriving from site ``x - 1`` and
    ``w_plus`` on the one arriving from ``x + 1``.
    """

    w_minus: np.ndarray
    w_zero: np.ndarray
    w_plus: np.ndarray

    def __post_init__(self):
        for name in ("w_minus", "w_zero", "w_plus"):
            m = _frozen(getattr(self, name))
            if m.shape != (2, 2):
                raise ValueError(f"{name} must be 2x2, got shape {m.shape}")
            if not np.all(np.isfinite(m)):
                raise ValueError(f"{name} has non-finite entries")
            object.__setattr__(self, name, m)

    @property
    def matrices(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.w_minus, self.w_zero, self.w_plus

    def scaled(self, factor: complex) -> LocalRule:
        return LocalRule(factor * self.w_minus, factor * self.w_zero, factor * self.w_plus)


@dataclass(frozen=True, eq=False)
class PotentialProfile:
    """Per-site phase ``phi[x]``; site ``x`` picks up ``exp(-1j * phi[x])``."""

    phi: np.ndarray

    def __post_init__(self):
        phi = _frozen(self.phi, dtype=np.float64)
        if phi.ndim != 1:
            raise ValueError("potential must be a 1-D array of phases")
        if not np.all(np.isfinite(phi)):
            raise ValueError("potential phases must be finite")
        object.__setattr__(self, "phi", phi)

    @classmethod
    def zero(cls, lattice: LatticeSpec) -> PotentialProfile:
        return cls(np.zeros(lattice.N))

    @classmethod
    def constant(cls, lattice: LatticeSpec, value: float) -> PotentialProfile:
        return cls(np.full(lattice.N, float(value)))

    @property
    def N(self) -> int:
        return self.phi.shape[0]

    @property
    def site_phases(self) -> np.ndarray:
        return np.exp(-1j * self.phi)


class Spinor(NamedTuple):
    minus: complex
    plus: complex


@dataclass(frozen=True, eq=False)
class StateVector:
    """Amplitudes on every site, shape ``(N, 2)``, columns ``(minus, plus)``.

    The array is read-only; operations return new states.
    """

    lattice: LatticeSpec
    amps: np.ndarray

    def __post_init__(self):
        amps = _frozen(self.amps)
        if amps.shape != (self.lattice.N, 2):
            raise DimensionError(
                f"amplitudes must have shape ({self.lattice.N}, 2), got {amps.shape}"
            )
        if not np.all(np.isfinite(amps)):
            raise ValueError("state amplitudes must be finite")
        object.__setattr__(self, "amps", amps)

    @classmethod
    def from_flat(cls, lattice: LatticeSpec, flat, normalize: bool = False) -> StateVector:
        """Inverse of :meth:`flatten` (index ``2*x + alpha``)."""
        amps = np.asarray(flat, dtype=np.complex128).reshape(lattice.N, 2)
        if normalize:
            amps = amps / np.linalg.norm(amps)
        return cls(lattice, amps)

    def flatten(self) -> np.ndarray:
        return self.amps.reshape(-1).copy()

    def spinor(self, x: int) -> Spinor:
        a = self.amps[x % self.lattice.N]
        return Spinor(complex(a[MINUS]), complex(a[PLUS]))

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def normalized(self) -> StateVector:
        return StateVector(self.lattice, self.amps / self.norm())

    def __mul__(self, factor: complex) -> StateVector:
        return StateVector(self.lattice, self.amps * factor)

    __rmul__ = __mul__


def build_rule(params: RuleParams) -> LocalRule:
    """Scattering matrices of the parity-invariant two-angle rule.

    ``rho = 0`` gives the pure advect-and-rotate rule with ``w_zero = 0``;
    ``rho = pi/2`` leaves only the on-site matrix.
    """
    ct, st = math.cos(params.theta), math.sin(params.theta)
    cr, sr = math.cos(params.rho), math.sin(params.rho)
    w_minus = cr * np.array([[0.0, 1j * st], [0.0, ct]])
    w_plus = cr * np.array([[ct, 0.0], [1j * st, 0.0]])
    w_zero = sr * np.array([[st, -1j * ct], [-1j * ct, st]])
    return LocalRule(w_minus, w_zero, w_plus)


def verify_unitarity(rule: LocalRule) -> float:
    """Largest entry-wise residual of the local unitarity identities.

    Checks ``sum w w^dag = I``, ``w0 wm^dag + wp w0^dag = 0`` and
    ``wp wm^dag = 0`` together with the same identities built from the
    daggered matrices (``w^dag w``), which is what unitarity of the global
    operator requires from both sides.
    """
    wm, w0, wp = rule.matrices
    eye = np.eye(2)
    h = lambda m: m.conj().T  # noqa: E731
    residuals = [
        wm @ h(wm) + w0 @ h(w0) + wp @ h(wp) - eye,
        w0 @ h(wm) + wp @ h(w0),
        wp @ h(wm),
        h(wm) @ wm + h(w0) @ w0 + h(wp) @ wp - eye,
        h(w0) @ wp + h(wm) @ w0,
        h(wm) @ wp,
    ]
    return float(max(np.abs(r).max() for r in residuals))


def square_well(lattice: LatticeSpec, depth: float) -> PotentialProfile:
    """Phase ``depth`` on sites ``floor(N/4) <= x < floor(3N/4)``, zero elsewhere."""
    phi = np.zeros(lattice.N)
    phi[lattice.N // 4 : (3 * lattice.N) // 4] = depth
    return PotentialProfile(phi)


def basis_state(lattice: LatticeSpec, x: int, alpha: int) -> StateVector:
    """The classical state ``|x, alpha>`` with ``alpha`` in ``{-1, +1}``."""
    if alpha not in (-1, 1):
        raise ValueError(f"velocity label must be -1 or +1, got {alpha!r}")
    amps = np.zeros((lattice.N, 2), dtype=np.complex128)
    amps[x % lattice.N, MINUS if alpha == -1 else PLUS] = 1.0
    return StateVector(lattice, amps)


def random_state(lattice: LatticeSpec, rng: np.random.Generator | int | None = None) -> StateVector:
    """Unit-norm state with i.i.d. complex Gaussian amplitudes."""
    rng = np.random.default_rng(rng)
    amps = rng.standard_normal((lattice.N, 2)) + 1j * rng.standard_normal((lattice.N, 2))
    return StateVector(lattice, amps / np.linalg.norm(amps))


def _check_compatible(state: StateVector, potential: PotentialProfile | None) -> PotentialProfile:
    if potential is None:
        return PotentialProfile.zero(state.lattice)
    if potential.N != state.lattice.N:
        raise DimensionError(
            f"potential has {potential.N} sites but the state lives on {state.lattice.N}"
        )
    return potential


def _check_rule(rule: LocalRule) -> None:
    residual = verify_unitarity(rule)
    if residual > STEP_UNITARITY_TOL:
        raise NumericContractError(f"local rule is not unitary (residual {residual:.3e})")


def _apply(amps: np.ndarray, rule: LocalRule, phases: np.ndarray) -> np.ndarray:
    wm, w0, wp = rule.matrices
    # np.roll(a, 1)[x] == a[x - 1]
    out = np.roll(amps, 1, axis=0) @ wm.T
    out += amps @ w0.T
    out += np.roll(amps, -1, axis=0) @ wp.T
    out *= phases[:, None]
    return out


def step(state: StateVector, rule: LocalRule, potential: PotentialProfile | None = None) -> StateVector:
    """Advance ``state`` by one time step.  The result is never renormalized."""
    potential = _check_compatible(state, potential)
    _check_rule(rule)
    return StateVector(state.lattice, _apply(state.amps, rule, potential.site_phases))


def evolve(
    state: StateVector,
    rule: LocalRule,
    potential: PotentialProfile | None = None,
    T: int = 1,
) -> list[StateVector]:
    """Trajectory ``[state, U state, ..., U^T state]`` (length ``T + 1``)."""
    if T < 0:
        raise ValueError(f"step count must be non-negative, got {T}")
    potential = _check_compatible(state, potential)
    _check_rule(rule)
    phases = potential.site_phases
    trajectory = [state]
    amps = state.amps
    for _ in range(T):
        amps = _apply(amps, rule, phases)
        trajectory.append(StateVector(state.lattice, amps))
    return trajectory


def probability_density(state: StateVector) -> np.ndarray:
    """Probability of finding the particle at each site."""
    return np.sum(np.abs(state.amps) ** 2, axis=1)


def translate(state: StateVector, delta: int) -> StateVector:
    """Shifted state with ``psi'(x) = psi(x + delta)``."""
    return StateVector(state.lattice, np.roll(state.amps, -int(delta), axis=0))
