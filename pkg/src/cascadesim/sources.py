"""Concrete laser-source models.

Three variants: a coherently driven cavity mode, a free-decay mixture of
coherent amplitudes, and a birth-death laser whose carrier number is a
classical counter attached to each trajectory (the quantum register holds
only the photon mode).  The birth-death model has no closed superoperator
form here; its ensemble states come from trajectory averaging.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UnsupportedSourceError
from .hilbert import SOURCE, FockSpec, annihilation, embed
from .liouvillian import CouplingConfig, Superoperator, commutator_terms


@dataclass(frozen=True)
class CoherentDrive:
    """Classical drive of the source mode: H_S = i (eps a^dag - eps* a)."""

    epsilon: complex


@dataclass(frozen=True)
class FreeDecayMixture:
    """Undriven mode prepared in a weighted mixture of coherent amplitudes."""

    initial_amplitudes: tuple  # of (alpha0: complex, weight: float)

    def __post_init__(self):
        weights = [w for _, w in self.initial_amplitudes]
        if any(w < 0 for w in weights):
            raise ValueError("weights must be >= 0")
        if abs(sum(weights) - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1, got {sum(weights)}")


@dataclass(frozen=True)
class BirthDeathLaser:
    """Birth-death pumping: carrier count N fed at pump_rate, converted to
    photons at gain_per_carrier * N per photon-mode quantum, lost at
    nonlasing_rate * N."""

    pump_rate: float
    gain_per_carrier: float
    nonlasing_rate: float
    N0: int
    n0: int

    def __post_init__(self):
        if min(self.pump_rate, self.gain_per_carrier, self.nonlasing_rate) < 0:
            raise ValueError("rates must be >= 0")
        if self.N0 < 0 or self.n0 < 0:
            raise ValueError("initial counts must be >= 0")


@dataclass
class ClassicalPath:
    """Complex amplitude samples alpha(t) on a time grid, with a statistical weight."""

    times: np.ndarray
    alphas: np.ndarray
    weight: float

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.alphas = np.asarray(self.alphas, dtype=complex)
        if self.times.shape != self.alphas.shape:
            raise ValueError("times and alphas must have equal length")
        if self.weight < 0:
            raise ValueError("weight must be >= 0")


@dataclass
class JumpChannel:
    """One trajectory event channel.

    Quantum channels carry an operator (probability dt * <C^dag C>, scaled by
    the carrier count when scales_with_carrier); classical channels carry a
    bare rate and never touch the quantum state.  carrier_delta is the update
    applied to the carrier counter on firing.
    """

    label: str
    operator: np.ndarray | None = None
    rate: float = 0.0
    scales_with_carrier: bool = False
    carrier_delta: int = 0


def steady_amplitude(model: CoherentDrive, config: CouplingConfig) -> complex:
    """Fixed point of d alpha/dt = eps - (gamma_S/2) alpha."""
    return 2.0 * model.epsilon / config.gamma_S


def build_L_S(model, spec: FockSpec) -> Superoperator:
    """Source contribution to the unregrouped master equation (no output damping)."""
    if isinstance(model, FreeDecayMixture):
        return Superoperator([], spec.dim, label="L_S")
    if isinstance(model, CoherentDrive):
        a = embed(annihilation(spec), SOURCE, spec).mat
        H_S = 1j * (model.epsilon * a.conj().T - np.conj(model.epsilon) * a)
        return Superoperator(commutator_terms(H_S), spec.dim, label="L_S")
    raise UnsupportedSourceError(
        f"{type(model).__name__} has no superoperator form; it is trajectory-only"
    )


def source_jump_channels(model, config: CouplingConfig, spec: FockSpec) -> list:
    """Pump / gain / non-lasing channels of the birth-death model."""
    if not isinstance(model, BirthDeathLaser):
        raise UnsupportedSourceError(
            f"source jump channels are only defined for BirthDeathLaser, got {type(model).__name__}"
        )
    a_dag = embed(annihilation(spec), SOURCE, spec).dag().mat
    return [
        JumpChannel("pump", rate=model.pump_rate, carrier_delta=+1),
        JumpChannel(
            "gain",
            operator=np.sqrt(model.gain_per_carrier) * a_dag,
            scales_with_carrier=True,
            carrier_delta=-1,
        ),
        JumpChannel(
            "nonlasing", rate=model.nonlasing_rate, scales_with_carrier=True, carrier_delta=-1
        ),
    ]


def classical_paths(model, config: CouplingConfig, t_grid: np.ndarray,
                    count: int = 1, seed: int | None = None,
                    alpha0: complex | None = None) -> list:
    """Deterministic classical amplitude paths of the model.

    FreeDecayMixture: alpha0 * exp(-gamma_S t / 2) per mixture component.
    CoherentDrive: the single solution of d alpha/dt = eps - (gamma_S/2) alpha
    from alpha(0) = alpha0 (default: the steady amplitude).  count and seed
    are accepted for interface uniformity and ignored for these
    deterministic families.
    """
    del count, seed
    t = np.asarray(t_grid, dtype=float)
    decay = np.exp(-config.gamma_S * t / 2.0)
    if isinstance(model, FreeDecayMixture):
        return [
            ClassicalPath(t, a0 * decay, weight=w) for a0, w in model.initial_amplitudes
        ]
    if isinstance(model, CoherentDrive):
        a_ss = steady_amplitude(model, config)
        if alpha0 is None:
            alpha0 = a_ss
        return [ClassicalPath(t, a_ss + (alpha0 - a_ss) * decay, weight=1.0)]
    raise UnsupportedSourceError(
        f"classical paths are not defined for {type(model).__name__}"
    )


def ring_paths(r0: float, D: float, gamma_S: float, t_grid: np.ndarray,
               count: int, seed: int) -> list:
    """Phase-diffusing ring ensemble: |alpha_t| = r0 exp(-gamma_S t/2), phase a
    Brownian path with variance 2 D dt from a uniform initial phase."""
    if count < 1:
        raise ValueError("count must be >= 1")
    t = np.asarray(t_grid, dtype=float)
    dt = np.diff(t)
    rng = np.random.default_rng(seed)
    radius = r0 * np.exp(-gamma_S * t / 2.0)
    paths = []
    for _ in range(count):
        phi0 = rng.uniform(0.0, 2.0 * np.pi)
        dphi = rng.normal(0.0, np.sqrt(2.0 * D * dt)) if len(dt) else np.array([])
        phi = phi0 + np.concatenate(([0.0], np.cumsum(dphi)))
        paths.append(ClassicalPath(t, radius * np.exp(1j * phi), weight=1.0 / count))
    return paths
