"""Coherent-state disentanglement ansatz.

The target qubit is solved along each classical source path under a
classical-field drive, and the joint state is reassembled as a weighted
mixture of coherent-projector (x) conditional-target products for comparison
with the full cascaded master-equation solution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, GridMismatchError
from .hilbert import COMPOSITE, DensityOperator, FockSpec, Operator, coherent_state, qubit_lowering
from .liouvillian import CouplingConfig
from .sources import ClassicalPath

_B = qubit_lowering().mat
_BD = _B.conj().T
_NB = _BD @ _B


def drive_hamiltonian(alpha: complex, config: CouplingConfig) -> Operator:
    """Classical-field drive i sqrt(gS gTf) (alpha* b - alpha b^dag), a 2x2 operator."""
    g = np.sqrt(config.gamma_S * config.gamma_Tf)
    return Operator(1j * g * (np.conj(alpha) * _B - alpha * _BD), label="H_drive")


@dataclass
class ConditionalTargetState:
    """2x2 conditional states rho_{T|alpha}(t) along one classical path."""

    times: np.ndarray
    rhos: np.ndarray  # (n_times, 2, 2)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.rhos = np.asarray(self.rhos, dtype=complex)
        if self.rhos.shape != (len(self.times), 2, 2):
            raise DimensionMismatchError(f"rhos shape {self.rhos.shape}")


def _target_rhs(rho: np.ndarray, alpha: complex, config: CouplingConfig) -> np.ndarray:
    """d rho_T/dt: qubit damping at gamma_T, detuning, and the classical drive."""
    g = np.sqrt(config.gamma_S * config.gamma_Tf)
    H = config.delta * _NB + 1j * g * (np.conj(alpha) * _B - alpha * _BD)
    out = -1j * (H @ rho - rho @ H)
    gt = config.gamma_T
    out += gt * (_B @ rho @ _BD) - 0.5 * gt * (_NB @ rho + rho @ _NB)
    return out


def solve_separated_target(path: ClassicalPath, config: CouplingConfig,
                           rhoT0: np.ndarray) -> ConditionalTargetState:
    """RK4 integration of the separated target equation along one path.

    alpha(t) is interpolated piecewise-linearly between the path samples, so
    both sides of any ansatz-vs-full comparison see identical drives.
    """
    rho = np.asarray(rhoT0, dtype=complex)
    if rho.shape != (2, 2):
        raise DimensionMismatchError(f"initial target state must be 2x2, got {rho.shape}")
    if abs(np.trace(rho) - 1.0) > 1e-10:
        raise ValueError("initial target state must have unit trace")
    t = path.times
    alphas = path.alphas
    out = np.empty((len(t), 2, 2), dtype=complex)
    out[0] = rho
    for i in range(len(t) - 1):
        dt = t[i + 1] - t[i]
        a0, a1 = alphas[i], alphas[i + 1]
        a_mid = 0.5 * (a0 + a1)
        k1 = _target_rhs(rho, a0, config)
        k2 = _target_rhs(rho + 0.5 * dt * k1, a_mid, config)
        k3 = _target_rhs(rho + 0.5 * dt * k2, a_mid, config)
        k4 = _target_rhs(rho + dt * k3, a1, config)
        rho = rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[i + 1] = rho
    return ConditionalTargetState(times=t, rhos=out)


def build_ansatz_state(paths: list, conditionals: list, t_index: int,
                       fock: FockSpec) -> DensityOperator:
    """Weighted mixture sum_m w_m |alpha_m(t)><alpha_m(t)| (x) rho_{T|m}(t)."""
    if len(paths) != len(conditionals):
        raise GridMismatchError("paths and conditionals must align one-to-one")
    total_w = sum(p.weight for p in paths)
    if abs(total_w - 1.0) > 1e-10:
        raise ValueError(f"path weights must sum to 1, got {total_w}")
    dim = fock.dim
    acc = np.zeros((dim, dim), dtype=complex)
    for path, cond in zip(paths, conditionals):
        if path.times.shape != cond.times.shape or not np.allclose(path.times, cond.times):
            raise GridMismatchError("path and conditional grids differ")
        src = coherent_state(path.alphas[t_index], fock).projector()
        acc += path.weight * np.kron(src, cond.rhos[t_index])
    return DensityOperator(acc, layout=COMPOSITE)


def compare_to_full(ansatz_rhos: list, full_rhos: list) -> dict:
    """Per-time trace distance and max element deviation between the two solutions."""
    if len(ansatz_rhos) != len(full_rhos):
        raise GridMismatchError("state lists have different lengths")
    from .analysis import trace_distance

    td, dev = [], []
    for ra, rf in zip(ansatz_rhos, full_rhos):
        if ra.dim != rf.dim:
            raise DimensionMismatchError(f"dims {ra.dim} and {rf.dim}")
        td.append(trace_distance(ra, rf))
        dev.append(float(np.max(np.abs(ra.mat - rf.mat))))
    return {"trace_distance": np.array(td), "max_abs_deviation": np.array(dev)}
