"""Outcome-resolved measurement maps for the dissipatively probed field mode.

The pointer is a two-level atom that exchanges excitation with the field
while it relaxes and dephases.  Once the fast atomic coherences are slaved
to the populations (decoherence rate much larger than the coupling), the two
outcome-resolved maps M_g, M_e on the field obey the linear block system

    d/dt M_g = G_gg . M_g + G_ge . M_e
    d/dt M_e = G_eg . M_g + G_ee . M_e

with superoperator composition on the right.  Both pointer preparations
evolve under the same blocks; only the initial pair differs, (Id, 0) for a
ground-state pointer and (0, Id) for an excited one.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .fock import TruncationMode
from .superop import (
    apply_superop,
    identity_superop,
    su11_generators,
    superop_dim,
    unvec,
    vec,
    zero_superop,
)

__all__ = [
    "DivergenceError",
    "PositivityError",
    "Preparation",
    "ModelParams",
    "InstrumentBranch",
    "P_FLOOR",
    "build_block_generator",
    "integrate_instrument",
    "conditional_trajectories",
    "conditional_state",
    "unconditional_state",
]

P_FLOOR = 1e-12


class DivergenceError(RuntimeError):
    """Integration produced non-finite values or lost the conserved trace."""

    def __init__(self, t: float, detail: str = "non-finite values"):
        self.t = t
        super().__init__(f"integration diverged at t={t:.6g}: {detail}")


class PositivityError(RuntimeError):
    """An outcome probability came out significantly negative."""


class Preparation(Enum):
    GROUND = "ground"
    EXCITED = "excited"


@dataclass(frozen=True)
class ModelParams:
    """Physical rates of the atom-field model.

    omega is the coupling strength, delta the detuning, gamma_big the atomic
    decoherence rate and gamma_ge / gamma_eg the upward / downward population
    relaxation rates.  gamma_big may not fall below (gamma_ge + gamma_eg) / 2,
    the decoherence floor set by population relaxation alone.
    """

    omega: float
    delta: float
    gamma_big: float
    gamma_ge: float
    gamma_eg: float

    def __post_init__(self):
        for name in ("omega", "gamma_big", "gamma_ge", "gamma_eg"):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be a finite nonnegative rate, got {value}")
        if not np.isfinite(self.delta):
            raise ValueError(f"delta must be finite, got {self.delta}")
        if self.gamma_big < 0.5 * (self.gamma_ge + self.gamma_eg):
            raise ValueError(
                "gamma_big must be at least (gamma_ge + gamma_eg)/2, got "
                f"{self.gamma_big} < {0.5 * (self.gamma_ge + self.gamma_eg)}"
            )
        if self.gamma_big == 0 and self.delta == 0:
            raise ValueError("gamma_big and delta may not both vanish")

    @property
    def kappa(self) -> float:
        """Dimensionless saturation parameter |omega|^2 / (gamma_big^2 + delta^2)."""
        return self.omega**2 / (self.gamma_big**2 + self.delta**2)

    @property
    def alpha(self) -> float:
        """kappa * gamma_big, the conventional rate combination."""
        return self.kappa * self.gamma_big

    @property
    def field_rate(self) -> float:
        """Rate of the slaved field channel, 2 * kappa * gamma_big.

        This is the coefficient the block generator actually carries on the
        ladder sandwiches; eliminating the atomic coherence against a decay
        rate gamma_big leaves 2 |omega|^2 gamma_big / (gamma_big^2 + delta^2)
        on the jump terms, twice the alpha combination.
        """
        return 2.0 * self.kappa * self.gamma_big


@dataclass(frozen=True)
class InstrumentBranch:
    """Time series of the outcome maps for one pointer preparation.

    m_g[k] and m_e[k] are the d^2 x d^2 superoperator matrices taking the
    initial field state to the unnormalized conditional state for ground /
    excited readout at times[k].
    """

    prep: Preparation
    times: np.ndarray
    m_g: np.ndarray
    m_e: np.ndarray

    @property
    def dim(self) -> int:
        return superop_dim(self.m_g[0])


def build_block_generator(
    p: ModelParams, d: int, mode: TruncationMode = TruncationMode.ALGEBRAIC_CLOSURE
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Blocks (G_gg, G_ge, G_eg, G_ee) of the outcome-resolved generator.

    With r = 2 * kappa * gamma_big and the ladder superoperators K0, K+, K-
    and the number commutator N:

        G_gg = -(r K0 + beta + gamma_ge Id)     G_ge = r K+ + gamma_eg Id
        G_eg = r K- + gamma_ge Id               G_ee = -(r K0 - beta + gamma_eg Id)

    where beta = -kappa (i delta N + gamma_big Id) carries the detuning
    rotation (opposite sense on the two branches) plus the constant offset
    that makes the pair exactly trace-conserving away from the cutoff.
    """
    if d < 1:
        raise ValueError(f"dimension must be a positive integer, got {d}")
    k0, kplus, kminus, n_comm = su11_generators(d, mode)
    ident = identity_superop(d)
    rate = p.field_rate
    beta = -p.kappa * (1j * p.delta * n_comm + p.gamma_big * ident)
    g_gg = -(rate * k0 + beta + p.gamma_ge * ident)
    g_ge = rate * kplus + p.gamma_eg * ident
    g_eg = rate * kminus + p.gamma_ge * ident
    g_ee = -(rate * k0 - beta + p.gamma_eg * ident)
    return g_gg, g_ge, g_eg, g_ee


def _combined_generator(p: ModelParams, d: int, mode: TruncationMode) -> np.ndarray:
    g_gg, g_ge, g_eg, g_ee = build_block_generator(p, d, mode)
    return np.block([[g_gg, g_ge], [g_eg, g_ee]])


def _n_steps(t_max: float, dt: float) -> int:
    if not (dt > 0 and t_max > 0 and dt <= t_max):
        raise ValueError(f"need 0 < dt <= t_max, got dt={dt}, t_max={t_max}")
    return int(round(t_max / dt))


def _rk4_sampled(matrix: np.ndarray, state0: np.ndarray, n_steps: int, dt: float, stride: int):
    """Fixed-step RK4 on d/dt y = matrix @ y, sampling every `stride` steps.

    The final step is always included.  Returns (times, samples).
    """
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    state = state0.astype(complex)
    times = [0.0]
    samples = [state.copy()]
    for k in range(1, n_steps + 1):
        k1 = matrix @ state
        k2 = matrix @ (state + (0.5 * dt) * k1)
        k3 = matrix @ (state + (0.5 * dt) * k2)
        k4 = matrix @ (state + dt * k3)
        state = state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if k % stride == 0 or k == n_steps:
            if not np.all(np.isfinite(state.view(float))):
                raise DivergenceError(k * dt)
            times.append(k * dt)
            samples.append(state.copy())
    return np.array(times), np.stack(samples)


def integrate_instrument(
    p: ModelParams,
    d: int,
    prep: Preparation,
    t_max: float,
    dt: float,
    mode: TruncationMode = TruncationMode.ALGEBRAIC_CLOSURE,
    stride: int = 1,
) -> InstrumentBranch:
    """Integrate the outcome maps from the identity/zero initial pair.

    Classical fixed-step RK4; deterministic for fixed inputs.  t_max is
    rounded to a whole number of steps of size dt.
    """
    n_steps = _n_steps(t_max, dt)
    matrix = _combined_generator(p, d, mode)
    if prep is Preparation.GROUND:
        state0 = np.vstack([identity_superop(d), zero_superop(d)])
    else:
        state0 = np.vstack([zero_superop(d), identity_superop(d)])
    times, samples = _rk4_sampled(matrix, state0, n_steps, dt, stride)
    return InstrumentBranch(prep=prep, times=times, m_g=samples[:, : d * d], m_e=samples[:, d * d :])


def conditional_trajectories(
    p: ModelParams,
    d: int,
    prep: Preparation,
    rho_f: np.ndarray,
    t_max: float,
    dt: float,
    mode: TruncationMode = TruncationMode.ALGEBRAIC_CLOSURE,
    stride: int = 1,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Unnormalized conditional states (M_g rho, M_e rho) along the run.

    Same dynamics as :func:`integrate_instrument` applied to a fixed initial
    field state, propagating d x d matrices instead of full maps.  Returns
    (times, y_g, y_e) with y_* of shape (T, d, d).
    """
    rho_f = np.asarray(rho_f, dtype=complex)
    if rho_f.shape != (d, d):
        raise ValueError(f"initial state shape {rho_f.shape} does not match d={d}")
    n_steps = _n_steps(t_max, dt)
    matrix = _combined_generator(p, d, mode)
    if prep is Preparation.GROUND:
        state0 = np.concatenate([vec(rho_f), np.zeros(d * d, dtype=complex)])
    else:
        state0 = np.concatenate([np.zeros(d * d, dtype=complex), vec(rho_f)])
    times, samples = _rk4_sampled(matrix, state0, n_steps, dt, stride)
    y_g = samples[:, : d * d].reshape(-1, d, d).transpose(0, 2, 1)
    y_e = samples[:, d * d :].reshape(-1, d, d).transpose(0, 2, 1)
    return times, y_g, y_e


def conditional_state(
    m_r: np.ndarray, rho_f: np.ndarray, p_floor: float = P_FLOOR
) -> tuple[np.ndarray | None, float]:
    """Conditional post-measurement state and outcome probability.

    Returns (rho_r, p_r).  When p_r does not exceed p_floor the outcome is
    reported with rho_r = None rather than amplifying noise by normalizing.
    """
    y = apply_superop(m_r, rho_f)
    p = complex(np.trace(y))
    if abs(p.imag) >= 1e-10:
        raise PositivityError(f"outcome probability has imaginary part {p.imag:.3e}")
    p_r = p.real
    if p_r < -1e-8:
        raise PositivityError(f"outcome probability {p_r:.3e} is significantly negative")
    p_r = max(p_r, 0.0)
    if p_r <= p_floor:
        return None, p_r
    rho_r = 0.5 * (y + y.conj().T) / p_r
    return rho_r, p_r


def unconditional_state(m_g: np.ndarray, m_e: np.ndarray, rho_f: np.ndarray) -> np.ndarray:
    """Nonselective post-measurement state, the sum over both outcomes."""
    return apply_superop(m_g + m_e, rho_f)
