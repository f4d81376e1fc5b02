"""Time integration with exact treatment of the linear background transport.

The pair satisfies

    dt z_plus  = + d3 z_plus  - grad p - (z_minus . grad) z_plus,
    dt z_minus = - d3 z_minus - grad p - (z_plus . grad) z_minus,

so in Fourier space the linear part is the diagonal phase exp(+-i k3 t).
The stepper applies that phase exactly and integrates only the nonlinear
remainder with classical RK4 (Lawson integrating-factor scheme).  With
one species identically zero the other is transported exactly, which the
test suite uses as a solver oracle.  Backward evolution is the same
scheme with a negative time step.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .domain import DomainSpec
from .errors import BlowupDetected, DomainExhaustion
from .spectral import (
    SpectralVectorField,
    advection_from_tensor,
    advection_tensor_hat,
    gradient,
    leray_project,
    pressure_from_advection,
    to_physical,
)
from .state import ElsasserState


@dataclass
class StepperConfig:
    """Step size, safety factor and run horizon.

    The effective step is fixed at run start to
    min(dt, cfl * h_min / (1 + max|z|)) and then rounded so the horizon
    is an integer number of steps; a fixed step keeps runs reproducible
    and time-reversible.
    """

    dt: float
    t_end: float
    cfl: float = 0.5
    direction: str = "forward"
    record_every: int = 1
    blowup_factor: float = 10.0

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if not (0 < self.cfl <= 1):
            raise ValueError("cfl must lie in (0, 1]")
        if self.direction not in ("forward", "backward"):
            raise ValueError(f"bad direction {self.direction!r}")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")

    def plan(self, state: ElsasserState) -> tuple[float, int]:
        """Signed effective step and step count covering [t, t_end]."""
        span = self.t_end - state.t
        if self.direction == "backward" and span > 0:
            raise ValueError("backward run needs t_end <= t0")
        if self.direction == "forward" and span < 0:
            raise ValueError("forward run needs t_end >= t0")
        if span == 0.0:
            return 0.0, 0
        h_min = min(state.domain.h)
        dt_eff = min(self.dt, self.cfl * h_min / (1.0 + state.max_amplitude()))
        nsteps = max(1, int(np.ceil(abs(span) / dt_eff - 1e-12)))
        return span / nsteps, nsteps


class FieldCache:
    """Lazy per-time-slice derived fields, shared by stepper and observers.

    Everything is computed from the state at its current time: physical
    samples, the dealiased advection terms, pressure and the nonlinear
    right-hand sides.  Observers sample the same stage-one quantities the
    stepper consumes, so recording at every step costs no extra FFTs.
    """

    def __init__(self, state: ElsasserState):
        self.state = state
        self.domain: DomainSpec = state.domain

    @cached_property
    def z_plus_phys(self) -> np.ndarray:
        return to_physical(self.state.z_plus)

    @cached_property
    def z_minus_phys(self) -> np.ndarray:
        return to_physical(self.state.z_minus)

    @cached_property
    def max_amplitude(self) -> float:
        mp = np.sqrt(np.max(np.sum(self.z_plus_phys**2, axis=0)))
        mm = np.sqrt(np.max(np.sum(self.z_minus_phys**2, axis=0)))
        return float(max(mp, mm))

    @cached_property
    def _advection(self) -> tuple[np.ndarray, np.ndarray]:
        T = advection_tensor_hat(self.state.z_plus, self.state.z_minus)
        return advection_from_tensor(self.domain, T)

    @property
    def advect_plus_hat(self) -> np.ndarray:
        """Spectral (z_minus . grad) z_plus, dealiased."""
        return self._advection[0]

    @property
    def advect_minus_hat(self) -> np.ndarray:
        """Spectral (z_plus . grad) z_minus, dealiased."""
        return self._advection[1]

    @cached_property
    def pressure_hat(self) -> np.ndarray:
        return pressure_from_advection(self.domain, self.advect_plus_hat)

    @cached_property
    def grad_pressure_hat(self) -> np.ndarray:
        return gradient(self.domain, self.pressure_hat)

    @cached_property
    def nonlinear_rhs(self) -> tuple[np.ndarray, np.ndarray]:
        """(g_plus, g_minus): the full RHS minus the linear transport."""
        gp = -self.grad_pressure_hat - self.advect_plus_hat
        gm = -self.grad_pressure_hat - self.advect_minus_hat
        d = self.domain
        gp = leray_project(SpectralVectorField(d, gp)).c
        gm = leray_project(SpectralVectorField(d, gm)).c
        return gp, gm

    def scattering_integrand_hat(self, species: str) -> np.ndarray:
        """Spectral grad p + (z_other . grad) z_species; minus the RHS above."""
        gp, gm = self.nonlinear_rhs
        return -gp if species == "plus" else -gm


def _nonlinear_pair(domain: DomainSpec, zp_c: np.ndarray, zm_c: np.ndarray):
    """Nonlinear RHS pair for raw coefficient arrays (RK stage values)."""
    zp = SpectralVectorField(domain, zp_c)
    zm = SpectralVectorField(domain, zm_c)
    n_p, n_m = advection_from_tensor(domain, advection_tensor_hat(zp, zm))
    grad_p = gradient(domain, pressure_from_advection(domain, n_p))
    gp = leray_project(SpectralVectorField(domain, -grad_p - n_p)).c
    gm = leray_project(SpectralVectorField(domain, -grad_p - n_m)).c
    return gp, gm


def compute_rhs(s: ElsasserState, cache: FieldCache | None = None):
    """Full right-hand sides (dz_plus, dz_minus) including linear transport."""
    cache = cache if cache is not None else FieldCache(s)
    gp, gm = cache.nonlinear_rhs
    n3 = s.domain.n[2]
    ik3 = (1j * s.domain.kd[2]).reshape(1, 1, 1, n3)
    dzp = ik3 * s.z_plus.c + gp
    dzm = -ik3 * s.z_minus.c + gm
    return (
        SpectralVectorField(s.domain, dzp),
        SpectralVectorField(s.domain, dzm),
    )


def _phases(domain: DomainSpec, dt: float):
    """exp(+-i k3 dt) for the half and full step, Nyquist kept real."""
    k3 = domain.k[2].copy()
    n3 = domain.n[2]
    phase_half = np.exp(1j * k3 * dt / 2.0)
    phase_full = np.exp(1j * k3 * dt)
    if n3 % 2 == 0:
        phase_half[n3 // 2] = np.cos(k3[n3 // 2] * dt / 2.0)
        phase_full[n3 // 2] = np.cos(k3[n3 // 2] * dt)
    shape = (1, 1, 1, n3)
    return phase_half.reshape(shape), phase_full.reshape(shape)


def step(
    s: ElsasserState,
    dt: float,
    first_stage: FieldCache | None = None,
    blowup_cap: float | None = None,
) -> ElsasserState:
    """Advance the state by one (possibly negative) step of IF-RK4.

    Raises DomainExhaustion when tracked packet supports would reach the
    wrap boundary and BlowupDetected when max|z| exceeds the cap.
    """
    guard = s.wrap_guard.translated(dt)
    bad = guard.violations(s.domain.L[2])
    if bad:
        raise DomainExhaustion("; ".join(bad))

    d = s.domain
    eh, ef = _phases(d, dt)
    ehp, efp = eh, ef            # propagators for z_plus: exp(+i k3 dt)
    ehm, efm = np.conj(eh), np.conj(ef)

    cache = first_stage if first_stage is not None else FieldCache(s)
    if blowup_cap is not None and cache.max_amplitude > blowup_cap:
        raise BlowupDetected(
            f"max|z| = {cache.max_amplitude:.3e} exceeded cap {blowup_cap:.3e}"
        )
    ap, am = cache.nonlinear_rhs

    zp0, zm0 = s.z_plus.c, s.z_minus.c
    za_p = ehp * (zp0 + 0.5 * dt * ap)
    za_m = ehm * (zm0 + 0.5 * dt * am)
    bp, bm = _nonlinear_pair(d, za_p, za_m)

    zb_p = ehp * zp0 + 0.5 * dt * bp
    zb_m = ehm * zm0 + 0.5 * dt * bm
    cp, cm = _nonlinear_pair(d, zb_p, zb_m)

    zc_p = efp * zp0 + dt * ehp * cp
    zc_m = efm * zm0 + dt * ehm * cm
    dp, dm = _nonlinear_pair(d, zc_p, zc_m)

    zp1 = efp * zp0 + (dt / 6.0) * (efp * ap + 2.0 * ehp * (bp + cp) + dp)
    zm1 = efm * zm0 + (dt / 6.0) * (efm * am + 2.0 * ehm * (bm + cm) + dm)

    return ElsasserState(
        d,
        s.weights,
        s.t + dt,
        SpectralVectorField(d, zp1),
        SpectralVectorField(d, zm1),
        guard,
    )


def advance(
    s: ElsasserState, cfg: StepperConfig, observers: list | None = None
) -> ElsasserState:
    """Run ``step`` to t_end, notifying observers at record points.

    Observers are read-only: each gets ``sample(cache, step_index)`` at
    t0, every record_every-th step and the final time.  The first RK
    stage of each recorded step is shared with the observers through the
    cache, so per-step recording is cheap.
    """
    observers = observers or []
    dt, nsteps = cfg.plan(s)
    blowup_cap = cfg.blowup_factor * max(s.max_amplitude(), 1e-300)

    cache = FieldCache(s)
    for obs in observers:
        obs.sample(cache, 0, is_final=(nsteps == 0))
    for i in range(nsteps):
        s = step(s, dt, first_stage=cache, blowup_cap=blowup_cap)
        cache = FieldCache(s)
        is_final = i + 1 == nsteps
        if ((i + 1) % cfg.record_every == 0) or is_final:
            for obs in observers:
                obs.sample(cache, i + 1, is_final=is_final)
    return s
