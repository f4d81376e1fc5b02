"""Scattering fields accumulated along characteristic lines.

Lines carrying z_plus are labeled by (x1, x2, u_minus) and sampled at
x3 = u_minus - tau; lines carrying z_minus by (x1, x2, u_plus) with
x3 = u_plus + tau.  The future scattering field is

    z(+inf; x1, x2, u) = z(0, x1, x2, u) - integral_0^inf (grad p +
                         z_other . grad z)(tau, x1, x2, u -/+ tau) dtau,

truncated at the run end; past fields run the same integral to negative
times.  Off-grid x3 samples are exact band-limited evaluations, so for
a one-sided (linear) run the accumulated field reproduces the initial
data to roundoff.  The time integral uses the trapezoid rule on the
record cadence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import DomainSpec, WeightParams, scattering_weight_profile
from .errors import InsufficientHistory
from .spectral import (
    _ik,
    fftn,
    ifftn,
    sample_shifted,
    shift_phase_x3,
)


def _line_shift(species: str, tau: float) -> float:
    """x3 offset of the species' line labeled u at time tau."""
    return -tau if species == "plus" else +tau


@dataclass
class ScatteringField:
    """Vector field on the (x1, x2, u) lattice of one characteristic infinity."""

    domain: DomainSpec
    weights: WeightParams
    species: str
    direction: str  # "future" | "past"
    u: np.ndarray
    values: np.ndarray  # (3, n1, n2, nu) physical samples
    T: float
    tail: float | None = None

    def weighted_norm_sq(self, order: int = 0) -> float:
        return scattering_norm(self, order) ** 2


def lattice_weight(f: ScatteringField) -> np.ndarray:
    return scattering_weight_profile(f.u, f.weights, f.species)


def _lattice_weighted_l2(f: ScatteringField, values: np.ndarray) -> float:
    d = f.domain
    w = lattice_weight(f)
    mag2 = np.sum(values * values, axis=0)
    return float(np.sqrt(d.cell_volume * np.sum(mag2 * w[None, None, :])))


def scattering_norm(f: ScatteringField, order: int = 0) -> float:
    """Weighted L2 norm of the order-k lattice derivatives of the field.

    Derivatives are spectral in the lattice coordinates (x1, x2, u);
    order 0 is the field itself.  Returns the square root of the summed
    squares over all multi-indices of the given order.
    """
    from .diagnostics import multi_indices

    d = f.domain
    if order == 0:
        return _lattice_weighted_l2(f, f.values)
    c = fftn(f.values) / d.npoints
    total_sq = 0.0
    for alpha in multi_indices(order):
        ca = c
        for ax, p in enumerate(alpha):
            if p:
                ca = ca * _ik(d, ax) ** p
        deriv = ifftn(ca * d.npoints).real
        total_sq += _lattice_weighted_l2(f, deriv) ** 2
    return float(np.sqrt(total_sq))


def lattice_divergence_inf(f: ScatteringField) -> float:
    """Max |d1 f1 + d2 f2 + du f3| in the lattice coordinates."""
    d = f.domain
    c = fftn(f.values) / d.npoints
    div = sum(_ik(d, ax) * c[ax] for ax in range(3))
    return float(np.max(np.abs(ifftn(div * d.npoints).real)))


class ScatteringAccumulator:
    """Observer accumulating the nonlinearity along one species' lines.

    Meant to be registered with ``advance``; it snapshots the initial
    slice at the first sample and advances the line integral with the
    trapezoid rule at every subsequent one.  Checkpoint copies of the
    running integral are kept on a coarse time cadence for tail
    estimates.
    """

    def __init__(
        self,
        species: str,
        direction: str = "future",
        checkpoint_dt: float = 1.0,
    ):
        if species not in ("plus", "minus"):
            raise ValueError(f"bad species {species!r}")
        if direction not in ("future", "past"):
            raise ValueError(f"bad direction {direction!r}")
        self.species = species
        self.direction = direction
        self.checkpoint_dt = checkpoint_dt
        self.initial_slice: np.ndarray | None = None
        self.integral: np.ndarray | None = None
        self.checkpoints: list[tuple[float, np.ndarray]] = []
        self.trace_history: list[tuple[float, float]] = []
        self._prev: np.ndarray | None = None
        self._prev_t: float | None = None
        self._t0: float | None = None
        self._domain: DomainSpec | None = None
        self._weights: WeightParams | None = None

    def _integrand(self, cache) -> np.ndarray:
        hat = cache.scattering_integrand_hat(self.species)
        s = _line_shift(self.species, cache.state.t - self._t0)
        d = cache.state.domain
        phase = shift_phase_x3(d, s)
        return ifftn(hat * phase * d.npoints).real

    def sample(self, cache, istep: int, is_final: bool = False) -> None:
        state = cache.state
        if self.initial_slice is None:
            self._t0 = state.t
            self._domain = state.domain
            self._weights = state.weights
            self.initial_slice = sample_shifted(
                state.species(self.species), _line_shift(self.species, 0.0)
            )
            self.integral = np.zeros_like(self.initial_slice)
            self._prev = self._integrand(cache)
            self._prev_t = state.t
            self.checkpoints.append((state.t, self.integral.copy()))
            return
        cur = self._integrand(cache)
        dt = state.t - self._prev_t
        self.integral += 0.5 * dt * (self._prev + cur)
        self._prev = cur
        self._prev_t = state.t
        elapsed = abs(state.t - self.checkpoints[-1][0])
        if elapsed >= self.checkpoint_dt - 1e-12 or is_final:
            self.checkpoints.append((state.t, self.integral.copy()))

    def field(self) -> ScatteringField:
        if self.initial_slice is None:
            raise InsufficientHistory("accumulator never sampled")
        return ScatteringField(
            self._domain,
            self._weights,
            self.species,
            self.direction,
            self._domain.x[2].copy(),
            self.initial_slice - self.integral,
            T=self._prev_t,
        )

    def record_trace_error(self, cache) -> float:
        err = trace_identity_check(self, cache.state)
        self.trace_history.append((cache.state.t, err))
        return err


def accumulate_scattering(acc: ScatteringAccumulator, cache, dt_elapsed=None):
    """Advance the accumulator with the current slice (observer form)."""
    acc.sample(cache, -1)
    return acc


def trace_identity_check(acc: ScatteringAccumulator, s_at_T) -> float:
    """Max lattice mismatch between the integral formula and the solver trace.

    The accumulated initial-data-minus-integral must match the solution
    itself sampled on the moving line x3 = u -/+ (T - t0).
    """
    if acc.initial_slice is None:
        raise InsufficientHistory("accumulator never sampled")
    shift = _line_shift(acc.species, s_at_T.t - acc._t0)
    trace = sample_shifted(s_at_T.species(acc.species), shift)
    lhs = acc.initial_slice - acc.integral
    return float(np.max(np.abs(lhs - trace)))


def convergence_tail(acc: ScatteringAccumulator, window: float) -> float:
    """Weighted-L2 distance between the accumulator at T and at T - window.

    Uses the stored checkpoint closest to T - window; raises
    InsufficientHistory with fewer than two checkpoints.
    """
    if len(acc.checkpoints) < 2:
        raise InsufficientHistory("need at least two recorded checkpoints")
    t_end = acc._prev_t
    run_sign = 1.0 if t_end >= acc._t0 else -1.0
    target = t_end - run_sign * window
    times = np.array([t for t, _ in acc.checkpoints])
    idx = int(np.argmin(np.abs(times - target)))
    _, early = acc.checkpoints[idx]
    diff = acc.integral - early
    f = acc.field()
    return _lattice_weighted_l2(f, diff)
