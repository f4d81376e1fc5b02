"""Weighted energy and flux norms, conserved quantities and decay ratios.

Norm conventions: each species is weighted by the characteristic family
transported with the *other* species,

    E_plus(t)  = integral <u_minus>^(2 omega) |z_plus|^2 dx,
    E_minus(t) = integral <u_plus>^(2 omega)  |z_minus|^2 dx,

and the order-k norms replace z by the vorticities j^(alpha) =
curl d^alpha z summed over all multi-indices |alpha| = k.  Flux norms
accumulate sqrt(2) * integral weight |z|^2 dx1 dx2 dtau along the
characteristic surfaces, one running integral per surface label u, with
the sup over u reported as F(t).  Quadrature is the rectangle rule
native to the uniform grid, spectrally accurate for smooth periodic
integrands.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations_with_replacement

import numpy as np

from .domain import (
    DomainSpec,
    WeightParams,
    energy_weight_profile,
    flux_weight_values,
)
from .spectral import (
    SpectralVectorField,
    curl,
    deriv_scalar,
    gradient,
    sample_shifted,
    scalar_to_physical,
    to_physical,
)
from .state import ElsasserState


def multi_indices(order: int):
    """All 3D multi-indices with |alpha| = order."""
    out = []
    for combo in combinations_with_replacement(range(3), order):
        alpha = [0, 0, 0]
        for ax in combo:
            alpha[ax] += 1
        out.append(tuple(alpha))
    return out


def _derivative(f: SpectralVectorField, alpha: tuple[int, int, int]) -> SpectralVectorField:
    c = f.c
    for ax, p in enumerate(alpha):
        for _ in range(p):
            c = np.stack([deriv_scalar(f.domain, c[i], ax) for i in range(3)])
    return SpectralVectorField(f.domain, c)


def weighted_l2_sq(domain: DomainSpec, values: np.ndarray, w_x3: np.ndarray) -> float:
    """Cell-volume rectangle sum of w(x3) * |values|^2 over the grid."""
    mag2 = np.sum(values * values, axis=0) if values.ndim == 4 else values * values
    return float(domain.cell_volume * np.sum(mag2 * w_x3[None, None, :]))


def energy_norm(
    s: ElsasserState,
    species: str,
    order: int | None = None,
    weights: WeightParams | None = None,
) -> float:
    """Weighted energy norm of one species at the state's current time.

    ``order=None`` gives the base norm on z itself; integer order k sums
    the vorticity norms over all multi-indices of that order.  An
    explicit ``weights`` overrides the state's own position parameter
    (used when re-posing data on a later slice).
    """
    w = weights if weights is not None else s.weights
    profile = energy_weight_profile(s.domain, s.t, w, species)
    z = s.species(species)
    if order is None:
        return weighted_l2_sq(s.domain, to_physical(z), profile)
    total = 0.0
    for alpha in multi_indices(order):
        j_alpha = curl(_derivative(z, alpha))
        total += weighted_l2_sq(s.domain, to_physical(j_alpha), profile)
    return total


def energy_norm_through_order(
    s: ElsasserState,
    species: str,
    kmax: int,
    weights: WeightParams | None = None,
) -> float:
    """Base norm plus all vorticity norms of order <= kmax."""
    total = energy_norm(s, species, None, weights)
    for k in range(kmax + 1):
        total += energy_norm(s, species, k, weights)
    return total


def conserved_quantities(s: ElsasserState) -> tuple[float, float]:
    """Unweighted (energy, cross helicity) via Parseval."""
    V = s.domain.volume
    ep = V * float(np.sum(np.abs(s.z_plus.c) ** 2))
    em = V * float(np.sum(np.abs(s.z_minus.c) ** 2))
    return ep + em, ep - em


def separation_ratio(s: ElsasserState, cache=None) -> float:
    """max |z_plus| |z_minus| * (1 + |t + a|)^omega over the grid."""
    zp = cache.z_plus_phys if cache is not None else to_physical(s.z_plus)
    zm = cache.z_minus_phys if cache is not None else to_physical(s.z_minus)
    prod = np.sqrt(np.sum(zp * zp, axis=0) * np.sum(zm * zm, axis=0))
    w = s.weights
    return float(np.max(prod)) * (1.0 + abs(s.t + w.a)) ** w.omega


def pressure_decay_ratio(s: ElsasserState, cache=None) -> tuple[float, float]:
    """(max|grad p|, max|hess p|) scaled by (1 + |t + a|)^omega."""
    from .solver import FieldCache

    cache = cache if cache is not None else FieldCache(s)
    d = s.domain
    gp_hat = cache.grad_pressure_hat
    gp = np.stack([scalar_to_physical(d, gp_hat[i]) for i in range(3)])
    g1 = float(np.sqrt(np.max(np.sum(gp * gp, axis=0))))
    hess_sq = np.zeros(d.n)
    for i in range(3):
        for j in range(3):
            hij = scalar_to_physical(d, deriv_scalar(d, gp_hat[i], j))
            hess_sq += hij * hij
    g2 = float(np.sqrt(np.max(hess_sq)))
    w = s.weights
    factor = (1.0 + abs(s.t + w.a)) ** w.omega
    return g1 * factor, g2 * factor


@dataclass
class FluxAccumulator:
    """Running flux integrals through one family of characteristic surfaces.

    The lattice of surface labels u defaults to the x3 grid.  Each
    sample advances every per-u integral by the trapezoid rule; values
    are nondecreasing in time since the integrand is nonnegative.
    """

    domain: DomainSpec
    weights: WeightParams
    species: str
    u: np.ndarray = field(default=None)
    per_u: np.ndarray = field(default=None)
    _prev_integrand: np.ndarray = field(default=None, repr=False)
    _last_t: float = field(default=None, repr=False)

    def __post_init__(self):
        if self.u is None:
            self.u = self.domain.x[2].copy()
        if self.per_u is None:
            self.per_u = np.zeros_like(self.u)

    def _integrand(self, s: ElsasserState) -> np.ndarray:
        tau = s.t
        z = s.species(self.species)
        shift = tau if self.species == "plus" else -tau
        g = sample_shifted(z, shift)  # value at x3 = u +- tau per lattice point
        h1, h2, _ = self.domain.h
        mass = h1 * h2 * np.sum(g * g, axis=(0, 1, 2))
        w = flux_weight_values(self.u, tau, self.weights, self.species)
        return np.sqrt(2.0) * w * mass

    def accumulate(self, s: ElsasserState) -> None:
        cur = self._integrand(s)
        if self._last_t is not None:
            dt = s.t - self._last_t
            self.per_u += 0.5 * dt * (self._prev_integrand + cur)
        self._prev_integrand = cur
        self._last_t = s.t

    def sup(self) -> float:
        return float(np.max(self.per_u))


def flux_accumulate(acc: FluxAccumulator, s: ElsasserState, dt_elapsed=None) -> FluxAccumulator:
    """Advance the accumulator with the state's current slice."""
    acc.accumulate(s)
    return acc


@dataclass
class DivCurlCheck:
    lhs: float
    rhs: float
    rhs_curl: float
    rhs_zero: float

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs if self.rhs > 0 else 0.0


def divcurl_check(f: SpectralVectorField, lam: np.ndarray) -> DivCurlCheck:
    """Both sides of the weighted gradient-vs-curl inequality.

    For divergence-free v: ||sqrt(lam) grad v||^2 <= C (||sqrt(lam)
    curl v||^2 + ||sqrt(lam) v||^2).  ``lam`` is a physical weight
    broadcastable to the grid.  With lam = 1 and solenoidal v the
    gradient and curl terms agree identically (Fourier identity).
    """
    d = f.domain
    lam = np.asarray(lam, dtype=float)
    dV = d.cell_volume
    lhs = 0.0
    for i in range(3):
        g = gradient(d, f.c[i])
        gp = np.stack([scalar_to_physical(d, g[ax]) for ax in range(3)])
        lhs += dV * float(np.sum(lam * np.sum(gp * gp, axis=0)))
    cr = to_physical(curl(f))
    rhs_curl = dV * float(np.sum(lam * np.sum(cr * cr, axis=0)))
    v = to_physical(f)
    rhs_zero = dV * float(np.sum(lam * np.sum(v * v, axis=0)))
    return DivCurlCheck(lhs, rhs_curl + rhs_zero, rhs_curl, rhs_zero)


def sobolev_check(s: ElsasserState, species: str) -> float:
    """Ratio of the weighted sup-norm square to the weighted H1-type sum.

    lhs = max |<u>^omega z|^2; rhs = ||<u>^omega z||^2 plus the weighted
    vorticity norms of order <= 1.  Both sides are quadratic in the
    field, so the ratio is amplitude-invariant.
    """
    profile = energy_weight_profile(s.domain, s.t, s.weights, species)
    z = to_physical(s.species(species))
    half = np.sqrt(profile)[None, None, :]
    lhs = float(np.max(np.sum(z * z, axis=0) * half**2))
    rhs = energy_norm(s, species, None)
    rhs += energy_norm(s, species, 0)
    rhs += energy_norm(s, species, 1)
    return lhs / rhs if rhs > 0 else 0.0


NORM_COLUMNS_FIXED = ["t", "E_plus", "E_minus"]
NORM_COLUMNS_TAIL = [
    "F_plus",
    "F_minus",
    "energy",
    "cross_helicity",
    "sep_ratio",
    "p1_ratio",
    "p2_ratio",
]


def norm_columns(kmax: int) -> list[str]:
    cols = list(NORM_COLUMNS_FIXED)
    for k in range(kmax + 1):
        cols += [f"E{k}_plus", f"E{k}_minus"]
    return cols + list(NORM_COLUMNS_TAIL)


@dataclass
class NormSeries:
    """Time-indexed record of all diagnostics, one row per sample."""

    kmax: int
    rows: list[dict] = field(default_factory=list)

    @property
    def columns(self) -> list[str]:
        return norm_columns(self.kmax)

    def append(self, row: dict) -> None:
        self.rows.append(row)

    def values(self, column: str) -> np.ndarray:
        return np.array([r[column] for r in self.rows])

    def sup(self, column: str) -> float:
        return float(np.max(self.values(column))) if self.rows else 0.0

    def combined(self, row: dict) -> float:
        """E + F + sum of order-k norms, both species, for one row."""
        total = row["E_plus"] + row["E_minus"] + row["F_plus"] + row["F_minus"]
        for k in range(self.kmax + 1):
            total += row[f"E{k}_plus"] + row[f"E{k}_minus"]
        return total

    def sup_combined(self) -> float:
        return max(self.combined(r) for r in self.rows)


class DiagnosticsRecorder:
    """Observer computing a full NormSeries row every ``every`` records."""

    def __init__(
        self,
        kmax: int = 2,
        every: int = 10,
        flux_plus: FluxAccumulator | None = None,
        flux_minus: FluxAccumulator | None = None,
    ):
        self.series = NormSeries(kmax)
        self.every = max(1, every)
        self.flux_plus = flux_plus
        self.flux_minus = flux_minus
        self._count = 0

    def sample(self, cache, istep: int, is_final: bool = False) -> None:
        if self.flux_plus is not None:
            self.flux_plus.accumulate(cache.state)
        if self.flux_minus is not None:
            self.flux_minus.accumulate(cache.state)
        take = (self._count % self.every == 0) or is_final
        self._count += 1
        if not take:
            return
        s = cache.state
        row = {"t": s.t}
        row["E_plus"] = energy_norm(s, "plus")
        row["E_minus"] = energy_norm(s, "minus")
        for k in range(self.series.kmax + 1):
            row[f"E{k}_plus"] = energy_norm(s, "plus", k)
            row[f"E{k}_minus"] = energy_norm(s, "minus", k)
        row["F_plus"] = self.flux_plus.sup() if self.flux_plus else 0.0
        row["F_minus"] = self.flux_minus.sup() if self.flux_minus else 0.0
        row["energy"], row["cross_helicity"] = conserved_quantities(s)
        row["sep_ratio"] = separation_ratio(s, cache)
        p1, p2 = pressure_decay_ratio(s, cache)
        row["p1_ratio"] = p1
        row["p2_ratio"] = p2
        # unscaled pressure-gradient sup, kept out of the CSV columns
        factor = (1.0 + abs(s.t + s.weights.a)) ** s.weights.omega
        row["p1_raw"] = p1 / factor
        self.series.append(row)


class DivergenceWatch:
    """Observer recording the max solenoidality residual over a run."""

    def __init__(self):
        self.max_div = 0.0

    def sample(self, cache, istep: int, is_final: bool = False) -> None:
        from .spectral import divergence_inf_norm

        s = cache.state
        for name in ("plus", "minus"):
            self.max_div = max(self.max_div, divergence_inf_norm(s.species(name)))
