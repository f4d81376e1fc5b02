"""The evolving solution state and reproducible initial-data generators.

The solver evolves the perturbation pair (z_plus, z_minus) around the
uniform background magnetic field B0 = (0, 0, 1); the background itself
never appears in the state, only in the physical reconstruction
v = (z_plus + z_minus)/2, b = (z_plus - z_minus)/2 + B0.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .domain import (
    DomainSpec,
    WeightParams,
    gaussian_support_halfwidth,
)
from .errors import MarginViolation
from .spectral import (
    RealVectorField,
    SpectralVectorField,
    curl,
    dealias,
    divergence_inf_norm,
    hermitian_error,
    leray_project,
    max_abs,
    scalar_to_physical,
    solve_pressure,
    to_physical,
    transform,
)

B0 = np.array([0.0, 0.0, 1.0])

# packets ride x3 = const -/+ t: plus moves toward -x3, minus toward +x3
SPECIES_VELOCITY = {"plus": -1.0, "minus": +1.0}


@dataclass
class SupportInterval:
    """Unwrapped x3 extent [lo, hi] of one species' data, moved in time."""

    lo: float
    hi: float

    def translated(self, dt: float, species: str) -> "SupportInterval":
        v = SPECIES_VELOCITY[species]
        return SupportInterval(self.lo + v * dt, self.hi + v * dt)

    def union(self, other: "SupportInterval") -> "SupportInterval":
        return SupportInterval(min(self.lo, other.lo), max(self.hi, other.hi))

    def inside(self, L3: float) -> bool:
        return self.lo > -L3 / 2 and self.hi < L3 / 2


@dataclass
class WrapGuard:
    """Support tracking that forbids silent periodic wraparound.

    ``supports`` maps species name to its x3 support interval, or None
    when no support is tracked for that species (box-filling data).
    """

    supports: dict = field(default_factory=dict)

    def translated(self, dt: float) -> "WrapGuard":
        out = {}
        for species, iv in self.supports.items():
            out[species] = None if iv is None else iv.translated(dt, species)
        return WrapGuard(out)

    def violations(self, L3: float) -> list[str]:
        bad = []
        for species, iv in self.supports.items():
            if iv is not None and not iv.inside(L3):
                bad.append(
                    f"species {species} support [{iv.lo:.3f}, {iv.hi:.3f}] "
                    f"reached the wrap boundary +-{L3 / 2:.3f}"
                )
        return bad

    def merged_with(self, species: str, iv: SupportInterval) -> "WrapGuard":
        out = dict(self.supports)
        cur = out.get(species)
        out[species] = iv if cur is None else cur.union(iv)
        return WrapGuard(out)

    def separation_gap(self) -> float | None:
        """Signed x3 gap between the two tracked supports (None if untracked)."""
        p = self.supports.get("plus")
        m = self.supports.get("minus")
        if p is None or m is None:
            return None
        if p.lo > m.hi:
            return p.lo - m.hi
        if m.lo > p.hi:
            return m.lo - p.hi
        return -min(p.hi - m.lo, m.hi - p.lo)


@dataclass
class ElsasserState:
    """The pair (z_plus, z_minus) at time t with position parameter a."""

    domain: DomainSpec
    weights: WeightParams
    t: float
    z_plus: SpectralVectorField
    z_minus: SpectralVectorField
    wrap_guard: WrapGuard = field(default_factory=WrapGuard)

    @property
    def a(self) -> float:
        return self.weights.a

    def copy(self) -> "ElsasserState":
        return ElsasserState(
            self.domain,
            self.weights,
            self.t,
            self.z_plus.copy(),
            self.z_minus.copy(),
            WrapGuard(dict(self.wrap_guard.supports)),
        )

    def species(self, name: str) -> SpectralVectorField:
        if name == "plus":
            return self.z_plus
        if name == "minus":
            return self.z_minus
        raise ValueError(f"unknown species {name!r}")

    def max_amplitude(self) -> float:
        return max(max_abs(self.z_plus), max_abs(self.z_minus))

    def validate(self, div_tol: float = 1e-12, herm_tol: float = 1e-12) -> None:
        for name in ("plus", "minus"):
            z = self.species(name)
            if not np.all(np.isfinite(z.c)):
                raise ValueError(f"z_{name} has non-finite coefficients")
            scale = max(1.0, float(np.max(np.abs(z.c))))
            dmax = divergence_inf_norm(z)
            if dmax > div_tol * max(1.0, scale * 10.0):
                raise ValueError(f"z_{name} divergence {dmax:.3e} > {div_tol:.1e}")
            if hermitian_error(z) > herm_tol * scale:
                raise ValueError(f"z_{name} breaks Hermitian symmetry")

    def reposed(self, new_a: float) -> "ElsasserState":
        """Treat the current slice as initial data with position parameter new_a.

        Time restarts at 0; the weights keep t + a invariant when
        new_a = old t + old a, so norms computed before and after
        re-posing agree.
        """
        return replace(self, t=0.0, weights=self.weights.shifted(new_a))

    @classmethod
    def zero(
        cls, domain: DomainSpec, weights: WeightParams | None = None, t: float = 0.0
    ) -> "ElsasserState":
        w = weights if weights is not None else WeightParams()
        return cls(
            domain,
            w,
            t,
            SpectralVectorField.zeros(domain),
            SpectralVectorField.zeros(domain),
        )


@dataclass
class PhysicalReconstruction:
    """Velocity, magnetic field (background included) and pressure."""

    v: RealVectorField
    b: RealVectorField
    p: np.ndarray  # physical scalar samples


def make_wave_packet(
    domain: DomainSpec,
    center: tuple[float, float, float],
    widths: tuple[float, float, float],
    amplitude: float,
    species: str,
    polarization_seed: int = 0,
    run_distance: float = 0.0,
) -> tuple[SpectralVectorField, SupportInterval]:
    """Divergence-free Gaussian wave packet for one species.

    Built as the curl of a Gaussian-enveloped vector potential, then
    dealiased and rescaled so max|z| equals ``amplitude`` exactly.
    Raises MarginViolation when the x3 support (at the 1e-14 envelope
    level) plus the planned run distance does not fit inside the box.
    ``run_distance`` is signed: negative values describe backward runs,
    which move each species the opposite way.
    """
    if species not in SPECIES_VELOCITY:
        raise ValueError(f"unknown species {species!r}")
    sig1, sig2, sig3 = widths
    c1, c2, c3 = center
    L3 = domain.L[2]

    r3 = gaussian_support_halfwidth(sig3)
    support = SupportInterval(c3 - r3, c3 + r3)
    moved = support.translated(run_distance, species)
    for name, iv in (("initial", support), ("final", moved)):
        if not iv.inside(L3):
            raise MarginViolation(
                f"{species} packet at x3={c3} with width {sig3}: {name} support "
                f"[{iv.lo:.2f}, {iv.hi:.2f}] plus run distance {run_distance} "
                f"exceeds +-L3/2 = {L3 / 2:.2f}"
            )

    if amplitude == 0.0:
        return SpectralVectorField.zeros(domain), support

    x1, x2, x3 = domain.x
    env = (
        np.exp(-0.5 * ((x1 - c1) / sig1) ** 2)[:, None, None]
        * np.exp(-0.5 * ((x2 - c2) / sig2) ** 2)[None, :, None]
        * np.exp(-0.5 * ((x3 - c3) / sig3) ** 2)[None, None, :]
    )

    rng = np.random.default_rng(polarization_seed)
    e = rng.normal(size=3)
    e /= np.linalg.norm(e)

    potential = RealVectorField(domain, np.stack([env * ei for ei in e]))
    z = dealias(curl(transform(potential)))
    peak = max_abs(z)
    if peak == 0.0:
        raise ValueError("degenerate packet: curl of the potential vanished")
    z.c *= amplitude / peak
    return z, support


def make_random_solenoidal(
    domain: DomainSpec,
    spectrum_slope: float,
    seed: int,
    species: str = "plus",
    amplitude: float = 1.0,
    band: tuple[float, float] | None = None,
) -> SpectralVectorField:
    """Reproducible divergence-free random field with a power-law spectrum.

    The shell-integrated energy spectrum follows k**spectrum_slope inside
    ``band`` (defaults to the interior of the dealiased range); outside
    the band the field is zero.  Identical seeds give bit-identical
    fields.
    """
    if species not in SPECIES_VELOCITY:
        raise ValueError(f"unknown species {species!r}")
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(size=(3,) + domain.n)
    f = transform(RealVectorField(domain, noise))

    kmag = np.sqrt(domain.ksq)
    if band is None:
        dk = 2 * np.pi * max(1.0 / Li for Li in domain.L)
        kmax_masked = min(
            2 * np.pi * (ni // 3) / Li for ni, Li in zip(domain.n, domain.L)
        )
        band = (2.5 * dk, 0.85 * kmax_masked)
    lo, hi = band
    with np.errstate(divide="ignore"):
        shape = np.where(
            (kmag >= lo) & (kmag <= hi),
            kmag ** ((spectrum_slope - 2.0) / 2.0),
            0.0,
        )
    shape[~np.isfinite(shape)] = 0.0
    f = SpectralVectorField(domain, f.c * shape)
    f = dealias(leray_project(f))
    peak = max_abs(f)
    if peak > 0:
        f.c *= amplitude / peak
    return f


def energy_spectrum(f: SpectralVectorField, nbins: int | None = None):
    """Shell-integrated spectrum (k_centers, E(k)); oracle for the slope fit."""
    d = f.domain
    kmag = np.sqrt(d.ksq)
    dk = 2 * np.pi * max(1.0 / Li for Li in d.L)
    kmax = float(np.max(kmag))
    if nbins is None:
        nbins = int(kmax / dk)
    edges = dk * np.arange(nbins + 1)
    power = np.sum(np.abs(f.c) ** 2, axis=0) * d.volume
    which = np.digitize(kmag.ravel(), edges) - 1
    ek = np.zeros(nbins)
    for b in range(nbins):
        ek[b] = power.ravel()[which == b].sum()
    centers = 0.5 * (edges[:-1] + edges[1:])
    return centers, ek / dk


def reconstruct_physical(s: ElsasserState) -> PhysicalReconstruction:
    """Recover (v, b, p) from the Elsasser pair; b includes the background."""
    zp = to_physical(s.z_plus)
    zm = to_physical(s.z_minus)
    v = 0.5 * (zp + zm)
    b = 0.5 * (zp - zm) + B0[:, None, None, None]
    p_hat = solve_pressure(s.z_plus, s.z_minus)
    p = scalar_to_physical(s.domain, p_hat)
    return PhysicalReconstruction(
        RealVectorField(s.domain, v), RealVectorField(s.domain, b), p
    )


def state_from_packets(
    domain: DomainSpec,
    weights: WeightParams,
    packets: list[dict],
    run_distance: float = 0.0,
) -> ElsasserState:
    """Assemble an initial state from packet descriptors.

    Each descriptor carries species, center, widths, amplitude and
    polarization_seed, mirroring the experiment-config schema.
    """
    state = ElsasserState.zero(domain, weights)
    guard = WrapGuard({})
    for pk in packets:
        z, support = make_wave_packet(
            domain,
            tuple(pk["center"]),
            tuple(pk["widths"]),
            float(pk["amplitude"]),
            pk["species"],
            polarization_seed=int(pk.get("polarization_seed", 0)),
            run_distance=run_distance,
        )
        if pk["species"] == "plus":
            state.z_plus.c += z.c
        else:
            state.z_minus.c += z.c
        if float(pk["amplitude"]) != 0.0:
            guard = guard.merged_with(pk["species"], support)
    state.wrap_guard = guard
    return state
