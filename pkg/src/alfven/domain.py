"""Periodic domain, characteristic coordinates and the moving polynomial weights.

The background field points along x3, so wave packets ride the two
characteristic families x3 = const - t and x3 = const + t.  Everything
weight-related is a function of the characteristic coordinates

    u_plus  = x3 - t,      u_minus = x3 + t,

shifted by the position parameter ``a``:

    <u_plus>  = sqrt(1 + (u_plus - a)^2),
    <u_minus> = sqrt(1 + (u_minus + a)^2).

Note the opposite sign of the ``a`` shift in the two families.  Both
weights are constant along their own characteristic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

# Relative envelope level below which a Gaussian packet is considered absent.
SUPPORT_THRESHOLD = 1e-14

DELTA_MAX = 2.0 / 3.0


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class DomainSpec:
    """Uniform periodic grid on a rectangular box.

    Axis i has ``n[i]`` points (powers of two, at least 8) and physical
    length ``L[i]``.  Coordinates are centered: x in [-L/2, L/2), so the
    weights see an unwrapped x3 window symmetric about 0.
    """

    n: tuple[int, int, int]
    L: tuple[float, float, float]

    def __post_init__(self):
        for ni in self.n:
            if ni < 8 or ni % 2 != 0:
                raise ValueError(f"grid size {ni} must be even and >= 8")
            if not _is_power_of_two(ni):
                raise ValueError(f"grid size {ni} must be a power of two")
        for Li in self.L:
            if not Li > 0:
                raise ValueError(f"box length {Li} must be positive")

    @property
    def h(self) -> tuple[float, float, float]:
        return tuple(Li / ni for Li, ni in zip(self.L, self.n))

    @property
    def cell_volume(self) -> float:
        h1, h2, h3 = self.h
        return h1 * h2 * h3

    @property
    def volume(self) -> float:
        return self.L[0] * self.L[1] * self.L[2]

    @property
    def npoints(self) -> int:
        return self.n[0] * self.n[1] * self.n[2]

    @cached_property
    def x(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Centered 1D coordinate arrays per axis."""
        return tuple(
            -Li / 2 + (Li / ni) * np.arange(ni) for Li, ni in zip(self.L, self.n)
        )

    @cached_property
    def k(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Angular wavenumbers per axis, FFT ordering."""
        return tuple(
            2 * np.pi * np.fft.fftfreq(ni, d=Li / ni)
            for Li, ni in zip(self.L, self.n)
        )

    @cached_property
    def k_grids(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        k1, k2, k3 = self.k
        return (
            k1[:, None, None],
            k2[None, :, None],
            k3[None, None, :],
        )

    @cached_property
    def kd(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Derivative wavenumbers: as ``k`` but with the Nyquist mode zeroed.

        All vector-calculus operators share these, so curl, divergence,
        gradient and the Leray projector stay mutually consistent on
        fields that still carry Nyquist content.
        """
        out = []
        for ki, ni in zip(self.k, self.n):
            kc = ki.copy()
            if ni % 2 == 0:
                kc[ni // 2] = 0.0
            out.append(kc)
        return tuple(out)

    @cached_property
    def kd_grids(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        k1, k2, k3 = self.kd
        return (
            k1[:, None, None],
            k2[None, :, None],
            k3[None, None, :],
        )

    @cached_property
    def ksq(self) -> np.ndarray:
        k1, k2, k3 = self.k_grids
        return k1**2 + k2**2 + k3**2

    @cached_property
    def ksq_d(self) -> np.ndarray:
        k1, k2, k3 = self.kd_grids
        return k1**2 + k2**2 + k3**2

    @cached_property
    def inv_ksq(self) -> np.ndarray:
        """1/|kd|^2 with zero entries set to 0 (mean-free inversions)."""
        ksq = self.ksq_d.copy()
        zero = ksq == 0.0
        ksq[zero] = 1.0
        out = 1.0 / ksq
        out[zero] = 0.0
        return out

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """2/3-rule mask: keep integer modes with |m_i| <= n_i // 3."""
        masks = []
        for ni in self.n:
            m = np.fft.fftfreq(ni, d=1.0 / ni)  # integer mode numbers
            masks.append(np.abs(m) <= ni // 3)
        return (
            masks[0][:, None, None]
            & masks[1][None, :, None]
            & masks[2][None, None, :]
        )

    def mode_numbers(self, axis: int) -> np.ndarray:
        ni = self.n[axis]
        return np.fft.fftfreq(ni, d=1.0 / ni).astype(int)


@dataclass(frozen=True)
class WeightParams:
    """Position parameter and decay exponent of the moving weights.

    delta must lie in (0, 2/3); omega = 1 + delta is stored for
    convenience.  The default delta is 0.1.
    """

    a: float = 0.0
    delta: float = 0.1
    omega: float = field(init=False)

    def __post_init__(self):
        if not (0.0 < self.delta < DELTA_MAX):
            raise ValueError(f"delta must lie in (0, 2/3), got {self.delta}")
        object.__setattr__(self, "omega", 1.0 + self.delta)

    def shifted(self, a: float) -> "WeightParams":
        return WeightParams(a=a, delta=self.delta)


def characteristic_coords(t: float, x3):
    """Return (u_plus, u_minus) = (x3 - t, x3 + t)."""
    return x3 - t, x3 + t


def weight_value(u, sign: str, w: WeightParams, power: float):
    """Evaluate <u_plus>^power or <u_minus>^power at characteristic coordinate u.

    ``sign`` selects the family: "plus" uses the shift u - a, "minus"
    uses u + a.  Accepts scalars or arrays; the result is always >= 1
    for power >= 0.
    """
    if sign == "plus":
        s = np.asarray(u) - w.a
    elif sign == "minus":
        s = np.asarray(u) + w.a
    else:
        raise ValueError(f"sign must be 'plus' or 'minus', got {sign!r}")
    base = 1.0 + s * s
    return base ** (power / 2.0)


def unwrap_x3(x3: float, wrap_count: int, L3: float) -> float:
    """Undo periodic wrapping: the true coordinate is x3 + wrap_count * L3."""
    return x3 + wrap_count * L3


def energy_weight_profile(
    domain: DomainSpec, t: float, w: WeightParams, species: str
) -> np.ndarray:
    """1D x3 profile of the energy-norm weight paired with species z_{+/-}.

    The plus field is weighted by <u_minus>^(2 omega) and the minus
    field by <u_plus>^(2 omega): each field is weighted by the family
    transported with the *other* species, which is what makes the
    weighted norm invariant under free transport.
    """
    x3 = domain.x[2]
    u_plus, u_minus = characteristic_coords(t, x3)
    if species == "plus":
        return weight_value(u_minus, "minus", w, 2.0 * w.omega)
    if species == "minus":
        return weight_value(u_plus, "plus", w, 2.0 * w.omega)
    raise ValueError(f"species must be 'plus' or 'minus', got {species!r}")


def flux_weight_values(
    u: np.ndarray, tau: float, w: WeightParams, species: str
) -> np.ndarray:
    """Weight on the characteristic surface labeled u, at time tau.

    On the u_plus = u surface the transverse weight is <u_minus> with
    u_minus = u + 2 tau; on the u_minus = u surface it is <u_plus> with
    u_plus = u - 2 tau.
    """
    if species == "plus":
        return weight_value(u + 2.0 * tau, "minus", w, 2.0 * w.omega)
    if species == "minus":
        return weight_value(u - 2.0 * tau, "plus", w, 2.0 * w.omega)
    raise ValueError(f"species must be 'plus' or 'minus', got {species!r}")


def scattering_weight_profile(
    u: np.ndarray, w: WeightParams, species: str
) -> np.ndarray:
    """Weight of the measure on the characteristic-line space of a species.

    Lines carrying z_plus are labeled by u_minus, so the plus-species
    scattering field is measured with <u_minus>^(2 omega) d(x1,x2,u);
    symmetrically for minus with <u_plus>.
    """
    if species == "plus":
        return weight_value(u, "minus", w, 2.0 * w.omega)
    if species == "minus":
        return weight_value(u, "plus", w, 2.0 * w.omega)
    raise ValueError(f"species must be 'plus' or 'minus', got {species!r}")


def gaussian_support_halfwidth(sigma: float) -> float:
    """Half-width of a Gaussian envelope at the SUPPORT_THRESHOLD level."""
    return sigma * np.sqrt(2.0 * np.log(1.0 / SUPPORT_THRESHOLD))
