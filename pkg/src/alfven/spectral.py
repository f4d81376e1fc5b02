"""Fourier-space vector calculus on the periodic box.

Coefficients are stored normalized by the number of grid points, so the
k = 0 entry of a field is its mean value and Parseval reads

    integral |f|^2 dV  =  V * sum_k |c_k|^2.

Scalars are plain complex arrays of shape (n1, n2, n3); vector fields
carry a leading component axis of length 3.  All nonlinear products are
formed in physical space and masked with the 2/3 rule afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft as _fft

from .domain import DomainSpec

_WORKERS = -1
_SPATIAL_AXES = (-3, -2, -1)


def fftn(a: np.ndarray) -> np.ndarray:
    return _fft.fftn(a, axes=_SPATIAL_AXES, workers=_WORKERS)


def ifftn(a: np.ndarray) -> np.ndarray:
    return _fft.ifftn(a, axes=_SPATIAL_AXES, workers=_WORKERS)


@dataclass
class RealVectorField:
    """Samples of a real 3-vector field on the physical grid."""

    domain: DomainSpec
    v: np.ndarray  # (3, n1, n2, n3) float64

    def __post_init__(self):
        expected = (3,) + self.domain.n
        if self.v.shape != expected:
            raise ValueError(f"shape {self.v.shape} != {expected}")
        if not np.all(np.isfinite(self.v)):
            raise ValueError("field contains NaN or Inf")


@dataclass
class SpectralVectorField:
    """Fourier coefficients of a real 3-vector field (Hermitian-symmetric)."""

    domain: DomainSpec
    c: np.ndarray  # (3, n1, n2, n3) complex128

    def __post_init__(self):
        expected = (3,) + self.domain.n
        if self.c.shape != expected:
            raise ValueError(f"shape {self.c.shape} != {expected}")

    def copy(self) -> "SpectralVectorField":
        return SpectralVectorField(self.domain, self.c.copy())

    @classmethod
    def zeros(cls, domain: DomainSpec) -> "SpectralVectorField":
        return cls(domain, np.zeros((3,) + domain.n, dtype=np.complex128))


def transform(f: RealVectorField) -> SpectralVectorField:
    c = fftn(f.v) / f.domain.npoints
    return SpectralVectorField(f.domain, c)


def inverse_transform(f: SpectralVectorField) -> RealVectorField:
    v = ifftn(f.c * f.domain.npoints).real
    return RealVectorField(f.domain, v)


def to_physical(f: SpectralVectorField) -> np.ndarray:
    """Physical samples (3, n1, n2, n3) without reality validation."""
    return ifftn(f.c * f.domain.npoints).real


def scalar_to_physical(domain: DomainSpec, c: np.ndarray) -> np.ndarray:
    return ifftn(c * domain.npoints).real


def scalar_transform(domain: DomainSpec, v: np.ndarray) -> np.ndarray:
    return fftn(v) / domain.npoints


def hermitian_error(f: SpectralVectorField) -> float:
    """Max |c(-k) - conj(c(k))| over all modes."""
    c = f.c
    flipped = c[:, ::-1, ::-1, ::-1]
    # index reversal maps mode m to -m up to the 0 row, which np.roll restores
    flipped = np.roll(flipped, shift=(1, 1, 1), axis=(1, 2, 3))
    return float(np.max(np.abs(flipped - np.conj(c))))


def _ik(domain: DomainSpec, axis: int) -> np.ndarray:
    """Spectral derivative factor along axis (Nyquist-zeroed convention)."""
    shape = [1, 1, 1]
    shape[axis] = domain.n[axis]
    return (1j * domain.kd[axis]).reshape(shape)


def deriv_scalar(domain: DomainSpec, c: np.ndarray, axis: int) -> np.ndarray:
    return c * _ik(domain, axis)


def gradient(domain: DomainSpec, c: np.ndarray) -> np.ndarray:
    """Gradient of a spectral scalar, shape (3, n1, n2, n3)."""
    return np.stack([c * _ik(domain, ax) for ax in range(3)])


def divergence(f: SpectralVectorField) -> np.ndarray:
    d = f.domain
    return (
        f.c[0] * _ik(d, 0) + f.c[1] * _ik(d, 1) + f.c[2] * _ik(d, 2)
    )


def curl(f: SpectralVectorField) -> SpectralVectorField:
    d = f.domain
    ik1, ik2, ik3 = (_ik(d, 0), _ik(d, 1), _ik(d, 2))
    c = f.c
    out = np.empty_like(c)
    out[0] = ik2 * c[2] - ik3 * c[1]
    out[1] = ik3 * c[0] - ik1 * c[2]
    out[2] = ik1 * c[1] - ik2 * c[0]
    return SpectralVectorField(d, out)


def dealias(f: SpectralVectorField) -> SpectralVectorField:
    return SpectralVectorField(f.domain, f.c * f.domain.dealias_mask)


def leray_project(f: SpectralVectorField) -> SpectralVectorField:
    """Remove the gradient part: P(f) = f - k (k . f) / |k|^2.

    The k = 0 mode is untouched (constant fields are already solenoidal).
    Idempotent, annihilates gradients, output divergence-free.
    """
    d = f.domain
    k1, k2, k3 = d.kd_grids
    kdotf = k1 * f.c[0] + k2 * f.c[1] + k3 * f.c[2]
    scale = kdotf * d.inv_ksq
    out = f.c.copy()
    out[0] -= k1 * scale
    out[1] -= k2 * scale
    out[2] -= k3 * scale
    return SpectralVectorField(d, out)


def divergence_inf_norm(f: SpectralVectorField) -> float:
    """Max physical-space |div f|; the solenoidality residual."""
    d = f.domain
    return float(np.max(np.abs(scalar_to_physical(d, divergence(f)))))


def advection_tensor_hat(
    zp: SpectralVectorField, zm: SpectralVectorField
) -> np.ndarray:
    """Dealiased spectral tensor T[a, b] = FFT(zm_a * zp_b).

    Both advection terms derive from it in divergence form, using
    div zm = div zp = 0:

        (zm . grad zp)_b = sum_a d_a T[a, b],
        (zp . grad zm)_a = sum_b d_b T[a, b].
    """
    d = zp.domain
    zp_phys = to_physical(zp)
    zm_phys = to_physical(zm)
    prod = zm_phys[:, None] * zp_phys[None, :]
    T = fftn(prod) / d.npoints
    return T * d.dealias_mask


def advection_from_tensor(domain: DomainSpec, T: np.ndarray):
    """Spectral (zm . grad zp, zp . grad zm) from the dealiased tensor."""
    iks = [_ik(domain, ax) for ax in range(3)]
    n_p = np.zeros((3,) + domain.n, dtype=np.complex128)
    n_m = np.zeros_like(n_p)
    for a in range(3):
        for b in range(3):
            n_p[b] += iks[a] * T[a, b]
            n_m[a] += iks[b] * T[a, b]
    return n_p, n_m


def pressure_from_advection(domain: DomainSpec, n_p: np.ndarray) -> np.ndarray:
    """Spectral pressure from -lap p = div (zm . grad zp), zero mean."""
    div_np = sum(_ik(domain, ax) * n_p[ax] for ax in range(3))
    return div_np * domain.inv_ksq


def solve_pressure(zp: SpectralVectorField, zm: SpectralVectorField) -> np.ndarray:
    """Pressure of the pair (z_plus, z_minus): -lap p = d_i zm^j d_j zp^i.

    The source is the pointwise product of gradients, dealiased; the
    k = 0 mode of p is set to zero (pressure gauge).  Returns the
    spectral scalar p.
    """
    d = zp.domain
    source = np.zeros(d.n, dtype=np.float64)
    for i in range(3):
        for j in range(3):
            dzm_j = scalar_to_physical(d, deriv_scalar(d, zm.c[j], i))
            dzp_i = scalar_to_physical(d, deriv_scalar(d, zp.c[i], j))
            source += dzm_j * dzp_i
    s_hat = scalar_transform(d, source) * d.dealias_mask
    return s_hat * d.inv_ksq


def shift_phase_x3(domain: DomainSpec, s: float) -> np.ndarray:
    """Multiplier turning c into coefficients of x -> f(x1, x2, x3 + s)."""
    k3 = domain.k[2].copy()
    phase = np.exp(1j * k3 * s)
    n3 = domain.n[2]
    if n3 % 2 == 0:
        # keep the interpolant real: the Nyquist mode shifts as a cosine
        phase[n3 // 2] = np.cos(k3[n3 // 2] * s)
    return phase.reshape(1, 1, n3)


def sample_shifted(f: SpectralVectorField, s: float) -> np.ndarray:
    """Physical samples of f at (x1, x2, x3 + s), exact for band-limited f."""
    d = f.domain
    return ifftn(f.c * shift_phase_x3(d, s) * d.npoints).real


def interpolate_x3(
    f: SpectralVectorField, x1_idx: int, x2_idx: int, x3: float
) -> np.ndarray:
    """Trigonometric evaluation of the 3-vector at an off-grid x3.

    x1 and x2 stay on the grid (given by index); the band-limited
    interpolant is evaluated exactly at the requested x3.
    """
    d = f.domain
    mixed = _fft.ifftn(f.c * d.npoints, axes=(1, 2), workers=_WORKERS)
    line = mixed[:, x1_idx, x2_idx, :]  # (3, n3) coefficients over k3, x n3 scaling
    n3 = d.n[2]
    L3 = d.L[2]
    h3 = L3 / n3
    jstar = (x3 - d.x[2][0]) / h3
    m = d.mode_numbers(2).astype(float)
    phases = np.exp(2j * np.pi * m * jstar / n3)
    if n3 % 2 == 0:
        phases[n3 // 2] = np.cos(np.pi * jstar)
    return (line @ phases).real / n3


def l2_norm(f: SpectralVectorField) -> float:
    """Physical L2 norm sqrt(integral |f|^2 dV) via Parseval."""
    return float(np.sqrt(f.domain.volume * np.sum(np.abs(f.c) ** 2)))


def max_abs(f: SpectralVectorField) -> float:
    """Max pointwise vector magnitude in physical space."""
    v = to_physical(f)
    return float(np.sqrt(np.max(np.sum(v * v, axis=0))))
