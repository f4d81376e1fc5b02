"""Pseudo-spectral ideal-MHD simulator in a strong magnetic background.

Evolves the Elsasser perturbation pair around B0 = (0, 0, 1) on a
periodic box, computes the moving weighted energy/flux norms along the
two characteristic families, accumulates scattering fields on the
characteristic infinities and runs the quantitative rigidity
experiments built on backward solves with re-centred weights.
"""

__version__ = "0.1.0"
