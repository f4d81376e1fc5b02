"""Figure generation for simulator run directories.

Reads only the documented on-disk formats (norms.csv, manifest.json and
the scattering JSON sidecars); it never imports or recomputes any of the
physics.
"""

__version__ = "0.1.0"
