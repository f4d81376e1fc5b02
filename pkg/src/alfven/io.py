"""On-disk formats: binary field dumps, norms CSV and run manifests.

All writes are atomic (write to a temp file in the target directory,
then rename).  The binary dump layout is fixed:

    bytes 0..4    magic "ALFV1"
    byte  5       endianness flag (1 = little endian payload)
    byte  6       kind (0 = physical samples, 1 = spectral coefficients)
    byte  7       species (0 = plus, 1 = minus, 2 = other)
    bytes 8..19   n1, n2, n3 as little-endian int32
    bytes 20..23  zero padding
    bytes 24..63  L1, L2, L3, t, a as little-endian float64
    bytes 64..127 reserved (zeros)

followed by the three components concatenated, each a C-ordered
(n1, n2, n3) block with x1 varying slowest.  Physical payloads are
float64 (3 * n1 * n2 * n3 * 8 bytes); spectral payloads store float64
(re, im) pairs and are twice as long.
"""

from __future__ import annotations

import csv
import json
import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .domain import DomainSpec
from .spectral import (
    RealVectorField,
    SpectralVectorField,
    divergence_inf_norm,
    transform,
)

MAGIC = b"ALFV1"
HEADER_BYTES = 128
_KINDS = {"physical": 0, "spectral": 1}
_KINDS_BACK = {v: k for k, v in _KINDS.items()}
_SPECIES = {"plus": 0, "minus": 1, "other": 2}
_SPECIES_BACK = {v: k for k, v in _SPECIES.items()}


def _atomic_write_bytes(path: Path, payload: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _atomic_write_text(path: Path, text: str) -> None:
    _atomic_write_bytes(path, text.encode("utf-8"))


def pack_header(
    domain: DomainSpec, t: float, a: float, species: str, kind: str
) -> bytes:
    head = struct.pack(
        "<5sBBB3i4x5d",
        MAGIC,
        1,
        _KINDS[kind],
        _SPECIES[species],
        *domain.n,
        *domain.L,
        t,
        a,
    )
    return head + b"\x00" * (HEADER_BYTES - len(head))


def write_field_dump(
    path: Path,
    field,
    t: float,
    a: float,
    species: str,
    kind: str = "physical",
) -> None:
    """Dump a RealVectorField (physical) or SpectralVectorField (spectral)."""
    if kind == "physical":
        data = np.ascontiguousarray(field.v, dtype="<f8")
    elif kind == "spectral":
        data = np.ascontiguousarray(field.c, dtype="<c16")
    else:
        raise ValueError(f"bad kind {kind!r}")
    header = pack_header(field.domain, t, a, species, kind)
    _atomic_write_bytes(Path(path), header + data.tobytes())


def read_field_dump(path: Path, validate_solenoidal: bool = True):
    """Load a dump; returns (field, meta dict).

    Physical dumps come back as RealVectorField, spectral ones as
    SpectralVectorField.  Solenoidality is re-validated on load for
    plus/minus species unless disabled.
    """
    raw = Path(path).read_bytes()
    if len(raw) < HEADER_BYTES or raw[:5] != MAGIC:
        raise ValueError(f"{path}: not a field dump (bad magic)")
    endian, kind_b, species_b, n1, n2, n3, L1, L2, L3, t, a = struct.unpack(
        "<BBB3i4x5d", raw[5:64]
    )
    if endian != 1:
        raise ValueError(f"{path}: unsupported endianness flag {endian}")
    domain = DomainSpec((n1, n2, n3), (L1, L2, L3))
    kind = _KINDS_BACK[kind_b]
    species = _SPECIES_BACK[species_b]
    count = 3 * n1 * n2 * n3
    if kind == "physical":
        expected = HEADER_BYTES + count * 8
        if len(raw) != expected:
            raise ValueError(f"{path}: payload length {len(raw)} != {expected}")
        data = np.frombuffer(raw, dtype="<f8", offset=HEADER_BYTES).reshape(
            (3, n1, n2, n3)
        )
        field = RealVectorField(domain, data.astype(np.float64))
        spec = transform(field)
    else:
        expected = HEADER_BYTES + count * 16
        if len(raw) != expected:
            raise ValueError(f"{path}: payload length {len(raw)} != {expected}")
        data = np.frombuffer(raw, dtype="<c16", offset=HEADER_BYTES).reshape(
            (3, n1, n2, n3)
        )
        field = SpectralVectorField(domain, data.astype(np.complex128))
        spec = field
    meta = {"t": t, "a": a, "species": species, "kind": kind}
    if validate_solenoidal and species in ("plus", "minus"):
        scale = max(1.0, float(np.max(np.abs(spec.c))))
        dmax = divergence_inf_norm(spec)
        if dmax > 1e-8 * scale:
            raise ValueError(
                f"{path}: loaded field is not solenoidal (|div| = {dmax:.3e})"
            )
    return field, meta


def write_norms_csv(path: Path, columns: list[str], rows: list[dict]) -> None:
    """Fixed-column norms table; header row always written."""
    buf = []
    buf.append(",".join(columns))
    for row in rows:
        buf.append(",".join(repr(float(row[c])) for c in columns))
    _atomic_write_text(Path(path), "\n".join(buf) + "\n")


def read_norms_csv(path: Path) -> tuple[list[str], list[dict]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [
            {c: float(v) for c, v in zip(header, line)} for line in reader if line
        ]
    return header, rows


def write_manifest(path: Path, manifest: dict) -> None:
    _atomic_write_text(Path(path), json.dumps(manifest, indent=2, sort_keys=True))


def read_manifest(path: Path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def manifest_schema() -> dict:
    schema_path = Path(__file__).parent / "schemas" / "manifest.schema.json"
    with open(schema_path) as fh:
        return json.load(fh)


def write_config_echo(path: Path, config: dict) -> None:
    _atomic_write_text(Path(path), json.dumps(config, indent=2, sort_keys=True))


def manifests_equal_ignoring_volatile(a: dict, b: dict) -> bool:
    """Bit-exact comparison modulo wall-clock timing."""

    def strip(m):
        m = dict(m)
        m.pop("wall_clock_seconds", None)
        return m

    return json.dumps(strip(a), sort_keys=True) == json.dumps(strip(b), sort_keys=True)
