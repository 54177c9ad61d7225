"""Binary cache for spectral decompositions.

Layout (little-endian throughout):

    magic   4 bytes  "FLSE"
    version u32
    n       u32
    d       u32
    eps     f64
    kernel  u8       (0 = indicator, 1 = custom-profile)
    seed    u64
    eigenvalues   n   f64, ascending
    eigenvectors  n*n f64, column-major

Reload is bitwise exact; any magic/version mismatch or truncation is an
error, never a silent reinterpretation.
"""

from __future__ import annotations

import struct

import numpy as np

from .graph import KIND_CUSTOM, KIND_INDICATOR
from .spectral import SpectralDecomposition

MAGIC = b"FLSE"
VERSION = 1
_HEADER = struct.Struct("<4sIIIdBQ")

KERNEL_TAGS = {KIND_INDICATOR: 0, KIND_CUSTOM: 1}
_TAG_KINDS = {v: k for k, v in KERNEL_TAGS.items()}


def save_eigencache(path, spec: SpectralDecomposition, *, d: int, eps: float, kernel_kind: str = KIND_INDICATOR, seed: int = 0) -> None:
    tag = KERNEL_TAGS.get(kernel_kind)
    if tag is None:
        raise ValueError(f"unknown kernel kind: {kernel_kind!r}")
    n = spec.n
    header = _HEADER.pack(MAGIC, VERSION, n, int(d), float(eps), tag, int(seed) & (2**64 - 1))
    vals = np.ascontiguousarray(spec.eigenvalues, dtype="<f8")
    vecs = np.asfortranarray(spec.eigenvectors, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(vals.tobytes())
        fh.write(vecs.tobytes(order="F"))


def load_eigencache(path):
    """Read a cache file back; returns (SpectralDecomposition, metadata dict)."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size:
        raise ValueError(f"truncated cache: {len(raw)} bytes, header needs {_HEADER.size}")
    magic, version, n, d, eps, tag, seed = _HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise ValueError(f"bad magic bytes {magic!r}; not an eigencache file")
    if version != VERSION:
        raise ValueError(f"cache version {version} unsupported (expected {VERSION})")
    if tag not in _TAG_KINDS:
        raise ValueError(f"unknown kernel tag {tag}")
    expected = _HEADER.size + 8 * n + 8 * n * n
    if len(raw) != expected:
        raise ValueError(f"truncated cache: expected {expected} bytes, got {len(raw)}")
    offset = _HEADER.size
    vals = np.frombuffer(raw, dtype="<f8", count=n, offset=offset).copy()
    offset += 8 * n
    vecs = (
        np.frombuffer(raw, dtype="<f8", count=n * n, offset=offset)
        .reshape((n, n), order="F")
        .copy()
    )
    meta = {"n": n, "d": d, "eps": eps, "kernel_kind": _TAG_KINDS[tag], "seed": seed}
    return SpectralDecomposition(eigenvalues=vals, eigenvectors=vecs), meta


def cache_roundtrip(spec: SpectralDecomposition, path, **meta) -> SpectralDecomposition:
    """Write then re-read a decomposition; the result is bitwise equal."""
    save_eigencache(path, spec, **meta)
    reloaded, _ = load_eigencache(path)
    return reloaded
