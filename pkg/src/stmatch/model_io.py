"""Versioned binary container for fitted models.

Layout (all little-endian):

    magic        4 bytes  b"STML"
    version      u32
    tag_len      u32, then tag_len bytes of UTF-8 feature-space tag
    n            u32
    lambda1      f64
    lambda2      f64
    lambda3      f64
    tau          u32
    max_iters    u32
    rel_tol      f64
    transform    n*n f64, row-major
    checksum     32 bytes, SHA-256 of everything above

The checksum makes round-trips testable bit for bit and turns silent
corruption into a load-time error.
"""

from __future__ import annotations

import hashlib
import struct

import numpy as np

from .core import HyperParams
from .errors import ModelFormatError
from .model import SharedTransformModel

MAGIC = b"STML"
VERSION = 1
_CHECKSUM_BYTES = 32


def serialize_model(model: SharedTransformModel) -> bytes:
    tag = model.feature_space_tag.encode("utf-8")
    hyper = model.hyper
    parts = [
        MAGIC,
        struct.pack("<I", VERSION),
        struct.pack("<I", len(tag)),
        tag,
        struct.pack("<I", model.feature_dim),
        struct.pack("<ddd", hyper.lambda1, hyper.lambda2, hyper.lambda3),
        struct.pack("<II", hyper.tau, hyper.max_iters),
        struct.pack("<d", hyper.rel_tol),
        np.ascontiguousarray(model.transform, dtype="<f8").tobytes(),
    ]
    body = b"".join(parts)
    return body + hashlib.sha256(body).digest()


def deserialize_model(blob: bytes) -> SharedTransformModel:
    if len(blob) < len(MAGIC) + 4 + _CHECKSUM_BYTES:
        raise ModelFormatError("model file truncated (shorter than any valid file)")
    if blob[:4] != MAGIC:
        raise ModelFormatError(f"bad magic {blob[:4]!r}, expected {MAGIC!r}")
    body, checksum = blob[:-_CHECKSUM_BYTES], blob[-_CHECKSUM_BYTES:]
    if hashlib.sha256(body).digest() != checksum:
        raise ModelFormatError("checksum mismatch: model file is corrupt")
    pos = 4
    (version,) = struct.unpack_from("<I", body, pos)
    pos += 4
    if version != VERSION:
        raise ModelFormatError(
            f"unsupported model format version {version} (this build reads {VERSION})"
        )
    (tag_len,) = struct.unpack_from("<I", body, pos)
    pos += 4
    if pos + tag_len > len(body):
        raise ModelFormatError("model file truncated inside the feature tag")
    tag = body[pos:pos + tag_len].decode("utf-8")
    pos += tag_len
    try:
        (n,) = struct.unpack_from("<I", body, pos)
        pos += 4
        lambda1, lambda2, lambda3 = struct.unpack_from("<ddd", body, pos)
        pos += 24
        tau, max_iters = struct.unpack_from("<II", body, pos)
        pos += 8
        (rel_tol,) = struct.unpack_from("<d", body, pos)
        pos += 8
    except struct.error as exc:
        raise ModelFormatError("model file truncated inside the header") from exc
    expected = n * n * 8
    payload = body[pos:]
    if len(payload) != expected:
        raise ModelFormatError(
            f"transform payload has {len(payload)} bytes, expected {expected} (n={n})"
        )
    transform = np.frombuffer(payload, dtype="<f8").astype(np.float64).reshape(n, n)
    hyper = HyperParams(
        tau=int(tau),
        lambda1=lambda1,
        lambda2=lambda2,
        lambda3=lambda3,
        max_iters=int(max_iters),
        rel_tol=rel_tol,
    )
    return SharedTransformModel(
        transform=transform, hyper=hyper, feature_dim=int(n), feature_space_tag=tag
    )


def save_model(model: SharedTransformModel, path) -> None:
    with open(path, "wb") as fh:
        fh.write(serialize_model(model))


def load_model(path) -> SharedTransformModel:
    with open(path, "rb") as fh:
        return deserialize_model(fh.read())
