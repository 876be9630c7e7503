"""Binary and CSV exchange formats for operators and spectra.

Blob layout (little endian): magic ``QHAOP1``, ``int64`` dimension, 16 ASCII bytes of
basis fingerprint, ``N*N`` row-major complex128 entries, then the SHA-256 digest of
everything before it.
"""

from __future__ import annotations

import hashlib
from pathlib import Path

import numpy as np

from .errors import CacheIntegrityError, PlotError
from .operator_calculus import OperatorMatrix, SingularSpectrum

MAGIC = b"QHAOP1"
FINGERPRINT_BYTES = 16
DIGEST_BYTES = 32
CSV_MAX_DIM = 64
SPECTRUM_HEADER = "n,s_n"


def operator_to_blob(op: OperatorMatrix) -> bytes:
    fingerprint = op.fingerprint.encode("ascii")[:FINGERPRINT_BYTES]
    fingerprint = fingerprint.ljust(FINGERPRINT_BYTES, b"\0")
    body = (
        MAGIC
        + np.int64(op.dim).astype("<i8").tobytes()
        + fingerprint
        + np.ascontiguousarray(op.entries, dtype="<c16").tobytes()
    )
    return body + hashlib.sha256(body).digest()


def operator_from_blob(blob: bytes) -> OperatorMatrix:
    head = len(MAGIC) + 8 + FINGERPRINT_BYTES
    if len(blob) < head + DIGEST_BYTES or not blob.startswith(MAGIC):
        raise CacheIntegrityError("not an operator blob")
    body, digest = blob[:-DIGEST_BYTES], blob[-DIGEST_BYTES:]
    if hashlib.sha256(body).digest() != digest:
        raise CacheIntegrityError("operator blob checksum mismatch")
    dim = int(np.frombuffer(body, dtype="<i8", count=1, offset=len(MAGIC))[0])
    if len(body) != head + 16 * dim * dim:
        raise CacheIntegrityError(f"operator blob length does not match dimension {dim}")
    fingerprint = body[len(MAGIC) + 8 : head].rstrip(b"\0").decode("ascii")
    entries = np.frombuffer(body, dtype="<c16", offset=head).reshape(dim, dim)
    return OperatorMatrix(entries.astype(complex), fingerprint)


def save_operator(op: OperatorMatrix, path: str | Path) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_bytes(operator_to_blob(op))
    return target


def load_operator(path: str | Path) -> OperatorMatrix:
    return operator_from_blob(Path(path).read_bytes())


def operator_to_csv(op: OperatorMatrix, path: str | Path) -> Path:
    if op.dim > CSV_MAX_DIM:
        raise ValueError(f"CSV export is limited to N <= {CSV_MAX_DIM}, got {op.dim}")
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    rows, cols = np.indices(op.entries.shape)
    table = np.column_stack(
        [rows.ravel(), cols.ravel(), op.entries.real.ravel(), op.entries.imag.ravel()]
    )
    fmt = ["%d", "%d", "%.17g", "%.17g"]
    np.savetxt(target, table, delimiter=",", header="m,n,re,im", comments="", fmt=fmt)
    return target


def spectrum_to_csv(
    values: SingularSpectrum | np.ndarray, path: str | Path, header: str = SPECTRUM_HEADER
) -> Path:
    if isinstance(values, SingularSpectrum):
        data = values.values
    else:
        data = np.asarray(values, dtype=float)
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    table = np.column_stack([np.arange(len(data)), data])
    np.savetxt(target, table, delimiter=",", header=header, comments="", fmt=["%d", "%.17g"])
    return target


def curve_to_csv(x: np.ndarray, y: np.ndarray, path: str | Path, header: str) -> Path:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"curve columns must be equal-length vectors: {x.shape} vs {y.shape}")
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(
        target, np.column_stack([x, y]), delimiter=",", header=header, comments="", fmt="%.17g"
    )
    return target


def read_two_column_csv(path: str | Path) -> tuple[list[str], np.ndarray]:
    """Read an ``index,value`` CSV as written by :func:`spectrum_to_csv`."""

    source = Path(path)
    if not source.is_file():
        raise PlotError(f"CSV file not found: {source}")
    lines = source.read_text(encoding="utf-8").splitlines()
    if not lines or not lines[0].strip():
        raise PlotError(f"{source}: empty CSV")
    header = [col.strip() for col in lines[0].split(",")]
    if len(header) != 2:
        raise PlotError(f"{source}: expected two columns, got header {lines[0]!r}")
    try:
        table = np.loadtxt(source, delimiter=",", skiprows=1, ndmin=2)
    except ValueError as exc:
        raise PlotError(f"{source}: malformed CSV: {exc}") from exc
    if table.size == 0 or table.shape[1] != 2:
        raise PlotError(f"{source}: no data rows")
    if not np.all(np.isfinite(table)):
        raise PlotError(f"{source}: non-finite values")
    return header, table
