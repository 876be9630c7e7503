from __future__ import annotations

import hashlib
import logging
import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import CacheIntegrityError
from .hermite_rep import BASIS_FORMAT_VERSION, HermiteBasis, LineGrid, hermite_basis

logger = logging.getLogger(__name__)

CACHE_ENV = "QHA_CACHE_DIR"


def cache_dir(override: str | Path | None = None) -> Path:
    if override is not None:
        return Path(override)
    env = os.environ.get(CACHE_ENV, "").strip()
    if env:
        return Path(env).expanduser()
    return Path.home() / ".cache" / "pyqha_lab"


def basis_path(n: int, grid: LineGrid, directory: str | Path | None = None) -> Path:
    name = f"hermite_N{n}_T{grid.half_width!r}_M{grid.points}_v{BASIS_FORMAT_VERSION}.npz"
    return cache_dir(directory) / name


def _checksum(table: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(table, dtype=np.float64).tobytes()).hexdigest()


def save_basis(basis: HermiteBasis, directory: str | Path | None = None) -> Path:
    target = basis_path(basis.size, basis.grid, directory)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=target.parent, suffix=".npz.tmp")
    try:
        with os.fdopen(fd, "wb") as handle:
            np.savez(
                handle,
                table=basis.table,
                size=np.int64(basis.size),
                half_width=np.float64(basis.grid.half_width),
                points=np.int64(basis.grid.points),
                version=np.int64(BASIS_FORMAT_VERSION),
                checksum=np.array(_checksum(basis.table)),
            )
        os.replace(tmp_name, target)
    except BaseException:
        Path(tmp_name).unlink(missing_ok=True)
        raise
    return target


def load_basis(n: int, grid: LineGrid, directory: str | Path | None = None) -> HermiteBasis | None:
    source = basis_path(n, grid, directory)
    if not source.is_file():
        return None
    with np.load(source, allow_pickle=False) as data:
        table = np.array(data["table"])
        stored = str(data["checksum"])
        header = (int(data["size"]), float(data["half_width"]), int(data["points"]))
        version = int(data["version"])
    if version != BASIS_FORMAT_VERSION or header != (n, grid.half_width, grid.points):
        raise CacheIntegrityError(f"{source}: header {header} v{version} does not match request")
    if _checksum(table) != stored:
        raise CacheIntegrityError(f"{source}: checksum mismatch")
    return HermiteBasis(n, grid, table)


def load_or_build(
    n: int, grid: LineGrid, directory: str | Path | None = None, use_cache: bool = True
) -> HermiteBasis:
    if not use_cache:
        return hermite_basis(n, grid)
    try:
        cached = load_basis(n, grid, directory)
    except (CacheIntegrityError, OSError, KeyError, ValueError, EOFError) as exc:
        logger.warning("discarding basis cache entry: %s", exc)
        cached = None
    if cached is not None:
        logger.debug("basis cache hit N=%d", n)
        return cached
    basis = hermite_basis(n, grid)
    try:
        save_basis(basis, directory)
    except OSError as exc:
        logger.warning("could not write basis cache: %s", exc)
    return basis
