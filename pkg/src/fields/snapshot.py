"""
GFLD v1 field snapshots.

Layout: one ASCII header line `GFLD v1 <kind> <dims...> <components>` followed
by the values as little-endian float64 in row-major order. `components` is 1
for real data and 2 for complex data (real and imaginary parts interleaved).
"""
from pathlib import Path
from typing import Tuple, Union

import numpy as np

from src.utils.errors import SnapshotError

MAGIC = "GFLD"
VERSION = "v1"


def write_snapshot(path: Union[str, Path], values: np.ndarray, kind: str) -> Path:
    path = Path(path)
    values = np.ascontiguousarray(values)
    if " " in kind or not kind:
        raise ValueError(f"invalid snapshot kind {kind!r}")
    components = 2 if np.iscomplexobj(values) else 1
    payload = values.astype(np.complex128 if components == 2 else np.float64)
    header = " ".join([MAGIC, VERSION, kind, *map(str, values.shape), str(components)]) + "\n"
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(header.encode("ascii"))
        f.write(payload.view(np.float64).astype("<f8").tobytes(order="C"))
    return path


def read_snapshot(path: Union[str, Path]) -> Tuple[str, np.ndarray]:
    """
    Load a snapshot.

    Returns:
        (kind, values)

    Raises:
        SnapshotError: On a missing file, a bad header or a size mismatch
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise SnapshotError(f"cannot read snapshot {path}: {e}") from e
    newline = raw.find(b"\n")
    if newline < 0:
        raise SnapshotError(f"{path}: missing header line")
    try:
        tokens = raw[:newline].decode("ascii").split()
    except UnicodeDecodeError as e:
        raise SnapshotError(f"{path}: header is not ASCII") from e
    if len(tokens) < 4 or tokens[0] != MAGIC or tokens[1] != VERSION:
        raise SnapshotError(f"{path}: not a {MAGIC} {VERSION} snapshot")
    kind = tokens[2]
    try:
        dims = tuple(int(t) for t in tokens[3:-1])
        components = int(tokens[-1])
    except ValueError as e:
        raise SnapshotError(f"{path}: malformed dimensions {tokens[3:]}") from e
    if components not in (1, 2) or any(d < 0 for d in dims):
        raise SnapshotError(f"{path}: invalid dimensions {dims} or components {components}")
    expected = int(np.prod(dims, dtype=np.int64)) * components * 8
    body = raw[newline + 1:]
    if len(body) != expected:
        raise SnapshotError(
            f"{path}: payload has {len(body)} bytes, header {dims}x{components} needs {expected}"
        )
    data = np.frombuffer(body, dtype="<f8").astype(np.float64)
    if components == 2:
        data = data.view(np.complex128)
    return kind, data.reshape(dims)
