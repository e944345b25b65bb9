"""Parameter checkpoint files: named arrays in an npz container.

The container stores every array verbatim (bit-exact round trip) plus a format
version marker. Keys may contain dots; the version key is reserved.
"""

from __future__ import annotations

import numpy as np

FORMAT_VERSION = 1
_VERSION_KEY = "__format_version__"


class CheckpointError(RuntimeError):
    pass


def save_arrays(path: str, arrays: dict) -> None:
    if _VERSION_KEY in arrays:
        raise CheckpointError(f"{_VERSION_KEY} is reserved")
    np.savez(path, **{_VERSION_KEY: np.int64(FORMAT_VERSION)}, **arrays)


def load_arrays(path: str) -> dict:
    with np.load(path, allow_pickle=False) as data:
        if _VERSION_KEY not in data:
            raise CheckpointError(f"{path} is not a socnav checkpoint (no version marker)")
        version = int(data[_VERSION_KEY])
        if version != FORMAT_VERSION:
            raise CheckpointError(f"unsupported checkpoint format version {version}")
        return {k: data[k] for k in data.files if k != _VERSION_KEY}
