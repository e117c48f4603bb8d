"""Input checks for the estimator layer.

scikit-learn's ``check_array`` rejects complex data, so points are validated
here: an ``(n, 3)`` complex array or an ``(n, 6)`` real array of
``(re x, im x, re y, im y, re z, im z)``.
"""
from __future__ import annotations

import numpy as np

from .maps import Params, Point3


def check_points(X) -> list[Point3]:
    arr = np.asarray(X)
    if arr.ndim == 1 and arr.size in (3, 6):
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2D array of points, got shape {arr.shape}")
    if arr.shape[1] == 6:
        if np.iscomplexobj(arr):
            raise ValueError("a 6-column array must be real (re, im pairs)")
        arr = arr.astype(float)
        arr = arr[:, 0::2] + 1j * arr[:, 1::2]
    elif arr.shape[1] == 3:
        arr = arr.astype(complex)
    else:
        raise ValueError(f"expected 3 complex or 6 real columns, got {arr.shape[1]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("points must be finite")
    return [Point3.of(*row) for row in arr]


def check_params(a, b) -> Params:
    return Params(complex(a), complex(b))


def check_direction_name(direction: str, allowed: tuple[str, ...]) -> str:
    if direction not in allowed:
        raise ValueError(f"direction must be one of {allowed}, got {direction!r}")
    return direction
