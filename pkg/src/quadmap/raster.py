"""Render complex 2D slices of C^3 as escape-time, Green-value or class images.

The pixel (row j, column i) samples ``base + s dir1 + t dir2`` where
``(s, t)`` runs over a real window; row 0 is the top edge (largest t).
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path

import numpy as np

from ._parallel import parallel_map
from .green import green_minus, green_plus
from .maps import BACKWARD, FORWARD, Params, Point3
from .regions import RegionConstants, Verdict, choose_constants, region_verdict

MODES = ("escape-time-forward", "escape-time-backward", "green-plus", "green-minus",
         "class")
SAMPLING = ("center", "node")

CLASS_U_PLUS = 1
CLASS_U_MINUS = 2
CLASS_BOTH = 3
CLASS_NEITHER = 255
PGM_SENTINEL = 65535
PGM_MAX = 65534

# palette for indexed PNGs of class images
_PALETTE = {0: (0, 0, 0), CLASS_U_PLUS: (214, 96, 77), CLASS_U_MINUS: (67, 147, 195),
            CLASS_BOTH: (120, 60, 160), CLASS_NEITHER: (255, 255, 255)}


def _cpair(z: complex) -> list[float]:
    return [z.real, z.imag]


@dataclass(frozen=True)
class SliceSpec:
    base: tuple
    dir1: tuple
    dir2: tuple
    center: tuple = (0.0, 0.0)
    width: float = 2.0
    height: float = 2.0
    W: int = 64
    H: int = 64
    mode: str = "class"
    horizon: int = 100
    params: Params = field(default_factory=lambda: Params(1, 1))
    constants: RegionConstants | None = None
    sampling: str = "center"
    supersample: int = 1
    tol: float = 1e-8

    def __post_init__(self):
        for name in ("base", "dir1", "dir2"):
            v = tuple(complex(z) for z in getattr(self, name))
            if len(v) != 3:
                raise ValueError(f"{name} needs three complex coordinates")
            object.__setattr__(self, name, v)
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))
        if self.constants is None:
            object.__setattr__(self, "constants", choose_constants(self.params))
        self.validate()

    def validate(self) -> "SliceSpec":
        if int(self.W) < 1 or int(self.H) < 1:
            raise ValueError("raster needs W, H >= 1")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if self.sampling not in SAMPLING:
            raise ValueError(f"unknown sampling {self.sampling!r}")
        if self.supersample < 1 or (self.supersample > 1 and self.mode == "class"):
            raise ValueError("supersample must be >= 1 and is not defined for class mode")
        if not (self.width > 0 and self.height > 0):
            raise ValueError("window width and height must be positive")
        if self.horizon < 0:
            raise ValueError("horizon must be nonnegative")
        m = np.array([self.dir1, self.dir2], dtype=complex)
        sv = np.linalg.svd(m, compute_uv=False)
        if sv[0] == 0 or sv[1] <= 1e-12 * sv[0]:
            raise ValueError("slice directions must be linearly independent")
        self.constants.validate(self.params)
        return self

    # window geometry -----------------------------------------------------
    def _coord(self, k: int, n: int, lo: float, extent: float, sub: float = 0.5) -> float:
        if self.sampling == "node":
            return lo + extent * 0.5 if n == 1 else lo + extent * (k / (n - 1))
        return lo + extent * ((k + sub) / n)

    def s_of(self, i: int, sub: float = 0.5) -> float:
        return self._coord(i, self.W, self.center[0] - self.width / 2, self.width, sub)

    def t_of(self, j: int, sub: float = 0.5) -> float:
        # row 0 at the top
        top = self.center[1] + self.height / 2
        if self.sampling == "node":
            return top - self.height * 0.5 if self.H == 1 else \
                top - self.height * (j / (self.H - 1))
        return top - self.height * ((j + sub) / self.H)

    def point(self, s: float, t: float) -> Point3:
        return Point3.of(*(b + s * u + t * v for b, u, v in zip(self.base, self.dir1,
                                                                self.dir2)))

    def as_dict(self) -> dict:
        return {
            "base": [_cpair(z) for z in self.base],
            "dir1": [_cpair(z) for z in self.dir1],
            "dir2": [_cpair(z) for z in self.dir2],
            "center": list(self.center), "width": self.width, "height": self.height,
            "W": self.W, "H": self.H, "mode": self.mode, "horizon": self.horizon,
            "params": {"a": _cpair(self.params.a), "b": _cpair(self.params.b)},
            "constants": self.constants.as_dict(),
            "sampling": self.sampling, "supersample": self.supersample, "tol": self.tol,
        }


@dataclass
class RasterGrid:
    """Pixel values (NaN marks unresolved) or uint8 class codes, with metadata."""

    values: np.ndarray
    spec: SliceSpec

    @property
    def is_class(self) -> bool:
        return self.spec.mode == "class"

    @property
    def unresolved(self) -> np.ndarray:
        if self.is_class:
            return self.values == CLASS_NEITHER
        return np.isnan(self.values)

    def statistics(self) -> dict:
        mask = self.unresolved
        res = self.values[~mask]
        out = {
            "min": float(res.min()) if res.size else None,
            "max": float(res.max()) if res.size else None,
            "fraction_unresolved": float(mask.mean()),
        }
        if self.is_class:
            out["class_counts"] = {str(k): int((self.values == k).sum())
                                   for k in (CLASS_U_PLUS, CLASS_U_MINUS, CLASS_BOTH,
                                             CLASS_NEITHER)}
        return out

    def metadata(self) -> dict:
        return {"spec": self.spec.as_dict(), "statistics": self.statistics()}

    # encoders -----------------------------------------------------------
    def pgm_levels(self) -> tuple[np.ndarray, dict]:
        """16-bit gray levels; unresolved pixels get the sentinel 65535."""
        mask = self.unresolved
        if self.is_class:
            levels = self.values.astype(np.uint16)
            levels[mask] = PGM_SENTINEL
            return levels, {"kind": "class-codes", "sentinel": PGM_SENTINEL}
        vals = np.where(mask, 0.0, self.values)
        if self.spec.mode.startswith("escape-time"):
            levels = np.clip(vals, 0, PGM_MAX).astype(np.uint16)
            enc = {"kind": "steps", "scale": 1.0, "offset": 0.0}
        else:
            lo = float(vals[~mask].min()) if (~mask).any() else 0.0
            hi = float(vals[~mask].max()) if (~mask).any() else 0.0
            scale = PGM_MAX / (hi - lo) if hi > lo else 0.0
            levels = np.rint((vals - lo) * scale).astype(np.uint16)
            enc = {"kind": "linear", "scale": scale, "offset": lo}
        levels[mask] = PGM_SENTINEL
        enc["sentinel"] = PGM_SENTINEL
        return levels, enc

    def write_pgm(self, path) -> dict:
        levels, enc = self.pgm_levels()
        h, w = levels.shape
        with open(path, "wb") as fh:
            fh.write(f"P5\n{w} {h}\n65535\n".encode("ascii"))
            fh.write(levels.astype(">u2").tobytes())
        return enc

    def write_png(self, path) -> dict:
        from PIL import Image

        if self.is_class:
            img = Image.fromarray(self.values.astype(np.uint8), mode="P")
            pal = [0] * 768
            for k, rgb in _PALETTE.items():
                pal[3 * k: 3 * k + 3] = rgb
            img.putpalette(pal)
            img.save(path, format="PNG", optimize=False)
            return {"kind": "class-codes", "sentinel": CLASS_NEITHER}
        levels, enc = self.pgm_levels()
        Image.fromarray(levels.astype(np.uint16)).save(path, format="PNG", optimize=False)
        return enc

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(["row", "col", "value"])
            mask = self.unresolved
            for j in range(self.values.shape[0]):
                for i in range(self.values.shape[1]):
                    v = self.values[j, i]
                    cell = "unresolved" if mask[j, i] else (
                        str(int(v)) if self.is_class else repr(float(v)))
                    out.writerow([j, i, cell])

    def write_sidecar(self, path, encoding: dict | None = None, extra: dict | None = None):
        meta = self.metadata()
        if encoding is not None:
            meta["encoding"] = encoding
        if extra:
            meta.update(extra)
        Path(path).write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n")


def pixel_value(spec: SliceSpec, w: Point3) -> float:
    """Per-pixel quantity; NaN (or ``CLASS_NEITHER``) when unresolved."""
    p, c, h = spec.params, spec.constants, spec.horizon
    if spec.mode == "class":
        code = 0
        if region_verdict(p, c, w, h, FORWARD).kind is Verdict.U_PLUS:
            code |= CLASS_U_PLUS
        if region_verdict(p, c, w, h, BACKWARD).kind is Verdict.U_MINUS:
            code |= CLASS_U_MINUS
        return code or CLASS_NEITHER
    if spec.mode.startswith("escape-time"):
        direction = FORWARD if spec.mode.endswith("forward") else BACKWARD
        v = region_verdict(p, c, w, h, direction)
        return float(v.step) if v.escaped else math.nan
    if all(z.is_zero() for z in w):
        # the fixed point has G = 0 exactly
        return 0.0
    fn = green_plus if spec.mode == "green-plus" else green_minus
    g = fn(p, c, w, spec.tol, h)
    return g.value if g.converged else math.nan


def _render_row(spec: SliceSpec, j: int) -> list[float]:
    k = spec.supersample
    row = []
    for i in range(spec.W):
        if k == 1:
            row.append(pixel_value(spec, spec.point(spec.s_of(i), spec.t_of(j))))
            continue
        subs = [(q + 0.5) / k for q in range(k)]
        vals = [pixel_value(spec, spec.point(spec.s_of(i, u), spec.t_of(j, v)))
                for v in subs for u in subs]
        vals = [v for v in vals if not math.isnan(v)]
        row.append(math.fsum(vals) / len(vals) if vals else math.nan)
    return row


def render_slice(spec: SliceSpec, workers: int | None = None) -> RasterGrid:
    """Evaluate every pixel of ``spec``; rows are distributed over ``workers``."""
    spec.validate()
    rows = parallel_map(partial(_render_row, spec), range(spec.H), workers, chunksize=1)
    dtype = np.uint8 if spec.mode == "class" else np.float64
    return RasterGrid(np.array(rows, dtype=dtype).reshape(spec.H, spec.W), spec)


def write_outputs(grid: RasterGrid, image: str | Path, fmt: str | None = None,
                  csv_path: str | Path | None = None, extra_meta: dict | None = None) -> Path:
    """Write the image plus ``<image>.json`` sidecar (and optional CSV)."""
    image = Path(image)
    fmt = fmt or ("png" if image.suffix.lower() == ".png" else "pgm")
    enc = grid.write_png(image) if fmt == "png" else grid.write_pgm(image)
    sidecar = image.with_name(image.name + ".json")
    grid.write_sidecar(sidecar, enc, extra_meta)
    if csv_path is not None:
        grid.write_csv(csv_path)
    return sidecar
