"""Multi-frequency direct sampling: indicator fields and peak extraction.

For each sampling point ``z`` the indicator is the normalized correlation

    |sum_k <u_k, Phi_k(., z)>| / sum_k ||u_k|| ||Phi_k(., z)||

with ``Phi_k`` the fundamental solution (near field) or its far-field pattern
``exp(-i k xhat . z)``. Inner products are uniform-weight sums over the
measurement angles; any constant quadrature weight cancels in the ratio.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .forward import fundamental_solution
from .measure import FAR, NEAR, MeasurementSet
from .sources import Rectangle


@dataclass(frozen=True)
class SamplingGrid:
    domain: Rectangle = Rectangle()
    nx: int = 201
    ny: int = 201

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(self.domain.x0, self.domain.x1, self.nx)

    @property
    def ys(self) -> np.ndarray:
        return np.linspace(self.domain.y0, self.domain.y1, self.ny)

    @property
    def spacing(self) -> tuple[float, float]:
        return ((self.domain.x1 - self.domain.x0) / (self.nx - 1), (self.domain.y1 - self.domain.y0) / (self.ny - 1))

    def points(self) -> np.ndarray:
        """Node coordinates, shape ``(nx * ny, 2)``, x-major (``values[i, j]`` sits at ``xs[i], ys[j]``)."""
        X, Y = np.meshgrid(self.xs, self.ys, indexing="ij")
        return np.column_stack([X.ravel(), Y.ravel()])


@dataclass
class IndicatorField:
    grid: SamplingGrid
    values: np.ndarray  # (nx, ny)

    def argmax_location(self) -> np.ndarray:
        i, j = np.unravel_index(np.argmax(self.values), self.values.shape)
        return np.array([self.grid.xs[i], self.grid.ys[j]])


@dataclass
class Peak:
    x: float
    y: float
    height: float

    @property
    def location(self) -> np.ndarray:
        return np.array([self.x, self.y])


@dataclass
class PeakSet:
    peaks: list[Peak]

    def __len__(self) -> int:
        return len(self.peaks)

    def __iter__(self):
        return iter(self.peaks)

    @property
    def locations(self) -> np.ndarray:
        return np.array([[p.x, p.y] for p in self.peaks], dtype=float).reshape(-1, 2)


def _indicator(data: MeasurementSet, grid: SamplingGrid, kernel, chunk: int) -> IndicatorField:
    ks = data.kgrid.nodes
    pts = grid.points()
    u = data.values  # (M, Nk)
    unorm = np.linalg.norm(u, axis=0)
    num = np.zeros(len(pts), dtype=complex)
    den = np.zeros(len(pts))
    for s in range(0, len(pts), chunk):
        zp = pts[s:s + chunk]
        for q, k in enumerate(ks):
            ker = kernel(zp, k)  # (M, P)
            num[s:s + chunk] += u[:, q] @ np.conj(ker)
            den[s:s + chunk] += unorm[q] * np.linalg.norm(ker, axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        vals = np.where(den > 0, np.abs(num) / den, 0.0)
    # Cauchy-Schwarz holds exactly; clip rounding excursions above 1
    vals = np.minimum(vals, 1.0)
    return IndicatorField(grid, vals.reshape(grid.nx, grid.ny))


def indicator_near(data: MeasurementSet, grid: SamplingGrid | None = None, chunk: int = 2048) -> IndicatorField:
    """Near-field indicator on ``grid``; data must be measured on a circle enclosing it."""
    if data.regime != NEAR:
        raise ValueError("indicator_near needs near-field data")
    grid = grid or SamplingGrid()
    obs = data.geometry.observation_points()
    if grid.domain.circumradius >= data.geometry.radius:
        raise ValueError("sampling domain must lie inside the measurement circle")

    def kernel(zp, k):
        return fundamental_solution(obs[:, None, :], zp[None, :, :], k)

    return _indicator(data, grid, kernel, chunk)


def indicator_far(data: MeasurementSet, grid: SamplingGrid | None = None, chunk: int = 8192) -> IndicatorField:
    """Far-field indicator with kernel ``exp(-i k xhat . z)``."""
    if data.regime != FAR:
        raise ValueError("indicator_far needs far-field data")
    grid = grid or SamplingGrid()
    xhat = data.geometry.observation_points()

    def kernel(zp, k):
        return np.exp(-1j * k * (xhat @ zp.T))

    return _indicator(data, grid, kernel, chunk)


def indicator(data: MeasurementSet, grid: SamplingGrid | None = None) -> IndicatorField:
    return indicator_near(data, grid) if data.regime == NEAR else indicator_far(data, grid)


def default_min_separation(k_max: float) -> float:
    """Half the shortest wavelength, ``pi / k_max``."""
    return math.pi / k_max


def find_peaks(field: IndicatorField, threshold: float = 0.5, min_separation: float = 0.0,
               max_peaks: int | None = None) -> PeakSet:
    """Strict local maxima over the 8-neighborhood.

    Candidates below ``threshold * max`` are dropped; the rest are taken in
    descending height (row-major order breaks ties) and any candidate closer
    than ``min_separation`` to an already accepted peak is discarded.
    Plateaus never produce peaks.
    """
    v = np.asarray(field.values, dtype=float)
    if v.size == 0:
        raise ValueError("empty indicator field")
    padded = np.pad(v, 1, constant_values=-np.inf)
    nx, ny = v.shape
    is_max = np.ones_like(v, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            is_max &= v > padded[1 + di:1 + di + nx, 1 + dj:1 + dj + ny]
    cut = threshold * np.max(v)
    idx = np.flatnonzero(is_max.ravel() & (v.ravel() >= cut))
    order = idx[np.argsort(-v.ravel()[idx], kind="stable")]
    xs, ys = field.grid.xs, field.grid.ys
    peaks: list[Peak] = []
    for flat in order:
        i, j = divmod(int(flat), ny)
        p = np.array([xs[i], ys[j]])
        if any(np.hypot(*(p - q.location)) < min_separation for q in peaks):
            continue
        peaks.append(Peak(float(xs[i]), float(ys[j]), float(v[i, j])))
        if max_peaks is not None and len(peaks) >= max_peaks:
            break
    return PeakSet(peaks)


# -- files ---------------------------------------------------------------------

def write_indicator_csv(field: IndicatorField, path) -> None:
    pts = field.grid.points()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "value"])
        for (x, y), val in zip(pts, field.values.ravel()):
            w.writerow([repr(float(x)), repr(float(y)), repr(float(val))])


def read_indicator_csv(path, grid: SamplingGrid) -> IndicatorField:
    arr = np.loadtxt(path, delimiter=",", skiprows=1).reshape(-1, 3)
    return IndicatorField(grid, arr[:, 2].reshape(grid.nx, grid.ny))


def peaks_to_list(peaks: PeakSet) -> list[dict]:
    return [{"x": p.x, "y": p.y, "height": p.height} for p in peaks]


def write_peaks(peaks: PeakSet, path) -> None:
    Path(path).write_text(json.dumps(peaks_to_list(peaks), indent=1))


def read_peaks(path) -> PeakSet:
    return PeakSet([Peak(float(d["x"]), float(d["y"]), float(d["height"])) for d in json.loads(Path(path).read_text())])
