"""Measurement geometry, wave-number grids, synthetic data and noise."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import DomainError
from .forward import (
    TriangularMesh,
    gaussian_far_matrix,
    gaussian_near_matrix,
    point_far_matrix,
    point_near_matrix,
    _check_outside,
    _gaussian_weights,
)
from .sources import GAUSSIAN, POINT, SourceConfiguration, pack

NEAR = "near"
FAR = "far"

APERTURES = {
    "S1": (0.0, 2 * math.pi),
    "S2": (0.0, math.pi),
    "S3": (math.pi / 8, 5 * math.pi / 8),
}
DEFAULT_ANGLES = {"S1": 80, "S2": 40, "S3": 20}


@dataclass(frozen=True)
class WaveNumberGrid:
    k_min: float
    k_max: float
    n: int

    @property
    def nodes(self) -> np.ndarray:
        j = np.arange(self.n)
        k = self.k_min + j * (self.k_max - self.k_min) / (self.n - 1)
        k[-1] = self.k_max
        return k

    @property
    def spacing(self) -> float:
        return (self.k_max - self.k_min) / (self.n - 1)

    def to_dict(self) -> dict:
        return {"km": self.k_min, "kM": self.k_max, "Nk": self.n}


def wavenumber_grid(k_min: float, k_max: float, n: int) -> WaveNumberGrid:
    """Uniform grid ``k_j = k_min + (j-1)(k_max - k_min)/(n-1)``, ``j = 1..n``."""
    if int(n) != n or n < 2:
        raise DomainError("a wave-number grid needs at least two nodes")
    if not (np.isfinite(k_min) and k_min > 0):
        raise DomainError("k_min must be positive")
    if not (np.isfinite(k_max) and k_max > k_min):
        raise DomainError("k_max must exceed k_min")
    return WaveNumberGrid(float(k_min), float(k_max), int(n))


@dataclass(frozen=True)
class MeasurementGeometry:
    """Observation points on a circle (near) or directions on the unit circle (far).

    Angles sample the half-open aperture ``[theta0, theta1)`` uniformly.
    """

    regime: str
    aperture: tuple[float, float] = APERTURES["S1"]
    n_angles: int = 80
    radius: float | None = 6.5

    def __post_init__(self):
        if self.regime not in (NEAR, FAR):
            raise DomainError(f"regime must be 'near' or 'far', got {self.regime!r}")
        t0, t1 = map(float, self.aperture)
        object.__setattr__(self, "aperture", (t0, t1))
        if not (0.0 < t1 - t0 <= 2 * math.pi + 1e-12):
            raise DomainError(f"aperture width must lie in (0, 2 pi], got [{t0}, {t1})")
        if int(self.n_angles) != self.n_angles or self.n_angles < 1:
            raise DomainError("n_angles must be a positive integer")
        if self.regime == NEAR:
            if self.radius is None or not self.radius > 0:
                raise DomainError("near-field geometry needs a positive radius")
        else:
            object.__setattr__(self, "radius", None)

    def angles(self) -> np.ndarray:
        return measurement_angles(self)

    def observation_points(self) -> np.ndarray:
        th = self.angles()
        pts = np.column_stack([np.cos(th), np.sin(th)])
        return pts * self.radius if self.regime == NEAR else pts


def measurement_angles(geometry: MeasurementGeometry) -> np.ndarray:
    t0, t1 = geometry.aperture
    if geometry.n_angles <= 0:
        raise DomainError("n_angles must be positive")
    return t0 + np.arange(geometry.n_angles) * (t1 - t0) / geometry.n_angles


def aperture_geometry(regime: str, name: str, radius: float = 6.5, n_angles: int | None = None):
    """Geometry for one of the named apertures S1, S2, S3."""
    return MeasurementGeometry(regime, APERTURES[name], n_angles or DEFAULT_ANGLES[name], radius)


@dataclass
class MeasurementSet:
    geometry: MeasurementGeometry
    kgrid: WaveNumberGrid
    values: np.ndarray
    noise_level: float = 0.0
    seed: int | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (self.geometry.n_angles, self.kgrid.n):
            raise ValueError(f"values shape {self.values.shape} != ({self.geometry.n_angles}, {self.kgrid.n})")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("measurement values must be finite")

    @property
    def regime(self) -> str:
        return self.geometry.regime

    def with_values(self, values, **kw) -> MeasurementSet:
        return replace(self, values=values, **kw)


def synthesize(config: SourceConfiguration, geometry: MeasurementGeometry, kgrid: WaveNumberGrid,
               truth_mesh: TriangularMesh | None = None) -> MeasurementSet:
    """Noise-free data: closed form for point sources, midpoint quadrature for Gaussians."""
    ks = kgrid.nodes
    obs = geometry.observation_points()
    if config.kind == POINT:
        lam, xi, z = pack(config).layout.split(pack(config).values)
        if geometry.regime == NEAR:
            u = point_near_matrix(obs, ks, lam, xi, z)
        else:
            u = point_far_matrix(obs, ks, lam, xi, z)
    elif config.kind == GAUSSIAN:
        if truth_mesh is None:
            raise ValueError("Gaussian sources need a quadrature mesh")
        w = _gaussian_weights(config, truth_mesh)
        if geometry.regime == NEAR:
            u = gaussian_near_matrix(_check_outside(obs, config.domain), ks, w, truth_mesh.centroids)
        else:
            u = gaussian_far_matrix(obs, ks, w, truth_mesh.centroids)
    else:
        raise ValueError(f"unknown source kind {config.kind!r}")
    return MeasurementSet(geometry, kgrid, u)


def add_noise(data: MeasurementSet, level: float, seed: int | None = None) -> MeasurementSet:
    """``u + level * (z1 + i z2) * max|u|`` with independent standard normals per entry.

    One ``numpy.random.default_rng(seed)`` stream draws the real parts of all
    entries (row-major), then the imaginary parts. ``max|u|`` is taken over the
    whole noise-free matrix.
    """
    if not level >= 0:
        raise DomainError("noise level must be non-negative")
    u = data.values
    if level == 0:
        return data.with_values(u.copy(), noise_level=0.0, seed=seed)
    rng = np.random.default_rng(seed)
    z1 = rng.standard_normal(u.shape)
    z2 = rng.standard_normal(u.shape)
    scale = level * np.max(np.abs(u))
    return data.with_values(u + scale * (z1 + 1j * z2), noise_level=float(level), seed=seed)


# -- dataset file ------------------------------------------------------------

def dataset_to_dict(data: MeasurementSet) -> dict:
    g = data.geometry
    return {
        "regime": g.regime,
        "radius": g.radius,
        "aperture": list(g.aperture),
        "n_angles": g.n_angles,
        "kgrid": data.kgrid.to_dict(),
        "noise_level": data.noise_level,
        "seed": data.seed,
        "values": [[[float(v.real), float(v.imag)] for v in row] for row in data.values],
    }


def dataset_from_dict(d: dict) -> MeasurementSet:
    geom = MeasurementGeometry(d["regime"], tuple(d["aperture"]), int(d["n_angles"]), d.get("radius"))
    kg = d["kgrid"]
    grid = wavenumber_grid(kg["km"], kg["kM"], kg["Nk"])
    arr = np.asarray(d["values"], dtype=float)
    return MeasurementSet(geom, grid, arr[..., 0] + 1j * arr[..., 1], float(d.get("noise_level", 0.0)), d.get("seed"))


def write_dataset(data: MeasurementSet, path) -> None:
    # json writes floats with repr(), so the round trip is bit-exact
    Path(path).write_text(json.dumps(dataset_to_dict(data)))


def read_dataset(path) -> MeasurementSet:
    return dataset_from_dict(json.loads(Path(path).read_text()))
