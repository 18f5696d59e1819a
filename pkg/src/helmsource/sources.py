"""Source families and the flat parameter vector used by the forward map.

Two families are supported, never mixed in one configuration:

* point sources: each one a pure monopole (scalar intensity ``lam``) or a
  pure dipole (vector intensity ``xi``);
* Gaussian sources: ``lam * exp(-xi * |x - z|^2)`` with decay rate ``xi > 0``.

Parameter vector layout (``J`` sources):

====== ============================== ==================
kind   slots                          length
====== ============================== ==================
point  lam_1..lam_J, xi_1x, xi_1y, ...  5J
       z_1x, z_1y, ...
gauss  lam_1..lam_J, xi_1..xi_J,        4J
       z_1x, z_1y, ...
====== ============================== ==================
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import LayoutError

POINT = "point"
GAUSSIAN = "gaussian"
MONOPOLE = "monopole"
DIPOLE = "dipole"


@dataclass(frozen=True)
class Rectangle:
    x0: float = -4.0
    x1: float = 4.0
    y0: float = -4.0
    y1: float = 4.0

    def __post_init__(self):
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise ValueError(f"degenerate rectangle {self}")

    @property
    def area(self) -> float:
        return (self.x1 - self.x0) * (self.y1 - self.y0)

    @property
    def circumradius(self) -> float:
        """Largest distance from the origin to a corner."""
        return float(max(np.hypot(x, y) for x in (self.x0, self.x1) for y in (self.y0, self.y1)))

    def contains(self, p, strict: bool = True) -> bool:
        x, y = float(p[0]), float(p[1])
        if strict:
            return self.x0 < x < self.x1 and self.y0 < y < self.y1
        return self.x0 <= x <= self.x1 and self.y0 <= y <= self.y1

    def as_list(self) -> list[float]:
        return [self.x0, self.x1, self.y0, self.y1]


@dataclass(frozen=True)
class PointSource:
    z: tuple[float, float]
    lam: float = 0.0
    xi: tuple[float, float] = (0.0, 0.0)

    @property
    def type(self) -> str:
        return DIPOLE if self.lam == 0.0 else MONOPOLE


@dataclass(frozen=True)
class GaussianSource:
    z: tuple[float, float]
    lam: float
    xi: float


@dataclass(frozen=True)
class SourceConfiguration:
    kind: str
    sources: tuple
    domain: Rectangle = field(default_factory=Rectangle)

    def __post_init__(self):
        object.__setattr__(self, "sources", tuple(self.sources))

    @property
    def n_sources(self) -> int:
        return len(self.sources)

    @property
    def locations(self) -> np.ndarray:
        return np.array([s.z for s in self.sources], dtype=float).reshape(-1, 2)

    @property
    def types(self) -> tuple[str, ...] | None:
        """Monopole/dipole mask for point sources, ``None`` for Gaussian."""
        if self.kind != POINT:
            return None
        return tuple(s.type for s in self.sources)


def validate(config: SourceConfiguration) -> list[str]:
    """Every violated invariant of ``config``; empty list when valid."""
    problems = []
    if config.kind not in (POINT, GAUSSIAN):
        return [f"unknown source kind {config.kind!r}"]
    if len(config.sources) < 1:
        problems.append("at least one source is required")
    expected = PointSource if config.kind == POINT else GaussianSource
    for j, s in enumerate(config.sources):
        tag = f"sources[{j}]"
        if not isinstance(s, expected):
            problems.append(f"{tag}: mixed source families ({type(s).__name__} in a {config.kind} configuration)")
            continue
        z = np.asarray(s.z, dtype=float)
        if z.shape != (2,) or not np.all(np.isfinite(z)):
            problems.append(f"{tag}: location must be two finite numbers")
        elif not config.domain.contains(z):
            problems.append(f"{tag}: location {tuple(z)} not strictly inside the domain")
        if config.kind == POINT:
            xi = np.asarray(s.xi, dtype=float)
            lam_abs, xi_abs = abs(float(s.lam)), float(np.hypot(*xi))
            if lam_abs + xi_abs == 0.0:
                problems.append(f"{tag}: zero source (lam and xi both vanish)")
            if lam_abs * xi_abs != 0.0:
                problems.append(f"{tag}: mixed monopole/dipole (lam and xi both nonzero)")
        else:
            if not np.isfinite(s.lam):
                problems.append(f"{tag}: amplitude must be finite")
            if not (np.isfinite(s.xi) and s.xi > 0):
                problems.append(f"{tag}: decay rate xi must be > 0")
    return problems


def density_at(config: SourceConfiguration, x) -> np.ndarray | float:
    """Gaussian source density at point(s) ``x`` (shape ``(..., 2)``)."""
    if config.kind != GAUSSIAN:
        raise TypeError("density_at is only defined for Gaussian sources (point sources are distributions)")
    x = np.asarray(x, dtype=float)
    lam = np.array([s.lam for s in config.sources])
    xi = np.array([s.xi for s in config.sources])
    return gaussian_density(x, lam, xi, config.locations)


def gaussian_density(x: np.ndarray, lam: np.ndarray, xi: np.ndarray, z: np.ndarray):
    d2 = np.sum((x[..., None, :] - z) ** 2, axis=-1)
    out = np.exp(-xi * d2) @ lam
    return out[()] if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class ParameterLayout:
    """Slot map for a flat parameter vector.

    ``types`` is the fixed monopole/dipole mask for point sources.
    """

    kind: str
    n_sources: int
    types: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.kind not in (POINT, GAUSSIAN):
            raise LayoutError(f"unknown kind {self.kind!r}")
        if self.n_sources < 1:
            raise LayoutError("n_sources must be >= 1")
        if self.kind == POINT:
            types = self.types or (MONOPOLE,) * self.n_sources
            if len(types) != self.n_sources or any(t not in (MONOPOLE, DIPOLE) for t in types):
                raise LayoutError(f"bad type mask {types!r}")
            object.__setattr__(self, "types", tuple(types))
        elif self.types is not None:
            raise LayoutError("type mask only applies to point sources")

    @property
    def size(self) -> int:
        return (5 if self.kind == POINT else 4) * self.n_sources

    @property
    def xi_width(self) -> int:
        return 2 if self.kind == POINT else 1

    @property
    def lam_slice(self) -> slice:
        return slice(0, self.n_sources)

    @property
    def xi_slice(self) -> slice:
        return slice(self.n_sources, self.n_sources * (1 + self.xi_width))

    @property
    def z_slice(self) -> slice:
        return slice(self.n_sources * (1 + self.xi_width), self.size)

    def split(self, values: np.ndarray):
        """(lam (J,), xi (J,) or (J, 2), z (J, 2)) views of ``values``."""
        values = np.asarray(values, dtype=float)
        if values.shape[-1] != self.size:
            raise LayoutError(f"expected {self.size} parameters, got {values.shape[-1]}")
        lam = values[..., self.lam_slice]
        xi = values[..., self.xi_slice]
        if self.kind == POINT:
            xi = xi.reshape(*xi.shape[:-1], self.n_sources, 2)
        z = values[..., self.z_slice].reshape(*values.shape[:-1], self.n_sources, 2)
        return lam, xi, z

    def active_mask(self) -> np.ndarray:
        """Boolean mask of intensity slots that may be nonzero."""
        mask = np.ones(self.size, dtype=bool)
        if self.kind == POINT:
            J = self.n_sources
            for j, t in enumerate(self.types):
                if t == MONOPOLE:
                    mask[J + 2 * j: J + 2 * j + 2] = False
                else:
                    mask[j] = False
        return mask

    def names(self) -> list[str]:
        J = self.n_sources
        out = [f"lambda_{j + 1}" for j in range(J)]
        if self.kind == POINT:
            for j in range(J):
                out += [f"xi_{j + 1}_x", f"xi_{j + 1}_y"]
        else:
            out += [f"xi_{j + 1}" for j in range(J)]
        for j in range(J):
            out += [f"z_{j + 1}_x", f"z_{j + 1}_y"]
        return out


@dataclass
class ParameterVector:
    values: np.ndarray
    layout: ParameterLayout

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.layout.size,):
            raise LayoutError(f"expected {self.layout.size} parameters, got shape {self.values.shape}")

    def __len__(self) -> int:
        return self.layout.size


def layout_for(config: SourceConfiguration) -> ParameterLayout:
    return ParameterLayout(config.kind, config.n_sources, config.types)


def pack(config: SourceConfiguration) -> ParameterVector:
    layout = layout_for(config)
    J = config.n_sources
    v = np.zeros(layout.size)
    for j, s in enumerate(config.sources):
        v[j] = s.lam
        if config.kind == POINT:
            v[J + 2 * j: J + 2 * j + 2] = s.xi
        else:
            v[J + j] = s.xi
    v[layout.z_slice] = config.locations.ravel()
    return ParameterVector(v, layout)


def unpack(
    vector: ParameterVector | np.ndarray,
    layout: ParameterLayout | None = None,
    domain: Rectangle | None = None,
) -> SourceConfiguration:
    """Inverse of :func:`pack`.

    Point-source vectors whose inactive slots (``xi`` of a monopole, ``lam``
    of a dipole) are nonzero are rejected.
    """
    if isinstance(vector, ParameterVector):
        layout = layout or vector.layout
        values = vector.values
    else:
        if layout is None:
            raise LayoutError("a layout is required for a bare array")
        values = np.asarray(vector, dtype=float)
    if values.shape != (layout.size,):
        raise LayoutError(f"expected {layout.size} parameters, got shape {values.shape}")
    if np.any(values[~layout.active_mask()] != 0.0):
        raise LayoutError("vector violates the monopole/dipole type mask")
    lam, xi, z = layout.split(values)
    if layout.kind == POINT:
        srcs = [PointSource((z[j, 0], z[j, 1]), float(lam[j]), (xi[j, 0], xi[j, 1])) for j in range(layout.n_sources)]
    else:
        srcs = [GaussianSource((z[j, 0], z[j, 1]), float(lam[j]), float(xi[j])) for j in range(layout.n_sources)]
    return SourceConfiguration(layout.kind, tuple(srcs), domain or Rectangle())


def make_point_config(lams: Sequence[float], xis: Sequence, zs: Sequence, domain: Rectangle | None = None):
    srcs = tuple(PointSource(tuple(map(float, z)), float(l), tuple(map(float, x))) for l, x, z in zip(lams, xis, zs))
    return SourceConfiguration(POINT, srcs, domain or Rectangle())


def make_gaussian_config(lams: Sequence[float], xis: Sequence[float], zs: Sequence, domain: Rectangle | None = None):
    srcs = tuple(GaussianSource(tuple(map(float, z)), float(l), float(x)) for l, x, z in zip(lams, xis, zs))
    return SourceConfiguration(GAUSSIAN, srcs, domain or Rectangle())
