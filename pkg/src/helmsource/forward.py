"""Radiated fields of point and Gaussian sources.

Sign convention: fields are ``u = integral of Phi_k(x, y) F(y) dy`` with
``Phi_k = (i/4) H0(k|x - y|)``. Since ``(Delta + k^2) Phi_k = -delta`` this is
the radiating solution of ``Delta u + k^2 u = -F``. Synthetic data and the
inversion share the convention, so reconstructions do not depend on it.

Dipoles enter through the distributional pairing
``<Phi, xi . grad delta_z> = -xi . grad_y Phi(x, y)|_{y=z}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SingularityError
from .sources import GAUSSIAN, POINT, ParameterLayout, Rectangle, SourceConfiguration, pack
from .specfun import hankel1_0, hankel1_1

_SINGULAR_TOL = 1e-9


def _dist(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    d = x - y
    return d, np.hypot(d[..., 0], d[..., 1])


def fundamental_solution(x, y, k):
    """``(i/4) H0(k|x - y|)``; broadcasts over leading axes of ``x``, ``y`` and ``k``."""
    _, r = _dist(x, y)
    if np.any(r == 0.0):
        raise SingularityError("fundamental solution evaluated at x == y")
    return 0.25j * hankel1_0(np.asarray(k) * r)


def fundamental_grad_y(x, y, k):
    """Gradient of ``Phi_k(x, y)`` in ``y``; last axis holds the two components."""
    d, r = _dist(x, y)
    if np.any(r == 0.0):
        raise SingularityError("fundamental solution gradient evaluated at x == y")
    k = np.asarray(k, dtype=float)
    # dPhi/dr = -(i/4) k H1(kr), r = |x - y|, dr/dy = -(x - y)/r
    g = 0.25j * k * hankel1_1(k * r) / r
    return g[..., None] * d


def _check_unit(xhat):
    xhat = np.asarray(xhat, dtype=float)
    if np.any(np.abs(np.hypot(xhat[..., 0], xhat[..., 1]) - 1.0) > 1e-12):
        raise DomainError("far-field direction must be a unit vector")
    return xhat


def farfield_kernel(xhat, y, k):
    """``exp(-i k xhat . y)``."""
    xhat = _check_unit(xhat)
    y = np.asarray(y, dtype=float)
    return np.exp(-1j * np.asarray(k) * np.sum(xhat * y, axis=-1))


# -- point sources ---------------------------------------------------------

def point_near_matrix(obs: np.ndarray, ks: np.ndarray, lam, xi, z) -> np.ndarray:
    """Near field of point sources at ``obs`` (M, 2) for wave numbers ``ks`` -> (M, Nk)."""
    obs = np.asarray(obs, dtype=float).reshape(-1, 2)
    ks = np.atleast_1d(np.asarray(ks, dtype=float))
    lam = np.asarray(lam, dtype=float)
    xi = np.asarray(xi, dtype=float).reshape(-1, 2)
    z = np.asarray(z, dtype=float).reshape(-1, 2)
    d = obs[:, None, :] - z[None, :, :]  # (M, J, 2), x - z
    r = np.hypot(d[..., 0], d[..., 1])
    if np.any(r < _SINGULAR_TOL):
        raise SingularityError("observation point coincides with a source location")
    kr = ks[None, None, :] * r[..., None]  # (M, J, Nk)
    u = np.zeros((obs.shape[0], ks.size), dtype=complex)
    mono = lam != 0.0
    if np.any(mono):
        u += 0.25j * np.einsum("mjk,j->mk", hankel1_0(kr[:, mono]), lam[mono])
    dip = np.any(xi != 0.0, axis=1)
    if np.any(dip):
        # -xi . grad_y Phi = -(i/4) k H1(kr) xi . (x - z)/r
        proj = np.einsum("mjc,jc->mj", d[:, dip], xi[dip]) / r[:, dip]
        u += -0.25j * ks[None, :] * np.einsum("mjk,mj->mk", hankel1_1(kr[:, dip]), proj)
    return u


def point_far_matrix(xhat: np.ndarray, ks: np.ndarray, lam, xi, z) -> np.ndarray:
    """Far-field pattern of point sources -> (M, Nk)."""
    xhat = _check_unit(np.asarray(xhat, dtype=float).reshape(-1, 2))
    ks = np.atleast_1d(np.asarray(ks, dtype=float))
    lam = np.asarray(lam, dtype=float)
    xi = np.asarray(xi, dtype=float).reshape(-1, 2)
    z = np.asarray(z, dtype=float).reshape(-1, 2)
    phase = np.exp(-1j * ks[None, None, :] * (xhat @ z.T)[..., None])  # (M, J, Nk)
    amp = lam[None, :, None] + 1j * ks[None, None, :] * (xhat @ xi.T)[..., None]
    return np.sum(amp * phase, axis=1)


def near_field_point(config: SourceConfiguration, x, k):
    if config.kind != POINT:
        raise TypeError("near_field_point needs a point-source configuration")
    lam, xi, z = pack(config).layout.split(pack(config).values)
    u = point_near_matrix(np.atleast_2d(x), np.atleast_1d(k), lam, xi, z)
    return _squeeze(u, x, k)


def far_field_point(config: SourceConfiguration, xhat, k):
    if config.kind != POINT:
        raise TypeError("far_field_point needs a point-source configuration")
    lam, xi, z = pack(config).layout.split(pack(config).values)
    u = point_far_matrix(np.atleast_2d(xhat), np.atleast_1d(k), lam, xi, z)
    return _squeeze(u, xhat, k)


def _squeeze(u, at, k):
    if np.ndim(at) == 1:
        u = u[0]
    if np.ndim(k) == 0:
        u = u[..., 0]
    return u[()] if np.ndim(u) == 0 else u


# -- meshes and Gaussian sources --------------------------------------------

@dataclass(frozen=True)
class TriangularMesh:
    vertices: np.ndarray  # (nv, 2)
    triangles: np.ndarray  # (nt, 3) vertex indices
    centroids: np.ndarray  # (nt, 2)
    areas: np.ndarray  # (nt,)
    h: float

    def __len__(self) -> int:
        return len(self.triangles)


def triangulate_square(domain: Rectangle, h: float) -> TriangularMesh:
    """Structured mesh: ``ceil(side/h)`` cells per side, each cut into two triangles."""
    if not h > 0:
        raise DomainError("mesh size h must be positive")
    nx = max(1, math.ceil((domain.x1 - domain.x0) / h - 1e-12))
    ny = max(1, math.ceil((domain.y1 - domain.y0) / h - 1e-12))
    xs = np.linspace(domain.x0, domain.x1, nx + 1)
    ys = np.linspace(domain.y0, domain.y1, ny + 1)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    verts = np.column_stack([X.ravel(), Y.ravel()])
    i, j = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    i, j = i.ravel(), j.ravel()
    v00 = i * (ny + 1) + j
    v10 = v00 + (ny + 1)
    v01 = v00 + 1
    v11 = v10 + 1
    tris = np.concatenate([np.column_stack([v00, v10, v11]), np.column_stack([v00, v11, v01])])
    p = verts[tris]
    cent = p.mean(axis=1)
    e1, e2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
    areas = 0.5 * np.abs(e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
    return TriangularMesh(verts, tris, cent, areas, float(h))


def _gaussian_weights(config: SourceConfiguration, mesh: TriangularMesh):
    if config.kind != GAUSSIAN:
        raise TypeError("Gaussian quadrature needs a Gaussian configuration")
    if len(mesh) == 0:
        raise DomainError("empty mesh")
    lam = np.array([s.lam for s in config.sources], dtype=float)
    xi = np.array([s.xi for s in config.sources], dtype=float)
    return _density(mesh.centroids, lam, xi, config.locations) * mesh.areas


def _density(points, lam, xi, z):
    d2 = (points[:, None, 0] - z[None, :, 0]) ** 2 + (points[:, None, 1] - z[None, :, 1]) ** 2
    return np.exp(-d2 * xi[None, :]) @ lam


def _check_outside(obs, domain: Rectangle):
    obs = np.asarray(obs, dtype=float).reshape(-1, 2)
    inside = (obs[:, 0] >= domain.x0) & (obs[:, 0] <= domain.x1) & (obs[:, 1] >= domain.y0) & (obs[:, 1] <= domain.y1)
    if np.any(inside):
        raise SingularityError("near-field observation point inside the source domain")
    return obs


def gaussian_far_matrix(xhat, ks, weights, centroids, chunk: int = 4096) -> np.ndarray:
    """Midpoint-rule far field ``sum_T exp(-i k xhat . y_T) w_T`` -> (M, Nk)."""
    xhat = _check_unit(np.asarray(xhat, dtype=float).reshape(-1, 2))
    ks = np.atleast_1d(np.asarray(ks, dtype=float))
    out = np.zeros((xhat.shape[0], ks.size), dtype=complex)
    keep = weights != 0.0
    w, c = weights[keep], centroids[keep]
    for s in range(0, len(w), chunk):
        proj = xhat @ c[s:s + chunk].T  # (M, T)
        for q, k in enumerate(ks):
            out[:, q] += np.exp(-1j * k * proj) @ w[s:s + chunk]
    return out


def gaussian_near_matrix(obs, ks, weights, centroids, chunk: int = 4096) -> np.ndarray:
    """Midpoint-rule near field ``sum_T Phi_k(x, y_T) w_T`` -> (M, Nk)."""
    obs = np.asarray(obs, dtype=float).reshape(-1, 2)
    ks = np.atleast_1d(np.asarray(ks, dtype=float))
    out = np.zeros((obs.shape[0], ks.size), dtype=complex)
    keep = weights != 0.0
    w, c = weights[keep], centroids[keep]
    for s in range(0, len(w), chunk):
        d = obs[:, None, :] - c[None, s:s + chunk, :]
        r = np.hypot(d[..., 0], d[..., 1])
        for q, k in enumerate(ks):
            out[:, q] += 0.25j * (hankel1_0(k * r) @ w[s:s + chunk])
    return out


def far_field_gaussian(config: SourceConfiguration, mesh: TriangularMesh, xhat, k):
    w = _gaussian_weights(config, mesh)
    u = gaussian_far_matrix(np.atleast_2d(xhat), np.atleast_1d(k), w, mesh.centroids)
    return _squeeze(u, xhat, k)


def near_field_gaussian(config: SourceConfiguration, mesh: TriangularMesh, x, k):
    obs = _check_outside(np.atleast_2d(x), config.domain)
    w = _gaussian_weights(config, mesh)
    u = gaussian_near_matrix(obs, np.atleast_1d(k), w, mesh.centroids)
    return _squeeze(u, x, k)


# -- forward operator -------------------------------------------------------

class ForwardOperator:
    """Parameter vector -> data matrix (angles x wave numbers).

    ``geometry`` supplies ``regime`` and ``observation_points()``; ``ks`` are
    the wave numbers. For Gaussian layouts the kernel over the mesh centroids
    is assembled once, so each call is a single real matrix product.
    """

    def __init__(self, geometry, ks, layout: ParameterLayout, mesh: TriangularMesh | None = None,
                 domain: Rectangle | None = None):
        self.regime = geometry.regime
        self.obs = np.asarray(geometry.observation_points(), dtype=float)
        self.ks = np.atleast_1d(np.asarray(getattr(ks, "nodes", ks), dtype=float))
        self.layout = layout
        self.mesh = mesh
        self.shape = (self.obs.shape[0], self.ks.size)
        if layout.kind == GAUSSIAN:
            if mesh is None:
                raise ValueError("Gaussian sources need a quadrature mesh")
            if self.regime == "near":
                _check_outside(self.obs, domain or Rectangle())
            self._kre, self._kim = self._assemble(mesh)

    def _assemble(self, mesh: TriangularMesh):
        M, Nk = self.shape
        T = len(mesh)
        kre = np.empty((M * Nk, T))
        kim = np.empty((M * Nk, T))
        for q, k in enumerate(self.ks):
            rows = slice(q * M, (q + 1) * M)  # k-major rows
            if self.regime == "near":
                d = self.obs[:, None, :] - mesh.centroids[None, :, :]
                ker = 0.25j * hankel1_0(k * np.hypot(d[..., 0], d[..., 1]))
            else:
                ker = np.exp(-1j * k * (self.obs @ mesh.centroids.T))
            kre[rows] = ker.real * mesh.areas
            kim[rows] = ker.imag * mesh.areas
        return kre, kim

    def __call__(self, values) -> np.ndarray:
        values = values.values if hasattr(values, "values") else values
        lam, xi, z = self.layout.split(values)
        if self.layout.kind == POINT:
            if self.regime == "near":
                return point_near_matrix(self.obs, self.ks, lam, xi, z)
            return point_far_matrix(self.obs, self.ks, lam, xi, z)
        with np.errstate(over="ignore", invalid="ignore"):
            dens = _density(self.mesh.centroids, lam, xi, z)
        flat = self._kre @ dens + 1j * (self._kim @ dens)
        M, Nk = self.shape
        return flat.reshape(Nk, M).T


def forward_operator(phi, geometry, kgrid, mesh: TriangularMesh | None = None) -> np.ndarray:
    """One-shot evaluation of the forward map; build :class:`ForwardOperator` to reuse it."""
    return ForwardOperator(geometry, kgrid, phi.layout, mesh)(phi.values)
