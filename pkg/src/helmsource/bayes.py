"""Misfit potential and the pCN Metropolis-Hastings sampler.

Model behind the sampler:

* intensities (``lam`` and ``xi`` slots active under the type mask) carry a
  centered Gaussian prior of standard deviation ``intensity_prior_std``; the
  pCN autoregression ``sqrt(1 - beta^2) x + beta s W`` leaves it invariant;
* each location ``z_j`` carries the prior ``N(anchor_j, sigma I)`` and is
  proposed independently from that same distribution.

Both proposal kernels are reversible (intensities) or prior-matched
(locations) with respect to the prior, so the acceptance ratio reduces to the
likelihood ratio ``exp(G(current) - G(proposal))``.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import DomainError
from .forward import ForwardOperator, TriangularMesh
from .measure import MeasurementSet
from .sources import ParameterLayout, ParameterVector


@dataclass
class PcnConfig:
    beta: float = 0.03
    sigma: float = 0.0004
    gamma: float | None = None  # None: noise_level * max|data|
    max_iter: int = 10000
    burn_in: int = 3000
    anchors: list | None = None
    seed: int = 0
    intensity_prior_std: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.beta <= 1.0:
            raise DomainError("beta must lie in (0, 1]")
        if not self.sigma >= 0.0:
            raise DomainError("sigma must be non-negative")
        if self.gamma is not None and not self.gamma > 0:
            raise DomainError("gamma must be positive")
        if not 0 <= self.burn_in < self.max_iter:
            raise DomainError("need 0 <= burn_in < max_iter")
        if not self.intensity_prior_std > 0:
            raise DomainError("intensity_prior_std must be positive")

    def anchor_array(self) -> np.ndarray:
        if self.anchors is None:
            raise DomainError("no anchor locations configured")
        return np.asarray(self.anchors, dtype=float).reshape(-1, 2)


def default_gamma(data: MeasurementSet) -> float:
    """Noise standard deviation per real component implied by the noise model."""
    level = data.noise_level if data.noise_level > 0 else 0.05
    return float(level * np.max(np.abs(data.values)))


def potential(phi, data: MeasurementSet, gamma: float, forward: Callable | None = None,
              mesh: TriangularMesh | None = None) -> float:
    """``G = ||Y - K(phi)||^2 / (2 gamma^2)`` with unit weights over all entries."""
    if not gamma > 0:
        raise DomainError("gamma must be positive")
    if forward is None:
        forward = ForwardOperator(data.geometry, data.kgrid, phi.layout, mesh)
    values = phi.values if isinstance(phi, ParameterVector) else phi
    r = data.values - forward(values)
    return float(np.vdot(r, r).real / (2.0 * gamma * gamma))


def propose(state: np.ndarray, config: PcnConfig, rng: np.random.Generator, layout: ParameterLayout) -> np.ndarray:
    """One pCN proposal. Draw order: intensity slots, then location slots."""
    state = np.asarray(state, dtype=float)
    active = layout.active_mask()
    zs = layout.z_slice
    intensity = np.ones(layout.size, dtype=bool)
    intensity[zs] = False
    n_int = int(intensity.sum())
    w = rng.standard_normal(n_int)
    new = state.copy()
    s = config.intensity_prior_std
    new[intensity] = math.sqrt(1.0 - config.beta ** 2) * state[intensity] + config.beta * s * w
    new[intensity & ~active] = 0.0
    anchors = config.anchor_array()
    if anchors.shape != (layout.n_sources, 2):
        raise DomainError(f"need {layout.n_sources} anchors, got {anchors.shape[0]}")
    new[zs] = anchors.ravel() + math.sqrt(config.sigma) * rng.standard_normal(2 * layout.n_sources)
    return new


def accept_probability(g_current: float, g_proposed: float) -> float:
    if not np.isfinite(g_proposed):
        return 0.0
    return float(math.exp(min(0.0, g_current - g_proposed)))


def mh_step(state: np.ndarray, g_state: float, potential_fn: Callable, config: PcnConfig,
            rng: np.random.Generator, layout: ParameterLayout):
    """One Metropolis-Hastings transition.

    Returns ``(next_state, next_potential, accepted, flagged)``; ``flagged``
    marks a proposal whose potential was not finite (always rejected).
    """
    cand = propose(state, config, rng, layout)
    g_cand = potential_fn(cand)
    u = rng.uniform()
    flagged = not np.isfinite(g_cand)
    if not flagged and accept_probability(g_state, g_cand) >= u:
        return cand, g_cand, True, False
    return state, g_state, False, flagged


@dataclass
class MarkovChain:
    samples: np.ndarray  # (max_iter + 1, N)
    potentials: np.ndarray  # (max_iter + 1,)
    accepted: int
    layout: ParameterLayout
    config: PcnConfig
    n_flagged: int = 0

    @property
    def acceptance_rate(self) -> float:
        n = len(self.samples) - 1
        return self.accepted / n if n else 0.0

    def __len__(self) -> int:
        return len(self.samples)


def initial_state(layout: ParameterLayout, config: PcnConfig) -> np.ndarray:
    """Zero intensities, locations at the anchors."""
    x = np.zeros(layout.size)
    x[layout.z_slice] = config.anchor_array().ravel()
    return x


def least_squares_start(data: MeasurementSet, layout: ParameterLayout, config: PcnConfig,
                        mesh: TriangularMesh | None = None) -> np.ndarray:
    """Intensities fitted to ``data`` by least squares with locations pinned at the anchors.

    Gaussian decay rates are kept above 1e-3 and start from 1; everything else
    starts from 0. Inactive slots stay 0.
    """
    from scipy.optimize import least_squares

    fwd = ForwardOperator(data.geometry, data.kgrid, layout, mesh)
    x = initial_state(layout, config)
    free = np.ones(layout.size, dtype=bool)
    free[layout.z_slice] = False
    free &= layout.active_mask()
    lo = np.full(layout.size, -np.inf)
    p0 = np.zeros(layout.size)
    if layout.kind == "gaussian":
        lo[layout.xi_slice] = 1e-3
        p0[layout.xi_slice] = 1.0

    def residual(p):
        y = x.copy()
        y[free] = p
        r = data.values - fwd(y)
        return np.concatenate([r.real.ravel(), r.imag.ravel()])

    sol = least_squares(residual, p0[free], bounds=(lo[free], np.inf))
    x[free] = sol.x
    return x


def run_chain(data: MeasurementSet | None, config: PcnConfig, layout: ParameterLayout,
              initial: np.ndarray | None = None, mesh: TriangularMesh | None = None,
              potential_fn: Callable | None = None) -> MarkovChain:
    """Run ``config.max_iter`` pCN-MH steps.

    ``potential_fn`` replaces the data misfit (used for testing the kernel);
    otherwise the forward operator is assembled once from ``data``.
    """
    rng = np.random.default_rng(config.seed)
    if potential_fn is None:
        if data is None:
            raise ValueError("data is required unless potential_fn is given")
        gamma = config.gamma or default_gamma(data)
        fwd = ForwardOperator(data.geometry, data.kgrid, layout, mesh)
        scale = 1.0 / (2.0 * gamma * gamma)
        y = data.values

        def potential_fn(v):
            with np.errstate(over="ignore", invalid="ignore"):
                r = y - fwd(v)
                return float(np.vdot(r, r).real * scale)

    x = initial_state(layout, config) if initial is None else np.array(initial, dtype=float)
    if x.shape != (layout.size,):
        raise DomainError(f"initial state must have {layout.size} entries")
    g = potential_fn(x)
    samples = np.empty((config.max_iter + 1, layout.size))
    pots = np.empty(config.max_iter + 1)
    samples[0], pots[0] = x, g
    accepted = flagged = 0
    for n in range(config.max_iter):
        x, g, ok, bad = mh_step(x, g, potential_fn, config, rng, layout)
        accepted += ok
        flagged += bad
        samples[n + 1], pots[n + 1] = x, g
    return MarkovChain(samples, pots, accepted, layout, config, flagged)


@dataclass
class PosteriorSummary:
    mean: np.ndarray
    std: np.ndarray
    median: np.ndarray
    q025: np.ndarray
    q975: np.ndarray
    names: list[str]
    acceptance_rate: float
    burn_in: int

    def to_dict(self) -> dict:
        return {
            "names": self.names,
            "cm": self.mean.tolist(),
            "std": self.std.tolist(),
            "median": self.median.tolist(),
            "q025": self.q025.tolist(),
            "q975": self.q975.tolist(),
            "acceptance_rate": self.acceptance_rate,
            "burn_in": self.burn_in,
        }

    @classmethod
    def from_dict(cls, d: dict) -> PosteriorSummary:
        arr = lambda key: np.asarray(d[key], dtype=float)
        return cls(arr("cm"), arr("std"), arr("median"), arr("q025"), arr("q975"), list(d["names"]),
                   float(d["acceptance_rate"]), int(d["burn_in"]))


def summarize(chain: MarkovChain | np.ndarray, burn_in: int | None = None) -> PosteriorSummary:
    """Coordinate-wise conditional mean, std and 95% band over post-burn-in samples."""
    if isinstance(chain, MarkovChain):
        samples, names, rate = chain.samples, chain.layout.names(), chain.acceptance_rate
        burn_in = chain.config.burn_in if burn_in is None else burn_in
    else:
        samples = np.atleast_2d(np.asarray(chain, dtype=float))
        names, rate = [f"p{i}" for i in range(samples.shape[1])], float("nan")
        burn_in = burn_in or 0
    kept = samples[burn_in:]
    if len(kept) == 0:
        raise ValueError("no samples left after burn-in")
    q = np.quantile(kept, [0.025, 0.5, 0.975], axis=0)
    return PosteriorSummary(kept.mean(axis=0), kept.std(axis=0), q[1], q[0], q[2], names, rate, burn_in)


# -- files ---------------------------------------------------------------------

def write_chain_csv(chain: MarkovChain, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(chain.layout.names())
        for row in chain.samples:
            w.writerow([repr(float(v)) for v in row])


def read_chain_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array([[float(v) for v in r] for r in rows[1:]])


def write_summary(summary: PosteriorSummary, path) -> None:
    Path(path).write_text(json.dumps(summary.to_dict(), indent=1))


def read_summary(path) -> PosteriorSummary:
    return PosteriorSummary.from_dict(json.loads(Path(path).read_text()))
