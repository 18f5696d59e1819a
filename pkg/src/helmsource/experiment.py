"""Experiment configuration and the simulate -> dsm -> invert pipeline.

An experiment is a JSON document; every field except ``truth`` has a default
(the near-field three-monopole setup). Artifacts written to the output
directory:

=============  ============================================================
dataset.json   ``{"clean": dataset, "noisy": dataset}``
indicator.csv  ``x,y,value`` rows over the sampling grid
peaks.json     extracted local maxima
chain.csv      one chain sample per row
summary.json   posterior summary
report.json    recovered vs true parameters
=============  ============================================================
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.optimize import linear_sum_assignment

from .bayes import PcnConfig, least_squares_start, read_summary, run_chain, summarize, write_chain_csv, write_summary
from .dsm import SamplingGrid, default_min_separation, find_peaks, indicator, read_peaks, write_indicator_csv, write_peaks
from .errors import ConfigError, DomainError, HelmsourceError
from .forward import triangulate_square
from .measure import (
    APERTURES,
    DEFAULT_ANGLES,
    MeasurementGeometry,
    WaveNumberGrid,
    add_noise,
    dataset_from_dict,
    dataset_to_dict,
    synthesize,
    wavenumber_grid,
)
from .sources import (
    GAUSSIAN,
    POINT,
    GaussianSource,
    PointSource,
    Rectangle,
    SourceConfiguration,
    layout_for,
    pack,
    validate,
)

INITIAL_CHOICES = ("zero", "least_squares")


class StageError(HelmsourceError):
    """A pipeline stage failed; ``stage`` names it, ``__cause__`` holds the original error."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


@dataclass
class DsmSettings:
    nx: int = 201
    ny: int = 201
    threshold: float = 0.5
    min_separation: float | None = None  # None: pi / k_max
    max_peaks: int | None = None


@dataclass
class ExperimentConfig:
    truth: SourceConfiguration
    geometry: MeasurementGeometry = field(default_factory=lambda: MeasurementGeometry("near", APERTURES["S1"], 80, 6.5))
    kgrid: WaveNumberGrid = field(default_factory=lambda: wavenumber_grid(5.0, 10.0, 10))
    noise_level: float = 0.05
    truth_h: float = 0.06
    inversion_h: float = 0.12
    dsm: DsmSettings = field(default_factory=DsmSettings)
    pcn: PcnConfig = field(default_factory=lambda: PcnConfig(intensity_prior_std=5.0))
    initial: str = "zero"
    data_seed: int = 0
    chain_seed: int = 0
    output: str = "out"
    name: str = "experiment"

    def with_seed(self, seed: int) -> ExperimentConfig:
        return replace(self, data_seed=seed, chain_seed=seed, pcn=replace(self.pcn, seed=seed))


SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "ExperimentConfig",
    "type": "object",
    "required": ["truth"],
    "properties": {
        "name": {"type": "string"},
        "truth": {
            "type": "object",
            "required": ["kind", "sources"],
            "properties": {
                "kind": {"enum": [POINT, GAUSSIAN]},
                "domain": {"type": "array", "items": {"type": "number"}, "minItems": 4, "maxItems": 4,
                           "description": "[x0, x1, y0, y1], default [-4, 4, -4, 4]"},
                "sources": {
                    "type": "array", "minItems": 1,
                    "items": {
                        "type": "object", "required": ["z"],
                        "properties": {
                            "z": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
                            "lambda": {"type": "number"},
                            "xi": {"description": "[x, y] for point sources, positive number for gaussian"},
                        },
                    },
                },
            },
        },
        "geometry": {
            "type": "object",
            "properties": {
                "regime": {"enum": ["near", "far"], "default": "near"},
                "aperture": {"description": "S1 | S2 | S3 or [theta0, theta1]", "default": "S1"},
                "n_angles": {"type": "integer", "minimum": 1, "description": "default 80/40/20 for S1/S2/S3"},
                "radius": {"type": "number", "default": 6.5},
            },
        },
        "kgrid": {"type": "object", "properties": {
            "km": {"type": "number", "default": 5}, "kM": {"type": "number", "default": 10},
            "Nk": {"type": "integer", "default": 10}}},
        "noise_level": {"type": "number", "minimum": 0, "default": 0.05},
        "meshes": {"type": "object", "properties": {
            "truth_h": {"type": "number", "default": 0.06}, "inversion_h": {"type": "number", "default": 0.12}}},
        "dsm": {"type": "object", "properties": {
            "grid": {"type": "array", "items": {"type": "integer"}, "default": [201, 201]},
            "threshold": {"type": "number", "default": 0.5},
            "min_separation": {"type": ["number", "null"], "default": None},
            "max_peaks": {"type": ["integer", "null"], "default": None}}},
        "pcn": {"type": "object", "properties": {
            "beta": {"type": "number", "default": 0.03},
            "sigma": {"type": "number", "default": 0.0004},
            "gamma": {"type": ["number", "null"], "default": None},
            "max_iter": {"type": "integer", "default": 10000},
            "burn_in": {"type": "integer", "default": 3000},
            "anchors": {"type": ["array", "null"], "default": None},
            "intensity_prior_std": {"type": "number", "default": 5.0},
            "initial": {"enum": list(INITIAL_CHOICES), "default": "zero"}}},
        "seeds": {"type": "object", "properties": {
            "data": {"type": "integer", "default": 0}, "chain": {"type": "integer", "default": 0}}},
        "output": {"type": "string", "default": "out"},
    },
}


# -- parsing -------------------------------------------------------------------

def _join(path: str, key: str) -> str:
    return f"{path}.{key}" if path else key


def _section(d: dict, key: str, path: str) -> dict:
    v = d.get(key, {})
    if not isinstance(v, dict):
        raise ConfigError("must be an object", _join(path, key))
    return v


def _num(d: dict, key: str, default, path: str, kind=float, allow_none=False):
    v = d.get(key, default)
    if v is None and allow_none:
        return None
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"expected a number, got {v!r}", _join(path, key))
    if kind is int:
        if float(v) != int(v):
            raise ConfigError(f"expected an integer, got {v!r}", _join(path, key))
        return int(v)
    if not math.isfinite(v):
        raise ConfigError("must be finite", _join(path, key))
    return float(v)


def _pair(v, path: str) -> tuple[float, float]:
    if not (isinstance(v, (list, tuple)) and len(v) == 2 and all(isinstance(c, (int, float)) for c in v)):
        raise ConfigError(f"expected [x, y], got {v!r}", path)
    return float(v[0]), float(v[1])


def _parse_truth(d) -> SourceConfiguration:
    if not isinstance(d, dict):
        raise ConfigError("must be an object", "truth")
    kind = d.get("kind")
    if kind not in (POINT, GAUSSIAN):
        raise ConfigError(f"must be 'point' or 'gaussian', got {kind!r}", "truth.kind")
    dom = d.get("domain", [-4.0, 4.0, -4.0, 4.0])
    try:
        domain = Rectangle(*map(float, dom))
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc), "truth.domain") from None
    raw = d.get("sources")
    if not isinstance(raw, list) or not raw:
        raise ConfigError("need a non-empty list", "truth.sources")
    sources = []
    for j, s in enumerate(raw):
        p = f"truth.sources[{j}]"
        if not isinstance(s, dict):
            raise ConfigError("must be an object", p)
        z = _pair(s.get("z"), p + ".z")
        lam = _num(s, "lambda", 0.0, p)
        if kind == POINT:
            sources.append(PointSource(z, lam, _pair(s.get("xi", [0.0, 0.0]), p + ".xi")))
        else:
            sources.append(GaussianSource(z, lam, _num(s, "xi", None, p)))
    cfg = SourceConfiguration(kind, tuple(sources), domain)
    problems = validate(cfg)
    if problems:
        raise ConfigError("; ".join(problems), "truth")
    return cfg


def _parse_geometry(d: dict, domain: Rectangle) -> MeasurementGeometry:
    regime = d.get("regime", "near")
    if regime not in ("near", "far"):
        raise ConfigError(f"must be 'near' or 'far', got {regime!r}", "geometry.regime")
    ap = d.get("aperture", "S1")
    if isinstance(ap, str):
        if ap not in APERTURES:
            raise ConfigError(f"unknown aperture {ap!r}", "geometry.aperture")
        n_default = DEFAULT_ANGLES[ap]
        ap = APERTURES[ap]
    else:
        ap = _pair(ap, "geometry.aperture")
        n_default = 80
        if not 0.0 < ap[1] - ap[0] <= 2 * math.pi:
            raise ConfigError("aperture width must lie in (0, 2*pi]", "geometry.aperture")
    n = _num(d, "n_angles", n_default, "geometry", int)
    radius = _num(d, "radius", 6.5, "geometry") if regime == "near" else None
    if radius is not None and radius <= domain.circumradius:
        raise ConfigError(f"radius must exceed the domain circumradius {domain.circumradius:.4g}", "geometry.radius")
    try:
        return MeasurementGeometry(regime, ap, n, radius)
    except DomainError as exc:
        raise ConfigError(str(exc), "geometry") from None


def parse_config(d: dict) -> ExperimentConfig:
    if not isinstance(d, dict):
        raise ConfigError("top level must be an object")
    if "truth" not in d:
        raise ConfigError("required field is missing", "truth")
    truth = _parse_truth(d["truth"])
    geom = _parse_geometry(_section(d, "geometry", ""), truth.domain)

    kd = _section(d, "kgrid", "")
    try:
        kgrid = wavenumber_grid(_num(kd, "km", 5.0, "kgrid"), _num(kd, "kM", 10.0, "kgrid"), _num(kd, "Nk", 10, "kgrid", int))
    except DomainError as exc:
        raise ConfigError(str(exc), "kgrid") from None

    noise = _num(d, "noise_level", 0.05, "")
    if noise < 0:
        raise ConfigError("must be >= 0", "noise_level")

    md = _section(d, "meshes", "")
    truth_h, inv_h = _num(md, "truth_h", 0.06, "meshes"), _num(md, "inversion_h", 0.12, "meshes")
    for name, h in (("truth_h", truth_h), ("inversion_h", inv_h)):
        if not 0 < h < min(truth.domain.x1 - truth.domain.x0, truth.domain.y1 - truth.domain.y0):
            raise ConfigError("must be positive and below the domain side", f"meshes.{name}")

    dd = _section(d, "dsm", "")
    grid = dd.get("grid", [201, 201])
    if not (isinstance(grid, list) and len(grid) == 2 and all(isinstance(g, int) and g >= 2 for g in grid)):
        raise ConfigError("expected [nx, ny] with both >= 2", "dsm.grid")
    dsm = DsmSettings(grid[0], grid[1], _num(dd, "threshold", 0.5, "dsm"),
                      _num(dd, "min_separation", None, "dsm", allow_none=True),
                      _num(dd, "max_peaks", None, "dsm", int, allow_none=True))
    if not 0 <= dsm.threshold <= 1:
        raise ConfigError("must lie in [0, 1]", "dsm.threshold")

    sd = _section(d, "seeds", "")
    data_seed, chain_seed = _num(sd, "data", 0, "seeds", int), _num(sd, "chain", 0, "seeds", int)

    pd = _section(d, "pcn", "")
    anchors = pd.get("anchors")
    if anchors is not None:
        if not isinstance(anchors, list):
            raise ConfigError("expected a list of [x, y]", "pcn.anchors")
        anchors = [_pair(a, f"pcn.anchors[{i}]") for i, a in enumerate(anchors)]
        if len(anchors) != truth.n_sources:
            raise ConfigError(f"need {truth.n_sources} anchors (one per source), got {len(anchors)}", "pcn.anchors")
    initial = pd.get("initial", "zero")
    if initial not in INITIAL_CHOICES:
        raise ConfigError(f"must be one of {INITIAL_CHOICES}", "pcn.initial")
    try:
        pcn = PcnConfig(
            beta=_num(pd, "beta", 0.03, "pcn"),
            sigma=_num(pd, "sigma", 0.0004, "pcn"),
            gamma=_num(pd, "gamma", None, "pcn", allow_none=True),
            max_iter=_num(pd, "max_iter", 10000, "pcn", int),
            burn_in=_num(pd, "burn_in", 3000, "pcn", int),
            anchors=anchors,
            seed=chain_seed,
            intensity_prior_std=_num(pd, "intensity_prior_std", 5.0, "pcn"),
        )
    except DomainError as exc:
        raise ConfigError(str(exc), "pcn") from None

    out = d.get("output", "out")
    if not isinstance(out, str):
        raise ConfigError("must be a string", "output")
    return ExperimentConfig(truth, geom, kgrid, noise, truth_h, inv_h, dsm, pcn, initial, data_seed, chain_seed,
                            out, str(d.get("name", "experiment")))


def load_config(path) -> ExperimentConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return parse_config(raw)


def bundled_config_path(name: str) -> Path:
    p = Path(__file__).parent / "configs" / f"{name}.json"
    if not p.exists():
        raise ConfigError(f"no bundled config named {name!r}")
    return p


def load_bundled(name: str) -> ExperimentConfig:
    return load_config(bundled_config_path(name))


# -- stages --------------------------------------------------------------------

def _truth_mesh(cfg: ExperimentConfig):
    return triangulate_square(cfg.truth.domain, cfg.truth_h) if cfg.truth.kind == GAUSSIAN else None


def _inversion_mesh(cfg: ExperimentConfig):
    return triangulate_square(cfg.truth.domain, cfg.inversion_h) if cfg.truth.kind == GAUSSIAN else None


def simulate(cfg: ExperimentConfig):
    """Returns ``(clean, noisy)`` measurement sets."""
    clean = synthesize(cfg.truth, cfg.geometry, cfg.kgrid, _truth_mesh(cfg))
    return clean, add_noise(clean, cfg.noise_level, cfg.data_seed)


def locate(cfg: ExperimentConfig, data):
    grid = SamplingGrid(cfg.truth.domain, cfg.dsm.nx, cfg.dsm.ny)
    field_ = indicator(data, grid)
    sep = cfg.dsm.min_separation
    if sep is None:
        sep = default_min_separation(cfg.kgrid.k_max)
    return field_, find_peaks(field_, cfg.dsm.threshold, sep, cfg.dsm.max_peaks)


def match(truth_points, found_points) -> list[tuple[int, int]]:
    """Minimal total distance pairing (row index into truth, column into found)."""
    a = np.asarray(truth_points, dtype=float).reshape(-1, 2)
    b = np.asarray(found_points, dtype=float).reshape(-1, 2)
    if len(a) == 0 or len(b) == 0:
        return []
    cost = np.linalg.norm(a[:, None, :] - b[None, :, :], axis=2)
    rows, cols = linear_sum_assignment(cost)
    return [(int(r), int(c)) for r, c in zip(rows, cols)]


def anchors_from_peaks(cfg: ExperimentConfig, peaks) -> np.ndarray:
    """One anchor per source slot, taken from the DSM peaks.

    The number of sources and their monopole/dipole types are part of the
    model; peaks are assigned to source slots by minimal total distance.
    """
    J = cfg.truth.n_sources
    locs = peaks.locations
    if len(locs) < J:
        raise DomainError(f"DSM found {len(locs)} peaks for {J} sources")
    anchors = np.empty((J, 2))
    for r, c in match(cfg.truth.locations, locs):
        anchors[r] = locs[c]
    return anchors


def invert(cfg: ExperimentConfig, data, anchors):
    layout = layout_for(cfg.truth)
    pcn = replace(cfg.pcn, anchors=np.asarray(anchors, dtype=float).tolist(), seed=cfg.chain_seed)
    mesh = _inversion_mesh(cfg)
    x0 = least_squares_start(data, layout, pcn, mesh) if cfg.initial == "least_squares" else None
    return run_chain(data, pcn, layout, initial=x0, mesh=mesh)


def build_report(cfg: ExperimentConfig, peaks, summary=None) -> dict:
    truth = cfg.truth
    tz = truth.locations
    rep: dict = {"name": cfg.name, "n_sources": truth.n_sources, "dsm": []}
    for r, c in match(tz, peaks.locations):
        p = peaks.locations[c]
        rep["dsm"].append({"source": r + 1, "peak": p.tolist(), "location_error": float(np.linalg.norm(p - tz[r]))})
    rep["dsm"].sort(key=lambda e: e["source"])
    rep["n_peaks"] = len(peaks)
    if summary is None:
        return rep
    layout = layout_for(truth)
    exact = pack(truth).values
    lam, xi, z = layout.split(summary.mean)
    t_lam, t_xi, t_z = layout.split(exact)
    rows = []
    for j in range(truth.n_sources):
        row = {"source": j + 1, "type": layout.types[j] if truth.kind == POINT else GAUSSIAN,
               "z_true": t_z[j].tolist(), "z_cm": z[j].tolist(),
               "location_error": float(np.linalg.norm(z[j] - t_z[j]))}
        if t_lam[j] != 0:
            row["lambda_true"], row["lambda_cm"] = float(t_lam[j]), float(lam[j])
            row["lambda_rel_error"] = float(abs(lam[j] - t_lam[j]) / abs(t_lam[j]))
        xt, xc = np.atleast_1d(t_xi[j]), np.atleast_1d(xi[j])
        if np.any(xt != 0):
            row["xi_true"], row["xi_cm"] = xt.tolist(), xc.tolist()
            row["xi_rel_error"] = float(np.linalg.norm(xc - xt) / np.linalg.norm(xt))
        rows.append(row)
    rep["bayes"] = rows
    rep["acceptance_rate"] = summary.acceptance_rate
    if summary.acceptance_rate == 0:
        rep["warning"] = "chain never left its initial state"
    return rep


# -- file plumbing -------------------------------------------------------------

def write_datasets(clean, noisy, path) -> None:
    Path(path).write_text(json.dumps({"clean": dataset_to_dict(clean), "noisy": dataset_to_dict(noisy)}))


def read_datasets(path):
    d = json.loads(Path(path).read_text())
    return dataset_from_dict(d["clean"]), dataset_from_dict(d["noisy"])


def _check_regime(cfg: ExperimentConfig, data) -> None:
    if data.geometry != cfg.geometry or data.kgrid != cfg.kgrid:
        raise ConfigError("dataset.json does not match the configured geometry/kgrid", "geometry")


def _stage(name: str, fn, *args):
    try:
        return fn(*args)
    except ConfigError:
        raise
    except (HelmsourceError, ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        raise StageError(name, str(exc)) from exc


def run_simulate(cfg: ExperimentConfig, out: Path):
    out.mkdir(parents=True, exist_ok=True)
    clean, noisy = _stage("simulate", simulate, cfg)
    write_datasets(clean, noisy, out / "dataset.json")
    return clean, noisy


def _load_or_simulate(cfg: ExperimentConfig, out: Path):
    path = out / "dataset.json"
    if path.exists():
        clean, noisy = read_datasets(path)
        _check_regime(cfg, noisy)
        return clean, noisy
    return run_simulate(cfg, out)


def run_dsm(cfg: ExperimentConfig, out: Path):
    _, noisy = _load_or_simulate(cfg, out)
    field_, peaks = _stage("dsm", locate, cfg, noisy)
    write_indicator_csv(field_, out / "indicator.csv")
    write_peaks(peaks, out / "peaks.json")
    (out / "report.json").write_text(json.dumps(build_report(cfg, peaks), indent=1))
    return field_, peaks


def run_invert(cfg: ExperimentConfig, out: Path):
    _, noisy = _load_or_simulate(cfg, out)
    if cfg.pcn.anchors is not None:
        anchors = cfg.pcn.anchor_array()
        peaks = read_peaks(out / "peaks.json") if (out / "peaks.json").exists() else None
    else:
        if not (out / "peaks.json").exists():
            run_dsm(cfg, out)
        peaks = read_peaks(out / "peaks.json")
        anchors = _stage("invert", anchors_from_peaks, cfg, peaks)
    chain = _stage("invert", invert, cfg, noisy, anchors)
    write_chain_csv(chain, out / "chain.csv")
    summary = summarize(chain)
    write_summary(summary, out / "summary.json")
    if peaks is not None:
        (out / "report.json").write_text(json.dumps(build_report(cfg, peaks, read_summary(out / "summary.json")), indent=1))
    return chain, summary


def run_pipeline(cfg: ExperimentConfig, out=None, dsm_only: bool = False) -> Path:
    """Run every stage, writing artifacts under ``out`` (default: the configured output)."""
    out = Path(out or cfg.output)
    run_simulate(cfg, out)
    run_dsm(cfg, out)
    if not dsm_only:
        run_invert(cfg, out)
    return out
