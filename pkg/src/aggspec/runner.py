"""Batch execution of scenarios: pipeline per sweep point, output files, manifest."""
from __future__ import annotations

import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .errors import AggSpecError
from .excitonics import (
    ExcitonBasis,
    Polarization,
    coupling_matrix,
    diagonalize,
    format_stick_table,
    format_wavefunction_table,
    oscillator_strengths,
    ring_eigenvalues_analytic,
)
from .geometry import (
    AggregateGeometry,
    build_bent_chain,
    build_chain,
    build_ellipse,
    build_ring,
    format_geometry_table,
)
from .lineshape import (
    EnergyGrid,
    LineshapeModel,
    electronic_green,
    load_tabulated_lineshape,
    read_lineshape_table,
    vibronic_green,
)
from .scenario import ScenarioSpec
from .spectra import ces_spectrum, monomer_spectrum

log = logging.getLogger(__name__)

DEFAULT_GRID_POINTS = 16384
LORENTZIAN_PAD = 40.0  # grid margin in peak widths
SUM_RULE_TOL = 0.01


@dataclass
class RunManifest:
    scenario_id: str
    library_version: str
    runs: list[dict[str, Any]] = field(default_factory=list)
    manifest_path: Path | None = None

    @property
    def ok(self) -> bool:
        return all(r["status"] == "ok" for r in self.runs)

    def to_json(self) -> str:
        doc = {"scenario": self.scenario_id, "library_version": self.library_version, "runs": self.runs}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def build_geometry(params: dict[str, Any]) -> AggregateGeometry:
    kind = params["kind"]
    if kind == "chain":
        return build_chain(params["n"], params["dipole"])
    if kind == "bent_chain":
        return build_bent_chain(
            params["n"], params["vertex"], params["bend_deg"], params["dipole"], frame=params["dipole_frame"]
        )
    if kind == "ring":
        return build_ring(params["n"], params["tangent_deg"], params["polar_deg"])
    return build_ellipse(
        params["n"], params["flattening"], params["tangent_deg"], params["polar_deg"],
        convention=params["ellipse_convention"],
    )


def default_grid(lineshape: dict[str, Any], basis: ExcitonBasis, v_max: float, base_dir=None) -> EnergyGrid:
    """Energy grid enclosing the monomer band, every shifted line and the 1/E tails."""
    c_lo = min(0.0, float(basis.energies.min()) * v_max)
    c_hi = max(0.0, float(basis.energies.max()) * v_max)
    model = lineshape["model"]
    if model == "vibronic":
        width = lineshape["width"]
        pad = LORENTZIAN_PAD * width
        lo = lineshape["e00"] - pad + c_lo
        hi = lineshape["e00"] + (lineshape["n_peaks"] - 1) * lineshape["vib_spacing"] + pad + c_hi
        n = max(DEFAULT_GRID_POINTS, int(np.ceil((hi - lo) / (width / 8.0))) + 1)
    elif model == "electronic":
        delta = lineshape["delta"]
        pad = max(200.0 * delta, 50.0)
        lo = lineshape["epsilon"] - pad + c_lo
        hi = lineshape["epsilon"] + pad + c_hi
        n = max(DEFAULT_GRID_POINTS, int(np.ceil((hi - lo) / (delta / 4.0))) + 1)
    else:
        table = read_lineshape_table(_resolve(lineshape["file"], base_dir))
        span = table[-1, 0] - table[0, 0]
        lo = table[0, 0] - 4.0 * span + c_lo
        hi = table[-1, 0] + 4.0 * span + c_hi
        n = DEFAULT_GRID_POINTS
    return EnergyGrid(float(lo), float(hi), int(n))


def _resolve(path, base_dir) -> Path:
    p = Path(path)
    if not p.is_absolute() and base_dir is not None:
        p = Path(base_dir) / p
    return p


def build_green(lineshape: dict[str, Any], grid: EnergyGrid, base_dir=None):
    model = lineshape["model"]
    if model == "vibronic":
        m = LineshapeModel(
            e00=lineshape["e00"],
            vib_spacing=lineshape["vib_spacing"],
            huang_rhys=lineshape["huang_rhys"],
            n_peaks=lineshape["n_peaks"],
            width=lineshape["width"],
            broadening=lineshape["broadening"],
        )
        return vibronic_green(m, grid)
    if model == "electronic":
        return electronic_green(lineshape["epsilon"], lineshape["delta"], grid)
    table = read_lineshape_table(_resolve(lineshape["file"], base_dir))
    return load_tabulated_lineshape(table, grid)


def _check(value: float, tolerance: float) -> dict[str, Any]:
    return {"value": float(value), "tolerance": float(tolerance), "passed": bool(value < tolerance)}


def _basis_checks(coupling, basis, geom) -> dict[str, Any]:
    v, a, c = coupling.values, basis.eigenvectors, basis.eigenvalues
    scale = max(float(np.abs(v).max()), 1e-300)
    checks = {
        "eigen_residual": _check(np.abs(v @ a - a * c).max() / scale, 1e-10),
        "orthonormality": _check(np.abs(a.T @ a - np.eye(basis.n)).max(), 1e-10),
        "trace": _check(abs(c.sum()) / scale, 1e-10),
    }
    if geom.kind == "ring" and geom.n % 2 == 0:
        analytic = np.sort(ring_eigenvalues_analytic(v[0], geom.n))
        checks["circulant"] = _check(np.abs(analytic - c).max() / scale, 1e-10)
    return checks


def evaluate_point(point: dict[str, Any], base_dir=None, grid_override=None) -> dict[str, Any]:
    """Run the full pipeline for one resolved parameter set.

    Returns output texts keyed by file name, invariant checks and the
    in-memory results. Nothing is written to disk here.
    """
    geo, ls, sp = point["geometry"], point["lineshape"], point["spectra"]
    outputs = sp["outputs"]
    geom = build_geometry(geo)
    coupling = coupling_matrix(
        geom, nearest_neighbour_only=geo["coupling"] == "nearest", energy_unit=geo["energy_unit"]
    )
    basis = diagonalize(coupling)
    pol = Polarization.parse(sp["polarization"])
    checks = _basis_checks(coupling, basis, geom)
    texts: dict[str, str] = {}
    results: dict[str, Any] = {"geometry": geom, "coupling": coupling, "basis": basis}

    if "geometry" in outputs:
        texts["geometry.tsv"] = format_geometry_table(geom)
    if "sticks" in outputs:
        osc = oscillator_strengths(basis, pol)
        texts["sticks.tsv"] = format_stick_table(basis, osc, pol)
    if "wavefunctions" in outputs:
        texts["wavefunctions.tsv"] = format_wavefunction_table(basis)

    if "monomer" in outputs or "ces" in outputs:
        grid = default_grid(ls, basis, max(sp["v_abs"]), base_dir)
        overrides = dict(grid_override or {})
        for key, attr in (("grid_min", "e_min"), ("grid_max", "e_max"), ("grid_points", "n_points")):
            if sp.get(key) is not None:
                overrides.setdefault(attr, sp[key])
        if overrides:
            grid = EnergyGrid(
                float(overrides.get("e_min", grid.e_min)),
                float(overrides.get("e_max", grid.e_max)),
                int(overrides.get("n_points", grid.n_points)),
            )
        green = build_green(ls, grid, base_dir)
        results["green"] = green
        if "monomer" in outputs:
            mono = monomer_spectrum(geom, pol, green, normalize=True)
            texts["monomer.tsv"] = mono.to_table()
            results["monomer"] = mono
        if "ces" in outputs:
            results["ces"] = {}
            for v_abs in sp["v_abs"]:
                spec = ces_spectrum(basis, pol, green, v_abs)
                tag = f"{v_abs:g}"
                texts[f"ces_V{tag}.tsv"] = spec.to_table()
                results["ces"][v_abs] = spec
                expected = np.pi if not spec.metadata["zero_strength"] else 0.0
                rel = abs(spec.weight() - expected) / np.pi
                checks[f"sum_rule_V{tag}"] = _check(rel, SUM_RULE_TOL)
                checks[f"positivity_V{tag}"] = _check(max(-float(spec.absorption.min()), 0.0), 1e-12 + 1e-300)
    return {"texts": texts, "checks": checks, "results": results}


def _worker(payload):
    index, point, base_dir, grid_override = payload
    start = time.perf_counter()
    try:
        out = evaluate_point(point, base_dir, grid_override)
        status = "ok" if all(c["passed"] for c in out["checks"].values()) else "invariant_failed"
        return index, status, None, out["texts"], out["checks"], time.perf_counter() - start
    except AggSpecError as exc:
        return index, "failed", f"{type(exc).__name__}: {exc}", {}, {}, time.perf_counter() - start


def _jsonable(value):
    if isinstance(value, tuple):
        return list(value)
    return value


def run(spec: ScenarioSpec, out_dir, jobs: int = 1, grid_override: dict | None = None) -> RunManifest:
    """Evaluate every sweep point and write ``out_dir/<id>/pNNN/`` plus ``out_dir/<id>/manifest.json``.

    Points are independent: a failing point is recorded and its siblings still
    run. Files are written by the calling process in sweep order, so the
    output bytes do not depend on ``jobs``.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    points = spec.points()
    payloads = [(i, p, spec.base_dir, grid_override) for i, p in enumerate(points)]
    if jobs > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_worker, payloads))
    else:
        outcomes = [_worker(p) for p in payloads]

    manifest = RunManifest(spec.id, __version__)
    width = max(3, len(str(len(points) - 1)))
    for index, status, error, texts, checks, elapsed in outcomes:
        point_dir = out_dir / spec.id / f"p{index:0{width}d}"
        files = []
        if texts:
            point_dir.mkdir(parents=True, exist_ok=True)
            for name in sorted(texts):
                path = point_dir / name
                path.write_text(texts[name])
                files.append(str(path.relative_to(out_dir / spec.id)))
        params = {sec: {k: _jsonable(v) for k, v in vals.items()} for sec, vals in points[index].items()}
        entry = {
            "index": index,
            "status": status,
            "error": error,
            "parameters": params,
            "outputs": files,
            "checks": checks,
            "wall_clock_s": round(elapsed, 6),
        }
        if spec.sweep is not None:
            entry["sweep"] = {"parameter": spec.sweep.parameter, "value": spec.sweep.values[index]}
        if status != "ok":
            log.warning("%s point %d: %s %s", spec.id, index, status, error or "")
        manifest.runs.append(entry)
    manifest.manifest_path = out_dir / spec.id / "manifest.json"
    manifest.manifest_path.parent.mkdir(parents=True, exist_ok=True)
    manifest.manifest_path.write_text(manifest.to_json())
    return manifest


def export_wavefunctions(basis: ExcitonBasis, out) -> Path:
    """Write a_nk and a_nk² per state (ascending energy) as a tab-separated table."""
    path = Path(out)
    path.write_text(format_wavefunction_table(basis))
    return path
