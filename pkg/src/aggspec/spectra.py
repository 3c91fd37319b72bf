"""Stick spectra, monomer spectra and CES aggregate absorption spectra.

In the CES approximation the aggregate spectral function is

    A(E) = Σ_k f_k ⟨g(E)⟩ / (1 - ⟨g(E)⟩ C_k),

with f_k = |e·μ_k|² and C_k in absolute units (cm⁻¹). The absorption is
``-Im A``. Writing h = 1/⟨g⟩, each term is 1 / (h(E) - C_k), so a state whose
pole lies where -Im⟨g⟩ is tiny produces a sharp line at Re h(E*) = C_k with
half-width Im h(E*) / Re h'(E*). Such lines are resolved by inserting extra
energies around E* before the spectrum is sampled.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import GridTooNarrowError, InvalidBroadeningError, InvalidCouplingError
from .excitonics import ExcitonBasis, OscillatorStrengths, Polarization, oscillator_strengths
from .lineshape import EnergyGrid, MonomerGreen, electronic_green, tail_corrected_integral

RESOLVED_WIDTH = 4.0  # lines narrower than this many grid spacings get refined
REFINE_POINTS = 801
REFINE_HALF_SPAN = 8.0  # in grid spacings
MIN_WIDTH_FRACTION = 1e-3  # floor for a line width, in grid spacings


@dataclass(eq=False)
class SpectrumResult:
    """Stick and/or continuous spectrum plus metadata.

    ``energies``/``absorption`` hold ``-Im A(E)`` samples (possibly on a
    non-uniform grid after pole refinement). ``partials[k]`` is the
    contribution of exciton state k when requested.
    """

    stick_energies: np.ndarray | None = None
    stick_strengths: np.ndarray | None = None
    energies: np.ndarray | None = None
    absorption: np.ndarray | None = None
    partials: np.ndarray | None = None
    metadata: dict = field(default_factory=dict)

    def weight(self, center: float | None = None) -> float:
        """∫ -Im A dE with the 1/E² tails continued beyond the grid ends."""
        if center is None:
            center = self.metadata.get("center", float(np.mean(self.energies)))
        return tail_corrected_integral(self.energies, self.absorption, center)

    def to_table(self) -> str:
        lines = [f"# {k}: {v}" for k, v in sorted(self.metadata.items()) if not isinstance(v, (list, dict))]
        lines.append("# energy_cm1\tabsorption")
        lines += [f"{e:.10e}\t{a:.10e}" for e, a in zip(self.energies, self.absorption)]
        return "\n".join(lines) + "\n"


def stick_spectrum(basis: ExcitonBasis, pol: Polarization) -> SpectrumResult:
    """Sticks at C_k / |V_unit| with normalized oscillator strengths."""
    osc = oscillator_strengths(basis, pol)
    return SpectrumResult(
        stick_energies=basis.energies.copy(),
        stick_strengths=osc.per_state.copy(),
        metadata={
            "kind": "sticks",
            "polarization": str(pol),
            "zero_strength": osc.zero_strength,
            "cluster_strengths": osc.cluster.tolist(),
        },
    )


def _state_weights(osc: OscillatorStrengths, normalize: bool) -> np.ndarray:
    if normalize:
        return osc.per_state
    return osc.raw


def _check_green_tails(green: MonomerGreen) -> None:
    tails = green.tail_deviation()
    if max(tails) >= 0.05:
        raise GridTooNarrowError(
            f"Green-function grid ends are not asymptotic (|E g - 1| = {tails[0]:.3g}, {tails[1]:.3g})"
        )


def _check_poles_inside(green: MonomerGreen, couplings, weights) -> None:
    h_lo = (1.0 / green.values[0]).real
    h_hi = (1.0 / green.values[-1]).real
    for c, w in zip(couplings, weights):
        if w > 0 and c != 0.0 and not h_lo < c < h_hi:
            raise GridTooNarrowError(
                f"the line of a state with C = {c:.1f} cm^-1 falls outside the energy grid"
            )


def _sharp_lines(green: MonomerGreen, coupling: float):
    """Locate poles of 1/(h - C) whose width is not resolved by the grid.

    Returns (E*, width, residue) triples; residue is 1 / Re h'(E*).
    """
    e = green.energies
    de = green.grid.spacing
    h = 1.0 / green.values
    r = h.real - coupling
    idx = np.nonzero(r[:-1] * r[1:] <= 0.0)[0]
    lines = []
    last = None
    for i in idx:
        if r[i] == r[i + 1]:
            continue

        def f(x):
            return (1.0 / green.evaluate(x)).real - coupling

        lo, hi = e[i], e[i + 1]
        root = lo if f(lo) == 0.0 else (hi if f(hi) == 0.0 else brentq(f, lo, hi, xtol=1e-9 * de))
        if last is not None and abs(root - last) < 1e-6 * de:
            continue
        last = root
        step = 1e-3 * de
        h_pm = 1.0 / green.evaluate(np.array([root - step, root, root + step]))
        slope = (h_pm[2].real - h_pm[0].real) / (2.0 * step)
        if slope <= 0:
            continue
        width = max(h_pm[1].imag, 0.0) / slope
        if width < RESOLVED_WIDTH * de:
            lines.append((float(root), float(width), float(1.0 / slope)))
    return lines


def ces_spectrum(
    basis: ExcitonBasis,
    pol: Polarization,
    green: MonomerGreen,
    v_abs: float,
    normalize: bool = True,
    refine: bool = True,
    keep_partials: bool = False,
) -> SpectrumResult:
    """CES absorption -Im A(E) with couplings scaled to C_k · v_abs / |V_unit|.

    ``normalize`` uses oscillator strengths summing to one, so the integrated
    absorption is π. With ``refine`` unresolved split-off lines get a local
    energy mesh. Lines narrower than a small fraction of the grid spacing are
    widened to that floor, keeping their residue.
    """
    if not v_abs > 0:
        raise InvalidCouplingError(f"absolute coupling V must be positive, got {v_abs}")
    osc = oscillator_strengths(basis, pol)
    weights = _state_weights(osc, normalize)
    couplings = basis.energies * v_abs
    _check_green_tails(green)
    _check_poles_inside(green, couplings, weights)

    de = green.grid.spacing
    energies = green.energies
    extra, delta_lines = [], []
    if refine:
        u = np.linspace(-1.0, 1.0, REFINE_POINTS)
        for k, (c, w) in enumerate(zip(couplings, weights)):
            if w <= 0 or c == 0.0:
                continue
            for root, width, residue in _sharp_lines(green, c):
                floor = MIN_WIDTH_FRACTION * de
                eff = max(width, floor)
                span = np.arctan(REFINE_HALF_SPAN * de / eff)
                pts = root + eff * np.tan(span * u)
                extra.append(pts[(pts > energies[0]) & (pts < energies[-1])])
                if width < floor:
                    delta_lines.append((k, root, eff, residue))
    if extra:
        energies = np.union1d(energies, np.concatenate(extra))
        g = green.evaluate(energies)
        base = np.isin(energies, green.energies)
        g[base] = green.values[np.searchsorted(green.energies, energies[base])]
    else:
        g = green.values.copy()

    with np.errstate(divide="ignore", invalid="ignore"):
        h = 1.0 / g
    h_rows = np.broadcast_to(h, (couplings.size, h.size)).copy()
    for k, root, eff, residue in delta_lines:
        # widen an unresolvable line to the floor width by raising Im h near its pole
        near = np.abs(energies - root) <= REFINE_HALF_SPAN * de
        h_rows[k, near] = h_rows[k, near].real + 1j * np.maximum(h_rows[k, near].imag, eff / residue)
    denom = h_rows - couplings[:, None]
    pole_hits = int(np.count_nonzero(np.abs(denom) < 1e-12 * np.abs(h_rows)))
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = 1.0 / denom
    terms[~np.isfinite(terms)] = 0.0
    partials = -(weights[:, None] * terms).imag
    absorption = partials.sum(axis=0)

    meta = {
        "kind": "ces",
        "polarization": str(pol),
        "v_abs_cm1": float(v_abs),
        "normalized": bool(normalize),
        "zero_strength": osc.zero_strength,
        "center": green.centroid(),
        "refined_lines": int(len(extra)),
        "unresolved_delta_lines": int(len(delta_lines)),
        "pole_hits": pole_hits,
    }
    return SpectrumResult(
        stick_energies=couplings,
        stick_strengths=weights.copy(),
        energies=energies,
        absorption=absorption,
        partials=partials if keep_partials else None,
        metadata=meta,
    )


def monomer_spectrum(
    dipoles,
    pol: Polarization,
    green: MonomerGreen,
    basis: ExcitonBasis | None = None,
    normalize: bool = False,
) -> SpectrumResult:
    """Spectrum of the uncoupled monomers, -Im[(Σ_n |e·μ_n|²) ⟨g(E)⟩].

    ``dipoles`` may be an AggregateGeometry or an (N, 3) array. With ``basis``
    the prefactor is summed over the collective dipoles μ_k instead, which is
    the same number by unitarity.
    """
    mu = getattr(dipoles, "dipoles", dipoles)
    vectors = basis.collective_dipoles if basis is not None else np.asarray(mu, dtype=float)
    total = float(pol.weights(vectors).sum())
    prefactor = 1.0 if (normalize and total > 0) else (0.0 if normalize else total)
    return SpectrumResult(
        energies=green.energies,
        absorption=-(prefactor * green.values).imag,
        metadata={
            "kind": "monomer",
            "polarization": str(pol),
            "normalized": bool(normalize),
            "prefactor": total,
            "center": green.centroid(),
            "basis": "exciton" if basis is not None else "site",
        },
    )


def electronic_spectral_function(
    basis: ExcitonBasis,
    pol: Polarization,
    epsilon: float,
    delta: float,
    grid: EnergyGrid,
    v_abs: float = 1.0,
    normalize: bool = True,
) -> SpectrumResult:
    """Purely electronic spectrum: Lorentzians of half-width δ at ε + C_k · v_abs."""
    if not delta > 0:
        raise InvalidBroadeningError(f"broadening δ must be positive, got {delta}")
    green = electronic_green(epsilon, delta, grid)
    result = ces_spectrum(basis, pol, green, v_abs, normalize=normalize)
    result.metadata["kind"] = "electronic"
    result.metadata["epsilon_cm1"] = float(epsilon)
    result.metadata["delta_cm1"] = float(delta)
    return result
