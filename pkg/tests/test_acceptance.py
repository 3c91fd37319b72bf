"""Acceptance criteria 1-11, each at its stated tolerance.

Every criterion prints one ``criterion N: PASS|FAIL`` line. Run directly with
``python tests/test_acceptance.py``; under pytest the lines are repeated in the
terminal summary.
"""
from __future__ import annotations

import os
import sys
import tempfile
import time

import numpy as np
import pytest
from scipy.optimize import brentq

sys.path.insert(0, os.path.dirname(__file__))

from aggspec.excitonics import (  # noqa: E402
    Polarization,
    coupling_matrix,
    degenerate_clusters,
    diagonalize,
    oscillator_strengths,
    pair_coupling,
    ring_eigenvalues_analytic,
)
from aggspec.geometry import build_bent_chain, build_chain, build_ellipse, build_ring  # noqa: E402
from aggspec.lineshape import (  # noqa: E402
    EnergyGrid,
    LineshapeModel,
    electronic_green,
    kramers_kronig,
    tail_corrected_integral,
    vibronic_green,
)
from aggspec.presets import PRESETS  # noqa: E402
from aggspec.runner import run  # noqa: E402
from aggspec.scenario import parse_scenario  # noqa: E402
from aggspec.spectra import ces_spectrum, monomer_spectrum  # noqa: E402
from helpers import charpoly_roots, random_geometry  # noqa: E402

ISO = Polarization.isotropic()
T_START = time.perf_counter()


def criterion_1():
    start = time.perf_counter()
    nn = diagonalize(coupling_matrix(build_chain(19), nearest_neighbour_only=True)).energies
    full = diagonalize(coupling_matrix(build_chain(19))).energies
    edge = 2 * np.cos(np.pi / 20)
    inside = bool(np.all((nn > -2) & (nn < 2)))
    extremes = max(abs(nn[0] + edge), abs(nn[-1] - edge))
    shift = max(abs(full[0] - nn[0]), abs(full[-1] - nn[-1]))
    elapsed = time.perf_counter() - start
    ok = inside and extremes < 1e-10 and shift > 1e-3 and elapsed < 1.0
    return ok, (
        f"NN band [{nn[0]:.6f}, {nn[-1]:.6f}], extreme error {extremes:.1e}; "
        f"full band [{full[0]:.4f}, {full[-1]:.4f}]; {elapsed * 1e3:.1f} ms"
    )


def criterion_2():
    start = time.perf_counter()
    worst = 0.0
    for n in (8, 16, 32):
        for phi in (0.0, 30.0, 54.0, 72.5, 90.0):
            for theta in (90.0, 55.0, 20.0):
                v = coupling_matrix(build_ring(n, phi, theta)).values
                analytic = np.sort(ring_eigenvalues_analytic(v[0], n))
                dense = diagonalize(coupling_matrix(build_ring(n, phi, theta))).eigenvalues
                worst = max(worst, float(np.max(np.abs(analytic - dense))))
    elapsed = time.perf_counter() - start
    return worst < 1e-10 and elapsed < 1.0, f"max deviation {worst:.1e}; {elapsed * 1e3:.1f} ms"


def criterion_3():
    n = 16
    b = diagonalize(coupling_matrix(build_ring(n, 0.0, 90.0)))
    details, ok = [], True
    j0 = int(np.argmax(np.abs(b.eigenvectors.T @ np.full(n, 1 / np.sqrt(n)))))
    for axis in ((1, 0, 0), (0, 1, 0)):
        osc = oscillator_strengths(b, Polarization.fixed(axis))
        clusters = degenerate_clusters(b.eigenvalues)
        share = [osc.per_state[c].sum() for c in clusters]
        best = int(np.argmax(share))
        bright = [c for c, s in zip(clusters, share) if s > 1e-3]
        ok &= len(bright) == 1 and len(clusters[best]) == 2 and share[best] > 0.999 and osc.raw[j0] < 1e-10
        details.append(f"e={axis}: pair share {share[best]:.6f}, j=0 strength {osc.raw[j0]:.1e}")
    return ok, "; ".join(details)


def criterion_4():
    n = 16
    g = build_ring(n, 0.0)

    def v12(phi):
        r = build_ring(n, phi)
        return pair_coupling(r.positions[0], r.dipoles[0], r.positions[1], r.dipoles[1])

    root = brentq(v12, 53.0, 55.0, xtol=1e-12) if v12(53.0) * v12(55.0) < 0 else float("nan")
    e0 = diagonalize(coupling_matrix(g)).energies
    em = diagonalize(coupling_matrix(build_ring(n, root))).energies
    ratio = (em[-1] - em[0]) / (e0[-1] - e0[0])
    ok = 53.0 < root < 55.0 and ratio < 0.1
    return ok, f"V12 sign change at phi = {root:.4f} deg; bandwidth ratio {ratio:.4f}"


def criterion_5():
    b = diagonalize(coupling_matrix(build_bent_chain(19, 12, 135.0, (0, 0, 1)), energy_unit="reference"))
    e, a2, pr = b.energies, b.eigenvectors**2, b.participation_ratios
    n = b.n
    gap_lo, gap_hi = e[1] - e[0], e[-1] - e[-2]
    flank = a2[10] + a2[12]  # sites 11 and 13
    lo_ok = gap_lo > 0.2 and pr[0] < 3 and flank[0] > 0.8
    hi_ok = gap_hi > 0.2 and pr[-1] < 3 and flank[-1] > 0.8
    mid = range(1, n - 1)
    k_mid = max(mid, key=lambda k: a2[11, k])
    mid_ok = a2[11, k_mid] > 0.8
    detail = (
        f"lower: gap {gap_lo:.3f} PR {pr[0]:.2f} w(11+13) {flank[0]:.3f}; "
        f"upper: gap {gap_hi:.3f} PR {pr[-1]:.2f} w(11+13) {flank[-1]:.3f}; "
        f"best mid-band w(12) {a2[11, k_mid]:.3f} (state {k_mid + 1})"
    )
    return lo_ok and hi_ok and mid_ok, detail


def criterion_6():
    e0 = diagonalize(coupling_matrix(build_bent_chain(19, 12, 0.0))).energies
    bw = e0[-1] - e0[0]
    devs = {}
    for phi in (45.0, 90.0):
        e = diagonalize(coupling_matrix(build_bent_chain(19, 12, phi))).energies
        devs[phi] = float(np.max(np.abs(e - e0)) / bw)
    return max(devs.values()) < 0.05, ", ".join(f"Phi={p:g}: {d:.4f} of bandwidth" for p, d in devs.items())


def criterion_7():
    eps, delta, v = 18000.0, 0.5, 300.0
    worst_pos, worst_w, ok_a = 0.0, 0.0, True
    for geom in (build_bent_chain(19, 12, 135.0), build_ring(16, 54.0), build_chain(19, (1, 0, 0))):
        b = diagonalize(coupling_matrix(geom))
        span = 4 * v * max(1.0, float(np.max(np.abs(b.energies))))
        grid = EnergyGrid(eps - span - 200 * delta, eps + span + 200 * delta, int((2 * span + 400 * delta) / (delta / 4)) + 1)
        s = ces_spectrum(b, ISO, electronic_green(eps, delta, grid), v, keep_partials=True)
        f = oscillator_strengths(b, ISO).per_state
        e, a = s.energies, s.absorption
        peaks = np.nonzero((a[1:-1] > a[:-2]) & (a[1:-1] >= a[2:]))[0] + 1
        for k in np.nonzero(f > 1e-3)[0]:
            target = eps + b.energies[k] * v
            nearest = e[peaks[np.argmin(np.abs(e[peaks] - target))]]
            worst_pos = max(worst_pos, abs(nearest - target) / grid.spacing)
            w = tail_corrected_integral(e, s.partials[k], target) / np.pi
            worst_w = max(worst_w, abs(w - f[k]) / f[k])
    ok_a = worst_pos <= 1.0 and worst_w < 0.01

    m = LineshapeModel()
    grid = EnergyGrid(m.e00 - 16000, m.e00 + 3600 + 16000, 16384)
    vib = vibronic_green(m, grid)
    worst_b = 0.0
    for geom in (build_bent_chain(19, 12, 135.0), build_ellipse(16, 0.4, 54.0)):
        b = diagonalize(coupling_matrix(geom))
        zero = ces_spectrum(b.with_eigenvalues(np.zeros(b.n)), ISO, vib, 300.0)
        mono = monomer_spectrum(geom, ISO, vib, normalize=True)
        worst_b = max(worst_b, float(np.max(np.abs(zero.absorption - mono.absorption)) / np.max(mono.absorption)))
    ok_b = worst_b < 1e-10
    return ok_a and ok_b, (
        f"(a) peak offset <= {worst_pos:.2f} spacings, per-peak weight error {worst_w:.1e}; "
        f"(b) C=0 vs monomer {worst_b:.1e}"
    )


def criterion_8():
    worst_sum, worst_neg, n_points, failures = 0.0, 0.0, 0, []
    with tempfile.TemporaryDirectory() as tmp:
        for name in sorted(PRESETS):
            spec = parse_scenario(PRESETS[name])
            spec.spectra["outputs"] = ("ces",)
            manifest = run(spec, tmp, jobs=os.cpu_count() or 1)
            for entry in manifest.runs:
                n_points += 1
                if entry["status"] == "failed":
                    failures.append(f"{name}/{entry['index']}: {entry['error']}")
                    continue
                for key, chk in entry["checks"].items():
                    if key.startswith("sum_rule"):
                        worst_sum = max(worst_sum, chk["value"])
                    if key.startswith("positivity"):
                        worst_neg = max(worst_neg, chk["value"])
    ok = not failures and worst_sum < 0.01 and worst_neg <= 1e-12
    detail = f"{n_points} sweep points; max |weight/pi - 1| {worst_sum:.1e}; max negative excursion {worst_neg:.1e}"
    if failures:
        detail += "; failed: " + "; ".join(failures)
    return ok, detail


def criterion_9():
    eps, delta = 0.0, 10.0
    e = np.linspace(eps - 200 * delta, eps + 200 * delta, 8001)
    d = e - eps
    im = delta / (d**2 + delta**2)
    re = d / (d**2 + delta**2)
    out = kramers_kronig(im, e)
    mask = np.abs(d) > 3 * (e[1] - e[0])
    err = float(np.max(np.abs(out - re)[mask]) / np.max(np.abs(re)))
    parity = float(np.max(np.abs(out + out[::-1])) / np.max(np.abs(out)))
    return err < 0.005 and parity < 1e-8, f"max error {err:.2e} of peak; antisymmetry residual {parity:.1e}"


def _corner_pr(vectors):
    """Smallest PR over normalized combinations of two (nearly) degenerate states."""
    t = np.linspace(0.0, np.pi, 721)
    mix = np.cos(t)[None, :] * vectors[:, :1] + np.sin(t)[None, :] * vectors[:, 1:2]
    return float(np.min(1.0 / np.sum(mix**4, axis=0)))


def criterion_10():
    m = LineshapeModel()
    grid = EnergyGrid(m.e00 - 20000, m.e00 + 3600 + 20000, 32768)
    vib = vibronic_green(m, grid)
    v = 150.0  # strongest coupling of the tangential ellipse study
    spectra = []
    for f in (0.0, 0.7):
        b = diagonalize(coupling_matrix(build_ellipse(16, f, 0.0)))
        spectra.append(ces_spectrum(b, ISO, vib, v, refine=False).absorption)
    norm = np.sqrt(np.trapezoid(spectra[0] ** 2, grid.values))
    dist = float(np.sqrt(np.trapezoid((spectra[0] - spectra[1]) ** 2, grid.values)) / norm)
    ok_a = dist < 0.1

    b = diagonalize(coupling_matrix(build_ellipse(16, 0.4, 54.0)))
    e, a = b.energies, b.eigenvectors
    bw = e[-1] - e[0]
    parts = []
    ok_b = True
    for label, pair, rest in (("lowest", [0, 1], 2), ("highest", [-1, -2], -3)):
        split = abs(e[pair[0]] - e[pair[1]]) / bw
        gap = abs(e[pair[1]] - e[rest]) / bw
        pr_raw = b.participation_ratios[pair].max()
        pr_loc = _corner_pr(a[:, pair])
        good = split < 0.1 * gap and pr_loc < 4
        ok_b &= good
        parts.append(
            f"{label} pair split {split:.4f} vs gap {gap:.4f} of bandwidth, PR {pr_raw:.2f} (corner-resolved {pr_loc:.2f})"
        )
    elapsed = time.perf_counter() - T_START
    ok = ok_a and ok_b and elapsed < 60
    return ok, f"(a) L2 distance {dist:.4f}; (b) " + "; ".join(parts) + f"; suite time so far {elapsed:.1f} s"


def criterion_11():
    rng = np.random.default_rng(11)
    worst_eig, worst_mono = 0.0, 0.0
    grid = EnergyGrid(16000, 20000, 2001)
    g = electronic_green(18000, 20.0, grid)
    for _ in range(100):
        n = int(rng.integers(2, 7))
        geom = random_geometry(rng, n)
        cm = coupling_matrix(geom)
        b = diagonalize(cm)
        worst_eig = max(worst_eig, float(np.max(np.abs(b.eigenvalues - charpoly_roots(cm.values)))))
        pol = Polarization.fixed(rng.normal(size=3))
        site = monomer_spectrum(geom, pol, g).absorption
        exc = monomer_spectrum(geom, pol, g, basis=b).absorption
        worst_mono = max(worst_mono, float(np.max(np.abs(site - exc)) / np.max(np.abs(site))))
    return worst_eig < 1e-8 and worst_mono < 1e-10, f"charpoly {worst_eig:.1e}; site vs exciton {worst_mono:.1e}"


CRITERIA = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
    9: criterion_9,
    10: criterion_10,
    11: criterion_11,
}


SUMMARY: list[str] = []  # echoed by the terminal-summary hook in conftest.py


def report(number, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    SUMMARY.append(line)
    print(line)
    return line


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number):
    ok, detail = CRITERIA[number]()
    report(number, ok, detail)
    assert ok, detail


if __name__ == "__main__":
    results = []
    for n in sorted(CRITERIA):
        ok, detail = CRITERIA[n]()
        report(n, ok, detail)
        results.append((ok, detail))
    sys.exit(0 if all(ok for ok, _ in results) else 1)
