"""Built-in scenarios for the bent-chain, ring and ellipse studies.

Ring and ellipse presets use N = 16. The out-of-plane ellipse study uses the
polar angle arccos(1/√3) ≈ 54.7356°, which gives equal x, y, z dipole
components at φ = 45°.
"""

_BENT = """\
[scenario]
id = {id}
description = {desc}

[geometry]
kind = bent_chain
n = 19
vertex = 12
bend_deg = {bend}
dipole = {dipole}
dipole_frame = {frame}

[spectra]
v_abs = 150 300 450
"""

_RING_SWEEP = """\
[scenario]
id = fig4
description = Ring N=16, in-plane dipoles at angle phi to the tangent

[geometry]
kind = ring
n = 16
tangent_deg = 0
polar_deg = 90

[spectra]
polarization = 1 0 0
v_abs = 150 300 450

[sweep]
parameter = geometry.tangent_deg
values = 0 48 53 54 55 90
"""

_ELLIPSE = """\
[scenario]
id = {id}
description = {desc}

[geometry]
kind = ellipse
n = 16
flattening = 0
tangent_deg = {phi}
polar_deg = {theta}

[spectra]
v_abs = {v}

[sweep]
parameter = geometry.flattening
values = {f}
"""


def _bent(id, desc, bend, dipole="0 0 1", frame="global", sweep=None):
    text = _BENT.format(id=id, desc=desc, bend=bend, dipole=dipole, frame=frame)
    if sweep:
        text += f"\n[sweep]\nparameter = geometry.bend_deg\n{sweep}\n"
    return text


PRESETS = {
    "fig1": _bent("fig1", "Bent chain N=19, dipoles (0,0,1), bend 0/120/135 deg", 0, sweep="values = 0 120 135"),
    "fig1a": _bent("fig1a", "Straight chain N=19, dipoles (0,0,1)", 0),
    "fig1b": _bent("fig1b", "Bent chain N=19, vertex 12, bend 120 deg, dipoles (0,0,1)", 120),
    "fig1c": _bent("fig1c", "Bent chain N=19, vertex 12, bend 135 deg, dipoles (0,0,1)", 135),
    "fig3a": _bent(
        "fig3a", "Bent chain, bend 135 deg, dipoles (0,1,1)/sqrt2 co-rotating with the segments",
        135, dipole="0 1 1", frame="local",
    ),
    "fig3b": _bent(
        "fig3b", "Bent chain, bend 135 deg, dipoles along the chain axis co-rotating with the segments",
        135, dipole="1 0 0", frame="local",
    ),
    "fig3b_rigid": _bent(
        "fig3b_rigid", "Bent chain, bend 135 deg, dipoles rigidly along x", 135, dipole="1 0 0",
    ),
    "fig4": _RING_SWEEP,
    "fig5": _ELLIPSE.format(
        id="fig5", desc="Ellipse N=16, tangential in-plane dipoles", phi=0, theta=90,
        v="50 100 150", f="0 0.7",
    ),
    "fig6": _ELLIPSE.format(
        id="fig6", desc="Ellipse N=16, in-plane dipoles at 54 deg to the tangent", phi=54, theta=90,
        v="150 300 450", f="0 0.2 0.4 0.7",
    ),
    "fig7": _ELLIPSE.format(
        id="fig7", desc="Ellipse N=16, dipoles with equal x, y, z components", phi=45, theta=54.7356103172,
        v="750 1500 2250", f="0 0.2 0.4",
    ),
    "bend_sweep": _bent(
        "bend_sweep", "Bent chain N=19, dipoles (0,0,1), bend angle 0..135 deg in 5 deg steps",
        0, sweep="range = 0 135 5",
    ),
}
