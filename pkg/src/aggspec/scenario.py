"""Scenario documents: sectioned ``key = value`` text describing one study.

Example::

    [scenario]
    id = fig1c

    [geometry]
    kind = bent_chain
    n = 19
    vertex = 12
    bend_deg = 135
    dipole = 0 0 1

    [spectra]
    v_abs = 150 300 450

    [sweep]
    parameter = geometry.bend_deg
    range = 0 135 5

Lists are whitespace separated. ``#`` and ``;`` start comment lines.
"""
from __future__ import annotations

import configparser
import copy
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

from .errors import ScenarioParseError, ScenarioValidationError

OUTPUT_KINDS = ("geometry", "sticks", "wavefunctions", "monomer", "ces")
REQUIRED_SECTIONS = ("scenario", "geometry", "spectra")


def _float(text: str) -> float:
    value = float(text)
    if not math.isfinite(value):
        raise ValueError(f"not a finite number: {text!r}")
    return value


def _int(text: str) -> int:
    return int(text)


def _vec3(text: str) -> tuple:
    parts = text.replace(",", " ").split()
    if len(parts) != 3:
        raise ValueError(f"expected three components, got {len(parts)}")
    return tuple(_float(p) for p in parts)


def _float_list(text: str) -> tuple:
    parts = text.replace(",", " ").split()
    if not parts:
        raise ValueError("expected at least one value")
    return tuple(_float(p) for p in parts)


def _word_list(text: str) -> tuple:
    return tuple(text.replace(",", " ").split())


def _choice(*options: str) -> Callable[[str], str]:
    def parse(text: str) -> str:
        text = text.strip()
        if text not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {text!r}")
        return text

    return parse


def _polarization(text: str) -> str:
    text = text.strip()
    if text.lower() == "isotropic":
        return "isotropic"
    vec = _vec3(text)
    if all(v == 0 for v in vec):
        raise ValueError("polarization vector must be non-zero")
    return " ".join(f"{v:g}" for v in vec)


# key -> (parser, default, scalar?)
GEOMETRY_KEYS: dict[str, tuple] = {
    "kind": (_choice("chain", "bent_chain", "ring", "ellipse"), None, False),
    "n": (_int, None, True),
    "vertex": (_int, None, True),
    "bend_deg": (_float, 0.0, True),
    "dipole": (_vec3, (0.0, 0.0, 1.0), False),
    "dipole_frame": (_choice("global", "local"), "global", False),
    "tangent_deg": (_float, 0.0, True),
    "polar_deg": (_float, 90.0, True),
    "flattening": (_float, 0.0, True),
    "ellipse_convention": (_choice("perimeter", "major_axis"), "perimeter", False),
    "coupling": (_choice("all", "nearest"), "all", False),
    "energy_unit": (_choice("dipole", "reference"), "dipole", False),
}
KIND_KEYS = {
    "chain": {"n", "dipole"},
    "bent_chain": {"n", "vertex", "bend_deg", "dipole", "dipole_frame"},
    "ring": {"n", "tangent_deg", "polar_deg"},
    "ellipse": {"n", "tangent_deg", "polar_deg", "flattening", "ellipse_convention"},
}
KIND_REQUIRED = {
    "chain": {"n"},
    "bent_chain": {"n", "vertex", "bend_deg"},
    "ring": {"n"},
    "ellipse": {"n", "flattening"},
}
COMMON_GEOMETRY = {"kind", "coupling", "energy_unit"}

LINESHAPE_KEYS: dict[str, tuple] = {
    "model": (_choice("vibronic", "electronic", "tabulated"), "vibronic", False),
    "e00": (_float, 17500.0, True),
    "vib_spacing": (_float, 1200.0, True),
    "huang_rhys": (_float, 0.9, True),
    "n_peaks": (_int, 4, True),
    "width": (_float, 350.0, True),
    "broadening": (_choice("lorentzian", "gaussian"), "lorentzian", False),
    "epsilon": (_float, 17500.0, True),
    "delta": (_float, 1.0, True),
    "file": (str, None, False),
}
MODEL_KEYS = {
    "vibronic": {"e00", "vib_spacing", "huang_rhys", "n_peaks", "width", "broadening"},
    "electronic": {"epsilon", "delta"},
    "tabulated": {"file"},
}

SPECTRA_KEYS: dict[str, tuple] = {
    "polarization": (_polarization, "isotropic", False),
    "v_abs": (_float_list, (150.0, 300.0, 450.0), False),
    "grid_min": (_float, None, True),
    "grid_max": (_float, None, True),
    "grid_points": (_int, None, True),
    "outputs": (_word_list, OUTPUT_KINDS, False),
}

SCENARIO_KEYS: dict[str, tuple] = {
    "id": (str, None, False),
    "description": (str, "", False),
}

SWEEP_KEYS = {"parameter", "values", "range"}

SCHEMA = {
    "scenario": SCENARIO_KEYS,
    "geometry": GEOMETRY_KEYS,
    "lineshape": LINESHAPE_KEYS,
    "spectra": SPECTRA_KEYS,
}


@dataclass(frozen=True)
class Sweep:
    parameter: str
    values: tuple

    @property
    def section(self) -> str:
        return self.parameter.split(".", 1)[0]

    @property
    def key(self) -> str:
        return self.parameter.split(".", 1)[1]


@dataclass
class ScenarioSpec:
    """Validated scenario with every default filled in."""

    id: str
    description: str
    geometry: dict[str, Any]
    lineshape: dict[str, Any]
    spectra: dict[str, Any]
    sweep: Sweep | None = None
    base_dir: Path | None = None

    def points(self) -> list[dict[str, Any]]:
        """Resolved parameter sets, one per sweep value (a single one without a sweep)."""
        base = {
            "geometry": dict(self.geometry),
            "lineshape": dict(self.lineshape),
            "spectra": dict(self.spectra),
        }
        if self.sweep is None:
            return [base]
        out = []
        for value in self.sweep.values:
            point = copy.deepcopy(base)
            point[self.sweep.section][self.sweep.key] = value
            out.append(point)
        return out


def _lineno_of(text: str, section: str, key: str | None = None) -> int | None:
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if key is None and current == section:
                return lineno
        elif current == section and key is not None and "=" in line:
            if line.split("=", 1)[0].strip().lower() == key:
                return lineno
    return None


def _read_sections(text: str) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(
        interpolation=None,
        strict=True,
        delimiters=("=",),
        comment_prefixes=("#", ";"),
        inline_comment_prefixes=("#",),
        empty_lines_in_values=False,
    )
    try:
        cp.read_string(text)
    except configparser.MissingSectionHeaderError as exc:
        raise ScenarioParseError("content before the first [section] header", exc.lineno) from None
    except configparser.DuplicateSectionError as exc:
        raise ScenarioParseError(f"duplicate section [{exc.section}]", exc.lineno) from None
    except configparser.DuplicateOptionError as exc:
        raise ScenarioParseError(f"duplicate key {exc.option!r} in [{exc.section}]", exc.lineno) from None
    except configparser.ParsingError as exc:
        lineno, line = exc.errors[0]
        raise ScenarioParseError(f"cannot parse {line.strip()!r}", lineno) from None
    return cp


def _convert(section: str, key: str, raw: str, text: str):
    parser = SCHEMA[section][key][0]
    try:
        return parser(raw)
    except ValueError as exc:
        raise ScenarioValidationError(
            f"[{section}] {key} (line {_lineno_of(text, section, key)}): {exc}", key=f"{section}.{key}"
        ) from None


def _fill(section: str, given: dict[str, str], allowed: set[str], text: str) -> dict[str, Any]:
    out = {}
    for key, raw in given.items():
        if key not in allowed:
            raise ScenarioValidationError(
                f"[{section}] key {key!r} (line {_lineno_of(text, section, key)}) is not valid here",
                key=f"{section}.{key}",
            )
        out[key] = _convert(section, key, raw, text)
    for key in sorted(allowed):
        if key not in out:
            out[key] = SCHEMA[section][key][1]
    return out


def _validate_values(geometry, lineshape, spectra) -> None:
    kind = geometry["kind"]
    n = geometry["n"]
    if n is not None and n < 2:
        raise ScenarioValidationError("[geometry] n must be at least 2", key="geometry.n")
    if kind == "bent_chain" and not 2 <= geometry["vertex"] <= n - 1:
        raise ScenarioValidationError("[geometry] vertex must lie in [2, n-1]", key="geometry.vertex")
    if any(v <= 0 for v in spectra["v_abs"]):
        raise ScenarioValidationError("[spectra] v_abs values must be positive", key="spectra.v_abs")
    bad = [o for o in spectra["outputs"] if o not in OUTPUT_KINDS]
    if bad:
        raise ScenarioValidationError(
            f"[spectra] unknown outputs {bad}; choose from {', '.join(OUTPUT_KINDS)}", key="spectra.outputs"
        )
    if spectra["grid_points"] is not None and spectra["grid_points"] < 64:
        raise ScenarioValidationError("[spectra] grid_points must be at least 64", key="spectra.grid_points")
    if lineshape["model"] == "tabulated" and not lineshape.get("file"):
        raise ScenarioValidationError("[lineshape] tabulated model needs a file", key="lineshape.file")


def _parse_sweep(cp, geometry, lineshape, spectra, text) -> Sweep:
    sec = cp["sweep"]
    for key in sec:
        if key not in SWEEP_KEYS:
            raise ScenarioValidationError(
                f"[sweep] key {key!r} (line {_lineno_of(text, 'sweep', key)}) is not valid here",
                key=f"sweep.{key}",
            )
    if "parameter" not in sec:
        raise ScenarioValidationError("[sweep] needs a parameter", key="sweep.parameter")
    param = sec["parameter"].strip()
    if "." not in param:
        raise ScenarioValidationError(
            f"[sweep] parameter {param!r} must look like section.key", key="sweep.parameter"
        )
    section, key = param.split(".", 1)
    blocks = {"geometry": geometry, "lineshape": lineshape, "spectra": spectra}
    if section not in blocks or key not in blocks[section]:
        raise ScenarioValidationError(f"[sweep] parameter {param!r} does not exist in this scenario", key=param)
    if not SCHEMA[section][key][2]:
        raise ScenarioValidationError(f"[sweep] parameter {param!r} is not a scalar", key=param)
    if ("values" in sec) == ("range" in sec):
        raise ScenarioValidationError("[sweep] give exactly one of values or range", key="sweep.values")
    parser = SCHEMA[section][key][0]
    try:
        if "values" in sec:
            values = tuple(parser(v) for v in sec["values"].replace(",", " ").split())
        else:
            start, stop, step = _float_list(sec["range"])
            if step <= 0 or stop < start:
                raise ValueError("range needs start <= stop and step > 0")
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            values = tuple(parser(repr(round(start + i * step, 12))) for i in range(count))
    except ValueError as exc:
        raise ScenarioValidationError(f"[sweep] {exc}", key="sweep.values") from None
    if not values:
        raise ScenarioValidationError("[sweep] no values", key="sweep.values")
    return Sweep(param, values)


def parse_scenario(text: str, base_dir=None) -> ScenarioSpec:
    """Parse and validate a scenario document; unknown keys are errors."""
    cp = _read_sections(text)
    missing = [s for s in REQUIRED_SECTIONS if s not in cp]
    if missing:
        raise ScenarioValidationError(
            "missing required section(s): " + ", ".join(f"[{s}]" for s in missing), key=missing[0]
        )
    for name in cp.sections():
        if name not in SCHEMA and name != "sweep":
            raise ScenarioValidationError(
                f"unknown section [{name}] (line {_lineno_of(text, name)})", key=name
            )

    scen = _fill("scenario", dict(cp["scenario"]), set(SCENARIO_KEYS), text)
    if not scen["id"]:
        raise ScenarioValidationError("[scenario] id is required", key="scenario.id")

    geo_given = dict(cp["geometry"])
    if "kind" not in geo_given:
        raise ScenarioValidationError("[geometry] kind is required", key="geometry.kind")
    kind = _convert("geometry", "kind", geo_given["kind"], text)
    geometry = _fill("geometry", geo_given, KIND_KEYS[kind] | COMMON_GEOMETRY, text)
    for key in sorted(KIND_REQUIRED[kind]):
        if key not in geo_given:
            raise ScenarioValidationError(f"[geometry] {kind} needs {key}", key=f"geometry.{key}")

    ls_given = dict(cp["lineshape"]) if "lineshape" in cp else {}
    model = _convert("lineshape", "model", ls_given.get("model", "vibronic"), text)
    lineshape = _fill("lineshape", ls_given, MODEL_KEYS[model] | {"model"}, text)

    spectra = _fill("spectra", dict(cp["spectra"]), set(SPECTRA_KEYS), text)
    _validate_values(geometry, lineshape, spectra)

    sweep = _parse_sweep(cp, geometry, lineshape, spectra, text) if "sweep" in cp else None
    return ScenarioSpec(
        id=scen["id"],
        description=scen["description"],
        geometry=geometry,
        lineshape=lineshape,
        spectra=spectra,
        sweep=sweep,
        base_dir=Path(base_dir) if base_dir is not None else None,
    )


def load_scenario(source: str) -> ScenarioSpec:
    """Resolve a built-in preset name or a path to a scenario file."""
    from .presets import PRESETS

    path = Path(source)
    if path.is_file():
        return parse_scenario(path.read_text(), base_dir=path.parent)
    if source in PRESETS:
        return parse_scenario(PRESETS[source])
    raise ScenarioValidationError(f"{source!r} is neither a scenario file nor a preset name", key=source)
