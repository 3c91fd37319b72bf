import pytest

from aggspec.errors import ScenarioParseError, ScenarioValidationError
from aggspec.presets import PRESETS
from aggspec.scenario import load_scenario, parse_scenario

BASE = """\
[scenario]
id = t

[geometry]
kind = ring
n = 8

[spectra]
v_abs = 100
"""


def test_fig1c_preset():
    s = load_scenario("fig1c")
    g = s.geometry
    assert (g["kind"], g["n"], g["vertex"], g["bend_deg"], g["dipole"]) == ("bent_chain", 19, 12, 135.0, (0, 0, 1))
    assert s.spectra["v_abs"] == (150.0, 300.0, 450.0)
    assert s.sweep is None and len(s.points()) == 1


def test_fig6_preset():
    s = load_scenario("fig6")
    assert s.geometry["kind"] == "ellipse" and s.geometry["tangent_deg"] == 54.0
    assert s.sweep.parameter == "geometry.flattening"
    assert s.sweep.values == (0.0, 0.2, 0.4, 0.7)
    assert s.spectra["v_abs"] == (150.0, 300.0, 450.0)
    assert [p["geometry"]["flattening"] for p in s.points()] == [0.0, 0.2, 0.4, 0.7]


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_every_preset_parses(name):
    s = parse_scenario(PRESETS[name])
    assert s.id == name and s.points()


def test_empty_document_lists_required_blocks():
    with pytest.raises(ScenarioValidationError) as exc:
        parse_scenario("")
    msg = str(exc.value)
    assert "[scenario]" in msg and "[geometry]" in msg and "[spectra]" in msg


def test_defaults_applied():
    s = parse_scenario(BASE)
    assert s.geometry["tangent_deg"] == 0.0 and s.geometry["polar_deg"] == 90.0
    assert s.lineshape["model"] == "vibronic" and s.lineshape["width"] == 350.0
    assert s.spectra["polarization"] == "isotropic"
    assert s.spectra["outputs"] == ("geometry", "sticks", "wavefunctions", "monomer", "ces")


def test_unknown_key_names_key_and_line():
    text = BASE.replace("n = 8", "n = 8\nradius = 3")
    with pytest.raises(ScenarioValidationError) as exc:
        parse_scenario(text)
    assert exc.value.key == "geometry.radius"
    assert "line 7" in str(exc.value)


def test_key_from_other_kind_rejected():
    with pytest.raises(ScenarioValidationError) as exc:
        parse_scenario(BASE.replace("n = 8", "n = 8\nvertex = 3"))
    assert exc.value.key == "geometry.vertex"


def test_bad_value_names_key():
    with pytest.raises(ScenarioValidationError) as exc:
        parse_scenario(BASE.replace("n = 8", "n = eight"))
    assert exc.value.key == "geometry.n"


def test_parse_error_has_line_number():
    with pytest.raises(ScenarioParseError) as exc:
        parse_scenario(BASE + "this line has no delimiter\n")
    assert exc.value.lineno == 10
    with pytest.raises(ScenarioParseError) as exc:
        parse_scenario("n = 3\n" + BASE)
    assert exc.value.lineno == 1
    with pytest.raises(ScenarioParseError):
        parse_scenario(BASE.replace("n = 8", "n = 8\nn = 9"))


def test_unknown_section():
    with pytest.raises(ScenarioValidationError):
        parse_scenario(BASE + "[plot]\ncolor = red\n")


@pytest.mark.parametrize("v", ["0", "-5 10"])
def test_v_abs_must_be_positive(v):
    with pytest.raises(ScenarioValidationError) as exc:
        parse_scenario(BASE.replace("v_abs = 100", f"v_abs = {v}"))
    assert exc.value.key == "spectra.v_abs"


def test_range_sweep_counts_inclusive():
    s = load_scenario("bend_sweep")
    assert len(s.sweep.values) == 28
    assert s.sweep.values[0] == 0.0 and s.sweep.values[-1] == 135.0


def test_sweep_validation():
    sweep = "\n[sweep]\nparameter = {p}\n{body}\n"
    with pytest.raises(ScenarioValidationError):
        parse_scenario(BASE + sweep.format(p="geometry.vertex", body="values = 1 2"))
    with pytest.raises(ScenarioValidationError):
        parse_scenario(BASE + sweep.format(p="spectra.v_abs", body="values = 1 2"))
    with pytest.raises(ScenarioValidationError):
        parse_scenario(BASE + sweep.format(p="geometry.tangent_deg", body="values = 1\nrange = 0 1 1"))
    with pytest.raises(ScenarioValidationError):
        parse_scenario(BASE + sweep.format(p="tangent_deg", body="values = 1"))
    s = parse_scenario(BASE + sweep.format(p="lineshape.width", body="values = 200, 300"))
    assert [p["lineshape"]["width"] for p in s.points()] == [200.0, 300.0]


def test_tabulated_needs_file(tmp_path):
    with pytest.raises(ScenarioValidationError):
        parse_scenario(BASE + "\n[lineshape]\nmodel = tabulated\n")
    with pytest.raises(ScenarioValidationError):
        parse_scenario(BASE + "\n[lineshape]\nmodel = electronic\nwidth = 3\n")


def test_unknown_output_kind():
    with pytest.raises(ScenarioValidationError):
        parse_scenario(BASE.replace("v_abs = 100", "v_abs = 100\noutputs = sticks plots"))


def test_load_from_file(tmp_path):
    p = tmp_path / "s.ini"
    p.write_text(BASE)
    s = load_scenario(str(p))
    assert s.id == "t" and s.base_dir == tmp_path
    with pytest.raises(ScenarioValidationError):
        load_scenario("no-such-preset")


def test_comments_are_ignored():
    text = "# leading comment\n" + BASE.replace("n = 8", "n = 8  # sites\n; another comment")
    assert parse_scenario(text).geometry["n"] == 8
