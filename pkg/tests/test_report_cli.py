import json
import math

import jsonschema
import pytest

from qhgeo.cli import EXIT_INPUT, EXIT_OK, main
from qhgeo.errors import ConfigError, InvalidParameterError
from qhgeo.pipeline import RunConfig, bundled_config, run, run_pipeline
from qhgeo.presets import KINDS, TAG_KEYS, Preset, generate_domain
from qhgeo.render import render_svg
from qhgeo.report import CSV_COLUMNS, clean, dumps, pairs_csv, validate


@pytest.mark.parametrize("kind", sorted(KINDS))
def test_presets_build_with_tags(kind):
    dom = generate_domain(kind)
    assert set(dom.tags) == set(TAG_KEYS)
    assert dom.diameter > 0


def test_preset_errors():
    with pytest.raises(InvalidParameterError):
        Preset("hexagon")
    with pytest.raises(InvalidParameterError):
        generate_domain("comb", teeth=0)
    with pytest.raises(InvalidParameterError):
        generate_domain("disk", colour=3)
    assert generate_domain("comb", teeth=4).name == "comb4"


def test_clean_handles_non_finite_and_numpy():
    import numpy as np

    out = clean({"a": np.float64(math.inf), "b": [np.int64(3), -math.inf, math.nan], "c": np.bool_(True)})
    assert out == {"a": "inf", "b": [3, "-inf", "nan"], "c": True}
    assert json.loads(dumps({"x": math.nan})) == {"x": "nan"}


def test_pairs_csv_roundtrips_floats():
    rec = dict(zip(CSV_COLUMNS, [0.1, 0.2, 1 / 3, 0.4, math.pi, 2.0, 0.5, 1.0, 1.0]))
    lines = pairs_csv([rec]).splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert float(lines[1].split(",")[2]) == 1 / 3


def test_bound_report_validates_and_is_deterministic(tmp_path):
    cfg = RunConfig.load(bundled_config("bound_unit.json"))
    a, b = run(cfg), run(cfg)
    validate(a)
    assert dumps(a) == dumps(b)
    assert a["ln_a6"] == pytest.approx(33.2711, abs=1e-3)
    with pytest.raises(jsonschema.ValidationError):
        validate({**a, "verdicts": {"thm1": "MAYBE"}})


def test_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"command": "verify-thm1", "preset": "disk", "bogus": 1})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"command": "verify-thm1"})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"command": "fly", "preset": "disk"})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"command": "uniformize", "preset": "disk", "epsilon": 2.0})
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        run_pipeline(bad)


def test_cli_exit_codes(tmp_path, capsys, graph_cache):
    assert main(["bound", "--a", "1", "--c", "1", "--M", "1", "--a1", "1", "--a3", "1"]) == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert out["ln_a5"] == pytest.approx(133.0843, abs=1e-3)
    assert main(["bound", "--a", "0.5"]) == EXIT_INPUT
    assert main(["nonsense"]) == EXIT_INPUT
    assert main(["distance", "--preset", "square", "0.5,0.5", "0.6"]) == EXIT_INPUT
    assert main(["distance", "--preset", "square", "--resolution", "16", "--cache-dir", graph_cache,
                 "0.5,0.5", "1.5,0.5"]) == EXIT_INPUT
    report = tmp_path / "q.json"
    assert main(["distance", "--preset", "square", "--resolution", "16", "--cache-dir", graph_cache,
                 "--out", str(report), "0.5,0.5", "0.25,0.5"]) == EXIT_OK
    q = json.loads(report.read_text())["query"]
    assert q["k"] == pytest.approx(math.log(2.0), rel=1e-2)


def test_cli_geodesic_svg(tmp_path, graph_cache):
    svg = tmp_path / "g.svg"
    args = ["geodesic", "--preset", "slit_disk", "--resolution", "16", "--cache-dir", graph_cache,
            "--svg", str(svg), "--out", str(tmp_path / "g.json"), "0.5,0.2", "0.5,-0.2"]
    assert main(args) == EXIT_OK
    first = svg.read_bytes()
    assert main(args) == EXIT_OK
    assert svg.read_bytes() == first
    assert first.startswith(b"<?xml") and b"<polyline" in first


def test_render_is_deterministic(slit_disk):
    a = render_svg(slit_disk, [[(0.1, 0.1), (0.5, 0.5)]], witnesses=[(0.1, 0.1)])
    assert a == render_svg(slit_disk, [[(0.1, 0.1), (0.5, 0.5)]], witnesses=[(0.1, 0.1)])
    assert "curve 1" in a and "<circle" in a


def test_verify_thm1_direct_api_and_tag_precondition(graph_cache):
    from qhgeo.errors import PreconditionError
    from qhgeo.pipeline import verify_thm1

    cfg = RunConfig(command="verify-thm1", preset="disk", resolution=16, pairs=6,
                    john_pairs=6, triples=3, cache_dir=graph_cache)
    rep = verify_thm1(generate_domain("disk"), cfg)
    validate(rep)
    assert rep["verdicts"]["thm1"] == "PASS"
    untagged = generate_domain("disk")
    untagged.tags = {**untagged.tags, "john": "no"}
    with pytest.raises(PreconditionError):
        verify_thm1(untagged, cfg)
