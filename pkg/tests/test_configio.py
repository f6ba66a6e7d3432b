import textwrap

import pytest

from dualsniff.configio import (CaptureSpec, ConfigError, load_setup,
                                parse_setup)
from dualsniff.geometry import Position
from dualsniff.timing import ta_seconds

MINIMAL = {
    "scenario": {
        "enb": [0.0, 0.0],
        "sniffers": [[100.0, 0.0], [0.0, 100.0]],
    },
}


def _full_doc():
    return {
        "scenario": {
            "enb": [0.0, 0.0],
            "sniffers": [[109.7, 0.0], [0.0, 139.5]],
            "ue_truth": [80.0, 82.2],
            "ta_index": 1,
        },
        "clock": {
            "sniffer_offsets": [1e-6, -2e-6],
            "ue_hw_error": 3e-7,
            "sniffer_noise_sigma": 2e-8,
            "rng_seed": 42,
        },
        "capture": {
            "subframes": 40,
            "rnti": 7423,
            "snr_db": 18.0,
            "noise_power_dbm": -92.0,
            "start_frame": 1020,
        },
        "relocations": [
            {"sniffer": 2, "at_subframe": 20, "to": [154.0, 40.0]},
        ],
    }


def test_minimal_document_defaults():
    setup = parse_setup(MINIMAL)
    assert setup.scenario.ue_truth is None
    assert setup.scenario.ta_index == 0
    assert setup.clock.sniffer_offsets == (0.0, 0.0)
    assert setup.clock.sniffer_noise_sigma == 0.0
    assert setup.capture == CaptureSpec()
    assert setup.relocations == ()


def test_full_document():
    setup = parse_setup(_full_doc())
    assert setup.scenario.ue_truth == Position(80.0, 82.2)
    assert setup.clock.ta_value == ta_seconds(1)
    assert setup.clock.rng_seed == 42
    assert setup.capture.rnti == 7423
    assert setup.capture.start_frame == 1020
    (move,) = setup.relocations
    # YAML numbering is 1-based, internal sniffer indices are 0-based
    assert move.sniffer == 1
    assert move.at_subframe == 20
    assert move.to == Position(154.0, 40.0)


def test_unknown_top_level_key():
    doc = dict(_full_doc(), extra={"x": 1})
    with pytest.raises(ConfigError, match="unknown top-level"):
        parse_setup(doc)


def test_missing_scenario_section():
    with pytest.raises(ConfigError, match="scenario"):
        parse_setup({"clock": {}})
    with pytest.raises(ConfigError, match="top level"):
        parse_setup(["not", "a", "mapping"])


def test_bad_positions():
    doc = _full_doc()
    doc["scenario"]["enb"] = [1.0]
    with pytest.raises(ConfigError, match=r"scenario.enb"):
        parse_setup(doc)
    doc = _full_doc()
    doc["scenario"]["sniffers"] = [[0.0, 1.0]]
    with pytest.raises(ConfigError, match="at least two"):
        parse_setup(doc)
    doc = _full_doc()
    doc["scenario"]["sniffers"][0] = ["a", "b"]
    with pytest.raises(ConfigError, match=r"sniffers\[0\]"):
        parse_setup(doc)


def test_truth_outside_band_is_config_error():
    doc = _full_doc()
    doc["scenario"]["ue_truth"] = [10.0, 10.0]  # band 1 starts at 78.12 m
    with pytest.raises(ConfigError, match="scenario"):
        parse_setup(doc)


def test_clock_offset_count_mismatch():
    doc = _full_doc()
    doc["clock"]["sniffer_offsets"] = [0.0]
    with pytest.raises(ConfigError, match="clock"):
        parse_setup(doc)


def test_capture_validation():
    doc = _full_doc()
    doc["capture"]["subframes"] = 0
    with pytest.raises(ConfigError, match="subframes"):
        parse_setup(doc)


def test_relocation_validation():
    for patch, pattern in (
        ({"sniffer": 3}, r"sniffer must be 1\.\.2"),
        ({"sniffer": 0}, r"sniffer must be 1\.\.2"),
        ({"at_subframe": 0}, "at_subframe"),
        ({"at_subframe": 40}, "at_subframe"),
        ({"to": [1.0]}, "to"),
    ):
        doc = _full_doc()
        doc["relocations"][0].update(patch)
        with pytest.raises(ConfigError, match=pattern):
            parse_setup(doc)
    doc = _full_doc()
    doc["relocations"] = [{"sniffer": 2}]
    with pytest.raises(ConfigError, match="needs keys"):
        parse_setup(doc)


def test_load_setup_roundtrip(tmp_path):
    text = textwrap.dedent("""\
        scenario:
          enb: [0.0, 0.0]
          sniffers:
            - [109.7, 0.0]
            - [0.0, 139.5]
          ue_truth: [80.0, 82.2]
          ta_index: 1
        capture:
          subframes: 40
          rnti: 7423
        """)
    path = tmp_path / "exp.yaml"
    path.write_text(text)
    setup = load_setup(str(path))
    assert setup.scenario.ue_truth == Position(80.0, 82.2)
    assert setup.capture.subframes == 40


def test_load_setup_error_paths(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_setup(str(tmp_path / "absent.yaml"))
    bad = tmp_path / "bad.yaml"
    bad.write_text("scenario: [unclosed\n")
    with pytest.raises(ConfigError):
        load_setup(str(bad))
    # parse errors carry the file path for context
    incomplete = tmp_path / "incomplete.yaml"
    incomplete.write_text("scenario:\n  enb: [0.0, 0.0]\n")
    with pytest.raises(ConfigError, match="incomplete.yaml"):
        load_setup(str(incomplete))
