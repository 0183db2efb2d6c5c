import json
import subprocess
import sys

import numpy as np
import pytest

from centrifuge_pilot import pnm
from centrifuge_pilot.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_render_then_detect(tmp_path, capsys):
    out = str(tmp_path)
    code, text, _ = run(capsys, "render", "--seed", "3", "--tubes", "2", "--ideal", "--out", out)
    assert code == 0
    for name in ("scene.ppm", "scene.truth.json", "scene.spec.json"):
        assert (tmp_path / name).exists()
    code, text, _ = run(capsys, "detect", str(tmp_path / "scene.ppm"), "--annotate", "--accumulator", "--out", out)
    assert code == 0
    assert text.count("Occupied") == 2
    assert pnm.read(tmp_path / "annotated.ppm").shape == (720, 1280, 3)
    assert pnm.read(tmp_path / "accumulator.pgm").ndim == 2


def test_render_is_byte_reproducible(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert run(capsys, "render", "--seed", "11", "--out", str(d))[0] == 0
    for name in ("scene.ppm", "scene.truth.json", "scene.spec.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_detect_from_spec(tmp_path, capsys):
    spec = {"tubes": [{"color_label": "yellow", "rgb": [255, 220, 0]}, {"color_label": "orange", "rgb": [255, 140, 0]}]}
    path = tmp_path / "s.json"
    path.write_text(json.dumps(spec))
    code, text, _ = run(capsys, "detect", "--spec", str(path), "--out", str(tmp_path))
    assert code == 0 and text.count("Occupied (warm)") == 2


def test_blank_image_exit_zero(tmp_path, capsys):
    pnm.write(tmp_path / "blank.ppm", np.full((720, 1280, 3), 200, np.uint8))
    code, text, _ = run(capsys, "detect", str(tmp_path / "blank.ppm"), "--out", str(tmp_path))
    assert code == 0 and "no buckets found" in text


@pytest.mark.parametrize("op, fname", [("remove", "remove.gcode"), ("insert", "insert.gcode")])
def test_operations_with_truth_sidecar(tmp_path, capsys, op, fname):
    out = str(tmp_path)
    run(capsys, "render", "--seed", "5", "--tubes", "1", "--ideal", "--out", out)
    code, text, _ = run(capsys, op, str(tmp_path / "scene.ppm"), "--out", out)
    assert code == 0
    assert f"{op}: success" in text
    gcode = (tmp_path / fname).read_text()
    assert gcode.startswith("G90\n") and gcode.endswith("M400\n")


def test_remove_with_nothing_to_remove(tmp_path, capsys):
    out = str(tmp_path)
    run(capsys, "render", "--seed", "5", "--tubes", "0", "--ideal", "--out", out)
    code, text, _ = run(capsys, "remove", str(tmp_path / "scene.ppm"), "--out", out)
    assert code == 0 and "nothing to do" in text


def test_experiment_reports_reproducible(tmp_path, capsys):
    texts = []
    for d in ("a", "b"):
        code, text, _ = run(capsys, "experiment", "localization", "--trials", "4", "--seed", "9",
                            "--format", "csv", "--out", str(tmp_path / d))
        assert code == 0
        texts.append(text.replace(str(tmp_path / d), ""))
    assert texts[0] == texts[1]
    for name in ("localization.csv", "localization_trials.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    rows = (tmp_path / "a" / "localization_trials.csv").read_text().splitlines()
    assert len(rows) == 1 + 4


def test_experiment_runtime_and_detection(tmp_path, capsys):
    code, text, _ = run(capsys, "experiment", "runtime", "--no-wall-clock", "--out", str(tmp_path))
    assert code == 0 and "Serial communication share" in text
    code, text, _ = run(capsys, "experiment", "detection", "--trials", "0", "--out", str(tmp_path))
    assert code == 0 and "0/0" in text


def test_errors_exit_two(tmp_path, capsys):
    assert run(capsys, "detect", str(tmp_path / "missing.ppm"))[0] == 2
    assert run(capsys, "detect")[0] == 2
    assert run(capsys, "experiment", "localization", "--trials", "3", "--out", str(tmp_path))[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text('{"nope": 1}')
    code, _, err = run(capsys, "render", "--config", str(bad), "--out", str(tmp_path))
    assert code == 2 and "unknown config keys" in err
    pnm.write(tmp_path / "gray.pgm", np.zeros((4, 4), np.uint8))
    assert run(capsys, "detect", str(tmp_path / "gray.pgm"))[0] == 2


def test_config_env_var(tmp_path, capsys, monkeypatch):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"latency": {"t_serial": 0.0}}))
    monkeypatch.setenv("CENTRIFUGE_PILOT_CONFIG", str(cfg))
    code, text, _ = run(capsys, "experiment", "runtime", "--no-wall-clock", "--out", str(tmp_path))
    assert code == 0 and "share of simulated motion time: 0.0%" in text


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "centrifuge_pilot", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "experiment" in res.stdout
