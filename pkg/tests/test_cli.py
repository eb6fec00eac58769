import json

import pytest

from app.commands import simulate
from app.main import create_parser, main
from app.services.manifest import load_manifest
from tests.conftest import write_config

LINE = """
[domain]
dimension = 1
h = 0.1
r0 = 2
r1 = 3

[damper]
kind = CONSTANT_ONE

[initial]
center = 0
width = 2

[run]
t_end = 30

[resolvent]
n_samples = 8
betas = 0.2, 0.1
probe_s = -0.1, 0.1

[output]
scenario = line
"""

DISK = """
[domain]
h = 0.2
r0 = 2
r1 = 3
r_box = 6
obstacles = 0, 0, 1

[damper]
kind = EXTERIOR_SMOOTH
inner_radius = 1

[run]
gcc_n_pos = 40
gcc_n_dir = 8
gcc_t_max = 20

[output]
scenario = disk
"""


@pytest.fixture
def line_cfg(tmp_path):
    return write_config(tmp_path / "line.cfg", LINE)


def _json(capsys):
    return json.loads(capsys.readouterr().out)


def test_parser_wires_handlers():
    args = create_parser().parse_args(["simulate", "--config", "x.cfg", "--threads", "2"])
    assert args.handler is simulate.run
    assert args.threads == 2


def test_subcommand_is_required():
    with pytest.raises(SystemExit):
        create_parser().parse_args([])


def test_plot_of_empty_csv_reports_plot_error(tmp_path, capsys):
    path = tmp_path / "empty.csv"
    path.write_text("")

    assert main(["plot", "--csv", str(path)]) == 2
    assert _json(capsys)["error"]["code"] == "PLOT_ERROR"


def test_bad_config_reports_validation_error(tmp_path, capsys):
    cfg = write_config(tmp_path / "bad.cfg", "[domain]\nh = -1\n")

    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "out")]) == 2
    error = _json(capsys)["error"]
    assert error["code"] == "VALIDATION_ERROR"
    assert error["module"] == "cli-harness"


def test_simulate_writes_trace_and_manifest(tmp_path, line_cfg, capsys):
    out = tmp_path / "run"
    assert main(["simulate", "--config", str(line_cfg), "--out", str(out)]) == 0

    report = _json(capsys)
    assert report["scenario"] == "line"
    assert report["energy_increases"] == 0
    header = (out / "trace.csv").read_text().splitlines()[0]
    assert header == "t,E_total,E_r,l2_sq,residual"
    files = {entry.path for entry in load_manifest(out).files}
    assert {"trace.csv", "fits.json", "cutoff.csv"} <= files


def test_simulate_is_deterministic(tmp_path, line_cfg):
    for name in ("a", "b"):
        assert main(["simulate", "--config", str(line_cfg), "--out", str(tmp_path / name)]) == 0
    first = (tmp_path / "a" / "trace.csv").read_bytes()
    assert first == (tmp_path / "b" / "trace.csv").read_bytes()


def test_fit_on_emitted_trace(tmp_path, line_cfg, capsys):
    out = tmp_path / "run"
    main(["simulate", "--config", str(line_cfg), "--out", str(out)])
    capsys.readouterr()

    args = ["fit", "--csv", str(out / "trace.csv"), "--column", "E_total", "--window", "10,27"]
    assert main(args) == 0
    fit = _json(capsys)
    assert fit["exponent"] > 0
    assert fit["window"] == [10.0, 27.0]


def test_fit_convolution_profile(capsys):
    assert main(["fit", "--conv-bound", "2,1.5"]) == 0
    assert _json(capsys)["bounded"] is True


def test_fit_needs_input(capsys):
    assert main(["fit"]) == 2
    assert _json(capsys)["error"]["code"] == "PARSE_ERROR"


def test_check_gcc(tmp_path, capsys):
    cfg = write_config(tmp_path / "disk.cfg", DISK)
    out = tmp_path / "gcc"

    assert main(["check-gcc", "--config", str(cfg), "--out", str(out)]) == 0
    assert "satisfied:       true" in capsys.readouterr().out
    assert (out / "gcc.json").exists()
    assert (out / "gcc.txt").exists()


def test_sweep_without_probe(tmp_path, line_cfg, capsys):
    out = tmp_path / "sweep"
    args = ["sweep-resolvent", "--config", str(line_cfg), "--out", str(out), "--no-probe"]
    assert main(args) == 0

    summary = _json(capsys)
    assert summary["failures"] == 0
    assert summary["low_freq_bounded"] is None
    assert (out / "sweep_intermediate.csv").exists()
    assert not (out / "low_freq.csv").exists()


def test_compare_heat(tmp_path, line_cfg, capsys):
    out = tmp_path / "heat"
    assert main(["compare-heat", "--config", str(line_cfg), "--out", str(out)]) == 0

    summary = _json(capsys)
    assert summary["samples"] > 10
    files = {entry.path for entry in load_manifest(out).files}
    assert {"heat.csv", "gap.csv", "gap.json", "trace.csv"} <= files


def test_plot_writes_svg_next_to_csv(tmp_path, line_cfg, capsys):
    out = tmp_path / "run"
    main(["simulate", "--config", str(line_cfg), "--out", str(out)])
    capsys.readouterr()

    assert main(["plot", "--csv", str(out / "trace.csv"), "--columns", "E_total,l2_sq"]) == 0
    assert (out / "trace.svg").read_text().count("<svg") == 1


def test_verify_rejects_duplicate_scenarios(tmp_path, line_cfg, capsys):
    args = ["verify", str(line_cfg), str(line_cfg), "--out", str(tmp_path / "v")]
    assert main(args) == 2
    assert _json(capsys)["error"]["code"] == "VALIDATION_ERROR"


def test_verify_csvs_are_identical_for_the_same_seed(tmp_path, line_cfg, capsys):
    codes = []
    for name in ("a", "b"):
        args = ["verify", str(line_cfg), "--skip-global", "--seed", "7"]
        codes.append(main(args + ["--out", str(tmp_path / name)]))
    capsys.readouterr()

    assert codes[0] == codes[1]
    first = sorted(path.relative_to(tmp_path / "a") for path in (tmp_path / "a").rglob("*.csv"))
    assert {"verify.csv", "line/trace.csv"} <= {path.as_posix() for path in first}
    for relative in first:
        assert (tmp_path / "a" / relative).read_bytes() == (tmp_path / "b" / relative).read_bytes()
