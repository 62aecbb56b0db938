import json
import subprocess
import sys

import pytest

from giantgyro.cli import main


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_sigma_to_stdout(capsys):
    code, out, _ = run(["sigma", "--topology", "braided-i", "--n", "2", "--m", "2", "--phi-steps", "5"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("# {")
    assert lines[1] == "phi,sigma"
    assert len(lines) == 7
    # sigma(pi) of strict braided (i) is 0.8
    assert float(lines[4].split(",")[1]) == pytest.approx(0.8)


def test_identical_config_gives_identical_bytes(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["snr", "--topology", "braided-ii", "--n", "3", "--m", "2", "--co", "0.05", "--phi-steps", "11"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_config_file_and_overrides(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"topology": {"kind": "nested", "orientation": "i", "N": 3, "M": 2, "nest_index": 1},
                               "params": {"gamma_x": 2.0}}))
    code, out, _ = run(["sigma", "--config", str(cfg), "--phi-steps", "3", "--co", "0.2"], capsys)
    assert code == 0
    snap = json.loads(out.splitlines()[0][2:])
    assert snap["params"]["gamma_x"] == 2.0
    assert snap["topology"]["nest_index"] == 1


def test_missing_point_count_is_usage_error(capsys):
    code, _, err = run(["sigma", "--topology", "braided-i", "--n", "2"], capsys)
    assert code == 2
    assert "--m" in err


def test_missing_topology_is_usage_error(capsys):
    assert run(["sigma"], capsys)[0] == 2


def test_invalid_topology_is_usage_error(capsys):
    assert run(["sigma", "--topology", "braided-i", "--n", "3", "--m", "2"], capsys)[0] == 2


def test_negative_rate_is_usage_error(capsys):
    assert run(["sigma", "--topology", "coincident", "--gamma-x", "-1"], capsys)[0] == 2


def test_bad_config_is_usage_error(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"nope": 1}')
    assert run(["sigma", "--config", str(path)], capsys)[0] == 2
    assert run(["sigma", "--config", str(tmp_path / "missing.json")], capsys)[0] == 2


def test_sensitivity_closed_and_numeric(capsys):
    code, out, _ = run(["sensitivity", "--topology", "braided-i", "--n", "2", "--m", "2", "--numeric", "--closed",
                        "--kappa", "1000", "--phi-steps", "5"], capsys)
    assert code == 0
    header = out.splitlines()[1].split(",")
    assert "rel_err_alpha" in header
    idx = header.index("rel_err_alpha")
    for row in out.splitlines()[2:]:
        assert float(row.split(",")[idx]) < 0.05


def test_sensitivity_closed_unavailable(capsys):
    code = run(["sensitivity", "--topology", "nested-i", "--n", "3", "--m", "1", "--nest-index", "1", "--closed"],
               capsys)[0]
    assert code == 2


def test_compare(capsys):
    code, out, _ = run(["compare", "--baseline", "traditional-i", "--phi", "pi"], capsys)
    assert code == 0
    row = [r for r in out.splitlines() if r.startswith("0.10000000000000001,")][0]
    values = [float(x) for x in row.split(",")]
    assert values[1] == pytest.approx(0.62535, abs=1e-5)


def test_dynamics_reports_steady_state(tmp_path, capsys):
    out_path = tmp_path / "traj.csv"
    code, out, _ = run(["dynamics", "--topology", "braided-i", "--n", "2", "--m", "2", "--tau", "0.05",
                        "--steps-per-tau", "8", "--total-time", "30", "--record-every", "100",
                        "--out", str(out_path)], capsys)
    assert code == 0
    err = float(out.split("error ")[1].split()[0])
    assert err < 1e-8
    assert out_path.read_text().startswith("t,re_a")


def test_dynamics_bad_steps(capsys):
    assert run(["dynamics", "--topology", "coincident", "--steps-per-tau", "2"], capsys)[0] == 2


def test_reciprocal_points(capsys):
    code, out, _ = run(["reciprocal-points", "--topology", "braided-i", "--n", "2", "--m", "2"], capsys)
    assert code == 0
    assert "closed: 0.50000000pi, 1.50000000pi" in out
    assert "numeric: 0.50000000pi, 1.50000000pi" in out


def test_figures_write_files(tmp_path, capsys):
    code, out, _ = run(["figures", "--figure", "f3", "--figure", "f7", "--phi-steps", "9", "--out", str(tmp_path)],
                       capsys)
    assert code == 0
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == ["f3_sigma_i.csv", "f3_sigma_ii.csv", "f7_compare_traditional_i.csv"]


def test_validate_default_passes(capsys):
    code, out, _ = run(["validate", "--random-sets", "1"], capsys)
    assert code == 0
    assert out.count("PASS") == 6


def test_validate_detects_gain(capsys):
    code, out, _ = run(["validate", "--gamma-x", "-1", "--random-sets", "0", "--check", "passivity"], capsys)
    assert code == 1
    assert out.startswith("FAIL  passivity")


def test_validate_unitarity_table(capsys):
    code, out, _ = run(["validate", "--check", "unitarity", "--omega-span", "10", "--topology", "direct"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "omega,unitarity_residual"
    assert len(lines) == 1 + 201 + 1


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "giantgyro", "reciprocal-points", "--topology", "direct"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert "vanishes for every phi" in res.stdout
