import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest

from kgattract.cli import main
from kgattract.config import ConfigError, load_config
from kgattract.runner import read_trace_csv

SOLITARY_CFG = """\
[model]
mass = 1.0

[oscillator.0]
position_x = 0.0
coeffs = 0, -1, 0.25

[grid]
half_width_x = 20
dx = 0.05

[time]
T = {T}
cfl = 0.5
sample_every = 200
bc = transparent

[initial]
kind = solitary
omega = 0.8

[diagnostics]
radii = 1, 2, 5
distance_every = 4
spectrum_window_t = 40

[output]
directory = out
snapshot_every = 100
"""


def _write(tmp_path, text, name="run.ini"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def _data_files(d):
    return sorted(f for f in os.listdir(d) if f != "manifest.json" and not f.startswith("."))


# ---------------------------------------------------------------- solitary


def test_solitary_roots(capsys):
    assert main(["solitary", "--mass", "1", "--omega", "0.8", "--coeffs", "0,-1,0.25"]) == 0
    out = capsys.readouterr().out
    line = next(ln for ln in out.splitlines() if ln.startswith("C="))
    C = float(line.split()[0][2:])
    assert C == pytest.approx(math.sqrt(0.8), abs=1e-12)
    assert float(line.split("residual=")[1]) < 1e-10


def test_solitary_outside_band(capsys):
    assert main(["solitary", "--mass", "1", "--omega", "1", "--coeffs", "0,-1,0.25"]) == 2
    assert "no nonzero solitary waves for |omega| >= m" in capsys.readouterr().err


def test_solitary_no_roots(capsys):
    assert main(["solitary", "--mass", "1", "--omega", "0.5", "--coeffs", "0,0,1"]) == 0
    assert "{}" in capsys.readouterr().out


def test_solitary_profile_csv(tmp_path, capsys):
    out = tmp_path / "prof.csv"
    rc = main(["solitary", "--mass", "1", "--omega", "0.8", "--coeffs", "0,-1,0.25",
               "--profile", str(out), "--half-width", "5", "--dx", "0.1"])
    assert rc == 0
    data = np.loadtxt(out, delimiter=",", skiprows=2)
    assert data.shape == (101, 5)
    assert data[50, 1] == pytest.approx(math.sqrt(0.8), rel=1e-15)
    assert data[50, 4] == pytest.approx(-0.8 * math.sqrt(0.8), rel=1e-15)


# ---------------------------------------------------------------- gapcheck


@pytest.mark.parametrize("positions,verdict", [("0,1", "holds"), ("0,2", "fails"), ("0", "vacuous")])
def test_gapcheck(capsys, positions, verdict):
    degrees = ",".join("2" for _ in positions.split(","))
    assert main(["gapcheck", "--mass", "1", "--positions", positions, "--degrees", degrees]) == 0
    assert f"verdict={verdict}" in capsys.readouterr().out


# ---------------------------------------------------------------- multifreq


def test_multifreq_widegap(tmp_path, capsys):
    stub = tmp_path / "wg.ini"
    assert main(["multifreq", "widegap", "--mass", "1", "--L", str(math.pi), "--alpha", "0", "--beta", "1",
                 "--config-out", str(stub)]) == 0
    out = capsys.readouterr().out
    res = [float(ln.split("=")[1]) for ln in out.splitlines() if ln.startswith(("residual", "jump_residual"))]
    assert res and max(res) < 1e-10
    cfg = load_config(str(stub), output_dir=str(tmp_path / "o"))
    assert cfg.multifreq.omega == pytest.approx(math.sqrt(2) / 3)


def test_multifreq_refusals(capsys):
    assert main(["multifreq", "widegap", "--mass", "1", "--L", "1"]) == 2
    assert "pi/(2^(3/2) m)" in capsys.readouterr().err
    assert main(["multifreq", "lindeg", "--mass", "1", "--L", "1", "--omega", "0.34"]) == 2


def test_multifreq_lindeg(capsys):
    assert main(["multifreq", "lindeg", "--mass", "1", "--L", "1", "--omega", "0.25"]) == 0
    out = capsys.readouterr().out
    assert "gamma = " in out and "kind = multifreq_lindeg" in out


# ---------------------------------------------------------------- spectrum


def _trace_file(path, t, z, label="osc0"):
    with open(path, "w") as fh:
        fh.write("# config_hash=none\n")
        fh.write(f"t,re_{label},im_{label}\n")
        np.savetxt(fh, np.column_stack([t, z.real, z.imag]), fmt="%.17g", delimiter=",")


def test_spectrum_two_tone(tmp_path, capsys):
    t = np.arange(8192) * 0.05
    p = tmp_path / "tr.csv"
    _trace_file(p, t, np.exp(-0.47j * t) + 0.5 * np.exp(-1.41j * t))
    csv = tmp_path / "spec.csv"
    assert main(["spectrum", str(p), "--window", "0", str(t[-1]), "--mass", "1", "--csv", str(csv)]) == 0
    out = capsys.readouterr().out
    peaks = [float(ln.split()[1].split("=")[1]) for ln in out.splitlines() if ln.startswith("peak")]
    assert peaks[:2] == pytest.approx([0.47, 1.41], abs=1e-3)
    lines = [ln for ln in out.splitlines() if ln.startswith("line")]
    assert len(lines) == 2
    spec = np.loadtxt(csv, delimiter=",", skiprows=1)
    assert spec[np.argmax(spec[:, 1]), 0] == pytest.approx(0.47, abs=2 * math.pi / (8192 * 0.05))


def test_spectrum_errors(tmp_path, capsys):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    assert main(["spectrum", str(empty), "--window", "0", "1", "--mass", "1"]) == 2
    t = np.arange(2048) * 0.05
    p = tmp_path / "tr.csv"
    _trace_file(p, t, np.exp(-0.5j * t))
    assert main(["spectrum", str(p), "--window", "0", "500", "--mass", "1"]) == 2
    assert main(["spectrum", str(p), "--window", "0", "10", "--mass", "1"]) == 2
    assert main(["spectrum", str(tmp_path / "nope.csv"), "--window", "0", "10", "--mass", "1"]) == 2


# ---------------------------------------------------------------- config errors


def test_config_errors_carry_line_numbers(tmp_path):
    bad = SOLITARY_CFG.format(T=5).replace("dx = 0.05", "dx = zero")
    with pytest.raises(ConfigError, match=r"run\.ini:10: \[grid\] dx"):
        load_config(_write(tmp_path, bad))
    bad = SOLITARY_CFG.format(T=5).replace("bc = transparent", "bc = transparent\nfoo = 1")
    with pytest.raises(ConfigError, match=r"run\.ini:17: \[time\] foo: unknown key"):
        load_config(_write(tmp_path, bad))


def test_config_widegap_below_threshold(tmp_path):
    text = ("[model]\nmass = 1\nallow_unbounded = true\n[grid]\nhalf_width_x = 10\ndx = 0.05\n"
            "[time]\nT = 1\n[initial]\nkind = multifreq_widegap\nL = 1\n[output]\ndirectory = o\n")
    with pytest.raises(ConfigError, match=r"pi/\(2\^\(3/2\) m\)"):
        load_config(_write(tmp_path, text))


def test_config_snaps_oscillator(tmp_path):
    text = SOLITARY_CFG.format(T=5).replace("position_x = 0.0", "position_x = 0.01")
    cfg = load_config(_write(tmp_path, text))
    assert cfg.model.positions == [0.0]
    assert any("snapped" in n for n in cfg.notes)


def test_config_unbounded_needs_flag(tmp_path):
    text = SOLITARY_CFG.format(T=5).replace("coeffs = 0, -1, 0.25", "coeffs = 0, -1, -0.25")
    with pytest.raises(ConfigError, match="unbounded"):
        load_config(_write(tmp_path, text))


def test_config_hash_ignores_output_dir(tmp_path):
    a = load_config(_write(tmp_path, SOLITARY_CFG.format(T=5), "a.ini"))
    b = load_config(_write(tmp_path, SOLITARY_CFG.format(T=5).replace("directory = out", "directory = x"), "b.ini"))
    c = load_config(_write(tmp_path, SOLITARY_CFG.format(T=6), "c.ini"))
    assert a.config_hash == b.config_hash != c.config_hash


# ---------------------------------------------------------------- simulate


def test_simulate_missing_file(tmp_path, capsys):
    out = tmp_path / "never"
    assert main(["simulate", str(tmp_path / "missing.ini"), "--out", str(out)]) == 2
    assert not out.exists()


def test_simulate_outputs_and_reproducibility(tmp_path, capsys):
    cfg = _write(tmp_path, SOLITARY_CFG.format(T=5))
    d1, d2 = tmp_path / "r1", tmp_path / "r2"
    assert main(["simulate", cfg, "--out", str(d1)]) == 0
    assert main(["simulate", cfg, "--out", str(d2)]) == 0
    files = _data_files(d1)
    assert {"records.ndjson", "traces.csv", "final_state.csv", "summary.json"} <= set(files)
    assert any(f.startswith("snap_") for f in files)
    h = load_config(cfg).config_hash
    for f in files:
        assert h in (d1 / f).read_text().splitlines()[0]
        assert (d1 / f).read_bytes() == (d2 / f).read_bytes()
    man = json.loads((d1 / "manifest.json").read_text())
    assert man["config_hash"] == h and man["status"] == "completed"
    assert sorted(man["files"]) == files
    recs = [json.loads(ln) for ln in (d1 / "records.ndjson").read_text().splitlines()]
    assert recs[0]["kind"] == "header"
    assert {"t", "E", "Q", "semi_R", "dist_S", "peaks"} <= set(recs[1])
    t, tr, label = read_trace_csv(str(d1 / "traces.csv"))
    assert label == "osc0" and t.size == man_steps(recs) + 1


def man_steps(recs):
    return recs[0]["steps"]


def test_simulate_hash_conflict(tmp_path, capsys):
    d = tmp_path / "r"
    assert main(["simulate", _write(tmp_path, SOLITARY_CFG.format(T=2), "a.ini"), "--out", str(d)]) == 0
    other = _write(tmp_path, SOLITARY_CFG.format(T=3), "b.ini")
    assert main(["simulate", other, "--out", str(d)]) == 2
    assert "--force" in capsys.readouterr().err
    assert main(["simulate", other, "--out", str(d), "--force"]) == 0


@pytest.mark.slow
def test_simulate_solitary_seed_attracts(tmp_path, capsys):
    assert main(["simulate", _write(tmp_path, SOLITARY_CFG.format(T=120)), "--out", str(tmp_path / "r")]) == 0
    assert "verdict: attracting" in capsys.readouterr().out
    summ = json.loads((tmp_path / "r" / "summary.json").read_text())
    assert summ["final_omega"] == pytest.approx(0.8, abs=1e-2)


def test_free_decay(tmp_path, capsys):
    cfg = _write(tmp_path, SOLITARY_CFG.format(T=10))
    assert main(["free-decay", cfg, "--out", str(tmp_path / "fd")]) == 0
    out = capsys.readouterr().out
    ratios = [float(ln.split("ratio=")[1]) for ln in out.splitlines() if "ratio=" in ln]
    assert len(ratios) == 3 and all(r < 1 for r in ratios)


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "kgattract", "gapcheck", "--mass", "1", "--positions", "0,1",
                        "--degrees", "2,2"], capture_output=True, text=True)
    assert r.returncode == 0 and "verdict=holds" in r.stdout


def test_shipped_configs_load(tmp_path):
    root = os.path.join(os.path.dirname(__file__), os.pardir, "configs")
    names = sorted(f for f in os.listdir(root) if f.endswith(".ini"))
    assert names
    for name in names:
        cfg = load_config(os.path.join(root, name), output_dir=str(tmp_path / name))
        assert cfg.T > 0
