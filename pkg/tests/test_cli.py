import json

import numpy as np
import pytest

from diracnn.cli import (export_comparison, main, run_benchmark, run_solve,
                         run_spectrum, state_label, write_wavefunction_csv)
from diracnn.config import ConfigError, RunConfig, load_config, write_template
from diracnn.operator import RadialSpinor
from diracnn.mesh import build_uniform_mesh

from conftest import log_box_mesh


# ---------------------------------------------------------------------------
# config parsing
# ---------------------------------------------------------------------------

def _write(tmp_path, text):
    p = tmp_path / "run.ini"
    p.write_text(text)
    return p


def test_template_roundtrip(tmp_path):
    path = tmp_path / "t.ini"
    write_template(path)
    cfg = load_config(path)
    assert cfg.kind == "coulomb"
    assert cfg.M == 1700
    assert cfg.epsilon_prime == -0.51


def test_unknown_key_rejected(tmp_path):
    path = _write(tmp_path, "[system]\nkind = coulomb\nflux_capacitor = 1\n")
    with pytest.raises(ConfigError, match="flux_capacitor"):
        load_config(path)


def test_unknown_section_rejected(tmp_path):
    path = _write(tmp_path, "[warp_drive]\nspeed = 9\n")
    with pytest.raises(ConfigError, match="warp_drive"):
        load_config(path)


def test_bad_value_rejected(tmp_path):
    path = _write(tmp_path, "[mesh]\nm = twelve\n")
    with pytest.raises(ConfigError):
        load_config(path)


def test_missing_file_rejected(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.ini")


def test_defaults_depend_on_system():
    cfg = RunConfig(kind="woods_saxon")
    assert cfg.mesh_kind == "uniform"
    assert cfg.M == 2000
    assert cfg.r_max == 20.0
    assert cfg.tol == 1e-6
    cfg = RunConfig(kind="coulomb")
    assert cfg.mesh_kind == "log"
    assert cfg.tol == 1e-9


def test_auto_epsilon_prime(tmp_path):
    path = _write(tmp_path, "[system]\nkind = coulomb\n\n[training]\n"
                            "epsilon_prime = auto\n")
    cfg = load_config(path)
    assert cfg.epsilon_prime is None


def test_state_labels():
    assert state_label(1, -1) == "1s1/2"
    assert state_label(2, 1) == "2p1/2"
    assert state_label(1, -2) == "1p3/2"
    assert state_label(1, -7) == "1i13/2"


# ---------------------------------------------------------------------------
# comparison export
# ---------------------------------------------------------------------------

def _toy_spinor(mesh, seed=0):
    rng = np.random.default_rng(seed)
    return RadialSpinor(F=rng.standard_normal(mesh.n_interior),
                        G=rng.standard_normal(mesh.n_interior))


def test_identical_spinors_zero_error():
    mesh = build_uniform_mesh(5.0, 20)
    sp = _toy_spinor(mesh)
    err_F, err_G = export_comparison(sp, sp, mesh)
    assert np.array_equal(err_F, np.zeros_like(err_F))
    assert np.array_equal(err_G, np.zeros_like(err_G))


def test_phase_flip_invariance():
    mesh = build_uniform_mesh(5.0, 20)
    ref = _toy_spinor(mesh, 1)
    dnn = _toy_spinor(mesh, 2)
    flipped = RadialSpinor(F=-dnn.F, G=-dnn.G)
    a = export_comparison(dnn, ref, mesh)
    b = export_comparison(flipped, ref, mesh)
    np.testing.assert_allclose(a[0], b[0], atol=1e-15)
    np.testing.assert_allclose(a[1], b[1], atol=1e-15)


def test_mesh_mismatch_rejected():
    mesh_a = build_uniform_mesh(5.0, 20)
    mesh_b = build_uniform_mesh(5.0, 24)
    with pytest.raises(ValueError, match="resampling"):
        export_comparison(_toy_spinor(mesh_a), _toy_spinor(mesh_b), mesh_a,
                          ref_mesh=mesh_b)


def test_wavefunction_csv_precision(tmp_path):
    path = tmp_path / "wf.csv"
    r = np.array([1.0 / 3.0])
    write_wavefunction_csv(path, r, np.array([2.0 / 3.0]), np.array([0.1]))
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "r,F,G"
    assert float(lines[1].split(",")[0]) == 1.0 / 3.0   # 17 digits round-trip


# ---------------------------------------------------------------------------
# subcommand runs (tiny meshes, short training)
# ---------------------------------------------------------------------------

FAST_COULOMB = """
[system]
kind = coulomb
kappa = -1
n = 1

[mesh]
m = 80
r_max = 20.0

[training]
epsilon_prime = -0.51
max_epochs = 2500
window = 300
tol = 1e-7
seed = 0

[output]
dir = {out}
"""


def test_solve_writes_artifacts(tmp_path):
    cfg_path = _write(tmp_path, FAST_COULOMB.format(out=tmp_path / "run"))
    assert main(["solve", "--config", str(cfg_path)]) == 0
    out = tmp_path / "run"
    doc = json.loads((out / "energies.json").read_text())
    assert len(doc["states"]) == 1
    row = doc["states"][0]
    assert row["label"] == "1s1/2"
    assert row["method"] == "inverse"
    assert row["epsilon"] < -0.4
    assert row["relative_error"] < 0.05
    assert (out / "trace_1s1_2.csv").exists()
    wf = (out / "wavefunction_1s1_2.csv").read_text().strip().split("\n")
    assert wf[0] == "r,F,G,F_ref,G_ref"
    assert len(wf) == 80
    assert (out / "comparison_1s1_2.csv").exists()
    assert doc["config"]["M"] == 80
    # the trained network is checkpointed and loadable
    from diracnn.network import load_params, forward
    params = load_params(out / "network_1s1_2.ckpt")
    assert params.architecture == "fully_connected"
    assert np.all(np.isfinite(forward(params, np.linspace(0.1, 19, 7))))


def test_solve_bracket_violation_detected(tmp_path):
    bad = FAST_COULOMB.replace("epsilon_prime = -0.51", "epsilon_prime = -0.3")
    cfg_path = _write(tmp_path, bad.format(out=tmp_path / "run"))
    assert main(["solve", "--config", str(cfg_path)]) == 2


def test_cli_overrides(tmp_path):
    cfg_path = _write(tmp_path, FAST_COULOMB.format(out=tmp_path / "ignored"))
    out = tmp_path / "other"
    code = main(["solve", "--config", str(cfg_path), "--out", str(out),
                 "--max-epochs", "600", "--seed", "3"])
    assert code == 0
    doc = json.loads((out / "energies.json").read_text())
    assert doc["config"]["max_epochs"] == 600
    assert doc["config"]["seed"] == 3
    assert doc["states"][0]["epochs"] <= 600


def test_benchmark_coulomb(tmp_path):
    cfg_path = _write(tmp_path, """
[system]
kind = coulomb
n = 2
kappa_list = -1

[mesh]
m = 120
r_max = 40.0

[output]
dir = {out}
""".format(out=tmp_path / "bench"))
    assert main(["benchmark", "--config", str(cfg_path)]) == 0
    doc = json.loads((tmp_path / "bench" / "benchmark.json").read_text())
    assert len(doc["states"]) == 2
    for row in doc["states"]:
        assert row["relative_deviation"] < 5e-2
        assert row["residual"] < 1e-9


WS_SPECTRUM = """
[system]
kind = woods_saxon
a_count = 16
n_count = 8
z_count = 8
kappa_list = -1, -2, 1
n_fill = 8

[mesh]
m = 150
r_max = 15.0

[training]
max_epochs = 9000
window = 300
tol = 1e-5
workers = 2

[output]
dir = {out}
"""


def test_spectrum_finds_occupied_levels(tmp_path):
    cfg_path = _write(tmp_path, WS_SPECTRUM.format(out=tmp_path / "spec"))
    assert main(["spectrum", "--config", str(cfg_path)]) == 0
    doc = json.loads((tmp_path / "spec" / "energies.json").read_text())
    rows = doc["states"]
    assert len(rows) == 3                       # filled shells for 8 neutrons
    labels = {r["label"] for r in rows}
    assert labels == {"1s1/2", "1p3/2", "1p1/2"}
    for r in rows:
        assert r["reference"] < r["fermi_energy"] + 1e-9
        assert r["epsilon"] == pytest.approx(r["reference"],
                                             rel=0.02)   # short training
    assert (tmp_path / "spec" / "wavefunction_1p3_2.csv").exists()


def test_spectrum_empty_kappa_list_rejected(tmp_path):
    cfg_path = _write(tmp_path, WS_SPECTRUM.format(out=tmp_path / "x")
                      .replace("kappa_list = -1, -2, 1", "kappa_list ="))
    assert main(["spectrum", "--config", str(cfg_path)]) == 2


def test_unknown_command_exits():
    with pytest.raises(SystemExit):
        main(["conquer", "--config", "x.ini"])
