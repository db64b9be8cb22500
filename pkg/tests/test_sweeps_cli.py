import json
import subprocess
import sys

import numpy as np
import pytest

from msgate.sweeps import chain_study, contour, parity_study, sweep_detuning

from conftest import three_ion_config


@pytest.fixture(scope="module")
def small_sweep(ref_config_module):
    return sweep_detuning(ref_config_module, delta0_min_hz=-60e3, delta0_max_hz=180e3, steps=121)


@pytest.fixture(scope="module")
def ref_config_module():
    return three_ion_config()


def test_sweep_row_count_and_columns(small_sweep):
    assert small_sweep.columns[:3] == ("pulse", "delta0_khz", "domega_khz")
    assert len(small_sweep.rows) == 3 * 121
    for row in small_sweep.rows:
        assert row[0] in ("balanced_gaussian", "unbalanced_gaussian", "square")
        if not row[7]:  # unflagged rows carry finite values
            assert np.isfinite(row[3:7]).all()


def test_sweep_displacement_peaks_at_modes(small_sweep):
    # eps_d of the balanced curve peaks at the mode offsets 0, ~95, ~161 kHz
    rows = [r for r in small_sweep.rows if r[0] == "balanced_gaussian"]
    delta0 = np.array([r[1] for r in rows])
    eps_d = np.array([r[3] for r in rows])
    for mode_khz in (0.0, 95.18, 160.64):
        near = np.abs(delta0 - mode_khz) <= 6.0
        far = (np.abs(delta0 - mode_khz) > 12.0) & (np.abs(delta0 - mode_khz) <= 25.0)
        assert eps_d[near].max() > 10 * eps_d[far].min()


def test_sweep_balanced_dip_is_broad(small_sweep):
    def dip_width(name):
        rows = [r for r in small_sweep.rows if r[0] == name]
        dw = np.array([r[2] for r in rows])
        eps_r = np.array([r[4] for r in rows])
        good = np.abs(dw[eps_r < 1e-4])
        return good.max() if good.size else 0.0

    assert dip_width("balanced_gaussian") >= 4.0  # kHz
    assert dip_width("balanced_gaussian") > 5 * dip_width("square")


def test_sweep_csv_format(small_sweep, tmp_path):
    path = tmp_path / "sweep.csv"
    small_sweep.write_csv(path)
    text = path.read_text().splitlines()
    meta = [line for line in text if line.startswith("# ")]
    assert any(line.startswith("# config_hash=") for line in meta)
    assert any(line.startswith("# generator=msgate") for line in meta)
    header_idx = len(meta)
    assert text[header_idx].startswith("pulse,delta0_khz")
    assert len(text) == header_idx + 1 + len(small_sweep.rows)


def test_contour_grid(ref_config_module):
    result = contour(
        ref_config_module, z_min_s=15e-6, z_max_s=40e-6, z_steps=4,
        domega_half_range_hz=8e3, domega_steps=5,
    )
    assert len(result.rows) == 4 * 5
    # each width column is freshly balanced: delta0 varies along z
    d0_by_z = {}
    for row in result.rows:
        d0_by_z.setdefault(row[0], set()).add(row[7])
    assert len(d0_by_z) == 4
    for values in d0_by_z.values():
        assert len(values) == 1
    assert len({next(iter(v)) for v in d0_by_z.values()}) == 4


def test_contour_worker_determinism(ref_config_module):
    kwargs = dict(z_min_s=18e-6, z_max_s=32e-6, z_steps=3, domega_half_range_hz=6e3, domega_steps=4)
    serial = contour(ref_config_module, workers=1, **kwargs)
    parallel = contour(ref_config_module, workers=2, **kwargs)
    assert serial.to_csv() == parallel.to_csv()


def test_chain_study_small(ref_config_module):
    summary, curves = chain_study(
        ref_config_module, dx0_list_m=[3.5e-6], n_list=[2, 3],
        domega_half_range_hz=5e3, domega_step_hz=1000.0,
    )
    assert len(summary.rows) == 2
    status_col = summary.columns.index("status")
    assert all(row[status_col] == "" for row in summary.rows)
    n_grid = 11
    assert len(curves.rows) == 2 * n_grid
    dnu_col = summary.columns.index("dnu10_khz")
    assert summary.rows[0][dnu_col] > summary.rows[1][dnu_col] > 0


def test_chain_study_worker_determinism(ref_config_module):
    kwargs = dict(dx0_list_m=[3.5e-6], n_list=[2, 3], domega_half_range_hz=3e3, domega_step_hz=1500.0)
    s1, c1 = chain_study(ref_config_module, workers=1, **kwargs)
    s2, c2 = chain_study(ref_config_module, workers=2, **kwargs)
    assert s1.to_csv() == s2.to_csv()
    assert c1.to_csv() == c2.to_csv()


def test_chain_study_records_failures(ref_config_module):
    # 800 nm spacing cannot hold a linear 8-ion chain in this trap
    summary, curves = chain_study(
        ref_config_module, dx0_list_m=[0.8e-6], n_list=[8],
        domega_half_range_hz=2e3, domega_step_hz=1000.0,
    )
    status_col = summary.columns.index("status")
    assert summary.rows[0][status_col] != ""
    assert curves.rows == []


def test_parity_rows_and_estimate(ref_config_module):
    result = parity_study(ref_config_module, phi_steps=64)
    assert len(result.rows) == 64
    assert float(result.metadata["amplitude"]) == pytest.approx(1.0, abs=1e-5)
    est = float(result.metadata["fidelity_estimate"])
    exact = float(result.metadata["fidelity_exact"])
    assert est == pytest.approx(exact, abs=1e-6)


def test_parity_estimate_tracks_exact_off_resonance(ref_config_module):
    result = parity_study(ref_config_module, phi_steps=64, domega_hz=10e3)
    est = float(result.metadata["fidelity_estimate"])
    exact = float(result.metadata["fidelity_exact"])
    assert est == pytest.approx(exact, abs=0.01)


def write_config(tmp_path, cfg):
    path = tmp_path / "config.json"
    cfg.save(path)
    return path


def test_cli_design(tmp_path, capsys, ref_config_module):
    from msgate.cli import main

    path = write_config(tmp_path, ref_config_module)
    assert main(["design", "--config", str(path)]) == 0
    record = json.loads(capsys.readouterr().out)
    assert record["delta0_hz"] == pytest.approx(37.36e3, abs=1e3)


def test_cli_design_unbalanced_square(tmp_path, capsys, ref_config_module):
    from msgate.cli import main

    path = write_config(tmp_path, ref_config_module)
    code = main(["design", "--config", str(path), "--pulse", "square", "--delta0-khz", "-40"])
    assert code == 0
    record = json.loads(capsys.readouterr().out)
    assert record["delta0_hz"] == pytest.approx(-40e3)
    assert record["pulse_type"] == "square"
    assert record["theta"] == pytest.approx(np.pi / 2, abs=1e-9)


def test_cli_invalid_config(tmp_path, capsys):
    from msgate.cli import main

    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"n_ions": 1}))
    assert main(["design", "--config", str(path)]) == 2
    assert "error" in capsys.readouterr().err


def test_cli_parity_to_file(tmp_path, ref_config_module):
    from msgate.cli import main

    cfg_path = write_config(tmp_path, ref_config_module)
    out = tmp_path / "parity.csv"
    assert main(["parity", "--config", str(cfg_path), "--phi-steps", "16", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert sum(1 for line in lines if not line.startswith("#")) == 1 + 16


def test_cli_entrypoint_subprocess(tmp_path, ref_config_module):
    cfg_path = write_config(tmp_path, ref_config_module)
    proc = subprocess.run(
        [sys.executable, "-m", "msgate.cli", "design", "--config", str(cfg_path)],
        capture_output=True,
        text=True,
        timeout=120,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["theta"] == pytest.approx(np.pi / 2)
