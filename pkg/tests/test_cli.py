import json
import math

import numpy as np
import pytest

from mirrorqed.cli import main, parse_floats, parse_range


def read(path):
    return path.read_bytes()


def test_parse_range_and_floats():
    g = parse_range("0.8:1.2:5")
    np.testing.assert_allclose(g, [0.8, 0.9, 1.0, 1.1, 1.2])
    assert parse_floats("0.1,1,10") == [0.1, 1.0, 10.0]


def test_reflection_outputs_and_determinism(tmp_path):
    argv = ["reflection", "--cc-frac", "0.1", "--z0-ratios", "0.1,1000",
            "--grid", "0.8:1.2:2001", "--out", str(tmp_path)]
    assert main(argv) == 0
    csvs = sorted(tmp_path.glob("*z0_*.csv"))
    assert len(csvs) == 2
    for f in csvs:
        lines = f.read_bytes().split(b"\r\n")   # RFC-4180 line endings
        assert lines[0] == b"omega_over_omega_j,re_r,im_r,abs_r"
        assert len([ln for ln in lines if ln]) == 2002  # header + 2001 rows
    assert len(list(tmp_path.glob("*reflection.svg"))) == 1
    before = {f.name: read(f) for f in csvs}
    assert main(argv) == 0
    after = {f.name: read(f) for f in sorted(tmp_path.glob("*z0_*.csv"))}
    assert before == after  # identical flags -> byte-identical CSVs
    manifest_lines = (tmp_path / "manifests.jsonl").read_text().splitlines()
    assert len(manifest_lines) == 2  # append-only, one record per run
    rec = json.loads(manifest_lines[0])
    assert set(rec["outputs"]) >= {f.name for f in csvs}
    assert all(name.startswith(rec["run_id"]) for name in rec["outputs"])


def test_reflection_empty_ratio_list_is_usage_error(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["reflection", "--cc-frac", "0.1", "--z0-ratios", "",
              "--out", str(tmp_path)])
    assert exc.value.code == 2


def test_missing_capacitance_flag_is_usage_error(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["reflection", "--z0-ratios", "1,10", "--out", str(tmp_path)])
    assert exc.value.code == 2


def test_bad_grid_is_usage_error(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["reflection", "--cc-frac", "0.1", "--z0-ratios", "1",
              "--grid", "1.2:0.8:100", "--out", str(tmp_path)])
    assert exc.value.code == 2


def test_emission_trajectory_columns(tmp_path):
    assert main(["emission", "--cc-ratio", "0.1", "--z0-ratio", "1000",
                 "--t-max", "120", "--out", str(tmp_path)]) == 0
    csv_path = next(tmp_path.glob("*trajectory.csv"))
    header = csv_path.read_text().splitlines()[0]
    assert header == "t,phi_j,p_j,p_0,e_q,e_r,e_l,e_total"
    rows = np.genfromtxt(csv_path, delimiter=",", names=True)
    np.testing.assert_allclose(rows["e_total"], rows["e_total"][0], rtol=1e-6)
    assert next(tmp_path.glob("*energies.svg")).stat().st_size > 0


def test_emission_si_boundary(tmp_path):
    # SI values convert at the CLI boundary; omega_c = omega_j resonance
    omega_j = 1.0 / math.sqrt(9e-9 * 60e-15)
    delay = 2 * math.pi / omega_j
    assert main(["emission", "--si", "--cc", "6e-15", "--cj", "60e-15",
                 "--lj", "9e-9", "--z0", "4330", "--delay", str(delay),
                 "--t-max", "100", "--out", str(tmp_path)]) == 0
    rec = json.loads((tmp_path / "manifests.jsonl").read_text().splitlines()[-1])
    assert rec["params"]["c_j"] == 1.0 and rec["params"]["l_j"] == 1.0
    assert rec["params"]["delay"] == pytest.approx(2 * math.pi, rel=1e-9)


def test_poles_tables(tmp_path):
    assert main(["poles", "--cc-ratio", "0.1", "--z0-ratio", "1000",
                 "--window", "0.95", "1.05", "-0.001", "0.01",
                 "--out", str(tmp_path)]) == 0
    pole_csv = next(tmp_path.glob("*poles.csv"))
    lines = pole_csv.read_text().splitlines()
    assert lines[0] == "re,im,residue_phi_re,residue_phi_im,label"
    assert len(lines) == 3
    meta = json.loads(next(tmp_path.glob("*poles.json")).read_text())
    assert meta["method_report"]["window_count"] == 2

    assert main(["poles", "--rabi-table", "--cc-ratios", "0.3",
                 "--z0-ratios", "316,1000", "--out", str(tmp_path)]) == 0
    table = next(tmp_path.glob("*rabi_table.csv")).read_text().splitlines()
    assert len(table) == 3


def test_hopfield_spectrum_csv(tmp_path):
    assert main(["hopfield", "--cc-ratio", "0.3", "--z0-ratio", "100",
                 "--n-modes", "4", "--scan", "5:9:3", "--out", str(tmp_path)]) == 0
    lines = next(tmp_path.glob("*spectrum.csv")).read_text().splitlines()
    assert lines[0] == "omega_j_T,alpha,eigfreq,bosonicity"
    assert len(lines) == 1 + 3 * 10   # 3 slices x (2N+2) rows


def test_response_map_outputs(tmp_path):
    assert main(["response", "--cc-ratio", "0.3", "--z0-ratio", "100", "--map",
                 "--scan", "5:9:3", "--n-modes", "4", "--grid", "0.3:2.0:120",
                 "--out", str(tmp_path)]) == 0
    names = {p.name.split("__")[1] for p in tmp_path.glob("response-*")}
    assert names == {"map.csv", "eigenfrequencies.csv", "map.svg"}


def test_numerical_failure_exit_code(tmp_path, monkeypatch):
    import mirrorqed.cli as cli
    from mirrorqed.errors import PoleSearchError

    def boom(*args, **kwargs):
        raise PoleSearchError("synthetic failure")

    monkeypatch.setattr(cli, "find_poles", boom)
    code = main(["poles", "--cc-ratio", "0.1", "--z0-ratio", "1000",
                 "--out", str(tmp_path)])
    assert code == 3
