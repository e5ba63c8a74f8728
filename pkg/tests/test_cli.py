import json
import math

import numpy as np
import pytest

from hdyson import TruncationPolicy, eigenvalues, ModelParams, TreeGeometry, psi_thermo
from hdyson.cli import build_run_config, main

from reference import two_spin_defect_occupations


def read_csv(path):
    lines = path.read_text().strip().splitlines()
    header = lines[0].split(",")
    rows = []
    for line in lines[1:]:
        cells = []
        for cell in line.split(","):
            try:
                cells.append(float(cell))
            except ValueError:
                cells.append(cell)
        rows.append(dict(zip(header, cells)))
    return header, rows


def run(tmp_path, *argv):
    return main([str(a) for a in argv])


def test_spectrum_output(tmp_path):
    out = tmp_path / "spec.csv"
    assert run(tmp_path, "spectrum", "--N", 3, "--sigma", 1, "--out", out) == 0
    header, rows = read_csv(out)
    assert header == ["k", "epsilon", "degeneracy"]
    spec = eigenvalues(ModelParams(TreeGeometry(3), J=1.0, sigma=1.0))
    assert [row["k"] for row in rows] == [0.0, 1.0, 2.0, 3.0]
    assert sum(row["degeneracy"] for row in rows) == 8
    for row, eps in zip(rows, spec.eps):
        assert row["epsilon"] == eps  # 17-digit round trip is exact
    manifest = json.loads((tmp_path / "spec.csv.manifest.json").read_text())
    assert manifest["config"]["N"] == 3
    assert str(out) in manifest["outputs"][0]


def test_spectrum_sigma_zero_exit_code(tmp_path):
    assert run(tmp_path, "spectrum", "--sigma", 0, "--out", tmp_path / "x.csv") == 2


def test_evolve_initial_row_and_roundtrip(tmp_path):
    out = tmp_path / "ev.csv"
    assert run(tmp_path, "evolve", "--tmax", 2, "--dt", 0.5, "--rmax", 3,
               "--out", out) == 0
    header, rows = read_csv(out)
    assert header == ["t", "r", "psi_re", "psi_im", "P"]
    first = rows[0]
    assert first["t"] == 0.0 and first["r"] == 0.0 and first["P"] == 1.0
    # round trip: parsed values equal the library recomputation exactly
    policy = TruncationPolicy(64)
    for row in rows[:12]:
        psi = psi_thermo(int(row["r"]), row["t"], 1.0, 1.0, policy)
        assert row["psi_re"] == psi.real and row["psi_im"] == psi.imag


def test_evolve_modes_agree(tmp_path):
    thermo = tmp_path / "thermo.csv"
    finite = tmp_path / "finite.csv"
    dense = tmp_path / "dense.csv"
    fast = tmp_path / "fast.csv"
    base = ["--tmax", 5, "--dt", 0.5, "--sigma", 1]
    assert run(tmp_path, "evolve", *base, "--rmax", 3, "--out", thermo) == 0
    assert run(tmp_path, "evolve", *base, "--mode", "finite", "--N", 14,
               "--out", finite) == 0
    assert run(tmp_path, "evolve", *base, "--mode", "dense", "--N", 10,
               "--out", dense) == 0
    assert run(tmp_path, "evolve", *base, "--mode", "fast", "--N", 10,
               "--out", fast) == 0

    def table(path, r_cap):
        _, rows = read_csv(path)
        return {
            (row["t"], row["r"]): row for row in rows if row["r"] <= r_cap
        }

    thermo_map, finite_map = table(thermo, 3), table(finite, 3)
    for key, row in thermo_map.items():
        assert abs(row["P"] - finite_map[key]["P"]) < 1e-3
    dense_map, fast_map = table(dense, 10), table(fast, 10)
    for key, row in dense_map.items():
        other = fast_map[key]
        delta = math.hypot(row["psi_re"] - other["psi_re"],
                           row["psi_im"] - other["psi_im"])
        assert delta < 1e-10


def test_evolve_unknown_mode(tmp_path):
    assert run(tmp_path, "evolve", "--mode", "bogus", "--out", tmp_path / "x.csv") == 2


def test_collapse_curves_and_exponent(tmp_path):
    out = tmp_path / "col.csv"
    assert run(tmp_path, "collapse", "--rmin", 1, "--rmax", 6, "--tmax", 4,
               "--points", 33, "--K", 40, "--out", out) == 0
    header, rows = read_csv(out)
    assert header == ["s", "F_re", "F_im", "r_source"]
    curves = {}
    for row in rows:
        curves.setdefault(int(row["r_source"]), []).append(row)
    tolerance = 4.0 * 2.0 ** -40
    for a, b in zip(curves[1], curves[6]):
        assert abs(a["s"] - b["s"]) < 1e-15
        assert math.hypot(a["F_re"] - b["F_re"], a["F_im"] - b["F_im"]) < tolerance
    zero = curves[1][0]
    assert zero["s"] == 0.0
    assert math.hypot(zero["F_re"], zero["F_im"]) <= 2.0 ** -40 + 1e-15
    manifest = json.loads((tmp_path / "col.csv.manifest.json").read_text())
    assert abs(manifest["z_estimate"] - 1.0) <= 0.02


def test_timeavg_closed_forms(tmp_path):
    out = tmp_path / "ta.csv"
    assert run(tmp_path, "timeavg", "--rmin", 0, "--rmax", 4, "--out", out) == 0
    header, rows = read_csv(out)
    assert header == ["r", "T", "numerical_avg", "closed_form"]
    by_r = {int(row["r"]): row for row in rows}
    assert by_r[0]["closed_form"] == pytest.approx(1.0 / 3.0)
    assert by_r[4]["closed_form"] == pytest.approx(1.0 / 24.0)
    for row in rows:
        assert abs(row["numerical_avg"] - row["closed_form"]) <= 0.02 * row["closed_form"]
    _, tail_rows = read_csv(tmp_path / "ta_tail.csv")
    tail = {int(row["R"]): row for row in tail_rows}
    assert tail[3]["closed_form_tail"] == pytest.approx(2.0 ** -2 / 3.0)
    assert tail[0]["bound"] == 2.0
    with pytest.raises(KeyError):
        tail[5]


def test_manybody_two_site_toy(tmp_path):
    stem = tmp_path / "mb"
    assert run(tmp_path, "manybody", "--L", 2, "--h", 7, "--tmax", 3, "--dt", 0.25,
               "--out", stem) == 0
    _, rows = read_csv(tmp_path / "mb_n.csv")
    for row in rows:
        n1, n2 = two_spin_defect_occupations(row["t"], 1.0)
        expected = n1 if row["x"] == 1.0 else n2
        assert abs(row["n"] - expected) < 1e-8
    manifest = json.loads((tmp_path / "mb.manifest.json").read_text())
    assert manifest["quasi_conservation_max_deviation"] < 1e-10
    assert manifest["scheme"] == "adaptive-lanczos-expm"
    _, p_rows = read_csv(tmp_path / "mb_P.csv")
    t0 = [row for row in p_rows if row["t"] == 0.0]
    assert t0[0]["P"] == 1.0 and all(row["P"] == 0.0 for row in t0[1:])
    s_rows = read_csv(tmp_path / "mb_S.csv")[1]
    assert all(row["S"] == 0.0 for row in s_rows if row["t"] == 0.0)


def test_manybody_resource_and_input_errors(tmp_path):
    assert run(tmp_path, "manybody", "--L", 32, "--out", tmp_path / "x") == 3
    assert run(tmp_path, "manybody", "--L", 6, "--out", tmp_path / "x") == 2
    assert run(tmp_path, "manybody", "--L", 4, "--h", 0,
               "--compare-single-particle", "--out", tmp_path / "x") == 2
    assert run(tmp_path, "manybody", "--L", 2, "--h", 0, "--tmax", 0.5, "--dt", 0.25,
               "--out", tmp_path / "h0") == 0


def test_manybody_comparison_field(tmp_path):
    stem = tmp_path / "cmp"
    assert run(tmp_path, "manybody", "--L", 8, "--h", 40, "--tmax", 2, "--dt", 0.5,
               "--compare-single-particle", "--out", stem) == 0
    manifest = json.loads((tmp_path / "cmp.manifest.json").read_text())
    assert 0.0 < manifest["single_particle_max_deviation"] < 0.05


def test_entropy_single_mode(tmp_path):
    out = tmp_path / "ent.csv"
    assert run(tmp_path, "entropy", "--N", 5, "--tmax", 5, "--dt", 2.5,
               "--out", out) == 0
    header, rows = read_csv(out)
    assert header == ["t", "x", "S"]
    assert all(row["S"] == 0.0 for row in rows if row["t"] == 0.0)
    late = [row["S"] for row in rows if row["t"] == 5.0]
    assert len(late) == 31
    assert late[15] > late[29]  # decay beyond the first shells


def test_entropy_manybody_mode(tmp_path):
    out = tmp_path / "entm.csv"
    assert run(tmp_path, "entropy", "--mode", "manybody", "--L", 4, "--h", 30,
               "--tmax", 1, "--dt", 0.5, "--out", out) == 0
    _, rows = read_csv(out)
    assert {row["x"] for row in rows} == {1.0, 2.0, 3.0}
    assert all(row["S"] >= 0.0 for row in rows)


def test_bench_schema(tmp_path):
    out = tmp_path / "bench.csv"
    assert run(tmp_path, "bench", "--nmin", 4, "--nmax", 5, "--repeats", 2,
               "--out", out) == 0
    header, rows = read_csv(out)
    assert header == ["N", "L", "op", "mean_ns", "stddev_ns"]
    assert {row["op"] for row in rows} == {"fast_apply", "tree_transform", "fast_evolve"}
    assert all(row["mean_ns"] > 0 for row in rows)


def test_byte_determinism(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        assert run(tmp_path, "evolve", "--tmax", 3, "--dt", 0.5, "--rmax", 4,
                   "--out", out) == 0
    assert a.read_bytes() == b.read_bytes()
    assert (tmp_path / "a.csv.manifest.json").read_text().replace("a.csv", "") == (
        tmp_path / "b.csv.manifest.json"
    ).read_text().replace("b.csv", "")


def test_json_format(tmp_path):
    out = tmp_path / "spec.json"
    assert run(tmp_path, "spectrum", "--N", 2, "--format", "json", "--out", out) == 0
    records = json.loads(out.read_text())
    assert records[0] == {"k": 0, "epsilon": -1.5, "degeneracy": 1}
    assert records[2]["degeneracy"] == 2


def test_config_file_layering(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# defaults for this study\nN=3\nsigma=2.0\n")
    config = build_run_config(
        ["spectrum", "--config", str(cfg), "--out", str(tmp_path / "s.csv")]
    )
    assert config.N == 3 and config.sigma == 2.0
    config = build_run_config(
        ["spectrum", "--config", str(cfg), "--N", "1", "--out", str(tmp_path / "s.csv")]
    )
    assert config.N == 1 and config.sigma == 2.0  # flags beat the file
    bad = tmp_path / "bad.cfg"
    bad.write_text("unknown_key=3\n")
    assert run(tmp_path, "spectrum", "--config", bad, "--out", tmp_path / "x.csv") == 2
    bad.write_text("sigma\n")
    assert run(tmp_path, "spectrum", "--config", bad, "--out", tmp_path / "x.csv") == 2


def test_seed_flag_reserved(tmp_path):
    config = build_run_config(["spectrum", "--seed", "7", "--out", "s.csv"])
    assert config.seed == 7
