import json

import numpy as np
import pytest

from robustpricing.cli import main, read_mechanism, write_mechanism
from robustpricing.mechanism import Mechanism

SMALL_LP = ["--n", "24", "--eta", "1e-3", "--b", "40"]


def run(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def run_json(capsys, argv):
    code, out, err = run(capsys, argv)
    assert code == 0, err
    return json.loads(out)


class TestDeterministicCommand:
    def test_reference_cell(self, capsys):
        rep = run_json(capsys, ["deterministic", "--alpha", "0", "--w", "1", "--q", "0.75"])
        assert rep["deterministic"]["ratio"] == pytest.approx(0.25, abs=1e-9)
        assert rep["deterministic"]["price"] == pytest.approx(1.0)

    def test_price_scales_with_incumbent(self, capsys):
        base = run_json(capsys, ["deterministic", "--alpha", "1", "--w", "1", "--q", "0.5"])
        scaled = run_json(capsys, ["deterministic", "--alpha", "1", "--w", "2", "--q", "0.5"])
        assert scaled["deterministic"]["price"] == pytest.approx(
            2.0 * base["deterministic"]["price"], rel=1e-12
        )
        assert scaled["deterministic"]["ratio"] == pytest.approx(
            base["deterministic"]["ratio"], rel=1e-12
        )

    def test_degenerate_rate_exits_2(self, capsys):
        code, out, err = run(capsys, ["deterministic", "--alpha", "0", "--q", "1"])
        assert code == 2
        assert out == ""
        assert "error" in err

    def test_full_precision_serialization(self, capsys):
        code, out, _ = run(capsys, ["deterministic", "--alpha", "1", "--q", "0.37"])
        assert code == 0
        ratio = json.loads(out)["deterministic"]["ratio"]
        # round-trips losslessly through the JSON text
        assert json.loads(json.dumps(ratio)) == ratio


class TestRandomizedCommand:
    def test_bracket_and_mechanism(self, capsys):
        rep = run_json(capsys, ["randomized", "--alpha", "1", "--q", "0.5", *SMALL_LP])
        rand = rep["randomized"]
        assert rand["lower"] <= rand["upper"] + 1e-9
        probs = np.array(rand["mechanism"]["probs"])
        assert probs.sum() <= 1.0 + 1e-9
        assert rep["params"]["n"] == 24

    def test_coarser_grid_widens_bracket(self, capsys):
        fine = run_json(capsys, ["randomized", "--alpha", "1", "--q", "0.5", "--n", "64", "--eta", "1e-3", "--b", "40"])
        coarse = run_json(capsys, ["randomized", "--alpha", "1", "--q", "0.5", "--n", "8", "--eta", "1e-3", "--b", "40"])
        gap_fine = fine["randomized"]["upper"] - fine["randomized"]["lower"]
        gap_coarse = coarse["randomized"]["upper"] - coarse["randomized"]["lower"]
        assert gap_coarse >= gap_fine - 1e-9


class TestIntervalCommand:
    def test_sampling_interval_below_point_value(self, capsys):
        point = run_json(capsys, ["randomized", "--alpha", "1", "--q", "0.5", *SMALL_LP])
        interval = run_json(
            capsys,
            ["interval", "--alpha", "1", "--q-hat", "0.5", "--samples", "1000", *SMALL_LP],
        )
        assert interval["randomized"]["lower"] <= point["randomized"]["lower"] + 1e-9
        assert interval["q_interval"][0] < 0.5 < interval["q_interval"][1]

    def test_near_degenerate_interval_matches_point(self, capsys):
        point = run_json(capsys, ["randomized", "--alpha", "1", "--q", "0.5", *SMALL_LP])
        interval = run_json(
            capsys,
            ["interval", "--alpha", "1", "--qm", "0.5", "--qM", "0.5000000001", *SMALL_LP],
        )
        assert interval["randomized"]["lower"] == pytest.approx(
            point["randomized"]["lower"], abs=1e-6
        )

    def test_misordered_interval_exits_2(self, capsys):
        code, _, err = run(capsys, ["interval", "--alpha", "0", "--qm", "0.6", "--qM", "0.4", *SMALL_LP])
        assert code == 2
        assert "error" in err


class TestEvaluateCommand:
    def test_incumbent_atom_file(self, capsys, tmp_path):
        path = tmp_path / "incumbent.mech"
        path.write_text("# single atom\n1.0 1.0\n")
        rep = run_json(
            capsys,
            ["evaluate", "--alpha", "0", "--q", "0.75", "--mechanism", str(path), "--r-cap", "1e8"],
        )
        assert rep["evaluation"]["ratio"] == pytest.approx(0.25, abs=1e-4)

    def test_empty_mechanism_scores_zero(self, capsys, tmp_path):
        path = tmp_path / "empty.mech"
        path.write_text("0.5 0.0\n")
        rep = run_json(capsys, ["evaluate", "--alpha", "0", "--q", "0.5", "--mechanism", str(path)])
        assert rep["evaluation"]["ratio"] == 0.0

    def test_lp_mechanism_round_trip(self, capsys, tmp_path):
        solved = run_json(capsys, ["randomized", "--alpha", "0", "--q", "0.4", *SMALL_LP])
        mech = Mechanism(
            np.array(solved["randomized"]["mechanism"]["atoms"]),
            np.array(solved["randomized"]["mechanism"]["probs"]),
        )
        path = tmp_path / "lp.mech"
        write_mechanism(str(path), mech)
        again = read_mechanism(str(path))
        assert again.atoms == pytest.approx(mech.atoms)
        assert again.probs == pytest.approx(mech.probs)
        rep = run_json(
            capsys,
            [
                "evaluate", "--alpha", "0", "--q", "0.4",
                "--mechanism", str(path),
                "--r-cap", repr(solved["randomized"]["certificate_cap"]),
            ],
        )
        assert rep["evaluation"]["ratio"] >= solved["randomized"]["lower"] - 1e-6

    def test_malformed_file_exits_2(self, capsys, tmp_path):
        path = tmp_path / "bad.mech"
        path.write_text("1.0 0.5 junk\n")
        code, _, err = run(capsys, ["evaluate", "--alpha", "0", "--q", "0.5", "--mechanism", str(path)])
        assert code == 2


class TestSweepCommand:
    def test_deterministic_sweep_matches_formulas(self, capsys, tmp_path):
        out = tmp_path / "det.dat"
        rep = run_json(
            capsys,
            ["sweep", "--alpha", "0", "--mode", "det", "--q-range", "0.1", "0.9", "0.2", "--out", str(out)],
        )
        lines = out.read_text().splitlines()
        assert lines[0] == "q ylw yup"
        from robustpricing.deterministic import solve_regular

        for line in lines[1:]:
            q, ylw, yup = (float(tok) for tok in line.split())
            expect = 100.0 * solve_regular(1.0, q).ratio
            assert ylw == pytest.approx(expect, rel=1e-12)
            assert yup == pytest.approx(expect, rel=1e-12)
        sidecar = json.loads((tmp_path / "det.dat.json").read_text())
        assert [r["q"] for r in sidecar] == sorted(r["q"] for r in sidecar)

    def test_randomized_sweep_orders_bounds(self, capsys, tmp_path):
        out = tmp_path / "rand.dat"
        run_json(
            capsys,
            ["sweep", "--alpha", "1", "--mode", "rand", "--q-list", "0.3,0.6", *SMALL_LP, "--out", str(out)],
        )
        for line in out.read_text().splitlines()[1:]:
            q, ylw, yup = (float(tok) for tok in line.split())
            assert ylw <= yup + 1e-9

    def test_interval_sweep_uses_sampling_intervals(self, capsys, tmp_path):
        out = tmp_path / "robust.dat"
        run_json(
            capsys,
            [
                "sweep", "--alpha", "1", "--mode", "interval",
                "--q-list", "0.4,0.6", "--samples", "400", *SMALL_LP,
                "--out", str(out),
            ],
        )
        sidecar = json.loads((tmp_path / "robust.dat.json").read_text())
        for rep in sidecar:
            assert rep["estimate"]["samples"] == 400
            lo, hi = rep["q_interval"]
            assert lo < rep["q"] < hi

    def test_parallel_sweep_output_is_identical(self, capsys, tmp_path):
        argv = ["sweep", "--alpha", "1", "--mode", "det", "--q-list", "0.2,0.5,0.8"]
        run_json(capsys, [*argv, "--out", str(tmp_path / "serial.dat")])
        run_json(capsys, [*argv, "--jobs", "2", "--out", str(tmp_path / "parallel.dat")])
        assert (tmp_path / "serial.dat").read_text() == (
            tmp_path / "parallel.dat"
        ).read_text()

    def test_interval_sweep_without_samples_exits_2(self, capsys, tmp_path):
        code, _, _ = run(
            capsys,
            ["sweep", "--alpha", "1", "--mode", "interval", "--q-list", "0.5", "--out", str(tmp_path / "y.dat")],
        )
        assert code == 2

    def test_range_outside_unit_interval_exits_2(self, capsys, tmp_path):
        code, _, _ = run(
            capsys,
            ["sweep", "--alpha", "0", "--mode", "det", "--q-list", "0.5,1.5", "--out", str(tmp_path / "x.dat")],
        )
        assert code == 2


class TestMechanismFileFormat:
    def test_comments_and_sorting(self, tmp_path):
        path = tmp_path / "m.mech"
        path.write_text("# header\n2.0 0.25   # tail atom\n0.5 0.75\n\n")
        m = read_mechanism(str(path))
        assert m.atoms.tolist() == [0.5, 2.0]
        assert m.probs.tolist() == [0.75, 0.25]
