import csv
import json
import math
from pathlib import Path

import numpy as np
import pytest

from pointerbell import cli
from pointerbell.errors import InvariantViolation

GOLDEN = Path(__file__).parent / "golden"

GOLDEN_RUNS = {
    "probs_default": ["probs"],
    "probs_0_30": ["probs", "--alpha", "0", "--beta", "30"],
    "scan_grid4": ["scan", "--grid", "4"],
    "chsh_default": ["chsh"],
    "locality_default": ["locality"],
    "sample_small": ["sample", "--n", "1000", "--seed", "7", "--beta", "30"],
    "converge_default": ["converge"],
}


def run_json(capsys, *argv):
    code = cli.main([*argv, "--format", "json"])
    out = capsys.readouterr()
    assert code == 0, out.err
    return json.loads(out.out)


def run_csv(capsys, *argv):
    code = cli.main([*argv, "--format", "csv"])
    out = capsys.readouterr()
    assert code == 0, out.err
    lines = out.out.splitlines()
    meta = [json.loads(l[2:]) for l in lines if l.startswith("# ")]
    rows = list(csv.DictReader(l for l in lines if not l.startswith("#")))
    return meta, rows


def probs(row):
    return [row[f"p{o}"] for o in ("++", "+-", "-+", "--")]


def assert_close_tree(got, want, path="", tol=1e-10):
    if isinstance(want, dict):
        assert set(got) == set(want), path
        for k in want:
            assert_close_tree(got[k], want[k], f"{path}.{k}", tol)
    elif isinstance(want, list):
        assert len(got) == len(want), path
        for i, (g, w) in enumerate(zip(got, want)):
            assert_close_tree(g, w, f"{path}[{i}]", tol)
    elif isinstance(want, float) and not isinstance(want, bool):
        assert got == pytest.approx(want, abs=tol), path
    else:
        assert got == want, path


class TestProbs:
    def test_equal_angles(self, capsys):
        row = run_json(capsys, "probs", "--alpha", "30", "--beta", "30")["results"][0]
        assert probs(row) == pytest.approx([0.5, 0, 0, 0.5], abs=1e-10)

    def test_forty_five_degrees(self, capsys):
        row = run_json(capsys, "probs", "--alpha", "0", "--beta", "45")["results"][0]
        assert probs(row) == pytest.approx([0.25] * 4, abs=1e-10)

    def test_thirty_degrees_with_closed_form(self, capsys):
        row = run_json(capsys, "probs", "--alpha", "0", "--beta", "30")["results"][0]
        assert probs(row) == pytest.approx([0.375, 0.125, 0.125, 0.375], abs=1e-10)
        assert [row[f"closed_p{o}"] for o in ("++", "+-", "-+", "--")] == pytest.approx(probs(row), abs=1e-10)
        assert row["p_inconclusive"] == pytest.approx(0, abs=1e-12)

    @pytest.mark.parametrize("method", ["exact", "factorized", "branch"])
    def test_methods_agree(self, capsys, method):
        row = run_json(capsys, "probs", "--beta", "10", "--method", method)["results"][0]
        assert row["E"] == pytest.approx(math.cos(math.radians(20)), abs=1e-10)

    def test_csv_precision_and_metadata(self, capsys):
        meta, rows = run_csv(capsys, "probs", "--alpha", "0", "--beta", "30")
        assert meta[0]["config"]["pointer_sites"] == 3
        assert meta[0]["config"]["epsilon"] == 1.0
        assert meta[0]["arguments"]["beta"] == 30.0
        assert float(rows[0]["p++"]) == pytest.approx(0.375, abs=1e-10)
        digits = rows[0]["p++"].replace("0.", "", 1).lstrip("0")
        assert len(digits) >= 12

    def test_output_file(self, tmp_path):
        out = tmp_path / "probs.json"
        assert cli.main(["probs", "--out", str(out)]) == 0
        doc = json.loads(out.read_text(encoding="utf-8"))
        assert doc["metadata"]["command"] == "probs"
        assert list(doc) == sorted(doc)

    def test_gaussian_pointer(self, capsys):
        row = run_json(capsys, "probs", "--pointer", "gaussian", "--sites", "64", "--sigma", "1",
                       "--epsilon", "8")["results"][0]
        assert sum(probs(row)) + row["p_inconclusive"] == pytest.approx(1, abs=1e-10)
        assert probs(row) == pytest.approx([row[f"closed_p{o}"] for o in ("++", "+-", "-+", "--")], abs=1e-6)


class TestScan:
    def test_grid_rows(self, capsys):
        meta, rows = run_csv(capsys, "scan", "--grid", "4")
        assert len(rows) == 16
        pairs = [(float(r["alpha_deg"]), float(r["beta_deg"])) for r in rows]
        assert pairs == sorted(pairs)
        for r in rows:
            a, b = math.radians(float(r["alpha_deg"])), math.radians(float(r["beta_deg"]))
            p = [float(x) for x in probs(r)]
            c2, s2 = math.cos(a - b) ** 2 / 2, math.sin(a - b) ** 2 / 2
            assert p == pytest.approx([c2, s2, s2, c2], abs=1e-10)
            assert float(r["E"]) == pytest.approx(math.cos(2 * (a - b)), abs=1e-10)
            assert p[0] + p[1] == pytest.approx(0.5, abs=1e-10)

    def test_bad_grid(self, capsys):
        assert cli.main(["scan", "--grid", "0"]) == 2


class TestChsh:
    def test_tsirelson(self, capsys):
        row = run_json(capsys, "chsh")["results"][0]
        assert row["S"] == pytest.approx(2 * math.sqrt(2), abs=1e-6)
        for e in ("E(a,b)", "E(a',b)", "E(a',b')"):
            assert row[e] == pytest.approx(math.sqrt(0.5), abs=1e-10)
        assert row["E(a,b')"] == pytest.approx(-math.sqrt(0.5), abs=1e-10)

    def test_equal_angles(self, capsys):
        row = run_json(capsys, "chsh", "--angles", "10", "10", "10", "10")["results"][0]
        assert row["S"] == pytest.approx(2, abs=1e-10)

    def test_rotation_invariance(self, capsys):
        s1 = run_json(capsys, "chsh", "--angles", "5", "50", "27.5", "72.5")["results"][0]["S"]
        s0 = run_json(capsys, "chsh")["results"][0]["S"]
        assert s1 == pytest.approx(s0, abs=1e-10)


class TestLocality:
    def test_local_and_counterexample(self, capsys):
        local, nonlocal_ = run_json(capsys, "locality")["results"]
        assert local["hamiltonian"] == "local"
        assert local["commutator_norm"] <= 1e-10
        assert local["factorization_gap"] <= 1e-9
        assert local["order_swap_gap"] <= 1e-9
        assert nonlocal_["commutator_norm"] > 0.1
        assert nonlocal_["state_gap"] > 0.01
        assert nonlocal_["order_swap_gap"] > 0.01
        assert nonlocal_["order_swap_prob_diff"] > 1e-3

    def test_zero_coupling(self, capsys):
        rows = run_json(capsys, "locality", "--coupling", "0", "--time", "1")["results"]
        for r in rows:
            assert r["order_swap_gap"] == 0.0


class TestSample:
    def test_aligned_never_disagrees(self, capsys):
        doc = run_json(capsys, "sample", "--alpha", "20", "--beta", "20", "--n", "100000")
        counts = doc["summary"]["counts"]
        assert counts["+-"] == 0 and counts["-+"] == 0
        assert doc["summary"]["chi_square"]["dof"] == 1

    def test_thirty_degrees_within_standard_errors(self, capsys):
        doc = run_json(capsys, "sample", "--beta", "30", "--n", "100000", "--seed", "5")
        counts = doc["summary"]["counts"]
        for o, p in zip(("++", "+-", "-+", "--"), (0.375, 0.125, 0.125, 0.375)):
            assert abs(counts[o] / 1e5 - p) <= 4 * math.sqrt(p * (1 - p) / 1e5)
        assert len(doc["results"]) == 100000

    def test_deterministic(self, capsys):
        a = run_json(capsys, "sample", "--n", "2000", "--seed", "3")
        b = run_json(capsys, "sample", "--n", "2000", "--seed", "3")
        assert a == b

    def test_small_sample_skips_chi_square(self, capsys):
        doc = run_json(capsys, "sample", "--n", "10")
        assert "skipped" in doc["summary"]["chi_square"]


class TestConverge:
    def test_overlap_and_monotonic_deviation(self, capsys):
        rows = run_json(capsys, "converge")["results"]
        assert [r["sigma"] for r in rows] == [1.0, 2.0, 4.0]
        for r in rows:
            x = np.arange(64)
            amp = lambda c: np.exp(-((x - c) ** 2) / (2 * r["sigma"] ** 2))
            direct = np.sum(amp(40) * amp(24)) / np.sum(amp(32) ** 2)
            assert r["overlap"] == pytest.approx(direct, abs=1e-12)
            assert r["max_offdiagonal"] <= r["overlap"] + 1e-10
        devs = [r["max_deviation"] for r in rows]
        assert devs[0] < devs[1] < devs[2]


class TestExitCodes:
    @pytest.mark.parametrize("argv", [
        ["probs", "--epsilon", "1.5"],
        ["probs", "--sites", "2"],
        ["probs", "--pointer", "gaussian"],
        ["probs", "--epsilon", "1", "--time", "2", "--coupling", "2"],
        ["probs", "--alpha", "nan"],
        ["sample", "--n", "0"],
    ])
    def test_config_errors(self, argv, capsys):
        assert cli.main(argv) == 2
        assert "configuration error" in capsys.readouterr().err

    def test_argparse_error(self):
        with pytest.raises(SystemExit) as exc:
            cli.main(["probs", "--format", "xml"])
        assert exc.value.code == 2

    def test_invariant_violation(self, monkeypatch, capsys):
        def broken(*a, **k):
            raise InvariantViolation("trace drifted")
        monkeypatch.setattr(cli, "run", broken)
        assert cli.main(["probs"]) == 3
        assert "invariant" in capsys.readouterr().err


def test_epsilon_resolution():
    parser = cli.build_parser()
    args = parser.parse_args(["probs", "--epsilon", "1", "--time", "0.25"])
    assert cli.resolve_timing(args) == (0.25, 4.0)
    args = parser.parse_args(["probs", "--time", "0.5", "--coupling", "2"])
    assert cli.resolve_timing(args) == (0.5, 2.0)


@pytest.mark.parametrize("name", sorted(GOLDEN_RUNS))
def test_golden(name, capsys):
    doc = run_json(capsys, *GOLDEN_RUNS[name])
    want = json.loads((GOLDEN / f"{name}.json").read_text(encoding="utf-8"))
    doc["metadata"].pop("version")
    want["metadata"].pop("version")
    assert_close_tree(doc, want)


if __name__ == "__main__":
    # regenerate golden files: python tests/test_cli.py
    import contextlib
    import io

    GOLDEN.mkdir(exist_ok=True)
    for name, argv in GOLDEN_RUNS.items():
        buf = io.StringIO()
        with contextlib.redirect_stdout(buf):
            cli.main([*argv, "--format", "json"])
        (GOLDEN / f"{name}.json").write_text(buf.getvalue(), encoding="utf-8")
