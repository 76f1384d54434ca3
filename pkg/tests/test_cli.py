"""Command-line interface: exit codes, file outputs, manifests."""

import json
import math

import numpy as np
import pytest

from gbtscore import read_comparisons_csv, read_scores_csv
from gbtscore.cli import main


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)


class TestFit:
    def test_two_alternative_closed_form(self, tmp_path, capsys):
        inp = write(tmp_path / "pair.csv", "a,b,r\nx,y,1.0\n")
        rc = main(["fit", "--input", inp, "--model", "gaussian:sigma0sq=1.0",
                   "--sigma-sq", "1.0", "--out-dir", str(tmp_path / "out")])
        assert rc == 0
        alts, values = read_scores_csv(tmp_path / "out" / "scores.csv")
        assert list(alts.ids) == ["x", "y"]
        assert values[0] == pytest.approx(1.0 / 3.0, abs=1e-9)
        assert values[1] == pytest.approx(-1.0 / 3.0, abs=1e-9)
        report = json.loads((tmp_path / "out" / "solve_report.json").read_text())
        assert report["converged"] is True
        manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
        assert manifest["command"] == "fit"
        assert manifest["model"] == "gaussian:sigma0sq=1.0"
        assert manifest["sigma_sq"] == 1.0

    def test_all_zero_comparisons(self, tmp_path):
        inp = write(tmp_path / "z.csv", "a,b,r\nx,y,0.0\ny,z,0.0\n")
        rc = main(["fit", "--input", inp, "--model", "uniform",
                   "--out-dir", str(tmp_path / "out")])
        assert rc == 0
        _, values = read_scores_csv(tmp_path / "out" / "scores.csv")
        assert np.array_equal(values, np.zeros(3))

    def test_duplicate_pair_exit_2_names_row(self, tmp_path, capsys):
        inp = write(tmp_path / "dup.csv", "a,b,r\nx,y,0.5\ny,x,-0.5\n")
        rc = main(["fit", "--input", inp, "--model", "uniform"])
        assert rc == 2
        assert "row 3" in capsys.readouterr().err

    def test_out_of_support_exit_4(self, tmp_path, capsys):
        inp = write(tmp_path / "oos.csv", "a,b,r\nx,y,1.5\n")
        rc = main(["fit", "--input", inp, "--model", "uniform"])
        assert rc == 4
        assert "support" in capsys.readouterr().err

    def test_nonconvergence_exit_3(self, tmp_path, capsys):
        rows = ["a,b,r"] + [f"n{i},n{j},0.8" for i in range(8) for j in range(i + 1, 8)]
        inp = write(tmp_path / "hard.csv", "\n".join(rows) + "\n")
        rc = main(["fit", "--input", inp, "--model", "uniform", "--max-iter", "1",
                   "--tolerance", "1e-14", "--out-dir", str(tmp_path / "out")])
        assert rc == 3
        report = json.loads((tmp_path / "out" / "solve_report.json").read_text())
        assert report["converged"] is False

    def test_missing_model_exit_2(self, tmp_path):
        inp = write(tmp_path / "p.csv", "a,b,r\nx,y,0.5\n")
        assert main(["fit", "--input", inp]) == 2

    def test_unknown_model_exit_2(self, tmp_path):
        inp = write(tmp_path / "p.csv", "a,b,r\nx,y,0.5\n")
        assert main(["fit", "--input", inp, "--model", "frobnitz"]) == 2

    def test_missing_file_exit_2(self, tmp_path):
        assert main(["fit", "--input", str(tmp_path / "nope.csv"), "--model", "uniform"]) == 2


class TestSample:
    def test_deterministic_and_valid(self, tmp_path):
        out1, out2 = tmp_path / "s1", tmp_path / "s2"
        for out in (out1, out2):
            rc = main(["sample", "--model", "knary:K=5", "--a", "20", "--pc", "0.4",
                       "--seed", "11", "--out-dir", str(out)])
            assert rc == 0
        assert (out1 / "comparisons.csv").read_text() == (out2 / "comparisons.csv").read_text()
        assert (out1 / "ground_truth.csv").read_text() == (out2 / "ground_truth.csv").read_text()
        m = read_comparisons_csv(out1 / "comparisons.csv")
        pts = {-1.0, -0.5, 0.0, 0.5, 1.0}
        for a, b, v in m.iter_entries():
            assert v in pts
            assert m.value(b, a) == -v

    def test_edge_count_within_binomial_band(self, tmp_path):
        rc = main(["sample", "--model", "uniform", "--a", "40", "--pc", "0.3",
                   "--seed", "3", "--out-dir", str(tmp_path)])
        assert rc == 0
        m = read_comparisons_csv(tmp_path / "comparisons.csv")
        total = 40 * 39 // 2
        sd = math.sqrt(total * 0.3 * 0.7)
        assert abs(m.num_pairs - total * 0.3) < 5 * sd

    def test_from_scores_file(self, tmp_path):
        scores = write(tmp_path / "truth.csv", "a,theta\nu,0.5\nv,-0.5\nw,0.0\n")
        rc = main(["sample", "--model", "uniform", "--scores", scores, "--pc", "1.0",
                   "--seed", "5", "--out-dir", str(tmp_path / "out")])
        assert rc == 0
        m = read_comparisons_csv(tmp_path / "out" / "comparisons.csv")
        assert m.num_pairs == 3
        echoed = (tmp_path / "out" / "ground_truth.csv").read_text()
        assert "u,0.5" in echoed

    def test_requires_exactly_one_source(self, tmp_path):
        assert main(["sample", "--model", "uniform", "--pc", "0.5"]) == 2
        scores = write(tmp_path / "t.csv", "a,theta\nu,0.5\n")
        assert main(["sample", "--model", "uniform", "--scores", scores,
                     "--a", "5", "--pc", "0.5"]) == 2

    def test_round_trip_recovers_scores(self, tmp_path):
        rc = main(["sample", "--model", "uniform", "--a", "30", "--pc", "0.6",
                   "--seed", "2", "--out-dir", str(tmp_path)])
        assert rc == 0
        rc = main(["fit", "--input", str(tmp_path / "comparisons.csv"),
                   "--model", "uniform", "--sigma-sq", "1.0",
                   "--out-dir", str(tmp_path / "fit")])
        assert rc == 0
        alts, est = read_scores_csv(tmp_path / "fit" / "scores.csv")
        alts2, truth = read_scores_csv(tmp_path / "ground_truth.csv")
        assert alts == alts2
        err = float(((est - truth) ** 2).sum() / (truth ** 2).sum())
        assert err < 0.5  # sanity coupling: same regime as the density sweep


class TestCheck:
    def test_monotonicity_passes(self, tmp_path, capsys):
        rc = main(["check", "--suite", "monotonicity", "--model", "uniform",
                   "--instances", "3", "--seed", "1", "--out-dir", str(tmp_path)])
        assert rc == 0
        assert "pass" in capsys.readouterr().out

    def test_resilience_bounded_passes(self, tmp_path, capsys):
        rc = main(["check", "--suite", "resilience", "--model", "knary:K=21",
                   "--sigma-sq", "1.0", "--probes", "25", "--seed", "2",
                   "--out-dir", str(tmp_path)])
        assert rc == 0
        out = capsys.readouterr().out
        assert "pass" in out
        assert (tmp_path / "resilience_probes.csv").exists()

    def test_resilience_unbounded_reports_without_failing(self, tmp_path, capsys):
        rc = main(["check", "--suite", "resilience", "--model", "gaussian:sigma0sq=1.0",
                   "--probes", "10", "--seed", "2", "--out-dir", str(tmp_path)])
        assert rc == 0
        assert "unbounded" in capsys.readouterr().out

    def test_moments_pass(self, tmp_path, capsys):
        rc = main(["check", "--suite", "moments", "--model", "beta:beta=2.5",
                   "--seed", "4", "--out-dir", str(tmp_path)])
        assert rc == 0
        assert capsys.readouterr().out.count("pass") == 3

    def test_check_on_dataset(self, tmp_path, capsys):
        inp = write(tmp_path / "d.csv",
                    "a,b,r\nx,y,0.5\ny,z,-0.25\nx,z,0.75\nz,w,0.1\n")
        rc = main(["check", "--suite", "monotonicity", "--model", "uniform",
                   "--input", inp, "--out-dir", str(tmp_path)])
        assert rc == 0
        rc = main(["check", "--suite", "resilience", "--model", "uniform",
                   "--input", inp, "--probes", "10", "--out-dir", str(tmp_path)])
        assert rc == 0

    def test_violation_exit_5(self, tmp_path, monkeypatch):
        # wire check: a reported bound excess must map to exit code 5
        import gbtscore.cli as cli_mod

        def fake(law, prior, config, options=None, base=None):
            from gbtscore.diagnostics import ProbeRecord, ResilienceProbe
            probe = ResilienceProbe(base=None, edits=[], bound=1.0)
            probe.records = [ProbeRecord("change", "x|y", 1, 9.0, 9.0, 1.0)]
            probe.observed_ratio = 9.0
            return probe

        monkeypatch.setattr(cli_mod, "measure_resilience", fake)
        rc = main(["check", "--suite", "resilience", "--model", "uniform",
                   "--probes", "1", "--out-dir", str(tmp_path)])
        assert rc == 5


class TestExperiment:
    def test_sparsity_outputs(self, tmp_path, capsys):
        rc = main(["experiment", "--which", "sparsity", "--a", "14",
                   "--seeds", "1..3", "--out-dir", str(tmp_path)])
        assert rc == 0
        per_seed = (tmp_path / "sparsity_per_seed.csv").read_text().splitlines()
        assert per_seed[0] == "param,seed,norm_error"
        assert len(per_seed) == 1 + 5 * 3
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest["command"] == "experiment:sparsity"

    def test_seed_list_forms(self, tmp_path):
        rc = main(["experiment", "--which", "regularization", "--a", "12",
                   "--seeds", "2,5", "--out-dir", str(tmp_path)])
        assert rc == 0
        rows = (tmp_path / "regularization_per_seed.csv").read_text().splitlines()[1:]
        seeds = {int(r.split(",")[1]) for r in rows}
        assert seeds == {2, 5}

    def test_bad_seed_list(self, tmp_path):
        assert main(["experiment", "--which", "sparsity", "--seeds", "x",
                     "--out-dir", str(tmp_path)]) == 2

    def test_sweep_point_failures_exit_3(self, tmp_path, capsys):
        # unreachable tolerance: points are marked failed, run completes, exit 3
        rc = main(["experiment", "--which", "sparsity", "--a", "10",
                   "--seeds", "1", "--tolerance", "1e-15", "--max-iter", "1",
                   "--out-dir", str(tmp_path)])
        assert rc == 3
        assert "failed point" in capsys.readouterr().err
        assert (tmp_path / "sparsity_per_seed.csv").exists()


class TestConfigFile:
    def test_defaults_from_file_flags_win(self, tmp_path):
        cfg = write(tmp_path / "run.cfg", "sigma-sq = 2.0\nseed = 9\n# comment\n")
        inp = write(tmp_path / "p.csv", "a,b,r\nx,y,1.0\n")
        out = tmp_path / "out"
        rc = main(["fit", "--input", inp, "--model", "gaussian:sigma0sq=1.0",
                   "--config", cfg, "--out-dir", str(out)])
        assert rc == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["sigma_sq"] == 2.0
        assert manifest["seed"] == 9
        rc = main(["fit", "--input", inp, "--model", "gaussian:sigma0sq=1.0",
                   "--config", cfg, "--sigma-sq", "3.0", "--out-dir", str(out)])
        assert rc == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["sigma_sq"] == 3.0

    def test_malformed_config(self, tmp_path):
        cfg = write(tmp_path / "bad.cfg", "sigma-sq\n")
        inp = write(tmp_path / "p.csv", "a,b,r\nx,y,1.0\n")
        assert main(["fit", "--input", inp, "--model", "uniform", "--config", cfg]) == 2
