import numpy as np
import pytest

from cplsh.cli import run_cli
from cplsh.vectors_io import read_vectors


def _run(capsys, *argv):
    code = run_cli(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestCollide:
    def test_writes_requested_number_of_rows(self, tmp_path, capsys):
        out = tmp_path / "c.csv"
        code, _, _ = _run(capsys, "collide", "--family", "dense", "--d", "16",
                          "--trials", "400", "--rmin", "0.2", "--rmax", "1.8",
                          "--steps", "5", "--seed", "7", "--out", str(out))
        assert code == 0
        lines = out.read_text().strip().split("\n")
        assert lines[0] == "R,p_hat,ci_low,ci_high,trials"
        assert len(lines) == 6

    def test_stdout_when_no_out(self, capsys):
        code, stdout, _ = _run(capsys, "collide", "--family", "dense", "--d", "8",
                               "--trials", "100", "--steps", "2", "--seed", "1")
        assert code == 0
        assert stdout.startswith("R,p_hat")

    def test_deterministic_and_thread_invariant(self, tmp_path, capsys):
        outs = []
        for threads in ("1", "2", "1"):
            out = tmp_path / f"c{len(outs)}.csv"
            code, _, _ = _run(capsys, "collide", "--family", "fast", "--d", "32",
                              "--m", "8", "--trials", "600", "--steps", "3",
                              "--seed", "9", "--threads", threads, "--out", str(out))
            assert code == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1] == outs[2]

    def test_bad_grid_is_usage_error(self, capsys):
        code, _, err = _run(capsys, "collide", "--family", "dense", "--d", "8",
                            "--rmin", "0", "--seed", "1")
        assert code == 1 and "error:" in err

    def test_chart_is_emitted_with_embedded_data(self, tmp_path, capsys):
        pytest.importorskip("matplotlib")
        chart = tmp_path / "c.svg"
        code, _, _ = _run(capsys, "collide", "--family", "dense", "--d", "8",
                          "--trials", "100", "--steps", "2", "--seed", "2",
                          "--out", str(tmp_path / "c.csv"), "--chart", str(chart))
        assert code == 0
        text = chart.read_text()
        assert "<svg" in text and "embedded-data" in text and "p_hat" in text

    def test_theory_m_note(self, capsys):
        code, stdout, _ = _run(capsys, "collide", "--family", "dense", "--d", "8",
                               "--trials", "50", "--steps", "1", "--show-theory-m",
                               "--seed", "3")
        assert code == 0 and "guidance" in stdout


class TestRho:
    def test_prints_estimate_and_theory(self, capsys, tmp_path):
        out = tmp_path / "r.csv"
        code, stdout, _ = _run(capsys, "rho", "--family", "dense", "--d", "32",
                               "--R", "0.7", "--c", "1.5", "--trials", "3000",
                               "--seed", "4", "--out", str(out))
        assert code == 0
        assert "rho_hat=" in stdout and "rho_theory=" in stdout
        assert out.read_text().startswith("R,c,p1_hat")


class TestConverge:
    def test_csv_rows_per_dimension(self, tmp_path, capsys):
        out = tmp_path / "conv.csv"
        code, _, _ = _run(capsys, "converge", "--family", "dense", "--R", "0.8",
                          "--dims", "8,16,32", "--trials", "400", "--seed", "5",
                          "--out", str(out))
        assert code == 0
        lines = out.read_text().strip().split("\n")
        assert lines[0] == "d,p_hat,ln_inv_p,theory_leading,residual"
        assert len(lines) == 4


class TestGenAndAnn:
    def test_gen_writes_unit_vectors(self, tmp_path, capsys):
        out = tmp_path / "data.bin"
        code, _, _ = _run(capsys, "gen", "--n", "40", "--d", "16", "--seed", "6",
                          "--out", str(out))
        assert code == 0
        arr = read_vectors(out)
        assert arr.shape == (40, 16)
        np.testing.assert_allclose(np.linalg.norm(arr.astype(np.float64), axis=1),
                                   1.0, atol=1e-6)

    def test_gen_planted_distances(self, tmp_path, capsys):
        data, queries = tmp_path / "data.bin", tmp_path / "q.bin"
        code, _, _ = _run(capsys, "gen", "--n", "50", "--d", "32", "--seed", "7",
                          "--planted-r", "0.5", "--queries-out", str(queries),
                          "--n-queries", "10", "--out", str(data))
        assert code == 0
        pts = read_vectors(data).astype(np.float64)
        qs = read_vectors(queries).astype(np.float64)
        dists = np.linalg.norm(pts[:10] - qs, axis=1)
        np.testing.assert_allclose(dists, 0.5, atol=1e-5)

    def test_ann_build_and_query_pipeline(self, tmp_path, capsys):
        data, queries = tmp_path / "data.bin", tmp_path / "q.bin"
        _run(capsys, "gen", "--n", "300", "--d", "32", "--seed", "8",
             "--planted-r", "0.4", "--queries-out", str(queries),
             "--n-queries", "20", "--out", str(data))
        code, stdout, _ = _run(capsys, "ann", "build", "--family", "fast",
                               "--d", "32", "--m", "8", "--data", str(data),
                               "--k", "3", "--L", "6", "--seed", "9")
        assert code == 0 and "indexed 300 points" in stdout

        out = tmp_path / "res.csv"
        code, stdout, _ = _run(capsys, "ann", "query", "--family", "fast",
                               "--d", "32", "--m", "8", "--data", str(data),
                               "--queries", str(queries), "--k", "3", "--L", "12",
                               "--R", "0.4", "--c", "2.0", "--seed", "9",
                               "--out", str(out))
        assert code == 0
        lines = out.read_text().strip().split("\n")
        assert lines[0] == "query,answer,distance,candidates"
        assert len(lines) == 21
        assert "answers within c*R" in stdout

    def test_ann_query_auto_params(self, tmp_path, capsys):
        data, queries = tmp_path / "data.bin", tmp_path / "q.bin"
        _run(capsys, "gen", "--n", "200", "--d", "32", "--seed", "10",
             "--planted-r", "0.4", "--queries-out", str(queries),
             "--n-queries", "10", "--out", str(data))
        code, stdout, _ = _run(capsys, "ann", "query", "--family", "fast",
                               "--d", "32", "--m", "8", "--data", str(data),
                               "--queries", str(queries), "--R", "0.4", "--c", "2.0",
                               "--param-trials", "800", "--seed", "11")
        assert code == 0 and "measured p1=" in stdout


class TestLedgerCommand:
    def test_exact_bit_accounting_csv(self, tmp_path, capsys):
        out = tmp_path / "ledger.csv"
        code, _, _ = _run(capsys, "ledger", "--d", "256", "--m", "16",
                          "--dprime", "16", "--bits", "10", "--seed", "12",
                          "--out", str(out))
        assert code == 0
        assert out.read_text() == (
            "label,bits\nsparse-jl,72\ndiscrete-matrix,2560\ntotal,2632\n"
        )


class TestErrors:
    def test_unknown_flag_usage_error(self, capsys):
        assert _run(capsys, "collide", "--nope")[0] == 2

    def test_missing_subcommand(self, capsys):
        assert _run(capsys, )[0] == 2

    def test_planted_distance_range(self, capsys, tmp_path):
        code, _, err = _run(capsys, "gen", "--n", "10", "--d", "8", "--seed", "1",
                            "--planted-r", "2.5", "--queries-out",
                            str(tmp_path / "q.bin"), "--out", str(tmp_path / "d.bin"))
        assert code == 1 and "error:" in err

    def test_invalid_family_combo(self, capsys):
        code, _, err = _run(capsys, "collide", "--family", "fast", "--d", "8",
                            "--m", "64", "--seed", "1")
        assert code == 1 and "error:" in err

    def test_missing_file(self, capsys):
        code, _, err = _run(capsys, "ann", "build", "--family", "dense",
                            "--d", "8", "--data", "/nonexistent/x.bin",
                            "--k", "2", "--L", "2")
        assert code == 1 and "error:" in err
