import csv

import numpy as np
import pytest

from rodfiter.cli import RunSpec, bench_modes, main, read_increments
from rodfiter.coning import ConingParams, true_increment


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


@pytest.fixture(scope="module")
def inc_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "inc.csv"
    assert main(["simulate", "--out", str(path)]) == 0
    return path


@pytest.fixture(scope="module")
def errors(inc_csv):
    out = {}
    for mode in ("exact", "truncated", "baseline"):
        path = inc_csv.parent / f"err_{mode}.csv"
        assert main(["reconstruct", "--in", str(inc_csv), "--mode", mode, "--out", str(path)]) == 0
        rows = read_rows(path)
        assert rows[0] == ["t", "eps_att", "bound"]
        out[mode] = np.array(rows[1:], dtype=float)
    return out


class TestSimulate:
    def test_row_count_and_header(self, inc_csv):
        rows = read_rows(inc_csv)
        assert rows[0] == ["t_end", "dtheta_x", "dtheta_y", "dtheta_z"]
        assert len(rows) == 201

    def test_block_sums_telescope(self, inc_csv):
        p = ConingParams()
        _, inc = read_increments(inc_csv)
        for m, blk in enumerate(inc.reshape(-1, 8, 3)):
            np.testing.assert_allclose(blk.sum(axis=0), true_increment(p, m * 0.08, (m + 1) * 0.08), atol=1e-15)

    def test_deterministic(self, inc_csv, tmp_path):
        again = tmp_path / "again.csv"
        main(["simulate", "--out", str(again)])
        assert again.read_bytes() == inc_csv.read_bytes()

    def test_round_trip_exact(self, inc_csv):
        from rodfiter.coning import ErrorModel, synthesize_increments

        t_end, inc = read_increments(inc_csv)
        t_ref, inc_ref = synthesize_increments(ConingParams(), ErrorModel(), 2.0, 100.0)
        np.testing.assert_array_equal(inc, inc_ref)
        np.testing.assert_array_equal(t_end, t_ref)

    def test_bad_output_path(self, tmp_path):
        assert main(["simulate", "--out", str(tmp_path / "missing" / "x.csv")]) == 1


class TestReconstruct:
    def test_truncated_accuracy(self, errors):
        tr = errors["truncated"]
        assert tr.shape[0] == 2001
        assert tr[:, 1].max() < 1e-10

    def test_exact_matches_truncated(self, errors):
        np.testing.assert_array_equal(errors["exact"][:, 0], errors["truncated"][:, 0])
        assert np.max(np.abs(errors["exact"][:, 1] - errors["truncated"][:, 1])) < 1e-12

    def test_baseline_much_worse(self, errors):
        assert errors["baseline"][:, 1].max() > 1e3 * errors["truncated"][:, 1].max()
        assert np.all(np.isnan(errors["baseline"][:, 2]))

    def test_bound_is_nondecreasing(self, errors):
        b = errors["truncated"][:, 2]
        assert b[0] == 0.0
        assert np.all(np.diff(b) >= 0)

    def test_summary_output(self, inc_csv, tmp_path, capsys):
        main(["reconstruct", "--in", str(inc_csv), "--out", str(tmp_path / "e.csv")])
        out = capsys.readouterr().out
        assert "max_err=" in out
        assert out.count("iter ") == 7

    def test_diagnostic_outputs(self, inc_csv, tmp_path):
        coeffs, fit = tmp_path / "c.csv", tmp_path / "f.csv"
        assert main(["reconstruct", "--in", str(inc_csv), "--out", str(tmp_path / "e.csv"),
                     "--coeffs-out", str(coeffs), "--fit-error-out", str(fit)]) == 0
        rows = read_rows(coeffs)[1:]
        series = {r[0] for r in rows}
        assert series == {"omega_fit", "oracle", "iterate"}
        assert sum(r[0] == "oracle" for r in rows) == 41
        fit_rows = np.array(read_rows(fit)[1:], dtype=float)
        assert fit_rows.shape == (81, 5)
        assert fit_rows[:, 4].max() < 1e-12

    def test_row_count_not_multiple_of_N(self, inc_csv, tmp_path):
        assert main(["reconstruct", "--in", str(inc_csv), "--n-samples", "7",
                     "--out", str(tmp_path / "e.csv")]) == 3

    def test_convergence_exit(self, tmp_path):
        inc = tmp_path / "fast.csv"
        main(["simulate", "--alpha-deg", "80", "--omega-pi", "20", "--duration-s", "0.16", "--out", str(inc)])
        assert main(["reconstruct", "--in", str(inc), "--alpha-deg", "80", "--omega-pi", "20",
                     "--out", str(tmp_path / "e.csv")]) == 2

    @pytest.mark.parametrize(
        "content",
        ["", "a,b,c,d\n1,2,3,4\n", "t_end,dtheta_x,dtheta_y,dtheta_z\n0.01,1,2,x\n0.02,1,2,3\n",
         "t_end,dtheta_x,dtheta_y,dtheta_z\n0.01,1,2,3\n0.03,1,2,3\n0.04,1,2,3\n"],
    )
    def test_format_errors(self, tmp_path, content):
        path = tmp_path / "bad.csv"
        path.write_text(content)
        assert main(["reconstruct", "--in", str(path), "--out", str(tmp_path / "e.csv")]) == 3

    def test_missing_input(self, tmp_path):
        assert main(["reconstruct", "--in", str(tmp_path / "nope.csv"), "--out", str(tmp_path / "e.csv")]) == 3


class TestBench:
    def test_short_run(self, tmp_path, capsys):
        out = tmp_path / "bench.csv"
        assert main(["bench", "--runs", "1", "--iters", "3", "--duration-s", "0.16", "--out", str(out)]) == 0
        rows = read_rows(out)
        assert [r[0] for r in rows[1:]] == ["exact", "truncated", "baseline"]
        assert "speedup exact/truncated" in capsys.readouterr().out

    def test_term_counts(self):
        rows = {r.mode: r for r in bench_modes(RunSpec(duration=0.08, iters=7), 1)}
        # n = 7: exact degree 1016, truncated degree capped at n_T = 8
        assert rows["exact"].terms_last_iter == 7 * 1016**2
        assert rows["truncated"].terms_last_iter == 7 * 8**2
        assert rows["baseline"].terms_last_iter == 0
