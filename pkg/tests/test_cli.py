import csv
import io

import pytest

from singlex.cli import SWEEP_COLUMNS, main, sweep_lines
from singlex.setsys import read_blocks


@pytest.fixture
def run(capsys, monkeypatch, tmp_path):
    monkeypatch.chdir(tmp_path)

    def go(*argv, stdin=None):
        if stdin is not None:
            monkeypatch.setattr("sys.stdin", io.StringIO(stdin))
        code = main(list(argv))
        out, err = capsys.readouterr()
        return code, out, err

    return go


def test_construct_then_verify(run, tmp_path):
    code, out, _ = run("construct", "--method", "recurrent", "--n", "8", "--t", "5")
    assert code == 0 and out.strip() == "15"
    assert run("verify", "--kind", "se", "--in", "recurrent_n8.blocks")[:2] == (0, "ok\n")


def test_verify_failure_prints_witness(run, tmp_path):
    (tmp_path / "bad.blocks").write_text("4 2 2\n1 2\n3 4\n")
    code, out, _ = run("verify", "--kind", "se", "--in", "bad.blocks")
    assert code == 1 and out == "fail witness 1 2\n"


def test_verify_turan_and_covering(run):
    run("construct", "--method", "kuzjurin", "--n", "7", "--k", "3", "--out", "c.blocks")
    assert run("verify", "--kind", "covering", "--in", "c.blocks", "--s", "2")[0] == 0


def test_construct_needs_method_flags(run):
    code, _, err = run("construct", "--method", "weighted", "--n", "8", "--t", "3")
    assert code == 2 and "--l --j" in err


def test_exact_se_writes_witness(run, tmp_path):
    code, out, _ = run("exact", "--kind", "se", "--n", "4", "--t", "2")
    assert code == 0 and out == "3\n"
    assert len(read_blocks(tmp_path / "se_n4_t2.blocks")) == 3


def test_exact_turan_needs_s(run):
    assert run("exact", "--kind", "turan", "--n", "5", "--t", "2")[0] == 2
    code, out, _ = run("exact", "--kind", "turan", "--n", "5", "--t", "2", "--s", "3")
    assert (code, out) == (0, "4\n")


def test_exact_budget_refusal_is_a_usage_error(run):
    code, _, err = run("exact", "--kind", "se", "--n", "12", "--t", "5", "--budget", "1000")
    assert code == 2 and "--budget" in err


def test_code_pipeline(run):
    assert run("code", "make-h", "--n", "5", "--d", "3", "--out", "h.txt")[0] == 0
    assert run("code", "stopping", "--in", "h.txt")[:2] == (0, "3\n")
    assert run("code", "decode", "--in", "h.txt", "--erased", "1,2")[:2] == (0, "recovered\n")
    code, out, _ = run("code", "decode", "--in", "h.txt", "--erased", "1 2 3 4 5")
    assert code == 1 and out.startswith("stuck")


def test_code_stopping_reads_stdin(run):
    code, out, _ = run("code", "stopping", stdin="7 1 5\n1 2 3 4 5\n")
    assert (code, out) == (0, "2\n")


def test_replace_rows_cli(run):
    code, out, _ = run("code", "replace-rows", "--d", "3", stdin="5 1 5\n1 1 1 1 1\n")
    assert code == 0
    rows = out.splitlines()[1:]
    assert rows and all(r.split().count("0") == 1 for r in rows)


def test_bounds_eval_table_i_column(run):
    code, out, _ = run("bounds", "eval", "--n", "31", "--d", "7", "--format", "csv")
    assert code == 0
    rows = {r["bound"]: r for r in csv.DictReader(io.StringIO(out))}
    assert rows["recurrent_b"]["value"] == "71891"
    assert rows["best_upper"]["params"] == "winner=recurrent_b"


def test_bounds_eval_small_d_warns_and_adds_exact(run):
    code, out, err = run("bounds", "eval", "--n", "6", "--d", "5")
    assert code == 0 and "warning" in err
    assert any(line.split()[:3] == ["exact", "exact", "6"] for line in out.splitlines())


def test_bounds_eval_rejects_bad_cell(run):
    assert run("bounds", "eval", "--n", "6", "--d", "9")[0] == 2


def test_sweep_schema_and_order(run):
    code, out, _ = run("bounds", "sweep", "--n-max", "12")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == ",".join(SWEEP_COLUMNS)
    cells = [tuple(map(int, line.split(",")[:2])) for line in lines[1:]]
    assert cells == [(n, d) for n in range(6, 13) for d in range(6, n + 1)]


def test_sweep_identical_across_jobs():
    assert list(sweep_lines(20, 1)) == list(sweep_lines(20, 2))


def test_sweep_refuses_large_n_without_budget(run):
    assert run("bounds", "sweep", "--n-max", "600")[0] == 2


def test_fig1_outputs(run, tmp_path):
    code, out, _ = run("report", "fig1", "--n-max", "31", "--out", "f")
    assert code == 0
    rows = list(csv.DictReader(open(tmp_path / "f.csv")))
    assert len(rows) == sum(n - 5 for n in range(6, 32))
    win = {(int(r["n"]), int(r["d"])): r["winner"] for r in rows}
    assert win[31, 7] == "recurrent_b"
    script = (tmp_path / "f_plot.py").read_text()
    compile(script, "f_plot.py", "exec")
    assert "f.csv" in script
