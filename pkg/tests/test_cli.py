import csv
import io
import json
import subprocess
import sys

import pytest

from biortho import cli

SCALAR = {"N": 1, "kind": "constant", "A": [[1]], "B": [[0]], "C": [[1]]}


@pytest.fixture
def cfg(tmp_path):
    def write(obj, name="cfg.json"):
        p = tmp_path / name
        p.write_text(json.dumps(obj))
        return str(p)

    return write


def run(argv, capsys):
    code = cli.run(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    return list(csv.reader(io.StringIO(text)))


@pytest.mark.parametrize(
    "text, want",
    [("3", 3), ("3+0i", 3), ("1.5-2i", 1.5 - 2j), ("-2i", -2j), ("i", 1j), ("1e1+1e-1i", 10 + 0.1j), (2.5, 2.5), ([1, 2], 1 + 2j)],
)
def test_parse_complex(text, want):
    assert cli.parse_complex(text) == want


@pytest.mark.parametrize("text", ["abc", "nan", "inf+1i", "1+2j+3", None])
def test_parse_complex_rejects(text):
    with pytest.raises(cli.ConfigError):
        cli.parse_complex(text)


def test_zeros_scalar(cfg, capsys):
    code, out, _ = run(["zeros", "--config", cfg(SCALAR), "--n", "2"], capsys)
    assert code == 0
    table = rows(out)
    assert table[0] == ["node_re", "node_im", "multiplicity"]
    assert [float(r[0]) for r in table[1:]] == pytest.approx([-1, 1])
    assert [r[1:] for r in table[1:]] == [["0.0", "1"], ["0.0", "1"]]


def test_zeros_to_file_and_flag_override(cfg, tmp_path, capsys):
    out_path = tmp_path / "z.csv"
    path = cfg({"family": SCALAR, "n": 5})
    code, out, _ = run(["zeros", "--config", path, "--n", "3", "--out", str(out_path)], capsys)
    assert code == 0 and out == ""
    assert len(rows(out_path.read_text())) == 4


def test_markov_json(cfg, capsys):
    code, out, _ = run(["markov", "--config", cfg(SCALAR), "--z", "3", "--tol", "1e-13"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["result"]["F"][0][0][0] == pytest.approx(0.3819660113, abs=1e-10)
    assert doc["result"]["residual"] <= 1e-12
    assert doc["family"] == SCALAR | {"A": [[[1.0, 0.0]]], "B": [[[0.0, 0.0]]], "C": [[[1.0, 0.0]]]}
    assert doc["tol"] == 1e-13 and doc["z"] == [3.0, 0.0]
    assert doc["result"]["ratio_check"]["gap"] <= 1e-6


def test_markov_singular_limits(cfg, capsys):
    path = cfg({"family": {"N": 2, "kind": "laguerre_christoffel"}, "z": "5"})
    code, out, _ = run(["markov", "--config", path], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["result"]["ratio_check"] is None
    assert doc["result"]["F"][0][0] == [0.2, 0.0]


def test_quad_table_and_rule(cfg, tmp_path, capsys):
    rule_path = tmp_path / "rule.csv"
    path = cfg({"N": 2, "kind": "paper_example_2"})
    code, out, _ = run(["quad", "--config", path, "--n", "4", "--check-moments", "9", "--out", str(rule_path)], capsys)
    table = rows(out)
    assert code == 0
    assert table[0] == ["l", "left_rel_error", "right_rel_error", "claimed_exact", "pass"]
    assert [r[3] for r in table[1:]] == ["true"] * 8 + ["false"] * 2
    assert rows(rule_path.read_text())[0][:3] == ["node_re", "node_im", "multiplicity"]


def test_quad_failure_exit_code(cfg, capsys):
    code, _, err = run(["quad", "--config", cfg({"N": 2, "kind": "laguerre_christoffel"}), "--n", "2"], capsys)
    assert code == 1 and "exactness" in err


def test_moments_csv(cfg, capsys):
    code, out, _ = run(["moments", "--config", cfg(SCALAR), "--lmax", "8"], capsys)
    table = rows(out)
    assert code == 0 and table[0] == ["l", "m_00_re", "m_00_im"]
    assert [float(r[1]) for r in table[1:]] == [1, 0, 1, 0, 2, 0, 5, 0, 14]


def test_ratio_csv(cfg, capsys):
    path = cfg({"family": {"N": 2, "kind": "paper_example_2"}, "z": "30"})
    code, out, _ = run(["ratio", "--config", path, "--n-list", "50,100"], capsys)
    table = rows(out)
    assert code == 0 and table[0] == ["n", "L_error", "R_error", "LR_gap", "eq_residual"]
    assert [r[0] for r in table[1:]] == ["50", "100"]


def test_verify_lo_on_example_2(cfg, capsys):
    code, out, _ = run(["verify", "--config", cfg({"N": 2, "kind": "paper_example_2"}), "--suite", "lo"], capsys)
    lines = out.splitlines()
    assert code == 0
    assert any(l.startswith("PASS lo.r0") for l in lines) and any(l.startswith("PASS lo.r2") for l in lines)
    assert any(l.startswith("INFO lo.r1") for l in lines)


def test_unreadable_configs(tmp_path, capsys):
    assert run(["zeros", "--config", str(tmp_path / "missing.json"), "--n", "2"], capsys)[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["zeros", "--config", str(bad), "--n", "2"], capsys)[0] == 2


@pytest.mark.parametrize(
    "obj, extra",
    [
        ({"N": 2, "kind": "unknown"}, ["--n", "2"]),
        (SCALAR, []),
        (SCALAR, ["--n", "0"]),
        ([1, 2], ["--n", "2"]),
        ({"n": 2}, []),
        ({"family": SCALAR, "scaling": {"kind": "weird"}}, ["--n", "2"]),
    ],
)
def test_invalid_configs(cfg, capsys, obj, extra):
    code, _, err = run(["zeros", "--config", cfg(obj)] + extra, capsys)
    assert code == 2 and "config error" in err


def test_invalid_tolerance_and_z(cfg, capsys):
    assert run(["markov", "--config", cfg(SCALAR), "--z", "3", "--tol", "-1"], capsys)[0] == 2
    assert run(["markov", "--config", cfg(SCALAR), "--z", "3+nani"], capsys)[0] == 2


def test_numerical_failure_exit_code(cfg, capsys):
    code, _, err = run(["markov", "--config", cfg(SCALAR), "--z", "0.5"], capsys)
    assert code == 1 and "numerical failure" in err


def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as info:
        cli.run(["nosuch"])
    assert info.value.code == 2


def test_outputs_are_byte_identical(cfg, capsys):
    path = cfg({"family": {"N": 2, "kind": "paper_example_2"}, "n": 5})
    first = run(["quad", "--config", path], capsys)[1]
    second = run(["quad", "--config", path], capsys)[1]
    assert first == second


def test_module_entry_point(tmp_path):
    p = tmp_path / "s.json"
    p.write_text(json.dumps(SCALAR))
    proc = subprocess.run([sys.executable, "-m", "biortho", "zeros", "--config", str(p), "--n", "1"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.splitlines()[0] == "node_re,node_im,multiplicity"
