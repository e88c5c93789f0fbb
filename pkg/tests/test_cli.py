import csv
import io
import json

import pytest

from doobweights import cli
from doobweights.filtration import build_dyadic, serialize
from doobweights.report import Report


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_verify_example(capsys):
    code, out, err = run(["verify", "--dyadic", "8", "--p", "2", "--trials", "1000", "--seed", "7"], capsys)
    assert code == 0
    assert "0 failures" in err
    assert len(out.splitlines()) == 1001


def test_constants_example(capsys):
    code, out, _ = run(["constants", "--p", "2"], capsys)
    assert code == 0
    table = {row["name"]: float(row["value"]) for row in csv.DictReader(io.StringIO(out))}
    assert table["psi"] == pytest.approx(2, abs=1e-12)
    assert table["phi"] == pytest.approx(6.75, abs=1e-12)
    assert table["a0"] == 1.5


def test_figure1_example(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv(cli.OUTPUT_ENV, str(tmp_path))
    code, _, _ = run(["figure1", "--pmin", "1.1", "--pmax", "10", "--samples", "200"], capsys)
    assert code == 0
    rows = list(csv.DictReader((tmp_path / "figure1.csv").open()))
    assert len(rows) == 200
    assert all(float(r["phi"]) >= float(r["psi"]) for r in rows)
    assert (tmp_path / "figure1.svg").exists()


@pytest.mark.parametrize(
    "argv",
    [
        ["verify", "--p", "1"],
        ["principal", "--a", "1"],
        ["stopping", "--b", "0.5"],
        ["ap", "--alpha", "-1"],
        ["nope"],
        ["ap", "--p", "x"],
        ["ap", "--dyadic", "2", "--space", "x.json"],
        ["maximal", "--dyadic", "2", "--f", "1,2,3"],
    ],
)
def test_usage_errors(argv, capsys):
    code, _, _ = run(argv, capsys)
    assert code == 2


def test_ap_and_maximal(capsys):
    code, out, _ = run(["ap", "--dyadic", "1", "--weight", "1,4"], capsys)
    assert code == 0
    assert json.loads(out)[0]["characteristic"] == pytest.approx(1.5625)
    code, out, _ = run(["maximal", "--dyadic", "2", "--f", "4,0,0,0"], capsys)
    assert code == 0
    assert [float(r["Mf"]) for r in csv.DictReader(io.StringIO(out))] == [4, 2, 1, 1]


def test_space_document(tmp_path, capsys):
    path = tmp_path / "s.json"
    path.write_text(serialize(build_dyadic(2)))
    code, out, _ = run(["principal", "--space", str(path), "--f", "8,0,0,0", "--a", "2", "--scale", "1"], capsys)
    assert code == 0 and "PASS" in out


def test_stopping_and_sharpness(capsys):
    code, out, _ = run(["stopping", "--dyadic", "2", "--f", "4,0,0,0", "--weight", "1,1,1,1"], capsys)
    assert code == 0 and out.startswith("k,j,mass")
    code, out, err = run(["sharpness", "--dyadic", "8", "--alpha", "-0.3", "-0.5"], capsys)
    assert code == 0 and "band" in err
    code, out2, _ = run(["sharpness", "--dyadic", "8", "--alpha=-0.3,-0.5"], capsys)
    assert out2 == out and len(out.splitlines()) == 3


def test_failure_path_names_invariant(monkeypatch, capsys):
    def broken(forest):
        rep = Report("principal-set properties")
        rep.add("(3) conditional sparsity", False, -1.0, leaf=0)
        return rep

    monkeypatch.setattr(cli, "verify_properties", broken)
    code, _, err = run(["principal", "--dyadic", "2", "--f", "8,0,0,0", "--a", "2", "--scale", "1"], capsys)
    assert code == 1
    payload = json.loads(err.split("verification failed: ", 1)[1].splitlines()[0])
    assert payload["invariant"] == "(3) conditional sparsity"
    assert payload["detail"] == {"leaf": 0}


@pytest.mark.parametrize("argv", [["verify", "--dyadic", "5", "--trials", "50", "--seed", "3"],
                                  ["stopping", "--dyadic", "4", "--seed", "11"],
                                  ["sharpness", "--dyadic", "6", "--budget", "5"]])
def test_byte_identical_reruns(argv, tmp_path, monkeypatch, capsys):
    monkeypatch.setenv(cli.OUTPUT_ENV, str(tmp_path))
    outs = []
    for name in ("a.csv", "b.csv"):
        assert cli.main(argv + ["--output", name]) == 0
        outs.append((tmp_path / name).read_bytes())
    capsys.readouterr()
    assert outs[0] == outs[1]
