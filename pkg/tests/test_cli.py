import json

import numpy as np
import pytest

from cometquiver import io
from cometquiver.cli import RunConfig, load_quiver, run
from cometquiver.errors import CometError
from cometquiver.quiver import minimal_comet
from cometquiver.rep import layout

D4_ALPHA = "1.0,1.13,1.27,1.41"


def call(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out.strip() else None), err


@pytest.fixture(scope="module")
def d4_file(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    path = d / "d4.json"
    path.write_text(json.dumps(minimal_comet(2, 4).to_dict()))
    sol = d / "solution.json"
    assert run(["solve", str(path), "--alpha", D4_ALPHA, "--seed", "7", "--out", str(sol)]) == 0
    return path, sol


def test_dims(capsys, d4_file):
    code, doc, _ = call(capsys, "dims", str(d4_file[0]))
    assert code == 0
    assert doc["dim_P"] == 1 and doc["dim_X"] == 2 and doc["gt_count"] == 1
    assert doc["stamp"]["quiver_hash"] == minimal_comet(2, 4).digest()
    assert set(doc["stamp"]["versions"]) >= {"cometquiver", "numpy", "python"}


def test_dims_numerical_with_plot(capsys, tmp_path):
    code, doc, _ = call(capsys, "dims", "complete:2,3,1", "--alpha", "1,1.2,1.5", "--plot", str(tmp_path))
    assert code == 0
    assert doc["numerical"]["quotient_complex_dim"] == 6
    assert not doc["jittered"]
    assert (tmp_path / "constraint_spectrum.png").stat().st_size > 0


def test_solve_and_verify(capsys, d4_file):
    _, sol = d4_file
    doc = io.read_json(sol)
    assert doc["format"] == io.SOLUTION_FORMAT
    assert doc["residual"]["aggregate"] < 1e-11
    assert doc["stamp"]["seed"] == 7
    code, rep, _ = call(capsys, "verify", str(sol))
    assert code == 0 and rep["passed"]


def test_verify_corrupted_file_exits_3(capsys, d4_file, tmp_path):
    doc = io.read_json(d4_file[1])
    doc["representation"]["y"][1][0][0][0][1][0] += 0.25
    bad = tmp_path / "bad.json"
    io.write_json(bad, doc)
    code, rep, err = call(capsys, "verify", str(bad))
    assert code == 3
    assert not rep["passed"]
    assert rep["residual"]["eq_III"][1] > 0.01
    assert "failed" in err


def test_solution_round_trips_bit_exactly(d4_file):
    doc = io.read_json(d4_file[1])
    q, rep, alpha = io.load_solution(doc)
    again = io.solution_document(q, rep, alpha)
    assert again["representation"] == doc["representation"]
    assert json.loads(io.dumps(again))["alpha"] == doc["alpha"]
    q2, rep2, _ = io.load_solution(json.loads(io.dumps(again)))
    assert np.array_equal(layout(q).pack(rep), layout(q2).pack(rep2))


def test_higgs_gt_brane_wildify(capsys, d4_file):
    _, sol = d4_file
    code, doc, _ = call(capsys, "higgs", str(sol), "--punctures", "0,1,2j,-1+1j")
    assert code == 0 and doc["nilpotency_orders"] == [2, 2, 2, 2]
    assert doc["residue_sum_defect"] < 1e-10
    code, doc, _ = call(capsys, "gt", str(sol))
    assert code == 0 and doc["independence_rank"] == doc["tally"] == 1
    code, doc, _ = call(capsys, "gt", str(sol), "--policy", "corollary")
    assert code == 0 and [h["label"] for h in doc["hamiltonians"]] == ["h[arm=4,j=1,k=2]"]
    code, doc, _ = call(capsys, "brane", "minimal:2,4", "--samples", "5")
    assert code == 0 and doc["signature"] == "BAA"
    code, doc, _ = call(capsys, "wildify", str(sol))
    assert code == 0 and doc["residual"]["aggregate"] < 1e-10
    assert doc["quiver"]["multiplicities"] == [[4]]
    code, doc, _ = call(capsys, "wildify", "minimal:2,4")
    assert code == 0 and doc["quiver"] == {"arms": [[1, 2]], "loops": 0, "multiplicities": [[4]]}


def test_polygon_with_figures(capsys, tmp_path):
    code, doc, _ = call(capsys, "polygon", "minimal:2,5", "--alpha", "1,1.1,1.3,1.6,2", "--plot", str(tmp_path))
    assert code == 0
    assert doc["polygon"]["closure_defect"] < 1e-10
    assert [p.split("/")[-1] for p in doc["figures"]] == ["bundle_polygon.png"]


def test_solve_figures(capsys, tmp_path):
    code, doc, _ = call(capsys, "solve", "complete:3,3", "--alpha", "1,1.2,1.5", "--plot", str(tmp_path))
    assert code == 0
    assert {p.split("/")[-1] for p in doc["figures"]} == {"bundle_polygon.png", "higgs_polygon.png"}


@pytest.mark.parametrize(
    "argv",
    [
        ["solve", "minimal:2,4", "--alpha", "1,2"],
        ["solve", "minimal:2,4"],
        ["solve", "minimal:2,4", "--alpha", "1,1,-1,1"],
        ["dims", "/nonexistent.json"],
        ["frobnicate", "x"],
        ["solve", "minimal:2,4", "--alpha", "one,two"],
        ["higgs", "/nonexistent.json", "--punctures", "0,0"],
    ],
)
def test_usage_errors_exit_2(capsys, argv):
    code = run(argv)
    _, err = capsys.readouterr()
    assert code == 2
    assert err


def test_not_converged_exits_3(capsys):
    code = run(["solve", "complete:3,4,1", "--alpha", "1,1.2,1.5,1.9", "--max-iter", "1", "--starts", "1"])
    out, err = capsys.readouterr()
    assert code == 3
    assert json.loads(out)["residual"]["aggregate"] > 0
    assert "error" in err


def test_load_quiver_shorthand_and_run_config():
    assert load_quiver("complete:3,4,1").r == 3
    assert load_quiver("minimal:2,4") == minimal_comet(2, 4)
    with pytest.raises(CometError):
        RunConfig(command="dims", source="")
