import io
import json
from dataclasses import replace

import pytest

from mrtau import cli
from mrtau.exactalg import DiffPoly
from mrtau.goldens import flow_golden
from mrtau.kmrealize import get_model
from mrtau.taustruct import CheckReport


def run(*argv):
    out = io.StringIO()
    code = cli.main(list(argv), out)
    return code, out.getvalue()


def test_models_lists_all():
    code, text = run("models")
    assert code == 0
    assert [line.split()[0] for line in text.splitlines()] == ["sk", "kk", "kdv"]


def test_flow_json_round_trip():
    code, text = run("flow", "--model", "sk", "--time", "5", "--format", "json")
    assert code == 0
    data = json.loads(text)
    assert (data["a"], data["k"]) == (2, 0)
    rhs = DiffPoly.from_json(data["rhs"])
    assert rhs == flow_golden("sk", 5)


def test_omega_is_deterministic():
    a = run("omega", "--model", "kk", "--depth", "1", "--format", "json")
    b = run("omega", "--model", "kk", "--depth", "1", "--format", "json")
    assert a == b and a[0] == 0


def test_psido_res():
    code, text = run("psido-res", "--model", "kdv", "--power", "1/2")
    assert code == 0 and text == "Res L^(1/2) = -1/2*u\n"


def test_npoint_two_points():
    code, text = run("npoint", "--model", "sk", "--indices", "1,0;1,0")
    assert code == 0 and text == "Omega[1,0;1,0] = -2/3*u\n"


def test_resolvent_writes_out_file(tmp_path):
    target = tmp_path / "r.txt"
    code, text = run("resolvent", "--model", "sk", "--a", "1", "--depth", "1", "--out", str(target))
    assert code == 0 and text == ""
    assert "p[0] = 1" in target.read_text()


@pytest.mark.parametrize("argv", [
    ("resolvent", "--model", "sk", "--a", "7"),
    ("resolvent", "--model", "sk", "--a", "1", "--depth", "0"),
    ("flow", "--model", "kk", "--time", "6"),
    ("omega", "--model", "toda"),
    ("npoint", "--indices", "1;0"),
    ("npoint", "--indices", "1,0"),
    ("psido-res", "--power", "1/4"),
    ("verify", "--suite", "everything"),
])
def test_usage_errors(argv):
    assert run(*argv)[0] == 2


def test_parser_errors_exit_two():
    with pytest.raises(SystemExit) as e:
        cli.main(["bogus"])
    assert e.value.code == 2


def test_corrupted_model_is_a_data_error(monkeypatch):
    broken = replace(get_model("sk"), h=5)
    monkeypatch.setattr(cli, "get_model", lambda name: broken)
    assert run("verify", "--model", "sk", "--suite", "tau", "--depth", "1")[0] == 1


def test_verify_failure_exit_code(monkeypatch):
    bad = CheckReport("fake", True)
    bad.fail("always")
    monkeypatch.setattr(cli, "run_suite", lambda *a: [bad])
    code, text = run("verify", "--model", "kk", "--depth", "1")
    assert code == 3 and "FAIL" in text


def test_verify_suite_passes():
    code, text = run("verify", "--model", "kk", "--suite", "tau", "--depth", "2")
    assert code == 0 and text.rstrip().endswith("ALL PASS")
