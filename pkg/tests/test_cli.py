import json
import subprocess
import sys

import pytest

from expanse.cli import main


@pytest.fixture
def files(tmp_path):
    def write(name, obj):
        p = tmp_path / name
        p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
        return str(p)
    return write


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_classify_swap_is_isometry(capsys, files):
    sp = files("s.json", {"dist": [[0, 1], [1, 0]]})
    mp = files("m.json", {"image": [1, 0]})
    code, out = run(capsys, "classify", sp, mp)
    assert code == 0 and json.loads(out)["class"] == "Isometry"


def test_classify_constant_is_not_expansive(capsys, files):
    sp = files("s.json", {"dist": [[0, 1], [1, 0]]})
    mp = files("m.json", {"image": [0, 0]})
    code, out = run(capsys, "classify", sp, mp)
    rep = json.loads(out)
    assert code == 0 and rep["class"] == "NotExpansive" and rep["witnesses"]


def test_malformed_json_exit_2(capsys, files):
    sp = files("s.json", "{not json")
    mp = files("m.json", {"image": [0, 0]})
    assert run(capsys, "classify", sp, mp)[0] == 2


def test_missing_file_exit_2(capsys, tmp_path):
    assert run(capsys, "validate", str(tmp_path / "absent.json"))[0] == 2


def test_invalid_metric_exit_3(capsys, files):
    sp = files("s.json", {"dist": [[0, 1, 3], [1, 0, 1], [3, 1, 0]]})
    mp = files("m.json", {"image": [0, 1, 2]})
    code, out = run(capsys, "classify", sp, mp)
    assert code == 3 and json.loads(out)["violations"][0]["code"] == "triangle"


def test_map_out_of_range_exit_3(capsys, files):
    sp = files("s.json", {"dist": [[0, 1], [1, 0]]})
    mp = files("m.json", {"image": [0, 5]})
    assert run(capsys, "classify", sp, mp)[0] == 3


def test_unknown_suite_exit_2(capsys):
    assert run(capsys, "verify", "nonsense")[0] == 2


def test_bad_config_exit_2(capsys):
    assert run(capsys, "verify", "sparse", "--tol", "-1")[0] == 2
    assert run(capsys, "verify", "sparse", "--format", "xml")[0] == 2


def test_enumerate_csv(capsys, files):
    sp = files("s.json", {"dist": [[0, 1, 1], [1, 0, 1], [1, 1, 0]]})
    code, out = run(capsys, "enumerate", sp, "--format", "csv")
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "image,class" and len(lines) == 7


def test_enumerate_budget_refusal(capsys, files):
    sp = files("s.json", {"dist": [[0, 1, 1], [1, 0, 1], [1, 1, 0]]})
    code, out = run(capsys, "enumerate", sp, "--budget", "5")
    assert code == 0  # falls back to the injective scan
    assert len(json.loads(out)["expansive"]) == 6


def test_recurrence_dial(capsys):
    code, out = run(capsys, "recurrence", "--dial", "--epsilon", "0.02", "--max-iter", "100")
    assert code == 0 and json.loads(out)["n"] == 44


def test_dial_approach_csv(capsys):
    code, out = run(capsys, "dial", "approach", "--format", "csv")
    rows = out.strip().splitlines()
    assert code == 0 and [r.split(",")[0] for r in rows[1:]] == ["44", "333", "710"]


def test_sparse_and_gallery(capsys):
    code, out = run(capsys, "sparse", "--oracle", "integers", "--count", "4")
    assert code == 0 and json.loads(out)["set"]["points"] == [0, 1, 4, 13]
    code, out = run(capsys, "sparse", "--oracle", "interval", "--count", "3",
                    "--scan-budget", "500")
    assert code == 1
    code, out = run(capsys, "gallery", "run", "interleave-square")
    assert code == 0 and json.loads(out)["passed"]


def test_format_before_subcommand_is_respected(capsys):
    for argv in (["--format", "text", "verify", "sparse"], ["verify", "sparse", "--format", "text"]):
        code, out = run(capsys, *argv)
        assert code == 0 and "PASS" in out and not out.lstrip().startswith("{")


def test_verify_is_deterministic(capsys):
    a = run(capsys, "verify", "compact", "--max-size", "3", "--random-instances", "50",
            "--seed", "7")
    b = run(capsys, "verify", "compact", "--max-size", "3", "--random-instances", "50",
            "--seed", "7")
    assert a == b and a[0] == 0


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "expanse", "gallery", "list"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "chi-square" in res.stdout
