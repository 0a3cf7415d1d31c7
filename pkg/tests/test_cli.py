import csv
import json
import math
import subprocess
import sys

import pytest

from conftest import DATA
from shadowalloc import alpha_delta, norms, read_hamiltonian
from shadowalloc.cli import main
from shadowalloc.schemes import parse_settings

H2 = str(DATA / "h2_sto3g_jw.txt")


def read_curve(path):
    rows = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(rows))


def test_generate_writes_settings_and_report(tmp_path):
    out = tmp_path / "settings.txt"
    assert main(["generate", H2, "--scheme", "shadowgrouping", "--budget", "1000", "--delta", "0.02", "--out", str(out)]) == 0
    settings, header = parse_settings(out.read_text())
    assert len(settings) == 1000
    assert {"scheme", "seed", "delta", "alpha", "indicator", "hamiltonian_hash", "tool_version", "command_line"} <= set(header)
    report = json.loads((tmp_path / "settings.txt.guarantee.json").read_text())
    assert report["hamiltonian_hash"] == read_hamiltonian(H2).content_hash()
    assert report["seed"] == 0 and report["guarantee"]["delta"] == 0.02


def test_generate_is_byte_identical(tmp_path):
    texts = []
    for _ in range(2):
        out = tmp_path / "s.txt"
        assert main(["generate", H2, "--scheme", "random", "--budget", "50", "--seed", "7", "--out", str(out)]) == 0
        texts.append((out.read_bytes(), (tmp_path / "s.txt.guarantee.json").read_bytes()))
    assert texts[0] == texts[1]


def test_bruteforce_cap_exit_code(tmp_path, capsys):
    path = tmp_path / "big.txt"
    path.write_text("1.0 " + "Z" * 10 + "\n")
    code = main(["generate", str(path), "--scheme", "bruteforce", "--budget", "1", "--out", str(tmp_path / "o")])
    assert code == 4
    assert "n <= 8" in capsys.readouterr().err


@pytest.mark.parametrize(
    "args,code,field",
    [
        (["budget", "MISSING"], 2, "MISSING"),
        (["budget", H2, "--delta", "0.6"], 3, "delta"),
        (["generate", H2, "--budget", "0", "--out", "x"], 3, "budget"),
        (["guarantee-curve", H2, "--checkpoints", "a,b"], 3, "checkpoints"),
    ],
)
def test_error_exit_codes(args, code, field, capsys):
    assert main(args) == code
    assert field in capsys.readouterr().err


def test_format_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("0.25 XY\n0.25 XYZ\n")
    assert main(["budget", str(bad)]) == 2
    assert "line 2" in capsys.readouterr().err


def test_short_flags_are_rejected():
    with pytest.raises(SystemExit) as info:
        main(["budget", H2, "-d", "0.1"])
    assert info.value.code == 2
    with pytest.raises(SystemExit):
        main(["budget", H2, "--del", "0.1"])


def test_guarantee_curve_plateau_and_monotone(tmp_path):
    out = tmp_path / "curve.csv"
    assert main(["guarantee-curve", H2, "--checkpoints", "1,20,50,98,99,200,500,1000,3000", "--out", str(out)]) == 0
    rows = read_curve(out)
    l1 = norms(read_hamiltonian(H2))[0]
    totals = [float(r["epsilon_total"]) for r in rows]
    for r in rows:
        if int(r["N"]) < 99:
            assert float(r["epsilon_total"]) == l1
    assert all(a >= b for a, b in zip(totals, totals[1:]))
    text = out.read_text()
    assert "# hamiltonian_hash=" in text and "# command_line=" in text and "# seed=0" in text


def test_guarantee_curve_single_term(tmp_path):
    path = tmp_path / "one.txt"
    path.write_text("0.3 XZ\n")
    out = tmp_path / "c.csv"
    assert main(["guarantee-curve", str(path), "--checkpoints", "50,100,400", "--out", str(out)]) == 0
    rows = read_curve(out)
    assert float(rows[0]["epsilon_total"]) == 0.3
    for r in rows[1:]:
        assert float(r["epsilon_total"]) == pytest.approx(alpha_delta(0.02) * 0.3 / math.sqrt(int(r["N"])), rel=1e-14)


def test_budget_command(tmp_path, capsys):
    one = tmp_path / "one.txt"
    one.write_text("1.0 ZZ\n")
    out = tmp_path / "b.json"
    assert main(["budget", str(one), "--epsilon", "0.1", "--out", str(out)]) == 0
    printed = capsys.readouterr().out
    summary = json.loads(out.read_text())
    assert summary["N_low"] == summary["N_high"]
    for key in ("delta", "epsilon", "l1_norm", "n_terms", "single_shot_budget"):
        assert key in printed and key in summary
    assert main(["budget", str(one), "--epsilon", "0.05", "--out", str(out)]) == 0
    half = json.loads(out.read_text())
    a2 = alpha_delta(0.02) ** 2
    assert (summary["N_low"], half["N_low"]) == (math.ceil(a2 * 100), math.ceil(a2 * 400))


def test_benchmark_command(tmp_path):
    out = tmp_path / "bench.json"
    assert main(["benchmark", H2, "--runs", "1", "--budget", "200", "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert len(report["estimates"]) == 1
    assert {"hamiltonian_hash", "command_line", "tool_version", "seed", "rmse", "rmse_err", "runtime_s"} <= set(report)


def test_singleshot_worse_than_random(tmp_path):
    out = {}
    for scheme in ("singleshot", "random"):
        path = tmp_path / f"{scheme}.json"
        assert main(["benchmark", H2, "--scheme", scheme, "--runs", "60", "--budget", "1000", "--out", str(path)]) == 0
        out[scheme] = json.loads(path.read_text())["rmse"]
    assert out["singleshot"] > out["random"]


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "shadowalloc.cli", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "0.1.0" in proc.stdout
