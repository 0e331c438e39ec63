import csv
import json
import shutil
import subprocess

import numpy as np
import pytest

from bettilab.cli import main, run


def call(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out)


def test_pell_subcommand(capsys):
    code, rec = call(capsys, "pell", "--params", '{"f": "x^4-1"}')
    assert code == 0
    assert rec["schema"] == "betti-lab/1"
    assert rec["result"]["order"] == 2


def test_pell_without_torsion(capsys):
    code, rec = call(capsys, "pell", "--params", '{"f": "x^4+x^3+3x+5", "n_max": 8}')
    assert code == 0 and rec["result"] == {"found": False, "n_max": 8}


def test_exit_codes(tmp_path, capsys):
    assert call(capsys, "census")[0] == 0
    # degenerate curve: computation error
    code, rec = call(capsys, "periods", "--params", '{"model": "even", "genus": 1, "params": [1, 0, -2, 0]}')
    assert code == 1 and rec["error"]["code"] == "degenerate_discriminant"
    # usage errors
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["--job", str(bad)]) == 2
    capsys.readouterr()
    assert call(capsys, "periods", "--params", '{"model": "even", "genus": 1}')[0] == 2
    assert call(capsys, "pell", "--params", "[1, 2]")[0] == 2
    assert call(capsys, "--params", "{}")[0] == 2
    assert main(["no-such-command"]) == 2


def test_repeated_runs_are_byte_identical(tmp_path, capsys):
    job = tmp_path / "job.json"
    job.write_text(
        json.dumps({"subcommand": "betti", "seed": 7, "params": {"model": "even", "genus": 2, "params": [1, 0.5, -2, 0, 0.3, 1]}})
    )
    outs = []
    for k in range(2):
        d = tmp_path / f"run{k}"
        assert main(["--job", str(job), "--out", str(d)]) == 0
        outs.append((d / "betti.json").read_bytes())
    capsys.readouterr()
    assert outs[0] == outs[1]
    assert json.loads(outs[0])["seed"] == 7


def test_census_csv(tmp_path, capsys):
    assert main(["census", "--out", str(tmp_path)]) == 0
    capsys.readouterr()
    rows = list(csv.DictReader(open(tmp_path / "census.csv")))
    feasible = {(r["series"], r["m"]) for r in rows if r["feasible"] == "1"}
    assert feasible == {("C", "1")}
    assert sum(r["feasible"] == "1" for r in rows) == 40


def test_rank_scan_csv(tmp_path, capsys):
    code, rec = call(capsys, "rank-scan", "--params", '{"genus": 1, "n_samples": 3}', "--out", str(tmp_path), "--seed", "3")
    assert code == 0 and rec["result"]["max_rank"] == 2
    rows = list(csv.DictReader(open(tmp_path / "rank-scan.csv")))
    assert len(rows) == 3 and all(r["rank"] == "2" for r in rows)


def test_cache_coherence(tmp_path, capsys):
    params = '{"model": "odd", "genus": 2, "params": [2, -1.5, "1/3"]}'
    _, plain = call(capsys, "periods", "--params", params)
    cache = tmp_path / "cache"
    _, first = call(capsys, "periods", "--params", params, "--cache", str(cache))
    _, second = call(capsys, "periods", "--params", params, "--cache", str(cache))
    shutil.rmtree(cache)
    _, third = call(capsys, "periods", "--params", params, "--cache", str(cache))
    Z = [np.array(r["result"]["Z"])[..., 0] + 1j * np.array(r["result"]["Z"])[..., 1] for r in (plain, first, second, third)]
    assert all(np.max(np.abs(z - Z[0])) < 1e-12 for z in Z)


def test_ks_and_webs(capsys):
    code, rec = call(capsys, "ks", "--params", '{"model": "odd", "genus": 2, "params": [2, 3, 5]}')
    assert code == 0 and rec["result"]["max_contracted_rank"] == 2
    web = {"basis": [[[1, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]],
                     [[0, "1/2", 0, 0], ["1/2", 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]],
                     [[0, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]],
                     [[0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, "1/2"], [0, 0, "1/2", 0]]]}
    code, rec = call(capsys, "webs", "--params", json.dumps(web))
    assert code == 0 and rec["result"]["regular"] is False


def test_torsion_solve(capsys):
    params = '{"model": "even", "genus": 1, "params": [0.3, -1.1, 0.5, 0.2], "target": ["-3/8", "3/4"]}'
    code, rec = call(capsys, "torsion-solve", "--params", params)
    assert code == 0 and rec["result"]["residual"] < 1e-10


def test_degenerate_ordering_point(capsys):
    # default real-axis ordering puts a branch point on a chain segment
    code, rec = call(capsys, "periods", "--params", '{"model": "odd", "genus": 2, "params": [[0, 1], [0, 0.25], [0.0039, 0.5]]}')
    assert code == 0
    assert rec["result"]["symmetry_residual"] < 1e-8


def test_run_with_stream_and_precision():
    import io

    buf = io.StringIO()
    code = run({"subcommand": "periods", "precision": "dd", "params": {"model": "odd", "genus": 1, "params": [-1]}}, stream=buf)
    rec = json.loads(buf.getvalue())
    assert code == 0 and rec["precision"] == "dd"


@pytest.mark.skipif(shutil.which("betti-lab") is None, reason="console script not installed")
def test_console_script():
    proc = subprocess.run(["betti-lab", "verify"], capture_output=True, text=True, timeout=600)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]["all_passed"]
    assert proc.stderr.count("PASS") == 10
