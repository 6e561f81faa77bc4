import json

import pytest

from kolmonet.cli import EXIT_CALIBRATION, EXIT_CONFIG, EXIT_FAILED, EXIT_OK, main


def _lines(capsys):
    return [json.loads(line) for line in capsys.readouterr().out.splitlines() if line.startswith("{")]


def test_missing_dim_is_config_error(capsys):
    with pytest.raises(SystemExit) as info:
        main(["construct", "--problem", "heat-max"])
    assert info.value.code == EXIT_CONFIG
    assert "--dim" in capsys.readouterr().err


def test_unknown_flag_and_problem(capsys):
    for argv in (["verify", "calculus", "--bogus"], ["construct", "--dim", "2", "--problem", "wave"]):
        with pytest.raises(SystemExit) as info:
            main(argv)
        assert info.value.code == EXIT_CONFIG


def test_bad_epsilon_is_config_error(tmp_path, capsys):
    assert main(["construct", "--dim", "2", "--eps", "2", "--out", str(tmp_path)]) == EXIT_CONFIG
    assert main(["construct", "--dim", "2", "--mode", "paper"]) == EXIT_CONFIG


def test_construct_heat_max(tmp_path, capsys):
    rc = main(["construct", "--problem", "heat-max", "--dim", "2", "--eps", "0.1", "--seed", "7",
               "--out", str(tmp_path)])
    assert rc == EXIT_OK
    out = _lines(capsys)[-1]
    assert out["meets_target"] and out["error"] <= 0.1
    record = json.loads((tmp_path / "heat-max-d2-report.json").read_text())
    assert record["network_file"] == "heat-max-d2-network.json"
    assert record["param_count"] == out["param_count"]
    assert "seconds" not in json.dumps(record)


def test_construct_is_byte_identical_across_threads(tmp_path, monkeypatch, capsys):
    blobs = []
    for threads, sub in (("1", "a"), ("4", "b"), ("4", "c")):
        monkeypatch.setenv("KOLMO_THREADS", threads)
        argv = ["construct", "--problem", "ou-linear", "--dim", "2", "--M", "8", "--delta", "0.5",
                "--candidates", "3", "--seed", "3", "--out", str(tmp_path / sub)]
        assert main(argv) == EXIT_OK
        blobs.append(sorted((f.name, f.read_bytes()) for f in (tmp_path / sub).iterdir()))
    assert blobs[0] == blobs[1] == blobs[2]


def test_override_reports_override_source(tmp_path, capsys):
    main(["construct", "--problem", "heat-linear", "--dim", "1", "--M", "2", "--delta", "1",
          "--out", str(tmp_path)])
    record = json.loads((tmp_path / "heat-linear-d1-report.json").read_text())
    assert record["M"] == 2 and record["steps"] == 1
    assert record["constants"]["mode"] == "override"


def test_calibration_failure(tmp_path, capsys):
    rc = main(["construct", "--problem", "heat-max", "--dim", "2", "--eps", "0.01", "--budget", "8",
               "--out", str(tmp_path)])
    assert rc == EXIT_CALIBRATION
    err = capsys.readouterr().err
    assert "calibration failed" in err and "best constants M=8" in err
    assert not list(tmp_path.iterdir())


def test_closed_form_dry_run(capsys):
    assert main(["construct", "--dim", "2", "--mode", "paper", "--dry-run"]) == EXIT_OK
    out = _lines(capsys)[-1]
    assert out["mode"] == "paper" and out["kappa"] > 0 and out["eta"] >= 1
    assert out["log_M"] > 0 and out["log_delta"] < 0
    assert out["steps"] >= 1 and out["param_count"] > out["M"]


def test_verify_calculus(capsys):
    assert main(["verify", "calculus", "--seed", "1"]) == EXIT_OK
    summary = _lines(capsys)[-1]
    assert summary["passed"] and summary["checks"] == 3 + 32


def test_verify_perturbation_single_problem(capsys):
    assert main(["verify", "perturbation", "--problem", "ou-linear", "--samples", "2000"]) == EXIT_OK
    lines = _lines(capsys)
    assert lines[-1]["checks"] == 6
    assert all("ou-linear" in r["name"] for r in lines[:-1])


def test_verify_failure_exit_code(monkeypatch, capsys):
    from kolmonet import bench

    def failing(samples, seed, **kw):
        return [bench.CheckResult("always-fails", False, 1.0, 0.0)]

    monkeypatch.setitem(bench.SUITES, "markov", failing)
    assert main(["verify", "markov"]) == EXIT_FAILED
    assert _lines(capsys)[-1]["failed"] == ["always-fails"]


@pytest.mark.parametrize("kind", ["params-d", "params-eps"])
def test_sweep_writes_csv(kind, tmp_path, capsys):
    path = tmp_path / f"{kind}.csv"
    assert main(["sweep", kind, "--out", str(path)]) == EXIT_OK
    out = capsys.readouterr().out.splitlines()
    assert out[0] == str(path)
    assert path.read_text().startswith("axis,value,stderr")
    assert json.loads(out[1])["slope"] > 0


def test_dry_run_matches_closed_form(capsys):
    from kolmonet.constructor import paper_constants

    assert main(["construct", "--mode", "paper", "--dim", "2", "--eps", "0.5", "--dry-run"]) == EXIT_OK
    out = _lines(capsys)[-1]
    c = paper_constants(2, 0.5, out["kappa"], out["eta"], out["p"])
    assert (out["M"], out["delta"], out["steps"]) == (c.M, c.delta, c.steps)


def test_verify_markov_million(capsys):
    assert main(["verify", "markov", "--samples", "1000000"]) == EXIT_OK
    assert _lines(capsys)[-1] == {"checks": 72, "failed": [], "passed": True, "suite": "markov"}
