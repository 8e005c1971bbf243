"""Command line surface: exit codes, determinism, structured errors."""

import json
import subprocess
import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]
SCENARIOS = ROOT / "scenarios"


def run_cli(*args, cwd=ROOT):
    return subprocess.run([sys.executable, "-m", "blowuplab.cli", *args],
                          capture_output=True, text=True, cwd=cwd)


def write_cfg(tmp_path, text, name="case.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def load_report(out_dir):
    with open(Path(out_dir) / "report.json") as fh:
        return json.load(fh)


class TestPredict:
    def test_one_dimensional_block(self, tmp_path):
        cfg = write_cfg(tmp_path, "p = 2\nalpha = 0\nq = 3\ngamma = 0\n")
        out = tmp_path / "out"
        res = run_cli("predict", "--config", cfg, "--out", str(out))
        assert res.returncode == 0, res.stderr
        rep = load_report(out)
        block = rep["predictions"]["one_dimensional"]
        assert block["beta"] == pytest.approx(1.0)
        assert block["psi_R"] == pytest.approx(2.0 ** 0.5)

    def test_first_order_block(self, tmp_path):
        cfg = write_cfg(tmp_path, "p = 2\nsigma = 2\nl1 = 0\nc = 1\n")
        out = tmp_path / "out"
        res = run_cli("predict", "--config", cfg, "--out", str(out))
        assert res.returncode == 0, res.stderr
        rep = load_report(out)
        assert rep["predictions"]["first_order"]["xi0"] == pytest.approx(0.70710678, abs=1e-8)

    def test_malformed_config_structured_error(self, tmp_path):
        cfg = write_cfg(tmp_path, "p = 2\nq = 1\n")  # q <= p-1
        res = run_cli("predict", "--config", cfg, "--out", str(tmp_path / "o"))
        assert res.returncode == 1
        err = json.loads(res.stderr.strip().splitlines()[-1])
        assert err["error"] == "ConfigError"

    def test_unknown_key_rejected(self, tmp_path):
        cfg = write_cfg(tmp_path, "p = 2\nq = 3\nwibble = 1\n")
        res = run_cli("predict", "--config", cfg, "--out", str(tmp_path / "o"))
        assert res.returncode == 1
        assert "unknown config keys" in res.stderr


class TestKoCheck:
    def test_convergent(self, tmp_path):
        res = run_cli("ko-check", "--config", str(SCENARIOS / "ko_cubic.cfg"),
                      "--out", str(tmp_path / "o"))
        assert res.returncode == 0
        rep = load_report(tmp_path / "o")
        ko = rep["predictions"]["keller_osserman"]
        assert ko["status"] == "convergent"
        assert ko["integral_value"] == pytest.approx(2.0 ** 0.5, abs=1e-8)

    def test_divergent(self, tmp_path):
        cfg = write_cfg(tmp_path, "p = 2\nq = 0.5\n")
        res = run_cli("ko-check", "--config", cfg, "--out", str(tmp_path / "o"))
        assert res.returncode == 0
        rep = load_report(tmp_path / "o")
        assert rep["predictions"]["keller_osserman"]["status"] == "divergent"


class TestVerdictExitCodes:
    def test_failing_tolerance_exits_two(self, tmp_path):
        cfg = write_cfg(tmp_path, "\n".join([
            "geometry = interval", "p = 2", "alpha = 0", "q = 3",
            "window_min = 1e-4", "window_max = 1e-2",
        ]) + "\n")
        res = run_cli("verify-first-order", "--config", cfg,
                      "--out", str(tmp_path / "o"),
                      "--tolerance-overrides", "tol_beta=1e-12")
        assert res.returncode == 2
        assert "FAIL" in res.stdout

    def test_tolerance_override_echoed(self, tmp_path):
        cfg = write_cfg(tmp_path, "p = 2\nq = 3\n")
        res = run_cli("predict", "--config", cfg, "--out", str(tmp_path / "o"),
                      "--tolerance-overrides", "tol_beta=0.5")
        assert res.returncode == 0
        assert load_report(tmp_path / "o")["scenario"]["tol_beta"] == 0.5


class TestDeterminism:
    def test_reports_byte_identical_modulo_timing(self, tmp_path):
        outs = []
        for name in ("o1", "o2"):
            res = run_cli("karamata-probe",
                          "--config", str(SCENARIOS / "karamata_power.cfg"),
                          "--out", str(tmp_path / name))
            assert res.returncode == 0
            rep = load_report(tmp_path / name)
            rep.pop("timing")
            outs.append(json.dumps(rep, sort_keys=True))
        assert outs[0] == outs[1]

    def test_schema_fields(self, tmp_path):
        res = run_cli("karamata-probe",
                      "--config", str(SCENARIOS / "karamata_power.cfg"),
                      "--out", str(tmp_path / "o"))
        assert res.returncode == 0
        rep = load_report(tmp_path / "o")
        assert set(rep) == {"schema", "command", "artifact_version",
                            "input_sha256", "scenario", "predictions", "fits",
                            "verdicts", "notes", "timing"}
        assert rep["schema"] == "blowuplab.report.v1"
        assert len(rep["input_sha256"]) == 64


class TestSolveAndTraces:
    def test_solve_writes_profile(self, tmp_path):
        cfg = write_cfg(tmp_path, "\n".join([
            "geometry = interval", "p = 2", "alpha = 0", "q = 3",
        ]) + "\n")
        out = tmp_path / "o"
        res = run_cli("solve", "--config", cfg, "--out", str(out))
        assert res.returncode == 0
        assert (out / "profile.csv").exists()
        assert (out / "profile.meta.json").exists()
        header = (out / "profile.csv").read_text().splitlines()[0]
        assert header == "r,u,du_dr"

    def test_dump_phi_cache(self, tmp_path):
        cfg = write_cfg(tmp_path, "p = 2\nq = 3\n")
        dump = tmp_path / "phi.csv"
        res = run_cli("predict", "--config", cfg, "--out", str(tmp_path / "o"),
                      "--dump-phi", str(dump))
        assert res.returncode == 0
        lines = dump.read_text().splitlines()
        assert lines[0] == "t,phi"
        assert len(lines) > 100

    def test_verify_first_order_trace(self, tmp_path):
        res = run_cli("verify-first-order",
                      "--config", str(SCENARIOS / "a1_exact_cubic.cfg"),
                      "--out", str(tmp_path / "o"))
        assert res.returncode == 0
        traces = list((tmp_path / "o").glob("ratio_*.csv"))
        assert traces, "expected a ratio trace CSV"


class TestJobs:
    def test_parallel_matches_sequential(self, tmp_path):
        cfg = write_cfg(tmp_path, "\n".join([
            "geometry = interval", "p = [2, 3]", "alpha = 0", "q_offset = 1",
            "window_min = 1e-4", "window_max = 1e-2", "variant = proof",
        ]) + "\n")
        reports = []
        for jobs, name in (("1", "seq"), ("2", "par")):
            res = run_cli("verify-first-order", "--config", cfg,
                          "--out", str(tmp_path / name), "--jobs", jobs)
            assert res.returncode == 0, res.stderr
            rep = load_report(tmp_path / name)
            rep.pop("timing")
            reports.append(json.dumps(rep, sort_keys=True))
        assert reports[0] == reports[1]
