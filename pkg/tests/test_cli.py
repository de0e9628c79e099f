"""CLI and harness tests: config round-trip, output schema and
determinism, parallel merge equality, and the validate negative control."""

import csv
import subprocess
import sys
from dataclasses import replace
from pathlib import Path

import pytest

from rachsim import cli
from rachsim.analytics import expected_throughput
from rachsim.model import SystemConfig

TINY = replace(
    cli.ExperimentConfig(),
    shapes=("delta",),
    n_grid=(100, 200),
    c_grid=(1.0,),
    q_grid=(2,),
    dacb_modes=("estimated",),
    replications=2,
    max_replications=4,
    max_ci_fraction=1.0,  # avoid escalation in the fast tests
    master_seed=13,
    analyze_n=200,
    analyze_k=(0, 2),
    analyze_p_points=20,
    pareto_p_points=60,
)


def _read_csv(path: Path):
    lines = path.read_text().splitlines()
    comments = [l for l in lines if l.startswith("#")]
    rows = list(csv.DictReader(l for l in lines if not l.startswith("#")))
    return comments, rows


class TestConfig:
    def test_round_trip(self):
        cfg = cli.ExperimentConfig()
        assert cli.config_from_ini(cli.config_to_ini(cfg)) == cfg

    def test_round_trip_non_default(self):
        cfg = replace(TINY, system=SystemConfig(preambles=20, max_crs=5),
                      update_base="prior", solver_method="exact")
        assert cli.config_from_ini(cli.config_to_ini(cfg)) == cfg

    def test_hash_stable_and_sensitive(self):
        cfg = cli.ExperimentConfig()
        assert cli.config_hash(cfg) == cli.config_hash(cli.ExperimentConfig())
        assert cli.config_hash(cfg) != cli.config_hash(replace(cfg, master_seed=1))

    @pytest.mark.parametrize("text", [
        "[experiment]\nshapes = gaussian\n",
        "[experiment]\nprotocols = dbca, ftp\n",
        "[experiment]\nupdate_base = magic\n",
        "[experiment]\nreplications = 0\n",
        "[analyze]\nk_list =\n",
        "not an ini at all [",
    ])
    def test_bad_configs_rejected(self, text):
        with pytest.raises(cli.ConfigError):
            cli.config_from_ini(text)

    def test_empty_k_list_cli_error(self, tmp_path):
        path = tmp_path / "bad.ini"
        path.write_text("[analyze]\nk_list =\n")
        rc = cli.main(["--config", str(path), "analyze"])
        assert rc == 2


class TestAnalyze:
    def test_outputs_and_schema(self, tmp_path):
        written = cli.cmd_analyze(TINY, tmp_path, render=True)
        names = {p.name for p in written}
        assert {"throughput_curves.csv", "pareto_frontier.csv",
                "drift_predictions.csv", "throughput_curves.png"} <= names
        comments, rows = _read_csv(tmp_path / "throughput_curves.csv")
        assert comments[0].startswith(f"# schema={cli.SCHEMA_VERSION} config_hash=")
        assert set(rows[0]) == {"n", "k", "p", "throughput"}
        assert len(rows) == len(TINY.analyze_k) * TINY.analyze_p_points


class TestSimulate:
    def test_summary_schema(self, tmp_path):
        cli.cmd_simulate(TINY, tmp_path, render=False)
        comments, rows = _read_csv(tmp_path / "summary.csv")
        assert list(rows[0]) == cli.SUMMARY_COLUMNS
        # delta x {100, 200} x {dbca, dacb, qtra}
        assert len(rows) == 6
        protos = {(r["protocol"], r["variant"], r["C_or_q"]) for r in rows}
        assert protos == {("dbca", "", "1"), ("dacb", "estimated", ""), ("qtra", "", "2")}

    def test_single_replication_omits_ci(self, tmp_path):
        cfg = replace(TINY, replications=1, max_replications=1, n_grid=(100,))
        cli.cmd_simulate(cfg, tmp_path, render=False)
        _, rows = _read_csv(tmp_path / "summary.csv")
        for r in rows:
            assert r["ci_service"] == "" and r["ci_resources"] == "" and r["ci_efficiency"] == ""

    def test_byte_identical_reruns(self, tmp_path):
        cli.cmd_simulate(TINY, tmp_path / "a", trace=True, render=False)
        cli.cmd_simulate(TINY, tmp_path / "b", trace=True, render=False)
        for p in sorted((tmp_path / "a").iterdir()):
            assert p.read_bytes() == (tmp_path / "b" / p.name).read_bytes(), p.name

    def test_parallel_merge_matches_serial(self, tmp_path):
        cli.cmd_simulate(TINY, tmp_path / "serial", parallel=1, render=False)
        cli.cmd_simulate(TINY, tmp_path / "par", parallel=3, render=False)
        assert (tmp_path / "serial/summary.csv").read_bytes() == \
               (tmp_path / "par/summary.csv").read_bytes()

    def test_trace_schema(self, tmp_path):
        cli.cmd_simulate(TINY, tmp_path, trace=True, render=False)
        trace_files = sorted(tmp_path.glob("trace_*.csv"))
        assert len(trace_files) == 6
        _, rows = _read_csv(trace_files[0])
        assert list(rows[0]) == cli.TRACE_COLUMNS

    def test_escalation_recorded(self, tmp_path):
        cfg = replace(TINY, n_grid=(100,), max_ci_fraction=1e-6, max_replications=4)
        cli.cmd_simulate(cfg, tmp_path, render=False)
        comments, rows = _read_csv(tmp_path / "summary.csv")
        assert any("escalated" in c for c in comments)
        assert all(int(r["replications"]) == 4 for r in rows)


class TestValidate:
    def test_negative_control(self):
        # a corrupted closed form must trip the bridge check
        def corrupted(n, p, k, M):
            return expected_throughput(n, p, k, M) * 1.25 + 0.5

        checks = cli.run_validation(cli.ExperimentConfig(), throughput_fn=corrupted, quick=True)
        bridge = next(c for c in checks if c.name == "bridge_mc_vs_closed_form")
        assert not bridge.passed

    def test_quick_grid_passes(self):
        checks = cli.run_validation(cli.ExperimentConfig(), quick=True)
        assert checks and all(c.passed for c in checks), [(c.name, c.detail) for c in checks]

    def test_exit_codes(self, capsys):
        assert cli.cmd_validate(cli.ExperimentConfig(), quick=True) == 0
        out = capsys.readouterr().out
        assert "PASS" in out


class TestEntryPoint:
    def test_subcommand_required(self):
        with pytest.raises(SystemExit):
            cli.build_parser().parse_args([])

    def test_env_var_default_out(self, tmp_path, monkeypatch):
        monkeypatch.setenv(cli.OUT_DIR_ENV, str(tmp_path / "envout"))
        monkeypatch.chdir(tmp_path)
        cfg_path = tmp_path / "cfg.ini"
        cfg_path.write_text(cli.config_to_ini(TINY))
        rc = cli.main(["--config", str(cfg_path), "analyze"])
        assert rc == 0
        assert (tmp_path / "envout" / "throughput_curves.csv").exists()

    def test_console_script(self):
        proc = subprocess.run([sys.executable, "-m", "rachsim.cli", "--help"],
                              capture_output=True, text=True)
        assert proc.returncode == 0
        assert "analyze" in proc.stdout and "validate" in proc.stdout
