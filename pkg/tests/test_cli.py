"""Command-line front end: configuration, commands, report shape."""

import json

import numpy as np
import pytest

from orbitflow.cli import (
    DEFAULT_TOLERANCES,
    RunConfig,
    build_config,
    main,
    make_parser,
    parse_config_file,
)
from orbitflow.errors import ConfigError
from orbitflow.verification import SUITES


class TestRunConfig:
    def test_defaults(self):
        cfg = RunConfig()
        assert cfg.n == 2
        assert np.allclose(cfg.h, [1.0, 0.0, -1.0])
        assert cfg.tolerances == DEFAULT_TOLERANCES

    def test_rejects_nonregular_h_naming_the_pair(self):
        with pytest.raises(ConfigError, match="alpha_12"):
            RunConfig(n=2, h=[1.0, 1.0, -2.0])

    def test_rejects_nonzero_sum(self):
        with pytest.raises(ConfigError, match="sum"):
            RunConfig(n=1, h=[1.0, 1.0])

    def test_rejects_bad_rank(self):
        with pytest.raises(ConfigError):
            RunConfig(n=0)

    def test_rejects_unknown_tolerance_key(self):
        with pytest.raises(ConfigError, match="unknown tolerance"):
            RunConfig(tolerances={"nonsense": 1e-3})

    def test_tolerance_override_merges(self):
        cfg = RunConfig(tolerances={"algebraic": 1e-8})
        assert cfg.tolerances["algebraic"] == 1e-8
        assert cfg.tolerances["flow"] == DEFAULT_TOLERANCES["flow"]


class TestConfigLayers:
    def test_file_then_json_then_flags(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("# comment\nn=2\nseed=5\ntol.algebraic=1e-9\n")
        parser = make_parser()
        args = parser.parse_args(
            ["verify", "--config", str(path), "--json-config", '{"seed": 7}', "--seed", "9"]
        )
        cfg = build_config(args)
        assert cfg.n == 2
        assert cfg.seed == 9  # flags win over json over file
        assert cfg.tolerances["algebraic"] == 1e-9

    def test_h_flag_parsing(self):
        parser = make_parser()
        args = parser.parse_args(["spectrum", "--n", "2", "--H", "2,0,-2"])
        cfg = build_config(args)
        assert np.allclose(cfg.h, [2.0, 0.0, -2.0])

    def test_malformed_file_line(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("n 2\n")
        with pytest.raises(ConfigError):
            parse_config_file(path)

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("frobnicate=1\n")
        parser = make_parser()
        args = parser.parse_args(["verify", "--config", str(path)])
        with pytest.raises(ConfigError):
            build_config(args)

    def test_config_error_exit_code(self, capsys, tmp_path):
        rc = main(["verify", "--n", "2", "--H", "1,1,-2", "--out", str(tmp_path / "r.json")])
        assert rc == 2
        assert "config error" in capsys.readouterr().err


class TestCommands:
    def test_spectrum_counts(self, tmp_path):
        out = tmp_path / "spec.json"
        rc = main(["spectrum", "--n", "2", "--out", str(out)])
        assert rc == 0
        blob = json.loads(out.read_text())
        assert len(blob["spectra"]) == 3
        assert len(blob["hessians"]) == 6
        assert all(len(hrow["rows"]) == 2 for hrow in blob["hessians"])
        # the degenerate root at the first singularity is flagged
        first = blob["spectra"][0]["rates"]
        degenerate = [r for r in first if r["degenerate"]]
        assert [tuple(r["root"]) for r in degenerate] == [(2, 3)]
        assert (tmp_path / "spec.csv").exists()

    def test_spectrum_rank_one_rates(self, tmp_path):
        out = tmp_path / "spec1.json"
        rc = main(["spectrum", "--n", "1", "--H", "1,-1", "--out", str(out)])
        assert rc == 0
        blob = json.loads(out.read_text())
        rates = [r["rate"] for r in blob["spectra"][0]["rates"]]
        assert rates == [4.0]

    def test_flow_csv(self, tmp_path, capsys):
        out = tmp_path / "traj.csv"
        rc = main(["flow", "--n", "2", "--seed", "3", "--out", str(out), "--steps", "6000"])
        assert rc == 0
        lines = out.read_text().splitlines()
        assert lines[0].split(",")[:5] == ["t", "re_f", "im_f", "orbit_residual", "z_norm"]
        body = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
        assert np.all(np.diff(body[:, 1]) <= 1e-12)   # monotone real height
        assert body[:, 3].max() < 1e-8                # orbit residual
        assert "limit critical point" in capsys.readouterr().err

    def test_thimble_summary(self, tmp_path, capsys):
        out = tmp_path / "th.json"
        rc = main([
            "thimble", "--n", "2", "--j", "1", "--sign", "-", "--c-offset", "0.4",
            "--directions", "8", "--seed", "1", "--out", str(out),
        ])
        assert rc == 0
        blob = json.loads(out.read_text())
        summary = blob["meta"]["summary"]
        assert summary["max_graph_residual"] < 1e-6
        assert summary["max_f2_drift"] < 1e-8
        assert summary["max_omega"] < 1e-5
        assert (tmp_path / "th.csv").exists()
        assert "thimble:" in capsys.readouterr().out


class TestVerifyReport:
    def test_rank_one_report_structure_and_completeness(self, tmp_path):
        out = tmp_path / "report.json"
        rc = main(["verify", "--n", "1", "--H", "1,-1", "--seed", "11", "--out", str(out)])
        blob = json.loads(out.read_text())
        assert rc == 0
        assert blob["summary"]["failures"] == 0
        # every suite appears once, in deterministic order
        assert [s["name"] for s in blob["suites"]] == [name for name, _ in SUITES]
        counts = {s["name"]: len(s["checks"]) for s in blob["suites"]}
        assert counts == {
            "cycles": 3,
            "flow": 5,
            "graphs": 6,
            "lie-core": 6,
            "orbit": 4,
            "thimble": 4,
        }
        names = [c["name"] for s in blob["suites"] for c in s["checks"]]
        assert len(names) == len(set(names)) == 28
        for s in blob["suites"]:
            for c in s["checks"]:
                assert c["reference"]
                assert c["status"] in ("pass", "fail")
