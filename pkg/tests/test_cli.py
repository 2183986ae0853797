import csv
import json

import pytest
import typer
from typer.testing import CliRunner

from community_explore.cli import EXIT_CONFIG, EXIT_ERROR, EXIT_SIZE_GUARD, _handle_errors, app, parse_sizes
from community_explore.core.model import make_instance
from community_explore.exceptions import ConfigError

runner = CliRunner()


def _read_csv(path):
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.reader(f))


class TestOfflineCommands:
    def test_allocate(self):
        result = runner.invoke(app, ["allocate", "--sizes", "2,4", "--budget", "3"])
        assert result.exit_code == 0, result.output
        assert "2.75" in result.output

    def test_allocate_fast(self):
        result = runner.invoke(app, ["allocate", "--sizes", "2,3,5,6,8,10", "-K", "20", "--fast"])
        assert result.exit_code == 0, result.output

    def test_bad_sizes_is_a_config_error(self):
        result = runner.invoke(app, ["allocate", "--sizes", "2,x", "--budget", "3"])
        assert result.exit_code == EXIT_CONFIG

    @pytest.mark.parametrize("command", ["allocate", "adaptive-reward", "oracle"])
    def test_non_positive_size_is_a_config_error(self, command):
        result = runner.invoke(app, [command, "--sizes", "0,2", "--budget", "3"])
        assert result.exit_code == EXIT_CONFIG

    def test_library_error_exit_code(self):
        with pytest.raises(typer.Exit) as info:
            with _handle_errors():
                make_instance([0])
        assert info.value.exit_code == EXIT_ERROR

    def test_adaptive_reward(self):
        result = runner.invoke(app, ["adaptive-reward", "--sizes", "2,4", "--budget", "3"])
        assert result.exit_code == 0, result.output
        assert "2.75" in result.output

    def test_oracle(self):
        result = runner.invoke(app, ["oracle", "--sizes", "2,3,4", "--budget", "6"])
        assert result.exit_code == 0, result.output
        assert "greedy matches the oracles" in result.output

    def test_oracle_size_guard(self):
        result = runner.invoke(app, ["oracle", "--sizes", "50,50,50,50,50,50", "--budget", "100"])
        assert result.exit_code == EXIT_SIZE_GUARD


class TestConfiguredCommands:
    def test_experiment_writes_outputs(self, write_config, tmp_path):
        path = write_config(
            {
                "kind": "reward_vs_budget",
                "sizes": [2, 3, 5],
                "budget_range": [4, 6, 2],
                "replications": 3,
                "runner": {"workers": 1},
            }
        )
        out = tmp_path / "results"
        result = runner.invoke(app, ["experiment", "--config", str(path), "--out", str(out)])
        assert result.exit_code == 0, result.output

        rows = _read_csv(out / "reward_vs_budget.csv")
        assert rows[0][-2:] == ["seed", "config_hash"]
        assert len(rows) == 1 + 2 * 4
        summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
        assert summary["kind"] == "reward_vs_budget"
        assert summary["config_hash"] == rows[1][-1]

    def test_experiment_is_byte_stable(self, write_config, tmp_path):
        path = write_config(
            {"kind": "used_budget", "sizes": [2, 3], "budget": 6, "replications": 4, "runner": {"workers": 1}}
        )
        bodies = []
        for name in ("a", "b"):
            out = tmp_path / name
            result = runner.invoke(app, ["experiment", "-c", str(path), "-o", str(out), "--seed", "11"])
            assert result.exit_code == 0, result.output
            bodies.append((out / "used_budget.csv").read_bytes())
        assert bodies[0] == bodies[1]

    def test_regret(self, write_config, tmp_path):
        path = write_config(
            {
                "sizes": [2, 3],
                "budget": 4,
                "replications": 2,
                "variants": ["paired_lcb", "chained_empirical"],
                "runner": {"workers": 1},
            }
        )
        out = tmp_path / "regret"
        result = runner.invoke(app, ["regret", "--config", str(path), "--out", str(out), "--horizon", "6"])
        assert result.exit_code == 0, result.output
        rows = _read_csv(out / "regret.csv")
        assert len(rows) == 1 + 2 * 6
        assert "paired_lcb/nonadaptive" in result.output

    def test_invalid_config(self, write_config):
        path = write_config({"kind": "allocation_distance", "bogus": True})
        result = runner.invoke(app, ["experiment", "--config", str(path)])
        assert result.exit_code == EXIT_CONFIG
        assert "bogus" in result.output


class TestConfigCommands:
    def test_show_json(self, write_config):
        path = write_config({"seed": 42})
        result = runner.invoke(app, ["config", "show", "--config", str(path), "--json"])
        assert result.exit_code == 0, result.output
        assert '"seed": 42' in result.output

    def test_validate(self, write_config):
        result = runner.invoke(app, ["config", "validate", "--config", str(write_config({"budget": 5}))])
        assert result.exit_code == 0, result.output
        assert "config is valid" in result.output

        result = runner.invoke(app, ["config", "validate", "--config", str(write_config({"horizon": -2}))])
        assert result.exit_code == EXIT_CONFIG


class TestParseSizes:
    def test_parses(self):
        assert parse_sizes("2, 3,5") == [2, 3, 5]

    @pytest.mark.parametrize("text", ["", "2;3", "a", "0,3", "2,-1"])
    def test_rejects(self, text):
        with pytest.raises(ConfigError):
            parse_sizes(text)
