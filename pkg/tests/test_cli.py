from pathlib import Path
from typing import Iterator
from unittest.mock import MagicMock, patch

import pytest
import yaml
from _pytest.capture import CaptureFixture

from gnn_transfer.checks import CheckResult
from gnn_transfer.cli import exit_code, main
from gnn_transfer.exceptions import (
    DegenerateSampleException,
    InvalidConfigException,
    NumericException,
    UndefinedMetricException,
)
from gnn_transfer.graph import GraphDataset, NodeGraph
from tests import create_files


def _experiment_config(tmp_path: Path, target: Path, name: str) -> Path:
    config = {
        "name": name,
        "target": str(target),
        "hidden_dim": 8,
        "num_layers": 2,
        "epochs": 4,
        "runs": 2,
        "tail": 2,
        "output": str(tmp_path / "runs" / name),
    }
    create_files(tmp_path, {f"{name}.yaml": config})
    return tmp_path / f"{name}.yaml"


def test_exit_code() -> None:
    assert exit_code(DegenerateSampleException("x")) == 3
    assert exit_code(NumericException("x")) == 2
    assert exit_code(UndefinedMetricException("x")) == 2
    assert exit_code(InvalidConfigException("x")) == 1


def test_cli_generate(tmp_path: Path, capsys: CaptureFixture[str]) -> None:
    create_files(
        tmp_path,
        {
            "gen.yaml": {
                "output": "data",
                "kind": "graph",
                "params": {"n_per_class": 10, "nodes_per_graph": 8},
            }
        },
    )
    with patch("sys.argv", ["gtlab", "generate", str(tmp_path / "gen.yaml")]):
        main()
    captured = capsys.readouterr()
    sidecar = yaml.safe_load(captured.out)
    assert sidecar["config"]["n_per_class"] == 10
    assert (tmp_path / "data" / "meta.yaml").is_file()


def test_cli_generate_preset(tmp_path: Path, capsys: CaptureFixture[str]) -> None:
    output = tmp_path / "preset"
    with patch(
        "sys.argv", ["gtlab", "generate", "-p", "5", "-o", str(output), "-s", "4"]
    ):
        main()
    sidecar = yaml.safe_load(capsys.readouterr().out)
    assert sidecar["config"]["percent_swap"] == 0.95
    assert sidecar["config"]["seed"] == 4
    assert (output / "generation.yaml").is_file()


def test_cli_generate_needs_output(capsys: CaptureFixture[str]) -> None:
    with patch("sys.argv", ["gtlab", "generate", "-p", "5"]):
        with pytest.raises(SystemExit) as exc_info:
            main()
    assert exc_info.value.code == 1
    assert "InvalidConfigException" in capsys.readouterr().err


def test_cli_transfer_report(
    tmp_path: Path, saved_graph_dataset: Path, capsys: CaptureFixture[str]
) -> None:
    config = _experiment_config(tmp_path, saved_graph_dataset, "cli")
    with patch("sys.argv", ["gtlab", "transfer", str(config)]):
        main()
    captured = capsys.readouterr()
    assert " - run-000: transfer_ratio=0.0000" in captured.out
    assert " - run-001:" in captured.out
    report_dir = tmp_path / "report"
    with patch(
        "sys.argv",
        ["gtlab", "report", str(tmp_path / "runs" / "cli"), "-o", str(report_dir)],
    ):
        main()
    captured = capsys.readouterr()
    assert captured.out.splitlines()[0].startswith("model source_task metric")
    assert f"wrote {report_dir / 'report.csv'}" in captured.out
    assert (report_dir / "cli.svg").is_file()


def test_cli_metrics(saved_node_graph: Path, capsys: CaptureFixture[str]) -> None:
    with patch("sys.argv", ["gtlab", "metrics", str(saved_node_graph)]):
        main()
    report = yaml.safe_load(capsys.readouterr().out)
    assert report["I_S"] is None
    assert 0.0 < report["modularity"] < 1.0


def test_cli_metrics_missing(tmp_path: Path, capsys: CaptureFixture[str]) -> None:
    with patch("sys.argv", ["gtlab", "metrics", str(tmp_path)]):
        with pytest.raises(SystemExit) as exc_info:
            main()
    assert exc_info.value.code == 1
    assert "missing meta file" in capsys.readouterr().err


def test_cli_sweep(tmp_path: Path, capsys: CaptureFixture[str]) -> None:
    output = tmp_path / "sweep"
    with patch(
        "sys.argv", ["gtlab", "sweep", "m", "1", "2", "-n", "2", "-o", str(output)]
    ):
        main()
    captured = capsys.readouterr()
    assert "m=1.0: 1.9333 +- 0.0000" in captured.out
    assert (output / "sweep_m.csv").is_file()


def test_cli_check(saved_graph_dataset: Path, capsys: CaptureFixture[str]) -> None:
    with patch("sys.argv", ["gtlab", "check", str(saved_graph_dataset)]):
        main()
    assert "failure" not in capsys.readouterr().out


@patch("gnn_transfer.cli.get_checks")
def test_cli_check_list(mock_checks: MagicMock, capsys: CaptureFixture[str]) -> None:
    def check_foo(_: NodeGraph) -> Iterator[CheckResult]:
        """This is the check_foo description"""
        raise StopIteration

    def check_bar(_: GraphDataset) -> Iterator[CheckResult]:
        """This is the check_bar description"""
        raise StopIteration

    mock_checks.return_value = {"node_graph": [check_foo], "graph_dataset": [check_bar]}
    with patch("sys.argv", ["gtlab", "check", "--list"]):
        main()
    captured = capsys.readouterr()
    assert "node_graph checks:" in captured.out
    assert " - foo: This is the check_foo description" in captured.out
    assert "This is the check_bar description" in captured.out


def test_cli_help(capsys: CaptureFixture[str]) -> None:
    with patch("sys.argv", ["gtlab"]):
        main()
    captured = capsys.readouterr()
    assert "usage: gtlab" in captured.out
