from pathlib import Path

import pytest
import yaml
from semver import Version

from gnn_transfer.exceptions import (
    GnnTransferException,
    InvalidDatasetException,
    UnsupportedVersionException,
)
from gnn_transfer.utils import dump_yaml, load_meta, load_yaml
from tests import create_files

SUPPORTED = Version.parse("1.0.0")


def test_load_yaml(tmp_path: Path) -> None:
    create_files(
        tmp_path,
        {"data/gcn.yml": {"model": "gcn"}},
        {"data/gin.yaml": {"model": "gin"}},
        {"data/something.txt": {"foo": "bar"}},
    )
    assert load_yaml(tmp_path / "data/gcn.yaml") == {"model": "gcn"}
    assert load_yaml(tmp_path / "data/gcn.yml") == {"model": "gcn"}
    assert load_yaml(tmp_path / "data/gin.yaml") == {"model": "gin"}
    assert load_yaml(tmp_path / "data/gin") == {"model": "gin"}
    assert load_yaml(tmp_path / "data/something.txt") == {"foo": "bar"}
    with pytest.raises(FileNotFoundError):
        _ = load_yaml(tmp_path / "data/something.yaml")
    with pytest.raises(FileNotFoundError):
        _ = load_yaml(tmp_path / "data/something.yml")


def test_load_yaml_invalid(tmp_path: Path) -> None:
    create_files(
        tmp_path,
        {"data/multi-doc.yml": "---\nhello: world\n---\nfoo: bar\n"},
        {"data/invalid.yaml": "{This is not a valid\nyaml document]\n"},
    )
    with pytest.raises(GnnTransferException, match="contains multiple yaml documents"):
        _ = load_yaml(tmp_path / "data/multi-doc.yml")
    with pytest.raises(GnnTransferException, match="is not a valid yaml document"):
        _ = load_yaml(tmp_path / "data/invalid.yml")


def test_dump_yaml(tmp_path: Path) -> None:
    path = tmp_path / "nested" / "dir" / "out.yaml"
    dump_yaml(path, {"b": 1, "a": [1.5, "x"]})
    assert path.read_text().splitlines()[0] == "b: 1"
    assert yaml.safe_load(path.read_text()) == {"b": 1, "a": [1.5, "x"]}


def test_load_meta(tmp_path: Path) -> None:
    create_files(
        tmp_path,
        {"ok/meta.yaml": {"version": "1.3.0", "kind": "node_graph"}},
        {"future/meta.yaml": {"version": "2.0.0"}},
        {"noversion/meta.yaml": {"kind": "node_graph"}},
        {"list/meta.yaml": [1, 2]},
        {"broken/meta.yaml": "{not yaml]\n"},
    )
    assert load_meta(tmp_path / "ok/meta.yaml", SUPPORTED)["kind"] == "node_graph"
    with pytest.raises(UnsupportedVersionException, match=r"supported: 1\.x"):
        load_meta(tmp_path / "future/meta.yaml", SUPPORTED)
    with pytest.raises(InvalidDatasetException, match="missing version field"):
        load_meta(tmp_path / "noversion/meta.yaml", SUPPORTED)
    with pytest.raises(InvalidDatasetException, match="must be a mapping"):
        load_meta(tmp_path / "list/meta.yaml", SUPPORTED)
    with pytest.raises(InvalidDatasetException, match="not a valid yaml document"):
        load_meta(tmp_path / "broken/meta.yaml", SUPPORTED)
    with pytest.raises(InvalidDatasetException, match="missing meta file"):
        load_meta(tmp_path / "absent/meta.yaml", SUPPORTED)
