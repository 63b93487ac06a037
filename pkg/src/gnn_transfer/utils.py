"""
    Helpers for the yaml files of configs, dataset meta files and sidecars
"""

import logging
from pathlib import Path
from typing import Any

import yaml
from semver import Version
from yaml.composer import ComposerError
from yaml.parser import ParserError
from yaml.scanner import ScannerError

from .exceptions import (
    InvalidConfigException,
    InvalidDatasetException,
    UnsupportedVersionException,
)

log = logging.getLogger(__name__)

YAML_SUFFIXES = (".yaml", ".yml")


def _find_yaml(path: Path) -> Path:
    """
    Return path itself if it exists, otherwise the first sibling with one of
    the yaml suffixes, so that `configs/gcn` finds `configs/gcn.yml`

    Raises:
        FileNotFoundError: listing every path tried
    """
    candidates = [path] + [
        path.with_suffix(x) for x in YAML_SUFFIXES if x != path.suffix
    ]
    for candidate in candidates:
        if candidate.is_file():
            return candidate
    tried = ", ".join(str(x) for x in candidates)
    raise FileNotFoundError(f"Can't find yaml file. Tried: {tried}")


def load_yaml(path: Path) -> Any:
    """
    Parse a single-document yaml file, probing alternate suffixes

    Raises:
        FileNotFoundError: if no candidate file exists
        InvalidConfigException: on multiple documents or a syntax error
    """
    found = _find_yaml(path)
    log.debug("Loading %s", found)
    with found.open("r", encoding="utf-8") as yaml_file:
        try:
            return yaml.safe_load(yaml_file)
        except ComposerError as exc:
            raise InvalidConfigException(
                f"{found} contains multiple yaml documents"
            ) from exc
        except (ParserError, ScannerError) as exc:
            raise InvalidConfigException(
                f"{found} is not a valid yaml document"
            ) from exc


def dump_yaml(path: Path, content: Any) -> None:
    """
    Write a single YAML document, creating parent directories as needed
    """
    log.debug("Writing %s", path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(yaml.safe_dump(content, sort_keys=False), encoding="utf-8")


def load_meta(path: Path, supported: Version) -> dict[str, Any]:
    """
    Load the meta file of an on-disk artifact and make sure it was written by a
    compatible format version.

    Args:
        path (Path): The path to the meta file.
        supported (Version): The format version written by this package. Any
            version sharing the same major number can be read.

    Returns:
        dict: The parsed meta mapping.

    Raises:
        InvalidDatasetException: If the file is missing, unparsable or has no version.
        UnsupportedVersionException: If the major version differs.
    """
    try:
        meta = load_yaml(path)
    except FileNotFoundError as exc:
        raise InvalidDatasetException(f"{path}: missing meta file") from exc
    except InvalidConfigException as exc:
        raise InvalidDatasetException(str(exc)) from exc
    if not isinstance(meta, dict):
        raise InvalidDatasetException(f"{path}: meta must be a mapping")
    try:
        version = Version.parse(str(meta["version"]))
    except KeyError as exc:
        raise InvalidDatasetException(f"{path}: missing version field") from exc
    except ValueError as exc:
        raise InvalidDatasetException(
            f"{path}: version {meta['version']!r} is not valid semver"
        ) from exc
    if version.major != supported.major:
        raise UnsupportedVersionException(
            f"{path}: unsupported format version {version} (supported: {supported.major}.x)"
        )
    return meta
