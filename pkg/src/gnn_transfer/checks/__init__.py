"""
    Pluggable checks over loaded datasets.

    A suite is a package with a `node_graph` and a `graph_dataset` module;
    every `check_*` function in them takes one dataset of that kind and
    yields the problems it finds as Warn or Fail results.
"""

import importlib
import logging
from collections.abc import Callable, Iterable, Iterator
from functools import total_ordering
from inspect import getmembers, isfunction
from typing import Any, ClassVar, Optional, Union

from ..graph import GraphDataset, NodeGraph

log = logging.getLogger(__name__)

Target = Union[NodeGraph, GraphDataset]
DEFAULT_SUITE = "gnn_transfer.checks"

# check module name for each dataset kind
SUITE_MODULES: dict[type, str] = {
    NodeGraph: "node_graph",
    GraphDataset: "graph_dataset",
}


@total_ordering
class CheckResult:
    """
    A problem found by a check, ordered by severity
    """

    severity: ClassVar[int] = 0
    kind: ClassVar[str] = "unknown"

    def __init__(
        self,
        reason: str,
        check: Optional[str] = None,
        origin: Optional[Target] = None,
    ):
        self.reason = reason
        self.check = check
        self.origin = origin

    @property
    def fatal(self) -> bool:
        return self.severity >= Fail.severity

    def _key(self) -> tuple[str, str, Optional[str]]:
        return self.kind, self.reason, self.check

    def __str__(self) -> str:
        return f"{self.kind}: {self.check}({self.origin!r}): {self.reason}"

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}({self.reason!r}, check={self.check})"

    def __int__(self) -> int:
        return self.severity

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, CheckResult):
            return NotImplemented
        # datasets compare by identity: they hold numpy arrays
        return self._key() == other._key() and self.origin is other.origin

    def __lt__(self, other: "CheckResult") -> bool:
        return self.severity < other.severity

    def __hash__(self) -> int:
        return hash(self._key())


class Warn(CheckResult):
    """
    A problem training can live with
    """

    severity = 40
    kind = "warning"


class Fail(CheckResult):
    """
    A problem that makes the dataset unusable for training
    """

    severity = 90
    kind = "failure"


Check = Callable[[Any], Iterable[CheckResult]]


def _discover(module: Any, skip: Iterable[str]) -> list[Check]:
    found = []
    for name, function in getmembers(module, isfunction):
        if not name.startswith("check_"):
            continue
        if name in skip:
            log.debug("Skipping %s", name)
            continue
        found.append(function)
    return found


def get_checks(
    suite_name: str = DEFAULT_SUITE, skip_tests: Optional[list[str]] = None
) -> dict[str, list[Check]]:
    """
    Discover the checks of a suite, keyed by check module name. A suite
    without a module for some dataset kind has no checks for it.
    """
    result: dict[str, list[Check]] = {}
    for module_name in SUITE_MODULES.values():
        try:
            module = importlib.import_module(f"{suite_name}.{module_name}")
        except ModuleNotFoundError:
            log.debug("Suite %s has no %s module", suite_name, module_name)
            result[module_name] = []
            continue
        result[module_name] = _discover(module, skip_tests or ())
        log.debug(
            "Found %d %s checks in %s",
            len(result[module_name]),
            module_name,
            suite_name,
        )
    return result


def run_check(check: Check, target: Target) -> Iterator[CheckResult]:
    """
    Run one check, tagging its results with the check name and the dataset
    """
    log.debug("Running %s on %r", check.__name__, target)
    for result in check(target):
        result.check = check.__name__
        result.origin = target
        yield result


def run_suite(
    targets: Iterable[Target],
    suite_name: str = DEFAULT_SUITE,
    skip_tests: Optional[list[str]] = None,
) -> Iterator[CheckResult]:
    checks = get_checks(suite_name, skip_tests=skip_tests)
    for target in targets:
        module_name = SUITE_MODULES.get(type(target))
        if module_name is None:
            log.warning("No checks for %r", target)
            continue
        for check in checks.get(module_name, []):
            yield from run_check(check, target)
