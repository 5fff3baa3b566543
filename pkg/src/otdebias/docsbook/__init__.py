"""Executable worked examples: a JSON corpus checked against the public API.

Each case names an operation, its inputs, the expected result and a
tolerance. Cases with an ``oracle`` first recompute the answer independently
(see :mod:`otdebias.docsbook.oracles`); disagreement between the library and
the oracle is reported as ``ORACLE_MISMATCH``, separately from a plain
``TOLERANCE_FAIL`` against the stored expectation.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

PASS = "PASS"
TOLERANCE_FAIL = "TOLERANCE_FAIL"
ORACLE_MISMATCH = "ORACLE_MISMATCH"
ERROR = "ERROR"

CORPUS_DIR = Path(__file__).with_name("corpus")
PROVENANCE = ("PAPER", "TRIVIAL", "DERIVED")
COMPARES = ("abs", "rel", "eq", "lt", "le", "gt", "ge", "error")


@dataclass(frozen=True)
class ExampleCase:
    op: str
    case: str
    inputs: dict
    expected: object
    tolerance: float = 0.0
    provenance: str = "TRIVIAL"
    compare: str = "abs"
    oracle: str | None = None

    def __post_init__(self):
        if self.provenance not in PROVENANCE:
            raise ValueError(f"{self.op}/{self.case}: bad provenance {self.provenance!r}")
        if self.compare not in COMPARES:
            raise ValueError(f"{self.op}/{self.case}: bad compare mode {self.compare!r}")

    @classmethod
    def from_dict(cls, data):
        return cls(**data)


@dataclass
class CaseResult:
    op: str
    case: str
    status: str
    detail: str = ""


@dataclass
class Report:
    results: list = field(default_factory=list)

    @property
    def ok(self):
        return all(r.status == PASS for r in self.results)

    def counts(self):
        out = {s: 0 for s in (PASS, TOLERANCE_FAIL, ORACLE_MISMATCH, ERROR)}
        for r in self.results:
            out[r.status] += 1
        return out

    def failures(self):
        return [r for r in self.results if r.status != PASS]

    def as_dict(self):
        return {
            "ok": self.ok,
            "counts": self.counts(),
            "results": [asdict(r) for r in self.results],
        }


def load_corpus(paths=None):
    """Read every ``*.json`` corpus file (sorted by name) into cases."""
    if paths is None:
        paths = sorted(CORPUS_DIR.glob("*.json"))
    cases = []
    for path in paths:
        for raw in json.loads(Path(path).read_text(encoding="utf-8")):
            cases.append(ExampleCase.from_dict(raw))
    return cases


def _to_plain(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    if isinstance(x, tuple):
        return list(x)
    return x


def matches(actual, expected, tol, mode="abs"):
    """Structural comparison of JSON-like values under ``mode``."""
    actual, expected = _to_plain(actual), _to_plain(expected)
    if mode == "eq":
        return actual == expected
    if mode in ("lt", "le", "gt", "ge"):
        a, e = float(actual), float(expected)
        return {"lt": a < e, "le": a <= e, "gt": a > e, "ge": a >= e}[mode]
    if isinstance(expected, dict):
        return (isinstance(actual, dict) and set(actual) == set(expected)
                and all(matches(actual[k], expected[k], tol, mode) for k in expected))
    if isinstance(expected, list):
        return (isinstance(actual, list) and len(actual) == len(expected)
                and all(matches(a, e, tol, mode) for a, e in zip(actual, expected)))
    if isinstance(expected, bool) or isinstance(expected, str) or expected is None:
        return actual == expected
    if not isinstance(actual, (int, float)) or isinstance(actual, bool):
        return False
    diff = abs(float(actual) - float(expected))
    if mode == "rel":
        return diff <= tol * max(abs(float(expected)), 1e-300)
    return diff <= tol


def run_case(case):
    from .ops import ADAPTERS
    from .oracles import REGISTRY

    if case.op not in ADAPTERS:
        return CaseResult(case.op, case.case, ERROR, f"no adapter for op {case.op!r}")
    try:
        actual = ADAPTERS[case.op](case.inputs)
    except Exception as exc:  # noqa: BLE001 - every failure is reported, not raised
        if case.compare == "error" and type(exc).__name__ == case.expected:
            return CaseResult(case.op, case.case, PASS)
        return CaseResult(case.op, case.case, ERROR, f"{type(exc).__name__}: {exc}")
    if case.compare == "error":
        return CaseResult(case.op, case.case, TOLERANCE_FAIL,
                          f"expected {case.expected} to be raised, got {_to_plain(actual)!r}")
    if case.oracle is not None:
        try:
            reference = REGISTRY[case.oracle](case.inputs)
        except Exception as exc:  # noqa: BLE001
            return CaseResult(case.op, case.case, ERROR, f"oracle {case.oracle}: {type(exc).__name__}: {exc}")
        mode = "rel" if case.compare == "rel" else "abs"
        if not matches(actual, reference, case.tolerance, mode):
            return CaseResult(case.op, case.case, ORACLE_MISMATCH,
                              f"library {_to_plain(actual)!r} vs oracle {_to_plain(reference)!r}")
    if not matches(actual, case.expected, case.tolerance, case.compare):
        return CaseResult(case.op, case.case, TOLERANCE_FAIL,
                          f"got {_to_plain(actual)!r}, expected {case.expected!r} "
                          f"({case.compare}, tol {case.tolerance})")
    return CaseResult(case.op, case.case, PASS)


def run_examples(corpus, threads=1):
    """Run every case; results keep corpus order whatever the thread count."""
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run_case, corpus))
    else:
        results = [run_case(c) for c in corpus]
    return Report(results)


def coverage(corpus):
    out = {}
    for c in corpus:
        out[c.op] = out.get(c.op, 0) + 1
    return dict(sorted(out.items()))
