import dataclasses

import pytest

from otdebias.docsbook import (
    ERROR,
    ORACLE_MISMATCH,
    PASS,
    TOLERANCE_FAIL,
    ExampleCase,
    coverage,
    load_corpus,
    matches,
    run_case,
    run_examples,
)
from otdebias.docsbook.ops import ADAPTERS
from otdebias.docsbook.oracles import REGISTRY

CORPUS = load_corpus()
SLOW_OPS = {"ablation_run", "run_cli", "run_examples", "hk_recalibrate", "cross_resolution_cv"}


class TestCorpus:
    def test_every_op_has_three_cases(self):
        cov = coverage(CORPUS)
        assert set(cov) == set(ADAPTERS)
        assert min(cov.values()) >= 3

    def test_oracles_registered(self):
        for case in CORPUS:
            assert case.oracle is None or case.oracle in REGISTRY

    def test_provenance_tags_present(self):
        assert any(c.provenance == "PAPER" for c in CORPUS)
        assert any(c.provenance == "DERIVED" and c.oracle for c in CORPUS)

    def test_full_corpus_passes(self):
        report = run_examples(CORPUS, threads=4)
        assert report.failures() == []
        assert report.counts()[PASS] == len(CORPUS)


def _perturb(value, tol):
    return value + 10 * tol + 1e-3 * abs(value) + 1.0


FAST_NUMERIC = [c for c in CORPUS
                if c.op not in SLOW_OPS and c.compare in ("abs", "rel")
                and isinstance(c.expected, (int, float)) and not isinstance(c.expected, bool)]


class TestSensitivity:
    @pytest.mark.parametrize("case", FAST_NUMERIC, ids=lambda c: f"{c.op}:{c.case}")
    def test_perturbed_expectation_fails(self, case):
        bad = dataclasses.replace(case, expected=_perturb(case.expected, case.tolerance))
        assert run_case(bad).status == TOLERANCE_FAIL

    def test_oracle_disagreement_is_distinct(self):
        case = ExampleCase("sinkhorn", "large eps vs exact",
                           {"a": [0.5, 0.25, 0.25], "b": [0.25, 0.25, 0.5],
                            "cost": [[0, 1, 4], [1, 0, 1], [4, 1, 0]], "eps": 1.0,
                            "denominator": 4},
                           expected=0.5, tolerance=1e-3, provenance="DERIVED",
                           oracle="exact_ot_grid")
        assert run_case(case).status == ORACLE_MISMATCH

    def test_unknown_op_is_error(self):
        assert run_case(ExampleCase("nope", "x", {}, 0)).status == ERROR

    def test_expected_exception(self):
        case = ExampleCase("tensor_new", "bad extent", {"shape": [0]}, "ShapeError",
                           compare="error")
        assert run_case(case).status == PASS
        wrong = dataclasses.replace(case, expected="DataError")
        assert run_case(wrong).status == ERROR

    def test_bad_case_fields(self):
        with pytest.raises(ValueError):
            ExampleCase("x", "y", {}, 0, provenance="GUESS")
        with pytest.raises(ValueError):
            ExampleCase("x", "y", {}, 0, compare="approx")

    def test_order_independent_of_threads(self):
        subset = [c for c in CORPUS if c.op not in SLOW_OPS]
        a = run_examples(subset, threads=1).as_dict()
        b = run_examples(subset, threads=4).as_dict()
        assert a == b


class TestMatches:
    def test_nested(self):
        assert matches({"a": [1.0, 2.0]}, {"a": [1.0, 2.0 + 1e-10]}, 1e-9)
        assert not matches({"a": [1.0]}, {"a": [1.0, 2.0]}, 1.0)
        assert not matches({"a": 1.0}, {"b": 1.0}, 1.0)

    def test_relative_and_order_modes(self):
        assert matches(101.0, 100.0, 0.011, "rel")
        assert not matches(102.0, 100.0, 0.011, "rel")
        assert matches(0.5, 1.0, 0, "lt")
        assert not matches(1.0, 1.0, 0, "lt")
        assert matches(1.0, 1.0, 0, "le")
