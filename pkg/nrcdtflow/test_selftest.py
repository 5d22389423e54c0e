import numpy as np
import pytest

from nrcdtflow.experiments import selftest as selftest_module
from nrcdtflow.experiments.selftest import SUITES, SelftestReport, SuiteResult, selftest
from nrcdtflow.transforms import nrcdt


@pytest.mark.unit
class TestReport:
    def test_expect(self):
        result = SuiteResult("demo")
        result.expect(True, "never shown")
        result.expect(False, "broken")
        assert result.checks == 2
        assert result.failures == ["broken"]
        assert not result.passed

    def test_summary(self):
        report = SelftestReport([SuiteResult("a", checks=3), SuiteResult("b", checks=1, failures=["x"])])
        assert not report.passed
        lines = report.summary().splitlines()
        assert lines[0].startswith("PASS a: 3 checks, 0 failures")
        assert lines[1].startswith("FAIL b: 1 checks, 1 failures")
        assert lines[2] == "    x"


@pytest.mark.integration
class TestSuites:
    @pytest.mark.parametrize("name", sorted(SUITES))
    def test_suite_passes(self, name):
        result = SUITES[name](np.random.default_rng(5))
        assert result.passed, result.failures
        assert result.checks > 0

    def test_selected_suites_in_order(self):
        report = selftest(["bounds", "isometry"], seed=3)
        assert [r.name for r in report.results] == ["bounds", "isometry"]
        assert report.passed

    def test_unknown_suite(self):
        with pytest.raises(KeyError):
            selftest(["speed"])

    def test_disabled_guard_is_caught(self, monkeypatch):
        monkeypatch.setattr(nrcdt, "EPS_STD", -1.0)
        report = selftest(["normalization"])
        assert not report.passed

    def test_crashing_suite_is_reported(self, monkeypatch):
        def explode(rng):
            raise RuntimeError("boom")

        monkeypatch.setitem(selftest_module.SUITES, "isometry", explode)
        report = selftest(["isometry"])
        assert not report.passed
        assert report.results[0].failures == ["RuntimeError: boom"]
