#!/usr/bin/env python3
"""
Tests for the verification suites and their reports.
"""

import io

import pytest

from mhh.config import RunConfig
from mhh.verify import SUITES, print_summary, run_suite

REPORT_KEYS = {"suite", "prime", "cells_checked", "failures", "warnings", "notes"}


def config(suite, **overrides):
    values = {"command": "verify", "suite": suite, "prime": 2}
    values.update(overrides)
    return RunConfig(**values)


class TestQuickSuites:
    """Test the suites that finish in well under a second."""

    def test_registry(self):
        """Test that every suite is registered under its own name."""
        assert set(SUITES) == {
            "torsion-products", "reduced-ring", "d1-formula", "cube-contractibility",
            "product-laws", "intro-relations", "bockstein-homology", "etale", "odd-pages",
            "pullback", "properties", "torsion-witness",
        }

    def test_intro_relations(self):
        """Test that both relations hold and the report has the standard keys."""
        report = run_suite("intro-relations", config("intro-relations"))
        assert set(report) == REPORT_KEYS
        assert report["failures"] == []
        assert report["warnings"] == []
        assert report["cells_checked"] == 2

    def test_intro_relations_other_prime_warns(self):
        """Test that a prime other than 2 is checked at p=2 with a warning."""
        report = run_suite("intro-relations", config("intro-relations", prime=3))
        assert report["failures"] == []
        assert len(report["warnings"]) == 1

    @pytest.mark.parametrize("p", [2, 3])
    def test_torsion_witness(self, p):
        """Test that the witness certifies and the control is rejected."""
        report = run_suite("torsion-witness", config("torsion-witness", prime=p))
        assert report["failures"] == []
        assert report["notes"]["certificate"]["valid"]

    def test_d1_formula(self):
        """Test the face differential on tau_i pairs."""
        assert run_suite("d1-formula", config("d1-formula"))["failures"] == []

    @pytest.mark.parametrize("p", [2, 3])
    def test_cube_contractibility(self, p):
        """Test that small f-cubes are acyclic."""
        report = run_suite("cube-contractibility",
                           config("cube-contractibility", prime=p, f_support_max=1, f_value_max=2))
        assert report["failures"] == []
        assert report["cells_checked"] == 8

    def test_product_laws(self):
        """Test the chi law and that the signed split placement survives."""
        report = run_suite("product-laws", config("product-laws", f_support_max=1, f_value_max=2))
        assert report["failures"] == []
        assert "signed K(S+u, T+t, f, g) + K(S+t, T+u, f, g)" in report["notes"]["consistent_placements"]

    def test_torsion_products(self):
        """Test Tor over exterior and polynomial algebras."""
        assert run_suite("torsion-products", config("torsion-products", filtration_max=5))["failures"] == []

    def test_odd_pages_skip_at_two(self):
        """Test that odd-pages warns and passes at p=2."""
        report = run_suite("odd-pages", config("odd-pages"))
        assert report["failures"] == []
        assert report["warnings"][0]["check"] == "prime"

    def test_unknown_suite(self):
        """Test that an unknown suite raises."""
        with pytest.raises(ValueError, match="unknown suite"):
            run_suite("motivic", config("motivic"))


@pytest.mark.slow
class TestLongSuites:
    """Test the heavier suites on small windows."""

    @pytest.mark.parametrize("p", [2, 3])
    def test_bockstein_homology(self, p):
        """Test that H^D is the truncated polynomial algebra."""
        assert run_suite("bockstein-homology", config("bockstein-homology", prime=p, stem_max=12))["failures"] == []

    def test_etale(self):
        """Test the etale Hilbert function."""
        report = run_suite("etale", config("etale", stem_max=12, weight_min=-2, weight_max=4))
        assert report["failures"] == []

    def test_reduced_ring(self):
        """Test Tor of the mod tau algebra against the reduced ring."""
        assert run_suite("reduced-ring", config("reduced-ring", stem_max=6))["failures"] == []

    def test_odd_pages(self):
        """Test the p=3 pages on a small window."""
        report = run_suite("odd-pages", config("odd-pages", prime=3, stem_max=8, weight_min=-2, weight_max=4))
        assert report["failures"] == []

    def test_pullback(self):
        """Test the p=2 pullback square."""
        report = run_suite("pullback", config("pullback", stem_max=8, weight_min=-2, weight_max=4))
        assert report["failures"] == []

    def test_properties(self):
        """Test the randomized laws with few cases."""
        report = run_suite("properties", config("properties", cases=10, seed=3))
        assert report["failures"] == []
        assert report["notes"] == {"cases": 10, "seed": 3}

    @pytest.mark.parametrize("p", [3, 5])
    def test_properties_odd_prime(self, p):
        """Test the randomized laws, including d^{p-1} Leibniz, at odd primes."""
        report = run_suite("properties", config("properties", prime=p, cases=10, seed=3))
        assert report["failures"] == []
        assert report["cells_checked"] >= 10 * 12


class TestSummary:
    """Test the printed summary."""

    def test_passed(self):
        """Test the success banner."""
        stream = io.StringIO()
        print_summary(run_suite("intro-relations", config("intro-relations")), stream)
        text = stream.getvalue()
        assert "VERIFICATION SUMMARY" in text
        assert "RESULT: ALL CHECKS PASSED" in text

    def test_failed(self):
        """Test the failure banner lists the failure."""
        report = {"suite": "etale", "prime": 2, "cells_checked": 1, "warnings": [], "notes": {},
                  "failures": [{"check": "hilbert", "message": "etale dim at (4, 0) is 2"}]}
        stream = io.StringIO()
        print_summary(report, stream)
        text = stream.getvalue()
        assert "[FAIL] [hilbert] etale dim at (4, 0) is 2" in text
        assert "RESULT: VERIFICATION FAILED" in text
