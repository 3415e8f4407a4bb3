"""
Verification Suites
Each suite is a validator that collects failures instead of raising, so a run
always ends in a report {suite, prime, cells_checked, failures, warnings, notes}.
"""

import logging
import random
import sys
from collections import Counter
from typing import Any, Callable, Dict, List, Optional, TextIO

from mhh.bar_complex import (
    BarChain, BarComplex, BarWord, coproduct_gamma, steenrod_bar_complex, synthetic_algebra,
    torsion_product_closed_form,
)
from mhh.config import RunConfig
from mhh.cube_complex import (
    ChiIndex, DHomology, K_coeff, SupportFunction, apply_D, chi_indices, cube_algebra,
    cube_complex_for, dchi_basis_check, epsilon_closed_form, EPSILON_PLACEMENTS,
    f_cube_homology, fracture_check, subset_sign, support_functions, truncated_mu_table,
)
from mhh.dual_steenrod import SteenrodVariant, Variant, steenrod_normalize, steenrod_presentation
from mhh.graded_algebra import AlgebraSpec, Bounds, Element, GeneratorKind
from mhh.mhh_rings import (
    EtaleRing, IntegralRing, ReducedRing, betti_comparison, certify_torsion, confluence_check,
    intro_relations, pullback_check, torsion_witness,
)
from mhh.spectral_sequence import (
    PageComplex, apply_d_pminus1, check_collapse_integral, check_collapse_reduced, compute_Ep,
    ker_im_intersection, localized_homology_check, page_algebra, tau_power_injective,
)

logger = logging.getLogger(__name__)


class SuiteValidator:
    """Base class: run() resets state, calls validate() and reports pass/fail."""

    name = ""

    def __init__(self, config: RunConfig):
        self.config = config
        self.p = config.prime
        self.errors: List[Dict[str, Any]] = []
        self.warnings: List[Dict[str, Any]] = []
        self.notes: Dict[str, Any] = {}
        self.cells_checked = 0

    def reset(self):
        """Reset validation state."""
        self.errors = []
        self.warnings = []
        self.notes = {}
        self.cells_checked = 0

    def add_error(self, check: str, message: str, **detail):
        """Add an error."""
        self.errors.append({"check": check, "message": message, "severity": "ERROR", **detail})

    def add_warning(self, check: str, message: str):
        """Add a warning."""
        self.warnings.append({"check": check, "message": message, "severity": "WARNING"})

    def add_failures(self, check: str, failures: List[Dict[str, Any]]):
        for failure in failures:
            cell = failure.get("cell", failure.get("case"))
            self.add_error(check, f"{check} mismatch at {cell}", **failure)

    def validate(self):
        raise NotImplementedError

    def run(self) -> bool:
        self.reset()
        logger.info(f"suite {self.name} p={self.p}: starting")
        self.validate()
        logger.info(f"suite {self.name} p={self.p}: {self.cells_checked} checked, "
                    f"{len(self.errors)} failures")
        return not self.errors

    def report(self) -> Dict[str, Any]:
        return {
            "suite": self.name,
            "prime": self.p,
            "cells_checked": self.cells_checked,
            "failures": self.errors,
            "warnings": self.warnings,
            "notes": self.notes,
        }

    @property
    def window(self):
        return self.config.weight_window


class TorsionProductsValidator(SuiteValidator):
    """Brute-force Tor over Lambda(x) and S(x) against the closed forms."""

    name = "torsion-products"
    cases = ((GeneratorKind.EXTERIOR, 1), (GeneratorKind.POLYNOMIAL, 2))

    def validate(self):
        top = 10 if self.config.filtration_max is None else self.config.filtration_max
        for kind, degree in self.cases:
            complex_ = BarComplex(synthetic_algebra(self.p, kind, degree))
            bounds = Bounds(top * (degree + 1), weight_min=0, weight_max=0, filtration_max=top)
            found = complex_.tor_E2(bounds)
            expected = torsion_product_closed_form(kind, degree, top)
            keys = {k for k, _ in found.items()} | {k for k, _ in expected.items()}
            self.cells_checked += len(keys)
            for failure in found.mismatches(expected, keys):
                self.add_error(kind.value, f"Tor over {kind.value}(x) differs at {failure['cell']}",
                               **failure)
            if kind is GeneratorKind.EXTERIOR:
                self._check_coproduct(complex_, top)

    def _check_coproduct(self, complex_: BarComplex, top: int):
        """Deconcatenating [x|...|x] splits filtration like the divided-power coproduct."""
        for k in range(top + 1):
            word = complex_.word(*([{"x": 1}] * k))
            split = sorted((len(a.letters), len(b.letters)) for a, b in complex_.deconcatenate(word))
            if split != sorted(coproduct_gamma(k)):
                self.add_error("coproduct", f"deconcatenation of gamma_{k} gives {split}")


class ReducedRingValidator(SuiteValidator):
    """Tor of the mod tau^{p-1} Steenrod algebra against C (x) F_p[tau]/tau^{p-1}."""

    name = "reduced-ring"

    def validate(self):
        p, stem = self.p, self.config.stem_max
        low, high = self.window
        low = min(low, -(p - 2))
        bounds = Bounds(stem, low, high)
        found = steenrod_bar_complex(SteenrodVariant(p, Variant.MOD_TAU), stem + 1).tor_E2(bounds)
        expected = ReducedRing(p).tridegree_table(stem, low, high)
        keys = {k for k, _ in found.items()} | {k for k, _ in expected.items()}
        self.cells_checked += len(keys)
        self.add_failures("tor", found.mismatches(expected, keys))
        collapse = check_collapse_reduced(p, stem)
        self.cells_checked += collapse["checked"]
        for item in collapse["inconclusive"]:
            self.add_error("collapse", f"possible d^{item['r']} on {item['class']}", **item)
        for item in collapse["hidden_extensions"]:
            self.add_error("extension", f"possible hidden extension on {item['class']}", **item)


class D1FormulaValidator(SuiteValidator):
    """d1[tau_i|tau_i] = tau[xi_{i+1}] in the p=2 integral bar complex."""

    name = "d1-formula"

    def validate(self):
        if self.p != 2:
            self.add_warning("prime", "the tau_i^2 relation exists only at p=2; checked at p=2")
        complex_ = BarComplex(steenrod_presentation(SteenrodVariant(2, Variant.INTEGRAL), 7))
        for i in range(3):
            word = complex_.word({f"tau_{i}": 1}, {f"tau_{i}": 1})
            found = complex_.d1(complex_.chain({word: 1}))
            expected = complex_.chain({complex_.word({f"xi_{i + 1}": 1}, tau_power=1): 1})
            self.cells_checked += 1
            if found != expected:
                self.add_error("d1", f"d1[tau_{i}|tau_{i}] = {found!r}, expected {expected!r}")


class CubeContractibilityValidator(SuiteValidator):
    """Every f-cube (C^f, D) with f != 0 is acyclic, with B^f spanned by D chi_{S,f}, t_f not in S."""

    name = "cube-contractibility"

    def validate(self):
        top = 3 if self.config.f_support_max is None else self.config.f_support_max
        value_max = self.config.f_value_max or 3
        for f in support_functions(range(top + 1), value_max, include_zero=False):
            self.cells_checked += 1
            result = f_cube_homology(f, self.p)
            nonzero = [k for k, d in result.homology.items() if d]
            if nonzero:
                self.add_error("homology", f"H(C^f) != 0 for f={f.label()} at |S| in {nonzero}")
            if not result.boundary_generators_match:
                self.add_error("boundaries", f"B^f is not spanned by the D chi classes for f={f.label()}")


class ProductLawsValidator(SuiteValidator):
    """chi and D chi product laws by direct expansion, and the epsilon placement survey."""

    name = "product-laws"

    def validate(self):
        p = self.p
        top = 2 if self.config.f_support_max is None else self.config.f_support_max
        value_max = self.config.f_value_max or 3
        functions = support_functions(range(top + 1), value_max)
        cube = cube_complex_for(p, SupportFunction.delta(top))
        self._chi_law(cube, chi_indices(functions))
        self._dchi_law(cube, chi_indices(functions, only_K=True))

    def _chi_law(self, cube, indices: List[ChiIndex]):
        p = self.p
        for a in indices:
            for b in indices:
                self.cells_checked += 1
                found = cube.chi(a) * cube.chi(b)
                coeff = subset_sign(a.S, b.S) * K_coeff(a.S, b.S, a.f, b.f, p) % p
                if coeff:
                    expected = cube.chi(ChiIndex(a.S | b.S, a.f + b.f)).scale(coeff)
                else:
                    expected = cube.algebra.zero()
                if found != expected:
                    self.add_error("chi", f"{a.label()} * {b.label()} = {found!r}, expected {expected!r}")

    def _dchi_law(self, cube, indices: List[ChiIndex]):
        p = self.p
        disagreements: Counter = Counter({name: 0 for name in EPSILON_PLACEMENTS})
        compared = 0
        for a in indices:
            for b in indices:
                self.cells_checked += 1
                try:
                    expansion = cube.epsilon_expansion(a, b)
                except RuntimeError as e:
                    self.add_error("dchi", str(e))
                    continue
                h = a.f + b.f
                t = h.support[0]
                union = a.S | b.S
                if t in union:
                    continue
                for U in expansion:
                    if not (union < U and len(U - union) == 1):
                        self.add_error("dchi", f"D chi product {a.label()} * {b.label()} has a term "
                                               f"at U={sorted(U)} outside S u T u {{u}}")
                for u in h.support:
                    if u == t or u in union:
                        continue
                    compared += 1
                    oracle = expansion.get(frozenset(union | {u}), 0) % p
                    for name in EPSILON_PLACEMENTS:
                        if epsilon_closed_form(u, a.S, b.S, a.f, b.f, p, name) != oracle:
                            disagreements[name] += 1
        consistent = sorted(name for name, n in disagreements.items() if n == 0)
        self.notes["epsilon_cases"] = compared
        self.notes["epsilon_disagreements"] = dict(sorted(disagreements.items()))
        self.notes["consistent_placements"] = consistent
        if compared and not consistent:
            self.add_error("epsilon", "no argument placement of the closed form matches the expansion")


class IntroRelationsValidator(SuiteValidator):
    """The two relations among S-empty x classes vanish in normal form at p=2."""

    name = "intro-relations"

    def validate(self):
        if self.p != 2:
            self.add_warning("prime", "the relations are stated at p=2; checked at p=2")
        self.notes["reading"] = "x with one subscript n is x_{S, f} with S empty and f = delta_n"
        for label, element in intro_relations(2):
            self.cells_checked += 1
            if not element.is_zero():
                self.add_error("relation", f"{label} reduces to {element!r}")


class BocksteinHomologyValidator(SuiteValidator):
    """H^D equals the truncated polynomial algebra on the mu_i, per tridegree and bidegree."""

    name = "bockstein-homology"

    def validate(self):
        p, stem = self.p, self.config.stem_max
        d = DHomology(p, stem)
        expected = truncated_mu_table(p, stem)
        keys = {k for k, _ in d.H.items()} | {k for k, _ in expected.items()}
        self.cells_checked += len(keys)
        self.add_failures("tridegree", d.H.mismatches(expected, keys))
        self.add_failures("bidegree", d.by_bidegree(d.H).mismatches(d.by_bidegree(expected)))
        self.add_failures("fracture", fracture_check(d))
        self.add_failures("dchi-basis", dchi_basis_check(d))


class EtaleValidator(SuiteValidator):
    """Etale Hilbert function against F_p[mu, tau^{+-1}] and the Betti comparison."""

    name = "etale"

    def validate(self):
        p, stem = self.p, self.config.stem_max
        low, high = self.window
        ring = EtaleRing(p)
        table = ring.hilbert_table(stem, low, high)
        for (s, w), dim in table.items():
            self.cells_checked += 1
            expected = 1 if s % 2 == 0 else 0
            if dim != expected:
                self.add_error("hilbert", f"etale dim at ({s}, {w}) is {dim}", cell=[s, w],
                               expected=expected, actual=dim)
        for k in range(stem // 2 + 1):
            power = ring.canonical_mu_power(k)
            if len(power.terms) != 1:
                self.add_error("mu-power", f"mu^{k} normalizes to {power!r}")
        self.add_failures("betti", betti_comparison(p, stem))


class OddPagesValidator(SuiteValidator):
    """E^p against Z^D[tau]/tau^{p-1}B^D[tau] and the collapse checks at odd p."""

    name = "odd-pages"

    def validate(self):
        p, stem = self.p, self.config.stem_max
        if p == 2:
            self.add_warning("prime", "p=2 has no intermediate pages; skipped")
            return
        low, high = self.window
        page = PageComplex(p, stem, low, high)
        d = DHomology(p, stem)
        result = compute_Ep(p, stem, low, high, page=page, d_homology=d)
        self.cells_checked += len(page.keys())
        self.add_failures("E^p", result["failures"])
        self.add_failures("tau-free", tau_power_injective(page))
        self.add_failures("ker-im", ker_im_intersection(page))
        self.add_failures("localized", localized_homology_check(p, stem))
        for collapse in (check_collapse_integral(page), check_collapse_reduced(p, stem)):
            self.cells_checked += collapse["checked"]
            for item in collapse["inconclusive"]:
                self.add_error("collapse", f"collapse inconclusive at {item['cell']}", **item)


class PullbackValidator(SuiteValidator):
    """Integral ring against the pullback of its tau-free and reduced parts."""

    name = "pullback"

    def validate(self):
        low, high = self.window
        result = pullback_check(self.p, self.config.stem_max, low, high, with_pages=self.p > 2)
        self.cells_checked += result["cells_checked"]
        for failure in result["failures"]:
            self.add_error(failure["check"], f"pullback check {failure['check']} fails at "
                                             f"{failure['cell']}", **failure)


class PropertiesValidator(SuiteValidator):
    """Randomized algebraic laws with a fixed seed."""

    name = "properties"

    def validate(self):
        p, cases = self.p, self.config.cases
        rng = random.Random(self.config.seed)
        steenrod = steenrod_presentation(SteenrodVariant(p, Variant.INTEGRAL), 12)
        cube = cube_algebra(p, 2 if self.config.max_index is None else self.config.max_index)
        for algebra in (steenrod, cube):
            self._ring_laws(algebra, rng, cases)
        self._derivation_laws(cube, rng, cases)
        if p > 2:
            self._page_laws(page_algebra(p, 2), rng, cases)
        self._rewrite_order_laws(steenrod, rng, cases)
        bar = steenrod_bar_complex(SteenrodVariant(p, Variant.MOD_TAU), 10)
        self._bar_laws(bar, rng, cases)
        self._shuffle_laws(bar, rng, cases)
        failures = confluence_check(p, cases, self.config.seed)
        self.cells_checked += cases
        self.add_failures("confluence", failures)
        self.notes["cases"] = cases
        self.notes["seed"] = self.config.seed

    def _sample(self, algebra: AlgebraSpec, rng: random.Random, stem: int = 8) -> Element:
        return Element(algebra, {algebra.random_monomial(rng, stem): 1})

    def _ring_laws(self, algebra: AlgebraSpec, rng: random.Random, cases: int):
        for _ in range(cases):
            a, b, c = (self._sample(algebra, rng) for _ in range(3))
            self.cells_checked += 2
            if (a * b) * c != a * (b * c):
                self.add_error("associativity", f"({a!r})({b!r})({c!r}) in {algebra.name}")
            pa = algebra.parity(next(iter(a.terms)))
            pb = algebra.parity(next(iter(b.terms)))
            if a * b != (b * a).scale(-1 if pa and pb else 1):
                self.add_error("commutativity", f"{a!r} and {b!r} in {algebra.name}")

    def _derivation_laws(self, algebra: AlgebraSpec, rng: random.Random, cases: int):
        for _ in range(cases):
            x, y = self._sample(algebra, rng, 24), self._sample(algebra, rng, 24)
            self.cells_checked += 2
            if not apply_D(apply_D(x)).is_zero():
                self.add_error("D^2", f"D^2({x!r}) != 0")
            sign = -1 if algebra.parity(next(iter(x.terms))) else 1
            if apply_D(x * y) != apply_D(x) * y + (x * apply_D(y)).scale(sign):
                self.add_error("D-leibniz", f"Leibniz fails on {x!r}, {y!r}")

    def _page_laws(self, algebra: AlgebraSpec, rng: random.Random, cases: int):
        for _ in range(cases):
            x, y = self._sample(algebra, rng, 24), self._sample(algebra, rng, 24)
            self.cells_checked += 1
            sign = -1 if algebra.parity(next(iter(x.terms))) else 1
            expected = apply_d_pminus1(x) * y + (x * apply_d_pminus1(y)).scale(sign)
            if apply_d_pminus1(x * y) != expected:
                self.add_error("d-leibniz", f"d^{{p-1}} Leibniz fails on {x!r}, {y!r}")

    def _rewrite_order_laws(self, algebra: AlgebraSpec, rng: random.Random, cases: int):
        if not algebra.rules:
            return
        rewritten = {r.generator for r in algebra.rules}

        def choose(options: List[int]) -> int:
            return rng.choice(options)

        for _ in range(cases):
            raw = tuple(rng.randint(0, 3 if i in rewritten else 1) for i in range(len(algebra.generators)))
            x = Element(algebra, {raw: 1})
            self.cells_checked += 1
            if steenrod_normalize(x, choose) != steenrod_normalize(x):
                self.add_error("rewrite-order", f"normal form of {algebra.label(raw)} depends on the rewrite order")

    def _bar_laws(self, complex_: BarComplex, rng: random.Random, cases: int):
        letters = complex_.letters(6)

        def word() -> BarChain:
            picked = tuple(rng.choice(letters) for _ in range(rng.randint(1, 3)))
            return BarChain(complex_, {BarWord(picked): 1})

        for _ in range(cases):
            x, y = word(), word()
            self.cells_checked += 2
            if not complex_.d1(complex_.d1(x)).is_zero():
                self.add_error("d1^2", f"d1^2({x!r}) != 0")
            wx = next(iter(x.terms))
            sign = -1 if complex_.degree_parity(wx) else 1
            lhs = complex_.d1(complex_.shuffle(x, y))
            rhs = complex_.shuffle(complex_.d1(x), y) + complex_.shuffle(x, complex_.d1(y)).scale(sign)
            if lhs != rhs:
                self.add_error("d1-leibniz", f"Leibniz fails on {x!r}, {y!r}")

    def _shuffle_laws(self, complex_: BarComplex, rng: random.Random, cases: int):
        letters = complex_.letters(6)

        def word() -> BarChain:
            picked = tuple(rng.choice(letters) for _ in range(rng.randint(1, 2)))
            return BarChain(complex_, {BarWord(picked): 1})

        for _ in range(cases):
            x, y, z = word(), word(), word()
            self.cells_checked += 2
            if complex_.shuffle(complex_.shuffle(x, y), z) != complex_.shuffle(x, complex_.shuffle(y, z)):
                self.add_error("shuffle-associativity", f"({x!r})({y!r})({z!r})")
            odd = complex_.degree_parity(next(iter(x.terms))) and complex_.degree_parity(next(iter(y.terms)))
            if complex_.shuffle(x, y) != complex_.shuffle(y, x).scale(-1 if odd else 1):
                self.add_error("shuffle-commutativity", f"{x!r} and {y!r}")


class TorsionWitnessValidator(SuiteValidator):
    """x_{0, delta_0} certifies as tau^{p-1}-torsion that tau does not divide; mu_0 does not."""

    name = "torsion-witness"

    def validate(self):
        _, certificate = torsion_witness(self.p)
        self.cells_checked += 1
        self.notes["certificate"] = certificate
        if not certificate["valid"]:
            self.add_error("witness", f"torsion certificate rejected: {certificate}")
        ring = IntegralRing(self.p)
        control = certify_torsion(ring, ring.mu(0))
        self.cells_checked += 1
        if control["valid"]:
            self.add_error("control", "mu_0 certified as torsion")


SUITES: Dict[str, Callable[[RunConfig], SuiteValidator]] = {
    cls.name: cls for cls in (
        TorsionProductsValidator, ReducedRingValidator, D1FormulaValidator,
        CubeContractibilityValidator, ProductLawsValidator, IntroRelationsValidator,
        BocksteinHomologyValidator, EtaleValidator, OddPagesValidator, PullbackValidator,
        PropertiesValidator, TorsionWitnessValidator,
    )
}


def run_suite(name: str, config: RunConfig) -> Dict[str, Any]:
    """Run one suite, or every suite for 'all', and return the combined report."""
    if name == "all":
        reports = [run_suite(n, config) for n in SUITES]
        failures = [dict(f, suite=r["suite"]) for r in reports for f in r["failures"]]
        warnings = [dict(w, suite=r["suite"]) for r in reports for w in r["warnings"]]
        return {"suite": "all", "prime": config.prime,
                "cells_checked": sum(r["cells_checked"] for r in reports),
                "failures": failures, "warnings": warnings,
                "notes": {r["suite"]: r["notes"] for r in reports if r["notes"]}}
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; expected one of {', '.join(SUITES)} or all")
    validator = SUITES[name](config)
    validator.run()
    return validator.report()


def print_summary(report: Dict[str, Any], stream: Optional[TextIO] = None):
    """Human summary in banner style."""
    out = stream or sys.stderr

    def say(text: str = ""):
        print(text, file=out)

    say("=" * 60)
    say("VERIFICATION SUMMARY")
    say("=" * 60)
    say(f"Suite:          {report['suite']}")
    say(f"Prime:          {report['prime']}")
    say(f"Cells checked:  {report['cells_checked']}")
    say(f"Total failures: {len(report['failures'])}")
    say(f"Total warnings: {len(report['warnings'])}")
    say()
    if report["failures"]:
        say("FAILURES:")
        for failure in report["failures"][:50]:
            say(f"  [FAIL] [{failure.get('check')}] {failure['message']}")
        if len(report["failures"]) > 50:
            say(f"  ... {len(report['failures']) - 50} more")
        say()
        say("RESULT: VERIFICATION FAILED")
        return
    if report["warnings"]:
        say("WARNINGS:")
        for warning in report["warnings"]:
            say(f"  - [{warning['check']}] {warning['message']}")
        say()
    say("[OK] all checks passed")
    say("RESULT: ALL CHECKS PASSED")
