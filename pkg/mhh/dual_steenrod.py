"""
Dual Motivic Steenrod Algebra (algebraically closed base, rho = 0)
Presentations, normal forms and bounded bases in the integral, mod tau^(p-1)
and tau-inverted variants.
"""

import logging
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Tuple

from mhh.fp_linalg import SparseMatrix, check_prime, rank
from mhh.graded_algebra import (
    AlgebraSpec, Bounds, Element, GeneratorKind, GeneratorSpec, Monomial,
    RewriteRule, Tridegree, basis_enumerate,
)

logger = logging.getLogger(__name__)

TAU = "tau"


class Variant(Enum):
    INTEGRAL = "integral"
    MOD_TAU = "mod_tau"
    ETALE = "etale"

    @classmethod
    def parse(cls, value: str) -> "Variant":
        key = value.strip().lower().replace("-", "_")
        for member in cls:
            if member.value == key:
                return member
        raise ValueError(f"unknown variant {value!r}; expected integral, mod-tau or etale")


@dataclass(frozen=True)
class SteenrodVariant:
    p: int
    variant: Variant = Variant.INTEGRAL

    def __post_init__(self):
        check_prime(self.p)
        if not isinstance(self.variant, Variant):
            object.__setattr__(self, "variant", Variant.parse(str(self.variant)))


def xi_tridegree(i: int, p: int) -> Tridegree:
    return Tridegree(0, 2 * p ** i - 2, p ** i - 1)


def tau_i_tridegree(i: int, p: int) -> Tridegree:
    return Tridegree(0, 2 * p ** i - 1, p ** i - 1)


TAU_TRIDEGREE = Tridegree(0, 0, -1)


def steenrod_presentation(v: SteenrodVariant, max_degree: int) -> AlgebraSpec:
    """Generators of degree at most max_degree with kinds and relations for the variant.

    At p=2 integral every included tau_i brings xi_{i+1} along so that the
    relation tau_i^2 = tau * xi_{i+1} stays expressible.
    """
    p = v.p
    variant = v.variant
    gens: List[GeneratorSpec] = []

    if variant is Variant.INTEGRAL:
        gens.append(GeneratorSpec(TAU, GeneratorKind.POLYNOMIAL, TAU_TRIDEGREE))
    elif variant is Variant.ETALE:
        gens.append(GeneratorSpec(TAU, GeneratorKind.LAURENT, TAU_TRIDEGREE))
    elif p > 2:
        gens.append(GeneratorSpec(TAU, GeneratorKind.TRUNCATED, TAU_TRIDEGREE, height=p - 1))

    if p == 2 and variant is Variant.INTEGRAL:
        tau_kind = GeneratorKind.POLYNOMIAL
    elif p == 2 and variant is Variant.ETALE:
        tau_kind = GeneratorKind.POLYNOMIAL
    else:
        tau_kind = GeneratorKind.EXTERIOR
    with_xi = not (p == 2 and variant is Variant.ETALE)

    i = 0
    while tau_i_tridegree(i, p).degree <= max_degree:
        gens.append(GeneratorSpec(f"tau_{i}", tau_kind, tau_i_tridegree(i, p)))
        xi = xi_tridegree(i + 1, p)
        if with_xi and (xi.degree <= max_degree or (p == 2 and variant is Variant.INTEGRAL)):
            gens.append(GeneratorSpec(f"xi_{i + 1}", GeneratorKind.POLYNOMIAL, xi))
        i += 1

    algebra = AlgebraSpec(p, gens, name=f"A[p={p},{variant.value}]")
    if p == 2 and variant is Variant.INTEGRAL:
        rules = []
        for k in range(i):
            replacement = algebra.monomial({TAU: 1, f"xi_{k + 1}": 1})
            rules.append(RewriteRule(algebra.index(f"tau_{k}"), 2, ((replacement, 1),)))
        algebra = AlgebraSpec(p, gens, rules, name=algebra.name)
    logger.debug(f"steenrod_presentation {v} max_degree={max_degree} -> {algebra!r}")
    return algebra


def steenrod_normalize(x: Element, chooser=None) -> Element:
    """Normal form of a Steenrod element; chooser selects the rewrite order."""
    return x.normalize(chooser)


def steenrod_basis(v: SteenrodVariant, bounds: Bounds) -> List[Monomial]:
    return basis_enumerate(steenrod_presentation(v, bounds.stem_max), bounds)


def tau_free(algebra: AlgebraSpec, monomials: List[Monomial]) -> List[Monomial]:
    if not algebra.has(TAU):
        return list(monomials)
    k = algebra.index(TAU)
    return [m for m in monomials if m[k] == 0]


def steenrod_coproduct(name: str, p: int) -> List[Tuple[Dict[str, int], Dict[str, int]]]:
    """Coproduct terms as (left exponents, right exponents); xi_0 = 1."""
    if name == TAU:
        return [({TAU: 1}, {})]
    family, _, index = name.partition("_")
    k = int(index)
    terms: List[Tuple[Dict[str, int], Dict[str, int]]] = []
    if family == "tau":
        terms.append(({name: 1}, {}))
    elif family != "xi":
        raise ValueError(f"unknown Steenrod generator {name!r}")
    for i in range(0, k + 1):
        left = {} if k - i == 0 else {f"xi_{k - i}": p ** i}
        if family == "xi":
            right = {} if i == 0 else {f"xi_{i}": 1}
        else:
            right = {f"tau_{i}": 1}
        terms.append((left, right))
    return terms


def is_primitive(name: str, p: int) -> bool:
    """x is primitive when its coproduct is x (x) 1 + 1 (x) x."""
    terms = steenrod_coproduct(name, p)
    nontrivial = [t for t in terms if t[0] and t[1]]
    return not nontrivial and len(terms) == 2


def truncation_consistency(p: int, bounds: Bounds) -> List[Dict]:
    """Compare mod-tau basis counts with tau-shifted counts of the tau-free integral basis."""
    reduced = steenrod_presentation(SteenrodVariant(p, Variant.MOD_TAU), bounds.stem_max)
    integral = steenrod_presentation(SteenrodVariant(p, Variant.INTEGRAL), bounds.stem_max)
    wide = Bounds(bounds.stem_max, bounds.weight_min, bounds.weight_max + p - 2,
                  bounds.filtration_max)
    reduced_counts = Counter((reduced.tridegree(m).degree, reduced.tridegree(m).weight)
                             for m in basis_enumerate(reduced, bounds))
    free_counts = Counter((integral.tridegree(m).degree, integral.tridegree(m).weight)
                          for m in tau_free(integral, basis_enumerate(integral, wide)))
    failures = []
    for d in range(0, bounds.stem_max + 1):
        for w in range(bounds.weight_min, bounds.weight_max + 1):
            expected = sum(free_counts[(d, w + c)] for c in range(p - 1))
            if reduced_counts[(d, w)] != expected:
                failures.append({"cell": [d, w], "expected": expected,
                                 "actual": reduced_counts[(d, w)]})
    return failures


def tau_torsion_free_check(p: int, bounds: Bounds) -> Optional[Dict]:
    """Multiplication by tau on the bounded integral basis must be injective."""
    algebra = steenrod_presentation(SteenrodVariant(p, Variant.INTEGRAL), bounds.stem_max)
    basis = basis_enumerate(algebra, bounds)
    index = {m: k for k, m in enumerate(basis)}
    tau = algebra.gen(TAU)
    columns = []
    for m in basis:
        if algebra.tridegree(m).weight - 1 < bounds.weight_min:
            continue
        image = algebra.multiply(tau, algebra.element({m: 1}))
        columns.append({index[t]: c for t, c in image.terms.items()})
    found = rank(SparseMatrix.from_columns(columns, len(basis), p))
    if found != len(columns):
        return {"cell": "tau-multiplication", "expected": len(columns), "actual": found}
    return None
