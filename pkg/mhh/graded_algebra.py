"""
Graded-Commutative Algebras over F_p
Trigraded monomial arithmetic for polynomial, exterior, truncated and
divided-power generators, with Koszul signs, Lucas binomials, Chow degree
and bounded basis enumeration.
"""

import logging
import random
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from mhh.fp_linalg import check_prime

logger = logging.getLogger(__name__)

Monomial = Tuple[int, ...]


class InfiniteRegionError(ValueError):
    """The requested bounded region contains infinitely many monomials."""


@dataclass(frozen=True, order=True)
class Tridegree:
    filtration: int
    degree: int
    weight: int

    def __add__(self, other: "Tridegree") -> "Tridegree":
        return Tridegree(self.filtration + other.filtration,
                         self.degree + other.degree,
                         self.weight + other.weight)

    def scale(self, n: int) -> "Tridegree":
        return Tridegree(n * self.filtration, n * self.degree, n * self.weight)

    @property
    def stem(self) -> int:
        return self.filtration + self.degree

    @property
    def chow(self) -> int:
        return self.filtration + 2 * self.weight - self.degree

    def bidegree(self) -> "Bidegree":
        return Bidegree(self.stem, self.weight)

    def as_tuple(self) -> Tuple[int, int, int]:
        return (self.filtration, self.degree, self.weight)


ZERO = Tridegree(0, 0, 0)


@dataclass(frozen=True, order=True)
class Bidegree:
    stem: int
    weight: int

    def __add__(self, other: "Bidegree") -> "Bidegree":
        return Bidegree(self.stem + other.stem, self.weight + other.weight)

    def as_tuple(self) -> Tuple[int, int]:
        return (self.stem, self.weight)


class GeneratorKind(Enum):
    POLYNOMIAL = "polynomial"
    EXTERIOR = "exterior"
    TRUNCATED = "truncated"
    DIVIDED_POWER = "divided-power"
    LAURENT = "laurent"


@dataclass(frozen=True)
class GeneratorSpec:
    name: str
    kind: GeneratorKind
    tridegree: Tridegree
    height: Optional[int] = None

    def __post_init__(self):
        if self.kind is GeneratorKind.TRUNCATED and (self.height is None or self.height < 2):
            raise ValueError(f"truncated generator {self.name} needs height >= 2")

    @property
    def parity(self) -> int:
        return self.tridegree.stem % 2

    def exponent_cap(self) -> Optional[int]:
        """Largest allowed exponent, or None when unbounded."""
        if self.kind is GeneratorKind.EXTERIOR:
            return 1
        if self.kind is GeneratorKind.TRUNCATED:
            return self.height - 1
        return None

    def label(self, exponent: int) -> str:
        if self.kind is GeneratorKind.DIVIDED_POWER:
            return f"gamma_{exponent}({self.name})"
        return self.name if exponent == 1 else f"{self.name}^{exponent}"


@dataclass(frozen=True)
class RewriteRule:
    """generator^power -> replacement, where replacement is {monomial: coeff}."""
    generator: int
    power: int
    replacement: Tuple[Tuple[Monomial, int], ...]


@dataclass(frozen=True)
class Bounds:
    stem_max: int
    weight_min: Optional[int] = None
    weight_max: Optional[int] = None
    filtration_max: Optional[int] = None

    def contains(self, t: Tridegree) -> bool:
        if t.stem > self.stem_max:
            return False
        if self.weight_min is not None and t.weight < self.weight_min:
            return False
        if self.weight_max is not None and t.weight > self.weight_max:
            return False
        if self.filtration_max is not None and t.filtration > self.filtration_max:
            return False
        return True


def binomial_mod_p(m: int, n: int, p: int) -> int:
    """C(m, n) mod p by Lucas' theorem."""
    if n < 0 or m < 0 or n > m:
        return 0
    result = 1
    while m or n:
        mi, ni = m % p, n % p
        if ni > mi:
            return 0
        numerator = 1
        denominator = 1
        for k in range(ni):
            numerator = numerator * (mi - k) % p
            denominator = denominator * (k + 1) % p
        result = result * numerator * pow(denominator, -1, p) % p
        m //= p
        n //= p
    return result


class AlgebraSpec:
    """A finite presentation: ordered generators plus single-generator rewrite rules."""

    def __init__(self, p: int, generators: Sequence[GeneratorSpec],
                 rules: Sequence[RewriteRule] = (), name: str = ""):
        self.p = check_prime(p)
        self.generators = tuple(generators)
        self.rules = tuple(rules)
        self.name = name
        self._index = {g.name: i for i, g in enumerate(self.generators)}
        if len(self._index) != len(self.generators):
            raise ValueError("duplicate generator names")
        for g in self.generators:
            if p != 2 and g.kind is GeneratorKind.EXTERIOR and g.parity == 0:
                raise ValueError(f"exterior generator {g.name} must have odd degree at odd p")
            if p != 2 and g.kind is GeneratorKind.DIVIDED_POWER and g.parity == 1:
                raise ValueError(f"divided-power generator {g.name} must have even degree at odd p")
        self._rule_by_gen = {r.generator: r for r in self.rules}

    def __len__(self):
        return len(self.generators)

    def __repr__(self):
        return f"AlgebraSpec({self.name or 'anonymous'}, p={self.p}, gens={len(self.generators)})"

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise ValueError(f"unknown generator {name!r} in {self!r}")

    def has(self, name: str) -> bool:
        return name in self._index

    def generator(self, name: str) -> GeneratorSpec:
        return self.generators[self.index(name)]

    @property
    def unit_monomial(self) -> Monomial:
        return (0,) * len(self.generators)

    def monomial(self, exponents: Dict[str, int]) -> Monomial:
        m = [0] * len(self.generators)
        for name, e in exponents.items():
            m[self.index(name)] = e
        return tuple(m)

    def element(self, terms: Dict[Monomial, int]) -> "Element":
        return Element(self, terms)

    def unit(self) -> "Element":
        return Element(self, {self.unit_monomial: 1})

    def zero(self) -> "Element":
        return Element(self, {})

    def gen(self, name: str, exponent: int = 1) -> "Element":
        return Element(self, {self.monomial({name: exponent}): 1}).normalize()

    def mono(self, exponents: Dict[str, int], coeff: int = 1) -> "Element":
        return Element(self, {self.monomial(exponents): coeff}).normalize()

    # gradings

    def tridegree(self, m: Monomial) -> Tridegree:
        f = d = w = 0
        for g, e in zip(self.generators, m):
            if e:
                f += e * g.tridegree.filtration
                d += e * g.tridegree.degree
                w += e * g.tridegree.weight
        return Tridegree(f, d, w)

    def parity(self, m: Monomial) -> int:
        return sum(e * g.parity for g, e in zip(self.generators, m)) % 2

    def label(self, m: Monomial) -> str:
        parts = [g.label(e) for g, e in zip(self.generators, m) if e]
        return "*".join(parts) if parts else "1"

    def is_normal(self, m: Monomial) -> bool:
        for i, (g, e) in enumerate(zip(self.generators, m)):
            if e < 0 and g.kind is not GeneratorKind.LAURENT:
                return False
            cap = g.exponent_cap()
            if cap is not None and e > cap:
                return False
            rule = self._rule_by_gen.get(i)
            if rule is not None and e >= rule.power:
                return False
        return True

    def normal_cap(self, i: int) -> Optional[int]:
        g = self.generators[i]
        cap = g.exponent_cap()
        rule = self._rule_by_gen.get(i)
        if rule is not None:
            cap = rule.power - 1 if cap is None else min(cap, rule.power - 1)
        return cap

    # products

    def koszul_sign(self, a: Monomial, b: Monomial) -> int:
        """Sign of moving the factors of b left past the later factors of a."""
        if self.p == 2:
            return 1
        swaps = 0
        odd_a_after = 0
        for i in range(len(self.generators) - 1, -1, -1):
            g = self.generators[i]
            if g.parity:
                swaps += b[i] * odd_a_after
                odd_a_after += a[i]
        return -1 if swaps % 2 else 1

    def monomial_product(self, a: Monomial, b: Monomial) -> Tuple[int, Optional[Monomial]]:
        """Coefficient and raw (unrewritten) product monomial of a*b."""
        p = self.p
        coeff = self.koszul_sign(a, b) % p
        out = []
        for g, x, y in zip(self.generators, a, b):
            if g.kind is GeneratorKind.EXTERIOR:
                if x and y:
                    return 0, None
            elif g.kind is GeneratorKind.TRUNCATED:
                if x + y >= g.height:
                    return 0, None
            elif g.kind is GeneratorKind.DIVIDED_POWER:
                if x and y:
                    coeff = coeff * binomial_mod_p(x + y, x, p) % p
                    if not coeff:
                        return 0, None
            out.append(x + y)
        return coeff, tuple(out)

    def multiply(self, a: "Element", b: "Element") -> "Element":
        p = self.p
        terms: Dict[Monomial, int] = {}
        for ma, ca in a.terms.items():
            for mb, cb in b.terms.items():
                c, m = self.monomial_product(ma, mb)
                if c:
                    terms[m] = (terms.get(m, 0) + c * ca * cb) % p
        return Element(self, terms).normalize()

    def normalize(self, terms: Dict[Monomial, int],
                  chooser: Optional[Callable[[List[int]], int]] = None) -> Dict[Monomial, int]:
        """Apply rewrite rules until every monomial is normal.

        chooser picks which reducible generator to rewrite next; the result
        does not depend on it.
        """
        p = self.p
        result: Dict[Monomial, int] = {}
        pending = [(m, c % p) for m, c in terms.items() if c % p]
        while pending:
            m, c = pending.pop()
            if self._vanishes(m):
                continue
            reducible = [i for i, r in self._rule_by_gen.items() if m[i] >= r.power]
            if not reducible:
                result[m] = (result.get(m, 0) + c) % p
                continue
            i = chooser(sorted(reducible)) if chooser else min(reducible)
            rule = self._rule_by_gen[i]
            rest = list(m)
            rest[i] -= rule.power
            rest = tuple(rest)
            for rm, rc in rule.replacement:
                coeff, product = self.monomial_product(rm, rest)
                if coeff:
                    pending.append((product, c * rc * coeff % p))
        return {m: c for m, c in result.items() if c}

    def _vanishes(self, m: Monomial) -> bool:
        for g, e in zip(self.generators, m):
            cap = g.exponent_cap()
            if cap is not None and e > cap:
                return True
        return False

    # enumeration

    def basis(self, bounds: Bounds) -> List[Monomial]:
        return basis_enumerate(self, bounds)

    def random_monomial(self, rng: random.Random, stem_max: int) -> Monomial:
        """A random normal monomial of stem at most stem_max (generators of positive stem only)."""
        m = [0] * len(self.generators)
        budget = stem_max
        order = list(range(len(self.generators)))
        rng.shuffle(order)
        for i in order:
            g = self.generators[i]
            stem = g.tridegree.stem
            if stem <= 0 or stem > budget:
                continue
            cap = budget // stem
            normal = self.normal_cap(i)
            if normal is not None:
                cap = min(cap, normal)
            e = rng.randint(0, cap)
            m[i] = e
            budget -= e * stem
        return tuple(m)


class Element:
    """Finite F_p-combination of monomials of one AlgebraSpec."""

    __slots__ = ("algebra", "terms")

    def __init__(self, algebra: AlgebraSpec, terms: Dict[Monomial, int]):
        self.algebra = algebra
        p = algebra.p
        self.terms = {m: c % p for m, c in terms.items() if c % p}

    def normalize(self, chooser=None) -> "Element":
        return Element(self.algebra, self.algebra.normalize(self.terms, chooser))

    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, m: Monomial) -> int:
        return self.terms.get(m, 0)

    def monomials(self) -> List[Monomial]:
        return sorted(self.terms)

    def tridegrees(self) -> List[Tridegree]:
        return sorted({self.algebra.tridegree(m) for m in self.terms})

    def scale(self, c: int) -> "Element":
        return Element(self.algebra, {m: c * v for m, v in self.terms.items()})

    def __add__(self, other: "Element") -> "Element":
        terms = dict(self.terms)
        for m, c in other.terms.items():
            terms[m] = terms.get(m, 0) + c
        return Element(self.algebra, terms)

    def __neg__(self) -> "Element":
        return self.scale(-1)

    def __sub__(self, other: "Element") -> "Element":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, int):
            return self.scale(other)
        return self.algebra.multiply(self, other)

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, int) and other == 0:
            return self.is_zero()
        return isinstance(other, Element) and self.terms == other.terms

    def __hash__(self):
        return hash(tuple(sorted(self.terms.items())))

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for m in sorted(self.terms):
            c = self.terms[m]
            label = self.algebra.label(m)
            parts.append(label if c == 1 else f"{c}*{label}")
        return " + ".join(parts)


def multiply(a: Element, b: Element, algebra: Optional[AlgebraSpec] = None) -> Element:
    return (algebra or a.algebra).multiply(a, b)


def monomial_tridegree(m: Monomial, algebra: AlgebraSpec) -> Tridegree:
    return algebra.tridegree(m)


def chow_degree(m: Monomial, algebra: AlgebraSpec) -> int:
    return algebra.tridegree(m).chow


def basis_enumerate(algebra: AlgebraSpec, bounds: Bounds) -> List[Monomial]:
    """Normal monomials whose tridegree lies in bounds, sorted by exponent vector."""
    positive: List[int] = []
    flat: List[int] = []
    for i, g in enumerate(algebra.generators):
        stem = g.tridegree.stem
        if stem < 0:
            raise InfiniteRegionError(f"generator {g.name} has negative stem")
        (positive if stem > 0 else flat).append(i)

    unbounded_flat = []
    for i in flat:
        g = algebra.generators[i]
        if algebra.normal_cap(i) is not None and g.kind is not GeneratorKind.LAURENT:
            continue
        t = g.tridegree
        if t.filtration > 0 and bounds.filtration_max is not None and g.kind is not GeneratorKind.LAURENT:
            continue
        if t.weight == 0:
            raise InfiniteRegionError(f"generator {g.name} has stem 0 and weight 0")
        if g.kind is GeneratorKind.LAURENT and (bounds.weight_min is None or bounds.weight_max is None):
            raise InfiniteRegionError(f"Laurent generator {g.name} needs a two-sided weight window")
        if t.weight < 0 and bounds.weight_min is None:
            raise InfiniteRegionError(f"generator {g.name} lowers weight; weight_min required")
        if t.weight > 0 and bounds.weight_max is None:
            raise InfiniteRegionError(f"generator {g.name} raises weight; weight_max required")
        unbounded_flat.append(i)
    if len(unbounded_flat) > 1:
        raise InfiniteRegionError("at most one unbounded stem-zero generator is supported")

    bounded_flat = [i for i in flat if i not in unbounded_flat]
    results: List[Monomial] = []
    current = [0] * len(algebra.generators)

    def exponent_range(i: int, weight: int) -> range:
        # exponents e with weight + e * gw inside the weight window
        g = algebra.generators[i]
        gw = g.tridegree.weight
        lo, hi = bounds.weight_min, bounds.weight_max
        low = None if g.kind is GeneratorKind.LAURENT else 0
        high = None
        if gw > 0:
            high = (hi - weight) // gw
            if lo is not None:
                start = -((weight - lo) // gw)
                low = start if low is None else max(low, start)
        else:
            high = (weight - lo) // (-gw)
            if hi is not None:
                start = -((hi - weight) // (-gw))
                low = start if low is None else max(low, start)
        cap = algebra.normal_cap(i)
        if cap is not None:
            high = min(high, cap)
        return range(low, high + 1)

    def finish():
        t = algebra.tridegree(tuple(current))
        if not unbounded_flat:
            if bounds.contains(t):
                results.append(tuple(current))
            return
        i = unbounded_flat[0]
        step = algebra.generators[i].tridegree
        for e in exponent_range(i, t.weight):
            current[i] = e
            if bounds.contains(t + step.scale(e)):
                results.append(tuple(current))
        current[i] = 0

    order = positive + bounded_flat

    def walk(k: int, stem_left: int, filtration: int):
        if k == len(order):
            finish()
            return
        i = order[k]
        g = algebra.generators[i]
        stem = g.tridegree.stem
        cap = algebra.normal_cap(i)
        if stem > 0:
            limit = stem_left // stem
            if cap is not None:
                limit = min(limit, cap)
        elif cap is not None:
            limit = cap
        else:
            limit = bounds.filtration_max // g.tridegree.filtration
        for e in range(0, limit + 1):
            f = filtration + e * g.tridegree.filtration
            if bounds.filtration_max is not None and f > bounds.filtration_max:
                break
            current[i] = e
            walk(k + 1, stem_left - e * stem, f)
        current[i] = 0

    if bounds.stem_max < 0:
        return []
    walk(0, bounds.stem_max, 0)
    results.sort()
    logger.debug(f"basis_enumerate {algebra!r} {bounds} -> {len(results)} monomials")
    return results
