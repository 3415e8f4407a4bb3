"""
Coefficient Rings of MHH(F_p)
The etale ring F_p[mu, tau^{+-1}], the reduced ring C (x) F_p[tau]/tau^{p-1}
and the integral ring F_p[tau, mu_i, x_{S,f}]/I as normal-form rewriting
systems, with Hilbert functions, the pullback-square checks and the torsion
witness.
"""

import functools
import logging
import random
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

from mhh.cube_complex import (
    ChiIndex, DHomology, SupportFunction, chi_indices_by_stem, chi_tridegree, cube_algebra,
    cube_complex_for, max_index_for_stem,
)
from mhh.fp_linalg import SparseMatrix, check_prime, echelon_of_vectors, rank
from mhh.graded_algebra import Bidegree, Bounds, GeneratorKind, basis_enumerate
from mhh.spectral_sequence import page_algebra
from mhh.tables import DimensionTable

logger = logging.getLogger(__name__)

BIDEGREE_AXES = ("stem", "weight")


def mu_bidegree(i: int, p: int) -> Bidegree:
    return Bidegree(2 * p ** i, p ** i - 1)


def x_degree(S, f: SupportFunction, p: int) -> Bidegree:
    """|x_{S,f}| = (|S|+1)(-1, p-1) + p * sum_j f(j) (2p^j, p^j - 1)."""
    idx = ChiIndex(frozenset(S), f)
    if not idx.in_K:
        raise ValueError(f"(S, f) not in K: {idx.label()}")
    n = len(idx.S) + 1
    stem = -n + p * sum(v * 2 * p ** j for j, v in f.items)
    weight = n * (p - 1) + p * sum(v * (p ** j - 1) for j, v in f.items)
    return Bidegree(stem, weight)


def x_degree_from_chi(idx: ChiIndex, p: int) -> Bidegree:
    t = chi_tridegree(idx, p)
    return Bidegree(t.stem - 1, t.weight + p - 1)


@dataclass(frozen=True, order=True)
class RingMonomial:
    """tau^tau * prod mu_i^mu[i] * xs[0] * xs[1] * ... (raw until normalized)."""
    tau: int = 0
    mu: Tuple[int, ...] = ()
    xs: Tuple[ChiIndex, ...] = ()

    def __post_init__(self):
        mu = tuple(self.mu)
        while mu and mu[-1] == 0:
            mu = mu[:-1]
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "xs", tuple(self.xs))

    def bidegree(self, p: int) -> Bidegree:
        stem = sum(e * 2 * p ** i for i, e in enumerate(self.mu))
        weight = sum(e * (p ** i - 1) for i, e in enumerate(self.mu)) - self.tau
        for x in self.xs:
            b = x_degree(x.S, x.f, p)
            stem += b.stem
            weight += b.weight
        return Bidegree(stem, weight)

    def is_torsion(self) -> bool:
        return bool(self.xs)

    def label(self) -> str:
        parts = []
        if self.tau:
            parts.append("tau" if self.tau == 1 else f"tau^{self.tau}")
        for i, e in enumerate(self.mu):
            if e:
                parts.append(f"mu_{i}" if e == 1 else f"mu_{i}^{e}")
        parts.extend(x.label() for x in self.xs)
        return "*".join(parts) if parts else "1"

    def __repr__(self):
        return self.label()


def _add_mu(a: Tuple[int, ...], b: Tuple[int, ...]) -> Tuple[int, ...]:
    n = max(len(a), len(b))
    return tuple((a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n))


@functools.lru_cache(maxsize=None)
def x_product(p: int, first: ChiIndex, second: ChiIndex) -> Tuple[Tuple[ChiIndex, int], ...]:
    """x_first * x_second = sum_u epsilon_u x_{S u T u {u}, f+g}, through the D chi expansion."""
    expansion = cube_complex_for(p, first.f, second.f).epsilon_expansion(first, second)
    h = first.f + second.f
    return tuple((ChiIndex(U, h), c) for U, c in sorted(expansion.items(), key=lambda kv: sorted(kv[0])))


class RingElement:
    """Finite F_p-combination of RingMonomials of one ring."""

    def __init__(self, ring: "CoefficientRing", terms: Dict[RingMonomial, int]):
        self.ring = ring
        p = ring.p
        self.terms = {m: c % p for m, c in terms.items() if c % p}

    def is_zero(self) -> bool:
        return not self.terms

    def scale(self, c: int) -> "RingElement":
        return RingElement(self.ring, {m: c * v for m, v in self.terms.items()})

    def __add__(self, other: "RingElement") -> "RingElement":
        terms = dict(self.terms)
        for m, c in other.terms.items():
            terms[m] = terms.get(m, 0) + c
        return RingElement(self.ring, terms)

    def __sub__(self, other: "RingElement") -> "RingElement":
        return self + other.scale(-1)

    def __mul__(self, other):
        if isinstance(other, int):
            return self.scale(other)
        return self.ring.normal_form(self.ring.raw_product(self, other))

    def __eq__(self, other):
        if isinstance(other, int) and other == 0:
            return self.is_zero()
        return isinstance(other, RingElement) and self.terms == other.terms

    def __hash__(self):
        return hash(tuple(sorted(self.terms.items())))

    def __repr__(self):
        if not self.terms:
            return "0"
        return " + ".join(m.label() if c == 1 else f"{c}*{m.label()}"
                          for m, c in sorted(self.terms.items()))


Rewrite = Tuple
Chooser = Callable[[List[Rewrite]], Rewrite]


def leftmost(options: List[Rewrite]) -> Rewrite:
    return options[0]


def rightmost(options: List[Rewrite]) -> Rewrite:
    return options[-1]


def random_strategy(seed: int) -> Chooser:
    rng = random.Random(seed)
    return lambda options: rng.choice(options)


STRATEGIES = {"leftmost": leftmost, "rightmost": rightmost}


class CoefficientRing:
    """Shared arithmetic for the etale and integral rings."""

    kind = ""
    laurent = False

    def __init__(self, p: int):
        self.p = check_prime(p)

    def __repr__(self):
        return f"{type(self).__name__}(p={self.p})"

    # construction

    def element(self, terms: Dict[RingMonomial, int]) -> RingElement:
        return RingElement(self, terms)

    def one(self) -> RingElement:
        return self.element({RingMonomial(): 1})

    def zero(self) -> RingElement:
        return self.element({})

    def tau(self, power: int = 1) -> RingElement:
        if power < 0 and not self.laurent:
            raise ValueError(f"tau^{power} needs tau inverted")
        return self.element({RingMonomial(tau=power): 1})

    def mu(self, i: int, power: int = 1) -> RingElement:
        """Raw mu_i^power; multiply or normal_form to reduce."""
        exps = [0] * (i + 1)
        exps[i] = power
        return self.element({RingMonomial(mu=tuple(exps)): 1})

    # rewriting

    def raw_product(self, a: RingElement, b: RingElement) -> RingElement:
        terms: Dict[RingMonomial, int] = defaultdict(int)
        for ma, ca in a.terms.items():
            for mb, cb in b.terms.items():
                m = RingMonomial(ma.tau + mb.tau, _add_mu(ma.mu, mb.mu), ma.xs + mb.xs)
                terms[m] += ca * cb
        return RingElement(self, dict(terms))

    def rewrites(self, m: RingMonomial) -> List[Rewrite]:
        p = self.p
        options: List[Rewrite] = [("mu", i) for i, e in enumerate(m.mu) if e >= p]
        options.extend(("x", k) for k in range(len(m.xs) - 1))
        if m.xs and m.tau >= p - 1:
            options.append(("tau",))
        return options

    def apply_rewrite(self, m: RingMonomial, rule: Rewrite) -> List[Tuple[RingMonomial, int]]:
        p = self.p
        if rule[0] == "mu":
            i = rule[1]
            mu = list(m.mu) + [0]
            mu[i] -= p
            mu[i + 1] += 1
            return [(RingMonomial(m.tau + p - 1, tuple(mu), m.xs), 1)]
        if rule[0] == "x":
            k = rule[1]
            return [(RingMonomial(m.tau, m.mu, m.xs[:k] + (x,) + m.xs[k + 2:]), c)
                    for x, c in x_product(p, m.xs[k], m.xs[k + 1])]
        return []

    def normal_form(self, expr: RingElement, chooser: Optional[Chooser] = None) -> RingElement:
        """Rewrite until all mu-exponents are below p and each monomial has at most one x.

        The chooser picks which available rewrite to apply next.
        """
        p = self.p
        chooser = chooser or leftmost
        result: Dict[RingMonomial, int] = defaultdict(int)
        pending = [(m, c % p) for m, c in expr.terms.items() if c % p]
        while pending:
            m, c = pending.pop()
            options = self.rewrites(m)
            if not options:
                result[m] = (result[m] + c) % p
                continue
            for new, coeff in self.apply_rewrite(m, chooser(options)):
                if c * coeff % p:
                    pending.append((new, c * coeff % p))
        return RingElement(self, dict(result))

    def is_normal(self, m: RingMonomial) -> bool:
        return not self.rewrites(m) and (self.laurent or m.tau >= 0)

    def bidegree(self, m: RingMonomial) -> Bidegree:
        return m.bidegree(self.p)

    def homogeneous_bidegree(self, x: RingElement) -> Optional[Bidegree]:
        degrees = {self.bidegree(m) for m in x.terms}
        return degrees.pop() if len(degrees) == 1 else None

    # bases

    def basis(self, stem_max: int, weight_min: int, weight_max: int) -> List[RingMonomial]:
        raise NotImplementedError

    def hilbert_table(self, stem_max: int, weight_min: int, weight_max: int) -> DimensionTable:
        table = DimensionTable(BIDEGREE_AXES, name=f"{self.kind} p={self.p}")
        for s in range(stem_max + 1):
            for w in range(weight_min, weight_max + 1):
                table.set((s, w), 0)
        for m in self.basis(stem_max, weight_min, weight_max):
            table.add(self.bidegree(m).as_tuple(), 1, m.label())
        return table

    def hilbert(self, b: Bidegree, stem_max: Optional[int] = None) -> int:
        return sum(1 for _ in self.basis_at(b))

    def basis_at(self, b: Bidegree) -> List[RingMonomial]:
        return [m for m in self.basis(max(b.stem, 0), b.weight, b.weight) if self.bidegree(m) == b]


def mu_monomials(p: int, stem_max: int) -> List[Tuple[int, ...]]:
    """Exponent tuples with every mu_i exponent below p and stem at most stem_max."""
    if stem_max < 0:
        return []
    top = max_index_for_stem(p, stem_max)
    out: List[Tuple[int, ...]] = []

    def walk(i: int, prefix: List[int], budget: int):
        if i > top:
            out.append(RingMonomial(mu=tuple(prefix)).mu)
            return
        step = 2 * p ** i
        for e in range(min(p - 1, budget // step) + 1):
            walk(i + 1, prefix + [e], budget - e * step)

    walk(0, [], stem_max)
    return sorted(out)


@functools.lru_cache(maxsize=None)
def _x_indices(p: int, stem_max: int) -> Tuple[ChiIndex, ...]:
    """(S, f) in K whose x class has stem at most stem_max."""
    return tuple(chi_indices_by_stem(p, stem_max + 1, only_K=True))


def _mu_weight(mu: Tuple[int, ...], p: int) -> int:
    return sum(e * (p ** i - 1) for i, e in enumerate(mu))


def _mu_stem(mu: Tuple[int, ...], p: int) -> int:
    return sum(e * 2 * p ** i for i, e in enumerate(mu))


class EtaleRing(CoefficientRing):
    """F_p[tau^{+-1}, mu_i]/(mu_i^p - tau^{p-1} mu_{i+1}) = F_p[mu, tau^{+-1}] with |mu| = (2, 0)."""

    kind = "etale"
    laurent = True

    def canonical_mu_power(self, k: int) -> RingElement:
        """mu^k with mu = mu_0, in normal form."""
        return self.normal_form(self.mu(0, k))

    def basis(self, stem_max: int, weight_min: int, weight_max: int) -> List[RingMonomial]:
        out = []
        for mu in mu_monomials(self.p, stem_max):
            w = _mu_weight(mu, self.p)
            for target in range(weight_min, weight_max + 1):
                out.append(RingMonomial(tau=w - target, mu=mu))
        return sorted(out)


class IntegralRing(CoefficientRing):
    """F_p[tau, mu_i, x_{S,f}]/I; torsion monomials are tau^c m x_{S,f} with c <= p-2."""

    kind = "integral"

    def x(self, S, f: SupportFunction) -> RingElement:
        idx = ChiIndex(frozenset(S), f)
        if not idx.in_K:
            raise ValueError(f"(S, f) not in K: {idx.label()}")
        return self.element({RingMonomial(xs=(idx,)): 1})

    def tau_free_basis(self, stem_max: int, weight_min: int, weight_max: int) -> List[RingMonomial]:
        out = []
        for mu in mu_monomials(self.p, stem_max):
            w = _mu_weight(mu, self.p)
            for target in range(weight_min, min(w, weight_max) + 1):
                out.append(RingMonomial(tau=w - target, mu=mu))
        return sorted(out)

    def torsion_basis(self, stem_max: int, weight_min: int, weight_max: int) -> List[RingMonomial]:
        p = self.p
        out = []
        mus = mu_monomials(p, stem_max)
        for idx in _x_indices(p, stem_max):
            b = x_degree(idx.S, idx.f, p)
            if b.stem > stem_max:
                continue
            for mu in mus:
                if _mu_stem(mu, p) + b.stem > stem_max:
                    continue
                w = _mu_weight(mu, p) + b.weight
                for c in range(p - 1):
                    if weight_min <= w - c <= weight_max:
                        out.append(RingMonomial(tau=c, mu=mu, xs=(idx,)))
        return sorted(out)

    def basis(self, stem_max: int, weight_min: int, weight_max: int) -> List[RingMonomial]:
        return sorted(self.tau_free_basis(stem_max, weight_min, weight_max)
                      + self.torsion_basis(stem_max, weight_min, weight_max))


class ReducedRing:
    """(tensor_i Gamma(mu_i) (x) Lambda(lambda_{i+1})) (x) F_p[tau]/tau^{p-1}."""

    kind = "reduced"

    def __init__(self, p: int):
        self.p = check_prime(p)

    def __repr__(self):
        return f"ReducedRing(p={self.p})"

    def algebra(self, stem_max: int):
        top = max_index_for_stem(self.p, stem_max)
        if self.p == 2:
            return cube_algebra(2, top)
        return page_algebra(self.p, top, GeneratorKind.TRUNCATED)

    def basis(self, stem_max: int, weight_min: int, weight_max: int):
        algebra = self.algebra(stem_max)
        return algebra, basis_enumerate(algebra, Bounds(stem_max, weight_min, weight_max))

    def tridegree_table(self, stem_max: int, weight_min: int, weight_max: int) -> DimensionTable:
        algebra, monomials = self.basis(stem_max, weight_min, weight_max)
        table = DimensionTable(("filtration", "degree", "weight"), name=f"reduced p={self.p}")
        for m in monomials:
            table.add(algebra.tridegree(m).as_tuple(), 1, algebra.label(m))
        return table

    def hilbert_table(self, stem_max: int, weight_min: int, weight_max: int) -> DimensionTable:
        table = self.tridegree_table(stem_max, weight_min, weight_max).project(
            BIDEGREE_AXES, lambda k: (k[0] + k[1], k[2]))
        table.name = f"reduced p={self.p}"
        for s in range(stem_max + 1):
            for w in range(weight_min, weight_max + 1):
                if (s, w) not in table:
                    table.set((s, w), 0)
        return table

    def hilbert(self, b: Bidegree, stem_max: Optional[int] = None) -> int:
        return self.hilbert_table(max(b.stem, 0), b.weight, b.weight)[b.as_tuple()]


RINGS = {"etale": EtaleRing, "reduced": ReducedRing, "integral": IntegralRing}


def make_ring(kind: str, p: int):
    try:
        return RINGS[kind](p)
    except KeyError:
        raise ValueError(f"unknown ring {kind!r}; expected one of {', '.join(RINGS)}")


def hilbert(ring, b: Bidegree, stem_max: Optional[int] = None) -> int:
    return ring.hilbert(b, stem_max)


def tau_multiplication_rank(ring: IntegralRing, b: Bidegree, power: int) -> Tuple[int, int, int]:
    """Rank of tau^power from bidegree (s, w + power) to (s, w) by normal-form arithmetic.

    Returns (rank, dim source, dim target).
    """
    p = ring.p
    source = ring.basis_at(Bidegree(b.stem, b.weight + power))
    target = ring.basis_at(b)
    index = {m: k for k, m in enumerate(target)}
    tau = ring.tau(power)
    columns = []
    for m in source:
        image = ring.element({m: 1}) * tau
        column = {}
        for t, c in image.terms.items():
            if t not in index:
                raise RuntimeError(f"tau^{power} * {m.label()} = {image!r} leaves the target basis")
            column[index[t]] = c
        columns.append(column)
    return rank(SparseMatrix.from_columns(columns, len(target), p)), len(source), len(target)


def pullback_check(p: int, stem_max: int, weight_min: int, weight_max: int,
                   d_homology: Optional[DHomology] = None, with_pages: bool = False) -> Dict:
    """Bidegree-wise consistency of the integral ring with the pullback square.

    (a) integral = tau-free + torsion normal forms; (b) torsion matches B^D
    with tau^0..tau^{p-2}; (c) tau-free part localizes onto the etale ring;
    (d) torsion injects into the reduced ring; plus the long exact sequence
    for tau^{p-1} and, with pages, the E^p totals at odd p.
    """
    integral, etale, reduced = IntegralRing(p), EtaleRing(p), ReducedRing(p)
    d_homology = d_homology or DHomology(p, stem_max + 1)
    B = d_homology.by_bidegree(d_homology.B)
    total = integral.hilbert_table(stem_max, weight_min, weight_max + p - 1)
    free = Counter(integral.bidegree(m).as_tuple()
                   for m in integral.tau_free_basis(stem_max, weight_min, weight_max + p - 1))
    torsion = Counter(integral.bidegree(m).as_tuple()
                      for m in integral.torsion_basis(stem_max, weight_min, weight_max + p - 1))
    et = etale.hilbert_table(stem_max, weight_min, weight_max)
    red = reduced.hilbert_table(stem_max, weight_min, weight_max)
    failures: List[Dict] = []
    cells = 0
    for s in range(stem_max + 1):
        for w in range(weight_min, weight_max + 1):
            cells += 1
            key = (s, w)
            if total[key] != free[key] + torsion[key]:
                failures.append({"check": "a", "cell": [s, w], "expected": free[key] + torsion[key],
                                 "actual": total[key]})
            expected_torsion = sum(B[(s, w + c)] for c in range(p - 1))
            if torsion[key] != expected_torsion:
                failures.append({"check": "b", "cell": [s, w], "expected": expected_torsion,
                                 "actual": torsion[key]})
            if free[key] > et[key] or (w <= 0 and free[key] != et[key]):
                failures.append({"check": "c", "cell": [s, w], "expected": et[key], "actual": free[key]})
            if torsion[key] > red[key]:
                failures.append({"check": "d", "cell": [s, w], "expected": f"<= {red[key]}",
                                 "actual": torsion[key]})
    failures.extend(long_exact_sequence_check(integral, reduced, stem_max, weight_min, weight_max))
    if with_pages and p > 2:
        failures.extend(page_total_check(p, stem_max, weight_min, weight_max, total, d_homology))
    logger.info(f"pullback_check p={p} stem<={stem_max}: {cells} cells, {len(failures)} failures")
    return {"cells_checked": cells, "failures": failures}


def long_exact_sequence_check(integral: IntegralRing, reduced: ReducedRing, stem_max: int,
                              weight_min: int, weight_max: int) -> List[Dict]:
    """dim MHH/tau^{p-1} (s,w) = coker tau^{p-1} at (s,w) + ker tau^{p-1} at (s-1, w+p-1)."""
    p = integral.p
    red = reduced.hilbert_table(stem_max, weight_min, weight_max)
    failures = []
    for s in range(stem_max + 1):
        for w in range(weight_min, weight_max + 1):
            r, _, target = tau_multiplication_rank(integral, Bidegree(s, w), p - 1)
            coker = target - r
            ker = 0
            if s >= 1:
                r2, source2, _ = tau_multiplication_rank(integral, Bidegree(s - 1, w), p - 1)
                ker = source2 - r2
            if coker + ker != red[(s, w)]:
                failures.append({"check": "les", "cell": [s, w], "expected": red[(s, w)],
                                 "actual": coker + ker})
    return failures


def page_total_check(p: int, stem_max: int, weight_min: int, weight_max: int,
                     total: DimensionTable, d_homology: DHomology) -> List[Dict]:
    from mhh.spectral_sequence import compute_Ep

    result = compute_Ep(p, stem_max, weight_min, weight_max, d_homology=d_homology)
    by_bidegree = result["page"].table.project(BIDEGREE_AXES, lambda k: (k[0] + k[1], k[2]))
    failures = []
    for s in range(stem_max + 1):
        for w in range(weight_min, weight_max + 1):
            if by_bidegree[(s, w)] != total[(s, w)]:
                failures.append({"check": "pages", "cell": [s, w], "expected": total[(s, w)],
                                 "actual": by_bidegree[(s, w)]})
    return failures


def betti_comparison(p: int, stem_max: int) -> List[Dict]:
    """Etale Hilbert function per stem against THH_*(F_p) = F_p[mu], |mu| = 2."""
    etale = EtaleRing(p)
    failures = []
    for s in range(stem_max + 1):
        found = etale.hilbert(Bidegree(s, 0))
        expected = 1 if s % 2 == 0 else 0
        if found != expected:
            failures.append({"cell": [s], "expected": expected, "actual": found})
    return failures


def certify_torsion(ring: IntegralRing, x: RingElement) -> Dict:
    """Certificate that x is nonzero, killed by tau^{p-1} and not divisible by tau."""
    p = ring.p
    x = ring.normal_form(x)
    b = ring.homogeneous_bidegree(x)
    certificate = {"element": repr(x), "bidegree": None if b is None else list(b.as_tuple()),
                   "nonzero": not x.is_zero(), "annihilated": False, "indivisible": False,
                   "valid": False}
    if x.is_zero() or b is None:
        return certificate
    certificate["annihilated"] = (x * ring.tau(p - 1)).is_zero()
    above = ring.basis_at(Bidegree(b.stem, b.weight + 1))
    target = ring.basis_at(b)
    index = {m: k for k, m in enumerate(target)}
    images = []
    for m in above:
        image = ring.element({m: 1}) * ring.tau(1)
        images.append({index[t]: c for t, c in image.terms.items()})
    form = echelon_of_vectors(images, len(target), p)
    vector = {index[m]: c for m, c in x.terms.items()}
    certificate["indivisible"] = bool(form.reduce(vector))
    certificate["valid"] = certificate["nonzero"] and certificate["annihilated"] and certificate["indivisible"]
    return certificate


def torsion_witness(p: int) -> Tuple[RingElement, Dict]:
    """x_{0, delta_0} with its certificate."""
    ring = IntegralRing(p)
    x = ring.x((), SupportFunction.delta(0))
    return x, certify_torsion(ring, x)


def intro_relations(p: int = 2) -> List[Tuple[str, RingElement]]:
    """The two degree-wise relations among x classes with S empty, reduced to normal form.

    Only p=2: at odd p the exchange product x{;d0+d1}x{;d1+d2} is
    x{1;h} + 2x{2;h} while x{;2d1}x{;d0+d2} is (p-1)x{1;h}, h = d0+2d1+d2.
    """
    if p != 2:
        raise ValueError(f"the x relations hold only at p=2, got p={p}")
    ring = IntegralRing(p)
    d = SupportFunction.delta

    def x(*parts):
        f = d(parts[0])
        for n in parts[1:]:
            f = f + d(n)
        return ring.x((), f)

    cyclic = (x(0, 1) * x(2)) + (x(1, 2) * x(0)) + (x(2, 0) * x(1))
    exchange = (x(0, 1) * x(1, 2)) - (ring.x((), SupportFunction.of({1: 2})) * x(0, 2))
    return [("x{;d0+d1}x{;d2} + x{;d1+d2}x{;d0} + x{;d0+d2}x{;d1}", cyclic),
            ("x{;d0+d1}x{;d1+d2} - x{;2d1}x{;d0+d2}", exchange)]


def random_expression(ring: IntegralRing, rng: random.Random, max_index: int = 2,
                      value_max: int = 2, terms: int = 3) -> RingElement:
    """A random raw sum of products of tau, mu_i and at most three x classes."""
    p = ring.p
    out: Dict[RingMonomial, int] = defaultdict(int)
    for _ in range(terms):
        xs = []
        for _ in range(rng.randint(0, 3)):
            support = rng.sample(range(max_index + 1), rng.randint(1, min(2, max_index + 1)))
            f = SupportFunction.of({n: rng.randint(1, value_max) for n in support})
            others = [n for n in f.support if n != f.support[0]]
            S = frozenset(n for n in others if rng.random() < 0.5)
            xs.append(ChiIndex(S, f))
        mu = tuple(rng.randint(0, 2 * p) for _ in range(max_index + 1))
        out[RingMonomial(rng.randint(0, p), mu, tuple(xs))] += rng.randint(1, p - 1)
    return RingElement(ring, dict(out))


def confluence_check(p: int, cases: int, seed: int) -> List[Dict]:
    """Random expressions reduced under two rewrite strategies must agree."""
    ring = IntegralRing(p)
    rng = random.Random(seed)
    chooser = random_strategy(seed + 1)
    failures = []
    for case in range(cases):
        expr = random_expression(ring, rng)
        first = ring.normal_form(expr, leftmost)
        second = ring.normal_form(expr, chooser)
        if first != second or not all(ring.is_normal(m) for m in first.terms):
            failures.append({"case": case, "expression": repr(expr), "leftmost": repr(first),
                             "random": repr(second)})
    return failures
