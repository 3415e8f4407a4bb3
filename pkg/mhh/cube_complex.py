"""
The Bockstein Cube Complex (C, D)
C = tensor over i of Gamma(mu_i) (x) Lambda(lambda_{i+1}), with the derivation
D(gamma_{j+p} mu_i) = lambda_{i+1} gamma_j mu_i. Provides chi classes, f-cubes,
the K and epsilon product coefficients and Z/B/H of D.
"""

import functools
import itertools
import logging
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from mhh.fp_linalg import SparseMatrix, kernel_basis, image_basis, span_rank, subquotient
from mhh.graded_algebra import (
    AlgebraSpec, Bounds, Element, GeneratorKind, GeneratorSpec, Monomial, Tridegree,
    basis_enumerate, binomial_mod_p,
)
from mhh.tables import DimensionTable

logger = logging.getLogger(__name__)


def mu_name(i: int) -> str:
    return f"mu_{i}"


def lambda_name(i: int) -> str:
    return f"lambda_{i}"


def mu_tridegree(i: int, p: int) -> Tridegree:
    return Tridegree(1, 2 * p ** i - 1, p ** i - 1)


def lambda_tridegree(i: int, p: int) -> Tridegree:
    """Tridegree of lambda_i (i >= 1)."""
    return Tridegree(1, 2 * p ** i - 2, p ** i - 1)


def cube_generators(p: int, max_index: int) -> List[GeneratorSpec]:
    gens = []
    for i in range(max_index + 1):
        gens.append(GeneratorSpec(mu_name(i), GeneratorKind.DIVIDED_POWER, mu_tridegree(i, p)))
        gens.append(GeneratorSpec(lambda_name(i + 1), GeneratorKind.EXTERIOR, lambda_tridegree(i + 1, p)))
    return gens


def max_index_for_stem(p: int, stem_max: int) -> int:
    """Largest i such that some generator of index i has stem at most stem_max (at least 0)."""
    i = 0
    while 2 * p ** (i + 1) <= stem_max:
        i += 1
    return i


@functools.lru_cache(maxsize=None)
def cube_algebra(p: int, max_index: int) -> AlgebraSpec:
    return AlgebraSpec(p, cube_generators(p, max_index), name=f"C[p={p},i<={max_index}]")


def derivation(algebra: AlgebraSpec, x: Element, p: int,
               factor: Optional[Monomial] = None) -> Element:
    """Odd derivation gamma_{j+p} mu_i -> factor * lambda_{i+1} gamma_j mu_i.

    Applied left to right with sign (-1)^(degree of the prefix). Generators
    named mu_i without a lambda_{i+1} partner are left alone.
    """
    terms: Dict[Monomial, int] = defaultdict(int)
    n = len(algebra.generators)
    targets = []
    for k, g in enumerate(algebra.generators):
        if g.kind is GeneratorKind.DIVIDED_POWER and g.name.startswith("mu_"):
            partner = lambda_name(int(g.name[3:]) + 1)
            if algebra.has(partner):
                targets.append((k, algebra.index(partner)))
    for m, c in x.terms.items():
        for k, lam in targets:
            e = m[k]
            if e < p:
                continue
            prefix = m[:k] + (0,) * (n - k)
            suffix = (0,) * (k + 1) + m[k + 1:]
            middle = [0] * n
            middle[k] = e - p
            middle[lam] = 1
            sign = -1 if algebra.parity(prefix) else 1
            c1, left = algebra.monomial_product(prefix, tuple(middle))
            if not c1:
                continue
            c2, full = algebra.monomial_product(left, suffix)
            if not c2:
                continue
            if factor is not None:
                c3, full = algebra.monomial_product(factor, full)
                if not c3:
                    continue
                c2 *= c3
            terms[full] += sign * c * c1 * c2
    return Element(algebra, dict(terms)).normalize()


def apply_D(x: Element) -> Element:
    return derivation(x.algebra, x, x.algebra.p)


@dataclass(frozen=True, order=True)
class SupportFunction:
    """Finitely supported f: N -> N, stored as sorted (index, value) pairs with values >= 1."""
    items: Tuple[Tuple[int, int], ...] = ()

    def __post_init__(self):
        cleaned = tuple(sorted((int(n), int(v)) for n, v in self.items if v))
        for n, v in cleaned:
            if n < 0 or v < 0:
                raise ValueError(f"support function needs non-negative indices and values, got {n}->{v}")
        if len({n for n, _ in cleaned}) != len(cleaned):
            raise ValueError("duplicate index in support function")
        object.__setattr__(self, "items", cleaned)

    @classmethod
    def of(cls, mapping: Dict[int, int]) -> "SupportFunction":
        return cls(tuple(mapping.items()))

    @classmethod
    def delta(cls, n: int, k: int = 1) -> "SupportFunction":
        return cls(((n, k),))

    @classmethod
    def parse(cls, text: str) -> "SupportFunction":
        """Inverse of label(): '1*d0+2*d3' or '0'."""
        text = text.strip()
        if text in ("", "0"):
            return cls()
        mapping: Dict[int, int] = {}
        for part in text.split("+"):
            value, _, index = part.strip().partition("*d")
            mapping[int(index)] = mapping.get(int(index), 0) + int(value)
        return cls.of(mapping)

    def __call__(self, n: int) -> int:
        for k, v in self.items:
            if k == n:
                return v
        return 0

    @property
    def support(self) -> Tuple[int, ...]:
        return tuple(n for n, _ in self.items)

    def is_zero(self) -> bool:
        return not self.items

    def __add__(self, other: "SupportFunction") -> "SupportFunction":
        total = dict(self.items)
        for n, v in other.items:
            total[n] = total.get(n, 0) + v
        return SupportFunction.of(total)

    def as_dict(self) -> Dict[int, int]:
        return dict(self.items)

    def label(self) -> str:
        if not self.items:
            return "0"
        return "+".join(f"{v}*d{n}" for n, v in self.items)

    def __repr__(self):
        return f"f({self.label()})"


def choose_t(S: Iterable[int]) -> int:
    """t_S = min S."""
    S = list(S)
    if not S:
        raise ValueError("choose_t of empty set")
    return min(S)


@dataclass(frozen=True)
class ChiIndex:
    S: FrozenSet[int]
    f: SupportFunction

    def __post_init__(self):
        object.__setattr__(self, "S", frozenset(self.S))
        if not self.S <= set(self.f.support):
            raise ValueError(f"S={sorted(self.S)} is not contained in supp f={self.f.support}")

    @property
    def in_K(self) -> bool:
        return not self.f.is_zero() and choose_t(self.f.support) not in self.S

    @property
    def t(self) -> int:
        return choose_t(self.f.support)

    def label(self) -> str:
        return f"x{{{','.join(str(s) for s in sorted(self.S))};{self.f.label()}}}"

    def sort_key(self):
        return (self.f.items, tuple(sorted(self.S)))

    def __lt__(self, other: "ChiIndex"):
        return self.sort_key() < other.sort_key()

    def __repr__(self):
        return f"ChiIndex({self.label()})"


def chi_monomial(idx: ChiIndex, algebra: AlgebraSpec) -> Monomial:
    p = algebra.p
    exps: Dict[str, int] = {}
    for n, v in idx.f.items:
        if n in idx.S:
            exps[lambda_name(n + 1)] = 1
            exps[mu_name(n)] = p * v - p
        else:
            exps[mu_name(n)] = p * v
    return algebra.monomial({k: e for k, e in exps.items() if e})


def chi(idx: ChiIndex, algebra: Optional[AlgebraSpec] = None, p: Optional[int] = None) -> Element:
    """chi_{S,f} as an element of C (coefficient 1)."""
    if algebra is None:
        top = max(idx.f.support, default=0)
        algebra = cube_algebra(p, top)
    return Element(algebra, {chi_monomial(idx, algebra): 1})


def chi_tridegree(idx: ChiIndex, p: int) -> Tridegree:
    total = Tridegree(0, 0, 0)
    for n, v in idx.f.items:
        if n in idx.S:
            total = total + lambda_tridegree(n + 1, p) + mu_tridegree(n, p).scale(p * v - p)
        else:
            total = total + mu_tridegree(n, p).scale(p * v)
    return total


def subset_sign(A: Iterable[int], B: Iterable[int]) -> int:
    """Sign of reordering odd factors indexed by A then B into increasing order."""
    inversions = sum(1 for a in A for b in B if a > b)
    return -1 if inversions % 2 else 1


def d_sign(S: Iterable[int], n: int) -> int:
    """Sign of the chi_{S u {n}} term in D chi_S."""
    return -1 if sum(1 for s in S if s < n) % 2 else 1


def in_J(S: Iterable[int], f: SupportFunction) -> bool:
    return set(S) <= set(f.support)


def K_coeff(S: Iterable[int], T: Iterable[int], f: SupportFunction, g: SupportFunction, p: int) -> int:
    """Binomial product coefficient of chi_{S,f} * chi_{T,g} (zero outside J or when S, T meet)."""
    S, T = set(S), set(T)
    if not (in_J(S, f) and in_J(T, g)) or S & T:
        return 0
    result = 1
    for c in sorted(set(f.support) | set(g.support)):
        fc, gc = f(c), g(c)
        if c in S:
            factor = binomial_mod_p(fc - 1 + gc, fc - 1, p)
        elif c in T:
            factor = binomial_mod_p(fc + gc - 1, fc, p)
        else:
            factor = binomial_mod_p(fc + gc, fc, p)
        result = result * factor % p
        if not result:
            return 0
    return result


class CubeComplex:
    """Bounded (C, D) with cached chi and D chi elements."""

    def __init__(self, p: int, max_index: int):
        self.p = p
        self.max_index = max_index
        self.algebra = cube_algebra(p, max_index)
        self._chi: Dict[ChiIndex, Element] = {}
        self._dchi: Dict[ChiIndex, Element] = {}

    def __repr__(self):
        return f"CubeComplex(p={self.p}, max_index={self.max_index})"

    def chi(self, idx: ChiIndex) -> Element:
        if idx not in self._chi:
            self._chi[idx] = chi(idx, self.algebra)
        return self._chi[idx]

    def dchi(self, idx: ChiIndex) -> Element:
        if idx not in self._dchi:
            self._dchi[idx] = apply_D(self.chi(idx))
        return self._dchi[idx]

    def apply_D(self, x: Element) -> Element:
        return apply_D(x)

    def epsilon_expansion(self, first: ChiIndex, second: ChiIndex) -> Dict[FrozenSet[int], int]:
        """Coefficients c_U with D chi_first * D chi_second = sum_U c_U D chi_{U, f+g}.

        The coefficient of D chi_{U,h} (t_h not in U) is read off as the
        coefficient of the monomial chi_{U u {t_h}, h}, the only D chi term
        containing it. A nonzero remainder raises RuntimeError.
        """
        product = self.dchi(first) * self.dchi(second)
        h = first.f + second.f
        if h.is_zero():
            return {}
        t = h.support[0]
        others = [n for n in h.support if n != t]
        coefficients: Dict[FrozenSet[int], int] = {}
        remainder = product
        for size in range(len(others) + 1):
            for U in itertools.combinations(others, size):
                U = frozenset(U)
                probe = chi_monomial(ChiIndex(U | {t}, h), self.algebra)
                c = product.coefficient(probe)
                if c:
                    coefficients[U] = c
                    remainder = remainder - self.dchi(ChiIndex(U, h)).scale(c)
        if not remainder.is_zero():
            raise RuntimeError(f"D chi product {first.label()} * {second.label()} "
                               f"is not in the span of D chi classes: {remainder!r}")
        return coefficients


@functools.lru_cache(maxsize=None)
def _complex_for(p: int, max_index: int) -> CubeComplex:
    return CubeComplex(p, max_index)


def cube_complex_for(p: int, *functions: SupportFunction) -> CubeComplex:
    top = max((n for f in functions for n in f.support), default=0)
    return _complex_for(p, top)


def _check_epsilon_args(u: int, S, T, f: SupportFunction, g: SupportFunction) -> Tuple[ChiIndex, ChiIndex, int]:
    first, second = ChiIndex(frozenset(S), f), ChiIndex(frozenset(T), g)
    if not (first.in_K and second.in_K):
        raise ValueError(f"epsilon needs indices in K, got {first.label()} and {second.label()}")
    h = f + g
    t = choose_t(h.support)
    if u not in h.support:
        raise ValueError(f"u={u} is not in supp(f+g)={h.support}")
    if u == t:
        raise ValueError(f"u={u} equals t_(f+g)")
    if u in first.S or u in second.S:
        raise ValueError(f"u={u} lies in S u T")
    return first, second, t


def epsilon(u: int, S, T, f: SupportFunction, g: SupportFunction, p: int) -> int:
    """epsilon_u from the direct expansion of D chi_{S,f} * D chi_{T,g} in C."""
    first, second, _ = _check_epsilon_args(u, S, T, f, g)
    expansion = cube_complex_for(p, f, g).epsilon_expansion(first, second)
    return expansion.get(frozenset(first.S | second.S | {u}), 0)


def _placement_split(u, t, S, T, f, g, p):
    return (K_coeff(S | {u}, T | {t}, f, g, p) + K_coeff(S | {t}, T | {u}, f, g, p)) % p


def _placement_split_signed(u, t, S, T, f, g, p):
    total = 0
    for n, m in ((u, t), (t, u)):
        A, B = S | {n}, T | {m}
        k = K_coeff(A, B, f, g, p)
        if k:
            total += d_sign(S, n) * d_sign(T, m) * subset_sign(A, B) * k
    return total % p


def _placement_sum_first(u, t, S, T, f, g, p):
    zero = SupportFunction()
    return (K_coeff(S | {u}, T | {t}, f + g, zero, p) + K_coeff(S | {t}, T | {u}, f + g, zero, p)) % p


def _placement_sum_second(u, t, S, T, f, g, p):
    zero = SupportFunction()
    return (K_coeff(S | {u}, T | {t}, zero, f + g, p) + K_coeff(S | {t}, T | {u}, zero, f + g, p)) % p


EPSILON_PLACEMENTS = {
    "K(S+u, T+t, f, g) + K(S+t, T+u, f, g)": _placement_split,
    "signed K(S+u, T+t, f, g) + K(S+t, T+u, f, g)": _placement_split_signed,
    "K(S+u, T+t, f+g, 0) + K(S+t, T+u, f+g, 0)": _placement_sum_first,
    "K(S+u, T+t, 0, f+g) + K(S+t, T+u, 0, f+g)": _placement_sum_second,
}


def epsilon_closed_form(u: int, S, T, f: SupportFunction, g: SupportFunction, p: int,
                        placement: str) -> int:
    _, _, t = _check_epsilon_args(u, S, T, f, g)
    return EPSILON_PLACEMENTS[placement](u, t, set(S), set(T), f, g, p)


def support_functions(support: Sequence[int], value_max: int, max_support: Optional[int] = None,
                      include_zero: bool = True) -> List[SupportFunction]:
    """All f with supp f inside support, values <= value_max and |supp f| <= max_support."""
    result = []
    for values in itertools.product(range(value_max + 1), repeat=len(support)):
        mapping = {n: v for n, v in zip(support, values) if v}
        if max_support is not None and len(mapping) > max_support:
            continue
        if not mapping and not include_zero:
            continue
        result.append(SupportFunction.of(mapping))
    return sorted(result)


def chi_indices(functions: Iterable[SupportFunction], only_K: bool = False) -> List[ChiIndex]:
    result = []
    for f in functions:
        supp = f.support
        for size in range(len(supp) + 1):
            for S in itertools.combinations(supp, size):
                idx = ChiIndex(frozenset(S), f)
                if not only_K or idx.in_K:
                    result.append(idx)
    return sorted(result)


def chi_indices_by_stem(p: int, stem_max: int, only_K: bool = False,
                        max_support: Optional[int] = None,
                        value_max: Optional[int] = None) -> List[ChiIndex]:
    """Every (S, f) in J (or K) whose chi class has stem at most stem_max."""
    top = max_index_for_stem(p, stem_max + 1)
    cap = {n: (stem_max + top + 1) // (2 * p ** (n + 1)) for n in range(top + 1)}
    if value_max is not None:
        cap = {n: min(v, value_max) for n, v in cap.items()}
    functions = []
    for values in itertools.product(*(range(cap[n] + 1) for n in range(top + 1))):
        mapping = {n: v for n, v in enumerate(values) if v}
        if max_support is not None and len(mapping) > max_support:
            continue
        functions.append(SupportFunction.of(mapping))
    return [idx for idx in chi_indices(functions, only_K)
            if chi_tridegree(idx, p).stem <= stem_max]


class FCube:
    """(C^f, D): basis chi_{S,f} graded by |S|, with D matrices between consecutive grades."""

    def __init__(self, f: SupportFunction, p: int):
        self.f = f
        self.p = p
        self.complex = cube_complex_for(p, f)
        supp = f.support
        self.bases: Dict[int, List[ChiIndex]] = {
            k: [ChiIndex(frozenset(S), f) for S in itertools.combinations(supp, k)]
            for k in range(len(supp) + 1)
        }
        self.matrices: Dict[int, SparseMatrix] = {}
        for k, basis in self.bases.items():
            target = self.bases.get(k + 1, [])
            rows = {chi_monomial(idx, self.complex.algebra): r for r, idx in enumerate(target)}
            columns = []
            for idx in basis:
                image = self.complex.dchi(idx)
                column = {}
                for m, c in image.terms.items():
                    if m not in rows:
                        raise RuntimeError(f"D chi{idx.label()} leaves the f-cube")
                    column[rows[m]] = c
                columns.append(column)
            self.matrices[k] = SparseMatrix.from_columns(columns, len(target), p)

    @property
    def dimension(self) -> int:
        return sum(len(b) for b in self.bases.values())

    def differential(self, idx: ChiIndex) -> Element:
        return self.complex.dchi(idx)


def f_cube(f: SupportFunction, p: int) -> FCube:
    return FCube(f, p)


class FCubeHomology:
    def __init__(self, homology: DimensionTable, boundaries: DimensionTable,
                 boundary_generators_match: bool):
        self.homology = homology
        self.boundaries = boundaries
        self.boundary_generators_match = boundary_generators_match


def f_cube_homology(f: SupportFunction, p: int) -> FCubeHomology:
    """Homology per |S| (all zero), and whether B^f is spanned by D chi_{S,f} with t_f not in S."""
    if f.is_zero():
        raise ValueError("f-cube homology needs supp f nonempty (t_f undefined for f = 0)")
    cube = f_cube(f, p)
    t = choose_t(f.support)
    homology = DimensionTable(("subset_size",), name=f"H(C^f) {f.label()}")
    boundaries = DimensionTable(("subset_size",), name=f"B(C^f) {f.label()}")
    match = True
    for k, basis in cube.bases.items():
        d_out = cube.matrices[k]
        d_in = cube.matrices.get(k - 1, SparseMatrix(len(basis), 0, p))
        z = kernel_basis(d_out)
        b = image_basis(d_in)
        h = subquotient(z, b, p, len(basis))
        homology.set((k,), h.dimension)
        boundaries.set((k,), len(b))
        if k >= 1:
            generators = []
            rows = {chi_monomial(idx, cube.complex.algebra): r for r, idx in enumerate(basis)}
            for idx in cube.bases[k - 1]:
                if t not in idx.S:
                    generators.append({rows[m]: c for m, c in cube.complex.dchi(idx).terms.items()})
            if span_rank(generators, p) != len(b) or len(generators) != len(b) or \
                    span_rank(generators + b, p) != len(b):
                match = False
    return FCubeHomology(homology, boundaries, match)


def truncated_mu_table(p: int, stem_max: int) -> DimensionTable:
    """Tridegree dimensions of the tensor product of F_p[mu_i]/mu_i^p."""
    top = max_index_for_stem(p, stem_max)
    table = DimensionTable(("filtration", "degree", "weight"), name="P_p(mu_i)")
    for exps in itertools.product(range(p), repeat=top + 1):
        t = Tridegree(0, 0, 0)
        for i, e in enumerate(exps):
            t = t + mu_tridegree(i, p).scale(e)
        if t.stem <= stem_max:
            label = "*".join(f"mu_{i}^{e}" if e > 1 else f"mu_{i}" for i, e in enumerate(exps) if e) or "1"
            table.add(t.as_tuple(), 1, label)
    return table


class DHomology:
    """Z^D, B^D and H^D of the bounded cube complex per tridegree."""

    def __init__(self, p: int, stem_max: int):
        self.p = p
        self.stem_max = stem_max
        self.max_index = max_index_for_stem(p, stem_max + 1)
        self.complex = CubeComplex(p, self.max_index)
        algebra = self.complex.algebra
        self.cells: Dict[Tuple[int, int, int], List[Monomial]] = defaultdict(list)
        for m in basis_enumerate(algebra, Bounds(stem_max + 1)):
            self.cells[algebra.tridegree(m).as_tuple()].append(m)
        self.index = {key: {m: k for k, m in enumerate(ms)} for key, ms in self.cells.items()}
        axes = ("filtration", "degree", "weight")
        self.Z = DimensionTable(axes, name="Z^D")
        self.B = DimensionTable(axes, name="B^D")
        self.H = DimensionTable(axes, name="H^D")
        self.bases: Dict[Tuple[int, int, int], object] = {}
        for key in sorted(self.cells):
            if Tridegree(*key).stem > stem_max:
                continue
            sq = subquotient(kernel_basis(self.matrix(key)), image_basis(self.matrix(self.source_of(key))),
                             p, len(self.cells[key]))
            ms = self.cells[key]
            labels = [" + ".join(f"{c}*{algebra.label(ms[k])}" if c != 1 else algebra.label(ms[k])
                                 for k, c in sorted(v.items())) for v in sq.homology]
            self.Z.set(key, len(sq.cycles))
            self.B.set(key, len(sq.boundaries))
            self.H.set(key, sq.dimension, labels=labels)
            self.bases[key] = sq
        logger.info(f"DHomology p={p} stem<={stem_max}: {len(self.cells)} cells, "
                    f"dim H total {self.H.total()}")

    def shift(self) -> Tridegree:
        p = self.p
        return Tridegree(-(p - 1), p - 2, p - 1)

    def target_of(self, key):
        s = self.shift()
        return (key[0] + s.filtration, key[1] + s.degree, key[2] + s.weight)

    def source_of(self, key):
        s = self.shift()
        return (key[0] - s.filtration, key[1] - s.degree, key[2] - s.weight)

    def matrix(self, key) -> SparseMatrix:
        """D from the cell at key to its target cell."""
        algebra = self.complex.algebra
        source = self.cells.get(key, [])
        target = self.target_of(key)
        rows = self.index.get(target, {})
        columns = []
        for m in source:
            image = apply_D(Element(algebra, {m: 1}))
            column = {}
            for t, c in image.terms.items():
                if t not in rows:
                    raise RuntimeError(f"D image {algebra.label(t)} outside cell {target}")
                column[rows[t]] = c
            columns.append(column)
        return SparseMatrix.from_columns(columns, len(rows), self.p)

    def by_bidegree(self, table: DimensionTable) -> DimensionTable:
        return table.project(("stem", "weight"), lambda k: (k[0] + k[1], k[2]))

    def vectorize(self, x: Element, key) -> Dict[int, int]:
        rows = self.index.get(tuple(key), {})
        vector = {}
        for m, c in x.terms.items():
            if m not in rows:
                raise ValueError(f"{x.algebra.label(m)} is not in cell {key}")
            vector[rows[m]] = c
        return vector


def ZBH_D(p: int, stem_max: int) -> Tuple[DimensionTable, DimensionTable, DimensionTable]:
    d = DHomology(p, stem_max)
    return d.Z, d.B, d.H


def fracture_check(d: DHomology) -> List[Dict]:
    """dim C per tridegree equals the convolution of P_p(mu_i) with the sum of the f-cubes."""
    p, stem_max = d.p, d.stem_max
    truncated = truncated_mu_table(p, stem_max)
    chis = Counter(chi_tridegree(idx, p).as_tuple() for idx in chi_indices_by_stem(p, stem_max))
    convolution: Counter = Counter()
    for key, dim in truncated.items():
        for ckey, cdim in chis.items():
            t = Tridegree(*key) + Tridegree(*ckey)
            if t.stem <= stem_max:
                convolution[t.as_tuple()] += dim * cdim
    failures = []
    keys = set(convolution) | {k for k in d.cells if Tridegree(*k).stem <= stem_max}
    for key in sorted(keys):
        actual = len(d.cells.get(key, []))
        if actual != convolution[key]:
            failures.append({"cell": list(key), "expected": convolution[key], "actual": actual})
    return failures


def dchi_basis_check(d: DHomology) -> List[Dict]:
    """The D chi_{S,f} with (S,f) in K are independent and span D of the sum of f-cubes."""
    p = d.p
    by_cell: Dict[Tuple[int, int, int], List[ChiIndex]] = defaultdict(list)
    for idx in chi_indices_by_stem(p, d.stem_max + 1):
        target = d.target_of(chi_tridegree(idx, p).as_tuple())
        if Tridegree(*target).stem <= d.stem_max:
            by_cell[target].append(idx)
    failures = []
    for key in sorted(by_cell):
        every = [d.vectorize(d.complex.dchi(idx), key) for idx in by_cell[key]]
        chosen = [d.vectorize(d.complex.dchi(idx), key) for idx in by_cell[key] if idx.in_K]
        r_all, r_chosen = span_rank(every, p), span_rank(chosen, p)
        if r_chosen != len(chosen) or r_chosen != r_all:
            failures.append({"cell": list(key), "expected": len(chosen), "actual": r_chosen,
                             "span": r_all})
    return failures
