"""
Normalized Bar Complex
Words over the augmentation ideal of a presented algebra with coefficients in
the tau-line (F_p[tau], F_p[tau]/tau^n, F_p[tau^{+-1}] or plain F_p), the
alternating face differential, the shuffle product and the Tor E^2 page.
"""

import itertools
import logging
from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from mhh.fp_linalg import SparseMatrix, homology
from mhh.graded_algebra import (
    AlgebraSpec, Bounds, GeneratorKind, GeneratorSpec, Monomial, Tridegree, basis_enumerate,
)
from mhh.dual_steenrod import TAU, SteenrodVariant, steenrod_presentation
from mhh.tables import DimensionTable

logger = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class BarWord:
    letters: Tuple[Monomial, ...]
    tau_power: int = 0

    @property
    def filtration(self) -> int:
        return len(self.letters)


class BarChain:
    """F_p-combination of bar words."""

    __slots__ = ("complex", "terms")

    def __init__(self, complex_: "BarComplex", terms: Dict[BarWord, int]):
        self.complex = complex_
        p = complex_.p
        self.terms = {w: c % p for w, c in terms.items() if c % p}

    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, word: BarWord) -> int:
        return self.terms.get(word, 0)

    def scale(self, c: int) -> "BarChain":
        return BarChain(self.complex, {w: c * v for w, v in self.terms.items()})

    def __add__(self, other: "BarChain") -> "BarChain":
        terms = dict(self.terms)
        for w, c in other.terms.items():
            terms[w] = terms.get(w, 0) + c
        return BarChain(self.complex, terms)

    def __sub__(self, other: "BarChain") -> "BarChain":
        return self + other.scale(-1)

    def __eq__(self, other):
        if isinstance(other, int) and other == 0:
            return self.is_zero()
        return isinstance(other, BarChain) and self.terms == other.terms

    def __hash__(self):
        return hash(tuple(sorted(self.terms.items())))

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for w in sorted(self.terms):
            c = self.terms[w]
            label = self.complex.label(w)
            parts.append(label if c == 1 else f"{c}*{label}")
        return " + ".join(parts)


class BarComplex:
    """B(M, A, M) over the augmentation ideal of A, where M is the tau-line of A."""

    def __init__(self, algebra: AlgebraSpec):
        self.algebra = algebra
        self.p = algebra.p
        self._tau: Optional[int] = algebra.index(TAU) if algebra.has(TAU) else None
        self._tau_spec: Optional[GeneratorSpec] = (
            algebra.generators[self._tau] if self._tau is not None else None)
        self._products: Dict[Tuple[Monomial, Monomial], List[Tuple[int, int, Monomial]]] = {}
        self._letters: Dict[int, List[Monomial]] = {}

    def __repr__(self):
        return f"BarComplex({self.algebra!r})"

    # coefficients and letters

    def _split(self, m: Monomial) -> Tuple[int, Monomial]:
        if self._tau is None:
            return 0, m
        k = self._tau
        return m[k], m[:k] + (0,) + m[k + 1:]

    def _tau_allowed(self, power: int) -> bool:
        spec = self._tau_spec
        if spec is None:
            return power == 0
        if spec.kind is GeneratorKind.LAURENT:
            return True
        if power < 0:
            return False
        return spec.kind is not GeneratorKind.TRUNCATED or power < spec.height

    def letter_tridegree(self, letter: Monomial) -> Tridegree:
        return self.algebra.tridegree(letter)

    def letter_parity(self, letter: Monomial) -> int:
        """Parity of a letter in the bar construction: its degree plus one."""
        return (self.algebra.parity(letter) + 1) % 2

    def letters(self, degree_max: int) -> List[Monomial]:
        """Tau-free, non-unit normal monomials of degree at most degree_max."""
        if degree_max not in self._letters:
            if degree_max < 1:
                self._letters[degree_max] = []
            else:
                top = max(1, max((g.tridegree.weight for g in self.algebra.generators), default=1))
                bounds = Bounds(degree_max, weight_min=0, weight_max=top * degree_max)
                found = []
                for m in basis_enumerate(self.algebra, bounds):
                    power, rest = self._split(m)
                    if power == 0 and any(rest):
                        found.append(rest)
                self._letters[degree_max] = sorted(found)
        return self._letters[degree_max]

    def tridegree(self, word: BarWord) -> Tridegree:
        d = sum(self.algebra.tridegree(a).degree for a in word.letters)
        w = sum(self.algebra.tridegree(a).weight for a in word.letters)
        return Tridegree(word.filtration, d, w - word.tau_power)

    def label(self, word: BarWord) -> str:
        body = "|".join(self.algebra.label(a) for a in word.letters)
        prefix = "" if word.tau_power == 0 else (
            "tau*" if word.tau_power == 1 else f"tau^{word.tau_power}*")
        return f"{prefix}[{body}]"

    def word(self, *letters: Dict[str, int], tau_power: int = 0) -> BarWord:
        return BarWord(tuple(self.algebra.monomial(e) for e in letters), tau_power)

    def chain(self, terms: Dict[BarWord, int]) -> BarChain:
        return BarChain(self, terms)

    # enumeration

    def words(self, bounds: Bounds) -> List[BarWord]:
        """All words with tridegree in bounds (stem = filtration + degree)."""
        letters = self.letters(bounds.stem_max - 1)
        info = [(a, self.algebra.tridegree(a)) for a in letters]
        result: List[BarWord] = []
        s_max = bounds.stem_max if bounds.filtration_max is None else bounds.filtration_max

        def extend(prefix: List[Monomial], stem: int, weight: int):
            for power in self._tau_range(weight, bounds):
                result.append(BarWord(tuple(prefix), power))
            if len(prefix) >= s_max:
                return
            for a, t in info:
                step = t.degree + 1
                if stem + step > bounds.stem_max:
                    continue
                prefix.append(a)
                extend(prefix, stem + step, weight + t.weight)
                prefix.pop()

        extend([], 0, 0)
        result.sort()
        return result

    def _tau_range(self, weight: int, bounds: Bounds) -> List[int]:
        lo, hi = bounds.weight_min, bounds.weight_max
        spec = self._tau_spec
        if spec is None:
            ok = (lo is None or weight >= lo) and (hi is None or weight <= hi)
            return [0] if ok else []
        if spec.kind is GeneratorKind.TRUNCATED:
            candidates = range(spec.height)
        else:
            if lo is None:
                raise ValueError("a weight_min is required for tau coefficients")
            top = weight - lo
            if spec.kind is GeneratorKind.LAURENT:
                if hi is None:
                    raise ValueError("a weight_max is required for Laurent tau coefficients")
                candidates = range(weight - hi, top + 1)
            else:
                candidates = range(0, top + 1)
        return [a for a in candidates
                if (lo is None or weight - a >= lo) and (hi is None or weight - a <= hi)]

    def bar_basis(self, s: int, bounds: Bounds) -> List[BarWord]:
        return [w for w in self.words(bounds) if w.filtration == s]

    # structure maps

    def _letter_product(self, a: Monomial, b: Monomial) -> List[Tuple[int, int, Monomial]]:
        key = (a, b)
        if key not in self._products:
            coeff, raw = self.algebra.monomial_product(a, b)
            terms = []
            if coeff:
                for m, c in sorted(self.algebra.normalize({raw: coeff}).items()):
                    power, rest = self._split(m)
                    if not any(rest):
                        raise RuntimeError(f"product {self.algebra.label(m)} left the augmentation ideal")
                    terms.append((c, power, rest))
            self._products[key] = terms
        return self._products[key]

    def d1(self, chain: BarChain) -> BarChain:
        """Alternating inner faces; the end faces vanish since letters lie in the augmentation ideal."""
        p = self.p
        out: Dict[BarWord, int] = defaultdict(int)
        for word, coeff in chain.terms.items():
            letters = word.letters
            exponent = 0
            for i in range(len(letters) - 1):
                exponent += self.letter_parity(letters[i])
                sign = -1 if exponent % 2 else 1
                for c, power, product in self._letter_product(letters[i], letters[i + 1]):
                    new_power = word.tau_power + power
                    if not self._tau_allowed(new_power):
                        continue
                    new = BarWord(letters[:i] + (product,) + letters[i + 2:], new_power)
                    out[new] = (out[new] + sign * c * coeff) % p
        return BarChain(self, dict(out))

    def shuffle_words(self, x: BarWord, y: BarWord) -> BarChain:
        """Eilenberg-Mac Lane shuffle product with Koszul signs on letter parities."""
        power = x.tau_power + y.tau_power
        if not self._tau_allowed(power):
            return BarChain(self, {})
        s, t = len(x.letters), len(y.letters)
        xpar = [self.letter_parity(a) for a in x.letters]
        ypar = [self.letter_parity(b) for b in y.letters]
        out: Dict[BarWord, int] = defaultdict(int)
        for positions in itertools.combinations(range(s + t), s):
            slots = set(positions)
            letters = []
            swaps = 0
            xi = yi = 0
            for k in range(s + t):
                if k in slots:
                    letters.append(x.letters[xi])
                    xi += 1
                else:
                    # y letter passes the x letters not yet placed
                    swaps += ypar[yi] * sum(xpar[xi:])
                    letters.append(y.letters[yi])
                    yi += 1
            word = BarWord(tuple(letters), power)
            out[word] += -1 if swaps % 2 else 1
        return BarChain(self, dict(out))

    def shuffle(self, x: BarChain, y: BarChain) -> BarChain:
        total = BarChain(self, {})
        for wx, cx in x.terms.items():
            for wy, cy in y.terms.items():
                total = total + self.shuffle_words(wx, wy).scale(cx * cy)
        return total

    def degree_parity(self, word: BarWord) -> int:
        return sum(self.letter_parity(a) for a in word.letters) % 2

    def deconcatenate(self, word: BarWord) -> List[Tuple[BarWord, BarWord]]:
        """Tensor-coalgebra coproduct; the tau coefficient rides on the left factor."""
        return [(BarWord(word.letters[:i], word.tau_power), BarWord(word.letters[i:], 0))
                for i in range(len(word.letters) + 1)]

    # homology

    def tor_E2(self, bounds: Bounds) -> DimensionTable:
        """Homology of (words, d1) per tridegree cell inside bounds, with representative cycles."""
        wider = Bounds(bounds.stem_max + 1, bounds.weight_min, bounds.weight_max,
                       None if bounds.filtration_max is None else bounds.filtration_max + 1)
        cells: Dict[Tuple[int, int, int], List[BarWord]] = defaultdict(list)
        for word in self.words(wider):
            cells[self.tridegree(word).as_tuple()].append(word)
        index = {key: {w: k for k, w in enumerate(ws)} for key, ws in cells.items()}

        def matrix(source: Tuple[int, int, int]) -> SparseMatrix:
            target = (source[0] - 1, source[1], source[2])
            rows = index.get(target, {})
            columns = []
            for word in cells.get(source, []):
                image = self.d1(BarChain(self, {word: 1}))
                column = {}
                for w, c in image.terms.items():
                    if w not in rows:
                        raise RuntimeError(f"d1 image {self.label(w)} outside enumerated cell {target}")
                    column[rows[w]] = c
                columns.append(column)
            return SparseMatrix.from_columns(columns, len(rows), self.p)

        table = DimensionTable(("filtration", "degree", "weight"), name=f"Tor E2 {self.algebra.name}")
        for key in sorted(cells):
            t = Tridegree(*key)
            if not bounds.contains(t):
                continue
            d_out = matrix(key)
            above = (key[0] + 1, key[1], key[2])
            d_in = matrix(above) if above in cells else SparseMatrix(len(cells[key]), 0, self.p)
            h = homology(d_out, d_in)
            words = cells[key]
            reps = [BarChain(self, {words[c]: v for c, v in vec.items()}) for vec in h.homology]
            table.set(key, h.dimension, labels=[repr(r) for r in reps], basis=reps)
            logger.debug(f"tor_E2 cell {key}: words={len(words)} dim={h.dimension}")
        return table


def steenrod_bar_complex(v: SteenrodVariant, stem_max: int) -> BarComplex:
    return BarComplex(steenrod_presentation(v, stem_max))


def bar_basis(s: int, v: SteenrodVariant, bounds: Bounds) -> List[BarWord]:
    return steenrod_bar_complex(v, bounds.stem_max).bar_basis(s, bounds)


def tor_E2(v: SteenrodVariant, bounds: Bounds) -> DimensionTable:
    return steenrod_bar_complex(v, bounds.stem_max + 1).tor_E2(bounds)


def coproduct_gamma(k: int) -> List[Tuple[int, int]]:
    """Sum over i + j = k of gamma_i (x) gamma_j, as (i, j) pairs with i descending."""
    if k < 0:
        raise ValueError("divided power index must be non-negative")
    return [(i, k - i) for i in range(k, -1, -1)]


def synthetic_algebra(p: int, kind: GeneratorKind, degree: int) -> AlgebraSpec:
    """One generator x of tridegree (0, degree, 0): Lambda(x) or S(x)."""
    return AlgebraSpec(p, [GeneratorSpec("x", kind, Tridegree(0, degree, 0))],
                       name=f"{kind.value}(x)")


def torsion_product_closed_form(kind: GeneratorKind, degree: int,
                                filtration_max: int) -> DimensionTable:
    """Tor over Lambda(x) is Gamma(sigma x); Tor over S(x) is Lambda(sigma x)."""
    table = DimensionTable(("filtration", "degree", "weight"), name=f"Tor {kind.value}(x)")
    if kind is GeneratorKind.EXTERIOR:
        for j in range(filtration_max + 1):
            table.set((j, j * degree, 0), 1)
    elif kind is GeneratorKind.POLYNOMIAL:
        table.set((0, 0, 0), 1)
        if filtration_max >= 1:
            table.set((1, degree, 0), 1)
    else:
        raise ValueError(f"no closed form for {kind.value} generators")
    return table
