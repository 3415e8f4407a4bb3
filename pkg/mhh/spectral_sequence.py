"""
Integral Tor Spectral Sequence Pages
E^2 = F_p[tau] (x) tensor_i (Lambda(lambda_{i+1}) (x) Gamma(mu_i)) with
d^{p-1}(gamma_{j+p} mu_i) = tau^{p-1} lambda_{i+1} gamma_j mu_i, the E^p page,
its comparison with Z^D[tau]/tau^{p-1} B^D[tau], and the collapse checks.
"""

import functools
import logging
from collections import defaultdict
from typing import Dict, List, Optional, Tuple

from mhh.cube_complex import (
    DHomology, apply_D, cube_generators, derivation, lambda_tridegree, max_index_for_stem,
    mu_tridegree, truncated_mu_table,
)
from mhh.dual_steenrod import TAU, TAU_TRIDEGREE
from mhh.fp_linalg import (
    SparseMatrix, Vector, echelon_of_vectors, intersection_dimension, kernel_basis,
    image_basis, span_rank, subquotient,
)
from mhh.graded_algebra import (
    AlgebraSpec, Bounds, Element, GeneratorKind, GeneratorSpec, Monomial, Tridegree,
    basis_enumerate,
)
from mhh.tables import DimensionTable

logger = logging.getLogger(__name__)

Cell = Tuple[int, int, int]
AXES = ("filtration", "degree", "weight")


@functools.lru_cache(maxsize=None)
def page_algebra(p: int, max_index: int, tau_kind: GeneratorKind = GeneratorKind.POLYNOMIAL) -> AlgebraSpec:
    """tau followed by mu_0, lambda_1, mu_1, ... (unbarred names, same tridegrees as C)."""
    height = p - 1 if tau_kind is GeneratorKind.TRUNCATED else None
    tau = GeneratorSpec(TAU, tau_kind, TAU_TRIDEGREE, height=height)
    return AlgebraSpec(p, [tau] + cube_generators(p, max_index),
                       name=f"E2[p={p},i<={max_index},{tau_kind.value}]")


def apply_d_pminus1(x: Element) -> Element:
    """The derivation gamma_{j+p} mu_i -> tau^{p-1} lambda_{i+1} gamma_j mu_i (unit 1)."""
    algebra = x.algebra
    p = algebra.p
    g = algebra.generator(TAU)
    if g.kind is GeneratorKind.TRUNCATED and g.height <= p - 1:
        return algebra.zero()
    return derivation(algebra, x, p, factor=algebra.monomial({TAU: p - 1}))


def bockstein(x: Element) -> Element:
    """The tau-Bockstein on MHH/tau^{p-1} = C; same action as D."""
    return apply_D(x)


def d_shift(p: int) -> Tridegree:
    return Tridegree(-(p - 1), p - 2, 0)


class PageTable:
    """Dimensions of a page per tridegree with homology representatives."""

    def __init__(self, r: int, table: DimensionTable, representatives: Dict[Cell, object]):
        self.r = r
        self.table = table
        self.representatives = representatives

    def __getitem__(self, key) -> int:
        return self.table[key]

    def __repr__(self):
        return f"PageTable(r={self.r}, {self.table!r})"


class PageComplex:
    """(E, d^{p-1}) on a bounded tridegree window, one matrix per cell.

    The weight window is closed under d^{p-1}, which preserves weight.
    Sources are enumerated one stem above stem_max so incoming
    differentials at the top are included.
    """

    def __init__(self, p: int, stem_max: int, weight_min: int, weight_max: int,
                 tau_kind: GeneratorKind = GeneratorKind.POLYNOMIAL):
        if weight_min > weight_max:
            raise ValueError(f"empty weight window [{weight_min}, {weight_max}]")
        self.p = p
        self.stem_max = stem_max
        self.weight_min = weight_min
        self.weight_max = weight_max
        self.algebra = page_algebra(p, max_index_for_stem(p, stem_max + 1), tau_kind)
        self.cells: Dict[Cell, List[Monomial]] = defaultdict(list)
        for m in basis_enumerate(self.algebra, Bounds(stem_max + 1, weight_min, weight_max)):
            self.cells[self.algebra.tridegree(m).as_tuple()].append(m)
        self.index = {key: {m: k for k, m in enumerate(ms)} for key, ms in self.cells.items()}
        self._matrices: Dict[Cell, SparseMatrix] = {}
        self._homology: Dict[Cell, object] = {}
        logger.debug(f"PageComplex p={self.p} stem<={stem_max} w in [{weight_min},{weight_max}] "
                     f"{tau_kind.value}: {sum(len(v) for v in self.cells.values())} monomials")

    def in_range(self, key: Cell) -> bool:
        return (Tridegree(*key).stem <= self.stem_max
                and self.weight_min <= key[2] <= self.weight_max)

    def target_of(self, key: Cell) -> Cell:
        s = d_shift(self.p)
        return (key[0] + s.filtration, key[1] + s.degree, key[2])

    def source_of(self, key: Cell) -> Cell:
        s = d_shift(self.p)
        return (key[0] - s.filtration, key[1] - s.degree, key[2])

    def vector(self, x: Element, key: Cell) -> Vector:
        rows = self.index.get(tuple(key), {})
        out = {}
        for m, c in x.terms.items():
            if m not in rows:
                raise ValueError(f"{self.algebra.label(m)} is not in cell {key}")
            out[rows[m]] = c
        return out

    def element(self, vector: Vector, key: Cell) -> Element:
        ms = self.cells.get(tuple(key), [])
        return Element(self.algebra, {ms[k]: c for k, c in vector.items()})

    def matrix(self, key: Cell) -> SparseMatrix:
        key = tuple(key)
        if key not in self._matrices:
            source = self.cells.get(key, [])
            target = self.target_of(key)
            n_rows = len(self.cells.get(target, []))
            columns = [self.vector(apply_d_pminus1(Element(self.algebra, {m: 1})), target)
                       if n_rows else {} for m in source]
            self._matrices[key] = SparseMatrix.from_columns(columns, n_rows, self.p)
        return self._matrices[key]

    def homology(self, key: Cell):
        key = tuple(key)
        if key not in self._homology:
            self._homology[key] = subquotient(kernel_basis(self.matrix(key)),
                                              image_basis(self.matrix(self.source_of(key))),
                                              self.p, len(self.cells.get(key, [])))
        return self._homology[key]

    def keys(self) -> List[Cell]:
        return sorted(k for k in self.cells if self.in_range(k))

    def dimension_table(self, name: str) -> DimensionTable:
        table = DimensionTable(AXES, name=name)
        for key in self.keys():
            table.set(key, len(self.cells[key]))
        return table

    def tau_power_map(self, vector: Vector, key: Cell, power: int) -> Tuple[Cell, Vector]:
        target = (key[0], key[1], key[2] - power)
        x = self.element(vector, key) * self.algebra.gen(TAU, power)
        return target, self.vector(x, target)


def E2_table(page: PageComplex) -> PageTable:
    return PageTable(page.p - 1, page.dimension_table("E2"), {})


def compute_Ep(p: int, stem_max: int, weight_min: int, weight_max: int,
               page: Optional[PageComplex] = None, d_homology: Optional[DHomology] = None) -> Dict:
    """E^p = H(E^2, d^{p-1}) per tridegree compared with Z^D[tau]/tau^{p-1} B^D[tau].

    dim E^p(f,d,w) is checked against sum_{c<p-1} Z^D(f,d,w+c) + sum_{a>=p-1} H^D(f,d,w+a).
    """
    if p == 2:
        raise ValueError("compute_Ep needs an odd prime; p=2 goes through the Bockstein route")
    page = page or PageComplex(p, stem_max, weight_min, weight_max)
    d_homology = d_homology or DHomology(p, stem_max)
    Ep = DimensionTable(AXES, name=f"E{p}")
    representatives = {}
    for key in page.keys():
        sq = page.homology(key)
        labels = [str(page.element(v, key)) for v in sq.homology]
        Ep.set(key, sq.dimension, labels=labels)
        representatives[key] = sq
    expected = expected_Ep(p, page.keys(), d_homology)
    failures = Ep.mismatches(expected, keys=page.keys())
    logger.info(f"E{p} p={p} stem<={stem_max}: {len(page.keys())} cells, {len(failures)} mismatches")
    return {"page": PageTable(p, Ep, representatives), "expected": expected, "failures": failures,
            "E2": E2_table(page)}


def expected_Ep(p: int, keys, d_homology: DHomology) -> DimensionTable:
    table = DimensionTable(AXES, name="Z^D[tau]/tau^{p-1}B^D[tau]")
    top = max((k[2] for k in d_homology.Z), default=0)
    for key in keys:
        f, d, w = key
        total = sum(d_homology.Z[(f, d, w + c)] for c in range(p - 1))
        total += sum(d_homology.H[(f, d, w + a)] for a in range(p - 1, max(p - 1, top - w + 1)))
        table.set(key, total)
    return table


def tau_power_injective(page: PageComplex) -> List[Dict]:
    """tau^{p-1}: E^{p-1}(f,d,w) -> E^{p-1}(f,d,w-(p-1)) is injective on every cell in range."""
    p = page.p
    failures = []
    for key in page.keys():
        target = (key[0], key[1], key[2] - (p - 1))
        if not page.in_range(target):
            continue
        images = [page.tau_power_map({k: 1}, key, p - 1)[1] for k in range(len(page.cells[key]))]
        found = span_rank(images, p)
        if found != len(images):
            failures.append({"cell": list(key), "expected": len(images), "actual": found})
    return failures


def _reduced(vectors: List[Vector], modulo: List[Vector], p: int) -> List[Vector]:
    form = echelon_of_vectors(modulo, 0, p)
    return [form.reduce(v) for v in vectors]


def tau_power_kernel(page: PageComplex, key: Cell) -> Optional[List[Vector]]:
    """Cycles representing ker(tau^{p-1}) on E^p at key, or None when the target is out of range."""
    p = page.p
    target = (key[0], key[1], key[2] - (p - 1))
    if not page.in_range(target):
        return None
    sq = page.homology(key)
    if not sq.homology:
        return []
    target_sq = page.homology(target)
    images = _reduced([page.tau_power_map(h, key, p - 1)[1] for h in sq.homology],
                      target_sq.boundaries, p)
    m = SparseMatrix.from_columns(images, len(page.cells.get(target, [])), p)
    kernel = []
    for coefficients in kernel_basis(m):
        v: Vector = {}
        for j, c in coefficients.items():
            for k, x in sq.homology[j].items():
                v[k] = (v.get(k, 0) + c * x) % p
        kernel.append({k: x for k, x in v.items() if x})
    return kernel


def tau_power_image(page: PageComplex, key: Cell) -> Optional[List[Vector]]:
    """Cycles representing im(tau^{p-1}) into E^p at key, or None when the source is out of range."""
    p = page.p
    source = (key[0], key[1], key[2] + (p - 1))
    if not page.in_range(source):
        return None
    return [page.tau_power_map(h, source, p - 1)[1] for h in page.homology(source).homology]


def ker_im_intersection(page: PageComplex) -> List[Dict]:
    """ker tau^{p-1} and im tau^{p-1} meet trivially in E^p, cellwise."""
    p = page.p
    failures = []
    for key in page.keys():
        kernel = tau_power_kernel(page, key)
        image = tau_power_image(page, key)
        if kernel is None or image is None:
            continue
        boundaries = page.homology(key).boundaries
        meet = intersection_dimension(kernel + boundaries, image + boundaries, p) - len(boundaries)
        if meet:
            failures.append({"cell": list(key), "expected": 0, "actual": meet})
    return failures


def localized_homology(p: int, stem_max: int, weight: int = 0) -> DimensionTable:
    """Homology of (E^2[tau^{-1}], d^{p-1}) at a fixed weight, keyed by (filtration, degree)."""
    page = PageComplex(p, stem_max, weight, weight, tau_kind=GeneratorKind.LAURENT)
    table = DimensionTable(("filtration", "degree"), name="E2[1/tau] homology")
    for key in page.keys():
        table.set(key[:2], page.homology(key).dimension)
    return table


def localized_homology_check(p: int, stem_max: int, weight: int = 0) -> List[Dict]:
    """Localized homology equals the truncated polynomial algebra on the mu_i, per (filtration, degree)."""
    found = localized_homology(p, stem_max, weight)
    expected = truncated_mu_table(p, stem_max).project(("filtration", "degree"), lambda k: k[:2])
    return found.mismatches(expected)


def _generator_classes(p: int, stem_max: int) -> List[Tuple[str, Tridegree]]:
    """tau, lambda_{i+1} and gamma_{p^j} mu_i within the stem range."""
    classes = [("tau", TAU_TRIDEGREE)]
    for i in range(max_index_for_stem(p, stem_max) + 1):
        lam = lambda_tridegree(i + 1, p)
        if lam.stem <= stem_max:
            classes.append((f"lambda_{i + 1}", lam))
        j = 0
        while mu_tridegree(i, p).scale(p ** j).stem <= stem_max:
            classes.append((f"gamma_{p ** j}(mu_{i})", mu_tridegree(i, p).scale(p ** j)))
            j += 1
    return classes


def _reduced_cells(p: int, stem_max: int) -> Dict[Cell, int]:
    """Tridegree counts of C (x) F_p[tau]/tau^{p-1} (or C alone at p=2)."""
    algebra = page_algebra(p, max_index_for_stem(p, stem_max), GeneratorKind.POLYNOMIAL)
    counts: Dict[Cell, int] = defaultdict(int)
    tau = algebra.index(TAU)
    # tau-free monomials have non-negative weight; tau powers below p-1 are attached afterwards
    free = [m for m in basis_enumerate(algebra, Bounds(stem_max, weight_min=0, weight_max=stem_max))
            if m[tau] == 0]
    for m in free:
        t = algebra.tridegree(m)
        for a in range(p - 1):
            counts[(t.filtration, t.degree, t.weight - a)] += 1
    return counts


def chow(key: Cell) -> int:
    return key[0] + 2 * key[2] - key[1]


def check_collapse_reduced(p: int, stem_max: int) -> Dict:
    """Mod tau^{p-1}: no generator admits a nonzero d^r target for r >= 2.

    A target cell (f-r, d+r-1, w) is looked up in the E^2 page itself, and
    the candidate search for hidden extensions on (gamma_{p^j} mu_i)^p and
    lambda_{i+1}^2 lists classes of lower filtration in the same stem and
    weight.
    """
    cells = _reduced_cells(p, stem_max + 1)
    inconclusive = []
    checked = 0
    for name, t in _generator_classes(p, stem_max):
        for r in range(2, t.filtration + 1):
            checked += 1
            target = (t.filtration - r, t.degree + r - 1, t.weight)
            if cells.get(target, 0):
                inconclusive.append({"class": name, "r": r, "cell": list(target),
                                     "chow": chow(target), "dim": cells[target]})
    hidden = []
    for name, t in _generator_classes(p, stem_max):
        if name == "tau":
            continue
        power = 2 if name.startswith("lambda") else p
        if t.scale(power).stem > stem_max:
            continue
        product = t.scale(power)
        for key, dim in sorted(cells.items()):
            same = key[0] + key[1] == product.stem and key[2] == product.weight
            if same and key[0] < product.filtration and dim:
                hidden.append({"class": f"{name}^{power}", "cell": list(key), "dim": dim})
    return {"checked": checked, "inconclusive": inconclusive, "hidden_extensions": hidden}


def check_collapse_integral(page: PageComplex) -> Dict:
    """For r >= p, d^r vanishes once ker q = im tau^{p-1} and ker L = ker tau^{p-1} hold on E^p.

    L is localization at tau, computed in the Laurent page of the same
    weight; q is reduction mod tau^{p-1}, which keeps the monomials with
    tau-exponent below p-1.
    """
    p = page.p
    tau = page.algebra.index(TAU)
    localized: Dict[int, PageComplex] = {}
    inconclusive = []
    checked = 0
    for key in page.keys():
        sq = page.homology(key)
        if not sq.dimension:
            continue
        image = tau_power_image(page, key)
        kernel = tau_power_kernel(page, key)
        if image is None or kernel is None:
            continue
        checked += 1
        boundaries = sq.boundaries
        ms = page.cells[key]
        high = [{k: 1} for k, m in enumerate(ms) if m[tau] >= p - 1]
        ker_q = intersection_dimension(sq.cycles, high, p) - len(boundaries)
        im_tau = span_rank(image + boundaries, p) - len(boundaries)
        if ker_q != im_tau:
            inconclusive.append({"cell": list(key), "check": "exactness", "ker_q": ker_q, "im_tau": im_tau})
        w = key[2]
        if w not in localized:
            localized[w] = PageComplex(p, page.stem_max, w, w, tau_kind=GeneratorKind.LAURENT)
        lp = localized[w]
        lkey = key
        l_boundaries = lp.homology(lkey).boundaries
        lifted = []
        for z in sq.cycles:
            x = page.element(z, key)
            lifted.append(lp.vector(Element(lp.algebra, dict(x.terms)), lkey))
        lifted = _reduced(lifted, l_boundaries, p)
        m = SparseMatrix.from_columns(lifted, len(lp.cells.get(lkey, [])), p)
        ker_l = len(kernel_basis(m)) - len(boundaries)
        ker_tau = len(kernel)
        if ker_l != ker_tau:
            inconclusive.append({"cell": list(key), "check": "localization", "ker_L": ker_l, "ker_tau": ker_tau})
    return {"checked": checked, "inconclusive": inconclusive}


def check_collapse(p: int, stem_max: int, variant: str = "mod_tau",
                   page: Optional[PageComplex] = None, weight_min: int = 0,
                   weight_max: Optional[int] = None) -> Dict:
    if variant in ("mod_tau", "mod-tau"):
        return check_collapse_reduced(p, stem_max)
    if p == 2:
        raise ValueError("the integral collapse check needs an odd prime")
    page = page or PageComplex(p, stem_max, weight_min,
                               stem_max // 2 if weight_max is None else weight_max)
    return check_collapse_integral(page)
