"""
Sparse Linear Algebra over F_p
Exact elimination, kernels, images and subquotients for the homology
computations. Vectors are dicts {coordinate: nonzero scalar}.
"""

import logging
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from sympy import isprime

logger = logging.getLogger(__name__)

Vector = Dict[int, int]


def check_prime(p: int) -> int:
    """Return p unchanged, or raise ValueError if it is not a prime."""
    if not isinstance(p, int) or isinstance(p, bool) or not isprime(p):
        raise ValueError(f"modulus must be prime (got {p!r})")
    return p


def inverse(a: int, p: int) -> int:
    """Multiplicative inverse of a nonzero scalar mod p."""
    a %= p
    if a == 0:
        raise ZeroDivisionError("zero has no inverse mod p")
    return pow(a, -1, p)


def canonical(vector: Vector) -> Tuple[Tuple[int, int], ...]:
    """Sorted coordinate list used for comparisons and golden output."""
    return tuple(sorted((c, v) for c, v in vector.items() if v))


def clean(vector: Vector, p: int) -> Vector:
    return {c: v % p for c, v in vector.items() if v % p}


def add_scaled(target: Vector, source: Vector, scale: int, p: int) -> None:
    """target += scale * source, in place."""
    for c, v in source.items():
        value = (target.get(c, 0) + scale * v) % p
        if value:
            target[c] = value
        else:
            target.pop(c, None)


class SparseMatrix:
    """Matrix over F_p acting on column vectors: (M v)[r] = sum_c M[r, c] v[c]."""

    def __init__(self, rows: int, cols: int, p: int,
                 entries: Optional[Iterable[Tuple[int, int, int]]] = None):
        if rows < 0 or cols < 0:
            raise ValueError("matrix dimensions must be non-negative")
        self.rows = rows
        self.cols = cols
        self.p = p
        self._rows: Dict[int, Vector] = {}
        for r, c, v in entries or ():
            if not (0 <= r < rows and 0 <= c < cols):
                raise ValueError(f"entry ({r}, {c}) outside {rows}x{cols}")
            row = self._rows.setdefault(r, {})
            if c in row:
                raise ValueError(f"duplicate entry at ({r}, {c})")
            if v % p:
                row[c] = v % p
        self._rows = {r: row for r, row in self._rows.items() if row}

    @classmethod
    def from_dense(cls, data: Sequence[Sequence[int]], p: int) -> "SparseMatrix":
        rows = len(data)
        cols = len(data[0]) if rows else 0
        entries = [(r, c, v) for r, line in enumerate(data) for c, v in enumerate(line) if v % p]
        return cls(rows, cols, p, entries)

    @classmethod
    def from_columns(cls, columns: Sequence[Vector], rows: int, p: int) -> "SparseMatrix":
        """Build the matrix whose c-th column is columns[c]."""
        entries = [(r, c, v) for c, col in enumerate(columns) for r, v in col.items() if v % p]
        return cls(rows, len(columns), p, entries)

    @property
    def entries(self) -> List[Tuple[int, int, int]]:
        return sorted((r, c, v) for r, row in self._rows.items() for c, v in row.items())

    def row(self, r: int) -> Vector:
        return dict(self._rows.get(r, {}))

    def row_vectors(self) -> List[Vector]:
        return [dict(self._rows[r]) for r in sorted(self._rows)]

    def transpose(self) -> "SparseMatrix":
        return SparseMatrix(self.cols, self.rows, self.p,
                            [(c, r, v) for r, c, v in self.entries])

    def apply(self, vector: Vector) -> Vector:
        result: Vector = {}
        for r, row in self._rows.items():
            total = sum(v * vector.get(c, 0) for c, v in row.items()) % self.p
            if total:
                result[r] = total
        return result

    def to_dense(self) -> List[List[int]]:
        dense = [[0] * self.cols for _ in range(self.rows)]
        for r, c, v in self.entries:
            dense[r][c] = v
        return dense

    def __repr__(self):
        return f"SparseMatrix({self.rows}x{self.cols}, p={self.p}, nnz={len(self.entries)})"


class EchelonForm:
    """Reduced row echelon form: rows[k] has pivot column pivots[k] with entry 1."""

    def __init__(self, rows: List[Vector], pivots: List[int], cols: int, p: int):
        self.rows = rows
        self.pivots = pivots
        self.cols = cols
        self.p = p

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def pivot_rows(self) -> Dict[int, Vector]:
        return dict(zip(self.pivots, self.rows))

    def reduce(self, vector: Vector) -> Vector:
        """Remainder of vector modulo the row space (zero iff vector is in the span)."""
        return _reduce(vector, self.pivot_rows(), self.p)


def _reduce(vector: Vector, pivot_rows: Dict[int, Vector], p: int) -> Vector:
    # pivot rows are fully reduced, so one pass over the pivot columns suffices
    result = clean(vector, p)
    for col in sorted(c for c in result if c in pivot_rows):
        coeff = result.get(col, 0)
        if coeff:
            add_scaled(result, pivot_rows[col], -coeff, p)
    return result


def _insert(vector: Vector, pivot_rows: Dict[int, Vector], p: int) -> Optional[int]:
    """Add a vector to an RREF basis in place; return its new pivot or None."""
    reduced = _reduce(vector, pivot_rows, p)
    if not reduced:
        return None
    col = min(reduced)
    scale = inverse(reduced[col], p)
    reduced = {c: v * scale % p for c, v in reduced.items()}
    for other in pivot_rows.values():
        coeff = other.get(col, 0)
        if coeff:
            add_scaled(other, reduced, -coeff, p)
    pivot_rows[col] = reduced
    return col


def echelon_of_vectors(vectors: Iterable[Vector], cols: int, p: int) -> EchelonForm:
    # sparsest rows enter first to limit fill-in
    pivot_rows: Dict[int, Vector] = {}
    for vector in sorted((v for v in vectors if v), key=lambda v: (len(v), canonical(v))):
        _insert(vector, pivot_rows, p)
    pivots = sorted(pivot_rows)
    return EchelonForm([pivot_rows[c] for c in pivots], pivots, cols, p)


def row_reduce(matrix: SparseMatrix) -> EchelonForm:
    """Row-echelon form of M over F_p; rank is the number of pivot columns."""
    form = echelon_of_vectors(matrix.row_vectors(), matrix.cols, matrix.p)
    logger.debug(f"row_reduce {matrix!r} -> rank {form.rank}")
    return form


def rank(matrix: SparseMatrix) -> int:
    return row_reduce(matrix).rank


def kernel_basis(matrix: SparseMatrix) -> List[Vector]:
    """Basis of {v : M v = 0}, one vector per free column in increasing order."""
    form = row_reduce(matrix)
    p = matrix.p
    pivot_set = set(form.pivots)
    basis = []
    for free in range(matrix.cols):
        if free in pivot_set:
            continue
        vector = {free: 1}
        for pivot, row in zip(form.pivots, form.rows):
            coeff = row.get(free, 0)
            if coeff:
                vector[pivot] = (-coeff) % p
        basis.append(vector)
    return basis


def image_basis(matrix: SparseMatrix) -> List[Vector]:
    """Basis of the column space of M, in reduced echelon form."""
    return echelon_of_vectors(matrix.transpose().row_vectors(), matrix.rows, matrix.p).rows


def span_rank(vectors: Sequence[Vector], p: int) -> int:
    return echelon_of_vectors(vectors, 0, p).rank


def in_span(vector: Vector, vectors: Sequence[Vector], p: int) -> bool:
    return not echelon_of_vectors(vectors, 0, p).reduce(vector)


def intersection_dimension(first: Sequence[Vector], second: Sequence[Vector], p: int) -> int:
    """dim(span A ∩ span B) = dim A + dim B - dim(A + B)."""
    return span_rank(first, p) + span_rank(second, p) - span_rank(list(first) + list(second), p)


class Subquotient:
    """span(Z) / span(B) with homology representatives H."""

    def __init__(self, ambient_dim: int, cycles: List[Vector], boundaries: List[Vector],
                 homology: List[Vector], p: int):
        self.ambient_dim = ambient_dim
        self.cycles = cycles
        self.boundaries = boundaries
        self.homology = homology
        self.p = p

    @property
    def dimension(self) -> int:
        return len(self.homology)

    def __repr__(self):
        return (f"Subquotient(ambient={self.ambient_dim}, Z={len(self.cycles)}, "
                f"B={len(self.boundaries)}, H={len(self.homology)})")


def subquotient(cycles: Sequence[Vector], boundaries: Sequence[Vector], p: int,
                ambient_dim: int = 0) -> Subquotient:
    """Homology representatives completing a basis of span(B) to one of span(Z)."""
    z_form = echelon_of_vectors(cycles, ambient_dim, p)
    for b in boundaries:
        if z_form.reduce(b):
            raise ValueError(f"boundary vector {canonical(b)} is not in the span of the cycles")
    pivot_rows: Dict[int, Vector] = {}
    for b in boundaries:
        _insert(b, pivot_rows, p)
    b_basis = [dict(pivot_rows[c]) for c in sorted(pivot_rows)]
    homology = []
    for z in z_form.rows:
        reduced = _reduce(z, pivot_rows, p)
        if reduced:
            lead = min(reduced)
            scale = inverse(reduced[lead], p)
            homology.append({c: v * scale % p for c, v in reduced.items()})
            _insert(reduced, pivot_rows, p)
    return Subquotient(ambient_dim, list(z_form.rows), b_basis, homology, p)


def homology(d_out: SparseMatrix, d_in: SparseMatrix) -> Subquotient:
    """H = ker(d_out) / im(d_in) at a single chain group."""
    if d_out.cols != d_in.rows:
        raise ValueError(f"composable maps required: {d_out!r} after {d_in!r}")
    return subquotient(kernel_basis(d_out), image_basis(d_in), d_out.p, d_out.cols)
