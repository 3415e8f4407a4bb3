"""
Bidegree Charts
One dot per basis class at (stem, weight) or (stem, chow), vertical lines for
tau-multiplication and slanted lines for multiplication by the mu_i, written
as plain SVG 1.1.
"""

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from html import escape
from typing import Dict, List, Tuple

from mhh.cube_complex import max_index_for_stem, mu_name
from mhh.dual_steenrod import TAU
from mhh.graded_algebra import Element
from mhh.mhh_rings import CoefficientRing, ReducedRing

logger = logging.getLogger(__name__)

CELL = 36
MARGIN = 48
RADIUS = 4
TAU_COLOR = "#1f4e79"
MU_COLOR = "#b04a1a"


@dataclass(frozen=True, order=True)
class ChartClass:
    stem: int
    weight: int
    label: str


@dataclass
class ChartSpec:
    """Marks and multiplication lines of one chart."""
    title: str
    stem_max: int
    y_axis: str
    classes: List[ChartClass] = field(default_factory=list)
    tau_lines: List[Tuple[str, str]] = field(default_factory=list)
    mu_lines: List[Tuple[str, str, int]] = field(default_factory=list)

    def y_of(self, c: ChartClass) -> int:
        return c.weight if self.y_axis == "weight" else 2 * c.weight - c.stem

    def labels(self) -> List[str]:
        return sorted(c.label for c in self.classes)


def _ring_chart(ring: CoefficientRing, spec: ChartSpec, weight_min: int, weight_max: int):
    p = ring.p
    basis = ring.basis(spec.stem_max, weight_min, weight_max)
    known = {m: m.label() for m in basis}
    for m in basis:
        b = ring.bidegree(m)
        spec.classes.append(ChartClass(b.stem, b.weight, m.label()))
    tau = ring.tau(1)
    mus = [(i, ring.mu(i)) for i in range(max_index_for_stem(p, spec.stem_max) + 1)]
    for m in basis:
        x = ring.element({m: 1})
        for t in sorted((x * tau).terms):
            if t in known:
                spec.tau_lines.append((known[m], known[t]))
        for i, mu in mus:
            for t in sorted((x * mu).terms):
                if t in known:
                    spec.mu_lines.append((known[m], known[t], i))


def _reduced_chart(ring: ReducedRing, spec: ChartSpec, weight_min: int, weight_max: int):
    algebra, basis = ring.basis(spec.stem_max, weight_min, weight_max)
    known = {m: algebra.label(m) for m in basis}
    for m in basis:
        t = algebra.tridegree(m)
        spec.classes.append(ChartClass(t.stem, t.weight, algebra.label(m)))
    factors = []
    if algebra.has(TAU):
        factors.append((None, algebra.gen(TAU)))
    for i in range(max_index_for_stem(ring.p, spec.stem_max) + 1):
        if algebra.has(mu_name(i)):
            factors.append((i, algebra.gen(mu_name(i))))
    for m in basis:
        x = Element(algebra, {m: 1})
        for i, g in factors:
            for t in sorted((x * g).terms):
                if t not in known:
                    continue
                if i is None:
                    spec.tau_lines.append((known[m], known[t]))
                else:
                    spec.mu_lines.append((known[m], known[t], i))


def chart_spec(ring, stem_max: int, weight_min: int, weight_max: int,
               y_axis: str = "weight") -> ChartSpec:
    """Collect the classes of ring in the window and the tau and mu_i lines between them."""
    if y_axis not in ("weight", "chow"):
        raise ValueError(f"unknown y axis {y_axis!r}")
    spec = ChartSpec(title=f"{ring.kind} p={ring.p}", stem_max=stem_max, y_axis=y_axis)
    if isinstance(ring, ReducedRing):
        _reduced_chart(ring, spec, weight_min, weight_max)
    else:
        _ring_chart(ring, spec, weight_min, weight_max)
    if not spec.classes:
        raise ValueError(f"empty chart window: stems <= {stem_max}, weights [{weight_min}, {weight_max}]")
    spec.classes.sort()
    spec.tau_lines = sorted(set(spec.tau_lines))
    spec.mu_lines = sorted(set(spec.mu_lines))
    logger.info(f"chart {spec.title}: {len(spec.classes)} classes, {len(spec.tau_lines)} tau lines, "
                f"{len(spec.mu_lines)} mu lines")
    return spec


def _positions(spec: ChartSpec, y_top: int) -> Dict[str, Tuple[float, float]]:
    """Mark centers; classes sharing a point are spread horizontally inside the cell."""
    groups: Dict[Tuple[int, int], List[ChartClass]] = defaultdict(list)
    for c in spec.classes:
        groups[(c.stem, spec.y_of(c))].append(c)
    where = {}
    for (s, y), members in groups.items():
        n = len(members)
        for k, c in enumerate(sorted(members)):
            dx = (k - (n - 1) / 2) * min(2.5 * RADIUS, (CELL - 2 * RADIUS) / max(n, 1))
            where[c.label] = (MARGIN + s * CELL + dx, MARGIN + (y_top - y) * CELL)
    return where


def render_svg(spec: ChartSpec) -> str:
    """Byte-deterministic SVG for a chart spec."""
    ys = [spec.y_of(c) for c in spec.classes]
    y_bottom, y_top = min(ys), max(ys)
    width = 2 * MARGIN + spec.stem_max * CELL
    height = 2 * MARGIN + (y_top - y_bottom) * CELL
    where = _positions(spec, y_top)
    counts: Dict[Tuple[int, int], int] = defaultdict(int)
    for c in spec.classes:
        counts[(c.stem, spec.y_of(c))] += 1

    def pt(v: float) -> str:
        return f"{v:.1f}"

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<title>{escape(spec.title)}</title>',
        '<g id="grid" stroke="#dddddd" stroke-width="1">',
    ]
    for s in range(spec.stem_max + 1):
        x = MARGIN + s * CELL
        out.append(f'<line x1="{x}" y1="{MARGIN}" x2="{x}" y2="{height - MARGIN}"/>')
    for y in range(y_bottom, y_top + 1):
        py = MARGIN + (y_top - y) * CELL
        out.append(f'<line x1="{MARGIN}" y1="{py}" x2="{width - MARGIN}" y2="{py}"/>')
    out.append('</g>')
    out.append('<g id="axes" font-family="monospace" font-size="10" fill="#333333">')
    for s in range(spec.stem_max + 1):
        out.append(f'<text x="{MARGIN + s * CELL}" y="{height - MARGIN + 16}" '
                   f'text-anchor="middle">{s}</text>')
    for y in range(y_bottom, y_top + 1):
        out.append(f'<text x="{MARGIN - 10}" y="{MARGIN + (y_top - y) * CELL + 3}" '
                   f'text-anchor="end">{y}</text>')
    out.append(f'<text x="{width // 2}" y="{height - 8}" text-anchor="middle">stem</text>')
    out.append(f'<text x="12" y="{MARGIN - 16}">{spec.y_axis}</text>')
    out.append('</g>')
    out.append(f'<g id="tau-lines" stroke="{TAU_COLOR}" stroke-width="1.5">')
    for a, b in spec.tau_lines:
        (x1, y1), (x2, y2) = where[a], where[b]
        out.append(f'<line x1="{pt(x1)}" y1="{pt(y1)}" x2="{pt(x2)}" y2="{pt(y2)}"/>')
    out.append('</g>')
    out.append(f'<g id="mu-lines" stroke="{MU_COLOR}" stroke-width="1">')
    for a, b, i in spec.mu_lines:
        (x1, y1), (x2, y2) = where[a], where[b]
        out.append(f'<line class="mu_{i}" x1="{pt(x1)}" y1="{pt(y1)}" x2="{pt(x2)}" y2="{pt(y2)}"/>')
    out.append('</g>')
    out.append('<g id="classes" fill="#000000">')
    for c in spec.classes:
        x, y = where[c.label]
        out.append(f'<circle cx="{pt(x)}" cy="{pt(y)}" r="{RADIUS}" data-stem="{c.stem}" '
                   f'data-weight="{c.weight}"><title>{escape(c.label)}</title></circle>')
    out.append('</g>')
    out.append('<g id="multiplicities" font-family="monospace" font-size="9" fill="#555555">')
    for (s, y), n in sorted(counts.items()):
        if n > 1:
            out.append(f'<text x="{MARGIN + s * CELL + 6}" y="{MARGIN + (y_top - y) * CELL - 6}">{n}</text>')
    out.append('</g>')
    out.append('</svg>')
    return "\n".join(out) + "\n"


def chart_svg(ring, stem_max: int, weight_min: int, weight_max: int, y_axis: str = "weight") -> str:
    return render_svg(chart_spec(ring, stem_max, weight_min, weight_max, y_axis))
