#!/usr/bin/env python3
"""
Unit tests for the cube complex (C, D), chi classes and the product coefficients.
"""

import pytest

from mhh.cube_complex import (
    EPSILON_PLACEMENTS,
    ChiIndex,
    CubeComplex,
    DHomology,
    SupportFunction,
    K_coeff,
    apply_D,
    chi,
    chi_indices,
    chi_tridegree,
    choose_t,
    d_sign,
    dchi_basis_check,
    epsilon,
    epsilon_closed_form,
    f_cube,
    f_cube_homology,
    fracture_check,
    subset_sign,
    support_functions,
    truncated_mu_table,
)
from mhh.graded_algebra import Bounds, Element, Tridegree, basis_enumerate

SIGNED_SPLIT = "signed K(S+u, T+t, f, g) + K(S+t, T+u, f, g)"

d = SupportFunction.delta


def idx(S, f):
    return ChiIndex(frozenset(S), f)


class TestSupportFunction:
    """Test finitely supported functions."""

    def test_label_and_parse(self):
        """Test the text form a0*d0+a1*d1."""
        f = SupportFunction.of({3: 2, 0: 1})
        assert f.label() == "1*d0+2*d3"
        assert SupportFunction.parse("1*d0+2*d3") == f
        assert SupportFunction.parse("0").is_zero()

    def test_zero_values_dropped(self):
        """Test that zero values leave the support."""
        assert SupportFunction.of({0: 0, 2: 1}).support == (2,)

    def test_sum(self):
        """Test pointwise addition."""
        assert d(0) + d(0, 2) + d(1) == SupportFunction.of({0: 3, 1: 1})

    def test_negative_rejected(self):
        """Test that negative indices raise."""
        with pytest.raises(ValueError):
            SupportFunction.of({-1: 1})

    def test_enumeration(self):
        """Test the count of functions on {0,1} with values at most 2."""
        assert len(support_functions([0, 1], 2)) == 9
        assert len(support_functions([0, 1], 2, include_zero=False)) == 8
        assert len(support_functions([0, 1, 2], 1, max_support=1)) == 4


class TestChooseT:
    """Test the choice t_S = min S."""

    def test_singleton(self):
        """Test that t of {3} is 3."""
        assert choose_t({3}) == 3

    def test_minimum(self):
        """Test that t of {1, 4, 7} is 1."""
        assert choose_t({7, 1, 4}) == 1

    def test_empty(self):
        """Test that the empty set raises."""
        with pytest.raises(ValueError):
            choose_t(set())


class TestChiIndex:
    """Test index membership in J and K."""

    def test_S_inside_support(self):
        """Test that S outside supp f raises."""
        with pytest.raises(ValueError):
            idx({2}, d(0))

    def test_in_K(self):
        """Test that K excludes the zero function and S containing t_f."""
        assert idx(set(), d(0) + d(1)).in_K
        assert idx({1}, d(0) + d(1)).in_K
        assert not idx({0}, d(0) + d(1)).in_K
        assert not idx(set(), SupportFunction()).in_K

    def test_label(self):
        """Test the x{S;f} label."""
        assert idx({1}, d(0) + d(1)).label() == "x{1;1*d0+1*d1}"


class TestChi:
    """Test the chi classes of C."""

    def test_empty(self, cube2):
        """Test that chi(empty, 0) = 1."""
        assert chi(idx(set(), SupportFunction()), cube2) == cube2.unit()

    @pytest.mark.parametrize("p", [2, 3])
    @pytest.mark.parametrize("n,j", [(0, 0), (1, 0), (0, 1), (2, 1)])
    def test_divided_power(self, p, n, j, cube2, cube3):
        """Test that chi(empty, p^j delta_n) = gamma_{p^{j+1}} mu_n."""
        algebra = cube2 if p == 2 else cube3
        assert chi(idx(set(), d(n, p ** j)), algebra) == algebra.gen(f"mu_{n}", p ** (j + 1))

    @pytest.mark.parametrize("m", [0, 1, 2])
    def test_lambda(self, m, cube3):
        """Test that chi({m}, delta_m) = lambda_{m+1}."""
        assert chi(idx({m}, d(m)), cube3) == cube3.gen(f"lambda_{m + 1}")

    def test_tridegree(self, cube3):
        """Test that chi_tridegree agrees with the monomial tridegree."""
        for i in chi_indices(support_functions([0, 1], 2)):
            element = chi(i, cube3)
            assert element.tridegrees() == [chi_tridegree(i, 3)]

    def test_default_algebra(self):
        """Test that chi builds a large enough algebra when none is given."""
        element = chi(idx({1}, d(0) + d(1)), p=2)
        assert element.algebra.has("lambda_2")


class TestDerivation:
    """Test D on C."""

    @pytest.mark.parametrize("i", [0, 1, 2])
    def test_defining_formula(self, i, cube3):
        """Test that D(gamma_p mu_i) = lambda_{i+1}."""
        assert apply_D(cube3.gen(f"mu_{i}", 3)) == cube3.gen(f"lambda_{i + 1}")

    def test_shifted_formula(self, cube3):
        """Test that D(gamma_{j+p} mu_0) = lambda_1 gamma_j mu_0."""
        expected = cube3.mono({"lambda_1": 1, "mu_0": 4})
        assert apply_D(cube3.gen("mu_0", 7)) == expected

    def test_lambda_is_a_cycle(self, cube2):
        """Test that D(lambda_1) = 0."""
        assert apply_D(cube2.gen("lambda_1")) == 0

    @pytest.mark.parametrize("j", [0, 1, 2])
    def test_small_gammas_are_cycles(self, j, cube3):
        """Test that D(gamma_j mu_i) = 0 for j < p."""
        assert apply_D(cube3.gen("mu_1", j)).is_zero()

    @pytest.mark.parametrize("p", [2, 3])
    def test_D_squared(self, p, cube2, cube3):
        """Test that D o D = 0 on the bounded basis."""
        algebra = cube2 if p == 2 else cube3
        for m in basis_enumerate(algebra, Bounds(20)):
            assert apply_D(apply_D(Element(algebra, {m: 1}))).is_zero()

    @pytest.mark.parametrize("p", [2, 3])
    def test_leibniz(self, p, cube2, cube3, rng):
        """Test D(xy) = D(x)y + (-1)^|x| x D(y) on random monomials."""
        algebra = cube2 if p == 2 else cube3
        for _ in range(200):
            a, b = algebra.random_monomial(rng, 24), algebra.random_monomial(rng, 24)
            x, y = Element(algebra, {a: 1}), Element(algebra, {b: 1})
            sign = -1 if algebra.parity(a) else 1
            assert apply_D(x * y) == apply_D(x) * y + (x * apply_D(y)).scale(sign)

    @pytest.mark.parametrize("p", [2, 3])
    def test_dchi_sum_formula(self, p):
        """Test D chi_{S,f} = sum over n in supp f - S of sign * chi_{S+n, f}."""
        cube = CubeComplex(p, 2)
        for i in chi_indices(support_functions([0, 1, 2], 2, max_support=2)):
            expected = cube.algebra.zero()
            for n in i.f.support:
                if n not in i.S:
                    expected = expected + cube.chi(idx(i.S | {n}, i.f)).scale(d_sign(i.S, n))
            assert cube.dchi(i) == expected, i.label()

    def test_bidegree_shift(self, cube3):
        """Test that D lowers stem by 1 and raises weight by p-1."""
        x = cube3.gen("mu_1", 5)
        source = x.tridegrees()[0]
        target = apply_D(x).tridegrees()[0]
        assert target.stem == source.stem - 1
        assert target.weight == source.weight + 2


class TestProductCoefficients:
    """Test K, subset signs and the chi product law."""

    def test_disjoint_supports(self):
        """Test that S = T = empty with disjoint supports gives 1."""
        assert K_coeff(set(), set(), d(0), d(1), 2) == 1

    def test_overlapping_subsets(self):
        """Test that S and T meeting gives 0."""
        assert K_coeff({0}, {0}, d(0), d(0), 3) == 0

    def test_outside_J(self):
        """Test that S outside supp f gives 0."""
        assert K_coeff({1}, set(), d(0), d(1), 3) == 0

    def test_binomial_vanishes(self):
        """Test that f = g = delta_1 at p=2 gives C(2,1) = 0."""
        assert K_coeff(set(), set(), d(1), d(1), 2) == 0
        assert chi(idx(set(), d(1)), p=2) * chi(idx(set(), d(1)), p=2) == 0

    def test_subset_sign(self):
        """Test the reordering sign of odd factors."""
        assert subset_sign({0}, {1}) == 1
        assert subset_sign({1}, {0}) == -1
        assert subset_sign({1, 2}, {0}) == 1

    @pytest.mark.parametrize("p", [2, 3])
    def test_chi_product_law(self, p):
        """Test chi_{S,f} chi_{T,g} = sign K chi_{S u T, f+g} for small indices."""
        cube = CubeComplex(p, 2)
        indices = chi_indices(support_functions([0, 1, 2], 2, max_support=2))
        for a in indices:
            for b in indices:
                coeff = subset_sign(a.S, b.S) * K_coeff(a.S, b.S, a.f, b.f, p) % p
                product = cube.chi(a) * cube.chi(b)
                if coeff:
                    assert product == cube.chi(idx(a.S | b.S, a.f + b.f)).scale(coeff)
                else:
                    assert product.is_zero()


class TestEpsilon:
    """Test the D chi product expansion."""

    def test_three_term_relation_summand(self):
        """Test D chi_{0,d0+d1} D chi_{0,d2} = D chi_{{2}, d0+d1+d2} at p=2."""
        f, g = d(0) + d(1), d(2)
        cube = CubeComplex(2, 2)
        assert cube.epsilon_expansion(idx(set(), f), idx(set(), g)) == {frozenset({2}): 1}
        assert epsilon(2, set(), set(), f, g, 2) == 1
        assert epsilon(1, set(), set(), f, g, 2) == 0

    def test_three_term_relation(self):
        """Test that the three cyclic products sum to zero at p=2."""
        cube = CubeComplex(2, 2)
        total = {}
        for f, g in ((d(0) + d(1), d(2)), (d(1) + d(2), d(0)), (d(2) + d(0), d(1))):
            for U, c in cube.epsilon_expansion(idx(set(), f), idx(set(), g)).items():
                total[U] = (total.get(U, 0) + c) % 2
        assert not any(total.values())

    def test_second_relation(self):
        """Test that d0+d1 times d1+d2 and 2d1 times d0+d2 expand identically at p=2."""
        cube = CubeComplex(2, 2)
        first = cube.epsilon_expansion(idx(set(), d(0) + d(1)), idx(set(), d(1) + d(2)))
        second = cube.epsilon_expansion(idx(set(), d(1, 2)), idx(set(), d(0) + d(2)))
        assert {U: c % 2 for U, c in first.items() if c % 2} == \
            {U: c % 2 for U, c in second.items() if c % 2}

    @pytest.mark.parametrize("u,S,T", [
        (0, set(), set()),
        (1, {1}, set()),
        (5, set(), set()),
    ])
    def test_preconditions(self, u, S, T):
        """Test that u equal to t, inside S u T or outside the support raises."""
        with pytest.raises(ValueError):
            epsilon(u, S, T, d(0) + d(1), d(2), 2)

    def test_requires_K(self):
        """Test that an index outside K raises."""
        with pytest.raises(ValueError):
            epsilon(1, {0}, set(), d(0) + d(1), d(2), 2)

    @pytest.mark.parametrize("p", [2, 3])
    def test_signed_split_placement(self, p):
        """Test that the signed split closed form reproduces every expansion coefficient."""
        cube = CubeComplex(p, 2)
        indices = chi_indices(support_functions([0, 1, 2], 2, max_support=2), only_K=True)
        for a in indices:
            for b in indices:
                expansion = cube.epsilon_expansion(a, b)
                h = a.f + b.f
                t = choose_t(h.support)
                for u in h.support:
                    if u == t or u in a.S | b.S:
                        continue
                    oracle = expansion.get(frozenset(a.S | b.S | {u}), 0) % p
                    assert epsilon_closed_form(u, a.S, b.S, a.f, b.f, p, SIGNED_SPLIT) == oracle

    def test_placements_registered(self):
        """Test that the candidate placements include the signed split."""
        assert SIGNED_SPLIT in EPSILON_PLACEMENTS
        assert len(EPSILON_PLACEMENTS) == 4


class TestFCube:
    """Test the f-graded summands C^f."""

    def test_single_delta(self):
        """Test that C^{d0} has basis gamma_p mu_0, lambda_1 with D an isomorphism."""
        cube = f_cube(d(0), 2)
        assert cube.dimension == 2
        assert cube.matrices[0].to_dense() == [[1]]

    @pytest.mark.parametrize("f", [d(0) + d(1), d(0) + d(1) + d(2), SupportFunction.of({0: 2, 2: 1})])
    def test_dimension(self, f):
        """Test that |supp f| = N gives total dimension 2^N."""
        assert f_cube(f, 3).dimension == 2 ** len(f.support)

    @pytest.mark.parametrize("p", [2, 3])
    @pytest.mark.parametrize("f", [d(0), d(0, 2), d(0) + d(1), d(0) + d(1) + d(2), d(1, 3) + d(2)])
    def test_contractible(self, p, f):
        """Test that every f-cube with f nonzero is acyclic."""
        result = f_cube_homology(f, p)
        assert result.homology.total() == 0
        assert result.boundary_generators_match

    def test_boundary_ranks(self):
        """Test the boundary ranks 0, 1, 1 of C^{d0+d1} by subset size."""
        result = f_cube_homology(d(0) + d(1), 2)
        assert [result.boundaries[(k,)] for k in range(3)] == [0, 1, 1]

    def test_zero_function(self):
        """Test that f = 0 is refused."""
        with pytest.raises(ValueError):
            f_cube_homology(SupportFunction(), 2)


class TestDHomology:
    """Test Z, B and H of D."""

    @pytest.fixture(scope="class")
    def homology2(self):
        return DHomology(2, 10)

    @pytest.fixture(scope="class")
    def homology3(self):
        return DHomology(3, 14)

    def test_mu_zero_survives(self, homology2):
        """Test that H^D at mu_0 has dimension 1."""
        assert homology2.H[(1, 1, 0)] == 1

    def test_mu_zero_power_dies(self, homology2):
        """Test that H^D at gamma_2 mu_0 is zero at p=2."""
        assert homology2.H[(2, 2, 0)] == 0

    def test_lambda_is_a_boundary(self, homology2):
        """Test that B^D at lambda_1 has dimension 1."""
        assert homology2.B[(1, 2, 1)] == 1

    def test_truncated_polynomial(self, homology2, homology3):
        """Test that H^D matches the tensor product of F_p[mu_i]/mu_i^p."""
        for h in (homology2, homology3):
            expected = truncated_mu_table(h.p, h.stem_max)
            assert h.H.mismatches(expected) == []
            assert h.by_bidegree(h.H).mismatches(h.by_bidegree(expected)) == []

    def test_fracture(self, homology2, homology3):
        """Test the convolution count of C against truncated mu and f-cubes."""
        assert fracture_check(homology2) == []
        assert fracture_check(homology3) == []

    def test_dchi_basis(self, homology2, homology3):
        """Test that D chi over K is independent and spans the f-cube boundaries."""
        assert dchi_basis_check(homology2) == []
        assert dchi_basis_check(homology3) == []

    def test_truncated_table_p3(self):
        """Test that mu_0^2 sits in tridegree (2, 2, 0) at p=3."""
        table = truncated_mu_table(3, 4)
        assert table[(2, 2, 0)] == 1
        assert table.labels((2, 2, 0)) == ["mu_0^2"]
        assert table[(3, 3, 0)] == 0

    def test_shift(self, homology3):
        """Test the tridegree shift of D."""
        assert homology3.shift() == Tridegree(-2, 1, 2)
