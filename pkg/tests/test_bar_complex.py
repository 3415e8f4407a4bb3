#!/usr/bin/env python3
"""
Unit tests for the bar complex, shuffle product and Tor E2.
"""

import pytest

from mhh.bar_complex import (
    BarComplex,
    BarWord,
    bar_basis,
    coproduct_gamma,
    steenrod_bar_complex,
    synthetic_algebra,
    tor_E2,
    torsion_product_closed_form,
)
from mhh.dual_steenrod import SteenrodVariant, Variant
from mhh.graded_algebra import Bounds, GeneratorKind


@pytest.fixture(scope="module")
def integral2():
    return steenrod_bar_complex(SteenrodVariant(2, Variant.INTEGRAL), 8)


@pytest.fixture(scope="module")
def reduced2():
    return steenrod_bar_complex(SteenrodVariant(2, Variant.MOD_TAU), 8)


@pytest.fixture(scope="module")
def reduced3():
    return steenrod_bar_complex(SteenrodVariant(3, Variant.MOD_TAU), 12)


def single(complex_, word):
    return complex_.chain({word: 1})


class TestD1:
    """Test the alternating face differential."""

    def test_tau_zero_pair(self, integral2):
        """Test that d1[tau_0|tau_0] = tau[xi_1] at p=2."""
        bc = integral2
        source = single(bc, bc.word({"tau_0": 1}, {"tau_0": 1}))
        assert bc.d1(source) == single(bc, bc.word({"xi_1": 1}, tau_power=1))

    @pytest.mark.parametrize("i", [0, 1, 2])
    def test_tau_i_pairs(self, integral2, i):
        """Test that d1[tau_i|tau_i] = tau[xi_{i+1}] for the first few i."""
        bc = integral2
        if not bc.algebra.has(f"tau_{i}"):
            pytest.skip("generator beyond presentation")
        source = single(bc, bc.word({f"tau_{i}": 1}, {f"tau_{i}": 1}))
        assert bc.d1(source) == single(bc, bc.word({f"xi_{i + 1}": 1}, tau_power=1))

    def test_single_letter(self, integral2):
        """Test that d1 of a one-letter word is zero."""
        bc = integral2
        assert bc.d1(single(bc, bc.word({"xi_1": 1}))) == 0

    def test_exterior_pair_vanishes(self, reduced3):
        """Test that d1[tau_0|tau_0] = 0 when tau_0 is exterior."""
        bc = reduced3
        assert bc.d1(single(bc, bc.word({"tau_0": 1}, {"tau_0": 1}))).is_zero()

    def test_d1_squared(self, integral2, reduced3):
        """Test that d1 o d1 vanishes on sample words."""
        for bc, letters in ((integral2, ({"tau_0": 1}, {"tau_0": 1}, {"xi_1": 1})),
                            (reduced3, ({"tau_0": 1}, {"xi_1": 1}, {"tau_0": 1}))):
            chain = single(bc, bc.word(*letters))
            assert bc.d1(bc.d1(chain)) == 0

    def test_d1_squared_on_basis(self, reduced2):
        """Test that d1 o d1 vanishes on every word up to stem 7."""
        bc = reduced2
        for word in bc.words(Bounds(7)):
            assert bc.d1(bc.d1(single(bc, word))).is_zero(), bc.label(word)

    def test_truncated_coefficient(self, reduced3):
        """Test that tau powers beyond the truncation are dropped."""
        bc = reduced3
        assert not bc._tau_allowed(2)
        assert bc._tau_allowed(1)


class TestShuffle:
    """Test the shuffle product."""

    def test_unit(self, reduced2):
        """Test that the empty word is a unit."""
        bc = reduced2
        word = bc.word({"tau_0": 1}, {"xi_1": 1})
        assert bc.shuffle_words(word, BarWord(())) == single(bc, word)
        assert bc.shuffle_words(BarWord(()), word) == single(bc, word)

    def test_square_mod_two(self, reduced2):
        """Test that [tau_0] * [tau_0] = 2[tau_0|tau_0] = 0 at p=2."""
        bc = reduced2
        a = bc.word({"tau_0": 1})
        assert bc.shuffle_words(a, a) == 0

    def test_square_mod_three(self, reduced3):
        """Test that [tau_0] * [tau_0] = 2[tau_0|tau_0] at p=3 (even suspension)."""
        bc = reduced3
        a = bc.word({"tau_0": 1})
        assert bc.shuffle_words(a, a) == bc.chain({bc.word({"tau_0": 1}, {"tau_0": 1}): 2})

    def test_cube_mod_three(self, reduced3):
        """Test that [tau_0|tau_0] * [tau_0] = C(3,1)[tau_0|tau_0|tau_0] = 0 at p=3."""
        bc = reduced3
        a = bc.word({"tau_0": 1})
        aa = bc.word({"tau_0": 1}, {"tau_0": 1})
        assert bc.shuffle_words(aa, a) == 0

    def test_cube_mod_five(self):
        """Test that [tau_0|tau_0] * [tau_0] = 3[tau_0|tau_0|tau_0] at p=5."""
        bc = steenrod_bar_complex(SteenrodVariant(5, Variant.MOD_TAU), 4)
        a = bc.word({"tau_0": 1})
        aa = bc.word({"tau_0": 1}, {"tau_0": 1})
        aaa = bc.word({"tau_0": 1}, {"tau_0": 1}, {"tau_0": 1})
        assert bc.shuffle_words(aa, a) == bc.chain({aaa: 3})

    def test_odd_suspension_anticommutes(self, reduced3):
        """Test that [xi_1] * [xi_1] = 0 at p=3 (odd suspension)."""
        bc = reduced3
        x = bc.word({"xi_1": 1})
        assert bc.shuffle_words(x, x) == 0

    def test_graded_commutative(self, reduced3):
        """Test that x * y = (-1)^{|x||y|} y * x for suspended parities."""
        bc = reduced3
        x, y = bc.word({"xi_1": 1}), bc.word({"tau_0": 1}, {"xi_1": 1})
        sign = -1 if bc.degree_parity(x) * bc.degree_parity(y) else 1
        assert bc.shuffle_words(x, y) == bc.shuffle_words(y, x).scale(sign)

    def test_leibniz(self, integral2):
        """Test that d1 is a derivation of the shuffle product at p=2."""
        bc = integral2
        x = single(bc, bc.word({"tau_0": 1}, {"tau_0": 1}))
        y = single(bc, bc.word({"tau_1": 1}, {"tau_1": 1}))
        left = bc.d1(bc.shuffle(x, y))
        right = bc.shuffle(bc.d1(x), y) + bc.shuffle(x, bc.d1(y))
        assert left == right

    @pytest.mark.parametrize("p, letter_degree", [(2, 6), (3, 6), (5, 10)])
    def test_random_words_associative_and_graded_commutative(self, rng, p, letter_degree):
        """Test associativity and (-1)^{|x||y|} commutativity on random one- and two-letter words."""
        bc = steenrod_bar_complex(SteenrodVariant(p, Variant.MOD_TAU), 2 * letter_degree)
        letters = bc.letters(letter_degree)

        def word():
            return single(bc, BarWord(tuple(rng.choice(letters) for _ in range(rng.randint(1, 2)))))

        for _ in range(200):
            x, y, z = word(), word(), word()
            assert bc.shuffle(bc.shuffle(x, y), z) == bc.shuffle(x, bc.shuffle(y, z))
            odd = bc.degree_parity(next(iter(x.terms))) and bc.degree_parity(next(iter(y.terms)))
            assert bc.shuffle(x, y) == bc.shuffle(y, x).scale(-1 if odd else 1)


class TestCoproduct:
    """Test the divided-power coproduct and deconcatenation."""

    def test_gamma_zero(self):
        """Test that psi(gamma_0) = 1 (x) 1."""
        assert coproduct_gamma(0) == [(0, 0)]

    def test_gamma_one(self):
        """Test that psi(gamma_1) = gamma_1 (x) 1 + 1 (x) gamma_1."""
        assert coproduct_gamma(1) == [(1, 0), (0, 1)]

    def test_gamma_two(self):
        """Test that psi(gamma_2) has three terms."""
        assert coproduct_gamma(2) == [(2, 0), (1, 1), (0, 2)]

    def test_negative(self):
        """Test that a negative index raises."""
        with pytest.raises(ValueError):
            coproduct_gamma(-1)

    def test_deconcatenate_matches(self, reduced3):
        """Test that deconcatenating [a|a|a] matches psi(gamma_3)."""
        bc = reduced3
        word = bc.word({"tau_0": 1}, {"tau_0": 1}, {"tau_0": 1})
        splits = [(left.filtration, right.filtration) for left, right in bc.deconcatenate(word)]
        assert sorted(splits, reverse=True) == coproduct_gamma(3)


class TestBarBasis:
    """Test bounded bar words."""

    def test_filtration_zero(self):
        """Test that filtration 0 holds only the empty word."""
        assert bar_basis(0, SteenrodVariant(2, Variant.MOD_TAU), Bounds(3)) == [BarWord(())]

    def test_filtration_one(self):
        """Test the one-letter words of stem at most 4 at p=2 mod tau."""
        v = SteenrodVariant(2, Variant.MOD_TAU)
        bc = steenrod_bar_complex(v, 4)
        labels = sorted(bc.label(w) for w in bar_basis(1, v, Bounds(4)))
        assert labels == sorted(["[tau_0]", "[xi_1]", "[tau_1]", "[tau_0*xi_1]"])

    def test_filtration_two(self):
        """Test that the only two-letter word of stem 4 is [tau_0|tau_0]."""
        v = SteenrodVariant(2, Variant.MOD_TAU)
        bc = steenrod_bar_complex(v, 4)
        assert [bc.label(w) for w in bar_basis(2, v, Bounds(4))] == ["[tau_0|tau_0]"]

    def test_stem_bound_is_letter_degree_plus_filtration(self):
        """Test that letter degree at most 3 in filtration 1 is the stem bound 4, not 3."""
        v = SteenrodVariant(2, Variant.MOD_TAU)
        bc = steenrod_bar_complex(v, 4)
        assert sorted(bc.label(w) for w in bar_basis(1, v, Bounds(3))) == ["[tau_0]", "[xi_1]"]
        for s in (1, 2):
            for n in range(4):
                words = bar_basis(s, v, Bounds(n + s))
                assert all(bc.tridegree(w).degree <= n for w in words)
                assert all(bc.tridegree(w).stem == s + bc.tridegree(w).degree for w in words)
        assert len(bar_basis(1, v, Bounds(3 + 1))) == 4

    def test_tridegree(self, integral2):
        """Test that a word's tridegree sums its letters and tau power."""
        bc = integral2
        word = bc.word({"tau_0": 1}, {"xi_1": 1}, tau_power=2)
        assert bc.tridegree(word).as_tuple() == (2, 3, -1)
        assert bc.label(word) == "tau^2*[tau_0|xi_1]"


class TestTorE2:
    """Test the E2 page of the bar spectral sequence."""

    def test_unit(self):
        """Test that (0, 0, 0) has dimension 1 in every variant."""
        for variant in Variant:
            table = tor_E2(SteenrodVariant(2, variant), Bounds(2, 0, 2))
            assert table[(0, 0, 0)] == 1

    def test_mod_tau_low_classes(self):
        """Test the classes mu_0, lambda_1, gamma_2 mu_0 and mu_1 at p=2 mod tau."""
        table = tor_E2(SteenrodVariant(2, Variant.MOD_TAU), Bounds(6, 0, 6))
        assert table[(1, 1, 0)] == 1
        assert table.labels((1, 1, 0)) == ["[tau_0]"]
        assert table[(1, 2, 1)] == 1
        assert table[(2, 2, 0)] == 1
        assert table[(1, 3, 1)] == 1
        assert table.labels((1, 3, 1)) == ["[tau_1]"]

    def test_tsv_row(self):
        """Test that stem 0 exports a single unit row."""
        table = tor_E2(SteenrodVariant(2, Variant.INTEGRAL), Bounds(0, 0, 0))
        lines = table.to_tsv().splitlines()
        assert lines[0] == "filtration\tdegree\tweight\tdim\tlabels"
        assert lines[1:] == ["0\t0\t0\t1\t[]"]

    @pytest.mark.parametrize("p", [2, 3])
    @pytest.mark.parametrize("kind,degree", [
        (GeneratorKind.EXTERIOR, 1),
        (GeneratorKind.POLYNOMIAL, 2),
    ])
    def test_torsion_products(self, p, kind, degree):
        """Test Tor over Lambda(x) and S(x) against the closed forms."""
        top = 6
        bc = BarComplex(synthetic_algebra(p, kind, degree))
        computed = bc.tor_E2(Bounds(top * (degree + 1), 0, 0, top))
        expected = torsion_product_closed_form(kind, degree, top)
        assert computed.mismatches(expected) == []

    def test_closed_form_unknown_kind(self):
        """Test that only exterior and polynomial have closed forms."""
        with pytest.raises(ValueError):
            torsion_product_closed_form(GeneratorKind.TRUNCATED, 2, 3)
