from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pydantic import ValidationError

from services.conditions import (
    CT_EXTRA_CLAUSES,
    LA_EXTRA_CLAUSES,
    LocalParamSet,
    as_fraction,
    check_conditions_ct,
    check_conditions_la,
    scan_conditions,
)


@pytest.fixture
def h32_tuple():
    return LocalParamSet.of(n=3, p=2, c=3, k="3/2", b=0)


def test_as_fraction():
    assert as_fraction(0.75) == Fraction(3, 4)
    assert as_fraction("3/8") == Fraction(3, 8)
    assert as_fraction(2) == Fraction(2)


def test_regularity_of_data(h32_tuple):
    assert h32_tuple.r == Fraction(3, 2)


class TestParamSet:
    def test_numbers_become_fractions(self):
        ps = LocalParamSet(n=3, p=2.5, c="3", k=1, b=0.125, a="1/4")
        assert ps.p == Fraction(5, 2) and ps.b == Fraction(1, 8) and ps.a == Fraction(1, 4)
        assert isinstance(ps.k, Fraction)
        assert ps.s_prime is None

    @pytest.mark.parametrize("values", [{"p": 0}, {"c": "-1/2"}, {"n": 1}])
    def test_rejects_degenerate_tuples(self, values):
        with pytest.raises(ValidationError):
            LocalParamSet.of(**{"n": 3, "p": 2, "c": 3, "k": "3/2", "b": 0, **values})

    def test_is_frozen(self, h32_tuple):
        with pytest.raises(ValidationError):
            h32_tuple.b = Fraction(1)
        assert h32_tuple == LocalParamSet.of(n=3, p=2, c=3, k=1.5, b=0)


class TestWeightedConditions:
    def test_h32_passes_simplified_list(self, h32_tuple):
        result = check_conditions_ct(h32_tuple, simplified=True)
        assert result.passed
        assert result.s_prime == Fraction(1, 2)
        assert result.a == Fraction(1, 4)

    def test_h32_passes_full_list(self, h32_tuple):
        assert check_conditions_ct(h32_tuple).passed

    def test_each_failure_is_named(self):
        result = check_conditions_ct(LocalParamSet.of(n=3, p=4, c=2, k="3/2", b=0), simplified=True)
        assert not result.passed
        assert "p ≤ c" in result.violated
        assert "1 < p" not in result.violated

    def test_p_must_exceed_one(self):
        result = check_conditions_ct(LocalParamSet.of(n=3, p=1, c=3, k="3/2", b=0), simplified=True)
        assert "1 < p" in result.violated

    def test_negative_b_fails(self):
        result = check_conditions_ct(LocalParamSet.of(n=3, p=2, c=3, k="3/2", b="-1/4"), simplified=True)
        assert "b ≥ 0" in result.violated

    def test_given_s_prime_must_match_definition(self):
        ps = LocalParamSet.of(n=3, p=2, c=3, k="3/2", b=0, s_prime=0)
        assert "s' := k−1−b" in check_conditions_ct(ps, simplified=True).violated

    def test_given_a_must_match_definition(self):
        ps = LocalParamSet.of(n=3, p=2, c=3, k="3/2", b=0, a="1/3")
        assert "2a = k−n/c−b" in check_conditions_ct(ps, simplified=True).violated

    def test_negative_s_prime_splits_the_lists(self):
        ps = LocalParamSet.of(n=3, p=4, c=4, k=1, b="1/8")
        assert check_conditions_ct(ps, simplified=True).passed
        full = check_conditions_ct(ps)
        assert full.violated == ("0 ≤ s'",)

    def test_s_prime_upper_bound_reading(self):
        ps = LocalParamSet.of(n=3, p=2, c=3, k="3/2", b=0, b_prime="3/2")
        strict = check_conditions_ct(ps)
        relaxed = check_conditions_ct(ps, s_prime_upper_k=True)
        assert strict.s_prime == 1
        assert "s' ≤ k−1" in strict.violated
        assert "s' ≤ k−1" not in relaxed.violated
        assert "s' ≤ k" not in relaxed.violated

    def test_clauses_are_reported_in_order(self, h32_tuple):
        result = check_conditions_ct(h32_tuple)
        assert [name for name, _ in result.clauses][:3] == ["1 < p", "p ≤ c", "c < ∞"]
        assert all(ok for _, ok in result.clauses)


class TestTimeIntegrableConditions:
    def test_h32_with_a4(self):
        ps = LocalParamSet.of(n=3, p=2, c=3, k="3/2", b=0, a=4)
        assert check_conditions_la(ps).passed
        assert check_conditions_la(ps, simplified=True).passed

    def test_exponent_is_derived(self, h32_tuple):
        assert check_conditions_la(h32_tuple).a == 4

    def test_undefined_exponent(self):
        result = check_conditions_la(LocalParamSet.of(n=3, p=2, c=3, k=1, b=0))
        assert result.a is None
        assert "0 < 2/a" in result.violated
        assert "a/2 ≤ p" in result.violated

    def test_exponent_window(self):
        # a = 8 breaks a/2 ≤ p for p = 2
        result = check_conditions_la(LocalParamSet.of(n=3, p=2, c=3, k="5/4", b=0), simplified=True)
        assert result.a == 8
        assert "a/2 ≤ p" in result.violated


class TestScan:
    @pytest.mark.parametrize("kind", ["ct", "la"])
    def test_summary(self, kind):
        rows, summary = scan_conditions(kind)
        assert summary["points"] == len(rows) == 10 ** 4
        assert summary["agree"] + summary["disagree_explained"] + summary["disagree_unexplained"] == 10 ** 4
        assert summary["disagree_unexplained"] == 0
        assert summary["passes_with_negative_b"] == 0
        assert summary["simplified_passes"] >= summary["full_passes"] > 0

    def test_known_disagreement_is_explained(self):
        rows, summary = scan_conditions("ct")
        assert summary["disagree_explained"] > 0
        row = next(r for r in rows if (r["p"], r["c"], r["k"], r["b"]) == ("4", "4", "1", "1/8"))
        assert row["simplified_pass"] and not row["full_pass"]
        assert row["violated_full"] == "0 ≤ s'"

    def test_small_custom_grid(self):
        rows, summary = scan_conditions("ct", p_values=["2"], c_values=["3"], k_values=["3/2"], b_values=[0])
        assert summary["points"] == 1
        assert rows[0]["full_pass"] and rows[0]["simplified_pass"]

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            scan_conditions("bmo")


exponents = st.fractions(min_value=Fraction(1, 8), max_value=8, max_denominator=8)
signed = st.fractions(min_value=-2, max_value=8, max_denominator=8)


@settings(max_examples=200, deadline=None)
@given(p=exponents, c=exponents, k=signed, b=signed)
def test_full_list_implies_simplified_list(p, c, k, b):
    ps = LocalParamSet(n=3, p=p, c=c, k=k, b=b)
    for check, extra in ((check_conditions_ct, CT_EXTRA_CLAUSES), (check_conditions_la, LA_EXTRA_CLAUSES)):
        full, short = check(ps), check(ps, simplified=True)
        if full.passed:
            assert short.passed
            assert b >= 0
        if short.passed and not full.passed:
            assert set(full.violated) <= extra
            assert "0 ≤ s'" in full.violated


def test_extra_clauses_are_the_only_full_list_failures():
    assert CT_EXTRA_CLAUSES == {"0 ≤ s'"}
    assert LA_EXTRA_CLAUSES == {"0 ≤ s'"}
    # s' = −1/4 with the exponent window intact
    ps = LocalParamSet.of(n=3, p=4, c=8, k=1, b="1/4")
    short, full = check_conditions_la(ps, simplified=True), check_conditions_la(ps)
    assert short.passed and short.a == Fraction(16, 3)
    assert full.violated == ("0 ≤ s'",)
