"""Parameter-condition lists for the local existence theorems.

Every inequality is evaluated in exact rational arithmetic and reported under the
name it is printed with, so a failing tuple lists precisely the clauses it breaks.
"""
import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator

logger = logging.getLogger(__name__)

Number = Union[int, float, str, Fraction]
MAX_DENOMINATOR = 10 ** 6

# full-list clauses that can fail while the b' = 1 list passes
CT_EXTRA_CLAUSES = frozenset({"0 ≤ s'"})
LA_EXTRA_CLAUSES = frozenset({"0 ≤ s'"})


def as_fraction(value: Number) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(value).limit_denominator(MAX_DENOMINATOR)
    return Fraction(value)


class LocalParamSet(BaseModel):
    """The tuple (n, p, c, k, a, b, b', s') of the theorem hypotheses.

    `a` and `s'` are derived from their defining equalities when omitted. Numbers
    are stored as exact fractions; floats are rationalised on the way in.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n: int = Field(ge=2)
    p: Fraction
    c: Fraction
    k: Fraction
    b: Fraction
    b_prime: Fraction = Fraction(1)
    a: Optional[Fraction] = None
    s_prime: Optional[Fraction] = None

    @field_validator("p", "c", "k", "b", "b_prime", "a", "s_prime", mode="before")
    @classmethod
    def exact(cls, value: Optional[Number]) -> Optional[Fraction]:
        return None if value is None else as_fraction(value)

    @field_validator("p", "c")
    @classmethod
    def positive_exponent(cls, value: Fraction) -> Fraction:
        if value <= 0:
            raise ValueError(f"Lebesgue exponents must be positive, got {value}")
        return value

    @classmethod
    def of(cls, n: int, p: Number, c: Number, k: Number, b: Number, b_prime: Number = 1,
           a: Number = None, s_prime: Number = None) -> "LocalParamSet":
        return cls(n=n, p=p, c=c, k=k, b=b, b_prime=b_prime, a=a, s_prime=s_prime)

    @property
    def r(self) -> Fraction:
        """Initial-data regularity r = n/p + b."""
        return Fraction(self.n) / self.p + self.b

    def as_row(self) -> Dict[str, str]:
        return {
            "n": str(self.n), "p": str(self.p), "c": str(self.c), "k": str(self.k),
            "b": str(self.b), "b_prime": str(self.b_prime),
            "a": "" if self.a is None else str(self.a),
        }


@dataclass(frozen=True)
class ConditionResult:
    passed: bool
    violated: Tuple[str, ...]
    s_prime: Fraction
    a: Optional[Fraction]
    clauses: Tuple[Tuple[str, bool], ...]


def _ratio(n: int, c: Fraction, s: Fraction) -> Optional[Fraction]:
    """nc/(2n − s'c), or None where the denominator vanishes or changes sign."""
    denominator = 2 * n - s * c
    if denominator <= 0:
        return None
    return n * c / denominator


def _finish(clauses: List[Tuple[str, bool]], s: Fraction, a: Optional[Fraction]) -> ConditionResult:
    violated = tuple(name for name, ok in clauses if not ok)
    return ConditionResult(not violated, violated, s, a, tuple(clauses))


def _definition_clause(name: str, defined: Fraction, given: Optional[Fraction]) -> Tuple[str, bool]:
    return name, given is None or given == defined


def check_conditions_ct(ps: LocalParamSet, simplified: bool = False,
                        s_prime_upper_k: bool = False) -> ConditionResult:
    """Hypotheses of the weighted-in-time contraction argument.

    The full list carries the auxiliary b'; `simplified` evaluates the b' = 1 list.
    `s_prime_upper_k` reads the upper bound on s' as "s' ≤ k" instead of "s' ≤ k−1".
    """
    n, p, c, k, b, bp = ps.n, ps.p, ps.c, ps.k, ps.b, ps.b_prime
    n_c, n_p = Fraction(n) / c, Fraction(n) / p
    two_a_defined = k - n_c - b
    a = two_a_defined / 2 if ps.a is None else ps.a
    two_a = 2 * a

    clauses: List[Tuple[str, bool]] = [("1 < p", 1 < p), ("p ≤ c", p <= c), ("c < ∞", True)]
    if simplified:
        s = k - 1 - b
        clauses += [
            ("b ≥ 0", b >= 0),
            _definition_clause("s' := k−1−b", s, ps.s_prime),
            ("k ≥ 1", k >= 1),
        ]
    else:
        s = k - 2 - b + bp
        clauses += [
            _definition_clause("s' := k−2−b+b'", s, ps.s_prime),
            ("k ≥ 0", k >= 0),
            ("b' ≥ 1", bp >= 1),
        ]
    ratio = _ratio(n, c, s)
    clauses += [
        ("s'c < n", s * c < n),
        ("2a = k−n/c−b", two_a == two_a_defined),
        ("0 < 2a", 0 < two_a),
        ("2a < 1", two_a < 1),
    ]
    if not simplified:
        upper = ("s' ≤ k", s <= k) if s_prime_upper_k else ("s' ≤ k−1", s <= k - 1)
        clauses += [("0 ≤ s'", 0 <= s), upper]
    clauses += [
        ("1 < nc/(2n−s'c)", ratio is not None and 1 < ratio),
        ("nc/(2n−s'c) ≤ p", ratio is not None and ratio <= p),
    ]
    if simplified:
        clauses += [
            ("0 ≤ n/c−s'", 0 <= n_c - s),
            ("n/c−s' < 1", n_c - s < 1),
            ("s' ≤ n/p", s <= n_p),
            ("n/p ≤ 1+s'", n_p <= 1 + s),
        ]
    else:
        clauses += [
            ("1 ≥ b'−b", 1 >= bp - b),
            ("1 ≤ b'+n/c−s'", 1 <= bp + n_c - s),
            ("b'+n/c−s' < 2", bp + n_c - s < 2),
            ("2−2b'+s' ≤ n/p", 2 - 2 * bp + s <= n_p),
            ("n/p ≤ 2−b'+s'", n_p <= 2 - bp + s),
        ]
    return _finish(clauses, s, a)


def check_conditions_la(ps: LocalParamSet, simplified: bool = False) -> ConditionResult:
    """Hypotheses of the L^a-in-time contraction argument; `a` is the time exponent."""
    n, p, c, k, b, bp = ps.n, ps.p, ps.c, ps.k, ps.b, ps.b_prime
    n_c, n_p = Fraction(n) / c, Fraction(n) / p
    two_over_a_defined = k - n_c - b
    if ps.a is not None:
        a = ps.a
        two_over_a = Fraction(2) / a if a != 0 else None
    elif two_over_a_defined != 0:
        a = 2 / two_over_a_defined
        two_over_a = two_over_a_defined
    else:
        a, two_over_a = None, None

    clauses: List[Tuple[str, bool]] = [("1 < p", 1 < p), ("p ≤ c", p <= c), ("c < ∞", True)]
    if simplified:
        s = k - 1 - b
        clauses += [
            ("b ≥ 0", b >= 0),
            _definition_clause("s' := k−1−b", s, ps.s_prime),
            ("k ≥ 1", k >= 1),
        ]
    else:
        s = k - 2 + bp - b
        clauses += [
            _definition_clause("s' := k−2+b'−b", s, ps.s_prime),
            ("k ≥ 1", k >= 1),
            ("b' ≥ 1", bp >= 1),
        ]
    clauses += [
        ("s'c < n", s * c < n),
        ("2/a = k−n/c−b", two_over_a is not None and two_over_a == two_over_a_defined),
        ("0 < 2/a", two_over_a is not None and 0 < two_over_a),
        ("2/a < 1", two_over_a is not None and two_over_a < 1),
    ]
    if not simplified:
        ratio = _ratio(n, c, s)
        clauses += [
            ("0 ≤ s'", 0 <= s),
            ("s' ≤ k−1", s <= k - 1),
            # printed with no upper bound, unlike the weighted list
            ("1 ≤ nc/(2n−s'c)", ratio is not None and 1 <= ratio),
            ("1 ≥ b'−b", 1 >= bp - b),
            ("k−b' ≤ n/p+b", k - bp <= n_p + b),
        ]
    else:
        clauses += [("k−1 ≤ n/p+b", k - 1 <= n_p + b)]
    clauses += [
        ("n/p+b ≤ k", n_p + b <= k),
        ("a/2 ≤ p", a is not None and a / 2 <= p),
        ("p ≤ a", a is not None and p <= a),
    ]
    return _finish(clauses, s, a)


DEFAULT_P_VALUES = ("11/10", "3/2", "2", "5/2", "3", "7/2", "4", "5", "6", "8")
DEFAULT_C_VALUES = DEFAULT_P_VALUES
DEFAULT_K_VALUES = ("1/2", "3/4", "1", "5/4", "3/2", "7/4", "2", "5/2", "3", "4")
DEFAULT_B_VALUES = ("-1/2", "-1/4", "0", "1/8", "1/4", "1/2", "3/4", "1", "3/2", "2")


def scan_conditions(kind: str = "ct", n: int = 3,
                    p_values: Sequence[Number] = DEFAULT_P_VALUES,
                    c_values: Sequence[Number] = DEFAULT_C_VALUES,
                    k_values: Sequence[Number] = DEFAULT_K_VALUES,
                    b_values: Sequence[Number] = DEFAULT_B_VALUES) -> Tuple[List[dict], dict]:
    """Evaluate the full (b' = 1) and simplified lists on a rational grid; `a` is derived.

    Returns the scan rows and a summary with agreement counts. Disagreements are
    "explained" when every clause the full list violates is one the simplified
    list does not carry.
    """
    if kind not in ("ct", "la"):
        raise ValueError(f"Unknown condition list: {kind}")
    check = check_conditions_ct if kind == "ct" else check_conditions_la
    extra = CT_EXTRA_CLAUSES if kind == "ct" else LA_EXTRA_CLAUSES

    rows: List[dict] = []
    agree = explained = unexplained = 0
    full_passes = simplified_passes = negative_b_passes = 0
    grid = itertools.product(*(list(map(as_fraction, values))
                               for values in (p_values, c_values, k_values, b_values)))
    for p, c, k, b in grid:
        ps = LocalParamSet(n=n, p=p, c=c, k=k, b=b)
        full = check(ps)
        short = check(ps, simplified=True)
        full_passes += full.passed
        simplified_passes += short.passed
        if (full.passed or short.passed) and b < 0:
            negative_b_passes += 1
        if full.passed == short.passed:
            agree += 1
        elif short.passed and set(full.violated) <= extra:
            explained += 1
        else:
            unexplained += 1
        row = ps.as_row()
        row.update({
            "kind": kind,
            "a": "" if full.a is None else str(full.a),
            "s_prime": str(full.s_prime),
            "full_pass": full.passed,
            "simplified_pass": short.passed,
            "violated_full": ";".join(full.violated),
            "violated_simplified": ";".join(short.violated),
        })
        rows.append(row)

    summary = {
        "kind": kind,
        "points": len(rows),
        "agree": agree,
        "disagree_explained": explained,
        "disagree_unexplained": unexplained,
        "full_passes": full_passes,
        "simplified_passes": simplified_passes,
        "passes_with_negative_b": negative_b_passes,
    }
    logger.info(f"Condition scan ({kind}): {summary}")
    if explained:
        logger.warning(
            f"{explained} tuples pass the simplified {kind} list but fail clauses only the full list carries"
        )
    return rows, summary
