"""External numbers: a formal series representative plus a neutrix.

An external number is the algebraic sum a + A of a real representative a and
a neutrix A.  Here the representative is a finite formal series in the scale
generator ``e`` with exact rational coefficients, so every order decision is
exact.  Values are kept in a canonical form where no series term is absorbed
by the neutrix; equality of canonical forms is set equality (``5 + o`` and
``5 + e + o`` construct the same value).

The four order relations come in two quantifier patterns and are *not* the
familiar total order:

    ge(a, b):  every x in a has some y in b with x >= y
    gt(a, b):  every x in a exceeds every y in b
    (le, lt symmetric)

In particular ``ge(x, y)`` is not equivalent to ``le(y, x)`` (one has
``ge(o, L)`` yet not ``le(L, o)``) and le/ge are not antisymmetric: both hold
simultaneously whenever one operand contains the other.  Downstream code must
not assume otherwise, which is why these are named functions rather than
comparison dunders.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Tuple, Union

from . import scale
from .errors import DivisionByNeutrix, UnrepresentableDivision
from .scale import Neutrix, Rational, power_text

Term = Tuple[Fraction, Fraction]  # (coefficient, exponent), coefficient != 0

_MAX_INVERSE_ROUNDS = 64


@dataclass(frozen=True)
class FormalSeries:
    """Finite sum of monomials c*e^q, sorted by ascending exponent.

    No duplicate exponents, no zero coefficients; the empty series is 0.
    """

    terms: Tuple[Term, ...] = ()

    @staticmethod
    def from_terms(items: Iterable[Tuple[Rational, Rational]]) -> "FormalSeries":
        acc: dict = {}
        for c, q in items:
            c = Fraction(c)
            q = Fraction(q)
            if c == 0:
                continue
            acc[q] = acc.get(q, Fraction(0)) + c
        terms = tuple(sorted(((c, q) for q, c in acc.items() if c != 0), key=lambda t: t[1]))
        return FormalSeries(terms)

    @staticmethod
    def monomial(c: Rational, q: Rational = 0) -> "FormalSeries":
        return FormalSeries.from_terms([(c, q)])

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def leading(self) -> Term:
        """The lowest-exponent (largest magnitude) term; series must be nonzero."""
        return self.terms[0]

    def __add__(self, other: "FormalSeries") -> "FormalSeries":
        return FormalSeries.from_terms(self.terms + other.terms)

    def __neg__(self) -> "FormalSeries":
        return FormalSeries(tuple((-c, q) for c, q in self.terms))

    def __sub__(self, other: "FormalSeries") -> "FormalSeries":
        return self + (-other)

    def __mul__(self, other: "FormalSeries") -> "FormalSeries":
        return FormalSeries.from_terms(
            (c1 * c2, q1 + q2) for c1, q1 in self.terms for c2, q2 in other.terms
        )

    def scaled(self, c: Rational, q: Rational = 0) -> "FormalSeries":
        c = Fraction(c)
        q = Fraction(q)
        return FormalSeries(tuple((c * c0, q + q0) for c0, q0 in self.terms)) if c else FormalSeries()

    def pow_int(self, k: int) -> "FormalSeries":
        if k < 0:
            raise ValueError("pow_int takes a nonnegative exponent")
        out = FormalSeries.monomial(1, 0)
        for _ in range(k):
            out = out * self
        return out

    def inverse(self, target: Neutrix) -> "FormalSeries":
        """Truncated series inverse: terms absorbed by ``target`` are dropped.

        Exact for a single monomial.  Otherwise the geometric tail is expanded
        until every further term of the inverse is absorbed by ``target``; if
        ``target`` absorbs no power of e (it is {0} or the microhalo) the
        quotient has no finite representation and UnrepresentableDivision is
        raised.
        """
        if self.is_zero:
            raise ZeroDivisionError("inverse of the zero series")
        c0, q0 = self.leading()
        lead_inv = FormalSeries.monomial(Fraction(1, 1) / c0, -q0)
        if len(self.terms) == 1:
            return lead_inv
        if not target.is_mono and not target.is_full:
            # {0} and the microhalo absorb no power of e: the geometric tail
            # of a multi-term inverse can never be cut off.
            raise UnrepresentableDivision(
                f"1/({self}) has no finite series form against neutrix {target}"
            )
        # t has only positive exponents: self = lead * (1 + t).
        t = (self - FormalSeries.monomial(c0, q0)).scaled(1 / c0, -q0)
        out = FormalSeries.monomial(1, 0)
        power = FormalSeries.monomial(1, 0)
        sign = 1
        for _ in range(_MAX_INVERSE_ROUNDS):
            sign = -sign
            power = power * t
            # A relative term at exponent q lands at q - q0 in the inverse.
            kept = FormalSeries(
                tuple((Fraction(sign) * c, q) for c, q in power.terms if not target.absorbs(q - q0))
            )
            if kept.is_zero:
                return lead_inv * out
            out = out + kept
        raise UnrepresentableDivision(
            f"series inverse of {self} does not terminate against neutrix {target}"
        )

    def eval(self, eps0: float) -> float:
        return float(sum(float(c) * eps0 ** float(q) for c, q in self.terms))

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        parts = []
        for i, (c, q) in enumerate(self.terms):
            parts.append(_monomial_text(c, q, leading=(i == 0)))
        return " ".join(parts)

    def __repr__(self) -> str:
        return f"FormalSeries({self})"


def _rat_text(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _monomial_text(c: Fraction, q: Fraction, leading: bool) -> str:
    sign = "-" if c < 0 else ("" if leading else "+")
    mag = abs(c)
    if q == 0:
        body = _rat_text(mag)
    elif mag == 1:
        body = power_text(q)
    else:
        body = f"{_rat_text(mag)}*{power_text(q)}"
    if leading:
        return sign + body
    return f"{sign} {body}"


ZERO_SERIES = FormalSeries()
ONE_SERIES = FormalSeries.monomial(1, 0)


@dataclass(frozen=True)
class ExternalNumber:
    """Canonical pair (representative series, neutrix)."""

    rep: FormalSeries = ZERO_SERIES
    neutrix: Neutrix = scale.ZERO

    def __post_init__(self):
        kept = tuple(t for t in self.rep.terms if not self.neutrix.absorbs(t[1]))
        if kept != self.rep.terms:
            object.__setattr__(self, "rep", FormalSeries(kept))

    # -- basic structure ----------------------------------------------------

    @property
    def is_zeroless(self) -> bool:
        """True when 0 is not an element, i.e. the canonical rep is nonempty."""
        return not self.rep.is_zero

    @property
    def is_neutrix(self) -> bool:
        return self.rep.is_zero

    def __str__(self) -> str:
        if self.rep.is_zero:
            return str(self.neutrix)
        if self.neutrix.is_zero:
            return str(self.rep)
        return f"{self.rep} + {self.neutrix}"

    def __repr__(self) -> str:
        return f"ExternalNumber({self})"

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other: "ExternalNumber") -> "ExternalNumber":
        return ExternalNumber(self.rep + other.rep, self.neutrix + other.neutrix)

    def __neg__(self) -> "ExternalNumber":
        return ExternalNumber(-self.rep, self.neutrix)

    def __sub__(self, other: "ExternalNumber") -> "ExternalNumber":
        return self + (-other)

    def __mul__(self, other: "ExternalNumber") -> "ExternalNumber":
        noise = (
            scale_noise(other.neutrix, self)
            + scale_noise(self.neutrix, other)
            + self.neutrix * other.neutrix
        )
        return ExternalNumber(self.rep * other.rep, noise)

    def __truediv__(self, other: "ExternalNumber") -> "ExternalNumber":
        return div(self, other)

    def __abs__(self) -> "ExternalNumber":
        if self.rep.is_zero:
            return self
        c0, _ = self.rep.leading()
        return ExternalNumber(-self.rep, self.neutrix) if c0 < 0 else self


def canonicalize(rep: FormalSeries, neutrix: Neutrix) -> ExternalNumber:
    """Drop representative terms absorbed by the neutrix; the unique normal form."""
    return ExternalNumber(rep, neutrix)


def external(value: Union[Rational, FormalSeries, Neutrix, ExternalNumber],
             neutrix: Neutrix = scale.ZERO) -> ExternalNumber:
    """Coerce rationals, series and neutrices into external numbers."""
    if isinstance(value, ExternalNumber):
        return value if neutrix.is_zero else ExternalNumber(value.rep, value.neutrix + neutrix)
    if isinstance(value, Neutrix):
        return ExternalNumber(ZERO_SERIES, value + neutrix)
    if isinstance(value, FormalSeries):
        return ExternalNumber(value, neutrix)
    return ExternalNumber(FormalSeries.monomial(Fraction(value)), neutrix)


def from_neutrix(n: Neutrix) -> ExternalNumber:
    return ExternalNumber(ZERO_SERIES, n)


def monomial(c: Rational, q: Rational = 0, neutrix: Neutrix = scale.ZERO) -> ExternalNumber:
    return ExternalNumber(FormalSeries.monomial(c, q), neutrix)


EPS = monomial(1, 1)
OMEGA = monomial(1, -1)
ONE = monomial(1, 0)
ZERO = ExternalNumber()


def scale_noise(n: Neutrix, alpha: ExternalNumber) -> Neutrix:
    """The neutrix alpha * N: fold N scaled by each rep term, plus N(alpha)*N."""
    out = alpha.neutrix * n
    for c, q in alpha.rep.terms:
        out = out + n.scaled(c, q)
    return out


def add(a: ExternalNumber, b: ExternalNumber) -> ExternalNumber:
    return a + b


def neg(a: ExternalNumber) -> ExternalNumber:
    return -a


def sub(a: ExternalNumber, b: ExternalNumber) -> ExternalNumber:
    return a - b


def mul(a: ExternalNumber, b: ExternalNumber) -> ExternalNumber:
    return a * b


def div(num: ExternalNumber, den: ExternalNumber) -> ExternalNumber:
    """Quotient num/den through the identity beta/alpha = alpha*beta / a^2.

    The representative square a^2 is inverted as a series, truncated at the
    order where the remainder is absorbed by the result's neutrix.
    """
    if not den.is_zeroless:
        raise DivisionByNeutrix(f"divisor {den} contains zero")
    prod = num * den
    a2 = den.rep * den.rep
    _, q0 = a2.leading()
    noise = prod.neutrix.scaled(1, -q0)
    if prod.rep.is_zero:
        return ExternalNumber(ZERO_SERIES, noise)
    # Inverse terms get shifted by the numerator's leading exponent before the
    # final absorption, so truncate against the shifted neutrix.
    q_num = prod.rep.leading()[1]
    inv = a2.inverse(noise.scaled(1, -q_num))
    return ExternalNumber(prod.rep * inv, noise)


def absolute(a: ExternalNumber) -> ExternalNumber:
    return abs(a)


def neutrix_part(a: ExternalNumber) -> Neutrix:
    return a.neutrix


def zeroless(a: ExternalNumber) -> bool:
    return a.is_zeroless


def subset(a: ExternalNumber, b: ExternalNumber) -> bool:
    """Set containment a ⊆ b on canonical forms."""
    if not a.neutrix <= b.neutrix:
        return False
    diff = a.rep - b.rep
    return all(b.neutrix.absorbs(q) for _, q in diff.terms)


def disjoint(a: ExternalNumber, b: ExternalNumber) -> bool:
    """Two external numbers are either disjoint or nested; disjoint iff b - a is zeroless."""
    return (b - a).is_zeroless


def lt(a: ExternalNumber, b: ExternalNumber) -> bool:
    """Every element of a is below every element of b."""
    d = b - a
    return d.is_zeroless and d.rep.leading()[0] > 0


def gt(a: ExternalNumber, b: ExternalNumber) -> bool:
    """Every element of a is above every element of b."""
    return lt(b, a)


def le(a: ExternalNumber, b: ExternalNumber) -> bool:
    """a < b or a ⊆ b.  Not antisymmetric with ge."""
    return lt(a, b) or subset(a, b)


def ge(a: ExternalNumber, b: ExternalNumber) -> bool:
    """a > b or a ⊆ b.  Note ge(a, b) is weaker than le(b, a)."""
    return gt(a, b) or subset(a, b)
