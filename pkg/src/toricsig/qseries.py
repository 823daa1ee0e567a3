"""Exact truncated power series, Laurent polynomials and Laurent fractions in q.

Everything is exact: coefficients are :class:`fractions.Fraction` (or ``int``
for Laurent polynomials). Every series carries its truncation order and
arithmetic between series of different orders raises instead of silently
truncating.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping, Sequence, Union

__all__ = [
    "SeriesError",
    "OrderMismatchError",
    "NotInvertibleError",
    "PoleError",
    "TruncatedSeries",
    "LaurentPolynomial",
    "LaurentFraction",
    "BivariateSeries",
    "expand_inv_one_plus_qk",
    "parse_rational",
    "format_rational",
]

Scalar = Union[int, Fraction]


class SeriesError(ArithmeticError):
    """Base class for errors raised by series arithmetic."""


class OrderMismatchError(SeriesError, ValueError):
    pass


class NotInvertibleError(SeriesError, ZeroDivisionError):
    pass


class PoleError(SeriesError, ValueError):
    """Expansion requested for a fraction with a pole at q = 0."""


def format_rational(c: Fraction) -> str:
    c = Fraction(c)
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def parse_rational(text: str) -> Fraction:
    num, sep, den = text.strip().partition("/")
    if sep:
        return Fraction(int(num), int(den))
    return Fraction(int(num))


# ---------------------------------------------------------------------------
# Truncated power series
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TruncatedSeries:
    """Power series c_0 + c_1 q + ... + c_N q^N + O(q^{N+1})."""

    order: int
    coeffs: tuple[Fraction, ...]

    def __post_init__(self):
        if self.order < 0:
            raise ValueError(f"order must be non-negative, got {self.order}")
        coeffs = tuple(Fraction(c) for c in self.coeffs)
        if len(coeffs) != self.order + 1:
            raise ValueError(
                f"expected {self.order + 1} coefficients, got {len(coeffs)}"
            )
        object.__setattr__(self, "coeffs", coeffs)

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_coeffs(cls, coeffs: Iterable[Scalar], order: int) -> "TruncatedSeries":
        """Build a series from a (possibly short or long) coefficient list."""
        cs = [Fraction(c) for c in coeffs][: order + 1]
        cs.extend([Fraction(0)] * (order + 1 - len(cs)))
        return cls(order, tuple(cs))

    @classmethod
    def zero(cls, order: int) -> "TruncatedSeries":
        return cls(order, (Fraction(0),) * (order + 1))

    @classmethod
    def constant(cls, c: Scalar, order: int) -> "TruncatedSeries":
        return cls.from_coeffs([c], order)

    @classmethod
    def one(cls, order: int) -> "TruncatedSeries":
        return cls.constant(1, order)

    @classmethod
    def monomial(cls, k: int, order: int, c: Scalar = 1) -> "TruncatedSeries":
        if k < 0:
            raise ValueError("negative exponent in a power series")
        cs = [Fraction(0)] * (order + 1)
        if k <= order:
            cs[k] = Fraction(c)
        return cls(order, tuple(cs))

    # -- inspection ---------------------------------------------------------

    def __getitem__(self, i: int) -> Fraction:
        return self.coeffs[i]

    def __len__(self) -> int:
        return len(self.coeffs)

    def __iter__(self):
        return iter(self.coeffs)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.coeffs)

    def valuation(self) -> Union[int, float]:
        """Index of the first nonzero coefficient (inf if none)."""
        for i, c in enumerate(self.coeffs):
            if c:
                return i
        return math.inf

    def truncate(self, order: int) -> "TruncatedSeries":
        if order > self.order:
            raise OrderMismatchError(
                f"cannot raise truncation order {self.order} to {order}"
            )
        return TruncatedSeries(order, self.coeffs[: order + 1])

    # -- arithmetic ---------------------------------------------------------

    def _check(self, other: "TruncatedSeries") -> None:
        if self.order != other.order:
            raise OrderMismatchError(
                f"series orders differ: {self.order} vs {other.order}"
            )

    def _coerce(self, other) -> "TruncatedSeries":
        if isinstance(other, TruncatedSeries):
            self._check(other)
            return other
        if isinstance(other, (int, Rational)):
            return TruncatedSeries.constant(other, self.order)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return TruncatedSeries(
            self.order, tuple(a + b for a, b in zip(self.coeffs, other.coeffs))
        )

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return TruncatedSeries(
            self.order, tuple(a - b for a, b in zip(self.coeffs, other.coeffs))
        )

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self) -> "TruncatedSeries":
        return TruncatedSeries(self.order, tuple(-a for a in self.coeffs))

    def __mul__(self, other):
        if isinstance(other, (int, Rational)) and not isinstance(other, bool):
            c = Fraction(other)
            return TruncatedSeries(self.order, tuple(a * c for a in self.coeffs))
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        self._check(other)
        n = self.order
        a, b = self.coeffs, other.coeffs
        out = [Fraction(0)] * (n + 1)
        for i, ai in enumerate(a):
            if not ai:
                continue
            for j in range(n + 1 - i):
                bj = b[j]
                if bj:
                    out[i + j] += ai * bj
        return TruncatedSeries(n, tuple(out))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, TruncatedSeries):
            return self * other.invert()
        if isinstance(other, (int, Rational)):
            if other == 0:
                raise ZeroDivisionError("division of a series by zero")
            return self * (1 / Fraction(other))
        return NotImplemented

    def invert(self) -> "TruncatedSeries":
        """Multiplicative inverse up to the truncation order."""
        a = self.coeffs
        if a[0] == 0:
            raise NotInvertibleError("constant term is zero")
        inv0 = 1 / a[0]
        b = [inv0]
        for n in range(1, self.order + 1):
            acc = sum((a[k] * b[n - k] for k in range(1, n + 1) if a[k]), Fraction(0))
            b.append(-acc * inv0)
        return TruncatedSeries(self.order, tuple(b))

    def __pow__(self, k: int) -> "TruncatedSeries":
        if not isinstance(k, int):
            return NotImplemented
        base = self
        if k < 0:
            base = self.invert()
            k = -k
        result = TruncatedSeries.one(self.order)
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    # -- serialization ------------------------------------------------------

    def to_json(self) -> list[str]:
        return [format_rational(c) for c in self.coeffs]

    @classmethod
    def from_json(cls, data: Sequence[str]) -> "TruncatedSeries":
        if not data:
            raise ValueError("a series needs at least one coefficient")
        return cls(len(data) - 1, tuple(parse_rational(s) for s in data))

    def __str__(self) -> str:
        parts = []
        for i, c in enumerate(self.coeffs):
            if not c:
                continue
            mono = "" if i == 0 else ("q" if i == 1 else f"q^{i}")
            if i == 0:
                parts.append(format_rational(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append(f"-{mono}")
            else:
                parts.append(f"{format_rational(c)}*{mono}")
        head = " + ".join(parts).replace("+ -", "- ") if parts else "0"
        return f"{head} + O(q^{self.order + 1})"


def expand_inv_one_plus_qk(k: int, order: int) -> TruncatedSeries:
    """Expansion of 1/(1 + q^k) at q = 0.

    For k < 0 this uses 1/(1 + q^k) = q^{-k}/(1 + q^{-k}), and k = 0 gives 1/2.
    """
    if k == 0:
        return TruncatedSeries.constant(Fraction(1, 2), order)
    cs = [Fraction(0)] * (order + 1)
    step = abs(k)
    start = 0 if k > 0 else step
    sign = 1
    for e in range(start, order + 1, step):
        cs[e] = Fraction(sign)
        sign = -sign
    return TruncatedSeries(order, tuple(cs))


# ---------------------------------------------------------------------------
# Laurent polynomials and fractions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LaurentPolynomial:
    """Finite sum of c_e q^e, e in Z, with nonzero integer c_e.

    ``terms`` is a tuple of (exponent, coefficient) pairs sorted by exponent.
    """

    terms: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        clean = tuple((int(e), int(c)) for e, c in self.terms if c)
        exps = [e for e, _ in clean]
        if len(set(exps)) != len(exps):
            raise ValueError("repeated exponent in Laurent polynomial")
        object.__setattr__(self, "terms", tuple(sorted(clean)))

    @classmethod
    def from_dict(cls, d: Mapping[int, int]) -> "LaurentPolynomial":
        return cls(tuple((e, c) for e, c in d.items() if c))

    @classmethod
    def constant(cls, c: int) -> "LaurentPolynomial":
        return cls(((0, c),))

    @classmethod
    def monomial(cls, e: int, c: int = 1) -> "LaurentPolynomial":
        return cls(((e, c),))

    @classmethod
    def one_plus_qk(cls, k: int) -> "LaurentPolynomial":
        if k == 0:
            return cls(((0, 2),))
        return cls(((0, 1), (k, 1)))

    def as_dict(self) -> dict[int, int]:
        return dict(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def low(self) -> int:
        if not self.terms:
            raise ValueError("zero polynomial has no lowest exponent")
        return self.terms[0][0]

    def high(self) -> int:
        if not self.terms:
            raise ValueError("zero polynomial has no highest exponent")
        return self.terms[-1][0]

    def content(self) -> int:
        return math.gcd(*(c for _, c in self.terms)) if self.terms else 0

    def shift(self, n: int) -> "LaurentPolynomial":
        return LaurentPolynomial(tuple((e + n, c) for e, c in self.terms))

    def scale(self, c: int) -> "LaurentPolynomial":
        return LaurentPolynomial(tuple((e, a * c) for e, a in self.terms))

    def exact_div(self, c: int) -> "LaurentPolynomial":
        out = []
        for e, a in self.terms:
            qt, rem = divmod(a, c)
            if rem:
                raise ArithmeticError(f"{a} not divisible by {c}")
            out.append((e, qt))
        return LaurentPolynomial(tuple(out))

    def __add__(self, other: "LaurentPolynomial") -> "LaurentPolynomial":
        d = dict(self.terms)
        for e, c in other.terms:
            d[e] = d.get(e, 0) + c
        return LaurentPolynomial.from_dict(d)

    def __neg__(self) -> "LaurentPolynomial":
        return self.scale(-1)

    def __sub__(self, other: "LaurentPolynomial") -> "LaurentPolynomial":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, int):
            return self.scale(other)
        if not isinstance(other, LaurentPolynomial):
            return NotImplemented
        d: dict[int, int] = {}
        for e1, c1 in self.terms:
            for e2, c2 in other.terms:
                d[e1 + e2] = d.get(e1 + e2, 0) + c1 * c2
        return LaurentPolynomial.from_dict(d)

    __rmul__ = __mul__

    def to_json(self) -> list[list[int]]:
        return [[e, c] for e, c in self.terms]

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.terms:
            mono = "" if e == 0 else ("q" if e == 1 else f"q^{e}")
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append(f"-{mono}")
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")


def _poly_divmod_q(
    a: list[Fraction], b: list[Fraction]
) -> tuple[list[Fraction], list[Fraction]]:
    """Dense polynomial division over Q; coefficient lists in ascending degree."""
    a = a[:]
    db = len(b) - 1
    lead = b[-1]
    quot = [Fraction(0)] * max(len(a) - db, 1)
    for i in range(len(a) - 1, db - 1, -1):
        c = a[i] / lead
        if c:
            quot[i - db] = c
            for j in range(db + 1):
                a[i - db + j] -= c * b[j]
    rem = a[:db] if db > 0 else []
    while rem and rem[-1] == 0:
        rem.pop()
    return quot, rem


def _poly_gcd_primitive(p: LaurentPolynomial, r: LaurentPolynomial) -> list[int]:
    """Primitive integer gcd of two polynomials with lowest exponent 0."""
    a = [Fraction(0)] * (p.high() + 1)
    for e, c in p.terms:
        a[e] = Fraction(c)
    b = [Fraction(0)] * (r.high() + 1)
    for e, c in r.terms:
        b[e] = Fraction(c)
    while b:
        _, rem = _poly_divmod_q(a, b)
        a, b = b, rem
    den = math.lcm(*(c.denominator for c in a))
    ints = [int(c * den) for c in a]
    g = math.gcd(*ints)
    ints = [c // g for c in ints]
    if ints[-1] < 0:
        ints = [-c for c in ints]
    return ints


@dataclass(frozen=True, eq=False)
class LaurentFraction:
    """Ratio num/den of Laurent polynomials, kept in canonical form.

    Canonical form: den has lowest exponent 0 and positive lowest coefficient,
    and the integer content common to num and den is removed. The zero
    fraction is 0/1. Equality is exact (cross-multiplication), so two
    fractions compare equal even when they are not reduced by a polynomial gcd.
    """

    num: LaurentPolynomial
    den: LaurentPolynomial = LaurentPolynomial(((0, 1),))

    def __post_init__(self):
        num, den = self.num, self.den
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        if num.is_zero():
            object.__setattr__(self, "den", LaurentPolynomial(((0, 1),)))
            return
        shift = -den.low()
        num, den = num.shift(shift), den.shift(shift)
        if den.terms[0][1] < 0:
            num, den = -num, -den
        g = math.gcd(num.content(), den.content())
        if g > 1:
            num, den = num.exact_div(g), den.exact_div(g)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    @classmethod
    def zero(cls) -> "LaurentFraction":
        return cls(LaurentPolynomial())

    @classmethod
    def constant(cls, c: Scalar) -> "LaurentFraction":
        c = Fraction(c)
        return cls(
            LaurentPolynomial.constant(c.numerator),
            LaurentPolynomial.constant(c.denominator),
        )

    @classmethod
    def inv_one_plus_qk(cls, k: int) -> "LaurentFraction":
        return cls(LaurentPolynomial.constant(1), LaurentPolynomial.one_plus_qk(k))

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def order(self) -> Union[int, float]:
        """Order of vanishing at q = 0 (math.inf for the zero fraction)."""
        if self.num.is_zero():
            return math.inf
        return self.num.low()

    def __add__(self, other):
        if isinstance(other, (int, Rational)):
            other = LaurentFraction.constant(other)
        if not isinstance(other, LaurentFraction):
            return NotImplemented
        if self.den == other.den:
            return LaurentFraction(self.num + other.num, self.den)
        return LaurentFraction(
            self.num * other.den + other.num * self.den, self.den * other.den
        )

    __radd__ = __add__

    def __neg__(self) -> "LaurentFraction":
        return LaurentFraction(-self.num, self.den)

    def __sub__(self, other):
        if isinstance(other, (int, Rational)):
            other = LaurentFraction.constant(other)
        if not isinstance(other, LaurentFraction):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Rational)):
            other = LaurentFraction.constant(other)
        if not isinstance(other, LaurentFraction):
            return NotImplemented
        return LaurentFraction(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Rational)):
            other = LaurentFraction.constant(other)
        if not isinstance(other, LaurentFraction):
            return NotImplemented
        return self.num * other.den == other.num * self.den

    __hash__ = None  # equality is by value, not by representation

    def reduced(self) -> "LaurentFraction":
        """Same value with num and den divided by their polynomial gcd."""
        if self.is_zero():
            return self
        low = self.num.low()
        num = self.num.shift(-low)
        if num.high() == 0 or self.den.high() == 0:
            return self
        g = _poly_gcd_primitive(num, self.den)
        if len(g) == 1:
            return self
        num_q, rem1 = _poly_divmod_q(_dense(num), [Fraction(c) for c in g])
        den_q, rem2 = _poly_divmod_q(_dense(self.den), [Fraction(c) for c in g])
        assert not rem1 and not rem2
        den_l = math.lcm(*(c.denominator for c in num_q + den_q))
        new_num = LaurentPolynomial.from_dict(
            {i: int(c * den_l) for i, c in enumerate(num_q)}
        ).shift(low)
        new_den = LaurentPolynomial.from_dict(
            {i: int(c * den_l) for i, c in enumerate(den_q)}
        )
        return LaurentFraction(new_num, new_den)

    def expand(self, order: int) -> TruncatedSeries:
        """Power-series expansion at q = 0 by long division."""
        if self.is_zero():
            return TruncatedSeries.zero(order)
        if self.num.low() < 0:
            raise PoleError(f"fraction has a pole of order {-self.num.low()} at q = 0")
        den = [Fraction(0)] * (order + 1)
        for e, c in self.den.terms:
            if e > order:
                break
            den[e] = Fraction(c)
        out = [Fraction(0)] * (order + 1)
        for e, c in self.num.terms:
            if e > order:
                break
            out[e] = Fraction(c)
        d0 = den[0]
        nz = [(k, den[k]) for k in range(1, order + 1) if den[k]]
        for n in range(order + 1):
            acc = out[n]
            for k, dk in nz:
                if k > n:
                    break
                acc -= dk * out[n - k]
            out[n] = acc / d0
        return TruncatedSeries(order, tuple(out))

    def to_json(self) -> dict:
        return {"num": self.num.to_json(), "den": self.den.to_json()}

    def __str__(self) -> str:
        if self.den.terms == ((0, 1),):
            return str(self.num)
        return f"({self.num})/({self.den})"

    def __repr__(self) -> str:
        return f"LaurentFraction({self})"


def _dense(p: LaurentPolynomial) -> list[Fraction]:
    out = [Fraction(0)] * (p.high() + 1)
    for e, c in p.terms:
        out[e] = Fraction(c)
    return out


# ---------------------------------------------------------------------------
# Bivariate series: power series in x with truncated q-series coefficients
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BivariateSeries:
    """Sum_{i <= x_order} c_i(q) x^i with every c_i a TruncatedSeries."""

    x_order: int
    coeffs: tuple[TruncatedSeries, ...]

    def __post_init__(self):
        if len(self.coeffs) != self.x_order + 1:
            raise ValueError(
                f"expected {self.x_order + 1} x-coefficients, got {len(self.coeffs)}"
            )
        orders = {c.order for c in self.coeffs}
        if len(orders) != 1:
            raise OrderMismatchError(f"coefficient q-orders differ: {sorted(orders)}")
        object.__setattr__(self, "coeffs", tuple(self.coeffs))

    @property
    def q_order(self) -> int:
        return self.coeffs[0].order

    @classmethod
    def zero(cls, x_order: int, q_order: int) -> "BivariateSeries":
        z = TruncatedSeries.zero(q_order)
        return cls(x_order, (z,) * (x_order + 1))

    @classmethod
    def one(cls, x_order: int, q_order: int) -> "BivariateSeries":
        z = TruncatedSeries.zero(q_order)
        return cls(x_order, (TruncatedSeries.one(q_order),) + (z,) * x_order)

    @classmethod
    def from_x_series(
        cls, coeffs: Iterable[Scalar], x_order: int, q_order: int
    ) -> "BivariateSeries":
        """Lift a rational x-series to q-constant coefficients."""
        cs = [Fraction(c) for c in coeffs][: x_order + 1]
        cs.extend([Fraction(0)] * (x_order + 1 - len(cs)))
        return cls(x_order, tuple(TruncatedSeries.constant(c, q_order) for c in cs))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[Scalar]], q_order: int) -> "BivariateSeries":
        """rows[i] holds the q-coefficients of x^i."""
        return cls(
            len(rows) - 1,
            tuple(TruncatedSeries.from_coeffs(r, q_order) for r in rows),
        )

    def coeff(self, i: int) -> TruncatedSeries:
        """Coefficient of x^i."""
        if i < 0 or i > self.x_order:
            raise IndexError(f"x-degree {i} outside 0..{self.x_order}")
        return self.coeffs[i]

    def _check(self, other: "BivariateSeries") -> None:
        if self.x_order != other.x_order or self.q_order != other.q_order:
            raise OrderMismatchError(
                f"bivariate orders differ: ({self.x_order}, {self.q_order}) vs "
                f"({other.x_order}, {other.q_order})"
            )

    def __add__(self, other: "BivariateSeries") -> "BivariateSeries":
        self._check(other)
        return BivariateSeries(
            self.x_order, tuple(a + b for a, b in zip(self.coeffs, other.coeffs))
        )

    def __sub__(self, other: "BivariateSeries") -> "BivariateSeries":
        self._check(other)
        return BivariateSeries(
            self.x_order, tuple(a - b for a, b in zip(self.coeffs, other.coeffs))
        )

    def __neg__(self) -> "BivariateSeries":
        return BivariateSeries(self.x_order, tuple(-a for a in self.coeffs))

    def __mul__(self, other):
        if isinstance(other, (int, Rational, TruncatedSeries)):
            return BivariateSeries(self.x_order, tuple(a * other for a in self.coeffs))
        if not isinstance(other, BivariateSeries):
            return NotImplemented
        self._check(other)
        n = self.x_order
        out = [TruncatedSeries.zero(self.q_order) for _ in range(n + 1)]
        for i, a in enumerate(self.coeffs):
            if a.is_zero():
                continue
            for j in range(n + 1 - i):
                b = other.coeffs[j]
                if not b.is_zero():
                    out[i + j] = out[i + j] + a * b
        return BivariateSeries(n, tuple(out))

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "BivariateSeries":
        if k < 0:
            return self.invert() ** (-k)
        result = BivariateSeries.one(self.x_order, self.q_order)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def invert(self) -> "BivariateSeries":
        """Inverse in x, requiring an invertible q-series at x^0."""
        a = self.coeffs
        inv0 = a[0].invert()
        b = [inv0]
        for n in range(1, self.x_order + 1):
            acc = TruncatedSeries.zero(self.q_order)
            for k in range(1, n + 1):
                if not a[k].is_zero():
                    acc = acc + a[k] * b[n - k]
            b.append(-(acc * inv0))
        return BivariateSeries(self.x_order, tuple(b))

    def derivative(self) -> "BivariateSeries":
        """d/dx; the result has x-order one less (minimum 0)."""
        if self.x_order == 0:
            return BivariateSeries.zero(0, self.q_order)
        return BivariateSeries(
            self.x_order - 1,
            tuple(self.coeffs[i] * i for i in range(1, self.x_order + 1)),
        )

    def mul_x(self, k: int = 1) -> "BivariateSeries":
        """Multiply by x^k, keeping the x-order."""
        z = TruncatedSeries.zero(self.q_order)
        cs = (z,) * k + self.coeffs
        return BivariateSeries(self.x_order, cs[: self.x_order + 1])

    def truncate_x(self, x_order: int) -> "BivariateSeries":
        if x_order > self.x_order:
            raise OrderMismatchError("cannot raise x-order")
        return BivariateSeries(x_order, self.coeffs[: x_order + 1])
