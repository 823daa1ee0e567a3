"""Hirzebruch genera: multiplicative sequences, the loop-space signature series,
its epsilon normalisation and the Ochanine elliptic parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Mapping, Sequence, Union

from .qseries import BivariateSeries, TruncatedSeries

__all__ = [
    "PontryaginPolynomial",
    "EllipticParameters",
    "EpsilonPowers",
    "FitError",
    "partitions",
    "multiplicative_sequence",
    "l_genus_coeffs",
    "pontryagin_numbers_projective",
    "genus_eval_projective",
    "genus_projective_via_sequence",
    "signature_q_series",
    "eps_powers",
    "elliptic_parameters_fit",
    "loop_signature_oracle_projective",
    "och_from_sign",
]


class FitError(RuntimeError):
    """The elliptic ODE fit came out inconsistent."""


def partitions(n: int, max_part: int | None = None):
    """Partitions of n as non-increasing tuples, in lexicographically decreasing order."""
    if max_part is None:
        max_part = n
    if n == 0:
        yield ()
        return
    for first in range(min(n, max_part), 0, -1):
        for rest in partitions(n - first, first):
            yield (first,) + rest


def _conjugate(lam: Sequence[int]) -> tuple[int, ...]:
    if not lam:
        return ()
    return tuple(sum(1 for part in lam if part > i) for i in range(lam[0]))


@dataclass(frozen=True)
class PontryaginPolynomial:
    """Polynomial in p_1, p_2, ... with exact rational coefficients.

    ``terms`` maps an exponent vector (e_1, e_2, ...) to its coefficient;
    trailing zero exponents are stripped.
    """

    terms: Mapping[tuple[int, ...], Fraction]

    def __post_init__(self):
        clean: dict[tuple[int, ...], Fraction] = {}
        for exps, c in self.terms.items():
            exps = tuple(exps)
            while exps and exps[-1] == 0:
                exps = exps[:-1]
            c = Fraction(c)
            if c:
                clean[exps] = clean.get(exps, Fraction(0)) + c
        object.__setattr__(self, "terms", {k: v for k, v in clean.items() if v})

    @classmethod
    def from_partitions(cls, coeffs: Mapping[tuple[int, ...], Fraction]) -> "PontryaginPolynomial":
        """Build from {partition: coeff}, each partition read as a product of p_i."""
        terms: dict[tuple[int, ...], Fraction] = {}
        for lam, c in coeffs.items():
            exps = [0] * (max(lam) if lam else 0)
            for part in lam:
                exps[part - 1] += 1
            key = tuple(exps)
            terms[key] = terms.get(key, Fraction(0)) + Fraction(c)
        return cls(terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PontryaginPolynomial):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def weights(self) -> set[int]:
        """Weighted degrees with p_i counted as i (real degree is 4 times this)."""
        return {sum((i + 1) * e for i, e in enumerate(exps)) for exps in self.terms}

    def is_homogeneous(self) -> bool:
        return len(self.weights()) <= 1

    def evaluate(self, numbers: Mapping[tuple[int, ...], Union[int, Fraction]]) -> Fraction:
        """Evaluate against Pontryagin numbers keyed by partition."""
        total = Fraction(0)
        for exps, c in self.terms.items():
            lam = tuple(sorted((i + 1 for i, e in enumerate(exps) for _ in range(e)), reverse=True))
            total += c * numbers[lam]
        return total

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for exps in sorted(self.terms, key=lambda e: tuple(reversed(e)), reverse=True):
            c = self.terms[exps]
            mono = "*".join(
                f"p{i + 1}" + (f"^{e}" if e > 1 else "") for i, e in enumerate(exps) if e
            )
            body = f"{abs(c)}*{mono}" if mono else str(abs(c))
            if not parts:
                parts.append(f"-{body}" if c < 0 else body)
            else:
                parts.append(f"{'-' if c < 0 else '+'} {body}")
        return " ".join(parts)


@lru_cache(maxsize=None)
def _elementary_in_monomials(mu: tuple[int, ...], nvars: int) -> dict[tuple[int, ...], int]:
    """e_mu = prod e_{mu_k} in nvars variables, expanded in the monomial basis."""
    poly: dict[tuple[int, ...], int] = {(0,) * nvars: 1}
    for k in mu:
        ek = []
        for subset in combinations(range(nvars), k):
            ek.append(tuple(1 if i in subset else 0 for i in range(nvars)))
        nxt: dict[tuple[int, ...], int] = {}
        for mono, c in poly.items():
            for e in ek:
                m = tuple(a + b for a, b in zip(mono, e))
                nxt[m] = nxt.get(m, 0) + c
        poly = nxt
    out = {}
    for mono, c in poly.items():
        if all(mono[i] >= mono[i + 1] for i in range(nvars - 1)):
            out[tuple(x for x in mono if x)] = c
    return out


def multiplicative_sequence(q_coeffs: Sequence[Union[int, Fraction]], n: int) -> list[PontryaginPolynomial]:
    """K_1..K_n of the even series Q(x) = sum_i q_coeffs[i] x^(2i), q_coeffs[0] = 1.

    The degree-j part of Q(x_1)...Q(x_n) is sum_lambda (prod_k a_{lambda_k}) m_lambda
    in y_i = x_i^2; it is rewritten in elementary symmetric functions p_i = e_i(y)
    by repeatedly subtracting e_{lambda'} for the lexicographically largest lambda.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    a = [Fraction(c) for c in q_coeffs]
    if not a or a[0] != 1:
        raise ValueError("multiplicative_sequence expects a normalised series with a_0 = 1")
    a.extend([Fraction(0)] * (n + 1 - len(a)))
    result = []
    for j in range(1, n + 1):
        f: dict[tuple[int, ...], Fraction] = {}
        for lam in partitions(j):
            if len(lam) > n:
                continue
            c = math.prod((a[part] for part in lam), start=Fraction(1))
            if c:
                f[lam] = c
        elem: dict[tuple[int, ...], Fraction] = {}
        while f:
            lam = max(f)
            c = f[lam]
            mu = _conjugate(lam)
            elem[mu] = elem.get(mu, Fraction(0)) + c
            for nu, k in _elementary_in_monomials(mu, n).items():
                v = f.get(nu, Fraction(0)) - c * k
                if v:
                    f[nu] = v
                else:
                    f.pop(nu, None)
        result.append(PontryaginPolynomial.from_partitions(elem))
    return result


def l_genus_coeffs(n: int) -> list[Fraction]:
    """Coefficients a_0..a_n of x/tanh(x) = sum_k a_k x^(2k)."""
    order = 2 * n
    cosh = TruncatedSeries.from_coeffs(
        [Fraction(1, math.factorial(i)) if i % 2 == 0 else 0 for i in range(order + 1)], order
    )
    sinh_over_x = TruncatedSeries.from_coeffs(
        [Fraction(1, math.factorial(i + 1)) if i % 2 == 0 else 0 for i in range(order + 1)], order
    )
    series = cosh * sinh_over_x.invert()
    return [series[2 * k] for k in range(n + 1)]


def pontryagin_numbers_projective(n: int) -> dict[tuple[int, ...], int]:
    """All Pontryagin numbers of CP^(2n), using p(CP^(2n)) = (1 + x^2)^(2n+1)."""
    if n < 1:
        raise ValueError("need n >= 1")
    return {
        lam: math.prod(math.comb(2 * n + 1, part) for part in lam) for lam in partitions(n)
    }


def _as_x_series(Q, x_order: int) -> TruncatedSeries:
    return TruncatedSeries.from_coeffs(Q, x_order)


def genus_eval_projective(Q, d: int):
    """Genus of CP^d from its characteristic series: [x^d] Q(x)^(d+1) / Q(0).

    ``Q`` is either a BivariateSeries (q-series coefficients, result is a
    TruncatedSeries) or a sequence of rational x-coefficients (result is a
    Fraction). Odd d gives zero because Q is even.
    """
    if isinstance(Q, BivariateSeries):
        if any(not Q.coeff(i).is_zero() for i in range(1, Q.x_order + 1, 2)):
            raise ValueError("characteristic series must be even in x")
        if d % 2:
            return TruncatedSeries.zero(Q.q_order)
        if Q.x_order < d:
            raise ValueError(f"x-order {Q.x_order} too small for dimension {d}")
        Qd = Q.truncate_x(d)
        return (Qd ** (d + 1)).coeff(d) * Qd.coeff(0).invert()
    coeffs = [Fraction(c) for c in Q]
    if any(coeffs[i] for i in range(1, len(coeffs), 2)):
        raise ValueError("characteristic series must be even in x")
    if d % 2:
        return Fraction(0)
    if len(coeffs) <= d:
        raise ValueError(f"x-order {len(coeffs) - 1} too small for dimension {d}")
    s = _as_x_series(coeffs, d)
    return (s ** (d + 1))[d] / s[0]


def genus_projective_via_sequence(even_coeffs: Sequence[Union[int, Fraction]], d: int) -> Fraction:
    """a_0^d K_{d/2}(p)[CP^d], with K built from Q/a_0.

    ``even_coeffs[i]`` is the coefficient of x^(2i).
    """
    if d % 2:
        return Fraction(0)
    n = d // 2
    a = [Fraction(c) for c in even_coeffs]
    a0 = a[0]
    k = multiplicative_sequence([c / a0 for c in a[: n + 1]], n)[-1]
    return a0**d * k.evaluate(pontryagin_numbers_projective(n))


# ---------------------------------------------------------------------------
# q-series side
# ---------------------------------------------------------------------------


def _x_coth_half_x(x_order: int) -> TruncatedSeries:
    """x (1 + e^{-x}) / (1 - e^{-x}) as a rational x-series."""
    num = [Fraction(2)] + [Fraction((-1) ** i, math.factorial(i)) for i in range(1, x_order + 1)]
    den = [Fraction((-1) ** i, math.factorial(i + 1)) for i in range(x_order + 1)]
    return TruncatedSeries(x_order, tuple(num)) * TruncatedSeries(x_order, tuple(den)).invert()


def _geometric_factor(n: int, sign: int, x_order: int, q_order: int) -> BivariateSeries:
    """(1 + q^n e^{sign x}) / (1 - q^n e^{sign x}) = 1 + 2 sum_{k>=1} q^{nk} e^{sign k x}."""
    rows = []
    for i in range(x_order + 1):
        row = [Fraction(0)] * (q_order + 1)
        if i == 0:
            row[0] = Fraction(1)
        fact = math.factorial(i)
        for k in range(1, q_order // n + 1):
            row[n * k] += Fraction(2 * (sign * k) ** i, fact)
        rows.append(row)
    return BivariateSeries.from_rows(rows, q_order)


@lru_cache(maxsize=64)
def signature_q_series(x_order: int, q_order: int) -> BivariateSeries:
    """Characteristic series of the loop-space signature, truncated in x and q.

    Q(x) = x (1+e^{-x})/(1-e^{-x}) prod_{n>=1} (1+q^n e^{-x})(1+q^n e^{x}) /
    ((1-q^n e^{-x})(1-q^n e^{x})); factors with n > q_order are 1 + O(q^{q_order+1}).
    """
    Q = BivariateSeries.from_x_series(_x_coth_half_x(x_order).coeffs, x_order, q_order)
    for n in range(1, q_order + 1):
        Q = Q * _geometric_factor(n, 1, x_order, q_order)
        Q = Q * _geometric_factor(n, -1, x_order, q_order)
    return Q


@dataclass(frozen=True)
class EpsilonPowers:
    eps: TruncatedSeries
    eps_quarter: TruncatedSeries
    eps_inv_quarter: TruncatedSeries


@lru_cache(maxsize=64)
def eps_powers(q_order: int) -> EpsilonPowers:
    """epsilon^{-1/4} = 2 prod (1+q^n)^2/(1-q^n)^2, its inverse, and epsilon itself."""
    inv_q = TruncatedSeries.constant(2, q_order)
    for n in range(1, q_order + 1):
        one_plus = TruncatedSeries.from_coeffs([1] + [0] * (n - 1) + [1], q_order)
        geometric = TruncatedSeries.from_coeffs(
            [1 if i % n == 0 else 0 for i in range(q_order + 1)], q_order
        )
        inv_q = inv_q * (one_plus * geometric) ** 2
    quarter = inv_q.invert()
    return EpsilonPowers(eps=quarter**4, eps_quarter=quarter, eps_inv_quarter=inv_q)


@dataclass(frozen=True)
class EllipticParameters:
    delta: TruncatedSeries
    epsilon: TruncatedSeries
    checked_x_order: int = 0


def elliptic_parameters_fit(q_order: int, x_order: int = 8) -> EllipticParameters:
    """Fit (f')^2 = 1 - 2 delta f^2 + epsilon f^4 for f = x / (Q/Q(0)).

    delta and epsilon come from the x^2 and x^4 coefficients; the identity is
    then checked through x^x_order and epsilon against :func:`eps_powers`.
    """
    if x_order < 8:
        raise ValueError("x_order must be at least 8")
    X = x_order + 2
    Q = signature_q_series(X, q_order)
    q_hat = Q * Q.coeff(0).invert()
    f = q_hat.invert().mul_x(1)
    fp = f.derivative()
    fp2 = fp * fp
    f2 = (f * f).truncate_x(fp2.x_order)
    f4 = f2 * f2
    one = TruncatedSeries.one(q_order)
    if f2.coeff(2) != one or not f4.coeff(2).is_zero() or f4.coeff(4) != one:
        raise FitError("f is not normalised as x + O(x^3)")
    delta = fp2.coeff(2) * Fraction(-1, 2)
    epsilon = fp2.coeff(4) + delta * f2.coeff(4) * 2
    rhs = BivariateSeries.one(fp2.x_order, q_order) - f2 * (delta * 2) + f4 * epsilon
    residual = fp2 - rhs
    for i in range(x_order + 1):
        if not residual.coeff(i).is_zero():
            raise FitError(f"ODE residual nonzero at x^{i}: {residual.coeff(i)}")
    if epsilon != eps_powers(q_order).eps:
        raise FitError("fitted epsilon disagrees with the product formula")
    return EllipticParameters(delta=delta, epsilon=epsilon, checked_x_order=x_order)


def loop_signature_oracle_projective(d: int, q_order: int) -> TruncatedSeries:
    """sign(q, L P^d) by Riemann-Roch: [x^d] Q(x)^(d+1) divided by Q(0)."""
    if d < 1:
        raise ValueError("need d >= 1")
    Q = signature_q_series(d, q_order)
    return (Q ** (d + 1)).coeff(d) * Q.coeff(0).invert()


def och_from_sign(sign_series: TruncatedSeries, d: int) -> TruncatedSeries:
    """Elliptic genus from the loop-space signature: sign * epsilon^{d/4}."""
    if d % 2:
        raise ValueError("och is defined here for even complex dimension only")
    return sign_series * eps_powers(sign_series.order).eps_quarter ** d
