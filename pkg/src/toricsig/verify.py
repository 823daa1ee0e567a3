"""Named verification suites run by ``toricsig verify``.

Each suite returns a list of :class:`Check` records; a suite passes when all
of its checks pass.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

from .genus import (
    FitError,
    elliptic_parameters_fit,
    eps_powers,
    genus_eval_projective,
    genus_projective_via_sequence,
    l_genus_coeffs,
    loop_signature_oracle_projective,
    multiplicative_sequence,
    och_from_sign,
)
from .loopsig import (
    Kleinschmidt,
    Product,
    Projective,
    cone_sum,
    double_numerator_identity_check,
    implied_h0_character,
    loop_signature,
    numerator_identity_check,
    positivity_report,
    rigidity_check,
    theorem62_check,
    VerificationError,
)
from .toricfan import (
    KleinschmidtData,
    product_fan,
    projective_fan,
    signature_from_fan,
)


@dataclass
class Check:
    name: str
    ok: bool
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.ok else 'FAIL'} {self.name}" + (f": {self.detail}" if self.detail else "")


def _kl(d: int, s: int, *a: int) -> Kleinschmidt:
    return Kleinschmidt(KleinschmidtData(d, s, tuple(a)))


_POSITIVE_CASES = (
    ("P^2", 2, lambda: Projective(2)),
    ("P^4", 4, lambda: Projective(4)),
    ("P^6", 6, lambda: Projective(6)),
    ("X_4(0,1)", 4, lambda: _kl(4, 3, 0, 1)),
    ("X_4(1,2)", 4, lambda: _kl(4, 3, 1, 2)),
)


def suite_oracle(order: int = 6, **_) -> list[Check]:
    out = []
    for d in (2, 4):
        lattice = loop_signature(Projective(d), order).series
        oracle = loop_signature_oracle_projective(d, order)
        out.append(Check(f"oracle P^{d}", lattice == oracle, str(lattice)))
    return out


def suite_positivity(order: int = 6, **_) -> list[Check]:
    out = []
    for name, d, fam in _POSITIVE_CASES:
        rep = positivity_report(loop_signature(fam(), order).series, d)
        out.append(Check(f"positive coefficients {name}", not rep.nonpositive, f"nonpositive at {rep.nonpositive}"))
    for d in (2, 4):
        try:
            h0 = implied_h0_character(d, order)
            out.append(Check(f"implied H0 character P^{d} integral", True, str(h0)))
        except VerificationError as exc:
            out.append(Check(f"implied H0 character P^{d} integral", False, str(exc)))
    return out


def suite_evenness(order: int = 6, **_) -> list[Check]:
    out = []
    for name, d, fam in _POSITIVE_CASES:
        rep = positivity_report(loop_signature(fam(), order).series, d)
        out.append(Check(f"even coefficients q^j, j >= 1, {name}", not rep.odd, f"odd at {rep.odd}"))
    for d in (1, 3):
        lattice = loop_signature(Projective(d), order).series
        oracle = loop_signature_oracle_projective(d, order)
        out.append(Check(f"odd dimension vanishing P^{d}", lattice.is_zero() and oracle.is_zero()))
    return out


def suite_vanishing(order: int = 6, **_) -> list[Check]:
    out = []
    for fam in (_kl(2, 2, 1), _kl(4, 2, 0, 1, 2), _kl(4, 4, 1)):
        series = loop_signature(fam, order).series
        out.append(Check(f"s even vanishing {fam.label()}", series.is_zero(), str(series)))
    return out


def suite_multiplicativity(order: int = 6, **_) -> list[Check]:
    p2 = loop_signature(Projective(2), order).series
    x400 = loop_signature(_kl(4, 3, 0, 0), order).series
    prod = loop_signature(Product((Projective(2), Projective(2))), order).series
    return [
        Check("X_4(0,0) = sign(P^2)^2", x400 == p2**2),
        Check("P^2 x P^2 product route = sign(P^2)^2", prod == p2**2),
    ]


def suite_rigidity(order: int = 6, box: int = 5, **_) -> list[Check]:
    out = []
    p1 = projective_fan(1)
    for name, fan in (("P^1", p1), ("P^1 x P^1", product_fan(p1, p1))):
        rep = rigidity_check(fan, box)
        out.append(Check(f"rigidity {name}", rep.spin and rep.rigid, f"radius {box}"))
    rep = rigidity_check(projective_fan(2), box)
    w = rep.term_at((1, 0))
    ok = (not rep.spin) and w is not None and w.term == cone_sum((1, 0), projective_fan(2))
    out.append(Check("non-rigid P^2", ok, f"witness m={rep.witness.m} term={rep.witness.term.reduced()}" if rep.witness else ""))
    return out


def suite_theorem62(order: int = 6, **_) -> list[Check]:
    out = []
    p1 = projective_fan(1)
    for name, fan in (("P^1", p1), ("P^1 x P^1", product_fan(p1, p1))):
        rep = theorem62_check(fan, order)
        out.append(Check(f"spin vanishing {name}", rep.applicable and rep.ok, f"C={rep.constant}"))
    rep = theorem62_check(projective_fan(2), order)
    out.append(Check("spin vanishing not applicable to P^2", not rep.applicable))
    return out


def suite_signature(order: int = 6, **_) -> list[Check]:
    cases = [
        ("P^2", Projective(2), projective_fan(2)),
        ("P^4", Projective(4), projective_fan(4)),
        ("P^1 x P^1", Product((Projective(1), Projective(1))), product_fan(projective_fan(1), projective_fan(1))),
        ("X_4(0,0)", _kl(4, 3, 0, 0), None),
        ("X_4(0,1)", _kl(4, 3, 0, 1), None),
        ("X_4(1,2)", _kl(4, 3, 1, 2), None),
    ]
    out = []
    for name, fam, fan in cases:
        fan = fan or fam.fan()
        series = loop_signature(fam, order).series
        sig = signature_from_fan(fan)
        out.append(Check(f"constant term {name}", series[0] == sig, f"{series[0]} vs signature {sig}"))
    return out


def suite_genus(**_) -> list[Check]:
    K = multiplicative_sequence(l_genus_coeffs(3), 3)
    expected = [
        {(1,): Fraction(1, 3)},
        {(0, 1): Fraction(7, 45), (2,): Fraction(-1, 45)},
        {(0, 0, 1): Fraction(62, 945), (1, 1): Fraction(-13, 945), (3,): Fraction(2, 945)},
    ]
    out = [
        Check(f"L-genus K_{n}", dict(K[n - 1].terms) == expected[n - 1], str(K[n - 1]))
        for n in (1, 2, 3)
    ]
    for n in (1, 2, 3):
        even = l_genus_coeffs(n)
        full = [c for a in even for c in (a, 0)][: 2 * n + 1]
        coeff_route = genus_eval_projective(full, 2 * n)
        k_route = genus_projective_via_sequence(even, 2 * n)
        out.append(Check(f"signature CP^{2 * n}", coeff_route == k_route == 1))
    return out


def suite_elliptic(order: int = 4, **_) -> list[Check]:
    try:
        params = elliptic_parameters_fit(order, 8)
    except FitError as exc:
        return [Check("elliptic ODE residual zero through x^8", False, str(exc))]
    och = och_from_sign(loop_signature(Projective(2), order).series, 2)
    return [
        Check("elliptic ODE residual zero through x^8", True, f"delta={params.delta}"),
        Check("fitted epsilon equals product formula", params.epsilon == eps_powers(order).eps, str(params.epsilon)),
        Check("och(q, P^2) equals delta", och == params.delta, str(och)),
    ]


def suite_numerator(d: Optional[int] = None, **_) -> list[Check]:
    out = []
    for dd in ([d] if d else range(1, 7)):
        rep = numerator_identity_check(dd)
        out.append(Check(f"numerator identity {rep.label}", rep.ok))
    if not d:
        for u in range(2, 6):
            for v in range(2, 6):
                rep = double_numerator_identity_check(u, v)
                out.append(Check(f"numerator identity {rep.label}", rep.ok))
    return out


SUITES: dict[str, Callable[..., list[Check]]] = {
    "oracle": suite_oracle,
    "positivity": suite_positivity,
    "evenness": suite_evenness,
    "vanishing": suite_vanishing,
    "multiplicativity": suite_multiplicativity,
    "rigidity": suite_rigidity,
    "theorem62": suite_theorem62,
    "signature": suite_signature,
    "genus": suite_genus,
    "elliptic": suite_elliptic,
    "numerator": suite_numerator,
}
