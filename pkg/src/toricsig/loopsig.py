"""Lattice-sum evaluation of the loop-space signature of a toric variety.

sign(q, LX) = eps^{-d/4} * sum_{m in Z^d} S(m),
S(m) = sum_{cones C} (-1)^{codim C} prod_{n in C} 1/(1 + q^{m.n}).

Each S(m) is an exact Laurent fraction. For projective spaces, Kleinschmidt
varieties and products of those the order of S(m) at q = 0 is known in closed
form, which gives a finite region of m that is provably sufficient for a
given truncation order. Arbitrary fans are summed over a user-supplied box and
tagged best-effort.

Why the Kleinschmidt region is sound: with w = sum_i a_i e_i (the v_j sum to
w), the order of the closed-form term is

    ord(m) = sum_i max(0, -m.u_i) + sum_j max(0, -m.v_j) + min(0, m.w).

Since sum_j max(0, -m.v_j) >= max(0, -m.w), the v-part is non-negative, so
ord(m) <= N forces the u-part and the v-part to be <= N separately. If
ord(m) = 0 then m_1..m_r = 0 (the u's positively span their block), hence
m.w = 0 and the v-part is the projective-type function of m_{r+1}..m_d, which
vanishes only at 0. So ord(m) > 0 for m != 0 and the region is finite.
"""

from __future__ import annotations

import math
import os
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, product
from typing import Iterator, Optional, Sequence, Union

from .genus import eps_powers
from .qseries import LaurentFraction, LaurentPolynomial, TruncatedSeries
from .toricfan import (
    Fan,
    FanError,
    KleinschmidtData,
    fans_equal,
    kleinschmidt_fan,
    product_fan,
    projective_fan,
    signature_from_fan,
    spin_test,
    validate_fan,
)

__all__ = [
    "Projective",
    "Kleinschmidt",
    "Product",
    "Family",
    "EquivariantTerm",
    "LoopSignatureResult",
    "IntegralityError",
    "SoundnessError",
    "UnsupportedFamilyError",
    "VerificationError",
    "cone_sum",
    "closed_term_projective",
    "closed_term_kleinschmidt",
    "enumeration_region",
    "recognize_family",
    "parse_family",
    "loop_signature",
    "equivariant_table",
    "rigidity_check",
    "theorem62_check",
    "positivity_report",
    "implied_h0_character",
    "numerator_identity_check",
    "double_numerator_identity_check",
]

LatticePoint = tuple[int, ...]


class IntegralityError(ArithmeticError):
    """Assembled coefficients are not integers; carries diagnostics."""

    def __init__(self, message: str, diagnostics: dict):
        super().__init__(message)
        self.diagnostics = diagnostics


class SoundnessError(ArithmeticError):
    """A lattice point just outside the enumeration region has order <= N."""


class UnsupportedFamilyError(ValueError):
    pass


class VerificationError(AssertionError):
    pass


def _dot(a: Sequence[int], b: Sequence[int]) -> int:
    return sum(x * y for x, y in zip(a, b))


# ---------------------------------------------------------------------------
# Cone sums
# ---------------------------------------------------------------------------


@lru_cache(maxsize=1 << 16)
def _cone_sum_from_pairings(
    pairings: tuple[int, ...], cones: tuple[tuple[int, ...], ...], dim: int
) -> LaurentFraction:
    n = len(pairings)
    full = (1 << n) - 1
    # products prod_{i in mask} (1 + q^{k_i}) as {exponent: coeff}, built one factor at a time
    memo: dict[int, dict[int, int]] = {0: {0: 1}}

    def prod_over(mask: int) -> dict[int, int]:
        got = memo.get(mask)
        if got is not None:
            return got
        top = mask.bit_length() - 1
        base = prod_over(mask & ~(1 << top))
        k = pairings[top]
        if k == 0:
            out = {e: 2 * c for e, c in base.items()}
        else:
            out = dict(base)
            for e, c in base.items():
                out[e + k] = out.get(e + k, 0) + c
        memo[mask] = out
        return out

    num: dict[int, int] = {}
    for cone in cones:
        inside = 0
        for i in cone:
            inside |= 1 << i
        sign = -1 if (dim - len(cone)) % 2 else 1
        for e, c in prod_over(full & ~inside).items():
            num[e] = num.get(e, 0) + sign * c
    return LaurentFraction(LaurentPolynomial.from_dict(num), LaurentPolynomial.from_dict(prod_over(full)))


def cone_sum(m: Sequence[int], fan: Fan) -> LaurentFraction:
    """S(m) over every cone of the fan, on the common denominator prod_rho (1 + q^{m.n_rho})."""
    if len(m) != fan.dim:
        raise ValueError(f"lattice point has length {len(m)}, fan has dimension {fan.dim}")
    pairings = tuple(_dot(m, ray) for ray in fan.rays)
    return _cone_sum_from_pairings(pairings, fan.cones, fan.dim)


def _inv_product(exponents: Sequence[int]) -> LaurentPolynomial:
    den = LaurentPolynomial.constant(1)
    for k in exponents:
        den = den * LaurentPolynomial.one_plus_qk(k)
    return den


def _projective_exponents(m: Sequence[int]) -> tuple[int, ...]:
    return tuple(m) + (-sum(m),)


def closed_term_projective(m: Sequence[int], d: int) -> LaurentFraction:
    """2 / prod_{i=1}^{d+1} (1 + q^{m.k_i}) for even d, zero for odd d."""
    if d < 1:
        raise ValueError("need d >= 1")
    if len(m) != d:
        raise ValueError(f"lattice point has length {len(m)}, expected {d}")
    if d % 2:
        return LaurentFraction.zero()
    return LaurentFraction(LaurentPolynomial.constant(2), _inv_product(_projective_exponents(m)))


def _kleinschmidt_exponents(m: Sequence[int], k: KleinschmidtData) -> tuple[tuple[int, ...], tuple[int, ...], int]:
    r, s = k.r, k.s
    mu = tuple(m[:r]) + (-sum(m[:r]),)
    mw = _dot(k.a, m[:r])
    tail = m[r:]
    mv = tuple(tail) + (mw - sum(tail),)
    assert len(mv) == s
    return mu, mv, mw


def _kleinschmidt_fraction(mu, mv, mw: int, r: int, s: int) -> LaurentFraction:
    if r % 2:
        return LaurentFraction.zero()
    # (1 + (-1)^r q^0)(1 + (-1)^(s-1) q^{m.w}) with r even
    sign = -1 if (s - 1) % 2 else 1
    num = LaurentPolynomial.constant(2) * (LaurentPolynomial.constant(1) + LaurentPolynomial.monomial(mw, sign))
    return LaurentFraction(num, _inv_product(mu + mv))


def closed_term_kleinschmidt(m: Sequence[int], k: KleinschmidtData) -> LaurentFraction:
    """Collapsed cone sum of a Kleinschmidt fan at m.

    (1 + (-1)^r)(1 + (-1)^(s-1) q^{m.w}) / (prod_i (1+q^{m.u_i}) prod_j (1+q^{m.v_j})).
    For even d this is zero when s is even and 2(1 + q^{m.w})/(...) when s is odd.
    """
    if len(m) != k.d:
        raise ValueError(f"lattice point has length {len(m)}, expected {k.d}")
    mu, mv, mw = _kleinschmidt_exponents(m, k)
    return _kleinschmidt_fraction(mu, mv, mw, k.r, k.s)


# ---------------------------------------------------------------------------
# Families
# ---------------------------------------------------------------------------


def _budget_points(n: int, budget: int, offset: int = 0) -> Iterator[tuple[tuple[int, ...], int]]:
    """All y in Z^n with sum_j max(0, -y_j) + max(0, sum_j y_j - offset) <= budget.

    Yields (y, value). Any partial choice with neg + max(0, partial_sum - offset)
    already above budget is pruned: later coordinates cannot lower that bound.
    """
    if budget < 0:
        return
    y = [0] * n

    def rec(i: int, neg: int, partial: int):
        if i == n:
            yield tuple(y), neg + max(0, partial - offset)
            return
        room = budget - neg
        hi = max(room + offset - partial, -1)
        for v in range(-room, hi + 1):
            neg2 = neg + (-v if v < 0 else 0)
            if neg2 + max(0, partial + v - offset) > budget:
                continue
            y[i] = v
            yield from rec(i + 1, neg2, partial + v)

    yield from rec(0, 0, 0)


@dataclass(frozen=True)
class Projective:
    d: int

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("need d >= 1")

    tag = "projective"

    @property
    def dim(self) -> int:
        return self.d

    def label(self) -> str:
        return f"projective:{self.d}"

    def fan(self) -> Fan:
        return projective_fan(self.d)

    def region(self, order: int) -> Iterator[tuple[LatticePoint, int]]:
        """m with sum_i max(0, -m.k_i) <= order, paired with that bound."""
        return _budget_points(self.d, order, 0)

    def order_bound(self, m: Sequence[int]) -> int:
        return sum(max(0, -k) for k in _projective_exponents(m))

    def term_key(self, m: Sequence[int]):
        return tuple(sorted(_projective_exponents(m)))

    def term_from_key(self, key) -> LaurentFraction:
        if self.d % 2:
            return LaurentFraction.zero()
        return LaurentFraction(LaurentPolynomial.constant(2), _inv_product(key))

    def term(self, m: Sequence[int]) -> LaurentFraction:
        return closed_term_projective(m, self.d)


@dataclass(frozen=True)
class Kleinschmidt:
    data: KleinschmidtData

    tag = "kleinschmidt"

    @property
    def dim(self) -> int:
        return self.data.d

    def label(self) -> str:
        k = self.data
        return f"kleinschmidt:{k.d}:{k.s}:{','.join(map(str, k.a))}"

    def fan(self) -> Fan:
        return kleinschmidt_fan(self.data)

    def order_bound(self, m: Sequence[int]) -> int:
        mu, mv, mw = _kleinschmidt_exponents(m, self.data)
        return sum(max(0, -x) for x in mu + mv) + min(0, mw)

    def region(self, order: int) -> Iterator[tuple[LatticePoint, int]]:
        k = self.data
        for head, a_val in _budget_points(k.r, order, 0):
            mw = _dot(k.a, head)
            b = max(0, -mw)
            for tail, v_val in _budget_points(k.s - 1, order - a_val + b, mw):
                ord_m = a_val + v_val - b
                if ord_m <= order:
                    yield head + tail, ord_m

    def term_key(self, m: Sequence[int]):
        mu, mv, mw = _kleinschmidt_exponents(m, self.data)
        return (tuple(sorted(mu)), tuple(sorted(mv)), mw)

    def term_from_key(self, key) -> LaurentFraction:
        mu, mv, mw = key
        return _kleinschmidt_fraction(mu, mv, mw, self.data.r, self.data.s)

    def term(self, m: Sequence[int]) -> LaurentFraction:
        return closed_term_kleinschmidt(m, self.data)


@dataclass(frozen=True)
class Product:
    """Product of supported families; terms come from the generic cone sum on the product fan."""

    factors: tuple

    tag = "product"

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if len(self.factors) < 2:
            raise ValueError("a product needs at least two factors")

    @property
    def dim(self) -> int:
        return sum(f.dim for f in self.factors)

    def label(self) -> str:
        return "*".join(f.label() for f in self.factors)

    @property
    def _fan(self) -> Fan:
        return _product_fan_cached(self)

    def fan(self) -> Fan:
        return self._fan

    def _split(self, m: Sequence[int]) -> list[tuple[int, ...]]:
        out, i = [], 0
        for f in self.factors:
            out.append(tuple(m[i : i + f.dim]))
            i += f.dim
        return out

    def order_bound(self, m: Sequence[int]) -> int:
        return sum(f.order_bound(part) for f, part in zip(self.factors, self._split(m)))

    def region(self, order: int) -> Iterator[tuple[LatticePoint, int]]:
        per_factor = [sorted(f.region(order), key=lambda t: t[1]) for f in self.factors]

        def rec(i: int, prefix: tuple, used: int):
            if i == len(per_factor):
                yield prefix, used
                return
            for pt, val in per_factor[i]:
                if used + val > order:
                    break
                yield from rec(i + 1, prefix + pt, used + val)

        return rec(0, (), 0)

    def term_key(self, m: Sequence[int]):
        return tuple(_dot(m, ray) for ray in self._fan.rays)

    def term_from_key(self, key) -> LaurentFraction:
        f = self._fan
        return _cone_sum_from_pairings(key, f.cones, f.dim)

    def term(self, m: Sequence[int]) -> LaurentFraction:
        return cone_sum(m, self._fan)


@lru_cache(maxsize=32)
def _product_fan_cached(p: Product) -> Fan:
    fan = p.factors[0].fan()
    for f in p.factors[1:]:
        fan = product_fan(fan, f.fan())
    return fan


Family = Union[Projective, Kleinschmidt, Product]


def enumeration_region(family: Family, order: int) -> list[LatticePoint]:
    """Finite set of lattice points containing every m whose term has order <= order."""
    if not isinstance(family, (Projective, Kleinschmidt, Product)):
        raise UnsupportedFamilyError(f"no enumeration region for {family!r}")
    return sorted(m for m, _ in family.region(order))


def parse_family(text: str) -> Family:
    """Parse 'projective:D', 'kleinschmidt:D:S:a1,...,ar' or factors joined by '*'."""
    parts = [p.strip() for p in text.split("*")]
    if len(parts) > 1:
        return Product(tuple(parse_family(p) for p in parts))
    fields = text.strip().split(":")
    try:
        if fields[0] == "projective" and len(fields) == 2:
            return Projective(int(fields[1]))
        if fields[0] == "kleinschmidt" and len(fields) == 4:
            a = tuple(int(x) for x in fields[3].split(",")) if fields[3] else ()
            return Kleinschmidt(KleinschmidtData(int(fields[1]), int(fields[2]), a))
    except ValueError as exc:
        raise UnsupportedFamilyError(f"bad family spec {text!r}: {exc}") from exc
    raise UnsupportedFamilyError(f"bad family spec {text!r}")


def _coordinate_blocks(fan: Fan) -> list[list[int]]:
    """Connected components of coordinates linked by a common ray support."""
    parent = list(range(fan.dim))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for ray in fan.rays:
        support = [i for i, x in enumerate(ray) if x]
        for a, b in zip(support, support[1:]):
            parent[find(a)] = find(b)
    blocks: dict[int, list[int]] = {}
    for i in range(fan.dim):
        blocks.setdefault(find(i), []).append(i)
    return sorted(blocks.values())


def recognize_family(fan: Fan) -> Optional[Family]:
    """Identify a fan that literally equals a supported family's fan (up to ray order).

    Recognises P^d, Kleinschmidt fans in their standard coordinates, and
    products of those split along coordinate blocks. No change of lattice
    basis is attempted.
    """
    if not validate_fan(fan).ok or fan.dim < 1:
        return None
    blocks = _coordinate_blocks(fan)
    if len(blocks) > 1:
        if any(b != list(range(b[0], b[0] + len(b))) for b in blocks):
            return None
        factors = []
        for b in blocks:
            rays_idx = [i for i, r in enumerate(fan.rays) if any(r[j] for j in b)]
            remap = {old: new for new, old in enumerate(rays_idx)}
            sub_rays = [tuple(fan.rays[i][j] for j in b) for i in rays_idx]
            sub_cones = [tuple(remap[i] for i in c if i in remap) for c in fan.max_cones]
            sub = Fan.from_max_cones(len(b), sub_rays, sub_cones)
            fam = recognize_family(sub)
            if fam is None:
                return None
            factors.append(fam)
        flat = []
        for f in factors:
            flat.extend(f.factors if isinstance(f, Product) else [f])
        candidate = Product(tuple(flat))
        return candidate if fans_equal(candidate.fan(), fan) else None
    d = fan.dim
    if fan.n_rays == d + 1 and fans_equal(projective_fan(d), fan):
        return Projective(d)
    if fan.n_rays == d + 2 and d > 1:
        for s in range(2, d + 1):
            r = d - s + 1
            a = []
            # v_s carries a_i in the first r coordinates
            for ray in fan.rays:
                if all(x == -1 for x in ray[r:]) and any(ray[r:]):
                    a = list(ray[:r])
            if len(a) != r or any(x < 0 for x in a) or a != sorted(a):
                continue
            k = KleinschmidtData(d, s, tuple(a))
            if fans_equal(kleinschmidt_fan(k), fan):
                return Kleinschmidt(k)
    return None


# ---------------------------------------------------------------------------
# Assembly
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EquivariantTerm:
    m: LatticePoint
    term: LaurentFraction
    order: Union[int, float]

    @property
    def is_zero(self) -> bool:
        return self.order == math.inf

    def to_json(self) -> dict:
        red = self.term.reduced()
        return {
            "m": list(self.m),
            "num": red.num.to_json(),
            "den": red.den.to_json(),
            "order": None if self.is_zero else self.order,
            "zero": self.is_zero,
        }


@dataclass
class LoopSignatureResult:
    series: TruncatedSeries
    family: str
    label: str
    lattice_points_used: int
    soundness: str
    diagnostics: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "family": self.label,
            "order": self.series.order,
            "coefficients": [str(c.numerator) for c in self.series.coeffs],
            "soundness": self.soundness,
            "lattice_points_used": self.lattice_points_used,
            "diagnostics": self.diagnostics,
        }


def _worker_count(workers: Optional[int]) -> int:
    if workers is not None:
        return max(1, workers)
    env = os.environ.get("LOOPSIG_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def _expand_keys(source, keys: list, order: int) -> list[TruncatedSeries]:
    return [source.term_from_key(k).expand(order) for k in keys]


def _order_of_keys(source, keys: list) -> list:
    return [source.term_from_key(k).order() for k in keys]


def _map_keys(fn, source, keys: list, extra: tuple, workers: int) -> list:
    if workers <= 1 or len(keys) < 64:
        return fn(source, keys, *extra)
    chunk = -(-len(keys) // (workers * 4))
    chunks = [keys[i : i + chunk] for i in range(0, len(keys), chunk)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = pool.map(fn, [source] * len(chunks), chunks, *[[e] * len(chunks) for e in extra])
        return [x for part in parts for x in part]


def _sum_terms(source, counts: Counter, order: int, workers: int) -> TruncatedSeries:
    keys = sorted(counts)
    expansions = _map_keys(_expand_keys, source, keys, (order,), workers)
    total = [Fraction(0)] * (order + 1)
    for key, series in zip(keys, expansions):
        c = counts[key]
        for i, v in enumerate(series.coeffs):
            if v:
                total[i] += c * v
    return TruncatedSeries(order, tuple(total))


def _finish(total: TruncatedSeries, d: int, order: int, diagnostics: dict) -> TruncatedSeries:
    series = total * eps_powers(order).eps_inv_quarter ** d
    bad = [i for i, c in enumerate(series.coeffs) if c.denominator != 1]
    if bad:
        diagnostics = dict(diagnostics, non_integer_indices=bad)
        raise IntegralityError(
            f"non-integer coefficient at q^{bad[0]}: {series[bad[0]]}", diagnostics
        )
    return series


def _neighbors(m: LatticePoint):
    for i in range(len(m)):
        for step in (-1, 1):
            yield m[:i] + (m[i] + step,) + m[i + 1 :]


@dataclass(frozen=True)
class _GenericSource:
    fan: Fan

    def term_from_key(self, key) -> LaurentFraction:
        return _cone_sum_from_pairings(key, self.fan.cones, self.fan.dim)


def _box(d: int, radius: int) -> Iterator[LatticePoint]:
    return product(range(-radius, radius + 1), repeat=d)


def loop_signature(
    target: Union[Family, Fan],
    order: int,
    box: Optional[int] = None,
    workers: Optional[int] = None,
) -> LoopSignatureResult:
    """sign(q, LX) through q^order.

    ``target`` is a family (projective, Kleinschmidt, product) or a Fan. A fan
    that literally matches a supported family is evaluated as that family;
    any other fan needs ``box`` (an infinity-norm radius) and the result is
    tagged best_effort.
    """
    if order < 0:
        raise ValueError("order must be non-negative")
    nworkers = _worker_count(workers)
    family = target
    if isinstance(target, Fan):
        rep = validate_fan(target)
        if not rep.ok:
            check, _, msg = rep.first_failure
            raise FanError(f"invalid fan ({check}): {msg}")
        family = recognize_family(target)
        if family is None:
            if box is None:
                raise UnsupportedFamilyError(
                    "fan is not a recognised family; supply a box radius for best-effort mode"
                )
            return _loop_signature_generic(target, order, box, nworkers)
    if not isinstance(family, (Projective, Kleinschmidt, Product)):
        raise UnsupportedFamilyError(f"unsupported target {target!r}")

    region = set()
    counts: Counter = Counter()
    for m, _ in family.region(order):
        region.add(m)
        counts[family.term_key(m)] += 1

    # truncation soundness: lattice points just outside the region must have order > N
    shell_counts: Counter = Counter()
    for m in region:
        for nb in _neighbors(m):
            if nb not in region:
                shell_counts[family.term_key(nb)] += 1
    shell_keys = sorted(shell_counts)
    shell_orders = _map_keys(_order_of_keys, family, shell_keys, (), nworkers)
    min_order = min(shell_orders, default=math.inf)
    diagnostics = {
        "shell_points": sum(shell_counts.values()),
        "shell_min_order": None if min_order == math.inf else min_order,
        "shell_max_excess": None if min_order == math.inf else order - min_order,
        "distinct_terms": len(counts),
    }
    if min_order <= order:
        raise SoundnessError(
            f"a lattice point outside the region has order {min_order} <= {order}"
        )
    total = _sum_terms(family, counts, order, nworkers)
    series = _finish(total, family.dim, order, diagnostics)
    return LoopSignatureResult(
        series=series,
        family=family.tag,
        label=family.label(),
        lattice_points_used=len(region),
        soundness="proved",
        diagnostics=diagnostics,
    )


def _loop_signature_generic(fan: Fan, order: int, radius: int, workers: int) -> LoopSignatureResult:
    if radius < 0:
        raise ValueError("box radius must be non-negative")
    source = _GenericSource(fan)
    counts: Counter = Counter()
    shell: Counter = Counter()
    for m in _box(fan.dim, radius):
        key = tuple(_dot(m, ray) for ray in fan.rays)
        counts[key] += 1
        if max((abs(x) for x in m), default=0) == radius:
            shell[key] += 1
    shell_keys = sorted(shell)
    shell_orders = _map_keys(_order_of_keys, source, shell_keys, (), workers)
    min_order = min(shell_orders, default=math.inf)
    excess = None if min_order == math.inf else order - min_order
    diagnostics = {
        "box_radius": radius,
        "shell_points": sum(shell.values()),
        "shell_min_order": None if min_order == math.inf else min_order,
        "shell_max_excess": excess,
        "clean": excess is None or excess < 0,
        "distinct_terms": len(counts),
    }
    total = _sum_terms(source, counts, order, workers)
    series = _finish(total, fan.dim, order, diagnostics)
    return LoopSignatureResult(
        series=series,
        family="generic",
        label="generic",
        lattice_points_used=sum(counts.values()),
        soundness="best_effort",
        diagnostics=diagnostics,
    )


# ---------------------------------------------------------------------------
# Equivariant refinement and verification
# ---------------------------------------------------------------------------


def equivariant_table(fan: Fan, box_radius: int) -> list[EquivariantTerm]:
    """S(m) for every m with infinity norm <= box_radius, zero terms included."""
    out = []
    for m in _box(fan.dim, box_radius):
        term = cone_sum(m, fan)
        out.append(EquivariantTerm(m=tuple(m), term=term, order=term.order()))
    return out


@dataclass
class RigidityReport:
    spin_witness: Optional[tuple[int, ...]]
    box_radius: int
    nonzero: list[EquivariantTerm]

    @property
    def spin(self) -> bool:
        return self.spin_witness is not None

    @property
    def rigid(self) -> bool:
        return not self.nonzero

    @property
    def ok(self) -> bool:
        """Rigidity must hold on spin fans; on others there is nothing to assert."""
        return self.rigid or not self.spin

    @property
    def witness(self) -> Optional[EquivariantTerm]:
        if not self.nonzero:
            return None
        return min(self.nonzero, key=lambda t: (t.order, sum(abs(x) for x in t.m), tuple(-x for x in t.m)))

    def term_at(self, m: Sequence[int]) -> Optional[EquivariantTerm]:
        return next((t for t in self.nonzero if t.m == tuple(m)), None)


def rigidity_check(fan: Fan, box_radius: int) -> RigidityReport:
    nonzero = [
        t for t in equivariant_table(fan, box_radius) if any(t.m) and not t.is_zero
    ]
    return RigidityReport(spin_witness=spin_test(fan), box_radius=box_radius, nonzero=nonzero)


@dataclass
class SpinVanishingReport:
    applicable: bool
    constant: Optional[Fraction] = None
    expected_constant: Optional[Fraction] = None
    series: Optional[TruncatedSeries] = None
    expected_series: Optional[TruncatedSeries] = None
    mismatch_index: Optional[int] = None

    @property
    def ok(self) -> bool:
        if not self.applicable:
            return True
        return self.constant == self.expected_constant and self.mismatch_index is None


def theorem62_check(fan: Fan, order: int, box: Optional[int] = None) -> SpinVanishingReport:
    """For a spin fan: S(0) = sign X / 2^d and sign(q, LX) = sign X eps^{-d/4} / 2^d."""
    if spin_test(fan) is None:
        return SpinVanishingReport(applicable=False)
    d = fan.dim
    sig = signature_from_fan(fan)
    s0 = cone_sum((0,) * d, fan)
    if s0.den.high() != 0 or (not s0.is_zero() and s0.num.terms[0][0] != 0) or len(s0.num.terms) > 1:
        raise VerificationError(f"S(0) is not a constant: {s0}")
    constant = Fraction(s0.num.terms[0][1], s0.den.terms[0][1]) if not s0.is_zero() else Fraction(0)
    expected_constant = Fraction(sig, 2**d)
    result = loop_signature(fan, order, box=order if box is None else box)
    expected = eps_powers(order).eps_inv_quarter ** d * expected_constant
    mismatch = next(
        (i for i, (a, b) in enumerate(zip(result.series.coeffs, expected.coeffs)) if a != b), None
    )
    return SpinVanishingReport(
        applicable=True,
        constant=constant,
        expected_constant=expected_constant,
        series=result.series,
        expected_series=expected,
        mismatch_index=mismatch,
    )


@dataclass
class PositivityReport:
    nonpositive: list[int]
    odd: list[int]

    @property
    def ok(self) -> bool:
        return not self.nonpositive and not self.odd


def positivity_report(series: TruncatedSeries, d: Optional[int] = None) -> PositivityReport:
    """Flag coefficients that are not positive, and odd ones at q^j with j >= 1."""
    nonpositive = [i for i, c in enumerate(series.coeffs) if c <= 0]
    odd = [
        i for i, c in enumerate(series.coeffs) if i >= 1 and (c.denominator != 1 or c.numerator % 2)
    ]
    return PositivityReport(nonpositive=nonpositive, odd=odd)


def implied_h0_character(d: int, order: int) -> TruncatedSeries:
    """(sign(q, L P^d) + 1) / 2, which must be a series of non-negative integers."""
    if d % 2 or d < 2:
        raise ValueError("implied_h0_character needs even d >= 2")
    series = (loop_signature(Projective(d), order).series + 1) * Fraction(1, 2)
    for i, c in enumerate(series.coeffs):
        if c.denominator != 1 or c < 0:
            raise VerificationError(f"coefficient of q^{i} is {c}, not a non-negative integer")
    return series


# ---------------------------------------------------------------------------
# Symbolic numerator identities
# ---------------------------------------------------------------------------


def _mask_mul(a: dict[int, int], b: dict[int, int]) -> dict[int, int]:
    out: dict[int, int] = {}
    for ma, ca in a.items():
        for mb, cb in b.items():
            if ma & mb:
                raise ValueError("square of a formal symbol")
            out[ma | mb] = out.get(ma | mb, 0) + ca * cb
    return {k: v for k, v in out.items() if v}


def _simplex_numerator(n: int, offset: int, sign_base: int) -> dict[int, int]:
    """sum_{B proper subset of n symbols} (-1)^(sign_base - #B) prod_{i not in B} (1 + X_i).

    Symbols are bits offset..offset+n-1 of a monomial mask.
    """
    total: dict[int, int] = {}
    for size in range(n):
        for b in combinations(range(n), size):
            term = {0: (-1) ** (sign_base - size)}
            for i in range(n):
                if i not in b:
                    term = _mask_mul(term, {0: 1, 1 << (offset + i): 1})
            for k, v in term.items():
                total[k] = total.get(k, 0) + v
    return {k: v for k, v in total.items() if v}


@dataclass
class IdentityReport:
    label: str
    expected: dict[int, int]
    actual: dict[int, int]

    @property
    def ok(self) -> bool:
        return self.expected == self.actual

    @property
    def offending_monomial(self) -> Optional[int]:
        keys = set(self.expected) | set(self.actual)
        bad = sorted(k for k in keys if self.expected.get(k, 0) != self.actual.get(k, 0))
        return bad[0] if bad else None


def numerator_identity_check(d: int) -> IdentityReport:
    """Collapse of the projective-space numerator to 1 + (-1)^d X_1...X_{d+1}."""
    if not 1 <= d <= 6:
        raise ValueError("numerator identity is checked for 1 <= d <= 6")
    actual = _simplex_numerator(d + 1, 0, d)
    expected = {0: 1}
    full = (1 << (d + 1)) - 1
    expected[full] = expected.get(full, 0) + (-1) ** d
    return IdentityReport(f"projective d={d}", {k: v for k, v in expected.items() if v}, actual)


def double_numerator_identity_check(u_count: int, v_count: int) -> IdentityReport:
    """Kleinschmidt analogue with r+1 = u_count and s = v_count:
    (1 + (-1)^r prod X_u)(1 + (-1)^(s-1) prod X_v)."""
    if u_count < 2 or v_count < 2:
        raise ValueError("need at least two u-symbols and two v-symbols")
    r, s = u_count - 1, v_count
    u_part = _simplex_numerator(u_count, 0, r)
    v_part = _simplex_numerator(v_count, u_count, s - 1)
    actual = _mask_mul(u_part, v_part)
    u_full = (1 << u_count) - 1
    v_full = ((1 << v_count) - 1) << u_count
    expected = _mask_mul({0: 1, u_full: (-1) ** r}, {0: 1, v_full: (-1) ** (s - 1)})
    # the same identity, derived directly from the double sum over proper subsets
    direct: dict[int, int] = {}
    d = r + s - 1
    for ni in range(u_count):
        for I in combinations(range(u_count), ni):
            for nj in range(v_count):
                for J in combinations(range(v_count), nj):
                    term = {0: (-1) ** (d - ni - nj)}
                    for i in range(u_count):
                        if i not in I:
                            term = _mask_mul(term, {0: 1, 1 << i: 1})
                    for j in range(v_count):
                        if j not in J:
                            term = _mask_mul(term, {0: 1, 1 << (u_count + j): 1})
                    for k, v in term.items():
                        direct[k] = direct.get(k, 0) + v
    direct = {k: v for k, v in direct.items() if v}
    if direct != actual:
        raise VerificationError("factorised and direct double sums disagree")
    return IdentityReport(f"kleinschmidt (r+1, s)=({u_count}, {v_count})", expected, direct)


def product_of_families(*families: Family) -> Product:
    flat = []
    for f in families:
        flat.extend(f.factors if isinstance(f, Product) else [f])
    return Product(tuple(flat))
