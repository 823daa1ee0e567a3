"""Complete regular fans: construction, validation and fan-level invariants."""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Iterable, Optional, Sequence

__all__ = [
    "Fan",
    "FanError",
    "KleinschmidtData",
    "ValidationReport",
    "validate_fan",
    "point_fan",
    "projective_fan",
    "kleinschmidt_fan",
    "product_fan",
    "h_vector",
    "signature_from_fan",
    "spin_test",
    "fans_equal",
    "fan_to_dict",
    "fan_from_dict",
    "dumps_fan",
    "load_fan",
]

Ray = tuple[int, ...]
Cone = tuple[int, ...]


class FanError(ValueError):
    """Raised when an operation needs a valid fan and gets something else."""


def _face_closure(max_cones: Iterable[Sequence[int]]) -> tuple[Cone, ...]:
    faces: set[Cone] = {()}
    for cone in max_cones:
        cone = tuple(sorted(cone))
        for k in range(len(cone) + 1):
            faces.update(combinations(cone, k))
    return tuple(sorted(faces, key=lambda c: (len(c), c)))


@dataclass(frozen=True)
class Fan:
    """A simplicial fan in Z^dim given by primitive rays and cones of ray indices.

    ``cones`` holds every cone, faces and the empty cone included. Use
    :meth:`from_max_cones` to build a fan from its maximal cones only.
    """

    dim: int
    rays: tuple[Ray, ...]
    cones: tuple[Cone, ...]

    def __post_init__(self):
        object.__setattr__(self, "rays", tuple(tuple(int(x) for x in r) for r in self.rays))
        cones = {tuple(sorted(int(i) for i in c)) for c in self.cones}
        object.__setattr__(
            self, "cones", tuple(sorted(cones, key=lambda c: (len(c), c)))
        )

    @classmethod
    def from_max_cones(
        cls, dim: int, rays: Sequence[Sequence[int]], max_cones: Iterable[Sequence[int]]
    ) -> "Fan":
        return cls(dim, tuple(tuple(r) for r in rays), _face_closure(max_cones))

    @cached_property
    def max_cones(self) -> tuple[Cone, ...]:
        sets = [frozenset(c) for c in self.cones]
        out = []
        for c, s in zip(self.cones, sets):
            if not any(s < t for t in sets if len(t) > len(s)):
                out.append(c)
        return tuple(sorted(out))

    @property
    def n_rays(self) -> int:
        return len(self.rays)

    def codim(self, cone: Cone) -> int:
        return self.dim - len(cone)


@dataclass(frozen=True)
class KleinschmidtData:
    """Parameters (d, s, a_1..a_r) of a Picard-number-two smooth toric variety."""

    d: int
    s: int
    a: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(int(x) for x in self.a))
        if not 1 < self.d:
            raise ValueError(f"need d > 1, got d={self.d}")
        if not 1 < self.s < self.d + 1:
            raise ValueError(f"need 1 < s < d+1, got s={self.s}, d={self.d}")
        if len(self.a) != self.r:
            raise ValueError(f"need r = d-s+1 = {self.r} twist entries, got {len(self.a)}")
        if any(x < 0 for x in self.a):
            raise ValueError("twist entries must be non-negative")
        if any(x > y for x, y in zip(self.a, self.a[1:])):
            raise ValueError("twist entries must be non-decreasing")

    @property
    def r(self) -> int:
        return self.d - self.s + 1

    def u_vectors(self) -> list[Ray]:
        d, r = self.d, self.r
        us = [tuple(1 if k == i else 0 for k in range(d)) for i in range(r)]
        us.append(tuple(-1 if k < r else 0 for k in range(d)))
        return us

    def v_vectors(self) -> list[Ray]:
        d, r, s = self.d, self.r, self.s
        vs = [tuple(1 if k == r + j else 0 for k in range(d)) for j in range(s - 1)]
        last = [0] * d
        for i, ai in enumerate(self.a):
            last[i] = ai
        for j in range(s - 1):
            last[r + j] = -1
        vs.append(tuple(last))
        return vs

    def w_vector(self) -> Ray:
        """Sum of the v-vectors, which telescopes to sum_i a_i e_i."""
        return tuple(self.a) + (0,) * (self.d - self.r)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


@dataclass
class ValidationReport:
    primitive: bool = True
    face_closed: bool = True
    regular: bool = True
    complete: bool = True
    failures: list[tuple[str, Optional[Cone], str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    @property
    def first_failure(self) -> Optional[tuple[str, Optional[Cone], str]]:
        return self.failures[0] if self.failures else None

    def _fail(self, check: str, cone: Optional[Cone], msg: str) -> None:
        setattr(self, check, False)
        self.failures.append((check, cone, msg))

    def lines(self) -> list[str]:
        out = [
            f"{name}: {'ok' if getattr(self, name) else 'FAILED'}"
            for name in ("primitive", "face_closed", "regular", "complete")
        ]
        for check, cone, msg in self.failures:
            where = "" if cone is None else f" at cone {list(cone)}"
            out.append(f"  {check}{where}: {msg}")
        return out


def _det(rows: Sequence[Sequence[int]]) -> int:
    """Integer determinant by Bareiss fraction-free elimination."""
    m = [list(r) for r in rows]
    n = len(m)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k]:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def validate_fan(fan: Fan) -> ValidationReport:
    """Check primitivity, face closure, regularity and completeness.

    Completeness uses facet pairing: every (d-1)-face of a maximal cone lies in
    exactly two maximal cones, and all maximal cones are d-dimensional.
    """
    rep = ValidationReport()
    d = fan.dim
    n = fan.n_rays

    for i, ray in enumerate(fan.rays):
        if len(ray) != d:
            rep._fail("primitive", (i,), f"ray {list(ray)} has length {len(ray)}, expected {d}")
        elif math.gcd(*ray) != 1:
            rep._fail("primitive", (i,), f"ray {list(ray)} is not primitive")
    if len(set(fan.rays)) != n:
        rep._fail("primitive", None, "duplicate ray vectors")
    for c in fan.cones:
        if any(not 0 <= i < n for i in c):
            rep._fail("face_closed", c, "ray index out of range")
    if rep.failures:
        return rep

    cone_set = set(fan.cones)
    if () not in cone_set:
        rep._fail("face_closed", (), "empty cone missing")
    for i in range(n):
        if (i,) not in cone_set:
            rep._fail("face_closed", (i,), f"ray {i} is not a 1-cone")
            break
    for c in fan.cones:
        missing = next(
            (f for k in range(len(c)) for f in combinations(c, k) if f not in cone_set),
            None,
        )
        if missing is not None:
            rep._fail("face_closed", c, f"face {list(missing)} missing")
            break

    maxc = fan.max_cones
    for c in maxc:
        if len(c) != d:
            rep._fail("complete", c, f"maximal cone has dimension {len(c)}, expected {d}")
            break
        det = _det([fan.rays[i] for i in c])
        if abs(det) != 1:
            rep._fail("regular", c, f"determinant {det}, expected +-1")
            break
    if not maxc:
        rep._fail("complete", None, "fan has no cones")
    if not rep.complete or d == 0:
        return rep

    incidence: Counter = Counter()
    for c in maxc:
        for facet in combinations(c, d - 1):
            incidence[facet] += 1
    for c in maxc:
        for facet in combinations(c, d - 1):
            if incidence[facet] != 2:
                rep._fail(
                    "complete",
                    c,
                    f"facet {list(facet)} lies in {incidence[facet]} maximal cones, expected 2",
                )
                return rep
    return rep


def _require_valid(fan: Fan) -> None:
    rep = validate_fan(fan)
    if not rep.ok:
        check, cone, msg = rep.first_failure
        raise FanError(f"invalid fan ({check}): {msg}")


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------


def point_fan() -> Fan:
    return Fan(0, (), ((),))


def projective_fan(d: int) -> Fan:
    """Fan of P^d: rays e_1..e_d, -(e_1+...+e_d); cones are all proper subsets."""
    if d < 1:
        raise ValueError(f"projective space needs d >= 1, got {d}")
    rays = [tuple(1 if k == i else 0 for k in range(d)) for i in range(d)]
    rays.append((-1,) * d)
    max_cones = [tuple(j for j in range(d + 1) if j != i) for i in range(d + 1)]
    return Fan.from_max_cones(d, rays, max_cones)


def kleinschmidt_fan(k: KleinschmidtData) -> Fan:
    """Fan with rays u_1..u_{r+1}, v_1..v_s and maximal cones (U u V) minus {u_i, v_j}."""
    us, vs = k.u_vectors(), k.v_vectors()
    nu = len(us)
    max_cones = []
    for i in range(nu):
        for j in range(len(vs)):
            max_cones.append(
                tuple(x for x in range(nu + len(vs)) if x != i and x != nu + j)
            )
    return Fan.from_max_cones(k.d, us + vs, max_cones)


def product_fan(f1: Fan, f2: Fan) -> Fan:
    _require_valid(f1)
    _require_valid(f2)
    d1, d2 = f1.dim, f2.dim
    rays = [r + (0,) * d2 for r in f1.rays] + [(0,) * d1 + r for r in f2.rays]
    shift = f1.n_rays
    max_cones = [c1 + tuple(i + shift for i in c2) for c1 in f1.max_cones for c2 in f2.max_cones]
    return Fan.from_max_cones(d1 + d2, rays, max_cones)


# ---------------------------------------------------------------------------
# Invariants
# ---------------------------------------------------------------------------


def h_vector(fan: Fan) -> list[int]:
    """h_0..h_d from sum_p h_p t^p = sum_C (t-1)^(d - dim C)."""
    _require_valid(fan)
    d = fan.dim
    h = [0] * (d + 1)
    for k, count in Counter(fan.codim(c) for c in fan.cones).items():
        for j in range(k + 1):
            h[j] += count * math.comb(k, j) * (-1) ** (k - j)
    return h


def signature_from_fan(fan: Fan) -> int:
    return sum((-1) ** p * hp for p, hp in enumerate(h_vector(fan)))


def spin_test(fan: Fan) -> Optional[tuple[int, ...]]:
    """A vector m in {0,1}^d with m.n odd for every ray n, or None if none exists."""
    d = fan.dim
    # augmented rows over GF(2): [ray mod 2 | 1]
    rows = [[x & 1 for x in ray] + [1] for ray in fan.rays]
    pivots = []
    r = 0
    for col in range(d):
        piv = next((i for i in range(r, len(rows)) if rows[i][col]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        for i in range(len(rows)):
            if i != r and rows[i][col]:
                rows[i] = [a ^ b for a, b in zip(rows[i], rows[r])]
        pivots.append(col)
        r += 1
    if any(row[d] and not any(row[:d]) for row in rows):
        return None
    m = [0] * d
    for i, col in enumerate(pivots):
        m[col] = rows[i][d]
    return tuple(m)


def fans_equal(f1: Fan, f2: Fan) -> bool:
    """Equality up to simultaneous reordering of rays (not up to GL(d, Z))."""
    if f1.dim != f2.dim or set(f1.rays) != set(f2.rays) or f1.n_rays != f2.n_rays:
        return False

    def cones_by_vector(f: Fan) -> set[frozenset]:
        return {frozenset(f.rays[i] for i in c) for c in f.cones}

    return cones_by_vector(f1) == cones_by_vector(f2)


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------


def fan_to_dict(fan: Fan) -> dict:
    return {
        "dim": fan.dim,
        "rays": [list(r) for r in fan.rays],
        "max_cones": sorted(sorted(c) for c in fan.max_cones),
    }


def fan_from_dict(data: dict) -> Fan:
    try:
        dim = int(data["dim"])
        rays = [tuple(int(x) for x in r) for r in data["rays"]]
        max_cones = [tuple(int(i) for i in c) for c in data["max_cones"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise FanError(f"malformed fan JSON: {exc}") from exc
    for c in max_cones:
        if any(not 0 <= i < len(rays) for i in c):
            raise FanError(f"cone {list(c)} refers to a missing ray")
        if len(set(c)) != len(c):
            raise FanError(f"cone {list(c)} repeats a ray index")
    return Fan.from_max_cones(dim, rays, max_cones)


def dumps_fan(fan: Fan) -> str:
    return json.dumps(fan_to_dict(fan)) + "\n"


def load_fan(path) -> Fan:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FanError(f"{path}: not valid JSON ({exc})") from exc
    return fan_from_dict(data)
