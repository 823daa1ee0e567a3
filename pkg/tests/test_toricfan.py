import itertools
import json

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from toricsig.toricfan import (
    Fan,
    FanError,
    KleinschmidtData,
    dumps_fan,
    fan_from_dict,
    fan_to_dict,
    fans_equal,
    h_vector,
    kleinschmidt_fan,
    load_fan,
    point_fan,
    product_fan,
    projective_fan,
    signature_from_fan,
    spin_test,
    validate_fan,
)

t = sympy.symbols("t")


def h_oracle(fan):
    """h-polynomial from the f-vector: sum over cones of (t-1)^codim."""
    poly = sympy.expand(sum((t - 1) ** (fan.dim - len(c)) for c in fan.cones))
    return [int(poly.coeff(t, i)) for i in range(fan.dim + 1)]


def spin_oracle(fan):
    """Brute force over (Z/2)^d: m with m.n odd for every ray."""
    for m in itertools.product((0, 1), repeat=fan.dim):
        if all(sum(a * b for a, b in zip(m, n)) % 2 for n in fan.rays):
            return True
    return False


kleinschmidt_data = st.integers(2, 4).flatmap(
    lambda d: st.integers(2, d).flatmap(
        lambda s: st.lists(st.integers(0, 3), min_size=d - s + 1, max_size=d - s + 1).map(
            lambda a: KleinschmidtData(d, s, tuple(sorted(a)))
        )
    )
)


class TestProjective:
    def test_p1(self):
        f = projective_fan(1)
        assert set(f.rays) == {(1,), (-1,)}
        assert len(f.max_cones) == 2

    def test_p2(self):
        f = projective_fan(2)
        assert set(f.rays) == {(1, 0), (0, 1), (-1, -1)}
        assert len(f.max_cones) == 3
        assert validate_fan(f).ok
        assert h_vector(f) == [1, 1, 1]
        assert signature_from_fan(f) == 1

    def test_p4_signature(self):
        assert h_vector(projective_fan(4)) == [1] * 5
        assert signature_from_fan(projective_fan(4)) == 1

    @pytest.mark.parametrize("d", range(1, 6))
    def test_h_vector_matches_oracle(self, d):
        assert h_vector(projective_fan(d)) == h_oracle(projective_fan(d))


class TestValidation:
    def test_missing_cone_is_incomplete(self):
        f = projective_fan(2)
        broken = Fan.from_max_cones(2, f.rays, f.max_cones[1:])
        rep = validate_fan(broken)
        assert not rep.ok and not rep.complete
        assert rep.first_failure[0] == "complete"

    def test_non_primitive_ray(self):
        broken = Fan.from_max_cones(2, [(2, 0), (0, 1), (-1, -1)], [(0, 1), (1, 2), (0, 2)])
        rep = validate_fan(broken)
        assert not rep.primitive

    def test_non_regular_cone(self):
        # P(1,1,2)-like fan: (1,0),(1,2) span index 2
        f = Fan.from_max_cones(2, [(1, 0), (1, 2), (-1, -1)], [(0, 1), (1, 2), (0, 2)])
        assert not validate_fan(f).regular

    def test_report_lines(self):
        lines = validate_fan(projective_fan(2)).lines()
        assert lines == ["primitive: ok", "face_closed: ok", "regular: ok", "complete: ok"]


class TestKleinschmidt:
    def test_a_zero_is_product(self):
        f = kleinschmidt_fan(KleinschmidtData(4, 3, (0, 0)))
        assert fans_equal(f, product_fan(projective_fan(2), projective_fan(2)))
        assert len(f.rays) == 6 and len(f.max_cones) == 9

    def test_hirzebruch_f1(self):
        f = kleinschmidt_fan(KleinschmidtData(2, 2, (1,)))
        ref = Fan.from_max_cones(
            2, [(1, 0), (0, 1), (-1, 0), (1, -1)], [(0, 1), (1, 2), (2, 3), (3, 0)]
        )
        assert set(f.rays) == {(1, 0), (-1, 0), (0, 1), (1, -1)}
        assert fans_equal(f, ref)

    def test_bad_data(self):
        with pytest.raises(ValueError):
            KleinschmidtData(2, 3, ())
        with pytest.raises(ValueError):
            KleinschmidtData(4, 3, (0,))
        with pytest.raises(ValueError):
            KleinschmidtData(4, 3, (2, 1))

    @settings(max_examples=25, deadline=None)
    @given(kleinschmidt_data)
    def test_always_valid(self, k):
        f = kleinschmidt_fan(k)
        assert validate_fan(f).ok
        h = h_vector(f)
        assert h == h_oracle(f)
        assert h == h[::-1]  # Dehn-Sommerville


class TestProduct:
    def test_p1_p1(self):
        f = product_fan(projective_fan(1), projective_fan(1))
        assert set(f.rays) == {(1, 0), (-1, 0), (0, 1), (0, -1)}
        assert len(f.max_cones) == 4
        assert h_vector(f) == [1, 2, 1]
        assert signature_from_fan(f) == 0

    def test_point_identity(self):
        f = projective_fan(2)
        assert fans_equal(product_fan(f, point_fan()), f)

    def test_p2_p2(self):
        f = product_fan(projective_fan(2), projective_fan(2))
        assert len(f.rays) == 6 and len(f.max_cones) == 9
        assert h_vector(f) == [1, 2, 3, 2, 1]

    @pytest.mark.parametrize("d1,d2", [(1, 2), (2, 3), (1, 1)])
    def test_h_polynomial_multiplies(self, d1, d2):
        f1, f2 = projective_fan(d1), projective_fan(d2)
        h1 = sum(c * t**i for i, c in enumerate(h_vector(f1)))
        h2 = sum(c * t**i for i, c in enumerate(h_vector(f2)))
        prod = sympy.Poly(sympy.expand(h1 * h2), t).all_coeffs()[::-1]
        assert h_vector(product_fan(f1, f2)) == [int(c) for c in prod]


class TestSpin:
    def test_p1_p1_witness(self):
        f = product_fan(projective_fan(1), projective_fan(1))
        assert spin_test(f) == (1, 1)

    def test_p2_not_spin(self):
        assert spin_test(projective_fan(2)) is None

    def test_p3_spin(self):
        w = spin_test(projective_fan(3))
        assert w is not None
        assert all(sum(a * b for a, b in zip(w, n)) % 2 for n in projective_fan(3).rays)

    @settings(max_examples=25, deadline=None)
    @given(kleinschmidt_data)
    def test_agrees_with_brute_force(self, k):
        f = kleinschmidt_fan(k)
        assert (spin_test(f) is not None) == spin_oracle(f)

    @pytest.mark.parametrize("d", range(1, 6))
    def test_projective_parity(self, d):
        assert (spin_test(projective_fan(d)) is not None) == (d % 2 == 1)


class TestJson:
    def test_round_trip(self, tmp_path):
        f = kleinschmidt_fan(KleinschmidtData(4, 3, (1, 2)))
        path = tmp_path / "f.json"
        path.write_text(dumps_fan(f))
        g = load_fan(path)
        assert g == f
        assert dumps_fan(g) == dumps_fan(f)

    def test_shape(self):
        assert fan_to_dict(projective_fan(1)) == {"dim": 1, "rays": [[1], [-1]], "max_cones": [[0], [1]]}

    def test_malformed(self):
        with pytest.raises(FanError):
            fan_from_dict({"dim": 2, "rays": [[1, 0]]})
        with pytest.raises(FanError):
            fan_from_dict({"dim": 1, "rays": [[1]], "max_cones": [[0, 3]]})

    def test_bad_json_file(self, tmp_path):
        path = tmp_path / "x.json"
        path.write_text("{not json")
        with pytest.raises(FanError):
            load_fan(path)

    def test_dumps_is_plain_json(self):
        assert json.loads(dumps_fan(projective_fan(2)))["dim"] == 2
