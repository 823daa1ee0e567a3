import csv
import io
import json
import subprocess
import sys

import pytest

from toricsig.cli import RunConfig, UsageError, main
from toricsig.toricfan import Fan, dumps_fan, product_fan, projective_fan


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def p1xp1(tmp_path):
    path = tmp_path / "p1xp1.json"
    p1 = projective_fan(1)
    path.write_text(dumps_fan(product_fan(p1, p1)))
    return str(path)


@pytest.fixture
def broken(tmp_path):
    p2 = projective_fan(2)
    path = tmp_path / "broken.json"
    path.write_text(dumps_fan(Fan.from_max_cones(2, p2.rays, p2.max_cones[1:])))
    return str(path)


@pytest.fixture
def sheared(tmp_path):
    # P^2 in a non-standard basis, which only the box route can evaluate
    p2 = projective_fan(2)
    path = tmp_path / "sheared.json"
    path.write_text(dumps_fan(Fan.from_max_cones(2, [(1, 0), (1, 1), (-2, -1)], p2.max_cones)))
    return str(path)


class TestFanCommand:
    def test_projective(self, capsys):
        code, out, _ = run(capsys, "fan", "projective", "2")
        data = json.loads(out)
        assert code == 0
        assert len(data["rays"]) == 3 and len(data["max_cones"]) == 3

    def test_kleinschmidt(self, capsys):
        code, out, _ = run(capsys, "fan", "kleinschmidt", "4", "3", "0,0")
        data = json.loads(out)
        assert code == 0
        assert len(data["rays"]) == 6 and len(data["max_cones"]) == 9

    def test_byte_stable(self, capsys):
        _, a, _ = run(capsys, "fan", "kleinschmidt", "4", "3", "1,2")
        _, b, _ = run(capsys, "fan", "kleinschmidt", "4", "3", "1,2")
        assert a == b

    def test_product(self, capsys, tmp_path):
        f = tmp_path / "p1.json"
        f.write_text(dumps_fan(projective_fan(1)))
        code, out, _ = run(capsys, "fan", "product", str(f), str(f))
        assert code == 0
        assert len(json.loads(out)["max_cones"]) == 4

    def test_validate_ok(self, capsys, p1xp1):
        code, out, _ = run(capsys, "fan", "validate", p1xp1)
        assert code == 0 and out.startswith("valid")

    def test_validate_broken(self, capsys, broken):
        code, out, _ = run(capsys, "fan", "validate", broken)
        assert code == 1
        assert out.startswith("invalid")
        assert "first failure: complete" in out

    @pytest.mark.parametrize("argv", [
        ("fan", "projective"),
        ("fan", "projective", "x"),
        ("fan", "kleinschmidt", "2", "3", ""),
        ("fan", "kleinschmidt", "4", "3", "a,b"),
        ("fan", "validate", "/nonexistent/fan.json"),
    ])
    def test_usage_errors(self, capsys, argv):
        code, _, err = run(capsys, *argv)
        assert code == 2 and "error" in err

    def test_unknown_kind(self):
        with pytest.raises(SystemExit) as exc:
            main(["fan", "torus", "2"])
        assert exc.value.code == 2


class TestSignatureCommand:
    def test_p2_order_one(self, capsys):
        code, out, _ = run(capsys, "signature", "--family", "projective:2", "--order", "1")
        data = json.loads(out)
        assert code == 0
        assert data["coefficients"] == ["1", "32"]
        assert data["soundness"] == "proved"

    def test_p1_zero(self, capsys):
        code, out, _ = run(capsys, "signature", "--family", "projective:1", "--order", "6")
        assert code == 0
        assert json.loads(out)["coefficients"] == ["0"] * 7

    def test_equivariant_spin_fan(self, capsys, p1xp1):
        code, out, _ = run(capsys, "signature", "--fan", p1xp1, "--order", "4", "--equivariant", "--box", "3")
        data = json.loads(out)
        assert code == 0
        assert data["coefficients"] == ["0"] * 5
        terms = data["equivariant"]
        assert len(terms) == 49
        assert all(t["zero"] for t in terms if any(t["m"]))

    def test_csv(self, capsys):
        code, out, _ = run(capsys, "signature", "--family", "projective:2", "--order", "2", "--format", "csv")
        rows = list(csv.reader(io.StringIO(out)))
        assert code == 0
        assert rows == [["exponent", "coefficient"], ["0", "1"], ["1", "32"], ["2", "256"]]

    def test_och(self, capsys):
        code, out, _ = run(capsys, "signature", "--family", "projective:2", "--order", "1", "--och")
        assert code == 0
        assert json.loads(out)["och"] == ["1/4", "6"]

    def test_och_odd_dimension(self, capsys):
        code, _, _ = run(capsys, "signature", "--family", "projective:3", "--order", "1", "--och")
        assert code == 2

    def test_text(self, capsys):
        code, out, _ = run(capsys, "signature", "--family", "kleinschmidt:4:3:1,2", "--order", "2", "--format", "text")
        assert code == 0
        assert "coefficients: 1 160 3840" in out
        assert "soundness: proved" in out

    def test_product_family(self, capsys):
        code, out, _ = run(capsys, "signature", "--family", "projective:2*projective:2", "--order", "1")
        assert json.loads(out)["coefficients"] == ["1", "64"]

    def test_generic_needs_box(self, capsys, sheared):
        code, _, err = run(capsys, "signature", "--fan", sheared, "--order", "2")
        assert code == 2 and "box" in err

    def test_generic_best_effort_exit(self, capsys, sheared):
        code, out, _ = run(capsys, "signature", "--fan", sheared, "--order", "2", "--box", "6")
        data = json.loads(out)
        assert data["coefficients"] == ["1", "32", "256"]
        assert data["soundness"] == "best_effort"
        assert code == 1

    def test_invalid_fan(self, capsys, broken):
        code, _, err = run(capsys, "signature", "--fan", broken, "--order", "2")
        assert code == 1 and "invalid fan" in err

    @pytest.mark.parametrize("argv", [
        ("--family", "projective:2", "--order", "-1"),
        ("--family", "projective:2", "--order", "1", "--box", "-2"),
        ("--family", "bogus:2", "--order", "1"),
        ("--family", "projective:2", "--order", "1", "--equivariant"),
    ])
    def test_usage_errors(self, capsys, argv):
        code, _, _ = run(capsys, "signature", *argv)
        assert code == 2

    def test_needs_source(self):
        with pytest.raises(SystemExit) as exc:
            main(["signature", "--order", "1"])
        assert exc.value.code == 2

    def test_deterministic(self, capsys):
        argv = ("signature", "--family", "projective:4", "--order", "3", "--och")
        assert run(capsys, *argv) == run(capsys, *argv)


class TestVerifyCommand:
    def test_oracle(self, capsys):
        code, out, _ = run(capsys, "verify", "oracle", "--order", "4")
        assert code == 0
        assert out.count("PASS") == 2 and "FAIL" not in out

    def test_numerator(self, capsys):
        code, out, _ = run(capsys, "verify", "numerator", "--d", "4")
        assert code == 0
        assert out.strip() == "PASS numerator identity projective d=4"

    def test_positivity(self, capsys):
        code, out, _ = run(capsys, "verify", "positivity", "--order", "6")
        assert code == 0
        for name in ("P^2", "P^4", "P^6", "X_4(0,1)", "X_4(1,2)"):
            assert f"PASS positive coefficients {name}" in out

    def test_unknown_suite(self, capsys):
        code, _, err = run(capsys, "verify", "nonsense")
        assert code == 2 and "unknown suite" in err

    def test_all(self, capsys):
        code, out, _ = run(capsys, "verify", "all", "--order", "3")
        assert code == 0
        assert "FAIL" not in out


class TestRunConfig:
    def test_invariants(self):
        with pytest.raises(UsageError):
            RunConfig(command="signature", order=-1)
        with pytest.raises(UsageError):
            RunConfig(command="signature", order=1, box_radius=-1)
        assert RunConfig(command="signature", order=0, box_radius=0).box_radius == 0


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "toricsig", "signature", "--family", "projective:2", "--order", "1"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["coefficients"] == ["1", "32"]
