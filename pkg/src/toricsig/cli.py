"""Command-line front end.

    toricsig fan projective D
    toricsig fan kleinschmidt D S a1,...,ar
    toricsig fan product F1.json F2.json
    toricsig fan validate F.json
    toricsig signature (--family SPEC | --fan FILE) --order N [--box R]
                       [--equivariant] [--och] [--format json|csv|text]
    toricsig verify SUITE [--order N] [--d D] [--box R]

Exit codes: 0 success, 1 check or verification failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass
from typing import Optional

from . import verify
from .genus import och_from_sign
from .loopsig import (
    IntegralityError,
    SoundnessError,
    UnsupportedFamilyError,
    equivariant_table,
    loop_signature,
    parse_family,
)
from .qseries import format_rational
from .toricfan import (
    FanError,
    KleinschmidtData,
    dumps_fan,
    kleinschmidt_fan,
    load_fan,
    product_fan,
    projective_fan,
    validate_fan,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    fan_source: Optional[str] = None
    family: Optional[str] = None
    order: int = 0
    box_radius: Optional[int] = None
    output_format: str = "json"
    equivariant: bool = False
    och: bool = False

    def __post_init__(self):
        if self.order < 0:
            raise UsageError("--order must be non-negative")
        if self.box_radius is not None and self.box_radius < 0:
            raise UsageError("--box must be non-negative")


def _parse_ints(text: str) -> tuple[int, ...]:
    if not text:
        return ()
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}")


def cmd_fan(args) -> int:
    kind = args.kind
    rest = args.args
    try:
        if kind == "projective":
            if len(rest) != 1:
                raise UsageError("usage: fan projective D")
            fan = projective_fan(int(rest[0]))
        elif kind == "kleinschmidt":
            if len(rest) not in (2, 3):
                raise UsageError("usage: fan kleinschmidt D S a1,...,ar")
            a = _parse_ints(rest[2]) if len(rest) == 3 else ()
            fan = kleinschmidt_fan(KleinschmidtData(int(rest[0]), int(rest[1]), a))
        elif kind == "product":
            if len(rest) != 2:
                raise UsageError("usage: fan product F1.json F2.json")
            fan = product_fan(load_fan(rest[0]), load_fan(rest[1]))
        elif kind == "validate":
            if len(rest) != 1:
                raise UsageError("usage: fan validate F.json")
            rep = validate_fan(load_fan(rest[0]))
            print("valid" if rep.ok else "invalid")
            for line in rep.lines():
                print(line)
            if not rep.ok:
                check, cone, msg = rep.first_failure
                where = "" if cone is None else f" at cone {list(cone)}"
                print(f"first failure: {check}{where}: {msg}")
            return EXIT_OK if rep.ok else EXIT_FAIL
        else:
            raise UsageError(f"unknown fan command {kind!r}")
    except ValueError as exc:
        if isinstance(exc, FanError):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_FAIL
        raise UsageError(str(exc))
    sys.stdout.write(dumps_fan(fan))
    return EXIT_OK


def _render(payload: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(payload, indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        och = payload.get("och")
        w.writerow(["exponent", "coefficient"] + (["och"] if och else []))
        for i, c in enumerate(payload["coefficients"]):
            w.writerow([i, c] + ([och[i]] if och else []))
        if "equivariant" in payload:
            w.writerow([])
            w.writerow(["m", "order", "num", "den"])
            for t in payload["equivariant"]:
                w.writerow([
                    " ".join(map(str, t["m"])),
                    "inf" if t["order"] is None else t["order"],
                    " ".join(f"{c}q^{e}" for e, c in t["num"]) or "0",
                    " ".join(f"{c}q^{e}" for e, c in t["den"]),
                ])
        return buf.getvalue()
    lines = [
        f"family: {payload['family']}",
        f"order: {payload['order']}",
        f"soundness: {payload['soundness']}",
        f"lattice points: {payload['lattice_points_used']}",
        "coefficients: " + " ".join(payload["coefficients"]),
    ]
    if "och" in payload:
        lines.append("och: " + " ".join(payload["och"]))
    for key, value in payload["diagnostics"].items():
        lines.append(f"  {key}: {value}")
    if "equivariant" in payload:
        nonzero = [t for t in payload["equivariant"] if not t["zero"] and any(t["m"])]
        lines.append(f"equivariant terms: {len(payload['equivariant'])}, nonzero at m != 0: {len(nonzero)}")
    return "\n".join(lines) + "\n"


def cmd_signature(cfg: RunConfig) -> int:
    if (cfg.family is None) == (cfg.fan_source is None):
        raise UsageError("give exactly one of --family or --fan")
    if cfg.equivariant and cfg.box_radius is None:
        raise UsageError("--equivariant needs --box")
    try:
        if cfg.family is not None:
            target = parse_family(cfg.family)
            fan = target.fan() if cfg.equivariant else None
        else:
            target = fan = load_fan(cfg.fan_source)
        result = loop_signature(target, cfg.order, box=cfg.box_radius)
    except UnsupportedFamilyError as exc:
        raise UsageError(str(exc))
    except (FanError, SoundnessError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except IntegralityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(json.dumps(exc.diagnostics, indent=2), file=sys.stderr)
        return EXIT_FAIL
    payload = result.to_json()
    d = fan.dim if fan is not None else target.dim
    if cfg.och:
        if d % 2:
            raise UsageError("--och needs even complex dimension")
        payload["och"] = [format_rational(c) for c in och_from_sign(result.series, d).coeffs]
    if cfg.equivariant:
        payload["equivariant"] = [t.to_json() for t in equivariant_table(fan, cfg.box_radius)]
    sys.stdout.write(_render(payload, cfg.output_format))
    return EXIT_OK if result.soundness == "proved" else EXIT_FAIL


def cmd_verify(args) -> int:
    if args.suite == "all":
        names = list(verify.SUITES)
    elif args.suite in verify.SUITES:
        names = [args.suite]
    else:
        raise UsageError(f"unknown suite {args.suite!r}; choose from {', '.join(verify.SUITES)} or all")
    kwargs = {}
    if args.order is not None:
        if args.order < 0:
            raise UsageError("--order must be non-negative")
        kwargs["order"] = args.order
    if args.d is not None:
        kwargs["d"] = args.d
    if args.box is not None:
        kwargs["box"] = args.box
    all_ok = True
    for name in names:
        for check in verify.SUITES[name](**kwargs):
            print(check.line())
            all_ok &= check.ok
    return EXIT_OK if all_ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="toricsig", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_fan = sub.add_parser("fan", help="generate or validate fan JSON")
    p_fan.add_argument("kind", choices=["projective", "kleinschmidt", "product", "validate"])
    p_fan.add_argument("args", nargs="*")

    p_sig = sub.add_parser("signature", help="compute sign(q, LX)")
    src = p_sig.add_mutually_exclusive_group(required=True)
    src.add_argument("--family", help="projective:D | kleinschmidt:D:S:a1,..,ar | F1*F2")
    src.add_argument("--fan", dest="fan_source", help="fan JSON file")
    p_sig.add_argument("--order", type=int, required=True)
    p_sig.add_argument("--box", type=int, dest="box_radius")
    p_sig.add_argument("--equivariant", action="store_true")
    p_sig.add_argument("--och", action="store_true")
    p_sig.add_argument("--format", dest="output_format", choices=["json", "csv", "text"], default="json")

    p_ver = sub.add_parser("verify", help="run a verification suite")
    p_ver.add_argument("suite")
    p_ver.add_argument("--order", type=int)
    p_ver.add_argument("--d", type=int)
    p_ver.add_argument("--box", type=int)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "fan":
            return cmd_fan(args)
        if args.command == "signature":
            cfg = RunConfig(
                command="signature",
                fan_source=args.fan_source,
                family=args.family,
                order=args.order,
                box_radius=args.box_radius,
                output_format=args.output_format,
                equivariant=args.equivariant,
                och=args.och,
            )
            return cmd_signature(cfg)
        return cmd_verify(args)
    except OSError as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
