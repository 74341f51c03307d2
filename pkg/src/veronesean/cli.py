"""Command-line front end: generate, verify, classify and bound-check caps.

Cap files are JSON: schema_version "1", the parameters p / n_hint / d /
ambient_dim, the point coordinates, and the rational spaces as point-id
sets (their subspaces are recomputed as spans on load).  Reports go to
stdout as JSON; diagnostics go to stderr.  Exit codes: 0 success,
1 semantic failure (with witnesses), 2 usage or parse error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .cap import VeroneseanCap, bounds_check, verify_cap
from .classify import classify
from .gfp import is_prime
from .projlin import ProjPoint
from .veronese import build_variety

SCHEMA_VERSION = "1"


class CapFileError(Exception):
    """A cap file violating the schema, with a field-level diagnostic."""


def cap_to_dict(cap: VeroneseanCap, n_hint: int | None = None) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "p": cap.p,
        "n_hint": n_hint,
        "d": cap.d,
        "ambient_dim": cap.ambient_dim,
        "points": [list(pt.coords) for pt in cap.points],
        "rational_spaces": [{"point_ids": list(sp.point_ids)} for sp in cap.spaces],
    }


def cap_from_dict(data: dict) -> VeroneseanCap:
    if not isinstance(data, dict):
        raise CapFileError("top level must be a JSON object")
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise CapFileError(f"unsupported schema_version {version!r}")
    for key in ("p", "d", "ambient_dim", "points", "rational_spaces"):
        if key not in data:
            raise CapFileError(f"missing field {key!r}")
    p, d = data["p"], data["d"]
    if not isinstance(p, int) or not is_prime(p):
        raise CapFileError(f"field 'p': {p!r} is not a prime")
    if not isinstance(d, int) or d < 2:
        raise CapFileError(f"field 'd': {d!r} must be an integer >= 2")
    ambient = data["ambient_dim"]
    if not isinstance(ambient, int) or ambient < 0:
        raise CapFileError(f"field 'ambient_dim': {ambient!r} must be a non-negative integer")
    raw_points = data["points"]
    if not isinstance(raw_points, list) or not raw_points:
        raise CapFileError("field 'points' must be a non-empty list")
    points = []
    for idx, coords in enumerate(raw_points):
        if (
            not isinstance(coords, list)
            or len(coords) != ambient + 1
            or not all(isinstance(c, int) and 0 <= c < p for c in coords)
        ):
            raise CapFileError(
                f"points[{idx}]: expected {ambient + 1} integers in [0, {p})"
            )
        if not any(coords):
            raise CapFileError(f"points[{idx}]: the zero vector is not a point")
        points.append(ProjPoint.make(p, coords))
    raw_spaces = data["rational_spaces"]
    if not isinstance(raw_spaces, list):
        raise CapFileError("field 'rational_spaces' must be a list")
    space_ids = []
    for idx, entry in enumerate(raw_spaces):
        if not isinstance(entry, dict) or "point_ids" not in entry:
            raise CapFileError(f"rational_spaces[{idx}]: expected an object with 'point_ids'")
        ids = entry["point_ids"]
        if not isinstance(ids, list) or not all(
            isinstance(i, int) and 0 <= i < len(points) for i in ids
        ):
            raise CapFileError(
                f"rational_spaces[{idx}].point_ids: expected valid point indices"
            )
        space_ids.append(tuple(ids))
    try:
        return VeroneseanCap.assemble(p, d, points, space_ids)
    except ValueError as exc:
        raise CapFileError(str(exc)) from exc


def load_cap(path: str) -> VeroneseanCap:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            data = json.load(handle)
    except OSError as exc:
        raise exc
    except json.JSONDecodeError as exc:
        raise CapFileError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}")
    return cap_from_dict(data)


def save_cap(cap: VeroneseanCap, path: str, n_hint: int | None = None) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(cap_to_dict(cap, n_hint), handle, indent=2)
        handle.write("\n")


def _emit(payload: dict) -> None:
    sys.stdout.write(json.dumps(payload, indent=2) + "\n")


def cmd_generate(args) -> int:
    import warnings

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            cap = build_variety(args.n, args.d, args.p)
        except ValueError as exc:
            sys.stderr.write(f"error: {exc}\n")
            return 2
    for warning in caught:
        sys.stderr.write(f"warning: {warning.message}\n")
    try:
        save_cap(cap, args.out, n_hint=args.n)
    except OSError as exc:
        sys.stderr.write(f"error: cannot write {args.out}: {exc}\n")
        return 3
    regime = bounds_check(args.n, args.d, args.p)
    _emit(
        {
            "schema_version": SCHEMA_VERSION,
            "out": args.out,
            "n_points": len(cap.points),
            "n_spaces": len(cap.spaces),
            "ambient_dim": cap.ambient_dim,
            "bounds": regime.to_dict(),
        }
    )
    return 0


def _load_or_fail(path: str):
    try:
        return load_cap(path), None
    except OSError as exc:
        sys.stderr.write(f"error: cannot read {path}: {exc}\n")
        return None, 3
    except CapFileError as exc:
        sys.stderr.write(f"error: {path}: {exc}\n")
        return None, 2


def cmd_verify(args) -> int:
    cap, code = _load_or_fail(args.path)
    if cap is None:
        return code
    verified = verify_cap(cap)
    _emit(verified.report.to_json_dict())
    return 0 if verified.passed else 1


def cmd_classify(args) -> int:
    cap, code = _load_or_fail(args.path)
    if cap is None:
        return code
    result = classify(cap, seed=args.seed)
    _emit(result.to_json_dict())
    return 0 if result.equivalent else 1


def cmd_bounds(args) -> int:
    _emit({"schema_version": SCHEMA_VERSION, **bounds_check(args.n, args.d, args.p).to_dict()})
    return 0


def _prime(text: str) -> int:
    value = int(text)
    if not is_prime(value):
        raise argparse.ArgumentTypeError(f"{value} is not prime")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="veronesean",
        description="Generate, verify and classify Veronesean caps over prime fields.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write the Veronese variety of PG(n, p) as a cap file")
    gen.add_argument("--n", type=int, required=True, help="source projective dimension")
    gen.add_argument("--d", type=int, required=True, help="embedding degree")
    gen.add_argument("--p", type=_prime, required=True, help="prime field order")
    gen.add_argument("--out", required=True, help="output cap file path")
    gen.add_argument("--seed", type=int, default=0, help="seed for randomized choices")
    gen.set_defaults(func=cmd_generate)

    ver = sub.add_parser("verify", help="check the cap axioms of a cap file")
    ver.add_argument("path", help="cap file to verify")
    ver.set_defaults(func=cmd_verify)

    cla = sub.add_parser("classify", help="test projective equivalence with a Veronese variety")
    cla.add_argument("path", help="cap file to classify")
    cla.add_argument("--seed", type=int, default=0, help="seed for randomized choices")
    cla.set_defaults(func=cmd_classify)

    bnd = sub.add_parser("bounds", help="evaluate the field-size bounds for (n, d, p)")
    bnd.add_argument("--n", type=int, required=True)
    bnd.add_argument("--d", type=int, required=True)
    bnd.add_argument("--p", type=_prime, required=True)
    bnd.set_defaults(func=cmd_bounds)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
