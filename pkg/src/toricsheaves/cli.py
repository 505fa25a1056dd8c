"""Command-line front end.

Subcommands: fan-check, family-check, chern, hilbert, stability, weights,
enumerate, series.  Exit codes: 0 success, 1 domain verdict
(invalid/unstable), 2 input error.  Output is deterministic for fixed
inputs and seed; rationals are printed exactly as p/q, never as floats.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import moduli, stability
from .chern import c1_fast, chern_character, hilbert_data, second_chern_number
from .family import (
    DeltaFamily,
    KIND_PURE,
    characteristic_function,
    family_from_json,
    gauge_fix,
    validate_family,
)
from .fan import Fan, fan_from_json, validate_fan
from .intersect import divisor, intersection_table, is_ample
from .polynomials import RatPoly

# every public operation is reachable from a subcommand; tests assert this
OPERATION_COVERAGE = {
    "validate_fan": "fan-check",
    "star": "fan-check",
    "cone_count_identity": "fan-check",
    "euler_characteristic": "fan-check",
    "intersection_table": "chern",
    "pair": "hilbert",
    "degree": "chern",
    "todd_and_canonical": "hilbert",
    "lattice_point_count": "hilbert",
    "chi_line_bundle": "hilbert",
    "reflexive_from_filtrations": "family-check",
    "validate_torsion_free": "family-check",
    "is_reflexive": "family-check",
    "detect_support": "family-check",
    "validate_pure": "family-check",
    "restrict_to_face": "stability",
    "tensor_line_bundle": "enumerate",
    "characteristic_function": "family-check",
    "gauge_fix": "enumerate",
    "bracket_dims": "chern",
    "chern_character": "chern",
    "c1_fast": "chern",
    "hilbert_polynomial": "hilbert",
    "distinguished_subspaces": "stability",
    "mu_test": "stability",
    "gieseker_test": "stability",
    "mu_weights": "weights",
    "git_test": "stability",
    "xi_weights": "weights",
    "choose_r": "weights",
    "rank1_fixed_point_series": "series",
    "rank2_p2_series": "series",
    "enumerate_gauge_fixed_chi": "enumerate",
    "run": "(entry point)",
}


class InputError(Exception):
    pass


def _read(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e}") from e


def _load_fan(path: str) -> Fan:
    try:
        fan = fan_from_json(_read(path))
    except ValueError as e:
        raise InputError(f"{path}: {e}") from e
    report = validate_fan(fan)
    if report:
        raise InputError(f"{path}: invalid fan: " + "; ".join(report))
    return fan


def _load_family(path: str, fan: Fan) -> DeltaFamily:
    try:
        fam = family_from_json(_read(path))
    except ValueError as e:
        raise InputError(f"{path}: {e}") from e
    report = validate_family(fam, fan)
    if report:
        raise InputError(f"{path}: invalid family: " + "; ".join(report[:5]))
    return fam


def _load_divisor(path: str, fan: Fan):
    try:
        doc = json.loads(_read(path))
    except json.JSONDecodeError as e:
        raise InputError(f"{path}: not valid JSON: {e}") from e
    if not isinstance(doc, list) or len(doc) != fan.n_rays():
        raise InputError(
            f"{path}: divisor must be a JSON array with one integer per ray "
            f"({fan.n_rays()} expected)"
        )
    return [int(x) for x in doc]


def _load_ample(path: str, fan: Fan):
    d = _load_divisor(path, fan)
    if not is_ample(divisor(d, fan), fan):
        raise InputError(f"{path}: divisor is not ample")
    return d


def _frac(x: Fraction) -> str:
    return str(Fraction(x))


def _poly_doc(p: RatPoly) -> list[str]:
    return [_frac(c) for c in p.coeffs]


def _emit(doc: dict, fmt: str, lines) -> None:
    if fmt == "json":
        print(json.dumps(doc, sort_keys=True))
    else:
        for line in lines:
            print(line)


# --- subcommand handlers ---------------------------------------------------

def _cmd_fan_check(args) -> int:
    try:
        fan = fan_from_json(_read(args.fan))
    except ValueError as e:
        raise InputError(str(e)) from e
    report = validate_fan(fan)
    doc = {"valid": not report, "report": report}
    lines = ["valid"] if not report else [f"invalid: {r}" for r in report]
    if not report:
        from .fan import cone_count_identity, euler_characteristic, star

        doc["euler_characteristic"] = euler_characteristic(fan)
        doc["cone_count_identity"] = {
            str(list(tau)): cone_count_identity(fan, tau) for tau in fan.cones()
        }
        doc["star_sizes"] = {str(list(tau)): len(star(fan, tau)) for tau in fan.cones()}
        lines.append(f"euler characteristic: {doc['euler_characteristic']}")
        lines.append("cone-count identity: all 1" if all(
            v == 1 for v in doc["cone_count_identity"].values()
        ) else "cone-count identity: FAILED")
    _emit(doc, args.format, lines)
    return 0 if not report else 1


def _cmd_family_check(args) -> int:
    fan = _load_fan(args.fan)
    try:
        fam = family_from_json(_read(args.family))
    except ValueError as e:
        raise InputError(f"{args.family}: {e}") from e
    report = validate_family(fam, fan)
    doc = {"valid": not report, "kind": fam.kind, "rank": fam.rank, "report": report}
    lines = [f"kind: {fam.kind}", f"rank: {fam.rank}"]
    if report:
        lines += [f"invalid: {r}" for r in report]
    else:
        lines.append("valid")
        if fam.kind != KIND_PURE:
            from .family import is_reflexive

            doc["reflexive"] = is_reflexive(fam, fan)
            lines.append(f"reflexive: {doc['reflexive']}")
    _emit(doc, args.format, lines)
    return 0 if not report else 1


def _cmd_chern(args) -> int:
    fan = _load_fan(args.fan)
    fam = _load_family(args.family, fan)
    table = intersection_table(fan)
    ch = chern_character(fam, fan, table)
    c1 = c1_fast(fam, fan)
    c2 = second_chern_number(ch, table)
    doc = {
        "rank": _frac(ch.r0),
        "c1": [_frac(x) for x in ch.d],
        "c1_fast": [_frac(x) for x in c1],
        "deg_ch2": _frac(ch.p),
        "c2": _frac(c2),
    }
    lines = [
        f"rank: {doc['rank']}",
        f"c1 (ray coefficients): {' '.join(doc['c1'])}",
        f"deg ch2: {doc['deg_ch2']}",
        f"c2: {doc['c2']}",
    ]
    _emit(doc, args.format, lines)
    return 0


def _cmd_hilbert(args) -> int:
    fan = _load_fan(args.fan)
    fam = _load_family(args.family, fan)
    ample = _load_ample(args.ample, fan)
    hd = hilbert_data(fam, fan, ample)
    doc = {
        "polynomial": _poly_doc(hd.polynomial),
        "rank": _frac(hd.rank),
        "degree": _frac(hd.degree),
        "slope": _frac(hd.slope) if hd.slope is not None else None,
    }
    lines = [
        f"P(t) coefficients (low to high): {' '.join(doc['polynomial'])}",
        f"rank: {doc['rank']}",
        f"degree: {doc['degree']}",
        f"slope: {doc['slope']}",
    ]
    _emit(doc, args.format, lines)
    return 0


def _verdict_doc(v: stability.StabilityVerdict) -> dict:
    margin = v.margin
    if isinstance(margin, RatPoly):
        margin = _poly_doc(margin)
    elif margin is not None:
        margin = _frac(margin)
    return {
        "test": v.test,
        "verdict": v.verdict,
        "witness": None if v.witness is None else v.witness.basis_str(),
        "margin": margin,
        "exhaustive": v.exhaustive,
        "note": v.note,
    }


def _cmd_stability(args) -> int:
    fan = _load_fan(args.fan)
    fam = _load_family(args.family, fan)
    ample = _load_ample(args.ample, fan)
    if fam.kind == KIND_PURE:
        raise InputError("stability tests are offered for torsion-free kinds only")
    weights = None
    if args.mode == "mu":
        v = stability.mu_test(fam, fan, ample)
    elif args.mode == "gieseker":
        v = stability.gieseker_test(fam, fan, ample)
    else:
        if args.weights_from == "mu":
            weights = stability.mu_weights(fam, fan, ample)
        else:
            chi = characteristic_function(fam)
            _, weights = stability.choose_r(chi, fan, ample, [fam])
        v = stability.git_test(fam, weights, fan, n_random=args.samples, seed=args.seed)
    doc = _verdict_doc(v)
    lines = [f"verdict: {v.verdict}"]
    if v.witness is not None:
        lines.append(f"witness basis: {v.witness.basis_str()}")
    lines.append(f"margin: {doc['margin']}")
    if v.note:
        lines.append(f"note: {v.note}")
    if weights is not None:
        doc["weights"] = _weight_entries(weights)
        lines += [
            f"kappa[{list(cone)} @ {list(lam)}] = {wt}"
            for (cone, lam), wt in weights.items()
        ]
    _emit(doc, args.format, lines)
    return 0 if v.verdict != stability.UNSTABLE else 1


def _cmd_weights(args) -> int:
    fan = _load_fan(args.fan)
    fam = _load_family(args.family, fan)
    ample = _load_ample(args.ample, fan)
    if args.kind == "mu":
        w = stability.mu_weights(fam, fan, ample)
        doc = {"kind": "mu", "entries": _weight_entries(w)}
        lines = [f"kappa[{cone} @ {list(lam)}] = {wt}" for (cone, lam), wt in w.items()]
    else:
        chi = characteristic_function(fam)
        r, w = stability.choose_r(chi, fan, ample, [fam])
        doc = {"kind": "xi", "R": r, "entries": _weight_entries(w)}
        lines = [f"R = {r}"]
        lines += [f"kappa[{cone} @ {list(lam)}] = {wt}" for (cone, lam), wt in w.items()]
    _emit(doc, args.format, lines)
    return 0


def _weight_entries(w: stability.WeightSystem) -> list[dict]:
    return [
        {"cone": list(cone), "at": list(lam), "weight": wt}
        for (cone, lam), wt in w.items()
    ]


def _cmd_enumerate(args) -> int:
    fan = _load_fan(args.fan)
    c1 = _load_divisor(args.c1, fan) if args.c1 else [0] * fan.n_rays()
    try:
        records = moduli.enumerate_gauge_fixed_chi(
            fan, args.rank, c1, args.c2_max, box_bound=args.box
        )
    except moduli.BoxBoundError as e:
        raise InputError(str(e)) from e
    doc = {
        "count": len(records),
        "records": [
            {
                "c2": _frac(r.c2),
                "chi": json.loads(r.chi.canonical()),
                "strata": [
                    {
                        "pattern": [list(b) for b in s.pattern],
                        "mu_verdict": s.mu_verdict,
                        "point_component": s.point_component,
                        "free_line": s.free_line,
                    }
                    for s in r.strata
                ],
            }
            for r in records
        ],
    }
    lines = [f"{len(records)} gauge-fixed characteristic functions"]
    for r in records:
        lines.append(f"c2 = {_frac(r.c2)}: {r.chi.canonical()}")
        for s in r.strata:
            lines.append(
                f"  stratum {list(map(list, s.pattern))}: mu {s.mu_verdict}"
                + (", point component" if s.point_component else "")
            )
    _emit(doc, args.format, lines)
    return 0


def _cmd_series(args) -> int:
    if args.which == "rank1":
        if not args.fan:
            raise InputError("series rank1 requires --fan")
        fan = _load_fan(args.fan)
        s = moduli.rank1_fixed_point_series(fan, args.order)
    else:
        s = moduli.rank2_p2_series(args.order)
    doc = {"series": list(s.coeffs), "order": s.order}
    lines = [f"q^{k}: {c}" for k, c in enumerate(s.coeffs)]
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write("power,coefficient\n")
            for k, c in enumerate(s.coeffs):
                fh.write(f"{k},{c}\n")
    _emit(doc, args.format, lines)
    return 0


# --- parser ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="toricsheaves",
        description="Exact invariants, stability tests and fixed-point counts "
        "for equivariant sheaf data on smooth complete toric surfaces.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--format", choices=("text", "json"), default="text")

    sp = sub.add_parser("fan-check", help="validate a fan file")
    sp.add_argument("--fan", required=True)
    common(sp)
    sp.set_defaults(func=_cmd_fan_check)

    sp = sub.add_parser("family-check", help="validate a family file against a fan")
    sp.add_argument("--fan", required=True)
    sp.add_argument("--family", required=True)
    common(sp)
    sp.set_defaults(func=_cmd_family_check)

    sp = sub.add_parser("chern", help="Chern character, c1 and c2 of a family")
    sp.add_argument("--fan", required=True)
    sp.add_argument("--family", required=True)
    common(sp)
    sp.set_defaults(func=_cmd_chern)

    sp = sub.add_parser("hilbert", help="Hilbert polynomial, rank, degree, slope")
    sp.add_argument("--fan", required=True)
    sp.add_argument("--family", required=True)
    sp.add_argument("--ample", required=True)
    common(sp)
    sp.set_defaults(func=_cmd_hilbert)

    sp = sub.add_parser("stability", help="slope / Gieseker / GIT stability verdicts")
    sp.add_argument("mode", choices=("mu", "gieseker", "git"))
    sp.add_argument("--fan", required=True)
    sp.add_argument("--family", required=True)
    sp.add_argument("--ample", required=True)
    sp.add_argument("--weights-from", choices=("mu", "xi"), default="xi")
    sp.add_argument("--samples", type=int, default=0, help="extra random test subspaces")
    sp.add_argument("--seed", type=int, default=0)
    common(sp)
    sp.set_defaults(func=_cmd_stability)

    sp = sub.add_parser("weights", help="GIT weight systems (slope or Gieseker matching)")
    sp.add_argument("--fan", required=True)
    sp.add_argument("--family", required=True)
    sp.add_argument("--ample", required=True)
    sp.add_argument("--kind", choices=("mu", "xi"), default="mu")
    common(sp)
    sp.set_defaults(func=_cmd_weights)

    sp = sub.add_parser("enumerate", help="gauge-fixed characteristic functions")
    sp.add_argument("--fan", required=True)
    sp.add_argument("--rank", type=int, required=True)
    sp.add_argument("--c1", help="divisor file (defaults to 0)")
    sp.add_argument("--c2-max", type=int, required=True, dest="c2_max")
    sp.add_argument("--box", type=int, default=4)
    common(sp)
    sp.set_defaults(func=_cmd_enumerate)

    sp = sub.add_parser("series", help="Euler-characteristic generating functions")
    sp.add_argument("which", choices=("rank1", "rank2-p2"))
    sp.add_argument("--fan")
    sp.add_argument("--order", type=int, default=8)
    sp.add_argument("--csv", help="also write the coefficients to a CSV file")
    common(sp)
    sp.set_defaults(func=_cmd_series)

    return p


def run(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    try:
        return args.func(args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (ValueError, RuntimeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
