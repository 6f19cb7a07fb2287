"""Command-line front end.

Exit codes: 0 for success or a passing check, 1 for a failed check or an
inadmissible system, 2 for usage and input errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Sequence

from .classifier import SearchError, SearchSpec, load_config, solve
from .fake_roots import (FakeComponent, FakeRootError, FakeSystem, audit_example, check_system,
                         check_system_against_lattice, report_json, verify_local_identities)
from .fixtures import WORKED_EXAMPLES
from .lattice_core import (LatticeError, build_lattice, discriminant_form, even_overlattices, gram_json,
                           is_isomorphic, is_maximal_even, label_lattice, lattices_between, length_and_exponent,
                           rational_str, root_count, window_from_exprs)
from .principal_parts import (PrincipalPart, PrincipalPartError, rank_bound_rule, reflective_shape_check, uparrow,
                              weight_of)
from .reproduce import TARGETS, reproduce
from .root_systems import RootSystemError, realize, rho_norms, verify_sum_rule
from .theta_blocks import SeriesError, leading_data, theta_block

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
INPUT_ERRORS = (LatticeError, FakeRootError, SearchError, SeriesError, PrincipalPartError, RootSystemError,
                OSError, KeyError, TypeError, ValueError)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def _load_json(path: str):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _lattice_summary(lat) -> dict:
    form = discriminant_form(lat)
    length, exponent = length_and_exponent(form)
    out = {"rank": lat.rank, "det": lat.det, "gram": gram_json(lat.gram), "discriminant": form.to_json(),
           "length": length, "exponent": exponent, "maximal": is_maximal_even(lat)}
    if lat.is_positive_definite:
        out["label"] = label_lattice(lat)
        out["roots"] = root_count(lat)
    return out


# --------------------------------------------------------------------------
# subcommands; each returns (payload, exit code, text lines)


def cmd_lattice_info(args):
    out = _lattice_summary(build_lattice(args.expr))
    text = [f"{args.expr}: rank {out['rank']}, det {out['det']}",
            f"discriminant orders {out['discriminant']['orders']}, length {out['length']}, exponent {out['exponent']}",
            f"maximal: {out['maximal']}"]
    return out, EXIT_OK, text


def cmd_lattice_between(args):
    q, p = window_from_exprs(args.q, args.p)
    lats = lattices_between(q, p)
    if args.maximal:
        lats = [t for t in lats if is_maximal_even(t)]
    out = {"lower": args.q, "upper": args.p, "maximal_only": args.maximal,
           "lattices": [{"label": label_lattice(t), "gram": gram_json(t.gram)} for t in lats]}
    return out, EXIT_OK, [f"{len(lats)} lattice(s):"] + [f"  {x['label']}" for x in out["lattices"]]


def cmd_lattice_overlattices(args):
    lat = build_lattice(args.expr)
    lats = even_overlattices(lat)
    rows = []
    for t in lats:
        row = {"gram": gram_json(t.gram), "coords": [[rational_str(x) for x in r] for r in t.coords],
               "index": int(round((lat.det / t.det) ** 0.5)), "maximal": is_maximal_even(t)}
        if t.is_positive_definite:
            row["label"] = label_lattice(t)
        rows.append(row)
    text = [f"{len(rows)} even overlattice(s) of {args.expr}:"]
    text += [f"  index {r['index']}: {r.get('label', r['gram'])}" for r in rows]
    return {"lattice": args.expr, "overlattices": rows}, EXIT_OK, text


def cmd_rootsys_info(args):
    r = realize(args.kind)
    nll, nls, nss = rho_norms(r)
    out = r.to_json()
    out.update({"rho_norms": {"ll": rational_str(nll), "ls": rational_str(nls), "ss": rational_str(nss)},
                "sum_rule": verify_sum_rule(r)})
    text = [f"{args.kind}: {r.n_long} long and {r.n_short} short roots",
            f"h_l = {rational_str(r.h_l)}, h_s = {rational_str(r.h_s)}",
            f"<rho,rho> = {rational_str(nll + 2 * nls + nss)}", f"sum rule: {out['sum_rule']}"]
    return out, EXIT_OK, text


def cmd_fake_check(args):
    system = FakeSystem.from_json(_load_json(args.file))
    if args.lattice:
        rep = report_json(check_system_against_lattice(system, build_lattice(args.lattice)))
    else:
        rep = report_json(check_system(system))
    rep["local_identities"] = verify_local_identities(system)
    rep["system"] = str(system)
    ok = rep["admissible"] and rep["local_identities"]
    text = [str(system), f"C = {rep['C']}, hhat = {', '.join(rep['hhat'])}",
            f"eqA: {'pass' if rep['eqA'] else 'fail'}", f"eqB: {rep['eqB_lhs']} ({'pass' if rep['eqB'] else 'fail'})",
            f"verdict: {'admissible' if ok else 'inadmissible: ' + ', '.join(rep['reasons'] or ['local identities'])}"]
    return rep, EXIT_OK if ok else EXIT_FAIL, text


def cmd_fake_theta(args):
    system = FakeSystem.from_json(_load_json(args.file))
    series = theta_block(system, Fraction(args.prec), args.mode)
    lead, _ = leading_data(series)
    out = {"system": str(system), "leading_exponent": rational_str(lead), "series": series.to_json()}
    return out, EXIT_OK, [str(system), f"leading q-exponent {rational_str(lead)}"]


def cmd_fake_examples(args):
    rows = []
    for name, ex in WORKED_EXAMPLES.items():
        rep = audit_example([FakeComponent.from_json(c) for c in ex["components"]], Fraction(ex["k"]), ex["a0"])
        forced = rep["forced_a0"]
        rows.append({"name": name, "k": ex["k"], "status": rep["status"], "stated_a0": ex["a0"],
                     "forced_a0": None if forced is None else rational_str(forced),
                     "consistent_levels": rep["consistent_levels"]})
    text = [f"{r['name']:18s} {r['status']}" + (f" (eqA forces a0 = {r['forced_a0']}; consistent at d in "
                                                  f"{r['consistent_levels']})" if r["status"] != "consistent" else "")
            for r in rows]
    return {"examples": rows}, EXIT_OK, text


def cmd_pp_check(args):
    pp = PrincipalPart.from_json(_load_json(args.file))
    shape = reflective_shape_check(pp)
    out = {"principal_part": pp.to_json(), "reflective_shape": shape, "weight": rational_str(weight_of(pp)),
           "rank_bound": rank_bound_rule(pp, pp.lattice.rank + 2)}
    text = [f"weight {out['weight']}", f"reflective shape: {'pass' if shape['pass'] else 'fail'}"]
    text += [f"  {f['gamma']} n={f['n']}: {f['reason']}" for f in shape["failures"]]
    return out, EXIT_OK if shape["pass"] else EXIT_FAIL, text


def cmd_pp_lift(args):
    pp = PrincipalPart.from_json(_load_json(args.file))
    target = build_lattice(args.to)
    k1 = next((t for t in even_overlattices(pp.lattice) if is_isomorphic(t, target)[0]), None)
    if k1 is None:
        raise LatticeError(f"{args.to} is not an even overlattice of the given lattice")
    lifted = uparrow(pp, k1)
    shape = reflective_shape_check(lifted)
    out = {"principal_part": lifted.to_json(), "coords": [[rational_str(x) for x in r] for r in k1.coords],
           "reflective_shape": shape}
    return out, EXIT_OK if shape["pass"] else EXIT_FAIL, [f"lifted to {args.to}: {len(lifted.entries)} entries",
                                                          f"reflective shape: {'pass' if shape['pass'] else 'fail'}"]


def _certificate_text(cert) -> list[str]:
    text = [f"{len(cert.solutions)} solution(s); admissible lattices: {', '.join(cert.admissible_lattices()) or 'none'}"]
    text += [f"  {s.system}" for s in cert.solutions]
    for g in cert.exclusions:
        if "relations" in g and g["relations"]:
            text.append(f"{g['shape']}: {'; '.join(g['relations'])}")
    return text


def cmd_solve(args, caps):
    spec = SearchSpec.from_json(_load_json(args.spec))
    cert = solve(spec.with_caps(caps) if caps else spec)
    return cert.to_json(), EXIT_OK, _certificate_text(cert)


def cmd_reproduce(args, caps):
    cert = reproduce(args.target, caps)
    return cert.to_json(), EXIT_OK, _certificate_text(cert)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "text"), default=argparse.SUPPRESS)
    common.add_argument("--config", default=argparse.SUPPRESS, help="key = value file with cap overrides")

    p = _Parser(prog="reflex", description="Fake root systems and reflective lattice classification.",
                parents=[common])
    sub = p.add_subparsers(dest="group", required=True, parser_class=_Parser)

    lat = sub.add_parser("lattice", parents=[common]).add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    x = lat.add_parser("info", parents=[common])
    x.add_argument("expr")
    x.set_defaults(func=cmd_lattice_info)
    x = lat.add_parser("between", parents=[common])
    x.add_argument("q")
    x.add_argument("p")
    x.add_argument("--maximal", action="store_true")
    x.set_defaults(func=cmd_lattice_between)
    x = lat.add_parser("overlattices", parents=[common])
    x.add_argument("expr")
    x.set_defaults(func=cmd_lattice_overlattices)

    rs = sub.add_parser("rootsys", parents=[common]).add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    x = rs.add_parser("info", parents=[common])
    x.add_argument("kind")
    x.set_defaults(func=cmd_rootsys_info)

    fk = sub.add_parser("fake", parents=[common]).add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    x = fk.add_parser("check", parents=[common])
    x.add_argument("file")
    x.add_argument("--lattice")
    x.set_defaults(func=cmd_fake_check)
    x = fk.add_parser("theta", parents=[common])
    x.add_argument("file")
    x.add_argument("--prec", required=True)
    x.add_argument("--mode", choices=("auto", "full", "generic"), default="auto")
    x.set_defaults(func=cmd_fake_theta)

    x = fk.add_parser("examples", parents=[common])
    x.set_defaults(func=cmd_fake_examples)

    pp = sub.add_parser("pp", parents=[common]).add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    x = pp.add_parser("check", parents=[common])
    x.add_argument("file")
    x.set_defaults(func=cmd_pp_check)
    x = pp.add_parser("lift", parents=[common])
    x.add_argument("file")
    x.add_argument("--to", required=True)
    x.set_defaults(func=cmd_pp_lift)

    x = sub.add_parser("solve", parents=[common])
    x.add_argument("--spec", required=True)
    x.set_defaults(func=cmd_solve, caps=True)
    x = sub.add_parser("reproduce", parents=[common])
    x.add_argument("target", choices=TARGETS)
    x.set_defaults(func=cmd_reproduce, caps=True)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"reflex: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    fmt = getattr(args, "format", "text")
    try:
        caps = load_config(args.config) if getattr(args, "config", None) else {}
        if getattr(args, "caps", False):
            payload, code, text = args.func(args, caps)
        else:
            payload, code, text = args.func(args)
    except INPUT_ERRORS as exc:
        print(f"reflex: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if fmt == "json":
        print(json.dumps(payload, indent=2, ensure_ascii=False))
    else:
        print("\n".join(text))
    return code


if __name__ == "__main__":
    sys.exit(main())
