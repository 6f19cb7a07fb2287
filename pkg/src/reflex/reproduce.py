"""Scripted reproductions of the classification arguments.

Each target runs the relevant searches with the case split of the original
argument and collects the intermediate algebra (solved with sympy from the
component data in ``root_systems``) into the certificate's ``derivations``.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable

import sympy

from . import fixtures as fx
from .classifier import Certificate, SearchError, SearchSpec, Template, _kd, solve
from .fake_roots import FakeComponent, FakeSystem
from .lattice_core import (EvenLattice, build_lattice, discriminant_form, forms_isomorphic, is_isomorphic, label_lattice,
                           length_and_exponent, rational_str)
from .root_systems import RootSystemKind, realize

F = Fraction
TARGETS = ("th-l22", "th-l21", "lemma-L2", "lemma-nonreflective", "section4", "counterexample-5.4")

B0 = sympy.Symbol("beta0", positive=True)
A = sympy.Symbol("a", positive=True)


def weight_bound(l: int) -> Fraction:
    """Lower bound l + (l/2 - 1)(l + 1) for the weight of the Jacobian cusp form."""
    return l + (F(l, 2) - 1) * (l + 1)


def _q(x) -> sympy.Rational:
    x = F(x)
    return sympy.Rational(x.numerator, x.denominator)


def _kind(text: str) -> RootSystemKind:
    return RootSystemKind.parse(text)


def sym_hhat(kind: str, d, a, b=0, c=0):
    kd = _kd(_kind(kind))
    return (a * _q(kd.h_l) + b * _q(kd.h_s) + c * _q(kd.h_l) / 4) / d


def sym_rhat(kind: str, a, b=0, c=0):
    kd = _kd(_kind(kind))
    return (a + c) * kd.n_long + b * kd.n_short


def weight_relation(parts, a0, k):
    """C + a0 = (2k + sum |R|) / 24 as an expression for C."""
    return (2 * k + sum(sym_rhat(*p) for p in parts)) / 24 - a0


def _e8_prefix() -> tuple[Template, Template]:
    e8 = Template(_kind("E8"), 1, "a0")
    return e8, e8


def _ser(x) -> str:
    return str(sympy.simplify(x)).replace("beta0", "β0")


def _eq_str(lhs, rhs) -> str:
    return f"{_ser(lhs)} = {_ser(rhs)}"


def _group(cert: Certificate, shape: str) -> dict | None:
    return next((g for g in cert.exclusions if g.get("shape") == shape), None)


def _with(spec: SearchSpec, caps: dict | None) -> SearchSpec:
    return spec.with_caps(caps) if caps else spec


# --------------------------------------------------------------------------
# signature (22,2)


def _th_l22(caps: dict | None) -> Certificate:
    r1, r2 = sympy.symbols("r1 r2")
    e8 = realize("E8")
    n_e8 = e8.n_long
    rank = 16 + 4
    k = 24 * B0
    C = e8.h_l * B0
    # the weight formula and the trace identity sum mult*|v|^2 = 2*rank*C
    eq_weight = sympy.Eq((2 * n_e8 * B0 + B0 * r2 + r1 + 2 * k) / 24 - B0, C)
    eq_trace = sympy.Eq((2 * n_e8 * B0 * 2 + 2 * B0 * r2 + 1 * r1) / (2 * rank), C)
    sol = sympy.solve([eq_weight, eq_trace], [r1, r2], dict=True)[0]

    base = SearchSpec(
        4, _e8_prefix(), (1, 2, 3), root_norm_whitelist=(F(2), F(1)), weight_equals="24*a0",
        rules=("multiplicity_rule", "singular_bound", "lattice_window", "norm2_consistency"), name="th-l22")
    stage1 = solve(_with(base, caps))
    full = solve(_with(SearchSpec(**{**_fields(base), "fixture_rules": ("full_group",)}), caps))
    with_b = solve(_with(SearchSpec(**{**_fields(base), "rules": base.rules + ("eqB",)}), caps))

    def shapes(cert):
        return sorted({"+".join(str(c.kind) for c in s.free) for s in cert.solutions})

    r_counts = []
    for s in stage1.solutions:
        a0 = s.system.a0
        n2 = sum(_norm_count(c, F(2)) for c in s.free)
        n1 = sum(_norm_count(c, F(1)) for c in s.free)
        r_counts.append({"system": str(s.system), "r2_over_a0": rational_str(F(n2, a0)), "r1_over_a0": rational_str(F(n1, a0))})

    # final system: F4 with d = 1 and long multiplicity beta0
    b = sympy.Symbol("b")
    b_val = sympy.solve(sympy.Eq(sym_hhat("F4", 1, B0, b), C), b)[0]
    b4_b = sympy.solve(sympy.Eq(sym_hhat("B4", 1, B0, b), C), b)[0]
    final = f"(E8,β0;1)^2⊕(F4,β0,{_ser(b_val)};1)"

    d20 = build_lattice("D20")
    m = build_lattice("2E8+D4")
    iso = forms_isomorphic(discriminant_form(m), discriminant_form(d20)) and m.rank == d20.rank

    tail = []
    for expr in ("E8+D8+D4", "E8+E7+A1+D4"):
        form = discriminant_form(build_lattice(expr))
        tail.append({"lattice": f"2U+{expr}", "orders": list(form.orders),
                     "length_exponent": list(length_and_exponent(form))})
    tail[0]["verdict"] = {"rule": "fixture", "fixtures": fx.cite("e8d8d4_nonreflective")}
    tail[1]["verdict"] = {
        "rule": "eqA", "hhat": {"E8": _ser(sym_hhat("E8", 1, B0)), "E7": _ser(sym_hhat("E7", 1, B0))},
        "note": "components with d = 1 carry multiplicity beta0, so equality needs beta0 = 0",
        "a0_zero": fx.cite("a0_zero_branch")}

    der = {
        "r_equations": [_eq_str(eq_weight.lhs, eq_weight.rhs), _eq_str(eq_trace.lhs, eq_trace.rhs)],
        "r_solution": {"r2": _ser(sol[r2]), "r1": _ser(sol[r1])},
        "root_counts": r_counts,
        "shapes_after_numerical_rules": shapes(stage1),
        "lattices": stage1.admissible_lattices(),
        "b_values": {"B4": _ser(b4_b), "F4": _ser(b_val)},
        "full_group_stage": {"shapes": shapes(full), "excluded": _skeleton_rules(full, "B4")},
        "eqB_stage": {"shapes": shapes(with_b), "excluded": _skeleton_rules(with_b, "B4")},
        "final_system": final,
        "M_isomorphism": {"statement": "2U+2E8+D4 ≅ 2U+D20", "discriminant_forms_isomorphic": iso,
                          "fixtures": fx.cite("nikulin_split")},
        "length_gt_3": {"fixtures": fx.cite("nikulin_2elem"), "cases": tail},
        "fixtures": fx.cite("root_norm_weight", "full_group", "d4_triality"),
    }
    return _attach(stage1, der)


def _norm_count(comp: FakeComponent, norm: Fraction) -> int:
    """Roots of the given norm in a fake component, counted with multiplicity."""
    kd = _kd(comp.kind)
    r = realize(comp.kind)
    long_norm = F(2, comp.d)
    short_norm = r.short_norm / comp.d if r.short_norm is not None else None
    total = 0
    if long_norm == norm:
        total += comp.a * kd.n_long
    if short_norm is not None and short_norm == norm:
        total += (comp.b or 0) * kd.n_short
    if comp.c and long_norm / 4 == norm:
        total += comp.c * kd.n_long
    return total


def _skeleton_rules(cert: Certificate, shape: str) -> list[dict]:
    g = _group(cert, shape)
    if g is None:
        return []
    return [{"a0": r["a0"], "witness": r["witness"], "rule": r["rule"], "last": r["chain"][-1]}
            for r in g["skeletons"]]


def _fields(spec: SearchSpec) -> dict:
    return {f: getattr(spec, f) for f in spec.__dataclass_fields__}


def _attach(cert: Certificate, der: dict) -> Certificate:
    return Certificate(cert.query, cert.solutions, cert.exclusions, cert.stats, der)


# --------------------------------------------------------------------------
# signature (21,2)

_L21_CASES = {
    1: "A3", 2: "B3", 3: "C3", 4: "A1+L2 with c != 0 on A1 or C2", 5: "A1+A2", 6: "A1+C2", 7: "A1+G2", 8: "3A1",
}


def l21_case(shape: str) -> int:
    parts = shape.split("+")
    if len(parts) == 1:
        return {"A3": 1, "B3": 2}.get(parts[0], 3)
    if any(p.endswith("[c]") for p in parts):
        return 4
    return {"A1+A2": 5, "A1+C2": 6, "A1+G2": 7, "A1+A1+A1": 8}[shape]


def _th_l21(caps: dict | None) -> Certificate:
    spec = SearchSpec(3, _e8_prefix(), (1, 2), maximal=True,
                      fixture_rules=("A1m_summand", "nonreflective_list", "pullback_rank2"), name="th-l21")
    cert = solve(_with(spec, caps))
    cases: dict[int, dict] = {}
    for g in cert.exclusions:
        if g.get("shape") in (None, "prefix"):
            continue
        n = l21_case(g["shape"])
        c = cases.setdefault(n, {"case": n, "R": _L21_CASES[n], "shapes": [], "relations": {}, "rules": {}})
        c["shapes"].append(g["shape"])
        c["relations"][g["shape"]] = g["relations"]
        for r in g["skeletons"]:
            c["rules"][r["rule"]] = c["rules"].get(r["rule"], 0) + 1
        for r in g["bound_excluded"]:
            c["rules"][r["rule"]] = c["rules"].get(r["rule"], 0) + r["count"]
    der = {
        "cases": [cases[n] for n in sorted(cases)],
        "admissible": cert.admissible_lattices(),
        "weight_check": _weight_check(cert, 21),
        "fixtures": fx.cite("maximal_split_21"),
    }
    return _attach(cert, der)


def _witness_weights(cert: Certificate) -> list[tuple[int, Fraction]]:
    out = []
    for g in cert.exclusions:
        for r in g.get("skeletons", []):
            for e in r["chain"]:
                if e.get("rule") == "positive_weight" and "k" in e:
                    out.append((r["a0"], F(e["k"])))
    return out


def _weight_check(cert: Certificate, l: int) -> dict:
    bound = weight_bound(l)
    ks = [s.system.k for s in cert.solutions]
    ws = _witness_weights(cert)
    norm = [k / a0 for a0, k in ws if a0]
    return {
        "l": l, "bound": rational_str(bound),
        "solutions_below_bound": all(k < bound for k in ks),
        "max_solution_weight": rational_str(max(ks)) if ks else None,
        "max_witness_weight_per_a0": {str(a0): rational_str(max(k for b, k in ws if b == a0))
                                      for a0 in sorted({a for a, _ in ws})},
        "max_witness_weight_over_a0": rational_str(max(norm)) if norm else None,
        "normalized_below_bound": all(x < bound for x in norm),
    }


# --------------------------------------------------------------------------
# rank-2 lemma

_L2_CASES = {"G2": 1, "A2": 2, "C2": 3, "C2[c]": 3, "A1+A1": 4, "A1+A1[c]": 4, "A1[c]+A1[c]": 4}


def _lemma_l2(caps: dict | None) -> Certificate:
    spec = SearchSpec(2, _e8_prefix(), (1, 2), fixture_rules=("A1m_summand", "nonreflective_list"), name="lemma-L2")
    cert = solve(_with(spec, caps))
    a2 = _group(cert, "A2")
    windows = {}
    for r in a2["skeletons"]:
        if r["a0"] == 1 and r["d"][0] in (2, 3):
            win = next(e["lattices"] for e in r["chain"] if e.get("rule") == "lattice_window")
            n2 = next((e["lattices"] for e in r["chain"] if e.get("rule") == "norm2_consistency"), win)
            windows[str(r["d"][0])] = {"window": win, "after_norm2": n2, "rule": r["rule"]}
    cases = {}
    for g in cert.exclusions:
        n = _L2_CASES.get(g.get("shape"))
        if n is not None:
            c = cases.setdefault(n, {"case": n, "shapes": [], "relations": {}, "solutions": 0})
            c["shapes"].append(g["shape"])
            c["relations"][g["shape"]] = g["relations"]
            c["solutions"] += g["solutions"]
    der = {"admissible": cert.admissible_lattices(), "cases": [cases[n] for n in sorted(cases)],
           "A2_relations": a2["relations"], "A2_windows": windows}
    return _attach(cert, der)


# --------------------------------------------------------------------------
# the eight non-reflective lattices


def _lemma_nonreflective(caps: dict | None) -> Certificate:
    b, c, k, ap = sympy.symbols("b c k a_p")
    e8 = [("E8", A), ("E8", A)]
    C = sym_hhat("E8", 1, A)
    records = []

    # 3A1: 2E8+3A1 and E8+E7+D4 share rank and discriminant form
    f1 = discriminant_form(build_lattice("2E8+3A1"))
    f2 = discriminant_form(build_lattice("E8+E7+D4"))
    records.append({
        "shape": "3A1", "lattice": "3A1",
        "isomorphism": {"statement": "2U+2E8+3A1 ≅ 2U+E8+E7+D4", "discriminant_forms_isomorphic": forms_isomorphic(f1, f2),
                        "fixtures": fx.cite("nikulin_split")},
        "rule": "eqA", "chain": [{"rule": "eqA", "hhat": {"E8": _ser(C), "E7": _ser(sym_hhat("E7", 1, A))}}],
    })

    # A1+A2: root system 2E8 + A1 + G2 with d = 1
    parts = e8 + [("A1", A, 0, c), ("G2", A, b)]
    eqs = [sympy.Eq(weight_relation(parts, A, k), C), sympy.Eq(sym_hhat("A1", 1, A, 0, c), C),
           sympy.Eq(sym_hhat("G2", 1, A, b), C)]
    s = sympy.solve(eqs, [b, c, k], dict=True)[0]
    records.append({
        "shape": "A1+G2", "lattice": "A1+A2", "fake_system": "(E8,a;1)^2⊕(A1,a|c;1)⊕(G2,a,b;1)",
        "equations": [_eq_str(e.lhs, e.rhs) for e in eqs],
        "solution": {"c": _ser(s[c]), "b": _ser(s[b]), "k": _ser(s[k])},
        "rule": "positive_weight", "chain": [{"rule": "positive_weight", "k": _ser(s[k]), "pass": False}],
    })

    # A1(2)+A2: A1 with d = 2; its multiplicities come from the rank-1 pullback
    ex = fx.FIXTURES["example_A1_2"]
    parts = e8 + [("A1", ap, 0, c), ("G2", A, b)]
    eqs = [sympy.Eq(weight_relation(parts, A, k), C), sympy.Eq(sym_hhat("A1", 2, ap, 0, c), C),
           sympy.Eq(sym_hhat("G2", 1, A, b), C)]
    s_b = sympy.solve(eqs[2], b)[0]
    pull = {ap: 14 * A, c: 64 * A}
    s_k = sympy.solve(eqs[0].subs({**pull, b: s_b}), k)[0]
    records.append({
        "shape": "A1(1/2)+G2", "lattice": "A1(2)+A2", "fake_system": "(E8,a;1)^2⊕(A1,a'|c;2)⊕(G2,a,b;1)",
        "equations": [_eq_str(e.lhs, e.rhs).replace("a_p", "a'") for e in eqs],
        "solution": {"b": _ser(s_b), "a'": _ser(pull[ap]), "c": _ser(pull[c]), "k": _ser(s_k)},
        "hhat_check": bool(sympy.simplify(sym_hhat("A1", 2, 14 * A, 0, 64 * A) - C) == 0),
        "fixtures": [ex.to_json()],
        "rule": "positive_weight", "chain": [{"rule": "positive_weight", "k": _ser(s_k), "pass": False}],
    })

    # A1+A1(2): the A1 factor as in the A1+A2 case, the A1(2) factor from the pullback
    c1 = sympy.Symbol("c1")
    parts = e8 + [("A1", A, 0, c1), ("A1", 14 * A, 0, 64 * A)]
    e_c = sympy.Eq(sym_hhat("A1", 1, A, 0, c1), C)
    s_c = sympy.solve(e_c, c1)[0]
    s_k = sympy.solve(sympy.Eq(weight_relation(parts, A, k).subs(c1, s_c), C), k)[0]
    records.append({
        "shape": "A1+A1(1/2)", "lattice": "A1+A1(2)", "fake_system": "(E8,a;1)^2⊕(A1,a|c;1)⊕(A1,14a|64a;2)",
        "solution": {"c": _ser(s_c), "k": _ser(s_k)}, "fixtures": [ex.to_json()],
        "rule": "positive_weight", "chain": [{"rule": "positive_weight", "k": _ser(s_k), "pass": False}],
    })

    for lat in ("A3", "A2(2)", "A2(3)", "2A1(2)"):
        records.append({"shape": None, "lattice": lat, "rule": "nonreflective_list",
                        "chain": [{"rule": "nonreflective_list", "fixtures": fx.cite("nonreflective_list")}]})

    query = _with(SearchSpec(3, _e8_prefix(), (1,), name="lemma-nonreflective"), caps)
    der = {"lattices": list(fx.NONREFLECTIVE_RANK_LE3),
           "computed": [r["lattice"] for r in records if r["rule"] != "nonreflective_list"]}
    return Certificate(query, (), tuple(records), {}, der)


# --------------------------------------------------------------------------
# free algebras: ranks 9 to 11


def section4_templates() -> tuple[Template, ...]:
    out = [Template(_kind("A1"), 2, "1", None, "-1"), Template(_kind("A1"), 2, "1", None, "0")]
    out += [Template(_kind(f"A{n}"), 2) for n in range(2, 12)]
    out += [Template(_kind(f"D{n}"), 2) for n in range(4, 12)]
    out += [Template(_kind(f"E{n}"), 2) for n in (6, 7, 8)]
    return tuple(out)


# the list displayed in the original argument
SECTION4_DISPLAYED = (
    *[f"(A1,1|-1;2)^{n}" for n in (9, 10, 11)], *[f"(A1,1|0;2)^{n}" for n in (9, 10, 11)],
    *[f"(D{n},1;2)" for n in (9, 10, 11)], *[f"(A{n},1;2)" for n in (9, 10, 11)],
    "(D5,1;2)^2", "(A5,1;2)^2", "(D4,1;2)+(A5,1;2)",
)


def section4_label(sys: FakeSystem) -> str:
    counts: dict[str, int] = {}
    for c in sys.components:
        counts[str(c)] = counts.get(str(c), 0) + 1
    return "+".join(s if n == 1 else f"{s}^{n}" for s, n in counts.items())


def section4_expected_weight(sys: FakeSystem) -> Fraction:
    """k = 9 for the (A1,1|-1;2) powers and (6 - n/2)h otherwise."""
    comps = sys.components
    if all(str(c.kind) == "A1" and c.c == -1 for c in comps):
        return F(9)
    n = sys.rank
    h = realize(comps[0].kind).h
    if str(comps[0].kind) == "A1":
        h = F(2)
    return (6 - F(n, 2)) * h


def _section4(caps: dict | None) -> Certificate:
    sols, excl, stats = [], [], {}
    queries = []
    for rank in (9, 10, 11):
        spec = _with(SearchSpec(rank, (), (0,), allowed_kinds=(), allowed_components=section4_templates(),
                                rules=(), name=f"section4-rank{rank}"), caps)
        queries.append(spec)
        cert = solve(spec)
        sols += cert.solutions
        excl += [dict(g, rank=rank) for g in cert.exclusions if g["solutions"] or g["skeletons"]]
        for key, v in cert.stats.items():
            stats[key] = stats.get(key, 0) + v
    rows = []
    for s in sols:
        l = s.system.rank + 2
        exp = section4_expected_weight(s.system)
        label = section4_label(s.system)
        rows.append({"system": label, "rank": s.system.rank, "k": rational_str(s.system.k),
                     "hhat_formula_k": rational_str(exp), "formula_agrees": exp == s.system.k,
                     "l": l, "bound": rational_str(weight_bound(l)), "below_bound": s.system.k < weight_bound(l),
                     "below_65": s.system.k < 65, "displayed": _canon(label) in _displayed_labels()})
    d1 = [{"lattice": "2U+2E8", "weight": 132, "l": 18, "bound": rational_str(weight_bound(18))},
          {"lattice": "II_{26,2}", "weight": 12, "l": 26, "bound": rational_str(weight_bound(26))}]
    der = {
        "systems": rows,
        "extras": [r["system"] for r in rows if not r["displayed"]],
        "missing": sorted(set(_displayed_labels()) - {_canon(r["system"]) for r in rows}),
        "all_below_bound": all(r["below_bound"] for r in rows),
        "all_below_65": all(r["below_65"] for r in rows),
        "d_equals_1": d1,
        "queries": [q.to_json() for q in queries],
        "fixtures": fx.cite("free_algebra_reduction"),
    }
    return Certificate(queries[0], tuple(sols), tuple(excl), stats, der)


def _displayed_labels() -> list[str]:
    return [_canon(s) for s in SECTION4_DISPLAYED]


def _canon(label: str) -> str:
    return "+".join(sorted(label.split("+")))


# --------------------------------------------------------------------------
# U+E8+E7


def _counterexample(caps: dict | None) -> Certificate:
    spec = SearchSpec(7, (Template(_kind("E8"), 1, "a0"),), (1, 2, 3), allowed_kinds=("E",),
                      name="counterexample-5.4")
    cert = solve(_with(spec, caps))
    s = discriminant_form(build_lattice("E8+E7"))
    k_lat = EvenLattice(((0, 2), (2, 0)))
    e7 = build_lattice("E7")
    kf = discriminant_form(k_lat)
    der = {
        "hhat": {"E8": _ser(sym_hhat("E8", 1, A)), "E7": _ser(sym_hhat("E7", 1, A))},
        "length_S": length_and_exponent(s)[0],
        "length_K_example": {"gram": [[0, 2], [2, 0]], "length": length_and_exponent(kf)[0]},
        "length_bound": "l(M) <= l(K) + l(S) <= 2 + 1 = 3",
        "solutions": [{"system": str(x.system), "lattices": [label_lattice(t) for t in x.lattices]}
                      for x in cert.solutions],
        "solutions_on_E7": [str(x.system) for x in cert.solutions
                            if any(is_isomorphic(t, e7)[0] for t in x.lattices)],
        "fixtures": fx.cite("gn18_e8e7", "nikulin_split", "a0_zero_branch"),
    }
    return _attach(cert, der)


_RUNNERS: dict[str, Callable[[dict | None], Certificate]] = {
    "th-l22": _th_l22, "th-l21": _th_l21, "lemma-L2": _lemma_l2,
    "lemma-nonreflective": _lemma_nonreflective, "section4": _section4, "counterexample-5.4": _counterexample,
}


def reproduce(target: str, caps: dict | None = None) -> Certificate:
    try:
        run = _RUNNERS[target]
    except KeyError:
        raise SearchError(f"unknown target {target!r}; choose from {', '.join(TARGETS)}") from None
    return run(caps)
