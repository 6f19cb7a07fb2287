import json
import random
from fractions import Fraction as F
from pathlib import Path

import pytest

from reflex.lattice_core import EvenLattice, build_lattice, even_overlattices, is_isomorphic
from reflex.principal_parts import (PrincipalPart, PrincipalPartError, classify_entry, compose_embeddings,
                                    identity_embedding, rank_bound_rule, reflective_shape_check, uparrow,
                                    weight_of)

DATA = Path(__file__).resolve().parents[1] / "data"


def a1_36_part():
    # Z/72 with q(x) = x²/72; x = 2 has order 36, x = 1 has order 72
    return PrincipalPart(build_lattice("A1(36)"), {((2,), F(-1, 36)): 1, ((70,), F(-1, 36)): 1,
                                                   ((1,), F(-1, 144)): -1, ((71,), F(-1, 144)): -1}, 1)


def test_classify_entries():
    pp = PrincipalPart(build_lattice("A1"), {((0,), -1): 1}, 24)
    assert classify_entry(pp.form, (0,), -1) == ("r", 1)
    pp = a1_36_part()
    assert classify_entry(pp.form, (2,), F(-1, 36)) == ("r", 36)
    assert classify_entry(pp.form, (1,), F(-1, 144)) == ("s", 36)
    form = build_lattice("A1")
    assert classify_entry(PrincipalPart(form, {}).form, (1,), F(-5, 4)) is None


def test_shape_check_with_half_roots():
    rep = reflective_shape_check(a1_36_part())
    assert rep["pass"], rep["failures"]
    assert {r["type"] for r in rep["entries"]} == {"r", "s"}


def test_shape_check_failures():
    pp = PrincipalPart(build_lattice("A1"), {((1,), F(-5, 4)): 1}, 2)
    rep = reflective_shape_check(pp)
    assert not rep["pass"] and rep["failures"][0]["reason"] == "unclassifiable"
    pp = PrincipalPart(build_lattice("A1(36)"), {((1,), F(-1, 144)): -1, ((71,), F(-1, 144)): -1}, 2)
    assert not reflective_shape_check(pp)["pass"]
    pp = PrincipalPart(build_lattice("A1"), {((0,), -1): -1}, 2)
    assert reflective_shape_check(pp)["failures"][0]["reason"] == "negative type-r coefficient"


def test_weight_of():
    for c00, w in ((24, 12), (1, F(1, 2)), (0, 0)):
        assert weight_of(PrincipalPart(build_lattice("A1"), {}, c00)) == w


def test_odd_c00_is_allowed():
    # weight 1/2 examples need c00 = 1
    assert a1_36_part().c00 == 1


def test_rank_bound_rule():
    assert rank_bound_rule(0, 22)["violation"]
    assert not rank_bound_rule(0, 13)["violation"]
    assert rank_bound_rule(0, 14)["violation"]
    for l in (3, 13, 22, 26):
        assert not rank_bound_rule(1, l)["applicable"]
    pp = PrincipalPart(build_lattice("A1"), {((0,), -1): 2}, 24)
    assert pp.c0m1 == 2 and not rank_bound_rule(pp, 22)["violation"]


def test_uparrow_identity():
    pp = a1_36_part()
    assert uparrow(pp, identity_embedding(pp.lattice)) == pp


def test_uparrow_a1_4_to_a1():
    # x = 2, 6 in Z/8 map to the class of α/2; odd x are not in A1'
    pp = PrincipalPart(build_lattice("A1(4)"), {((2,), F(-1, 4)): 1, ((6,), F(-1, 4)): 1,
                                                ((1,), F(-1, 16)): 3, ((7,), F(-1, 16)): 3, ((0,), -1): 1}, 10)
    a1 = build_lattice("A1")
    k1 = next(t for t in even_overlattices(pp.lattice) if is_isomorphic(t, a1)[0])
    up = uparrow(pp, k1)
    assert up.entries == {((0,), F(-1)): 1, ((1,), F(-1, 4)): 2}
    assert up.c00 == 10 and up.c0m1 == 1


def chains(lat):
    for k1 in even_overlattices(lat):
        for k2 in even_overlattices(EvenLattice(k1.gram, k1.definiteness)):
            yield k1, k2


def generic_part(lat):
    """Coefficient 1 on every class at its largest admissible exponent."""
    pp = PrincipalPart(lat, {})
    entries = {}
    for g in pp.form.elements():
        n = -((pp.form.q(g) / 2) % 1) or F(-1)
        entries[(g, n)] = 1 + sum(g) % 3
    sym = {}
    for (g, n), c in entries.items():
        key = tuple(sorted([g, pp.form.neg(g)]))
        sym[(g, n)] = entries[(key[0], n)]
    return PrincipalPart(lat, sym, 4)


@pytest.mark.parametrize("expr", ["A1(16)", "4A1", "A1(4)", "2A1(2)"])
def test_uparrow_transitive(expr):
    pp = generic_part(build_lattice(expr))
    count = 0
    for k1, k2 in chains(pp.lattice):
        direct = uparrow(pp, compose_embeddings(k1, k2))
        stepwise = uparrow(uparrow(pp, k1), k2)
        assert direct == stepwise
        count += 1
    assert count >= 2


def shaped_entries(form):
    """Every (γ, n) of type r or s allowed by the congruence n ≡ -q(γ)/2."""
    out = []
    for g in form.elements():
        o = form.element_order(g)
        for n, kind in ((F(-1, o), "r"), (F(-1, 2 * o), "s")):
            if (kind == "r" or o % 2 == 0) and (n + form.q(g) / 2).denominator == 1:
                out.append((g, n, kind))
    return out


def random_reflective_parts(lat, count, seed):
    form = PrincipalPart(lat, {}).form
    entries = shaped_entries(form)
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        coeff = {}
        for g, n, kind in entries:
            key = (min(g, form.neg(g)), n)
            if key not in coeff:
                coeff[key] = rng.randint(-2, 3) if kind == "s" else rng.randint(0, 3)
        chosen = {(g, n): coeff[(min(g, form.neg(g)), n)] for g, n, _ in entries}
        pp = PrincipalPart(lat, chosen, 2 * rng.randint(0, 12))
        if reflective_shape_check(pp)["pass"]:
            out.append(pp)
    return out


@pytest.mark.parametrize("expr", ["4A1", "A1(4)", "A1(16)"])
def test_uparrow_preserves_reflective_shape(expr):
    lat = build_lattice(expr)
    for pp in random_reflective_parts(lat, 15, 11):
        for k1, k2 in chains(lat):
            step = uparrow(pp, k1)
            assert reflective_shape_check(step)["pass"]
            assert reflective_shape_check(uparrow(step, k2))["pass"]


def test_uparrow_rejects_bad_embedding():
    pp = PrincipalPart(build_lattice("A1"), {}, 2)
    with pytest.raises(PrincipalPartError):
        uparrow(pp, build_lattice("A1"))
    with pytest.raises(PrincipalPartError):
        uparrow(pp, EvenLattice(((8,),), coords=((F(2),),)))


@pytest.mark.parametrize("entries", [
    {((0,), F(1)): 1},  # positive exponent
    {((1,), F(-1, 2)): 1},  # n not ≡ -q/2
    {((0, 0), F(-1)): 1},  # wrong group shape
])
def test_invalid_parts(entries):
    with pytest.raises(PrincipalPartError):
        PrincipalPart(build_lattice("A1"), entries, 0)


def test_asymmetric_part_rejected():
    with pytest.raises(PrincipalPartError):
        PrincipalPart(build_lattice("A2"), {((1,), F(-1, 3)): 1}, 0)
    with pytest.raises(PrincipalPartError):
        PrincipalPart(build_lattice("A1"), {}, -2)


def test_json_round_trip():
    raw = json.loads((DATA / "pp_4A1.json").read_text())
    pp = PrincipalPart.from_json(raw)
    assert pp.c0m1 == 1 and pp.form.orders == (2, 2, 2, 2)
    assert PrincipalPart.from_json(pp.to_json()) == pp
    bad = dict(pp.to_json(), c0m1=3)
    with pytest.raises(PrincipalPartError):
        PrincipalPart.from_json(bad)
