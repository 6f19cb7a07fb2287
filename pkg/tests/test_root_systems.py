from fractions import Fraction as F

import pytest

from reflex import linalg as la
from reflex.lattice_core import build_lattice, is_isomorphic
from reflex.root_systems import RootSystemError, RootSystemKind, q_p_lattices, realize, rho_norms, verify_sum_rule


def all_kinds(max_rank=12):
    out = [RootSystemKind("A", n) for n in range(1, max_rank + 1)]
    out += [RootSystemKind("B", n) for n in range(3, max_rank + 1)]
    out += [RootSystemKind("C", n) for n in range(2, max_rank + 1)]
    out += [RootSystemKind("D", n) for n in range(4, max_rank + 1)]
    out += [RootSystemKind("E", n) for n in (6, 7, 8)]
    return out + [RootSystemKind("F", 4), RootSystemKind("G", 2)]


def closed_form(kind):
    """(long roots, short roots, h_l, h_s) from the classical tables."""
    f, n = kind.family, kind.rank
    if f == "A":
        return n * (n + 1), 0, n + 1, 0
    if f == "B":
        return 2 * n * (n - 1), 2 * n, 2 * (n - 1), 1
    if f == "C":
        return 2 * n, 2 * n * (n - 1), 2, n - 1
    if f == "D":
        return 2 * n * (n - 1), 0, 2 * (n - 1), 0
    if f == "E":
        return {6: 72, 7: 126, 8: 240}[n], 0, {6: 12, 7: 18, 8: 30}[n], 0
    if f == "F":
        return 24, 24, 6, 3
    return 6, 6, 3, 1


@pytest.mark.parametrize("kind", all_kinds(), ids=str)
def test_counts_and_coxeter_numbers(kind):
    r = realize(kind)
    n_l, n_s, h_l, h_s = closed_form(kind)
    assert (r.n_long, r.n_short) == (n_l, n_s)
    assert len(r.roots) == n_l + n_s
    assert (r.h_l, r.h_s) == (h_l, h_s)
    assert verify_sum_rule(r)


@pytest.mark.parametrize("kind", all_kinds(8), ids=str)
def test_sum_rule_by_explicit_vectors(kind):
    # Σ_{α>0} (α,z)² = h (z,z) for a few test vectors z
    r = realize(kind)
    n = kind.rank
    for z in ([1] + [0] * (n - 1), list(range(1, n + 1)), [(-1) ** i * (i + 2) for i in range(n)]):
        lhs = sum(r.ip(r.roots[i], z) ** 2 for i in r.positive)
        assert lhs == r.h * r.ip(z, z)


def test_roots_closed_under_reflection():
    r = realize("F4")
    roots = set(r.roots)
    for a in r.roots:
        for b in r.roots:
            c = 2 * r.ip(a, b) / r.ip(a, a)
            assert tuple(x - c * y for x, y in zip(b, a)) in roots


def test_e8_weyl_vector_norm():
    r = realize("E8")
    assert len(r.positive) == 120
    rho = [sum(F(r.roots[i][j]) for i in r.positive) / 2 for j in range(8)]
    assert r.ip(rho, rho) == 620
    assert sum(rho_norms(r)) == 620


def test_a1_weyl_vector():
    assert rho_norms(realize("A1")) == (F(1, 2), 0, 0)


def test_b20_weyl_vectors_in_orthonormal_model():
    # B_n simple roots e_i - e_{i+1}, e_n; coordinates in the e-basis
    r = realize("B20")
    n = 20
    basis = [[int(j == i) - int(j == i + 1) for j in range(n)] for i in range(n - 1)] + [[int(j == n - 1) for j in range(n)]]
    to_e = lambda v: [sum(v[i] * basis[i][j] for i in range(n)) for j in range(n)]
    assert to_e(r.rho_l) == list(range(19, -1, -1))
    assert to_e(r.rho_s) == [F(1, 2)] * n


def test_g2_and_f4_values():
    g2, f4 = realize("G2"), realize("F4")
    assert (g2.h_l, g2.h_s, g2.n_long, g2.n_short) == (3, 1, 6, 6)
    assert (f4.h_l, f4.h_s) == (6, 3)
    assert realize("A2").h == 3 and len(realize("A2").roots) == 6


@pytest.mark.parametrize("text", ["D3", "B2", "E9", "F5", "G3", "A0", "X4", ""])
def test_invalid_kinds(text):
    with pytest.raises(RootSystemError):
        RootSystemKind.parse(text)


def test_q_p_windows():
    q, p = q_p_lattices("B4", 1)
    assert is_isomorphic(q, build_lattice("D4"))[0]
    assert la.det(p.gram) == 1  # Z^4
    q, p = q_p_lattices("F4", 1)
    assert is_isomorphic(q, build_lattice("D4"))[0]
    assert la.det(p.gram) == 4  # P = D4 as well
    q, p = q_p_lattices("A3", 2)
    assert is_isomorphic(q, build_lattice("A3(2)"))[0]
    assert la.det(p.gram) == F(2 ** 3, 4)
