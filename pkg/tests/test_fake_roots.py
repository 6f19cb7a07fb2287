from fractions import Fraction as F

import pytest

from reflex import linalg as la
from reflex.fake_roots import (C_value, FakeComponent, FakeRootError, FakeSystem, audit_example, check_eqA,
                               check_system, check_system_against_lattice, forced_a0, hhat, lattice_bounds,
                               multiplicity_rule_violations, rhat_count, singular_bound, singular_bound_check,
                               verify_local_identities, weyl_data)
from reflex.fixtures import WORKED_EXAMPLES
from reflex.lattice_core import build_lattice, is_isomorphic, lattices_between
from reflex.root_systems import realize

E8 = FakeComponent("E8", 1, 1)
PSI24_MODELS = {
    "B20": FakeSystem((FakeComponent("B20", 1, 1, 8),), 1, 24),
    "E8+B12": FakeSystem((E8, FakeComponent("B12", 1, 1, 8)), 1, 24),
    "2E8+F4": FakeSystem((E8, E8, FakeComponent("F4", 1, 1, 8)), 1, 24),
}


def rho_hat_norm_by_summation(comp):
    """½ Σ over positive fake roots with multiplicity, normed with Gram/d."""
    r = realize(comp.kind)
    n = comp.rank
    rho = [F(0)] * n
    for i in r.positive:
        root = r.roots[i]
        if r.long_flags[i]:
            m = comp.a + F(comp.c or 0) / 2  # half-roots ℓ/2 with multiplicity c
        else:
            m = comp.b
        for j in range(n):
            rho[j] += m * F(root[j]) / 2
    return la.bilinear(rho, r.simple_gram, rho) / comp.d


def eqB_oracle(sys):
    C = C_value(sys)
    return sum(rho_hat_norm_by_summation(c) for c in sys.components) - 2 * C * (C + sys.a0)


def test_hhat_examples():
    assert hhat(E8) == 30
    assert hhat(FakeComponent("C2", 1, 1, 12, 32)) == 30
    assert hhat(FakeComponent("A1", 36, 1, None, -1)) == F(1, 24)


def test_rhat_examples():
    assert rhat_count(FakeComponent("A1", 1, 1, None, 56)) == 114
    assert rhat_count(FakeComponent("F4", 1, 1, 8)) == 216
    assert rhat_count(FakeComponent("A1", 36, 1, None, -1)) == 0


def test_C_examples():
    assert C_value(PSI24_MODELS["2E8+F4"]) == 30
    assert C_value(FakeSystem((), 1, 12)) == 0
    assert C_value(FakeSystem((FakeComponent("A1", 36, 1, None, -1),), 0, F(1, 2))) == F(1, 24)


def test_eqA_examples():
    g2 = FakeSystem((E8, E8, FakeComponent("G2", 1, 1, 27)), 1, 48)
    rep = check_eqA(g2)
    assert rep["C"] == 30 and rep["pass"] and rep["hhat"] == [30, 30, 30]
    b20 = check_eqA(PSI24_MODELS["B20"])
    assert b20["C"] == 46 and b20["pass"]
    for k in (1, 12, 24, 100):
        assert not check_eqA(FakeSystem((E8, FakeComponent("E7", 1, 1)), 1, k))["pass"]


@pytest.mark.parametrize("name", sorted(PSI24_MODELS))
def test_psi24_models_have_eqB_minus_14(name):
    sys = PSI24_MODELS[name]
    assert check_eqA(sys)["pass"]
    assert weyl_data(sys).norm == -14 == eqB_oracle(sys)
    assert verify_local_identities(sys)
    assert check_system(sys)["admissible"]


def test_weyl_data_decomposition():
    wd = weyl_data(PSI24_MODELS["2E8+F4"])
    assert wd.rho_hat_norm_total == 1240 + 606
    assert wd.first == 31
    b20 = weyl_data(PSI24_MODELS["B20"])
    assert b20.rho_hat_norm_total == 4310 and b20.norm == 4310 - 2 * 46 * 47
    empty = weyl_data(FakeSystem((), 1, 12))
    assert (empty.C, empty.norm) == (0, 0)


def feasible_g2_level_four(a0):
    """All 2E8 + (G2,a,b;4) passing eqA with k > 0."""
    out = []
    for b in range(1, 120 * a0):
        if (120 * a0 - b) % 3:
            continue
        a = (120 * a0 - b) // 3
        k = 132 * a0 - 3 * (a + b)  # from a + b + k/3 = 44 a0
        if a >= 1 and k > 0:
            e8 = FakeComponent("E8", 1, a0)
            out.append(FakeSystem((e8, e8, FakeComponent("G2", 4, a, b)), a0, k))
    return out


@pytest.mark.parametrize("a0", [1, 2, 3])
def test_g2_level_four_violates_eqB(a0):
    systems = feasible_g2_level_four(a0)
    assert systems
    for sys in systems:
        assert check_eqA(sys)["pass"]
        assert weyl_data(sys).norm > 0
        assert eqB_oracle(sys) == weyl_data(sys).norm
    rep = check_system_against_lattice(systems[0], build_lattice("2E8+A2(4)"))
    assert not rep["admissible"] and "eqB" in rep["reasons"]


def test_singular_bounds():
    a0, a1, a2, a3 = 3, 5, 7, 11
    s = FakeSystem((FakeComponent("E8", 1, a0), FakeComponent("E8", 1, a0), FakeComponent("A1", 2, a1),
                    FakeComponent("A2", 2, a2)), a0, 100)
    assert singular_bound(s) == 8 * a0 + F(a1, 2) + a2
    s = FakeSystem((FakeComponent("E8", 1, a0), FakeComponent("E8", 1, a0), FakeComponent("A1", 2, a1),
                    FakeComponent("A1", 2, a2), FakeComponent("A1", 2, a3)), a0, 1)
    assert singular_bound(s) == 8 * a0 + F(a1 + a2 + a3, 2)
    assert not singular_bound_check(s)
    assert singular_bound_check(FakeSystem((), 0, F(1, 2)))


def test_multiplicity_rules():
    assert multiplicity_rule_violations(FakeSystem((FakeComponent("A1", 1, 2),), 1, 4))
    assert multiplicity_rule_violations(FakeSystem((FakeComponent("A1", 1, 1),), 0, 4))
    assert not multiplicity_rule_violations(FakeSystem((FakeComponent("A1", 2, 5),), 0, 4))
    assert not multiplicity_rule_violations(FakeSystem((FakeComponent("A1", 1, 3),), 3, 4))


def test_lattice_bounds_examples():
    lb = lattice_bounds(FakeSystem((FakeComponent("F4", 1, 1, 8),), 1, 24))
    assert lb.J == (0,) and is_isomorphic(lb.qsum, build_lattice("D4"))[0]
    lb = lattice_bounds(FakeSystem((FakeComponent("B4", 1, 1, 3),), 1, 24))
    assert lb.J == () and la.det(lb.psum.gram) == 1
    # Z^4 is odd and has index 2 over D4, so D4 is the only even lattice in the window
    assert [t.det for t in lattices_between(lb.q_free, lb.p_free)] == [4]
    lb = lattice_bounds(FakeSystem((FakeComponent("A1", 1, 1, None, 56),), 1, 24))
    assert lb.J == (0,)


def test_against_lattice_examples():
    rep = check_system_against_lattice(PSI24_MODELS["2E8+F4"], build_lattice("2E8+D4"))
    assert rep["admissible"], rep["reasons"]
    sys = FakeSystem((E8, FakeComponent("E7", 1, 1), FakeComponent("A1", 2, 1), FakeComponent("A1", 2, 1),
                      FakeComponent("A1", 2, 1), FakeComponent("A1", 2, 1)), 1, 24)
    rep = check_system_against_lattice(sys, build_lattice("E8+E7+4A1(2)"))
    assert not rep["admissible"] and "eqA" in rep["reasons"]
    with pytest.raises(FakeRootError):
        check_system_against_lattice(sys, build_lattice("E8"))


def test_local_identities_empty():
    assert verify_local_identities(FakeSystem((), 1, 12))
    assert not verify_local_identities(FakeSystem((), 1, 13))


@pytest.mark.parametrize("bad", [dict(kind="A1", d=0), dict(kind="A1", a=0), dict(kind="B3", b=None),
                                 dict(kind="A2", b=3), dict(kind="A1", c=-2), dict(kind="E8", c=1)])
def test_component_validation(bad):
    with pytest.raises(FakeRootError):
        FakeComponent(**bad)


def test_system_validation_and_json():
    with pytest.raises(FakeRootError):
        FakeSystem((), -1, 12)
    with pytest.raises(FakeRootError):
        FakeSystem((), 1, F(1, 3))
    sys = PSI24_MODELS["2E8+F4"]
    assert FakeSystem.from_json(sys.to_json()) == sys
    assert str(sys) == "(E8,1;1)⊕(E8,1;1)⊕(F4,1,8;1) [k=24, a0=1]"


def test_worked_examples_audit():
    for name, ex in WORKED_EXAMPLES.items():
        rep = audit_example([FakeComponent.from_json(c) for c in ex["components"]], F(ex["k"]), ex["a0"])
        if name == "Delta10":
            # at d = 2 eqA forces a0 = -1; the stated a0 = 0 needs d = 4
            assert rep["status"] == "stated-parameter discrepancy"
            assert rep["forced_a0"] == -1 and rep["consistent_levels"] == [4]
        else:
            assert rep["status"] == "consistent", name


def test_forced_a0():
    assert forced_a0([E8, E8, FakeComponent("F4", 1, 1, 8)], 24) == 1
    assert forced_a0([E8, FakeComponent("A2", 2, 1)], 24) is None
    assert forced_a0([], 12) is None
