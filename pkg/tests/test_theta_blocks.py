from fractions import Fraction as F

import pytest
import sympy

from reflex.fake_roots import C_value, FakeComponent, FakeSystem
from reflex.theta_blocks import (ExpPolynomial, PuiseuxSeries, SeriesError, eta_coefficients_pentagonal,
                                 eta_series, leading_data, theta_block, theta_series, theta_series_oracle)

E8 = FakeComponent("E8", 1, 1)


def poly_power(coeffs, power, n):
    out = [1] + [0] * (n - 1)
    for _ in range(power):
        out = [sum(out[i] * coeffs[j - i] for i in range(j + 1)) for j in range(n)]
    return out


def test_eta24_coefficients():
    prec = 6
    s = eta_series(prec, 24)
    got = [s.coefficient(e) for e in range(1, prec)]
    assert got[:4] == [1, -24, 252, -1472]
    oracle = poly_power(eta_coefficients_pentagonal(prec), 24, prec - 1)
    assert [ExpPolynomial.const(c) for c in oracle] == got


def test_pentagonal_oracle_matches_product():
    s = eta_series(40, 1)
    pent = eta_coefficients_pentagonal(39)
    assert all(s.coefficient(F(1, 24) + n) == pent[n] for n in range(39))


def test_eta_leading_exponents():
    for k in (1, 5, 12, 24):
        assert leading_data(eta_series(k, 2 * k))[0] == F(k, 12)


def test_eta_inverse():
    s = eta_series(8)
    prod = s * s.inverse()
    assert prod.equals_to(PuiseuxSeries.one(), 7)


def test_theta_product_matches_triple_product():
    v = (1, F(1, 2))
    assert theta_series(v, 30).equals_to(theta_series_oracle(v, 30))


def test_theta_leading_term_and_oddness():
    s = theta_series((1,), 10)
    e, c = leading_data(s)
    assert e == F(1, 8)
    assert c == ExpPolynomial({(F(1, 2),): 1, (F(-1, 2),): -1})
    assert (-theta_series((-1,), 10)).equals_to(s)


def sympy_theta_coefficient(n_q):
    """Coefficient of q^{1/8 + n_q} in the product form, as a Laurent
    polynomial in x = ζ^{1/2}."""
    q, x = sympy.symbols("q x")
    prod = (x - 1 / x)
    for n in range(1, n_q + 1):
        prod *= (1 - q ** n * x ** 2) * (1 - q ** n / x ** 2) * (1 - q ** n)
    return sympy.expand(sympy.expand(prod).coeff(q, n_q))


def as_sympy(poly):
    x = sympy.symbols("x")
    return sympy.expand(sum(c * x ** int(2 * k[0]) if k else c for k, c in poly.terms.items()))


@pytest.mark.parametrize("n_q", [1, 2, 3])
def test_theta_coefficients_against_sympy(n_q):
    s = theta_series((1,), 5)
    assert as_sympy(s.coefficient(F(1, 8) + n_q)) == sympy_theta_coefficient(n_q)


def test_theta_q_nine_eighths():
    x = sympy.symbols("x")
    # only the two outer terms survive
    assert as_sympy(theta_series((1,), 3).coefficient(F(9, 8))) == -x ** 3 + x ** -3


def test_theta_block_empty_is_eta_power():
    for a0 in (1, 2):
        blk = theta_block(FakeSystem((), a0, 12 * a0), 5)
        assert blk.equals_to(eta_series(5, 24 * a0))
        e, c = leading_data(blk)
        assert e == a0 and c == ExpPolynomial.const(1)


def test_theta_block_single_a1():
    for k in (1, 3, 7):
        blk = theta_block(FakeSystem((FakeComponent("A1", 1, 1, None, 0),), 1, k), 6, mode="full")
        assert blk.equals_to(eta_series(6, 2 * k - 1) * theta_series((1,), 6))


def test_theta_block_negative_half_root():
    sys = FakeSystem((FakeComponent("A1", 36, 1, None, -1),), 0, F(1, 2))
    e, c = leading_data(theta_block(sys, 3, mode="full"))
    assert e == F(1, 24) == C_value(sys) + sys.a0
    # (ζ^{1/2} − ζ^{−1/2}) / (ζ^{1/4} − ζ^{−1/4})
    assert c == ExpPolynomial({(F(1, 4),): 1, (F(-1, 4),): 1})


@pytest.mark.parametrize("system,lead", [
    (FakeSystem((E8, E8, FakeComponent("F4", 1, 1, 8)), 1, 24), 31),
    (FakeSystem((E8, FakeComponent("B12", 1, 1, 8)), 1, 24), 31),
    (FakeSystem((FakeComponent("B20", 1, 1, 8),), 1, 24), 47),
    (FakeSystem((E8, E8, FakeComponent("G2", 1, 1, 27)), 1, 48), 31),
], ids=["2E8+F4", "E8+B12", "B20", "2E8+G2"])
def test_leading_exponents_psi_models(system, lead):
    e, c = leading_data(theta_block(system))
    assert e == lead == C_value(system) + system.a0
    assert not c.is_zero()


def test_full_and_generic_agree_on_small_system():
    sys = FakeSystem((FakeComponent("B3", 1, 1, 2),), 1, 6)
    full = theta_block(sys, C_value(sys) + 3, mode="full")
    gen = theta_block(sys, C_value(sys) + 3, mode="generic")
    assert leading_data(full)[0] == leading_data(gen)[0]
    # specializing ζ-exponents to their heights is a ring map
    for e, c in full.terms.items():
        spec = sum((ExpPolynomial.monomial((sum(k, F(0)),), v) for k, v in c.terms.items()), ExpPolynomial())
        assert spec == gen.coefficient(e)


def test_series_errors():
    with pytest.raises(SeriesError):
        eta_series(0)
    with pytest.raises(SeriesError):
        theta_series((1,), -1)
    with pytest.raises(SeriesError):
        theta_block(FakeSystem((), 1, 12), F(1, 2))
    with pytest.raises(SeriesError):
        theta_block(FakeSystem((), 1, 12), 3, mode="fast")
    with pytest.raises(SeriesError):
        leading_data(PuiseuxSeries({}, 2))
