"""Exact formal q-series: eta, odd Jacobi theta and theta blocks.

Coefficients are Laurent polynomials in ζ with rational exponent vectors.
A theta block is assembled from its product form rather than by dividing
series, so negative multiplicities only ever produce power series in q.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Iterable, Mapping, Sequence

from .fake_roots import FakeComponent, FakeSystem, rho_hat, rhat_count
from .lattice_core import rational_str
from .root_systems import realize

F = Fraction
Key = tuple  # tuple[Fraction, ...]; () is the zero vector


class SeriesError(ValueError):
    pass


def _key(vec: Iterable) -> Key:
    k = tuple(F(x) for x in vec)
    return () if not any(k) else k


def _kadd(a: Key, b: Key) -> Key:
    if not a:
        return b
    if not b:
        return a
    if len(a) != len(b):
        raise SeriesError("ζ-exponent dimensions differ")
    return _key(x + y for x, y in zip(a, b))


def _kscale(t, a: Key) -> Key:
    return _key(t * x for x in a)


class ExpPolynomial:
    """Finite sum Σ c_ℓ ζ^ℓ with integer coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping | None = None):
        acc: dict[Key, int] = {}
        for k, c in (terms or {}).items():
            k = _key(k)
            acc[k] = acc.get(k, 0) + int(c)
        self.terms = {k: c for k, c in acc.items() if c}

    @classmethod
    def const(cls, c: int) -> "ExpPolynomial":
        return cls({(): c})

    @classmethod
    def monomial(cls, vec, c: int = 1) -> "ExpPolynomial":
        return cls({_key(vec): c})

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            other = ExpPolynomial.const(other)
        return isinstance(other, ExpPolynomial) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __add__(self, other: "ExpPolynomial") -> "ExpPolynomial":
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0) + c
        return ExpPolynomial._raw(out)

    def __neg__(self) -> "ExpPolynomial":
        return ExpPolynomial({k: -c for k, c in self.terms.items()})

    def __sub__(self, other: "ExpPolynomial") -> "ExpPolynomial":
        return self + (-other)

    def __mul__(self, other) -> "ExpPolynomial":
        if isinstance(other, int):
            return ExpPolynomial({k: c * other for k, c in self.terms.items()})
        out: dict[Key, int] = {}
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                k = _kadd(k1, k2)
                out[k] = out.get(k, 0) + c1 * c2
        return ExpPolynomial._raw(out)

    @classmethod
    def _raw(cls, terms: dict) -> "ExpPolynomial":
        # keys already normalized
        obj = cls.__new__(cls)
        obj.terms = {k: c for k, c in terms.items() if c}
        return obj

    __rmul__ = __mul__

    def substitute(self, t) -> "ExpPolynomial":
        """ζ^ℓ → ζ^{tℓ}."""
        return ExpPolynomial({_kscale(t, k): c for k, c in self.terms.items()})

    def unit_monomial(self) -> tuple[Key, int] | None:
        if len(self.terms) == 1:
            (k, c), = self.terms.items()
            if c in (1, -1):
                return k, c
        return None

    def extreme(self, functional=None) -> Key:
        """Exponent maximizing a linear functional (default: coordinate sum)."""
        if not self.terms:
            raise SeriesError("zero polynomial has no extreme exponent")
        f = functional or (lambda k: sum(k, F(0)))
        return max(self.terms, key=lambda k: (f(k), k))

    def to_json(self) -> list:
        return [[[rational_str(x) for x in k], c] for k, c in sorted(self.terms.items())]

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for k, c in sorted(self.terms.items(), key=lambda kc: kc[0], reverse=True):
            mono = "" if not k else "ζ^(" + ",".join(rational_str(x) for x in k) + ")"
            if not mono:
                parts.append(f"{c:+d}")
            elif c in (1, -1):
                parts.append(("+" if c > 0 else "-") + mono)
            else:
                parts.append(f"{c:+d}{mono}")
        return " ".join(parts)

    __repr__ = __str__


ONE = ExpPolynomial.const(1)


@dataclass(frozen=True)
class PuiseuxSeries:
    """Σ c_e q^e over rational e, known exactly for e < prec (prec None
    means the stored sum is exact)."""

    terms: Mapping[Fraction, ExpPolynomial]
    prec: Fraction | None

    def __post_init__(self):
        p = None if self.prec is None else F(self.prec)
        clean = {}
        for e, c in self.terms.items():
            e = F(e)
            if isinstance(c, int):
                c = ExpPolynomial.const(c)
            if c.is_zero() or (p is not None and e >= p):
                continue
            clean[e] = c
        object.__setattr__(self, "terms", dict(sorted(clean.items())))
        object.__setattr__(self, "prec", p)

    @classmethod
    def one(cls) -> "PuiseuxSeries":
        return cls({F(0): ONE}, None)

    @property
    def valuation(self) -> Fraction | None:
        if self.terms:
            return next(iter(self.terms))
        return self.prec

    def truncate(self, prec) -> "PuiseuxSeries":
        p = F(prec) if self.prec is None else min(F(prec), self.prec)
        return PuiseuxSeries(self.terms, p)

    def coefficient(self, e) -> ExpPolynomial:
        e = F(e)
        if self.prec is not None and e >= self.prec:
            raise SeriesError(f"q^{e} lies beyond the truncation order {self.prec}")
        return self.terms.get(e, ExpPolynomial())

    def __add__(self, other: "PuiseuxSeries") -> "PuiseuxSeries":
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out[e] + c if e in out else c
        return PuiseuxSeries(out, _pmin(self.prec, other.prec))

    def __neg__(self) -> "PuiseuxSeries":
        return PuiseuxSeries({e: -c for e, c in self.terms.items()}, self.prec)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other) -> "PuiseuxSeries":
        if isinstance(other, (int, ExpPolynomial)):
            return PuiseuxSeries({e: c * other for e, c in self.terms.items()}, self.prec)
        va, vb = self.valuation, other.valuation
        prec = _pmin(_padd(self.prec, vb), _padd(other.prec, va))
        out: dict[Fraction, ExpPolynomial] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = e1 + e2
                if prec is not None and e >= prec:
                    continue
                p = c1 * c2
                out[e] = out[e] + p if e in out else p
        return PuiseuxSeries(out, prec)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "PuiseuxSeries":
        if n < 0:
            return self.inverse() ** (-n)
        acc, base = PuiseuxSeries.one(), self
        while n:
            if n & 1:
                acc = acc * base
            base = base * base
            n >>= 1
        return acc

    def inverse(self) -> "PuiseuxSeries":
        """Series inverse; the lowest term must be ±ζ^w."""
        if not self.terms:
            raise SeriesError("cannot invert a series that vanishes to its truncation order")
        e0, c0 = next(iter(self.terms.items()))
        um = c0.unit_monomial()
        if um is None:
            raise SeriesError("lowest coefficient is not a unit monomial")
        w, s = um
        cinv = ExpPolynomial({_kscale(-1, w): s})
        # self = c0 q^e0 (1 + u) with u of positive q-order
        u = PuiseuxSeries({e - e0: c * cinv for e, c in self.terms.items() if e != e0},
                          None if self.prec is None else self.prec - e0)
        if self.prec is None and u.terms:
            raise SeriesError("exact inverse of a non-monomial series needs a truncation order")
        if not u.terms:
            rel = u.prec
            inv = PuiseuxSeries.one() if rel is None else PuiseuxSeries.one().truncate(rel)
        else:
            rel = u.prec
            step = u.valuation
            inv, power = PuiseuxSeries.one().truncate(rel), PuiseuxSeries.one()
            j = 1
            while j * step < rel:
                power = (power * (-u)).truncate(rel)
                inv = inv + power
                j += 1
        shifted = {e - e0: c * cinv for e, c in inv.terms.items()}
        return PuiseuxSeries(shifted, None if inv.prec is None else inv.prec - e0)

    def equals_to(self, other: "PuiseuxSeries", prec=None) -> bool:
        """Agreement on every exponent below the common truncation order."""
        p = _pmin(self.prec, other.prec)
        if prec is not None:
            p = _pmin(p, F(prec))
        keys = set(self.terms) | set(other.terms)
        for e in keys:
            if p is not None and e >= p:
                continue
            if self.terms.get(e, ExpPolynomial()) != other.terms.get(e, ExpPolynomial()):
                return False
        return True

    def to_json(self) -> dict:
        return {"prec": None if self.prec is None else rational_str(self.prec),
                "terms": [[rational_str(e), c.to_json()] for e, c in self.terms.items()]}

    def __str__(self) -> str:
        body = " + ".join(f"q^{rational_str(e)}·({c})" for e, c in self.terms.items()) or "0"
        return body if self.prec is None else f"{body} + O(q^{rational_str(self.prec)})"


def _pmin(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def _padd(a, b):
    return None if a is None or b is None else a + b


def _gen_binom(m, j: int) -> Fraction:
    """Generalized binomial coefficient, valid for negative m."""
    if m >= 0:
        return F(comb(m, j))
    num = 1
    for i in range(j):
        num *= m - i
    return F(num, _fact(j))


def _fact(n: int) -> int:
    out = 1
    for i in range(2, n + 1):
        out *= i
    return out


def _euler_product(vec: Key, m, depth: Fraction) -> PuiseuxSeries:
    """Π_{n≥1} (1 − qⁿζ^vec)^m truncated at q^depth."""
    acc = PuiseuxSeries.one().truncate(depth)
    n = 1
    while n < depth:
        terms = {}
        j = 0
        while n * j < depth:
            c = _gen_binom(m, j) * (-1) ** j
            if c.denominator != 1:
                raise SeriesError("non-integral binomial coefficient")
            terms[F(n * j)] = ExpPolynomial.monomial(_kscale(j, vec), int(c)) if c else ExpPolynomial()
            j += 1
        acc = acc * PuiseuxSeries(terms, depth)
        n += 1
    return acc


def eta_series(prec, power: int = 1) -> PuiseuxSeries:
    """η^power = q^{power/24} Π(1−qⁿ)^power, truncated below prec."""
    prec = F(prec)
    if prec <= 0:
        raise SeriesError("prec must be positive")
    lead = F(power, 24)
    depth = prec - lead
    if depth <= 0:
        return PuiseuxSeries({}, prec)
    prod = _euler_product((), power, depth)
    return PuiseuxSeries({e + lead: c for e, c in prod.terms.items()}, prec)


def eta_coefficients_pentagonal(n_terms: int) -> list[int]:
    """Coefficients of Π(1−qⁿ) up to q^{n_terms-1} from Euler's pentagonal
    theorem; an independent oracle for the product expansion."""
    out = [0] * n_terms
    k = 0
    while True:
        hit = False
        for g in ((k * (3 * k - 1)) // 2, (k * (3 * k + 1)) // 2) if k else (0,):
            if g < n_terms:
                out[g] = (-1) ** k
                hit = True
        if not hit and k:
            break
        k += 1
    return out


def theta_series(v: Sequence, prec) -> PuiseuxSeries:
    """ϑ(τ, ⟨v,𝔷⟩) = q^{1/8}(ζ^{v/2}−ζ^{−v/2})Π(1−qⁿζ^v)(1−qⁿζ^{−v})(1−qⁿ)."""
    prec = F(prec)
    if prec <= 0:
        raise SeriesError("prec must be positive")
    v = _key(v)
    depth = prec - F(1, 8)
    if depth <= 0:
        return PuiseuxSeries({}, prec)
    lead = ExpPolynomial({_kscale(F(1, 2), v): 1}) - ExpPolynomial({_kscale(F(-1, 2), v): 1})
    prod = _euler_product(v, 1, depth) * _euler_product(_kscale(-1, v), 1, depth) * _euler_product((), 1, depth)
    return PuiseuxSeries({e + F(1, 8): c * lead for e, c in prod.terms.items()}, prec)


def theta_series_oracle(v: Sequence, prec) -> PuiseuxSeries:
    """Jacobi triple product sum Σ (−1)^n q^{(n+1/2)²/2} ζ^{(n+1/2)v}."""
    prec = F(prec)
    v = _key(v)
    terms: dict[Fraction, ExpPolynomial] = {}
    n = 0
    while True:
        hit = False
        for m in (n, -n - 1):
            r = m + F(1, 2)
            e = r * r / 2
            if e < prec:
                hit = True
                mono = ExpPolynomial.monomial(_kscale(r, v), (-1) ** (m % 2))
                terms[e] = terms[e] + mono if e in terms else mono
        if not hit:
            break
        n += 1
    return PuiseuxSeries(terms, prec)


@dataclass(frozen=True)
class BlockFactor:
    """A factor (ϑ(⟨v,𝔷⟩)/η)^m."""

    vec: Key
    mult: int


def _component_factors(comp: FakeComponent, offset: int, dim: int, generic: bool) -> list[tuple]:
    """(vector, multiplicity, half vector or None, half multiplicity) per
    positive root.

    Long roots with half-long partners are merged so the leading binomials
    combine without division: b(α)^a·b(α/2)^c = b(α/2)^{a+c}·(ζ^{α/4}+ζ^{−α/4})^a."""
    r = realize(comp.kind)

    def embed(root, t=F(1)):
        if generic:
            return _key((t * sum(root, 0),))
        vec = [F(0)] * dim
        for i, x in enumerate(root):
            vec[offset + i] = t * x
        return _key(vec)

    out = []
    for root in r.positive_long:
        out.append((embed(root), comp.a, embed(root, F(1, 2)) if comp.c else None, comp.c or 0))
    for root in r.positive_short:
        out.append((embed(root), comp.b, None, 0))
    return out


def _binomial(vec: Key) -> ExpPolynomial:
    return ExpPolynomial({_kscale(F(1, 2), vec): 1}) - ExpPolynomial({_kscale(F(-1, 2), vec): 1})


def _leading_poly(factors) -> ExpPolynomial:
    acc = ONE
    for vec, a, half, c in factors:
        if half is None:
            for _ in range(a):
                acc = acc * _binomial(vec)
            continue
        if a + c < 0:
            raise SeriesError("a + c must be non-negative")
        for _ in range(a + c):
            acc = acc * _binomial(half)
        plus = ExpPolynomial({_kscale(F(1, 2), half): 1}) + ExpPolynomial({_kscale(F(-1, 2), half): 1})
        for _ in range(a):
            acc = acc * plus
    return acc


class _DenseLine:
    """Dense Laurent polynomial in one variable, exponents in units of 1/4."""

    def __init__(self, coeffs: list[int], lo: int):
        self.coeffs, self.lo = coeffs, lo

    def mul_binomial(self, s: int, sign: int) -> None:
        # multiply by x^s + sign·x^{-s}
        old = self.coeffs
        n = len(old)
        out = [0] * (n + 2 * s)
        for i, c in enumerate(old):
            if c:
                out[i + 2 * s] += c
                out[i] += sign * c
        self.coeffs, self.lo = out, self.lo - s

    @classmethod
    def leading(cls, factors) -> "_DenseLine":
        poly = cls([1], 0)
        for vec, a, half, c in factors:
            if half is None:
                s = _quarters(vec[0] / 2)
                for _ in range(a):
                    poly.mul_binomial(s, -1)
                continue
            if a + c < 0:
                raise SeriesError("a + c must be non-negative")
            s = _quarters(half[0] / 2)
            for _ in range(a + c):
                poly.mul_binomial(s, -1)
            for _ in range(a):
                poly.mul_binomial(s, 1)
        return poly

    def times(self, p: ExpPolynomial) -> ExpPolynomial:
        acc: dict[int, int] = {}
        for k, c in p.terms.items():
            shift = _quarters(k[0]) if k else 0
            for i, x in enumerate(self.coeffs):
                if x:
                    e = self.lo + i + shift
                    acc[e] = acc.get(e, 0) + c * x
        return ExpPolynomial({(F(e, 4),): c for e, c in acc.items()})


def _quarters(x: Fraction) -> int:
    y = F(x) * 4
    if y.denominator != 1:
        raise SeriesError("ζ-exponent is not a multiple of 1/4")
    return int(y)


def choose_mode(sys: FakeSystem) -> str:
    weight = sum(m + abs(c) for comp in sys.components for _, m, _, c in _component_factors(comp, 0, 0, True))
    return "full" if sys.rank <= 4 and weight <= 40 else "generic"


def theta_block(sys: FakeSystem, prec=None, mode: str = "auto") -> PuiseuxSeries:
    """η^{2k}·Π (ϑ(⟨ℓ,𝔷⟩)/η)^{f(0,ℓ)} over positive fake roots.

    mode "full" keeps ζ-exponents as vectors in simple-root coordinates;
    "generic" specializes them along the height functional, which is a ring
    homomorphism and keeps E8-sized blocks tractable."""
    from .fake_roots import C_value
    lead_exp = (2 * sys.k + sum(rhat_count(c) for c in sys.components)) / 24
    if prec is None:
        prec = C_value(sys) + sys.a0 + 2
    prec = F(prec)
    if prec <= lead_exp:
        raise SeriesError(f"truncation {prec} does not reach the leading exponent {lead_exp}")
    if mode == "auto":
        mode = choose_mode(sys)
    if mode not in ("full", "generic"):
        raise SeriesError(f"unknown mode {mode!r}")
    generic = mode == "generic"
    dim = sys.rank
    factors = []
    offset = 0
    for comp in sys.components:
        factors.extend(_component_factors(comp, offset, dim, generic))
        offset += comp.rank
    depth = prec - lead_exp
    body = _euler_product((), int(2 * sys.k), depth) if (2 * sys.k).denominator == 1 else None
    if body is None:
        raise SeriesError("2k must be an integer")
    mults: dict[Key, int] = {}
    for vec, a, half, c in factors:
        for v, m in ((vec, a), (half, c)):
            if v is not None and m:
                mults[v] = mults.get(v, 0) + m
    for v, m in sorted(mults.items()):
        if m:
            body = body * _euler_product(v, m, depth) * _euler_product(_kscale(-1, v), m, depth)
    if generic:
        lead = _DenseLine.leading(factors)
        return PuiseuxSeries({e + lead_exp: lead.times(c) for e, c in body.terms.items()}, prec)
    lead = _leading_poly(factors)
    return PuiseuxSeries({e + lead_exp: c * lead for e, c in body.terms.items()}, prec)


def leading_data(series: PuiseuxSeries) -> tuple[Fraction, ExpPolynomial]:
    if not series.terms:
        raise SeriesError("series vanishes up to its truncation order")
    e, c = next(iter(series.terms.items()))
    return e, c


def rho_hat_total(sys: FakeSystem, mode: str = "full") -> Key:
    """Σ ρ̂_j as a concatenated simple-root vector, or its height."""
    vec = []
    for comp in sys.components:
        vec.extend(rho_hat(comp))
    if mode == "generic":
        return _key((sum(vec, F(0)),))
    return _key(vec)
