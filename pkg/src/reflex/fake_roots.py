"""Fake root systems: multiplicity-weighted root systems attached to a
reflective Borcherds product and the identities they must satisfy."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import linalg as la
from .lattice_core import (EvenLattice, RationalLattice, direct_sum, direct_sum_rational, is_isomorphic,
                           is_maximal_even, lattices_between, rational_str, root_count)
from .root_systems import RootSystemKind, q_p_lattices, realize, rho_norms

F = Fraction


class FakeRootError(ValueError):
    pass


def _has_b(kind: RootSystemKind) -> bool:
    return kind.family in "BCFG"


def _has_c(kind: RootSystemKind) -> bool:
    return kind.family == "C" or (kind.family == "A" and kind.rank == 1)


@dataclass(frozen=True, order=True)
class FakeComponent:
    kind: RootSystemKind
    d: int = 1
    a: int = 1
    b: int | None = None
    c: int | None = None

    def __post_init__(self):
        k = self.kind
        if isinstance(k, str):
            k = RootSystemKind.parse(k)
            object.__setattr__(self, "kind", k)
        if self.d < 1:
            raise FakeRootError("d must be positive")
        if self.a < 1:
            raise FakeRootError("long-root multiplicity must be >= 1")
        if _has_b(k):
            if self.b is None or self.b < 1:
                raise FakeRootError(f"{k} needs a short-root multiplicity b >= 1")
        elif self.b is not None:
            raise FakeRootError(f"{k} has no short roots")
        if _has_c(k):
            if self.c is None:
                object.__setattr__(self, "c", 0)
            elif self.a + self.c < 0:
                raise FakeRootError("a + c must be non-negative")
        elif self.c is not None:
            raise FakeRootError(f"{k} has no half-long fake roots")

    @property
    def rank(self) -> int:
        return self.kind.rank

    def sort_key(self):
        return (self.kind.family, self.kind.rank, self.d, self.a, self.b or 0, self.c or 0)

    def __str__(self) -> str:
        k = self.kind
        if _has_c(k) and k.family == "A":
            return f"({k},{self.a}|{self.c};{self.d})"
        if k.family == "C":
            return f"({k},{self.a}|{self.c},{self.b};{self.d})"
        if _has_b(k):
            return f"({k},{self.a},{self.b};{self.d})"
        return f"({k},{self.a};{self.d})"

    def to_json(self) -> dict:
        out = {"family": self.kind.family, "rank": self.kind.rank, "d": self.d, "a": self.a}
        if self.b is not None:
            out["b"] = self.b
        if self.c is not None:
            out["c"] = self.c
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "FakeComponent":
        return cls(RootSystemKind(obj["family"], int(obj["rank"])), int(obj.get("d", 1)), int(obj["a"]),
                   None if obj.get("b") is None else int(obj["b"]),
                   None if obj.get("c") is None else int(obj["c"]))


@dataclass(frozen=True)
class FakeSystem:
    components: tuple[FakeComponent, ...]
    a0: int
    k: Fraction

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        k = F(self.k)
        object.__setattr__(self, "k", k)
        if self.a0 < 0:
            raise FakeRootError("a0 must be non-negative")
        if (2 * k).denominator != 1:
            raise FakeRootError("weight must be in (1/2)Z")

    @property
    def rank(self) -> int:
        return sum(c.rank for c in self.components)

    def __str__(self) -> str:
        body = "⊕".join(str(c) for c in self.components) or "∅"
        return f"{body} [k={rational_str(self.k)}, a0={self.a0}]"

    def to_json(self) -> dict:
        return {"a0": self.a0, "k": rational_str(self.k), "components": [c.to_json() for c in self.components]}

    @classmethod
    def from_json(cls, obj: dict) -> "FakeSystem":
        return cls(tuple(FakeComponent.from_json(c) for c in obj.get("components", [])),
                   int(obj.get("a0", 0)), F(str(obj["k"])))

    def __add__(self, other: "FakeSystem") -> "FakeSystem":
        if len(self.components) != len(other.components):
            raise FakeRootError("systems have different skeletons")
        comps = []
        for x, y in zip(self.components, other.components):
            if (x.kind, x.d) != (y.kind, y.d):
                raise FakeRootError("systems have different skeletons")
            comps.append(FakeComponent(x.kind, x.d, x.a + y.a,
                                       None if x.b is None else x.b + y.b,
                                       None if x.c is None else x.c + y.c))
        return FakeSystem(tuple(comps), self.a0 + other.a0, self.k + other.k)


def hhat(comp: FakeComponent) -> Fraction:
    """Fake Coxeter number."""
    r = realize(comp.kind)
    val = F(comp.a) * r.h_l / comp.d
    if comp.b is not None:
        val += F(comp.b) * r.h_s / comp.d
    if comp.c:
        val += F(comp.c) * r.h_l / (4 * comp.d)
    return val


def rhat_count(comp: FakeComponent) -> int:
    """Number of fake roots counted with multiplicity."""
    r = realize(comp.kind)
    return (comp.a + (comp.c or 0)) * r.n_long + (comp.b or 0) * r.n_short


def rho_coefficients(comp: FakeComponent) -> tuple[Fraction, Fraction]:
    """Coefficients (x, y) with ρ̂ = x·ρ_l + y·ρ_s."""
    return F(comp.a) + F(comp.c or 0) / 2, F(comp.b or 0)


def rho_hat(comp: FakeComponent) -> tuple[Fraction, ...]:
    r = realize(comp.kind)
    x, y = rho_coefficients(comp)
    return tuple(x * p + y * q for p, q in zip(r.rho_l, r.rho_s))


def rho_hat_norm(comp: FakeComponent) -> Fraction:
    nll, nls, nss = rho_norms(realize(comp.kind))
    x, y = rho_coefficients(comp)
    return x * x * nll + 2 * x * y * nls + y * y * nss


def C_value(sys: FakeSystem) -> Fraction:
    return (2 * sys.k + sum(rhat_count(c) for c in sys.components)) / 24 - sys.a0


def check_eqA(sys: FakeSystem) -> dict:
    C = C_value(sys)
    hs = [hhat(c) for c in sys.components]
    return {"C": C, "hhat": hs, "pass": all(h == C for h in hs)}


@dataclass(frozen=True)
class WeylData:
    C: Fraction
    first: Fraction
    rho_hat_norm_total: Fraction
    norm: Fraction


def weyl_data(sys: FakeSystem) -> WeylData:
    C = C_value(sys)
    total = sum((rho_hat_norm(c) / c.d for c in sys.components), F(0))
    return WeylData(C, C + sys.a0, total, total - 2 * C * (C + sys.a0))


def singular_bound(sys: FakeSystem) -> Fraction:
    return sum((F(c.a * c.rank, 2) for c in sys.components), F(0))


def singular_bound_check(sys: FakeSystem) -> bool:
    """Conservative singular-weight bound k >= Σ a_j·rank_j/2."""
    return sys.k >= singular_bound(sys)


def multiplicity_rule_violations(sys: FakeSystem) -> list[str]:
    out = []
    for c in sys.components:
        if sys.a0 == 0 and c.d == 1:
            out.append(f"{c}: d = 1 requires f(-1,0) > 0")
        if sys.a0 > 0 and c.d == 1 and c.a != sys.a0:
            out.append(f"{c}: d = 1 requires a = f(-1,0) = {sys.a0}")
    return out


def in_J(comp: FakeComponent) -> bool:
    k = comp.kind
    return (k.family == "E" and k.rank == 8) or k.family in "FG" or bool(comp.c)


@dataclass(frozen=True)
class LatticeBounds:
    qsum: EvenLattice
    psum: RationalLattice
    J: tuple[int, ...]
    fixed: EvenLattice | None  # ⊕_{j∈J} Q_j(d_j)
    q_free: EvenLattice | None  # ⊕_{j∉J} Q_j(d_j)
    p_free: RationalLattice | None  # ⊕_{j∉J} P_j(d_j), in q_free coordinates


def lattice_bounds(sys: FakeSystem | Sequence[FakeComponent]) -> LatticeBounds:
    comps = sys.components if isinstance(sys, FakeSystem) else tuple(sys)
    J = tuple(i for i, c in enumerate(comps) if in_J(c))
    qs, ps = [], []
    for i, c in enumerate(comps):
        q, p = q_p_lattices(c.kind, c.d)
        qs.append(q)
        ps.append(RationalLattice(la.identity(q.rank), q.gram) if i in J else p)
    qsum = direct_sum(*qs)
    psum = direct_sum_rational(*ps)
    fixed = direct_sum(*(qs[i] for i in J)) if J else None
    free = [i for i in range(len(comps)) if i not in J]
    q_free = direct_sum(*(qs[i] for i in free)) if free else None
    p_free = direct_sum_rational(*(ps[i] for i in free)) if free else None
    return LatticeBounds(qsum, psum, J, fixed, q_free, p_free)


def window_lattices(comps: Sequence[FakeComponent], maximal_only: bool = False) -> list[EvenLattice]:
    """Candidates T ⊕ (⊕_J Q_j) for the lattice L, one per isometry class."""
    lb = lattice_bounds(comps)
    if lb.q_free is None:
        cands = [lb.fixed]
    else:
        ts = lattices_between(lb.q_free, lb.p_free)
        cands = [direct_sum(t, lb.fixed) if lb.fixed is not None else t for t in ts]
    if maximal_only:
        cands = [c for c in cands if is_maximal_even(c)]
    return cands


def expected_norm2_count(comps: Sequence[FakeComponent]) -> int:
    """Norm-2 vectors of L forced by d = 1 long roots."""
    return sum(realize(c.kind).n_long for c in comps if c.d == 1)


def norm2_consistent(lat: EvenLattice, comps: Sequence[FakeComponent], a0: int) -> bool:
    """With f(-1,0) > 0 every norm-2 vector of L is a d = 1 long root."""
    if a0 == 0:
        return True
    return root_count(lat) == expected_norm2_count(comps)


def check_system_against_lattice(sys: FakeSystem, lat: EvenLattice) -> dict:
    if sys.rank != lat.rank:
        raise FakeRootError(f"rank mismatch: system {sys.rank}, lattice {lat.rank}")
    eqa = check_eqA(sys)
    wd = weyl_data(sys)
    reasons = []
    if not eqa["pass"]:
        reasons.append("eqA")
    if sys.k <= 0:
        reasons.append("positive_weight")
    if wd.norm > 0:
        reasons.append("eqB")
    sing = singular_bound_check(sys)
    if not sing:
        reasons.append("singular_bound")
    mult = multiplicity_rule_violations(sys)
    if mult:
        reasons.append("multiplicity_rule")
    lb = lattice_bounds(sys)
    cands = window_lattices(sys.components)
    hit, canonical = False, True
    for t in cands:
        v, can = is_isomorphic(lat, t)
        canonical = canonical and can
        if v:
            hit = True
            break
    if not hit:
        reasons.append("lattice_window")
    norm2 = norm2_consistent(lat, sys.components, sys.a0)
    if not norm2:
        reasons.append("norm2_consistency")
    return {
        "C": eqa["C"], "hhat": eqa["hhat"], "eqA": eqa["pass"], "eqB_lhs": wd.norm, "eqB": wd.norm <= 0,
        "singular_bound": sing, "multiplicity_rules": not mult, "multiplicity_detail": mult,
        "lattice_window": {"J": list(lb.J), "candidates": len(cands), "contains_L": hit, "canonicalized": canonical},
        "norm2_consistency": norm2, "admissible": not reasons, "reasons": reasons,
    }


def check_system(sys: FakeSystem) -> dict:
    """The numerical rules alone, without a lattice."""
    eqa = check_eqA(sys)
    wd = weyl_data(sys)
    mult = multiplicity_rule_violations(sys)
    checks = {"eqA": eqa["pass"], "positive_weight": sys.k > 0, "eqB": wd.norm <= 0,
              "singular_bound": singular_bound_check(sys), "multiplicity_rule": not mult}
    return {
        "C": eqa["C"], "hhat": eqa["hhat"], "eqA": eqa["pass"], "eqB_lhs": wd.norm, "eqB": wd.norm <= 0,
        "singular_bound": checks["singular_bound"], "multiplicity_rules": not mult, "multiplicity_detail": mult,
        "admissible": all(checks.values()), "reasons": [r for r, ok in checks.items() if not ok],
    }


def forced_a0(components: Sequence[FakeComponent], k) -> Fraction | None:
    """The value of a0 that eqA forces at weight k, or None if the ĥ differ."""
    hs = {hhat(c) for c in components}
    if len(hs) != 1:
        return None
    return (2 * F(k) + sum(rhat_count(c) for c in components)) / 24 - hs.pop()


def audit_example(components: Sequence[FakeComponent], k, a0: int, d_max: int = 64) -> dict:
    """Compare a stated a0 with the one eqA forces.

    On a mismatch, also list the common levels d (applied to every component)
    at which the stated a0 would be consistent."""
    forced = forced_a0(components, k)
    out = {"stated_a0": a0, "forced_a0": forced, "consistent_levels": []}
    if forced == a0:
        out["status"] = "consistent"
        return out
    out["status"] = "stated-parameter discrepancy"
    for d in range(1, d_max + 1):
        try:
            comps = [FakeComponent(c.kind, d, c.a, c.b, c.c) for c in components]
        except FakeRootError:
            continue
        if forced_a0(comps, k) == a0:
            out["consistent_levels"].append(d)
    return out


def report_json(rep: dict) -> dict:
    out = dict(rep)
    out["C"] = rational_str(rep["C"])
    out["hhat"] = [rational_str(h) for h in rep["hhat"]]
    out["eqB_lhs"] = rational_str(rep["eqB_lhs"])
    return out


def _component_vectors(comp: FakeComponent):
    """(vector, multiplicity) over all fake roots of a component, in
    simple-root coordinates."""
    r = realize(comp.kind)
    for root, long in zip(r.roots, r.long_flags):
        if long:
            yield root, comp.a
            if comp.c:
                yield tuple(F(x, 2) for x in root), comp.c
        else:
            yield root, comp.b


def verify_local_identities(sys: FakeSystem) -> bool:
    """Check the two identities on explicit root vectors:
    C = (1/2rk)·Σ f(0,ℓ)(ℓ,ℓ) and Σ f(0,ℓ)(ℓ,z)² = 2C(z,z) per component."""
    if not sys.components:
        return C_value(sys) == 0
    C = C_value(sys)
    total_norm = F(0)
    ok = True
    for comp in sys.components:
        r = realize(comp.kind)
        s = la.scale(r.simple_gram, F(1, comp.d))
        n = comp.rank
        acc = [[F(0)] * n for _ in range(n)]
        for v, m in _component_vectors(comp):
            sv = la.mat_vec(s, v)
            total_norm += m * la.bilinear(v, s, v)
            for i in range(n):
                for j in range(n):
                    acc[i][j] += m * sv[i] * sv[j]
        ok = ok and la.to_matrix(acc) == la.scale(s, 2 * C)
    return ok and C == total_norm / (2 * sys.rank)
