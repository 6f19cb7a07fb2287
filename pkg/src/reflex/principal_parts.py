"""Principal parts of Borcherds-product inputs on a discriminant form.

Entries are keyed by (γ, n) with γ in the elementary-divisor coordinates of
``discriminant_form(lattice)`` and n a negative rational.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from . import linalg as la
from .lattice_core import DiscriminantForm, EvenLattice, LatticeError, discriminant_form, gram_json, rational_str

F = Fraction


class PrincipalPartError(ValueError):
    pass


@dataclass(frozen=True)
class PrincipalPart:
    lattice: EvenLattice
    entries: Mapping[tuple[tuple[int, ...], Fraction], int]
    c00: int = 0
    form: DiscriminantForm = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        form = discriminant_form(self.lattice)
        object.__setattr__(self, "form", form)
        clean = {}
        for (g, n), c in self.entries.items():
            if len(g) != len(form.orders):
                raise PrincipalPartError(f"γ={tuple(g)} does not match group orders {form.orders}")
            g = tuple(int(x) % d for x, d in zip(g, form.orders))
            n = F(n)
            if n >= 0:
                raise PrincipalPartError("principal-part exponents must be negative")
            if (n + form.q(g) / 2).denominator != 1:
                raise PrincipalPartError(f"n={n} is not congruent to -q(γ)/2 mod 1 for γ={g}")
            if c:
                clean[(g, n)] = clean.get((g, n), 0) + int(c)
        for (g, n), c in clean.items():
            if clean.get((form.neg(g), n), 0) != c:
                raise PrincipalPartError(f"c(γ,n) != c(-γ,n) at γ={g}, n={n}")
        if self.c00 < 0:
            raise PrincipalPartError("c(0,0) must be non-negative")
        object.__setattr__(self, "entries", dict(sorted(clean.items())))

    @property
    def c0m1(self) -> int:
        return self.entries.get((self.form.zero, F(-1)), 0)

    def get(self, g, n) -> int:
        return self.entries.get((tuple(g), F(n)), 0)

    def to_json(self) -> dict:
        return {
            "lattice": gram_json(self.lattice.gram), "orders": list(self.form.orders),
            "entries": [{"gamma": list(g), "n": rational_str(n), "c": c} for (g, n), c in self.entries.items()],
            "c00": self.c00, "c0m1": self.c0m1,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "PrincipalPart":
        lat = EvenLattice(obj["lattice"], "positive-definite")
        pp = cls(lat, {(tuple(e["gamma"]), F(e["n"])): int(e["c"]) for e in obj.get("entries", [])},
                 int(obj.get("c00", 0)))
        if "orders" in obj and tuple(obj["orders"]) != pp.form.orders:
            raise PrincipalPartError(f"orders {obj['orders']} do not match the lattice {pp.form.orders}")
        if "c0m1" in obj and int(obj["c0m1"]) != pp.c0m1:
            raise PrincipalPartError("c0m1 disagrees with the (0,-1) entry")
        return pp


def classify_entry(form: DiscriminantForm, g, n) -> tuple[str, int] | None:
    """('r', t) when n = -1/t and ord γ = t; ('s', t) when n = -1/(4t) and
    ord γ = 2t; None otherwise."""
    o = form.element_order(g)
    if F(n) == F(-1, o):
        return "r", o
    if o % 2 == 0 and F(n) == F(-1, 2 * o):
        return "s", o // 2
    return None


def reflective_shape_check(pp: PrincipalPart) -> dict:
    form = pp.form
    rows, failures = [], []
    for (g, n), c in pp.entries.items():
        kind = classify_entry(form, g, n)
        row = {"gamma": list(g), "n": rational_str(n), "c": c, "type": None, "t": None}
        if kind is None:
            failures.append({"gamma": list(g), "n": rational_str(n), "reason": "unclassifiable"})
        else:
            row["type"], row["t"] = kind
            t = kind[1]
            if kind[0] == "r" and c < 0:
                failures.append({"gamma": list(g), "n": rational_str(n), "reason": "negative type-r coefficient"})
            if kind[0] == "s":
                total = pp.get(form.mul(2, g), F(-1, t)) + c
                if total < 0:
                    failures.append({"gamma": list(g), "n": rational_str(n),
                                     "reason": f"c(2γ,-1/{t}) + c(γ,-1/{4 * t}) = {total} < 0"})
        rows.append(row)
    return {"entries": rows, "failures": failures, "pass": not failures}


def _to_overlattice_coords(k1: EvenLattice, x) -> tuple[Fraction, ...]:
    # x = Bᵀ y for the coordinate matrix B of K1 in K
    b = la.frac_matrix(k1.coords)
    return tuple(la.mat_vec(la.inverse(la.transpose(b)), x))


def _check_embedding(k: EvenLattice, k1: EvenLattice) -> None:
    if k1.coords is None:
        raise PrincipalPartError("overlattice carries no embedding coordinates")
    b = la.frac_matrix(k1.coords)
    if len(b) != k.rank or any(len(r) != k.rank for r in b):
        raise PrincipalPartError("embedding has the wrong shape")
    if la.normalize_matrix(la.congruent(b, la.frac_matrix(k.gram))) != k1.gram:
        raise PrincipalPartError("embedding does not carry the form of K to K1")
    binv = la.inverse(b)
    if any(F(x).denominator != 1 for r in binv for x in r):
        raise PrincipalPartError("K is not contained in K1")


def uparrow(pp: PrincipalPart, k1: EvenLattice) -> PrincipalPart:
    """Push a principal part on K to an even overlattice K1 (rows of
    ``k1.coords`` span K1 in K's coordinates): c'(γ', n) = Σ c(x, n) over
    x ∈ K1'/K mapping to γ'."""
    k = pp.lattice
    _check_embedding(k, k1)
    f1 = discriminant_form(k1)
    out: dict = {}
    for (g, n), c in pp.entries.items():
        x = pp.form.lift(g)
        y = _to_overlattice_coords(k1, x)
        try:
            g1 = f1.reduce(y)
        except LatticeError:
            continue  # γ is not in K1'
        out[(g1, n)] = out.get((g1, n), 0) + c
    return PrincipalPart(EvenLattice(k1.gram, k1.definiteness, k1.name), out, pp.c00)


def compose_embeddings(k1: EvenLattice, k2: EvenLattice) -> EvenLattice:
    """K2 ⊇ K1 ⊇ K with coords given stepwise; return K2 with coords in K."""
    coords = la.normalize_matrix(la.mat_mul(la.frac_matrix(k2.coords), la.frac_matrix(k1.coords)))
    return EvenLattice(k2.gram, k2.definiteness, k2.name, coords)


def identity_embedding(k: EvenLattice) -> EvenLattice:
    return EvenLattice(k.gram, k.definiteness, k.name, la.identity(k.rank))


def weight_of(pp: PrincipalPart) -> Fraction:
    return F(pp.c00, 2)


def rank_bound_rule(pp: PrincipalPart | int, l: int) -> dict:
    """Without a c(0,-1) term the obstruction space has weight 7 - l/2, which
    forces l <= 13."""
    c0m1 = pp if isinstance(pp, int) else pp.c0m1
    if c0m1 != 0:
        return {"applicable": False, "rule": "l <= 13 required", "violation": False}
    return {"applicable": True, "rule": "l <= 13 required", "violation": l >= 14}
