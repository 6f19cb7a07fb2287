"""Irreducible root systems realized in simple-root coordinates.

The bilinear form is normalized so that long roots have norm 2; in simply
laced systems every root counts as long.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from . import linalg as la
from .lattice_core import EvenLattice, RationalLattice, rational_str
from .linalg import Matrix

F = Fraction


class RootSystemError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class RootSystemKind:
    family: str
    rank: int

    def __post_init__(self):
        f, n = self.family, self.rank
        ok = ((f == "A" and n >= 1) or (f == "B" and n >= 3) or (f == "C" and n >= 2)
              or (f == "D" and n >= 4) or (f == "E" and n in (6, 7, 8))
              or (f == "F" and n == 4) or (f == "G" and n == 2))
        if not ok:
            raise RootSystemError(f"invalid root system {f}{n}")

    @classmethod
    def parse(cls, text: str) -> "RootSystemKind":
        text = text.strip()
        try:
            return cls(text[0].upper(), int(text[1:]))
        except (IndexError, ValueError):
            raise RootSystemError(f"cannot parse root system {text!r}") from None

    def __str__(self) -> str:
        return f"{self.family}{self.rank}"

    @property
    def simply_laced(self) -> bool:
        return self.family in "ADE"


def _simple_gram(kind: RootSystemKind) -> Matrix:
    f, n = kind.family, kind.rank
    g = [[F(0)] * n for _ in range(n)]

    def link(i, j, v):
        g[i][j] = g[j][i] = F(v)

    if f in "ADE":
        from .lattice_core import standard_gram
        return la.frac_matrix(standard_gram(f"{f}{n}"))
    if f == "B":
        norms = [2] * (n - 1) + [1]
        for i in range(n - 1):
            link(i, i + 1, -1)
    elif f == "C":
        norms = [1] * (n - 1) + [2]
        for i in range(n - 2):
            link(i, i + 1, F(-1, 2))
        link(n - 2, n - 1, -1)
    elif f == "F":
        norms = [2, 2, 1, 1]
        link(0, 1, -1)
        link(1, 2, -1)
        link(2, 3, F(-1, 2))
    else:  # G2: short root first
        norms = [F(2, 3), 2]
        link(0, 1, -1)
    for i in range(n):
        g[i][i] = F(norms[i])
    return la.to_matrix(g)


@dataclass(frozen=True)
class RootSystemRealization:
    kind: RootSystemKind
    simple_gram: Matrix
    roots: tuple[tuple[int, ...], ...]
    long_flags: tuple[bool, ...]

    def ip(self, u, v) -> Fraction:
        return la.bilinear(u, self.simple_gram, v)

    @cached_property
    def positive(self) -> tuple[int, ...]:
        """Indices of positive roots (first nonzero coefficient > 0)."""
        return tuple(i for i, r in enumerate(self.roots) if next(x for x in r if x) > 0)

    @cached_property
    def positive_long(self) -> tuple[tuple[int, ...], ...]:
        return tuple(self.roots[i] for i in self.positive if self.long_flags[i])

    @cached_property
    def positive_short(self) -> tuple[tuple[int, ...], ...]:
        return tuple(self.roots[i] for i in self.positive if not self.long_flags[i])

    @property
    def n_long(self) -> int:
        return 2 * len(self.positive_long)

    @property
    def n_short(self) -> int:
        return 2 * len(self.positive_short)

    @cached_property
    def short_norm(self) -> Fraction | None:
        return self.ip(self.positive_short[0], self.positive_short[0]) if self.positive_short else None

    def _half_sum(self, roots) -> tuple[Fraction, ...]:
        n = self.kind.rank
        return tuple(F(sum(r[i] for r in roots), 2) for i in range(n))

    @cached_property
    def rho_l(self) -> tuple[Fraction, ...]:
        return self._half_sum(self.positive_long)

    @cached_property
    def rho_s(self) -> tuple[Fraction, ...]:
        return self._half_sum(self.positive_short)

    @cached_property
    def rho(self) -> tuple[Fraction, ...]:
        return tuple(a + b for a, b in zip(self.rho_l, self.rho_s))

    @cached_property
    def h_l(self) -> Fraction:
        return sum((self.ip(a, a) for a in self.positive_long), F(0)) / self.kind.rank

    @cached_property
    def h_s(self) -> Fraction:
        return sum((self.ip(b, b) for b in self.positive_short), F(0)) / self.kind.rank

    @property
    def h(self) -> Fraction:
        return self.h_l + self.h_s

    def to_json(self) -> dict:
        nll, nls, nss = rho_norms(self)
        return {
            "kind": str(self.kind), "roots": len(self.roots), "long_roots": self.n_long,
            "short_roots": self.n_short, "h_l": rational_str(self.h_l), "h_s": rational_str(self.h_s),
            "h": rational_str(self.h),
            "rho_norms": {"ll": rational_str(nll), "ls": rational_str(nls), "ss": rational_str(nss)},
        }


def _closed_form_count(kind: RootSystemKind) -> int:
    f, n = kind.family, kind.rank
    return {"A": n * (n + 1), "B": 2 * n * n, "C": 2 * n * n, "D": 2 * n * (n - 1),
            "E": {6: 72, 7: 126, 8: 240}.get(n, 0), "F": 48, "G": 12}[f]


def _closure(gram: Matrix, n: int, expected: int) -> list[tuple[int, ...]]:
    simple = [tuple(int(i == j) for j in range(n)) for i in range(n)]
    seen = set(simple) | {tuple(-x for x in s) for s in simple}
    frontier = list(seen)
    norms = [gram[i][i] for i in range(n)]
    limit = 10 * expected
    while frontier:
        nxt = []
        for v in frontier:
            gv = la.vec_mat(v, gram)
            for i in range(n):
                c = 2 * gv[i] / norms[i]
                if c.denominator != 1:
                    raise RootSystemError("non-crystallographic reflection")
                c = int(c)
                if not c:
                    continue
                w = tuple(x - (c if j == i else 0) for j, x in enumerate(v))
                if w not in seen:
                    seen.add(w)
                    nxt.append(w)
                    if len(seen) > limit:
                        raise RootSystemError("reflection closure did not terminate")
        frontier = nxt
    return sorted(seen, reverse=True)


_cache: dict[RootSystemKind, RootSystemRealization] = {}
_lock = threading.Lock()


def realize(kind: RootSystemKind | str) -> RootSystemRealization:
    if isinstance(kind, str):
        kind = RootSystemKind.parse(kind)
    hit = _cache.get(kind)
    if hit is not None:
        return hit
    gram = _simple_gram(kind)
    # reflections in simple roots generate the Weyl group
    roots = _closure(gram, kind.rank, _closed_form_count(kind))
    flags = tuple(la.bilinear(r, gram, r) == 2 for r in roots)
    real = RootSystemRealization(kind, gram, tuple(roots), flags)
    with _lock:
        _cache.setdefault(kind, real)
    return _cache[kind]


def verify_sum_rule(real: RootSystemRealization) -> bool:
    """Σ_{α>0 long} (Sα)(Sα)ᵀ = h_l·S, and the same for short roots."""
    s = real.simple_gram
    n = real.kind.rank

    def outer_sum(roots):
        acc = [[F(0)] * n for _ in range(n)]
        for r in roots:
            sr = la.mat_vec(s, r)
            for i in range(n):
                for j in range(n):
                    acc[i][j] += sr[i] * sr[j]
        return la.to_matrix(acc)

    ok_l = outer_sum(real.positive_long) == la.scale(s, real.h_l)
    ok_s = outer_sum(real.positive_short) == la.scale(s, real.h_s)
    return ok_l and ok_s


def rho_norms(real: RootSystemRealization) -> tuple[Fraction, Fraction, Fraction]:
    return (real.ip(real.rho_l, real.rho_l), real.ip(real.rho_l, real.rho_s), real.ip(real.rho_s, real.rho_s))


def q_p_lattices(kind: RootSystemKind | str, d: int = 1) -> tuple[EvenLattice, RationalLattice]:
    """Q(d) = lattice of long roots, P(d) = dual of the root lattice, both
    under the d-rescaled form; P is returned in Q's coordinates."""
    real = realize(kind)
    qbasis = la.lattice_basis(real.positive_long)
    s = real.simple_gram
    qgram = la.normalize_matrix(la.scale(la.congruent(la.frac_matrix(qbasis), s), d))
    # P = {x : <x, α_i> ∈ Z} has basis rows of S⁻¹ in simple-root coordinates
    pbasis = la.inverse(s)
    p_in_q = la.normalize_matrix(la.mat_mul(la.frac_matrix(pbasis), la.inverse(qbasis)))
    q = EvenLattice(qgram, "positive-definite", f"Q[{real.kind}]({d})")
    return q, RationalLattice(p_in_q, qgram, f"P[{real.kind}]({d})")


# Table of Q and P names for cross-checking the computed lattices.
TABLE_QP = {
    "A": ("A{n}", "A{n}'"), "B": ("D{n}", "{n}Z"), "C": ("{n}A1", "D{n}'(2)"), "D": ("D{n}", "D{n}'"),
    "E6": ("E6", "E6'"), "E7": ("E7", "E7'"), "E8": ("E8", "E8"), "G": ("A2", "A2"), "F": ("D4", "D4"),
}
