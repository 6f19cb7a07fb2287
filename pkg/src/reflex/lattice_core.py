"""Even lattices, discriminant forms, overlattices and small-rank isometry.

Everything is exact. Vectors are written in the coordinates of the lattice
basis (row vectors); the dual lattice of ``L`` is spanned by the rows of
``gram⁻¹``.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

from . import linalg as la
from .linalg import Matrix

SUBGROUP_CAP = 4096
ISO_RANK_CAP = 6


class LatticeError(ValueError):
    pass


class ExprSyntaxError(LatticeError):
    def __init__(self, msg: str, pos: int):
        super().__init__(f"{msg} at position {pos}")
        self.pos = pos


# --------------------------------------------------------------------------
# expressions


@dataclass(frozen=True)
class Summand:
    name: str  # "U", "Z", "A3", "D4", "E8"
    scale: int = 1
    copies: int = 1
    dual: bool = False

    @property
    def family(self) -> str:
        return self.name[0]

    @property
    def rank(self) -> int:
        return 2 if self.name == "U" else 1 if self.name == "Z" else int(self.name[1:])

    def __str__(self) -> str:
        s = ("" if self.copies == 1 else str(self.copies)) + self.name + ("'" if self.dual else "")
        return s + (f"({self.scale})" if self.scale != 1 else "")


@dataclass(frozen=True)
class LatticeExpr:
    summands: tuple[Summand, ...]

    def __str__(self) -> str:
        return "+".join(str(s) for s in self.summands)

    @property
    def rank(self) -> int:
        return sum(s.rank * s.copies for s in self.summands)

    def blocks(self) -> list[Summand]:
        """Summands with copies expanded."""
        return [Summand(s.name, s.scale, 1, s.dual) for s in self.summands for _ in range(s.copies)]


_TOKEN = re.compile(r"\s*(?:(\d+)|([UZADE])|(\+)|(\()|(\))|('))")


def parse_lattice_expr(text: str) -> LatticeExpr:
    """Parse ``Term ("+" Term)*`` with ``Term := [int] Name ['] ["(" int ")"]``."""
    toks: list[tuple[str, str, int]] = []
    pos = 0
    text_stripped = text.rstrip()
    while pos < len(text_stripped):
        m = _TOKEN.match(text_stripped, pos)
        if not m or m.end() == pos:
            raise ExprSyntaxError(f"unexpected character {text_stripped[pos]!r}", pos)
        kind = ("int", "name", "+", "(", ")", "'")[next(i for i, g in enumerate(m.groups()) if g is not None)]
        start = m.start(m.lastindex)
        toks.append((kind, m.group(m.lastindex), start))
        pos = m.end()
    toks.append(("end", "", len(text_stripped)))
    i = 0

    def expect(kind):
        nonlocal i
        if toks[i][0] != kind:
            raise ExprSyntaxError(f"expected {kind}, got {toks[i][1] or 'end of input'!r}", toks[i][2])
        i += 1
        return toks[i - 1]

    summands = []
    while True:
        copies = 1
        if toks[i][0] == "int":
            copies = int(expect("int")[1])
            if copies == 0:
                raise ExprSyntaxError("zero copies", toks[i - 1][2])
        _, letter, npos = expect("name")
        name = letter
        if letter in "ADE":
            if toks[i][0] != "int":
                raise ExprSyntaxError(f"{letter} needs a rank", toks[i][2])
            n = int(expect("int")[1])
            if (letter == "A" and n < 1) or (letter == "D" and n < 4) or (letter == "E" and n not in (6, 7, 8)):
                raise ExprSyntaxError(f"invalid rank {letter}{n}", npos)
            name = f"{letter}{n}"
        dual = False
        if toks[i][0] == "'":
            expect("'")
            dual = True
        sc = 1
        if toks[i][0] == "(":
            expect("(")
            _, val, vpos = expect("int")
            sc = int(val)
            if sc == 0:
                raise ExprSyntaxError("zero scale", vpos)
            expect(")")
        summands.append(Summand(name, sc, copies, dual))
        if toks[i][0] == "+":
            expect("+")
            continue
        expect("end")
        break
    return LatticeExpr(tuple(summands))


def standard_gram(name: str) -> Matrix:
    """Standard Gram matrices; root lattices have minimal norm 2."""
    if name == "U":
        return ((0, 1), (1, 0))
    if name == "Z":
        return ((1,),)
    fam, n = name[0], int(name[1:])
    g = [[0] * n for _ in range(n)]
    for i in range(n):
        g[i][i] = 2
    if fam == "A":
        edges = [(i, i + 1) for i in range(n - 1)]
    elif fam == "D":
        edges = [(i, i + 1) for i in range(n - 2)] + [(n - 3, n - 1)]
    elif fam == "E":
        # Bourbaki labelling 1-3-4-5-6-7-8 with 2 attached to 4
        edges = [(0, 2), (1, 3), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7)]
        edges = [(i, j) for i, j in edges if i < n and j < n]
    else:
        raise LatticeError(f"unknown lattice {name}")
    for i, j in edges:
        g[i][j] = g[j][i] = -1
    return la.to_matrix(g)


def _d_basis(n: int) -> Matrix:
    """Standard basis of D_n inside Z^n (rows), matching ``standard_gram('Dn')``."""
    rows = []
    for i in range(n - 1):
        r = [0] * n
        r[i], r[i + 1] = 1, -1
        rows.append(r)
    r = [0] * n
    r[n - 2], r[n - 1] = 1, 1
    rows.append(r)
    return la.to_matrix(rows)


# --------------------------------------------------------------------------
# lattices


@dataclass(frozen=True)
class EvenLattice:
    """Even integral lattice given by its Gram matrix.

    ``coords`` optionally records a basis of this lattice inside a parent
    lattice (rational rows in the parent's coordinates); it does not take
    part in equality.
    """

    gram: Matrix
    definiteness: str = "general"
    name: str | None = field(default=None, compare=False)
    coords: Matrix | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        g = la.to_matrix(self.gram)
        object.__setattr__(self, "gram", g)
        n = len(g)
        if n == 0 or any(len(r) != n for r in g):
            raise LatticeError("gram must be a nonempty square matrix")
        if any(not isinstance(x, int) for r in g for x in r):
            raise LatticeError("gram entries must be integers")
        if not la.is_symmetric(g):
            raise LatticeError("gram is not symmetric")
        if any(g[i][i] % 2 for i in range(n)):
            raise LatticeError("lattice is not even")
        if la.det(g) == 0:
            raise LatticeError("gram is degenerate")
        if self.definiteness == "positive-definite":
            for k in range(1, n + 1):
                if la.det(tuple(r[:k] for r in g[:k])) <= 0:
                    raise LatticeError("gram is not positive definite")

    @property
    def rank(self) -> int:
        return len(self.gram)

    @cached_property
    def det(self) -> int:
        return la.det(self.gram)

    @cached_property
    def is_positive_definite(self) -> bool:
        n = self.rank
        return all(la.det(tuple(r[:k] for r in self.gram[:k])) > 0 for k in range(1, n + 1))

    def rescale(self, n: int) -> "EvenLattice":
        return EvenLattice(la.scale(self.gram, n), self.definiteness,
                           f"{self.name}({n})" if self.name else None)

    def __str__(self) -> str:
        return self.name or f"EvenLattice(rank={self.rank}, det={self.det})"


@dataclass(frozen=True)
class RationalLattice:
    """Lattice spanned by rational ``basis`` rows in an ambient rational space
    with Gram ``ambient``."""

    basis: Matrix
    ambient: Matrix
    name: str | None = field(default=None, compare=False)

    @property
    def rank(self) -> int:
        return len(self.basis)

    @cached_property
    def gram(self) -> Matrix:
        return la.normalize_matrix(la.congruent(la.frac_matrix(self.basis), la.frac_matrix(self.ambient)))


def direct_sum(*lats: EvenLattice) -> EvenLattice:
    pd = all(l.is_positive_definite for l in lats)
    names = [l.name for l in lats]
    name = "+".join(names) if all(names) else None
    return EvenLattice(la.block_diag(*(l.gram for l in lats)), "positive-definite" if pd else "general", name)


def direct_sum_rational(*lats: RationalLattice) -> RationalLattice:
    return RationalLattice(la.block_diag(*(l.basis for l in lats)), la.block_diag(*(l.ambient for l in lats)))


def _definiteness(expr: LatticeExpr) -> str:
    names = {s.name for s in expr.summands}
    if "U" not in names:
        return "positive-definite"
    if names == {"U"}:
        return "hyperbolic-(1,1)-block"
    return "general"


def build_lattice(expr: LatticeExpr | str) -> EvenLattice:
    if isinstance(expr, str):
        expr = parse_lattice_expr(expr)
    if any(s.dual for s in expr.summands):
        raise LatticeError("dual summands do not form an even lattice; use build_rational")
    blocks = [la.scale(standard_gram(b.name), b.scale) for b in expr.blocks()]
    return EvenLattice(la.block_diag(*blocks), _definiteness(expr), str(expr))


def build_rational(expr: LatticeExpr | str) -> RationalLattice:
    """Lattice with possibly dual summands, as rows in its own ambient space."""
    if isinstance(expr, str):
        expr = parse_lattice_expr(expr)
    bases, ambients = [], []
    for b in expr.blocks():
        g = la.scale(standard_gram(b.name), b.scale)
        bases.append(la.inverse(g) if b.dual else la.identity(len(g)))
        ambients.append(g)
    return RationalLattice(la.block_diag(*bases), la.block_diag(*ambients), str(expr))


def root_count(lat: EvenLattice, norm: int = 2) -> int:
    return sum(1 for _, n in la.short_vectors(lat.gram, norm) if n == norm)


# --------------------------------------------------------------------------
# discriminant forms


def _mod2(x) -> Fraction:
    x = Fraction(x)
    return x - 2 * (x.numerator // (2 * x.denominator))


def _mod1(x) -> Fraction:
    x = Fraction(x)
    return x - (x.numerator // x.denominator)


@dataclass(frozen=True)
class DiscriminantForm:
    """L'/L with its Q/2Z-valued quadratic form.

    Elements are tuples ``(c_1, ..., c_m)`` with ``0 <= c_i < orders[i]``;
    generator ``i`` lifts to the dual vector ``generators[i]`` (coordinates in
    the lattice basis).
    """

    orders: tuple[int, ...]
    generators: Matrix
    gram: Matrix
    reducer: Matrix  # rows of U for the nontrivial invariant factors

    @property
    def order(self) -> int:
        r = 1
        for d in self.orders:
            r *= d
        return r

    @property
    def zero(self) -> tuple[int, ...]:
        return (0,) * len(self.orders)

    def elements(self) -> Iterable[tuple[int, ...]]:
        return itertools.product(*(range(d) for d in self.orders))

    def lift(self, x: Sequence[int]) -> tuple[Fraction, ...]:
        n = len(self.gram)
        v = [Fraction(0)] * n
        for c, g in zip(x, self.generators):
            if c:
                for j in range(n):
                    v[j] += c * g[j]
        return tuple(v)

    def reduce(self, v: Sequence) -> tuple[int, ...]:
        """Class of a dual vector ``v`` (lattice coordinates)."""
        y = la.mat_vec(la.frac_matrix(self.gram), v)
        if any(Fraction(t).denominator != 1 for t in y):
            raise LatticeError("vector is not in the dual lattice")
        c = la.mat_vec(self.reducer, [int(t) for t in y])
        return tuple(int(ci) % d for ci, d in zip(c, self.orders))

    def add(self, x, y) -> tuple[int, ...]:
        return tuple((a + b) % d for a, b, d in zip(x, y, self.orders))

    def mul(self, k: int, x) -> tuple[int, ...]:
        return tuple((k * a) % d for a, d in zip(x, self.orders))

    def neg(self, x) -> tuple[int, ...]:
        return self.mul(-1, x)

    def q(self, x) -> Fraction:
        v = self.lift(x)
        return _mod2(la.bilinear(v, self.gram, v))

    def b(self, x, y) -> Fraction:
        return _mod1(la.bilinear(self.lift(x), self.gram, self.lift(y)))

    def element_order(self, x) -> int:
        o = 1
        for c, d in zip(x, self.orders):
            k = d // _gcd(c, d)
            o = o * k // _gcd(o, k)
        return o

    def to_json(self) -> dict:
        gens = [tuple(int(i == j) for j in range(len(self.orders))) for i in range(len(self.orders))]
        return {"orders": list(self.orders),
                "q": {",".join(map(str, g)): rational_str(self.q(g)) for g in gens}}


def _gcd(a: int, b: int) -> int:
    from math import gcd
    return gcd(a, b)


def rational_str(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def discriminant_form(lat: EvenLattice) -> DiscriminantForm:
    g = lat.gram
    diag, u, v = la.smith_normal_form(g)
    # U·G·V = D: generator i of L'/L lifts to column i of V divided by d_i
    keep = [i for i, d in enumerate(diag) if abs(d) > 1]
    orders = tuple(abs(diag[i]) for i in keep)
    gens = tuple(tuple(Fraction(v[r][i], diag[i]) for r in range(len(g))) for i in keep)
    reducer = tuple(u[i] for i in keep)
    return DiscriminantForm(orders, la.normalize_matrix(gens), g, reducer)


def length_and_exponent(form: DiscriminantForm) -> tuple[int, int]:
    """Minimal number of generators and exponent of the discriminant group."""
    if not form.orders:
        return 0, 1
    # invariant factors from SNF are already a minimal generating system
    return len(form.orders), max(form.orders)


def is_maximal_even(lat: EvenLattice) -> bool:
    form = discriminant_form(lat)
    return not any(form.q(x) == 0 for x in form.elements() if any(x))


# --------------------------------------------------------------------------
# overlattices


def _reduce_mod1(v: Sequence) -> tuple[Fraction, ...]:
    return tuple(_mod1(x) for x in v)


def _quotient_elements(gens: Sequence[Sequence], cap: int) -> list[tuple[Fraction, ...]]:
    """Elements of (Z^n + span(gens)) / Z^n, as vectors with entries in [0, 1)."""
    n = len(gens[0]) if gens else 0
    zero = tuple(Fraction(0) for _ in range(n))
    seen = {zero}
    frontier = [zero]
    gens = [_reduce_mod1(g) for g in gens]
    gens = [g for g in gens if any(g)]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = _reduce_mod1([a + b for a, b in zip(x, g)])
                if y not in seen:
                    seen.add(y)
                    if len(seen) > cap:
                        raise LatticeError(f"quotient group exceeds cap {cap}")
                    nxt.append(y)
        frontier = nxt
    return sorted(seen)


def _isotropic_subgroups(elements, add, good) -> list[frozenset]:
    """All subgroups made only of elements satisfying ``good``."""
    zero = elements[0]
    iso = [x for x in elements if x != zero and good(x)]
    start = frozenset([zero])
    found = {start}
    frontier = [start]
    while frontier:
        nxt = []
        for h in frontier:
            for x in iso:
                if x in h:
                    continue
                new = set(h)
                layer = set(h)
                ok = True
                while True:
                    layer = {add(a, x) for a in layer}
                    if layer <= new:
                        break
                    if not all(good(y) or y == zero for y in layer):
                        ok = False
                        break
                    new |= layer
                if not ok:
                    continue
                fs = frozenset(new)
                if fs not in found:
                    found.add(fs)
                    nxt.append(fs)
        frontier = nxt
    return sorted(found, key=lambda s: (len(s), sorted(s)))


def _in_window(q: EvenLattice, p_basis: Matrix, cap: int):
    g = la.frac_matrix(q.gram)
    elems = _quotient_elements(p_basis, cap)

    def good(x):
        if any(Fraction(t).denominator != 1 for t in la.mat_vec(g, x)):
            return False
        n2 = la.bilinear(x, g, x)
        return Fraction(n2).denominator == 1 and n2 % 2 == 0

    def add(a, b):
        return _reduce_mod1([s + t for s, t in zip(a, b)])

    out = []
    n = q.rank
    for sub in _isotropic_subgroups(elems, add, good):
        gens = [tuple(int(i == j) for j in range(n)) for i in range(n)] + [x for x in sub if any(x)]
        basis = la.lattice_basis(gens)
        gram = la.normalize_matrix(la.congruent(la.frac_matrix(basis), g))
        lat = EvenLattice(gram, q.definiteness, None, basis)
        out.append(lat)
    return out


def lattices_between(q: EvenLattice, p: RationalLattice, cap: int = SUBGROUP_CAP,
                     maximal_only: bool = False, dedupe: bool = True) -> list[EvenLattice]:
    """Even lattices T with Q <= T <= P. ``p.basis`` is in Q's coordinates."""
    if p.ambient != q.gram and la.normalize_matrix(la.frac_matrix(p.ambient)) != q.gram:
        raise LatticeError("P must be given in the coordinates of Q")
    inv = la.inverse(p.basis)
    if any(Fraction(x).denominator != 1 for r in inv for x in r):
        raise LatticeError("Q is not contained in P")
    lats = _in_window(q, p.basis, cap)
    if maximal_only:
        lats = [t for t in lats if is_maximal_even(t)]
    if dedupe:
        lats = dedupe_lattices(lats)
    return lats


def even_overlattices(lat: EvenLattice, cap: int = SUBGROUP_CAP) -> list[EvenLattice]:
    """One overlattice per isotropic subgroup of the discriminant form."""
    if abs(lat.det) > cap:
        raise LatticeError(f"discriminant group of order {abs(lat.det)} exceeds cap {cap}")
    dual = RationalLattice(la.inverse(lat.gram), lat.gram)
    return _in_window(lat, dual.basis, cap)


# --------------------------------------------------------------------------
# isometry


def reduced(lat: EvenLattice) -> tuple[Matrix, Matrix]:
    """LLL-reduced (transform, gram)."""
    return la.lll_reduce(lat.gram)


def invariants(lat: EvenLattice) -> tuple:
    counts = {}
    for _, n in la.short_vectors(lat.gram, 4):
        counts[n] = counts.get(n, 0) + 1
    return (lat.rank, lat.det, tuple(sorted(counts.items())))


def _blocks(gram: Matrix) -> list[list[int]]:
    n = len(gram)
    seen, comps = set(), []
    for s in range(n):
        if s in seen:
            continue
        stack, comp = [s], []
        seen.add(s)
        while stack:
            i = stack.pop()
            comp.append(i)
            for j in range(n):
                if j not in seen and gram[i][j] != 0:
                    seen.add(j)
                    stack.append(j)
        comps.append(sorted(comp))
    return comps


def orthogonal_blocks(lat: EvenLattice) -> list[EvenLattice]:
    """Split along the given basis into mutually orthogonal blocks (after LLL
    reduction for positive definite lattices)."""
    out = []
    for comp in _blocks(lat.gram):
        g = tuple(tuple(lat.gram[i][j] for j in comp) for i in comp)
        if lat.is_positive_definite:
            _, g = la.lll_reduce(g)
        for sub in _blocks(g):
            out.append(EvenLattice(tuple(tuple(g[i][j] for j in sub) for i in sub), lat.definiteness))
    return out


def _iso_search(g1: Matrix, g2: Matrix) -> bool:
    n = len(g1)
    if n != len(g2):
        return False
    maxnorm = max(g1[i][i] for i in range(n))
    vecs = la.short_vectors(g2, maxnorm)
    by_norm: dict = {}
    for v, nm in vecs:
        by_norm.setdefault(nm, []).append(v)
    g2f = g2
    chosen: list = []

    def rec(i):
        if i == n:
            return True
        for v in by_norm.get(g1[i][i], []):
            if all(la.bilinear(v, g2f, w) == g1[i][j] for j, w in enumerate(chosen)):
                chosen.append(v)
                if rec(i + 1):
                    return True
                chosen.pop()
        return False

    return rec(0)


def is_isomorphic_small(l1: EvenLattice, l2: EvenLattice, rank_cap: int = ISO_RANK_CAP) -> bool:
    if max(l1.rank, l2.rank) > rank_cap:
        raise LatticeError(f"rank above isometry cap {rank_cap}")
    if l1.rank != l2.rank or l1.det != l2.det:
        return False
    if not (l1.is_positive_definite and l2.is_positive_definite):
        raise LatticeError("isometry test needs positive definite lattices")
    _, g1 = la.lll_reduce(l1.gram)
    _, g2 = la.lll_reduce(l2.gram)
    if g1 == g2:
        return True
    if invariants(EvenLattice(g1)) != invariants(EvenLattice(g2)):
        return False
    # equal determinants make any Gram-matching vector system a basis
    return _iso_search(g1, g2)


def is_isomorphic(l1: EvenLattice, l2: EvenLattice, rank_cap: int = ISO_RANK_CAP) -> tuple[bool, bool]:
    """Isometry via orthogonal block matching.

    Returns ``(verdict, canonical)``; ``canonical`` is False when some block
    above the rank cap was compared by invariants only.
    """
    if l1.rank != l2.rank or l1.det != l2.det:
        return False, True
    if l1.gram == l2.gram:
        return True, True
    b1 = orthogonal_blocks(l1)
    b2 = orthogonal_blocks(l2)
    if sorted(b.rank for b in b1) != sorted(b.rank for b in b2):
        if max(l1.rank, l2.rank) <= rank_cap:
            return is_isomorphic_small(l1, l2, rank_cap), True
        return invariants(l1) == invariants(l2), False
    canonical = True
    remaining = list(b2)
    for blk in sorted(b1, key=lambda b: -b.rank):
        hit = None
        for j, other in enumerate(remaining):
            if other.rank != blk.rank or other.det != blk.det:
                continue
            if other.gram == blk.gram:
                hit = j
                break
            if blk.rank <= rank_cap:
                if is_isomorphic_small(blk, other, rank_cap):
                    hit = j
                    break
            elif invariants(blk) == invariants(other):
                canonical = False
                hit = j
                break
        if hit is None:
            return False, canonical
        remaining.pop(hit)
    return True, canonical


def dedupe_lattices(lats: Sequence[EvenLattice], rank_cap: int = ISO_RANK_CAP) -> list[EvenLattice]:
    out: list[EvenLattice] = []
    for t in lats:
        if not any(is_isomorphic(t, s, rank_cap)[0] for s in out):
            out.append(t)
    return out


def identify(lat: EvenLattice, names: Iterable[str]) -> str | None:
    """First expression in ``names`` whose lattice is isometric to ``lat``."""
    for nm in names:
        cand = build_lattice(nm)
        if cand.rank == lat.rank and cand.det == lat.det and is_isomorphic(lat, cand)[0]:
            return nm
    return None


# --------------------------------------------------------------------------
# windows from expressions (CLI)


def window_from_exprs(qexpr: str, pexpr: str) -> tuple[EvenLattice, RationalLattice]:
    """Embed P (given blockwise) over Q.

    Supported block pairs: X over X, X' over X, nZ(s) over D_n(s) and
    D_n'(2s) over nA1(s).
    """
    qe, pe = parse_lattice_expr(qexpr), parse_lattice_expr(pexpr)
    qb, pb = qe.blocks(), pe.blocks()
    q = build_lattice(qe)
    bases = []
    i = j = 0
    while i < len(qb):
        b = qb[i]
        if j < len(pb) and pb[j].name == b.name and pb[j].scale == b.scale:
            g = standard_gram(b.name)
            bases.append(la.inverse(g) if pb[j].dual else la.identity(len(g)))
            i += 1
            j += 1
            continue
        if b.family == "D" and all(j + k < len(pb) and pb[j + k].name == "Z" and pb[j + k].scale == b.scale
                                   and not pb[j + k].dual for k in range(b.rank)):
            bases.append(la.inverse(_d_basis(b.rank)))
            i += 1
            j += b.rank
            continue
        if j < len(pb) and pb[j].family == "D" and pb[j].dual and b.name == "A1":
            n = pb[j].rank
            run = qb[i:i + n]
            if len(run) == n and all(r.name == "A1" and r.scale * 2 == pb[j].scale for r in run):
                # D_n'(2s) in the basis e_i of nA1(s)
                bases.append(la.transpose(la.inverse(_d_basis(n))))
                i += n
                j += 1
                continue
        raise LatticeError(f"cannot place {pexpr!r} over {qexpr!r} at block {b}")
    if j != len(pb):
        raise LatticeError("P has extra blocks")
    return q, RationalLattice(la.block_diag(*bases), q.gram, str(pe))


def gram_json(g: Matrix) -> list:
    return [[rational_str(x) if isinstance(x, Fraction) and x.denominator != 1 else int(x) for x in r] for r in g]


# --------------------------------------------------------------------------
# orthogonal decomposition and names


def indecomposable_summands(lat: EvenLattice) -> list[EvenLattice]:
    """Eichler decomposition of a positive definite lattice.

    The reduced basis is first split into orthogonal blocks. Inside a block,
    indecomposable vectors up to the longest basis vector generate it, and
    the components of their non-orthogonality graph span the unique
    indecomposable summands.
    """
    if not lat.is_positive_definite:
        raise LatticeError("decomposition needs a positive definite lattice")
    out = []
    for blk in orthogonal_blocks(lat):
        out.extend(_split_block(blk.gram) if blk.rank > 1 else [blk])
    out.sort(key=lambda b: (b.rank, b.det, b.gram))
    return out


def _split_block(g: Matrix) -> list[EvenLattice]:
    bound = max(g[i][i] for i in range(len(g)))
    vecs = la.short_vectors(g, bound)
    indec = []
    for v, nv in vecs:
        if next(x for x in v if x) < 0:
            continue
        if not any(nx < nv and la.bilinear(x, g, v) == nx for x, nx in vecs):
            indec.append(v)
    comps: list[list] = []
    for v in indec:
        linked = [c for c in comps if any(la.bilinear(v, g, w) != 0 for w in c)]
        merged = [v] + [w for c in linked for w in c]
        comps = [c for c in comps if not any(c is l for l in linked)] + [merged]
    out = []
    for c in comps:
        basis = la.lattice_basis(c)
        gram = la.normalize_matrix(la.congruent(la.frac_matrix(basis), la.frac_matrix(g)))
        _, red = la.lll_reduce(gram)
        out.append(EvenLattice(red, "positive-definite"))
    return out


_ROOT_DETS = {"A": lambda n: n + 1, "D": lambda n: 4, "E": lambda n: 9 - n}


def _integer_root(x: int, r: int) -> int | None:
    m = round(x ** (1.0 / r))
    for c in (m - 1, m, m + 1):
        if c >= 1 and c ** r == x:
            return c
    return None


def _label_indecomposable(blk: EvenLattice) -> str:
    n = blk.rank
    for fam in "ADE":
        if (fam == "D" and n < 4) or (fam == "E" and n not in (6, 7, 8)):
            continue
        base = _ROOT_DETS[fam](n)
        if blk.det % base:
            continue
        m = _integer_root(blk.det // base, n)
        if m is None:
            continue
        name = f"{fam}{n}" if m == 1 else f"{fam}{n}({m})"
        if is_isomorphic(blk, build_lattice(name))[0]:
            return name
    return "[" + ";".join(",".join(str(x) for x in r) for r in blk.gram) + "]"


def label_lattice(lat: EvenLattice) -> str:
    """Name such as ``2A1+A2(3)`` built from the indecomposable summands."""
    labels = [_label_indecomposable(b) for b in indecomposable_summands(lat)]
    counts: dict[str, int] = {}
    for s in labels:
        counts[s] = counts.get(s, 0) + 1

    def key(s):
        m = re.match(r"([ADE])(\d+)(?:\((\d+)\))?$", s)
        return (0, m.group(1), int(m.group(2)), int(m.group(3) or 1)) if m else (1, s, 0, 0)

    return "+".join((f"{c}{s}" if c > 1 else s) for s, c in sorted(counts.items(), key=lambda sc: key(sc[0])))


def forms_isomorphic(f1: DiscriminantForm, f2: DiscriminantForm) -> bool:
    """Isometry of finite quadratic forms by backtracking over generator images.

    A form-preserving homomorphism out of a nondegenerate form is injective,
    so matching q on generators and b on pairs suffices once the groups have
    the same invariant factors.
    """
    if f1.orders != f2.orders:
        return False
    n = len(f1.orders)
    pool = list(f2.elements())
    images: list = []

    def rec(i: int) -> bool:
        if i == n:
            return True
        g = tuple(int(j == i) for j in range(n))
        for y in pool:
            if f1.orders[i] % f2.element_order(y):
                continue
            if f2.q(y) != f1.q(g):
                continue
            if any(f2.b(y, images[j]) != f1.b(g, tuple(int(t == j) for t in range(n))) for j in range(i)):
                continue
            images.append(y)
            if rec(i + 1):
                return True
            images.pop()
        return False

    return rec(0)
