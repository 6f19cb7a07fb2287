"""Bounded search over fake root systems.

A search fixes a prefix of components (for instance two copies of
``(E8,a0;1)``) and fills the remaining rank with components drawn from
allowed kinds or fixed templates. Every fake Coxeter number must equal the
common value C, so once C is known the multiplicities of each component are
solved from ``hhat = C`` rather than searched, and the weight follows from C.
Systems that survive the numerical rules are matched against the lattices
their root-lattice window allows.
"""

from __future__ import annotations

import configparser
import itertools
import json
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, NamedTuple, Sequence

import sympy

from . import fixtures as fx
from . import linalg as la
from .fake_roots import FakeComponent, FakeRootError, FakeSystem, _has_b, _has_c, norm2_consistent, window_lattices
from .lattice_core import (EvenLattice, build_lattice, direct_sum, gram_json, indecomposable_summands, is_isomorphic,
                           is_maximal_even, label_lattice, rational_str)
from .root_systems import RootSystemError, RootSystemKind, q_p_lattices, realize, rho_norms

F = Fraction


class SearchError(ValueError):
    pass


class CandidateCapExceeded(SearchError):
    pass


# Rules in evaluation order; an exclusion always names the first one violated.
RULE_ORDER = (
    "root_norm_whitelist", "require_all_d", "eqA", "weight_half_integral", "positive_weight", "weight_equals",
    "multiplicity_rule", "singular_bound", "eqB",
    "lattice_window", "maximal", "norm2_consistency",
    "A1m_summand", "nonreflective_list", "pullback_rank2", "full_group",
)
TOGGLES = ("multiplicity_rule", "singular_bound", "eqB", "lattice_window", "norm2_consistency")
FIXTURE_RULES = ("A1m_summand", "nonreflective_list", "pullback_rank2", "full_group")
_FIXTURE_KEYS = {
    "A1m_summand": ("A1m_summand",), "nonreflective_list": ("nonreflective_list",),
    "pullback_rank2": ("A1m_summand",), "full_group": ("full_group", "d4_triality"),
}
CAP_KEYS = ("d_max", "mult_max", "candidate_cap")

A0 = sympy.Symbol("a0")


def _sym(text) -> sympy.Expr:
    if isinstance(text, bool):
        raise SearchError(f"bad expression {text!r}")
    if isinstance(text, int):
        return sympy.Integer(text)
    if isinstance(text, Fraction):
        return sympy.Rational(text.numerator, text.denominator)
    try:
        e = sympy.sympify(str(text), locals={"a0": A0, "beta0": A0})
    except (sympy.SympifyError, SyntaxError, TypeError) as exc:
        raise SearchError(f"cannot parse expression {text!r}") from exc
    if not e.free_symbols <= {A0}:
        raise SearchError(f"expression {text!r} may only involve a0")
    return e


@lru_cache(maxsize=None)
def _at(text: str, a0: int) -> Fraction:
    v = _sym(text).subs(A0, a0)
    if not v.is_Rational:
        raise SearchError(f"expression {text!r} is not rational at a0={a0}")
    return F(int(v.p), int(v.q))


def _frac(x) -> Fraction:
    try:
        return F(str(x))
    except (ValueError, ZeroDivisionError):
        raise SearchError(f"not a rational number: {x!r}") from None


# --------------------------------------------------------------------------
# specs


@dataclass(frozen=True)
class Template:
    """A component whose multiplicities are integers or expressions in a0."""

    kind: RootSystemKind
    d: int = 1
    a: str = "1"
    b: str | None = None
    c: str | None = None

    def __post_init__(self):
        if isinstance(self.kind, str):
            try:
                object.__setattr__(self, "kind", RootSystemKind.parse(self.kind))
            except RootSystemError as exc:
                raise SearchError(str(exc)) from None
        if not isinstance(self.d, int) or self.d < 1:
            raise SearchError("template d must be a positive integer")
        if _has_c(self.kind) and self.c is None:
            object.__setattr__(self, "c", "0")
        for name in ("a", "b", "c"):
            v = getattr(self, name)
            if v is not None:
                _sym(v)
                object.__setattr__(self, name, str(v))

    def values(self, a0: int) -> tuple[int, int | None, int | None]:
        out = []
        for v in (self.a, self.b, self.c):
            if v is None:
                out.append(None)
                continue
            x = _at(v, a0)
            if x.denominator != 1:
                raise SearchError(f"{self}: multiplicity {v} is not an integer at a0={a0}")
            out.append(int(x))
        return tuple(out)

    def component(self, a0: int) -> FakeComponent:
        a, b, c = self.values(a0)
        try:
            return FakeComponent(self.kind, self.d, a, b, c)
        except FakeRootError as exc:
            raise SearchError(f"{self} at a0={a0}: {exc}") from None

    def __str__(self) -> str:
        k = self.kind
        if k.family == "A" and k.rank == 1:
            return f"({k},{self.a}|{self.c};{self.d})"
        if k.family == "C":
            return f"({k},{self.a}|{self.c},{self.b};{self.d})"
        if self.b is not None:
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
    def from_json(cls, obj: dict) -> "Template":
        try:
            kind = RootSystemKind(str(obj["family"]).upper(), int(obj["rank"]))
        except (KeyError, ValueError, RootSystemError) as exc:
            raise SearchError(f"bad component {obj!r}: {exc}") from None
        return cls(kind, int(obj.get("d", 1)), obj.get("a", 1), obj.get("b"), obj.get("c"))


@dataclass(frozen=True)
class SearchSpec:
    """A finite search box together with the rules to apply.

    ``target_rank`` is the rank of the part filled by the search, that is the
    rank of the positive definite lattice L; prefix components sit outside it.
    """

    target_rank: int
    prefix: tuple[Template, ...] = ()
    a0_values: tuple[int, ...] = (1,)
    allowed_kinds: tuple[str, ...] = ("A", "B", "C", "D", "E", "F", "G")
    allowed_components: tuple[Template, ...] = ()
    d_max: int = 64
    mult_max: int = 256
    candidate_cap: int = 10 ** 7
    require_all_d: int | None = None
    root_norm_whitelist: tuple[Fraction, ...] | None = None
    weight_equals: str | None = None
    maximal: bool = False
    rules: tuple[str, ...] = TOGGLES
    fixture_rules: tuple[str, ...] = ()
    rank2_allowed: tuple[str, ...] = ("A2", "2A1")
    relations: bool = True
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(self.prefix))
        object.__setattr__(self, "allowed_components", tuple(self.allowed_components))
        object.__setattr__(self, "a0_values", tuple(sorted(set(int(x) for x in self.a0_values))))
        object.__setattr__(self, "allowed_kinds", tuple(self.allowed_kinds))
        object.__setattr__(self, "rules", tuple(r for r in TOGGLES if r in self.rules))
        object.__setattr__(self, "fixture_rules", tuple(r for r in FIXTURE_RULES if r in self.fixture_rules))
        if self.root_norm_whitelist is not None:
            object.__setattr__(self, "root_norm_whitelist",
                               tuple(sorted({_frac(x) for x in self.root_norm_whitelist}, reverse=True)))
        for name in ("target_rank", "d_max", "mult_max", "candidate_cap"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                raise SearchError(f"{name} must be a positive integer")
        if not self.a0_values or min(self.a0_values) < 0:
            raise SearchError("a0 values must be non-negative and non-empty")
        if self.require_all_d is not None and (not isinstance(self.require_all_d, int) or self.require_all_d < 1):
            raise SearchError("require_all_d must be a positive integer")
        for x in self.root_norm_whitelist or ():
            if x <= 0 or (2 / x).denominator != 1:
                raise SearchError(f"whitelist norm {x} is not of the form 2/t")
        for item in self.allowed_kinds:
            if len(item) == 1:
                if item not in "ABCDEFG":
                    raise SearchError(f"unknown family {item!r}")
            else:
                try:
                    RootSystemKind.parse(item)
                except RootSystemError as exc:
                    raise SearchError(str(exc)) from None
        if self.weight_equals is not None:
            _sym(self.weight_equals)
        bad = set(self.fixture_rules) | ({"maximal"} if self.maximal else set())
        if bad and "lattice_window" not in self.rules:
            raise SearchError("lattice filters need the lattice_window rule")
        for t in self.prefix:
            for a0 in self.a0_values:
                t.component(a0)
        if not self.allowed_kinds and not self.allowed_components:
            raise SearchError("nothing to search: no kinds and no components allowed")

    def weight_at(self, a0: int) -> Fraction | None:
        return None if self.weight_equals is None else _at(self.weight_equals, a0)

    def to_json(self) -> dict:
        return {
            "name": self.name, "target_rank": self.target_rank, "prefix": [t.to_json() for t in self.prefix],
            "a0_values": list(self.a0_values), "allowed_kinds": list(self.allowed_kinds),
            "allowed_components": [t.to_json() for t in self.allowed_components],
            "d_max": self.d_max, "mult_max": self.mult_max, "candidate_cap": self.candidate_cap,
            "require_all_d": self.require_all_d,
            "root_norm_whitelist": None if self.root_norm_whitelist is None
            else [rational_str(x) for x in self.root_norm_whitelist],
            "weight_equals": self.weight_equals, "maximal": self.maximal, "rules": list(self.rules),
            "fixture_rules": list(self.fixture_rules), "rank2_allowed": list(self.rank2_allowed),
            "relations": self.relations,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SearchSpec":
        if not isinstance(obj, dict):
            raise SearchError("a search spec must be a JSON object")
        known = set(cls.__dataclass_fields__) | {"a0_range"}
        unknown = set(obj) - known
        if unknown:
            raise SearchError(f"unknown spec fields: {sorted(unknown)}")
        if "target_rank" not in obj:
            raise SearchError("spec needs target_rank")
        kw = dict(obj)
        if "a0_range" in kw:
            rng = kw.pop("a0_range")
            if "a0_values" in kw:
                raise SearchError("give either a0_range or a0_values")
            try:
                lo, hi = (int(x) for x in rng)
            except (TypeError, ValueError):
                raise SearchError("a0_range must be [lo, hi]") from None
            kw["a0_values"] = tuple(range(lo, hi + 1))
        kw["prefix"] = tuple(Template.from_json(t) for t in kw.get("prefix", ()))
        kw["allowed_components"] = tuple(Template.from_json(t) for t in kw.get("allowed_components", ()))
        for key in ("allowed_kinds", "rules", "fixture_rules", "rank2_allowed", "a0_values"):
            if key in kw:
                kw[key] = tuple(kw[key])
        for key in ("fixture_rules", "rules"):
            allowed = FIXTURE_RULES if key == "fixture_rules" else TOGGLES
            extra = set(kw.get(key, ())) - set(allowed)
            if extra:
                raise SearchError(f"unknown {key}: {sorted(extra)}")
        try:
            return cls(**kw)
        except TypeError as exc:
            raise SearchError(str(exc)) from None

    def with_caps(self, caps: dict) -> "SearchSpec":
        return replace(self, **{k: int(v) for k, v in caps.items() if k in CAP_KEYS})


def load_config(path: str) -> dict[str, int]:
    """Read ``key = value`` cap overrides (d_max, mult_max, candidate_cap)."""
    parser = configparser.ConfigParser()
    with open(path, encoding="utf-8") as fh:
        parser.read_string("[reflex]\n" + fh.read())
    out = {}
    for key, val in parser["reflex"].items():
        if key not in CAP_KEYS:
            raise SearchError(f"unknown config key {key!r}")
        try:
            out[key] = int(val)
        except ValueError:
            raise SearchError(f"config value for {key} must be an integer") from None
        if out[key] < 1:
            raise SearchError(f"config value for {key} must be positive")
    return out


# --------------------------------------------------------------------------
# per-kind constants and light component arithmetic


@dataclass(frozen=True)
class _KD:
    kind: RootSystemKind
    rank: int
    h_l: Fraction
    h_s: Fraction
    n_long: int
    n_short: int
    nll: Fraction
    nls: Fraction
    nss: Fraction
    short_norm: Fraction | None
    has_b: bool
    has_c: bool


@lru_cache(maxsize=None)
def _kd(kind: RootSystemKind) -> _KD:
    r = realize(kind)
    nll, nls, nss = rho_norms(r)
    return _KD(kind, kind.rank, r.h_l, r.h_s, r.n_long, r.n_short, nll, nls, nss, r.short_norm,
               _has_b(kind), _has_c(kind))


def _hhat(kd: _KD, d: int, a: int, b: int, c: int) -> Fraction:
    return (a * kd.h_l + b * kd.h_s + F(c) * kd.h_l / 4) / d


def _rhat(kd: _KD, a: int, b: int, c: int) -> int:
    return (a + c) * kd.n_long + b * kd.n_short


def _rho(kd: _KD, d: int, a: int, b: int, c: int) -> Fraction:
    x = a + F(c, 2)
    return (x * x * kd.nll + 2 * x * b * kd.nls + b * b * kd.nss) / d


def _root_norms(kd: _KD, d: int, cflag: bool) -> list[Fraction]:
    out = [F(2, d)]
    if kd.has_b:
        out.append(kd.short_norm / d)
    if cflag:
        out.append(F(1, 2 * d))
    return out


def _mult_ok(d: int, a: int, a0: int) -> bool:
    return d != 1 or (a0 > 0 and a == a0)


@dataclass(frozen=True)
class SlotType:
    """A free component shape (kind, whether c is nonzero) or a fixed template."""

    kind: RootSystemKind
    cflag: bool = False
    template: Template | None = None

    def order_key(self):
        return (self.kind.family, self.kind.rank, self.template is not None, self.cflag, str(self.template or ""))

    def label(self) -> str:
        if self.template is not None:
            return str(self.template)
        return f"{self.kind}{'[c]' if self.cflag else ''}"


def _slot_types(spec: SearchSpec) -> list[SlotType]:
    kinds = set()
    for item in spec.allowed_kinds:
        if len(item) == 1:
            for n in range(1, spec.target_rank + 1):
                try:
                    kinds.add(RootSystemKind(item, n))
                except RootSystemError:
                    pass
        else:
            k = RootSystemKind.parse(item)
            if k.rank <= spec.target_rank:
                kinds.add(k)
    out = []
    for k in sorted(kinds):
        out.append(SlotType(k, False))
        if _has_c(k):
            out.append(SlotType(k, True))
    out += [SlotType(t.kind, False, t) for t in spec.allowed_components if t.kind.rank <= spec.target_rank]
    out.sort(key=SlotType.order_key)
    return out


def _shapes(types: Sequence[SlotType], rank: int, start: int = 0) -> Iterable[tuple[SlotType, ...]]:
    if rank == 0:
        yield ()
        return
    for i in range(start, len(types)):
        r = types[i].kind.rank
        if r <= rank:
            for rest in _shapes(types, rank - r, i):
                yield (types[i],) + rest


def _groups(shape: Sequence[SlotType]) -> list[tuple[SlotType, int]]:
    return [(st, len(list(g))) for st, g in itertools.groupby(shape)]


def _d_tuples(groups, dvals) -> Iterable[tuple[int, ...]]:
    parts = [list(itertools.combinations_with_replacement(dvals(st), m)) for st, m in groups]
    for combo in itertools.product(*parts):
        yield tuple(d for part in combo for d in part)


def shape_label(shape: Sequence[SlotType]) -> str:
    return "+".join(st.label() for st in shape)


# --------------------------------------------------------------------------
# evaluation shared by the pruned search and the naive oracle


class Option(NamedTuple):
    a: int
    b: int
    c: int
    rhat: int
    sr: int  # rhat + a·rank, the singular-bound share
    rho: Fraction  # ⟨ρ̂,ρ̂⟩/d
    mult: bool


def _option(kd: _KD, d: int, a: int, b: int, c: int, a0: int) -> Option:
    rh = _rhat(kd, a, b, c)
    return Option(a, b, c, rh, rh + a * kd.rank, _rho(kd, d, a, b, c), _mult_ok(d, a, a0))


class _Ctx:
    """Everything fixed once a0 is chosen."""

    def __init__(self, spec: SearchSpec, a0: int):
        self.spec = spec
        self.a0 = a0
        self.prefix = tuple(t.component(a0) for t in spec.prefix)
        self.pvals = tuple((_kd(c.kind), c.d, c.a, c.b or 0, c.c or 0) for c in self.prefix)
        hs = [_hhat(*v) for v in self.pvals]
        self.C = hs[0] if hs else None
        self.prefix_eqA = all(h == hs[0] for h in hs)
        self.prefix_mult = all(_mult_ok(d, a, a0) for _, d, a, _, _ in self.pvals)
        self.P_rhat = sum(_rhat(kd, a, b, c) for kd, d, a, b, c in self.pvals)
        self.P_ar = sum(a * kd.rank for kd, d, a, b, c in self.pvals)
        self.P_rho = sum((_rho(*v) for v in self.pvals), F(0))
        self.w = spec.weight_at(a0)
        self.options: dict = {}

    def budgets(self, C: Fraction):
        base = 24 * (C + self.a0) - self.P_rhat
        target = None if self.w is None else base - 2 * self.w
        return base, target, base - self.P_ar, 2 * C * (C + self.a0) - self.P_rho


def _whitelist_ok(spec: SearchSpec, kd: _KD, d: int, cflag: bool) -> bool:
    return spec.root_norm_whitelist is None or all(n in spec.root_norm_whitelist for n in _root_norms(kd, d, cflag))


def _cheap_eval(ctx: _Ctx, entries, record: bool = False) -> tuple[str | None, list]:
    """Evaluate the numerical rules on one candidate.

    ``entries`` lists (slot type, d, a, b, c) for the searched part. Returns
    the first violated rule (or None) and, when ``record`` is set, the chain
    of rule results with their exact values.
    """
    spec, a0 = ctx.spec, ctx.a0
    chain: list = []

    def step(rule, ok, **vals):
        if record:
            chain.append({"rule": rule, "pass": ok, **{k: _jsonable(v) for k, v in vals.items()}})
        return ok

    free = [(_kd(st.kind), d, a, b, c) for st, d, a, b, c in entries]
    if spec.root_norm_whitelist is not None:
        bad = [rational_str(n) for kd, d, a, b, c in free for n in _root_norms(kd, d, c != 0)
               if n not in spec.root_norm_whitelist]
        if not step("root_norm_whitelist", not bad, offending=sorted(set(bad))):
            return "root_norm_whitelist", chain
    if spec.require_all_d is not None:
        ds = [d for _, d, _, _, _ in free]
        if not step("require_all_d", all(d == spec.require_all_d for d in ds), d=ds):
            return "require_all_d", chain
    allc = list(ctx.pvals) + free
    hs = [_hhat(*v) for v in allc]
    C = hs[0]
    if not step("eqA", all(h == C for h in hs), C=C, hhat=hs):
        return "eqA", chain
    rh = ctx.P_rhat + sum(_rhat(kd, a, b, c) for kd, d, a, b, c in free)
    k = (24 * (C + a0) - rh) / F(2)
    if not step("weight_half_integral", (2 * k).denominator == 1, k=k, rhat=rh):
        return "weight_half_integral", chain
    if not step("positive_weight", k > 0, k=k):
        return "positive_weight", chain
    if ctx.w is not None and not step("weight_equals", k == ctx.w, k=k, required=ctx.w):
        return "weight_equals", chain
    rules = spec.rules
    if "multiplicity_rule" in rules:
        bad = [f"d={d},a={a}" for kd, d, a, b, c in allc if not _mult_ok(d, a, a0)]
        if not step("multiplicity_rule", not bad, violations=bad, a0=a0):
            return "multiplicity_rule", chain
    if "singular_bound" in rules:
        bound = F(sum(a * kd.rank for kd, d, a, b, c in allc), 2)
        if not step("singular_bound", k >= bound, k=k, bound=bound):
            return "singular_bound", chain
    if "eqB" in rules:
        lhs = sum((_rho(*v) for v in allc), F(0)) - 2 * C * (C + a0)
        if not step("eqB", lhs <= 0, lhs=lhs):
            return "eqB", chain
    return None, chain


def _jsonable(v):
    if isinstance(v, Fraction):
        return rational_str(v)
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


# --------------------------------------------------------------------------
# lattice stage


@lru_cache(maxsize=None)
def _named(name: str) -> EvenLattice:
    return build_lattice(name)


def _match(lat: EvenLattice, names: Iterable[str]) -> str | None:
    for nm in names:
        t = _named(nm)
        if t.rank == lat.rank and t.det == lat.det and is_isomorphic(lat, t)[0]:
            return nm
    return None


def _sub_sums(lat: EvenLattice) -> list[EvenLattice]:
    parts = indecomposable_summands(lat)
    seen, out = set(), []
    for r in range(1, len(parts) + 1):
        for combo in itertools.combinations(range(len(parts)), r):
            key = tuple(sorted(parts[i].gram for i in combo))
            if key not in seen:
                seen.add(key)
                out.append(direct_sum(*(parts[i] for i in combo)))
    return out


def _dual_count(lat: EvenLattice, norm: Fraction) -> int:
    inv = la.inverse(la.frac_matrix(lat.gram))
    return sum(1 for _, n in la.short_vectors(inv, norm) if n == norm)


def _fake_norm_count(key, norm: Fraction) -> int:
    total = 0
    for kind, d, cflag in key:
        kd = _kd(kind)
        if F(2, d) == norm:
            total += kd.n_long
        if kd.has_b and kd.short_norm / d == norm:
            total += kd.n_short
        if cflag and F(1, 2 * d) == norm:
            total += kd.n_long
    return total


@dataclass(frozen=True)
class LatticeOutcome:
    lattices: tuple[EvenLattice, ...]
    chain: tuple[dict, ...]
    failed: str | None


def _dummy(kind: RootSystemKind, d: int, cflag: bool) -> FakeComponent:
    return FakeComponent(kind, d, 1, 1 if _has_b(kind) else None, (1 if cflag else 0) if _has_c(kind) else None)


def _lattice_stage(spec: SearchSpec, key: tuple, a0: int, cache: dict) -> LatticeOutcome:
    ck = (key, a0 > 0)
    hit = cache.get(ck)
    if hit is not None:
        return hit
    comps = [_dummy(k, d, cf) for k, d, cf in key]
    lats = list(window_lattices(comps))
    chain = [{"rule": "lattice_window", "lattices": [label_lattice(t) for t in lats]}]
    failed = None if lats else "lattice_window"

    def apply(rule, keep, note=None):
        nonlocal lats, failed
        if failed:
            return
        lats = [t for t in lats if keep(t)]
        entry = {"rule": rule, "lattices": [label_lattice(t) for t in lats]}
        if note:
            entry["note"] = note
        if rule in _FIXTURE_KEYS:
            entry["fixtures"] = fx.cite(*_FIXTURE_KEYS[rule])
        chain.append(entry)
        if not lats:
            failed = rule

    if spec.maximal:
        apply("maximal", is_maximal_even)
    if "norm2_consistency" in spec.rules:
        apply("norm2_consistency", lambda t: norm2_consistent(t, comps, a0),
              f"L must have exactly {sum(realize(c.kind).n_long for c in comps if c.d == 1)} norm-2 vectors"
              if a0 > 0 else None)
    fr = spec.fixture_rules
    if "A1m_summand" in fr:
        apply("A1m_summand", lambda t: all(s.gram[0][0] // 2 in fx.A1_SUMMAND_SCALES
                                           for s in indecomposable_summands(t) if s.rank == 1))
    if "nonreflective_list" in fr:
        apply("nonreflective_list", lambda t: not any(_match(s, fx.NONREFLECTIVE_RANK_LE3)
                                                      for s in _sub_sums(t) if s.rank <= 3))
    if "pullback_rank2" in fr:
        apply("pullback_rank2", lambda t: all(_match(s, spec.rank2_allowed)
                                              for s in _sub_sums(t) if s.rank == 2))
    if "full_group" in fr:
        want = _fake_norm_count(key, F(1))
        apply("full_group", lambda t: not _match(t, ("D4",)) or _dual_count(t, F(1)) == want,
              f"a single O(L)-orbit of norm-1 dual vectors must all be fake roots; fake roots of norm 1: {want}")
    out = LatticeOutcome(tuple(lats), tuple(chain), failed)
    cache[ck] = out
    return out


def _lattice_key(entries) -> tuple:
    return tuple(sorted((st.kind, d, c != 0) for st, d, a, b, c in entries))


def _lattice_active(spec: SearchSpec) -> bool:
    return "lattice_window" in spec.rules


# --------------------------------------------------------------------------
# solving one slot against a known C


def _slot_options(ctx: _Ctx, st: SlotType, d: int, C: Fraction, budget: Fraction) -> tuple[bool, list[Option]]:
    """Multiplicities with hhat = C inside the box.

    Returns whether any solution exists at all and the solutions whose own
    fake-root count stays below ``budget`` (a positive weight needs that).
    """
    key = (st, d, C)
    hit = ctx.options.get(key)
    if hit is not None:
        return hit
    kd, M, a0 = _kd(st.kind), ctx.spec.mult_max, ctx.a0
    exists = False
    opts: list[Option] = []

    def push(a, b, c):
        nonlocal exists
        exists = True
        if _rhat(kd, a, b, c) < budget:
            opts.append(_option(kd, d, a, b, c, a0))

    if st.template is not None:
        a, b, c = st.template.values(a0)
        if _hhat(kd, d, a, b or 0, c or 0) == C:
            push(a, b or 0, c or 0)
    elif not kd.has_b and not st.cflag:
        a = C * d / kd.h_l
        if a.denominator == 1 and 1 <= a <= M:
            push(int(a), 0, 0)
    elif not st.cflag:
        for a in range(1, M + 1):
            b = (C * d - a * kd.h_l) / kd.h_s
            if b < 1:
                break
            if b.denominator == 1 and b <= M:
                push(a, int(b), 0)
    else:
        # c = c0 - 4a with -a <= c <= M and c != 0
        for b in (range(1, M + 1) if kd.has_b else (0,)):
            c0 = 4 * (C * d - b * kd.h_s) / kd.h_l
            if c0 < 3:
                break
            if c0.denominator != 1:
                continue
            c0 = int(c0)
            lo, hi = max(1, -((M - c0) // 4)), min(M, c0 // 3)
            if lo > hi:
                continue
            if hi > lo or c0 != 4 * lo:
                exists = True
            # fake-root count (c0 - 3a)·|R_l| + b·|R_s| falls as a grows
            need = (c0 * kd.n_long + b * kd.n_short - budget) / (3 * kd.n_long)
            start = max(lo, math.floor(need) + 1)
            for a in range(start, hi + 1):
                c = c0 - 4 * a
                if c:
                    opts.append(_option(kd, d, a, b, c, a0))
    opts.sort(key=lambda o: (o.rhat, o.a, o.b, o.c))
    out = (exists, opts)
    ctx.options[key] = out
    return out


def _pareto(opts: Sequence[Option], use_s: bool, use_r: bool) -> list[Option]:
    kept: list[Option] = []
    for o in sorted(opts, key=lambda o: (o.rhat, o.sr, o.rho)):
        if not any(k.rhat <= o.rhat and (not use_s or k.sr <= o.sr) and (not use_r or k.rho <= o.rho)
                   for k in kept):
            kept.append(o)
    return kept


def _combos(lists, same, Bk, T, Bs, Br, collect: bool, tick):
    """Depth-first search over option tuples with bound propagation.

    Identical consecutive slots take non-decreasing option indices, so each
    multiset is visited once. With ``collect`` all admissible tuples are
    returned, otherwise the first one (or None).
    """
    n = len(lists)

    def suffix(fn, agg):
        arr = [0] * (n + 1)
        for i in range(n - 1, -1, -1):
            arr[i] = arr[i + 1] + agg(fn(o) for o in lists[i])
        return arr

    if any(not l for l in lists):
        return [] if collect else None
    min_r = suffix(lambda o: o.rhat, min)
    max_r = suffix(lambda o: o.rhat, max)
    min_s = suffix(lambda o: o.sr, min)
    min_p = suffix(lambda o: o.rho, min)
    pick: list = [None] * n
    idx = [0] * n
    out = []

    def rec(i, r, s, p):
        if i == n:
            tick()
            if collect:
                out.append(tuple(pick))
                return False
            return True
        for j in range(idx[i - 1] if same[i] else 0, len(lists[i])):
            o = lists[i][j]
            r2 = r + o.rhat
            if r2 + min_r[i + 1] >= Bk:
                break  # lists are sorted by rhat
            if T is not None and (r2 + min_r[i + 1] > T or r2 + max_r[i + 1] < T):
                continue
            s2 = s + o.sr
            if Bs is not None and s2 + min_s[i + 1] > Bs:
                continue
            p2 = p + o.rho
            if Br is not None and p2 + min_p[i + 1] > Br:
                continue
            pick[i], idx[i] = o, j
            if rec(i + 1, r2, s2, p2):
                return True
        return False

    found = rec(0, 0, 0, F(0))
    if collect:
        return out
    return tuple(pick) if found else None


# --------------------------------------------------------------------------
# results


@dataclass(frozen=True)
class Solution:
    system: FakeSystem
    prefix: tuple[FakeComponent, ...]
    free: tuple[FakeComponent, ...]
    lattices: tuple[EvenLattice, ...]
    chain: tuple

    def sort_key(self):
        s = self.system
        return (s.a0, s.rank, tuple(c.sort_key() for c in s.components), s.k)

    def full_lattice(self, lat: EvenLattice) -> EvenLattice:
        """The prefix root lattices together with L."""
        parts = [q_p_lattices(c.kind, c.d)[0] for c in self.prefix]
        return direct_sum(*parts, lat) if parts else lat

    def to_json(self) -> dict:
        return {
            "system": self.system.to_json(), "label": str(self.system),
            "lattices": [{"label": label_lattice(t), "gram": gram_json(t.gram)} for t in self.lattices],
            "report": {"admissible": True, "chain": list(self.chain)},
        }


@dataclass(frozen=True)
class Certificate:
    query: SearchSpec
    solutions: tuple[Solution, ...]
    exclusions: tuple[dict, ...]
    stats: dict = field(default_factory=dict)
    derivations: dict = field(default_factory=dict)

    def admissible_lattices(self) -> list[str]:
        return sorted({label_lattice(t) for s in self.solutions for t in s.lattices})

    def to_json(self) -> dict:
        return {
            "query": self.query.to_json(),
            "solutions": [s.to_json() for s in self.solutions],
            "admissible_lattices": self.admissible_lattices(),
            "exclusions": list(self.exclusions),
            "stats": dict(self.stats),
            **({"derivations": self.derivations} if self.derivations else {}),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, ensure_ascii=False)


def _canonical(entries):
    return sorted(entries, key=lambda e: (e[0].order_key(), e[1], e[2], e[3], e[4]))


def _make_solution(ctx: _Ctx, entries, lat: LatticeOutcome | None) -> Solution:
    entries = _canonical(entries)
    failed, chain = _cheap_eval(ctx, entries, record=True)
    if failed is not None:
        raise RuntimeError(f"internal: solution fails {failed}")
    free = []
    for st, d, a, b, c in entries:
        kd = _kd(st.kind)
        free.append(FakeComponent(st.kind, d, a, b if kd.has_b else None, c if kd.has_c else None))
    comps = tuple(sorted(ctx.prefix + tuple(free), key=FakeComponent.sort_key))
    k = F(chain[[e["rule"] for e in chain].index("positive_weight")]["k"])
    system = FakeSystem(comps, ctx.a0, k)
    lats = lat.lattices if lat is not None else ()
    full_chain = tuple(chain) + (tuple(lat.chain) if lat is not None else ())
    return Solution(system, ctx.prefix, tuple(sorted(free, key=FakeComponent.sort_key)), lats, full_chain)


# --------------------------------------------------------------------------
# symbolic relations per shape


def _q(x) -> sympy.Rational:
    x = F(x)
    return sympy.Rational(x.numerator, x.denominator)


def shape_relations(spec: SearchSpec, shape: Sequence[SlotType], a0_name: str = "a0") -> list[str]:
    """Linear relations forced by hhat = C and the weight formula.

    Multiplicities of components with a single unknown are solved outright;
    others are reported as one primitive integer relation. The last entry
    always expresses k.
    """
    a0 = sympy.Symbol(a0_name)
    subs = {A0: a0}

    def tvals(t: Template):
        return (_sym(t.a).subs(subs), _sym(t.b).subs(subs) if t.b is not None else 0,
                _sym(t.c).subs(subs) if t.c is not None else 0)

    rels: list[str] = []
    total = sympy.Integer(0)
    C = None
    for t in spec.prefix:
        kd = _kd(t.kind)
        a, b, c = tvals(t)
        h = (a * _q(kd.h_l) + b * _q(kd.h_s) + c * _q(kd.h_l) / 4) / t.d
        C = h if C is None else C
        total += (a + c) * kd.n_long + b * kd.n_short
    if C is None:
        C = sympy.Symbol("C")
    single = len(shape) == 1
    for i, st in enumerate(shape):
        kd = _kd(st.kind)
        sfx = "" if single else str(i + 1)
        hl, hs = _q(kd.h_l), _q(kd.h_s)
        if st.template is not None:
            a, b, c = tvals(st.template)
            h = sympy.nsimplify((a * hl + b * hs + c * hl / 4) / st.template.d)
            if isinstance(C, sympy.Symbol):
                rels.append(f"C = {h}")
                C = h
            total += (a + c) * kd.n_long + b * kd.n_short
            continue
        d = sympy.Symbol("d" + sfx, positive=True, integer=True)
        a = sympy.Symbol("a" + sfx)
        b = sympy.Symbol("b" + sfx) if kd.has_b else sympy.Integer(0)
        c = sympy.Symbol("c" + sfx) if st.cflag else sympy.Integer(0)
        if not kd.has_b and not st.cflag:
            sol = sympy.expand(C * d / hl)
            rels.append(f"{a} = {sol}")
            total += sol * kd.n_long
            continue
        expr = sympy.expand(a * hl + b * hs + c * hl / 4 - C * d)
        _, prim = expr.as_content_primitive()
        if prim.coeff(a) < 0:
            prim = -prim
        unknown = {a, b, c} - {sympy.Integer(0)}
        left = sympy.Add(*[t for t in sympy.Add.make_args(prim) if t.free_symbols & unknown])
        rels.append(f"{left} = {sympy.expand(left - prim)}")
        total += (a + c) * kd.n_long + b * kd.n_short
    kval = sympy.expand((24 * (C + a0) - total) / 2)
    rels.append(f"k = {sympy.collect(kval, a0)}")
    return rels


def relation_matches(text: str, expected: str, names: Iterable[str] = ()) -> bool:
    """True when ``lhs = rhs`` in ``text`` agrees with ``expected`` as equations."""
    def parse(s):
        lhs, rhs = s.split("=")
        return sympy.sympify(lhs), sympy.sympify(rhs)

    l1, r1 = parse(text)
    l2, r2 = parse(expected)
    e1, e2 = sympy.expand(l1 - r1), sympy.expand(l2 - r2)
    if e1 == 0 or e2 == 0:
        return e1 == e2
    return sympy.simplify(e1 / e2).is_number and sympy.simplify(e1 / e2) != 0


# --------------------------------------------------------------------------
# the pruned search


class _Search:
    def __init__(self, spec: SearchSpec):
        self.spec = spec
        self.types = _slot_types(spec)
        self.cache: dict = {}
        self.count = 0
        self.solutions: list[Solution] = []
        self.groups: dict = {}
        self.global_exclusions: list[dict] = []
        self.shape_pruned = 0
        self.explored = 0

    def tick(self):
        self.count += 1
        if self.count > self.spec.candidate_cap:
            raise CandidateCapExceeded(f"search exceeded the candidate cap {self.spec.candidate_cap}")

    def dvals(self, st: SlotType, a0: int) -> list[int]:
        spec = self.spec
        kd = _kd(st.kind)
        if st.template is not None:
            ds = [st.template.d] if st.template.d <= spec.d_max else []
            cflag = (st.template.values(a0)[2] or 0) != 0
        else:
            ds, cflag = range(1, spec.d_max + 1), st.cflag
        if spec.require_all_d is not None:
            ds = [d for d in ds if d == spec.require_all_d]
        return [d for d in ds if _whitelist_ok(spec, kd, d, cflag)]

    def shapes(self, ctx: _Ctx):
        types = self.types
        fixed = {}
        for st in types:
            if st.template is not None:
                a, b, c = st.template.values(ctx.a0)
                fixed[st] = _hhat(_kd(st.kind), st.template.d, a, b or 0, c or 0)

        def rec(rank, start, C, acc):
            if rank == 0:
                yield tuple(acc)
                return
            for i in range(start, len(types)):
                st = types[i]
                if st.kind.rank > rank:
                    continue
                h = fixed.get(st)
                if h is not None and C is not None and h != C:
                    self.shape_pruned += 1
                    continue
                acc.append(st)
                yield from rec(rank - st.kind.rank, i, C if h is None else h, acc)
                acc.pop()

        yield from rec(self.spec.target_rank, 0, ctx.C, [])

    def group(self, shape) -> dict:
        label = shape_label(shape)
        g = self.groups.get(label)
        if g is None:
            g = {"shape": label, "relations": shape_relations(self.spec, shape) if self.spec.relations else [],
                 "solutions": 0, "bound_excluded": {}, "skeletons": []}
            self.groups[label] = g
        return g

    def c_candidates(self, ctx: _Ctx, entries) -> list[Fraction]:
        M = self.spec.mult_max
        best = min(entries, key=lambda e: _raw_count(e[0], M))
        st, d = best
        if _raw_count(st, M) > self.spec.candidate_cap:
            raise CandidateCapExceeded("too many values of C to try without a prefix")
        kd = _kd(st.kind)
        return sorted({_hhat(kd, d, a, b, c) for a, b, c in _raw_options(st, d, ctx.a0, M)})

    def run(self) -> Certificate:
        spec = self.spec
        for a0 in spec.a0_values:
            ctx = _Ctx(spec, a0)
            if not ctx.prefix_eqA:
                self.global_exclusions.append({
                    "a0": a0, "rule": "eqA", "shape": "prefix",
                    "chain": [{"rule": "eqA", "pass": False,
                               "hhat": [rational_str(_hhat(*v)) for v in ctx.pvals]}]})
                continue
            for shape in self.shapes(ctx):
                g = self.group(shape)
                for ds in _d_tuples(_groups(shape), lambda st: self.dvals(st, a0)):
                    self.skeleton(ctx, g, list(zip(shape, ds)))
        self.solutions.sort(key=Solution.sort_key)
        exclusions = list(self.global_exclusions)
        for g in self.groups.values():
            counts = sorted(g["bound_excluded"].items(), key=lambda kv: (kv[0][0], RULE_ORDER.index(kv[0][1])))
            exclusions.append({**g, "bound_excluded": [{"a0": a, "rule": r, "count": n} for (a, r), n in counts]})
        stats = {"skeletons_explored": self.explored, "candidates_visited": self.count,
                 "partial_shapes_pruned_by_eqA": self.shape_pruned}
        return Certificate(spec, tuple(self.solutions), tuple(exclusions), stats)

    def skeleton(self, ctx: _Ctx, g: dict, entries) -> None:
        self.tick()
        Cs = [ctx.C] if ctx.C is not None else self.c_candidates(ctx, entries)
        best = None
        found = 0
        for C in Cs:
            Bk, T, Bs, Br = ctx.budgets(C)
            per = [_slot_options(ctx, st, d, C, Bk) for st, d in entries]
            if not all(e for e, _ in per):
                res = ("eqA", None)
            elif (24 * C).denominator != 1:
                res = ("weight_half_integral", None)
            elif any(not o for _, o in per) or sum(o[0].rhat for _, o in per) >= Bk:
                res = ("positive_weight", None)
            else:
                self.explored += 1
                res = self.explore(ctx, entries, C, [o for _, o in per], (Bk, T, Bs, Br))
            if res[0] is None:
                found += res[1]
                continue
            depth = RULE_ORDER.index(res[0])
            if best is None or depth > best[0]:
                best = (depth, res)
        if found:
            g["solutions"] += found
            return
        rule, rec = best[1] if best else ("eqA", None)
        if rec is None:
            key = (ctx.a0, rule)
            g["bound_excluded"][key] = g["bound_excluded"].get(key, 0) + 1
        else:
            g["skeletons"].append(rec)

    def explore(self, ctx: _Ctx, entries, C, lists, budgets):
        Bk, T, Bs, Br = budgets
        rules = self.spec.rules
        same = [i > 0 and entries[i] == entries[i - 1] for i in range(len(entries))]
        stages = []
        if T is not None:
            stages.append("weight_equals")
        stages += [r for r in ("multiplicity_rule", "singular_bound", "eqB") if r in rules]
        witness = tuple(l[0] for l in lists)
        act = {"T": None, "mult": False, "Bs": None, "Br": None}
        cur = lists
        for stage in stages:
            if stage == "weight_equals":
                act["T"] = T
            elif stage == "multiplicity_rule":
                act["mult"] = True
                cur = [[o for o in l if o.mult] for l in lists] if ctx.prefix_mult else [[] for _ in lists]
            elif stage == "singular_bound":
                act["Bs"] = Bs
            else:
                act["Br"] = Br
            search = cur
            if act["T"] is None:
                search = [_pareto(l, act["Bs"] is not None, act["Br"] is not None) for l in cur]
            w = _combos(search, same, Bk, act["T"], act["Bs"], act["Br"], False, self.tick)
            if w is None:
                return stage, self.record(ctx, entries, C, witness, stage)
            witness = w
        lat = None
        if _lattice_active(self.spec):
            vals = [(st, d, o.a, o.b, o.c) for (st, d), o in zip(entries, witness)]
            lat = _lattice_stage(self.spec, _lattice_key(vals), ctx.a0, self.cache)
            if lat.failed:
                return lat.failed, self.record(ctx, entries, C, witness, lat.failed, lat)
        combos = _combos(cur, same, Bk, act["T"], act["Bs"], act["Br"], True, self.tick)
        for combo in combos:
            vals = [(st, d, o.a, o.b, o.c) for (st, d), o in zip(entries, combo)]
            self.solutions.append(_make_solution(ctx, vals, lat))
        return None, len(combos)

    def record(self, ctx: _Ctx, entries, C, witness, rule, lat: LatticeOutcome | None = None) -> dict:
        vals = [(st, d, o.a, o.b, o.c) for (st, d), o in zip(entries, witness)]
        failed, chain = _cheap_eval(ctx, _canonical(vals), record=True)
        if failed != (None if lat is not None else rule):
            raise RuntimeError(f"internal: witness fails {failed}, expected {rule}")
        witness_str = []
        for st, d, a, b, c in _canonical(vals):
            kd = _kd(st.kind)
            witness_str.append(str(FakeComponent(st.kind, d, a, b if kd.has_b else None, c if kd.has_c else None)))
        if lat is not None:
            chain = chain + list(lat.chain)
        return {"a0": ctx.a0, "d": [d for _, d in entries], "C": rational_str(C), "witness": witness_str,
                "rule": rule, "chain": chain}


def solve(spec: SearchSpec) -> Certificate:
    """Enumerate the admissible systems of a search box.

    Raises CandidateCapExceeded when the work exceeds ``spec.candidate_cap``.
    """
    return _Search(spec).run()


# --------------------------------------------------------------------------
# brute-force oracle


def _raw_count(st: SlotType, M: int) -> int:
    if st.template is not None:
        return 1
    kd = _kd(st.kind)
    per_a = M * (M + 1) // 2 + M * M if st.cflag else M
    return per_a * (M if kd.has_b else 1)


def _raw_options(st: SlotType, d: int, a0: int, M: int) -> list[tuple[int, int, int]]:
    if st.template is not None:
        a, b, c = st.template.values(a0)
        return [(a, b or 0, c or 0)]
    kd = _kd(st.kind)
    out = []
    for a in range(1, M + 1):
        for b in (range(1, M + 1) if kd.has_b else (0,)):
            if st.cflag:
                out.extend((a, b, c) for c in range(-a, M + 1) if c)
            else:
                out.append((a, b, 0))
    return out


def _naive_dvals(spec: SearchSpec, st: SlotType) -> list[int]:
    if st.template is not None:
        return [st.template.d] if st.template.d <= spec.d_max else []
    return list(range(1, spec.d_max + 1))


def raw_box_size(spec: SearchSpec) -> int:
    """Number of candidates the unpruned cross product visits."""
    total = 0
    types = _slot_types(spec)
    for shape in _shapes(types, spec.target_rank):
        prod = 1
        for st, m in _groups(shape):
            n = len(_naive_dvals(spec, st)) * _raw_count(st, spec.mult_max)
            prod *= math.comb(n + m - 1, m)
        total += prod
    return total * len(spec.a0_values)


def naive_solve(spec: SearchSpec) -> list[Solution]:
    """Evaluate every candidate of the raw box, without any pruning."""
    size = raw_box_size(spec)
    if size > spec.candidate_cap:
        raise CandidateCapExceeded(f"raw box has {size} candidates")
    types = _slot_types(spec)
    cache: dict = {}
    out = []
    for a0 in spec.a0_values:
        ctx = _Ctx(spec, a0)
        for shape in _shapes(types, spec.target_rank):
            parts = []
            for st, m in _groups(shape):
                pool = [(st, d) + o for d in _naive_dvals(spec, st) for o in _raw_options(st, d, a0, spec.mult_max)]
                parts.append(list(itertools.combinations_with_replacement(pool, m)))
            for combo in itertools.product(*parts):
                entries = [e for part in combo for e in part]
                if _cheap_eval(ctx, entries)[0] is not None:
                    continue
                lat = None
                if _lattice_active(spec):
                    lat = _lattice_stage(spec, _lattice_key(entries), a0, cache)
                    if lat.failed:
                        continue
                out.append(_make_solution(ctx, entries, lat))
    out.sort(key=Solution.sort_key)
    return out
