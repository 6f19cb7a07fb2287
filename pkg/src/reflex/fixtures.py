"""Imported mathematical facts used by the classification pipelines.

Everything here is quoted from the literature rather than computed; each
entry records its source so certificates can cite it. Computed content lives
in the other modules.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Fixture:
    key: str
    statement: str
    source: str

    def to_json(self) -> dict:
        return {"key": self.key, "statement": self.statement, "source": self.source}


FIXTURES: dict[str, Fixture] = {f.key: f for f in [
    Fixture("A1m_summand",
            "2U+2E8+A1(m) has a reflective modular form iff m in {1,2}; reflectivity passes to orthogonal "
            "summands L1 of L in 2U+2E8+L (quasi-pullback)",
            "Wan19, Thm 8.1 and Lem 5.2"),
    Fixture("nonreflective_list",
            "2U+2E8+L has no reflective Borcherds product for L in {3A1, A3, A1+A2, A1(2)+A2, A2(2), A2(3), "
            "2A1(2), A1+A1(2)}",
            "obstruction principle, Bor99 Thm 3.1; several cases are re-derived by "
            "`reproduce lemma-nonreflective`"),
    Fixture("root_norm_weight",
            "a reflective Borcherds product on 2U+2E8+L4 has weight 24*f(-1,0) and its rank-4 roots have "
            "norm 2 or 1 in L4'",
            "Wan19, Prop 9.6"),
    Fixture("nikulin_split",
            "an even lattice of signature (22,2) with discriminant length <= 3 splits as 2U+2E8+L4; an "
            "indefinite even lattice splitting 2U is determined by its signature and discriminant form",
            "Nik80, Cor 1.13.5 and Thm 1.14.2"),
    Fixture("nikulin_2elem",
            "2-elementary even lattices of signature (22,2) with discriminant (Z/2)^4 containing 2U are "
            "2U+E8+D8+D4 and 2U+E8+E7+A1+D4",
            "Nik80, Thm 3.6.2"),
    Fixture("e8d8d4_nonreflective",
            "2U+E8+D8+D4 has no reflective Borcherds product",
            "Wan22, Thm 1.1"),
    Fixture("full_group",
            "for signature (l,2) with l >= 15 and a U summand, a reflective Borcherds product is unique up "
            "to powers and hence modular for the full orthogonal group",
            "obstruction space of weight 7-l/2 < 0"),
    Fixture("d4_triality",
            "O(D4) permutes the three non-zero classes of D4'/D4 transitively, so its 24 norm-1 dual vectors "
            "form one orbit",
            "classical (triality of D4)"),
    Fixture("maximal_split_21",
            "a maximal even lattice of signature (21,2) with a reflective modular form is 2U+2E8+L3 with L3 "
            "maximal positive definite of rank 3; any lattice of signature (21,2) with a reflective form "
            "yields a maximal one with the same property",
            "Wan23, Lem 2.2; Ma18, Cor 3.2"),
    Fixture("a0_zero_branch",
            "when f(-1,0) = 0 the E8+E7 configuration is excluded by the full-rank argument of the proof",
            "excluded by an implicit full-rank argument, fixture"),
    Fixture("free_algebra_reduction",
            "a free algebra of modular forms forces a cusp form of weight k >= l + (l/2-1)(l+1) built from "
            "reflective Borcherds products with fake roots of d = 2 and simple zeros, on 2U+L with 9 <= rank L <= 11",
            "Wan21, Thm 3.5; Bru02; Ma18, Cor 3.2"),
    Fixture("gn18_e8e7",
            "U+E8+E7 is an elliptic reflective hyperbolic lattice; a lattice M of signature (17,2) producing "
            "it has an even overlattice 2U+E8+E7",
            "GN18, p. 492"),
    Fixture("example_A1_2",
            "the reflective product on 2U+2E8+A1(2) has fake root system (E8,1;1)^2+(A1,14|64;2)",
            "Gri18, 6.6"),
]}


# The lattices L for which 2U+2E8+L carries no reflective Borcherds product.
NONREFLECTIVE_RANK_LE3 = ("3A1", "A3", "A1+A2", "A1(2)+A2", "A2(2)", "A2(3)", "2A1(2)", "A1+A1(2)")

# Rank-1 summands A1(m) that survive: m in this set.
A1_SUMMAND_SCALES = (1, 2)


# Worked examples as stated in the literature: components, weight k, a0.
def _comp(family, rank, d, a, b=None, c=None):
    return {"family": family, "rank": rank, "d": d, "a": a, "b": b, "c": c}


_E8 = _comp("E", 8, 1, 1)
WORKED_EXAMPLES: dict[str, dict] = {
    "Delta10": {"components": [_comp("A", 1, 2, 2, c=0)], "k": "10", "a0": 0},
    "2E8+C2": {"components": [_E8, _E8, _comp("C", 2, 1, 1, 12, 32)], "k": "42", "a0": 1},
    "2E8+G2": {"components": [_E8, _E8, _comp("G", 2, 1, 1, 27)], "k": "48", "a0": 1},
    "2E8+A1(1|56;1)": {"components": [_E8, _E8, _comp("A", 1, 1, 1, c=56)], "k": "75", "a0": 1},
    "2E8+A1(14|64;2)": {"components": [_E8, _E8, _comp("A", 1, 2, 14, c=64)], "k": "54", "a0": 1},
    "B20": {"components": [_comp("B", 20, 1, 1, 8)], "k": "24", "a0": 1},
    "E8+B12": {"components": [_E8, _comp("B", 12, 1, 1, 8)], "k": "24", "a0": 1},
    "2E8+F4": {"components": [_E8, _E8, _comp("F", 4, 1, 1, 8)], "k": "24", "a0": 1},
    "A1(1|-1;36)": {"components": [_comp("A", 1, 36, 1, c=-1)], "k": "1/2", "a0": 0},
}


def cite(*keys: str) -> list[dict]:
    return [FIXTURES[k].to_json() for k in keys]
