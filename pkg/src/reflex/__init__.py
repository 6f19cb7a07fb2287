"""Exact computations with fake root systems of reflective Borcherds products."""

from .classifier import Certificate, SearchSpec, Template, naive_solve, solve
from .fake_roots import FakeComponent, FakeSystem
from .lattice_core import EvenLattice, build_lattice
from .reproduce import reproduce
from .root_systems import RootSystemKind, realize

__all__ = [
    "Certificate", "EvenLattice", "FakeComponent", "FakeSystem", "RootSystemKind", "SearchSpec", "Template",
    "build_lattice", "naive_solve", "realize", "reproduce", "solve",
]
__version__ = "0.1.0"
