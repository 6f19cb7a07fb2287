import random
import time

import pytest

from reflex.classifier import TOGGLES, SearchSpec, Template, raw_box_size
from reflex.reproduce import reproduce

RANDOM_SEED = 7
ORACLE_MAX_BOX = 10 ** 5

_KINDS = ["A1", "A2", "A3", "B3", "C2", "C3", "G2", "D4", "A"]
_PREFIXES = [(), (), (Template("E8", 1, "a0"),), (Template("E8", 1, "a0"), Template("E8", 1, "a0")),
             (Template("A1", 1, "a0", None, "0"),)]


def _random_spec(rng, index):
    prefix = rng.choice(_PREFIXES)
    rules = tuple(r for r in TOGGLES[:3] if rng.random() < 0.6)
    fixtures = ()
    maximal = False
    if rng.random() < 0.4:
        rules += ("lattice_window",) + (("norm2_consistency",) if rng.random() < 0.5 else ())
        maximal = rng.random() < 0.3
        fixtures = tuple(f for f in ("A1m_summand", "nonreflective_list") if rng.random() < 0.3)
    return SearchSpec(
        target_rank=rng.randint(1, 3), prefix=prefix,
        a0_values=tuple(rng.sample([0, 1, 2] if not prefix else [1, 2], rng.randint(1, 2))),
        allowed_kinds=tuple(sorted(rng.sample(_KINDS, rng.randint(1, 3)))),
        d_max=rng.randint(1, 4), mult_max=rng.randint(1, 8), candidate_cap=10 ** 6,
        rules=rules, fixture_rules=fixtures, maximal=maximal,
        require_all_d=rng.choice([None, None, None, 2]),
        root_norm_whitelist=rng.choice([None, None, None, ("2", "1"), ("2", "1", "1/2")]),
        weight_equals=rng.choice([None] * 5 + ["12*a0", "6"]),
        relations=False, name=f"random-{index}")


def random_specs(seed=RANDOM_SEED, count=20, max_box=ORACLE_MAX_BOX):
    """Seeded search boxes with a nonempty raw box of at most ``max_box``."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        spec = _random_spec(rng, len(out))
        if 0 < raw_box_size(spec) <= max_box:
            out.append(spec)
    return out


_CERTS = {}
BUILD_SECONDS = {}


def certificate(target):
    if target not in _CERTS:
        start = time.perf_counter()
        _CERTS[target] = reproduce(target)
        BUILD_SECONDS[target] = time.perf_counter() - start
    return _CERTS[target]


@pytest.fixture(scope="session")
def certs():
    return certificate


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda x: int(x.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
