"""Compare the pruned solver against naive enumeration on many random boxes.

    python3 scripts/oracle_sweep.py --seeds 1 2 3 --count 20
"""

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))

from conftest import random_specs  # noqa: E402
from reflex.classifier import naive_solve, solve  # noqa: E402


@dataclass
class SweepConfig:
    seeds: tuple[int, ...] = (7,)
    count: int = 20
    max_box: int = 10 ** 5


def sweep(cfg: SweepConfig) -> int:
    mismatches = 0
    for seed in cfg.seeds:
        specs = random_specs(seed=seed, count=cfg.count, max_box=cfg.max_box)
        bad = [s.name for s in specs
               if [x.to_json() for x in solve(s).solutions] != [x.to_json() for x in naive_solve(s)]]
        mismatches += len(bad)
        print(f"seed {seed}: {len(specs)} specs, {len(bad)} mismatch(es) {' '.join(bad)}")
    return mismatches


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--seeds", type=int, nargs="+", default=list(SweepConfig.seeds))
    p.add_argument("--count", type=int, default=SweepConfig.count)
    p.add_argument("--max-box", type=int, default=SweepConfig.max_box)
    args = p.parse_args()
    sys.exit(1 if sweep(SweepConfig(tuple(args.seeds), args.count, args.max_box)) else 0)


if __name__ == "__main__":
    main()
