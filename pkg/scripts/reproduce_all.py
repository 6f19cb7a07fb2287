"""Run every reproduction target and write one JSON certificate per target.

    python3 scripts/reproduce_all.py --out certificates/
"""

import argparse
import json
import time
from dataclasses import dataclass
from pathlib import Path

from reflex.reproduce import TARGETS, reproduce


@dataclass
class RunConfig:
    out: Path = Path("certificates")
    targets: tuple[str, ...] = TARGETS


def run(cfg: RunConfig) -> dict:
    cfg.out.mkdir(parents=True, exist_ok=True)
    summary = {}
    for target in cfg.targets:
        start = time.perf_counter()
        cert = reproduce(target)
        seconds = time.perf_counter() - start
        (cfg.out / f"{target}.json").write_text(cert.dumps())
        summary[target] = {"solutions": len(cert.solutions), "admissible_lattices": cert.admissible_lattices(),
                           "seconds": round(seconds, 2)}
        print(f"{target:22s} {len(cert.solutions):4d} solution(s)  "
              f"lattices: {', '.join(cert.admissible_lattices()) or 'none':12s} {seconds:6.1f}s")
    (cfg.out / "summary.json").write_text(json.dumps(summary, indent=2))
    return summary


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", type=Path, default=RunConfig.out)
    p.add_argument("--target", action="append", choices=TARGETS, help="repeatable; default is all targets")
    args = p.parse_args()
    run(RunConfig(args.out, tuple(args.target) if args.target else TARGETS))


if __name__ == "__main__":
    main()
