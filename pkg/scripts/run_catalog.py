"""Run every check declared by every catalog scene and write one JSON report per run.

    python3 scripts/run_catalog.py --out results/catalog [--max-trials 2]
"""

import argparse
import json
import time
from pathlib import Path

from amdkit import cli
from amdkit.scenes import CATALOG, load_scene


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("results/catalog"))
    ap.add_argument("--max-trials", type=int, default=None, help="cap perturbation trials to save time")
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    summary = []
    for name in sorted(CATALOG):
        scene = load_scene(f"builtin:{name}")
        for check in sorted(scene.checks):
            overrides = {}
            if args.max_trials is not None and "trials" in scene.check(check):
                overrides["trials"] = min(args.max_trials, scene.check(check)["trials"])
            t0 = time.perf_counter()
            rep = cli.run(scene, check, overrides)
            seconds = time.perf_counter() - t0
            (args.out / f"{name}__{check.replace(':', '-')}.json").write_text(rep.to_json())
            summary.append({"scene": name, "check": check, "status": rep.status, "seconds": round(seconds, 2)})
            print(f"{name:28s} {check:22s} {rep.status:5s} {seconds:7.2f} s", flush=True)

    (args.out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
