"""Write each catalog scene as a standalone JSON scene file and check that it loads back."""

import argparse
import json
from pathlib import Path

from amdkit.scenes import CATALOG, builtin_document, load_scene


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("results/scenes"))
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    for name in sorted(CATALOG):
        path = args.out / f"{name}.json"
        path.write_text(json.dumps(builtin_document(name), indent=2, sort_keys=True) + "\n")
        scene = load_scene(str(path))
        print(f"{path}  ({len(scene.immersions)} immersions, {len(scene.checks)} checks)")


if __name__ == "__main__":
    main()
