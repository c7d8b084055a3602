#!/usr/bin/env python3
"""Run every preset sweep config in configs/ and write its artifacts.

Usage: python scripts/run_presets.py [output_dir] [name ...]

With no names, all presets are run.  Output defaults to ./enaqt_output
(or $ENAQT_OUTPUT_DIR).
"""

import sys
from pathlib import Path

from enaqt.cli import _default_output_dir
from enaqt.sweep import load_config, run_experiment

ROOT = Path(__file__).resolve().parent.parent


def main(argv):
    out_dir = _default_output_dir(argv[0] if argv else None)
    names = set(argv[1:])
    configs = sorted((ROOT / "configs").glob("*.json"))
    if names:
        configs = [c for c in configs if c.stem in names]
    if not configs:
        print("no matching configs", file=sys.stderr)
        return 1
    for path in configs:
        config = load_config(path)
        print(f"running {config.name} ...", flush=True)
        summary = run_experiment(config, out_dir)
        print(
            f"  {summary['n_points']} points, {summary['n_errors']} errors, "
            f"files: {', '.join(summary['files'].values())}"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
