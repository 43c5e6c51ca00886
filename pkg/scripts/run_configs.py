"""Run every JSON config in scripts/configs through the CLI runner.

    python3 scripts/run_configs.py --out-dir results
"""
import argparse
import sys
from pathlib import Path

from holderlab.cli import main

HERE = Path(__file__).resolve().parent


def run(out_dir: str) -> int:
    worst = 0
    for cfg in sorted((HERE / "configs").glob("*.json")):
        print(f"== {cfg.name}", flush=True)
        code = main(["run", str(cfg), "--out-dir", str(Path(out_dir) / cfg.stem)])
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--out-dir", default="results")
    sys.exit(run(ap.parse_args().out_dir))
