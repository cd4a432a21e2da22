"""Shared helper: run a preset sweep through the CLI and tabulate summary.json."""

import argparse
import json
import sys
from pathlib import Path

from cqec.cli import main


def sweep(preset: str, default_out: str, description: str) -> int:
    parser = argparse.ArgumentParser(description=description)
    parser.add_argument("--trajectories", type=int, help="override the preset's trajectory count")
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--seed", type=int, default=12345)
    parser.add_argument("--out", default=default_out)
    args = parser.parse_args()

    argv = ["sweep", "--preset", preset, "--seed", str(args.seed), "--threads", str(args.threads), "--out", args.out]
    if args.trajectories:
        argv += ["--trajectories", str(args.trajectories)]
    code = main(argv)
    if code:
        return code

    doc = json.loads((Path(args.out) / "summary.json").read_text())
    param = doc["parameter"]
    print(f"\n{param:>10}  {'F(t_final)':>10}  {'stderr':>8}  baselines")
    for p in doc["points"]:
        base = "  ".join(f"{k}={v:.4f}" for k, v in p["analytic_final"].items())
        print(f"{p['value']:>10}  {p['final_fidelity']:>10.4f}  {p['final_stderr']:>8.4f}  {base}")
    return 0


if __name__ == "__main__":
    sys.exit("run one of the run_*.py scripts instead")
