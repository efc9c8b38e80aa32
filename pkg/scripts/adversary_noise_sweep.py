#!/usr/bin/env python3
"""Sweep the adversary's observation noise and the detector threshold.

Two CSV tables via the CLI sweep machinery:

  1. alpha* versus rho_adv — a noisier view of the transmission makes
     cancelling the injected noise harder, so the attack weakens;
  2. false-alarm rate and alpha* versus delta — loosening the threshold
     trades fewer genuine rejections for more forgeries.

Usage: python3 scripts/adversary_noise_sweep.py [--trials N] [--out DIR]
"""

import argparse
import os
import sys

from awgnauth.cli import main as cli_main

BASE_ARGS = [
    "base.kind=gaussian", "base.n=200", "base.messages=6", "base.omega=1.0",
    "overlay.levels=[0.0,0.5]", "overlay.counts=[3,2]",
    "auth.rho_delta=1.0", "channel.rho_dec=0.1",
]


def run_sweep(axis, values, metrics, trials, extra, out_path):
    args = ["sweep", "--axis", axis, "--values", values,
            *BASE_ARGS, *extra,
            f'run.metrics={metrics}', f"run.trials={trials}",
            "run.max_pairs=6"]
    if out_path:
        args += ["--out", out_path]
    return cli_main(args)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=10000)
    ap.add_argument("--out", default=None, help="directory for CSV tables")
    args = ap.parse_args(argv)

    if args.out:
        os.makedirs(args.out, exist_ok=True)
    path = (os.path.join(args.out, "alpha_vs_rho_adv.csv")
            if args.out else None)
    print("# alpha* versus rho_adv (delta=0.1)")
    rc1 = run_sweep("channel.rho_adv", "1e-06,0.001,0.1,1", '["alpha_star"]',
                    args.trials, ["auth.delta=0.1"], path)

    path = (os.path.join(args.out, "tradeoff_vs_delta.csv")
            if args.out else None)
    print("# false-alarm / alpha* trade-off versus delta (rho_adv=0.01)")
    rc2 = run_sweep("auth.delta", "0.05,0.1,0.2,0.4",
                    '["false_alarm","alpha_star"]', args.trials,
                    ["channel.rho_adv=0.01"], path)
    return max(rc1, rc2)


if __name__ == "__main__":
    sys.exit(main())
