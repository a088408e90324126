"""Run every bundled experiment config through the CLI.

Each scenario writes its CSV and meta sidecar into the output directory.
Pass --only to run a subset, --validate to just check configs and print
point counts without running anything.
"""
import argparse
import os
import sys
import time

from dressedsim.cli import SCHEMAS, main as cli_main

HERE = os.path.dirname(os.path.abspath(__file__))
CONFIG_DIR = os.path.join(HERE, "configs")


def run(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default=os.path.join(HERE, "out"))
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--only", nargs="*", choices=sorted(SCHEMAS),
                    default=sorted(SCHEMAS))
    ap.add_argument("--validate", action="store_true")
    args = ap.parse_args(argv)

    os.makedirs(args.out_dir, exist_ok=True)
    failures = []
    for scenario in args.only:
        cfg = os.path.join(CONFIG_DIR, f"{scenario}.cfg")
        mode = "validate" if args.validate else "run"
        argv_cli = [scenario, mode, "--config", cfg,
                    "--threads", str(args.threads)]
        if not args.validate:
            argv_cli += ["--out", os.path.join(args.out_dir,
                                               f"{scenario}.csv")]
        print(f"== {scenario} ==", flush=True)
        t0 = time.time()
        rc = cli_main(argv_cli)
        print(f"   exit {rc}, {time.time() - t0:.1f}s", flush=True)
        if rc != 0:
            failures.append(scenario)
    if failures:
        print("FAILED:", ", ".join(failures))
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(run())
