"""Maximum secure distance against detector noise, at two MIMO array sizes."""

import argparse
from dataclasses import replace
from pathlib import Path

from risqkd.experiment import load_config, secure_distance_table

HERE = Path(__file__).resolve().parent


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--config", type=Path, default=HERE.parent / "configs" / "secure_distance.json")
    p.add_argument("--sizes", type=int, nargs="+", default=[8, 16])
    p.add_argument("--threshold", type=float, help="SKR threshold in bits per use")
    p.add_argument("--jobs", type=int, default=1)
    args = p.parse_args()

    base = load_config(args.config)
    if args.threshold is not None:
        base = replace(base, secure_distance=replace(base.secure_distance, threshold_bits=args.threshold))
    print(f"threshold {base.secure_distance.threshold_bits:g} bits/use")
    for n in args.sizes:
        cfg = replace(base, system=replace(base.system, n_tx=n, n_rx=n))
        for r in secure_distance_table(cfg, jobs=args.jobs):
            print(f"{n:>2}x{n:<2} sigma2={r.sweep_value:<5g} {r.scenario:>6}: {r.distance_m:8.2f} m")


if __name__ == "__main__":
    main()
