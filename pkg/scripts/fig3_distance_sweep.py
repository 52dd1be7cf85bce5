"""SKR against distance for each attack, at two MIMO array sizes.

    python3 scripts/fig3_distance_sweep.py --out results/ --jobs 2
"""

import argparse
from dataclasses import replace
from pathlib import Path

from risqkd.experiment import emit_results, load_config, run_sweep

HERE = Path(__file__).resolve().parent


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--config", type=Path, default=HERE.parent / "configs" / "distance_sweep.json")
    p.add_argument("--out", type=Path, default=Path("results"))
    p.add_argument("--sizes", type=int, nargs="+", default=[8, 16])
    p.add_argument("--jobs", type=int, default=1)
    args = p.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    base = load_config(args.config)
    for n in args.sizes:
        cfg = replace(base, system=replace(base.system, n_tx=n, n_rx=n))
        rows = run_sweep(cfg, jobs=args.jobs)
        path = emit_results(rows, args.out / f"distance_sweep_{n}x{n}.csv", "csv")
        print(f"{n}x{n} -> {path}")
        for r in rows:
            print(f"  d={r.sweep_value:6.2f} m  {r.scenario:>6}  SKR={r.skr_clamped:.4e}  {r.error}")


if __name__ == "__main__":
    main()
