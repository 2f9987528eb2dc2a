"""Inner-radius / pre-stretch / layer sweep of the circular-sector layout.

    python scripts/design_sweep.py --out sweep.csv
"""

import argparse

import numpy as np

from desense.config import prototype_film
from desense.design import sweep, write_sweep_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="design_sweep.csv")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    rows = sweep(
        prototype_film(),
        ri_values=np.arange(10.0, 55.0, 5.0).tolist(),
        prestretch_values=(3.0, 4.0),
        layer_values=(1, 2),
        workers=args.workers,
    )
    write_sweep_csv(rows, args.out)
    ok = [r for r in rows if r["stretch_ok"]]
    best = max(ok, key=lambda r: r["sens_pF_per_mm"] / r["zgain_per_mm"])
    print(f"{len(rows)} designs scored ({len(ok)} stretch-feasible) -> {args.out}")
    print("best sensitivity per unit z-gain: "
          + ", ".join(f"{k}={best[k]:.4g}" if isinstance(best[k], float) else f"{k}={best[k]}" for k in best))


if __name__ == "__main__":
    main()
