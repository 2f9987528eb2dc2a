"""Repeat the replica calibration campaign over many seeds.

Prints, per seed, the AC plane, the reconstruction scatter on a fresh grid
and the mean cross-set deviation, then the averages.

    python scripts/replica_campaign.py --seeds 20
"""

import argparse
import time

import numpy as np

from desense import calibration as cal
from desense.config import replica_layout, replica_noise
from desense.reconstruction import RobotGeometry, propagate_error, reconstruct_xy
from desense.simulator import GridSpec, run_grid_protocol, split_sets


def one_seed(layout, seed):
    sets = split_sets(run_grid_protocol(layout, GridSpec(), replica_noise(seed)))
    ac = cal.calibrate_sets(sets, "AC")
    bd = cal.calibrate_sets(sets, "BD")
    fresh = run_grid_protocol(layout, GridSpec(sets=(1,)), replica_noise(10_000 + seed))
    err = np.array([np.subtract(reconstruct_xy(ac["all"], bd["all"], s), (s.true_pose.x, s.true_pose.y))
                    for s in fresh])
    reports = cal.deviation_matrix(sets, "AC", ac) + cal.deviation_matrix(sets, "BD", bd)
    return ac["all"], err.std(axis=0), cal.mean_cross_rms(reports), max(r.max_mm for r in reports)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=20)
    args = ap.parse_args()

    layout = replica_layout()
    start = time.perf_counter()
    stds, cross, worst = [], [], []
    print(f"{'seed':>4} {'alpha':>7} {'beta':>8} {'gamma':>7} {'std_x':>7} {'std_y':>7} {'xRMS':>7}")
    for seed in range(args.seeds):
        plane, std, rms, mx = one_seed(layout, seed)
        stds.append(std)
        cross.append(rms)
        worst.append(mx)
        print(f"{seed:>4} {plane.alpha:>7.2f} {plane.beta:>8.2f} {plane.gamma:>7.1f} "
              f"{std[0]:>7.3f} {std[1]:>7.3f} {rms:>7.3f}")
    sx, sy = np.mean(stds, axis=0)
    sigma = float(np.mean(cross))
    robot = RobotGeometry(200.0, 200.0)
    print(f"\nmean std (x, y): ({sx:.3f}, {sy:.3f}) mm")
    print(f"mean cross-set RMS deviation: {sigma:.3f} mm, mean max: {np.mean(worst):.3f} mm")
    print(f"end-effector sigma at lp = l12 = 200 mm: {propagate_error(sigma, sigma, robot):.3f} mm")
    print(f"{args.seeds} seeds in {time.perf_counter() - start:.2f} s")


if __name__ == "__main__":
    main()
