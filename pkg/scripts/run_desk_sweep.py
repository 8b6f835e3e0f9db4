#!/usr/bin/env python3
"""Desk-scale tour of the three experiments: a reduced phase-transition
sweep, the dense-signal error-constant scatter, and the measurement-ratio
statistic. Finishes in a few minutes on one core.

Outputs land under --out (default desk_results/):
  sweep/        records.jsonl, summary.json, grid.csv, heatmap.svg
  c0/           c0_scatter.jsonl, c0_summary.json, c0_scatter.svg
  ratio.json    moments and KS distance for both scalar modes
"""
import argparse
import json
import os
import sys
import time

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from qcs import harness


def parse_args():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=64, help="ambient dimension")
    p.add_argument("--trials", type=int, default=40, help="trials per cell")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="desk_results")
    return p.parse_args()


def main():
    args = parse_args()
    os.makedirs(args.out, exist_ok=True)

    # Sweep over two measurement counts, sparsities spanning the
    # transition for each. Rates should fall from ~1 to ~0 along s.
    t0 = time.time()
    sweep_cfg = harness.ExperimentConfig(
        n=args.n,
        m_values=(16, 32),
        s_rule=(1, 2, 4, 6, 8, 10, 12),
        trials=args.trials,
        base_seed=args.seed,
        out_dir=os.path.join(args.out, "sweep"),
    )
    diagram = harness.run_sweep(sweep_cfg, verbose=True)
    diagram.to_csv(os.path.join(sweep_cfg.out_dir, "grid.csv"))
    harness.emit_plot(diagram, os.path.join(sweep_cfg.out_dir, "heatmap.svg"))
    print(f"sweep done in {time.time() - t0:.1f}s", flush=True)
    for (m, s), rate in sorted(diagram.rates.items()):
        print(f"  m={m:3d} s={s:3d} rate={rate:.3f}")

    # Error-constant lower bounds from dense (unrecoverable) signals.
    t0 = time.time()
    c0_cfg = harness.ExperimentConfig(
        n=args.n,
        m_values=(16,),
        trials=max(4, args.trials // 10),
        base_seed=args.seed,
        out_dir=os.path.join(args.out, "c0"),
    )
    scatter = harness.run_c0_experiment(c0_cfg, s_values=[1, 2, 4, 8],
                                        verbose=True)
    harness.emit_plot(scatter, os.path.join(c0_cfg.out_dir, "c0_scatter.svg"))
    print(f"c0 done in {time.time() - t0:.1f}s, "
          f"{len(scatter.points)} points, {scatter.skipped} skipped", flush=True)
    for s, v in sorted(scatter.max_per_s().items()):
        print(f"  s={s:2d} max empirical bound={v:.3f}")

    # Concentration of ||Phi x||^2 / ||x||^2. Quaternion variance should
    # come out near 1/(2m), real mode near 2/m, a factor-4 spread.
    t0 = time.time()
    ratio = {mode: harness.run_ratio_test(16, 20_000, base_seed=args.seed,
                                          mode=mode)
             for mode in ("quaternion", "real")}
    with open(os.path.join(args.out, "ratio.json"), "w") as fh:
        json.dump(ratio, fh, sort_keys=True, indent=1)
    print(f"ratio done in {time.time() - t0:.1f}s", flush=True)
    for mode, r in ratio.items():
        print(f"  {mode}: mean={r['mean']:.4f} var={r['variance']:.5f} "
              f"ks={r['ks_distance_to_gamma']:.4f}")

    print(json.dumps({"out_dir": args.out}, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
