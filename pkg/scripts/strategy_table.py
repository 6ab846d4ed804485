"""Strategy comparison table (PSNR / SSIM / wall time) on the procedural samples.

    python scripts/strategy_table.py                    # desk scale, all samples
    python scripts/strategy_table.py --full-scale       # 500 x 500, 5000 epochs (hours)
    python scripts/strategy_table.py --samples target --epochs 300
"""

import argparse
import dataclasses
import logging
from pathlib import Path

from holofocus import io
from holofocus.config import default_output_root
from holofocus.experiments import DESK, FULL_SCALE, STRATEGIES, TABLE_COLUMNS, compare
from holofocus.samples import SAMPLES


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--full-scale", action="store_true")
    ap.add_argument("--samples", nargs="+", default=sorted(SAMPLES), choices=sorted(SAMPLES))
    ap.add_argument("--strategies", nargs="+", default=list(STRATEGIES), choices=STRATEGIES)
    ap.add_argument("--epochs", type=int)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--output", "-o", type=Path)
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

    setup = FULL_SCALE if args.full_scale else DESK
    changes = {k: v for k, v in (("epochs", args.epochs), ("seed", args.seed)) if v is not None}
    setup = dataclasses.replace(setup, **changes)
    out = args.output or default_output_root() / ("table_full" if args.full_scale else "table_desk")
    out.mkdir(parents=True, exist_ok=True)

    rows = []
    for sample in args.samples:
        rows.extend(compare(sample, setup, args.strategies))
        io.write_csv(out / "table.csv", rows, TABLE_COLUMNS)
    io.write_json(out / "manifest.json", {"setup": dataclasses.asdict(setup), "samples": args.samples,
                                          "strategies": args.strategies, "versions": io.versions()})
    for r in rows:
        print(f"{r['sample']:9s} {r['strategy']:18s} {r['psnr']:7.2f} dB  SSIM {r['ssim']:.3f}  "
              f"{r['wall_time']:8.1f}s")


if __name__ == "__main__":
    main()
