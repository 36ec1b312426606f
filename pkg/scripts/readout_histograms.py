"""IQ histograms of the joint readout in both amplifier modes, plus confusion matrices.

    python scripts/readout_histograms.py --samples 200000 --out out/hist
"""

import argparse
from pathlib import Path

import numpy as np

from qteleport.config import load_config
from qteleport.readout import (
    PHASE_PRESERVING,
    PHASE_SENSITIVE,
    confusion_matrix,
    histogram_rows,
    sample_readout,
    write_histogram,
)

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--config", default=ROOT / "configs" / "reference.yaml")
    ap.add_argument("--samples", type=int, default=200_000, help="samples per prepared state")
    ap.add_argument("--bins", type=int, default=60)
    ap.add_argument("--out", type=Path, default=Path("out/hist"))
    args = ap.parse_args()
    cfg = load_config(args.config)
    rng = np.random.default_rng(cfg.seed)
    args.out.mkdir(parents=True, exist_ok=True)
    np.set_printoptions(precision=4, suppress=True)

    for mode, quads in ((PHASE_SENSITIVE, 1), (PHASE_PRESERVING, 2)):
        model = cfg.readout_model(mode)
        samples, labels = [], []
        for label in model.labels:
            samples.append(sample_readout(label, model, cfg.bell_t1s(), rng, size=args.samples))
            labels += [label] * args.samples
        rows = histogram_rows(np.concatenate(samples), labels, bins=args.bins, quadratures=quads)
        path = args.out / f"hist_{mode}.csv"
        write_histogram(path, rows)
        print(f"{mode}: sigma {model.sigma:.4f}, wrote {path}")
        print(confusion_matrix(model, cfg.bell_t1s()))


if __name__ == "__main__":
    main()
