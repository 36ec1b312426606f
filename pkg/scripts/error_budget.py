"""Readout error budget as a function of the assignment fidelities.

Sweeps the joint-readout fidelity at fixed Q3 fidelity and prints both
misassignment models next to the configured operating point.
"""

import argparse
from dataclasses import replace
from pathlib import Path

import numpy as np

from qteleport.cli import budget_report
from qteleport.config import load_config
from qteleport.readout import PHASE_PRESERVING, PHASE_SENSITIVE, calibrate_discriminator, confusion_matrix
from qteleport.tomography import error_budget

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default=ROOT / "configs" / "reference.yaml")
    args = ap.parse_args()
    cfg = load_config(args.config)
    rep = budget_report(cfg)
    for key in ("limit_readout", "post_selected", "all_outcomes", "posterior_post_selected", "posterior_all_outcomes"):
        print(f"{key:24s} {rep[key]:.4f}")

    q3 = confusion_matrix(cfg.readout_model("q3"), cfg.q3_t1s())
    print("\njoint fidelity  post-selected  all-outcomes   (infidelity model / posterior model)")
    # decay during integration caps the four-way fidelity near 0.95
    for f in np.arange(0.80, 0.951, 0.03):
        ps = calibrate_discriminator(f, PHASE_SENSITIVE, 2, cfg.bell_t1s())
        pp = calibrate_discriminator(f, PHASE_PRESERVING, 2, cfg.bell_t1s())
        cps, cpp = confusion_matrix(ps, cfg.bell_t1s()), confusion_matrix(pp, cfg.bell_t1s())
        a = error_budget(q3, cps, "post_selected")[1], error_budget(q3, cps, "post_selected", model="posterior")[1]
        b = error_budget(q3, cpp, "all_outcomes")[1], error_budget(q3, cpp, "all_outcomes", model="posterior")[1]
        print(f"  {f:.2f}          {a[0]:.4f} / {a[1]:.4f}   {b[0]:.4f} / {b[1]:.4f}")


if __name__ == "__main__":
    main()
