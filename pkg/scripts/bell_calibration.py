"""Bell-pair fidelity against the preparation depolarizing strength.

Shows the decoherence-only fidelity, the strength that hits the target, and
how the target moves with the CPHASE durations.
"""

import argparse
from dataclasses import replace

import numpy as np

from qteleport.protocol import Device, bell_pair_fidelity, calibrate_bell_depolarizing


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--target", type=float, default=0.93)
    args = ap.parse_args()
    dev = Device.reference(bell_depolarizing=0.0)
    print(f"decoherence only: F_Bell = {bell_pair_fidelity(dev):.4f}")
    p = calibrate_bell_depolarizing(dev, args.target)
    print(f"depolarizing p for F_Bell = {args.target}: {p:.6f}")
    for q in np.linspace(0, 2 * p, 5):
        print(f"  p = {q:.4f}  F_Bell = {bell_pair_fidelity(replace(dev, bell_depolarizing=q)):.4f}")
    for scale in (0.5, 1.0, 2.0):
        d = replace(dev, cphase_q1q2_time=dev.cphase_q1q2_time * scale, cphase_q2q3_time=dev.cphase_q2q3_time * scale)
        print(f"CPHASE durations x{scale}: decoherence-only F_Bell {bell_pair_fidelity(d):.4f}")


if __name__ == "__main__":
    main()
