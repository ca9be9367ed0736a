"""Effective optical depth and ATS efficiency of a cooling cloud, printed as CSV.

A fixed atom number is cooled through the condensation temperature in a
1043 rad/s isotropic trap; the condensate fraction follows the ideal-gas law
with T_c = 600 nK. Each row is one (temperature, probe diameter) pair after
3.5 ms of free expansion, for a 20 ns pulse stored on D1.
"""

import argparse
import csv
import sys

import numpy as np

from atsmem import memory, optics
from atsmem.cloud import CloudState, TrapConfig, condensate_fraction_from_temperature, expand
from atsmem.phys import rb87


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-total", type=float, default=1e5)
    ap.add_argument("--t-c", type=float, default=600e-9)
    ap.add_argument("--tof", type=float, default=3.5e-3)
    ap.add_argument("--tau-p", type=float, default=20e-9)
    args = ap.parse_args(argv)

    rb = rb87(memory_line="D1")
    trap = TrapConfig.isotropic(1043.0)
    F = memory.ats_factor(memory.bandwidth_from_duration(args.tau_p), rb)
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["temperature", "f_bec", "beam_diameter", "effective_od", "eta_forward", "eta_backward"])
    for T in np.linspace(150e-9, 1.5e-6, 10):
        f = condensate_fraction_from_temperature(T, args.t_c)
        cloud = expand(CloudState(args.n_total, T, f, trap, rb), args.tof)
        for r_p in (5e-6, 25e-6, 50e-6):
            d = optics.effective_od(optics.BeamProfile.circular(r_p), cloud)
            out.writerow([f"{T:.4g}", f"{f:.4f}", f"{r_p:.3g}", f"{d:.6g}",
                          f"{memory.eta_forward(d, F):.6g}", f"{memory.eta_backward(d, F):.6g}"])


if __name__ == "__main__":
    main()
