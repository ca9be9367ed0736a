"""Fit-model decay curves and 1/e lifetimes at three cloud temperatures, as CSV.

Probe and control are 110 degrees apart on D2. The thermal time comes from
the diffusion model, tau_mag is the fitted dephasing constant, and curves are
anchored at the shortest storage time of 2 us.
"""

import csv
import math
import sys

import numpy as np

from atsmem import decoherence
from atsmem.decoherence import DecoherenceParams
from atsmem.phys import rb87

# (temperature K, condensate fraction, tau_mag s)
CASES = ((6200e-9, 0.0, 7.0e-6), (340e-9, 0.15, 7.0e-6), (280e-9, 0.8, 16.5e-6))
T_S0 = 2e-6


def main():
    rb = rb87()
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["temperature", "f_bec", "tau_th", "tau_mag", "lifetime", "storage_time", "relative_efficiency"])
    for T, f, tau_mag in CASES:
        p = DecoherenceParams(theta=math.radians(110), wavelength=rb.lambda_probe("D2"), mass=rb.mass,
                              temperature=T, f_bec=f, tau_mag=tau_mag, t_s0=T_S0)
        life = decoherence.memory_lifetime(p, "fit")
        for t in np.linspace(T_S0, 30e-6, 15):
            out.writerow([f"{T:.4g}", f, f"{decoherence.tau_thermal(p):.6g}", tau_mag, f"{life:.6g}",
                          f"{t:.4g}", f"{decoherence.decay_fit_model(t, 1.0, p):.6g}"])


if __name__ == "__main__":
    main()
