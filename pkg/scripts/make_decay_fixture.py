"""Regenerate the bundled noiseless storage-time scan used by ``atsmem fit``.

Mixed cloud at 340 nK (F_BEC = 0.15), 110 degree probe-control angle on D2,
tau_mag = 7 us, anchored at the shortest storage time t_s0 = 2 us.
"""

import json
import math
from pathlib import Path

import numpy as np

from atsmem.decoherence import DecoherenceParams, decay_fit_model, tau_thermal
from atsmem.phys import rb87

OUT = Path(__file__).resolve().parents[1] / "src" / "atsmem" / "data"


def main():
    sp = rb87()
    p = DecoherenceParams(theta=math.radians(110), wavelength=sp.lambda_probe("D2"), mass=sp.mass,
                          temperature=340e-9, f_bec=0.15, tau_mag=7e-6, t_s0=2e-6)
    tau_th = tau_thermal(p)
    eta0 = 0.15
    t = np.linspace(2e-6, 10e-6, 17)
    eta = decay_fit_model(t, eta0, p)
    lines = ["storage_time,efficiency"] + [f"{a:.17g},{b:.17g}" for a, b in zip(t, eta)]
    (OUT / "decay_fixture.csv").write_text("\n".join(lines) + "\n")
    params = {"f_bec": 0.15, "tau_th": tau_th, "t_s0": 2e-6, "tau_mag": 7e-6, "eta0": eta0}
    (OUT / "decay_fixture.json").write_text(json.dumps(params, indent=1) + "\n")
    print(json.dumps(params))


if __name__ == "__main__":
    main()
