"""FWM noise of optimal ATS and EIT memories over B = 10..40 linewidths, as CSV.

Pass ``full`` as the first argument to put the full linewidth Gamma in the
noise exponent instead of Gamma / 2.
"""

import csv
import sys

import numpy as np

from atsmem import fwm
from atsmem.phys import rb87


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    convention = argv[0] if argv else "half"
    rb = rb87()
    B = np.linspace(10, 40, 31) * rb.Gamma_eg / (2 * np.pi)
    rows = fwm.protocol_noise_curve(B, rb, convention)
    out = csv.DictWriter(sys.stdout, fieldnames=fwm.CSV_COLUMNS, lineterminator="\n")
    out.writeheader()
    for r in rows:
        out.writerow({k: f"{v:.8g}" for k, v in r.items()})


if __name__ == "__main__":
    main()
