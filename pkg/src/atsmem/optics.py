"""Gaussian probe geometry and resonant optical depth of the cloud.

The probe is assumed far below saturation, so transmission obeys Beer's law
pointwise: I_out(x, y) = I_in(x, y) * exp(-d0(x, y)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad, trapezoid
from scipy.special import erf, erfc

from .cloud import CloudState, column_density
from .errors import ConvergenceError, DomainError
from .phys import AtomSpecies


@dataclass(frozen=True)
class BeamProfile:
    """Gaussian probe with 1/e^2 intensity diameters ``r_px``, ``r_py`` (m).

    I(x, y) = I0 exp(-2 x^2 / w_x^2) exp(-2 y^2 / w_y^2) with 1/e^2 radii
    w = r_p / 2, i.e. exp(-x^2 / (2 s^2)) with rms width s = r_p / 4.
    """

    r_px: float
    r_py: float

    def __post_init__(self):
        if not (self.r_px > 0 and self.r_py > 0):
            raise DomainError(f"beam diameters must be positive, got {self.r_px}, {self.r_py}")

    @classmethod
    def circular(cls, r_p: float) -> BeamProfile:
        return cls(r_p, r_p)

    def intensity(self, x, y, i0: float = 1.0):
        return i0 * np.exp(-8 * np.asarray(x)**2 / self.r_px**2 - 8 * np.asarray(y)**2 / self.r_py**2)

    @property
    def power(self) -> float:
        """Integral of the unit-peak intensity over the plane."""
        return math.pi / 8 * self.r_px * self.r_py


def peak_od(cloud: CloudState, line: str | None = None, species: AtomSpecies | None = None) -> float:
    """On-axis resonant optical depth d0 = sigma_line * column_density(0, 0)."""
    species = cloud.species if species is None else species
    return species.line(line).cross_section * float(column_density(0.0, 0.0, cloud))


BEAM_CUTOFF = 2.5  # |x| beyond which a unit-peak probe carries < e^-50 intensity, in diameters
COARSE = 65
TAIL_EXPONENT = 60.0


def effective_od_profile(beam: BeamProfile, d0: Callable[[float, float], float],
                         half_width: tuple[float, float],
                         y_break: Callable[[float], float] | None = None,
                         x_break: float | None = None,
                         rtol: float = 1e-9,
                         d0_grid: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None) -> float:
    """Beam-averaged optical depth -ln(P_out / P_in) of a transverse OD map.

    ``d0(x, y)`` must be even in x and y and negligible outside the box
    ``|x| <= half_width[0], |y| <= half_width[1]``; outside the box the
    probe passes unattenuated and that power is added analytically.
    ``x_break``/``y_break`` mark kinks (a Thomas-Fermi edge) where the
    adaptive rule should split. ``d0_grid`` is an optional vectorised
    version of ``d0`` used for the coarse pre-scan.

    Small depths are computed from the absorbed power, large ones from the
    transmitted power rescaled by its largest integrand value, so neither
    1 - e^-d nor e^-d is ever formed directly.
    """
    ax, ay = half_width
    wx, wy = beam.r_px, beam.r_py
    vec = d0_grid if d0_grid is not None else np.vectorize(d0, otypes=[float])

    def log_in(x, y):
        return -8 * x * x / wx**2 - 8 * y * y / wy**2

    def quadrant(f, bx, by):
        def inner(x):
            pts = None
            if y_break is not None:
                yb = y_break(x)
                if 0 < yb < by:
                    pts = [yb]
            return quad(lambda y: f(x, y), 0.0, by, points=pts, epsabs=0.0, epsrel=rtol, limit=200)[0]

        pts = [x_break] if x_break is not None and 0 < x_break < bx else None
        val, err = quad(inner, 0.0, bx, points=pts, epsabs=0.0, epsrel=rtol, limit=200)
        if not np.isfinite(val) or (val > 0 and err > max(10 * rtol, 1e-6) * val):
            raise ConvergenceError("optical depth quadrature did not converge", integral=val, abserr=err)
        return 4 * val

    def grid(bx, by):
        gx, gy = np.meshgrid(np.linspace(0, bx, COARSE), np.linspace(0, by, COARSE), indexing="ij")
        return gx, gy, log_in(gx, gy), vec(gx, gy)

    # absorbed power only needs the region the beam actually illuminates
    bx, by = min(ax, BEAM_CUTOFF * wx), min(ay, BEAM_CUTOFF * wy)

    def absorbed_fraction():
        f = quadrant(lambda x, y: math.exp(log_in(x, y)) * -math.expm1(-d0(x, y)), bx, by)
        return f / beam.power

    # coarse trapezoid estimate picks the numerically safe branch
    gx, gy, li, dg = grid(bx, by)
    est = 4 * trapezoid(trapezoid(np.exp(li) * -np.expm1(-dg), gy[0], axis=1), gx[:, 0]) / beam.power
    if est < 0.7:
        absorbed = absorbed_fraction()
        if absorbed < 0.5:
            return -math.log1p(-absorbed)

    # strongly absorbing: rescale the transmitted integrand by its peak on a coarse grid
    ex = erf(math.sqrt(8) * ax / wx)
    outside = erfc(math.sqrt(8) * ax / wx) + erfc(math.sqrt(8) * ay / wy) * ex
    _, _, li, dg = grid(ax, ay)
    shift = float((li - dg).max())
    # where even the unattenuated probe is below e^-60 of the rescaled peak the integrand is dropped
    reach = math.sqrt((TAIL_EXPONENT - shift) / 8)
    tx, ty = min(ax, reach * wx), min(ay, reach * wy)
    inside = quadrant(lambda x, y: math.exp(log_in(x, y) - d0(x, y) - shift), tx, ty) / beam.power
    with np.errstate(divide="ignore"):
        log_t = np.logaddexp(shift + math.log(inside), np.log(outside))
    return -float(log_t)


def _scalar_od_map(cloud: CloudState, sigma: float) -> Callable[[float, float], float]:
    """Pure-float version of ``sigma * column_density`` for use inside nested quadrature."""
    a_th = b_th = c_th = 0.0
    if cloud.n_th > 0:
        sx, sy, _ = (float(v) for v in cloud.thermal_widths)
        a_th = sigma * cloud.n_th / (2 * math.pi * sx * sy)
        b_th, c_th = 0.5 / sx**2, 0.5 / sy**2
    a_b = ix = iy = 0.0
    if cloud.has_condensate:
        rx, ry, rz = (float(v) for v in cloud.tf_radii)
        a_b = sigma * cloud.peak_bec_density * 4 * rz / 3
        ix, iy = 1 / rx**2, 1 / ry**2

    def d0(x, y):
        x2, y2 = x * x, y * y
        out = a_th * math.exp(-b_th * x2 - c_th * y2) if a_th else 0.0
        if a_b:
            u = 1.0 - ix * x2 - iy * y2
            if u > 0:
                out += a_b * u * math.sqrt(u)
        return out

    return d0


def effective_od(beam: BeamProfile, cloud: CloudState, line: str | None = None,
                 species: AtomSpecies | None = None, rtol: float = 1e-9) -> float:
    """Optical depth seen by a Gaussian probe passing through ``cloud`` along z."""
    species = cloud.species if species is None else species
    if cloud.n_total <= 0:
        return 0.0
    sigma = species.line(line).cross_section
    d0 = _scalar_od_map(cloud, sigma)

    ext = cloud.extent()
    x_break = y_break = None
    if cloud.has_condensate:
        rx, ry, _ = cloud.tf_radii
        x_break = float(rx)

        def y_break(x):
            u = 1.0 - (x / rx) ** 2
            return ry * math.sqrt(u) if u > 0 else -1.0

    return effective_od_profile(beam, d0, half_width=(float(ext[0]), float(ext[1])),
                                y_break=y_break, x_break=x_break, rtol=rtol,
                                d0_grid=lambda x, y: sigma * column_density(x, y, cloud))
