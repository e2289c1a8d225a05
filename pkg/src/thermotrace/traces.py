"""Contour residues, Gaussian mode integrals, and closed-form trace coefficients.

The heat semigroup is recovered from the resolvent through a contour
integral ``(1/2 pi i) closed-int e^{-t tau} (...) d tau`` taken
counterclockwise around the spectrum.  For the leading parametrix trace the
poles are simple and sit at ``rate * |xi|^2`` for the three channels, so the
residues produce a weighted sum of Gaussians in ``xi``; integrating those
over modes and over the body yields the interior coefficient, while the
mirror-point (image) contribution integrates across the boundary layer to a
quarter of the surface density per channel.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, PoleError
from .geometry import GeometryJet
from .params import BCKind, MaterialParams

MAX_COMBINED_POLE_ORDER = 4
POLE_MERGE_TOL = 1e-12
POLE_NEAR_TOL = 1e-8


@dataclass(frozen=True)
class HeatCoefficients:
    """Leading heat-trace expansion coefficients for one body.

    ``a0`` scales ``t^{-n/2}`` by the interior volume; ``a1_dirichlet`` and
    ``a1_neumann`` scale ``t^{-(n-1)/2}`` by the boundary area, with opposite
    signs for the two boundary conditions.
    """

    n: int
    a0: float
    a1_dirichlet: float
    a1_neumann: float
    provenance: str = "closed-form"

    def __post_init__(self):
        if not self.a0 > 0:
            raise ParameterError(f"a0 must be positive, got {self.a0}")
        scale = max(abs(self.a1_dirichlet), abs(self.a1_neumann), 1e-300)
        if abs(self.a1_dirichlet + self.a1_neumann) > 1e-12 * scale:
            raise ParameterError(
                "boundary coefficients must be opposite in sign: "
                f"{self.a1_dirichlet} vs {self.a1_neumann}"
            )

    def a1(self, bc: BCKind) -> float:
        return self.a1_dirichlet if bc is BCKind.DIRICHLET else self.a1_neumann


def _merge_poles(pole_rates, xi_norm_sq):
    locations = []
    for rate, order in pole_rates:
        if order < 1 or int(order) != order:
            raise ValueError(f"pole order must be a positive integer, got {order}")
        loc = rate * xi_norm_sq
        for entry in locations:
            if abs(entry[0] - loc) <= POLE_MERGE_TOL * (1.0 + abs(loc)):
                entry[1] += int(order)
                break
        else:
            locations.append([loc, int(order)])
    scale = max(abs(loc) for loc, _ in locations)
    for i, (loc_i, _) in enumerate(locations):
        for loc_j, _ in locations[i + 1:]:
            gap = abs(loc_i - loc_j)
            if gap < POLE_NEAR_TOL * (1.0 + scale):
                warnings.warn(
                    f"near-coincident poles at {loc_i} and {loc_j} "
                    "(gap below 1e-8): residue evaluation is ill-conditioned",
                    RuntimeWarning,
                )
    return locations


def residue_heat(pole_rates, xi_norm_sq: float, t: float) -> float:
    """Contour integral ``(1/2 pi i) closed-int e^{-t tau} prod (tau - c_q |xi|^2)^{-m_q} d tau``.

    ``pole_rates`` is a list of ``(rate, order)`` pairs; coincident rates are
    merged into a single higher-order pole before evaluation.  A simple pole
    at ``c |xi|^2`` contributes ``e^{-t c |xi|^2}``; a pole of order ``m``
    carries the order-(m-1) Taylor factor of the exponential against the
    remaining factors (so a plain double pole yields ``-t e^{-t c |xi|^2}``).
    """
    if t <= 0:
        raise ValueError(f"t must be positive, got {t}")
    if not pole_rates:
        raise ValueError("at least one pole is required")
    poles = _merge_poles(pole_rates, xi_norm_sq)
    combined = sum(order for _, order in poles)
    if max(order for _, order in poles) > MAX_COMBINED_POLE_ORDER:
        raise PoleError(
            f"combined pole order {combined} above supported maximum "
            f"{MAX_COMBINED_POLE_ORDER}"
        )
    total = 0.0 + 0.0j
    for loc, order in poles:
        # Taylor series (in u = tau - loc) of e^{-t tau} * prod_{r != q} ...
        series = np.exp(-t * loc) * np.array(
            [(-t) ** i / math.factorial(i) for i in range(order)], dtype=complex
        )
        for other_loc, other_order in poles:
            if other_loc == loc:
                continue
            d = loc - other_loc
            factor = np.array(
                [math.comb(other_order + s - 1, s) * (-1.0) ** s / d ** (other_order + s)
                 for s in range(order)], dtype=complex
            )
            series = _truncated_product(series, factor, order)
        total += series[order - 1]
    if abs(total.imag) > 1e-10 * (1.0 + abs(total.real)):
        warnings.warn(f"residue sum has nontrivial imaginary part {total.imag:.3e}",
                      RuntimeWarning)
    return float(total.real)


def _truncated_product(a: np.ndarray, b: np.ndarray, length: int) -> np.ndarray:
    out = np.zeros(length, dtype=complex)
    for i, ai in enumerate(a):
        if ai == 0.0:
            continue
        top = min(length - i, len(b))
        out[i:i + top] += ai * b[:top]
    return out


def gaussian_mode_integral(n: int, rate: float, t: float) -> float:
    """Flat-measure Gaussian integral over modes: ``(2 pi)^{-n} int e^{-t c |xi|^2} d xi``.

    Equals ``(4 pi c t)^{-n/2}``.
    """
    if rate <= 0 or t <= 0:
        raise ValueError(f"rate and t must be positive, got rate={rate}, t={t}")
    return (4.0 * math.pi * rate * t) ** (-n / 2.0)


def image_mode_integral(n: int, rate: float, t: float, depth: float) -> float:
    """Mode integral with the mirror-point phase ``e^{i (0,...,2 depth) . xi}``.

    Equals ``(4 pi c t)^{-n/2} e^{-depth^2 / (c t)}``; at ``depth = 0`` it
    reduces to :func:`gaussian_mode_integral`.
    """
    if depth < 0:
        raise ValueError(f"depth must be nonnegative, got {depth}")
    return gaussian_mode_integral(n, rate, t) * math.exp(-depth ** 2 / (rate * t))


def boundary_layer_mass(rate: float, t: float) -> float:
    """Half-line integral of the image Gaussian across the boundary layer.

    ``int_0^inf (4 pi c t)^{-1/2} e^{-s^2/(c t)} ds`` is exactly ``1/4``
    for every rate and time, which is where the quarter factor of the
    boundary coefficient comes from.
    """
    if rate <= 0 or t <= 0:
        raise ValueError(f"rate and t must be positive, got rate={rate}, t={t}")
    return 0.25


def boundary_layer_tail(rate: float, t: float, cutoff: float) -> float:
    """Discarded tail ``int_cutoff^inf`` of the boundary-layer integral.

    Evaluates to ``(1/4) erfc(cutoff / sqrt(c t))``; for any fixed positive
    cutoff this vanishes faster than any power of ``t``.
    """
    if cutoff < 0:
        raise ValueError(f"cutoff must be nonnegative, got {cutoff}")
    return 0.25 * math.erfc(cutoff / math.sqrt(rate * t))


def interior_coefficient(params: MaterialParams, n: int, vol_omega: float) -> float:
    """Leading trace coefficient: volume times the channel sum at power n."""
    _check_domain_args(n, vol_omega, "vol_omega")
    return vol_omega / (4.0 * math.pi) ** (n / 2.0) * params.channel_sum(n, n)


def boundary_coefficient(params: MaterialParams, n: int, vol_boundary: float,
                         bc: BCKind) -> float:
    """Boundary trace coefficient: quarter of the surface channel density.

    Negative for Dirichlet, positive for Neumann.
    """
    _check_domain_args(n, vol_boundary, "vol_boundary", allow_zero=True)
    magnitude = (0.25 * vol_boundary / (4.0 * math.pi) ** ((n - 1) / 2.0)
                 * params.channel_sum(n, n - 1))
    return bc.sign * magnitude


def closed_form_coefficients(params: MaterialParams, n: int, vol_omega: float,
                             vol_boundary: float) -> HeatCoefficients:
    a1_d = boundary_coefficient(params, n, vol_boundary, BCKind.DIRICHLET)
    return HeatCoefficients(
        n=n,
        a0=interior_coefficient(params, n, vol_omega),
        a1_dirichlet=a1_d,
        a1_neumann=-a1_d,
        provenance="closed-form",
    )


def interior_trace_density(params: MaterialParams, jet_x: GeometryJet,
                           t: float) -> float:
    """Pointwise leading heat-trace density at a chart point.

    The contour residue of the leading parametrix trace is a channel sum of
    Gaussians in the covector; its mode integral in normal coordinates is
    position independent, ``(4 pi t)^{-n/2} sum_c w_c / c^{n/2}``.
    Integrating against the volume form reproduces the interior coefficient
    times ``t^{-n/2}``.
    """
    if t <= 0:
        raise ValueError(f"t must be positive, got {t}")
    n = jet_x.dim
    return sum(w * gaussian_mode_integral(n, c, t)
               for c, w in params.channel_rates(n))


def weyl_prediction(params: MaterialParams, n: int, vol_omega: float,
                    tau: float) -> float:
    """Leading-order eigenvalue count below ``tau``.

    ``vol / ((4 pi)^{n/2} Gamma(1 + n/2)) * channel_sum * tau^{n/2}``.
    """
    _check_domain_args(n, vol_omega, "vol_omega")
    if tau <= 0:
        raise ValueError(f"tau must be positive, got {tau}")
    return (vol_omega / ((4.0 * math.pi) ** (n / 2.0) * math.gamma(1.0 + n / 2.0))
            * params.channel_sum(n, n) * tau ** (n / 2.0))


def _check_domain_args(n, vol, name, allow_zero=False):
    if n < 1 or int(n) != n:
        raise ParameterError(f"dimension must be a positive integer, got {n}")
    if vol < 0 or (vol == 0 and not allow_zero):
        raise ParameterError(f"{name} must be positive, got {vol}")
