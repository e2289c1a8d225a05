"""Coordinate metrics and their derived differential-geometric objects.

A chart is a coordinate box together with a map ``x -> g_ij(x)``.  From the
metric and its first two derivative tensors the module builds the full
pointwise jet used by the symbol calculus: inverse metric, Christoffel
symbols ``G^k_ij = 1/2 g^kl (d_i g_jl + d_j g_il - d_l g_ij)``, their first
derivatives, the curvature tensor

    R^l_ijk = d_i G^l_jk - d_j G^l_ik + G^h_jk G^l_ih - G^h_ik G^l_jh,

and the Ricci contraction ``R_ij = g^kl g_jm R^m_ikl``.  Derivatives of the
metric come either from analytic callbacks (every built-in chart supplies
them) or from finite differences on the bare metric map.

Volume integrals over a chart use tensor-product Gauss-Legendre quadrature
against the Riemannian measure ``sqrt(det g) dx``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, NonSPDError

# Pinned finite-difference steps: first metric derivatives use second-order
# central differences at 1e-5*(1+|x|); second derivatives use nested
# fourth-order stencils at a larger step, which keeps the roundoff floor of
# the composed stencil near 1e-10.
FD_STEP_D1 = 1e-5
FD_STEP_D2 = 2e-3

_CENTRAL2 = ((-1, 1), (-0.5, 0.5))
_CENTRAL4 = ((-2, -1, 1, 2), (1.0 / 12.0, -8.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0))
_FORWARD2 = ((0, 1, 2), (-1.5, 2.0, -0.5))
_BACKWARD2 = ((0, -1, -2), (1.5, -2.0, 0.5))


@dataclass(frozen=True)
class MetricChart:
    """A single coordinate chart with metric and optional analytic derivatives.

    ``metric_d1(x)[i, j, k]`` is ``d g_ij / d x_k`` and
    ``metric_d2(x)[i, j, k, l]`` is ``d^2 g_ij / d x_k d x_l``.  When either
    callback is missing the chart operates in finite-difference mode.
    ``sample_box`` marks a safe interior region for random sampling, away
    from coordinate degeneracies at the domain edge.
    """

    name: str
    dim: int
    domain: np.ndarray
    metric: Callable[[np.ndarray], np.ndarray]
    metric_d1: Optional[Callable[[np.ndarray], np.ndarray]] = None
    metric_d2: Optional[Callable[[np.ndarray], np.ndarray]] = None
    fd_step: float = FD_STEP_D1
    sample_box: Optional[np.ndarray] = field(default=None)

    @property
    def derivative_mode(self) -> str:
        if self.metric_d1 is not None and self.metric_d2 is not None:
            return "analytic"
        return "finite-difference"

    def without_analytic_derivatives(self) -> "MetricChart":
        """Copy of this chart forced into finite-difference mode."""
        return replace(self, metric_d1=None, metric_d2=None,
                       name=self.name + "-fd")

    def contains(self, x: np.ndarray, slack: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.domain[:, 0] - slack)
                    and np.all(x <= self.domain[:, 1] + slack))

    def interior_box(self) -> np.ndarray:
        if self.sample_box is not None:
            return self.sample_box
        width = self.domain[:, 1] - self.domain[:, 0]
        margin = 0.05 * width
        return np.column_stack([self.domain[:, 0] + margin,
                                self.domain[:, 1] - margin])

    def random_interior_points(self, count: int, rng) -> np.ndarray:
        box = self.interior_box()
        return rng.uniform(box[:, 0], box[:, 1], size=(count, self.dim))


@dataclass(frozen=True)
class GeometryJet:
    """All pointwise metric data consumed by the symbol calculus."""

    x: np.ndarray
    g: np.ndarray
    g_inv: np.ndarray
    det_g: float
    sqrt_det_g: float
    gamma: np.ndarray        # gamma[k, i, j] = G^k_ij
    dgamma: np.ndarray       # dgamma[k, i, j, m] = d G^k_ij / d x_m
    riemann: np.ndarray      # riemann[l, i, j, k] = R^l_ijk
    ricci: np.ndarray        # ricci[i, j] = R_ij

    @property
    def dim(self) -> int:
        return self.g.shape[0]

    def xi_norm_sq(self, xi: np.ndarray) -> float:
        """Squared covector length ``g^ij xi_i xi_j``."""
        xi = np.asarray(xi, dtype=float)
        return float(xi @ self.g_inv @ xi)


def invert_metric(g: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Inverse of a symmetric positive definite metric matrix.

    Rejects non-SPD input with a diagnostic carrying the smallest
    eigenvalue and the condition number.
    """
    g = np.asarray(g, dtype=float)
    scale = np.max(np.abs(g))
    if scale == 0.0 or np.max(np.abs(g - g.T)) > tol * scale:
        raise NonSPDError("metric matrix is not symmetric")
    eig = np.linalg.eigvalsh(g)
    if eig[0] <= 0.0:
        raise NonSPDError(
            f"metric matrix is not positive definite (min eigenvalue {eig[0]:.3e})",
            min_eigenvalue=float(eig[0]),
            condition=float(eig[-1] / abs(eig[0])) if eig[0] != 0 else np.inf,
        )
    return np.linalg.inv(g)


def _fd_step(chart: MetricChart, x: np.ndarray, base: float) -> float:
    return base * (1.0 + float(np.linalg.norm(x)))


def _directional_stencil(chart, x, axis, h):
    """Pick a stencil whose evaluation points all stay inside the domain."""
    lo, hi = chart.domain[axis]
    if x[axis] - 2 * h >= lo and x[axis] + 2 * h <= hi:
        return _CENTRAL4
    if x[axis] - h >= lo and x[axis] + h <= hi:
        return _CENTRAL2
    if x[axis] + 2 * h <= hi:
        return _FORWARD2
    if x[axis] - 2 * h >= lo:
        return _BACKWARD2
    raise DomainError(
        f"axis {axis}: cannot place a difference stencil of step {h:.3e} "
        f"inside [{lo}, {hi}] around {x[axis]}"
    )


def _fd_axis_derivative(chart, fn, x, axis, h):
    offsets, coeffs = _directional_stencil(chart, x, axis, h)
    total = None
    for off, c in zip(offsets, coeffs):
        xp = np.array(x, dtype=float)
        xp[axis] += off * h
        val = c * np.asarray(fn(xp), dtype=float)
        total = val if total is None else total + val
    return total / h


def _metric_d1(chart: MetricChart, x: np.ndarray) -> np.ndarray:
    if chart.metric_d1 is not None:
        return np.asarray(chart.metric_d1(x), dtype=float)
    n = chart.dim
    h = _fd_step(chart, x, chart.fd_step)
    dg = np.empty((n, n, n))
    for k in range(n):
        lo, hi = chart.domain[k]
        # second-order central unless the stencil would leave the box
        if x[k] - h >= lo and x[k] + h <= hi:
            offsets, coeffs = _CENTRAL2
        elif x[k] + 2 * h <= hi:
            offsets, coeffs = _FORWARD2
        elif x[k] - 2 * h >= lo:
            offsets, coeffs = _BACKWARD2
        else:
            raise DomainError(f"axis {k}: step {h:.3e} does not fit the domain")
        acc = np.zeros((n, n))
        for off, c in zip(offsets, coeffs):
            xp = np.array(x, dtype=float)
            xp[k] += off * h
            acc += c * np.asarray(chart.metric(xp), dtype=float)
        dg[:, :, k] = acc / h
    return dg


def _metric_d2(chart: MetricChart, x: np.ndarray) -> np.ndarray:
    if chart.metric_d2 is not None:
        return np.asarray(chart.metric_d2(x), dtype=float)
    n = chart.dim
    h = _fd_step(chart, x, FD_STEP_D2)
    d2g = np.empty((n, n, n, n))
    for k in range(n):
        def first(y, _k=k):
            return _fd_axis_derivative(chart, chart.metric, y, _k, h)

        for l in range(k, n):
            val = _fd_axis_derivative(chart, first, x, l, h)
            d2g[:, :, k, l] = val
            d2g[:, :, l, k] = val
    return d2g


def _check_in_domain(chart: MetricChart, x: np.ndarray):
    if not chart.contains(x, slack=1e-12):
        raise DomainError(f"point {np.asarray(x)} outside chart '{chart.name}' domain")


def christoffel(chart: MetricChart, x: np.ndarray) -> np.ndarray:
    """Christoffel symbols ``G^k_ij`` at ``x``, indexed ``[k, i, j]``."""
    _check_in_domain(chart, x)
    x = np.asarray(x, dtype=float)
    g = np.asarray(chart.metric(x), dtype=float)
    g_inv = invert_metric(g)
    dg = _metric_d1(chart, x)
    # S[l, i, j] = d_i g_jl + d_j g_il - d_l g_ij
    s = (np.einsum("jli->lij", dg) + np.einsum("ilj->lij", dg)
         - np.einsum("ijl->lij", dg))
    return 0.5 * np.einsum("kl,lij->kij", g_inv, s)


def christoffel_derivative(chart: MetricChart, x: np.ndarray) -> np.ndarray:
    """First derivatives ``d G^k_ij / d x_m``, indexed ``[k, i, j, m]``."""
    _check_in_domain(chart, x)
    x = np.asarray(x, dtype=float)
    g = np.asarray(chart.metric(x), dtype=float)
    g_inv = invert_metric(g)
    dg = _metric_d1(chart, x)
    d2g = _metric_d2(chart, x)
    d2g = 0.5 * (d2g + d2g.transpose(0, 1, 3, 2))
    s = (np.einsum("jli->lij", dg) + np.einsum("ilj->lij", dg)
         - np.einsum("ijl->lij", dg))
    ds = (np.einsum("jlim->lijm", d2g) + np.einsum("iljm->lijm", d2g)
          - np.einsum("ijlm->lijm", d2g))
    dg_inv = -np.einsum("ka,abm,bl->klm", g_inv, dg, g_inv)
    return (0.5 * np.einsum("klm,lij->kijm", dg_inv, s)
            + 0.5 * np.einsum("kl,lijm->kijm", g_inv, ds))


def curvature(chart: MetricChart, x: np.ndarray) -> np.ndarray:
    """Curvature tensor ``R^l_ijk``, indexed ``[l, i, j, k]``."""
    gamma = christoffel(chart, x)
    dgamma = christoffel_derivative(chart, x)
    return _riemann_from_jets(gamma, dgamma)


def _riemann_from_jets(gamma: np.ndarray, dgamma: np.ndarray) -> np.ndarray:
    quad = np.einsum("hjk,lih->lijk", gamma, gamma)
    riem = np.einsum("ljki->lijk", dgamma) - np.einsum("likj->lijk", dgamma)
    return riem + quad - quad.transpose(0, 2, 1, 3)


def ricci(chart: MetricChart, x: np.ndarray) -> np.ndarray:
    """Ricci tensor ``R_ij = g^kl g_jm R^m_ikl``."""
    j = jet(chart, x)
    return j.ricci


def sectional_curvature_2d(chart: MetricChart, x: np.ndarray) -> float:
    """Gauss curvature of a 2-d chart, ``R(e1,e2,e2,e1) / det g``."""
    j = jet(chart, x)
    if j.dim != 2:
        raise ValueError("sectional_curvature_2d requires a 2-d chart")
    r_1221 = float(np.einsum("m,m->", j.g[0], j.riemann[:, 0, 1, 1]))
    gram = j.g[0, 0] * j.g[1, 1] - j.g[0, 1] ** 2
    return r_1221 / gram


def jet(chart: MetricChart, x: np.ndarray) -> GeometryJet:
    """Assemble the full geometric jet at a point."""
    _check_in_domain(chart, x)
    x = np.asarray(x, dtype=float)
    g = np.asarray(chart.metric(x), dtype=float)
    g_inv = invert_metric(g)
    det_g = float(np.linalg.det(g))
    gamma = christoffel(chart, x)
    dgamma = christoffel_derivative(chart, x)
    riem = _riemann_from_jets(gamma, dgamma)
    ric = np.einsum("kl,jm,mikl->ij", g_inv, g, riem)
    return GeometryJet(
        x=x, g=g, g_inv=g_inv, det_g=det_g, sqrt_det_g=float(np.sqrt(det_g)),
        gamma=gamma, dgamma=dgamma, riemann=riem, ricci=ric,
    )


def _gauss_grid(chart: MetricChart, order: int):
    nodes_1d, weights_1d = np.polynomial.legendre.leggauss(order)
    axes, wts = [], []
    for lo, hi in chart.domain:
        half = 0.5 * (hi - lo)
        axes.append(lo + half * (nodes_1d + 1.0))
        wts.append(half * weights_1d)
    return axes, wts


def integrate_chart(chart: MetricChart, f: Callable[[np.ndarray], float],
                    order: int = 32, estimate_error: bool = False):
    """Integrate ``f`` against the Riemannian volume measure of the chart.

    Tensor-product Gauss-Legendre with ``order`` points per axis; when
    ``estimate_error`` is set the order is doubled and the difference of the
    two levels is returned alongside the refined value.
    """

    def level(p):
        axes, wts = _gauss_grid(chart, p)
        mesh = np.meshgrid(*axes, indexing="ij")
        wmesh = np.meshgrid(*wts, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=-1)
        w = np.prod(np.stack([m.ravel() for m in wmesh], axis=-1), axis=-1)
        total = 0.0
        for point, weight in zip(pts, w):
            g = np.asarray(chart.metric(point), dtype=float)
            total += weight * np.sqrt(np.linalg.det(g)) * f(point)
        return total

    coarse = level(order)
    if not estimate_error:
        return coarse
    fine = level(2 * order)
    return fine, abs(fine - coarse)


def chart_volume(chart: MetricChart, order: int = 32) -> float:
    """Riemannian volume of the chart box."""
    return integrate_chart(chart, lambda _x: 1.0, order=order)


# ---------------------------------------------------------------------------
# Built-in chart catalog: flat, positively and negatively curved examples.

def euclidean_chart(n: int, extent: float = 1.0) -> MetricChart:
    eye = np.eye(n)
    zeros1 = np.zeros((n, n, n))
    zeros2 = np.zeros((n, n, n, n))
    dom = np.array([[0.0, extent]] * n)
    return MetricChart(
        name=f"euclidean-{n}", dim=n, domain=dom,
        metric=lambda x: eye,
        metric_d1=lambda x: zeros1,
        metric_d2=lambda x: zeros2,
    )


def polar_chart(r_max: float = 1.0) -> MetricChart:
    """Flat plane in polar coordinates, ``g = dr^2 + r^2 dtheta^2``."""

    def metric(x):
        return np.diag([1.0, x[0] ** 2])

    def d1(x):
        dg = np.zeros((2, 2, 2))
        dg[1, 1, 0] = 2.0 * x[0]
        return dg

    def d2(x):
        d2g = np.zeros((2, 2, 2, 2))
        d2g[1, 1, 0, 0] = 2.0
        return d2g

    dom = np.array([[0.0, r_max], [0.0, 2.0 * np.pi]])
    box = np.array([[0.15 * r_max, 0.95 * r_max], [0.1, 2.0 * np.pi - 0.1]])
    return MetricChart(name="polar-disk", dim=2, domain=dom, metric=metric,
                       metric_d1=d1, metric_d2=d2, sample_box=box)


def sphere_chart(n: int = 2) -> MetricChart:
    """Round unit sphere in polar coordinates (n = 2 or 3)."""
    if n == 2:
        def metric(x):
            return np.diag([1.0, np.sin(x[0]) ** 2])

        def d1(x):
            dg = np.zeros((2, 2, 2))
            dg[1, 1, 0] = np.sin(2.0 * x[0])
            return dg

        def d2(x):
            d2g = np.zeros((2, 2, 2, 2))
            d2g[1, 1, 0, 0] = 2.0 * np.cos(2.0 * x[0])
            return d2g

        dom = np.array([[0.0, np.pi], [0.0, 2.0 * np.pi]])
        box = np.array([[0.4, np.pi - 0.4], [0.1, 2.0 * np.pi - 0.1]])
        return MetricChart(name="sphere-2", dim=2, domain=dom, metric=metric,
                           metric_d1=d1, metric_d2=d2, sample_box=box)
    if n == 3:
        def metric(x):
            chi, th = x[0], x[1]
            return np.diag([1.0, np.sin(chi) ** 2,
                            np.sin(chi) ** 2 * np.sin(th) ** 2])

        def d1(x):
            chi, th = x[0], x[1]
            dg = np.zeros((3, 3, 3))
            dg[1, 1, 0] = np.sin(2.0 * chi)
            dg[2, 2, 0] = np.sin(2.0 * chi) * np.sin(th) ** 2
            dg[2, 2, 1] = np.sin(chi) ** 2 * np.sin(2.0 * th)
            return dg

        def d2(x):
            chi, th = x[0], x[1]
            d2g = np.zeros((3, 3, 3, 3))
            d2g[1, 1, 0, 0] = 2.0 * np.cos(2.0 * chi)
            d2g[2, 2, 0, 0] = 2.0 * np.cos(2.0 * chi) * np.sin(th) ** 2
            d2g[2, 2, 0, 1] = d2g[2, 2, 1, 0] = np.sin(2.0 * chi) * np.sin(2.0 * th)
            d2g[2, 2, 1, 1] = 2.0 * np.sin(chi) ** 2 * np.cos(2.0 * th)
            return d2g

        dom = np.array([[0.0, np.pi], [0.0, np.pi], [0.0, 2.0 * np.pi]])
        box = np.array([[0.5, np.pi - 0.5], [0.5, np.pi - 0.5],
                        [0.1, 2.0 * np.pi - 0.1]])
        return MetricChart(name="sphere-3", dim=3, domain=dom, metric=metric,
                           metric_d1=d1, metric_d2=d2, sample_box=box)
    raise ValueError(f"sphere chart supports n in {{2, 3}}, got {n}")


def hyperbolic_chart(n: int = 2, extent: float = 0.55) -> MetricChart:
    """Poincare-ball model of hyperbolic space, ``g_ij = 4 d_ij / (1-|x|^2)^2``."""

    def metric(x):
        u = 1.0 - float(np.dot(x, x))
        return (4.0 / u ** 2) * np.eye(n)

    def d1(x):
        u = 1.0 - float(np.dot(x, x))
        dg = np.zeros((n, n, n))
        for k in range(n):
            dg[:, :, k] = (16.0 * x[k] / u ** 3) * np.eye(n)
        return dg

    def d2(x):
        u = 1.0 - float(np.dot(x, x))
        d2g = np.zeros((n, n, n, n))
        for k in range(n):
            for l in range(n):
                val = 96.0 * x[k] * x[l] / u ** 4
                if k == l:
                    val += 16.0 / u ** 3
                d2g[:, :, k, l] = val * np.eye(n)
        return d2g

    dom = np.array([[-extent, extent]] * n)
    box = np.array([[-0.85 * extent, 0.85 * extent]] * n)
    return MetricChart(name=f"hyperbolic-{n}", dim=n, domain=dom, metric=metric,
                       metric_d1=d1, metric_d2=d2, sample_box=box)


_CHART_FACTORIES: dict[str, Callable[[], MetricChart]] = {
    "euclidean-1": lambda: euclidean_chart(1),
    "euclidean-2": lambda: euclidean_chart(2),
    "euclidean-3": lambda: euclidean_chart(3),
    "polar-disk": polar_chart,
    "sphere-2": lambda: sphere_chart(2),
    "sphere-3": lambda: sphere_chart(3),
    "hyperbolic-2": lambda: hyperbolic_chart(2),
    "hyperbolic-3": lambda: hyperbolic_chart(3),
}


def chart_ids() -> list[str]:
    return sorted(_CHART_FACTORIES)


def chart_by_id(chart_id: str) -> MetricChart:
    try:
        factory = _CHART_FACTORIES[chart_id]
    except KeyError:
        raise KeyError(
            f"unknown chart id '{chart_id}' (available: {', '.join(chart_ids())})"
        ) from None
    return factory()
