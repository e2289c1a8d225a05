"""Graded symbol of the coupled elastic-thermal operator and its parametrix.

At a point ``x`` with covector ``xi`` and spectral parameter ``tau`` the
(n+1)x(n+1) symbol of ``tau I + L`` splits by xi-degree into

    principal      (tau - mu |xi|^2) I_n - (lam+mu) (g^{jm} xi_k xi_m)   [+ heat]
    first order    Christoffel contractions and the coupling off-blocks
    zeroth order   Christoffel-derivative terms and the frequency block

with ``|xi|^2 = g^{ij} xi_i xi_j``.  The leading parametrix term is the
closed-form inverse of the principal symbol; higher terms follow the
standard recursion

    b_{-2-l} = -c2^{-1} * sum_{j+|J|+2-k = l, j<l} (1/J!) d_xi^J c_k D_x^J b_{-2-j}

where ``D_x = -i d_x``.  Pointwise x-derivatives of lower-order terms are
taken by nested central differences, so composition residuals on curved
charts are only expected to vanish to finite-difference accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations_with_replacement
from typing import Sequence

import numpy as np

from .errors import PoleError, UnsupportedOrderError
from .geometry import GeometryJet, MetricChart, jet
from .params import MaterialParams

DEFAULT_MAX_ORDER = 2
PARAMETRIX_FD_STEP = 1e-4
POLE_GUARD = 1e-9


@dataclass(frozen=True)
class SymbolMatrix:
    """A symbol value: complex matrix at a fixed ``(x, xi, tau)``."""

    entries: np.ndarray

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def trace(self) -> complex:
        return complex(np.trace(self.entries))

    def __matmul__(self, other: "SymbolMatrix") -> "SymbolMatrix":
        return SymbolMatrix(self.entries @ other.entries)

    def displacement_block(self) -> np.ndarray:
        return self.entries[:-1, :-1]

    def heat_entry(self) -> complex:
        return complex(self.entries[-1, -1])

    def off_block_norm(self) -> float:
        """Max magnitude over the displacement/heat coupling blocks."""
        top = np.max(np.abs(self.entries[:-1, -1])) if self.dim > 1 else 0.0
        bot = np.max(np.abs(self.entries[-1, :-1])) if self.dim > 1 else 0.0
        return float(max(top, bot))


@dataclass(frozen=True)
class RationalSymbolTerm:
    """One rational-in-tau term of a parametrix trace.

    The tau-dependence is a product of the three channel poles raised to
    ``pole_exponents = (shear, heat, pressure)``; ``coefficient`` carries the
    tau-independent factor, homogeneous of degree ``numerator_degree`` in xi.
    Degree bookkeeping ties the exponents to the parametrix order:
    ``numerator_degree - 2*sum(pole_exponents) = -2 - order``.
    """

    numerator_degree: int
    pole_exponents: tuple[int, int, int]
    coefficient: complex
    order: int

    def __post_init__(self):
        j, m, p = self.pole_exponents
        if min(j, m, p) < 0:
            raise ValueError("pole exponents must be nonnegative")
        lhs = self.numerator_degree - 2 * (j + m + p)
        if lhs != -2 - self.order:
            raise ValueError(
                "degree bookkeeping violated: "
                f"k - 2(j+m+p) = {lhs} but order {self.order} requires {-2 - self.order}"
            )


def principal_trace_terms(n: int) -> list[RationalSymbolTerm]:
    """Rational-term decomposition of the leading parametrix trace."""
    return [
        RationalSymbolTerm(0, (1, 0, 0), float(n - 1), 0),
        RationalSymbolTerm(0, (0, 1, 0), 1.0, 0),
        RationalSymbolTerm(0, (0, 0, 1), 1.0, 0),
    ]


class MatrixPolynomial:
    """Matrix-valued polynomial in the covector variable.

    Terms map exponent tuples to complex coefficient matrices; exact
    differentiation keeps the parametrix recursion free of xi-direction
    finite differencing.
    """

    def __init__(self, n_vars: int, size: int, terms: dict[tuple[int, ...], np.ndarray]):
        self.n_vars = n_vars
        self.size = size
        self.terms = {e: np.asarray(m, dtype=complex) for e, m in terms.items()
                      if np.any(m)}

    def eval(self, xi: Sequence[float]) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        out = np.zeros((self.size, self.size), dtype=complex)
        for expo, mat in self.terms.items():
            factor = 1.0
            for e, x in zip(expo, xi):
                if e:
                    factor *= x ** e
            out += factor * mat
        return out

    def derivative(self, multi_index: Sequence[int]) -> "MatrixPolynomial":
        new_terms: dict[tuple[int, ...], np.ndarray] = {}
        for expo, mat in self.terms.items():
            coeff = 1.0
            new_expo = []
            ok = True
            for e, j in zip(expo, multi_index):
                if e < j:
                    ok = False
                    break
                coeff *= math.perm(e, j)
                new_expo.append(e - j)
            if not ok or coeff == 0.0:
                continue
            key = tuple(new_expo)
            acc = new_terms.setdefault(key, np.zeros((self.size, self.size), dtype=complex))
            acc += coeff * mat
        return MatrixPolynomial(self.n_vars, self.size, new_terms)


def _add_term(terms, expo, mat):
    acc = terms.setdefault(expo, np.zeros_like(mat))
    acc += mat


def principal_symbol_poly(params: MaterialParams, jet_x: GeometryJet,
                          tau: complex) -> MatrixPolynomial:
    n = jet_x.dim
    size = n + 1
    g_inv = jet_x.g_inv
    terms: dict[tuple[int, ...], np.ndarray] = {}
    const = np.zeros((size, size), dtype=complex)
    const += tau * np.eye(size)
    terms[(0,) * n] = const
    lam_mu = params.lam + params.mu
    for a in range(n):
        for b in range(a, n):
            mat = np.zeros((size, size), dtype=complex)
            sym = 1.0 if a == b else 2.0
            mat[:n, :n] -= params.mu * sym * g_inv[a, b] * np.eye(n)
            mat[n, n] -= params.alpha * sym * g_inv[a, b]
            # -(lam+mu) g^{ja} xi_a xi_b delta_kb, symmetrised over (a, b)
            mat[:n, b] -= lam_mu * g_inv[:, a]
            if a != b:
                mat[:n, a] -= lam_mu * g_inv[:, b]
            expo = [0] * n
            expo[a] += 1
            expo[b] += 1
            _add_term(terms, tuple(expo), mat)
    return MatrixPolynomial(n, size, terms)


def first_order_symbol_poly(params: MaterialParams,
                            jet_x: GeometryJet) -> MatrixPolynomial:
    n = jet_x.dim
    size = n + 1
    g_inv, gamma = jet_x.g_inv, jet_x.gamma
    lam_mu = params.lam + params.mu
    # contracted Christoffels: trg[s] = g^{ml} G^s_ml,  trl[k] = G^l_kl
    trg = np.einsum("ml,sml->s", g_inv, gamma)
    trl = np.einsum("lkl->k", gamma)
    terms: dict[tuple[int, ...], np.ndarray] = {}
    for s in range(n):
        mat = np.zeros((size, size), dtype=complex)
        mat[:n, :n] += -1j * trg[s] * params.mu * np.eye(n)
        mat[n, n] += -1j * trg[s] * params.alpha
        expo = [0] * n
        expo[s] = 1
        _add_term(terms, tuple(expo), mat)
    # 2 i mu (g^{ml} G^j_mk xi_l): coefficient of xi_l
    two_mu = 2j * params.mu * np.einsum("ml,jmk->jkl", g_inv, gamma)
    # i (lam+mu) (g^{jm} G^l_kl xi_m): coefficient of xi_m
    lam_term = 1j * lam_mu * np.einsum("jm,k->jkm", g_inv, trl)
    for l in range(n):
        mat = np.zeros((size, size), dtype=complex)
        mat[:n, :n] += two_mu[:, :, l] + lam_term[:, :, l]
        mat[:n, n] += -1j * params.beta * g_inv[:, l]
        mat[n, :n][l] += -params.beta * params.omega * params.theta0
        expo = [0] * n
        expo[l] = 1
        _add_term(terms, tuple(expo), mat)
    return MatrixPolynomial(n, size, terms)


def zeroth_order_symbol_poly(params: MaterialParams,
                             jet_x: GeometryJet) -> MatrixPolynomial:
    n = jet_x.dim
    size = n + 1
    g_inv, dgamma = jet_x.g_inv, jet_x.dgamma
    lam_mu = params.lam + params.mu
    trl = np.einsum("lkl->k", jet_x.gamma)
    # d_m (G^l_kl) and g^{ml} d_k G^j_ml
    dtrl = np.einsum("lklm->km", dgamma)
    mat = np.zeros((size, size), dtype=complex)
    mat[:n, :n] += lam_mu * np.einsum("jm,km->jk", g_inv, dtrl)
    mat[:n, :n] += params.mu * np.einsum("ml,jmlk->jk", g_inv, dgamma)
    mat[:n, :n] += params.rho * params.omega ** 2 * np.eye(n)
    mat[n, :n] += 1j * params.omega * params.beta * params.theta0 * trl
    mat[n, n] += 1j * params.omega * params.gamma
    return MatrixPolynomial(n, size, {(0,) * n: mat})


def _symbol_poly(order_k: int, params, jet_x, tau) -> MatrixPolynomial:
    if order_k == 2:
        return principal_symbol_poly(params, jet_x, tau)
    if order_k == 1:
        return first_order_symbol_poly(params, jet_x)
    if order_k == 0:
        return zeroth_order_symbol_poly(params, jet_x)
    raise ValueError(f"symbol grade must be 0, 1 or 2, got {order_k}")


def principal_symbol(params: MaterialParams, jet_x: GeometryJet,
                     xi: np.ndarray, tau: complex) -> SymbolMatrix:
    """Degree-2 part of the symbol of ``tau I + L`` at ``(x, xi, tau)``."""
    return SymbolMatrix(principal_symbol_poly(params, jet_x, tau).eval(xi))


def first_order_symbol(params: MaterialParams, jet_x: GeometryJet,
                       xi: np.ndarray) -> SymbolMatrix:
    """Degree-1 part: Christoffel contractions plus the coupling blocks."""
    return SymbolMatrix(first_order_symbol_poly(params, jet_x).eval(xi))


def zeroth_order_symbol(params: MaterialParams,
                        jet_x: GeometryJet) -> SymbolMatrix:
    """Degree-0 part: Christoffel derivatives and the frequency block."""
    return SymbolMatrix(zeroth_order_symbol_poly(params, jet_x).eval(np.zeros(jet_x.dim)))


def check_off_poles(params: MaterialParams, xi_norm_sq: float, tau: complex,
                    guard: float = POLE_GUARD):
    """Raise :class:`PoleError` when tau sits within the guard of a channel pole."""
    eps = guard * (1.0 + abs(tau))
    for rate in (params.mu, params.alpha, params.pressure_rate):
        if abs(tau - rate * xi_norm_sq) < eps:
            raise PoleError(
                f"tau={tau} within {eps:.1e} of channel pole {rate}*|xi|^2="
                f"{rate * xi_norm_sq}"
            )


def invert_principal(params: MaterialParams, jet_x: GeometryJet,
                     xi: np.ndarray, tau: complex) -> SymbolMatrix:
    """Closed-form inverse of the principal symbol (leading parametrix term).

    The displacement block is a rank-one perturbation of a multiple of the
    identity, so its inverse is

        I_n/(tau - mu|xi|^2)
        + (lam+mu) (g^{jm} xi_k xi_m) / ((tau - mu|xi|^2)(tau - (lam+2mu)|xi|^2)).
    """
    n = jet_x.dim
    xi = np.asarray(xi, dtype=float)
    xi_sq = jet_x.xi_norm_sq(xi)
    check_off_poles(params, xi_sq, tau)
    shear = tau - params.mu * xi_sq
    heat = tau - params.alpha * xi_sq
    pressure = tau - params.pressure_rate * xi_sq
    out = np.zeros((n + 1, n + 1), dtype=complex)
    out[:n, :n] = np.eye(n) / shear
    xi_up = jet_x.g_inv @ xi
    out[:n, :n] += (params.lam + params.mu) / (shear * pressure) * np.outer(xi_up, xi)
    out[n, n] = 1.0 / heat
    return SymbolMatrix(out)


def principal_inverse_trace(params: MaterialParams, xi_norm_sq: float,
                            tau: complex, n: int) -> complex:
    """Closed-form trace of the inverted principal symbol.

    Equals ``(n-1)/(tau - mu|xi|^2) + 1/(tau - alpha|xi|^2)
    + 1/(tau - (lam+2mu)|xi|^2)``.
    """
    check_off_poles(params, xi_norm_sq, tau)
    return ((n - 1) / (tau - params.mu * xi_norm_sq)
            + 1.0 / (tau - params.alpha * xi_norm_sq)
            + 1.0 / (tau - params.pressure_rate * xi_norm_sq))


def multi_indices(n_vars: int, total: int) -> list[tuple[int, ...]]:
    """All multi-indices of the given total degree, lexicographically."""
    if total == 0:
        return [(0,) * n_vars]
    out = set()
    for combo in combinations_with_replacement(range(n_vars), total):
        expo = [0] * n_vars
        for axis in combo:
            expo[axis] += 1
        out.add(tuple(expo))
    return sorted(out, reverse=True)


def _multi_factorial(multi_index) -> float:
    out = 1.0
    for j in multi_index:
        out *= math.factorial(j)
    return out


def _x_derivative(fn, x, multi_index, step):
    """Nested central differences of a matrix-valued function of x."""
    for axis, j in enumerate(multi_index):
        if j > 0:
            reduced = list(multi_index)
            reduced[axis] -= 1
            xp = np.array(x, dtype=float)
            xm = np.array(x, dtype=float)
            xp[axis] += step
            xm[axis] -= step
            return (_x_derivative(fn, xp, reduced, step)
                    - _x_derivative(fn, xm, reduced, step)) / (2.0 * step)
    return fn(x)


def parametrix_term(order: int, chart: MetricChart, params: MaterialParams,
                    x: np.ndarray, xi: np.ndarray, tau: complex,
                    max_order: int = DEFAULT_MAX_ORDER,
                    fd_step: float = PARAMETRIX_FD_STEP) -> SymbolMatrix:
    """Parametrix term of the given order, evaluated at ``(x, xi, tau)``.

    Order 0 is the closed-form principal inverse; higher orders apply the
    composition recursion with exact xi-derivatives of the symbol grades and
    nested central differences (step ``fd_step``) for the x-derivatives of
    lower-order terms.
    """
    if order < 0:
        raise UnsupportedOrderError("parametrix order must be nonnegative")
    if order > max_order:
        raise UnsupportedOrderError(
            f"order {order} above configured maximum {max_order}"
        )
    xi = np.asarray(xi, dtype=float)
    return SymbolMatrix(_parametrix_entries(order, chart, params,
                                            np.asarray(x, dtype=float),
                                            xi, tau, fd_step))


def _parametrix_entries(order, chart, params, x, xi, tau, fd_step):
    jet_x = jet(chart, x)
    if order == 0:
        return invert_principal(params, jet_x, xi, tau).entries
    total = _composition_sum(order, chart, params, x, xi, tau, fd_step,
                             include_top=False, jet_x=jet_x)
    b2 = invert_principal(params, jet_x, xi, tau).entries
    return -b2 @ total


def _composition_sum(order, chart, params, x, xi, tau, fd_step,
                     include_top, jet_x=None, derivative_step=None):
    """Sum of composition terms of homogeneity ``-order`` at ``(x, xi, tau)``.

    With ``include_top`` the ``j = order`` term (the principal symbol against
    the same-order parametrix term) is included, which is what the identity
    check needs; the recursion itself excludes it.
    """
    if jet_x is None:
        jet_x = jet(chart, x)
    n = chart.dim
    h = derivative_step if derivative_step is not None else fd_step
    j_top = order if include_top else order - 1
    total = np.zeros((n + 1, n + 1), dtype=complex)
    for j in range(j_top + 1):
        for k in (0, 1, 2):
            deg = order + k - j - 2
            if deg < 0:
                continue
            poly = _symbol_poly(k, params, jet_x, tau)
            for index in multi_indices(n, deg):
                d_xi = poly.derivative(index).eval(xi)
                if not np.any(d_xi):
                    continue
                d_x = _x_derivative(
                    lambda y: _parametrix_entries(j, chart, params, y, xi, tau, fd_step),
                    x, index, h,
                )
                d_x = (-1j) ** deg * d_x
                total += d_xi @ d_x / _multi_factorial(index)
    return total


def composition_defects(chart: MetricChart, params: MaterialParams,
                        x: np.ndarray, xi: np.ndarray, tau: complex,
                        up_to_order: int, max_order: int = DEFAULT_MAX_ORDER,
                        fd_step: float = PARAMETRIX_FD_STEP,
                        verify_step_scale: float = 0.5) -> list[float]:
    """Residuals of the symbol-composition identity, one per order.

    Order 0 must reproduce the identity matrix exactly; orders >= 1 must
    vanish.  The check re-evaluates the x-derivatives at a rescaled step so
    that it does not merely replay the numbers the recursion produced.
    """
    if up_to_order > max_order:
        raise UnsupportedOrderError(
            f"order {up_to_order} above configured maximum {max_order}"
        )
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    jet_x = jet(chart, x)
    defects = []
    c2 = principal_symbol(params, jet_x, xi, tau).entries
    b2 = invert_principal(params, jet_x, xi, tau).entries
    defects.append(float(np.max(np.abs(c2 @ b2 - np.eye(chart.dim + 1)))))
    for order in range(1, up_to_order + 1):
        total = _composition_sum(order, chart, params, x, xi, tau, fd_step,
                                 include_top=True, jet_x=jet_x,
                                 derivative_step=fd_step * verify_step_scale)
        defects.append(float(np.max(np.abs(total))))
    return defects
