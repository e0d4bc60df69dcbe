"""Operator calculus on half-space power functions.

The scalar constant c_p is defined through the one-dimensional identity

    (1/4) int_R (2 xi^p - (xi+r)_+^p - (xi-r)_+^p) |r|^(-1-2s) dr = c_p xi^(p-2s)

for xi > 0.  For p < 2s the integral converges classically; for p > 2s it is
understood in the generalized (cutoff + polynomial subtraction) sense, whose
scale-invariant value is the finite part of the same integral.  The quadrature
here splits the half-line into a Taylor-corrected origin, an adaptive middle,
and an analytic binomial tail whose divergent terms are dropped (finite part).

``eval_flat_power`` evaluates L(x^gamma (x_n)_+^p) honestly through cutoff
sweeps; see _halfspace.py for the quadrature engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import binom

from ._halfspace import HalfPower, generalized_sweep
from .errors import BadExponent, LogResonance, NoGeneralizedLimit, ParityViolation
from .kernels import AngularDensity, StableKernel

RESONANCE_TOL = 1e-3
_DELTA = 1e-3
_R_TAIL = 2.0
_SERIES_TERMS = 120


def check_log_resonance(s, p, tol=RESONANCE_TOL):
    """Raise LogResonance when p - 2s sits within tol of a positive integer.

    p = 2s itself (m = 0) is admitted: the divergent cutoff term is constant
    in the evaluation point, so the generalized value is defined modulo
    constants and the finite-part convention below fixes a representative.
    """
    m = round(p - 2.0 * s)
    if m >= 1 and abs(p - 2.0 * s - m) < tol:
        raise LogResonance(p, s, m)


def _origin_series(s, p, delta):
    # 2 - (1+r)^p - (1-r)^p = -2 sum_{j>=1} binom(p, 2j) r^(2j) on r < 1
    total = 0.0
    for j in range(1, 60):
        term = -2.0 * binom(p, 2 * j) * delta ** (2 * j - 2 * s) / (2 * j - 2 * s)
        total += term
        if abs(term) < 1e-18 * (1.0 + abs(total)):
            break
    return total


def _tail_series(s, p, r0, n_terms):
    """Finite part of int_{r0}^inf (2 - (1+r)^p) r^(-1-2s) dr, r0 > 1.

    (1+r)^p expands as sum_j binom(p,j) r^(p-j); each power integrates to
    -r0^a / a with a = p - 2s - j, which is also the finite-part value when
    a > 0 (the R^a/a growth is dropped).  a = 0 contributes -log(r0) under the
    same convention (the log R growth is dropped).
    """
    total = 2.0 * r0 ** (-2.0 * s) / (2.0 * s)
    for j in range(n_terms + 1):
        a = p - 2.0 * s - j
        if abs(a) < 1e-13:
            fp = -math.log(r0)
        else:
            fp = -(r0**a) / a
        term = -binom(p, j) * fp
        total += term
    return total


def compute_cp(s, p, *, resonance_tol=RESONANCE_TOL):
    """Finite-part value of c_p for the raw 1D kernel |r|^(-1-2s).

    Vanishes exactly at p = s (and at every p with p - s a nonnegative
    integer); has simple poles at p - 2s in N_0, of which only p = 2s is
    admitted (finite-part representative, see check_log_resonance).
    """
    if not 0.0 < s < 1.0:
        raise BadExponent(f"s must lie in (0,1), got {s}")
    if p <= 0.0:
        raise BadExponent(f"p must be positive, got {p}")
    check_log_resonance(s, p, resonance_tol)

    head = _origin_series(s, p, _DELTA)

    def inner(r):
        return (2.0 - (1.0 + r) ** p - (1.0 - r) ** p) * r ** (-1.0 - 2.0 * s)

    def outer(r):
        return (2.0 - (1.0 + r) ** p) * r ** (-1.0 - 2.0 * s)

    mid1, _ = quad(inner, _DELTA, 1.0, epsabs=1e-13, epsrel=1e-12, limit=300)
    mid2, _ = quad(outer, 1.0, _R_TAIL, epsabs=1e-13, epsrel=1e-12, limit=300)
    tail = _tail_series(s, p, _R_TAIL, _SERIES_TERMS)
    return 0.5 * (head + mid1 + mid2 + tail)


def cp_scan(s, p_min, p_max, step, *, resonance_tol=RESONANCE_TOL):
    """Scan p -> c_p; rows (p, c_p, error_estimate, flag)."""
    rows = []
    p = p_min
    while p <= p_max + 1e-12:
        try:
            c = compute_cp(s, p, resonance_tol=resonance_tol)
            # two-parameter stability estimate: re-run with a shifted split
            rows.append((p, c, abs(c - _cp_alt(s, p)), ""))
        except LogResonance:
            rows.append((p, math.nan, math.nan, "log-resonance"))
        p += step
    return rows


def _cp_alt(s, p):
    """Same finite part with a different split point; error-estimate helper."""
    head = _origin_series(s, p, 2.0 * _DELTA)

    def inner(r):
        return (2.0 - (1.0 + r) ** p - (1.0 - r) ** p) * r ** (-1.0 - 2.0 * s)

    def outer(r):
        return (2.0 - (1.0 + r) ** p) * r ** (-1.0 - 2.0 * s)

    mid1, _ = quad(inner, 2.0 * _DELTA, 1.0, epsabs=1e-12, epsrel=1e-11, limit=300)
    mid2, _ = quad(outer, 1.0, 3.0, epsabs=1e-12, epsrel=1e-11, limit=300)
    tail = _tail_series(s, p, 3.0, _SERIES_TERMS)
    return 0.5 * (head + mid1 + mid2 + tail)


def sign_changes(values, atol=1e-10):
    """Indices i where the (strict) sign flips between consecutive entries,
    skipping entries that vanish to atol."""
    signs = [(i, 1 if v > 0 else -1) for i, v in enumerate(values) if abs(v) > atol and not math.isnan(v)]
    flips = []
    for (i0, s0), (i1, s1) in zip(signs, signs[1:]):
        if s0 != s1:
            flips.append((i0, i1))
    return flips


def angular_moment(kernel, *, direction_index=None):
    """int_{S^{n-1}} |theta_n|^{2s} a(theta) dtheta (exact sum when n = 1).

    ``direction_index`` selects which coordinate plays the role of the
    half-space normal; default is the last one.
    """
    s = kernel.s
    dens = kernel.density
    if kernel.n == 1:
        return float(dens.eval_angle(0.0) + dens.eval_angle(math.pi))
    idx = kernel.n - 1 if direction_index is None else direction_index

    def integrand(phi):
        comp = math.sin(phi) if idx == 1 else math.cos(phi)
        return abs(comp) ** (2.0 * s) * float(dens.eval_angle(phi))

    total = 0.0
    # split at the zeros of the component to keep quad accurate
    knots = [0.0, 0.5 * math.pi, math.pi, 1.5 * math.pi, 2.0 * math.pi]
    for a, b in zip(knots, knots[1:]):
        val, _ = quad(integrand, a, b, epsabs=1e-13, epsrel=1e-12, limit=200)
        total += val
    return total


def _odd_over_component(density, tol=1e-10):
    """Given an odd density a, return the even density a(theta)/theta_n.

    Uses sin(k phi)/sin(phi) = U_{k-1}(cos phi) expansions; for n = 1 the
    component is theta itself (theta = +/-1).
    """
    if not density.is_odd(tol):
        raise ParityViolation("density must be odd on the sphere")
    n = density.n
    if n == 1:
        # a(+1) = sum cos-coeffs; a/theta has value a(+1) at both atoms
        value = float(density.eval_angle(0.0))
        return AngularDensity.constant(1, value)
    cos_terms = {}
    sin_terms = {}

    def add(d, k, c):
        if abs(c) > 0.0:
            d[k] = d.get(k, 0.0) + c

    for k, c in density.sin_terms:
        if k % 2 == 0:
            if abs(c) > tol:
                raise ParityViolation("even sin harmonic in odd density")
            continue
        # sin(k phi) / sin(phi) = 1 + 2 cos(2phi) + ... + 2 cos((k-1) phi)
        add(cos_terms, 0, c)
        for j in range(2, k, 2):
            add(cos_terms, j, 2.0 * c)
    for k, c in density.cos_terms:
        if k % 2 == 0:
            if abs(c) > tol:
                raise ParityViolation("even cos harmonic in odd density")
            continue
        # cos(k phi)/sin(phi) is unbounded but integrable against |theta_n|^{2s};
        # handled numerically below via a dense-series projection.
        raise ParityViolation(
            "odd cosine harmonics give an unbounded ratio a/theta_n; supply "
            "the reduced even density directly instead"
        )
    return AngularDensity(
        n=2,
        cos_terms=tuple(sorted(cos_terms.items())),
        sin_terms=tuple(sorted(sin_terms.items())),
    )


def compute_cp_tilde(odd_density, s, p, *, resonance_tol=RESONANCE_TOL):
    """c~_p for an odd bounded angular density, by the auxiliary-kernel
    reduction: feed a(theta)/theta_n to the even power pipeline.

    Vanishes iff p = s, like c_p.
    """
    reduced = _odd_over_component(odd_density)
    kernel = StableKernel(s=s, n=odd_density.n, density=reduced)
    return compute_cp(s, p, resonance_tol=resonance_tol) * angular_moment(kernel)


@dataclass
class GeneralizedEvaluation:
    """Record of one generalized-sense evaluation L(u chi_R) -> f.

    ``fitted_polynomials`` holds, per cutoff radius, the coefficients of the
    degree <= k-1 polynomial subtracted over the sample cloud (empty when the
    growth order k is zero).  ``limit_values`` are the post-subtraction values
    f_R at the requested point.
    """

    growth_order: int
    cutoff_radii: tuple
    fitted_polynomials: list
    limit_values: np.ndarray
    limit: float
    coefficients: np.ndarray
    spread: float
    converged: bool


DEFAULT_RADII = tuple(float(2**j) for j in range(1, 13))


def growth_order(gamma_total, p, s):
    h = gamma_total + p - 2.0 * s
    return max(0, math.floor(h) + 1) if h >= 0.0 else 0


def eval_flat_power(kernel, p, gamma, x, *, radii=DEFAULT_RADII, spread_tol=1e-5, quality="standard"):
    """Generalized evaluation of L(x^gamma (x_n)_+^p) at a point with x_n > 0.

    gamma is a tangential multi-index: an int for n = 2 (power of x_1), or
    0 / () for n = 1.  Returns (GeneralizedEvaluation, limit value); the limit
    is the canonical homogeneous representative sum_a c_a x^a x_n^(p-2s+|g-a|)
    evaluated at x, i.e. the subtracted polynomial class is excluded.
    """
    g = int(gamma) if not isinstance(gamma, (tuple, list)) else (int(gamma[0]) if gamma else 0)
    if kernel.n == 1 and g != 0:
        raise BadExponent("no tangential directions in dimension 1")
    if p <= 0.0:
        raise BadExponent(f"p must be positive, got {p}")
    check_log_resonance(kernel.s, p + g)  # worst fold within this column
    h = g + p - 2.0 * kernel.s
    if abs(h - round(h)) < 1e-9 and h >= 0.0:
        raise LogResonance(p + g, kernel.s, round(h))

    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x[-1] <= 0.0:
        raise BadExponent("evaluation point must satisfy x_n > 0")

    column = HalfPower(n=kernel.n, tangential_degree=g, p=p)
    sweep = generalized_sweep(
        kernel, [column], [x], radii=radii, spread_tol=spread_tol, quality=quality
    )
    res = sweep[0]
    record = GeneralizedEvaluation(
        growth_order=res.growth_order,
        cutoff_radii=tuple(radii),
        fitted_polynomials=res.fitted_polynomials,
        limit_values=res.f_values[0],
        limit=float(res.limits[0]),
        coefficients=res.coefficients,
        spread=res.spread,
        converged=res.converged,
    )
    if not res.converged:
        raise NoGeneralizedLimit(
            f"cutoff sweep spread {res.spread:.3e} above tolerance {spread_tol:.1e}"
        )
    return record, record.limit
