"""Boundary expansion fitting and exponent measurement.

The drift term feeds an exponent ladder s + k(2s-1) + l into boundary
expansions of solutions; this module predicts the ladder, fits expansion
coefficients in powers of the generalized distance along inward normals,
measures Holder exponents of boundary quotients by dyadic oscillation slopes,
and verifies the leading-order factorization L(eta d^p) = phi d^(p-2s) + R by
direct quadrature on curved domains.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .domains import DomainSpec, generalized_distance
from .errors import (
    BadExponent,
    EmptyWindow,
    IllConditionedLadder,
    InsufficientWindow,
    QuadratureFailed,
)
from .flatcase import angular_moment, compute_cp

EPS_COLLISION = 1e-9


@dataclass(frozen=True)
class LadderEntry:
    k: int
    l: int
    exponent: float
    flags: tuple = ()


@dataclass
class ExponentLadder:
    s: float
    beta: float
    entries: list
    epsilon0: float = field(init=False)

    def __post_init__(self):
        self.epsilon0 = 2.0 * self.s - 1.0

    @property
    def exponents(self):
        return np.array([e.exponent for e in self.entries])

    @property
    def collisions(self):
        return [e for e in self.entries if "collision" in e.flags]


def ladder(s, beta):
    """All exponents s + k eps0 + l with k eps0 + l <= beta - 1, sorted,
    with resonance and collision flags."""
    if not 0.5 < s < 1.0:
        raise BadExponent(f"s must lie in (1/2, 1), got {s}")
    if not beta > 1.0:
        raise BadExponent(f"beta must exceed 1, got {beta}")
    eps0 = 2.0 * s - 1.0
    budget = beta - 1.0
    raw = []
    k = 0
    while k * eps0 <= budget + 1e-12:
        l = 0
        while k * eps0 + l <= budget + 1e-12:
            raw.append((k, l, s + k * eps0 + l))
            l += 1
        k += 1
    raw.sort(key=lambda t: (t[2], t[0]))
    entries = []
    for i, (k, l, ex) in enumerate(raw):
        flags = []
        if abs((ex - s) - round(ex - s)) < EPS_COLLISION and round(ex - s) >= 1:
            flags.append("p-s-integer")
        if abs((ex - 2 * s) - round(ex - 2 * s)) < EPS_COLLISION and round(ex - 2 * s) >= 0:
            flags.append("p-2s-integer")
        for j, (_, _, ex2) in enumerate(raw):
            if j != i and abs(ex - ex2) < EPS_COLLISION:
                flags.append("collision")
                break
        entries.append(LadderEntry(k=k, l=l, exponent=ex, flags=tuple(flags)))
    return ExponentLadder(s=s, beta=beta, entries=entries)


@dataclass
class ExpansionFit:
    z: float
    exponents: np.ndarray
    coefficients: np.ndarray
    uncertainties: np.ndarray
    residual_decay_exponent: float
    condition_number: float
    window: tuple
    n_bands: int
    band_residuals: np.ndarray
    band_centers: np.ndarray

    def coefficient(self, exponent, tol=1e-9):
        idx = np.flatnonzero(np.abs(self.exponents - exponent) < tol)
        if len(idx) == 0:
            raise KeyError(f"exponent {exponent} not in the fitted ladder")
        return self.coefficients[idx[0]], self.uncertainties[idx[0]]

    def statistically_zero(self, exponent, n_sigma=3.0):
        c, sig = self.coefficient(exponent)
        return abs(c) < n_sigma * sig


def fit_window(h, upper=0.2):
    """Default fitting window [max(10h, h^0.8), upper]."""
    return (max(10.0 * h, h**0.8), upper)


def _bands(ts, window):
    """Assign samples to dyadic bands [upper/2^(j+1), upper/2^j]."""
    lo, hi = window
    idx = np.floor(np.log2(hi / np.maximum(ts, 1e-300))).astype(int)
    n_bands = int(math.floor(math.log2(hi / lo)))
    return idx, n_bands


def fit_expansion(
    values,
    distances,
    exponents,
    *,
    z=0.0,
    window,
    cond_threshold=1e8,
    min_bands=2,
    weight_exponent=None,
):
    """Band-weighted least squares of u samples against {d^p_i}.

    ``values``/``distances``: samples of the field and the generalized
    distance along the inward normal at z.  Columns are normalized and rows
    weighted so each dyadic band carries equal influence relative to the
    leading power.  Falls back to sequential peeling (innermost bands first)
    when the joint design is ill-conditioned.
    """
    exponents = np.sort(np.asarray(exponents, dtype=float))
    ts = np.asarray(distances, dtype=float)
    vals = np.asarray(values, dtype=float)
    lo, hi = window
    sel = (ts >= lo) & (ts <= hi)
    if sel.sum() < 2 * len(exponents) + 2:
        raise InsufficientWindow(
            f"{int(sel.sum())} samples in [{lo:.3g}, {hi:.3g}] cannot support "
            f"{len(exponents)} exponents"
        )
    ts = ts[sel]
    vals = vals[sel]
    band_idx, n_bands = _bands(ts, window)
    if n_bands < min_bands:
        raise InsufficientWindow(f"only {n_bands} dyadic bands in the window")

    # row weights: relative to the leading power, equalized per band
    counts = np.bincount(band_idx, minlength=band_idx.max() + 1).astype(float)
    wexp = exponents[0] if weight_exponent is None else float(weight_exponent)
    w = ts ** (-wexp) / np.sqrt(counts[band_idx])
    X = ts[:, None] ** exponents[None, :]
    Xw = X * w[:, None]
    norms = np.linalg.norm(Xw, axis=0)
    norms[norms == 0.0] = 1.0
    Xn = Xw / norms
    cond = float(np.linalg.cond(Xn))
    if cond > cond_threshold:
        raise IllConditionedLadder(cond, cond_threshold)
    sol, *_ = np.linalg.lstsq(Xn, vals * w, rcond=None)
    coeffs = sol / norms

    resid = vals - X @ coeffs
    # coefficient uncertainties from residual propagation
    dof = max(len(ts) - len(exponents), 1)
    sigma2 = float(np.sum((resid * w) ** 2)) / dof
    try:
        cov = sigma2 * np.linalg.inv(Xn.T @ Xn)
        unc = np.sqrt(np.maximum(np.diag(cov), 0.0)) / norms
    except np.linalg.LinAlgError:
        unc = np.full(len(exponents), np.inf)

    # band-wise residual maxima -> residual decay exponent
    centers = []
    maxima = []
    for jb in range(n_bands):
        m = band_idx == jb
        if not m.any():
            continue
        centers.append(float(np.exp(np.mean(np.log(ts[m])))))
        maxima.append(float(np.max(np.abs(resid[m]))))
    centers = np.array(centers)
    maxima = np.array(maxima)
    if len(centers) >= 2 and np.all(maxima > 0):
        A = np.vstack([np.log(centers), np.ones_like(centers)]).T
        decay = float(np.linalg.lstsq(A, np.log(maxima), rcond=None)[0][0])
    else:
        decay = math.inf
    return ExpansionFit(
        z=z,
        exponents=exponents,
        coefficients=coeffs,
        uncertainties=unc,
        residual_decay_exponent=decay,
        condition_number=cond,
        window=(lo, hi),
        n_bands=n_bands,
        band_residuals=maxima,
        band_centers=centers,
    )


def fit_expansion_peeled(values, distances, exponents, *, z=0.0, window):
    """Sequential peeling: fit the leading power on the innermost bands,
    subtract, refit the rest; for ladders too close for the joint design."""
    exponents = np.sort(np.asarray(exponents, dtype=float))
    ts = np.asarray(distances, dtype=float)
    vals = np.asarray(values, dtype=float).copy()
    lo, hi = window
    coeffs = []
    for i, p in enumerate(exponents):
        inner_hi = lo * 4.0 if i < len(exponents) - 1 else hi
        sel = (ts >= lo) & (ts <= max(inner_hi, lo * 2.0))
        if not sel.any():
            raise InsufficientWindow("peeling ran out of inner samples")
        c = float(np.sum(vals[sel] * ts[sel] ** p) / np.sum(ts[sel] ** (2 * p)))
        coeffs.append(c)
        vals = vals - c * ts**p
    return np.array(coeffs)


def holder_exponent(
    values,
    distances,
    *,
    center,
    window,
    min_bands=4,
    saturation=0.9,
):
    """Log-log slope of the dyadic oscillation sup_{d<=r} |g - g(z)|.

    ``center`` is the boundary value g(z); for quotient fields it comes from
    the fitted leading coefficient (normal-limit extrapolation), never from
    nearest-node division.  Returns (exponent, saturated, n_bands).
    """
    ts = np.asarray(distances, dtype=float)
    vals = np.asarray(values, dtype=float)
    lo, hi = window
    sel = (ts >= lo) & (ts <= hi)
    if not sel.any():
        raise InsufficientWindow("no samples in the window")
    ts = ts[sel]
    vals = vals[sel]
    radii = []
    oscs = []
    r = hi
    while r >= 2.0 * lo:
        m = ts <= r
        if m.any():
            radii.append(r)
            oscs.append(float(np.max(np.abs(vals[m] - center))))
        r *= 0.5
    if len(radii) < min_bands:
        raise InsufficientWindow(
            f"only {len(radii)} dyadic bands (need {min_bands})"
        )
    radii = np.array(radii)
    oscs = np.array(oscs)
    scale = max(abs(center), float(np.max(np.abs(vals))), 1e-300)
    if np.max(oscs) < 1e-13 * scale:
        return math.inf, True, len(radii)
    A = np.vstack([np.log(radii), np.ones_like(radii)]).T
    slope = float(np.linalg.lstsq(A, np.log(np.maximum(oscs, 1e-300)), rcond=None)[0][0])
    return slope, slope >= saturation, len(radii)


def first_correction_exponent(
    values,
    distances,
    leading_exponent,
    *,
    window,
    scan=None,
    scan_step=0.01,
):
    """Exponent of the first correction beyond the leading power.

    Two-term weighted least squares c0 d^lead + c1 d^q with the second
    exponent q scanned over a grid; the residual-minimizing q is the
    estimate.  This keeps the leading coefficient and the correction
    decoupled without presupposing the correction's exponent.
    Returns (q_hat, c0, c1).
    """
    ts = np.asarray(distances, dtype=float)
    vals = np.asarray(values, dtype=float)
    lo, hi = window
    sel = (ts >= lo) & (ts <= hi)
    if sel.sum() < 8:
        raise InsufficientWindow("too few samples for the correction scan")
    ts = ts[sel]
    vals = vals[sel]
    band_idx, n_bands = _bands(ts, window)
    if n_bands < 3:
        raise InsufficientWindow(f"only {n_bands} dyadic bands in the window")
    counts = np.bincount(band_idx, minlength=band_idx.max() + 1).astype(float)
    w = ts ** (-leading_exponent) / np.sqrt(counts[band_idx])
    if scan is None:
        scan = np.arange(leading_exponent + 0.1, leading_exponent + 1.25, scan_step)
    # a constant column absorbs the near-boundary discretization offset of
    # the solver data; the true expansion has no constant term
    lead_col = ts**leading_exponent * w
    const_col = np.ones_like(ts) * w
    best = None
    for q in scan:
        X = np.stack([lead_col, ts**q * w, const_col], axis=1)
        norms = np.linalg.norm(X, axis=0)
        sol, res, *_ = np.linalg.lstsq(X / norms, vals * w, rcond=None)
        rss = float(np.sum((vals * w - (X / norms) @ sol) ** 2))
        if best is None or rss < best[0]:
            best = (rss, float(q), sol / norms)
    _, q_hat, sol = best
    return q_hat, float(sol[0]), float(sol[1])


def jackknife_coefficient(
    values, distances, exponents, target_exponent, *, window, weight_exponent=None
):
    """Band-jackknifed (coefficient, sigma) for one ladder exponent: refit
    leaving out one dyadic band at a time; the spread captures systematic
    model error that residual propagation misses."""
    ts = np.asarray(distances, dtype=float)
    vals = np.asarray(values, dtype=float)
    lo, hi = window
    sel = (ts >= lo) & (ts <= hi)
    ts = ts[sel]
    vals = vals[sel]
    band_idx, n_bands = _bands(ts, window)
    kw = dict(window=window, weight_exponent=weight_exponent)
    full = fit_expansion(vals, ts, exponents, min_bands=2, **kw)
    c_full, _ = full.coefficient(target_exponent)
    estimates = []
    for jb in range(n_bands):
        keep = band_idx != jb
        if keep.sum() < 2 * len(exponents) + 2:
            continue
        try:
            fit = fit_expansion(vals[keep], ts[keep], exponents, min_bands=1, **kw)
            estimates.append(fit.coefficient(target_exponent)[0])
        except (InsufficientWindow, IllConditionedLadder):
            continue
    if len(estimates) < 3:
        return c_full, math.inf
    est = np.asarray(estimates)
    m = len(est)
    sigma = math.sqrt((m - 1) / m * float(np.sum((est - est.mean()) ** 2)))
    return c_full, max(sigma, 1e-300)


# ---------------------------------------------------------------------------
# tangential regularity along the boundary (n = 2)
# ---------------------------------------------------------------------------

@dataclass
class TangentialReport:
    boundary_points: np.ndarray
    leading_coefficients: np.ndarray
    difference_order: int
    tangential_exponent: float
    tangential_saturated: bool
    normal_exponent: float


def tangential_regularity(q_values, arc_positions, order, *, normal_exponent=None):
    """Divided-difference smoothness of z -> Q_z^{0,0} along the boundary.

    ``q_values``: leading d^s coefficients at a uniform boundary sample;
    ``arc_positions``: arclength positions.  The Holder exponent of the top
    difference is the log-log slope of max |Delta^m Q| against the coarsened
    spacing delta, measured at spacings delta, 2 delta, 4 delta, ...
    """
    q = np.asarray(q_values, dtype=float)
    zs = np.asarray(arc_positions, dtype=float)
    if len(q) < (order + 1) * 4:
        raise InsufficientWindow("boundary sample too coarse for the difference order")
    spacing = float(np.mean(np.diff(zs)))
    deltas = []
    onorm = []
    stride = 1
    while stride * (order + 1) < len(q) and stride <= 8:
        sub = q[::stride]
        diff = np.diff(sub, n=order)
        deltas.append(stride * spacing)
        onorm.append(float(np.max(np.abs(diff))))
        stride *= 2
    deltas = np.array(deltas)
    onorm = np.array(onorm)
    scale = max(float(np.max(np.abs(q))), 1e-300)
    if np.max(onorm) < 1e-10 * scale:
        expo, saturated = math.inf, True
    else:
        A = np.vstack([np.log(deltas), np.ones_like(deltas)]).T
        slope = float(np.linalg.lstsq(A, np.log(np.maximum(onorm, 1e-300)), rcond=None)[0][0])
        expo = slope  # |Delta^m Q| ~ delta^expo, Holder exponent of Q^(m-?) ladder
        saturated = expo >= order - 0.05
    return TangentialReport(
        boundary_points=zs,
        leading_coefficients=q,
        difference_order=order,
        tangential_exponent=expo,
        tangential_saturated=saturated,
        normal_exponent=normal_exponent,
    )


# ---------------------------------------------------------------------------
# singular factorization L(eta d^p) = phi d^(p-2s) + R on curved domains
# ---------------------------------------------------------------------------

@dataclass
class FactorizationResult:
    boundary_point: np.ndarray
    distances: np.ndarray
    operator_values: np.ndarray
    phi: float
    residual_exponent: float
    reference: float = None


def _operator_on_function_1d(kernel, func, support, x, *, tol=1e-10):
    """Direct p.v. quadrature of L(func) at an interior point (n = 1)."""
    s = kernel.s
    a_dens = float(kernel.density.eval_angle(0.0))
    lo_s, hi_s = support
    ux = float(func(x))
    span = max(abs(x - lo_s), abs(hi_s - x)) + 1.0

    def second_diff(r):
        return 2.0 * ux - func(x + r) - func(x - r)

    # Taylor correction on [0, delta]
    delta = 1e-4 * min(abs(x - lo_s), abs(hi_s - x), 1.0)
    hh = delta / 8.0
    d2 = (func(x + hh) - 2.0 * ux + func(x - hh)) / hh**2
    head = -d2 * delta ** (2.0 - 2.0 * s) / (2.0 - 2.0 * s)

    pieces = sorted({abs(x - lo_s), abs(hi_s - x), span})
    total = head
    prev = delta
    for cut in pieces:
        if cut <= prev:
            continue
        val, err = quad(
            lambda r: second_diff(r) * r ** (-1.0 - 2.0 * s),
            prev,
            cut,
            epsabs=tol,
            epsrel=1e-9,
            limit=400,
        )
        if not math.isfinite(val):
            raise QuadratureFailed(f"non-finite quadrature on [{prev}, {cut}]")
        total += val
        prev = cut
    total += 2.0 * ux * prev ** (-2.0 * s) / (2.0 * s)
    return a_dens * total


def _operator_on_function_2d(kernel, func, x, reach, *, n_theta=96, n_r=360):
    """Polar panel quadrature of L(func) at x for compactly supported func."""
    s = kernel.s
    th = (np.arange(n_theta) + 0.5) * (2.0 * math.pi / n_theta)
    dirs = np.stack([np.cos(th), np.sin(th)], axis=1)
    dens = kernel.density.eval_angle(th)
    ux = float(func(x[None, :])[0])

    # geometric radial panels from delta to reach, Gauss 8 per panel
    delta = 1e-5
    n_panels = 48
    edges = np.geomspace(delta, reach, n_panels + 1)
    gx, gw = np.polynomial.legendre.leggauss(8)
    gx = 0.5 * (gx + 1.0)
    gw = 0.5 * gw
    r = (edges[:-1, None] + np.diff(edges)[:, None] * gx[None, :]).ravel()
    wr = (np.diff(edges)[:, None] * gw[None, :]).ravel() * r ** (-1.0 - 2.0 * s)

    total = 0.0
    for i in range(n_theta):
        ys_p = x[None, :] + r[:, None] * dirs[i][None, :]
        ys_m = x[None, :] - r[:, None] * dirs[i][None, :]
        D = 2.0 * ux - func(ys_p) - func(ys_m)
        total += dens[i] * float(np.sum(wr * D))
    total *= 2.0 * math.pi / n_theta
    # Taylor correction for [0, delta]: directional second derivatives are
    # bounded; contribution O(delta^(2-2s)) is below the panel tolerance
    tail = 2.0 * ux * reach ** (-2.0 * s) / (2.0 * s) * _total_mass(kernel)
    return 0.5 * total + tail


def _total_mass(kernel):
    th = np.linspace(0.0, 2.0 * math.pi, 4097)[:-1]
    return float(np.mean(kernel.density.eval_angle(th)) * 2.0 * math.pi)


def singular_factorization(
    kernel,
    domain,
    eta,
    p,
    *,
    boundary_point=None,
    t_values=None,
    quad_tol=1e-10,
):
    """Evaluate L(eta d^p) at points approaching the boundary and fit the
    leading coefficient against d^(p-2s); the residual exponent comes from a
    two-term fit."""
    s = kernel.s
    if not 0.0 < p < 2.0 * s:
        raise BadExponent(f"p must lie in (0, 2s), got {p}")
    dist = generalized_distance(domain)
    if t_values is None:
        t_values = 0.2 * 0.5 ** np.arange(0, 7)
    t_values = np.asarray(sorted(t_values, reverse=True), dtype=float)

    if domain.kind == "interval":
        z = domain.a if boundary_point is None else float(boundary_point)
        sign = 1.0 if abs(z - domain.a) < abs(z - domain.b) else -1.0

        def func(y):
            y = np.asarray(y, dtype=float)
            dv = dist(y)
            return eta(y) * np.where(dv > 0, dv, 0.0) ** p

        xs = z + sign * t_values
        vals = np.array(
            [_operator_on_function_1d(kernel, lambda y: float(func(y)), (domain.a, domain.b), float(xx), tol=quad_tol) for xx in xs]
        )
        dvals = dist(xs)
        grad_norm = 1.0
    else:
        if boundary_point is None:
            boundary_point = np.asarray(domain.center) + np.array([domain.radius, 0.0])
        z = np.asarray(boundary_point, dtype=float)
        nu = (np.asarray(domain.center) - z)
        nu = nu / np.linalg.norm(nu)

        def func(pts):
            pts = np.atleast_2d(np.asarray(pts, dtype=float))
            dv = dist(pts)
            return eta(pts) * np.where(dv > 0, dv, 0.0) ** p

        xs = z[None, :] + t_values[:, None] * nu[None, :]
        reach = 2.0 * domain.radius + 1.0
        vals = np.array([_operator_on_function_2d(kernel, func, xx, reach) for xx in xs])
        dvals = dist(xs)
        grad_norm = float(np.linalg.norm(dist.gradient(z + 1e-6 * nu)))

    if not np.all(np.isfinite(vals)):
        raise QuadratureFailed("operator values are not finite")

    # two-term fit phi d^(p-2s) + rho d^(p-2s+kappa) with kappa from the
    # residual decay; start from the leading-only fit on the inner points
    lead = dvals ** (p - 2.0 * s)
    phi0 = float(vals[-1] / lead[-1])
    resid = vals - phi0 * lead
    with np.errstate(divide="ignore"):
        mask = np.abs(resid) > 1e-12 * np.max(np.abs(vals))
    if mask.sum() >= 3:
        A = np.vstack([np.log(dvals[mask]), np.ones(int(mask.sum()))]).T
        kappa_abs = float(
            np.linalg.lstsq(A, np.log(np.abs(resid[mask])), rcond=None)[0][0]
        )
        kappa = kappa_abs - (p - 2.0 * s)
    else:
        kappa = math.inf
    if math.isfinite(kappa) and kappa > 0.05:
        X = np.stack([lead, dvals ** (p - 2.0 * s + kappa)], axis=1)
        scales = np.abs(X).max(axis=0)
        sol, *_ = np.linalg.lstsq(X / scales, vals, rcond=None)
        phi = float(sol[0] / scales[0])
    else:
        phi = phi0

    reference = compute_cp(s, p) * angular_moment(kernel) * grad_norm ** (2.0 * s)
    return FactorizationResult(
        boundary_point=np.atleast_1d(z),
        distances=dvals,
        operator_values=vals,
        phi=phi,
        residual_exponent=kappa,
        reference=reference,
    )
