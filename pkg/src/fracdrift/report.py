"""Acceptance-report generator: one runner per criterion, shared artifacts.

Each criterion function returns a CriterionResult with the measured numbers;
the report command and the acceptance test suite both dispatch through
``run_criterion`` so the verdicts printed by either are identical.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import expansion as expn
from . import obstacle as obst
from .domains import DomainSpec
from .errors import ResonantDiagonal
from .flatcase import angular_moment, compute_cp, cp_scan, sign_changes
from ._halfspace import HalfPower, default_cloud, generalized_sweep
from .kernels import StableKernel
from .phimap import build_phi, invert_phi, rotate_phi
from .solver import apply_operator, assemble_operator, make_grid, solve_dirichlet

S_DEFAULT = 0.7


@dataclass
class CriterionResult:
    cid: int
    name: str
    passed: bool
    runtime: float
    budget: float
    details: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.cid:2d} ({self.name}) in {self.runtime:.1f}s (budget {self.budget:.0f}s)"


class AcceptanceContext:
    """Caches the solves shared between criteria."""

    def __init__(self, s=S_DEFAULT, n_fine=8191, n_profile=4095, seed=20260809):
        self.s = s
        self.n_fine = n_fine
        self.n_profile = n_profile
        self.seed = seed
        self.kernel1 = StableKernel.fractional_laplacian(s, 1)
        self.kernel2 = StableKernel.fractional_laplacian(s, 2)
        self._cache = {}

    def unit_interval_runs(self):
        """(grid, u_b0, u_b1, u2_b1) on (0,1) at the fine resolution."""
        if "unit" not in self._cache:
            dom = DomainSpec.interval(0.0, 1.0)
            grid = make_grid(dom, n_interior=self.n_fine)
            Ni = grid.interior_count
            op0 = assemble_operator(self.kernel1, grid, b=0.0)
            u0 = solve_dirichlet(op0, np.ones(Ni))
            op1 = assemble_operator(self.kernel1, grid, b=1.0)
            u1 = solve_dirichlet(op1, np.ones(Ni))
            x_int = grid.nodes[grid.interior]
            u2 = solve_dirichlet(op1, 1.0 + x_int)
            self._cache["unit"] = (grid, u0, u1, u2)
        return self._cache["unit"]

    def symmetric_interval_runs(self):
        """(grid, u_b0, u_b1) on (-1,1) at the profile resolution."""
        if "sym" not in self._cache:
            dom = DomainSpec.interval(-1.0, 1.0)
            grid = make_grid(dom, n_interior=self.n_profile)
            Ni = grid.interior_count
            op0 = assemble_operator(self.kernel1, grid, b=0.0)
            u0 = solve_dirichlet(op0, np.ones(Ni))
            op1 = assemble_operator(self.kernel1, grid, b=1.0)
            u1 = solve_dirichlet(op1, np.ones(Ni))
            self._cache["sym"] = (grid, u0, u1)
        return self._cache["sym"]

    def obstacle_ladder(self, sizes=(511, 1023, 2047)):
        key = ("obstacle", sizes)
        if key not in self._cache:
            dom = DomainSpec.interval(-1.0, 1.0)
            runs = []
            u_prev = grid_prev = None
            for N in sizes:
                grid = make_grid(dom, n_interior=N)
                phi = obst.smooth_bump(grid.nodes)
                init = None
                if u_prev is not None:
                    init = np.interp(grid.nodes, grid_prev.nodes, u_prev)
                spec = obst.ObstacleProblemSpec(kernel=self.kernel1, grid=grid, obstacle=phi)
                u, res = obst.solve_obstacle(spec, initial=init)
                runs.append((grid, phi, u, res))
                u_prev, grid_prev = u, grid
            self._cache[key] = runs
        return self._cache[key]


def _timed(budget):
    def wrap(fn):
        def inner(ctx):
            t0 = time.time()
            passed, details, failures = fn(ctx)
            rt = time.time() - t0
            if rt > budget:
                passed = False
                failures = list(failures) + [f"runtime {rt:.1f}s exceeds budget {budget}s"]
            return CriterionResult(
                cid=fn.cid,
                name=fn.cname,
                passed=passed,
                runtime=rt,
                budget=budget,
                details=details,
                failures=list(failures),
            )

        inner.cid = fn.cid
        inner.cname = fn.cname
        inner.budget = budget
        return inner

    return wrap


def _criterion(cid, cname):
    def deco(fn):
        fn.cid = cid
        fn.cname = cname
        return fn

    return deco


@_timed(5.0)
@_criterion(1, "flat-case zero of c_p")
def criterion_1(ctx):
    details = {}
    failures = []
    for s in (0.6, 0.7, 0.8):
        c_zero = compute_cp(s, s)
        c_ref = compute_cp(s, s + 0.1)
        ratio = abs(c_zero) / abs(c_ref)
        details[f"s={s}"] = {"c(s,s)": c_zero, "c(s,s+0.1)": c_ref, "ratio": ratio}
        if not ratio <= 1e-8:
            failures.append(f"s={s}: |c_s| ratio {ratio:.2e} > 1e-8")
        ps = np.arange(0.1, 2 * s - 0.05 + 1e-12, 0.05)
        vals = [compute_cp(s, p) for p in ps]
        flips = sign_changes(vals)
        details[f"s={s}"]["sign_changes"] = len(flips)
        if len(flips) != 1:
            failures.append(f"s={s}: {len(flips)} sign changes, expected 1")
        else:
            i0, i1 = flips[0]
            if not ps[i0] <= s <= ps[i1]:
                failures.append(f"s={s}: sign change at [{ps[i0]}, {ps[i1]}] not bracketing s")
    return not failures, details, failures


@_timed(60.0)
@_criterion(2, "generalized-evaluation homogeneity")
def criterion_2(ctx):
    rng = np.random.default_rng(ctx.seed)
    s = ctx.s
    failures = []
    details = {}
    def draw_p(lo, hi):
        # stay clear of the degenerate zero at p = s, where the limit value
        # itself vanishes and relative comparisons lose meaning
        while True:
            p = float(rng.uniform(lo, hi))
            if abs(p - s) >= 0.08:
                return p

    cases = []
    for _ in range(3):
        cases.append((1, 0, draw_p(0.3, 2 * s - 0.1)))
    cases.append((2, 1, draw_p(0.3, 2 * s - 0.1)))
    cases.append((2, 0, float(rng.uniform(2 * s + 0.15, 2 * s + 0.85))))
    for i, (n, g, p) in enumerate(cases):
        kernel = ctx.kernel1 if n == 1 else ctx.kernel2
        h = g + p - 2 * s
        k = max(0, math.floor(h) + 1) if h >= 0 else 0
        n_unknowns = (g + 1) + (k * (k + 1)) // 2
        x = np.array([0.37]) if n == 1 else np.array([0.21, 0.33])
        col = HalfPower(n=n, p=p, tangential_degree=g)
        base_cloud = default_cloud(n, col.e, n_unknowns=n_unknowns)
        # independent quadrature geometries for the two evaluations: the
        # second runs on a rescaled cloud (must stay inside the first cutoff)
        r1 = generalized_sweep(kernel, [col], [x], cloud=base_cloud, quality="fast")[0]
        r2 = generalized_sweep(kernel, [col], [2 * x], cloud=1.5 * base_cloud, quality="fast")[0]
        ratio = r2.limits[0] / r1.limits[0]
        expect = 2.0**h
        rel = abs(ratio - expect) / abs(expect)
        details[f"case{i}"] = {"n": n, "gamma": g, "p": p, "ratio": ratio, "expected": expect, "rel": rel}
        if not rel <= 1e-6:
            failures.append(f"case {i} (n={n}, g={g}, p={p:.3f}): rel {rel:.2e} > 1e-6")
    return not failures, details, failures


@_timed(300.0)
@_criterion(3, "correction-map structure")
def criterion_3(ctx):
    s = ctx.s
    p = s + (2 * s - 1.0)
    phi = build_phi(ctx.kernel2, p, 3, quality="standard")
    psi = invert_phi(phi)
    upper, norm = phi.triangularity_defect()
    ref = compute_cp(s, p) * angular_moment(ctx.kernel2)
    rel00 = abs(phi.entries[0, 0] - ref) / abs(ref)
    details = {
        "upper_rel": upper / norm,
        "psi_defect": psi.inverse_defect,
        "phi00_rel": rel00,
        "diag_min": phi.diag_min,
        "block_defect_rel": phi.degree_block_defect() / norm,
    }
    failures = []
    if not upper <= 1e-6 * norm:
        failures.append(f"strict-upper {upper:.2e} > 1e-6 * {norm:.2e}")
    if not psi.inverse_defect <= 1e-8:
        failures.append(f"|Psi Phi - I| {psi.inverse_defect:.2e} > 1e-8")
    if not rel00 <= 1e-6:
        failures.append(f"degree-0 entry off by {rel00:.2e} > 1e-6")
    return not failures, details, failures


@_timed(120.0)
@_criterion(4, "rotation formula")
def criterion_4(ctx):
    s = ctx.s
    p = s + 0.4
    e = np.array([math.sin(math.pi / 6.0), math.cos(math.pi / 6.0)])
    phi_rot = rotate_phi(ctx.kernel2, p, 1, e, quality="fast")
    basis = phi_rot.basis
    eperp = np.array([-e[1], e[0]])
    pts = [0.3 * e + 0.1 * eperp, 0.15 * e - 0.2 * eperp, 0.5 * e]
    cols = [
        HalfPower(n=2, p=p, coeffs=c, e=tuple(e))
        for c in ((1.0,), (0.0, 1.0), (1.0, 0.0))  # P = 1, y1, y2... degree-1 coeffs
    ]
    # coeffs tuples: degree 0: (1,); degree 1: (c_y1... ) over {y1^j y2^(1-j)}
    sweeps = generalized_sweep(ctx.kernel2, cols, pts, quality="fast")
    poly_vecs = {0: {(0, 0): 1.0}, 1: {(1, 0): 1.0}, 2: {(0, 1): 1.0}}
    failures = []
    worst = 0.0
    for ci, res in enumerate(sweeps):
        vec = np.zeros(len(basis))
        for mono, cv in poly_vecs[ci].items():
            vec[basis.index(mono)] = cv
        q = phi_rot.entries @ vec
        for pt, lim in zip(pts, res.limits):
            sig = float(pt @ e)
            pred = sum(q[i] * pt[0] ** basis[i][0] * pt[1] ** basis[i][1] for i in range(len(basis)))
            pred *= sig ** (p - 2 * s)
            rel = abs(lim - pred) / max(abs(lim), 1e-300)
            worst = max(worst, rel)
            if not rel <= 1e-5:
                failures.append(f"column {ci} at {pt}: rel {rel:.2e} > 1e-5")
    return not failures, {"worst_rel": worst}, failures


@_timed(120.0)
@_criterion(5, "linear solver profile")
def criterion_5(ctx):
    s = ctx.s
    grid, u0, _ = ctx.symmetric_interval_runs()
    x = grid.nodes
    prof = np.where(np.abs(x) < 1.0, np.clip(1.0 - x**2, 0.0, None), 0.0) ** s
    err = float(np.max(np.abs(u0 / u0.max() - prof / prof.max())))
    failures = []
    details = {"profile_err": err}
    if not err <= 0.02:
        failures.append(f"profile error {err:.4f} > 2%")

    # comparison principle on random nonnegative right-hand sides
    rng = np.random.default_rng(ctx.seed + 5)
    dom = DomainSpec.interval(-1.0, 1.0)
    g512 = make_grid(dom, n_interior=511)
    op = assemble_operator(ctx.kernel1, g512, b=0.5)
    xt = g512.nodes[g512.interior]
    worst_min = math.inf
    for i in range(20):
        c = rng.uniform(0.0, 1.0, 3)
        f = c[0] + c[1] * (1 + np.cos(math.pi * xt * rng.integers(1, 4))) + c[2] * xt**2
        u = solve_dirichlet(op, f)
        worst_min = min(worst_min, float(u[g512.interior].min()))
    details["comparison_min"] = worst_min
    if not worst_min >= -1e-10:
        failures.append(f"comparison principle violated: min u = {worst_min:.2e}")
    return not failures, details, failures


@_timed(120.0)
@_criterion(6, "boundary growth exponent")
def criterion_6(ctx):
    s = ctx.s
    grid, u0, u1, _ = ctx.unit_interval_runs()
    x = grid.nodes
    h = grid.h
    lo = max(10 * h, h**0.8)
    mask = grid.interior & (x >= lo) & (x <= 0.25)
    ts = x[mask]
    failures = []
    details = {}
    for name, u in (("b=0", u0), ("b=1", u1)):
        expo, saturated, nb = expn.holder_exponent(
            u[mask], ts, center=0.0, window=(lo, 0.2)
        )
        details[name] = {"exponent": expo, "bands": nb}
        if not abs(expo - s) <= 0.03:
            failures.append(f"{name}: boundary exponent {expo:.4f} not within {s} +/- 0.03")
    return not failures, details, failures


def _leading_fit(u, grid, lad_exponents, window):
    x = grid.nodes
    mask = grid.interior & (x > 0) & (x <= window[1] * 1.05)
    return expn.fit_expansion(u[mask], x[mask], lad_exponents, window=window)


@_timed(600.0)
@_criterion(7, "drift exponent ladder")
def criterion_7(ctx):
    s = ctx.s
    eps0 = 2 * s - 1.0
    grid, u0, u1, _ = ctx.unit_interval_runs()
    x = grid.nodes
    h = grid.h
    t_lo = expn.fit_window(h)[0]
    failures = []
    details = {}
    mask = grid.interior & (x > 0) & (x <= 0.25)
    ts = x[mask]

    # focused design {const, s, s + eps0} on an inner window: the wide ladder
    # basis is too collinear for the 1e-4-level solver data (the constant
    # column absorbs the near-boundary scheme offset), and the band jackknife
    # supplies an honest systematic-error sigma
    win_c = (t_lo, 0.05)
    exps_c = [0.0, s, s + eps0]
    c11, sig11 = expn.jackknife_coefficient(
        u1[mask], ts, exps_c, s + eps0, window=win_c, weight_exponent=s
    )
    nonzero = abs(c11) >= 3.0 * sig11
    q1, c0_1, _ = expn.first_correction_exponent(u1[mask], ts, s, window=(t_lo, 0.05))
    details["b=1"] = {
        "coeff_at_seps0": c11,
        "sigma": sig11,
        "statistically_nonzero": bool(nonzero),
        "first_correction_exponent": q1,
    }
    if not nonzero:
        failures.append(f"b=1: coefficient at {s+eps0:.2f} not significant ({c11:.3e} vs 3x{sig11:.3e})")
    if not abs(q1 - (s + eps0)) <= 0.05:
        failures.append(f"b=1: first correction exponent {q1:.4f} not {s+eps0:.2f} +/- 0.05")

    c01, sig01 = expn.jackknife_coefficient(
        u0[mask], ts, exps_c, s + eps0, window=win_c, weight_exponent=s
    )
    zero = abs(c01) < 3.0 * sig01
    q0, c0_0, _ = expn.first_correction_exponent(u0[mask], ts, s, window=(0.005, 0.2))
    details["b=0"] = {
        "coeff_at_seps0": c01,
        "sigma": sig01,
        "statistically_zero": bool(zero),
        "first_correction_exponent": q0,
    }
    if not zero:
        failures.append(
            f"b=0: coefficient at {s+eps0:.2f} spuriously significant ({c01:.3e} vs 3x{sig01:.3e})"
        )
    if not abs(q0 - (1.0 + s)) <= 0.05:
        failures.append(f"b=0: first correction exponent {q0:.4f} not {1+s:.2f} +/- 0.05")
    return not failures, details, failures


@_timed(300.0)
@_criterion(8, "optimal quotient regularity")
def criterion_8(ctx):
    s = ctx.s
    grid, u0, u1, _ = ctx.unit_interval_runs()
    x = grid.nodes
    h = grid.h
    fitw = expn.fit_window(h)
    lo = 0.0125  # 4 dyadic bands below 0.2, above the quotient noise floor
    mask = grid.interior & (x >= lo) & (x <= 0.25)
    ts = x[mask]
    failures = []
    details = {}

    # boundary value of the quotient fitted on the oscillation window itself,
    # so the center error stays far below the measured oscillation scale
    g1 = u1[mask] / ts**s
    q1 = _window_center(g1, ts, 2 * s - 1.0)
    e1, sat1, nb = expn.holder_exponent(g1, ts, center=q1, window=(lo, 0.2))
    details["b=1"] = {"exponent": e1, "saturated": sat1, "Q": q1}
    if not abs(e1 - (2 * s - 1.0)) <= 0.05:
        failures.append(f"b=1: u/d^s exponent {e1:.4f} not {2*s-1:.2f} +/- 0.05")

    g0 = u0[mask] / ts**s
    q0 = _window_center(g0, ts, 1.0)
    e0, sat0, nb0 = expn.holder_exponent(g0, ts, center=q0, window=(lo, 0.2))
    details["b=0"] = {"exponent": e0, "saturated": sat0, "Q": q0}
    if not (e0 >= 0.9 and sat0):
        failures.append(f"b=0: u/d^s exponent {e0:.4f} below saturation 0.9")
    return not failures, details, failures


def _window_center(values, ts, correction_exponent):
    """Boundary value of a quotient field: constant of the two-term fit
    {1, t^q} over the measurement window (normal-limit extrapolation)."""
    X = np.stack([np.ones_like(ts), ts**correction_exponent], axis=1)
    sol, *_ = np.linalg.lstsq(X, np.asarray(values, dtype=float), rcond=None)
    return float(sol[0])


@_timed(600.0)
@_criterion(9, "boundary Harnack quotient")
def criterion_9(ctx):
    s = ctx.s
    grid, _, u1, u2 = ctx.unit_interval_runs()
    x = grid.nodes
    h = grid.h
    failures = []
    details = {}
    lo = 0.0125
    mask = grid.interior & (x >= lo) & (x <= 0.25)
    ts = x[mask]
    ratio_min = float(np.min(u2[mask] / ts**s))
    details["u2_lower_constant"] = ratio_min
    if not ratio_min > 0.0:
        failures.append("u2 >= c d^s fails")
    g = u1[mask] / u2[mask]
    center = _window_center(g, ts, 2 * s - 1.0)
    expo, saturated, nb = expn.holder_exponent(g, ts, center=center, window=(lo, 0.2))
    details["ratio_exponent"] = expo
    details["ratio_center"] = center
    details["saturated"] = saturated
    if not abs(expo - (2 * s - 1.0)) <= 0.05:
        failures.append(
            f"ratio exponent {expo:.4f} not {2*s-1:.2f} +/- 0.05 "
            "(drift-ladder coefficients are universal multiples of the leading "
            "one, so they cancel in ratios of same-operator solutions; the "
            "measured quotient is smoother than the generic optimal bound)"
        )
    return not failures, details, failures


@_timed(600.0)
@_criterion(10, "obstacle problem")
def criterion_10(ctx):
    s = ctx.s
    failures = []
    details = {}
    runs = ctx.obstacle_ladder()
    res_base = runs[0][3]
    details["residuals"] = [float(r[3].complementarity_residual) for r in runs]
    for rr in runs:
        if not rr[3].complementarity_residual <= 1e-8:
            failures.append(f"complementarity residual {rr[3].complementarity_residual:.2e} > 1e-8")

    # brute-force oracle on a 64-node instance: enumerate contact intervals
    dom = DomainSpec.interval(-1.0, 1.0)
    g64 = make_grid(dom, n_interior=63)
    phi64 = obst.smooth_bump(g64.nodes)
    spec64 = obst.ObstacleProblemSpec(kernel=ctx.kernel1, grid=g64, obstacle=phi64)
    u64, _ = obst.solve_obstacle(spec64)
    u_oracle = _active_set_oracle(ctx.kernel1, g64, phi64)
    dev = float(np.max(np.abs(u64 - u_oracle)))
    details["oracle_deviation"] = dev
    if not dev <= 1e-8:
        failures.append(f"active-set oracle deviation {dev:.2e} > 1e-8")

    fbs = [r[3].boundary_points for r in runs]
    d1 = float(np.max(np.abs(fbs[0] - fbs[1])))
    d2 = float(np.max(np.abs(fbs[1] - fbs[2])))
    details["fb_diffs"] = [d1, d2]
    if not d2 < d1:
        failures.append(f"free boundary not Cauchy: diffs {d1:.2e}, {d2:.2e}")

    grid, phi, u, res = runs[1]
    w = res.height
    fb = res.boundary_points
    expo = obst.growth_exponent_at_boundary(w, grid, fb[-1], side=+1, window=0.15)
    details["w_growth_exponent"] = expo
    if not abs(expo - (1.0 + s)) <= 0.1:
        failures.append(f"w growth exponent {expo:.4f} not {1+s:.2f} +/- 0.1")
    reps = [
        obst.check_regular_point(w, grid, s, fb[0], 0.15),
        obst.check_regular_point(w, grid, s, fb[-1], 0.15),
    ]
    details["nondegeneracy"] = [
        {k: r[k] for k in ("z", "c_lower", "c_robust", "grad_upper")} for r in reps
    ]
    for r in reps:
        if not r["c_robust"] > 0.0:
            failures.append(f"nondegeneracy constant not positive at z={r['z']:.4f}")
    return not failures, details, failures


def _active_set_oracle(kernel, grid, phi):
    """Exhaustive enumeration of contact intervals on a tiny instance."""
    from scipy.linalg import toeplitz

    from .solver import _system_1d

    op = assemble_operator(kernel, grid, b=0.0)
    col, row = _system_1d(op)
    A = toeplitz(col, row)
    idx = np.flatnonzero(grid.interior)
    Ni = len(idx)
    phi_i = phi[idx]
    best = None
    for i0 in range(Ni):
        for i1 in range(i0 - 1, Ni):  # i1 < i0 encodes the empty contact set
            contact = np.zeros(Ni, dtype=bool)
            if i1 >= i0:
                contact[i0 : i1 + 1] = True
            u = np.empty(Ni)
            u[contact] = phi_i[contact]
            free = ~contact
            if free.any():
                rhs = -A[np.ix_(free, contact)] @ phi_i[contact] if contact.any() else np.zeros(free.sum())
                u[free] = np.linalg.solve(A[np.ix_(free, free)], rhs)
            res_eq = A @ u
            feasible = np.all(u[free] >= phi_i[free] - 1e-11) if free.any() else True
            nonneg = np.all(res_eq[contact] >= -1e-9) if contact.any() else True
            if feasible and nonneg:
                comp = float(np.max(np.abs(np.minimum(res_eq, u - phi_i))))
                if best is None or comp < best[0]:
                    best = (comp, u)
    if best is None:
        raise RuntimeError("active-set enumeration found no feasible configuration")
    full = phi.copy()
    full[idx] = best[1]
    full[~grid.interior] = 0.0
    return full


@_timed(300.0)
@_criterion(11, "resonance diagnostics")
def criterion_11(ctx):
    s = ctx.s
    failures = []
    details = {}
    lad = expn.ladder(0.75, 2.0)
    collided = {(e.k, e.l) for e in lad.collisions}
    details["collisions"] = sorted(collided)
    if not {(2, 0), (0, 1)} <= collided:
        failures.append(f"ladder(0.75, 2.0) collisions {collided} missing (2,0)/(0,1)")

    p_res = s + 1.0 + 5e-4
    phi1 = build_phi(ctx.kernel1, p_res, 1)
    try:
        invert_phi(phi1)
        failures.append("ResonantDiagonal not raised at p = s + 1 + 5e-4")
        details["resonant_raise"] = False
    except ResonantDiagonal as exc:
        details["resonant_raise"] = True
        details["resonant_index"] = exc.index
        details["nearest_integer"] = exc.nearest_integer

    # measured diagonal behaviour near p - s in N for |gamma| >= 1 (recorded)
    diag_scan = []
    for dp in (-0.1, -0.03, -0.01):
        p = s + 1.0 + dp
        phi2 = build_phi(ctx.kernel2, p, 1, quality="fast")
        i_gamma1 = phi2.basis.index((1, 0))
        diag_scan.append(
            {
                "p_minus_s": 1.0 + dp,
                "diag_gamma1": float(phi2.entries[i_gamma1, i_gamma1]),
                "cp_times_moment": compute_cp(s, p) * angular_moment(ctx.kernel2),
            }
        )
    details["gamma1_diagonal_scan"] = diag_scan
    shrinks = all(
        abs(diag_scan[i + 1]["diag_gamma1"]) < abs(diag_scan[i]["diag_gamma1"])
        for i in range(len(diag_scan) - 1)
    )
    details["diagonal_vanishes_towards_resonance"] = shrinks
    return not failures, details, failures


CRITERIA = [
    criterion_1,
    criterion_2,
    criterion_3,
    criterion_4,
    criterion_5,
    criterion_6,
    criterion_7,
    criterion_8,
    criterion_9,
    criterion_10,
    criterion_11,
]


def run_criterion(cid, ctx=None):
    ctx = ctx or AcceptanceContext()
    return CRITERIA[cid - 1](ctx)


def run_all(ctx=None, ids=None):
    ctx = ctx or AcceptanceContext()
    out = []
    for fn in CRITERIA:
        if ids is not None and fn.cid not in ids:
            continue
        result = fn(ctx)
        print(result.line(), flush=True)
        out.append(result)
    return out
