"""Grid discretization of L + b.grad with Dirichlet exterior condition.

The nonlocal part uses symmetric second differences in product-integration
form: cell-exact kernel moments weight the nodal differences, the half cell
around the origin enters through a second-order Taylor correction, and the
kernel mass beyond the last relevant offset (where the exterior zero data
makes the integrand constant) is added analytically to the diagonal.  Off
diagonal weights are nonpositive and the diagonal positive, so the discrete
operator is an M-matrix and the comparison principle holds nodewise; the
drift stencil is central by default with an upwind fallback that preserves
the sign structure on coarse grids.

In 1D the system matrix is Toeplitz on the interior and solved directly; in
2D the operator acts as a lattice convolution (FFT) and the system is solved
iteratively with diagonal preconditioning.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.linalg import matmul_toeplitz, solve_toeplitz
from scipy.sparse.linalg import LinearOperator, bicgstab, gmres

from .domains import DomainSpec, generalized_distance
from .errors import BadDomain, BadExponent, LinearSolveFailed, NotMonotoneWarning


@dataclass
class Grid:
    """Uniform vertex grid resolving the domain; exterior nodes carry data."""

    n: int
    h: float
    nodes: np.ndarray          # 1D: (N,) coordinates; 2D: (N, 2)
    interior: np.ndarray       # bool mask over nodes
    domain: DomainSpec
    shape: tuple = None        # lattice shape for n = 2
    origin: np.ndarray = None  # lattice origin for n = 2

    @property
    def interior_count(self):
        return int(self.interior.sum())


def make_grid(domain, n_interior=None, h=None, margin=None):
    """Build a grid with ~n_interior interior nodes (or spacing h)."""
    if domain.kind == "interval":
        a, b = domain.a, domain.b
        if h is None:
            h = (b - a) / (n_interior + 1)
        npts = int(round((b - a) / h))
        xs = a + h * np.arange(npts + 1)
        interior = (xs > a + 0.5 * h) & (xs < b - 0.5 * h)
        return Grid(n=1, h=h, nodes=xs, interior=interior, domain=domain)
    if domain.kind == "disk":
        r0 = domain.radius
        c = np.asarray(domain.center, dtype=float)
        if h is None:
            h = 2.0 * r0 / (math.sqrt(max(n_interior, 4) / math.pi) * 2.0)
        m = margin if margin is not None else 2
        half = int(math.ceil(r0 / h)) + m
        idx = np.arange(-half, half + 1)
        X, Y = np.meshgrid(idx, idx, indexing="ij")
        pts = np.stack([c[0] + h * X, c[1] + h * Y], axis=-1).reshape(-1, 2)
        rr = np.linalg.norm(pts - c, axis=1)
        interior = rr < r0 - 1e-12
        return Grid(
            n=2,
            h=h,
            nodes=pts,
            interior=interior,
            domain=domain,
            shape=(2 * half + 1, 2 * half + 1),
            origin=c - h * half,
        )
    raise BadDomain(f"solver grids support interval and disk, got {domain.kind!r}")


@dataclass
class DiscreteOperator:
    """Offset-stencil representation of L + b.grad on a grid.

    ``offset_weights``: nonnegative kernel moments per positive offset (1D) or
    per lattice offset (2D, symmetric array); they multiply the second
    differences, so the induced off-diagonal matrix weights are their
    negatives.  ``diagonal`` includes the analytic far-field tail; the drift
    stencil is stored separately.
    """

    grid: Grid
    kernel: object
    b: np.ndarray
    offset_weights: np.ndarray
    diagonal: float
    tail: float
    drift_mode: str
    taylor_weight: float
    monotone: bool
    consistency_error: float = None

    def row(self, i):
        """Dense matrix row for interior node i (1D only)."""
        if self.grid.n != 1:
            raise BadDomain("dense rows are materialized in 1D only")
        N = len(self.grid.nodes)
        row = np.zeros(N)
        row[i] = self.diagonal
        K = len(self.offset_weights)
        for k in range(1, K + 1):
            w = self.offset_weights[k - 1]
            if i - k >= 0:
                row[i - k] -= w
            if i + k < N:
                row[i + k] -= w
        self._add_drift_row(row, i)
        return row

    def _add_drift_row(self, row, i):
        h = self.grid.h
        b = float(self.b[0])
        if b == 0.0:
            return
        if self.drift_mode == "central":
            if i + 1 < len(row):
                row[i + 1] += b / (2 * h)
            if i - 1 >= 0:
                row[i - 1] -= b / (2 * h)
        else:  # upwind
            if b > 0:
                row[i] += b / h
                if i - 1 >= 0:
                    row[i - 1] -= b / h
            else:
                row[i] -= b / h
                if i + 1 < len(row):
                    row[i + 1] += b / h


def _cell_moments_1d(kernel, h, n_offsets):
    """W_k = int over cell k of a |y|^(-1-2s), exact power-law primitives."""
    s = kernel.s
    a = float(kernel.density.eval_angle(0.0))

    def prim(y):  # integral of y^(-1-2s)
        return y ** (-2.0 * s) / (-2.0 * s)

    k = np.arange(1, n_offsets + 1)
    lo = (k - 0.5) * h
    hi = (k + 0.5) * h
    return a * (prim(hi) - prim(lo))


def assemble_operator(kernel, grid, b=0.0, drift_mode="auto"):
    """Discretize L + b.grad; see module docstring for the scheme."""
    s = kernel.s
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if np.any(b != 0.0) and s <= 0.5:
        raise BadExponent("drift requires the subcritical regime s > 1/2")
    h = grid.h
    if grid.n == 1:
        a_dens = float(kernel.density.eval_angle(0.0))
        span = np.max(grid.nodes) - np.min(grid.nodes)
        n_off = int(math.ceil(span / h)) + 1
        weights = _cell_moments_1d(kernel, h, n_off)
        # Taylor-corrected origin cell [0, h/2]:
        #   int_0^{h/2} (-u'' y^2) a y^(-1-2s) dy = -u'' a (h/2)^(2-2s)/(2-2s)
        # with u'' by central differences; contributes like an extra weight on
        # the first offset
        ctay = a_dens * (0.5 * h) ** (2.0 - 2.0 * s) / (2.0 - 2.0 * s)
        weights = weights.copy()
        weights[0] += ctay / h**2
        tail_radius = (n_off + 0.5) * h
        tail = 2.0 * a_dens * tail_radius ** (-2.0 * s) / (2.0 * s)
        diagonal = 2.0 * float(weights.sum()) + tail

        mode = drift_mode
        bh = float(b[0])
        if mode == "auto":
            mode = "central" if weights[0] >= abs(bh) / (2 * h) or bh == 0.0 else "upwind"
        monotone = True
        if mode == "central" and weights[0] < abs(bh) / (2 * h):
            monotone = False
            warnings.warn(
                "central drift stencil breaks the M-matrix sign condition",
                NotMonotoneWarning,
            )
        return DiscreteOperator(
            grid=grid,
            kernel=kernel,
            b=b,
            offset_weights=weights,
            diagonal=diagonal,
            tail=tail,
            drift_mode=mode,
            taylor_weight=ctay,
            monotone=monotone,
        )

    # n = 2: lattice-offset weights over a window covering the domain support
    c = np.asarray(grid.domain.center, dtype=float)
    r0 = grid.domain.radius
    reach = 2.0 * r0 + 2 * h
    K = int(math.ceil(reach / h))
    idx = np.arange(-K, K + 1)
    OX, OY = np.meshgrid(idx, idx, indexing="ij")
    YX = h * OX
    YY = h * OY
    rr = np.hypot(YX, YY)
    with np.errstate(divide="ignore", invalid="ignore"):
        Kvals = kernel.density(np.stack([YX, YY], axis=-1)) * rr ** (-2.0 - 2.0 * s)
    W = Kvals * h * h
    W[K, K] = 0.0
    # refine the near-singular cells by subdivided quadrature
    gl_x, gl_w = np.polynomial.legendre.leggauss(12)
    for dx in range(-4, 5):
        for dy in range(-4, 5):
            if dx == 0 and dy == 0:
                continue
            xs = (dx + 0.5 * gl_x)[:, None] * h
            ys = (dy + 0.5 * gl_x)[None, :] * h
            rr_c = np.hypot(xs, ys)
            Kc = kernel.density(np.stack([np.broadcast_to(xs, rr_c.shape), np.broadcast_to(ys, rr_c.shape)], axis=-1)) * rr_c ** (-2.0 - 2.0 * s)
            W[K + dx, K + dy] = float(
                (gl_w[:, None] * gl_w[None, :] * Kc).sum() * (0.5 * h) ** 2
            )
    # origin cell Taylor correction: second moments of the kernel over the cell
    c11 = _origin_moment_2d(kernel, h, 0, 0)
    c22 = _origin_moment_2d(kernel, h, 1, 1)
    c12 = _origin_moment_2d(kernel, h, 0, 1)
    # -(1/2)[c11 u_11 + 2 c12 u_12 + c22 u_22] discretized centrally maps onto
    # the nearest-offset weights of the symmetric difference form
    W[K + 1, K] += 0.5 * c11 / h**2
    W[K - 1, K] += 0.5 * c11 / h**2
    W[K, K + 1] += 0.5 * c22 / h**2
    W[K, K - 1] += 0.5 * c22 / h**2
    if abs(c12) > 1e-14 * (abs(c11) + abs(c22)):
        for sx, sy in ((1, 1), (-1, -1)):
            W[K + sx, K + sy] += 0.25 * c12 / h**2
        for sx, sy in ((1, -1), (-1, 1)):
            W[K + sx, K + sy] -= 0.25 * c12 / h**2
    monotone = bool(np.min(W) >= -1e-12 * np.max(W))
    if not monotone:
        warnings.warn(
            "anisotropic origin correction produced negative stencil weights",
            NotMonotoneWarning,
        )

    tail_radius = (K + 0.5) * h
    from .flatcase import angular_moment  # total angular mass of the kernel

    dens_mass = _angular_mass(kernel)
    tail = dens_mass * tail_radius ** (-2.0 * s) / (2.0 * s)
    diagonal = float(W.sum()) + tail

    bh = np.linalg.norm(b)
    mode = drift_mode
    wmin_axis = min(W[K + 1, K], W[K, K + 1])
    if mode == "auto":
        mode = "central" if bh == 0.0 or wmin_axis >= bh / (2 * h) else "upwind"
    if mode == "central" and 0.0 < wmin_axis < bh / (2 * h):
        monotone = False
        warnings.warn(
            "central drift stencil breaks the M-matrix sign condition",
            NotMonotoneWarning,
        )
    return DiscreteOperator(
        grid=grid,
        kernel=kernel,
        b=b if len(b) == 2 else np.array([b[0], 0.0]),
        offset_weights=W,
        diagonal=diagonal,
        tail=tail,
        drift_mode=mode,
        taylor_weight=c11 + c22,
        monotone=monotone,
    )


def _origin_moment_2d(kernel, h, i, j):
    """int over the origin cell of y_i y_j K(y) dy, exact in polar form:
    the radial part integrates to rho(theta)^(2-2s)/(2-2s) with rho the
    distance to the square cell boundary."""
    s = kernel.s
    half = 0.5 * h
    th = np.linspace(0.0, 2.0 * math.pi, 2049)[:-1]
    ct, st = np.cos(th), np.sin(th)
    rho = half / np.maximum(np.abs(ct), np.abs(st))
    comp_i = ct if i == 0 else st
    comp_j = ct if j == 0 else st
    dens = kernel.density.eval_angle(th)
    integrand = dens * comp_i * comp_j * rho ** (2.0 - 2.0 * s) / (2.0 - 2.0 * s)
    return float(np.mean(integrand) * 2.0 * math.pi)


def _angular_mass(kernel):
    if kernel.n == 1:
        return float(kernel.density.eval_angle(0.0) + kernel.density.eval_angle(math.pi))
    th = np.linspace(0.0, 2.0 * math.pi, 4097)[:-1]
    return float(np.mean(kernel.density.eval_angle(th)) * 2.0 * math.pi)


# ---------------------------------------------------------------------------
# application and solves
# ---------------------------------------------------------------------------

def _system_1d(op):
    """(first column, first row) of the interior Toeplitz system."""
    grid = op.grid
    Ni = int(grid.interior.sum())
    W = op.offset_weights
    col = np.zeros(Ni)
    row = np.zeros(Ni)
    col[0] = row[0] = op.diagonal
    for k in range(1, Ni):
        w = -W[k - 1] if k - 1 < len(W) else 0.0
        col[k] = w
        row[k] = w
    h = grid.h
    b = float(op.b[0])
    if b != 0.0:
        if op.drift_mode == "central":
            row[1] += b / (2 * h)    # coefficient of u_{i+1}
            col[1] += -b / (2 * h)   # coefficient of u_{i-1}
        elif b > 0:
            col[0] += b / h
            row[0] = col[0]
            col[1] += -b / h
        else:
            col[0] += -b / h
            row[0] = col[0]
            row[1] += b / h
    return col, row


_FFT_CACHE = {}


def _fft_convolve_cached(op, U):
    """'same'-mode convolution with op.offset_weights, kernel FFT cached."""
    import scipy.fft as sfft

    shape = U.shape
    W = op.offset_weights
    key = (id(op), shape)
    full = (shape[0] + W.shape[0] - 1, shape[1] + W.shape[1] - 1)
    fast = (sfft.next_fast_len(full[0]), sfft.next_fast_len(full[1]))
    if key not in _FFT_CACHE:
        _FFT_CACHE[key] = (sfft.rfft2(W, fast), fast)
    Wf, fast = _FFT_CACHE[key]
    conv = sfft.irfft2(sfft.rfft2(U, fast) * Wf, fast)[: full[0], : full[1]]
    off0 = (W.shape[0] - 1) // 2
    off1 = (W.shape[1] - 1) // 2
    return conv[off0 : off0 + shape[0], off1 : off1 + shape[1]]


def apply_operator(op, u, far_field=0.0):
    """(L + b.grad) u at all nodes, given u on all nodes (exterior data
    included); off-grid values are the constant ``far_field`` (0 by default,
    the Dirichlet exterior condition)."""
    grid = op.grid
    if grid.n == 1:
        N = len(grid.nodes)
        W = op.offset_weights
        Kmax = len(W)
        padded = np.full(N + 2 * Kmax, far_field, dtype=float)
        padded[Kmax : Kmax + N] = u
        acc = op.diagonal * np.asarray(u, dtype=float) - far_field * op.tail
        # correlation with the symmetric negative weights
        kernel_vec = np.zeros(2 * Kmax + 1)
        kernel_vec[:Kmax] = -W[::-1]
        kernel_vec[Kmax + 1 :] = -W
        acc += np.convolve(padded, kernel_vec[::-1], mode="valid")
        h = grid.h
        b = float(op.b[0])
        if b != 0.0:
            up = np.full(N + 2, far_field, dtype=float)
            up[1:-1] = u
            if op.drift_mode == "central":
                acc += b * (up[2:] - up[:-2]) / (2 * h)
            elif b > 0:
                acc += b * (up[1:-1] - up[:-2]) / h
            else:
                acc += b * (up[2:] - up[1:-1]) / h
        return acc
    # n = 2: FFT lattice convolution with a cached kernel spectrum
    shape = grid.shape
    U = u.reshape(shape).astype(float)
    conv = _fft_convolve_cached(op, U - far_field) + far_field * op.offset_weights.sum()
    acc = op.diagonal * U - conv - far_field * op.tail
    h = grid.h
    bx, by = float(op.b[0]), float(op.b[1])
    if bx != 0.0 or by != 0.0:
        P = np.pad(U, 1)
        if op.drift_mode == "central":
            acc += bx * (P[2:, 1:-1] - P[:-2, 1:-1]) / (2 * h)
            acc += by * (P[1:-1, 2:] - P[1:-1, :-2]) / (2 * h)
        else:
            if bx > 0:
                acc += bx * (P[1:-1, 1:-1] - P[:-2, 1:-1]) / h
            elif bx < 0:
                acc += bx * (P[2:, 1:-1] - P[1:-1, 1:-1]) / h
            if by > 0:
                acc += by * (P[1:-1, 1:-1] - P[1:-1, :-2]) / h
            elif by < 0:
                acc += by * (P[1:-1, 2:] - P[1:-1, 1:-1]) / h
    return acc.reshape(-1)


def _toeplitz_residual(col, row, sol, rhs):
    """A sol - rhs in extended precision; the double-precision FFT matvec
    noise sits right at the certification tolerance for fine grids."""
    N = len(col)
    sym = np.concatenate([row[::-1], col[1:]]).astype(np.longdouble)
    conv = np.convolve(sym, sol.astype(np.longdouble), mode="full")
    out = conv[N - 1 : 2 * N - 1]
    return (out - rhs.astype(np.longdouble)).astype(float)


def solve_dirichlet(op, f, exterior_data=None, *, rtol=1e-10):
    """Solve (L + b.grad) u = f on interior nodes, u = exterior data outside.

    f: values at interior nodes (flattened interior order) or full-node array.
    Returns u on all nodes.
    """
    grid = op.grid
    interior = grid.interior
    Ni = int(interior.sum())
    f = np.asarray(f, dtype=float)
    if f.shape == interior.shape and f.size == interior.size:
        f_int = f[interior]
    else:
        f_int = f
    u = np.zeros(len(grid.nodes))
    if exterior_data is not None:
        u[~interior] = np.asarray(exterior_data, dtype=float)[~interior]
        # move the exterior contribution to the right-hand side
        rhs = f_int - apply_operator(op, u)[interior]
    else:
        rhs = f_int.copy()

    if grid.n == 1:
        col, row = _system_1d(op)
        try:
            sol = solve_toeplitz((col, row), rhs)
        except np.linalg.LinAlgError as exc:
            raise LinearSolveFailed(str(exc)) from None
        scale = float(np.max(np.abs(rhs))) or 1.0
        rnorm = math.inf
        for _ in range(5):  # refinement against an extended-precision residual
            resid = _toeplitz_residual(col, row, sol, rhs)
            rnorm = float(np.max(np.abs(resid)))
            if rnorm <= rtol * scale:
                break
            sol = sol - solve_toeplitz((col, row), resid)
        if rnorm > rtol * scale:
            raise LinearSolveFailed(
                f"residual {rnorm:.2e} above {rtol:.1e} * {scale:.2e}"
            )
        u[interior] = sol
        return u

    # n = 2: matrix-free Krylov with diagonal preconditioning
    idx = np.flatnonzero(interior)
    full = np.zeros(len(grid.nodes))

    def matvec(v):
        full[:] = 0.0
        full[idx] = v
        return apply_operator(op, full)[interior]

    Aop = LinearOperator((Ni, Ni), matvec=matvec)
    Minv = LinearOperator((Ni, Ni), matvec=lambda v: v / op.diagonal)
    scale = float(np.max(np.abs(rhs))) or 1.0
    sol, info = bicgstab(Aop, rhs, rtol=rtol * 1e-2, atol=rtol * scale * 1e-2, M=Minv, maxiter=4000)
    resid = matvec(sol) - rhs
    if info != 0 or np.max(np.abs(resid)) > rtol * scale:
        sol2, info2 = gmres(Aop, rhs, rtol=rtol * 1e-2, atol=rtol * scale * 1e-2, M=Minv, restart=200, maxiter=40)
        resid2 = matvec(sol2) - rhs
        if np.max(np.abs(resid2)) > rtol * scale:
            raise LinearSolveFailed(
                f"iterative solver stalled (bicgstab info={info}, gmres info={info2})"
            )
        sol = sol2
    u[idx] = sol
    return u


def gradient(u, grid):
    """Centered differences in the interior, one-sided next to the boundary.

    Returns an array of shape (N,) in 1D or (N, 2) in 2D, zero outside.
    """
    h = grid.h
    if grid.n == 1:
        N = len(grid.nodes)
        g = np.zeros(N)
        interior = grid.interior
        for i in np.flatnonzero(interior):
            left = interior[i - 1] if i - 1 >= 0 else False
            right = interior[i + 1] if i + 1 < N else False
            if left and right:
                g[i] = (u[i + 1] - u[i - 1]) / (2 * h)
            elif right:
                g[i] = (u[i + 1] - u[i]) / h
            elif left:
                g[i] = (u[i] - u[i - 1]) / h
            else:
                g[i] = 0.0
        return g
    shape = grid.shape
    U = u.reshape(shape)
    inter = grid.interior.reshape(shape)
    G = np.zeros(shape + (2,))
    P = np.pad(U, 1)
    I = np.pad(inter, 1)
    for axis in (0, 1):
        fwd = np.roll(P, -1, axis=axis)[1:-1, 1:-1]
        bwd = np.roll(P, 1, axis=axis)[1:-1, 1:-1]
        has_f = np.roll(I, -1, axis=axis)[1:-1, 1:-1]
        has_b = np.roll(I, 1, axis=axis)[1:-1, 1:-1]
        central = (fwd - bwd) / (2 * h)
        fwd_only = (fwd - U) / h
        bwd_only = (U - bwd) / h
        g = np.where(has_f & has_b, central, np.where(has_f, fwd_only, np.where(has_b, bwd_only, 0.0)))
        G[..., axis] = np.where(inter, g, 0.0)
    return G.reshape(-1, 2)


def boundary_growth_constant(u, grid, dist, exponent):
    """sup |u| / d^exponent over interior nodes (records barrier constants)."""
    d = dist(grid.nodes)
    mask = grid.interior & (d > 0)
    return float(np.max(np.abs(u[mask]) / d[mask] ** exponent))
