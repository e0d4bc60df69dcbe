"""Supported domains and their generalized (interior-smooth) distance.

The generalized distance is a positive multiple of dist(., complement),
smooth inside the domain, with derivative growth |D^k d| <= C_k d^(beta - k)
near a C^beta boundary.  Interval and disk distances are smoothed closed
forms with analytic directional derivatives; graph domains mollify the raw
signed distance at a scale proportional to the distance itself, iterated so
the scale field is itself smooth, and differentiate by centered differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BadDomain

_SMOOTH_MIN_POWER = 8  # p-norm smooth minimum; comparability factor 2^(1/8)


@dataclass(frozen=True)
class DomainSpec:
    kind: str                      # interval | disk | graph
    a: float = None                # interval endpoints
    b: float = None
    center: tuple = (0.0, 0.0)     # disk
    radius: float = None
    graph: object = None           # callable g(t) for graph domains
    beta: float = math.inf         # boundary regularity exponent
    height: float = 1.0            # graph domain ceiling above the curve
    width: float = 2.0             # graph domain lateral half-width

    def __post_init__(self):
        if self.kind == "interval":
            if self.a is None or self.b is None or not self.a < self.b:
                raise BadDomain(f"interval needs a < b, got ({self.a}, {self.b})")
        elif self.kind == "disk":
            if self.radius is None or self.radius <= 0.0:
                raise BadDomain(f"disk needs positive radius, got {self.radius}")
        elif self.kind == "graph":
            if self.graph is None or not callable(self.graph):
                raise BadDomain("graph domain needs a callable boundary function")
            if not self.beta > 1.0:
                raise BadDomain(f"graph regularity must exceed 1, got {self.beta}")
        else:
            raise BadDomain(f"unknown domain kind {self.kind!r}")

    @property
    def n(self):
        return 1 if self.kind == "interval" else 2

    @classmethod
    def interval(cls, a, b):
        return cls(kind="interval", a=float(a), b=float(b))

    @classmethod
    def disk(cls, center=(0.0, 0.0), radius=1.0):
        return cls(kind="disk", center=tuple(center), radius=float(radius))

    @classmethod
    def graph_domain(cls, g, beta, height=1.0, width=2.0):
        return cls(kind="graph", graph=g, beta=float(beta), height=height, width=width)


def _smooth_min(values, m=_SMOOTH_MIN_POWER):
    """(sum v_i^-m)^(-1/m); within 2^(1/m) of min and exact as ratios grow."""
    inv = sum(np.maximum(v, 1e-300) ** (-m) for v in values)
    return inv ** (-1.0 / m)


class GeneralizedDistance:
    """Evaluates d, its gradient and directional derivatives up to order 4."""

    def __init__(self, domain, mollification_scale_factor=0.5):
        self.domain = domain
        self.scale_factor = mollification_scale_factor
        if domain.kind == "graph":
            self._moll_nodes, self._moll_weights = _bump_quadrature(48)
        # measured comparability constants, filled lazily
        self._comparability = None

    # -- raw building blocks -------------------------------------------------

    def _sides_interval(self, x):
        return x - self.domain.a, self.domain.b - x

    def _graph_raw(self, t, y, iterations=2):
        """x2 - (g mollified at scale ~ distance)(x1), iterated so the scale
        entering the mollifier is itself a smoothed field."""
        g = self.domain.graph
        d = y - np.asarray(g(t), dtype=float)
        for _ in range(iterations):
            scale = self.scale_factor * np.maximum(d, 1e-12)
            gm = self._mollified_graph(t, scale)
            d = y - gm
        return d

    def _mollified_graph(self, t, scale):
        nodes = self._moll_nodes
        w = self._moll_weights
        g = self.domain.graph
        vals = np.zeros_like(np.asarray(t, dtype=float))
        for z, wz in zip(nodes, w):
            vals = vals + wz * np.asarray(g(t - scale * z), dtype=float)
        return vals

    # -- public evaluation ----------------------------------------------------

    def __call__(self, x):
        """d at points; 0 on the (closed) exterior."""
        x = np.asarray(x, dtype=float)
        if self.domain.kind == "interval":
            l, r = self._sides_interval(x)
            inside = (l > 0) & (r > 0)
            return np.where(inside, _smooth_min([np.abs(l), np.abs(r)]), 0.0)
        if self.domain.kind == "disk":
            pts = np.atleast_2d(x)
            rr = np.linalg.norm(pts - np.asarray(self.domain.center), axis=-1)
            r0 = self.domain.radius
            eps = 1e-3 * r0
            d = r0 - (np.sqrt(rr**2 + eps**2) - eps)
            out = np.where(rr < r0, d, 0.0)
            return out[0] if x.ndim == 1 else out
        # graph: region above the curve, below the ceiling, inside the slab
        pts = np.atleast_2d(x)
        t, y = pts[:, 0], pts[:, 1]
        raw = self._graph_raw(t, y)
        top = self.domain.height + np.asarray(self.domain.graph(t), dtype=float) - y
        side = self.domain.width - np.abs(t)
        inside = (raw > 0) & (top > 0) & (side > 0)
        d = _smooth_min([np.maximum(raw, 1e-300), np.maximum(top, 1e-300), np.maximum(side, 1e-300)])
        out = np.where(inside, d, 0.0)
        return out[0] if x.ndim == 1 else out

    def gradient(self, x):
        if self.domain.kind == "interval":
            return self._directional_fd(x, np.array([1.0]), 1)
        x = np.asarray(x, dtype=float)
        pts = np.atleast_2d(x)
        if self.domain.kind == "disk":
            c = np.asarray(self.domain.center)
            rel = pts - c
            rr = np.linalg.norm(rel, axis=-1, keepdims=True)
            eps = 1e-3 * self.domain.radius
            grad = -rel / np.sqrt(rr**2 + eps**2)
            inside = (rr < self.domain.radius)
            out = np.where(inside, grad, 0.0)
            return out[0] if x.ndim == 1 else out
        h = 1e-6
        gx = (self(pts + [h, 0.0]) - self(pts - [h, 0.0])) / (2 * h)
        gy = (self(pts + [0.0, h]) - self(pts - [0.0, h])) / (2 * h)
        out = np.stack([gx, gy], axis=-1)
        return out[0] if x.ndim == 1 else out

    def _directional_fd(self, x, direction, order, step=None):
        """Centered finite differences along a direction (step = d/100)."""
        x = np.asarray(x, dtype=float)
        d0 = float(self(x))
        if d0 <= 0.0:
            return 0.0
        h = step if step is not None else d0 / 100.0
        direction = np.asarray(direction, dtype=float)
        offs = {
            1: ([-1, 1], [-0.5, 0.5]),
            2: ([-1, 0, 1], [1.0, -2.0, 1.0]),
            3: ([-2, -1, 1, 2], [-0.5, 1.0, -1.0, 0.5]),
            4: ([-2, -1, 0, 1, 2], [1.0, -4.0, 6.0, -4.0, 1.0]),
        }[order]
        total = 0.0
        for o, c in zip(*offs):
            total += c * float(self(x + o * h * direction))
        return total / h**order

    def directional(self, x, direction, order):
        """Directional derivative of given order (1..4).

        Analytic for interval and disk (profile differentiation), centered
        finite differences for graph domains.
        """
        if order == 0:
            return float(self(x))
        if self.domain.kind == "interval":
            sgn = float(np.sign(np.atleast_1d(direction)[0])) or 1.0
            return sgn**order * _interval_derivative(self.domain, float(np.atleast_1d(x)[0]), order)
        if self.domain.kind == "disk":
            return _disk_directional(self.domain, np.asarray(x, float), np.asarray(direction, float), order)
        return self._directional_fd(x, direction, order)

    def comparability(self, n_samples=2000):
        """Measured (sup d/dist, sup dist/d) over a dense interior grid."""
        if self._comparability is not None:
            return self._comparability
        rng = np.random.default_rng(1234)
        if self.domain.kind == "interval":
            xs = np.linspace(self.domain.a, self.domain.b, n_samples + 2)[1:-1]
            dist = np.minimum(xs - self.domain.a, self.domain.b - xs)
            dvals = self(xs)
        elif self.domain.kind == "disk":
            r0 = self.domain.radius
            rr = r0 * np.sqrt(rng.uniform(0.0, 1.0, n_samples))
            th = rng.uniform(0.0, 2 * math.pi, n_samples)
            pts = np.asarray(self.domain.center) + np.stack([rr * np.cos(th), rr * np.sin(th)], axis=1)
            dist = r0 - rr
            dvals = self(pts)
        else:
            g = self.domain.graph
            t = rng.uniform(-0.5 * self.domain.width, 0.5 * self.domain.width, n_samples)
            u = rng.uniform(0.0, 1.0, n_samples)
            y = np.asarray(g(t), dtype=float) + u * 0.9 * self.domain.height
            pts = np.stack([t, y], axis=1)
            dvals = self(pts)
            # reference distance by dense boundary sampling (graph + ceiling + sides)
            tb = np.linspace(-self.domain.width, self.domain.width, 4001)
            gb = np.asarray(g(tb), dtype=float)
            dist_graph = np.min(
                np.hypot(t[:, None] - tb[None, :], y[:, None] - gb[None, :]), axis=1
            )
            dist_top = self.domain.height + np.asarray(g(t), dtype=float) - y
            dist_side = self.domain.width - np.abs(t)
            dist = np.minimum(dist_graph, np.minimum(dist_top, dist_side))
        good = (dvals > 0) & (dist > 0)
        hi = float(np.max(dvals[good] / dist[good]))
        lo = float(np.max(dist[good] / dvals[good]))
        self._comparability = (hi, lo)
        return self._comparability


def _bump_quadrature(npts):
    """Nodes/weights integrating against the normalized bump exp(-1/(1-z^2))."""
    z, w = np.polynomial.legendre.leggauss(npts)
    profile = np.exp(-1.0 / (1.0 - z**2))
    w = w * profile
    w /= w.sum()
    return z, w


def _interval_derivative(domain, x, order):
    """Analytic derivative of the smooth-min interval distance."""
    m = _SMOOTH_MIN_POWER
    A = x - domain.a
    B = domain.b - x
    if A <= 0.0 or B <= 0.0:
        return 0.0
    # S = A^-m + B^-m;  S^(k) with A' = 1, B' = -1
    poch = [1.0]
    for i in range(4):
        poch.append(poch[-1] * (m + i))
    S = [A**-m + B**-m]
    for k in range(1, 5):
        S.append(poch[k] * ((-1.0) ** k * A ** (-m - k) + B ** (-m - k)))
    return _power_composition(S, -1.0 / m, order)


def _disk_directional(domain, x, direction, order):
    """Directional derivative of d = r0 - (sqrt(t^2 + eps^2) - eps) along a
    direction, via the 1D profile in the radial/tangential decomposition."""
    c = np.asarray(domain.center)
    rel = x - c
    t = float(np.linalg.norm(rel))
    r0 = domain.radius
    if t >= r0:
        return 0.0
    eps = 1e-3 * r0
    direction = direction / np.linalg.norm(direction)
    if t < 1e-14:
        radial = np.array([1.0, 0.0])
        cosg, sing = 1.0, 0.0
    else:
        radial = rel / t
        cosg = float(radial @ direction)
        sing = math.sqrt(max(0.0, 1.0 - cosg**2))
    # q(t) = sqrt(t^2 + eps^2); d(x + u dir) = r0 + eps - q(|x - c + u dir|)
    # |x - c + u dir|^2 = t^2 + 2 t u cos + u^2 -> compose q with that
    # numerically stable closed form via derivatives of f(u) = q(sqrt(w(u)))
    w = [t**2 + eps**2, 2.0 * t * cosg, 1.0, 0.0, 0.0]  # w(u) = sum w_k u^k (+eps^2)
    f = _sqrt_composition(w, order)
    return -f


def _power_composition(S, alpha, order):
    """order-th derivative of S(x)^alpha given derivatives S[0..order]."""
    S0, *_ = S
    f0 = S0**alpha
    if order == 0:
        return f0
    a = alpha
    d1 = a * S0 ** (a - 1) * S[1]
    if order == 1:
        return d1
    d2 = a * (a - 1) * S0 ** (a - 2) * S[1] ** 2 + a * S0 ** (a - 1) * S[2]
    if order == 2:
        return d2
    d3 = (
        a * (a - 1) * (a - 2) * S0 ** (a - 3) * S[1] ** 3
        + 3 * a * (a - 1) * S0 ** (a - 2) * S[1] * S[2]
        + a * S0 ** (a - 1) * S[3]
    )
    if order == 3:
        return d3
    d4 = (
        a * (a - 1) * (a - 2) * (a - 3) * S0 ** (a - 4) * S[1] ** 4
        + 6 * a * (a - 1) * (a - 2) * S0 ** (a - 3) * S[1] ** 2 * S[2]
        + 3 * a * (a - 1) * S0 ** (a - 2) * S[2] ** 2
        + 4 * a * (a - 1) * S0 ** (a - 2) * S[1] * S[3]
        + a * S0 ** (a - 1) * S[4]
    )
    return d4


def _sqrt_composition(w, order):
    """order-th derivative at u = 0 of sqrt(w0 + w1 u + w2 u^2)."""
    return _power_composition([w[0], w[1], 2.0 * w[2], 0.0, 0.0], 0.5, order)


def generalized_distance(domain, mollification_scale_factor=0.5):
    """Construct the generalized distance for a DomainSpec."""
    return GeneralizedDistance(domain, mollification_scale_factor)


def domain_from_config(cfg):
    kind = cfg.get("kind")
    if kind == "interval":
        return DomainSpec.interval(cfg["a"], cfg["b"])
    if kind == "disk":
        return DomainSpec.disk(cfg.get("center", (0.0, 0.0)), cfg.get("r", cfg.get("radius", 1.0)))
    if kind == "graph":
        g = graph_function_from_config(cfg["g"])
        return DomainSpec.graph_domain(
            g, cfg["beta"], cfg.get("height", 1.0), cfg.get("width", 2.0)
        )
    raise BadDomain(f"unknown domain kind {kind!r}")


def graph_function_from_config(cfg):
    kind = cfg.get("type")
    if kind == "zero":
        return lambda t: np.zeros_like(np.asarray(t, dtype=float))
    if kind == "power_smooth":
        amp = float(cfg.get("amp", 0.1))
        expo = float(cfg.get("exp", 1.8))
        # amp |t|^exp tempered by a smooth window; C^exp at the origin
        return lambda t: amp * np.abs(t) ** expo * np.exp(-np.asarray(t, dtype=float) ** 2)
    if kind == "cosine":
        amp = float(cfg.get("amp", 0.05))
        freq = float(cfg.get("freq", 1.0))
        return lambda t: amp * np.cos(freq * np.asarray(t, dtype=float))
    raise BadDomain(f"unknown graph function type {kind!r}")
