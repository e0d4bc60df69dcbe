"""Admissible homogeneous Lévy kernels a(theta) / |y|^(n+2s).

Angular densities are finite trigonometric series on the unit sphere.  In 2D
the sphere is parametrized by the angle phi with theta = (cos phi, sin phi);
in 1D it degenerates to the two atoms theta = +/-1 (phi in {0, pi}).  A
density is even on the sphere iff all its harmonics have even index, odd iff
all indices are odd, which covers both dimensions uniformly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .errors import BadExponent, ParityViolation, SingularPoint

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class AngularDensity:
    """Trigonometric series  a(phi) = sum c_k cos(k phi) + sum d_k sin(k phi).

    ``cos_terms`` and ``sin_terms`` map harmonic index k -> coefficient.
    """

    n: int
    cos_terms: tuple = ()
    sin_terms: tuple = ()

    def __post_init__(self):
        if self.n not in (1, 2):
            raise BadExponent(f"dimension must be 1 or 2, got {self.n}")
        object.__setattr__(self, "cos_terms", tuple(sorted(dict(self.cos_terms).items())))
        object.__setattr__(self, "sin_terms", tuple(sorted(dict(self.sin_terms).items())))

    @classmethod
    def constant(cls, n, value=1.0):
        return cls(n=n, cos_terms=((0, float(value)),))

    @classmethod
    def cosine_series(cls, n, coeffs):
        """coeffs[i] multiplies cos(2*i*phi); the even canonical family."""
        return cls(n=n, cos_terms=tuple((2 * i, float(c)) for i, c in enumerate(coeffs)))

    def eval_angle(self, phi):
        phi = np.asarray(phi, dtype=float)
        out = np.zeros_like(phi)
        for k, c in self.cos_terms:
            out = out + c * np.cos(k * phi)
        for k, c in self.sin_terms:
            out = out + c * np.sin(k * phi)
        return out

    def __call__(self, theta):
        """Evaluate at unit vectors theta, shape (..., n)."""
        theta = np.asarray(theta, dtype=float)
        if self.n == 1:
            phi = np.where(theta[..., 0] >= 0.0, 0.0, math.pi)
        else:
            phi = np.arctan2(theta[..., 1], theta[..., 0])
        return self.eval_angle(phi)

    def is_even(self, tol=1e-12):
        return all(k % 2 == 0 or abs(c) <= tol for k, c in self.cos_terms) and all(
            k % 2 == 0 or abs(c) <= tol for k, c in self.sin_terms
        )

    def is_odd(self, tol=1e-12):
        return all(k % 2 == 1 or abs(c) <= tol for k, c in self.cos_terms) and all(
            k % 2 == 1 or abs(c) <= tol for k, c in self.sin_terms
        )

    def scaled(self, factor):
        return AngularDensity(
            n=self.n,
            cos_terms=tuple((k, factor * c) for k, c in self.cos_terms),
            sin_terms=tuple((k, factor * c) for k, c in self.sin_terms),
        )

    def rotated(self, Q):
        """Density of the kernel pre-composed with the orthogonal map Q.

        (a o Q)(theta(phi)): for a rotation by psi this is a(phi + psi); for a
        reflection, a(psi - phi).  Harmonic parity is preserved either way.
        """
        if self.n == 1:
            # Orthogonal maps in 1D: +/- identity; evenness makes both trivial.
            return self
        Q = np.asarray(Q, dtype=float)
        det = np.linalg.det(Q)
        psi = math.atan2(Q[1, 0], Q[0, 0])
        cos_terms = {}
        sin_terms = {}

        def add(d, k, c):
            if abs(c) > 0.0:
                d[k] = d.get(k, 0.0) + c

        if det > 0:
            # cos(k(phi+psi)) = cos kphi cos kpsi - sin kphi sin kpsi
            for k, c in self.cos_terms:
                add(cos_terms, k, c * math.cos(k * psi))
                add(sin_terms, k, -c * math.sin(k * psi))
            for k, c in self.sin_terms:
                add(sin_terms, k, c * math.cos(k * psi))
                add(cos_terms, k, c * math.sin(k * psi))
        else:
            # Q theta(phi) = theta(psi' - phi) with psi' = atan2(Q10, Q00)... for
            # a reflection the image angle is psi - phi with psi = atan2(Q01->)
            # derived from Q = [[cos, sin], [sin, -cos]] acting phi -> psi - phi.
            for k, c in self.cos_terms:
                add(cos_terms, k, c * math.cos(k * psi))
                add(sin_terms, k, c * math.sin(k * psi))
            for k, c in self.sin_terms:
                add(sin_terms, k, -c * math.cos(k * psi))
                add(cos_terms, k, c * math.sin(k * psi))
        return AngularDensity(
            n=self.n,
            cos_terms=tuple(sorted(cos_terms.items())),
            sin_terms=tuple(sorted(sin_terms.items())),
        )

    def range_bounds(self, samples=4096):
        """(min, max) of the density over a dense angular sample."""
        if self.n == 1:
            vals = self.eval_angle(np.array([0.0, math.pi]))
        else:
            vals = self.eval_angle(np.linspace(0.0, _TWO_PI, samples, endpoint=False))
        return float(np.min(vals)), float(np.max(vals))


@dataclass(frozen=True)
class StableKernel:
    """Homogeneous kernel K(y) = a(<y>) / |y|^(n+2s) with even bounded density.

    Immutable after construction; safe to share between workers.
    """

    s: float
    n: int
    density: AngularDensity
    lam: float = field(default=None)
    Lam: float = field(default=None)
    normalized: bool = False

    def __post_init__(self):
        if not 0.0 < self.s < 1.0:
            raise BadExponent(f"s must lie in (0,1), got {self.s}")
        if self.n not in (1, 2):
            raise BadExponent(f"dimension must be 1 or 2, got {self.n}")
        if not self.density.is_even():
            raise ParityViolation("kernel density must be even on the sphere")
        density = self.density
        if self.normalized:
            density = density.scaled(fourier_normalization(self.n, self.s))
            object.__setattr__(self, "density", density)
        amin, amax = density.range_bounds()
        if amin <= 0.0:
            raise ParityViolation(
                f"density must be strictly positive (min {amin:.3e}); "
                "ellipticity fails otherwise"
            )
        lam = self.lam if self.lam is not None else amin
        Lam = self.Lam if self.Lam is not None else amax
        if not 0.0 < lam <= Lam:
            raise BadExponent(f"need 0 < lambda <= Lambda, got ({lam}, {Lam})")
        if amin < lam - 1e-12 or amax > Lam + 1e-12:
            raise BadExponent(
                f"density range [{amin:.6g}, {amax:.6g}] escapes the declared "
                f"ellipticity bounds [{lam:.6g}, {Lam:.6g}]"
            )
        object.__setattr__(self, "lam", float(lam))
        object.__setattr__(self, "Lam", float(Lam))

    @classmethod
    def fractional_laplacian(cls, s, n, normalized=False):
        """Constant density a == 1 (raw kernel 1/|y|^(n+2s))."""
        return cls(s=s, n=n, density=AngularDensity.constant(n), normalized=normalized)

    def with_density(self, density):
        return StableKernel(s=self.s, n=self.n, density=density)

    def rotated(self, Q):
        """Kernel of L^Q, i.e. K pre-composed with the orthogonal map Q."""
        return StableKernel(s=self.s, n=self.n, density=self.density.rotated(Q))

    def to_config(self):
        coeffs_even = []
        terms = dict(self.density.cos_terms)
        if self.density.sin_terms or any(k % 2 for k in terms):
            angular = {
                "type": "series",
                "cos": [[int(k), float(c)] for k, c in self.density.cos_terms],
                "sin": [[int(k), float(c)] for k, c in self.density.sin_terms],
            }
        else:
            kmax = max(terms, default=0)
            coeffs_even = [terms.get(2 * i, 0.0) for i in range(kmax // 2 + 1)]
            if coeffs_even == [1.0]:
                angular = {"type": "constant"}
            else:
                angular = {"type": "cosine", "coeffs": coeffs_even}
        return {"s": self.s, "n": self.n, "angular": angular, "normalized": False}


def kernel_from_config(cfg):
    """Build a StableKernel from its JSON description."""
    angular = cfg.get("angular", {"type": "constant"})
    n = int(cfg["n"])
    kind = angular.get("type", "constant")
    if kind == "constant":
        density = AngularDensity.constant(n, angular.get("value", 1.0))
    elif kind == "cosine":
        density = AngularDensity.cosine_series(n, angular["coeffs"])
    elif kind == "series":
        density = AngularDensity(
            n=n,
            cos_terms=tuple((int(k), float(c)) for k, c in angular.get("cos", [])),
            sin_terms=tuple((int(k), float(c)) for k, c in angular.get("sin", [])),
        )
    else:
        raise BadExponent(f"unknown angular density type {kind!r}")
    return StableKernel(
        s=float(cfg["s"]),
        n=n,
        density=density,
        lam=cfg.get("lambda"),
        Lam=cfg.get("Lambda"),
        normalized=bool(cfg.get("normalized", False)),
    )


def eval_kernel(kernel, y):
    """Pointwise kernel value a(y/|y|) |y|^(-n-2s); vectorized over rows of y."""
    y = np.asarray(y, dtype=float)
    single = y.ndim == 1 if kernel.n == 2 else y.ndim == 0
    pts = np.atleast_2d(y) if kernel.n == 2 else np.atleast_1d(y)[:, None]
    r = np.linalg.norm(pts, axis=-1)
    if np.any(r == 0.0):
        raise SingularPoint("kernel is singular at y = 0")
    vals = kernel.density(pts) * r ** (-kernel.n - 2.0 * kernel.s)
    return float(vals[0]) if single else vals


def _gauss_symbol_action(n, s):
    """(-Delta)^s applied to exp(-|x|^2) at 0, via the Fourier symbol.

    Fourier side: g_hat(xi) = pi^(n/2) exp(-|xi|^2/4), and the symbol action at
    the origin is (2 pi)^(-n) * integral |xi|^(2s) g_hat(xi) d xi.
    """
    sphere = 2.0 if n == 1 else _TWO_PI

    def integrand(rho):
        return rho ** (2 * s + n - 1) * math.exp(-rho * rho / 4.0)

    radial, _ = quad(integrand, 0.0, 60.0, epsabs=1e-14, epsrel=1e-13, limit=200)
    return (2.0 * math.pi) ** (-n) * math.pi ** (n / 2.0) * sphere * radial


def _gauss_raw_action(n, s):
    """Raw operator (density == 1) applied to exp(-|x|^2) at 0 by quadrature."""
    sphere = 2.0 if n == 1 else _TWO_PI

    def integrand(rho):
        # (1 - e^{-rho^2}) rho^{-1-2s} after polar folding; integrable at 0.
        return -math.expm1(-rho * rho) * rho ** (-1.0 - 2.0 * s)

    inner, _ = quad(integrand, 0.0, 1.0, epsabs=1e-14, epsrel=1e-13, limit=200)
    outer, _ = quad(integrand, 1.0, 80.0, epsabs=1e-14, epsrel=1e-13, limit=200)
    # beyond 80 the e^{-rho^2} part is zero to machine precision
    tail = 80.0 ** (-2.0 * s) / (2.0 * s)
    return sphere * (inner + outer + tail)


_NORMALIZATION_CACHE = {}


def fourier_normalization(n, s):
    """Constant c_{n,s} making the kernel c/|y|^(n+2s) have symbol |xi|^(2s).

    Computed by matching the quadrature operator against the exact symbol
    action on the Gaussian test function, not hard-coded.
    """
    if n not in (1, 2):
        raise BadExponent(f"dimension must be 1 or 2, got {n}")
    if not 0.0 < s < 1.0:
        raise BadExponent(f"s must lie in (0,1), got {s}")
    key = (n, round(float(s), 14))
    if key not in _NORMALIZATION_CACHE:
        _NORMALIZATION_CACHE[key] = _gauss_symbol_action(n, s) / _gauss_raw_action(n, s)
    return _NORMALIZATION_CACHE[key]
