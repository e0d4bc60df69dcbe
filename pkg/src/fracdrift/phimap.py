"""The polynomial correction map: matrix of P -> q with L(P (x.e)_+^p) = q (x.e)^(p-2s).

Monomials are ordered by total degree, then by increasing exponent of the
normal coordinate; in that ordering the map is lower triangular with diagonal
entries c_(p+j) x angular moment, vanishing exactly when the folded exponent
hits p + j - s in N.  Columns are built by least-squares fitting the cutoff
sweep of each basis monomial (normal powers folded analytically into the
exponent) over a sample cloud in the half-space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._halfspace import HalfPower, generalized_sweep
from .errors import BadExponent, BadFrame, FitDiverged, ResonantDiagonal
from .flatcase import check_log_resonance
from .kernels import StableKernel


def monomial_basis(n, degree):
    """Exponent tuples ordered by total degree then normal-exponent ascending."""
    if n == 1:
        return [(j,) for j in range(degree + 1)]
    return [(d - j, j) for d in range(degree + 1) for j in range(d + 1)]


@dataclass
class PhiMatrix:
    s: float
    p: float
    degree: int
    n: int
    basis: list
    entries: np.ndarray
    diag_min: float
    resonance_flags: list
    direction: np.ndarray
    fit_spreads: np.ndarray = None
    diag_threshold_used: float = None

    @property
    def size(self):
        return len(self.basis)

    def triangularity_defect(self):
        """Largest |strict upper entry| relative to the sup norm."""
        upper = np.triu(self.entries, k=1)
        norm = np.max(np.abs(self.entries).sum(axis=1))
        return float(np.max(np.abs(upper))), float(norm)

    def degree_block_defect(self):
        """Largest |entry| coupling a monomial to a strictly higher degree."""
        degs = np.array([sum(b) for b in self.basis])
        mask = degs[:, None] > degs[None, :]  # row degree > column degree
        worst = np.max(np.abs(self.entries[mask])) if mask.any() else 0.0
        return float(worst)

    def apply(self, coeffs):
        return self.entries @ np.asarray(coeffs, dtype=float)


@dataclass
class PsiMatrix:
    phi: PhiMatrix
    entries: np.ndarray
    inverse_defect: float

    def apply(self, coeffs):
        return self.entries @ np.asarray(coeffs, dtype=float)


def _fold(exponents, p):
    """Monomial x^(a, b) against (x.e)_+^p -> tangential degree a, power p + b."""
    if len(exponents) == 1:
        return 0, p + exponents[0]
    return exponents[0], p + exponents[1]


def build_phi(kernel, p, degree, *, e=None, radii=None, quality="standard", spread_tol=1e-5):
    """Assemble the correction-map matrix over monomials of degree <= degree.

    Each basis monomial is folded and swept through the generalized cutoff
    evaluation; the fitted singular coefficients are the column of the matrix.
    """
    n = kernel.n
    s = kernel.s
    if p <= 0.0:
        raise BadExponent(f"p must be positive, got {p}")
    basis = monomial_basis(n, degree)
    for mono in basis:
        check_log_resonance(s, _fold(mono, p)[1])

    e_vec = np.asarray(e, dtype=float) if e is not None else None
    columns = []
    for mono in basis:
        g, pf = _fold(mono, p)
        # fit against the full homogeneous output basis at the common factored
        # power p, so the triangular structure is measured rather than imposed
        columns.append(
            HalfPower(
                n=n,
                p=pf,
                tangential_degree=g,
                e=None if e_vec is None else tuple(e_vec),
                psi_degree=sum(mono),
                psi_power=p,
            )
        )

    kwargs = {}
    if radii is not None:
        kwargs["radii"] = radii
    sweeps = generalized_sweep(kernel, columns, [], quality=quality, spread_tol=spread_tol, **kwargs)

    size = len(basis)
    index = {mono: i for i, mono in enumerate(basis)}
    entries = np.zeros((size, size))
    spreads = np.zeros(size)
    for ci, (mono, sweep) in enumerate(zip(basis, sweeps)):
        spreads[ci] = sweep.spread
        if not sweep.converged:
            raise FitDiverged(
                f"column {mono}: coefficient sweep spread {sweep.spread:.2e} "
                f"above tolerance {spread_tol:.1e}"
            )
        # fitted psi_j = x_1^j x_n^(m-j) (x.e)^(p-2s) with m = deg(mono)
        m = sum(mono)
        for j, c in enumerate(sweep.coefficients):
            row = (m,) if n == 1 else (j, m - j)
            entries[index[row], ci] = c

    diag = np.abs(np.diag(entries))
    norm = float(np.max(np.abs(entries))) or 1.0
    flags = [i for i in range(size) if diag[i] < 1e-4 * norm]
    return PhiMatrix(
        s=s,
        p=p,
        degree=degree,
        n=n,
        basis=basis,
        entries=entries,
        diag_min=float(diag.min()),
        resonance_flags=flags,
        direction=e_vec if e_vec is not None else np.eye(n)[-1],
        fit_spreads=spreads,
    )


def invert_phi(phi, diag_threshold=1e-4):
    """Inverse map Psi with triangular structure inherited from Phi."""
    norm = float(np.max(np.abs(phi.entries))) or 1.0
    diag = np.diag(phi.entries)
    bad = np.argmin(np.abs(diag))
    if abs(diag[bad]) < diag_threshold * norm:
        j = phi.basis[bad][-1] if phi.n == 2 else phi.basis[bad][0]
        raise ResonantDiagonal(
            index=int(bad),
            basis_exponent=phi.basis[bad],
            p=phi.p + j,
            s=phi.s,
            value=float(diag[bad]),
            threshold=diag_threshold * norm,
        )
    size = phi.entries.shape[0]
    inv = np.linalg.solve(phi.entries, np.eye(size))
    defect = float(np.max(np.abs(inv @ phi.entries - np.eye(size))))
    psi = PsiMatrix(phi=phi, entries=inv, inverse_defect=defect)
    phi.diag_threshold_used = diag_threshold
    return psi


# ---------------------------------------------------------------------------
# polynomial composition with orthogonal maps
# ---------------------------------------------------------------------------

def compose_matrix(Q, basis):
    """Matrix of P -> P o Q on the monomial basis (2D)."""
    Q = np.asarray(Q, dtype=float)
    size = len(basis)
    index = {mono: i for i, mono in enumerate(basis)}
    M = np.zeros((size, size))
    from scipy.special import binom as _binom

    for ci, (i, j) in enumerate(basis):
        # (Q11 x + Q12 y)^i (Q21 x + Q22 y)^j expanded over monomials
        acc = {}
        for a in range(i + 1):
            ca = _binom(i, a) * Q[0, 0] ** a * Q[0, 1] ** (i - a)
            for b in range(j + 1):
                cb = _binom(j, b) * Q[1, 0] ** b * Q[1, 1] ** (j - b)
                mono = (a + b, (i - a) + (j - b))
                acc[mono] = acc.get(mono, 0.0) + ca * cb
        for mono, c in acc.items():
            M[index[mono], ci] = c
    return M


def frame_for(e):
    """A rotation mapping e_n to the unit vector e (2D)."""
    e = np.asarray(e, dtype=float)
    e = e / np.linalg.norm(e)
    return np.array([[e[1], e[0]], [-e[0], e[1]]])


def rotate_phi(kernel, p, degree, e, Q=None, *, quality="standard", radii=None):
    """Correction map for the half-space {x.e > 0}: conjugate the flat-frame
    matrix of the rotated kernel by the composition matrices of Q and Q^T."""
    if kernel.n != 2:
        raise BadFrame("frame rotation is a 2D operation")
    e = np.asarray(e, dtype=float)
    if abs(np.linalg.norm(e) - 1.0) > 1e-12:
        raise BadFrame("direction e must be a unit vector")
    if Q is None:
        Q = frame_for(e)
    Q = np.asarray(Q, dtype=float)
    if np.max(np.abs(Q.T @ Q - np.eye(2))) > 1e-12:
        raise BadFrame("Q must be orthogonal to 1e-12")
    if np.max(np.abs(Q @ np.array([0.0, 1.0]) - e)) > 1e-12:
        raise BadFrame("Q must map e_n to e")

    rotated_kernel = kernel.rotated(Q)
    phi_flat = build_phi(rotated_kernel, p, degree, quality=quality, radii=radii)
    basis = phi_flat.basis
    CQ = compose_matrix(Q, basis)
    CQT = compose_matrix(Q.T, basis)
    entries = CQT @ phi_flat.entries @ CQ

    diag = np.abs(np.diag(entries))
    norm = float(np.max(np.abs(entries))) or 1.0
    flags = [i for i in range(len(basis)) if diag[i] < 1e-4 * norm]
    return PhiMatrix(
        s=kernel.s,
        p=p,
        degree=degree,
        n=2,
        basis=basis,
        entries=entries,
        diag_min=float(diag.min()),
        resonance_flags=flags,
        direction=e,
        fit_spreads=phi_flat.fit_spreads,
    )


def phi_to_dict(phi):
    return {
        "s": phi.s,
        "p": phi.p,
        "degree": phi.degree,
        "n": phi.n,
        "basis": [list(b) for b in phi.basis],
        "entries": [[float(v) for v in row] for row in phi.entries],
        "diag_min": phi.diag_min,
        "resonance_flags": list(phi.resonance_flags),
        "direction": [float(v) for v in np.atleast_1d(phi.direction)],
    }
