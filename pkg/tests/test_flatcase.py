import math

import numpy as np
import pytest

from fracdrift.errors import BadExponent, LogResonance, NoGeneralizedLimit, ParityViolation
from fracdrift.flatcase import (
    angular_moment,
    compute_cp,
    compute_cp_tilde,
    cp_scan,
    eval_flat_power,
    sign_changes,
)
from fracdrift.kernels import AngularDensity, StableKernel

# Frozen oracle values: finite part of the second-difference integral,
# recomputed independently with mpmath (dps 40, different split points and
# tail radius).  See tests/_oracles.py for the generator.
_CP_ORACLE = {
    (0.7, 0.3): 0.40401624630723491,
    (0.7, 0.9): -0.49853369679379809,
    (0.7, 1.1): -1.4813929031265292,
    (0.7, 1.3): -5.2522112019940608,
    (0.6, 0.3): 0.37022409937552426,
    (0.6, 0.9): -1.1106722981265731,
    (0.8, 1.2): -1.3830318270139554,
    (0.7, 2.0): -2.9761904761904766,
    (0.7, 3.1): -8.1040905876921868,
    (0.7, 1.4): -0.52619191695003337,
    (0.75, 1.2): -1.731695393927713,
    (0.6, 1.1): -4.7504413658194828,
    (0.8, 0.4): 0.461010609004652,
}


@pytest.mark.parametrize("key", sorted(_CP_ORACLE))
def test_cp_against_frozen_oracle(key):
    s, p = key
    assert compute_cp(s, p) == pytest.approx(_CP_ORACLE[key], rel=5e-12)


@pytest.mark.parametrize("s", [0.6, 0.7, 0.8])
def test_cp_vanishes_exactly_at_s(s):
    assert abs(compute_cp(s, s)) <= 1e-8 * abs(compute_cp(s, s + 0.1))


def test_cp_vanishes_at_s_plus_one():
    # the generalized branch keeps the same zero set p - s in N
    s = 0.7
    assert abs(compute_cp(s, s + 1.0)) <= 1e-10 * abs(compute_cp(s, s + 0.9))


def test_cp_2s_is_finite_nonzero():
    # p = 2s: output is degree-0; the finite-part representative is nonzero
    v = compute_cp(0.7, 1.4)
    assert math.isfinite(v) and abs(v) > 0.1


def test_cp_sign_change_only_at_s():
    s = 0.6
    ps = np.arange(0.05, 2 * s - 0.049, 0.05)
    vals = [compute_cp(s, p) for p in ps]
    flips = sign_changes(vals)
    assert len(flips) == 1
    i0, i1 = flips[0]
    assert ps[i0] <= s <= ps[i1]


def test_cp_continuity_in_p():
    # c_p has a pole at p = 2s; on any scan staying clear of it the slope is
    # uniformly bounded
    s = 0.7
    ps = np.arange(0.2, 2 * s - 0.25, 0.05)
    vals = np.array([compute_cp(s, p) for p in ps])
    diffs = np.abs(np.diff(vals))
    assert np.max(diffs) <= 12.0 * 0.05


def test_log_resonance_raises():
    with pytest.raises(LogResonance):
        compute_cp(0.7, 2.4 + 2e-4)
    with pytest.raises(LogResonance):
        compute_cp(0.6, 0.6 + 1.6)  # p - 2s = 1 exactly


def test_bad_exponent():
    with pytest.raises(BadExponent):
        compute_cp(0.7, -0.1)


def test_scan_flags_resonances():
    rows = cp_scan(0.7, 2.3, 2.5, 0.05)
    flagged = [r for r in rows if r[3]]
    assert any(abs(r[0] - 2.4) < 1e-9 for r in flagged)


# -- angular moments ---------------------------------------------------------

def test_moment_two_point_sphere():
    k = StableKernel.fractional_laplacian(0.7, 1)
    assert angular_moment(k) == pytest.approx(2.0, abs=1e-14)


def test_moment_beta_identity():
    from scipy.special import gamma

    s = 0.7
    k = StableKernel.fractional_laplacian(s, 2)
    exact = 2.0 * gamma(s + 0.5) * gamma(0.5) / gamma(s + 1.0)
    assert angular_moment(k) == pytest.approx(exact, abs=1e-8)


def test_moment_linearity():
    s = 0.65
    k1 = StableKernel(s=s, n=2, density=AngularDensity.cosine_series(2, [1.0]))
    k2 = StableKernel(s=s, n=2, density=AngularDensity.cosine_series(2, [1.0, 0.5]))
    ksum = StableKernel(s=s, n=2, density=AngularDensity.cosine_series(2, [2.0, 0.5]))
    assert angular_moment(k1) + angular_moment(k2) == pytest.approx(
        angular_moment(ksum), rel=1e-10
    )


# -- odd-density reduction ---------------------------------------------------

def test_cp_tilde_theta_n_reduction():
    # a(theta) = theta_n reduces to the constant density: c~ = c_p * moment(1)
    s, p = 0.7, 0.9
    odd = AngularDensity(2, sin_terms=((1, 1.0),))
    k_const = StableKernel.fractional_laplacian(s, 2)
    expected = compute_cp(s, p) * angular_moment(k_const)
    assert compute_cp_tilde(odd, s, p) == pytest.approx(expected, rel=1e-10)


def test_cp_tilde_vanishes_at_s():
    odd = AngularDensity(2, sin_terms=((1, 0.8), (3, 0.2)))
    s = 0.65
    assert abs(compute_cp_tilde(odd, s, s)) <= 1e-10 * abs(compute_cp_tilde(odd, s, s + 0.2))


def test_cp_tilde_linearity_in_density():
    odd = AngularDensity(2, sin_terms=((1, 0.5),))
    doubled = AngularDensity(2, sin_terms=((1, 1.0),))
    s, p = 0.7, 1.0
    assert 2.0 * compute_cp_tilde(odd, s, p) == pytest.approx(
        compute_cp_tilde(doubled, s, p), rel=1e-12
    )


def test_cp_tilde_1d_odd_atoms():
    odd = AngularDensity(1, cos_terms=((1, 1.0),))  # a(+1) = 1, a(-1) = -1
    s, p = 0.7, 0.9
    assert compute_cp_tilde(odd, s, p) == pytest.approx(2.0 * compute_cp(s, p), rel=1e-12)


def test_cp_tilde_rejects_even_density():
    with pytest.raises(ParityViolation):
        compute_cp_tilde(AngularDensity.constant(2), 0.7, 0.9)


# -- generalized flat-power evaluation ---------------------------------------

def test_eval_flat_power_zero_at_s():
    s = 0.7
    k = StableKernel.fractional_laplacian(s, 1)
    _, limit = eval_flat_power(k, s, 0, np.array([0.4]))
    _, ref = eval_flat_power(k, s + 0.1, 0, np.array([0.4]))
    assert abs(limit) <= 1e-6 * abs(ref)


@pytest.mark.parametrize("n,p", [(1, 0.9), (1, 2.0), (2, 1.1)])
def test_eval_flat_power_matches_1d_reduction(n, p):
    s = 0.7
    k = StableKernel.fractional_laplacian(s, n)
    x = np.array([0.4]) if n == 1 else np.array([0.25, 0.4])
    record, limit = eval_flat_power(k, p, 0, x)
    expected = compute_cp(s, p) * angular_moment(k) * x[-1] ** (p - 2 * s)
    assert limit == pytest.approx(expected, rel=1e-6)
    assert record.converged


def test_eval_flat_power_growth_order_invariance():
    # enlarging the subtracted polynomial class must not move the fitted
    # singular coefficient
    s = 0.7
    p = s + 1.3  # h = 0.6 -> k = 1 naturally
    k = StableKernel.fractional_laplacian(s, 1)
    from fracdrift._halfspace import HalfPower, generalized_sweep

    x = np.array([0.4])
    col = HalfPower(n=1, p=p)
    res1 = generalized_sweep(k, [col], [x])[0]
    res2 = generalized_sweep(k, [col], [x], growth_bump=1)[0]
    assert res1.coefficients[0] == pytest.approx(res2.coefficients[0], rel=1e-7)
    assert res1.limits[0] == pytest.approx(res2.limits[0], rel=1e-7)


def test_eval_flat_power_resonant_p_rejected():
    s = 0.7
    k = StableKernel.fractional_laplacian(s, 1)
    with pytest.raises(LogResonance):
        eval_flat_power(k, 2 * s + 1.0, 0, np.array([0.4]))


def test_eval_flat_power_tangential_in_1d_rejected():
    k = StableKernel.fractional_laplacian(0.7, 1)
    with pytest.raises(BadExponent):
        eval_flat_power(k, 0.9, 1, np.array([0.4]))


def test_record_contents():
    s = 0.7
    k = StableKernel.fractional_laplacian(s, 1)
    record, limit = eval_flat_power(k, 0.9, 0, np.array([0.5]))
    assert record.growth_order == 0
    assert len(record.cutoff_radii) == len(record.limit_values)
    # f_R values converge toward the limit
    errs = np.abs(np.asarray(record.limit_values) - limit)
    assert errs[-1] <= errs[0]
