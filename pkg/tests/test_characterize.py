import math
import warnings

import numpy as np
import pytest

from semiflow.characterize import (
    NearRationalWarning,
    bruck_map,
    certify_common_fixed,
    default_profile_grid,
    residual_pair,
    residual_profile,
)
from semiflow.semigroups import (
    analytic_fixed_set,
    decay,
    evaluate,
    fixed_set_distance,
    heat,
    rotation,
)

SQRT2 = math.sqrt(2.0)


def builtin_specs():
    return [
        rotation(center=(0.0, 0.0), period=1.0),
        decay(dim=2),
        heat(np.diag([0.0, 1.0])),
    ]


def sample_inside(spec, rng, n):
    dom = spec.domain
    if hasattr(dom, "radius"):
        g = rng.normal(size=(n, dom.dim))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        r = dom.radius * rng.uniform(size=(n, 1)) ** (1.0 / dom.dim)
        return dom.center + r * g
    return rng.uniform(dom.lower, dom.upper, size=(n, dom.dim))


def fixed_members(spec, rng, n):
    """Concrete points of the analytic common fixed set."""
    fs = analytic_fixed_set(spec)
    if fs.kind == "singleton":
        return np.tile(fs.point, (n, 1))
    coeffs = rng.uniform(-1.0, 1.0, size=(n, fs.basis.shape[1]))
    return fs.basepoint + coeffs @ fs.basis.T


# ---- pair residual -----------------------------------------------------------------

def test_pair_residual_zero_at_center():
    spec = rotation(period=1.0)
    assert residual_pair(spec, np.zeros(2), 1.0, SQRT2) == 0.0


def test_pair_residual_blind_to_rational_pairs():
    spec = rotation(period=1.0)
    with pytest.warns(NearRationalWarning):
        r = residual_pair(spec, np.array([1.0, 0.0]), 1.0, 2.0)
    assert r <= 1e-12


def test_pair_residual_chord_value():
    # T(sqrt2) moves (1,0) by the chord 2|sin(pi*sqrt2)| on the unit circle;
    # T(1) is the identity, so the pair residual is that chord
    spec = rotation(period=1.0)
    r = residual_pair(spec, np.array([1.0, 0.0]), 1.0, SQRT2)
    assert r == pytest.approx(2.0 * abs(math.sin(math.pi * SQRT2)), rel=1e-12)


# ---- near-rational probe -----------------------------------------------------------

def test_rational_pair_warns():
    spec = rotation(period=1.0)
    with pytest.warns(NearRationalWarning):
        residual_pair(spec, np.zeros(2), 1.0, 2.0)


def test_near_rational_pair_warns():
    spec = rotation(period=1.0)
    with pytest.warns(NearRationalWarning):
        residual_pair(spec, np.zeros(2), 1.0, 2.0 + 1e-9)


def test_irrational_pair_is_silent():
    spec = rotation(period=1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error", NearRationalWarning)
        residual_pair(spec, np.zeros(2), 1.0, SQRT2)
        golden = (1.0 + math.sqrt(5.0)) / 2.0
        residual_pair(spec, np.zeros(2), 1.0, golden)


# ---- residual profile --------------------------------------------------------------

def test_default_grid_contains_pair_times():
    grid = default_profile_grid(1.0, SQRT2)
    for t in (1.0, SQRT2, 1.0 + SQRT2, SQRT2 - 1.0):
        assert np.min(np.abs(grid - t)) == 0.0
    assert grid[0] == 0.0
    assert grid.max() <= 5.0 + 1e-12
    assert np.all(np.diff(grid) > 0)


def test_profile_zero_at_time_zero_and_on_fixed_points():
    rng = np.random.default_rng(21)
    for spec in builtin_specs():
        for z in fixed_members(spec, rng, 5):
            prof = residual_profile(spec, z, np.arange(0.0, 5.01, 0.5), 1.0, SQRT2)
            assert prof.residuals[0] <= 1e-12
            assert prof.max_residual <= 1e-10


def test_profile_rational_counterexample():
    spec = rotation(period=1.0)
    with pytest.warns(NearRationalWarning):
        prof = residual_profile(spec, np.array([1.0, 0.0]), [0.5], 1.0, 2.0)
    assert prof.pair_residual <= 1e-12
    assert prof.residuals[0] == pytest.approx(2.0, rel=1e-12)
    assert prof.argmax_t == 0.5


def test_profile_validates_grid():
    spec = decay(dim=1)
    with pytest.raises(ValueError):
        residual_profile(spec, np.array([1.0]), [], 1.0, SQRT2)
    with pytest.raises(ValueError):
        residual_profile(spec, np.array([1.0]), [-0.5], 1.0, SQRT2)
    with pytest.raises(ValueError):
        residual_profile(spec, np.array([1.0]), [math.inf], 1.0, SQRT2)


# ---- two-generator equivalence (the main characterization, sampled) ----------------

def test_equivalence_of_pair_and_profile_residuals():
    # With an irrational pair, a tiny pair residual must force a tiny
    # residual at EVERY time, and conversely.  Exercised from both sides:
    # exact fixed points (both small) and generic points (both large).
    rng = np.random.default_rng(42)
    grid = default_profile_grid(1.0, SQRT2)
    for spec in builtin_specs():
        points = list(sample_inside(spec, rng, 400)) + list(fixed_members(spec, rng, 100))
        for x in points:
            prof = residual_profile(spec, x, grid, 1.0, SQRT2)
            assert (prof.pair_residual <= 1e-9) == (prof.max_residual <= 1e-6)


def test_equivalence_fails_for_rational_pair():
    # sharpness: pair (1,2) on the unit-period rotation fixes everything,
    # while T(0.5) moves every off-center point by twice its distance
    spec = rotation(period=1.0)
    rng = np.random.default_rng(43)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NearRationalWarning)
        for _ in range(20):
            x = rng.uniform(-5.0, 5.0, size=2)
            if np.linalg.norm(x) < 1e-3:
                continue
            prof = residual_profile(spec, x, [0.5], 1.0, 2.0)
            assert prof.pair_residual <= 1e-12
            assert prof.residuals[0] == pytest.approx(2.0 * np.linalg.norm(x), rel=1e-9)


# ---- Bruck averaged operator -------------------------------------------------------

def test_bruck_rejects_degenerate_weights():
    spec = rotation(period=1.0)
    for lam in (0.0, 1.0, -0.1, 1.1):
        with pytest.raises(ValueError):
            bruck_map(spec, 1.0, SQRT2, lam)


def test_bruck_fixes_center():
    spec = rotation(period=1.0)
    u = bruck_map(spec, 1.0, SQRT2, 0.5)
    assert np.linalg.norm(u(np.zeros(2)) - np.zeros(2)) == 0.0


def test_bruck_heat_contraction_factor():
    # on diag(0,1) the map acts on the second coordinate as multiplication
    # by lam*e^{-1} + (1-lam)*e^{-sqrt2}
    spec = heat(np.diag([0.0, 1.0]))
    u = bruck_map(spec, 1.0, SQRT2, 0.3)
    x = np.array([0.7, 1.0])
    out = u(x)
    factor = 0.3 * math.exp(-1.0) + 0.7 * math.exp(-SQRT2)
    assert out[0] == pytest.approx(0.7, abs=1e-15)
    assert out[1] == pytest.approx(factor, rel=1e-12)
    assert factor == pytest.approx(0.280546, abs=1e-6)


def test_bruck_nonexpansive():
    rng = np.random.default_rng(31)
    for spec in builtin_specs():
        for lam in (0.1, 0.5, 0.9):
            u = bruck_map(spec, 1.0, SQRT2, lam)
            pts = sample_inside(spec, rng, 80).reshape(40, 2, -1)
            for x, y in pts:
                assert np.linalg.norm(u(x) - u(y)) <= np.linalg.norm(x - y) + 1e-12


def test_bruck_fixed_set_agreement():
    rng = np.random.default_rng(32)
    for spec in builtin_specs():
        fs = analytic_fixed_set(spec)
        for lam in (0.1, 0.5, 0.9):
            u = bruck_map(spec, 1.0, SQRT2, lam)
            for z in fixed_members(spec, rng, 10):
                assert np.linalg.norm(u(z) - z) <= 1e-10
            kept = 0
            while kept < 100:
                x = sample_inside(spec, rng, 1)[0]
                if fixed_set_distance(fs, x) <= 1e-2:
                    continue
                kept += 1
                assert np.linalg.norm(u(x) - x) > 1e-4


# ---- certification -----------------------------------------------------------------

def test_certify_kernel_point():
    spec = heat(np.diag([0.0, 1.0]))
    cert = certify_common_fixed(spec, np.array([2.0, 0.0]), 1.0, SQRT2, tol=1e-8)
    assert cert.verdict == "certified"
    assert cert.pair_residual <= 1e-10
    assert cert.max_profile_residual <= 1e-10
    assert cert.profile_tol == pytest.approx(1e-5)


def test_certify_flags_rational_counterexample():
    spec = rotation(period=1.0)
    with pytest.warns(NearRationalWarning):
        cert = certify_common_fixed(spec, np.array([1.0, 0.0]), 1.0, 2.0, tol=1e-8)
    assert cert.verdict == "not_certified"
    assert cert.pair_residual <= 1e-12
    assert cert.max_profile_residual == pytest.approx(2.0, rel=1e-9)
    assert cert.argmax_t == 0.5


def test_certify_near_origin_decay_point():
    spec = decay(dim=2)
    cert = certify_common_fixed(spec, np.array([1e-9, 0.0]), 1.0, SQRT2, tol=1e-8)
    assert cert.verdict == "certified"


def test_certify_reports_numbers_even_when_failing():
    spec = rotation(period=1.0)
    cert = certify_common_fixed(spec, np.array([1.0, 0.0]), 1.0, SQRT2, tol=1e-8)
    assert cert.verdict == "not_certified"
    assert cert.pair_residual > 1.0
    d = cert.to_dict()
    assert set(d) == {"pair_residual", "max_profile_residual", "argmax_t", "verdict", "tol", "profile_tol"}


def test_certify_rejects_bad_tol():
    spec = decay(dim=1)
    with pytest.raises(ValueError):
        certify_common_fixed(spec, np.array([0.0]), 1.0, SQRT2, tol=0.0)


def test_evaluate_matches_bruck_on_fixed_points_of_both():
    # the averaged map agrees with each operator exactly on common fixed
    # points, a direct restatement of the convex-combination identity
    spec = decay(dim=2)
    u = bruck_map(spec, 1.0, SQRT2, 0.25)
    z = np.zeros(2)
    assert np.array_equal(u(z), evaluate(spec, 1.0, z))
