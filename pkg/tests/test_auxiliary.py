"""Auxiliary comparison systems, attractors and the constant fixed point."""

import math

import numpy as np
import pytest

import ecoepi as ee

BASE_VALUES = {
    "recruitment": 0.3,
    "mortality": 0.1,
    "predation": 0.4,
    "transmission": 0.17,
    "infected_predation": 0.3,
    "infected_removal": 0.18,
    "predator_growth": 0.3,
    "predator_competition": 0.2,
    "conversion": 0.1,
    "infected_conversion": 0.9,
}


def seasonal(base, amplitude=0.7):
    return ee.CoefficientSpec.cosine(base, amplitude, math.pi / 5)


def coeffs(h=1.0, **overrides):
    fields = {}
    for name in ee.COEFF_NAMES:
        v = overrides.get(name, BASE_VALUES[name])
        fields[name] = (v if isinstance(v, ee.CoefficientSpec)
                        else ee.CoefficientSpec.constant(v))
    return ee.discretize_continuous(ee.ContinuousModelSpec(**fields), h)


LINEAR_F = ee.make_response("linear_prey")
LINEAR_G = ee.make_response("linear_predator")


def test_prey_recurrence_converges_geometrically():
    sys = ee.prey_system(coeffs())
    assert sys.period == 1 and sys.dim == 1
    s = 10.0
    for n in range(60):
        # the error around the balance point 3 contracts by 1.1 per step
        assert math.isclose(s, 3.0 + 7.0 * (1.0 / 1.1) ** n, rel_tol=1e-9)
        s = sys.step(s, n)


def test_prey_attractor_constant_coefficients():
    ref = ee.find_attractor(ee.prey_system(coeffs()), 10.0)
    assert ref.detected_period == 1
    assert ref.convergence_residual <= ref.tol
    np.testing.assert_allclose(ref.values, 3.0, rtol=0, atol=1e-12)
    # period-one references extend to arbitrary indices
    assert ref.value_at(ref.start + 12345) == ref.values[0]


def test_predator_attractor_and_seed_independence():
    r1 = ee.find_attractor(ee.predator_system(coeffs()), 0.05)
    r2 = ee.find_attractor(ee.predator_system(coeffs()), 8.0)
    assert math.isclose(r1.values[0], 1.5, rel_tol=1e-12)
    assert abs(r1.values[0] - r2.values[0]) < 1e-12


def test_seasonal_prey_attractor_detects_period():
    c = coeffs(recruitment=seasonal(0.3),
               mortality=ee.CoefficientSpec.cosine(0.1, 0.5, math.pi / 5))
    sys = ee.prey_system(c)
    assert sys.period == 10
    ref = ee.find_attractor(sys, 3.0)
    assert ref.detected_period == 10
    assert len(ref.values) == 100
    # phase-aligned wrap past the recorded window
    assert ref.value_at(ref.start + len(ref.values) + 7) == ref.values[7]


def test_prey_box_absorbs_and_retains():
    c = coeffs(recruitment=seasonal(0.3),
               mortality=ee.CoefficientSpec.cosine(0.1, 0.5, math.pi / 5))
    sys = ee.prey_system(c)
    rec = c.recruitment.array(0, 400)
    mu = c.mortality.array(0, 400)
    lo = rec.min() / mu.max()
    hi = rec.max() / mu.min()

    for s0 in (lo, 3.0, hi):
        s = s0
        for n in range(200):
            s = sys.step(s, n)
            assert lo - 1e-12 <= s <= hi + 1e-12

    s = 50.0
    entered = False
    for n in range(400):
        s = sys.step(s, n)
        if entered:
            assert lo - 1e-12 <= s <= hi + 1e-12
        elif lo <= s <= hi:
            entered = True
    assert entered


def test_predator_box_absorbs_and_retains():
    c = coeffs(predator_growth=ee.CoefficientSpec.cosine(0.3, 0.5, math.pi / 5),
               predator_competition=ee.CoefficientSpec.cosine(0.2, 0.4, math.pi / 5))
    sys = ee.predator_system(c)
    gro = c.predator_growth.array(0, 400)
    comp = c.predator_competition.array(0, 400)
    lo = gro.min() / comp.max()
    hi = gro.max() / comp.min()

    for y0 in (lo, 1.5, hi):
        y = y0
        for n in range(200):
            y = sys.step(y, n)
            assert lo - 1e-12 <= y <= hi + 1e-12

    y = 30.0
    entered = False
    for n in range(400):
        y = sys.step(y, n)
        if entered:
            assert lo - 1e-12 <= y <= hi + 1e-12
        elif lo <= y <= hi:
            entered = True
    assert entered


def test_pair_variants_coincide_at_zero_eps():
    c = coeffs()
    base = ee.pair_system(c, LINEAR_F)
    lower = ee.pair_system(c, LINEAR_F, variant="lower", eps=0.0)
    upper = ee.pair_system(c, LINEAR_F, LINEAR_G, variant="upper", eps=0.0)
    state = (2.0, 1.0)
    for n in range(5):
        b = base.step(state, n)
        assert lower.step(state, n) == b
        assert upper.step(state, n) == b
        state = b


def test_pair_variants_bracket_the_base_attractor():
    c = coeffs()
    eps = 1e-3
    base = ee.find_attractor(ee.pair_system(c, LINEAR_F), (1.5, 1.5))
    lower = ee.find_attractor(
        ee.pair_system(c, LINEAR_F, variant="lower", eps=eps), (1.5, 1.5))
    upper = ee.find_attractor(
        ee.pair_system(c, LINEAR_F, LINEAR_G, variant="upper", eps=eps),
        (1.5, 1.5))
    assert np.all(lower.values[:, 0] <= base.values[:, 0] + 1e-12)
    assert np.all(upper.values[:, 1] >= base.values[:, 1] - 1e-12)
    # the perturbation scales with eps
    gap_low = abs(lower.values[0, 0] - base.values[0, 0])
    gap_up = abs(upper.values[0, 1] - base.values[0, 1])
    assert 0.0 < gap_low < 100.0 * eps
    assert 0.0 < gap_up < 100.0 * eps
    tighter = ee.find_attractor(
        ee.pair_system(c, LINEAR_F, variant="lower", eps=eps / 10.0),
        (1.5, 1.5))
    assert abs(tighter.values[0, 0] - base.values[0, 0]) < gap_low


def test_pair_variant_argument_validation():
    c = coeffs()
    with pytest.raises(ValueError):
        ee.pair_system(c, LINEAR_F, variant="upper", eps=1e-3)
    with pytest.raises(ValueError):
        ee.pair_system(c, LINEAR_F, variant="sideways")
    with pytest.raises(ValueError):
        ee.pair_system(c, LINEAR_F, variant="lower", eps=-0.1)


def test_pair_decouples_without_predation():
    c = coeffs(predation=0.0)
    ref = ee.find_attractor(ee.pair_system(c, LINEAR_F), (1.0, 1.0))
    assert math.isclose(ref.values[0, 0], 3.0, rel_tol=1e-10)
    assert math.isclose(ref.values[0, 1], 1.5, rel_tol=1e-10)


def test_pair_iterates_contract_monotonically():
    sys = ee.pair_system(coeffs(), LINEAR_F)
    a, b = (0.5, 0.5), (4.0, 3.0)
    d_prev = max(abs(a[0] - b[0]), abs(a[1] - b[1]))
    for n in range(2000):
        a = sys.step(a, n)
        b = sys.step(b, n)
        d = max(abs(a[0] - b[0]), abs(a[1] - b[1]))
        assert d <= d_prev + 1e-15
        d_prev = d
    assert d_prev < 1e-10


def test_nonlinear_pair_attractor_runs():
    f = ee.make_response("holling2_prey", m=0.8)
    ref = ee.find_attractor(ee.pair_system(coeffs(), f), (1.0, 1.0))
    assert ref.convergence_residual <= ref.tol
    assert np.all(ref.values > 0.0)


def test_autonomous_fixed_point_values_and_residual():
    c = coeffs()
    x, z = ee.autonomous_fixed_point(c)
    assert math.isclose(x, 0.40941480225115934, rel_tol=1e-12)
    assert math.isclose(z, 1.5818829604502318, rel_tol=1e-12)
    x1, z1 = ee.pair_system(c, LINEAR_F).step((x, z), 0)
    assert abs(x1 - x) < 1e-12 and abs(z1 - z) < 1e-12


def test_autonomous_fixed_point_degenerate_and_near_degenerate():
    x, z = ee.autonomous_fixed_point(coeffs(predation=0.0))
    assert math.isclose(x, 3.0, rel_tol=1e-14)
    assert math.isclose(z, 1.5, rel_tol=1e-14)
    # tiny predation stays near the uncoupled limit, no cancellation blowup
    x, z = ee.autonomous_fixed_point(coeffs(predation=1e-8))
    assert math.isclose(x, 3.0, rel_tol=1e-5)
    assert math.isclose(z, 1.5, rel_tol=1e-5)


def test_autonomous_fixed_point_requires_constant_positive_inputs():
    with pytest.raises(ValueError):
        ee.autonomous_fixed_point(coeffs(recruitment=seasonal(0.3)))
    with pytest.raises(ValueError):
        ee.autonomous_fixed_point(coeffs(mortality=0.0))


def test_attractor_rejects_unsettled_systems():
    # an incommensurate forcing frequency never repeats on the step grid
    c = coeffs(mortality=ee.CoefficientSpec.cosine(0.1, 0.5, 1.0))
    with pytest.raises(ee.NoConvergence) as err:
        ee.find_attractor(ee.prey_system(c), 3.0, burn_in=500, window=50)
    assert err.value.residual > 0.0


def test_attractor_argument_validation():
    sys = ee.prey_system(coeffs())
    with pytest.raises(ValueError):
        ee.find_attractor(sys, 3.0, window=0)
    with pytest.raises(ValueError):
        ee.find_attractor(sys, 3.0, burn_in=-1)


def test_reference_window_queries():
    ref = ee.ReferenceSolution(kind="prey", start=100, values=np.arange(5.0),
                               burn_in=100, detected_period=None,
                               convergence_residual=0.0, tol=1e-8)
    assert ref.value_at(102) == 2.0
    with pytest.raises(ee.ReferenceWindowExhausted):
        ref.value_at(105)
    with pytest.raises(ee.ReferenceWindowExhausted):
        ref.value_at(99)
    with pytest.raises(ValueError):
        ref.component(0)

    pair = ee.ReferenceSolution(kind="pair", start=0,
                                values=np.array([[1.0, 2.0], [3.0, 4.0]]),
                                burn_in=0, detected_period=2,
                                convergence_residual=0.0, tol=1e-8)
    x = pair.component(0)
    assert x.value_at(1) == 3.0
    assert x.value_at(3) == 3.0
    z = pair.component(1)
    assert z.value_at(2) == 2.0
