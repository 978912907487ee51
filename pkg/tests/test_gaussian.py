import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from entroflow import (
    PLANE_ENTROPY,
    CutoffSpec,
    EntropyOptions,
    GaussianCenter,
    NonpositiveScale,
    UnsupportedIndex,
    circle,
    cylinder_product_check,
    ecker_cutoff,
    entropy,
    f_functional,
    f_gradient,
    icosphere,
    localized_f,
    phi_kernel,
    sphere_area,
    stone_entropy,
)

# stone_entropy(k) for k = 1..5, evaluated once with mpmath at 30 digits
STONE = [1.520346901066281, 1.4715177646857693, 1.453115374318719, 1.4435763545238687, 1.43776780089059]


def test_gaussian_center_rejects_nonpositive_scale():
    with pytest.raises(NonpositiveScale):
        GaussianCenter(np.zeros(2), 0.0)
    with pytest.raises(NonpositiveScale):
        phi_kernel(np.zeros(2), -1.0, 1)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_phi_kernel_integrates_to_one(n):
    # radial integral of the kernel over R^n at t = 0.7
    t = 0.7
    val, _ = integrate.quad(lambda r: sphere_area(n - 1) * r ** (n - 1) * phi_kernel(np.array([r]), t, n), 0, np.inf)
    assert val == pytest.approx(1.0, abs=1e-10)


def test_f_functional_on_shrinker_circle():
    c = circle(math.sqrt(2), 4096)
    assert abs(f_functional(c, GaussianCenter(np.zeros(2), 1.0)) - math.sqrt(2 * math.pi / math.e)) < 1e-3


def test_f_functional_on_icosphere():
    s = icosphere(2.0, 4)
    assert abs(f_functional(s, GaussianCenter(np.zeros(3), 1.0)) - 4 / math.e) < 5e-3


def test_f_functional_far_away_is_tiny():
    c = circle(1.0, 128)
    assert f_functional(c, GaussianCenter(np.array([50.0, 0.0]), 1.0)) < 1e-100


@settings(max_examples=25, deadline=None)
@given(x=st.floats(-2, 2), y=st.floats(-2, 2), logt=st.floats(-2, 2), c=st.floats(0.3, 4.0))
def test_f_functional_dilation_identity(x, y, logt, c):
    # F(cM, (c x0, c^2 t0)) = F(M, (x0, t0))
    m = circle(1.0, 64, phase=0.3)
    g = GaussianCenter(np.array([x, y]), math.exp(logt))
    big = m.with_vertices(c * m.vertices)
    assert f_functional(big, GaussianCenter(c * g.center, c * c * g.scale)) == pytest.approx(
        f_functional(m, g), rel=1e-10)


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(7)
    s = icosphere(1.0, 2)
    for _ in range(10):
        x0 = rng.uniform(-1, 1, 3)
        logt = rng.uniform(-1.5, 1.0)
        gx, gt = f_gradient(s, GaussianCenter(x0, math.exp(logt)))
        h = 1e-5
        for k in range(3):
            e = np.zeros(3)
            e[k] = h
            fd = (f_functional(s, GaussianCenter(x0 + e, math.exp(logt)))
                  - f_functional(s, GaussianCenter(x0 - e, math.exp(logt)))) / (2 * h)
            assert fd == pytest.approx(gx[k], rel=1e-6, abs=1e-9)
        fd = (f_functional(s, GaussianCenter(x0, math.exp(logt + h)))
              - f_functional(s, GaussianCenter(x0, math.exp(logt - h)))) / (2 * h)
        assert fd == pytest.approx(gt, rel=1e-6, abs=1e-9)


# -- entropy ------------------------------------------------------------------


@pytest.mark.parametrize("radius,center", [(1.0, (0.0, 0.0)), (3.0, (1.0, 2.0)), (0.2, (-5.0, 0.5))])
def test_circle_entropy_and_argmax(radius, center):
    c = circle(radius, 512, center)
    res = entropy(c)
    assert abs(res.entropy - STONE[0]) < 2e-3
    assert res.converged
    assert np.linalg.norm(res.argmax.center - center) < 1e-3 * radius
    assert res.argmax.scale == pytest.approx(radius ** 2 / 2, rel=1e-3)


def test_entropy_is_max_of_evaluated_values():
    res = entropy(circle(1.0, 128), EntropyOptions(starts=3))
    assert res.starts_tried == 4 * 3
    assert res.entropy == max(res.values)


def test_entropy_seeded_starts_are_reproducible():
    c = circle(1.0, 128)
    a = entropy(c, EntropyOptions(seed=4))
    b = entropy(c, EntropyOptions(seed=4))
    assert a.entropy == b.entropy
    assert np.array_equal(a.argmax.center, b.argmax.center)


def test_entropy_threads_match_serial():
    s = icosphere(1.0, 2)
    serial = entropy(s, EntropyOptions(workers=1))
    threaded = entropy(s, EntropyOptions(workers=4))
    assert serial.entropy == threaded.entropy


# -- closed forms -------------------------------------------------------------------


def test_stone_values():
    assert stone_entropy(1) == pytest.approx(math.sqrt(2 * math.pi / math.e), abs=1e-12)
    assert stone_entropy(2) == pytest.approx(4 / math.e, abs=1e-12)
    assert [stone_entropy(k) for k in range(1, 6)] == pytest.approx(STONE, abs=1e-13)


def test_stone_chain_decreases_toward_sqrt2():
    vals = [stone_entropy(k) for k in range(1, 60)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert all(v > 1 for v in vals)
    # large-k limit of the closed form is sqrt(2)
    assert abs(vals[-1] - math.sqrt(2)) < 5e-3


@pytest.mark.parametrize("k", [0, -1, 1.5])
def test_stone_rejects_bad_index(k):
    with pytest.raises(UnsupportedIndex):
        stone_entropy(k)


@pytest.mark.parametrize("k", [1, 2])
def test_cylinder_product_brackets_stone_value(k):
    value, bound = cylinder_product_check(k, 10.0)
    assert value <= stone_entropy(k) + 1e-12
    assert stone_entropy(k) <= value + bound + 1e-12
    assert bound < 1e-10


def test_cylinder_tail_bound_shrinks():
    bounds = [cylinder_product_check(1, L)[1] for L in (2.0, 4.0, 8.0)]
    assert bounds[0] > bounds[1] > bounds[2]


def test_plane_entropy_constant():
    assert PLANE_ENTROPY == 1.0


# -- localisation -----------------------------------------------------------------


def test_ecker_cutoff_support_and_values():
    spec = CutoffSpec(np.zeros(2), 1.0, 2.0)
    assert ecker_cutoff(np.zeros(2), 1.0, spec, 1) == 1.0
    assert ecker_cutoff(np.array([2.0, 0.0]), 1.0, spec, 1) == 0.0
    # earlier times widen the support: |x|^2 < rho^2 + 2n (t0 - t)
    assert ecker_cutoff(np.array([2.0, 0.0]), 0.5, spec, 1) == pytest.approx((1 - 3.0 / 4.0) ** 3)


def test_localized_f_tends_to_f_for_wide_cutoff():
    s = circle(1.0, 256)
    g = GaussianCenter(np.zeros(2), 0.8)
    wide = localized_f(s, g, 0.3, CutoffSpec(np.zeros(2), 0.8, 1e4))
    assert wide == pytest.approx(f_functional(s, GaussianCenter(np.zeros(2), 0.5)), rel=1e-6)
    with pytest.raises(NonpositiveScale):
        localized_f(s, g, 0.8, CutoffSpec(np.zeros(2), 0.8, 1.0))
