import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from biortho import coefficients as co
from biortho.errors import ScaleOverflowError, SingularIterateError
from biortho.recurrence import RENORM_HI, EvalRequest, evaluate, make_frame, ratio_iterate, sweep, trajectory

from oracles import horner, left_poly_coeffs, power_moments, right_poly_coeffs

FAMILIES = {
    "scalar": co.constant([[1]], [[0]], [[1]]),
    "triple": co.constant([[2, 0], [7, 5]], [[0, 0], [0, 8]], [[2, 0], [0, 1]]),
    "laguerre": co.laguerre_christoffel(0.0),
    "laguerre_a1": co.laguerre_christoffel(1.0),
    "ex2": co.paper_example_2(),
}

points = st.complex_numbers(max_magnitude=6, allow_nan=False, allow_infinity=False)


def value(req):
    return evaluate(req)[0].value()


def test_degree_zero_is_identity(ex2):
    v = evaluate(EvalRequest(ex2, 1.5 + 2j, 0))[0]
    assert np.allclose(v.m, np.eye(2)) and v.e == 0


def test_laguerre_degree_one(laguerre):
    assert np.allclose(value(EvalRequest(laguerre, 5, 1)), [[3, 2], [0, 3]])


def test_scalar_degree_two(scalar):
    assert value(EvalRequest(scalar, 2, 2))[0, 0] == pytest.approx(3)


@pytest.mark.parametrize("z", [0.5, 1 + 1j, -2.0])
def test_scaled_laguerre_degree_one(laguerre, z):
    req = EvalRequest(laguerre, z, 1, scaling=co.paper_laguerre_scaling(), k=2)
    assert np.allclose(value(req), [[4 * z - 2, 2], [0, 4 * z - 2]])


@pytest.mark.parametrize("name", list(FAMILIES))
@given(z=points, n=st.integers(0, 7))
def test_left_and_right_match_coefficient_oracle(name, z, n):
    fam = FAMILIES[name]
    want_l = horner(left_poly_coeffs(fam, n)[n], z)
    want_r = horner(right_poly_coeffs(fam, n)[n], z)
    got_l = value(EvalRequest(fam, z, n))
    got_r = value(EvalRequest(fam, z, n, side="right"))
    scale = max(1.0, np.abs(want_l).max())
    assert np.allclose(got_l, want_l, rtol=1e-9, atol=1e-9 * scale)
    scale = max(1.0, np.abs(want_r).max())
    assert np.allclose(got_r, want_r, rtol=1e-9, atol=1e-9 * scale)


@pytest.mark.parametrize("name", ["scalar", "triple", "laguerre", "ex2"])
@given(z=points, n=st.integers(1, 5))
def test_derivatives_match_oracle(name, z, n):
    fam = FAMILIES[name]
    coeffs = left_poly_coeffs(fam, n)[n]
    d1 = [i * c for i, c in enumerate(coeffs)][1:]
    d2 = [i * c for i, c in enumerate(d1)][1:] or [0 * coeffs[0]]
    vals = [v.value() for v in evaluate(EvalRequest(fam, z, n, derivative_order=2))]
    for got, want in zip(vals, (horner(coeffs, z), horner(d1, z), horner(d2, z))):
        assert np.allclose(got, want, rtol=1e-8, atol=1e-8 * max(1.0, np.abs(want).max()))


@pytest.mark.parametrize("name", ["scalar", "triple", "laguerre", "ex2"])
@given(z=points, n=st.integers(1, 5))
def test_associates_match_moment_definition(name, z, n):
    """V^{(1)}_{n-1}(x) = int (V_n(x) - V_n(y)) / (x - y) dW(y), and the right mirror."""
    fam = FAMILIES[name]
    M = power_moments(fam, 2 * n)
    cl = left_poly_coeffs(fam, n)[n]
    cr = right_poly_coeffs(fam, n)[n]
    want_l = sum(cl[i] @ M[i - 1 - j] * z**j for i in range(1, n + 1) for j in range(i))
    want_r = sum(M[i - 1 - j] @ cr[i] * z**j for i in range(1, n + 1) for j in range(i))
    got_l = evaluate(EvalRequest(fam, z, n - 1, associate=True))[0].value()
    got_r = evaluate(EvalRequest(fam, z, n - 1, side="right", associate=True))[0].value()
    for got, want in ((got_l, want_l), (got_r, want_r)):
        assert np.allclose(got, want, rtol=1e-8, atol=1e-8 * max(1.0, np.abs(want).max()))


def test_associate_starts(ex2):
    a0 = ex2.coeffs(0)[0]
    c1 = ex2.coeffs(1)[2]
    assert np.allclose(value(EvalRequest(ex2, 3, 0, associate=True)), np.linalg.inv(a0))
    assert np.allclose(value(EvalRequest(ex2, 3, 0, side="right", associate=True)), np.linalg.inv(c1))


@pytest.mark.parametrize("name", ["triple", "laguerre", "ex2"])
def test_orthogonality_against_moments(name):
    """int V_n x^j dW = 0 and int x^j dW G_n = 0 for j < n."""
    fam = FAMILIES[name]
    n = 4
    M = power_moments(fam, 2 * n)
    cl = left_poly_coeffs(fam, n)[n]
    cr = right_poly_coeffs(fam, n)[n]
    for j in range(n):
        left = sum(c @ M[i + j] for i, c in enumerate(cl))
        right = sum(M[i + j] @ c for i, c in enumerate(cr))
        scale = max(np.abs(c).max() for c in cl) * max(np.abs(m).max() for m in M)
        assert np.abs(left).max() <= 1e-9 * scale
        scale = max(np.abs(c).max() for c in cr) * max(np.abs(m).max() for m in M)
        assert np.abs(right).max() <= 1e-9 * scale


def test_large_degree_stays_finite_and_normalized(ex2):
    fam = co.constant(np.eye(2), np.zeros((2, 2)), np.eye(2))
    v = evaluate(EvalRequest(fam, 1000.0, 150, derivative_order=1))
    assert all(np.isfinite(x.m).all() for x in v)
    assert 1.0 <= max(np.linalg.norm(x.m) for x in v) < RENORM_HI
    assert v[0].e > 710  # the plain value would overflow
    r1, r2 = (1000.0 + math.sqrt(1000.0**2 - 4)) / 2, (1000.0 - math.sqrt(1000.0**2 - 4)) / 2
    exact = 151 * math.log(r1) - math.log(r1 - r2)  # U_150(z/2)
    assert math.log(abs(v[0].m[0, 0])) + v[0].e == pytest.approx(exact, rel=1e-12)
    w = evaluate(EvalRequest(ex2, 50 + 3j, 2000, derivative_order=2))
    assert all(np.isfinite(x.m).all() for x in w)


def test_overflow_guard():
    fam = co.constant([[1e-3]], [[0]], [[1e-3]])
    with pytest.raises(ScaleOverflowError):
        evaluate(EvalRequest(fam, 1e6, 200000))


@given(z=st.complex_numbers(min_magnitude=2.5, max_magnitude=20, allow_nan=False, allow_infinity=False), n=st.integers(1, 40))
def test_log_value_matches_direct(z, n):
    fam = FAMILIES["scalar"]
    v = evaluate(EvalRequest(fam, z, n))[0]
    direct = horner(left_poly_coeffs(fam, n)[n], z)[0, 0]
    assert math.log(abs(v.m[0, 0])) + v.e == pytest.approx(math.log(abs(direct)), abs=1e-8)


def test_trajectory_matches_individual_sweeps(ex2):
    frame = make_frame(ex2)
    traj = trajectory(frame, 2 + 1j, 6)
    for n, t in enumerate(traj):
        assert np.allclose(t.value(), value(EvalRequest(ex2, 2 + 1j, n)))


def test_ratio_examples(scalar):
    ks = ratio_iterate(scalar, None, "left", None, 200, 3)
    assert ks[0][0, 0] == pytest.approx(1 / 3)
    assert ks[-1][0, 0] == pytest.approx((3 - math.sqrt(5)) / 2, abs=1e-6)


@pytest.mark.parametrize("name", ["triple", "laguerre", "ex2"])
@given(z=points)
def test_first_ratio(name, z):
    fam = FAMILIES[name]
    a0, b0, _ = fam.coeffs(0)
    step = np.linalg.inv(a0) @ (z * np.eye(2) - b0)
    assume(np.linalg.cond(step) < 1e8)
    want = np.linalg.inv(step)
    got = ratio_iterate(fam, None, "left", None, 1, z)[0]
    cond = np.linalg.cond(step)
    assert np.linalg.norm(got - want) <= 1e-12 * cond * np.linalg.norm(want)


@pytest.mark.parametrize("side", ["left", "right"])
def test_ratio_matches_polynomial_quotient(ex2, side):
    z = 4 + 1j
    ks = ratio_iterate(ex2, None, side, None, 6, z)
    for m in range(1, 7):
        p = value(EvalRequest(ex2, z, m, side=side))
        q = value(EvalRequest(ex2, z, m - 1, side=side))
        want = q @ np.linalg.inv(p) if side == "left" else np.linalg.inv(p) @ q
        assert np.allclose(ks[m - 1], want, rtol=1e-8)


def test_ratio_at_a_zero_raises(scalar):
    with pytest.raises(SingularIterateError):
        ratio_iterate(scalar, None, "left", None, 3, 0.0)


def test_normalized_frame_shares_zeros(laguerre):
    seq = co.paper_laguerre_scaling()
    z = 1.3 + 0.2j
    plain = sweep(make_frame(laguerre, seq, 5), z, 4)
    norm = sweep(make_frame(laguerre, seq, 5, normalized=True), z, 4)
    d, root, inv_root = seq.triple(5)
    assert np.allclose(norm.cur[0] * math.exp(norm.e), root @ plain.cur[0] @ inv_root * math.exp(plain.e))
