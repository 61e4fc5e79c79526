"""Metric, boosts, wedges, and deformation-matrix geometry."""

import hypothesis as hyp
import hypothesis.strategies as st
import numpy as np
import pytest

from twistqft.geometry import (
    LorentzTransform,
    ThetaMatrix,
    Wedge,
    angular_distance,
    half_theta_cone_check,
    interval,
    is_spacelike,
    lower_index,
    make_reference_theta,
    mdot,
    minkowski_metric,
    reference_wedge,
    rho_norm,
    sample_backward_cone,
    sample_wedge,
    transform_theta,
)


def test_metric_signature():
    g = minkowski_metric(4)
    assert g[0, 0] == 1.0
    assert np.all(np.diag(g)[1:] == -1.0)
    assert np.count_nonzero(g - np.diag(np.diag(g))) == 0


def test_mdot_against_components():
    p = np.array([2.0, 3.0])
    x = np.array([5.0, 7.0])
    assert mdot(p, x) == pytest.approx(2.0 * 5.0 - 3.0 * 7.0)


def test_mdot_broadcasts():
    p = np.ones((10, 3, 2))
    x = np.array([1.0, 1.0])
    assert mdot(p, x).shape == (10, 3)


def test_lower_index_flips_space():
    p = np.array([1.0, 2.0, 3.0, 4.0])
    np.testing.assert_array_equal(lower_index(p), [1.0, -2.0, -3.0, -4.0])


def test_interval_and_spacelike():
    assert interval([0.0, 1.0], [0.0, 0.0]) == pytest.approx(-1.0)
    assert is_spacelike([0.0, 1.0], [0.0, 0.0])
    assert not is_spacelike([2.0, 1.0], [0.0, 0.0])
    # lightlike is not spacelike
    assert not is_spacelike([1.0, 1.0], [0.0, 0.0])


class TestThetaMatrix:
    def test_upper_entries_enforced(self):
        with pytest.raises(ValueError):
            ThetaMatrix(d=2, entries=((1, 0, 1.0),))
        with pytest.raises(ValueError):
            ThetaMatrix(d=2, entries=((0, 1, 1.0), (0, 1, 2.0)))

    def test_from_matrix_antisymmetrizes(self):
        # the symmetric part carries no deformation and is projected out
        assert ThetaMatrix.from_matrix(np.eye(2)).is_zero

    def test_reference_action_d2(self):
        # theta q = theta_e (-q^1, -q^0) in d=2 with the index lowered
        th = make_reference_theta(2.0)
        q = np.array([3.0, 5.0])
        np.testing.assert_allclose(th.apply(q), [-2.0 * 5.0, -2.0 * 3.0])

    def test_bilinear_matches_matrix(self, rng):
        th = make_reference_theta(0.7)
        p = rng.normal(size=2)
        q = rng.normal(size=2)
        direct = lower_index(p) @ th.matrix @ lower_index(q)
        assert th.bilinear(p, q) == pytest.approx(direct)

    def test_bilinear_antisymmetric(self, rng):
        th = make_reference_theta(1.3)
        p, q = rng.normal(size=(2, 2))
        assert th.bilinear(p, q) == pytest.approx(-th.bilinear(q, p))
        assert th.bilinear(p, p) == pytest.approx(0.0, abs=1e-14)

    def test_scaled_and_neg(self):
        th = make_reference_theta(1.0)
        assert th.scaled(2.0).entry(0, 1) == pytest.approx(2.0 * th.entry(0, 1))
        assert (-th).entry(0, 1) == pytest.approx(-th.entry(0, 1))

    def test_zero_flag(self):
        assert ThetaMatrix.zero(2).is_zero
        assert not make_reference_theta(1e-12).is_zero

    def test_elementary_length(self):
        assert make_reference_theta(4.0).elementary_length == pytest.approx(2.0)

    def test_json_roundtrip(self):
        th = make_reference_theta(0.5, theta_m=0.25, d=4)
        back = ThetaMatrix.from_json(th.to_json())
        np.testing.assert_array_equal(back.matrix, th.matrix)


@hyp.settings(max_examples=50, deadline=None)
@hyp.given(rap=st.floats(-3.0, 3.0))
def test_boost_preserves_metric(rap):
    L = LorentzTransform.boost(rap, 2).matrix
    g = minkowski_metric(2)
    np.testing.assert_allclose(L.T @ g @ L, g, atol=1e-12)


@hyp.settings(max_examples=50, deadline=None)
@hyp.given(
    rap=st.floats(-2.0, 2.0),
    x=st.tuples(st.floats(-5, 5), st.floats(-5, 5)),
    y=st.tuples(st.floats(-5, 5), st.floats(-5, 5)),
)
def test_boost_preserves_interval(rap, x, y):
    L = LorentzTransform.boost(rap, 2)
    lhs = interval(L.apply(np.array(x)), L.apply(np.array(y)))
    assert lhs == pytest.approx(interval(np.array(x), np.array(y)), abs=1e-9, rel=1e-9)


def test_boost_inverse_composes_to_identity():
    L = LorentzTransform.boost(1.1, 2)
    np.testing.assert_allclose(L.compose(L.inverse()).matrix, np.eye(2), atol=1e-14)


def test_transform_theta_is_congruence():
    th = make_reference_theta(1.0, theta_m=0.5, d=4)
    L = LorentzTransform.boost(0.8, 4)
    out = transform_theta(L, th)
    np.testing.assert_allclose(out.matrix, L.matrix @ th.matrix @ L.matrix.T, atol=1e-12)


def test_theta_boost_invariant_d2():
    # in d=2 the antisymmetric matrix is a multiple of epsilon, and
    # L eps L^T = det(L) eps = eps for any proper transform
    th = make_reference_theta(1.0)
    out = transform_theta(LorentzTransform.boost(1.7, 2), th)
    np.testing.assert_allclose(out.matrix, th.matrix, atol=1e-12)


class TestWedge:
    def test_reference_membership(self):
        w = reference_wedge(2)
        assert w.contains([0.0, 1.0])
        assert not w.contains([0.0, -1.0])
        assert not w.contains([2.0, 1.0])
        assert not w.contains([1.0, 1.0])  # boundary excluded

    def test_opposite(self):
        w = reference_wedge(2)
        assert w.opposite().contains([0.0, -1.0])
        assert not w.opposite().contains([0.0, 1.0])

    def test_contains_many_matches_scalar(self, rng):
        w = reference_wedge(2)
        pts = rng.normal(scale=2.0, size=(200, 2))
        many = w.contains_many(pts)
        assert all(bool(m) == w.contains(p) for m, p in zip(many, pts))

    def test_contains_ball(self):
        w = reference_wedge(2)
        assert w.contains_ball([0.0, 3.0], 1.0)
        # ball reaching the lightlike edge does not fit
        assert not w.contains_ball([0.0, 1.0], 1.0)
        assert not w.contains_ball([0.0, -3.0], 1.0)

    def test_boosted_wedge_still_contains_spacelike_axis(self):
        w = Wedge(boost=LorentzTransform.boost(0.5, 2))
        assert w.contains([0.0, 5.0])


def test_sample_backward_cone_in_cone(rng):
    v = sample_backward_cone(2, 500, rng)
    assert np.all(v[:, 0] < 0)
    assert all(interval(row, np.zeros(2)) > 0 for row in v)


def test_sample_wedge_members(rng):
    w = reference_wedge(2)
    pts = sample_wedge(w, 300, rng)
    assert np.all(w.contains_many(pts))


def test_half_theta_cone_check_reference():
    assert half_theta_cone_check(make_reference_theta(1.0), n_samples=3000)
    assert half_theta_cone_check(make_reference_theta(0.25), n_samples=3000)


def test_half_theta_cone_check_flipped_sign_fails():
    # -theta maps the backward cone into the opposite wedge instead
    th = -make_reference_theta(1.0)
    assert not half_theta_cone_check(th, n_samples=500)
    assert half_theta_cone_check(th, n_samples=500, wedge=reference_wedge(2).opposite())


def test_half_theta_cone_check_zero_fails():
    assert not half_theta_cone_check(ThetaMatrix.zero(2), n_samples=10)


def test_rho_norm_values():
    assert rho_norm([3.0, 4.0], 2.0) == pytest.approx(5.0)
    assert rho_norm([3.0, 4.0], 1.0) == pytest.approx(7.0)


def test_angular_distance_separated_regions():
    w = reference_wedge(2)
    inside = sample_wedge(w, 50, np.random.default_rng(1))
    d_in = angular_distance(inside, w.contains)
    assert d_in < 5e-3  # discretization floor of the cone sampling
    mirrored = -inside
    d_out = angular_distance(mirrored, w.contains)
    assert d_out > 0.1
