"""Test functions, transforms, and weighted-norm estimates."""

import math

import hypothesis as hyp
import hypothesis.strategies as st
import numpy as np
import pytest

from twistqft.funcspace import (
    BumpFunction,
    GaussianPacket,
    GridFunction,
    SlotProduct,
    duality_parameters,
    gs_norm,
    translate,
)
from twistqft.geometry import mdot


@pytest.fixture()
def packet():
    return GaussianPacket(center=(0.3, -0.4), widths=(0.7, 0.9), carrier=(0.5, -0.2))


def brute_transform(f, p, half=9.0, n=700):
    """Direct quadrature of integral f(x) exp(i p.x) dx on a dense grid."""
    axes = [np.linspace(-half, half, n)] * 2
    dx = axes[0][1] - axes[0][0]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    vals = f.eval(mesh)
    phase = np.exp(1j * mdot(np.broadcast_to(p, mesh.shape), mesh))
    return np.sum(vals * phase) * dx * dx


class TestGaussianPacket:
    def test_eval_closed_form(self, packet):
        x = np.array([0.5, 0.1])
        expo = -((0.5 - 0.3) ** 2) / (2 * 0.7**2) - ((0.1 + 0.4) ** 2) / (2 * 0.9**2)
        phase = -(0.5 * 0.5 - (-0.2) * 0.1)
        expected = np.exp(expo) * np.exp(1j * phase)
        assert packet.eval(x) == pytest.approx(expected)

    @pytest.mark.parametrize("p", [(0.0, 0.0), (1.2, -0.7), (-2.0, 1.5)])
    def test_momentum_matches_brute_quadrature(self, packet, p):
        closed = packet.eval_momentum(np.array(p))
        brute = brute_transform(packet, np.array(p))
        assert closed == pytest.approx(brute, rel=1e-9)

    def test_fourier_is_momentum_restriction(self, packet, rng):
        p = rng.normal(size=(20, 2))
        np.testing.assert_allclose(packet.fourier().eval(p), packet.eval_momentum(p), rtol=1e-12)

    def test_conjugate_relation(self, packet, rng):
        p = rng.normal(size=(16, 2))
        lhs = packet.conjugate().eval_momentum(p)
        rhs = np.conj(packet.eval_momentum(-p))
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)

    def test_momentum_rate_positive(self, packet):
        assert packet.momentum_rate() > 0.0

    def test_not_compact(self, packet):
        assert packet.support_radius() is None


@hyp.settings(max_examples=40, deadline=None)
@hyp.given(
    lam=st.floats(-3.0, 3.0),
    a0=st.floats(-2.0, 2.0),
    a1=st.floats(-2.0, 2.0),
)
def test_translation_law_momentum_side(lam, a0, a1):
    f = GaussianPacket(center=(0.1, 0.2), widths=(0.8, 1.1), carrier=(0.4, -0.3))
    a = np.array([a0, a1])
    p = np.array([[0.7, -0.4], [0.0, 1.3], [-1.1, 0.2]])
    lhs = translate(f, a, lam).eval_momentum(p)
    rhs = f.eval_momentum(p) * np.exp(1j * lam * mdot(p, a))
    np.testing.assert_allclose(lhs, rhs, atol=1e-12, rtol=1e-12)


def test_translation_law_position_side(packet):
    a = np.array([0.5, -0.7])
    x = np.array([[0.2, 0.3], [1.0, -0.5]])
    lhs = translate(packet, a, 2.0).eval(x)
    rhs = packet.eval(x - 2.0 * a)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-12)


class TestBumpFunction:
    def test_compact_support_exact(self):
        f = BumpFunction(center=(0.0, 1.0), radius=0.5)
        assert f.eval(np.array([0.0, 1.6])) == 0.0
        assert f.eval(np.array([0.0, 1.49])) != 0.0
        assert f.support_radius() == pytest.approx(0.5)

    def test_momentum_matches_brute_quadrature(self):
        f = BumpFunction(center=(0.2, -0.1), radius=0.8, order=1)
        p = np.array([0.9, -1.4])
        closed = f.eval_momentum(p)
        brute = brute_transform(f, p, half=1.5, n=1500)
        assert closed == pytest.approx(brute, rel=5e-4)

    def test_translate_moves_center(self):
        f = BumpFunction(center=(0.0, 0.0), radius=0.3)
        g = translate(f, np.array([0.0, 1.0]), 2.0)
        assert g.center == (0.0, 2.0)
        assert g.radius == f.radius

    def test_order_raises_smoothness(self):
        # higher order means faster transform decay at large momentum
        p = np.array([14.0, 0.0])
        lo = abs(BumpFunction(center=(0.0, 0.0), radius=1.0, order=1).eval_momentum(p))
        hi = abs(BumpFunction(center=(0.0, 0.0), radius=1.0, order=3).eval_momentum(p))
        assert hi < lo


def test_slot_product_factorizes(packet):
    other = GaussianPacket(center=(0.0, 0.5), widths=(1.0, 0.8), carrier=(0.0, 0.3))
    pair = SlotProduct((packet, other))
    assert pair.n_slots == 2
    x = np.array([[0.1, 0.2, 0.3, 0.4]])
    np.testing.assert_allclose(
        pair.eval(x),
        packet.eval(x[:, :2]) * other.eval(x[:, 2:]),
        rtol=1e-12,
    )


class TestGridFunction:
    def test_transform_roundtrip(self, packet):
        g = GridFunction.from_function(packet, [(-8.0, 8.0)] * 2, 128)
        back = g.fourier().inverse_fourier()
        np.testing.assert_allclose(back.values, g.values, atol=1e-12)

    def test_parseval(self, packet):
        g = GridFunction.from_function(packet, [(-8.0, 8.0)] * 2, 128)
        assert g.parseval_defect() < 1e-10

    def test_fourier_matches_closed_form(self, packet):
        g = GridFunction.from_function(packet, [(-10.0, 10.0)] * 2, 256)
        ghat = g.fourier()
        mesh = np.stack(np.meshgrid(*ghat.axes, indexing="ij"), axis=-1)
        exact = packet.eval_momentum(mesh)
        assert float(np.max(np.abs(ghat.values - exact))) < 1e-9

    def test_multi_slot_transform_matches_closed_form(self):
        # each slot carries its own time axis, so the kernel sign pattern
        # must repeat per slot rather than once for the whole grid
        f1 = GaussianPacket(center=(0.2, -0.3), widths=(0.7, 0.8), carrier=(0.4, -0.2))
        f2 = GaussianPacket(center=(0.0, 0.4), widths=(0.8, 0.7), carrier=(-0.3, 0.2))
        pair = SlotProduct((f1, f2))
        g = GridFunction.from_function(pair, [(-6.0, 6.0)] * 4, 40, slot_dim=2)
        ghat = g.fourier()
        assert ghat.slot_dim == 2
        mesh = np.stack(np.meshgrid(*ghat.axes, indexing="ij"), axis=-1)
        exact = pair.eval_momentum(mesh)
        scale = float(np.max(np.abs(exact)))
        assert float(np.max(np.abs(ghat.values - exact))) < 1e-8 * scale

    def test_slot_dim_must_divide_axes(self):
        with pytest.raises(ValueError, match="slot_dim"):
            GridFunction([np.arange(4.0), np.arange(4.0), np.arange(4.0)], np.zeros((4, 4, 4)), slot_dim=2)

    def test_integrate_gaussian(self):
        f = GaussianPacket(center=(0.0, 0.0), widths=(0.6, 0.8), carrier=(0.0, 0.0))
        g = GridFunction.from_function(f, [(-7.0, 7.0)] * 2, 96)
        exact = 2.0 * math.pi * 0.6 * 0.8
        assert complex(g.integrate()) == pytest.approx(exact, rel=1e-10)

    def test_boundary_guard(self):
        wide = GaussianPacket(center=(0.0, 0.0), widths=(3.0, 3.0), carrier=(0.0, 0.0))
        g = GridFunction.from_function(wide, [(-6.0, 6.0)] * 2, 64)
        with pytest.raises(ValueError):
            g.fourier()

    def test_save_load_roundtrip(self, packet, tmp_path):
        g = GridFunction.from_function(packet, [(-8.0, 8.0)] * 2, 64)
        g.save(tmp_path / "grid.npz")
        back = GridFunction.load(tmp_path / "grid.npz")
        np.testing.assert_array_equal(back.values, g.values)
        np.testing.assert_array_equal(back.axes[0], g.axes[0])


class TestGsNorm:
    def test_gaussian_beats_subquadratic_weights(self, packet):
        est = gs_norm(packet, rho=1.5, a=2.0)
        assert est.finite
        assert est.value > 0.0

    def test_quadratic_weight_divergence_threshold(self):
        f = GaussianPacket(center=(0.0, 0.0), widths=(1.0, 1.0), carrier=(0.0, 0.0))
        # e^{a x^2} against e^{-x^2/2}: finite only for a < 1/2
        assert gs_norm(f, rho=2.0, a=0.4).finite
        assert not gs_norm(f, rho=2.0, a=0.6).finite

    def test_monotone_in_weight(self, packet):
        lo = gs_norm(packet, rho=1.0, a=0.5).value
        hi = gs_norm(packet, rho=1.0, a=1.0).value
        assert hi >= lo

    def test_derivative_orders_grow(self, packet):
        v0 = gs_norm(packet, rho=1.0, a=0.2, order=0).value
        v2 = gs_norm(packet, rho=1.0, a=0.2, order=2).value
        assert v2 >= v0


@hyp.settings(max_examples=60, deadline=None)
@hyp.given(rho=st.floats(1.05, 4.0), a=st.floats(0.05, 5.0))
def test_duality_is_an_involution(rho, a):
    r1, a1 = duality_parameters(rho, a)
    r2, a2 = duality_parameters(r1, a1)
    assert r2 == pytest.approx(rho, rel=1e-9)
    assert a2 == pytest.approx(a, rel=1e-9)


def test_duality_pairs_conjugate_exponents():
    r1, _ = duality_parameters(2.0, 0.25)
    assert r1 == pytest.approx(2.0)
    r1, _ = duality_parameters(4.0, 1.0)
    assert r1 == pytest.approx(4.0 / 3.0)
