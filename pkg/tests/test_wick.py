"""On-shell measure, Wick pairings, and free-field correlators."""

import warnings

import numpy as np
import pytest

from twistqft.funcspace import BumpFunction, GaussianPacket
from twistqft.geometry import make_reference_theta
from twistqft.star import TwistTagList, twist_phase
from twistqft.wick import (
    FreeFieldSpec,
    OnShellQuadrature,
    TailMassWarning,
    WickPairing,
    connected_four_point_defect,
    enumerate_pairings,
    npoint_smeared,
    omega,
    pair_amplitude,
    pairing_couplings,
    pairing_value,
    two_point_smeared,
)

# independently derived expectation for the smeared two-point function:
# a 4-dim position-space Gauss-Legendre integral (48 nodes per axis, span
# 6 widths) of f(x) g(y) K0(m sqrt(-(x-y)^2)) / (2 pi), with both packets
# real, widths (0.3, 0.4), centered at (0, -5) and (0, +5) so every node
# pair is spacelike.  The value is limited by that integral's own
# truncation near 3e-8 relative.
ORACLE_PACKET_F = GaussianPacket(center=(0.0, -5.0), widths=(0.3, 0.4), carrier=(0.0, 0.0))
ORACLE_PACKET_G = GaussianPacket(center=(0.0, 5.0), widths=(0.3, 0.4), carrier=(0.0, 0.0))
ORACLE_TWO_POINT = 1.939592563487874e-06


def test_omega_scalar_and_batch():
    assert omega(0.0, 2.0) == pytest.approx(2.0)
    assert omega(3.0, 4.0) == pytest.approx(5.0)
    k = np.array([[3.0], [0.0]])
    np.testing.assert_allclose(omega(k, 4.0), [5.0, 4.0])


def test_omega_rejects_nonpositive_mass():
    with pytest.raises(ValueError):
        omega(1.0, 0.0)


def test_free_field_spec_validation():
    spec = FreeFieldSpec(mass=1.0)
    assert spec.omega(0.0) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        FreeFieldSpec(mass=-1.0)
    with pytest.raises(ValueError):
        FreeFieldSpec(mass=1.0, d=3)


class TestOnShellQuadrature:
    def test_nodes_on_hyperboloid(self, quad_m1):
        kp = quad_m1.on_shell()
        np.testing.assert_allclose(kp[:, 0], omega(kp[:, 1:], 1.0), rtol=1e-12)
        assert np.all(quad_m1.weights > 0.0)

    def test_refine_changes_panel_count(self, quad_m1):
        finer = quad_m1.refine(2.0)
        assert finer.panels == 2 * quad_m1.panels
        nudged = quad_m1.refine(1.0000001)
        assert nudged.panels != quad_m1.panels

    def test_json_roundtrip(self, quad_m1):
        back = OnShellQuadrature.from_json(quad_m1.to_json())
        np.testing.assert_array_equal(back.nodes, quad_m1.nodes)
        np.testing.assert_array_equal(back.weights, quad_m1.weights)

    def test_trapezoid_rule(self):
        q = OnShellQuadrature.trapezoid(mass=1.0, cutoff=10.0, n=101)
        assert q.n_nodes == 101
        assert q.rule == "trapezoid"

    def test_measure_normalization(self):
        # integral dk/(2 pi 2 omega) e^{-k^2} has no closed form needed:
        # compare composite rule against a refined one
        q1 = OnShellQuadrature.composite_gl(mass=1.0, cutoff=12.0, panels=24)
        q2 = q1.refine(3.0)
        f = np.exp(-(q1.nodes**2))
        f2 = np.exp(-(q2.nodes**2))
        v1 = float(np.sum(q1.weights * f))
        v2 = float(np.sum(q2.weights * f2))
        assert v1 == pytest.approx(v2, rel=1e-12)


class TestTwoPoint:
    def test_matches_position_space_oracle(self, quad_m1):
        val = two_point_smeared(ORACLE_PACKET_F, ORACLE_PACKET_G, quad_m1)
        assert abs(val - ORACLE_TWO_POINT) / ORACLE_TWO_POINT < 1e-7
        # both packets are real, so the value is real up to the roundoff
        # of the oscillatory node sum (absolute, not relative: the real
        # part itself survives near-complete phase cancellation)
        assert abs(val.imag) < 1e-15

    def test_self_convergence(self, packets, quad_m1):
        f, g = packets[0], packets[1]
        v1 = two_point_smeared(f, g, quad_m1)
        v2 = two_point_smeared(f, g, quad_m1.refine(2.0))
        assert abs(v1 - v2) < 1e-9 * max(abs(v1), 1.0)

    def test_hermiticity(self, packets, quad_m1):
        f, g = packets[0], packets[1]
        lhs = two_point_smeared(f, g, quad_m1)
        rhs = two_point_smeared(g.conjugate(), f.conjugate(), quad_m1)
        assert lhs == pytest.approx(np.conj(rhs), rel=1e-12)

    def test_positive_on_diagonal(self, packets, quad_m1):
        f = packets[0]
        val = two_point_smeared(f.conjugate(), f, quad_m1)
        assert val.real > 0.0
        assert abs(val.imag) <= 1e-15 * val.real

    def test_gram_positivity(self, packets, quad_m1):
        gram = np.array(
            [
                [two_point_smeared(fi.conjugate(), fj, quad_m1) for fj in packets]
                for fi in packets
            ]
        )
        np.testing.assert_allclose(gram, gram.conj().T, atol=1e-18)
        eigs = np.linalg.eigvalsh(gram)
        assert eigs.min() >= -1e-10 * np.trace(gram).real

    def test_tail_warning_on_narrow_cutoff(self):
        # widths 0.3 put transform mass out to |k| ~ 20; cutoff 4 clips it
        f = ORACLE_PACKET_F
        g = ORACLE_PACKET_G
        q = OnShellQuadrature.composite_gl(mass=1.0, cutoff=4.0, panels=16)
        with pytest.warns(TailMassWarning):
            two_point_smeared(f, g, q)

    def test_d4_smoke(self):
        f = GaussianPacket(center=(0.0, -2.0, 0.0, 0.0), widths=(0.8,) * 4, carrier=(0.0,) * 4)
        g = GaussianPacket(center=(0.0, 2.0, 0.0, 0.0), widths=(0.8,) * 4, carrier=(0.0,) * 4)
        q = OnShellQuadrature.composite_gl(mass=1.0, cutoff=7.0, panels=10, d=4)
        val = two_point_smeared(f, g, q)
        ref = two_point_smeared(f, g, q.refine(1.6))
        assert val == pytest.approx(ref, rel=1e-6)


class TestPairings:
    def test_counts(self):
        assert len(enumerate_pairings(2)) == 1
        assert len(enumerate_pairings(4)) == 3
        assert len(enumerate_pairings(6)) == 15

    def test_odd_is_empty(self):
        assert enumerate_pairings(3) == []

    def test_zero_slots(self):
        assert enumerate_pairings(0) == [WickPairing(())]

    def test_structure(self):
        for pairing in enumerate_pairings(6):
            slots = sorted(s for pair in pairing.pairs for s in pair)
            assert slots == list(range(6))
            assert all(i < j for i, j in pairing.pairs)

    def test_limit(self):
        with pytest.raises(ValueError):
            enumerate_pairings(10)

    def test_invalid_pairing_rejected(self):
        with pytest.raises(ValueError):
            WickPairing(((1, 0),))
        with pytest.raises(ValueError):
            WickPairing(((0, 1), (1, 2)))


def test_pairing_couplings_reproduce_nested_phase(rng):
    """Dual route: accumulated pair couplings vs the nested tag multiplier.

    Assign each pairing variable a random momentum, realize the slot
    momenta (-k at the earlier slot, +k at the later), and compare the
    product of pairwise coupling phases against twist_phase on the full
    slot array.
    """
    th = make_reference_theta(0.9)
    tags = TwistTagList((th, -th, th.scaled(0.4), -th.scaled(2.0), th, -th))
    for pairing in enumerate_pairings(6):
        k = rng.normal(size=(len(pairing.pairs), 2))
        slot_p = np.zeros((6, 2))
        for a, (i, j) in enumerate(pairing.pairs):
            slot_p[i] = -k[a]
            slot_p[j] = +k[a]
        expected = twist_phase(tags.tags, slot_p)
        acc = 0.0
        for (a, b), mat in pairing_couplings(tags, pairing).items():
            low = np.ones(2)
            low[1:] = -1.0
            acc = acc + (k[a] * low) @ mat @ (k[b] * low)
        np.testing.assert_allclose(np.exp(-0.5j * acc), expected, atol=5e-13)


def test_commutator_tags_couple_only_the_tagged_contraction(theta1):
    # tags (0, theta, -theta, 0): pairings that contract each tagged slot
    # with an untagged one cancel; contracting the tagged slots against
    # each other leaves twice the tag between the two variables
    tags = TwistTagList.commutator(theta1, 1, 1)
    assert pairing_couplings(tags, WickPairing(((0, 1), (2, 3)))) == {}
    assert pairing_couplings(tags, WickPairing(((0, 2), (1, 3)))) == {}
    crossed = pairing_couplings(tags, WickPairing(((0, 3), (1, 2))))
    assert set(crossed) == {(0, 1)}
    np.testing.assert_allclose(crossed[0, 1], 2.0 * theta1.matrix)


class TestNPoint:
    def test_two_slot_matches_two_point(self, packets, quad_m1):
        f, g = packets[0], packets[1]
        lhs = npoint_smeared([f, g], quad_m1)
        assert lhs == pytest.approx(two_point_smeared(f, g, quad_m1), rel=1e-12)

    def test_four_point_wick_sum(self, packets, quad_m1):
        """Undeformed 4-point vs the pairing sum built from two-points."""
        fs = list(packets)
        lhs = npoint_smeared(fs, quad_m1)
        total = 0.0 + 0.0j
        for pairing in enumerate_pairings(4):
            term = 1.0 + 0.0j
            for i, j in pairing.pairs:
                term *= two_point_smeared(fs[i], fs[j], quad_m1)
            total += term
        assert lhs == pytest.approx(total, rel=1e-10)

    def test_odd_vanishes(self, packets, quad_m1):
        assert npoint_smeared(list(packets[:3]), quad_m1) == 0.0 + 0.0j

    def test_phase_slot_mismatch(self, packets, quad_m1, theta1):
        with pytest.raises(ValueError):
            npoint_smeared(list(packets), quad_m1, phase=TwistTagList.uniform(theta1, 2))

    def test_deformed_differs_from_plain(self, packets, quad_m1, theta1):
        fs = list(packets)
        plain = npoint_smeared(fs, quad_m1)
        twisted = npoint_smeared(fs, quad_m1, phase=TwistTagList.uniform(theta1, 4))
        assert abs(plain - twisted) > 1e-6 * abs(plain)

    def test_zero_tags_match_plain(self, packets, quad_m1):
        fs = list(packets)
        base = npoint_smeared(fs, quad_m1)
        tagged = npoint_smeared(fs, quad_m1, phase=TwistTagList.zero(2, 4))
        assert tagged == pytest.approx(base, rel=1e-12)


def test_pairing_value_channel_consistency(packets, quad_m1, theta1):
    # explicit amplitudes and precomputed channels must agree
    fs = list(packets)
    tags = TwistTagList.uniform(theta1, 4)
    pairing = enumerate_pairings(4)[1]
    channels = {
        (i, j): pair_amplitude(fs[i], fs[j], quad_m1)
        for i in range(4)
        for j in range(4)
        if i != j
    }
    direct = pairing_value(fs, pairing, quad_m1, tags)
    channeled = pairing_value(fs, pairing, quad_m1, tags, _channels=channels)
    assert direct == pytest.approx(channeled, rel=1e-12)


class TestConnectedFourPoint:
    def test_rejects_timelike_direction(self, packets, quad_m1):
        with pytest.raises(ValueError):
            connected_four_point_defect(
                (packets[0], packets[1]), (packets[2], packets[3]), [1.0, 0.0], 3.0, quad_m1
            )

    def test_decays_with_separation(self, packets, quad_m1):
        pair_f = (packets[0], packets[1])
        pair_g = (packets[2], packets[3])
        near = abs(connected_four_point_defect(pair_f, pair_g, [0.0, 1.0], 2.0, quad_m1))
        far = abs(connected_four_point_defect(pair_f, pair_g, [0.0, 1.0], 5.0, quad_m1))
        assert far < near / 50.0


def test_spacelike_bump_commutator_below_quadrature_floor():
    f = BumpFunction(center=(0.0, -2.0), radius=0.5, order=1)
    g = BumpFunction(center=(0.0, 2.0), radius=0.5, order=1)
    quad = OnShellQuadrature.composite_gl(mass=1.0, cutoff=30.0, panels=70)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TailMassWarning)
        u = two_point_smeared(f, g, quad) - two_point_smeared(g, f, quad)
        lo = quad.refine(0.7, 1.0 / 1.2)
        u_lo = two_point_smeared(f, g, lo) - two_point_smeared(g, f, lo)
    eps = abs(u - u_lo) + 1e-14
    assert abs(u) <= max(eps, 1e-12)
