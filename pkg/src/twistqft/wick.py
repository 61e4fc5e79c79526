"""Free massive scalar field: on-shell measure, smeared correlators, pairings.

The two-point function is represented by quadrature over the mass shell,

    W(f, g) = integral dmu(k) fhat(-k_plus) ghat(k_plus),
    dmu = d^{d-1}k / ((2 pi)^{d-1} 2 omega_k),   k_plus = (omega_k, k),

with the transform convention of funcspace.  Higher correlators are sums
over Wick pairings; each pairing contributes the product of its pair
amplitudes times an optional twist phase.  The phase factorizes exactly
into pairwise node couplings

    E_ab = exp(-(i/2) k_a Theta_ab k_b),

where Theta_ab accumulates the slot tags with the slot-momentum signs
(p = -k_plus at the earlier slot of a pair, +k_plus at the later), so an
m-pair integral is a contraction of m amplitude vectors against (m choose 2)
unimodular kernels and never forms the full tensor-product integrand.

Slot-momentum sign convention guards (positivity of W(conj f, f), spacelike
commutativity, deformed == undeformed at n=2) run in the test suite.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from itertools import combinations

import numpy as np

from .funcspace import SlotProduct, translate
from .geometry import is_spacelike
from .star import TwistTagList


class TailMassWarning(UserWarning):
    """Raised-as-warning when the quadrature cutoff truncates visible mass."""


def omega(k, m: float):
    """On-shell energy sqrt(k^2 + m^2); vector k summed over the last axis."""
    if m <= 0:
        raise ValueError("mass must be positive")
    k = np.asarray(k, dtype=float)
    k2 = np.sum(k**2, axis=-1) if k.ndim >= 2 else k**2
    return np.sqrt(k2 + m**2)


@dataclass(frozen=True)
class FreeFieldSpec:
    """Mass and dimension of the free scalar; the mass gap equals mass."""

    mass: float
    d: int = 2

    def __post_init__(self):
        if self.mass <= 0:
            raise ValueError("mass must be positive")
        if self.d not in (2, 4):
            raise ValueError("dimension must be 2 or 4")

    def omega(self, k):
        return omega(k, self.mass)


@dataclass(frozen=True, eq=False)
class OnShellQuadrature:
    """Discretization of the on-shell measure on spatial momenta |k| <= cutoff.

    weights include the full measure factor 1/((2 pi)^{d-1} 2 omega), so
    sum(weights * values) approximates the dmu integral directly.  The
    construction parameters are kept so refine() can rebuild the rule at a
    different density or cutoff for self-convergence estimates.
    """

    mass: float
    cutoff: float
    nodes: np.ndarray
    weights: np.ndarray
    rule: str
    panels: int
    gl_order: int
    d: int = 2

    def __post_init__(self):
        if np.any(self.weights <= 0):
            raise ValueError("weights must be positive")
        if np.any(self.omega() < self.mass - 1e-12):
            raise ValueError("on-shell energy below the mass")

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    def omega(self):
        return omega(self.nodes, self.mass)

    def on_shell(self):
        """Positive-energy vectors k_plus = (omega, k), shape (n_nodes, d)."""
        w = self.omega()
        k = self.nodes if self.nodes.ndim == 2 else self.nodes[:, None]
        return np.concatenate([w[:, None], k], axis=1)

    @classmethod
    def composite_gl(
        cls, mass: float, cutoff: float, panels: int, gl_order: int = 12, d: int = 2
    ) -> "OnShellQuadrature":
        if cutoff <= 0 or panels < 1 or gl_order < 2:
            raise ValueError("need cutoff > 0, panels >= 1, gl_order >= 2")
        x, w = np.polynomial.legendre.leggauss(gl_order)
        edges = np.linspace(-cutoff, cutoff, panels + 1)
        half = 0.5 * (edges[1] - edges[0])
        mids = 0.5 * (edges[:-1] + edges[1:])
        k1 = (mids[:, None] + half * x[None, :]).reshape(-1)
        w1 = np.broadcast_to(half * w[None, :], (panels, gl_order)).reshape(-1)
        if d == 2:
            nodes, wq = k1, w1
        elif d == 4:
            kx, ky, kz = np.meshgrid(k1, k1, k1, indexing="ij")
            nodes = np.stack([kx, ky, kz], axis=-1).reshape(-1, 3)
            wq = (w1[:, None, None] * w1[None, :, None] * w1[None, None, :]).reshape(-1)
        else:
            raise ValueError("dimension must be 2 or 4")
        meas = wq / ((2.0 * math.pi) ** (d - 1) * 2.0 * omega(nodes, mass))
        return cls(mass, cutoff, nodes, meas, "composite-gl", panels, gl_order, d)

    @classmethod
    def trapezoid(cls, mass: float, cutoff: float, n: int, d: int = 2) -> "OnShellQuadrature":
        """Uniform-step referee rule; d=2 only."""
        if d != 2:
            raise ValueError("trapezoid rule implemented for d=2")
        if n < 3:
            raise ValueError("need at least 3 nodes")
        nodes = np.linspace(-cutoff, cutoff, n)
        wq = np.full(n, nodes[1] - nodes[0])
        wq[0] *= 0.5
        wq[-1] *= 0.5
        meas = wq / (2.0 * math.pi * 2.0 * omega(nodes, mass))
        return cls(mass, cutoff, nodes, meas, "trapezoid", n - 1, 1, d)

    def refine(self, factor: float = 2.0, cutoff_factor: float = 1.0) -> "OnShellQuadrature":
        """Same rule family at panel density x factor and cutoff x cutoff_factor."""
        panels = max(1, round(self.panels * factor))
        if panels == self.panels and factor != 1.0:
            panels += 1 if factor > 1.0 else -1
            panels = max(1, panels)
        cutoff = self.cutoff * cutoff_factor
        if self.rule == "trapezoid":
            return OnShellQuadrature.trapezoid(self.mass, cutoff, panels + 1, self.d)
        return OnShellQuadrature.composite_gl(self.mass, cutoff, panels, self.gl_order, self.d)

    def to_json(self) -> dict:
        return {
            "rule": self.rule,
            "mass": self.mass,
            "cutoff": self.cutoff,
            "panels": self.panels,
            "gl_order": self.gl_order,
            "d": self.d,
        }

    @classmethod
    def from_json(cls, data: dict) -> "OnShellQuadrature":
        if data["rule"] == "trapezoid":
            return cls.trapezoid(data["mass"], data["cutoff"], data["panels"] + 1, data["d"])
        return cls.composite_gl(
            data["mass"], data["cutoff"], data["panels"], data["gl_order"], data["d"]
        )


def pair_amplitude(f, g, quad: OnShellQuadrature):
    """Node amplitudes weight * fhat(-k_plus) * ghat(k_plus) of one contraction."""
    kp = quad.on_shell()
    return quad.weights * f.eval_momentum(-kp) * g.eval_momentum(kp)


def _tail_mass(f, g, quad: OnShellQuadrature, probes: int = 48) -> float:
    """Crude integral of |fhat ghat| dmu over cutoff < |k| < 3 cutoff."""
    if quad.d != 2:
        ks = np.linspace(quad.cutoff, 3.0 * quad.cutoff, probes)
        zeros = np.zeros_like(ks)
        total = 0.0
        for axis in range(3):
            cols = [zeros, zeros, zeros]
            cols[axis] = ks
            nodes = np.stack(cols, axis=-1)
            w = omega(nodes, quad.mass)
            kp = np.concatenate([w[:, None], nodes], axis=1)
            dens = np.abs(f.eval_momentum(-kp) * g.eval_momentum(kp))
            # pessimistic shell estimate: treat the axis profile as radial
            rad = dens * 4.0 * math.pi * ks**2 / ((2.0 * math.pi) ** 3 * 2.0 * w)
            total = max(total, float(np.trapezoid(rad, ks)))
        return total
    total = 0.0
    for sign in (-1.0, 1.0):
        ks = sign * np.linspace(quad.cutoff, 3.0 * quad.cutoff, probes)
        w = omega(ks, quad.mass)
        kp = np.stack([w, ks], axis=-1)
        dens = np.abs(f.eval_momentum(-kp) * g.eval_momentum(kp)) / (2.0 * math.pi * 2.0 * w)
        total += abs(float(np.trapezoid(dens, ks)))
    return total


def two_point_smeared(f, g, quad: OnShellQuadrature, tail_tol: float = 1e-8) -> complex:
    """Smeared two-point value sum_k weight * fhat(-k_plus) ghat(k_plus).

    Reports (as TailMassWarning) when the estimated integrand mass beyond
    the cutoff exceeds tail_tol relative to the retained absolute mass.
    """
    amp = pair_amplitude(f, g, quad)
    scale = float(np.sum(np.abs(amp)))
    tail = _tail_mass(f, g, quad)
    if tail > tail_tol * max(scale, 1e-300):
        warnings.warn(
            f"cutoff {quad.cutoff} truncates relative tail mass {tail / max(scale, 1e-300):.2e}",
            TailMassWarning,
            stacklevel=2,
        )
    return complex(_tree_sum(amp))


@dataclass(frozen=True)
class WickPairing:
    """Perfect matching of {0..n-1}; each pair (i, j) stored with i < j."""

    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        seen = [s for p in self.pairs for s in p]
        if sorted(seen) != list(range(2 * len(self.pairs))):
            raise ValueError("pairs must cover every slot exactly once")
        if any(i >= j for i, j in self.pairs):
            raise ValueError("pairs must be stored (i, j) with i < j")

    @property
    def n(self) -> int:
        return 2 * len(self.pairs)


def enumerate_pairings(n: int) -> list[WickPairing]:
    """All (n-1)!! matchings in lexicographic order; odd n has none."""
    if n > 8:
        raise ValueError("pairings enumerated for n <= 8")
    if n % 2 == 1:
        return []
    if n == 0:
        return [WickPairing(())]

    def rec(free: tuple[int, ...]):
        if not free:
            yield ()
            return
        head, rest = free[0], free[1:]
        for pos, partner in enumerate(rest):
            for tail in rec(rest[:pos] + rest[pos + 1 :]):
                yield ((head, partner),) + tail

    return [WickPairing(p) for p in rec(tuple(range(n)))]


def _tree_sum(values):
    """Deterministic balanced pairwise sum (fixed association order)."""
    vals = list(np.asarray(values).ravel()) if isinstance(values, np.ndarray) else list(values)
    if not vals:
        return 0.0
    while len(vals) > 1:
        nxt = [vals[i] + vals[i + 1] for i in range(0, len(vals) - 1, 2)]
        if len(vals) % 2:
            nxt.append(vals[-1])
        vals = nxt
    return vals[0]


def pairing_couplings(phase, pairing: WickPairing) -> dict[tuple[int, int], np.ndarray]:
    """Accumulated antisymmetric coupling Theta_ab between pairing variables.

    phase is any slot-pair multiplier exposing slot_coupling(j, k) for j < k
    (TwistTagList, BlockTwist).  Variable a carries momentum k_a entering
    slot i_a with sign -1 and slot j_a with sign +1.  Collecting the
    exponent sum_{j<k} p_j C_jk p_k over slot pairs and rewriting every term
    as k_a (...) k_b with a < b flips the sign of the terms whose earlier
    slot sits in the later variable; same-variable terms vanish by
    antisymmetry of the coupling matrices.
    """
    d = phase.d
    out: dict[tuple[int, int], np.ndarray] = {}
    signs = {}
    for i, j in pairing.pairs:
        signs[i], signs[j] = -1.0, 1.0
    for a, b in combinations(range(len(pairing.pairs)), 2):
        acc = np.zeros((d, d))
        for x in pairing.pairs[a]:
            for y in pairing.pairs[b]:
                if x < y:
                    acc += signs[x] * signs[y] * phase.slot_coupling(x, y)
                else:
                    acc -= signs[x] * signs[y] * phase.slot_coupling(y, x)
        if np.any(acc != 0.0):
            out[(a, b)] = acc
    return out


def _coupling_kernel(theta_mat: np.ndarray, ka: np.ndarray, kb: np.ndarray) -> np.ndarray:
    """Unimodular kernel exp(-(i/2) ka theta kb) on all node pairs."""
    d = theta_mat.shape[0]
    low = np.ones(d)
    low[1:] = -1.0
    x = (ka * low) @ theta_mat @ (kb * low).T
    return np.exp(-0.5j * x)


def pairing_value(
    fs,
    pairing: WickPairing,
    quad: OnShellQuadrature,
    tags=None,
    _channels=None,
) -> complex:
    """One pairing's contribution, contracted through the pairwise kernels."""
    m = len(pairing.pairs)
    if _channels is None:
        amps = [pair_amplitude(fs[i], fs[j], quad) for i, j in pairing.pairs]
    else:
        amps = [_channels[i, j] for i, j in pairing.pairs]
    if tags is None:
        couplings = {}
    else:
        couplings = pairing_couplings(tags, pairing)
    if not couplings:
        return complex(np.prod([_tree_sum(a) for a in amps]))
    kp = quad.on_shell()
    kern = {ab: _coupling_kernel(mat, kp, kp) for ab, mat in couplings.items()}
    if m == 2:
        return complex(amps[0] @ kern[(0, 1)] @ amps[1])
    if m == 3:
        ones = np.ones((quad.n_nodes, quad.n_nodes))
        e01 = kern.get((0, 1), ones)
        e02 = kern.get((0, 2), ones)
        e12 = kern.get((1, 2), ones)
        inner = e01 @ (amps[1][:, None] * e12)
        return complex(amps[0] @ (e02 * inner) @ amps[2])
    ones = np.ones((quad.n_nodes, quad.n_nodes))
    ops = [amps[0], amps[1], amps[2], amps[3]]
    kmats = [kern.get(ab, ones) for ab in ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))]
    return complex(
        np.einsum(
            "a,b,c,e,ab,ac,ae,bc,be,ce->",
            *ops,
            *kmats,
            optimize=True,
        )
    )


def npoint_smeared(fs, quad: OnShellQuadrature, phase: TwistTagList | None = None) -> complex:
    """Sum over Wick pairings of the (optionally twisted) pair contractions.

    Slot momenta are p = -k_plus at the earlier slot of each pair and
    +k_plus at the later, so total momentum vanishes identically and the
    phase enters only through the pairwise couplings.
    """
    n = len(fs)
    if n % 2 == 1:
        return 0.0 + 0.0j
    if n > 8:
        raise ValueError("n-point evaluation limited to n <= 8")
    if quad.d != 2 and n > 2:
        raise ValueError("n >= 4 requires d = 2")
    if phase is not None and phase.n_slots != n:
        raise ValueError("phase tag count must match slot count")
    # one on-shell transform per slot and sign; every pairing reuses them
    kp = quad.on_shell()
    minus = [f.eval_momentum(-kp) for f in fs]
    plus = [f.eval_momentum(kp) for f in fs]
    channels = {}
    for i in range(n):
        for j in range(n):
            if i != j:
                channels[i, j] = quad.weights * minus[i] * plus[j]
    vals = [pairing_value(fs, p, quad, phase, _channels=channels) for p in enumerate_pairings(n)]
    return complex(_tree_sum(vals))


def _two_slots(h):
    if isinstance(h, SlotProduct):
        if len(h.slots) != 2:
            raise ValueError("need a 2-slot product")
        return h.slots
    if len(h) != 2:
        raise ValueError("need a 2-slot product")
    return tuple(h)


def connected_four_point_defect(
    f,
    g,
    a,
    lam: float,
    quad: OnShellQuadrature,
    tags: TwistTagList | None = None,
) -> complex:
    """Four-point value with the second pair translated by lam*a, minus the
    product of the two two-point values.

    For the free field the truncated four-point vanishes, so this defect is
    exactly the sum of the two crossed pairings; for spacelike a it decays
    exponentially in lam at the mass-gap rate.  The direct pairing's
    coupling cancels (signs (-+)(-+) sum to zero), so the subtracted product
    needs no twist correction.
    """
    if not is_spacelike(a, np.zeros(len(a))):
        raise ValueError("translation direction must be spacelike")
    f1, f2 = _two_slots(f)
    g1, g2 = _two_slots(g)
    g1t, g2t = translate(g1, a, lam), translate(g2, a, lam)
    full = npoint_smeared([f1, f2, g1t, g2t], quad, phase=tags)
    prod = two_point_smeared(f1, f2, quad) * two_point_smeared(g1t, g2t, quad)
    return full - prod
