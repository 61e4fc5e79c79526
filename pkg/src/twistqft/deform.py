"""Deformed correlators and the smeared (anti)commutator matrix element.

A matrix element ⟨bra vector, [phi_theta(f1), phi_{-theta}(f2)]_± ket vector⟩
is evaluated as the difference (or sum) of two deformed correlators on the
slot lists

    (bra*, f1, f2, ket)  with tags (0.., +theta, -theta, ..0)
    (bra*, f2, f1, ket)  with the two middle slots and tags transposed,

where bra* is the reversed, conjugated bra list.  Everything reduces to
wick.npoint_smeared; the operator order enters only through slot order.

Every matrix element carries a quadrature tolerance eps_quad obtained by
re-running both correlators on a coarser rule; statements like "the
commutator vanishes" are only meaningful relative to that tolerance and to
a same-configuration contrast value, and the experiment layer phrases them
that way.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from itertools import combinations

import numpy as np

from .geometry import ThetaMatrix
from .star import BlockTwist, TwistTagList
from .wick import OnShellQuadrature, enumerate_pairings, npoint_smeared, omega, pairing_couplings


def conjugate_reverse(h):
    """The bra list as it enters a correlator: reversed, pointwise conjugated."""
    return [f.conjugate() for f in reversed(list(h))]


def deformed_npoint(fs, tags: TwistTagList, quad: OnShellQuadrature) -> complex:
    """Deformed correlator: npoint_smeared with the nested twist multiplier."""
    return npoint_smeared(fs, quad, phase=tags)


def single_twist_defect(f_block, g_block, theta: ThetaMatrix, quad: OnShellQuadrature) -> float:
    """Defect of the single-twist identity w(f x_theta g) = w(f x g).

    The twist acts once, between the two blocks, with multiplier
    exp(-(i/2) P_f theta P_g); total momentum vanishes on the pairing
    shell, so the value must match the untwisted one to quadrature error.
    """
    fs = list(f_block) + list(g_block)
    twist = BlockTwist(theta, split=len(list(f_block)), n_slots=len(fs))
    plain = npoint_smeared(fs, quad)
    twisted = npoint_smeared(fs, quad, phase=twist)
    return abs(twisted - plain)


@dataclass(frozen=True)
class MatrixElementResult:
    """Value with its attached self-convergence tolerance."""

    value: complex
    eps_quad: float

    def __complex__(self) -> complex:
        return self.value

    def __abs__(self) -> float:
        return abs(self.value)


@dataclass(frozen=True)
class MatrixElementRequest:
    """One smeared (anti)commutator between state vectors.

    bra functions enter conjugate-reversed; left carries tag +theta and
    right carries right_sign * theta (-1 is the wedge-locality pairing,
    +1 probes the same-tag combination that stays noncommutative).
    tag_bra additionally tags every bra slot with +theta, for states built
    from deformed rather than undeformed fields.
    """

    bra: tuple
    left: object
    right: object
    ket: tuple
    sign: str
    theta: ThetaMatrix
    quad: OnShellQuadrature
    tag_bra: bool = False
    right_sign: float = -1.0

    def __post_init__(self):
        if self.sign not in ("commutator", "anticommutator"):
            raise ValueError("sign must be 'commutator' or 'anticommutator'")
        n = len(self.bra) + len(self.ket) + 2
        if n % 2 == 1 or n > 8:
            raise ValueError("total slot count must be even and at most 8")
        if self.right_sign not in (-1.0, 1.0):
            raise ValueError("right_sign must be -1 or +1")

    @property
    def n_slots(self) -> int:
        return len(self.bra) + len(self.ket) + 2

    def slot_functions(self) -> list:
        return [*conjugate_reverse(self.bra), self.left, self.right, *self.ket]

    def slot_tags(self) -> TwistTagList:
        z = ThetaMatrix.zero(self.theta.d)
        bra_tag = self.theta if self.tag_bra else z
        tags = (bra_tag,) * len(self.bra)
        tags += (self.theta, self.theta.scaled(self.right_sign))
        tags += (z,) * len(self.ket)
        return TwistTagList(tags)

    def to_json(self, names: dict) -> dict:
        """Serialize with functions referenced through the names mapping."""
        return {
            "bra": [names[id(f)] for f in self.bra],
            "left": names[id(self.left)],
            "right": names[id(self.right)],
            "ket": [names[id(f)] for f in self.ket],
            "sign": self.sign,
            "theta": self.theta.to_json(),
            "quad": self.quad.to_json(),
            "tag_bra": self.tag_bra,
            "right_sign": self.right_sign,
        }

    @classmethod
    def from_json(cls, data: dict, registry: dict) -> "MatrixElementRequest":
        return cls(
            bra=tuple(registry[n] for n in data["bra"]),
            left=registry[data["left"]],
            right=registry[data["right"]],
            ket=tuple(registry[n] for n in data["ket"]),
            sign=data["sign"],
            theta=ThetaMatrix.from_json(data["theta"]),
            quad=OnShellQuadrature.from_json(data["quad"]),
            tag_bra=data.get("tag_bra", False),
            right_sign=data.get("right_sign", -1.0),
        )


def commutator_matrix_element(req: MatrixElementRequest) -> MatrixElementResult:
    """Evaluate the request; the two orderings run concurrently.

    eps_quad sums the self-convergence defects of both orderings under a
    coarser rule (0.7x panel density, cutoff / 1.2), so cancellations in
    the difference never hide quadrature error.
    """
    fs_a = req.slot_functions()
    tags_a = req.slot_tags()
    m = len(req.bra)
    fs_b = list(fs_a)
    fs_b[m], fs_b[m + 1] = fs_b[m + 1], fs_b[m]
    tags_b = tags_a.transpose_pair(m)
    quad_lo = req.quad.refine(0.7, 1.0 / 1.2)

    jobs = [
        (fs_a, tags_a, req.quad),
        (fs_b, tags_b, req.quad),
        (fs_a, tags_a, quad_lo),
        (fs_b, tags_b, quad_lo),
    ]
    with ThreadPoolExecutor(max_workers=2) as pool:
        futures = [pool.submit(npoint_smeared, fs, q, phase=t) for fs, t, q in jobs]
        va, vb, va_lo, vb_lo = [f.result() for f in futures]

    comb = -1.0 if req.sign == "commutator" else 1.0
    value = va + comb * vb
    eps = abs(va - va_lo) + abs(vb - vb_lo)
    return MatrixElementResult(value=value, eps_quad=eps)


def plan_quadrature(
    fs,
    tags: TwistTagList,
    mass: float,
    tail_eps: float = 3e-5,
    rad_per_panel: float = 11.5,
    gl_order: int = 12,
    probe_cutoff: float = 64.0,
    safety: float = 1.15,
) -> OnShellQuadrature:
    """Size a shared composite rule for npoint_smeared(fs, ., tags).

    Cutoff: the largest momentum where any channel's on-shell product
    envelope |fhat_i(-k+) fhat_j(k+)| still exceeds tail_eps of its peak.
    Density: worst phase rate per unit node movement, from the functions'
    own oscillation rates plus the coupling kernels' rates |Theta_ab|
    (2K + m) / 2, maximized over pairings; a Gauss-Legendre panel then
    covers rad_per_panel radians.
    """
    if tags.d != 2:
        raise ValueError("quadrature planning implemented for d=2")
    n = len(fs)
    ks = np.linspace(0.0, probe_cutoff, 513)
    w = omega(ks, mass)
    kp = np.stack([w, ks], axis=-1)
    km = np.stack([w, -ks], axis=-1)
    env_minus = [np.maximum(np.abs(f.eval_momentum(-kp)), np.abs(f.eval_momentum(-km))) for f in fs]
    env_plus = [np.maximum(np.abs(f.eval_momentum(kp)), np.abs(f.eval_momentum(km))) for f in fs]

    cutoff = 6.0 / max(mass, 1e-6)
    for i, j in combinations(range(n), 2):
        prod = env_minus[i] * env_plus[j]
        peak = float(prod.max())
        if peak == 0.0:
            continue
        alive = np.nonzero(prod > tail_eps * peak)[0]
        if alive.size and alive[-1] == ks.size - 1:
            raise ValueError("channel envelope not resolved inside the probe cutoff")
        if alive.size:
            cutoff = max(cutoff, float(ks[alive[-1]]) * 1.05)

    rate_pos = 0.0
    for i, j in combinations(range(n), 2):
        rate_pos = max(rate_pos, fs[i].momentum_rate() + fs[j].momentum_rate())
    rate_coup = 0.0
    for pairing in enumerate_pairings(n):
        coup = pairing_couplings(tags, pairing)
        per_var = {}
        for (a, b), mat in coup.items():
            r = float(np.max(np.abs(mat))) * (2.0 * cutoff + mass) / 2.0
            per_var[a] = per_var.get(a, 0.0) + r
            per_var[b] = per_var.get(b, 0.0) + r
        if per_var:
            rate_coup = max(rate_coup, max(per_var.values()))

    total_rad = 2.0 * cutoff * (rate_pos + rate_coup + mass) * safety
    panels = max(8, math.ceil(total_rad / rad_per_panel))
    return OnShellQuadrature.composite_gl(mass, cutoff, panels, gl_order)
