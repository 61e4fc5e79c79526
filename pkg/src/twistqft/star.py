"""Deformed products of test functions and the momentum-space twist phases.

The n-slot twist multiplier is accumulated pairwise: slot j carries a tag
matrix theta_j and contributes exp(-(i/2) p_j theta_j (p_{j+1}+...+p_n)).
For equal tags this is the multiplier of the n-fold deformed product; a
(theta, -theta) pair on two adjacent slots with untagged spectators gives
the integrand of a deformed commutator.  Phases are always evaluated from
the strictly upper triangle of each tag, so exchanging two momenta inverts
the phase exactly.

The position-space product f *_theta g is computed two independent ways:

* a grid path: sample, FFT, then the direct double momentum sum arranged
  as a twisted convolution over total momentum (no kernel factorization,
  no series truncation), then inverse FFT;
* a point path: one momentum integral against g's transform with f
  evaluated at the shifted point x + theta q / 2.

The identity checks in this module deliberately pair routes that reduce
different slots analytically, so agreement is not a tautology.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .funcspace import GaussianPacket, GridFunction, axis_signs
from .geometry import ThetaMatrix

__all__ = [
    "TwistTagList",
    "twist_phase",
    "mixed_multiplier",
    "twisted_tensor",
    "star_product",
    "star_eval_points",
    "trace_defect",
    "exchange_defect",
    "associativity_defect",
    "PlateauWindow",
    "CoordinateFactor",
    "bracket_defect",
    "measure_support_shift",
]

MAX_GRID_SAMPLES = 2**26


@dataclass(frozen=True)
class TwistTagList:
    """Per-slot tag matrices defining an n-slot twist multiplier."""

    tags: tuple[ThetaMatrix, ...]

    def __post_init__(self):
        if not self.tags:
            raise ValueError("need at least one slot")
        if len({t.d for t in self.tags}) != 1:
            raise ValueError("all tags must share the same dimension")

    @property
    def n_slots(self) -> int:
        return len(self.tags)

    @property
    def d(self) -> int:
        return self.tags[0].d

    @classmethod
    def uniform(cls, theta: ThetaMatrix, n: int) -> "TwistTagList":
        """All slots tagged theta: the n-fold deformed product."""
        return cls(tags=(theta,) * n)

    @classmethod
    def zero(cls, d: int, n: int) -> "TwistTagList":
        return cls(tags=(ThetaMatrix.zero(d),) * n)

    @classmethod
    def commutator(cls, theta: ThetaMatrix, n_bra: int, n_ket: int) -> "TwistTagList":
        """Tags (0,...,0, theta, -theta, 0,...,0) around a deformed pair."""
        z = ThetaMatrix.zero(theta.d)
        return cls(tags=(z,) * n_bra + (theta, -theta) + (z,) * n_ket)

    def transpose_pair(self, j: int) -> "TwistTagList":
        """Swap the tags of slots j and j+1 (used with transposed functions)."""
        t = list(self.tags)
        t[j], t[j + 1] = t[j + 1], t[j]
        return TwistTagList(tags=tuple(t))

    def phase(self, momenta):
        """Multiplier at stacked momenta of shape (..., n_slots, d)."""
        return twist_phase(self.tags, momenta)

    def couplings(self) -> tuple[tuple[int, int, ThetaMatrix], ...]:
        """Pairwise expansion: phase = prod over (j,k) of exp(-(i/2) p_j theta_j p_k)."""
        out = []
        for j, t in enumerate(self.tags[:-1]):
            if t.is_zero:
                continue
            for k in range(j + 1, self.n_slots):
                out.append((j, k, t))
        return tuple(out)

    def slot_coupling(self, j: int, k: int):
        """Matrix coupling slots j < k; the nested multiplier uses the earlier tag."""
        return self.tags[j].matrix

    @property
    def max_entry(self) -> float:
        return max(t.max_entry() for t in self.tags)


@dataclass(frozen=True)
class BlockTwist:
    """Single twist between a leading block of `split` slots and the rest.

    Multiplier exp(-(i/2) P_front theta P_back) with P the block momentum
    sums; the pairwise expansion couples exactly the across-block slot pairs.
    """

    theta: ThetaMatrix
    split: int
    n_slots: int

    def __post_init__(self):
        if not (0 < self.split < self.n_slots):
            raise ValueError("split must cut the slots into two nonempty blocks")

    @property
    def d(self) -> int:
        return self.theta.d

    def slot_coupling(self, j: int, k: int):
        if j < self.split <= k:
            return self.theta.matrix
        return np.zeros((self.d, self.d))

    def phase(self, momenta):
        momenta = np.asarray(momenta, dtype=float)
        front = momenta[..., : self.split, :].sum(axis=-2)
        back = momenta[..., self.split :, :].sum(axis=-2)
        return np.exp(-0.5j * self.theta.bilinear(front, back))


def twist_phase(tags, momenta):
    """prod_{j<n} exp(-(i/2) p_j theta_j (p_{j+1} + ... + p_n)).

    ``momenta`` has shape (..., n, d); broadcasts over leading axes.
    """
    p = np.asarray(momenta, dtype=float)
    n = len(tags)
    if p.shape[-2] != n:
        raise ValueError(f"expected {n} momentum slots, got {p.shape[-2]}")
    expo = np.zeros(p.shape[:-2])
    suffix = np.zeros(p.shape[:-2] + (p.shape[-1],))
    for j in range(n - 1, 0, -1):
        suffix = suffix + p[..., j, :]
        if not tags[j - 1].is_zero:
            expo = expo + tags[j - 1].bilinear(p[..., j - 1, :], suffix)
    return np.exp(-0.5j * expo)


def mixed_multiplier(theta: ThetaMatrix, p1, p2, q_total):
    """exp(-(i/2)(p1 theta p2 + (p1 - p2) theta Q)).

    The multiplier carried by a (theta, -theta) slot pair in front of
    spectators with total momentum Q; the nested per-slot formula above
    must reproduce it exactly.
    """
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    q_total = np.asarray(q_total, dtype=float)
    expo = theta.bilinear(p1, p2) + theta.bilinear(p1 - p2, q_total)
    return np.exp(-0.5j * expo)


def _position_grid(f, box, samples) -> GridFunction:
    return GridFunction.from_function(f, box, samples)


def _factor_transform(f, box, samples, d: int) -> GridFunction:
    """Momentum grid of one tensor factor on R^{d n}.

    A GridFunction is taken as already materialized in position space; an
    analytic factor is sampled on its box first.
    """
    if isinstance(f, GridFunction):
        grid = f
        if grid.slot_dim != d:
            grid = GridFunction(
                grid.axes, grid.values, periodic_ok=grid.periodic_ok, slot_dim=d
            )
    else:
        grid = GridFunction.from_function(f, box, samples, slot_dim=d)
    return grid.fourier()


def _total_momentum(axes, d: int) -> np.ndarray:
    """Summed d-momentum over a factor's slots, on the factor's own grid."""
    shape = tuple(len(a) for a in axes)
    out = np.zeros(shape + (d,))
    for j, a in enumerate(axes):
        out[..., j % d] += a.reshape((1,) * j + (-1,) + (1,) * (len(axes) - j - 1))
    return out


def twisted_tensor(f, g, theta: ThetaMatrix, box_f=None, box_g=None, samples: int = 24) -> GridFunction:
    """Materialize (f tensor_theta g) on the joint position grid.

    Either factor may live on R^{d n} (a SlotProduct, or the grid output of
    a previous tensor application, which is what makes nesting possible);
    the multiplier couples the two factors' total momenta.  The joint
    sample count is capped.
    """
    d = theta.d
    F = _factor_transform(f, box_f, samples, d)
    G = _factor_transform(g, box_g, samples, d)
    if F.values.size * G.values.size > MAX_GRID_SAMPLES:
        raise ValueError(
            f"requested {F.values.size * G.values.size} samples exceeds the cap {MAX_GRID_SAMPLES}"
        )
    P = _total_momentum(F.axes, d)
    Q = _total_momentum(G.axes, d)
    dp = P.ndim - 1
    dq = Q.ndim - 1
    expo = theta.bilinear(
        P.reshape(P.shape[:-1] + (1,) * dq + (d,)),
        Q.reshape((1,) * dp + Q.shape),
    )
    vals = (
        F.values.reshape(F.values.shape + (1,) * dq)
        * G.values.reshape((1,) * dp + G.values.shape)
        * np.exp(-0.5j * expo)
    )
    # the output is an exact inverse DFT of the momentum-grid product, so
    # re-transforming it (nested applications) recovers that data losslessly;
    # mark it periodic so the forward transform's tail guard does not reject
    # the intentional periodization
    joint = GridFunction(
        F.axes + G.axes,
        vals,
        companion_axes=tuple(F.companion_axes) + tuple(G.companion_axes),
        periodic_ok=True,
        slot_dim=d,
    )
    return joint.inverse_fourier()


def _auto_box(f, g, theta: ThetaMatrix, pad: float = 6.0):
    lo = np.full(theta.d, np.inf)
    hi = np.full(theta.d, -np.inf)
    for func in (f, g):
        c = np.array(func.center)
        if func.support_radius() is not None:
            r = func.support_radius()
        else:
            r = 6.0 * max(func.widths)
        lo = np.minimum(lo, c - r)
        hi = np.maximum(hi, c + r)
    shift = 0.5 * theta.max_entry() * 12.0
    return [(float(l - pad - shift), float(h + pad + shift)) for l, h in zip(lo, hi)]


def star_product(f, g, theta: ThetaMatrix, box=None, samples: int = 96, band_tol: float = 1e-13) -> GridFunction:
    """f *_theta g on a position grid (d=2).

    Direct double momentum sum: for every pair of grid momenta (p, q) the
    term fhat(p) ghat(q) exp(-(i/2) p theta q) is accumulated into the bin
    s = p + q (a twisted convolution, using p theta p = 0), organized as one
    python-level loop over the momentum support of fhat with vectorized
    shifts of ghat.  No kernel factorization or series expansion in theta
    is involved.  Sums run in a fixed index order, so results are bitwise
    reproducible.
    """
    if theta.d != 2:
        raise ValueError("the grid star product is implemented for d=2")
    if box is None:
        box = _auto_box(f, g, theta)
    fp = f if isinstance(f, GridFunction) else _position_grid(f, box, samples)
    gp = g if isinstance(g, GridFunction) else _position_grid(g, box, samples)
    if theta.is_zero:
        # the multiplier is identically 1: the product is pointwise, and
        # skipping the transform roundtrip keeps the reduction exact
        for af, ag in zip(fp.axes, gp.axes):
            if len(af) != len(ag) or abs(af[0] - ag[0]) > 1e-12 or abs(af[1] - ag[1]) > 1e-12:
                raise ValueError("f and g must be sampled on the same grid")
        return GridFunction(
            fp.axes,
            fp.values * gp.values,
            companion_axes=fp.companion_axes,
            periodic_ok=fp.periodic_ok or gp.periodic_ok,
        )
    F = fp.fourier()
    G = gp.fourier()
    for af, ag in zip(F.axes, G.axes):
        if len(af) != len(ag) or abs(af[0] - ag[0]) > 1e-12 or abs(af[1] - ag[1]) > 1e-12:
            raise ValueError("f and g must be sampled on the same grid")

    fa = F.values
    ga = G.values
    n0, n1 = fa.shape
    mask_f = np.abs(fa) > band_tol * np.max(np.abs(fa))
    mask_g = np.abs(ga) > band_tol * np.max(np.abs(ga))
    # loop over whichever transform has the smaller support; for the f side
    # the multiplier is exp(-(i/2) p theta s), for the g side the same term
    # rewritten with p = s - q is exp(-(i/2) s theta q).
    loop_f = mask_f.sum() <= mask_g.sum()
    loop_vals, shift_vals = (fa, ga) if loop_f else (ga, fa)
    idx0, idx1 = np.nonzero(mask_f if loop_f else mask_g)
    z0, z1 = n0 // 2, n1 // 2
    out = np.zeros_like(fa)
    v = theta.entry(0, 1)
    ax0, ax1 = F.axes
    for a, b in zip(idx0.tolist(), idx1.tolist()):
        s0, s1 = a - z0, b - z1
        src0 = slice(max(0, -s0), min(n0, n0 - s0))
        dst0 = slice(max(0, s0), min(n0, n0 + s0))
        src1 = slice(max(0, -s1), min(n1, n1 - s1))
        dst1 = slice(max(0, s1), min(n1, n1 + s1))
        if loop_f:
            # exp(-(i/2) v (p^1 s^0 - p^0 s^1)) over the output grid
            e0 = np.exp(-0.5j * v * ax1[b] * ax0[dst0])
            e1 = np.exp(+0.5j * v * ax0[a] * ax1[dst1])
        else:
            # exp(-(i/2) v (s^1 q^0 - s^0 q^1)) over the output grid
            e0 = np.exp(+0.5j * v * ax1[b] * ax0[dst0])
            e1 = np.exp(-0.5j * v * ax0[a] * ax1[dst1])
        out[dst0, dst1] += loop_vals[a, b] * np.outer(e0, e1) * shift_vals[src0, src1]
    dp = math.prod(F.spacing)
    out *= dp / (2.0 * math.pi) ** 2
    chat = GridFunction(F.axes, out, companion_axes=F.companion_axes, periodic_ok=F.periodic_ok or G.periodic_ok)
    return chat.inverse_fourier()


def _momentum_nodes(g, n_nodes: int, qmax: float | None):
    from numpy.polynomial.legendre import leggauss

    if qmax is None:
        if hasattr(g, "widths"):
            qmax = float(max(np.abs(g.carrier)) + 8.0 / min(g.widths))
        elif g.support_radius() is not None:
            qmax = 40.0 / g.support_radius()
        else:
            raise ValueError("cannot infer a momentum box; pass qmax")
    xi, wi = leggauss(n_nodes)
    xi = xi * qmax
    wi = wi * qmax
    q = np.stack(np.meshgrid(xi, xi, indexing="ij"), axis=-1).reshape(-1, 2)
    w = np.outer(wi, wi).reshape(-1)
    return q, w


def star_eval_points(f, g, theta: ThetaMatrix, points, n_nodes: int = 80, qmax: float | None = None):
    """(f *_theta g)(x) by reducing the f slot analytically.

    Uses (f *_theta g)(x) = (2 pi)^{-d} integral dq ghat(q) exp(-i q.x)
    f(x + theta q / 2); only g's transform is integrated numerically, so
    this is independent of the grid path.
    """
    if theta.d != 2:
        raise ValueError("implemented for d=2")
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    q, w = _momentum_nodes(g, n_nodes, qmax)
    gq = g.eval_momentum(q) * w
    shift = 0.5 * theta.apply(q)
    signs = axis_signs(2)
    out = np.empty(len(pts), dtype=complex)
    for i, x in enumerate(pts):
        fx = f.eval(x[None, :] + shift)
        phase = np.exp(-1j * np.sum(signs * q * x[None, :], axis=-1))
        out[i] = np.sum(gq * fx * phase) / (2.0 * math.pi) ** 2
    return out if len(out) > 1 else out[0]


def trace_defect(f, g, theta: ThetaMatrix, box=None, samples: int = 96) -> float:
    """|integral(f *_theta g) - integral(f g)|; the trace property of the twist."""
    if box is None:
        box = _auto_box(f, g, theta)
    prod = star_product(f, g, theta, box=box, samples=samples)
    xs = np.stack(np.meshgrid(*prod.axes, indexing="ij"), axis=-1)
    plain = np.sum(f.eval(xs) * g.eval(xs)) * math.prod(prod.spacing)
    return abs(complex(prod.integrate()) - complex(plain))


def associativity_defect(f, g, h, theta: ThetaMatrix, box=None, samples: int = 96) -> float:
    """max |((f*g)*h) - (f*(g*h))| over the grid, both sides via the grid path.

    The two sides associate the double sum differently (different
    intermediate grids and phase orders), so exact agreement is a real
    check of the multiplier algebra, not an identity of the code path.
    """
    if box is None:
        box = _auto_box(f, g, theta)
        box = _merge_boxes(box, _auto_box(g, h, theta))
    fg = star_product(f, g, theta, box=box, samples=samples)
    lhs = star_product(fg, _sampled(h, box, samples), theta, box=box, samples=samples)
    gh = star_product(g, h, theta, box=box, samples=samples)
    rhs = star_product(_sampled(f, box, samples), gh, theta, box=box, samples=samples)
    return float(np.max(np.abs(lhs.values - rhs.values)))


def _merge_boxes(b1, b2):
    return [(min(l1, l2), max(h1, h2)) for (l1, h1), (l2, h2) in zip(b1, b2)]


def _sampled(f, box, samples) -> GridFunction:
    return f if isinstance(f, GridFunction) else _position_grid(f, box, samples)


def exchange_defect(
    f1,
    f2,
    g,
    theta: ThetaMatrix,
    n_nodes: int = 32,
    n_points: int = 40,
    qmax: float | None = None,
    seed: int = 77,
) -> float:
    """Defect of the exchange identity for moving a deformed factor across g.

    Left side: L(x1, x2, y) = (f1 tensor_theta (f2 tensor_theta g)) with the
    g slot reduced analytically,

        L = (2 pi)^{-2d} iint dp1 dp2 f1hat(p1) f2hat(p2)
            exp(-(i/2) p1 theta p2) exp(-i(p1.x1 + p2.x2)) g(y - theta(p1 - p2)/2).

    Right side: the same kernel equals (f2 tensor_{-theta} (f1 tensor_theta
    g)) evaluated at swapped first arguments; here the f1 slot is reduced,

        R(u, v, y) = (2 pi)^{-2d} iint dr2 dq f2hat(r2) ghat(q)
            exp(+(i/2) r2 theta q) exp(-i(r2.u + q.y)) f1(v + theta(r2 + q)/2),

    and the defect is max over sample points of |L(x1,x2,y) - R(x2,x1,y)|.
    The two routes integrate different pairs of slots, so agreement checks
    the multiplier exchange relation itself.

    Restricted to Gaussian packets: every factor of either integrand is then
    a product of per-axis functions, so the 4-dim integrals contract as a
    cycle of four (n, n) kernels at O(n^3) without ever forming the full
    tensor-product node set.
    """
    if theta.d != 2:
        raise ValueError("implemented for d=2")
    for h in (f1, f2, g):
        if not isinstance(h, GaussianPacket):
            raise TypeError("exchange_defect needs GaussianPacket inputs")
    v = theta.entry(0, 1)
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-1.5, 1.5, size=(n_points, 3, 2))

    def axis_nodes(h, ax):
        span = qmax if qmax is not None else 9.0 / h.widths[ax]
        x, w = np.polynomial.legendre.leggauss(n_nodes)
        return h.carrier[ax] + span * x, span * w

    # left: p1 sized for f1, p2 for f2; right: r2 for f2, q for g
    (a0, wa0), (a1, wa1) = axis_nodes(f1, 0), axis_nodes(f1, 1)
    (b0, wb0), (b1, wb1) = axis_nodes(f2, 0), axis_nodes(f2, 1)
    (q0, wq0), (q1, wq1) = axis_nodes(g, 0), axis_nodes(g, 1)

    # p1 theta p2 = v (p1^1 p2^0 - p1^0 p2^1) splits into two rank-one phases
    k_a = np.exp(-0.5j * v * np.outer(a1, b0))
    k_b = np.exp(+0.5j * v * np.outer(a0, b1))
    k_c = np.exp(+0.5j * v * np.outer(b1, q0))
    k_d = np.exp(-0.5j * v * np.outer(b0, q1))

    u0 = wa0 * _axis_mom(f1, 0, a0)
    u1 = wa1 * _axis_mom(f1, 1, a1)
    w0 = wb0 * _axis_mom(f2, 0, b0)
    w1 = wb1 * _axis_mom(f2, 1, b1)
    t0 = wq0 * _axis_mom(g, 0, q0)
    t1 = wq1 * _axis_mom(g, 1, q1)

    norm = (2.0 * math.pi) ** -4 * f1.amplitude * f2.amplitude * g.amplitude
    worst = 0.0
    for x1, x2, y in pts:
        # (theta p)^0 = -v p^1 and (theta p)^1 = -v p^0, so the g argument
        # couples axis 0 to the space nodes and axis 1 to the time nodes
        g0 = _axis_pos(g, 0, y[0] + 0.5 * v * (a1[:, None] - b1[None, :]))
        g1 = _axis_pos(g, 1, y[1] + 0.5 * v * (a0[:, None] - b0[None, :]))
        ua = u0 * np.exp(-1j * a0 * x1[0])
        ub = u1 * np.exp(+1j * a1 * x1[1])
        va = w0 * np.exp(-1j * b0 * x2[0])
        vb = w1 * np.exp(+1j * b1 * x2[1])
        p_l = (g1 * ua[:, None]).T @ k_b
        q_l = (k_a * ub[:, None]).T @ g0
        left = norm * (va @ (p_l * q_l) @ vb)

        # right side at swapped first arguments (u, v) = (x2, x1)
        f0 = _axis_pos(f1, 0, x1[0] - 0.5 * v * (b1[:, None] + q1[None, :]))
        f1m = _axis_pos(f1, 1, x1[1] - 0.5 * v * (b0[:, None] + q0[None, :]))
        sa = w0 * np.exp(-1j * b0 * x2[0])
        sb = w1 * np.exp(+1j * b1 * x2[1])
        ta = t0 * np.exp(-1j * q0 * y[0])
        tb = t1 * np.exp(+1j * q1 * y[1])
        p_r = (f1m * sa[:, None]).T @ k_d
        q_r = (k_c * sb[:, None]).T @ f0
        right = norm * (ta @ (p_r * q_r) @ tb)
        worst = max(worst, abs(left - right))
    return float(worst)


def _axis_mom(h: GaussianPacket, ax: int, p):
    """One axis factor of the closed-form transform, including sigma sqrt(2 pi)."""
    sgn = 1.0 if ax == 0 else -1.0
    s, k, c = h.widths[ax], h.carrier[ax], h.center[ax]
    return s * math.sqrt(2.0 * math.pi) * np.exp(-0.5 * s**2 * (p - k) ** 2 + 1j * sgn * (p - k) * c)


def _axis_pos(h: GaussianPacket, ax: int, x):
    """One axis factor of the packet in position space (without the amplitude)."""
    sgn = 1.0 if ax == 0 else -1.0
    s, k, c = h.widths[ax], h.carrier[ax], h.center[ax]
    return np.exp(-((x - c) ** 2) / (2.0 * s**2) - 1j * sgn * k * x)


def _smooth_step(u):
    """C-infinity step: 0 for u <= 0, 1 for u >= 1."""
    u = np.asarray(u, dtype=float)
    lo = np.clip(u, 1e-12, None)
    hi = np.clip(1.0 - u, 1e-12, None)
    phi_lo = np.where(u > 0.0, np.exp(-1.0 / lo), 0.0)
    phi_hi = np.where(u < 1.0, np.exp(-1.0 / hi), 0.0)
    return phi_lo / (phi_lo + phi_hi)


@dataclass(frozen=True)
class PlateauWindow:
    """C-infinity window: 1 on [-flat, flat]^d, 0 outside [-fall, fall]^d."""

    flat: float
    fall: float
    d: int = 2

    def __post_init__(self):
        if not (0.0 < self.flat < self.fall):
            raise ValueError("need 0 < flat < fall")

    def eval(self, x):
        x = np.asarray(x, dtype=float)
        out = np.ones(x.shape[:-1])
        for ax in range(self.d):
            u = (self.fall - np.abs(x[..., ax])) / (self.fall - self.flat)
            out = out * _smooth_step(u)
        return out + 0.0j

    def support_radius(self) -> float:
        return self.fall * math.sqrt(self.d)

    @property
    def center(self) -> tuple[float, ...]:
        return (0.0,) * self.d


@dataclass(frozen=True)
class CoordinateFactor:
    """x^axis times a window; the factors of the canonical bracket check."""

    window: PlateauWindow
    axis: int

    def eval(self, x):
        x = np.asarray(x, dtype=float)
        return x[..., self.axis] * self.window.eval(x)

    @property
    def d(self) -> int:
        return self.window.d

    @property
    def center(self) -> tuple[float, ...]:
        return self.window.center

    def support_radius(self) -> float:
        return self.window.support_radius()


def bracket_defect(
    theta: ThetaMatrix,
    flat: float = 6.0,
    fall: float = 12.0,
    inner: float = 1.0,
    samples: int = 224,
) -> float:
    """Relative defect of the canonical bracket on the window plateau.

    With f = x^0 w and g = x^1 w the deformed commutator f*g - g*f must
    approach i theta^{01} in the interior of the plateau; the deviation is
    the transform tail of w at momenta large enough for the deformation
    shift theta q / 2 to reach the window edge.  The defaults keep that
    reach at (flat - inner) / (|theta| / 2), well into the tail for
    |theta| <= 1.  Returns the max relative deviation over |x| <= inner.
    """
    w = PlateauWindow(flat=flat, fall=fall)
    f = CoordinateFactor(w, axis=0)
    g = CoordinateFactor(w, axis=1)
    half = fall + 3.0 + 0.5 * theta.max_entry() * 12.0
    box = [(-half, half)] * 2
    fg = star_product(f, g, theta, box=box, samples=samples)
    gf = star_product(g, f, theta, box=box, samples=samples)
    bracket = fg.values - gf.values
    target = 1j * theta.entry(0, 1)
    xs = np.stack(np.meshgrid(*fg.axes, indexing="ij"), axis=-1)
    region = np.all(np.abs(xs) <= inner, axis=-1)
    return float(np.max(np.abs(bracket[region] - target)) / abs(target))


def band_limited_source(
    kmax: float, box_half: float, samples: int, order: int = 1, amplitude: float = 1.0
) -> GridFunction:
    """A grid function whose transform is exactly zero outside |p| <= kmax.

    Constructed as the inverse DFT of a momentum-space mollifier, so the
    band limitation holds exactly on the grid (the position-space tails
    wrap periodically, which the transform roundtrip accounts for).
    """
    from .funcspace import BumpFunction

    n = samples
    dx = 2.0 * box_half / n
    paxes = [np.fft.fftshift(2.0 * math.pi * np.fft.fftfreq(n, d=dx))] * 2
    mesh = np.stack(np.meshgrid(*paxes, indexing="ij"), axis=-1)
    profile = BumpFunction(center=(0.0, 0.0), radius=kmax, amplitude=amplitude)
    vals = profile.eval(mesh)
    xaxes = tuple(dx * (np.arange(n) - n // 2) for _ in range(2))
    ghat = GridFunction(paxes, vals, companion_axes=xaxes, periodic_ok=True)
    return ghat.inverse_fourier()


def measure_support_shift(
    f,
    theta: ThetaMatrix,
    kmax: float = 3.0,
    box_half: float = 6.0,
    samples: int = 1024,
    level: float = 1e-8,
):
    """Support spread of f *_theta g for band-limited g, with its bound.

    ``f`` must be compactly supported.  g's transform vanishes outside
    |q| <= kmax exactly, so the product must vanish outside supp(f)
    inflated by |theta| kmax / 2: the deformation acts by f(x + theta q/2)
    under g's momentum integral.  Returns (observed, bound, leak) where
    ``observed`` is how far beyond supp(f) the product exceeds ``level``
    times its peak, ``bound`` = |theta|_max kmax / 2 plus a grid step, and
    ``leak`` is the largest magnitude outside the bound region relative to
    the peak (zero up to quadrature noise when the claim holds).
    """
    if f.support_radius() is None:
        raise ValueError("f must be compactly supported")
    g = band_limited_source(kmax, box_half, samples)
    box = [(-box_half, box_half)] * 2
    prod = star_product(f, g, theta, box=box, samples=samples)
    bound = 0.5 * theta.max_entry() * kmax + 2.0 * max(prod.spacing)

    xs = np.stack(np.meshgrid(*prod.axes, indexing="ij"), axis=-1)
    dist = np.linalg.norm(xs - np.array(f.center), axis=-1) - f.support_radius()
    mag = np.abs(prod.values)
    peak = float(mag.max())
    above = mag > level * peak
    observed = float(max(np.max(dist[above]), 0.0)) if above.any() else 0.0
    outside = dist > bound
    leak = float(mag[outside].max() / peak) if outside.any() else 0.0
    return observed, bound, leak
