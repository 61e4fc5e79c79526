"""Minkowski geometry: metric, boosts, wedges, and the deformation matrix.

Conventions used throughout the package:

* signature (+, -, ..., -), index 0 is time;
* spacetime dimension d is a runtime parameter restricted to 2 or 4;
* vectors are plain numpy arrays of shape (d,) holding upper-index
  components, and vectorized routines accept shape (..., d);
* the antisymmetric deformation matrix is stored by its strictly upper
  triangle, so antisymmetry is exact in floating point rather than only
  up to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = [
    "minkowski_metric",
    "mdot",
    "interval",
    "is_spacelike",
    "ThetaMatrix",
    "make_reference_theta",
    "LorentzTransform",
    "transform_theta",
    "Wedge",
    "reference_wedge",
    "wedge_contains",
    "half_theta_cone_check",
    "sample_backward_cone",
    "sample_wedge",
    "rho_norm",
    "angular_distance",
]

METRIC_TOL = 1e-10


def minkowski_metric(d: int) -> np.ndarray:
    """Diagonal metric diag(+1, -1, ..., -1) in d dimensions."""
    g = -np.eye(d)
    g[0, 0] = 1.0
    return g


def mdot(p, x):
    """Minkowski pairing p.x = p^0 x^0 - p_vec . x_vec.

    Broadcasts over leading axes; the last axis is the component axis.
    """
    p = np.asarray(p, dtype=float)
    x = np.asarray(x, dtype=float)
    return p[..., 0] * x[..., 0] - np.sum(p[..., 1:] * x[..., 1:], axis=-1)


def lower_index(p):
    """Map upper components p^mu to lower components p_mu."""
    p = np.asarray(p, dtype=float)
    out = -p.copy()
    out[..., 0] = p[..., 0]
    return out


def interval(x, y) -> float:
    """Invariant interval (x-y).(x-y); positive timelike, negative spacelike."""
    z = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    return float(mdot(z, z))


def is_spacelike(x, y) -> bool:
    return interval(x, y) < 0.0


@dataclass(frozen=True)
class ThetaMatrix:
    """Antisymmetric matrix stored by its strictly upper triangle.

    ``entries`` maps index pairs (mu, nu) with mu < nu to the value of the
    upper-index component theta^{mu nu}.  The full matrix and all bilinear
    forms are derived from the triangle, so theta^{nu mu} = -theta^{mu nu}
    holds exactly.
    """

    d: int
    entries: tuple[tuple[int, int, float], ...]

    def __post_init__(self):
        if self.d < 2:
            raise ValueError(f"dimension must be at least 2, got {self.d}")
        seen = set()
        for mu, nu, _ in self.entries:
            if not (0 <= mu < nu < self.d):
                raise ValueError(f"entry ({mu},{nu}) is not strictly upper in d={self.d}")
            if (mu, nu) in seen:
                raise ValueError(f"duplicate entry ({mu},{nu})")
            seen.add((mu, nu))

    @classmethod
    def from_upper(cls, d: int, upper: dict[tuple[int, int], float]) -> "ThetaMatrix":
        entries = tuple(sorted((mu, nu, float(v)) for (mu, nu), v in upper.items() if v != 0.0))
        return cls(d=d, entries=entries)

    @classmethod
    def from_matrix(cls, m: np.ndarray, tol: float = 0.0) -> "ThetaMatrix":
        """Build from a full matrix, antisymmetrizing first.

        ``tol`` entries smaller than tol in magnitude are dropped.
        """
        m = np.asarray(m, dtype=float)
        d = m.shape[0]
        a = 0.5 * (m - m.T)
        upper = {}
        for mu in range(d):
            for nu in range(mu + 1, d):
                if abs(a[mu, nu]) > tol:
                    upper[(mu, nu)] = a[mu, nu]
        return cls.from_upper(d, upper)

    @classmethod
    def zero(cls, d: int) -> "ThetaMatrix":
        return cls(d=d, entries=())

    @cached_property
    def matrix(self) -> np.ndarray:
        m = np.zeros((self.d, self.d))
        for mu, nu, v in self.entries:
            m[mu, nu] = v
            m[nu, mu] = -v
        m.setflags(write=False)
        return m

    @property
    def is_zero(self) -> bool:
        return all(v == 0.0 for _, _, v in self.entries)

    def entry(self, mu: int, nu: int) -> float:
        for a, b, v in self.entries:
            if (a, b) == (mu, nu):
                return v
            if (a, b) == (nu, mu):
                return -v
        return 0.0

    def max_entry(self) -> float:
        return max((abs(v) for _, _, v in self.entries), default=0.0)

    @property
    def elementary_length(self) -> float:
        """sqrt of the largest matrix entry magnitude; the intrinsic scale."""
        return math.sqrt(self.max_entry())

    def scaled(self, c: float) -> "ThetaMatrix":
        return ThetaMatrix(self.d, tuple((mu, nu, c * v) for mu, nu, v in self.entries))

    def __neg__(self) -> "ThetaMatrix":
        return self.scaled(-1.0)

    def bilinear(self, p, q):
        """p_mu theta^{mu nu} q_nu for upper-index p, q; broadcasts over leading axes.

        Computed entry by entry from the triangle, so bilinear(p, q) equals
        -bilinear(q, p) exactly and bilinear(p, p) is exactly zero.
        """
        p = lower_index(p)
        q = lower_index(q)
        out = np.zeros(np.broadcast_shapes(p.shape[:-1], q.shape[:-1]))
        for mu, nu, v in self.entries:
            out = out + v * (p[..., mu] * q[..., nu] - p[..., nu] * q[..., mu])
        return out

    def apply(self, q):
        """(theta q)^mu = theta^{mu nu} q_nu; broadcasts over leading axes."""
        ql = lower_index(q)
        out = np.zeros(np.broadcast_shapes(ql.shape), dtype=float)
        for mu, nu, v in self.entries:
            out[..., mu] += v * ql[..., nu]
            out[..., nu] += -v * ql[..., mu]
        return out

    def to_json(self) -> dict:
        return {"d": self.d, "upper": [[mu, nu, v] for mu, nu, v in self.entries]}

    @classmethod
    def from_json(cls, obj: dict) -> "ThetaMatrix":
        return cls(d=int(obj["d"]), entries=tuple((int(mu), int(nu), float(v)) for mu, nu, v in obj["upper"]))


def make_reference_theta(theta_e: float, theta_m: float = 0.0, d: int = 2) -> ThetaMatrix:
    """Reference-form deformation matrix.

    d=2: the single component theta^{01} = theta_e (theta_m is ignored).
    d=4: theta^{01} = -theta^{10} = theta_e and theta^{23} = -theta^{32} = theta_m.
    """
    if d not in (2, 4):
        raise ValueError(f"only d=2 and d=4 are supported, got d={d}")
    if theta_e < 0.0:
        raise ValueError(f"electric component must be nonnegative, got {theta_e}")
    if d == 2:
        return ThetaMatrix.from_upper(2, {(0, 1): theta_e})
    if theta_m == 0.0:
        raise ValueError("d=4 reference form needs a nonzero magnetic component")
    return ThetaMatrix.from_upper(4, {(0, 1): theta_e, (2, 3): theta_m})


@dataclass(frozen=True)
class LorentzTransform:
    """Proper orthochronous Lorentz matrix, validated on construction."""

    entries: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        m = self.matrix
        d = m.shape[0]
        g = minkowski_metric(d)
        defect = np.max(np.abs(m.T @ g @ m - g))
        if defect > METRIC_TOL:
            raise ValueError(f"matrix does not preserve the metric (defect {defect:.3e})")
        det = np.linalg.det(m)
        if abs(det - 1.0) > 1e-9:
            raise ValueError(f"determinant must be +1, got {det}")
        if m[0, 0] < 1.0 - 1e-12:
            raise ValueError("time orientation must be preserved")

    @classmethod
    def from_matrix(cls, m: np.ndarray) -> "LorentzTransform":
        m = np.asarray(m, dtype=float)
        return cls(entries=tuple(tuple(float(v) for v in row) for row in m))

    @classmethod
    def identity(cls, d: int) -> "LorentzTransform":
        return cls.from_matrix(np.eye(d))

    @classmethod
    def boost(cls, rapidity: float, d: int, axis: int = 1) -> "LorentzTransform":
        """Boost by the given rapidity along a spatial axis."""
        if not (1 <= axis < d):
            raise ValueError(f"boost axis must be spatial, got {axis} in d={d}")
        m = np.eye(d)
        ch, sh = math.cosh(rapidity), math.sinh(rapidity)
        m[0, 0] = m[axis, axis] = ch
        m[0, axis] = m[axis, 0] = sh
        return cls.from_matrix(m)

    @classmethod
    def rotation(cls, angle: float, d: int, plane: tuple[int, int] = (2, 3)) -> "LorentzTransform":
        """Spatial rotation by ``angle`` in the given plane."""
        i, j = plane
        if not (1 <= i < j < d):
            raise ValueError(f"rotation plane {plane} is not spatial in d={d}")
        m = np.eye(d)
        c, s = math.cos(angle), math.sin(angle)
        m[i, i] = m[j, j] = c
        m[i, j] = -s
        m[j, i] = s
        return cls.from_matrix(m)

    @cached_property
    def matrix(self) -> np.ndarray:
        m = np.array(self.entries, dtype=float)
        m.setflags(write=False)
        return m

    @property
    def d(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def inverse_matrix(self) -> np.ndarray:
        # Lambda^{-1} = g Lambda^T g, exact up to rounding of the products.
        g = minkowski_metric(self.d)
        m = g @ self.matrix.T @ g
        m.setflags(write=False)
        return m

    def inverse(self) -> "LorentzTransform":
        return LorentzTransform.from_matrix(self.inverse_matrix)

    def compose(self, other: "LorentzTransform") -> "LorentzTransform":
        return LorentzTransform.from_matrix(self.matrix @ other.matrix)

    def apply(self, x):
        x = np.asarray(x, dtype=float)
        return x @ self.matrix.T

    def apply_inverse(self, x):
        x = np.asarray(x, dtype=float)
        return x @ self.inverse_matrix.T


def transform_theta(L: LorentzTransform, theta: ThetaMatrix) -> ThetaMatrix:
    """Push theta forward: theta' = Lambda theta Lambda^T, re-antisymmetrized."""
    if L.d != theta.d:
        raise ValueError(f"dimension mismatch: transform d={L.d}, theta d={theta.d}")
    return ThetaMatrix.from_matrix(L.matrix @ theta.matrix @ L.matrix.T)


@dataclass(frozen=True)
class Wedge:
    """Image of the reference wedge {x^1 > |x^0|} under a boost, or its opposite.

    ``orientation`` +1 gives boost(W_ref), -1 gives the reflected wedge
    -boost(W_ref).  Membership is strict.
    """

    boost: LorentzTransform
    orientation: int = 1

    def __post_init__(self):
        if self.orientation not in (1, -1):
            raise ValueError(f"orientation must be +1 or -1, got {self.orientation}")

    @property
    def d(self) -> int:
        return self.boost.d

    def opposite(self) -> "Wedge":
        return Wedge(self.boost, -self.orientation)

    def contains(self, x) -> bool:
        y = self.boost.apply_inverse(np.asarray(x, dtype=float) * self.orientation)
        return bool(y[1] > abs(y[0]))

    def contains_many(self, x) -> np.ndarray:
        y = self.boost.apply_inverse(np.asarray(x, dtype=float) * self.orientation)
        return y[..., 1] > np.abs(y[..., 0])

    def contains_ball(self, center, radius: float) -> bool:
        """True if the Euclidean ball around ``center`` lies inside the wedge.

        Exact for d=2 with an unboosted wedge; for boosted wedges the test is
        performed in the frame where the wedge is in reference position, with
        the ball replaced by its image (an ellipse), checked on a direction
        sample.  Conservative by construction.
        """
        c = np.asarray(center, dtype=float) * self.orientation
        m = self.boost.inverse_matrix
        y = m @ c
        if self.d == 2 and np.allclose(m, np.eye(2)):
            margin = min(y[1] - y[0], y[1] + y[0]) / math.sqrt(2.0)
            return bool(y[1] > abs(y[0]) and margin > radius)
        phis = np.linspace(0.0, 2.0 * math.pi, 720, endpoint=False)
        if self.d == 2:
            dirs = np.stack([np.cos(phis), np.sin(phis)], axis=-1)
        else:
            rng = np.random.default_rng(0)
            dirs = rng.standard_normal((4096, self.d))
            dirs /= np.linalg.norm(dirs, axis=-1, keepdims=True)
        pts = y + radius * dirs @ m.T
        return bool(np.all(pts[:, 1] > np.abs(pts[:, 0])))


def reference_wedge(d: int = 2) -> Wedge:
    return Wedge(LorentzTransform.identity(d), 1)


def wedge_contains(w: Wedge, x) -> bool:
    return w.contains(x)


def sample_backward_cone(d: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """Points strictly inside the backward light cone, spread over scales."""
    u = rng.standard_normal((n, d - 1))
    r = np.linalg.norm(u, axis=-1, keepdims=True)
    r = np.where(r == 0.0, 1.0, r)
    dirs = u / r
    scale = 10.0 ** rng.uniform(-2.0, 2.0, size=n)
    spatial = rng.uniform(0.0, 1.0, size=n)
    gap = rng.uniform(1e-3, 1.0, size=n)
    x = np.empty((n, d))
    x[:, 1:] = dirs * (scale * spatial)[:, None]
    x[:, 0] = -(scale * spatial + scale * gap)
    return x


def sample_wedge(w: Wedge, n: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """Points strictly inside the wedge, spread over scales up to ``scale``."""
    d = w.d
    y = np.empty((n, d))
    t = rng.uniform(-1.0, 1.0, size=n) * scale
    gap = rng.uniform(1e-3, 1.0, size=n) * scale
    y[:, 0] = t
    y[:, 1] = np.abs(t) + gap
    if d > 2:
        y[:, 2:] = rng.uniform(-1.0, 1.0, size=(n, d - 2)) * scale
    return w.orientation * w.boost.apply(y)


def half_theta_cone_check(
    theta: ThetaMatrix,
    n_samples: int = 10_000,
    wedge: Wedge | None = None,
    rng: np.random.Generator | None = None,
) -> bool:
    """Sample the covariance condition for the wedge assignment.

    Checks (theta/2) V- inside the wedge and (theta/2) V+ inside the opposite
    wedge on random cone samples.  Returns False on the first violation and
    reports it; membership is strict, so a zero matrix fails.
    """
    if rng is None:
        rng = np.random.default_rng(2026)
    if wedge is None:
        wedge = reference_wedge(theta.d)
    for source, target, label in (
        (+1.0, wedge, "backward cone into wedge"),
        (-1.0, wedge.opposite(), "forward cone into opposite wedge"),
    ):
        v = source * sample_backward_cone(theta.d, n_samples, rng)
        img = 0.5 * theta.apply(v)
        ok = target.contains_many(img)
        if not np.all(ok):
            i = int(np.argmax(~ok))
            print(
                f"half-theta cone check failed ({label}): "
                f"v={v[i].tolist()} maps to {img[i].tolist()} outside the wedge"
            )
            return False
    return True


def rho_norm(v, rho: float):
    v = np.asarray(v, dtype=float)
    return np.sum(np.abs(v) ** rho, axis=-1) ** (1.0 / rho)


def _dirs_2d(n: int) -> np.ndarray:
    phis = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
    return np.stack([np.cos(phis), np.sin(phis)], axis=-1)


def angular_distance(points, region, rho: float = 2.0, n_dirs: int = 1440, n_radii: int = 400) -> float:
    """Distance from a direction set to a closed cone, on the rho-norm sphere.

    ``points`` is an (n, d) array of nonzero vectors, each rescaled to unit
    rho-norm; ``region`` is a predicate on vectors defining the cone.  The
    cone is discretized by directions (d=2) and radii in [0, 3]; the result
    is the smallest distance from any rescaled point to the discretized cone.
    Raises if no direction lies in the region or the point set is empty.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[0] == 0:
        raise ValueError("empty direction set")
    d = pts.shape[1]
    if d != 2:
        raise ValueError("angular distance is implemented for d=2")
    norms = rho_norm(pts, rho)
    if np.any(norms == 0.0):
        raise ValueError("direction set contains the zero vector")
    pts = pts / norms[:, None]
    dirs = _dirs_2d(n_dirs)
    in_region = np.array([bool(region(dv)) for dv in dirs])
    if not np.any(in_region):
        raise ValueError("region predicate accepts no sampled direction")
    rays = dirs[in_region]
    radii = np.linspace(0.0, 3.0, n_radii)
    cone = rays[:, None, :] * radii[None, :, None]
    cone = cone.reshape(-1, 2)
    diffs = pts[:, None, :] - cone[None, :, :]
    dists = rho_norm(diffs, rho)
    return float(dists.min())
