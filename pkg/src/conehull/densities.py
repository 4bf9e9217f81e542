"""Explicit densities and measure identities.

Everything here is deterministic: sphere constants, the heavy-tailed
rotation-invariant (multivariate Cauchy) density and its probability
content PC, the exterior inverse-power integral, the vertex-tuple
densities phi_n and their limit phi, the solid-angle reweighting factor,
and the typical-cell/zero-cell density ratio.

Exterior integrals and polygon probability contents reduce to exact
per-edge one-dimensional formulas in the plane; dimension 3 uses an
adaptive facet quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .arrangement import schlaefli_count
from .errors import (
    DegenerateInput,
    OriginNotInterior,
    TiedFirstCoordinate,
    ZeroVolume,
)
from .geometry import (
    EPS_SIGN,
    PolyhedralCone,
    Polytope,
    ccw_order,
    convex_hull,
    polygon_edge_normals,
    polytope_volume,
    solid_angle,
)

# ---------------------------------------------------------------------------
# Constants
# ---------------------------------------------------------------------------


def omega(d: int) -> float:
    """Surface area of the unit sphere S^{d-1} in R^d: 2 pi^{d/2} / Gamma(d/2)."""
    if d < 1:
        raise ValueError("omega is defined for d >= 1")
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


def kappa(d: int) -> float:
    """Volume of the unit ball in R^d: pi^{d/2} / Gamma(1 + d/2); kappa(0) = 1."""
    if d < 0:
        raise ValueError("kappa is defined for d >= 0")
    return math.pi ** (d / 2.0) / math.gamma(1.0 + d / 2.0)


def gamma_intensity(d: int) -> float:
    """Hyperplane process intensity: Gamma((d+1)/2) / (sqrt(pi) Gamma(d/2))."""
    if d < 1:
        raise ValueError("d >= 1 required")
    return math.gamma((d + 1) / 2.0) / (math.sqrt(math.pi) * math.gamma(d / 2.0))


def expected_typical_cell_volume(d: int) -> float:
    """c_d = (1/kappa_d) * (omega_{d+1} / kappa_{d-1})^d."""
    return (omega(d + 1) / kappa(d - 1)) ** d / kappa(d)


@dataclass(frozen=True)
class Constants:
    """Sphere constants for one dimension, with their exact identities."""

    d: int
    omega: float
    kappa: float
    gamma_intensity: float
    c_d: float

    @classmethod
    def for_dim(cls, d: int) -> "Constants":
        return cls(
            d=d,
            omega=omega(d),
            kappa=kappa(d),
            gamma_intensity=gamma_intensity(d),
            c_d=expected_typical_cell_volume(d),
        )

    def identity_residuals(self) -> dict[str, float]:
        """Relative residuals of the defining identities (all ~ 0)."""
        d = self.d
        res = {
            "omega_eq_d_kappa": abs(self.omega - d * self.kappa) / self.omega,
            "kappa_omega_product": abs(
                self.kappa * omega(d + 1) - 2.0 ** (d + 1) * math.pi**d / math.factorial(d)
            )
            / (self.kappa * omega(d + 1)),
            "c_d_normalization": abs(
                2.0 * self.c_d / (math.factorial(d) * omega(d + 1)) - 1.0
            ),
            "gamma_ratio_form": abs(
                self.gamma_intensity - (omega(d) / 2.0) * (2.0 / omega(d + 1))
            )
            / self.gamma_intensity,
        }
        return res


# ---------------------------------------------------------------------------
# The heavy-tailed density and its probability content
# ---------------------------------------------------------------------------


def beta_prime_density(x, d: int) -> float:
    """Density (2/omega_{d+1}) (1 + |x|^2)^{-(d+1)/2} at x in R^d."""
    x = np.asarray(x, dtype=float)
    return 2.0 / omega(d + 1) * (1.0 + float(x @ x)) ** (-(d + 1) / 2.0)


@dataclass(frozen=True)
class Ball:
    radius: float


@dataclass(frozen=True)
class HalfSpace:
    """Region {x : <normal, x> <= offset}."""

    normal: np.ndarray
    offset: float


def pc_ball(radius: float, d: int) -> float:
    """Probability content of the centered ball of the given radius."""
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    theta = math.atan(radius)
    if d == 1:
        return 2.0 * theta / math.pi
    if d == 2:
        return 1.0 - 1.0 / math.sqrt(1.0 + radius**2)
    if d == 3:
        return 2.0 / math.pi * (theta - math.sin(theta) * math.cos(theta))
    from scipy.special import betainc

    s2 = math.sin(theta) ** 2
    integral = 0.5 * math.gamma(d / 2.0) * math.gamma(0.5) / math.gamma((d + 1) / 2.0)
    integral *= betainc(d / 2.0, 0.5, s2)
    return 2.0 * omega(d) / omega(d + 1) * integral


def pc_halfspace(offset: float) -> float:
    """Probability content of {x : <u, x> <= offset}; the 1-d marginal is Cauchy."""
    return 0.5 + math.atan(offset) / math.pi


def _wrap_angle(a: float) -> float:
    return math.atan2(math.sin(a), math.cos(a))


def _polygon_edge_sweeps(vertices_ccw: np.ndarray):
    """Per-edge quantities for radial integrals: (sweep, |h|, psi_a, psi_b).

    Skips edges whose supporting line passes through the origin (their
    radial triangle is degenerate).
    """
    m = len(vertices_ccw)
    out = []
    for i in range(m):
        a = vertices_ccw[i]
        b = vertices_ccw[(i + 1) % m]
        cross = a[0] * b[1] - a[1] * b[0]
        t = b - a
        tn = math.hypot(t[0], t[1])
        if tn <= EPS_SIGN:
            continue
        h = cross / tn
        if abs(h) <= EPS_SIGN:
            continue
        theta_a = math.atan2(a[1], a[0])
        theta_b = math.atan2(b[1], b[0])
        sweep = _wrap_angle(theta_b - theta_a)
        # foot of the perpendicular from the origin onto the edge line
        nvec = np.array([t[1], -t[0]]) / tn
        if h < 0:
            nvec = -nvec
        phi = math.atan2(nvec[1], nvec[0])
        psi_a = _wrap_angle(theta_a - phi)
        psi_b = _wrap_angle(theta_b - phi)
        out.append((sweep, abs(h), psi_a, psi_b))
    return out


def pc_polygon(vertices_ccw: np.ndarray, d: int = 2) -> float:
    """Exact probability content of a convex polygon in the plane.

    Signed radial decomposition over the edges; the polygon need not
    contain the origin.
    """
    if d != 2:
        raise DegenerateInput("exact polygon content only in the plane")
    total = 0.0
    for sweep, h, psi_a, psi_b in _polygon_edge_sweeps(np.asarray(vertices_ccw, float)):
        k = math.sqrt(1.0 + h * h)
        g = math.asin(math.sin(psi_b) / k) - math.asin(math.sin(psi_a) / k)
        total += sweep - g
    return total / (2.0 * math.pi)


def pc_polygon_complement(vertices_ccw: np.ndarray) -> float:
    """1 - PC of a polygon containing the origin, computed without cancellation.

    For origin-interior polygons the sweeps add to a full turn, so the
    complement is the sum of the arcsine terms alone; this stays accurate
    when PC is within float epsilon of 1.
    """
    total = 0.0
    sweep_sum = 0.0
    for sweep, h, psi_a, psi_b in _polygon_edge_sweeps(np.asarray(vertices_ccw, float)):
        k = math.sqrt(1.0 + h * h)
        total += math.asin(math.sin(psi_b) / k) - math.asin(math.sin(psi_a) / k)
        sweep_sum += sweep
    if abs(sweep_sum - 2.0 * math.pi) > 1e-9:
        raise OriginNotInterior("complement form needs the origin strictly inside")
    return total / (2.0 * math.pi)


def pc_beta_prime(region, d: int, mode: str = "exact", samples: int = 100_000, rng=None) -> float:
    """Probability content of a region under the heavy-tailed law in R^d.

    Balls and half-spaces have closed forms; planar polytopes use the exact
    per-edge radial formula; everything else falls back to Monte Carlo.
    """
    if isinstance(region, Ball):
        return pc_ball(region.radius, d)
    if isinstance(region, HalfSpace):
        return pc_halfspace(region.offset)
    if isinstance(region, Polytope):
        if d == 2 and mode in ("exact", "quadrature"):
            return pc_polygon(ccw_order(region.vertices))
        if mode == "mc":
            if rng is None:
                raise ValueError("Monte Carlo mode needs an rng")
            from .samplers import sample_cauchy_points

            pts = sample_cauchy_points(d, samples, rng)
            if d == 2:
                normals, offsets = polygon_edge_normals(ccw_order(region.vertices))
                hits = int(np.count_nonzero(np.max(pts @ normals.T - offsets, axis=1) <= 0))
            else:
                from scipy.spatial import ConvexHull as _Qhull

                qh = _Qhull(region.vertices)
                eq = qh.equations
                hits = int(np.count_nonzero(np.max(pts @ eq[:, :d].T + eq[:, d], axis=1) <= 0))
            return hits / samples
        raise DegenerateInput(f"unsupported polytope mode {mode!r} in dimension {d}")
    raise DegenerateInput(f"unsupported region type {type(region).__name__}")


# ---------------------------------------------------------------------------
# Exterior inverse-power integral
# ---------------------------------------------------------------------------


def _subtriangle_midpoints(level: int) -> np.ndarray:
    """Barycentric edge midpoints of the uniform 4^level refinement.

    Returns an array (T, 3, 2) of (s, t) coordinates with the subtriangle
    point being A + s (B - A) + t (C - A); all subtriangles share one area.
    """
    m = 2**level
    ups = [(i, j) for i in range(m) for j in range(m - i)]
    downs = [(i, j) for i in range(m) for j in range(m - 1 - i)]
    mids = []
    for i, j in ups:
        v = [(i, j), (i + 1, j), (i, j + 1)]
        mids.append([((v[a][0] + v[b][0]) / 2.0, (v[a][1] + v[b][1]) / 2.0)
                     for a, b in ((0, 1), (1, 2), (2, 0))])
    for i, j in downs:
        v = [(i + 1, j), (i + 1, j + 1), (i, j + 1)]
        mids.append([((v[a][0] + v[b][0]) / 2.0, (v[a][1] + v[b][1]) / 2.0)
                     for a, b in ((0, 1), (1, 2), (2, 0))])
    return np.asarray(mids, dtype=float) / m


def _triangle_quad(f_batch, A, B, C, tol, max_level: int = 8) -> float:
    """Quadrature of f over a planar triangle in R^3 by uniform refinement.

    The midpoint rule is exact for quadratics; refinement stops once two
    consecutive levels agree to the relative tolerance.
    """
    area = 0.5 * float(np.linalg.norm(np.cross(B - A, C - A)))
    if area <= 0.0:
        return 0.0
    prev = None
    val = 0.0
    for level in range(max_level + 1):
        st = _subtriangle_midpoints(level)  # (T, 3, 2)
        pts = A[None, None, :] + st[..., :1] * (B - A) + st[..., 1:] * (C - A)
        vals = f_batch(pts.reshape(-1, 3)).reshape(-1, 3).mean(axis=1)
        val = area / 4.0**level * float(vals.sum())
        if prev is not None and abs(val - prev) <= tol * abs(val) + 1e-300:
            return val
        prev = val
    return val


def exterior_inverse_power_integral(p: Polytope, d: int, tol: float = 1e-10) -> float:
    """Integral of |y|^{-(d+1)} over the complement of p; origin must be interior.

    Reduces to the directional integral of the reciprocal radial function.
    In the plane each edge contributes (sin psi_b - sin psi_a)/h exactly;
    in R^3 each (triangulated) facet at distance h contributes
    h * integral of |y|^{-4} over the facet.
    """
    if p.dim != d:
        raise DegenerateInput("dimension mismatch")
    if d == 1:
        lo = float(p.vertices[:, 0].min())
        hi = float(p.vertices[:, 0].max())
        if lo >= -EPS_SIGN or hi <= EPS_SIGN:
            raise OriginNotInterior("origin not inside the segment")
        return 1.0 / abs(lo) + 1.0 / hi
    if d == 2:
        verts = ccw_order(p.vertices)
        _, offsets = polygon_edge_normals(verts)
        if np.any(offsets <= EPS_SIGN):
            raise OriginNotInterior("origin not strictly interior to the polygon")
        total = 0.0
        for sweep, h, psi_a, psi_b in _polygon_edge_sweeps(verts):
            if sweep <= 0:
                raise OriginNotInterior("polygon is not star-shaped around the origin")
            total += (math.sin(psi_b) - math.sin(psi_a)) / h
        return total
    if d == 3:
        from scipy.spatial import ConvexHull as _Qhull

        qh = _Qhull(p.vertices)
        eqs = qh.equations
        if np.any(-eqs[:, 3] <= EPS_SIGN):
            raise OriginNotInterior("origin not strictly interior to the polytope")
        total = 0.0
        f = lambda y: np.einsum("ij,ij->i", y, y) ** -2.0
        for simplex, eq in zip(qh.simplices, eqs):
            h = -float(eq[3])
            A, B, C = qh.points[simplex]
            total += h * _triangle_quad(f, A, B, C, tol)
        return total
    raise DegenerateInput("exterior integrals only for d <= 3")


# ---------------------------------------------------------------------------
# Coordinate representations and the vertex-tuple densities
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoordinateRep:
    """A polytope as its vertex tuple: strictly increasing first coordinates,
    all points in convex position."""

    dim: int
    points: np.ndarray

    def __post_init__(self) -> None:
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != self.dim:
            raise DegenerateInput(f"points must have shape (m, {self.dim})")
        m = pts.shape[0]
        if m < self.dim + 1:
            raise DegenerateInput("need at least dim+1 points")
        order = np.argsort(pts[:, 0], kind="stable")
        pts = pts[order]
        if np.any(np.diff(pts[:, 0]) == 0.0):
            raise TiedFirstCoordinate("two points share a first coordinate exactly")
        if not _convex_position(pts, self.dim):
            raise DegenerateInput("points are not in convex position")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def m(self) -> int:
        return self.points.shape[0]

    def polytope(self) -> Polytope:
        return Polytope(self.dim, self.points)

    def scaled(self, factor: float) -> "CoordinateRep":
        return CoordinateRep(self.dim, self.points * float(factor))

    def to_json(self) -> dict:
        return {"dim": self.dim, "points": self.points.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "CoordinateRep":
        return cls(int(obj["dim"]), np.asarray(obj["points"], dtype=float))


def _convex_position(pts: np.ndarray, dim: int) -> bool:
    m = pts.shape[0]
    if dim == 1:
        return m == 2
    try:
        hull = convex_hull(pts, dim)
    except (DegenerateInput, TiedFirstCoordinate):
        return False
    return hull.n_vertices == m


def origin_interior(rep: CoordinateRep) -> bool:
    if rep.dim == 2:
        verts = ccw_order(rep.points)
        _, offsets = polygon_edge_normals(verts)
        return bool(np.all(offsets > EPS_SIGN))
    if rep.dim == 1:
        return float(rep.points[0, 0]) < -EPS_SIGN < EPS_SIGN < float(rep.points[1, 0])
    from scipy.spatial import ConvexHull as _Qhull

    qh = _Qhull(rep.points)
    return bool(np.all(-qh.equations[:, -1] > EPS_SIGN))


def log_eval_phi(rep: CoordinateRep) -> float:
    """log of the limit density; -inf when the origin is not interior."""
    d = rep.dim
    if not origin_interior(rep):
        return -math.inf
    w = 2.0 / omega(d + 1)
    ext = exterior_inverse_power_integral(rep.polytope(), d)
    norms = np.linalg.norm(rep.points, axis=1)
    return rep.m * math.log(w) - (d + 1) * float(np.sum(np.log(norms))) - w * ext


def eval_phi(rep: CoordinateRep) -> float:
    """Limit density of rescaled heavy-tailed hulls at a vertex tuple.

    Vanishes (by continuity of the exponent) whenever the origin is not
    interior to the hull; that case returns 0.0 rather than raising.
    """
    lg = log_eval_phi(rep)
    return 0.0 if lg == -math.inf else math.exp(lg)


def log_eval_phi_n(rep: CoordinateRep, n: int) -> float:
    d = rep.dim
    m = rep.m
    if n < m:
        raise ValueError("need n >= m")
    w = 2.0 / omega(d + 1)
    norms2 = np.einsum("ij,ij->i", rep.points, rep.points)
    log_points = m * math.log(w) + m * d * math.log(n) - (d + 1) / 2.0 * float(
        np.sum(np.log1p(n * n * norms2))
    )
    log_choose = float(np.sum(np.log(np.arange(n, n - m, -1, dtype=float))))
    if n == m:
        tail = 0.0
    else:
        if d != 2:
            raise DegenerateInput("phi_n tail term implemented for d = 2")
        scaled = ccw_order(rep.points) * n
        if origin_interior(rep):
            delta = pc_polygon_complement(scaled)
        else:
            delta = 1.0 - pc_polygon(scaled)
        if delta >= 1.0:
            return -math.inf
        tail = (n - m) * math.log1p(-delta)
    return log_choose + log_points + tail


def eval_phi_n(rep: CoordinateRep, n: int) -> float:
    """Density of the rescaled n-point hull's vertex tuple (d = 2 exact)."""
    lg = log_eval_phi_n(rep, n)
    return 0.0 if lg == -math.inf else math.exp(lg)


# ---------------------------------------------------------------------------
# Reweighting identities
# ---------------------------------------------------------------------------


def size_bias_weight(cone: PolyhedralCone, n: int, d: int) -> float:
    """C(n, d+1) * alpha(cone): the density tying the pole cell to the
    rotated uniformly-chosen cell."""
    return schlaefli_count(n, d + 1) * solid_angle(cone)


def limit_density_factor(p: Polytope, d: int) -> float:
    """d! omega_{d+1} / (2 vol p): typical-cell over zero-cell density."""
    vol = polytope_volume(p)
    if vol <= EPS_SIGN:
        raise ZeroVolume("polytope has zero volume")
    return math.factorial(d) * omega(d + 1) / (2.0 * vol)
