"""Stationary isotropic Poisson hyperplane tessellations in R^d.

Hyperplanes are pairs (direction, distance) with uniform directions and
distances, at 2*gamma*R expected hits of the ball B(0, R).  The zero cell
is sampled exactly by radius doubling: once the cell fits strictly inside
the simulated ball no unseen hyperplane can cut it.  Typical cells come in
two flavors: complete cells inside a window picked uniformly and recentered
at a uniform interior point, or zero cells carrying inverse-volume weights
for self-normalized averages.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .densities import gamma_intensity
from .errors import DegenerateInput, EmptyWindow, IterationCap, ZeroVolume
from .geometry import (
    EPS_SIGN,
    Polytope,
    ccw_order,
    polygon_area,
    polygon_edge_normals,
    polytope_volume,
)
from .samplers import sample_uniform_sphere_batch

intensity_gamma = gamma_intensity


@dataclass(frozen=True)
class AffineHyperplane:
    """{x : <direction, x> = distance} with distance >= 0."""

    direction: np.ndarray
    distance: float


@dataclass(frozen=True)
class HyperplaneProcessSample:
    intensity: float
    window_radius: float
    hyperplanes: list[AffineHyperplane]


@dataclass(frozen=True)
class Cell:
    polytope: Polytope
    complete: bool


@dataclass(frozen=True)
class ZeroCellSample:
    polytope: Polytope
    radius: float
    hyperplanes: list[AffineHyperplane]


@dataclass(frozen=True)
class WeightedPolytope:
    polytope: Polytope
    weight: float
    method: str


def sample_pht(
    d: int, gamma: float, R: float, rng: np.random.Generator
) -> HyperplaneProcessSample:
    """All hyperplanes of the process hitting B(0, R): Poisson(2 gamma R)
    many, uniform directions, uniform distances."""
    if R <= 0 or gamma <= 0:
        raise DegenerateInput("need positive gamma and R")
    count = int(rng.poisson(2.0 * gamma * R))
    dirs = sample_uniform_sphere_batch(d - 1, count, rng) if count else np.empty((0, d))
    dists = R * rng.random(count)
    planes = [AffineHyperplane(dirs[i], float(dists[i])) for i in range(count)]
    return HyperplaneProcessSample(intensity=gamma, window_radius=R, hyperplanes=planes)


def _sample_pht_shell(
    d: int, gamma: float, r_lo: float, r_hi: float, rng: np.random.Generator
) -> list[AffineHyperplane]:
    count = int(rng.poisson(2.0 * gamma * (r_hi - r_lo)))
    dirs = sample_uniform_sphere_batch(d - 1, count, rng) if count else np.empty((0, d))
    dists = r_lo + (r_hi - r_lo) * rng.random(count)
    return [AffineHyperplane(dirs[i], float(dists[i])) for i in range(count)]


# ---------------------------------------------------------------------------
# Planar polygon clipping
# ---------------------------------------------------------------------------


def _box(R: float) -> np.ndarray:
    return np.array([[-R, -R], [R, -R], [R, R], [-R, R]], dtype=float)


def clip_polygon(verts: np.ndarray, normal, offset: float, eps: float = 1e-12) -> np.ndarray:
    """Intersection of a ccw convex polygon with {x : <normal, x> <= offset}."""
    if len(verts) == 0:
        return verts
    normal = np.asarray(normal, dtype=float)
    vals = verts @ normal - offset
    out: list[np.ndarray] = []
    m = len(verts)
    for i in range(m):
        a, va = verts[i], vals[i]
        b, vb = verts[(i + 1) % m], vals[(i + 1) % m]
        if va <= eps:
            out.append(a)
        if (va < -eps and vb > eps) or (va > eps and vb < -eps):
            t = va / (va - vb)
            out.append(a + t * (b - a))
    if len(out) < 3:
        return np.empty((0, 2))
    return np.array(out)


def intersect_halfplanes(
    normals: np.ndarray, offsets: np.ndarray, bound: float
) -> np.ndarray:
    """ccw vertices of the intersection of {<u_i, x> <= t_i} with a box."""
    poly = _box(bound)
    for u, t in zip(normals, offsets):
        poly = clip_polygon(poly, u, t)
        if len(poly) == 0:
            break
    return poly


# ---------------------------------------------------------------------------
# Zero cell
# ---------------------------------------------------------------------------


def _zero_cell_polytope(
    d: int, planes: list[AffineHyperplane], bound: float
) -> np.ndarray:
    """Vertices of the cell containing the origin, clipped to a box."""
    if d == 2:
        if planes:
            normals = np.array([h.direction for h in planes])
            offsets = np.array([h.distance for h in planes])
        else:
            normals = np.empty((0, 2))
            offsets = np.empty(0)
        return intersect_halfplanes(normals, offsets, bound)
    from scipy.spatial import HalfspaceIntersection

    rows = [np.concatenate([h.direction, [-h.distance]]) for h in planes]
    for j in range(d):
        e = np.zeros(d + 1)
        e[j] = 1.0
        e[d] = -bound
        rows.append(e.copy())
        e[j] = -1.0
        rows.append(e)
    hs = HalfspaceIntersection(np.array(rows), np.zeros(d))
    return hs.intersections


def sample_zero_cell(
    d: int,
    gamma: float,
    rng: np.random.Generator,
    initial_radius: float | None = None,
    max_doublings: int = 20,
) -> ZeroCellSample:
    """Exact zero cell: grow the simulation radius until the cell fits.

    Hyperplanes with distance beyond the final radius cannot intersect a
    cell contained in the open ball of that radius, so the result is the
    true zero cell of the infinite process.
    """
    if d not in (2, 3):
        raise DegenerateInput("zero cells supported for d in {2, 3}")
    R = initial_radius if initial_radius is not None else 5.0 / gamma
    planes = _sample_pht_shell(d, gamma, 0.0, R, rng)
    for _ in range(max_doublings):
        verts = _zero_cell_polytope(d, planes, bound=R)
        if len(verts) >= d + 1:
            vmax = float(np.max(np.linalg.norm(verts, axis=1)))
            if vmax < R * (1.0 - 1e-12):
                return ZeroCellSample(
                    polytope=Polytope(d, verts), radius=R, hyperplanes=planes
                )
        planes = planes + _sample_pht_shell(d, gamma, R, 2.0 * R, rng)
        R *= 2.0
    raise IterationCap("zero cell did not close after radius doublings")


# ---------------------------------------------------------------------------
# Typical cell
# ---------------------------------------------------------------------------


def window_cells(
    d: int, gamma: float, R: float, rng: np.random.Generator
) -> list[Cell]:
    """All cells of a simulated window, flagged complete when they lie
    strictly inside B(0, R) (only those are cells of the full tessellation)."""
    if d != 2:
        raise DegenerateInput("window extraction implemented for d = 2")
    sample = sample_pht(d, gamma, R, rng)
    polys = [_box(R)]
    for h in sample.hyperplanes:
        nxt: list[np.ndarray] = []
        for poly in polys:
            vals = poly @ h.direction - h.distance
            if np.all(vals <= EPS_SIGN):
                nxt.append(poly)
            elif np.all(vals >= -EPS_SIGN):
                nxt.append(poly)
            else:
                lo = clip_polygon(poly, h.direction, h.distance)
                hi = clip_polygon(poly, -h.direction, -h.distance)
                if len(lo) >= 3:
                    nxt.append(lo)
                if len(hi) >= 3:
                    nxt.append(hi)
        polys = nxt
    cells = []
    for poly in polys:
        complete = bool(np.max(np.linalg.norm(poly, axis=1)) < R * (1.0 - 1e-12))
        cells.append(Cell(polytope=Polytope(2, poly), complete=complete))
    return cells


def uniform_point_in_polygon(verts_ccw: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Uniform point in a convex polygon: area-weighted fan triangle, then
    the square-root triangle map."""
    m = len(verts_ccw)
    areas = np.empty(m - 2)
    for i in range(1, m - 1):
        a, b, c = verts_ccw[0], verts_ccw[i], verts_ccw[i + 1]
        areas[i - 1] = 0.5 * abs(
            (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        )
    total = float(areas.sum())
    if total <= 0:
        raise ZeroVolume("cannot sample inside a degenerate polygon")
    k = int(rng.choice(m - 2, p=areas / total))
    a, b, c = verts_ccw[0], verts_ccw[k + 1], verts_ccw[k + 2]
    u1, u2 = rng.random(), rng.random()
    s = math.sqrt(u1)
    return (1 - s) * a + s * (1 - u2) * b + s * u2 * c


def sample_typical_cell(
    d: int,
    gamma: float,
    rng: np.random.Generator,
    method: str = "importance",
    window_radius: float | None = None,
    max_retries: int = 50,
) -> WeightedPolytope:
    """One draw for typical-cell averages.

    importance: a zero cell with weight 1/vol; expectations under the
    typical-cell law are self-normalized ratios E[h w]/E[w].  window: a
    uniformly chosen complete cell of a finite window, recentered at a
    uniform interior point (weight 1; finite-window bias shrinks with R).
    """
    if method == "importance":
        z0 = sample_zero_cell(d, gamma, rng)
        vol = polytope_volume(z0.polytope)
        if vol <= 0:
            raise ZeroVolume("zero cell has vanished")
        return WeightedPolytope(polytope=z0.polytope, weight=1.0 / vol, method=method)
    if method != "window":
        raise DegenerateInput(f"unknown method {method!r}")
    R = window_radius if window_radius is not None else 20.0 / gamma
    for _ in range(max_retries):
        complete = [c for c in window_cells(d, gamma, R, rng) if c.complete]
        if complete:
            cell = complete[int(rng.integers(len(complete)))]
            verts = ccw_order(cell.polytope.vertices)
            v = uniform_point_in_polygon(verts, rng)
            return WeightedPolytope(
                polytope=Polytope(d, verts - v), weight=1.0, method=method
            )
    raise EmptyWindow("no complete cell found; enlarge the window")


# ---------------------------------------------------------------------------
# Features
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CellFeatures:
    volume: float
    f_vector: tuple
    inradius: float
    diameter: float

    def as_array(self) -> np.ndarray:
        return np.array([self.volume, self.f_vector[0], self.inradius, self.diameter])


def _inradius_bisection(normals: np.ndarray, offsets: np.ndarray, hi: float) -> float:
    """Largest r with {x : <u_i, x> <= t_i - r} nonempty, by bisection."""
    lo = 0.0
    bound = float(np.max(np.abs(offsets))) + hi + 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        poly = intersect_halfplanes(normals, offsets - mid, bound)
        if len(poly) > 0:
            lo = mid
        else:
            hi = mid
    return lo


def cell_features(p: Polytope) -> CellFeatures:
    """Volume, face vector, inradius and diameter of a cell."""
    d = p.dim
    verts = p.vertices
    diam = 0.0
    for i in range(len(verts)):
        diffs = verts[i + 1 :] - verts[i]
        if len(diffs):
            diam = max(diam, float(np.max(np.linalg.norm(diffs, axis=1))))
    if d == 2:
        ordered = ccw_order(verts)
        vol = abs(polygon_area(ordered))
        normals, offsets = polygon_edge_normals(ordered)
        inr = _inradius_bisection(normals, offsets, hi=diam / 2.0 + 1e-9)
        m = len(ordered)
        return CellFeatures(volume=vol, f_vector=(m, m), inradius=inr, diameter=diam)
    if d == 3:
        from scipy.optimize import linprog
        from scipy.spatial import ConvexHull as _Qhull

        qh = _Qhull(verts)
        vol = float(qh.volume)
        # merge triangulated facets into planes
        planes: list[np.ndarray] = []
        for eq in qh.equations:
            if not any(np.linalg.norm(eq - q) <= 1e-8 for q in planes):
                planes.append(eq)
        f0 = len(qh.vertices)
        f2 = len(planes)
        f1 = f0 + f2 - 2
        eqs = np.array(planes)
        # Chebyshev center: max r s.t. a x + r <= b
        c = np.zeros(4)
        c[3] = -1.0
        A = np.hstack([eqs[:, :3], np.ones((len(eqs), 1))])
        b = -eqs[:, 3]
        res = linprog(c, A_ub=A, b_ub=b, bounds=[(None, None)] * 3 + [(0, None)])
        inr = float(res.x[3]) if res.success else 0.0
        return CellFeatures(volume=vol, f_vector=(f0, f1, f2), inradius=inr, diameter=diam)
    if d == 1:
        length = float(verts[:, 0].max() - verts[:, 0].min())
        return CellFeatures(volume=length, f_vector=(2,), inradius=length / 2, diameter=length)
    raise DegenerateInput("cell features supported for d <= 3")


def feature_array(p: Polytope) -> np.ndarray:
    return cell_features(p).as_array()
