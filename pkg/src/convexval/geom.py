"""Polytope geometry in ambient dimension 1..3.

Polytopes are stored by their H-representation ``A x <= b``; vertices are
enumerated on demand from all ``d``-subsets of the boundary hyperplanes.
Intrinsic volumes are computed inside the affine hull, so a segment in the
plane has ``V_1`` equal to its length and ``V_2 = 0``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import linprog

from .constants import GEOM_TOL, KAPPA, ORTHO_TOL
from .exceptions import (
    DimensionMismatch,
    EmptyInput,
    SampleBudgetTooSmall,
    Unbounded,
)

_COMBO_CACHE: dict[tuple[int, int], np.ndarray] = {}


def _combos(m: int, d: int) -> np.ndarray:
    key = (m, d)
    if key not in _COMBO_CACHE:
        _COMBO_CACHE[key] = np.array(
            list(itertools.combinations(range(m), d)), dtype=np.intp
        ).reshape(-1, d)
    return _COMBO_CACHE[key]


def normalize_halfspaces(A, b):
    """Scale rows to unit normals. Zero rows are dropped when ``0 <= b``.

    Returns ``(A, b, infeasible)``.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).ravel()
    norms = np.linalg.norm(A, axis=1)
    zero = norms <= 1e-14
    infeasible = bool(np.any(b[zero] < -GEOM_TOL))
    keep = ~zero
    A = A[keep] / norms[keep, None]
    b = b[keep] / norms[keep]
    return A, b, infeasible


def enumerate_vertices(A, b, tol: float = GEOM_TOL) -> np.ndarray:
    """All vertices of ``{x : A x <= b}`` by brute force over hyperplane d-subsets.

    Works in any dimension; rows of ``A`` are assumed unit length.  The
    polyhedron must be pointed for the output to describe it.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, d = A.shape
    if m < d:
        return np.empty((0, d))
    idx = _combos(m, d)
    M = A[idx]
    rhs = b[idx]
    det = np.linalg.det(M)
    ok = np.abs(det) > 1e-12
    if not np.any(ok):
        return np.empty((0, d))
    X = np.linalg.solve(M[ok], rhs[ok][..., None])[..., 0]
    scale = max(1.0, float(np.max(np.abs(b))) if b.size else 1.0)
    slack = X @ A.T - b
    feas = np.all(slack <= tol * scale, axis=1)
    X = X[feas]
    return dedup_points(X, tol * scale)


def _plane_basis(n: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal pair spanning the plane orthogonal to the unit vector ``n``."""
    x, y, z = n
    if abs(x) < 0.9:
        e1 = np.array([0.0, z, -y])
    else:
        e1 = np.array([-z, 0.0, x])
    e1 /= math.sqrt(float(e1 @ e1))
    e2 = np.array([y * e1[2] - z * e1[1], z * e1[0] - x * e1[2], x * e1[1] - y * e1[0]])
    return e1, e2


def dedup_points(X: np.ndarray, tol: float) -> np.ndarray:
    if len(X) <= 1:
        return X
    # lexicographic sort keeps output deterministic
    X = X[np.lexsort(X.T[::-1])]
    close = np.max(np.abs(X[:, None, :] - X[None, :, :]), axis=2) <= tol
    dup = np.any(np.tril(close, k=-1), axis=1)
    return X[~dup]


def affine_frame(V: np.ndarray, tol: float = GEOM_TOL):
    """Orthonormal frame of the affine hull of the rows of ``V``.

    Returns ``(origin, basis)`` with ``basis`` of shape ``(r, d)``.
    """
    origin = V.mean(axis=0)
    if len(V) == 1:
        return origin, np.empty((0, V.shape[1]))
    D = V - origin
    scale = max(1.0, float(np.max(np.abs(V))))
    _, s, vt = np.linalg.svd(D, full_matrices=False)
    r = int(np.sum(s > tol * scale))
    return origin, vt[:r]


def _order_polygon(Y: np.ndarray) -> np.ndarray:
    """Counter-clockwise order of points in convex position (2-D coordinates)."""
    c = Y.mean(axis=0)
    ang = np.arctan2(Y[:, 1] - c[1], Y[:, 0] - c[0])
    return np.argsort(ang, kind="stable")


def _polygon_area_perimeter(Y: np.ndarray) -> tuple[float, float]:
    Z = Y[_order_polygon(Y)]
    Zn = np.roll(Z, -1, axis=0)
    area = 0.5 * abs(float(np.sum(Z[:, 0] * Zn[:, 1] - Zn[:, 0] * Z[:, 1])))
    per = float(np.sum(np.linalg.norm(Zn - Z, axis=1)))
    return area, per


@dataclass(frozen=True)
class _Face2:
    """A 2-dimensional face embedded in R^3: ordered vertices and unit normal."""

    points: np.ndarray
    normal: np.ndarray


class Polytope:
    """Compact convex polytope ``{x : A x <= b}`` in dimension 1, 2 or 3.

    ``check_bounded=False`` skips the recession-cone LP; use it only when
    boundedness is guaranteed by construction (sub-level sets of coercive
    functions, intersections with a bounded set).
    """

    def __init__(self, A, b, dim: int | None = None, check_bounded: bool = True):
        A = np.asarray(A, dtype=float)
        if A.ndim == 1:
            if dim is None:
                raise DimensionMismatch("cannot infer dimension of an empty H-representation")
            A = A.reshape(-1, dim)
        if dim is None:
            dim = A.shape[1]
        if A.shape[1] != dim:
            raise DimensionMismatch(f"normals have length {A.shape[1]}, expected {dim}")
        if dim not in (1, 2, 3):
            raise DimensionMismatch(f"ambient dimension {dim} not in 1..3")
        self.dim = int(dim)
        A, b, infeasible = normalize_halfspaces(A.reshape(-1, dim), b)
        self.A = A
        self.b = b
        self._infeasible = infeasible
        if check_bounded:
            self._check_bounded()

    # construction helpers

    @classmethod
    def from_halfspaces(cls, halfspaces, dim: int | None = None, **kw) -> "Polytope":
        A = [np.atleast_1d(np.asarray(c, dtype=float)) for c, _ in halfspaces]
        b = [float(d) for _, d in halfspaces]
        if dim is None:
            dim = len(A[0])
        return cls(np.array(A).reshape(-1, dim), np.array(b), dim=dim, **kw)

    @classmethod
    def box(cls, lo, hi) -> "Polytope":
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        hi = np.atleast_1d(np.asarray(hi, dtype=float))
        d = len(lo)
        eye = np.eye(d)
        return cls(np.vstack([eye, -eye]), np.concatenate([hi, -lo]), dim=d, check_bounded=False)

    @classmethod
    def point(cls, x) -> "Polytope":
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return cls.box(x, x)

    @classmethod
    def empty(cls, dim: int) -> "Polytope":
        e = np.zeros(dim)
        e[0] = 1.0
        return cls(np.vstack([e, -e]), np.array([-1.0, 0.0]), dim=dim, check_bounded=False)

    @classmethod
    def from_vertices(cls, V) -> "Polytope":
        """H-representation of the convex hull of a point set."""
        V = np.atleast_2d(np.asarray(V, dtype=float))
        d = V.shape[1]
        origin, basis = affine_frame(V)
        r = len(basis)
        rows, rhs = [], []
        # equalities pinning the affine hull
        if r < d:
            _, _, vt = np.linalg.svd(np.vstack([basis, np.zeros((d - r, d))]))
            complement = vt[r:]
            for n in complement:
                rows += [n, -n]
                rhs += [n @ origin, -(n @ origin)]
        Y = (V - origin) @ basis.T
        if r == 1:
            rows += [basis[0], -basis[0]]
            rhs += [Y.max() + basis[0] @ origin, -Y.min() - basis[0] @ origin]
        elif r >= 2:
            from scipy.spatial import ConvexHull

            hull = ConvexHull(Y)
            for eq in hull.equations:
                n_loc, off = eq[:-1], eq[-1]
                n = n_loc @ basis
                rows.append(n)
                rhs.append(-off + n @ origin)
        return cls(np.array(rows).reshape(-1, d), np.array(rhs), dim=d, check_bounded=False)

    # representations

    def _check_bounded(self) -> None:
        d = self.dim
        if self._infeasible:
            return
        if self.is_empty:
            # no vertices: either infeasible or the polyhedron contains a line
            res = linprog(np.zeros(d), A_ub=self.A, b_ub=self.b, bounds=[(None, None)] * d, method="highs")
            if res.status == 0:
                raise Unbounded("halfspaces describe a polyhedron without vertices")
            return
        bounds = [(-1.0, 1.0)] * d
        for j in range(d):
            for sign in (1.0, -1.0):
                c = np.zeros(d)
                c[j] = -sign
                res = linprog(c, A_ub=self.A, b_ub=np.zeros(len(self.A)), bounds=bounds, method="highs")
                if res.status == 0 and -res.fun > 1e-9:
                    raise Unbounded("halfspaces admit a nontrivial recession direction")

    @cached_property
    def vertices(self) -> np.ndarray:
        if self._infeasible:
            return np.empty((0, self.dim))
        return enumerate_vertices(self.A, self.b)

    @property
    def is_empty(self) -> bool:
        return len(self.vertices) == 0

    @cached_property
    def scale(self) -> float:
        if self.is_empty:
            return 1.0
        return max(1.0, float(np.max(np.abs(self.vertices))))

    @cached_property
    def _frame(self):
        return affine_frame(self.vertices)

    @property
    def affine_dim(self) -> int:
        return affine_dim(self)

    @cached_property
    def intrinsic_volumes(self) -> np.ndarray:
        return intrinsic_volumes(self)

    @property
    def volume(self) -> float:
        return float(self.intrinsic_volumes[self.dim])

    def contains(self, X, tol: float = GEOM_TOL) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.all(X @ self.A.T - self.b <= tol * self.scale, axis=1)

    def with_halfspace(self, c, d, check_bounded: bool = False) -> "Polytope":
        c = np.atleast_1d(np.asarray(c, dtype=float))
        return Polytope(np.vstack([self.A, c]), np.append(self.b, d), dim=self.dim, check_bounded=check_bounded)

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        if self.is_empty:
            raise EmptyInput("empty polytope has no bounding box")
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def __repr__(self) -> str:
        if self.is_empty:
            return f"Polytope(dim={self.dim}, empty)"
        return f"Polytope(dim={self.dim}, vertices={len(self.vertices)}, affine_dim={self.affine_dim})"

    # faces, used by intrinsic volumes and distance queries

    @cached_property
    def _facets3(self) -> list[tuple[np.ndarray, np.ndarray, float]]:
        """Facets of a full-dimensional 3-polytope: (ordered vertex indices, unit normal, offset)."""
        V = self.vertices
        tol = GEOM_TOL * self.scale
        inc = np.abs(V @ self.A.T - self.b) <= tol
        seen: set[tuple[int, ...]] = set()
        facets = []
        for i in np.flatnonzero(inc.sum(axis=0) >= 3):
            idx = np.flatnonzero(inc[:, i])
            key = tuple(idx)
            if key in seen:
                continue
            n = self.A[i]
            e1, e2 = _plane_basis(n)
            Y = V[idx] @ np.array([e1, e2]).T
            order = _order_polygon(Y)
            Z = Y[order]
            Zn = np.concatenate([Z[1:], Z[:1]])
            area = 0.5 * abs(float(np.sum(Z[:, 0] * Zn[:, 1] - Zn[:, 0] * Z[:, 1])))
            # a supporting plane through an edge only is not a facet; points
            # within tol of a segment of length diam span at most tol * diam
            diam = float(np.max(np.ptp(Y, axis=0)))
            if area <= tol * diam:
                continue
            seen.add(key)
            facets.append((idx[order], n, float(self.b[i]), area))
        return facets

    @cached_property
    def faces(self):
        """``(vertices, edges, polygons)`` where edges are index pairs and
        polygons are :class:`_Face2` (only in ambient dimension 3)."""
        V = self.vertices
        r = self.affine_dim
        edges: list[tuple[int, int]] = []
        polys: list[_Face2] = []
        if r == 1:
            origin, basis = self._frame
            y = (V - origin) @ basis[0]
            edges = [(int(np.argmin(y)), int(np.argmax(y)))]
        elif r == 2:
            origin, basis = self._frame
            order = _order_polygon((V - origin) @ basis.T)
            edges = [(int(order[i]), int(order[(i + 1) % len(order)])) for i in range(len(order))]
            if self.dim == 3:
                P = V[order]
                polys.append(_Face2(P, _polygon_normal(P)))
        elif r == 3:
            eset: set[tuple[int, int]] = set()
            for ordered, _, _, _ in self._facets3:
                P = V[ordered]
                polys.append(_Face2(P, _polygon_normal(P)))
                for a, c in zip(ordered, np.roll(ordered, -1)):
                    eset.add((int(min(a, c)), int(max(a, c))))
            edges = sorted(eset)
        return V, edges, polys

    def distance(self, X) -> np.ndarray:
        """Euclidean distance from each row of ``X`` to the polytope."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.is_empty:
            raise EmptyInput("distance to an empty polytope")
        out = np.empty(len(X))
        chunk = 100_000
        for s in range(0, len(X), chunk):
            out[s : s + chunk] = self._distance_chunk(X[s : s + chunk])
        return out

    def _distance_chunk(self, X: np.ndarray) -> np.ndarray:
        V, edges, polys = self.faces
        diff = X[:, None, :] - V[None, :, :]
        best = np.sqrt(np.min(np.einsum("nkd,nkd->nk", diff, diff), axis=1))
        for i, j in edges:
            p, q = V[i], V[j]
            e = q - p
            ee = float(e @ e)
            if ee == 0.0:
                continue
            s = np.clip((X - p) @ e / ee, 0.0, 1.0)
            proj = p + s[:, None] * e
            best = np.minimum(best, np.linalg.norm(X - proj, axis=1))
        for face in polys:
            P, n = face.points, face.normal
            h = (X - P[0]) @ n
            # in-plane inward edge normals n x (c - a); the projection inherits their signs
            W = np.cross(n, np.roll(P, -1, axis=0) - P)
            inside = np.all(X @ W.T - np.einsum("ij,ij->i", P, W) >= -1e-12, axis=1)
            best = np.where(inside, np.minimum(best, np.abs(h)), best)
        if self.affine_dim == self.dim:
            best = np.where(self.contains(X, tol=0.0), 0.0, best)
        return best

    # serialization

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "halfspaces": [{"c": [float(v) for v in c], "d": float(d)} for c, d in zip(self.A, self.b)],
            "vertices": [[float(v) for v in x] for x in self.vertices],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Polytope":
        dim = int(data["dim"])
        hs = data.get("halfspaces")
        if hs:
            return cls.from_halfspaces([(h["c"], h["d"]) for h in hs], dim=dim)
        if data.get("vertices"):
            return cls.from_vertices(data["vertices"])
        raise EmptyInput("polytope JSON needs halfspaces or vertices")


def _polygon_normal(P: np.ndarray) -> np.ndarray:
    # Newell's method, orientation follows the vertex order
    n = np.zeros(3)
    for a, c in zip(P, np.roll(P, -1, axis=0)):
        n += np.cross(a, c)
    return n / np.linalg.norm(n)


def hrep_to_vrep(p: Polytope) -> Polytope:
    """Populate the vertex cache; raises :class:`Unbounded` for unbounded input."""
    p._check_bounded()
    _ = p.vertices
    return p


def intersect(p: Polytope, q: Polytope) -> Polytope:
    if p.dim != q.dim:
        raise DimensionMismatch(f"cannot intersect dimensions {p.dim} and {q.dim}")
    return Polytope(np.vstack([p.A, q.A]), np.concatenate([p.b, q.b]), dim=p.dim, check_bounded=False)


def affine_dim(p: Polytope) -> int:
    if p.is_empty:
        return -1
    return len(p._frame[1])


def intrinsic_volumes(p: Polytope) -> np.ndarray:
    """``(V_0, ..., V_dim)`` computed in the affine hull of ``p``."""
    out = np.zeros(p.dim + 1)
    if p.is_empty:
        return out
    out[0] = 1.0
    V = p.vertices
    origin, basis = p._frame
    r = len(basis)
    if r == 1:
        y = (V - origin) @ basis[0]
        out[1] = float(y.max() - y.min())
    elif r == 2:
        area, per = _polygon_area_perimeter((V - origin) @ basis.T)
        out[1] = per / 2.0
        out[2] = area
    elif r == 3:
        c = V.mean(axis=0)
        facets = p._facets3
        surf = sum(f[3] for f in facets)
        vol = sum(area * (off - float(n @ c)) / 3.0 for _, n, off, area in facets)
        # each edge is shared by exactly two facet cycles
        normals: dict[tuple[int, int], list[np.ndarray]] = {}
        for ordered, n, _, _ in facets:
            ring = ordered.tolist()
            for a, b in zip(ring, ring[1:] + ring[:1]):
                normals.setdefault((min(a, b), max(a, b)), []).append(n)
        mean_width = 0.0
        for (a, b), ns in normals.items():
            if len(ns) != 2:
                continue
            cosang = min(1.0, max(-1.0, float(ns[0] @ ns[1])))
            mean_width += float(np.linalg.norm(V[a] - V[b])) * math.acos(cosang)
        out[1] = mean_width / (2.0 * math.pi)
        out[2] = surf / 2.0
        out[3] = vol
    return out


class SteinerEstimate(NamedTuple):
    volume: float
    stderr: float


def steiner_mc_volume(p: Polytope, rho: float, samples: int, seed: int) -> SteinerEstimate:
    """Monte-Carlo volume of the parallel body ``{x : dist(x, p) <= rho}``."""
    if samples < 10_000:
        raise SampleBudgetTooSmall(f"need at least 1e4 samples, got {samples}")
    if rho < 0:
        raise ValueError("rho must be nonnegative")
    lo, hi = p.bounding_box()
    lo = lo - rho
    hi = hi + rho
    box_vol = float(np.prod(hi - lo))
    if box_vol == 0.0:
        return SteinerEstimate(0.0, 0.0)
    rng = np.random.default_rng(seed)
    X = rng.uniform(lo, hi, size=(samples, p.dim))
    hit = np.zeros(samples, dtype=bool)
    if p.affine_dim == p.dim:
        # a violated halfspace bounds the distance from below
        viol = np.max(X @ p.A.T - p.b, axis=1)
        hit = viol <= 0.0
        todo = (viol > 0.0) & (viol <= rho)
    else:
        todo = np.ones(samples, dtype=bool)
    # the nearest vertex bounds it from above
    idx = np.flatnonzero(todo)
    V = p.vertices
    near = np.min(np.sum((X[idx, None, :] - V[None, :, :]) ** 2, axis=2), axis=1) <= rho * rho
    hit[idx[near]] = True
    todo[idx[near]] = False
    hit[todo] = p.distance(X[todo]) <= rho
    frac = float(np.mean(hit))
    return SteinerEstimate(box_vol * frac, box_vol * math.sqrt(frac * (1.0 - frac) / samples))


def steiner_fit(p: Polytope, rhos: Sequence[float], samples: int, seed: int) -> np.ndarray:
    """Recover ``(V_0, ..., V_n)`` from Monte-Carlo parallel volumes.

    Fits ``V_n(K + rho B) = sum_k kappa_{n-k} V_k(K) rho^{n-k}`` by weighted
    least squares in the unknowns ``V_k``.
    """
    n = p.dim
    rows, rhs, w = [], [], []
    for i, rho in enumerate(rhos):
        est = steiner_mc_volume(p, rho, samples, seed + i)
        rows.append([KAPPA[n - k] * rho ** (n - k) for k in range(n + 1)])
        rhs.append(est.volume)
        w.append(1.0 / max(est.stderr, 1e-12))
    M = np.array(rows) * np.array(w)[:, None]
    y = np.array(rhs) * np.array(w)
    sol, *_ = np.linalg.lstsq(M, y, rcond=None)
    return sol


def hausdorff_distance(p: Polytope, q: Polytope) -> float:
    if p.is_empty or q.is_empty:
        raise EmptyInput("Hausdorff distance needs nonempty polytopes")
    return float(max(np.max(q.distance(p.vertices)), np.max(p.distance(q.vertices))))


@dataclass(frozen=True)
class RigidMotion:
    """``x -> rotation @ x + translation``; ``rotation`` may include reflections."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        R = np.atleast_2d(np.asarray(self.rotation, dtype=float))
        x0 = np.atleast_1d(np.asarray(self.translation, dtype=float))
        if R.shape != (len(x0), len(x0)):
            raise DimensionMismatch("rotation and translation sizes disagree")
        if np.max(np.abs(R.T @ R - np.eye(len(x0)))) > ORTHO_TOL * 100:
            raise ValueError("rotation is not orthogonal")
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", x0)

    @property
    def dim(self) -> int:
        return len(self.translation)

    @classmethod
    def identity(cls, dim: int) -> "RigidMotion":
        return cls(np.eye(dim), np.zeros(dim))

    @classmethod
    def random(cls, dim: int, rng: np.random.Generator, shift: float = 1.0) -> "RigidMotion":
        Q, R = np.linalg.qr(rng.standard_normal((dim, dim)))
        Q = Q * np.sign(np.diag(R))
        return cls(Q, rng.uniform(-shift, shift, dim))

    def __call__(self, X):
        return np.asarray(X, dtype=float) @ self.rotation.T + self.translation

    def inverse(self) -> "RigidMotion":
        return RigidMotion(self.rotation.T, -self.rotation.T @ self.translation)


def apply_motion(p: Polytope, T: RigidMotion) -> Polytope:
    """Image ``T(p)``."""
    if T.dim != p.dim:
        raise DimensionMismatch("motion and polytope dimensions differ")
    ART = p.A @ T.rotation.T
    return Polytope(ART, p.b + ART @ T.translation, dim=p.dim, check_bounded=False)


def minkowski_scale(p: Polytope, s: float) -> Polytope:
    if s < 0:
        raise ValueError("scale factor must be nonnegative")
    if p.is_empty:
        return p
    if s == 0:
        return Polytope.point(np.zeros(p.dim))
    return Polytope(p.A, s * p.b, dim=p.dim, check_bounded=False)
