"""Piecewise-linear coercive convex functions.

``u(x) = max_i (a_i . x + b_i)`` on a polyhedral domain ``{x : C x <= d}``
(all of space when there are no rows), and ``+inf`` outside.  This is the
computational stand-in for a lower semicontinuous coercive convex function.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, QhullError

from .constants import GEOM_TOL
from .exceptions import (
    ConvexValError,
    DimensionMismatch,
    EuclideanNormNotPL,
    NonConvexUnion,
    NonPositiveLambda,
    NotCoercive,
)
from .geom import Polytope, RigidMotion, enumerate_vertices, normalize_halfspaces


class CoercivityResult(NamedTuple):
    coercive: bool
    a: float
    b: float


def coercivity_check(slopes, intercepts=None) -> CoercivityResult:
    """Is ``max_i a_i . x + b_i`` coercive on all of space?

    True iff the origin is interior to the convex hull of the slopes.  The
    witness ``a`` is the distance from the origin to the boundary of that
    hull, so ``u(x) >= a |x| + b`` with ``b = min_i b_i``.
    """
    S = np.atleast_2d(np.asarray(slopes, dtype=float))
    b = 0.0 if intercepts is None else float(np.min(intercepts))
    d = S.shape[1]
    if d == 1:
        a = min(float(S.max()), float(-S.min()))
        return CoercivityResult(a > GEOM_TOL, max(a, 0.0), b)
    if len(S) <= d:
        return CoercivityResult(False, 0.0, b)
    try:
        hull = ConvexHull(S)
    except QhullError:
        return CoercivityResult(False, 0.0, b)
    # equations: n . x + off <= 0 inside, n unit
    a = float(np.min(-hull.equations[:, -1]))
    return CoercivityResult(a > GEOM_TOL, max(a, 0.0), b)


def _cone_is_trivial(rows: np.ndarray) -> bool:
    """``{r : rows @ r <= 0} == {0}``."""
    d = rows.shape[1]
    for j in range(d):
        for sign in (1.0, -1.0):
            c = np.zeros(d)
            c[j] = -sign
            res = linprog(c, A_ub=rows, b_ub=np.zeros(len(rows)), bounds=[(-1, 1)] * d, method="highs")
            if res.status == 0 and -res.fun > 1e-9:
                return False
    return True


def _feasible(A: np.ndarray, b: np.ndarray, d: int) -> bool:
    if len(A) == 0:
        return True
    res = linprog(np.zeros(d), A_ub=A, b_ub=b, bounds=[(None, None)] * d, method="highs")
    if res.status == 0:
        return True
    # HiGHS is strict; accept constraint sets that are feasible up to tolerance
    res = linprog(np.zeros(d), A_ub=A, b_ub=b + GEOM_TOL * max(1.0, float(np.max(np.abs(b)))), bounds=[(None, None)] * d, method="highs")
    return res.status == 0


class MinInfo(NamedTuple):
    value: float
    argmin: Polytope


class ConvexFn:
    """Max-affine function plus polyhedral domain indicator.

    Parameters
    ----------
    slopes : array (p, n)
    intercepts : array (p,)
    domain : Polytope, ``(C, d)`` pair, or None for all of space
    validate : run the nonempty-domain and coercivity checks (LPs)
    """

    def __init__(self, slopes=None, intercepts=None, domain=None, dim: int | None = None,
                 infty: bool = False, validate: bool = True):
        self.is_infty = bool(infty)
        if slopes is None:
            if dim is None:
                raise DimensionMismatch("dim required without slopes")
            slopes = np.zeros((1, dim))
            intercepts = np.zeros(1)
        S = np.asarray(slopes, dtype=float)
        if S.ndim == 1:
            S = S.reshape(-1, 1) if dim in (None, 1) else S.reshape(1, -1)
        if dim is None:
            dim = S.shape[1]
        if S.shape[1] != dim or dim not in (1, 2, 3):
            raise DimensionMismatch(f"bad slope shape {S.shape} for dim {dim}")
        self.dim = int(dim)
        self.slopes = S
        self.intercepts = np.asarray(intercepts, dtype=float).ravel()
        if len(self.intercepts) != len(S) or len(S) == 0:
            raise DimensionMismatch("need one intercept per slope, at least one piece")
        # repeated pieces only inflate the vertex enumeration
        _, first = np.unique(np.hstack([S, self.intercepts[:, None]]), axis=0, return_index=True)
        if len(first) < len(S):
            first = np.sort(first)
            self.slopes = S[first]
            self.intercepts = self.intercepts[first]
        if domain is None:
            C, dd = np.empty((0, dim)), np.empty(0)
        elif isinstance(domain, Polytope):
            if domain.dim != dim:
                raise DimensionMismatch("domain dimension differs")
            C, dd = domain.A, domain.b
        else:
            C, dd = domain
            C = np.asarray(C, dtype=float).reshape(-1, dim)
            dd = np.asarray(dd, dtype=float).ravel()
            if len(C):
                C, dd, bad = normalize_halfspaces(C, dd)
                if bad:
                    raise ConvexValError("domain is empty")
        self.dom_A = C
        self.dom_b = dd
        if validate and not self.is_infty:
            self._validate()

    def _validate(self) -> None:
        if not _feasible(self.dom_A, self.dom_b, self.dim):
            raise ConvexValError("domain is empty")
        if self.is_free:
            if not coercivity_check(self.slopes).coercive:
                raise NotCoercive("origin is not interior to the hull of the slopes")
        elif not _cone_is_trivial(np.vstack([self.dom_A, self.slopes])):
            raise NotCoercive("function is not coercive on its domain")

    # constructors

    @classmethod
    def infty(cls, dim: int) -> "ConvexFn":
        return cls(dim=dim, infty=True, validate=False)

    @classmethod
    def indicator(cls, K: Polytope, level: float = 0.0) -> "ConvexFn":
        """``level + I_K``."""
        if K.is_empty:
            return cls.infty(K.dim)
        return cls(np.zeros((1, K.dim)), [level], domain=K, validate=False)

    @classmethod
    def abs(cls) -> "ConvexFn":
        return cls([[1.0], [-1.0]], [0.0, 0.0], validate=False)

    @classmethod
    def linf_norm(cls, dim: int) -> "ConvexFn":
        eye = np.eye(dim)
        return cls(np.vstack([eye, -eye]), np.zeros(2 * dim), validate=False)

    @classmethod
    def l1_norm(cls, dim: int) -> "ConvexFn":
        S = np.array(list(itertools.product([1.0, -1.0], repeat=dim)))
        return cls(S, np.zeros(len(S)), validate=False)

    # basic queries

    @property
    def is_free(self) -> bool:
        return len(self.dom_A) == 0

    @property
    def n_pieces(self) -> int:
        return len(self.slopes)

    @cached_property
    def domain_polytope(self) -> Polytope | None:
        """The domain as a Polytope, or None when it is unbounded."""
        if self.is_free:
            return None
        try:
            return Polytope(self.dom_A, self.dom_b, dim=self.dim)
        except ConvexValError:
            return None

    def __call__(self, x):
        return evaluate(self, x)

    def __repr__(self) -> str:
        if self.is_infty:
            return f"ConvexFn(dim={self.dim}, infty)"
        dom = "free" if self.is_free else f"{len(self.dom_A)} halfspaces"
        return f"ConvexFn(dim={self.dim}, pieces={self.n_pieces}, domain={dom})"

    # the epigraph drives minimum, breakpoints and growth bounds

    @cached_property
    def epigraph_vertices(self) -> np.ndarray:
        """Vertices ``(x, u(x))`` of the epigraph of ``u``."""
        d = self.dim
        rows = np.hstack([self.slopes, -np.ones((self.n_pieces, 1))])
        rhs = -self.intercepts
        if len(self.dom_A):
            rows = np.vstack([rows, np.hstack([self.dom_A, np.zeros((len(self.dom_A), 1))])])
            rhs = np.concatenate([rhs, self.dom_b])
        rows, rhs, _ = normalize_halfspaces(rows, rhs)
        V = enumerate_vertices(rows, rhs)
        if len(V) == 0:
            raise ConvexValError("epigraph has no vertices; function is not coercive")
        return V[np.argsort(V[:, d], kind="stable")]

    @cached_property
    def breakpoints(self) -> np.ndarray:
        """Sorted distinct values of ``u`` at epigraph vertices."""
        h = self.epigraph_vertices[:, self.dim]
        scale = max(1.0, float(np.max(np.abs(h))))
        out = [h[0]]
        for v in h[1:]:
            if v - out[-1] > GEOM_TOL * scale:
                out.append(v)
        return np.array(out)

    @property
    def minimum(self) -> float:
        # inf over the empty set
        if self.is_infty:
            return float("inf")
        return float(self.breakpoints[0])

    def sublevel_polytope(self, t: float) -> Polytope:
        """``{u <= t}`` as a polytope (may be empty)."""
        A = np.vstack([self.slopes, self.dom_A])
        b = np.concatenate([t - self.intercepts, self.dom_b])
        return Polytope(A, b, dim=self.dim, check_bounded=False)

    def growth_witness(self) -> tuple[float, float]:
        """``(a, b)`` with ``a > 0`` and ``u(x) >= a |x| + b`` everywhere."""
        if self.is_free:
            res = coercivity_check(self.slopes, self.intercepts)
            return res.a, res.b
        m = self.minimum
        x0 = self.epigraph_vertices[0, : self.dim]
        level = m + 1.0
        K = self.sublevel_polytope(level)
        R = float(np.max(np.linalg.norm(K.vertices - x0, axis=1)))
        if R <= GEOM_TOL:
            return 1.0, m - float(np.linalg.norm(x0))
        # convexity along rays from x0: u >= m + (level - m) |x - x0| / R outside K
        a = (level - m) / R
        return a, 2.0 * m - level - a * float(np.linalg.norm(x0))

    # serialization

    def to_dict(self) -> dict:
        if self.is_infty:
            return {"dim": self.dim, "infty": True}
        dom: dict | str = "free"
        if not self.is_free:
            dom = {"dim": self.dim, "halfspaces": [{"c": list(map(float, c)), "d": float(d)} for c, d in zip(self.dom_A, self.dom_b)]}
        return {
            "dim": self.dim,
            "pieces": [{"a": list(map(float, a)), "b": float(b)} for a, b in zip(self.slopes, self.intercepts)],
            "domain": dom,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ConvexFn":
        dim = int(data["dim"])
        if data.get("infty"):
            return cls.infty(dim)
        pieces = data.get("pieces") or [{"a": [0.0] * dim, "b": 0.0}]
        S = np.array([p["a"] for p in pieces], dtype=float).reshape(-1, dim)
        b = np.array([p["b"] for p in pieces], dtype=float)
        dom = data.get("domain", "free")
        domain = None
        if dom != "free" and dom is not None:
            hs = dom["halfspaces"]
            domain = (np.array([h["c"] for h in hs], dtype=float).reshape(-1, dim), np.array([h["d"] for h in hs], dtype=float))
        return cls(S, b, domain=domain, dim=dim)


def evaluate(u: ConvexFn, x):
    """``u(x)``; ``inf`` outside the domain.  Accepts one point or rows of points."""
    X = np.asarray(x, dtype=float)
    single = X.ndim == 0 or (X.ndim == 1 and X.size == u.dim)
    X = X.reshape(-1, u.dim)
    if u.is_infty:
        out = np.full(len(X), np.inf)
    else:
        out = np.max(X @ u.slopes.T + u.intercepts, axis=1)
        if len(u.dom_A):
            scale = max(1.0, float(np.max(np.abs(u.dom_b))))
            inside = np.all(X @ u.dom_A.T - u.dom_b <= 1e-12 * scale, axis=1)
            out = np.where(inside, out, np.inf)
    return float(out[0]) if single else out


def min_info(u: ConvexFn) -> MinInfo:
    """Minimum value and minimizing face, from the epigraph vertices."""
    if u.is_infty:
        raise ConvexValError("the constant +inf function has no minimum")
    m = u.minimum
    return MinInfo(m, u.sublevel_polytope(m))


def _intersect_domains(u: ConvexFn, v: ConvexFn):
    return np.vstack([u.dom_A, v.dom_A]), np.concatenate([u.dom_b, v.dom_b])


def join(u: ConvexFn, v: ConvexFn) -> ConvexFn:
    """Pointwise maximum ``u v v``."""
    if u.dim != v.dim:
        raise DimensionMismatch("dimensions differ")
    if u.is_infty or v.is_infty:
        return ConvexFn.infty(u.dim)
    C, d = _intersect_domains(u, v)
    if not _feasible(C, d, u.dim):
        return ConvexFn.infty(u.dim)
    return ConvexFn(np.vstack([u.slopes, v.slopes]), np.concatenate([u.intercepts, v.intercepts]),
                    domain=(C, d) if len(C) else None, dim=u.dim, validate=False)


def add(u: ConvexFn, v: ConvexFn) -> ConvexFn:
    """Pointwise sum; pieces are all pairwise sums."""
    if u.dim != v.dim:
        raise DimensionMismatch("dimensions differ")
    if u.is_infty or v.is_infty:
        return ConvexFn.infty(u.dim)
    C, d = _intersect_domains(u, v)
    if not _feasible(C, d, u.dim):
        return ConvexFn.infty(u.dim)
    S = (u.slopes[:, None, :] + v.slopes[None, :, :]).reshape(-1, u.dim)
    b = (u.intercepts[:, None] + v.intercepts[None, :]).ravel()
    return ConvexFn(S, b, domain=(C, d) if len(C) else None, dim=u.dim, validate=False)


def restrict_to(u: ConvexFn, K: Polytope) -> ConvexFn:
    """``u + I_K``."""
    return add(u, ConvexFn.indicator(K))


def shift(u: ConvexFn, c: float) -> ConvexFn:
    """``u + c``."""
    if u.is_infty:
        return u
    return ConvexFn(u.slopes, u.intercepts + c, domain=(u.dom_A, u.dom_b) if not u.is_free else None,
                    dim=u.dim, validate=False)


class GluedFamily(NamedTuple):
    u: ConvexFn
    v: ConvexFn
    meet: ConvexFn
    join: ConvexFn


def meet_glued(h: ConvexFn, Q: Polytope, normal, offset: float) -> GluedFamily:
    """``u = h + I_K``, ``v = h + I_L`` for the two halves of ``Q`` cut by a hyperplane.

    Because ``K u L = Q`` is convex, ``min(u, v) = h + I_Q`` stays convex.
    """
    normal = np.atleast_1d(np.asarray(normal, dtype=float))
    if np.linalg.norm(normal) == 0.0:
        raise NonConvexUnion("splitting hyperplane has a zero normal")
    if Q.dim != h.dim or len(normal) != h.dim:
        raise DimensionMismatch("dimensions differ")
    K = Q.with_halfspace(normal, offset)
    L = Q.with_halfspace(-normal, -offset)
    KL = K.with_halfspace(-normal, -offset)
    return GluedFamily(restrict_to(h, K), restrict_to(h, L), restrict_to(h, Q), restrict_to(h, KL))


def scale_horizontal(u: ConvexFn, lam: float) -> ConvexFn:
    """``u_lam(x) = u(x / lam)``."""
    if not lam > 0:
        raise NonPositiveLambda(f"lambda must be positive, got {lam}")
    if u.is_infty:
        return u
    dom = None if u.is_free else (u.dom_A, lam * u.dom_b)
    return ConvexFn(u.slopes / lam, u.intercepts, domain=dom, dim=u.dim, validate=False)


def apply_motion(u: ConvexFn, T: RigidMotion) -> ConvexFn:
    """``u o T``."""
    if T.dim != u.dim:
        raise DimensionMismatch("motion dimension differs")
    if u.is_infty:
        return u
    R, x0 = T.rotation, T.translation
    S = u.slopes @ R
    b = u.intercepts + u.slopes @ x0
    dom = None if u.is_free else (u.dom_A @ R, u.dom_b - u.dom_A @ x0)
    return ConvexFn(S, b, domain=dom, dim=u.dim, validate=False)


def lift_undergraph(u: ConvexFn, m_extra: int = 1) -> ConvexFn:
    """``u_hat(x, y) = u(x) + |y|`` on ``R^n x R^m``; only ``m = 1`` is piecewise linear."""
    if m_extra != 1:
        raise EuclideanNormNotPL("the Euclidean norm in R^m, m >= 2, is not piecewise linear")
    n = u.dim
    if n + 1 > 3:
        raise DimensionMismatch("lifted dimension exceeds 3")
    if u.is_infty:
        return ConvexFn.infty(n + 1)
    S = np.vstack([np.hstack([u.slopes, np.ones((u.n_pieces, 1))]),
                   np.hstack([u.slopes, -np.ones((u.n_pieces, 1))])])
    b = np.concatenate([u.intercepts, u.intercepts])
    dom = None
    if not u.is_free:
        dom = (np.hstack([u.dom_A, np.zeros((len(u.dom_A), 1))]), u.dom_b)
    return ConvexFn(S, b, domain=dom, dim=n + 1, validate=False)


def extend_dim(u: ConvexFn, n_target: int) -> ConvexFn:
    """Canonical extension: ``u`` on the coordinate subspace, ``+inf`` off it."""
    k = u.dim
    if n_target < k or n_target > 3:
        raise DimensionMismatch(f"cannot extend dim {k} to {n_target}")
    if u.is_infty:
        return ConvexFn.infty(n_target)
    pad = n_target - k
    S = np.hstack([u.slopes, np.zeros((u.n_pieces, pad))])
    C = np.hstack([u.dom_A, np.zeros((len(u.dom_A), pad))])
    d = u.dom_b
    extra = np.hstack([np.zeros((pad, k)), np.eye(pad)])
    C = np.vstack([C, extra, -extra])
    d = np.concatenate([d, np.zeros(2 * pad)])
    return ConvexFn(S, u.intercepts, domain=(C, d) if len(C) else None, dim=n_target, validate=False)


def restrict_dim(u: ConvexFn, k_target: int) -> ConvexFn:
    """``u(x_1, ..., x_k, 0, ..., 0)``."""
    if k_target < 1 or k_target > u.dim:
        raise DimensionMismatch(f"cannot restrict dim {u.dim} to {k_target}")
    if u.is_infty:
        return ConvexFn.infty(k_target)
    S = u.slopes[:, :k_target]
    C = u.dom_A[:, :k_target]
    d = u.dom_b
    live = np.linalg.norm(C, axis=1) > 1e-14 if len(C) else np.zeros(0, dtype=bool)
    if len(C) and np.any(d[~live] < -GEOM_TOL):
        return ConvexFn.infty(k_target)
    C, d = C[live], d[live]
    if len(C) and not _feasible(C, d, k_target):
        return ConvexFn.infty(k_target)
    return ConvexFn(S, u.intercepts, domain=(C, d) if len(C) else None, dim=k_target, validate=True)


@dataclass(frozen=True)
class Hyperplane:
    """``{x : normal . x = offset}``; the positive side is ``normal . x <= offset``."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        n = np.atleast_1d(np.asarray(self.normal, dtype=float))
        nrm = float(np.linalg.norm(n))
        if nrm == 0.0:
            raise ValueError("hyperplane normal must be nonzero")
        object.__setattr__(self, "normal", n / nrm)
        object.__setattr__(self, "offset", float(self.offset) / nrm)


def sample_points(u: ConvexFn, rng: np.random.Generator, n: int, radius: float | None = None) -> np.ndarray:
    """Random points around the minimizer, in and out of the domain."""
    center = u.epigraph_vertices[0, : u.dim] if not u.is_infty else np.zeros(u.dim)
    if radius is None:
        radius = 2.0 + float(np.max(np.abs(center)))
    return center + rng.uniform(-radius, radius, size=(n, u.dim))


__all__ = [
    "ConvexFn",
    "MinInfo",
    "GluedFamily",
    "Hyperplane",
    "CoercivityResult",
    "coercivity_check",
    "evaluate",
    "min_info",
    "join",
    "add",
    "restrict_to",
    "shift",
    "meet_glued",
    "scale_horizontal",
    "apply_motion",
    "lift_undergraph",
    "extend_dim",
    "restrict_dim",
    "sample_points",
]
