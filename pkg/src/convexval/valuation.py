"""Integral valuations ``mu(u) = int V_k(cl{u < t}) dnu(t)`` and their checkers.

Three evaluation routes are provided and are expected to agree:

* :func:`eval_sublevel` integrates the profile ``v_k`` against ``nu``;
* :func:`eval_beta` integrates the tail ``f(t) = nu((t, inf))`` against
  ``dbeta_k = dv_k``;
* :func:`eval_layercake` (``k = n`` only) integrates ``f(u(x))`` over the
  domain cell by cell, never looking at a sub-level set's intrinsic volumes.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np
from scipy.interpolate import BSpline

from .convex_fn import ConvexFn, GluedFamily, Hyperplane, meet_glued, restrict_to, scale_horizontal, shift
from .exceptions import ConvexValError, DimensionMismatch, IllConditioned
from .geom import Polytope, affine_frame, _order_polygon
from .measures import DensityFn, MollifiedDensity, RadonMeasure, bump, moment, tail
from .quadrature import gauss_legendre, integrate_exp_tail, panel_nodes
from .sublevel import _tail_truncation, beta_integral, sublevel_volumes


@dataclass(frozen=True)
class IntegralValuation:
    k: int
    nu: RadonMeasure

    def __post_init__(self):
        if self.k not in (0, 1, 2, 3):
            raise ConvexValError(f"k must be in 0..3, got {self.k}")
        if not math.isfinite(moment(self.nu, self.k)):
            raise ConvexValError("nu fails the integrability condition for this k")

    @property
    def f(self) -> DensityFn:
        return DensityFn.from_measure(self.nu)

    def __call__(self, u: ConvexFn) -> float:
        return eval_sublevel(self, u)

    def as_oracle(self, dim: int) -> "ValuationOracle":
        return ValuationOracle(self, dim, simple=(self.k == dim), homogeneous=self.k)

    def to_dict(self) -> dict:
        return {"kind": "integral", "k": self.k, "measure": self.nu.to_dict()}


def _density_cuts(m: float, u_breaks, nu: RadonMeasure) -> list[float]:
    cuts = {m, *[float(b) for b in u_breaks if b > m], *[b for b in nu.breakpoints if b > m]}
    return sorted(cuts)


def _refine(cuts: Sequence[float], max_len: float) -> np.ndarray:
    out = [cuts[0]]
    for a, b in zip(cuts, cuts[1:]):
        n = max(1, int(math.ceil((b - a) / max_len)))
        out += list(np.linspace(a, b, n + 1)[1:])
    return np.array(out)


def eval_sublevel(v: IntegralValuation, u: ConvexFn, nodes: int = 8) -> float:
    """Atoms of ``nu`` pick up ``v_k`` at their location; the density part is
    integrated panel by panel, with a Gauss-Laguerre rule past the last kink."""
    if u.is_infty or v.k > u.dim:
        return 0.0
    k, nu = v.k, v.nu
    m = u.minimum
    total = sum(w * sublevel_volumes(u, t)[k] for t, w in nu.atoms if t > m)
    if not nu.polys and nu.exp_tail is None:
        return float(total)
    cuts = _density_cuts(m, u.breakpoints, nu)
    # exponential pieces need short panels for the Legendre rule
    T, W = panel_nodes(_refine(cuts, 1.0), nodes)
    if T.size:
        dens = nu.density(T)
        live = dens != 0.0
        vk = np.array([sublevel_volumes(u, t)[k] for t in T[live]])
        total += float(np.sum(W[live] * dens[live] * vk))
    if nu.exp_tail is not None and nu.exp_tail.scale > 0:
        start = cuts[-1]
        total += nu.exp_tail.scale * integrate_exp_tail(
            lambda ts: np.array([sublevel_volumes(u, t)[k] for t in ts]), start, nodes
        )
    return float(total)


def eval_beta(v: IntegralValuation, u: ConvexFn) -> float:
    """``int f dbeta_k(u; .)`` with ``f`` the tail of ``nu``."""
    if u.is_infty or v.k > u.dim:
        return 0.0
    return beta_integral(u, v.k, v.f)


def eval_zero_homogeneous(v: IntegralValuation, u: ConvexFn) -> float:
    """``k = 0``: the valuation is ``f(m(u))``."""
    if v.k != 0:
        raise DimensionMismatch("closed form holds only for k = 0")
    if u.is_infty:
        return 0.0
    return float(tail(v.nu, u.minimum))


# layer-cake route


def _simplices(cell: Polytope) -> list[np.ndarray]:
    """Triangulate a full-dimensional convex polytope (vertex fans)."""
    V = cell.vertices
    n = cell.dim
    if n == 1:
        return [np.array([[V.min()], [V.max()]])]
    if n == 2:
        origin, basis = affine_frame(V)
        P = V[_order_polygon((V - origin) @ basis.T)]
        return [np.array([P[0], P[i], P[i + 1]]) for i in range(1, len(P) - 1)]
    apex = 0
    out = []
    for ordered, _, _, _ in cell._facets3:
        if apex in ordered:
            continue
        P = V[ordered]
        for i in range(1, len(P) - 1):
            out.append(np.array([V[apex], P[0], P[i], P[i + 1]]))
    return out


def _simplex_volume(S: np.ndarray) -> float:
    n = S.shape[1]
    return abs(float(np.linalg.det(S[1:] - S[0]))) / math.factorial(n)


def _affine_pushforward_integral(f: DensityFn, values: np.ndarray, breakpoints: Sequence[float], nodes: int = 10) -> float:
    """``E f(sum lam_j u_j)`` for ``lam`` uniform on the standard simplex.

    The law of ``sum lam_j u_j`` has the normalized B-spline with knots ``u_j``
    as its density.
    """
    knots = np.sort(values)
    lo, hi = float(knots[0]), float(knots[-1])
    scale = max(1.0, abs(lo), abs(hi))
    if hi - lo <= 1e-12 * scale:
        return float(f(lo))
    # merge near-coincident knots so the B-spline stays well defined
    for i in range(1, len(knots)):
        if knots[i] - knots[i - 1] <= 1e-12 * scale:
            knots[i] = knots[i - 1]
    n = len(knots) - 1
    spline = BSpline.basis_element(knots, extrapolate=False)
    cuts = sorted({*knots.tolist(), *[b for b in breakpoints if lo < b < hi]})
    cuts = _refine(cuts, 1.0)
    T, W = panel_nodes(cuts, nodes)
    dens = np.nan_to_num(spline(T)) * n / (hi - lo)
    return float(np.sum(W * dens * np.asarray(f(T))))


def eval_layercake(v: IntegralValuation, u: ConvexFn) -> float:
    """``k = n``: ``int_dom f(u(x)) dx``, summed over the linearity cells of ``u``."""
    n = u.dim
    if v.k != n:
        raise DimensionMismatch(f"layer-cake route needs k = n = {n}, got k = {v.k}")
    if u.is_infty:
        return 0.0
    f = v.f
    m = u.minimum
    end = v.nu.support_end
    if math.isinf(end):
        cap = _tail_truncation(u, n, max(m, v.nu.breakpoints[-1]) + 1.0, v.nu.exp_tail.scale, 0.0)
    else:
        cap = max(end, m)
    total = 0.0
    breaks = v.nu.breakpoints
    for i in range(u.n_pieces):
        # cell where piece i is the active one, capped at level `cap`
        others = u.slopes - u.slopes[i]
        A = np.vstack([u.slopes, u.dom_A, others])
        b = np.concatenate([cap - u.intercepts, u.dom_b, u.intercepts[i] - u.intercepts])
        cell = Polytope(A, b, dim=n, check_bounded=False)
        if cell.is_empty or cell.affine_dim < n:
            continue
        for S in _simplices(cell):
            vol = _simplex_volume(S)
            if vol <= 0.0:
                continue
            vals = S @ u.slopes[i] + u.intercepts[i]
            total += vol * _affine_pushforward_integral(f, vals, breaks)
    return float(total)


# oracles and geometric densities


@dataclass
class ValuationOracle:
    """A black-box ``u -> mu(u)`` with declared properties for the checkers."""

    func: Callable[[ConvexFn], float]
    dim: int
    invariant: bool = True
    monotone: bool = True
    mcontinuous: bool = True
    simple: bool = False
    homogeneous: int | None = None

    def __call__(self, u: ConvexFn) -> float:
        return float(self.func(u))


@dataclass(frozen=True)
class GeometricDensities:
    t: float
    values: np.ndarray

    def __getitem__(self, k: int) -> float:
        return float(self.values[k])


def _box_in_subspace(j: int, n: int, r: float) -> Polytope:
    hi = np.zeros(n)
    hi[:j] = r
    return Polytope.box(np.zeros(n), hi)


def recover_densities(oracle: ValuationOracle, t: float, r: float = 1.0) -> GeometricDensities:
    """Solve ``mu(t + I_K) = sum_k f_k(t) V_k(K)`` on the boxes ``[0, r]^j``.

    ``V_i([0, r]^j) = C(j, i) r^i`` makes the system lower triangular.
    """
    if r <= 0:
        raise ValueError("r must be positive")
    if r < 1e-3:
        warnings.warn(f"box side {r} makes the triangular solve ill-conditioned", IllConditioned, stacklevel=2)
    n = oracle.dim
    f = np.zeros(n + 1)
    for j in range(n + 1):
        mu = oracle(ConvexFn.indicator(_box_in_subspace(j, n, r), level=t))
        acc = sum(math.comb(j, i) * r**i * f[i] for i in range(j))
        f[j] = (mu - acc) / r**j
    return GeometricDensities(float(t), f)


def mollified_valuation(oracle: ValuationOracle, eps: float, quad_points: int = 64,
                        breakpoints: Sequence[float] | None = None) -> ValuationOracle:
    """``mu_eps(u) = int mu(u - s) g_eps(s) ds`` by panel-wise Gauss-Legendre on ``[-eps, eps]``.

    ``s -> mu(u - s)`` can jump or kink where a level of ``u`` (its minimum or
    an epigraph vertex height) minus ``s`` hits a breakpoint of the density,
    so the kernel interval is cut there.  The breakpoints default to those of
    the wrapped integral valuation, if any.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if breakpoints is None:
        f = getattr(oracle.func, "f", None)
        breakpoints = list(f.breakpoints) if f is not None else []
    breakpoints = [float(b) for b in breakpoints]
    x, w = gauss_legendre(quad_points)

    def func(u: ConvexFn) -> float:
        if u.is_infty:
            return 0.0
        levels = {u.minimum, *[float(c) for c in u.breakpoints]}
        cuts = {-eps, eps, *[c - b for c in levels for b in breakpoints if -eps < c - b < eps]}
        cuts = sorted(cuts)
        num = den = 0.0
        for a, b in zip(cuts, cuts[1:]):
            s = 0.5 * (b - a) * x + 0.5 * (a + b)
            ws = 0.5 * (b - a) * w * bump(s / eps) / eps
            num += float(sum(wi * oracle(shift(u, -si)) for si, wi in zip(s, ws)))
            den += float(np.sum(ws))
        return num / den

    return ValuationOracle(func, oracle.dim, oracle.invariant, oracle.monotone, oracle.mcontinuous,
                           oracle.simple, oracle.homogeneous)


# property checkers


class IdentityCheck(NamedTuple):
    residual: float
    scale: float
    family: GluedFamily


def check_valuation_identity(oracle, h: ConvexFn, Q: Polytope, H: Hyperplane) -> IdentityCheck:
    """``|mu(u v v) + mu(u ^ v) - mu(u) - mu(v)|`` on a glued family."""
    fam = meet_glued(h, Q, H.normal, H.offset)
    mu_u, mu_v = oracle(fam.u), oracle(fam.v)
    res = abs(oracle(fam.join) + oracle(fam.meet) - mu_u - mu_v)
    return IdentityCheck(res, abs(mu_u) + abs(mu_v) + 1.0, fam)


def check_homogeneity(oracle, u: ConvexFn, lambdas: Iterable[float], m: int) -> float:
    """Max over ``lambdas`` of ``|mu(u_lam) - lam^m mu(u)| / |mu(u_lam)|``."""
    base = oracle(u)
    worst = 0.0
    for lam in lambdas:
        val = oracle(scale_horizontal(u, lam))
        diff = abs(val - lam**m * base)
        denom = abs(val)
        worst = max(worst, diff / denom if denom > 0 else diff)
    return worst


@dataclass
class ContinuityTable:
    values: list[float]
    target: float
    diffs: list[float] = field(default_factory=list)

    @property
    def nonincreasing(self) -> bool:
        return all(b <= a + 1e-12 for a, b in zip(self.diffs, self.diffs[1:]))


def check_mcontinuity(oracle, u: ConvexFn, polytopes: Sequence[Polytope]) -> ContinuityTable:
    """``mu(u + I_{P_i})`` along an exhaustion ``P_1 ⊂ P_2 ⊂ ...``."""
    target = oracle(u)
    values = [oracle(restrict_to(u, P)) for P in polytopes]
    return ContinuityTable(values, target, [abs(x - target) for x in values])


class MonotoneViolation(NamedTuple):
    index: int
    mu_upper: float
    mu_lower: float


def check_monotone(oracle, pairs: Iterable[tuple[ConvexFn, ConvexFn]]) -> list[MonotoneViolation]:
    """For pairs ``(u, v)`` with ``u >= v``: expect ``0 <= mu(u) <= mu(v)``."""
    bad = []
    for i, (u, v) in enumerate(pairs):
        mu_u, mu_v = oracle(u), oracle(v)
        if mu_u > mu_v + 1e-10 or mu_u < -1e-12:
            bad.append(MonotoneViolation(i, mu_u, mu_v))
    return bad


def oracle_from_dict(data: dict, dim: int | None = None) -> ValuationOracle:
    """Oracle JSON: ``{"kind": "integral", "k": 2, "dim": 3, "measure": {...}}``
    with an optional ``"mollify": {"eps": 0.1, "quad_points": 64}``."""
    kind = data.get("kind", "integral")
    if kind != "integral":
        raise ConvexValError(f"unknown oracle kind {kind!r}")
    dim = int(data.get("dim", dim or 3))
    val = IntegralValuation(int(data["k"]), RadonMeasure.from_dict(data["measure"]))
    if val.k > dim:
        raise DimensionMismatch("k exceeds the oracle dimension")
    oracle = val.as_oracle(dim)
    moll = data.get("mollify")
    if moll:
        oracle = mollified_valuation(oracle, float(moll["eps"]), int(moll.get("quad_points", 64)))
    return oracle


__all__ = [
    "IntegralValuation",
    "ValuationOracle",
    "GeometricDensities",
    "IdentityCheck",
    "ContinuityTable",
    "MonotoneViolation",
    "MollifiedDensity",
    "eval_sublevel",
    "eval_beta",
    "eval_layercake",
    "eval_zero_homogeneous",
    "recover_densities",
    "mollified_valuation",
    "check_valuation_identity",
    "check_homogeneity",
    "check_mcontinuity",
    "check_monotone",
    "oracle_from_dict",
]
