"""Sub-level sets of piecewise-linear convex functions and their profiles.

For ``t > m(u)`` the closure of ``{u < t}`` is ``{u <= t}``; at or below the
minimum the strict sub-level set is empty.  Between consecutive epigraph
vertex heights the combinatorial type of ``{u <= t}`` is fixed, so each
profile ``t -> V_k(cl{u < t})`` is a polynomial of degree at most ``k`` there.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
import numpy as np

from .constants import FD_STEP, KAPPA
from .convex_fn import ConvexFn, min_info
from .geom import Polytope
from .measures import DensityFn
from .quadrature import panel_nodes


def sublevel_closed(u: ConvexFn, t: float) -> Polytope:
    """``K_t = {u <= t}``."""
    if u.is_infty:
        return Polytope.empty(u.dim)
    return u.sublevel_polytope(float(t))


def sublevel_strict_closure(u: ConvexFn, t: float) -> Polytope:
    """``cl{u < t}``: empty for ``t <= m(u)``, else ``{u <= t}``."""
    if u.is_infty or t <= u.minimum:
        return Polytope.empty(u.dim)
    return u.sublevel_polytope(float(t))


def sublevel_volumes(u: ConvexFn, t: float) -> np.ndarray:
    """Intrinsic volumes of ``cl{u < t}``, memoized per function."""
    t = float(t)
    cache = u.__dict__.setdefault("_iv_cache", {})
    hit = cache.get(t)
    if hit is None:
        hit = sublevel_strict_closure(u, t).intrinsic_volumes
        cache[t] = hit
    return hit


def profile_values(u: ConvexFn, k: int, ts) -> np.ndarray:
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    if k > u.dim:
        return np.zeros(len(ts))
    return np.array([sublevel_volumes(u, t)[k] for t in ts])


@dataclass
class SublevelProfile:
    """``t -> v_k(u; t) = V_k(cl{u < t})`` with its jump at the minimum."""

    u: ConvexFn = field(repr=False)
    k: int
    m_value: float
    atom_mass: float
    breakpoints: np.ndarray

    def __call__(self, t):
        vals = profile_values(self.u, self.k, t)
        return float(vals[0]) if np.ndim(t) == 0 else vals

    def derivative(self, t, h: float = FD_STEP, richardson: bool = False):
        """Centered difference, with the step shrunk to stay inside one panel.

        ``v_k`` is a polynomial of degree at most ``k`` on each panel, so the
        centered difference is exact up to degree 2 for any admissible step;
        one Richardson step makes it exact for cubics as well.
        """
        ts = np.atleast_1d(np.asarray(t, dtype=float))
        cuts = np.asarray(self.breakpoints)
        out = np.empty(len(ts))
        for i, s in enumerate(ts):
            gap = float(np.min(np.abs(cuts - s))) if len(cuts) else math.inf
            step = min(h, 0.25 * gap) if gap > 0 else h
            d1 = (self(s + step) - self(s - step)) / (2.0 * step)
            if richardson:
                half = 0.5 * step
                d2 = (self(s + half) - self(s - half)) / (2.0 * half)
                d1 = (4.0 * d2 - d1) / 3.0
            out[i] = d1
        return float(out[0]) if np.ndim(t) == 0 else out

    def to_csv(self, ts) -> str:
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        vals = self(ts)
        lines = [f"# k={self.k} m={self.m_value + 0.0:.9f} atom_mass={self.atom_mass:.9f}",
                 "# breakpoints=" + ",".join(f"{b + 0.0:.9f}" for b in self.breakpoints),
                 "t,v_k"]
        lines += [f"{t:.9f},{v:.9f}" for t, v in zip(ts, vals)]
        return "\n".join(lines) + "\n"


def profile(u: ConvexFn, k: int) -> SublevelProfile:
    """Profile of ``u`` for the intrinsic volume ``V_k``.

    For ``k`` above the ambient dimension the profile is identically zero.
    """
    info = min_info(u)
    atom = float(info.argmin.intrinsic_volumes[k]) if k <= u.dim else 0.0
    return SublevelProfile(u, k, info.value, atom, np.asarray(u.breakpoints, dtype=float))


def ball_intrinsic_volume(n: int, k: int, radius: float) -> float:
    """``V_k`` of the ``n``-ball of the given radius."""
    return math.comb(n, k) * KAPPA[n] / KAPPA[n - k] * radius**k


def _tail_truncation(u: ConvexFn, k: int, start: float, scale: float, estimate: float) -> float:
    """Level ``T`` beyond which ``int f dbeta_k`` is below ``1e-12`` relative.

    Uses ``{u <= t}`` inside the ball of radius ``(t - b) / a`` from the
    growth witness, and ``int_T^inf e^-t (t - b)^k dt`` in closed form.
    """
    a, b = u.growth_witness()
    coef = ball_intrinsic_volume(u.dim, k, 1.0) / a**k * scale
    target = 1e-12 * max(abs(estimate), 1e-2)
    T = max(start, b)
    for _ in range(400):
        s = T - b
        bound = coef * math.exp(-T) * sum(math.factorial(k) / math.factorial(k - j) * s ** (k - j) for j in range(k + 1))
        if bound < target:
            return T
        T += 2.0
    return T


def _tail_nodes(length: float) -> int:
    """Legendre nodes for ``e^-t`` times a cubic on a panel of this length (error below 1e-14)."""
    if length <= 2.0:
        return 8
    if length <= 10.0:
        return 16
    return 24


# widest difference step used by beta_integral; the panel gap usually binds first
BETA_MAX_STEP = 0.1


def beta_integral(u: ConvexFn, k: int, f: DensityFn, nodes: int = 8) -> float:
    """``int f dbeta_k(u; .)``: atom at ``m(u)`` plus ``int f v_k' dt``.

    ``v_k'`` comes from centered differences; panels split at the
    breakpoints of ``u`` and of ``f``.  Past the last kink of ``f`` only an
    exponential tail can remain, integrated up to a truncation level from
    the growth witness.
    """
    if u.is_infty:
        return 0.0
    prof = profile(u, k)
    m = prof.m_value
    total = float(f(m)) * prof.atom_mass
    if k == 0 or k > u.dim:
        return total
    u_cuts = [float(b) for b in prof.breakpoints if b > m]
    f_cuts = [float(b) for b in f.breakpoints if b > m]
    f_end = max(m, f.last_breakpoint)
    deriv = SublevelProfile(u, k, m, prof.atom_mass, np.array(sorted({m, *u_cuts, *f_cuts})))

    def dv(ts):
        return deriv.derivative(ts, h=BETA_MAX_STEP, richardson=k >= 3)

    cuts = sorted({m, *[b for b in u_cuts if b < f_end], *f_cuts})
    T, W = panel_nodes(cuts, nodes)
    if T.size:
        total += float(np.sum(W * np.asarray(f(T)) * dv(T)))
    if f.exp_scale:
        T_end = _tail_truncation(u, k, f_end, f.exp_scale, total)
        if T_end > f_end:
            tail_cuts = [f_end, *[b for b in u_cuts if f_end < b < T_end], T_end]
            for a, b in zip(tail_cuts, tail_cuts[1:]):
                n_pan = max(1, int(math.ceil((b - a) / 40.0)))
                Tt, Wt = panel_nodes(np.linspace(a, b, n_pan + 1), _tail_nodes((b - a) / n_pan))
                total += float(np.sum(Wt * np.asarray(f(Tt)) * dv(Tt)))
    return total


def concavity_slack(u: ConvexFn, k: int, span: float = 10.0, points: int = 64) -> float:
    """Smallest midpoint-concavity slack of ``v_k^(1/k)`` on an even grid over ``(m, m + span)``."""
    if k < 1:
        raise ValueError("concavity of v_k^(1/k) needs k >= 1")
    m = u.minimum
    ts = np.linspace(m, m + span, points + 1)[1:]
    g = profile_values(u, k, ts) ** (1.0 / k)
    worst = math.inf
    for step in range(1, points // 2):
        mids = g[step:-step]
        avg = 0.5 * (g[: -2 * step] + g[2 * step :])
        worst = min(worst, float(np.min(mids - avg)))
    return worst

