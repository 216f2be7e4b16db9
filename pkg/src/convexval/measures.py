"""Nonnegative Radon measures on the line and their tail functions.

A measure is a finite list of atoms, polynomial densities on bounded
intervals and at most one exponential tail ``c * exp(-t)`` on ``[lo, inf)``.
Every integral the rest of the package needs has a closed form on this
class.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.special import gamma, gammaincc

from .exceptions import ConvexValError
from .quadrature import gauss_legendre, integrate_panels

# 1 / int_{-1}^{1} exp(-1/(1-s^2)) ds
BUMP_CONSTANT = 2.2522836210435817


def bump(s):
    """Standard mollifier supported on [-1, 1] with unit mass."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    out[inside] = BUMP_CONSTANT * np.exp(-1.0 / (1.0 - s[inside] ** 2))
    return out


@dataclass(frozen=True)
class PolyPiece:
    lo: float
    hi: float
    coeffs: tuple[float, ...]  # ascending powers of t

    def density(self, t):
        t = np.asarray(t, dtype=float)
        val = P.polyval(t, self.coeffs)
        return np.where((t >= self.lo) & (t < self.hi), val, 0.0)

    def mass_above(self, t):
        """Integral of the density over (t, inf)."""
        t = np.asarray(t, dtype=float)
        anti = P.polyint(self.coeffs)
        a = np.clip(t, self.lo, self.hi)
        return P.polyval(self.hi, anti) - P.polyval(a, anti)


@dataclass(frozen=True)
class ExpTail:
    lo: float
    scale: float

    def density(self, t):
        t = np.asarray(t, dtype=float)
        return np.where(t >= self.lo, self.scale * np.exp(-np.maximum(t, self.lo)), 0.0)

    def mass_above(self, t):
        t = np.asarray(t, dtype=float)
        return self.scale * np.exp(-np.maximum(t, self.lo))


@dataclass(frozen=True)
class RadonMeasure:
    atoms: tuple[tuple[float, float], ...] = ()
    polys: tuple[PolyPiece, ...] = ()
    exp_tail: ExpTail | None = None

    def __post_init__(self):
        atoms = tuple(sorted((float(t), float(w)) for t, w in self.atoms))
        object.__setattr__(self, "atoms", atoms)
        polys = tuple(sorted(self.polys, key=lambda p: p.lo))
        object.__setattr__(self, "polys", polys)
        for _, w in atoms:
            if w < 0:
                raise ConvexValError("atom weights must be nonnegative")
        segs = [(p.lo, p.hi) for p in polys]
        for p in polys:
            if not p.hi > p.lo:
                raise ConvexValError("polynomial piece needs lo < hi")
            grid = np.linspace(p.lo, p.hi, 32)
            if np.any(P.polyval(grid, p.coeffs) < -1e-12):
                raise ConvexValError(f"density negative on [{p.lo}, {p.hi}]")
        if self.exp_tail is not None:
            if self.exp_tail.scale < 0:
                raise ConvexValError("exponential tail scale must be nonnegative")
            segs.append((self.exp_tail.lo, math.inf))
        segs.sort()
        for (a0, a1), (b0, _) in zip(segs, segs[1:]):
            if b0 < a1 - 1e-12:
                raise ConvexValError("density segments overlap")

    # constructors

    @classmethod
    def dirac(cls, t: float, weight: float = 1.0) -> "RadonMeasure":
        return cls(atoms=((t, weight),))

    @classmethod
    def lebesgue(cls, lo: float, hi: float, height: float = 1.0) -> "RadonMeasure":
        return cls(polys=(PolyPiece(lo, hi, (height,)),))

    @classmethod
    def exponential(cls, lo: float = 0.0, scale: float = 1.0) -> "RadonMeasure":
        return cls(exp_tail=ExpTail(lo, scale))

    # evaluation

    @property
    def breakpoints(self) -> list[float]:
        pts = {t for t, _ in self.atoms}
        for p in self.polys:
            pts.update((p.lo, p.hi))
        if self.exp_tail is not None:
            pts.add(self.exp_tail.lo)
        return sorted(pts)

    @property
    def support_end(self) -> float:
        """Sup of the support (``inf`` with an exponential tail)."""
        if self.exp_tail is not None and self.exp_tail.scale > 0:
            return math.inf
        ends = [t for t, w in self.atoms if w > 0] + [p.hi for p in self.polys]
        return max(ends) if ends else -math.inf

    def density(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for p in self.polys:
            out = out + p.density(t)
        if self.exp_tail is not None:
            out = out + self.exp_tail.density(t)
        return out

    def tail(self, t):
        return tail(self, t)

    def f(self) -> "DensityFn":
        return DensityFn.from_measure(self)

    def total_mass(self) -> float:
        return float(tail(self, -math.inf))

    def to_dict(self) -> dict:
        dens: list[dict] = [{"lo": p.lo, "hi": p.hi, "poly": list(p.coeffs)} for p in self.polys]
        if self.exp_tail is not None:
            dens.append({"lo": self.exp_tail.lo, "exp": self.exp_tail.scale})
        return {"atoms": [{"t": t, "w": w} for t, w in self.atoms], "density": dens}

    @classmethod
    def from_dict(cls, data: dict) -> "RadonMeasure":
        atoms = tuple((float(a["t"]), float(a["w"])) for a in data.get("atoms", []))
        polys, tail_ = [], None
        for seg in data.get("density", []):
            if "exp" in seg:
                if tail_ is not None:
                    raise ConvexValError("at most one exponential tail")
                tail_ = ExpTail(float(seg["lo"]), float(seg["exp"]))
            else:
                polys.append(PolyPiece(float(seg["lo"]), float(seg["hi"]), tuple(float(c) for c in seg["poly"])))
        return cls(atoms=atoms, polys=tuple(polys), exp_tail=tail_)


def tail(nu: RadonMeasure, t):
    """``nu((t, inf))``; right-continuous because the inequality is strict."""
    t_arr = np.asarray(t, dtype=float)
    out = np.zeros_like(t_arr)
    for loc, w in nu.atoms:
        out = out + np.where(loc > t_arr, w, 0.0)
    for p in nu.polys:
        out = out + p.mass_above(t_arr)
    if nu.exp_tail is not None:
        out = out + nu.exp_tail.mass_above(t_arr)
    return float(out) if out.ndim == 0 else out


def moment(nu: RadonMeasure, k: int) -> float:
    """``int_{(0, inf)} s^k dnu(s)``."""
    total = sum(w * t**k for t, w in nu.atoms if t > 0)
    for p in nu.polys:
        a, b = max(p.lo, 0.0), p.hi
        if b <= a:
            continue
        anti = P.polyint(np.r_[np.zeros(k), p.coeffs])
        total += float(P.polyval(b, anti) - P.polyval(a, anti))
    if nu.exp_tail is not None:
        a = max(nu.exp_tail.lo, 0.0)
        total += nu.exp_tail.scale * float(gamma(k + 1) * gammaincc(k + 1, a))
    return float(total)


@dataclass
class DensityFn:
    """A decreasing right-continuous function given by a callable and its kinks.

    Beyond the last breakpoint the function is ``exp_scale * exp(-t)`` when
    ``exp_scale`` is set and zero otherwise.
    """

    func: Callable[[np.ndarray], np.ndarray]
    breakpoints: list[float] = field(default_factory=list)
    exp_scale: float | None = None

    def __call__(self, t):
        return self.func(t)

    @classmethod
    def from_measure(cls, nu: RadonMeasure) -> "DensityFn":
        scale = nu.exp_tail.scale if nu.exp_tail is not None else None
        return cls(lambda t: tail(nu, t), nu.breakpoints, scale)

    @classmethod
    def step(cls, at: float = 0.0) -> "DensityFn":
        """``1_{t < at}``, the tail of a unit atom at ``at``."""
        return cls.from_measure(RadonMeasure.dirac(at))

    @classmethod
    def constant(cls, c: float) -> "DensityFn":
        return cls(lambda t: np.full_like(np.asarray(t, dtype=float), c), [], None)

    @property
    def last_breakpoint(self) -> float:
        return self.breakpoints[-1] if self.breakpoints else -math.inf


def equivalent_f_condition(f: DensityFn, k: int) -> float:
    """``int_0^inf t^(k-1) f(t) dt`` (finite iff the k-th moment of nu is)."""
    if k < 1:
        raise ValueError("k must be at least 1")
    cuts = sorted({0.0, *[b for b in f.breakpoints if b > 0]})
    end = cuts[-1]
    total = integrate_panels(lambda t: t ** (k - 1) * f(t), cuts, nodes=24)
    if f.exp_scale:
        total += f.exp_scale * float(gamma(k) * gammaincc(k, end))
    return float(total)


class MollifiedDensity:
    """``(f * g_eps)(t) = int f(t - s) g_eps(s) ds`` by Gauss-Legendre.

    The kernel interval is split at every breakpoint of ``f`` that falls
    inside it, so jumps of ``f`` do not spoil the quadrature.
    """

    def __init__(self, f: DensityFn, eps: float, quad_points: int = 64):
        if eps <= 0:
            raise ValueError("eps must be positive")
        self.f = f
        self.eps = float(eps)
        self.quad_points = int(quad_points)
        self.breakpoints = sorted({b + s for b in f.breakpoints for s in (-eps, eps)})

    def _one(self, t: float) -> float:
        eps = self.eps
        cuts = [-eps, eps]
        cuts += [t - b for b in self.f.breakpoints if -eps < t - b < eps]
        cuts = sorted(set(cuts))
        x, w = gauss_legendre(self.quad_points)
        num = 0.0
        den = 0.0
        for a, b in zip(cuts, cuts[1:]):
            s = 0.5 * (b - a) * x + 0.5 * (a + b)
            ws = 0.5 * (b - a) * w * bump(s / eps) / eps
            num += float(np.sum(ws * self.f(t - s)))
            den += float(np.sum(ws))
        return num / den

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if t.ndim == 0:
            return self._one(float(t))
        return np.array([self._one(float(v)) for v in t.ravel()]).reshape(t.shape)


def mollify(f: DensityFn, eps: float, quad_points: int = 64) -> MollifiedDensity:
    return MollifiedDensity(f, eps, quad_points)


def random_measure(rng: np.random.Generator, lo: float = -1.0, hi: float = 4.0, exp_tail: bool | None = None) -> RadonMeasure:
    """A random measure from the supported class, for property tests."""
    n_atoms = int(rng.integers(0, 3))
    atoms = tuple((float(rng.uniform(lo, hi)), float(rng.uniform(0.1, 2.0))) for _ in range(n_atoms))
    cuts = np.sort(rng.uniform(lo, hi, 2))
    polys = []
    if rng.random() < 0.8:
        a, b = float(cuts[0]), float(cuts[1])
        # c0 + c1 t, nonnegative on [a, b]
        c1 = float(rng.uniform(-0.5, 0.5))
        c0 = -min(c1 * a, c1 * b) + float(rng.uniform(0.05, 1.0))
        polys.append(PolyPiece(a, b, (c0, c1)))
    if exp_tail is None:
        exp_tail = bool(rng.random() < 0.4)
    tail_ = ExpTail(float(max(cuts[1], 0.0) + rng.uniform(0, 1)), float(rng.uniform(0.2, 2.0))) if exp_tail else None
    if not atoms and not polys and tail_ is None:
        atoms = ((float(rng.uniform(lo, hi)), 1.0),)
    return RadonMeasure(atoms=atoms, polys=tuple(polys), exp_tail=tail_)


__all__: Sequence[str] = [
    "RadonMeasure",
    "PolyPiece",
    "ExpTail",
    "DensityFn",
    "MollifiedDensity",
    "tail",
    "moment",
    "equivalent_f_condition",
    "mollify",
    "bump",
    "random_measure",
]
