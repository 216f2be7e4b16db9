"""Polytopal partitions, their completion and inductive certificates.

A partition is complete when no facet hyperplane of any cell cuts the
interior of another cell.  Complete partitions can be assembled by pairwise
convex merges, and the merge order is recorded as a certificate.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .constants import GEOM_TOL
from .convex_fn import ConvexFn, Hyperplane, min_info, restrict_to
from .exceptions import ConvexValError, DimensionMismatch, EmptyInput, NotComplete
from .geom import Polytope, affine_frame, hausdorff_distance, intersect

REL_TOL = 1e-9


def _canonical(normal: np.ndarray, offset: float) -> tuple[np.ndarray, float]:
    """Sign convention: first component of the normal above tolerance is positive."""
    for c in normal:
        if abs(c) > 1e-12:
            if c < 0:
                return -normal, -offset
            break
    return normal, offset


def facet_hyperplanes(cell: Polytope) -> list[Hyperplane]:
    """Hyperplanes through the ``(n-1)``-faces of a full-dimensional cell."""
    n = cell.dim
    V = cell.vertices
    tol = GEOM_TOL * cell.scale
    out = []
    for a, b in zip(cell.A, cell.b):
        idx = np.abs(V @ a - b) <= tol
        if not idx.any():
            continue
        if n > 1 and len(affine_frame(V[idx])[1]) != n - 1:
            continue
        normal, offset = _canonical(a, float(b))
        out.append(Hyperplane(normal, offset))
    return out


def _dedup_hyperplanes(hs: Sequence[Hyperplane], tol: float) -> list[Hyperplane]:
    hs = sorted(hs, key=lambda h: (*np.round(h.normal, 9), round(h.offset, 9)))
    out: list[Hyperplane] = []
    for h in hs:
        if any(np.max(np.abs(h.normal - g.normal)) <= 1e-9 and abs(h.offset - g.offset) <= tol for g in out):
            continue
        out.append(h)
    return out


@dataclass(frozen=True)
class PolytopalPartition:
    parent: Polytope
    cells: tuple[Polytope, ...]
    complete_flag: bool | None = None

    def __post_init__(self):
        object.__setattr__(self, "cells", tuple(self.cells))
        if not self.cells:
            raise EmptyInput("a partition needs at least one cell")
        for c in self.cells:
            if c.dim != self.parent.dim:
                raise DimensionMismatch("cells and parent live in different dimensions")

    @property
    def dim(self) -> int:
        return self.parent.dim

    def __len__(self) -> int:
        return len(self.cells)

    def volumes(self) -> np.ndarray:
        return np.array([c.volume for c in self.cells])

    def validate(self) -> None:
        """Raise :class:`ConvexValError` unless the cells tile the parent."""
        vol = self.parent.volume
        if vol <= 0:
            raise ConvexValError("parent has empty interior")
        for c in self.cells:
            if c.is_empty or c.affine_dim < self.dim:
                raise ConvexValError("cell with empty interior")
        if abs(self.volumes().sum() - vol) > REL_TOL * vol:
            raise ConvexValError("cells do not cover the parent")
        for i in range(len(self.cells)):
            for j in range(i + 1, len(self.cells)):
                if intersect(self.cells[i], self.cells[j]).volume > REL_TOL * vol:
                    raise ConvexValError(f"cells {i} and {j} overlap")

    def hyperplanes(self) -> list[Hyperplane]:
        """Distinct facet hyperplanes of all cells, sorted lexicographically by normal."""
        hs = [h for c in self.cells for h in facet_hyperplanes(c)]
        return _dedup_hyperplanes(hs, GEOM_TOL * self.parent.scale)

    def to_dict(self) -> dict:
        return {
            "parent": self.parent.to_dict(),
            "cells": [c.to_dict() for c in self.cells],
            "complete": self.complete_flag,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PolytopalPartition":
        parent = Polytope.from_dict(data["parent"])
        cells = tuple(Polytope.from_dict(c) for c in data["cells"])
        return cls(parent, cells, data.get("complete"))


def _split(cell: Polytope, H: Hyperplane, vol_tol: float) -> list[Polytope]:
    side = cell.vertices @ H.normal - H.offset
    tol = GEOM_TOL * cell.scale
    if side.max() <= tol or side.min() >= -tol:
        return [cell]
    halves = [cell.with_halfspace(H.normal, H.offset), cell.with_halfspace(-H.normal, -H.offset)]
    return [h for h in halves if not h.is_empty and h.affine_dim == cell.dim and h.volume > vol_tol]


def refine_by_hyperplane(p: PolytopalPartition, H: Hyperplane) -> PolytopalPartition:
    """Split every cell crossed by ``H``; halves without interior are dropped."""
    if len(H.normal) != p.dim:
        raise DimensionMismatch("hyperplane and partition dimensions differ")
    vol_tol = REL_TOL * p.parent.volume
    cells = [half for c in p.cells for half in _split(c, H, vol_tol)]
    return PolytopalPartition(p.parent, tuple(cells), None)


def complete(p: PolytopalPartition) -> PolytopalPartition:
    """Refine once by each facet hyperplane of the original cells.

    Facets of the refined cells lie on hyperplanes already used, so the
    result is a fixed point of further refinement.
    """
    q = p
    for H in p.hyperplanes():
        q = refine_by_hyperplane(q, H)
    return PolytopalPartition(q.parent, q.cells, True)


def is_complete(p: PolytopalPartition) -> bool:
    vols = np.sort(p.volumes())
    tol = REL_TOL * p.parent.volume
    for H in p.hyperplanes():
        q = refine_by_hyperplane(p, H)
        if len(q) != len(p) or np.max(np.abs(np.sort(q.volumes()) - vols)) > tol:
            return False
    return True


# inductive certificates


class CertificateEntry(NamedTuple):
    polytope: Polytope
    tag: str  # "leaf" or "merge"
    ref: tuple[int, ...]  # (cell index,) for leaves, (j, k) for merges


@dataclass
class InductiveCertificate:
    """Sequence ``H_1, ..., H_l`` ending with the parent; merges point backwards."""

    entries: list[CertificateEntry] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def sequence(self) -> list[Polytope]:
        return [e.polytope for e in self.entries]

    def validate(self, p: PolytopalPartition) -> bool:
        """Check every merge by volume additivity and the leaves against the cells."""
        if not self.entries:
            return False
        vol = p.parent.volume
        tol = REL_TOL * vol
        gtol = 1e-7 * p.parent.scale
        if hausdorff_distance(self.entries[-1].polytope, p.parent) > gtol:
            return False
        leaves = set()
        for i, (P, tag, ref) in enumerate(self.entries):
            if tag == "leaf":
                (c,) = ref
                if hausdorff_distance(P, p.cells[c]) > gtol:
                    return False
                leaves.add(c)
            elif tag == "merge":
                j, k = ref
                if not (j < i and k < i):
                    return False
                Hj, Hk = self.entries[j].polytope, self.entries[k].polytope
                if intersect(Hj, Hk).volume > tol:
                    return False
                if abs(Hj.volume + Hk.volume - P.volume) > tol:
                    return False
                if not (P.contains(Hj.vertices).all() and P.contains(Hk.vertices).all()):
                    return False
            else:
                return False
        if leaves != set(range(len(p.cells))):
            return False
        leaf_vol = sum(p.cells[c].volume for c in leaves)
        return abs(leaf_vol - vol) <= tol

    def to_dict(self) -> dict:
        seq = []
        for P, tag, ref in self.entries:
            item = {"tag": tag, "polytope": P.to_dict()}
            if tag == "leaf":
                item["cell"] = ref[0]
            else:
                item["of"] = list(ref)
            seq.append(item)
        return {"sequence": seq}

    @classmethod
    def from_dict(cls, data: dict) -> "InductiveCertificate":
        entries = []
        for item in data["sequence"]:
            P = Polytope.from_dict(item["polytope"])
            if item["tag"] == "leaf":
                entries.append(CertificateEntry(P, "leaf", (int(item["cell"]),)))
            else:
                entries.append(CertificateEntry(P, "merge", tuple(int(i) for i in item["of"])))
        return cls(entries)


def inductive_certificate(p: PolytopalPartition) -> InductiveCertificate:
    """Split along a facet hyperplane meeting the interior and recurse on both sides."""
    if p.complete_flag is not True and not is_complete(p):
        raise NotComplete("partition is not complete; call complete() first")
    hyperplanes = p.hyperplanes()
    cert = InductiveCertificate()
    tol = GEOM_TOL * p.parent.scale

    def side_of(ci: int, H: Hyperplane) -> int:
        s = p.cells[ci].vertices @ H.normal - H.offset
        if s.max() <= tol:
            return 1
        if s.min() >= -tol:
            return -1
        return 0

    def build(region: Polytope, idx: list[int]) -> int:
        if len(idx) == 1:
            cert.entries.append(CertificateEntry(p.cells[idx[0]], "leaf", (idx[0],)))
            return len(cert.entries) - 1
        for H in hyperplanes:
            sides = [side_of(i, H) for i in idx]
            if 0 in sides:
                raise NotComplete("a facet hyperplane cuts a cell")
            plus = [i for i, s in zip(idx, sides) if s == 1]
            minus = [i for i, s in zip(idx, sides) if s == -1]
            if plus and minus:
                j = build(region.with_halfspace(H.normal, H.offset), plus)
                k = build(region.with_halfspace(-H.normal, -H.offset), minus)
                cert.entries.append(CertificateEntry(region, "merge", (j, k)))
                return len(cert.entries) - 1
        raise NotComplete("no facet hyperplane separates the remaining cells")

    build(p.parent, list(range(len(p.cells))))
    return cert


# valuations on partitions


def verify_decomposition(mu: Callable[[ConvexFn], float], u: ConvexFn, p: PolytopalPartition,
                         certificate: InductiveCertificate | None = None) -> float:
    """``|mu(u + I_parent) - sum_i mu(u + I_cell_i)|`` for a simple valuation ``mu``."""
    if certificate is not None and not certificate.validate(p):
        raise ConvexValError("certificate does not validate against the partition")
    whole = mu(restrict_to(u, p.parent))
    parts = sum(mu(restrict_to(u, c)) for c in p.cells)
    return abs(whole - parts)


class Sandwich(NamedTuple):
    lower: float
    value: float
    upper: float

    @property
    def gap(self) -> float:
        return self.upper - self.lower

    def holds(self, tol: float = 1e-9) -> bool:
        return self.lower <= self.value + tol and self.value <= self.upper + tol


def _density_of(mu) -> Callable:
    f = getattr(mu, "f", None)
    if f is None:
        f = getattr(getattr(mu, "func", None), "f", None)
    if f is None:
        raise ConvexValError("pass f explicitly for an oracle that is not an integral valuation")
    return f


def riemann_sandwich(mu, u: ConvexFn, p: PolytopalPartition, f: Callable | None = None) -> Sandwich:
    """Bounds ``sum f(max_i u) V_n(K_i) <= mu(u + I_K) <= sum f(min_i u) V_n(K_i)``.

    ``f`` is the decreasing volume density of the simple valuation ``mu``.
    The maximum of a convex ``u`` over a cell sits at a vertex; the minimum
    may be interior, so it is taken from an LP.
    """
    f = f if f is not None else _density_of(mu)
    lower = upper = 0.0
    for c in p.cells:
        vol = c.volume
        top = float(np.max(u(c.vertices)))
        bottom = min_info(restrict_to(u, c)).value
        lower += float(f(top)) * vol
        upper += float(f(bottom)) * vol
    value = float(mu(restrict_to(u, p.parent)))
    return Sandwich(lower, value, upper)


# generators


def uniform_refinement(p: PolytopalPartition) -> PolytopalPartition:
    """Cut every cell through the midpoints of its bounding box, axis by axis."""
    vol_tol = REL_TOL * p.parent.volume
    cells = list(p.cells)
    for axis in range(p.dim):
        nxt = []
        for c in cells:
            lo, hi = c.bounding_box()
            e = np.zeros(p.dim)
            e[axis] = 1.0
            nxt += _split(c, Hyperplane(e, 0.5 * (lo[axis] + hi[axis])), vol_tol)
        cells = nxt
    return PolytopalPartition(p.parent, tuple(cells), None)


def random_rectangular_partition(rng: np.random.Generator, dim: int, n_cuts: int = 3,
                                 lo=None, hi=None) -> PolytopalPartition:
    """Guillotine cuts of random boxes; the cuts do not extend across cells."""
    lo = np.zeros(dim) if lo is None else np.asarray(lo, dtype=float)
    hi = np.ones(dim) if hi is None else np.asarray(hi, dtype=float)
    boxes = [(lo.copy(), hi.copy())]
    for _ in range(n_cuts):
        i = int(rng.integers(len(boxes)))
        a, b = boxes.pop(i)
        axis = int(rng.integers(dim))
        cut = a[axis] + (b[axis] - a[axis]) * float(rng.uniform(0.2, 0.8))
        b1, a2 = b.copy(), a.copy()
        b1[axis] = cut
        a2[axis] = cut
        boxes += [(a, b1), (a2, b)]
    cells = tuple(Polytope.box(a, b) for a, b in boxes)
    return PolytopalPartition(Polytope.box(lo, hi), cells, None)


def grid_partition(lo, hi, counts) -> PolytopalPartition:
    """Axis-aligned grid with ``counts[j]`` slabs along axis ``j``."""
    lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
    edges = [np.linspace(lo[j], hi[j], int(counts[j]) + 1) for j in range(len(lo))]
    cells = []
    for index in np.ndindex(*[int(c) for c in counts]):
        a = np.array([edges[j][i] for j, i in enumerate(index)])
        b = np.array([edges[j][i + 1] for j, i in enumerate(index)])
        cells.append(Polytope.box(a, b))
    return PolytopalPartition(Polytope.box(lo, hi), tuple(cells), True)


__all__ = [
    "PolytopalPartition",
    "InductiveCertificate",
    "CertificateEntry",
    "Sandwich",
    "facet_hyperplanes",
    "refine_by_hyperplane",
    "complete",
    "is_complete",
    "inductive_certificate",
    "verify_decomposition",
    "riemann_sandwich",
    "uniform_refinement",
    "random_rectangular_partition",
    "grid_partition",
]
