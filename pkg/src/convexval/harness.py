"""Random instances, the undergraph-length study and the check suites."""
from __future__ import annotations

import hashlib
import io
import csv
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .convex_fn import ConvexFn, apply_motion, join, lift_undergraph, meet_glued, restrict_to
from .exceptions import BadConfig
from .geom import Polytope, RigidMotion, hausdorff_distance
from .measures import random_measure
from .partitions import (complete, inductive_certificate, random_rectangular_partition,
                         verify_decomposition)
from .sublevel import sublevel_closed, sublevel_strict_closure
from .valuation import IntegralValuation, eval_beta, eval_layercake, eval_sublevel

DOMAIN_KINDS = ("box", "free", "simplex")


@dataclass(frozen=True)
class GenConfig:
    seed: int
    dim: int = 2
    pieces_range: tuple[int, int] = (2, 5)
    domain_kind: str = "box"
    coefficient_scale: float = 1.0

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise BadConfig(f"dim must be 1, 2 or 3, got {self.dim}")
        if self.domain_kind not in DOMAIN_KINDS:
            raise BadConfig(f"domain_kind must be one of {DOMAIN_KINDS}")
        lo, hi = self.pieces_range
        if not 1 <= lo <= hi:
            raise BadConfig("pieces_range must satisfy 1 <= min <= max")
        if not self.coefficient_scale > 0:
            raise BadConfig("coefficient_scale must be positive")


def gen_convex_fn(cfg: GenConfig) -> ConvexFn:
    """Random max-affine function; free ones get ``+-scale * e_j`` slopes added."""
    rng = np.random.default_rng(cfg.seed)
    n, c = cfg.dim, cfg.coefficient_scale
    p = int(rng.integers(cfg.pieces_range[0], cfg.pieces_range[1] + 1))
    S = c * rng.normal(size=(p, n))
    b = rng.normal(size=p)
    if cfg.domain_kind == "free":
        E = np.vstack([np.eye(n), -np.eye(n)]) * c * rng.uniform(0.5, 1.5, size=(2 * n, 1))
        S = np.vstack([S, E])
        b = np.concatenate([b, rng.normal(size=2 * n) - 1.0])
        return ConvexFn(S, b, dim=n)
    if cfg.domain_kind == "box":
        dom = Polytope.box(-rng.uniform(0.5, 2.0, n), rng.uniform(0.5, 2.0, n))
    else:
        corner = rng.uniform(-1.0, 0.0, n)
        V = np.vstack([corner, corner + np.diag(rng.uniform(1.0, 2.5, n))])
        dom = Polytope.from_vertices(V)
    return ConvexFn(S, b, domain=dom, dim=n)


def random_instance(rng: np.random.Generator, dim: int) -> ConvexFn:
    kind = DOMAIN_KINDS[int(rng.integers(3))]
    return gen_convex_fn(GenConfig(int(rng.integers(2**31)), dim, (2, 4), kind))


# undergraph-length


def undergraph_valuation(u: ConvexFn, t: float) -> float:
    """``V_1(cl{u_hat < t})`` with ``u_hat(x, y) = u(x) + |y|``."""
    if u.dim != 1:
        raise BadConfig("undergraph-length is implemented for one-variable functions")
    return float(sublevel_strict_closure(lift_undergraph(u), t).intrinsic_volumes[1])


def undergraph_closed_form(lam: float, t: float = 1.0) -> float:
    """Value for ``u_lam(x) = |x| / lam``: the rhombus ``|x| / lam + |y| <= t``."""
    return 2.0 * t * math.sqrt(1.0 + lam * lam)


@dataclass
class UndergraphStudy:
    lambdas: list[float]
    t: float
    values: list[float]
    max_deviation: float
    fit_residual: float

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["lambda", "v1", "closed_form"])
        for lam, v in zip(self.lambdas, self.values):
            w.writerow([f"{lam:.9f}", f"{v:.9f}", f"{undergraph_closed_form(lam, self.t):.9f}"])
        return buf.getvalue()


def undergraph_lambda_sweep(lambdas: Sequence[float], t: float = 1.0, degree: int = 3) -> UndergraphStudy:
    """Values for ``u_lam = |x| / lam`` and the residual of a degree-3 polynomial fit.

    A polynomial of degree ``d`` fitted through more than ``d + 1`` points
    leaves a residual when the data are not polynomial in ``lam``.
    """
    lambdas = [float(x) for x in lambdas]
    if any(lam <= 0 for lam in lambdas):
        raise BadConfig("lambda values must be positive")
    base = ConvexFn.abs()
    values = [undergraph_valuation(ConvexFn(base.slopes / lam, base.intercepts, dim=1), t) for lam in lambdas]
    dev = max(abs(v - undergraph_closed_form(lam, t)) for lam, v in zip(lambdas, values))
    if len(lambdas) > degree + 1:
        coef = np.polyfit(lambdas, values, degree)
        resid = float(np.max(np.abs(np.polyval(coef, lambdas) - values)))
    else:
        resid = 0.0
    return UndergraphStudy(lambdas, float(t), values, float(dev), resid)


# reports


def input_hash(payload: dict) -> str:
    """Git blob hash of the canonical JSON of the inputs."""
    body = json.dumps(payload, sort_keys=True).encode()
    return hashlib.sha1(b"blob %d\0" % len(body) + body).hexdigest()


@dataclass
class Report:
    check: str
    trials: int
    max_residual: float
    seed: int
    tol: float
    passed: bool
    details: dict = field(default_factory=dict)
    input_hash: str = ""
    suites: list["Report"] = field(default_factory=list)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["suites"] = [s.to_dict() for s in self.suites]
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _scaled(diff: float, value: float) -> float:
    return abs(diff) / (1.0 + abs(value))


def suite_routes(trials: int, seed: int, tol: float | None = None) -> Report:
    """``trials`` instances per dimension; layer-cake at ``k = n``, beta at every ``k``."""
    tol_lc = 1e-8 if tol is None else tol
    tol_beta = 1e-6 if tol is None else tol
    rng = np.random.default_rng(seed)
    worst_lc = worst_beta = 0.0
    for dim in (1, 2, 3):
        for _ in range(trials):
            u = random_instance(rng, dim)
            nu = random_measure(rng)
            for k in range(dim + 1):
                v = IntegralValuation(k, nu)
                val = eval_sublevel(v, u)
                worst_beta = max(worst_beta, _scaled(val - eval_beta(v, u), val))
                if k == dim:
                    worst_lc = max(worst_lc, _scaled(val - eval_layercake(v, u), val))
    passed = worst_lc <= tol_lc and worst_beta <= tol_beta
    return Report("routes", trials, max(worst_lc, worst_beta), seed, tol_lc, passed,
                  {"layercake": worst_lc, "beta": worst_beta, "tol_beta": tol_beta})


def glued_trial(rng: np.random.Generator, dim: int):
    """A random glued family ``h + I_K``, ``h + I_L`` with ``K u L`` a box."""
    h = random_instance(rng, dim)
    if not h.is_free:
        h = ConvexFn(h.slopes, h.intercepts, dim=dim, validate=False)
        h = join(h, ConvexFn(np.vstack([np.eye(dim), -np.eye(dim)]), -np.ones(2 * dim), dim=dim))
    Q = Polytope.box(-rng.uniform(0.5, 2.0, dim), rng.uniform(0.5, 2.0, dim))
    normal = rng.normal(size=dim)
    normal /= np.linalg.norm(normal)
    offset = float(normal @ rng.uniform(-0.4, 0.4, dim))
    return meet_glued(h, Q, normal, offset)


def suite_lattice(trials: int, seed: int, tol: float | None = None) -> Report:
    """Valuation identity and ``m(u v v) = max(m(u), m(v))`` on glued families."""
    tol = 1e-8 if tol is None else tol
    rng = np.random.default_rng(seed)
    worst = worst_m = 0.0
    for i in range(trials):
        dim = 1 + i % 3
        fam = glued_trial(rng, dim)
        v = IntegralValuation(int(rng.integers(dim + 1)), random_measure(rng))
        mu_u, mu_v = v(fam.u), v(fam.v)
        res = abs(v(fam.join) + v(fam.meet) - mu_u - mu_v)
        worst = max(worst, res / (abs(mu_u) + abs(mu_v) + 1.0))
        if not fam.join.is_infty:
            worst_m = max(worst_m, abs(fam.join.minimum - max(fam.u.minimum, fam.v.minimum)))
    return Report("lattice", trials, max(worst, worst_m), seed, tol, worst <= tol and worst_m <= tol,
                  {"identity": worst, "min_of_join": worst_m})


def suite_partitions(trials: int, seed: int, tol: float | None = None) -> Report:
    """Completion, certificates and the decomposition identity for ``k = n``."""
    tol = 1e-8 if tol is None else tol
    rng = np.random.default_rng(seed)
    worst = 0.0
    failures = 0
    for i in range(trials):
        dim = 1 + i % 3
        p = random_rectangular_partition(rng, dim, int(rng.integers(1, 5)),
                                         lo=-rng.uniform(0.5, 1.5, dim), hi=rng.uniform(0.5, 1.5, dim))
        pc = complete(p)
        twice = complete(pc)
        if len(twice) != len(pc) or not np.allclose(np.sort(twice.volumes()), np.sort(pc.volumes()),
                                                    rtol=0, atol=1e-9 * pc.parent.volume):
            failures += 1
        cert = inductive_certificate(pc)
        if not cert.validate(pc):
            failures += 1
        u = random_instance(rng, dim)
        v = IntegralValuation(dim, random_measure(rng))
        whole = v(restrict_to(u, pc.parent))
        worst = max(worst, _scaled(verify_decomposition(v, u, pc, cert), whole))
    return Report("partitions", trials, worst, seed, tol, failures == 0 and worst <= tol,
                  {"structural_failures": failures})


V_SQRT5 = math.sqrt(5.0)
V_GEOMETRIC = 1.0 + math.sqrt(5.0)


def suite_undergraph(trials: int, seed: int, tol: float | None = None) -> Report:
    """Closed forms, the lambda sweep and the valuation properties in dimension 1.

    The half-line example is checked against the perimeter of the triangle
    with corners ``(0, -t), (0, t), (2t, 0)``, i.e. ``(1 + sqrt 5) t``; the
    value ``sqrt 5 t`` that omits the vertical side is reported alongside.
    """
    tol = 1e-9 if tol is None else tol
    rng = np.random.default_rng(seed)
    u = ConvexFn.abs()
    v = ConvexFn(np.array([[0.5]]), np.array([0.0]), domain=(np.array([[-1.0]]), np.array([0.0])), dim=1)
    exact = 0.0
    for t in (0.5, 1.0, 3.0):
        exact = max(exact, abs(undergraph_valuation(u, t) - 2 * math.sqrt(2) * t))
        exact = max(exact, abs(undergraph_valuation(v, t) - V_GEOMETRIC * t))
    sqrt5_gap = abs(undergraph_valuation(v, 1.0) - V_SQRT5)
    sweep = undergraph_lambda_sweep([0.25, 0.5, 1, 2, 4, 8])
    ident = mono = invar = 0.0
    for _ in range(trials):
        fam = glued_trial(rng, 1)
        t = float(rng.uniform(0.5, 4.0))
        a, b = undergraph_valuation(fam.u, t), undergraph_valuation(fam.v, t)
        res = abs(undergraph_valuation(fam.join, t) + undergraph_valuation(fam.meet, t) - a - b)
        ident = max(ident, res / (a + b + 1.0))
        # raising the function can only shrink the sub-level set
        w = join(fam.meet, ConvexFn(rng.normal(size=(1, 1)), rng.normal(size=1), dim=1, validate=False))
        mono = max(mono, undergraph_valuation(w, t) - undergraph_valuation(fam.meet, t))
        T = RigidMotion(np.array([[float(rng.choice([-1.0, 1.0]))]]), rng.normal(size=1))
        invar = max(invar, abs(undergraph_valuation(apply_motion(fam.meet, T), t)
                               - undergraph_valuation(fam.meet, t)))
    # the sub-level sets of |x| and x/2 + I_[0, inf) at level t are translates
    t = 1.0
    Ku = sublevel_closed(u, t)
    Kv = sublevel_closed(v, t)
    shifted = Polytope(Ku.A, Ku.b + Ku.A @ np.array([t]), dim=1)
    translate = hausdorff_distance(shifted, Kv)
    worst = max(exact, sweep.max_deviation, ident, max(mono, 0.0), invar, translate)
    passed = worst <= max(tol, 1e-8) and sweep.fit_residual >= 1e-3
    details = {
        "closed_forms": exact,
        "sweep_deviation": sweep.max_deviation,
        "sweep_fit_residual": sweep.fit_residual,
        "identity": ident,
        "monotone_excess": mono,
        "motion_invariance": invar,
        "translate_hausdorff": translate,
        "halfline_value_minus_sqrt5": sqrt5_gap,
    }
    return Report("undergraph", trials, worst, seed, tol, passed, details)


SUITES = {
    "routes": suite_routes,
    "lattice": suite_lattice,
    "partitions": suite_partitions,
    "undergraph": suite_undergraph,
}


def run_suite(name: str, trials: int, seed: int = 0, tol: float | None = None) -> Report:
    if trials is None or int(trials) <= 0:
        raise BadConfig("trials must be a positive integer")
    if name != "all" and name not in SUITES:
        raise BadConfig(f"unknown suite {name!r}; choose all or one of {sorted(SUITES)}")
    trials = int(trials)
    digest = input_hash({"suite": name, "trials": trials, "seed": seed, "tol": tol})
    if name == "all":
        subs = [fn(trials, seed, tol) for fn in SUITES.values()]
        rep = Report("all", trials, max(s.max_residual for s in subs), seed,
                     max(s.tol for s in subs), all(s.passed for s in subs), suites=subs)
    else:
        rep = SUITES[name](trials, seed, tol)
    rep.input_hash = digest
    return rep


__all__ = [
    "GenConfig",
    "UndergraphStudy",
    "Report",
    "gen_convex_fn",
    "random_instance",
    "glued_trial",
    "undergraph_valuation",
    "undergraph_closed_form",
    "undergraph_lambda_sweep",
    "input_hash",
    "run_suite",
]
