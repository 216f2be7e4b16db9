"""Panel-wise Gauss rules."""
from __future__ import annotations

from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial.laguerre import laggauss
from numpy.polynomial.legendre import leggauss


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    return leggauss(n)


@lru_cache(maxsize=None)
def gauss_laguerre(n: int) -> tuple[np.ndarray, np.ndarray]:
    return laggauss(n)


def panel_nodes(cuts: Sequence[float], nodes: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of a composite Gauss-Legendre rule on ``cuts``."""
    x, w = gauss_legendre(nodes)
    cuts = np.asarray(cuts, dtype=float)
    a, b = cuts[:-1], cuts[1:]
    keep = b > a
    a, b = a[keep], b[keep]
    half = 0.5 * (b - a)
    T = (half[:, None] * x[None, :] + (0.5 * (a + b))[:, None]).ravel()
    W = (half[:, None] * w[None, :]).ravel()
    return T, W


def integrate_panels(func: Callable[[np.ndarray], np.ndarray], cuts: Sequence[float], nodes: int = 16) -> float:
    """Composite Gauss-Legendre over consecutive ``cuts``; ``func`` is vectorized."""
    if len(cuts) < 2:
        return 0.0
    T, W = panel_nodes(cuts, nodes)
    if T.size == 0:
        return 0.0
    return float(np.sum(W * np.asarray(func(T), dtype=float)))


def integrate_exp_tail(func: Callable[[np.ndarray], np.ndarray], start: float, nodes: int = 16) -> float:
    """``int_start^inf func(t) exp(-t) dt`` by Gauss-Laguerre (exact for polynomial ``func``)."""
    x, w = gauss_laguerre(nodes)
    return float(np.exp(-start) * np.sum(w * np.asarray(func(start + x), dtype=float)))
