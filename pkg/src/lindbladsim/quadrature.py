"""Gauss-Legendre rules and the nested simplex grid built from them.

legendre_rule finds the roots of P_q by Newton iteration on the three-term
recurrence, seeded with Chebyshev-angle estimates; weights come from
w_i = 2 / ((1 - x_i^2) P_q'(x_i)^2). canonical_rule rescales [-1, 1] to [0, t].

The nested grid at depth k scales a single rule into the ordered simplex
0 <= s_1 <= ... <= s_k <= t by the recursion

    node(j_k)            = shat[j_k]
    node(prefix, j)      = node(prefix) * shat[j] / t
    weight(prefix, j)    = node(prefix) * w[j] / t

so every deeper node multiplies by shat[j]/t < 1 and the chain is ordered by
construction. The product of the chain weights summed over all q^k index
tuples equals t^k / k! whenever q >= ceil(k / 2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import ArgumentError, ResourceLimitError

MAX_ORDER = 64
TERM_GUARDRAIL = 10 ** 8
NEWTON_TOL = 1e-15
NEWTON_MAX_ITER = 100


def _legendre_value_derivative(q: int, x: np.ndarray):
    """P_q(x) and P_q'(x) by the ascending three-term recurrence."""
    p_prev = np.ones_like(x)
    p = x.copy()
    for n in range(2, q + 1):
        p_prev, p = p, ((2 * n - 1) * x * p - (n - 1) * p_prev) / n
    dp = q * (x * p - p_prev) / (x * x - 1.0)
    return p, dp


def legendre_rule(q: int):
    """Nodes and weights of the q-point Gauss-Legendre rule on [-1, 1]."""
    if not isinstance(q, (int, np.integer)) or q < 1 or q > MAX_ORDER:
        raise ArgumentError(f"quadrature order must be an integer in [1, {MAX_ORDER}], got {q}")
    q = int(q)
    if q == 1:
        return np.array([0.0]), np.array([2.0])
    i = np.arange(1, q + 1)
    x = np.cos(np.pi * (i - 0.25) / (q + 0.5))
    for _ in range(NEWTON_MAX_ITER):
        p, dp = _legendre_value_derivative(q, x)
        dx = p / dp
        x = x - dx
        if np.abs(dx).max() < NEWTON_TOL:
            break
    _, dp = _legendre_value_derivative(q, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    order = np.argsort(x)
    return x[order], w[order]


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """A Gauss-Legendre rule scaled to the interval [0, interval_length]."""

    order: int
    interval_length: float
    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)


def canonical_rule(q: int, t: float) -> QuadratureRule:
    """q-point rule on [0, t]: shat = t(x+1)/2, what = t v / 2."""
    if not t > 0:
        raise ArgumentError(f"interval length must be positive, got {t}")
    x, v = legendre_rule(q)
    return QuadratureRule(order=int(q), interval_length=float(t),
                          nodes=t * (x + 1.0) / 2.0, weights=t * v / 2.0)


@dataclass(frozen=True, eq=False)
class NestedPoint:
    """One simplex point: indices (j_k, ..., j_1), nodes and weights outermost first.

    nodes[0] = s_k >= nodes[1] = s_{k-1} >= ... >= nodes[k-1] = s_1.
    """

    indices: tuple
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def weight_product(self) -> float:
        return float(np.prod(self.weights))


@dataclass(frozen=True, eq=False)
class NestedGrid:
    """Lazily iterable nested grid of depth k over a canonical rule."""

    rule: QuadratureRule
    depth: int

    @property
    def count(self) -> int:
        return self.rule.order ** self.depth

    def __iter__(self) -> Iterator[NestedPoint]:
        for idx, nodes, weights in self.chunks():
            for r in range(idx.shape[0]):
                yield NestedPoint(tuple(int(j) for j in idx[r]),
                                  nodes[r].copy(), weights[r].copy())

    def chunks(self, chunk_size: int = 8192):
        """Yield (indices, nodes, weights) arrays of shape (B, k) in enumeration order.

        Enumeration is lexicographic over (j_k, ..., j_1); axis 1 runs outermost
        (s_k) to innermost (s_1). Chunking never changes the enumeration order.
        """
        q, k = self.rule.order, self.depth
        t = self.rule.interval_length
        shat, what = self.rule.nodes, self.rule.weights
        total = self.count
        for start in range(0, total, chunk_size):
            stop = min(start + chunk_size, total)
            flat = np.arange(start, stop, dtype=np.int64)
            idx = np.empty((stop - start, k), dtype=np.int64)
            rem = flat
            for pos in range(k - 1, -1, -1):
                idx[:, pos] = rem % q
                rem = rem // q
            nodes = np.empty((stop - start, k))
            weights = np.empty((stop - start, k))
            nodes[:, 0] = shat[idx[:, 0]]
            weights[:, 0] = what[idx[:, 0]]
            for pos in range(1, k):
                weights[:, pos] = nodes[:, pos - 1] * what[idx[:, pos]] / t
                nodes[:, pos] = nodes[:, pos - 1] * shat[idx[:, pos]] / t
            yield idx, nodes, weights


def nested_grid(k: int, q: int, t: float) -> NestedGrid:
    if k < 1:
        raise ArgumentError(f"nesting depth must be >= 1, got {k}")
    if q ** k > TERM_GUARDRAIL:
        raise ResourceLimitError(
            f"nested grid would enumerate q^k = {q ** k} > {TERM_GUARDRAIL} tuples")
    return NestedGrid(rule=canonical_rule(q, t), depth=int(k))


def nested_weight_sum(k: int, q: int, t: float) -> float:
    """Sum of chain-weight products over all q^k tuples; equals t^k/k! for q >= ceil(k/2).

    Accumulated with compensated (exact) summation per chunk so the result does
    not depend on how iteration is partitioned.
    """
    grid = nested_grid(k, q, t)
    partials = []
    for _, _, weights in grid.chunks():
        partials.append(math.fsum(np.prod(weights, axis=1).tolist()))
    return math.fsum(partials)


def quadrature_error_bound(q: int, t: float, f2q_bound: float) -> float:
    """|E_q[f]| <= f2q_bound * t^(2q+1) * q / ((2q)! * 2^(4q-1)) on [0, t]."""
    if q < 1:
        raise ArgumentError(f"quadrature order must be >= 1, got {q}")
    if t < 0:
        raise ArgumentError(f"interval length must be nonnegative, got {t}")
    if f2q_bound < 0:
        raise ArgumentError("derivative bound must be nonnegative")
    return f2q_bound * t ** (2 * q + 1) * q / (math.factorial(2 * q) * 2.0 ** (4 * q - 1))
