"""Completely positive Kraus-series approximation of the Lindblad channel.

The channel exp(Lt) is expanded around the no-jump semigroup by iterating
Duhamel's identity: truncating after K interleaved jump insertions leaves the
diamond-norm error (2 beta t)^{K+1}/(K+1)! with beta the be-norm. Each nested
time-ordered integral is discretized on the scaled Gauss-Legendre simplex grid,
and each drift factor exp(J s) is replaced by its order-Kp Taylor polynomial.
The result is an explicit finite Kraus family

    A_(k, l_1..l_k, j_1..j_k) = sqrt(what-chain product)
        * T(t - s_k) L_{l_k} T(s_k - s_{k-1}) ... L_{l_1} T(s_1)

whose map rho -> sum c^2 A rho A^dag is completely positive by construction.
Every truncation knob carries a closed-form error bound, and the normalizer
sum over the family admits a closed form that drives the segment-length budget
(success probability of the amplified channel application stays >= 1/4).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterator

import numpy as np
from scipy.linalg import expm

from .errors import ArgumentError, InfeasiblePrecisionError, ModelError, ResourceLimitError
from .linalg import batched_kraus_sum, kraus_superop, spectral_norm, unvec, vec
from .metrics import diamond_sandwich
from .models import (Lindbladian, be_norm, effective_generator, exact_channel,
                     jump_superoperator)
from .quadrature import TERM_GUARDRAIL, canonical_rule

MAX_SEARCH_ORDER = 40
_CHUNK = 8192


# ---------------------------------------------------------------------------
# closed-form error bounds


def bound_duhamel(K: int, t: float, beta: float) -> float:
    """Diamond-norm error of the K-fold Duhamel truncation with exact integrals."""
    if K < 0 or t < 0 or beta < 0:
        raise ArgumentError("bound_duhamel needs K >= 0, t >= 0, beta >= 0")
    return (2.0 * beta * t) ** (K + 1) / math.factorial(K + 1)


def bound_taylor(Kp: int, t: float, beta: float) -> float:
    """Diamond-norm error of replacing the drift conjugation by its Taylor map."""
    if Kp < 0 or t < 0 or beta < 0:
        raise ArgumentError("bound_taylor needs Kp >= 0, t >= 0, beta >= 0")
    return 8.0 * math.exp(beta * t) * (beta * t) ** (Kp + 1) / math.factorial(Kp + 1)


def taylor_premise_holds(Kp: int, t: float, beta: float) -> bool:
    """(Kp+1)! >= 2 (beta t)^{Kp+1}, under which Taylor factors have norm <= 2."""
    return math.factorial(Kp + 1) >= 2.0 * (beta * t) ** (Kp + 1)


def bound_composite(k: int, Kp: int, t: float, beta: float) -> float:
    """Pointwise error of the depth-k chain with all drifts Taylor-substituted."""
    if k < 0:
        raise ArgumentError("bound_composite needs k >= 0")
    return bound_taylor(Kp, t, beta) * (4.0 * beta) ** k


def bound_quadrature(k: int, q: int, t: float, beta: float) -> float:
    """Error of the depth-k nested Gauss-Legendre sum against the exact integral."""
    if k < 1:
        raise ArgumentError("bound_quadrature needs k >= 1")
    if q < 1:
        raise ArgumentError("bound_quadrature needs q >= 1")
    return ((2.0 * t) ** (k - 1) * 2.0 ** (k + 1) * beta ** k
            * beta ** (2 * q) * t ** (2 * q + 1) * q
            / (math.factorial(k - 1) * math.factorial(2 * q)))


def taylor_total_bound(Kp: int, t: float, beta: float) -> float:
    """Total Taylor-substitution error across all chain depths, plus the k=0 term."""
    tail = 32.0 * math.exp(5.0 * beta * t) * (beta * t) ** (Kp + 2) / math.factorial(Kp + 1)
    return bound_taylor(Kp, t, beta) + tail


# ---------------------------------------------------------------------------
# segment budget


def _budget_expression(t: float, beta: float, alpha_sq: float, weight_model: str) -> float:
    if weight_model == "conservative":
        return math.exp(2 * beta * t) + t * alpha_sq * math.exp(2 * beta * t) * math.exp(t * alpha_sq)
    if weight_model == "rederived":
        return math.exp(2 * beta * t) * math.exp(t * alpha_sq)
    raise ArgumentError(f"unknown weight_model {weight_model!r}")


def segment_time_from_bounds(beta: float, alpha_sq: float, cap: float | None = None,
                             weight_model: str = "conservative") -> float:
    """Largest segment length keeping the normalizer budget expression <= 2.

    With beta = 0 the dynamics are trivial and the requested cap (or infinity)
    is returned. Bisection runs to absolute tolerance 1e-12, returning the
    inner endpoint, so the expression value lands in [2 - 1e-9, 2].
    """
    if beta == 0.0:
        return float(cap) if cap is not None else math.inf
    lo, hi = 0.0, 1.0 / beta
    while _budget_expression(hi, beta, alpha_sq, weight_model) <= 2.0:
        lo, hi = hi, 2.0 * hi
    while hi - lo > 1e-12:
        mid = (lo + hi) / 2
        if _budget_expression(mid, beta, alpha_sq, weight_model) <= 2.0:
            lo = mid
        else:
            hi = mid
    tstar = lo
    if cap is not None:
        tstar = min(tstar, float(cap))
    return tstar


def segment_time(lind: Lindbladian, cap: float | None = None,
                 weight_model: str = "conservative") -> float:
    """Segment budget for a static model; see segment_time_from_bounds."""
    return segment_time_from_bounds(be_norm(lind), sum(a * a for a in lind.alphas),
                                    cap, weight_model)


# ---------------------------------------------------------------------------
# drift propagators


class _ExactPropagator:
    """Batched exp(J delta): eigendecomposition fast path, expm fallback.

    The fast path is accepted only if it reproduces expm at the full interval
    to 1e-11, which keeps assembled superoperators well inside every tolerance
    used by the bound checks.
    """

    def __init__(self, J: np.ndarray, t_check: float):
        self.J = J
        self._cache: dict[float, np.ndarray] = {}
        self._eig = None
        try:
            lam, V = np.linalg.eig(J)
            Vinv = np.linalg.inv(V)
            ref = expm(J * t_check)
            fast = (V * np.exp(lam * t_check)) @ Vinv
            if np.abs(fast - ref).max() <= 1e-11 * max(1.0, np.abs(ref).max()):
                self._eig = (lam, V, Vinv)
        except np.linalg.LinAlgError:
            pass

    def batch(self, deltas: np.ndarray) -> np.ndarray:
        deltas = np.asarray(deltas, dtype=float)
        if self._eig is not None:
            lam, V, Vinv = self._eig
            phases = np.exp(np.multiply.outer(deltas, lam))
            return np.einsum("ij,bj,jk->bik", V, phases, Vinv, optimize=True)
        out = np.empty(deltas.shape + self.J.shape, dtype=complex)
        for b, dt in enumerate(deltas):
            key = float(dt)
            if key not in self._cache:
                self._cache[key] = expm(self.J * key)
            out[b] = self._cache[key]
        return out


class _TaylorPropagator:
    """Batched order-Kp Taylor polynomial of exp(J delta)."""

    def __init__(self, J: np.ndarray, Kp: int):
        d = J.shape[0]
        self.powers = np.empty((Kp + 1, d, d), dtype=complex)
        self.powers[0] = np.eye(d)
        for ell in range(1, Kp + 1):
            self.powers[ell] = self.powers[ell - 1] @ J
        self.inv_fact = np.array([1.0 / math.factorial(ell) for ell in range(Kp + 1)])

    def batch(self, deltas: np.ndarray) -> np.ndarray:
        deltas = np.asarray(deltas, dtype=float)
        Kp = self.powers.shape[0] - 1
        coeff = deltas[:, None] ** np.arange(Kp + 1)[None, :] * self.inv_fact[None, :]
        return np.einsum("bl,lij->bij", coeff, self.powers, optimize=True)


def taylor_drift(lind: Lindbladian, s: float, Kp: int) -> np.ndarray:
    """Matrix sum_{ell<=Kp} (J s)^ell / ell!."""
    if s < 0:
        raise ArgumentError(f"duration must be nonnegative, got {s}")
    if Kp < 0:
        raise ArgumentError(f"Taylor order must be nonnegative, got {Kp}")
    J = effective_generator(lind)
    return _TaylorPropagator(J, Kp).batch(np.array([s]))[0]


# ---------------------------------------------------------------------------
# chain enumeration engine

def _chain_count(m: int, q: int, K: int) -> int:
    return sum((m * q) ** k for k in range(1, K + 1))


def _check_guardrail(m: int, q: int, K: int):
    n = _chain_count(m, q, K)
    if n > TERM_GUARDRAIL:
        raise ResourceLimitError(
            f"chain enumeration would visit {n} > {TERM_GUARDRAIL} terms")


def _decode_chain(flat: np.ndarray, k: int, m: int, q: int, rule):
    """Decode flat ids into (ell_idx, j_idx, nodes, weights), outermost first.

    Canonical enumeration order: the (l_k..l_1) digits are the major block, the
    (j_k..j_1) digits the minor block, both lexicographic with the outermost
    index most significant.
    """
    qk = q ** k
    ell_block = flat // qk
    j_block = flat % qk
    B = flat.size
    ell_idx = np.empty((B, k), dtype=np.int64)
    j_idx = np.empty((B, k), dtype=np.int64)
    rem = ell_block
    for pos in range(k - 1, -1, -1):
        ell_idx[:, pos] = rem % m
        rem = rem // m
    rem = j_block
    for pos in range(k - 1, -1, -1):
        j_idx[:, pos] = rem % q
        rem = rem // q
    t = rule.interval_length
    nodes = np.empty((B, k))
    weights = np.empty((B, k))
    nodes[:, 0] = rule.nodes[j_idx[:, 0]]
    weights[:, 0] = rule.weights[j_idx[:, 0]]
    for pos in range(1, k):
        weights[:, pos] = nodes[:, pos - 1] * rule.weights[j_idx[:, pos]] / t
        nodes[:, pos] = nodes[:, pos - 1] * rule.nodes[j_idx[:, pos]] / t
    return ell_idx, j_idx, nodes, weights


def _chain_matrices(lind: Lindbladian, t: float, k: int, rule, propagator,
                    flat: np.ndarray):
    """Kraus matrices (without sqrt-weight coefficients) and weight products."""
    m = lind.num_jumps
    ell_idx, j_idx, nodes, weights = _decode_chain(flat, k, m, rule.order, rule)
    Ls = np.stack(lind.jumps)
    A = propagator.batch(t - nodes[:, 0])
    for pos in range(k):
        A = A @ Ls[ell_idx[:, pos]]
        nxt = nodes[:, pos + 1] if pos + 1 < k else np.zeros(flat.size)
        A = A @ propagator.batch(nodes[:, pos] - nxt)
    return ell_idx, j_idx, nodes, weights, A


def _chain_superop(lind: Lindbladian, t: float, k: int, q: int, propagator) -> np.ndarray:
    """Sum over all depth-k index tuples of wprod * K[A(tuple)]."""
    d = lind.dim
    m = lind.num_jumps
    S = np.zeros((d * d, d * d), dtype=complex)
    if m == 0:
        return S
    rule = canonical_rule(q, t)
    total = (m ** k) * (q ** k)
    for start in range(0, total, _CHUNK):
        flat = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        _, _, _, weights, A = _chain_matrices(lind, t, k, rule, propagator, flat)
        S += batched_kraus_sum(np.prod(weights, axis=1), A)
    return S


# ---------------------------------------------------------------------------
# series maps


def f_k(lind: Lindbladian, t: float, s) -> np.ndarray:
    """Integrand superoperator at the ordered times s = (s_1 <= ... <= s_k).

    K[exp(J(t-s_k))] . L_jump . K[exp(J(s_k-s_{k-1}))] ... L_jump . K[exp(J s_1)].
    An empty s gives the drift semigroup conjugation.
    """
    s = np.asarray(s, dtype=float).reshape(-1)
    if t < 0:
        raise ArgumentError(f"evolution time must be nonnegative, got {t}")
    if s.size and (np.any(np.diff(s) < 0) or s[0] < 0 or s[-1] > t):
        raise ArgumentError("jump times must satisfy 0 <= s_1 <= ... <= s_k <= t")
    J = effective_generator(lind)
    LJ = jump_superoperator(lind)
    S = kraus_superop(expm(J * (t - (s[-1] if s.size else 0.0))))
    for i in range(s.size - 1, -1, -1):
        lower = s[i - 1] if i > 0 else 0.0
        S = S @ LJ @ kraus_superop(expm(J * (s[i] - lower)))
    return S


def g_K_quadrature(lind: Lindbladian, t: float, K: int, q: int) -> np.ndarray:
    """Order-K series superoperator with exact drifts and nested quadrature sums."""
    if t < 0:
        raise ArgumentError(f"evolution time must be nonnegative, got {t}")
    if K < 0:
        raise ArgumentError(f"series order must be nonnegative, got {K}")
    J = effective_generator(lind)
    S = kraus_superop(expm(J * t))
    if K == 0 or lind.num_jumps == 0 or t == 0.0:
        return S
    _check_guardrail(lind.num_jumps, q, K)
    prop = _ExactPropagator(J, t)
    for k in range(1, K + 1):
        S += _chain_superop(lind, t, k, q, prop)
    return S


# ---------------------------------------------------------------------------
# truncation configuration and order selection


@dataclass(frozen=True)
class TruncationConfig:
    """Series order K, drift Taylor order Kp, quadrature order q, segmentation."""

    series_order: int
    taylor_order: int
    quadrature_order: int
    segment_time: float
    num_segments: int = 1

    def __post_init__(self):
        if self.series_order < 0 or self.taylor_order < 0:
            raise ArgumentError("truncation orders must be nonnegative")
        if self.quadrature_order < 1:
            raise ArgumentError("quadrature order must be >= 1")
        if not self.segment_time >= 0:
            raise ArgumentError("segment_time must be nonnegative")
        if self.num_segments < 1:
            raise ArgumentError("num_segments must be >= 1")


def choose_orders_from_bounds(beta: float, alpha_sq: float, seg_t: float, eps: float,
                              max_order: int = MAX_SEARCH_ORDER) -> TruncationConfig:
    """Smallest (K, Kp, q) whose closed-form bounds each stay below eps/3.

    The three error sources (series truncation, quadrature transfer, Taylor
    substitution) get an even eps/3 split. Selection is sequential: K first,
    then q given K (with the floor q >= ceil(K/2) that keeps the nested weight
    identities exact), then Kp against the total substituted-drift budget.
    Monotone in eps: halving eps never decreases any order.
    """
    if eps <= 0:
        raise ArgumentError(f"target precision must be positive, got {eps}")
    if seg_t < 0:
        raise ArgumentError(f"segment time must be nonnegative, got {seg_t}")
    budget = eps / 3.0
    if beta == 0.0 or seg_t == 0.0:
        return TruncationConfig(0, 0, 1, seg_t)

    if alpha_sq == 0.0:
        K = 0
    else:
        K = next((k for k in range(0, max_order + 1)
                  if bound_duhamel(k, seg_t, beta) <= budget), None)
        if K is None:
            raise InfeasiblePrecisionError(
                f"no series order <= {max_order} reaches eps = {eps}")

    if K == 0:
        q = 1
    else:
        q_floor = max(1, math.ceil(K / 2))
        q = next((qq for qq in range(q_floor, max_order + 1)
                  if sum(bound_quadrature(k, qq, seg_t, beta)
                         for k in range(1, K + 1)) <= budget), None)
        if q is None:
            raise InfeasiblePrecisionError(
                f"no quadrature order <= {max_order} reaches eps = {eps}")

    Kp = next((kp for kp in range(0, max_order + 1)
               if taylor_premise_holds(kp, seg_t, beta)
               and taylor_total_bound(kp, seg_t, beta) <= budget), None)
    if Kp is None:
        raise InfeasiblePrecisionError(
            f"no Taylor order <= {max_order} reaches eps = {eps}")

    return TruncationConfig(K, Kp, q, seg_t)


def choose_orders(lind: Lindbladian, seg_t: float, eps: float,
                  max_order: int = MAX_SEARCH_ORDER) -> TruncationConfig:
    """Order selection for a static model; see choose_orders_from_bounds."""
    return choose_orders_from_bounds(be_norm(lind), sum(a * a for a in lind.alphas),
                                     seg_t, eps, max_order)


# ---------------------------------------------------------------------------
# the Kraus family


@dataclass(frozen=True, eq=False)
class KrausTerm:
    """One Kraus operator: index (k, (l_1..l_k), (j_1..j_k)), its sqrt-weight
    coefficient, the bare matrix product, and the block-encoding normalizer."""

    index: tuple
    coefficient: float
    matrix: np.ndarray
    normalizer: float

    @property
    def operator(self) -> np.ndarray:
        return self.coefficient * self.matrix


class CPMapApprox:
    """Lazily enumerated completely positive Kraus approximation of exp(L t).

    Kraus matrices are materialized per index chunk during application, never
    held all at once; the superoperator is assembled on demand and cached.
    """

    def __init__(self, lind: Lindbladian, t: float, config: TruncationConfig):
        if t < 0:
            raise ArgumentError(f"evolution time must be nonnegative, got {t}")
        m = lind.num_jumps
        K = config.series_order if (m > 0 and t > 0) else 0
        _check_guardrail(max(m, 1), config.quadrature_order, K)
        self.lind = lind
        self.t = float(t)
        self.config = config
        self._series_order = K
        self._superop: np.ndarray | None = None
        self._norm_sq: float | None = None
        J = effective_generator(lind)
        self._prop = _TaylorPropagator(J, config.taylor_order)
        self._rule = (canonical_rule(config.quadrature_order, t) if K > 0 else None)

    @property
    def term_count(self) -> int:
        m, q = self.lind.num_jumps, self.config.quadrature_order
        return 1 + _chain_count(m, q, self._series_order)

    @property
    def zero_jump_term(self) -> np.ndarray:
        return self._prop.batch(np.array([self.t]))[0]

    def iter_terms(self) -> Iterator[KrausTerm]:
        """Terms in canonical order: k ascending, then (l_k..l_1), then (j_k..j_1)."""
        beta = be_norm(self.lind)
        e_bt = math.exp(beta * self.t)
        yield KrausTerm(index=(0, (), ()), coefficient=1.0,
                        matrix=self.zero_jump_term, normalizer=e_bt)
        m = self.lind.num_jumps
        alphas = np.asarray(self.lind.alphas)
        for k in range(1, self._series_order + 1):
            total = (m ** k) * (self._rule.order ** k)
            for start in range(0, total, _CHUNK):
                flat = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
                ell_idx, j_idx, _, weights, A = _chain_matrices(
                    self.lind, self.t, k, self._rule, self._prop, flat)
                coeff = np.sqrt(np.prod(weights, axis=1))
                alpha_prod = np.prod(alphas[ell_idx], axis=1)
                for r in range(flat.size):
                    ells = tuple(int(x) for x in ell_idx[r, ::-1])
                    js = tuple(int(x) for x in j_idx[r, ::-1])
                    yield KrausTerm(index=(k, ells, js),
                                    coefficient=float(coeff[r]),
                                    matrix=A[r],
                                    normalizer=float(coeff[r] * e_bt * alpha_prod[r]))

    def as_superoperator(self) -> np.ndarray:
        if self._superop is None:
            S = kraus_superop(self.zero_jump_term)
            for k in range(1, self._series_order + 1):
                S += _chain_superop(self.lind, self.t, k,
                                    self.config.quadrature_order, self._prop)
            self._superop = S
        return self._superop

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return unvec(self.as_superoperator() @ vec(np.asarray(rho, dtype=complex)))

    def normalizer_sum_squares(self) -> float:
        """sum_j s_j^2 over the family, s_j = coeff * e^{beta t} * prod alpha."""
        if self._norm_sq is None:
            beta = be_norm(self.lind)
            alphas_sq = np.asarray(self.lind.alphas) ** 2
            partials = [1.0]
            m = self.lind.num_jumps
            for k in range(1, self._series_order + 1):
                total = (m ** k) * (self._rule.order ** k)
                for start in range(0, total, _CHUNK):
                    flat = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
                    ell_idx, _, _, weights = _decode_chain(
                        flat, k, m, self._rule.order, self._rule)
                    wprod = np.prod(weights, axis=1)
                    aprod = np.prod(alphas_sq[ell_idx], axis=1)
                    partials.append(math.fsum((wprod * aprod).tolist()))
            self._norm_sq = math.exp(2 * beta * self.t) * math.fsum(partials)
        return self._norm_sq


def enumerate_kraus(lind: Lindbladian, t: float, config: TruncationConfig) -> CPMapApprox:
    """Build the CP Kraus approximant for one segment of length t."""
    return CPMapApprox(lind, t, config)


def normalizer_sum_squares(cp: CPMapApprox) -> float:
    return cp.normalizer_sum_squares()


# ---------------------------------------------------------------------------
# end-to-end simulation


@dataclass(frozen=True)
class SimulationReport:
    total_time: float
    eps: float
    segments: int
    segment_time: float
    series_order: int
    taylor_order: int
    quadrature_order: int
    kraus_terms: int
    normalizer_sum_squares: float
    bound_duhamel: float
    bound_quadrature: float
    bound_taylor_total: float
    per_segment_eps: float
    trace_deviation: float
    measured_choi_lower: float | None = None
    measured_choi_upper: float | None = None

    def as_dict(self) -> dict:
        out = {k: v for k, v in self.__dict__.items()}
        return out


def _validate_rho0(rho0: np.ndarray, dim: int) -> np.ndarray:
    rho = np.asarray(rho0, dtype=complex)
    if rho.shape != (dim, dim):
        raise ModelError(f"rho0 must have shape {(dim, dim)}, got {rho.shape}")
    scale = max(1.0, float(np.abs(rho).max()))
    if np.abs(rho - rho.conj().T).max() > 1e-10 * scale:
        raise ModelError("rho0 is not Hermitian")
    rho = (rho + rho.conj().T) / 2
    if abs(np.trace(rho).real - 1.0) > 1e-9:
        raise ModelError(f"rho0 must have unit trace, got {np.trace(rho).real}")
    if np.linalg.eigvalsh(rho).min() < -1e-10:
        raise ModelError("rho0 is not positive semidefinite")
    return rho


def simulate(lind: Lindbladian, rho0: np.ndarray, t: float, eps: float,
             verify: bool = False, weight_model: str = "conservative"):
    """Evolve rho0 for time t within diamond-norm error eps; returns (rho, report).

    The interval is split into equal segments no longer than the normalizer
    budget allows, orders are chosen per segment at precision eps/num_segments,
    and the same segment superoperator is applied num_segments times.
    """
    if t < 0:
        raise ArgumentError(f"evolution time must be nonnegative, got {t}")
    if eps <= 0:
        raise ArgumentError(f"target precision must be positive, got {eps}")
    rho = _validate_rho0(rho0, lind.dim)
    beta = be_norm(lind)
    if t == 0.0:
        report = SimulationReport(total_time=0.0, eps=eps, segments=0, segment_time=0.0,
                                  series_order=0, taylor_order=0, quadrature_order=1,
                                  kraus_terms=1, normalizer_sum_squares=1.0,
                                  bound_duhamel=0.0, bound_quadrature=0.0,
                                  bound_taylor_total=0.0, per_segment_eps=eps,
                                  trace_deviation=0.0)
        return rho, report

    tstar = segment_time(lind, cap=t, weight_model=weight_model)
    n_seg = max(1, math.ceil(t / tstar - 1e-12))
    seg_t = t / n_seg
    seg_eps = eps / n_seg
    cfg = replace(choose_orders(lind, seg_t, seg_eps),
                  segment_time=seg_t, num_segments=n_seg)
    cp = enumerate_kraus(lind, seg_t, cfg)
    S = cp.as_superoperator()
    v = vec(rho)
    for _ in range(n_seg):
        v = S @ v
    rho_out = unvec(v)

    measured_lower = measured_upper = None
    if verify:
        total = np.linalg.matrix_power(S, n_seg)
        measured_lower, measured_upper = diamond_sandwich(total, exact_channel(lind, t))

    K, Kp, q = cfg.series_order, cfg.taylor_order, cfg.quadrature_order
    bq = (sum(bound_quadrature(k, q, seg_t, beta) for k in range(1, K + 1))
          if (K > 0 and lind.num_jumps > 0) else 0.0)
    report = SimulationReport(
        total_time=float(t), eps=float(eps), segments=n_seg, segment_time=seg_t,
        series_order=K, taylor_order=Kp, quadrature_order=q,
        kraus_terms=cp.term_count,
        normalizer_sum_squares=cp.normalizer_sum_squares(),
        bound_duhamel=bound_duhamel(K, seg_t, beta) if lind.num_jumps else 0.0,
        bound_quadrature=bq,
        bound_taylor_total=taylor_total_bound(Kp, seg_t, beta),
        per_segment_eps=seg_eps,
        trace_deviation=float(abs(np.trace(rho_out).real - 1.0)),
        measured_choi_lower=measured_lower,
        measured_choi_upper=measured_upper,
    )
    return rho_out, report
