"""Minimal vectors of O(p,q) orbits of curvature operators.

The group acts on bivector endomorphisms by conjugation through
``Lambda^2``.  We fix the canonical involution ``theta0`` and move the
operator, descending the norm ``f(h) = ||h . M||^2`` along the boost
directions.  For the canonical involution the bivector inner product is the
plain Euclidean one in the pair basis, and ``Theta0 = G``, so a G-symmetric
``M`` splits as ``S + A`` (Euclidean symmetric / skew) with ``A`` equal to
the magnetic part.  Since ``tr(M^2) = |S|^2 - |A|^2`` is an orbit invariant,

    f = tr(M0^2) + 2 |A|^2,

and descending ``f`` is descending the magnetic part.  The flow evaluates
``f`` through this identity because ``|A|`` is computed without
cancellation even when it is many orders below ``|M|``.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from itertools import combinations

import numpy as np

from .cartan import CartanInvolution, boost_matrix, canonical_theta
from .tensors import (CurvatureInputError, CurvatureOperator, Signature,
                      as_signature, bivector_basis, frame_metric, wedge2)

log = logging.getLogger(__name__)

STEP_FLOOR = 1e-16
# relative slack for "f did not increase" in secant polishing
ROUNDING = 8 * np.finfo(float).eps
POLISH_MAX = 50
ARMIJO_C = 1e-4
MAX_RAPIDITY = 2.0


@dataclass(frozen=True, eq=False)
class LieAlgebraBasis:
    signature: Signature
    t_basis: list
    p_basis: list

    @property
    def p_images(self) -> np.ndarray:
        """``lambda(X_i)`` for the boost generators, stacked (pq, N, N)."""
        return self._p_images

    def __post_init__(self):
        sig = self.signature
        imgs = np.array([induced_rep(X, sig) for X in self.p_basis]).reshape(
            len(self.p_basis), sig.N, sig.N)
        object.__setattr__(self, "_p_images", imgs)


def lie_algebra_basis(sig) -> LieAlgebraBasis:
    """Cartan-decomposed basis of o(p,q), each element with trace form 2."""
    sig = as_signature(sig)
    n, p = sig.n, sig.p
    t_basis, p_basis = [], []
    for a, b in combinations(range(n), 2):
        X = np.zeros((n, n))
        if (a < p) == (b < p):
            X[a, b], X[b, a] = 1.0, -1.0
            t_basis.append(X)
    for a in range(p):
        for b in range(p, n):
            X = np.zeros((n, n))
            X[a, b] = X[b, a] = 1.0
            p_basis.append(X)
    return LieAlgebraBasis(sig, t_basis, p_basis)


def _check_lie(X, sig, tol=1e-10):
    g = np.diag(frame_metric(sig))
    scale = max(1.0, float(np.max(np.abs(X), initial=0.0)))
    if np.max(np.abs(X.T @ g + g @ X), initial=0.0) > tol * scale:
        raise CurvatureInputError("matrix is not in o(p,q)")


def induced_rep(X: np.ndarray, sig) -> np.ndarray:
    """Derivative of ``Lambda^2`` at the identity: ``Xu^v + u^Xv``."""
    sig = as_signature(sig)
    X = np.asarray(X, dtype=float)
    _check_lie(X, sig)
    B = bivector_basis(sig)
    a, b = B.first, B.second
    I = np.eye(sig.n)
    return (X[np.ix_(a, a)] * I[np.ix_(b, b)] + I[np.ix_(a, a)] * X[np.ix_(b, b)]
            - X[np.ix_(a, b)] * I[np.ix_(b, a)] - I[np.ix_(a, b)] * X[np.ix_(b, a)])


def is_isometry(h: np.ndarray, sig, tol: float = 1e-8) -> bool:
    g = np.diag(frame_metric(sig))
    scale = max(1.0, float(np.linalg.norm(h)) ** 2)
    return float(np.max(np.abs(h.T @ g @ h - g))) <= tol * scale


def isometry_inverse(h: np.ndarray, sig) -> np.ndarray:
    g = frame_metric(sig)
    return g[:, None] * h.T * g[None, :]


def act(h: np.ndarray, op: CurvatureOperator, check: bool = True) -> CurvatureOperator:
    """Conjugation ``Lambda^2(h) M Lambda^2(h)^-1`` for ``h`` in O(p,q)."""
    sig = op.signature
    h = np.asarray(h, dtype=float)
    if check and not is_isometry(h, sig):
        raise CurvatureInputError("group element is not an isometry of the frame metric")
    L = wedge2(h, sig)
    Linv = wedge2(isometry_inverse(h, sig), sig)
    return CurvatureOperator(sig, L @ op.matrix @ Linv)


def reorthogonalize(h: np.ndarray, sig, sweeps: int = 2) -> np.ndarray:
    """Pull a near-isometry back onto O(p,q) with the iteration h <- (h + g h^-T g)/2."""
    g = frame_metric(sig)
    for _ in range(sweeps):
        h = 0.5 * (h + g[:, None] * np.linalg.inv(h).T * g[None, :])
    return h


def norm_functional(op: CurvatureOperator) -> float:
    """Squared canonical theta-norm of the operator (sum of squared entries)."""
    return float(np.sum(op.matrix ** 2))


def orbit_traces(M: np.ndarray, k_max: int) -> np.ndarray:
    out, P = [], np.eye(len(M))
    for _ in range(k_max):
        P = P @ M
        out.append(np.trace(P))
    return np.array(out)


def _split(M: np.ndarray, G: np.ndarray):
    # M is G-symmetric and Theta0 = G, so the Euclidean skew part is the
    # magnetic part (M - Theta0 M Theta0) / 2
    A = 0.5 * (M - M.T)
    S = 0.5 * (M + M.T)
    return S, A


def _gradient(S, A, basis: LieAlgebraBasis) -> np.ndarray:
    # 2 <[L, M], M> = 4 tr(L [A, S]) for Euclidean-symmetric L
    C = A @ S - S @ A
    return 4.0 * np.einsum("kij,ji->k", basis.p_images, C)


@dataclass(frozen=True, eq=False)
class FlowState:
    op0: CurvatureOperator
    g_acc: np.ndarray
    op_cur: CurvatureOperator
    f: float
    grad: np.ndarray
    iter: int = 0
    trace0: float = 0.0
    excess: float = 0.0
    last_step: float = 0.0
    stalled: bool = False

    @property
    def grad_norm(self) -> float:
        return float(np.linalg.norm(self.grad))

    @property
    def rel_grad(self) -> float:
        """Gradient of log f, the scale-free moment map."""
        return self.grad_norm / self.f if self.f > 0 else 0.0

    @property
    def commutator(self) -> float:
        """``||[M, Theta0]||``; equals twice the Frobenius norm of the skew part."""
        return float(np.sqrt(2.0 * self.excess))

    @property
    def rel_commutator(self) -> float:
        return self.commutator / np.sqrt(self.f) if self.f > 0 else 0.0


def make_state(op0: CurvatureOperator, g_acc: np.ndarray, op_cur: CurvatureOperator,
               basis: LieAlgebraBasis, iteration: int = 0,
               trace0: float | None = None, last_step: float = 0.0) -> FlowState:
    M = op_cur.matrix
    if trace0 is None:
        trace0 = float(np.sum(op0.matrix * op0.matrix.T))
    S, A = _split(M, op_cur.G)
    excess = 2.0 * float(np.sum(A * A))
    f = trace0 + excess
    return FlowState(op0, g_acc, op_cur, f, _gradient(S, A, basis), iteration,
                     trace0, excess, last_step)


def moment_gradient(state: FlowState, basis: LieAlgebraBasis) -> np.ndarray:
    """``grad_i = 2 <[lambda(X_i), M], M>`` over the boost generators."""
    S, A = _split(state.op_cur.matrix, state.op_cur.G)
    return _gradient(S, A, basis)


def _symmetrize_operator(M, G):
    # project back onto G-symmetric operators to stop rounding drift
    GM = G[:, None] * M
    return G[:, None] * (0.5 * (GM + GM.T))


def _direction(state: FlowState, basis: LieAlgebraBasis, normalized: bool = True):
    d = state.grad / state.f if normalized else state.grad
    return d, -np.tensordot(d, np.array(basis.p_basis), axes=1)


def _trial(state: FlowState, basis: LieAlgebraBasis, X: np.ndarray, step: float) -> FlowState:
    """The state reached by ``exp(step X)``, without any acceptance test."""
    w, V = np.linalg.eigh(step * X)
    h = (V * np.exp(w)) @ V.T
    G = state.op_cur.G
    M_new = _symmetrize_operator(act(h, state.op_cur, check=False).matrix, G)
    S, A = _split(M_new, G)
    excess = 2.0 * float(np.sum(A * A))
    return FlowState(state.op0, h @ state.g_acc, CurvatureOperator(state.op0.signature, M_new),
                     state.trace0 + excess, _gradient(S, A, basis), state.iter + 1,
                     state.trace0, excess, step)


def flow_step(state: FlowState, basis: LieAlgebraBasis, step: float,
              normalized: bool = True) -> FlowState:
    """One Armijo-backtracked descent step along ``-grad``.

    The direction uses the gradient of ``log f`` (``grad / f``) when
    ``normalized``; the descent condition is the same either way.  Returns
    the input state flagged ``stalled`` if no step above 1e-16 decreases f.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    if not basis.p_basis or state.grad_norm == 0.0:
        return state
    direction, X = _direction(state, basis, normalized)
    slope = float(np.dot(direction, state.grad))
    while step >= STEP_FLOOR:
        new = _trial(state, basis, X, step)
        if np.isfinite(new.excess) and new.excess < state.excess - ARMIJO_C * step * slope:
            return new
        step *= 0.5
    return replace(state, stalled=True)


def polish_step(state: FlowState, basis: LieAlgebraBasis) -> FlowState | None:
    """Secant step on the directional derivative of f.

    Used once Armijo stalls: comparing values of f cannot resolve decreases
    below rounding, which stops plain descent near ``rel_grad ~ sqrt(eps)``.
    The derivative along ``exp(tX)`` is computed to full precision, and f is
    convex along such curves, so one secant step on it moves to the line
    minimum.  A few shorter steps are tried as well, since near-flat
    directions can leave the full gradient larger at the line minimum.
    Returns the candidate with the smallest gradient among those where f
    does not rise beyond rounding, or None if none improves on ``state``.
    """
    if not basis.p_basis or state.grad_norm == 0.0:
        return None
    d, X = _direction(state, basis)
    slope0 = -float(np.dot(state.grad, d))
    t1 = state.last_step if state.last_step > 0 else 0.5
    for _ in range(30):
        probe = _trial(state, basis, X, t1)
        if np.isfinite(probe.f):
            break
        t1 *= 0.5
    else:
        return None
    slope1 = -float(np.dot(probe.grad, d))
    candidates = [probe]
    if slope1 > slope0:
        t = t1 * slope0 / (slope0 - slope1)
        candidates += [_trial(state, basis, X, t * 2.0 ** -k) for k in range(4)]
    candidates += [_trial(state, basis, X, t1 * 2.0 ** -k) for k in range(1, 4)]
    ok = [c for c in candidates
          if np.isfinite(c.f) and c.f <= state.f * (1.0 + ROUNDING)]
    if not ok:
        return None
    best = min(ok, key=lambda c: c.grad_norm)
    return best if best.grad_norm < state.grad_norm else None


# --------------------------------------------------------------------------
# Full runs
# --------------------------------------------------------------------------

@dataclass
class FlowConfig:
    grad_tol: float = 1e-9
    comm_tol: float = 1e-9
    collapse_ratio: float = 1e-6
    max_iter: int = 10_000
    seeds: int = 8
    seed_value: int = 0
    reorth_every: int = 25
    threads: int | None = None
    record_log: bool = True


@dataclass
class SeedRun:
    seed_index: int
    start_boost: list
    status: str
    state: FlowState
    f_initial: float
    f_history: list
    step_log: list
    trace_drift: float
    monotone: bool


@dataclass
class FlowVerdict:
    status: str
    op_min: CurvatureOperator | None
    theta_witness: CartanInvolution | None
    f_initial: float
    f_final: float
    grad_norm_final: float
    rel_grad_final: float
    commutator_final: float
    rel_commutator_final: float
    trace_drift: float
    iterations: int
    best_seed: int
    runs: list = field(default_factory=list)

    @property
    def step_log(self) -> list:
        return self.runs[self.best_seed].step_log if self.runs else []

    @property
    def monotone(self) -> bool:
        return all(r.monotone for r in self.runs)

    def summary(self) -> dict:
        return {
            "status": self.status,
            "f_initial": self.f_initial,
            "f_final": self.f_final,
            "grad_norm_final": self.grad_norm_final,
            "rel_grad_final": self.rel_grad_final,
            "commutator_final": self.commutator_final,
            "rel_commutator_final": self.rel_commutator_final,
            "trace_drift": self.trace_drift,
            "iterations": self.iterations,
            "best_seed": self.best_seed,
            "seed_statuses": [r.status for r in self.runs],
            "seed_f_final": [r.state.f for r in self.runs],
        }


# Statuses: a critical point whose magnetic part does not vanish is a
# closed-orbit minimum that is not electric.
MINIMAL = "minimal-found"
MINIMAL_NONCOMMUTING = "minimal-noncommuting"
COLLAPSE = "norm-collapse"
EXHAUSTED = "budget-exhausted"
_STATUS_RANK = {MINIMAL: 0, MINIMAL_NONCOMMUTING: 1, COLLAPSE: 2, EXHAUSTED: 3}


def _initial_step(rel_grad):
    return 0.5 / (1.0 + rel_grad)


def trace_drift(op_a: np.ndarray, op_b: np.ndarray, k_max: int) -> float:
    """Max over k of |tr(A^k) - tr(B^k)| / ||B||_F^k."""
    scale = float(np.linalg.norm(op_b))
    if scale == 0.0:
        return float(np.max(np.abs(orbit_traces(op_a, k_max)), initial=0.0))
    ta = orbit_traces(op_a / scale, k_max)
    tb = orbit_traces(op_b / scale, k_max)
    return float(np.max(np.abs(ta - tb), initial=0.0))


def _resync(state: FlowState, basis: LieAlgebraBasis) -> FlowState:
    """Re-orthogonalize ``g_acc`` and recompute ``op_cur = g_acc . op0`` from scratch."""
    sig = state.op0.signature
    g = reorthogonalize(state.g_acc, sig)
    M = _symmetrize_operator(act(g, state.op0, check=False).matrix, state.op0.G)
    return make_state(state.op0, g, CurvatureOperator(sig, M), basis, state.iter,
                      state.trace0, state.last_step)


def _run_single(op: CurvatureOperator, basis: LieAlgebraBasis, cfg: FlowConfig,
                seed_index: int, b0: np.ndarray, f_ref: float) -> SeedRun:
    sig = op.signature
    g0 = boost_matrix(sig, b0) if b0.size else np.eye(sig.n)
    start = CurvatureOperator(sig, _symmetrize_operator(act(g0, op, check=False).matrix, op.G)) \
        if seed_index else op
    state = make_state(op, g0, start, basis)
    f_initial = state.f
    history = [state.f]
    steps = [(0, state.f, state.grad_norm, 0.0)] if cfg.record_log else []
    prev = None
    monotone = True
    resyncs_left = 3

    def verdict_at(s):
        if s.f == 0.0 or (s.rel_grad <= cfg.grad_tol and s.rel_commutator <= cfg.comm_tol):
            return MINIMAL
        if f_ref > 0 and s.f <= cfg.collapse_ratio * f_ref and s.rel_grad > cfg.grad_tol:
            return COLLAPSE
        # a vanishing moment map with a surviving magnetic part is a genuine
        # non-electric minimum; go well below grad_tol before calling it
        if s.rel_grad <= cfg.grad_tol * 1e-4:
            return MINIMAL if s.rel_commutator <= cfg.comm_tol else MINIMAL_NONCOMMUTING
        return None

    polishes = 0
    while True:
        status = verdict_at(state)
        if status is None and state.stalled and polishes < POLISH_MAX:
            new = polish_step(state, basis)
            if new is not None:
                polishes += 1
                monotone = monotone and new.f <= state.f * (1.0 + ROUNDING)
                prev, state = None, new
                history.append(state.f)
                if cfg.record_log:
                    steps.append((state.iter, state.f, state.grad_norm, state.last_step))
                continue
        if status is None and state.stalled:
            if state.rel_commutator <= cfg.comm_tol:
                status = MINIMAL
            elif state.rel_grad <= cfg.grad_tol:
                status = MINIMAL_NONCOMMUTING
            else:
                status = EXHAUSTED
        if status is None and state.iter >= cfg.max_iter:
            status = EXHAUSTED
        if status is not None:
            if status in (MINIMAL, MINIMAL_NONCOMMUTING) and state.iter > 0:
                # certify on an operator recomputed from op0, not the running product
                synced = _resync(state, basis)
                if verdict_at(synced) != status and resyncs_left and state.iter < cfg.max_iter:
                    resyncs_left -= 1
                    state, prev = synced, None
                    continue
                state = synced
            break
        step0 = _initial_step(state.rel_grad)
        if prev is not None:
            # Barzilai-Borwein estimate from the last accepted step
            s_vec = -state.last_step * prev.grad / prev.f
            y_vec = state.grad / state.f - prev.grad / prev.f
            sy = float(np.dot(s_vec, y_vec))
            if sy > 0:
                bb = float(np.dot(s_vec, s_vec)) / sy
                step0 = float(np.clip(bb, 1e-3 * step0, 1e6 * step0))
        # never propose more than MAX_RAPIDITY of boost in one step
        step0 = min(step0, MAX_RAPIDITY / state.rel_grad)
        new = flow_step(state, basis, step0)
        if new.stalled:
            state = new
            continue
        monotone = monotone and new.f <= state.f
        prev, state = state, new
        history.append(state.f)
        if cfg.record_log:
            steps.append((state.iter, state.f, state.grad_norm, state.last_step))
        if state.iter % cfg.reorth_every == 0:
            state, prev = _resync(state, basis), None
    drift = trace_drift(state.op_cur.matrix, op.matrix, min(sig.N, 8))
    return SeedRun(seed_index, [float(x) for x in b0], status, state, f_initial,
                   history, steps, drift, monotone)


def _threads(cfg: FlowConfig) -> int:
    if cfg.threads is not None:
        return max(1, int(cfg.threads))
    env = os.environ.get("CURVORBIT_THREADS")
    return max(1, int(env)) if env else 1


def seed_boosts(sig, cfg: FlowConfig) -> list:
    """Start boosts: the identity, then ``seeds - 1`` draws from N(0, 1)."""
    sig = as_signature(sig)
    rng = np.random.default_rng(cfg.seed_value)
    out = [np.zeros(sig.p * sig.q)]
    for _ in range(max(cfg.seeds, 1) - 1):
        out.append(rng.normal(size=sig.p * sig.q))
    return out


def run_flow(op: CurvatureOperator, cfg: FlowConfig | None = None) -> FlowVerdict:
    """Multi-start descent to a minimal vector of the orbit of ``op``.

    The unboosted start runs first; when it already certifies a minimum with
    vanishing magnetic part (the global minimum, by the trace identity), the
    remaining seeds are skipped.  Otherwise every seed runs and the run with
    smallest final norm decides, ties going to the lower seed index.
    """
    cfg = cfg or FlowConfig()
    sig = op.signature
    basis = lie_algebra_basis(sig)
    f_ref = norm_functional(op)
    boosts = seed_boosts(sig, cfg) if basis.p_basis else [np.zeros(0)]
    first = _run_single(op, basis, cfg, 0, boosts[0], f_ref)
    runs = [first]
    if first.status != MINIMAL and len(boosts) > 1:
        rest = list(enumerate(boosts))[1:]
        nthreads = _threads(cfg)
        if nthreads > 1:
            with ThreadPoolExecutor(max_workers=nthreads) as pool:
                runs += list(pool.map(
                    lambda ib: _run_single(op, basis, cfg, ib[0], ib[1], f_ref), rest))
        else:
            runs += [_run_single(op, basis, cfg, i, b, f_ref) for i, b in rest]

    # runs within rounding of the lowest f are equivalent; among them a
    # certified status beats a stalled one, then the lower seed index wins
    f_min = min(r.state.f for r in runs)
    band = [r for r in runs if r.state.f <= f_min + 1e-10 * abs(f_min)]
    best = min(band, key=lambda r: (_STATUS_RANK[r.status], r.seed_index))
    status = best.status
    if status == MINIMAL and not best.state.f <= 10.0 * min(r.state.f for r in runs):
        status = EXHAUSTED
    state = best.state
    theta0 = canonical_theta(sig)
    g_inv = isometry_inverse(state.g_acc, sig)
    witness = CartanInvolution(sig, g_inv @ theta0.theta @ state.g_acc)
    log.debug("flow %s: status=%s f=%.3e iters=%d", sig, status, state.f, state.iter)
    return FlowVerdict(
        status=status,
        op_min=state.op_cur if status in (MINIMAL, MINIMAL_NONCOMMUTING) else None,
        theta_witness=witness if status == MINIMAL else None,
        f_initial=f_ref,
        f_final=state.f,
        grad_norm_final=state.grad_norm,
        rel_grad_final=state.rel_grad,
        commutator_final=state.commutator,
        rel_commutator_final=state.rel_commutator,
        trace_drift=max(r.trace_drift for r in runs),
        iterations=state.iter,
        best_seed=runs.index(best),
        runs=runs,
    )


def is_minimal(op: CurvatureOperator, grad_tol: float = 1e-9):
    """First-order minimality test at the identity.

    Returns ``(minimal, residuals)`` with the relative moment-map norm and
    the commutator with ``Theta0``.
    """
    basis = lie_algebra_basis(op.signature)
    state = make_state(op, np.eye(op.signature.n), op, basis)
    res = {"grad_norm": state.grad_norm, "rel_grad": state.rel_grad,
           "commutator": state.commutator, "rel_commutator": state.rel_commutator}
    return state.rel_grad <= grad_tol, res
