"""Electric/magnetic verdicts and the Riemannian Wick-rotation necessary condition.

Electricity of the Riemann (RPE) and Weyl (PE) tensors is decided by two
independent routes that must agree:

* flow route: descend to a minimal vector of the O(p,q) orbit and read off
  whether its magnetic part vanishes;
* direct route: minimise the relative magnetic defect over the boost
  parameters of the Cartan involution.

Verdicts are three-valued.  "yes" needs a relative defect below ``pe_tol``;
"no" needs it above ``1e3 * pe_tol`` at every local minimum found.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment, minimize

from .cartan import (PE_TOL, CartanInvolution, boost_matrix, canonical_theta,
                     pe_defect, theta_from_boost, theta_norm)
from .flow import (COLLAPSE, MINIMAL, MINIMAL_NONCOMMUTING,
                   FlowConfig, FlowVerdict, orbit_traces, run_flow)
from .tensors import (CurvatureInputError, CurvatureOperator, RiemannTensor,
                      Signature, bivector_basis, riemann_to_operator, validate_riemann, weyl,
                      wedge2)

log = logging.getLogger(__name__)

YES, NO, INCONCLUSIVE = "yes", "no", "inconclusive"
OBSTRUCTED, PASSED, TRIVIAL = "obstructed", "necessary-condition-passed", "trivial"
NO_MARGIN = 1e3
ZERO_REL = 1e-12
# beyond this rapidity Lambda^2 of the boost loses all precision in doubles
DIRECT_MAX_RAPIDITY = 10.0

LORENTZIAN_NOTE = ("purely electric Lorentzian Weyl tensor: algebraic type "
                   "restricted to G, I_i, D or O")


@dataclass
class ClassifyConfig:
    pe_tol: float = PE_TOL
    flow: FlowConfig = field(default_factory=FlowConfig)
    direct_seeds: int = 4
    direct_budget: int = 2000
    seed_value: int = 0
    weyl_only: bool = False


@dataclass
class Verdict:
    """One yes/no/inconclusive decision with its evidence."""

    value: str
    witness: CartanInvolution | None = None
    defect: float | None = None
    evidence: str = ""
    routes: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {"value": self.value, "defect": self.defect, "evidence": self.evidence,
               "routes": self.routes}
        if self.witness is not None:
            out["witness_theta"] = self.witness.theta.tolist()
        return out


@dataclass
class Classification:
    signature: Signature
    rpe: Verdict
    pe: Verdict | None
    rpm: Verdict
    pm: Verdict | None
    wick_to_riemannian: str
    wick_reason: str
    notes: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    def summary(self) -> dict:
        out = {"rpe": self.rpe.value, "rpm": self.rpm.value, "wick": self.wick_to_riemannian}
        if self.pe is not None:
            out["pe"] = self.pe.value
        if self.pm is not None:
            out["pm"] = self.pm.value
        return out

    @property
    def inconclusive(self) -> bool:
        vals = [self.rpe.value] + ([self.pe.value] if self.pe else [])
        return INCONCLUSIVE in vals or self.wick_to_riemannian == INCONCLUSIVE


# --------------------------------------------------------------------------
# Direct route
# --------------------------------------------------------------------------

def _adapted(M: np.ndarray, sig: Signature, b: np.ndarray) -> np.ndarray:
    """Operator seen in the frame adapted to ``theta_b``."""
    L = wedge2(boost_matrix(sig, b), sig)
    G = bivector_basis(sig).G
    # the boost is an isometry, so Lambda^2 of its inverse is G L G
    return (G[:, None] * L * G[None, :]) @ M @ L


def relative_boost_defect(M: np.ndarray, sig: Signature, b, part: str = "minus") -> float:
    """``|R_minus|_theta / |R|_theta`` (or the plus part) for ``theta_b``."""
    Mp = _adapted(M, sig, np.asarray(b, dtype=float))
    full = np.linalg.norm(Mp)
    if full == 0.0:
        return 0.0
    sign = -1.0 if part == "minus" else 1.0
    return float(np.linalg.norm(0.5 * (Mp + sign * Mp.T)) / full)


def direct_search(op: CurvatureOperator, cfg: ClassifyConfig, part: str = "minus") -> dict:
    """Multi-start minimisation of the relative defect over boost parameters.

    Powell (coordinate directions) first, Nelder-Mead from Powell's end point
    if the tolerance was not reached.  Stops early once a start certifies
    "yes".
    """
    sig = op.signature
    M = op.matrix
    dim = sig.p * sig.q
    rng = np.random.default_rng(cfg.seed_value + 7919)
    starts = [np.zeros(dim)] + [rng.normal(size=dim) for _ in range(max(cfg.direct_seeds, 1) - 1)]

    def clip(b):
        r = np.linalg.norm(b)
        return b if r <= DIRECT_MAX_RAPIDITY else b * (DIRECT_MAX_RAPIDITY / r)

    def obj(b):
        return relative_boost_defect(M, sig, clip(b), part) ** 2

    results = []
    for i, b0 in enumerate(starts):
        best_b, best = b0, obj(b0)
        if best > 0.0:
            used = 0
            res = minimize(obj, b0, method="Powell",
                           options={"xtol": 1e-12, "ftol": 1e-30, "maxfev": cfg.direct_budget})
            used += res.nfev
            best_b, best = res.x, float(res.fun)
            # fall back to Nelder-Mead only when Powell left the verdict open
            unresolved = not res.success or np.sqrt(best) <= NO_MARGIN * cfg.pe_tol
            if np.sqrt(best) > cfg.pe_tol and unresolved and used < cfg.direct_budget:
                res = minimize(obj, best_b, method="Nelder-Mead",
                               options={"xatol": 1e-13, "fatol": 1e-30,
                                        "maxfev": cfg.direct_budget - used})
                if res.fun < best:
                    best_b, best = res.x, float(res.fun)
            best_b = clip(best_b)
        results.append({"start": i, "b": [float(x) for x in best_b],
                        "defect": float(np.sqrt(max(best, 0.0)))})
        if np.sqrt(best) <= cfg.pe_tol:
            break
    best = min(results, key=lambda r: (r["defect"], r["start"]))
    return {"best": best, "runs": results}


def _direct_verdict(search: dict, sig: Signature, pe_tol: float) -> Verdict:
    best = search["best"]
    d = best["defect"]
    defects = [r["defect"] for r in search["runs"]]
    if d <= pe_tol:
        return Verdict(YES, theta_from_boost(sig, best["b"]), d, "direct boost search")
    if min(defects) > NO_MARGIN * pe_tol:
        return Verdict(NO, None, d, "defect bounded away from zero at every local minimum")
    return Verdict(INCONCLUSIVE, None, d, "defect in the hysteresis band")


def _flow_verdict(fv: FlowVerdict, op: CurvatureOperator, pe_tol: float) -> Verdict:
    # relative magnetic part at the minimum: |A| / |M| = commutator / (2 |M|)
    rel = fv.rel_commutator_final / 2.0
    if fv.status == MINIMAL:
        return Verdict(YES, fv.theta_witness, rel, "minimal vector commutes with theta0")
    if fv.status == COLLAPSE:
        return Verdict(NO, None, rel, "norm collapse: orbit not closed (numerical evidence)")
    if fv.status == MINIMAL_NONCOMMUTING and rel > NO_MARGIN * pe_tol:
        return Verdict(NO, None, rel, "minimal vector has a non-vanishing magnetic part")
    return Verdict(INCONCLUSIVE, None, rel, f"flow status {fv.status}")


def _combine(flow_v: Verdict, direct_v: Verdict) -> Verdict:
    routes = {"flow": flow_v.value, "direct": direct_v.value}
    if flow_v.value == direct_v.value:
        src = flow_v if flow_v.witness is not None else direct_v
        return Verdict(flow_v.value, src.witness, min(flow_v.defect, direct_v.defect),
                       f"{flow_v.evidence}; {direct_v.evidence}", routes)
    return Verdict(INCONCLUSIVE, None, min(flow_v.defect, direct_v.defect),
                   f"routes disagree: flow says {flow_v.value} ({flow_v.evidence}), "
                   f"direct says {direct_v.value} ({direct_v.evidence})", routes)


def _electric(op: CurvatureOperator, cfg: ClassifyConfig, diag: dict, label: str) -> Verdict:
    sig = op.signature
    if sig.riemannian:
        return Verdict(YES, canonical_theta(sig), 0.0, "definite signature: theta = +-Id")
    if not np.any(op.matrix):
        return Verdict(YES, canonical_theta(sig), 0.0, "zero tensor")
    fv = run_flow(op, cfg.flow)
    search = direct_search(op, cfg, "minus")
    diag[f"{label}_flow"] = fv.summary()
    diag[f"{label}_direct_minus"] = search
    diag.setdefault("_flows", {})[label] = fv
    return _combine(_flow_verdict(fv, op, cfg.pe_tol), _direct_verdict(search, sig, cfg.pe_tol))


def _magnetic(op: CurvatureOperator, cfg: ClassifyConfig, diag: dict, label: str) -> Verdict:
    sig = op.signature
    if not np.any(op.matrix):
        return Verdict(YES, canonical_theta(sig), 0.0, "zero tensor")
    if sig.riemannian:
        return Verdict(NO, None, 1.0, "definite signature: everything is electric")
    search = direct_search(op, cfg, "plus")
    diag[f"{label}_direct_plus"] = search
    v = _direct_verdict(search, sig, cfg.pe_tol)
    v.routes = {"direct": v.value}
    return v


def classify(t: RiemannTensor, cfg: ClassifyConfig | None = None) -> Classification:
    """Electric/magnetic verdicts for a point curvature tensor."""
    cfg = cfg or ClassifyConfig()
    report = validate_riemann(t, sym_tol=1e-10 * max(1.0, float(np.max(np.abs(t.components)))))
    if not report.ok:
        raise CurvatureInputError(
            f"invalid Riemann tensor: {report.kind} violation {report.magnitude:.3e} at {report.worst}")
    sig = t.signature
    diag: dict = {}
    op = riemann_to_operator(t)
    norm_R = float(np.linalg.norm(op.matrix))

    pe = pm = None
    if sig.n >= 3:
        C = weyl(t)
        op_c = riemann_to_operator(C)
        if float(np.linalg.norm(op_c.matrix)) <= ZERO_REL * norm_R:
            op_c = op_c.scaled(0.0)
            diag["weyl_zero"] = True
        pe = _electric(op_c, cfg, diag, "weyl")
        pm = _magnetic(op_c, cfg, diag, "weyl")

    if cfg.weyl_only and pe is not None:
        rpe = Verdict(INCONCLUSIVE, None, None, "not computed (weyl only)")
        rpm = Verdict(INCONCLUSIVE, None, None, "not computed (weyl only)")
    else:
        rpe = _electric(op, cfg, diag, "riemann")
        rpm = _magnetic(op, cfg, diag, "riemann")

    # RPE implies PE with the same involution
    if rpe.value == YES and pe is not None and pe.value != YES:
        C = weyl(t)
        rel = pe_defect(C, rpe.witness) / max(theta_norm(C, rpe.witness), 1e-300)
        if rel <= cfg.pe_tol or not np.any(C.components):
            pe = Verdict(YES, rpe.witness, rel, "Riemann witness also makes Weyl electric",
                         pe.routes)
        else:
            rpe = Verdict(INCONCLUSIVE, None, rpe.defect,
                          "Riemann witness does not make Weyl electric", rpe.routes)

    if sig.riemannian:
        wick, reason = TRIVIAL, "already definite signature"
    elif rpe.value == YES:
        wick, reason = PASSED, "Riemann tensor purely electric (necessary condition only)"
    elif rpe.value == NO:
        wick, reason = OBSTRUCTED, rpe.evidence
    elif cfg.weyl_only and pe is not None and pe.value == NO:
        wick, reason = OBSTRUCTED, "Weyl tensor not purely electric"
    else:
        wick, reason = INCONCLUSIVE, rpe.evidence

    cls = Classification(sig, rpe, pe, rpm, pm, wick, reason, diagnostics=diag)
    note = lorentzian_type_note(cls, sig)
    if note:
        cls.notes.append(note)
    return cls


def lorentzian_type_note(cls: Classification, sig: Signature) -> str | None:
    if sig.p != 1 or sig.q < 2:
        return None
    if cls.pe is not None and cls.pe.value == YES:
        return LORENTZIAN_NOTE
    return None


# --------------------------------------------------------------------------
# Invariants and pair checks
# --------------------------------------------------------------------------

def orbit_invariants(op: CurvatureOperator, k_max: int | None = None) -> np.ndarray:
    """``(tr M, tr M^2, ..., tr M^k_max)``."""
    N = op.signature.N
    k_max = N if k_max is None else k_max
    if k_max > N:
        raise ValueError(f"k_max {k_max} exceeds bivector dimension {N}")
    return orbit_traces(op.matrix, k_max)


def _nilpotent_degenerate(M: np.ndarray, traces: np.ndarray, tol: float) -> bool:
    scale = np.linalg.norm(M)
    if scale == 0.0:
        return False
    k = np.arange(1, len(traces) + 1)
    return bool(np.all(np.abs(traces) <= tol * scale ** k))


@dataclass
class PairCheck:
    status: str
    witness: str | None
    invariants_a: list
    invariants_b: list
    eigenvalues_a: list
    eigenvalues_b: list
    ricci_scalars: tuple

    def to_dict(self):
        return {
            "status": self.status, "witness": self.witness,
            "invariants_a": self.invariants_a, "invariants_b": self.invariants_b,
            "eigenvalues_a": self.eigenvalues_a, "eigenvalues_b": self.eigenvalues_b,
            "ricci_scalars": list(self.ricci_scalars),
        }


def _eig_list(ev):
    ev = sorted(ev, key=lambda z: (round(z.real, 12), round(z.imag, 12)))
    return [[float(z.real), float(z.imag)] for z in ev]


def wick_pair_check(t1: RiemannTensor, t2: RiemannTensor, inv_tol: float = 1e-6) -> PairCheck:
    """Necessary test that two curvature tensors lie in one complex orbit.

    Compares trace invariants ``tr M^k`` (k = 1..N) and eigenvalue
    multisets, relative to ``max(|M1|, |M2|)^k``.
    """
    from .tensors import ricci_scalar
    if t1.n != t2.n:
        raise CurvatureInputError(f"dimension mismatch: {t1.n} vs {t2.n}")
    M1, M2 = riemann_to_operator(t1).matrix, riemann_to_operator(t2).matrix
    N = t1.signature.N
    tr1, tr2 = orbit_traces(M1, N), orbit_traces(M2, N)
    ev1, ev2 = np.linalg.eigvals(M1), np.linalg.eigvals(M2)
    scale = max(np.linalg.norm(M1), np.linalg.norm(M2))
    scalars = (ricci_scalar(t1), ricci_scalar(t2))
    common = dict(invariants_a=tr1.tolist(), invariants_b=tr2.tolist(),
                  eigenvalues_a=_eig_list(ev1), eigenvalues_b=_eig_list(ev2),
                  ricci_scalars=scalars)
    if scale == 0.0:
        return PairCheck("consistent", None, **common)
    for k in range(N):
        if abs(tr1[k] - tr2[k]) > inv_tol * scale ** (k + 1):
            return PairCheck("inconsistent", f"tr M^{k + 1}", **common)
    cost = np.abs(ev1[:, None] - ev2[None, :])
    rows, cols = linear_sum_assignment(cost)
    if np.max(cost[rows, cols]) > np.sqrt(inv_tol) * scale:
        return PairCheck("inconsistent", "eigenvalue multiset", **common)
    if _nilpotent_degenerate(M1, tr1, inv_tol) or _nilpotent_degenerate(M2, tr2, inv_tol):
        return PairCheck("inconclusive", "nilpotent operator: invariants are silent", **common)
    return PairCheck("consistent", None, **common)
