"""Reference curvature data and a finite-difference curvature oracle.

Closed-form entries are point data in an orthonormal frame.  The oracle
works from a coordinate metric ``g_fn(x)`` and shares no code path with
the closed forms beyond the final frame projection.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .cartan import act_on_lower_indices
from .tensors import (CurvatureInputError, RiemannTensor, Signature,
                      constant_curvature_components, symmetrize,
                      validate_riemann)


class CatalogError(KeyError):
    pass


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    signature: Signature
    riemann: RiemannTensor
    expected: dict
    provenance: str
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class CoordinateMetric:
    n: int
    g_fn: Callable[[np.ndarray], np.ndarray]
    point: np.ndarray
    frame_hint: np.ndarray | None = None
    anti_isometry: bool = False
    name: str = ""

    def metric_at(self, x=None) -> np.ndarray:
        x = self.point if x is None else x
        g = np.asarray(self.g_fn(np.asarray(x, dtype=float)), dtype=float)
        return -g if self.anti_isometry else g


def apply_anti_isometry(m: CoordinateMetric) -> CoordinateMetric:
    """The same coordinate metric with ``g -> -g``."""
    return CoordinateMetric(m.n, m.g_fn, m.point, m.frame_hint,
                            not m.anti_isometry, m.name)


# --------------------------------------------------------------------------
# Finite-difference oracle
# --------------------------------------------------------------------------

def _metric_derivatives(m: CoordinateMetric, h: float):
    n = m.n
    x0 = np.asarray(m.point, dtype=float)
    I = np.eye(n)

    def g(x):
        return m.metric_at(x)

    g0 = g(x0)
    dg = np.zeros((n, n, n))        # dg[c, a, b] = d_c g_ab
    ddg = np.zeros((n, n, n, n))    # ddg[c, d, a, b] = d_c d_d g_ab
    plus = [g(x0 + h * I[c]) for c in range(n)]
    minus = [g(x0 - h * I[c]) for c in range(n)]
    for c in range(n):
        dg[c] = (plus[c] - minus[c]) / (2 * h)
        ddg[c, c] = (plus[c] - 2 * g0 + minus[c]) / h ** 2
        for d in range(c + 1, n):
            mixed = (g(x0 + h * (I[c] + I[d])) - g(x0 + h * (I[c] - I[d]))
                     - g(x0 - h * (I[c] - I[d])) + g(x0 - h * (I[c] + I[d]))) / (4 * h * h)
            ddg[c, d] = ddg[d, c] = mixed
    return g0, dg, ddg


def _coordinate_riemann(g0, dg, ddg):
    """All-lower ``R_abcd`` from the metric and its first two derivatives."""
    ginv = np.linalg.inv(g0)
    # first-kind symbols [bc, d] = (d_b g_dc + d_c g_db - d_d g_bc) / 2
    first = 0.5 * (np.einsum("bdc->bcd", dg) + np.einsum("cdb->bcd", dg)
                   - np.einsum("dbc->bcd", dg))
    Gamma = np.einsum("ad,bcd->abc", ginv, first)        # Gamma^a_bc
    dfirst = 0.5 * (np.einsum("ebdc->ebcd", ddg) + np.einsum("ecdb->ebcd", ddg)
                    - np.einsum("edbc->ebcd", ddg))
    dginv = -np.einsum("am,emn,nd->ead", ginv, dg, ginv)
    dGamma = (np.einsum("ead,bcd->eabc", dginv, first)
              + np.einsum("ad,ebcd->eabc", ginv, dfirst))  # d_e Gamma^a_bc
    # R^a_bcd = d_c Gamma^a_db - d_d Gamma^a_cb + Gamma^a_ce Gamma^e_db - Gamma^a_de Gamma^e_cb
    Rup = (np.einsum("cadb->abcd", dGamma) - np.einsum("dacb->abcd", dGamma)
           + np.einsum("ace,edb->abcd", Gamma, Gamma)
           - np.einsum("ade,ecb->abcd", Gamma, Gamma))
    return np.einsum("ae,ebcd->abcd", g0, Rup)


def orthonormal_frame(g0: np.ndarray, frame_hint=None):
    """Frame vectors as columns, negative-norm directions first.

    A diagonal metric keeps the coordinate order within each sign block, so
    raw components stay comparable with closed forms.
    """
    n = len(g0)
    if frame_hint is not None:
        E = np.asarray(frame_hint, dtype=float)
        gram = E.T @ g0 @ E
        if np.max(np.abs(gram - np.diag(np.sign(np.diag(gram))))) > 1e-8:
            raise CurvatureInputError("frame_hint is not orthonormal")
        return E, int(np.sum(np.diag(gram) < 0))
    off = g0 - np.diag(np.diag(g0))
    if np.max(np.abs(off), initial=0.0) <= 1e-14 * np.max(np.abs(g0)):
        w, V = np.diag(g0).copy(), np.eye(n)
        order = sorted(range(n), key=lambda i: (w[i] > 0, i))
    else:
        w, V = np.linalg.eigh(0.5 * (g0 + g0.T))
        order = list(range(n))          # eigh sorts ascending: negatives first
    E = V[:, order] / np.sqrt(np.abs(w[order]))[None, :]
    return E, int(np.sum(w < 0))


def curvature_oracle(m: CoordinateMetric, h: float = 1e-4,
                     richardson: bool = True) -> RiemannTensor:
    """Orthonormal-frame Riemann tensor from central differences of ``g_fn``."""
    if not (1e-6 <= h <= 1e-2):
        raise ValueError(f"step {h} outside [1e-6, 1e-2]")
    g0, dg, ddg = _metric_derivatives(m, h)
    if abs(np.linalg.det(g0)) <= 1e-12:
        raise CurvatureInputError("metric is degenerate at the point")
    if richardson:
        _, dg2, ddg2 = _metric_derivatives(m, h / 2)
        dg = (4 * dg2 - dg) / 3
        ddg = (4 * ddg2 - ddg) / 3
    R = _coordinate_riemann(g0, dg, ddg)
    E, p = orthonormal_frame(g0, m.frame_hint)
    Rf = act_on_lower_indices(R, E)
    t = RiemannTensor(Signature(p, m.n - p), Rf)
    tol = 1e-6 * max(1.0, float(np.max(np.abs(Rf))))
    report = validate_riemann(t, sym_tol=tol)
    if not report.ok:
        raise CurvatureInputError(
            f"step too coarse: symmetry residual {report.magnitude:.3e} at {report.worst}")
    return RiemannTensor(t.signature, symmetrize(Rf))


# --------------------------------------------------------------------------
# Coordinate metrics
# --------------------------------------------------------------------------

def holomorphic_example_slice(n: int, slice: str = "sphere", point=None) -> CoordinateMetric:
    """Real slices of ``(1 + sum z^2)^-2 sum dz^2``.

    ``sphere`` takes ``z = x``; ``hyperbolic`` takes ``z = i y``, which gives
    the negative-definite ``-(1 - sum y^2)^-2 sum dy^2``.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    point = np.zeros(n) if point is None else np.asarray(point, dtype=float)
    if slice == "sphere":
        def g_fn(x):
            return np.eye(n) / (1.0 + np.dot(x, x)) ** 2
    elif slice == "hyperbolic":
        def g_fn(y):
            r2 = np.dot(y, y)
            if r2 >= 1.0:
                raise ValueError("hyperbolic slice is only defined for sum y^2 < 1")
            return -np.eye(n) / (1.0 - r2) ** 2
        g_fn(point)
    else:
        raise ValueError(f"unknown slice {slice!r}")
    return CoordinateMetric(n, g_fn, point, name=f"{slice}_slice")


def flat_metric(p: int, q: int) -> CoordinateMetric:
    eta = np.diag([-1.0] * p + [1.0] * q)
    return CoordinateMetric(p + q, lambda x: eta.copy(), np.full(p + q, 0.3), name="flat")


def schwarzschild_metric(r_s: float, r: float, theta: float = np.pi / 2) -> CoordinateMetric:
    """Schwarzschild in (t, r, theta, phi) at a static point."""
    def g_fn(x):
        _, rr, th, _ = x
        f = 1.0 - r_s / rr
        return np.diag([-f, 1.0 / f, rr ** 2, (rr * np.sin(th)) ** 2])
    return CoordinateMetric(4, g_fn, np.array([0.0, r, theta, 0.0]), name="schwarzschild")


def pp_wave_metric(amplitudes=(1.0, 0.0)) -> CoordinateMetric:
    """Exact plane wave ``-2 du dv + H(u,x,y) du^2 + dx^2 + dy^2`` with constant profile.

    ``H = a (x^2 - y^2) + 2 b x y`` is harmonic, so the metric is vacuum.
    """
    a, b = amplitudes

    def g_fn(X):
        u, v, x, y = X
        H = a * (x * x - y * y) + 2 * b * x * y
        return np.array([[H, -1.0, 0, 0], [-1.0, 0, 0, 0], [0, 0, 1.0, 0], [0, 0, 0, 1.0]])
    return CoordinateMetric(4, g_fn, np.array([0.0, 0.0, 0.2, -0.1]), name="pp_wave")


# --------------------------------------------------------------------------
# Closed-form entries
# --------------------------------------------------------------------------

def constant_curvature(p: int, q: int, k: float) -> RiemannTensor:
    sig = Signature(p, q)
    return RiemannTensor(sig, constant_curvature_components(sig, k))


def schwarzschild_point(r_s: float = 1.0, r: float = 3.0) -> RiemannTensor:
    """Static orthonormal frame (t, r, theta, phi); vacuum, so Riemann = Weyl."""
    if not r > r_s > 0:
        raise ValueError("need r > r_s > 0")
    c = r_s / r ** 3
    entries = [((0, 1, 0, 1), -c), ((0, 2, 0, 2), c / 2), ((0, 3, 0, 3), c / 2),
               ((1, 2, 1, 2), -c / 2), ((1, 3, 1, 3), -c / 2), ((2, 3, 2, 3), c)]
    return RiemannTensor.from_entries((1, 3), entries)


def pp_wave(amplitudes=(1.0, 0.0), n: int = 4) -> RiemannTensor:
    """Vacuum plane wave in signature (1, n-1).

    ``amplitudes`` is either ``(a, b)`` for n = 4, giving the transverse
    matrix [[a, b], [b, -a]], or a symmetric traceless (n-2)x(n-2) matrix.
    The curvature is ``sum_ij A_ij (l^e_i) (x) (l^e_j)`` with ``l`` null.
    """
    A = np.asarray(amplitudes, dtype=float)
    if A.ndim == 1:
        if n != 4 or A.size != 2:
            raise ValueError("(a, b) amplitudes are only defined for n = 4")
        A = np.array([[A[0], A[1]], [A[1], -A[0]]])
    m = A.shape[0]
    n = m + 2
    if A.shape != (m, m) or np.max(np.abs(A - A.T)) > 1e-14 or abs(np.trace(A)) > 1e-12:
        raise ValueError("transverse amplitude must be symmetric and traceless")
    ell = np.zeros(n)
    ell[0], ell[1] = -1 / np.sqrt(2), 1 / np.sqrt(2)    # l = (e0 + e1)/sqrt2, index lowered
    F = []
    for i in range(m):
        e = np.zeros(n)
        e[2 + i] = 1.0
        F.append(np.outer(ell, e) - np.outer(e, ell))
    R = sum(A[i, j] * np.einsum("ab,cd->abcd", F[i], F[j]) for i in range(m) for j in range(m))
    return RiemannTensor(Signature(1, n - 1), R)


def hand_built_pm(H=None) -> RiemannTensor:
    """Purely magnetic vacuum Weyl tensor in (1,3).

    ``R_{0i jk} = sum_l H_il eps_ljk`` for a symmetric traceless ``H``; all
    components carry exactly one timelike index.
    """
    if H is None:
        H = np.array([[1.0, 0.5, 0.0], [0.5, -0.3, 0.2], [0.0, 0.2, -0.7]])
    H = np.asarray(H, dtype=float)
    eps = np.zeros((3, 3, 3))
    for (i, j, k), s in (((0, 1, 2), 1), ((1, 2, 0), 1), ((2, 0, 1), 1),
                         ((0, 2, 1), -1), ((2, 1, 0), -1), ((1, 0, 2), -1)):
        eps[i, j, k] = s
    entries = []
    for i in range(3):
        for j in range(3):
            for k in range(j + 1, 3):
                entries.append(((0, 1 + i, 1 + j, 1 + k), float(H[i] @ eps[:, j, k])))
    return RiemannTensor.from_entries((1, 3), entries)


# expected verdict summaries, keyed by entry name
_YES_PASSED = {"rpe": "yes", "pe": "yes", "wick": "necessary-condition-passed"}
_TRIVIAL = {"rpe": "yes", "pe": "yes", "wick": "trivial"}

BUILTINS = {
    "flat": dict(params={"p": 1, "q": 3}, expected=_YES_PASSED,
                 provenance="zero curvature"),
    "constant_curvature": dict(params={"p": 1, "q": 3, "k": 1.0}, expected=_YES_PASSED,
                               provenance="R = k (g g - g g)"),
    "schwarzschild_point": dict(params={"r_s": 1.0, "r": 3.0}, expected=_YES_PASSED,
                                provenance="static orthonormal frame, vacuum type D"),
    "pp_wave": dict(params={"amplitudes": [1.0, 0.0]},
                    expected={"rpe": "no", "pe": "no", "wick": "obstructed"},
                    provenance="vacuum plane wave, type N"),
    "de_sitter": dict(params={"n": 4}, expected=_YES_PASSED,
                      provenance="constant curvature k = +1 in (1, n-1)"),
    "anti_de_sitter": dict(params={"n": 4}, expected=_YES_PASSED,
                           provenance="constant curvature k = -1 in (1, n-1)"),
    "hand_built_pm": dict(params={}, expected={"rpe": "no", "pe": "no", "rpm": "yes",
                                               "pm": "yes", "wick": "obstructed"},
                          provenance="magnetic Weyl tensor with one timelike index per component"),
    "sphere_slice": dict(params={"n": 3}, expected=_TRIVIAL,
                         provenance="z = x slice of (1+z^2)^-2 dz^2 at the origin, k = 4"),
    "hyperbolic_slice": dict(params={"n": 3}, expected=_TRIVIAL,
                             provenance="z = iy slice, negative definite, k = 4 in signature (n,0)"),
}


def _build(name, params):
    if name == "flat":
        return constant_curvature(params["p"], params["q"], 0.0)
    if name == "constant_curvature":
        return constant_curvature(params["p"], params["q"], params["k"])
    if name == "schwarzschild_point":
        return schwarzschild_point(params["r_s"], params["r"])
    if name == "pp_wave":
        return pp_wave(params["amplitudes"])
    if name == "de_sitter":
        return constant_curvature(1, params["n"] - 1, 1.0)
    if name == "anti_de_sitter":
        return constant_curvature(1, params["n"] - 1, -1.0)
    if name == "hand_built_pm":
        return hand_built_pm(params.get("H"))
    if name == "sphere_slice":
        return constant_curvature(0, params["n"], 4.0)
    if name == "hyperbolic_slice":
        return constant_curvature(params["n"], 0, 4.0)
    raise CatalogError(name)


def builtin(name: str, **params) -> CatalogEntry:
    if name not in BUILTINS:
        raise CatalogError(f"unknown catalog entry {name!r}")
    entry_def = BUILTINS[name]
    merged = {**entry_def["params"], **params}
    t = _build(name, merged)
    return CatalogEntry(name, t.signature, t, dict(entry_def["expected"]),
                        entry_def["provenance"], merged)


def names() -> list[str]:
    return list(BUILTINS)
