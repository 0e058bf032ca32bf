"""Cartan involutions of the tangent space and the electric/magnetic split.

A Cartan involution here is a g-isometry ``theta`` with ``theta @ theta = I``
and ``g @ theta`` positive definite.  The canonical one flips the timelike
frame vectors.  Every other one is reached by conjugating with a boost
``exp(X_b)``, ``X_b`` symmetric with entries only in the timelike/spacelike
off-diagonal block.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tensors import (CurvatureInputError, CurvatureOperator, RiemannTensor,
                      Signature, as_signature, bivector_basis, frame_metric,
                      wedge2)

PE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class CartanInvolution:
    signature: Signature
    theta: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "signature", as_signature(self.signature))
        th = np.array(self.theta, dtype=float)
        th.setflags(write=False)
        object.__setattr__(self, "theta", th)

    def residuals(self) -> dict:
        """Involution, isometry and positivity diagnostics."""
        th = self.theta
        g = np.diag(frame_metric(self.signature))
        n = len(th)
        gth = g @ th
        return {
            "involution": float(np.max(np.abs(th @ th - np.eye(n)))),
            "isometry": float(np.max(np.abs(th.T @ g @ th - g))),
            "symmetry": float(np.max(np.abs(gth - gth.T))),
            "min_eigenvalue": float(np.min(np.linalg.eigvalsh(0.5 * (gth + gth.T)))),
        }

    def conjugated(self, h: np.ndarray) -> "CartanInvolution":
        """``h theta h^-1``."""
        return CartanInvolution(self.signature, h @ self.theta @ np.linalg.inv(h))


def canonical_theta(sig) -> CartanInvolution:
    sig = as_signature(sig)
    return CartanInvolution(sig, np.diag(frame_metric(sig)))


def boost_generator(sig, b) -> np.ndarray:
    """The symmetric matrix ``X_b`` in the non-compact part of o(p,q).

    ``b`` is laid out row-major over (timelike index, spacelike index).
    """
    sig = as_signature(sig)
    b = np.asarray(b, dtype=float).reshape(-1)
    if b.size != sig.p * sig.q:
        raise CurvatureInputError(f"boost parameter needs {sig.p * sig.q} entries, got {b.size}")
    if not np.all(np.isfinite(b)):
        raise CurvatureInputError("boost parameter has non-finite entries")
    X = np.zeros((sig.n, sig.n))
    block = b.reshape(sig.p, sig.q)
    X[:sig.p, sig.p:] = block
    X[sig.p:, :sig.p] = block.T
    return X


def boost_matrix(sig, b) -> np.ndarray:
    """``exp(X_b)`` via the eigendecomposition of the symmetric generator."""
    X = boost_generator(sig, b)
    w, V = np.linalg.eigh(X)
    return (V * np.exp(w)) @ V.T


def theta_from_boost(sig, b) -> CartanInvolution:
    sig = as_signature(sig)
    E = boost_matrix(sig, b)
    Einv = boost_matrix(sig, -np.asarray(b, dtype=float))
    return CartanInvolution(sig, E @ np.diag(frame_metric(sig)) @ Einv)


def extend_to_bivectors(th: CartanInvolution) -> np.ndarray:
    """``Lambda^2(theta)`` in the pair basis."""
    return wedge2(th.theta, th.signature)


# --------------------------------------------------------------------------
# Electric / magnetic split
# --------------------------------------------------------------------------

def act_on_lower_indices(T: np.ndarray, m: np.ndarray) -> np.ndarray:
    """Apply ``m`` to every covariant slot: ``T'_{a..} = T_{e..} m^e_a ...``."""
    out = np.asarray(T, dtype=float)
    for axis in range(out.ndim):
        out = np.moveaxis(np.tensordot(out, m, axes=([axis], [0])), -1, axis)
    return out


def _components(t):
    return t.components if isinstance(t, RiemannTensor) else np.asarray(t, dtype=float)


def em_split_tensor(t, th: CartanInvolution):
    """Split a covariant tensor into its theta = +1 and theta = -1 parts.

    Accepts a RiemannTensor/WeylTensor (returns the same type) or a bare
    array of any rank.
    """
    T = _components(t)
    # theta is its own inverse, so pulling back covectors uses theta itself
    thT = act_on_lower_indices(T, th.theta)
    plus, minus = 0.5 * (T + thT), 0.5 * (T - thT)
    if isinstance(t, RiemannTensor):
        return type(t)(t.signature, plus), type(t)(t.signature, minus)
    return plus, minus


def adapting_boost(th: CartanInvolution) -> np.ndarray:
    """The symmetric boost ``E`` with ``th = E theta0 E^-1``, i.e. ``E = sqrt(th g)``."""
    g = frame_metric(th.signature)
    H = th.theta * g[None, :]
    w, V = np.linalg.eigh(0.5 * (H + H.T))
    return (V * np.sqrt(np.clip(w, 0.0, None))) @ V.T


def _adapted_tensor(t, th):
    return act_on_lower_indices(_components(t), adapting_boost(th))


def theta_tensor_norm(t, th: CartanInvolution) -> float:
    """Norm of a covariant tensor in the positive inner product fixed by ``th``.

    For the canonical involution this is the root sum of squared frame
    components; otherwise the tensor is first moved to a th-adapted frame.
    """
    return float(np.linalg.norm(_adapted_tensor(t, th)))


def _theta_metric(th: CartanInvolution) -> np.ndarray:
    Theta = extend_to_bivectors(th)
    return bivector_basis(th.signature).G[:, None] * Theta


def _adapted_operator(M: np.ndarray, th: CartanInvolution) -> np.ndarray:
    sig = th.signature
    g = frame_metric(sig)
    E = adapting_boost(th)
    Einv = g[:, None] * E * g[None, :]
    return wedge2(Einv, sig) @ M @ wedge2(E, sig)


def theta_operator_norm(M: np.ndarray, th: CartanInvolution) -> float:
    """``sqrt(tr(M^dagger M))`` with the adjoint taken in the theta inner product."""
    return float(np.linalg.norm(_adapted_operator(np.asarray(M, dtype=float), th)))


def em_split_operator(op: CurvatureOperator, th: CartanInvolution):
    """Self-adjoint and skew parts of ``op`` in the theta inner product.

    Returns ``(R_plus, R_minus)`` as arrays.
    """
    if op.signature != th.signature:
        raise CurvatureInputError(
            f"signature mismatch: operator {op.signature}, involution {th.signature}")
    P = _theta_metric(th)
    M = op.matrix
    adj = np.linalg.solve(P, M.T @ P)
    return 0.5 * (M + adj), 0.5 * (M - adj)


def pe_defect(obj, th: CartanInvolution, part: str = "minus") -> float:
    """Theta-norm of the magnetic (``part="minus"``) or electric part.

    Works on curvature operators and on covariant tensors.  Zero exactly
    when ``obj`` is purely electric (resp. magnetic) with respect to ``th``.
    Evaluated in a th-adapted frame, where the split is by parity and the
    norm is Euclidean; this avoids inverting the badly conditioned theta
    metric of a strongly boosted involution.
    """
    sign = -1.0 if part == "minus" else 1.0
    if isinstance(obj, CurvatureOperator):
        if obj.signature != th.signature:
            raise CurvatureInputError(
                f"signature mismatch: operator {obj.signature}, involution {th.signature}")
        Mp = _adapted_operator(obj.matrix, th)
        # the canonical theta metric on bivectors is the identity
        return float(np.linalg.norm(0.5 * (Mp + sign * Mp.T)))
    Tp = _adapted_tensor(obj, th)
    th0 = canonical_theta(th.signature)
    return float(np.linalg.norm(em_split_tensor(Tp, th0)[0 if sign > 0 else 1]))


def theta_norm(obj, th: CartanInvolution) -> float:
    if isinstance(obj, CurvatureOperator):
        return theta_operator_norm(obj.matrix, th)
    return theta_tensor_norm(obj, th)


def commutator_norm(op: CurvatureOperator, th: CartanInvolution) -> float:
    """Frobenius norm of ``[M, Theta]`` in the pair basis."""
    Theta = extend_to_bivectors(th)
    M = op.matrix
    return float(np.linalg.norm(M @ Theta - Theta @ M))
