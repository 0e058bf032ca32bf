"""Random test data: isometries of O(p,q), curvature tensors and operators."""

from __future__ import annotations

import numpy as np
from scipy.stats import ortho_group

from .cartan import act_on_lower_indices, boost_matrix
from .flow import act
from .tensors import (CurvatureOperator, RiemannTensor, as_signature,
                      bivector_basis, symmetrize)


def _orthogonal(m: int, rng) -> np.ndarray:
    if m == 0:
        return np.zeros((0, 0))
    if m == 1:
        return np.array([[rng.choice([-1.0, 1.0])]])
    return ortho_group.rvs(m, random_state=rng)


def random_isometry(sig, rng, boost_scale: float = 1.0) -> np.ndarray:
    """``k @ exp(X_b)`` with ``k`` Haar in O(p) x O(q) and ``b ~ N(0, boost_scale^2)``.

    Reflections are included, so all components of O(p,q) are reached.
    """
    sig = as_signature(sig)
    k = np.zeros((sig.n, sig.n))
    k[:sig.p, :sig.p] = _orthogonal(sig.p, rng)
    k[sig.p:, sig.p:] = _orthogonal(sig.q, rng)
    return k @ boost_matrix(sig, boost_scale * rng.normal(size=sig.p * sig.q))


def random_riemann(sig, rng, scale: float = 1.0) -> RiemannTensor:
    """A Gaussian algebraic curvature tensor."""
    sig = as_signature(sig)
    R = symmetrize(rng.normal(scale=scale, size=(sig.n,) * 4))
    return RiemannTensor(sig, R)


def transform_tensor(t: RiemannTensor, h: np.ndarray) -> RiemannTensor:
    """Components of ``t`` in the frame ``e'_a = h^b_a e_b``."""
    return type(t)(t.signature, act_on_lower_indices(t.components, h))


def random_electric_operator(sig, rng) -> CurvatureOperator:
    """A G-symmetric operator commuting with the canonical Theta.

    Block diagonal over the G = +1 and G = -1 bivectors, each block a
    symmetric Gaussian matrix.
    """
    sig = as_signature(sig)
    G = bivector_basis(sig).G
    M = np.zeros((sig.N, sig.N))
    for s in (1.0, -1.0):
        idx = np.flatnonzero(G == s)
        A = rng.normal(size=(idx.size, idx.size))
        M[np.ix_(idx, idx)] = A + A.T
    return CurvatureOperator(sig, M)


def hidden_electric_operator(sig, rng, boost_scale: float = 1.0):
    """``h . M0 . h^-1`` for a random electric ``M0``; returns ``(op, h)``."""
    sig = as_signature(sig)
    h = random_isometry(sig, rng, boost_scale)
    return act(h, random_electric_operator(sig, rng)), h
