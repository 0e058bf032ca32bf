"""Pointwise curvature algebra in an orthonormal frame.

All tensors carry frame components with every index down.  Frame index
``0 .. p-1`` are timelike (norm -1), ``p .. n-1`` spacelike (norm +1).
Bivectors are indexed by ordered pairs ``(a, b)`` with ``a < b`` in
lexicographic order, without any 1/2 or sqrt(2) normalisation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from itertools import combinations, product

import numpy as np

SYM_TOL = 1e-10


class CurvatureInputError(ValueError):
    """Raised for malformed tensor or operator input."""


@dataclass(frozen=True)
class Signature:
    p: int
    q: int

    def __post_init__(self):
        if self.p < 0 or self.q < 0:
            raise CurvatureInputError(f"negative signature entry ({self.p}, {self.q})")
        if self.p + self.q < 2:
            raise CurvatureInputError("dimension must be at least 2")

    @property
    def n(self) -> int:
        return self.p + self.q

    @property
    def N(self) -> int:
        return self.n * (self.n - 1) // 2

    @property
    def riemannian(self) -> bool:
        """True for definite signatures, where the only Cartan involutions are +-Id."""
        return self.p == 0 or self.q == 0

    def __str__(self):
        return f"({self.p},{self.q})"


def as_signature(sig) -> Signature:
    if isinstance(sig, Signature):
        return sig
    p, q = sig
    return Signature(int(p), int(q))


@dataclass(frozen=True)
class FramedMetric:
    signature: Signature

    @cached_property
    def g(self) -> np.ndarray:
        s = self.signature
        return np.array([-1.0] * s.p + [1.0] * s.q)

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(self.g)


def frame_metric(sig) -> np.ndarray:
    """Diagonal of the orthonormal-frame metric, timelike entries first."""
    return FramedMetric(as_signature(sig)).g


@dataclass(frozen=True)
class BivectorBasis:
    signature: Signature

    @cached_property
    def pairs(self) -> list[tuple[int, int]]:
        return list(combinations(range(self.signature.n), 2))

    @cached_property
    def index(self) -> dict[tuple[int, int], int]:
        return {pr: i for i, pr in enumerate(self.pairs)}

    @cached_property
    def G(self) -> np.ndarray:
        g = frame_metric(self.signature)
        return np.array([g[a] * g[b] for a, b in self.pairs])

    @cached_property
    def first(self) -> np.ndarray:
        return np.array([a for a, _ in self.pairs], dtype=int)

    @cached_property
    def second(self) -> np.ndarray:
        return np.array([b for _, b in self.pairs], dtype=int)


@lru_cache(maxsize=None)
def _basis_for(sig: Signature) -> BivectorBasis:
    return BivectorBasis(sig)


def bivector_basis(sig) -> BivectorBasis:
    return _basis_for(as_signature(sig))


def wedge2(h: np.ndarray, sig) -> np.ndarray:
    """Second exterior power of an n x n matrix in the pair basis.

    ``L[(ab),(cd)] = h[a,c] h[b,d] - h[a,d] h[b,c]``.
    """
    B = bivector_basis(sig)
    a, b = B.first, B.second
    return (h[np.ix_(a, a)] * h[np.ix_(b, b)]
            - h[np.ix_(a, b)] * h[np.ix_(b, a)])


# --------------------------------------------------------------------------
# Tensors
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RiemannTensor:
    """Frame components ``R_abcd`` of a curvature-type tensor."""

    signature: Signature
    components: np.ndarray = field(repr=False)

    def __post_init__(self):
        sig = as_signature(self.signature)
        object.__setattr__(self, "signature", sig)
        comps = np.array(self.components, dtype=float)
        n = sig.n
        if comps.shape != (n, n, n, n):
            raise CurvatureInputError(
                f"components have shape {comps.shape}, expected {(n,) * 4}")
        comps.setflags(write=False)
        object.__setattr__(self, "components", comps)

    @property
    def n(self) -> int:
        return self.signature.n

    def __getitem__(self, idx):
        return self.components[idx]

    def scaled(self, c: float):
        return type(self)(self.signature, c * self.components)

    @classmethod
    def zeros(cls, sig):
        n = as_signature(sig).n
        return cls(sig, np.zeros((n, n, n, n)))

    @classmethod
    def from_entries(cls, sig, entries, symmetry_completion: bool = True,
                     sym_tol: float = SYM_TOL):
        """Build a tensor from ``((a, b, c, d), value)`` pairs.

        With ``symmetry_completion`` each entry also fills its images under
        the pair antisymmetries and pair exchange.  Two entries that imply
        different values for the same slot beyond ``sym_tol`` are an error.
        """
        sig = as_signature(sig)
        n = sig.n
        R = np.zeros((n, n, n, n))
        seen = np.zeros((n, n, n, n), dtype=bool)
        for idx, value in entries:
            idx = tuple(int(i) for i in idx)
            if len(idx) != 4:
                raise CurvatureInputError(f"index {idx} is not a quadruple")
            if any(i < 0 or i >= n for i in idx):
                raise CurvatureInputError(f"index {idx} out of range for n={n}")
            value = float(value)
            if not np.isfinite(value):
                raise CurvatureInputError(f"non-finite value at {idx}")
            images = _symmetry_images(idx) if symmetry_completion else [(idx, 1.0)]
            for img, sign in images:
                v = sign * value
                if seen[img] and abs(R[img] - v) > sym_tol:
                    raise CurvatureInputError(
                        f"conflicting value at {img}: {R[img]!r} vs {v!r} (from {idx})")
                R[img] = v
                seen[img] = True
        return cls(sig, R)


class WeylTensor(RiemannTensor):
    """Totally trace-free part of a Riemann tensor."""


def _symmetry_images(idx):
    a, b, c, d = idx
    if a == b or c == d:
        return [(idx, 1.0)]
    out = []
    for (w, x, y, z), s in (((a, b, c, d), 1.0), ((b, a, c, d), -1.0),
                            ((a, b, d, c), -1.0), ((b, a, d, c), 1.0)):
        out.append(((w, x, y, z), s))
        out.append(((y, z, w, x), s))
    return out


def _canonical(idx):
    """Representative of ``idx`` under pair antisymmetry and exchange, with sign.

    Returns ``None`` when antisymmetry forces the component to vanish.
    """
    a, b, c, d = idx
    if a == b or c == d:
        return None
    sign = 1.0
    if a > b:
        a, b, sign = b, a, -sign
    if c > d:
        c, d, sign = d, c, -sign
    if (a, b) > (c, d):
        a, b, c, d = c, d, a, b
    return (a, b, c, d), sign


@dataclass
class SymmetryReport:
    ok: bool
    worst: tuple[int, int, int, int] | None
    magnitude: float
    kind: str | None
    violations: list = field(default_factory=list)

    def __bool__(self):
        return self.ok


def validate_riemann(t: RiemannTensor, sym_tol: float = SYM_TOL) -> SymmetryReport:
    """Check antisymmetry, pair symmetry and the first Bianchi identity.

    Deviations are charged to the non-canonical member of each symmetry
    orbit (canonical means ``a < b``, ``c < d``, ``(a,b) <= (c,d)``), so an
    injected inconsistent entry is the one named in the report.  Bianchi
    residuals are charged to the canonical quadruple.
    """
    R = t.components
    n = t.n
    implied = _implied_from_canonical(R)
    violations = []
    for idx in product(range(n), repeat=4):
        canon = _canonical(idx)
        if canon is None:
            res, kind = abs(R[idx]), "antisymmetry"
        else:
            rep, sign = canon
            if rep == idx:
                a, b, c, d = idx
                res = abs(implied[a, b, c, d] + implied[a, c, d, b] + implied[a, d, b, c])
                kind = "bianchi"
            else:
                res = abs(R[idx] - sign * R[rep])
                kind = "pair-exchange" if sorted(idx[:2]) != list(rep[:2]) else "antisymmetry"
        if res > sym_tol:
            violations.append((res, idx, kind))
    if not violations:
        return SymmetryReport(True, None, 0.0, None)
    violations.sort(key=lambda v: (-v[0], v[1]))
    res, idx, kind = violations[0]
    return SymmetryReport(False, idx, float(res), kind,
                          [(i, float(r), k) for r, i, k in violations])


def _implied_from_canonical(R):
    n = R.shape[0]
    out = np.zeros_like(R)
    for idx in product(range(n), repeat=4):
        canon = _canonical(idx)
        if canon is not None:
            rep, sign = canon
            out[idx] = sign * R[rep]
    return out


def symmetrize(components: np.ndarray) -> np.ndarray:
    """Project an arbitrary rank-4 array onto algebraic curvature tensors."""
    R = np.asarray(components, dtype=float)
    R = 0.5 * (R - R.transpose(1, 0, 2, 3))
    R = 0.5 * (R - R.transpose(0, 1, 3, 2))
    R = 0.5 * (R + R.transpose(2, 3, 0, 1))
    # remove the totally antisymmetric part, the only Bianchi-violating piece
    return R - _alternate(R)


def _alternate(R):
    from itertools import permutations
    out = np.zeros_like(R)
    for perm in permutations(range(4)):
        out += _perm_sign(perm) * R.transpose(perm)
    return out / 24.0


def _perm_sign(perm):
    sign, perm = 1, list(perm)
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            sign = -sign
    return sign


def constant_curvature_components(sig, k: float) -> np.ndarray:
    g = np.diag(frame_metric(sig))
    return k * (np.einsum("ac,bd->abcd", g, g) - np.einsum("ad,bc->abcd", g, g))


# --------------------------------------------------------------------------
# Curvature operator
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CurvatureOperator:
    """Curvature acting on bivectors, ``M[A,B] = R^A_B`` in the pair basis."""

    signature: Signature
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        sig = as_signature(self.signature)
        object.__setattr__(self, "signature", sig)
        M = np.array(self.matrix, dtype=float)
        if M.shape != (sig.N, sig.N):
            raise CurvatureInputError(
                f"operator has shape {M.shape}, expected {(sig.N, sig.N)}")
        M.setflags(write=False)
        object.__setattr__(self, "matrix", M)

    @property
    def G(self) -> np.ndarray:
        return bivector_basis(self.signature).G

    def symmetry_residual(self) -> float:
        GM = self.G[:, None] * self.matrix
        return float(np.max(np.abs(GM - GM.T), initial=0.0))

    def scaled(self, c: float):
        return CurvatureOperator(self.signature, c * self.matrix)


def riemann_to_operator(t: RiemannTensor) -> CurvatureOperator:
    B = bivector_basis(t.signature)
    a, b = B.first, B.second
    M = t.components[a[:, None], b[:, None], a[None, :], b[None, :]]
    return CurvatureOperator(t.signature, B.G[:, None] * M)


def operator_to_riemann(op: CurvatureOperator, sym_tol: float = SYM_TOL) -> RiemannTensor:
    """Inverse of :func:`riemann_to_operator`.

    The first Bianchi identity is not imposed; a G-symmetric operator need
    not satisfy it.
    """
    scale = max(1.0, float(np.max(np.abs(op.matrix), initial=0.0)))
    if op.symmetry_residual() > sym_tol * scale:
        raise CurvatureInputError("not a curvature-type operator (G·M is not symmetric)")
    B = bivector_basis(op.signature)
    n = op.signature.n
    lowered = B.G[:, None] * op.matrix
    R = np.zeros((n, n, n, n))
    for i, (a, b) in enumerate(B.pairs):
        for j, (c, d) in enumerate(B.pairs):
            v = lowered[i, j]
            R[a, b, c, d] = v
            R[b, a, c, d] = -v
            R[a, b, d, c] = -v
            R[b, a, d, c] = v
    return RiemannTensor(op.signature, R)


# --------------------------------------------------------------------------
# Contractions
# --------------------------------------------------------------------------

def ricci(t: RiemannTensor) -> np.ndarray:
    g = frame_metric(t.signature)
    return np.einsum("a,abad->bd", g, t.components)


def ricci_scalar(t: RiemannTensor) -> float:
    g = frame_metric(t.signature)
    return float(np.dot(g, np.diag(ricci(t))))


def ricci_scalar_of_operator(op: CurvatureOperator) -> float:
    # Sum over all ordered pairs of R^{ab}_{ab} counts each a<b pair twice.
    return float(2.0 * np.trace(op.matrix))


def kulkarni_nomizu(h: np.ndarray, k: np.ndarray) -> np.ndarray:
    return (np.einsum("ac,bd->abcd", h, k) + np.einsum("bd,ac->abcd", h, k)
            - np.einsum("ad,bc->abcd", h, k) - np.einsum("bc,ad->abcd", h, k))


def weyl(t: RiemannTensor) -> WeylTensor:
    n = t.n
    if n <= 2:
        raise CurvatureInputError("Weyl undefined for n <= 2")
    g = np.diag(frame_metric(t.signature))
    Ric = ricci(t)
    scal = ricci_scalar(t)
    P = (Ric - scal / (2.0 * (n - 1)) * g) / (n - 2)
    C = t.components - kulkarni_nomizu(g, P)
    return WeylTensor(t.signature, C)


def weyl_traces(c: RiemannTensor) -> np.ndarray:
    """All single contractions ``sum_a g[a] C_abad``."""
    return ricci(c)
