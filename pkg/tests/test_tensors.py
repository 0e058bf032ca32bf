import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from curvorbit import catalog
from curvorbit.sampling import random_riemann
from curvorbit.tensors import (CurvatureInputError, CurvatureOperator, RiemannTensor,
                               Signature, bivector_basis, constant_curvature_components,
                               frame_metric, kulkarni_nomizu, operator_to_riemann, ricci,
                               ricci_scalar, ricci_scalar_of_operator, riemann_to_operator,
                               symmetrize, validate_riemann, wedge2, weyl)

SIGS = [(0, 3), (1, 2), (1, 3), (2, 2), (0, 4)]


def rng(seed=0):
    return np.random.default_rng(seed)


def random_g_symmetric(sig, r):
    sig = Signature(*sig)
    A = r.normal(size=(sig.N, sig.N))
    G = bivector_basis(sig).G
    # G M symmetric  <=>  M = G S with S symmetric
    return G[:, None] * (A + A.T)


# --------------------------------------------------------------------------
# Signature and basis
# --------------------------------------------------------------------------

def test_signature_rejects_small_or_negative():
    with pytest.raises(CurvatureInputError):
        Signature(0, 1)
    with pytest.raises(CurvatureInputError):
        Signature(-1, 3)


@pytest.mark.parametrize("p,q", SIGS + [(3, 2)])
def test_frame_metric_and_basis(p, q):
    sig = Signature(p, q)
    g = frame_metric(sig)
    assert list(g) == [-1.0] * p + [1.0] * q
    B = bivector_basis(sig)
    assert len(B.pairs) == sig.N == sig.n * (sig.n - 1) // 2
    assert B.pairs == sorted(B.pairs)
    assert all(B.index[pr] == i for i, pr in enumerate(B.pairs))
    assert set(np.unique(B.G)) <= {-1.0, 1.0}
    assert int(np.sum(B.G == -1)) == p * q


def test_wedge2_is_multiplicative():
    r = rng(1)
    A, B = r.normal(size=(4, 4)), r.normal(size=(4, 4))
    sig = Signature(1, 3)
    assert np.allclose(wedge2(A @ B, sig), wedge2(A, sig) @ wedge2(B, sig), atol=1e-12)


# --------------------------------------------------------------------------
# Validation
# --------------------------------------------------------------------------

def test_validate_zero_and_constant_curvature():
    assert validate_riemann(RiemannTensor.zeros((1, 3))).ok
    t = RiemannTensor((0, 3), constant_curvature_components((0, 3), 1.0))
    assert validate_riemann(t).ok


def test_validate_names_broken_antisymmetry():
    t = RiemannTensor.from_entries((1, 2), [((0, 1, 0, 1), 1.0), ((0, 1, 1, 0), 1.0)],
                                   symmetry_completion=False)
    rep = validate_riemann(t)
    assert not rep.ok
    assert rep.worst == (0, 1, 1, 0)
    assert rep.kind == "antisymmetry"


def test_validate_detects_bianchi():
    R = np.zeros((4, 4, 4, 4))
    # a totally antisymmetric tensor satisfies every pair symmetry but not Bianchi
    from itertools import permutations
    from curvorbit.tensors import _perm_sign
    for perm in permutations(range(4)):
        R[perm] = _perm_sign(perm)
    rep = validate_riemann(RiemannTensor((1, 3), R))
    assert not rep.ok and rep.kind == "bianchi"


def test_from_entries_completion_and_conflicts():
    t = RiemannTensor.from_entries((1, 2), [((0, 1, 0, 1), 2.0)])
    R = t.components
    assert R[1, 0, 0, 1] == -2.0 and R[0, 1, 1, 0] == -2.0 and R[1, 0, 1, 0] == 2.0
    with pytest.raises(CurvatureInputError, match="conflicting"):
        RiemannTensor.from_entries((1, 2), [((0, 1, 0, 1), 2.0), ((1, 0, 0, 1), 2.0)])
    with pytest.raises(CurvatureInputError, match="out of range"):
        RiemannTensor.from_entries((1, 2), [((0, 1, 0, 3), 1.0)])


def test_components_are_read_only():
    t = RiemannTensor.zeros((1, 3))
    with pytest.raises(ValueError):
        t.components[0, 1, 0, 1] = 1.0


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(SIGS))
def test_symmetrize_gives_valid_tensor(seed, sig):
    R = symmetrize(rng(seed).normal(size=(Signature(*sig).n,) * 4))
    assert validate_riemann(RiemannTensor(sig, R)).ok
    # idempotent
    assert np.allclose(symmetrize(R), R, atol=1e-14)


# --------------------------------------------------------------------------
# Operator
# --------------------------------------------------------------------------

def test_constant_curvature_operator_is_identity():
    op = riemann_to_operator(RiemannTensor((0, 3), constant_curvature_components((0, 3), 1.0)))
    assert np.array_equal(op.matrix, np.eye(3))
    assert not np.any(riemann_to_operator(RiemannTensor.zeros((1, 3))).matrix)


@pytest.mark.parametrize("p,q", [(1, 3), (2, 2), (1, 4)])
def test_constant_curvature_operator_is_k_identity_any_signature(p, q):
    op = riemann_to_operator(RiemannTensor((p, q), constant_curvature_components((p, q), -1.5)))
    assert np.allclose(op.matrix, -1.5 * np.eye(op.signature.N), atol=0)


def test_pp_wave_operator_is_nilpotent():
    M = riemann_to_operator(catalog.builtin("pp_wave").riemann).matrix
    assert np.max(np.abs(M @ M)) < 1e-12
    assert np.linalg.norm(M) > 0.1


def test_operator_to_riemann_examples():
    t = operator_to_riemann(CurvatureOperator((0, 3), np.eye(3)))
    assert np.allclose(t.components, constant_curvature_components((0, 3), 1.0))
    assert not np.any(operator_to_riemann(CurvatureOperator((1, 2), np.zeros((3, 3)))).components)


def test_operator_to_riemann_rejects_g_asymmetric():
    M = np.zeros((3, 3))
    M[0, 2] = 1.0
    with pytest.raises(CurvatureInputError, match="not a curvature-type operator"):
        operator_to_riemann(CurvatureOperator((1, 2), M))


@pytest.mark.parametrize("sig", SIGS)
def test_operator_round_trips(sig):
    r = rng(7)
    for _ in range(20):
        M = random_g_symmetric(sig, r)
        back = riemann_to_operator(operator_to_riemann(CurvatureOperator(sig, M))).matrix
        assert np.max(np.abs(back - M)) < 1e-14
        t = random_riemann(sig, r)
        op = riemann_to_operator(t)
        G = op.G
        assert np.max(np.abs(G[:, None] * op.matrix - (G[:, None] * op.matrix).T)) < 1e-12
        assert np.max(np.abs(operator_to_riemann(op).components - t.components)) < 1e-14


# --------------------------------------------------------------------------
# Ricci and Weyl
# --------------------------------------------------------------------------

@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_constant_curvature_scalar(n):
    for p in (0, 1):
        k = 0.7
        t = RiemannTensor((p, n - p), constant_curvature_components((p, n - p), k))
        assert ricci_scalar(t) == pytest.approx(k * n * (n - 1), rel=1e-14)
        assert np.allclose(ricci(t), k * (n - 1) * np.diag(frame_metric(t.signature)))
    assert ricci_scalar(RiemannTensor.zeros((1, 3))) == 0.0


@pytest.mark.parametrize("sig", SIGS)
def test_ricci_scalar_matches_operator_trace(sig):
    r = rng(11)
    for _ in range(100):
        t = random_riemann(sig, r)
        assert abs(ricci_scalar(t) - ricci_scalar_of_operator(riemann_to_operator(t))) < 1e-12


def test_weyl_undefined_in_dimension_two():
    with pytest.raises(CurvatureInputError, match="Weyl undefined"):
        weyl(RiemannTensor.zeros((1, 1)))


@pytest.mark.parametrize("sig", [(0, 3), (1, 2), (1, 3), (2, 2), (1, 4)])
def test_weyl_of_constant_curvature_vanishes(sig):
    t = RiemannTensor(sig, constant_curvature_components(sig, 2.0))
    assert np.max(np.abs(weyl(t).components)) < 1e-14


def test_weyl_of_vacuum_is_itself():
    t = catalog.builtin("pp_wave").riemann
    assert np.max(np.abs(weyl(t).components - t.components)) < 1e-15
    s = catalog.builtin("schwarzschild_point").riemann
    C = weyl(s)
    assert np.linalg.norm(C.components) > 0.1
    g = frame_metric(s.signature)
    assert np.max(np.abs(np.einsum("a,abad->bd", g, C.components))) < 1e-12


@pytest.mark.parametrize("sig", [(1, 3), (2, 2), (0, 4), (1, 4), (2, 3)])
def test_weyl_traceless_and_valid(sig):
    r = rng(3)
    g = frame_metric(Signature(*sig))
    for _ in range(20):
        C = weyl(random_riemann(sig, r))
        assert np.max(np.abs(np.einsum("a,abad->bd", g, C.components))) < 1e-12
        assert validate_riemann(C).ok


def test_kulkarni_nomizu_of_metric_is_constant_curvature():
    g = np.diag(frame_metric(Signature(1, 3)))
    assert np.allclose(0.5 * kulkarni_nomizu(g, g), constant_curvature_components((1, 3), 1.0))
