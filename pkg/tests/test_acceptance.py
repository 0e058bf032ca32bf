"""Acceptance criteria 1-9.

Each test records one PASS/FAIL line; the lines are printed at the end of
the run by the terminal-summary hook in conftest.py.
"""

import os
import subprocess
import sys

import numpy as np

from curvorbit import catalog
from curvorbit.cartan import (PE_TOL, act_on_lower_indices, boost_matrix, commutator_norm,
                              em_split_tensor, extend_to_bivectors, pe_defect, theta_from_boost,
                              theta_norm)
from curvorbit.catalog import curvature_oracle, holomorphic_example_slice
from curvorbit.classify import NO, OBSTRUCTED, PASSED, YES, classify, wick_pair_check
from curvorbit.flow import COLLAPSE, MINIMAL, ROUNDING, act, run_flow, trace_drift
from curvorbit.sampling import (hidden_electric_operator, random_electric_operator,
                                random_isometry, random_riemann, transform_tensor)
from curvorbit.tensorfile import dump_tensor_file
from curvorbit.tensors import (Signature, constant_curvature_components, frame_metric,
                               operator_to_riemann, ricci, riemann_to_operator)

RESULTS = {}
FLOW_RUNS = []      # (label, op, verdict) for criterion 5


def record(n, ok, detail):
    RESULTS[n] = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(RESULTS[n])
    assert ok, RESULTS[n]


def flow(label, op):
    v = run_flow(op)
    FLOW_RUNS.append((label, op, v))
    return v


# --------------------------------------------------------------------------

def test_c1_positive_corollary():
    cases = {
        "constant_curvature(1,3,1)": catalog.constant_curvature(1, 3, 1.0),
        "constant_curvature(1,3,-0.3)": catalog.constant_curvature(1, 3, -0.3),
        "de_sitter(4)": catalog.builtin("de_sitter").riemann,
        "anti_de_sitter(4)": catalog.builtin("anti_de_sitter").riemann,
    }
    bad = []
    worst_comm, worst_it = 0.0, 0
    for label, t in cases.items():
        c = classify(t)
        v = flow(label, riemann_to_operator(t))
        worst_comm = max(worst_comm, v.commutator_final)
        worst_it = max(worst_it, v.iterations)
        if not (c.rpe.value == YES and c.wick_to_riemannian == PASSED and v.status == MINIMAL
                and v.commutator_final < 1e-9 and v.iterations <= 100):
            bad.append(label)
    record(1, not bad, f"cases={len(cases)} max|[M,Theta0]|={worst_comm:.1e} "
                       f"max_iter={worst_it} failed={bad}")


def test_c2_negative_corollary():
    t = catalog.builtin("pp_wave").riemann
    c = classify(t)
    v = flow("pp_wave", riemann_to_operator(t))
    ratio = v.f_final / v.f_initial
    ok = (c.rpe.value == NO and c.wick_to_riemannian == OBSTRUCTED and v.status == COLLAPSE
          and ratio < 1e-6 and v.iterations <= 10_000)
    record(2, ok, f"rpe={c.rpe.value} wick={c.wick_to_riemannian} status={v.status} "
                  f"f_final/f_initial={ratio:.1e} iters={v.iterations}")


def test_c3_wick_pair_slices():
    s3 = curvature_oracle(holomorphic_example_slice(3, "sphere"), h=1e-4)
    h3 = curvature_oracle(holomorphic_example_slice(3, "hyperbolic"), h=1e-4)
    res = wick_pair_check(s3, h3)
    lams, errs = [], []
    for t in (s3, h3):
        g = np.diag(frame_metric(t.signature))
        Ric = ricci(t)
        lam = float(np.trace(Ric @ np.linalg.inv(g)) / 3.0)
        lams.append(lam)
        errs.append(float(np.max(np.abs(Ric - lam * g))))
    ok = (res.status == "consistent" and max(errs) < 1e-5 and min(lams) > 0
          and abs(lams[0] - lams[1]) < 1e-5)
    record(3, ok, f"pair={res.status} lambda={lams[0]:.8f},{lams[1]:.8f} "
                  f"max|Ric-lambda g|={max(errs):.1e}")


def test_c4_hidden_electric_recovery():
    rng = np.random.default_rng(2024)
    worst_comm = worst_pe = 0.0
    failures = 0
    for sig in [(1, 2), (1, 3)]:
        for i in range(50):
            op, _ = hidden_electric_operator(sig, rng)
            v = flow(f"hidden{sig}#{i}", op)
            if v.status != MINIMAL:
                failures += 1
                continue
            pe = pe_defect(op, v.theta_witness)
            worst_comm = max(worst_comm, v.commutator_final)
            worst_pe = max(worst_pe, pe)
            if v.commutator_final >= 1e-8 or pe >= 1e-8:
                failures += 1
    record(4, failures == 0, f"runs=100 failures={failures} max|[M,Theta0]|={worst_comm:.1e} "
                             f"max pe_defect={worst_pe:.1e}")


def test_c5_flow_soundness():
    assert FLOW_RUNS, "criterion 5 reuses the flows of criteria 1-4; run the module"
    nonmono, worst_drift, runs = [], 0.0, 0
    for label, op, v in FLOW_RUNS:
        for r in v.runs:
            runs += 1
            h = r.f_history
            # polish steps are accepted only within rounding of the previous f
            if any(b > a * (1.0 + ROUNDING) for a, b in zip(h, h[1:])) or not r.monotone:
                nonmono.append(label)
            d = trace_drift(r.state.op_cur.matrix, op.matrix, 6)
            worst_drift = max(worst_drift, d)
    ok = not nonmono and worst_drift < 1e-8
    record(5, ok, f"seed_runs={runs} non_monotone={len(nonmono)} "
                  f"max trace drift (k<=6)={worst_drift:.1e}")


def test_c6_oracle_equivalence():
    errs, ratios = [], []
    for n in (2, 3, 4):
        exact = constant_curvature_components((0, n), 4.0)
        m0 = holomorphic_example_slice(n, "sphere")
        errs.append(float(np.max(np.abs(curvature_oracle(m0).components - exact))))
        m = holomorphic_example_slice(n, "sphere", np.full(n, 0.1))
        e1 = np.max(np.abs(curvature_oracle(m, 1e-2, richardson=False).components - exact))
        e2 = np.max(np.abs(curvature_oracle(m, 5e-3, richardson=False).components - exact))
        ratios.append(float(e1 / e2))
    ok = max(errs) < 1e-6 and min(ratios) >= 3.0
    record(6, ok, f"max error={max(errs):.1e} halving ratios="
                  + ",".join(f"{r:.2f}" for r in ratios))


def test_c7_split_exactness():
    rng = np.random.default_rng(77)
    sigs = [(1, 2), (1, 3), (2, 2), (1, 4), (2, 3)]
    eps = np.finfo(float).eps
    worst_sum = worst_eig = 0.0
    disagree = electric = 0
    for i in range(200):
        sig = Signature(*sigs[i % len(sigs)])
        b = 0.5 * rng.normal(size=sig.p * sig.q)
        th = theta_from_boost(sig, b)
        if i % 4 == 3:
            # electric for th by construction
            op = act(boost_matrix(sig, b), random_electric_operator(sig, rng))
            t = operator_to_riemann(op)
        else:
            t = random_riemann(sig, rng)
        plus, minus = em_split_tensor(t, th)
        T = t.components
        # residuals relative to |T| |theta|^4, the rounding scale of the contraction
        scale = np.linalg.norm(T) * np.linalg.norm(th.theta, 2) ** 4
        worst_sum = max(worst_sum, np.max(np.abs(plus.components + minus.components - T))
                        / (eps * scale))
        e_plus = act_on_lower_indices(plus.components, th.theta) - plus.components
        e_minus = act_on_lower_indices(minus.components, th.theta) + minus.components
        worst_eig = max(worst_eig, max(np.max(np.abs(e_plus)), np.max(np.abs(e_minus))) / scale)
        op = riemann_to_operator(t)
        Theta = extend_to_bivectors(th)
        rel_minus = pe_defect(t, th) / theta_norm(t, th)
        rel_comm = commutator_norm(op, th) / (np.linalg.norm(op.matrix)
                                              * np.linalg.norm(Theta) ** 2)
        electric += rel_minus <= PE_TOL
        disagree += (rel_minus <= PE_TOL) != (rel_comm <= PE_TOL)
    ok = worst_sum <= 8.0 and worst_eig < 1e-12 and disagree == 0 and electric == 50
    record(7, ok, f"tensors=200 reassembly={worst_sum:.1f} eps*scale "
                  f"eigen residual={worst_eig:.1e} (relative) electric={electric} "
                  f"verdict disagreements={disagree}")


def test_c8_equivariance():
    rng = np.random.default_rng(8)
    mismatches = []
    for name in catalog.names():
        e = catalog.builtin(name)
        base = classify(e.riemann).summary()
        for k in range(5):
            h = random_isometry(e.signature, rng)
            if classify(transform_tensor(e.riemann, h)).summary() != base:
                mismatches.append(f"{name}#{k}")
    record(8, not mismatches, f"entries={len(catalog.names())} frames=5 "
                              f"mismatches={mismatches}")


def test_c9_cli_determinism(tmp_path):
    pp = tmp_path / "pp.json"
    pp.write_text(dump_tensor_file(catalog.builtin("pp_wave").riemann))
    pm = tmp_path / "pm.json"
    pm.write_text(dump_tensor_file(catalog.builtin("hand_built_pm").riemann))
    bs = tmp_path / "bs.json"
    bs.write_text(dump_tensor_file(transform_tensor(
        catalog.builtin("schwarzschild_point").riemann, boost_matrix((1, 3), [0.2, 0.9, -0.4]))))
    commands = [
        ["classify", str(pm), "--format", "json", "--seed-value", "11"],
        ["classify", str(pp), "--seed-value", "11"],
        ["flow", str(bs), "--format", "json", "--seed-value", "11"],
    ]
    differing = []
    for cmd in commands:
        outs = []
        for threads in ("1", "1", "8", "8"):
            env = dict(os.environ, CURVORBIT_THREADS=threads)
            proc = subprocess.run([sys.executable, "-m", "curvorbit.cli", *cmd],
                                  capture_output=True, env=env)
            outs.append((proc.returncode, proc.stdout))
        if len(set(outs)) != 1:
            differing.append(cmd[0])
    record(9, not differing, f"commands={len(commands)} runs_each=4 (threads 1,1,8,8) "
                             f"differing={differing}")
