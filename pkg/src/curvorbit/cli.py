"""Command line interface: classify, flow, wick-pair and catalog.

Exit codes: 0 verdicts computed, 2 input error, 3 numerically inconclusive.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, catalog
from .cartan import PE_TOL
from .classify import ClassifyConfig, classify, orbit_invariants, wick_pair_check
from .flow import EXHAUSTED, FlowConfig, run_flow
from .tensorfile import TensorFileError, dump_tensor_file, load_tensor_file
from .tensors import CurvatureInputError, riemann_to_operator, weyl

EXIT_OK, EXIT_INPUT, EXIT_INCONCLUSIVE = 0, 2, 3

SCOPE_NOTE = ("wick_to_riemannian reports a necessary condition only; the compatible-triple "
              "hypothesis on the rotation cannot be checked from point curvature data")


def _clean(obj):
    """JSON-safe copy: arrays to lists, numpy scalars to Python, non-finite to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items() if not str(k).startswith("_")}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    return obj


def _digest(raw: bytes) -> str:
    return hashlib.sha256(raw).hexdigest()


def _flow_config(args) -> FlowConfig:
    return FlowConfig(max_iter=args.max_iter, seeds=args.seeds, seed_value=args.seed_value)


def _config_echo(args, flow_cfg: FlowConfig, extra=None) -> dict:
    out = {
        "pe_tol": args.tol,
        "grad_tol": flow_cfg.grad_tol,
        "comm_tol": flow_cfg.comm_tol,
        "collapse_ratio": flow_cfg.collapse_ratio,
        "max_iter": flow_cfg.max_iter,
        "seeds": flow_cfg.seeds,
        "seed_value": flow_cfg.seed_value,
        "reorth_every": flow_cfg.reorth_every,
    }
    out.update(extra or {})
    return out


# --------------------------------------------------------------------------
# Rendering
# --------------------------------------------------------------------------

def _text_value(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, dict)):
        return json.dumps(v, sort_keys=True)
    return str(v)


def render_text(report: dict, order: list) -> str:
    """One ``key: value`` line per field, in a fixed order; nested blocks flattened."""
    lines = []

    def emit(prefix, value):
        if isinstance(value, dict):
            for k in sorted(value):
                emit(f"{prefix}.{k}", value[k])
        else:
            lines.append(f"{prefix}: {_text_value(value)}")

    for key in order:
        if key in report:
            emit(key, report[key])
    return "\n".join(lines) + "\n"


def _write(report: dict, order: list, args) -> None:
    report = _clean(report)
    if args.format == "json":
        text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    else:
        text = render_text(report, order)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _header(command: str, raw_inputs: list[bytes]) -> dict:
    return {
        "tool": "curvorbit",
        "version": __version__,
        "command": command,
        "input_sha256": [_digest(r) for r in raw_inputs],
    }


# --------------------------------------------------------------------------
# Commands
# --------------------------------------------------------------------------

def _verdict_dict(v):
    return None if v is None else v.to_dict()


def cmd_classify(args) -> int:
    t, raw = load_tensor_file(args.file)
    flow_cfg = _flow_config(args)
    cfg = ClassifyConfig(pe_tol=args.tol, flow=flow_cfg, seed_value=args.seed_value,
                         weyl_only=args.weyl_only)
    cls = classify(t, cfg)
    diag = cls.diagnostics
    op = riemann_to_operator(t)
    report = _header("classify", [raw])
    report.update({
        "signature": [t.signature.p, t.signature.q],
        "config": _config_echo(args, flow_cfg, {"weyl_only": args.weyl_only,
                                                "direct_seeds": cfg.direct_seeds,
                                                "direct_budget": cfg.direct_budget}),
        "summary": cls.summary(),
        "classification": {
            "rpe": _verdict_dict(cls.rpe), "pe": _verdict_dict(cls.pe),
            "rpm": _verdict_dict(cls.rpm), "pm": _verdict_dict(cls.pm),
            "wick_to_riemannian": cls.wick_to_riemannian, "wick_reason": cls.wick_reason,
        },
        "flow": {k: v for k, v in diag.items() if k.endswith("_flow")},
        "invariants": orbit_invariants(op),
        "notes": cls.notes + [SCOPE_NOTE],
    })
    _write(report, ["tool", "version", "command", "input_sha256", "signature", "summary",
                    "classification", "invariants", "notes", "flow", "config"], args)
    return EXIT_INCONCLUSIVE if cls.inconclusive else EXIT_OK


def cmd_flow(args) -> int:
    t, raw = load_tensor_file(args.file)
    flow_cfg = _flow_config(args)
    target = weyl(t) if args.weyl_only else t
    op = riemann_to_operator(target)
    v = run_flow(op, flow_cfg)
    every = max(1, args.log_every)
    log = [list(row) for i, row in enumerate(v.step_log) if i % every == 0]
    if v.step_log and (len(v.step_log) - 1) % every:
        log.append(list(v.step_log[-1]))
    report = _header("flow", [raw])
    report.update({
        "signature": [t.signature.p, t.signature.q],
        "config": _config_echo(args, flow_cfg, {"weyl_only": args.weyl_only,
                                                "log_every": every}),
        "status": v.status,
        "result": v.summary(),
        "witness_theta": v.theta_witness.theta if v.theta_witness is not None else None,
        "seeds": [{"seed": r.seed_index, "status": r.status, "f_final": r.state.f,
                   "iterations": r.state.iter, "start_boost": r.start_boost}
                  for r in v.runs],
        "step_log": {"columns": ["iter", "f", "grad_norm", "step"], "rows": log},
        "invariants": orbit_invariants(op),
    })
    _write(report, ["tool", "version", "command", "input_sha256", "signature", "status",
                    "result", "witness_theta", "seeds", "invariants", "step_log", "config"], args)
    return EXIT_INCONCLUSIVE if v.status == EXHAUSTED else EXIT_OK


def cmd_wick_pair(args) -> int:
    t1, raw1 = load_tensor_file(args.file_a)
    t2, raw2 = load_tensor_file(args.file_b)
    res = wick_pair_check(t1, t2, inv_tol=args.inv_tol)
    report = _header("wick-pair", [raw1, raw2])
    report.update({
        "signatures": [[t1.signature.p, t1.signature.q], [t2.signature.p, t2.signature.q]],
        "config": {"inv_tol": args.inv_tol},
        "result": res.to_dict(),
        "notes": ["consistent is a necessary condition for a shared complex orbit, "
                  "not a certificate"],
    })
    _write(report, ["tool", "version", "command", "input_sha256", "signatures", "result",
                    "notes", "config"], args)
    return EXIT_INCONCLUSIVE if res.status == "inconclusive" else EXIT_OK


def _parse_param(text: str):
    if "=" not in text:
        raise CurvatureInputError(f"--param {text!r}: expected key=value")
    key, val = text.split("=", 1)
    try:
        return key, json.loads(val)
    except json.JSONDecodeError:
        raise CurvatureInputError(f"--param {key}: value {val!r} is not a JSON literal") from None


def cmd_catalog(args) -> int:
    if args.action == "list":
        for name in catalog.names():
            e = catalog.builtin(name)
            sys.stdout.write(f"{name}\t({e.signature.p},{e.signature.q})\t{e.provenance}\n")
        return EXIT_OK
    if not args.name:
        raise CurvatureInputError("catalog emit needs an entry name")
    params = dict(_parse_param(p) for p in args.param or [])
    try:
        entry = catalog.builtin(args.name, **params)
    except catalog.CatalogError as exc:
        raise CurvatureInputError(str(exc.args[0])) from None
    except (KeyError, TypeError, ValueError) as exc:
        raise CurvatureInputError(f"bad parameters for {args.name}: {exc}") from None
    text = dump_tensor_file(entry.riemann)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------

def _common(p: argparse.ArgumentParser, flow: bool = True) -> None:
    p.add_argument("--format", choices=["text", "json"], default="text",
                   help="report format (default text)")
    p.add_argument("--out", help="write the report here instead of stdout")
    if not flow:
        return
    p.add_argument("--tol", type=float, default=PE_TOL,
                   help=f"relative defect tolerance for a yes verdict (default {PE_TOL:g})")
    p.add_argument("--max-iter", type=int, default=10000, help="flow iteration budget per seed")
    p.add_argument("--seeds", type=int, default=8, help="number of flow starts")
    p.add_argument("--seed-value", type=int, default=0, help="RNG seed for start boosts")
    p.add_argument("--weyl-only", action="store_true",
                   help="work with the Weyl tensor only")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="curvorbit",
        description="Electric/magnetic classification and orbit flows for point curvature "
                    "tensors of indefinite metrics. Thread count for multi-start flows is "
                    "capped by the CURVORBIT_THREADS environment variable.",
        epilog="exit codes: 0 ok, 2 input error, 3 inconclusive")
    parser.add_argument("--version", action="version", version=f"curvorbit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="RPE/PE/RPM/PM verdicts and the Wick necessary condition")
    p.add_argument("file", help="tensor file (JSON)")
    _common(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("flow", help="descend to a minimal vector and print the step log")
    p.add_argument("file", help="tensor file (JSON)")
    _common(p)
    p.add_argument("--log-every", type=int, default=1, help="keep every k-th step log row")
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("wick-pair", help="invariant check for two real slices")
    p.add_argument("file_a")
    p.add_argument("file_b")
    _common(p, flow=False)
    p.add_argument("--inv-tol", type=float, default=1e-6, help="relative invariant tolerance")
    p.set_defaults(func=cmd_wick_pair)

    p = sub.add_parser("catalog", help="list built-in entries or emit one as a tensor file")
    p.add_argument("action", choices=["list", "emit"])
    p.add_argument("name", nargs="?")
    p.add_argument("--param", action="append", metavar="KEY=JSON",
                   help="override an entry parameter, e.g. --param k=-1")
    p.add_argument("--out", help="write the tensor file here instead of stdout")
    p.set_defaults(func=cmd_catalog)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (TensorFileError, CurvatureInputError) as exc:
        sys.stderr.write(f"curvorbit: input error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
