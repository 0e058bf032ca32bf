"""JSON tensor files: one curvature tensor as a list of frame components."""

from __future__ import annotations

import json
from pathlib import Path

from .tensors import CurvatureInputError, RiemannTensor, validate_riemann

FORMAT_VERSION = 1


class TensorFileError(CurvatureInputError):
    pass


def _field(cond, where, msg):
    if not cond:
        raise TensorFileError(f"{where}: {msg}")


def parse_tensor_file(text: str, source: str = "<input>") -> RiemannTensor:
    """Parse and validate a tensor file.  Errors name the line or field."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TensorFileError(f"{source}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    _field(isinstance(doc, dict), source, "top level must be an object")
    header = doc.get("header")
    _field(isinstance(header, dict), "header", "missing or not an object")
    sig = header.get("signature")
    _field(isinstance(sig, list) and len(sig) == 2
           and all(isinstance(x, int) and not isinstance(x, bool) and x >= 0 for x in sig)
           and sum(sig) >= 2, "header.signature", "expected [p, q] with p + q >= 2")
    version = header.get("format_version", FORMAT_VERSION)
    _field(version == FORMAT_VERSION, "header.format_version",
           f"unsupported version {version!r}")
    options = doc.get("options", {})
    _field(isinstance(options, dict), "options", "not an object")
    completion = options.get("symmetry_completion", True)
    _field(isinstance(completion, bool), "options.symmetry_completion", "expected a boolean")
    entries = doc.get("entries")
    _field(isinstance(entries, list), "entries", "missing or not a list")
    n = sum(sig)
    parsed = []
    for i, e in enumerate(entries):
        where = f"entries[{i}]"
        _field(isinstance(e, dict), where, "not an object")
        idx = e.get("indices")
        _field(isinstance(idx, list) and len(idx) == 4
               and all(isinstance(x, int) and not isinstance(x, bool) for x in idx),
               f"{where}.indices", "expected four integers")
        _field(all(0 <= x < n for x in idx), f"{where}.indices", f"{idx} out of range for n={n}")
        val = e.get("value")
        _field(isinstance(val, (int, float)) and not isinstance(val, bool),
               f"{where}.value", "expected a number")
        parsed.append((tuple(idx), float(val)))
    try:
        t = RiemannTensor.from_entries(tuple(sig), parsed, symmetry_completion=completion)
    except CurvatureInputError as exc:
        raise TensorFileError(f"entries: {exc}") from None
    report = validate_riemann(t)
    if not report.ok:
        raise TensorFileError(
            f"entries: {report.kind} violated at indices {list(report.worst)} "
            f"(magnitude {report.magnitude:.3e})")
    return t


def load_tensor_file(path) -> tuple[RiemannTensor, bytes]:
    """Returns the tensor and the raw bytes (for digests)."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise TensorFileError(f"{path}: {exc.strerror}") from None
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError:
        raise TensorFileError(f"{path}: not UTF-8 text") from None
    return parse_tensor_file(text, str(path)), raw


def tensor_to_document(t: RiemannTensor, tol: float = 0.0) -> dict:
    """Canonical components only (a<b, c<d, (a,b) <= (c,d)), completion on."""
    R = t.components
    n = t.n
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    entries = []
    for i, (a, b) in enumerate(pairs):
        for c, d in pairs[i:]:
            v = float(R[a, b, c, d])
            if abs(v) > tol:
                entries.append({"indices": [a, b, c, d], "value": v})
    return {
        "header": {"signature": [t.signature.p, t.signature.q], "format_version": FORMAT_VERSION},
        "entries": entries,
        "options": {"symmetry_completion": True},
    }


def dump_tensor_file(t: RiemannTensor) -> str:
    return json.dumps(tensor_to_document(t), indent=2, sort_keys=True) + "\n"
