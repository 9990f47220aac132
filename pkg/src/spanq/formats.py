"""JSON documents for span programs, converting vector sets and graphs.

Complex entries are either a real number or a ``[re, im]`` pair. Errors carry
the line of the offending key so hand-edited files are easy to fix.

Span program::

    {"n": 2, "q": 2, "part_dims": [1, 1], "true_dim": 0, "false_dim": 0,
     "subspaces": [[[], [[1]]], [[], [[1]]]],   # per index, per letter, basis vectors
     "A": [[1, 1]], "tau": [1]}

Converting vector set::

    {"n": 1, "q": 2, "m": 2, "X": ["0", "1"],
     "u": {"0": [[0, 1]], "1": [[1, 0]]}, "v": {...},  # per input, one row per index
     "rho": {"0": [1, 0], ...}, "sigma": {"0": [1, 0], ...}}

Graph::

    {"vertices": 4, "edges": [[0, 1], [1, 2], [2, 3]], "s": 0, "t": 3}
"""
from __future__ import annotations

import json
import re
from pathlib import Path

import numpy as np

from .catalog import GraphSpec
from .linalg import InvalidInputError
from .span_program import SpanProgram, input_str
from .state_conversion import ConvertingVectorSet, GramPair, validate_cvs


class FormatError(InvalidInputError):
    """A document is malformed; ``line`` is 1-based or None when unknown."""

    def __init__(self, message: str, line: int | None = None, source: str = "<document>"):
        self.line = line
        where = f"{source}:{line}" if line else source
        super().__init__(f"{where}: {message}")


def line_of(text: str, key: str) -> int | None:
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def parse_object(text: str, source: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(exc.msg, exc.lineno, source) from None
    if not isinstance(doc, dict):
        raise FormatError("top level must be a JSON object", 1, source)
    return doc


def _scalar(v) -> complex:
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ValueError(f"complex entry must be [re, im], got {v!r}")
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValueError(f"expected a number or [re, im], got {v!r}")
    return complex(float(v))


def complex_array(obj, ndim: int) -> np.ndarray:
    """Nested lists with ``[re, im]`` leaves to a complex array of rank ``ndim``."""
    if ndim == 0:
        return np.asarray(_scalar(obj))
    if not isinstance(obj, list):
        raise ValueError(f"expected a list, got {obj!r}")
    parts = [complex_array(o, ndim - 1) for o in obj]
    if not parts:
        return np.zeros((0,) * ndim, dtype=complex)
    shapes = {p.shape for p in parts}
    if len(shapes) != 1:
        raise ValueError("ragged nested list")
    return np.stack(parts)


def encode_complex(a) -> list:
    """Inverse of ``complex_array``: real entries stay numbers."""
    a = np.asarray(a)
    if a.ndim == 0:
        z = complex(a)
        return z.real if z.imag == 0 else [z.real, z.imag]
    return [encode_complex(v) for v in a]


class _Reader:
    def __init__(self, text: str, source: str):
        self.text, self.source = text, source
        self.doc = parse_object(text, source)

    def fail(self, key: str, message: str):
        raise FormatError(f"{key}: {message}", line_of(self.text, key), self.source)

    def get(self, key: str, kind=None):
        if key not in self.doc:
            raise FormatError(f"missing field {key!r}", None, self.source)
        val = self.doc[key]
        if kind is int and (isinstance(val, bool) or not isinstance(val, int)):
            self.fail(key, f"expected an integer, got {val!r}")
        return val

    def array(self, key: str, ndim: int, obj=None) -> np.ndarray:
        try:
            return complex_array(self.doc[key] if obj is None else obj, ndim)
        except (ValueError, TypeError) as exc:
            self.fail(key, str(exc))


def load_span_program(text: str, source: str = "<span program>") -> SpanProgram:
    r = _Reader(text, source)
    n, q = r.get("n", int), r.get("q", int)
    dims = r.get("part_dims")
    if not isinstance(dims, list) or not all(isinstance(d, int) and d >= 0 for d in dims):
        r.fail("part_dims", "expected a list of non-negative integers")
    subs_doc = r.get("subspaces")
    if not isinstance(subs_doc, list) or len(subs_doc) != n:
        r.fail("subspaces", f"expected {n} per-index lists")
    subspaces = []
    for j, letters in enumerate(subs_doc):
        if not isinstance(letters, list) or len(letters) != q:
            r.fail("subspaces", f"index {j} needs {q} letter bases")
        per = []
        for a, vecs in enumerate(letters):
            B = r.array("subspaces", 2, vecs)
            if B.size and B.shape[1] != dims[j]:
                r.fail("subspaces", f"basis vectors of H_({j},{a}) must have length {dims[j]}")
            per.append(B.T if B.size else np.zeros((dims[j], 0), dtype=complex))
        subspaces.append(tuple(per))
    try:
        return SpanProgram(
            n=n, q=q, part_dims=tuple(dims),
            true_dim=int(r.doc.get("true_dim", 0)), false_dim=int(r.doc.get("false_dim", 0)),
            subspaces=tuple(subspaces), A=r.array("A", 2), tau=r.array("tau", 1),
        )
    except ValueError as exc:
        key = "A" if "A has shape" in str(exc) else "subspaces" if "subspace" in str(exc) else "tau"
        r.fail(key, str(exc))


def dump_span_program(P: SpanProgram) -> str:
    doc = {
        "n": P.n, "q": P.q, "part_dims": list(P.part_dims),
        "true_dim": P.true_dim, "false_dim": P.false_dim,
        "subspaces": [[encode_complex(B.T) for B in letters] for letters in P.subspaces],
        "A": encode_complex(P.A), "tau": encode_complex(P.tau),
    }
    return json.dumps(doc, indent=1)


def load_cvs(text: str, source: str = "<converting vector set>") -> tuple[ConvertingVectorSet, GramPair]:
    r = _Reader(text, source)
    n, q, m = r.get("n", int), r.get("q", int), r.get("m", int)
    X = r.get("X")
    if not isinstance(X, list) or not all(isinstance(x, str) for x in X):
        r.fail("X", "expected a list of input strings")
    fam = {}
    for key in ("u", "v"):
        d = r.get(key)
        if not isinstance(d, dict) or set(d) != set(X):
            r.fail(key, "expected one entry per input in X")
        fam[key] = {x: r.array(key, 2, d[x]) for x in X}
    states = {}
    for key in ("rho", "sigma"):
        d = r.get(key)
        if not isinstance(d, dict) or set(d) != set(X):
            r.fail(key, "expected one state per input in X")
        states[key] = {tuple(int(c) for c in x): r.array(key, 1, d[x]) for x in X}
    try:
        cvs = ConvertingVectorSet(n, q, m, tuple(X), fam["u"], fam["v"])
    except ValueError as exc:
        r.fail("u", str(exc))
    try:
        gp = GramPair(states["rho"], states["sigma"])
    except ValueError as exc:
        r.fail("rho", str(exc))
    ok, resid = validate_cvs(cvs, gp)
    if not ok:
        r.fail("u", f"vectors do not convert rho to sigma (max residual {resid:.3g})")
    return cvs, gp


def dump_cvs(cvs: ConvertingVectorSet, gp: GramPair) -> str:
    keys = [input_str(x) for x in cvs.X]
    doc = {
        "n": cvs.n, "q": cvs.q, "m": cvs.m, "X": keys,
        "u": {k: encode_complex(cvs.u[x]) for k, x in zip(keys, cvs.X)},
        "v": {k: encode_complex(cvs.v[x]) for k, x in zip(keys, cvs.X)},
        "rho": {k: encode_complex(gp.rho[x]) for k, x in zip(keys, cvs.X)},
        "sigma": {k: encode_complex(gp.sigma[x]) for k, x in zip(keys, cvs.X)},
    }
    return json.dumps(doc, indent=1)


def load_graph(text: str, source: str = "<graph>") -> GraphSpec:
    r = _Reader(text, source)
    edges = r.get("edges")
    if not isinstance(edges, list) or not all(isinstance(e, list) and len(e) == 2 for e in edges):
        r.fail("edges", "expected a list of [u, v] pairs")
    try:
        return GraphSpec(r.get("vertices", int), tuple(map(tuple, edges)), r.get("s", int), r.get("t", int))
    except ValueError as exc:
        r.fail("edges" if "edge" in str(exc) else "s", str(exc))


def read_text(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise FormatError(f"cannot read file ({exc.strerror})", None, str(path)) from None
