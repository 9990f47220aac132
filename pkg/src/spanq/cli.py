"""Experiment runner.

``spanq <command> config.json [--seed S] [--trials N] [--out results.csv]``

Commands: ``witness``, ``evaluate``, ``convert``, ``sweep``, ``lemma-check``,
``negate``. Each writes a CSV (header row, fixed column order, floats with 12
significant digits) and a JSON summary next to it (``<out>.summary.json``).

Config fields::

    instance   "or3" | "and2" | "st:diamond" | {"graph": {...}} |
               {"sp_file": "p.json"} | {"cvs_file": "c.json"}
    instances  list of the above (used instead of ``instance``)
    x          "all" (default), one input string, or a list of them
    delta      error tolerance for evaluation (default 0.1); sweep takes "deltas"
    eps, p     conversion error and failure probability (defaults 0.3, 0.1)
    eps_hat    list of eps_hat values for lemma-check (default [0.04, 0.01])
    alphas     list of alpha values for lemma-check (default [1, 2, 4, 8, 16])
    trials     trials per input (default 1)
    seed       base seed (default 0)
    out        CSV path (default "results.csv")

Trial ``k`` on input number ``i`` of instance number ``s`` draws from
``SeedSequence([seed, s, i, k])``, so rows do not depend on execution order.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import statistics
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .catalog import build_stconn, catalog_program
from .formats import FormatError, line_of, parse_object, load_cvs, load_graph, load_span_program, read_text
from .func_eval import EvalConfig, PhaseCheckTable, check_phase_bound, evaluate
from .linalg import InvalidInputError
from .span_program import (
    as_input,
    decided_function,
    input_str,
    max_witness_size,
    max_witness_sizes,
    negate,
    scale_normalize,
    witness,
    witness_table,
)
from .state_conversion import conversion_bounds, convert, cvs_from_span_program, normalize_cvs

COLUMNS = {
    "witness": ["instance", "x", "f", "kind", "size", "W_plus", "W_minus"],
    "evaluate": [
        "instance", "x", "trial", "f", "w", "W", "delta", "output", "correct",
        "rounds", "alpha_final", "total_queries", "breakdown", "seed",
    ],
    "convert": [
        "instance", "x", "trial", "w_plus", "w_minus", "W", "eps", "distance", "within_eps",
        "within_2eps", "alpha_stop", "used_complement", "exhausted", "total_queries", "breakdown", "seed",
    ],
    "lemma-check": ["instance", "x", "check", "alpha", "eps_hat", "value", "bound", "status"],
    "negate": ["instance", "x", "f", "w", "f_neg", "w_neg", "flipped", "no_larger"],
}
COLUMNS["sweep"] = COLUMNS["evaluate"]


class ConfigError(InvalidInputError):
    pass


@dataclass
class Instance:
    name: str
    program: object = None  # SpanProgram
    cvs: object = None
    gram: object = None

    def converting_set(self):
        if self.cvs is None:
            cvs, gp = cvs_from_span_program(self.program)
            self.cvs, self.gram = normalize_cvs(cvs), gp
        return self.cvs, self.gram


@dataclass
class ExperimentConfig:
    instances: list
    x: object = "all"
    delta: float = 0.1
    deltas: list = field(default_factory=lambda: [0.05, 0.1])
    eps: float = 0.3
    p: float = 0.1
    eps_hat: list = field(default_factory=lambda: [0.04, 0.01])
    alphas: list = field(default_factory=lambda: [1, 2, 4, 8, 16])
    trials: int = 1
    seed: int = 0
    out: str = "results.csv"


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.12g" % v
    return str(v)


def load_config(path, overrides: dict | None = None) -> ExperimentConfig:
    text = read_text(path)
    doc = parse_object(text, str(path))
    base = Path(path).resolve().parent

    def fail(key, msg):
        raise ConfigError(f"{path}:{line_of(text, key) or '?'}: {key}: {msg}")

    known = set(ExperimentConfig.__dataclass_fields__) | {"instance"}
    for key in doc:
        if key not in known:
            fail(key, "unknown field")
    if "instances" in doc:
        specs = doc["instances"]
        if not isinstance(specs, list) or not specs:
            fail("instances", "expected a non-empty list")
    elif "instance" in doc:
        specs = [doc["instance"]]
    else:
        raise ConfigError(f"{path}: missing field 'instance'")
    key = "instances" if "instances" in doc else "instance"
    instances = []
    for spec in specs:
        try:
            instances.append(_resolve(spec, base))
        except (InvalidInputError, ValueError, KeyError) as exc:
            fail(key, str(exc))
    kw = {k: doc[k] for k in doc if k not in ("instance", "instances")}
    kw.update({k: v for k, v in (overrides or {}).items() if v is not None})
    cfg = ExperimentConfig(instances=instances, **kw)
    if not isinstance(cfg.trials, int) or cfg.trials < 1:
        fail("trials", "must be a positive integer")
    if not isinstance(cfg.seed, int) or cfg.seed < 0:
        fail("seed", "must be a non-negative integer")
    for name in ("delta", "eps", "p"):
        if not 0 < float(getattr(cfg, name)) < 1:
            fail(name, "must lie in (0, 1)")
    for d in cfg.deltas:
        if not 0 < d < 1:
            fail("deltas", "every delta must lie in (0, 1)")
    for e in cfg.eps_hat:
        if not 0 < e < 1:
            fail("eps_hat", "every value must lie in (0, 1)")
    for a in cfg.alphas:
        if not a > 0:
            fail("alphas", "every alpha must be positive")
    return cfg


def _resolve(spec, base: Path) -> Instance:
    if isinstance(spec, str):
        return Instance(spec, program=catalog_program(spec))
    if not isinstance(spec, dict):
        raise InvalidInputError(f"cannot interpret instance {spec!r}")
    if "graph" in spec:
        g = load_graph(json.dumps(spec["graph"]), "graph")
        return Instance(spec.get("name", "st:custom"), program=build_stconn(g))
    if "sp_file" in spec:
        p = base / spec["sp_file"]
        return Instance(spec.get("name", Path(p).stem), program=load_span_program(read_text(p), str(p)))
    if "cvs_file" in spec:
        p = base / spec["cvs_file"]
        cvs, gp = load_cvs(read_text(p), str(p))
        return Instance(spec.get("name", Path(p).stem), cvs=cvs, gram=gp)
    raise InvalidInputError("instance object needs one of 'graph', 'sp_file', 'cvs_file'")


def _inputs(cfg: ExperimentConfig, universe, n: int, q: int) -> list:
    if cfg.x == "all":
        return list(universe)
    xs = [cfg.x] if isinstance(cfg.x, str) else list(cfg.x)
    out = [as_input(x, n, q) for x in xs]
    missing = [x for x in out if x not in set(universe)]
    if missing:
        raise ConfigError(f"x: input {input_str(missing[0])} is not in the instance's input set")
    return out


def _need_program(inst: Instance, command: str):
    if inst.program is None:
        raise ConfigError(f"{command} needs a span program instance, {inst.name} is a converting vector set")
    return inst.program


def _rng(seed: int, s: int, i: int, k: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, s, i, k]))


def cmd_witness(cfg):
    rows = []
    for inst in cfg.instances:
        P = _need_program(inst, "witness")
        table = witness_table(P)
        wp, wm = max_witness_sizes(table)
        for x in _inputs(cfg, table, P.n, P.q):
            w = table[x]
            rows.append([inst.name, input_str(x), int(w.positive), w.kind, w.size, wp, wm])
    return rows, {}


def _evaluate_rows(cfg, deltas):
    rows = []
    for s, inst in enumerate(cfg.instances):
        P = scale_normalize(_need_program(inst, "evaluate"))
        Pd = negate(P)
        W = max_witness_size(P)
        f = decided_function(P)
        table = PhaseCheckTable(P, Pd, W)
        for i, x in enumerate(_inputs(cfg, f, P.n, P.q)):
            w = witness(P, x).size
            for delta in deltas:
                ecfg = EvalConfig(delta=delta)
                for k in range(cfg.trials):
                    res = evaluate(P, Pd, W, x, ecfg, _rng(cfg.seed, s, i, k), table)
                    rows.append([
                        inst.name, input_str(x), k, f[x], w, W, delta, res.output_bit,
                        res.output_bit == f[x], res.rounds_used, res.alpha_final,
                        res.ledger.total_queries, res.ledger.as_string(), cfg.seed,
                    ])
    return rows


def _evaluate_summary(rows):
    summary = {"trials": len(rows), "error_rate": {}, "median_total_queries": {}, "median_rounds": {}}
    groups = {}
    for r in rows:
        groups.setdefault(f"{r[0]}|delta={_fmt(r[6])}", []).append(r)
    for key, rs in groups.items():
        summary["error_rate"][key] = sum(1 for r in rs if not r[8]) / len(rs)
        summary["median_total_queries"][key] = statistics.median(r[11] for r in rs)
        summary["median_rounds"][key] = statistics.median(r[9] for r in rs)
    summary["overall_error_rate"] = sum(1 for r in rows if not r[8]) / max(1, len(rows))
    return summary


def cmd_evaluate(cfg):
    rows = _evaluate_rows(cfg, [cfg.delta])
    return rows, _evaluate_summary(rows)


def cmd_sweep(cfg):
    rows = _evaluate_rows(cfg, list(cfg.deltas))
    return rows, _evaluate_summary(rows)


def cmd_convert(cfg):
    rows = []
    for s, inst in enumerate(cfg.instances):
        cvs, gp = inst.converting_set()
        cache = {}
        for i, x in enumerate(_inputs(cfg, cvs.X, cvs.n, cvs.q)):
            for k in range(cfg.trials):
                res = convert(cvs, gp, x, cfg.eps, cfg.p, _rng(cfg.seed, s, i, k), cache)
                rows.append([
                    inst.name, input_str(x), k, cvs.w_plus(x), cvs.w_minus(x), cvs.W, cfg.eps,
                    res.distance, res.distance <= cfg.eps, res.distance <= 2 * cfg.eps,
                    res.alpha_stop, res.used_complement, res.exhausted,
                    res.ledger.total_queries, res.ledger.as_string(), cfg.seed,
                ])
    summary = {
        "trials": len(rows),
        "rate_within_eps": sum(r[8] for r in rows) / max(1, len(rows)),
        "rate_within_2eps": sum(r[9] for r in rows) / max(1, len(rows)),
        "median_distance": statistics.median(r[7] for r in rows) if rows else None,
        "median_total_queries": statistics.median(r[13] for r in rows) if rows else None,
    }
    return rows, summary


def cmd_lemma_check(cfg):
    rows = []
    for inst in cfg.instances:
        if inst.program is not None:
            P = scale_normalize(inst.program)
            W = max_witness_size(P)
            f = decided_function(P)
            for x in _inputs(cfg, f, P.n, P.q):
                for alpha in cfg.alphas:
                    chk = check_phase_bound(P, x, float(alpha), W)
                    status = "pass" if chk.satisfied and chk.applies else "fail" if chk.applies else "skipped"
                    rows.append([inst.name, input_str(x), "phase_bound", alpha, "", chk.probability, chk.bound, status])
        cvs, gp = inst.converting_set()
        for x in _inputs(cfg, cvs.X, cvs.n, cvs.q):
            for eh in cfg.eps_hat:
                for alpha in cfg.alphas:
                    for b in conversion_bounds(cvs, gp, x, float(alpha), eh):
                        rows.append([inst.name, input_str(x), b.name, alpha, eh, b.value, b.bound, b.status])
    counts = {s: sum(1 for r in rows if r[7] == s) for s in ("pass", "fail", "skipped")}
    per_check = {}
    for r in rows:
        per_check.setdefault(f"{r[0]}|{r[2]}", {"pass": 0, "fail": 0, "skipped": 0})[r[7]] += 1
    return rows, {"counts": counts, "per_check": per_check, "all_passed": counts["fail"] == 0}


def cmd_negate(cfg):
    rows = []
    for inst in cfg.instances:
        P = _need_program(inst, "negate")
        Pd = negate(P)
        t, td = witness_table(P), witness_table(Pd)
        for x in _inputs(cfg, t, P.n, P.q):
            w, wd = t[x], td[x]
            rows.append([
                inst.name, input_str(x), int(w.positive), w.size, int(wd.positive), wd.size,
                w.positive != wd.positive, wd.size <= w.size + 1e-8,
            ])
    ok = all(r[6] and r[7] for r in rows)
    return rows, {"inputs": len(rows), "all_flipped_and_no_larger": ok}


COMMANDS = {
    "witness": cmd_witness,
    "evaluate": cmd_evaluate,
    "convert": cmd_convert,
    "sweep": cmd_sweep,
    "lemma-check": cmd_lemma_check,
    "negate": cmd_negate,
}


def render_csv(command: str, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS[command])
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="spanq", description="Span program query algorithm experiments.")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("config", help="experiment config (JSON)")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--trials", type=int)
    ap.add_argument("--out", help="CSV output path; '-' writes to stdout")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, {"seed": args.seed, "trials": args.trials, "out": args.out})
        rows, summary = COMMANDS[args.command](cfg)
    except (InvalidInputError, FormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    text = render_csv(args.command, rows)
    summary = {"command": args.command, "seed": cfg.seed, "rows": len(rows), **summary}
    if cfg.out == "-":
        sys.stdout.write(text)
        print(json.dumps(summary, sort_keys=True), file=sys.stderr)
    else:
        out = Path(cfg.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")
        Path(str(out) + ".summary.json").write_text(json.dumps(summary, indent=1, sort_keys=True) + "\n", encoding="utf-8")
        print(f"wrote {len(rows)} rows to {out}")
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
