"""Command-line front end: ``python -m qwcomplexity <subcommand> ...``.

Exit codes: 0 success, 1 invalid input, 2 solver non-convergence,
3 inequality violation (``verify``, ``reproduce-table1``).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace

from .bench import RunManifest, dumps, reproduce_table1, table_csv, verify_all
from .complexity import OptimizerConfig, ac_w1, c_w1, rate_bound, wasserstein_rate
from .cost import COST_CONSTANT, COST_NOTE, evaluate_schedule, experimental_cost, schedule_from_json, verify_cost_bound
from .quantum_model import (
    ChannelError,
    PureState,
    channel_from_json,
    circuit_from_json,
    state_from_json,
)
from .tensor_core import (
    NotHermitianError,
    ShapeError,
    decode_matrix,
    encode_matrix,
    operator_from_json,
)
from .w1 import SolverConfig, w1_distance, w1_norm

EXIT_OK, EXIT_INPUT, EXIT_NONCONVERGED, EXIT_VIOLATION = 0, 1, 2, 3


class InputError(Exception):
    """Raised for unreadable or invalid input files."""


def load_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def _parse(path: str, loader):
    doc = load_json(path)
    try:
        return loader(doc)
    except (KeyError, TypeError, ValueError, IndexError, ShapeError, NotHermitianError, ChannelError) as exc:
        raise InputError(f"{path}: {type(exc).__name__}: {exc}") from exc


def _threads() -> int:
    raw = os.environ.get("QW_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError as exc:
        raise InputError(f"QW_THREADS must be an integer, got {raw!r}") from exc


def _configs(args) -> tuple[SolverConfig, OptimizerConfig]:
    solver = SolverConfig(seed=args.seed)
    if args.tol is not None:
        solver = replace(solver, gap_tol=args.tol)
    if args.max_iter is not None:
        solver = replace(solver, max_iter=args.max_iter)
    opt = OptimizerConfig(seed=args.seed, solver_cfg=solver, workers=_threads())
    if args.restarts is not None:
        opt = replace(opt, restarts=args.restarts)
    return solver, opt


def _emit(args, doc: dict, text: str) -> None:
    out = dumps(doc) + "\n" if args.json else text.rstrip("\n") + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)


def _bracket_text(label: str, lower: float, upper: float, converged=None) -> str:
    flag = "" if converged is None else f" converged={str(bool(converged)).lower()}"
    return f"{label}: lower={lower:.10g} upper={upper:.10g}{flag}"


# Subcommands


def cmd_w1(args, manifest, solver, opt) -> int:
    if args.op:
        A = _parse(args.op, operator_from_json)
        res = w1_norm(A, solver)
    elif args.a and args.b:
        a = _parse(args.a, state_from_json)
        b = _parse(args.b, state_from_json)
        if a.shape != b.shape:
            raise InputError(f"state shapes differ: {a.shape} vs {b.shape}")
        res = w1_distance(a, b, solver)
    else:
        raise InputError("w1 needs --a and --b, or --op")
    doc = {"manifest": manifest, "result": res.to_json()}
    text = (f"value={res.value:.10g} (lower={res.lower:.10g} upper={res.upper:.10g} "
            f"iterations={res.iterations} converged={str(res.converged).lower()})")
    _emit(args, doc, text)
    return EXIT_OK if res.converged else EXIT_NONCONVERGED


def _complexity(args, manifest, opt, ancilla: bool) -> int:
    ch = _parse(args.channel, channel_from_json)
    if ancilla:
        est = ac_w1(ch, args.m_cap, opt)
    else:
        est = c_w1(ch, opt)
    solver = est.trace.get("solver")
    converged = True if solver is None else bool(solver["converged"])
    doc = {"manifest": manifest, "result": est.to_json(), "converged": converged}
    label = "AC_W1" if ancilla else "C_W1"
    text = _bracket_text(label, est.lower, est.upper, converged)
    if est.per_m:
        text += "\n" + "\n".join(f"  m={m}: lower={lo:.10g} upper={hi:.10g}" for m, lo, hi in est.per_m)
    _emit(args, doc, text)
    return EXIT_OK if converged else EXIT_NONCONVERGED


def cmd_complexity(args, manifest, solver, opt) -> int:
    return _complexity(args, manifest, opt, ancilla=False)


def cmd_ac_complexity(args, manifest, solver, opt) -> int:
    return _complexity(args, manifest, opt, ancilla=True)


def cmd_rate(args, manifest, solver, opt) -> int:
    psi = _parse(args.state, state_from_json)
    if not isinstance(psi, PureState):
        raise InputError("rate needs a pure state (amplitudes)")
    doc_h = load_json(args.hamiltonian)
    try:
        H = decode_matrix(doc_h["matrix"] if isinstance(doc_h, dict) else doc_h)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{args.hamiltonian}: {exc}") from exc
    support = tuple(args.support) if args.support else None
    k = len(support) if support else psi.shape.n
    if H.shape != (psi.shape.d**k,) * 2:
        raise InputError(f"Hamiltonian of shape {H.shape} does not act on {k} qudits")
    cfg = replace(solver, gap_tol=args.tol if args.tol is not None else 1e-8)
    r = wasserstein_rate(psi, H, support, cfg)
    loose, tight = rate_bound(H, k, psi.shape.d)
    lo, hi = r.brackets[-1]
    doc = {"manifest": manifest, "rate": r.value, "quotients": list(r.quotients), "steps": list(r.steps),
           "brackets": [list(b) for b in r.brackets], "converged": r.converged,
           "bound": loose, "bound_tight": tight}
    text = (f"rate={r.value:.10g} (finest quotient bracket [{lo:.10g}, {hi:.10g}] "
            f"converged={str(r.converged).lower()}); bound 2*sqrt(2)*k*||H|| = {loose:.10g}")
    _emit(args, doc, text)
    return EXIT_OK if r.converged else EXIT_NONCONVERGED


def cmd_cost(args, manifest, solver, opt) -> int:
    sched = _parse(args.schedule, schedule_from_json)
    rep = evaluate_schedule(sched)
    chk = verify_cost_bound(sched, opt)
    est = chk.estimate
    doc = {"manifest": manifest, "cost": rep.cost, "realized_unitary": encode_matrix(rep.realized_unitary),
           "c_w1": {"lower": est.lower, "upper": est.upper},
           "check": {"lhs": chk.lhs, "rhs": chk.rhs, "margin": chk.margin, "pass": chk.passed},
           "constant": COST_CONSTANT, "note": COST_NOTE}
    text = (f"cost={rep.cost:.10g}\n{_bracket_text('C_W1', est.lower, est.upper)}\n"
            f"cost >= C_W1/(4*sqrt(2)): {chk.lhs:.10g} >= {chk.rhs:.10g} "
            f"[{'pass' if chk.passed else 'FAIL'}]\nnote: {COST_NOTE}")
    _emit(args, doc, text)
    return EXIT_OK


def cmd_expcost(args, manifest, solver, opt) -> int:
    seq = _parse(args.circuit, circuit_from_json)
    rep = experimental_cost(seq)
    doc = {"manifest": manifest, "total": rep.total,
           "per_gate": [{"k": g.k, "E": g.E, "T": g.T, "R": g.R} for g in rep.per_gate],
           "notes": list(rep.notes)}
    lines = [f"R={rep.total:.12g} (exact per-gate sum, {len(rep.per_gate)} in sequence)"]
    lines += [f"  gate {i}: k={g.k} E={g.E:.10g} T={g.T:.10g} R={g.R:.10g}" for i, g in enumerate(rep.per_gate)]
    lines += [f"note: {n}" for n in rep.notes]
    _emit(args, doc, "\n".join(lines))
    return EXIT_OK


def cmd_verify(args, manifest, solver, opt) -> int:
    for path in args.channel or ():
        _parse(path, channel_from_json)
    suite_cfg = None if args.restarts is None else replace(opt, restarts=args.restarts, local_steps=25)
    progress = (lambda s: print(s, file=sys.stderr)) if args.verbose else None
    report = verify_all(args.seed, args.instances, suite_cfg, progress)
    doc = {"manifest": manifest, **report}
    lines = [f"{s['suite']}: {s['instances']} checks, {s['violations']} violations" for s in report["suites"]]
    lines.append(f"total violations: {report['violations']}")
    _emit(args, doc, "\n".join(lines))
    return EXIT_OK if report["violations"] == 0 else EXIT_VIOLATION


def cmd_reproduce(args, manifest, solver, opt) -> int:
    rows = reproduce_table1(opt, fast=args.fast)
    csv_text = table_csv(rows)
    if args.json:
        doc = {"manifest": manifest, "rows": [r.__dict__ for r in rows]}
        payload = dumps(doc) + "\n"
    else:
        payload = csv_text
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(payload)
        with open(args.out + ".manifest.json", "w", encoding="utf-8") as fh:
            fh.write(dumps(manifest) + "\n")
    else:
        sys.stdout.write(payload)
    return EXIT_OK if all(r.passed for r in rows) else EXIT_VIOLATION


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=None, help="solver certified-gap tolerance")
    common.add_argument("--max-iter", type=int, default=None)
    common.add_argument("--restarts", type=int, default=None)
    common.add_argument("--m-cap", type=int, default=None)
    common.add_argument("--json", action="store_true", help="emit canonical JSON")
    common.add_argument("--out", default=None, help="write output to this path")

    p = argparse.ArgumentParser(prog="qwcomplexity", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("w1", parents=[common], help="W1 distance of two states or W1 norm of an operator")
    s.add_argument("--a")
    s.add_argument("--b")
    s.add_argument("--op")
    s.set_defaults(func=cmd_w1)
    for name, fn in (("complexity", cmd_complexity), ("ac-complexity", cmd_ac_complexity)):
        s = sub.add_parser(name, parents=[common])
        s.add_argument("--channel", required=True)
        s.set_defaults(func=fn)
    s = sub.add_parser("rate", parents=[common])
    s.add_argument("--state", required=True)
    s.add_argument("--hamiltonian", required=True)
    s.add_argument("--support", type=int, nargs="*")
    s.set_defaults(func=cmd_rate)
    s = sub.add_parser("cost", parents=[common])
    s.add_argument("--schedule", required=True)
    s.set_defaults(func=cmd_cost)
    s = sub.add_parser("expcost", parents=[common])
    s.add_argument("--circuit", required=True)
    s.set_defaults(func=cmd_expcost)
    s = sub.add_parser("verify", parents=[common])
    s.add_argument("--channel", action="append", help="channel fixture to validate first (repeatable)")
    s.add_argument("--instances", type=int, default=100)
    s.add_argument("--verbose", action="store_true")
    s.set_defaults(func=cmd_verify)
    s = sub.add_parser("reproduce-table1", parents=[common])
    s.add_argument("--fast", action="store_true", help="skip the four-qubit ancilla rows")
    s.set_defaults(func=cmd_reproduce)
    return p


def run_cli(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        solver, opt = _configs(args)
        tolerances = {"gap_tol": solver.gap_tol, "feas_tol": solver.feas_tol}
        manifest = RunManifest.build(args.seed, opt, tolerances, argv).to_json()
        # worker count never changes results; keep it out of the manifest
        manifest["optimizer"].pop("workers", None)
        return args.func(args, manifest, solver, opt)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, ShapeError, NotHermitianError, ChannelError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main() -> int:
    return run_cli()
