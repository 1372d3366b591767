"""Command-line surface: check, emit-smt, simulate, oracle, gen, stats.

Exit codes: 0 = yes, 1 = no, 2 = unknown, >= 10 usage or processing error.
JSON output follows schema version 1; the text form is not a stability
surface.
"""

from __future__ import annotations

import argparse
import json
import random
import shlex
import sys
from pathlib import Path

from . import backend, encode, gen, machine_io, oracle, pa
from .backend import InclusionQuery, ReachQuery, SolverConfig, Verdict
from .model import Configuration, Machine, MachineError, normalize

EXIT_YES = 0
EXIT_NO = 1
EXIT_UNKNOWN = 2
EXIT_USAGE = 10
EXIT_ERROR = 11


def report(verdict: Verdict, fmt: str = "text") -> str:
    """Render a verdict; witnesses were re-simulated by decide() already."""
    if fmt == "json":
        payload = {
            "schema": 1,
            "answer": verdict.answer,
            "witness": None
            if verdict.witness is None
            else [{"state": c.state, "counters": list(c.counters)} for c in verdict.witness.configs],
            "word": None if verdict.witness is None else list(verdict.witness.word),
            "counterexample": None if verdict.counterexample is None else list(verdict.counterexample),
            "reason": verdict.reason,
            "stats": verdict.stats,
        }
        return json.dumps(payload, sort_keys=True)
    lines = [verdict.answer]
    if verdict.witness is not None:
        lines.append("witness:")
        for c in verdict.witness.configs:
            lines.append(f"  {c}")
        if verdict.witness.word:
            lines.append("word: " + " ".join(verdict.witness.word))
    if verdict.counterexample is not None:
        lines.append("counterexample: " + ",".join(str(x) for x in verdict.counterexample))
    if verdict.reason:
        lines.append("reason: " + verdict.reason)
    return "\n".join(lines)


def _exit_code(verdict: Verdict) -> int:
    return {"yes": EXIT_YES, "no": EXIT_NO, "unknown": EXIT_UNKNOWN}[verdict.answer]


def _solver_config(args) -> SolverConfig | None:
    timeout = args.timeout_ms
    if getattr(args, "solver_cmd", None):
        return SolverConfig(tuple(shlex.split(args.solver_cmd)), timeout)
    cfg = backend.default_solver_config(timeout)
    return cfg


def _load_query(machine: Machine, args, mode: str) -> ReachQuery:
    src = machine_io.parse_configuration(args.src, machine.dim)
    dst = machine_io.parse_configuration(args.dst, machine.dim)
    return ReachQuery(src, dst, mode)


def _cmd_check(args) -> int:
    config = _solver_config(args)
    if args.batch:
        entries = json.loads(Path(args.batch).read_text(encoding="utf-8"))
        codes = []
        outputs = []
        for entry in entries:
            verdict = _run_query_entry(entry, Path(args.batch).parent, config)
            outputs.append(report(verdict, args.format))
            codes.append(_exit_code(verdict))
        print("\n".join(outputs))
        return max(codes) if codes else EXIT_YES
    if args.query:
        entry = json.loads(Path(args.query).read_text(encoding="utf-8"))
        verdict = _run_query_entry(entry, Path(args.query).parent, config)
        print(report(verdict, args.format))
        return _exit_code(verdict)
    kind = args.kind
    if kind is None or args.machine is None:
        print("error: check needs a kind and a machine file (or --query/--batch)", file=sys.stderr)
        return EXIT_USAGE
    machine = machine_io.parse_machine_file(args.machine)
    if kind == "incl":
        other = machine_io.parse_machine_file(args.machine_b)
        src_a = machine_io.parse_configuration(args.src, machine.dim)
        src_b = machine_io.parse_configuration(args.src_b, other.dim)
        verdict = backend.decide(machine, InclusionQuery(other, src_a, src_b), config)
    else:
        verdict = backend.decide(machine, _load_query(machine, args, kind), config)
    print(report(verdict, args.format))
    return _exit_code(verdict)


def _run_query_entry(entry: dict, base: Path, config: SolverConfig | None) -> Verdict:
    kind = entry["kind"]
    machine = machine_io.parse_machine_file(base / entry["machine"])
    if kind == "incl":
        other = machine_io.parse_machine_file(base / entry["machine_b"])
        query = InclusionQuery(
            other,
            machine_io.parse_configuration(entry["from"], machine.dim),
            machine_io.parse_configuration(entry["from_b"], other.dim),
        )
        return backend.decide(machine, query, config)
    query = ReachQuery(
        machine_io.parse_configuration(entry["from"], machine.dim),
        machine_io.parse_configuration(entry["to"], machine.dim),
        kind,
    )
    return backend.decide(machine, query, config)


def _cmd_emit_smt(args) -> int:
    machine = machine_io.parse_machine_file(args.machine)
    norm = machine if machine.is_normal_form() else normalize(machine)
    if args.kind == "incl":
        other = machine_io.parse_machine_file(args.machine_b)
        other_n = other if other.is_normal_form() else normalize(other)
        formula = encode.encode_inclusion(
            norm,
            machine_io.parse_configuration(args.src, machine.dim),
            other_n,
            machine_io.parse_configuration(args.src_b, other.dim),
        )
    else:
        src = machine_io.parse_configuration(args.src, machine.dim)
        dst = machine_io.parse_configuration(args.dst, machine.dim)
        formula = encode.encode_query(norm, src, dst, args.kind)
    sys.stdout.write(backend.to_smtlib2(formula))
    return EXIT_YES


def _cmd_simulate(args) -> int:
    machine = machine_io.parse_machine_file(args.machine)
    src = machine_io.parse_configuration(args.src, machine.dim)
    from .model import run as run_word

    result = run_word(machine, src, tuple(args.word))
    for c in sorted(result, key=lambda c: (c.state, c.counters)):
        print(c)
    return EXIT_YES if result else EXIT_NO


def _cmd_oracle(args) -> int:
    machine = machine_io.parse_machine_file(args.machine)
    src = machine_io.parse_configuration(args.src, machine.dim)
    dst = machine_io.parse_configuration(args.dst, machine.dim)
    answer = oracle.bfs(machine, src, dst, args.kind, args.max_len)
    print(f"status: {answer.status}")
    print(f"explored: {answer.explored}")
    if answer.witness is not None:
        print("witness: " + " ".join(answer.witness.word))
    return EXIT_YES if answer.found else EXIT_NO


def _cmd_stats(args) -> int:
    machine = machine_io.parse_machine_file(args.machine)
    norm = machine if machine.is_normal_form() else normalize(machine)
    nfa = encode.nfa_of_machine(norm)
    rows = encode.psi_size_table(nfa, list(range(max(1, norm.dim), args.max_k + 1)))
    print(f"{'k':>3} {'|B|':>6} {'unary':>10} {'unary/(k^2|B|)':>16}")
    for k, b, s in rows:
        print(f"{k:>3} {b:>6} {s:>10} {s / (k * k * b):>16.3f}")
    return EXIT_YES


def _write_note(path: Path, lines: list[str]) -> None:
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _cmd_gen(args) -> int:
    rng = random.Random(args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    kind = args.kind
    if kind == "diophantine":
        system = gen.random_diophantine(rng)
        machine, src, dst = gen.diophantine_to_zvas(system)
        (out / "machine.zvas").write_text(machine_io.format_machine(machine), encoding="utf-8")
        (out / "query.json").write_text(
            json.dumps(
                {"schema": 1, "kind": "reach", "machine": "machine.zvas", "from": str(src), "to": str(dst)},
                sort_keys=True,
            ),
            encoding="utf-8",
        )
        solution = oracle.ilp_feasible(system.matrix, tuple(system.rhs), bound=10)
        _write_note(
            out / "ground-truth.txt",
            [
                f"system: {system.matrix} x = {system.rhs}, x >= 0",
                f"ILP brute force (components <= 10): {'feasible ' + str(solution) if solution is not None else 'nothing found within bound'}",
                "feasible implies reachable; a reachability 'no' implies the brute force finds nothing.",
            ],
        )
    elif kind == "pi2pa":
        cnf = gen.random_pi2cnf(rng)
        machine_a, src_a, machine_b, src_b = gen.pi2pa_to_inclusion(cnf)
        (out / "lhs.zvass").write_text(machine_io.format_machine(machine_a), encoding="utf-8")
        (out / "rhs.zvass").write_text(machine_io.format_machine(machine_b), encoding="utf-8")
        (out / "query.json").write_text(
            json.dumps(
                {
                    "schema": 1,
                    "kind": "incl",
                    "machine": "lhs.zvass",
                    "machine_b": "rhs.zvass",
                    "from": str(src_a),
                    "from_b": str(src_b),
                },
                sort_keys=True,
            ),
            encoding="utf-8",
        )
        (out / "sentence.smt2").write_text(backend.to_smtlib2(cnf.to_formula()), encoding="utf-8")
        _write_note(
            out / "ground-truth.txt",
            [
                f"source sentence: {pa.pretty(cnf.to_formula())}",
                "sentence.smt2 asks the solver for the source sentence directly;",
                "its verdict must match the inclusion verdict on the machine pair.",
            ],
        )
    elif kind == "qsos2":
        instance = gen.random_qsos2(rng)
        system = gen.qsos2_to_qslde(instance, args.encoding)
        (out / "system.smt2").write_text(backend.to_smtlib2(system.to_formula()), encoding="utf-8")
        truth = gen.qsos_truth(instance)
        _write_note(
            out / "ground-truth.txt",
            [
                f"QSOS2 instance: sets={instance.sets} target={instance.target}",
                f"subset brute force: {'true' if truth else 'false'}",
                f"encoding: {args.encoding}; solver verdict on system.smt2 must match.",
            ],
        )
    elif kind == "qbf":
        qbf = gen.Qbf((("x",), ("y",)), ((("x", True), ("y", True), ("y", True)), (("x", False), ("y", True), ("y", True))))
        instance = gen.qbf_to_qsos(qbf)
        (out / "qsos.json").write_text(
            json.dumps({"sets": [list(s) for s in instance.sets], "target": instance.target}, sort_keys=True),
            encoding="utf-8",
        )
        _write_note(
            out / "ground-truth.txt",
            [
                "QBF: forall x exists y. (x|y|y) & (~x|y|y)",
                f"QBF brute force: {gen.qbf_truth(qbf)}",
                f"QSOS subset brute force: {gen.qsos_truth(instance)} (must match)",
            ],
        )
    elif kind == "pcp":
        instance = gen.PcpInstance((("0", "100"), ("01", "00"), ("110", "11")))
        machine, src, dst = gen.pcp_to_affine_rm(instance)
        (out / "machine.zrm").write_text(machine_io.format_machine(machine), encoding="utf-8")
        (out / "query.json").write_text(
            json.dumps(
                {"schema": 1, "kind": "simulate-only", "machine": "machine.zrm", "from": str(src), "to": str(dst)},
                sort_keys=True,
            ),
            encoding="utf-8",
        )
        _write_note(
            out / "ground-truth.txt",
            [
                "classic PCP instance u=(0,01,110), v=(100,00,11); solution (3,2,3,1):",
                "both concatenations equal 110011100 (string check), so simulating the",
                "pair loops then firing 'end' 412 times reaches the origin at state 2.",
                "decide() rejects this machine: general affine transforms are simulation-only.",
            ],
        )
    else:
        raise GenErrorForCli(f"unknown generator kind {kind!r}")
    print(f"wrote {kind} instance to {out}")
    return EXIT_YES


class GenErrorForCli(ValueError):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="intvass", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_solver_opts(p) -> None:
        p.add_argument("--solver-cmd", help="solver command line (default: autodetect)")
        p.add_argument("--timeout-ms", type=int, default=120_000)
        p.add_argument("--format", choices=["text", "json"], default="text")

    p_check = sub.add_parser("check", help="decide reach/cover/incl via the solver")
    p_check.add_argument("kind", nargs="?", choices=["reach", "cover", "incl"])
    p_check.add_argument("machine", nargs="?")
    p_check.add_argument("machine_b", nargs="?")
    p_check.add_argument("--from", dest="src")
    p_check.add_argument("--to", dest="dst")
    p_check.add_argument("--from-b", dest="src_b")
    p_check.add_argument("--query", help="query file (json)")
    p_check.add_argument("--batch", help="json list of queries")
    add_solver_opts(p_check)
    p_check.set_defaults(func=_cmd_check)

    p_emit = sub.add_parser("emit-smt", help="print the SMT-LIB2 script for a query")
    p_emit.add_argument("kind", choices=["reach", "cover", "incl"])
    p_emit.add_argument("machine")
    p_emit.add_argument("machine_b", nargs="?")
    p_emit.add_argument("--from", dest="src", required=True)
    p_emit.add_argument("--to", dest="dst")
    p_emit.add_argument("--from-b", dest="src_b")
    p_emit.set_defaults(func=_cmd_emit_smt)

    p_sim = sub.add_parser("simulate", help="run a word and print the end configurations")
    p_sim.add_argument("machine")
    p_sim.add_argument("--from", dest="src", required=True)
    p_sim.add_argument("word", nargs="*")
    p_sim.set_defaults(func=_cmd_simulate)

    p_oracle = sub.add_parser("oracle", help="bounded brute-force search")
    p_oracle.add_argument("kind", choices=["reach", "cover"])
    p_oracle.add_argument("machine")
    p_oracle.add_argument("--from", dest="src", required=True)
    p_oracle.add_argument("--to", dest="dst", required=True)
    p_oracle.add_argument("--max-len", type=int, default=8)
    p_oracle.set_defaults(func=_cmd_oracle)

    p_gen = sub.add_parser("gen", help="generate an instance with ground-truth notes")
    p_gen.add_argument("kind", choices=["diophantine", "pi2pa", "qsos2", "qbf", "pcp"])
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--out", default=".")
    p_gen.add_argument("--encoding", choices=["binary", "unary"], default="binary")
    p_gen.set_defaults(func=_cmd_gen)

    p_stats = sub.add_parser("stats", help="formula size statistics")
    stats_sub = p_stats.add_subparsers(dest="stats_kind", required=True)
    p_psi = stats_sub.add_parser("psi-size", help="k versus unary size of the Parikh formula")
    p_psi.add_argument("machine")
    p_psi.add_argument("--max-k", type=int, default=6)
    p_psi.set_defaults(func=_cmd_stats)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (machine_io.ParseError, MachineError, gen.GenError, encode.EncodeError, GenErrorForCli, pa.FormulaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (backend.SolverError, backend.WitnessError, backend.FlowError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def main_entry() -> None:
    sys.exit(main(sys.argv[1:]))
