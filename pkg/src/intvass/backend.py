"""SMT-LIB2 emission, solver subprocess drivers and witness reconstruction.

The emitted scripts stick to SMT-LIB 2.6 core plus LIA and never rely on
solver-specific behavior beyond standard sat/unsat answers and define-fun
model output.  The solver command is configurable (``INTVASS_SOLVER``
environment variable or ``--solver-cmd``); discovery falls back from a native
``z3 -in`` to the z3 WASM build driven through a bundled Node shim.

A sat model of a reachability query is turned back into a run: per segment
the flow values give edge multiplicities, an Eulerian path (Hierholzer,
ties broken by ascending transition id) realizes them, and the segments are
joined by the reset transitions the state formula guessed.  Every witness is
re-simulated before a yes verdict leaves this module.
"""

from __future__ import annotations

import importlib.resources
import os
import queue
import shlex
import shutil
import subprocess
import threading
import time
from dataclasses import dataclass, field

from . import pa
from .encode import (
    EncodeError,
    VarNames,
    encode_inclusion,
    encode_query,
    inclusion_refutation,
    nfa_of_machine,
    reachability_membership,
)
from .model import (
    Configuration,
    Machine,
    MachineError,
    Run,
    Transition,
    Vector,
    normalize,
    simulate_transitions,
)
from .pa import INT, NAT, And, Exists, Forall, Formula, Implies, Not, Or, Term

# -- s-expressions -----------------------------------------------------------


class SexprError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at offset {position})")
        self.position = position


def parse_sexprs(text: str) -> list:
    """Parse a sequence of s-expressions into nested lists of str/int atoms."""
    stack: list[list] = [[]]
    token = ""
    pos = 0

    def flush(at: int) -> None:
        nonlocal token
        if token:
            try:
                stack[-1].append(int(token))
            except ValueError:
                stack[-1].append(token)
            token = ""

    in_comment = False
    for pos, ch in enumerate(text):
        if in_comment:
            if ch == "\n":
                in_comment = False
            continue
        if ch == ";":
            in_comment = True
            flush(pos)
        elif ch == "(":
            flush(pos)
            stack.append([])
        elif ch == ")":
            flush(pos)
            if len(stack) == 1:
                raise SexprError("unbalanced closing parenthesis", pos)
            done = stack.pop()
            stack[-1].append(done)
        elif ch.isspace():
            flush(pos)
        else:
            token += ch
    flush(len(text))
    if len(stack) != 1:
        raise SexprError("unbalanced opening parenthesis", len(text))
    return stack[0]


class ModelParseError(ValueError):
    pass


def _int_of_value(expr) -> int:
    if isinstance(expr, int):
        return expr
    if isinstance(expr, list) and len(expr) == 2 and expr[0] == "-":
        return -_int_of_value(expr[1])
    raise ModelParseError(f"expected an integer value, got {expr!r}")


def parse_model(text: str) -> dict[str, int]:
    """Variable assignment from ``(get-model)`` output (define-fun bindings)."""
    exprs = parse_sexprs(text)
    if not exprs:
        raise ModelParseError("empty model output")
    body = exprs[0]
    if not isinstance(body, list):
        raise ModelParseError(f"model is not a list: {body!r}")
    entries = body[1:] if body and body[0] == "model" else body
    out: dict[str, int] = {}
    for entry in entries:
        if not (isinstance(entry, list) and len(entry) >= 5 and entry[0] == "define-fun"):
            raise ModelParseError(f"unexpected model entry {entry!r}")
        name, args, sort, value = entry[1], entry[2], entry[3], entry[4]
        if args != [] or sort != "Int":
            continue  # uninterpreted helpers; LIA models carry only 0-ary Ints
        out[str(name)] = _int_of_value(value)
    return out


def format_model(assignment: dict[str, int]) -> str:
    """Inverse of :func:`parse_model`, used by the round-trip tests."""
    lines = ["("]
    for name in sorted(assignment):
        v = assignment[name]
        value = str(v) if v >= 0 else f"(- {-v})"
        lines.append(f"  (define-fun {name} () Int {value})")
    lines.append(")")
    return "\n".join(lines)


# -- SMT-LIB2 emission --------------------------------------------------------


def _shallow_hoist(formula: Formula) -> tuple[list[tuple[str, str]], Formula]:
    """Hoist existential binders along the top-level exists/and spine."""
    namer = pa._Namer(pa.free_variables(formula))
    bound: list[tuple[str, str]] = []

    def walk(f: Formula) -> Formula:
        if isinstance(f, Exists):
            renaming = {}
            for v, sort in f.bound:
                nv = namer.fresh(v)
                if nv != v:
                    renaming[v] = nv
                bound.append((nv, sort))
            body = pa._rename(f.body, renaming) if renaming else f.body
            return walk(body)
        if isinstance(f, And):
            return And(tuple(walk(p) for p in f.parts))
        return f

    return bound, walk(formula)


def _emit_linear(coeffs: tuple[tuple[str, int], ...]) -> str:
    if not coeffs:
        return "0"
    pieces = []
    for var, c in coeffs:
        if c == 1:
            pieces.append(var)
        else:
            cs = str(c) if c >= 0 else f"(- {-c})"
            pieces.append(f"(* {cs} {var})")
    return pieces[0] if len(pieces) == 1 else "(+ " + " ".join(pieces) + ")"


def _emit_const(c: int) -> str:
    return str(c) if c >= 0 else f"(- {-c})"


def emit_formula(formula: Formula) -> str:
    if isinstance(formula, Term):
        lhs = _emit_linear(formula.coeffs)
        rhs = _emit_const(formula.const)
        if formula.op == "!=":
            return f"(not (= {lhs} {rhs}))"
        op = {"=": "=", ">=": ">=", "<=": "<=", ">": ">", "<": "<"}[formula.op]
        return f"({op} {lhs} {rhs})"
    if isinstance(formula, And):
        if not formula.parts:
            return "true"
        return "(and " + " ".join(emit_formula(p) for p in formula.parts) + ")"
    if isinstance(formula, Or):
        if not formula.parts:
            return "false"
        return "(or " + " ".join(emit_formula(p) for p in formula.parts) + ")"
    if isinstance(formula, Not):
        return f"(not {emit_formula(formula.body)})"
    if isinstance(formula, Implies):
        return f"(=> {emit_formula(formula.lhs)} {emit_formula(formula.rhs)})"
    if isinstance(formula, (Exists, Forall)):
        binder = " ".join(f"({v} Int)" for v, _ in formula.bound)
        guards = [f"(>= {v} 0)" for v, sort in formula.bound if sort == NAT]
        body = emit_formula(formula.body)
        if isinstance(formula, Exists):
            inner = body if not guards else "(and " + " ".join(guards + [body]) + ")"
            return f"(exists ({binder}) {inner})"
        if guards:
            guard = guards[0] if len(guards) == 1 else "(and " + " ".join(guards) + ")"
            body = f"(=> {guard} {body})"
        return f"(forall ({binder}) {body})"
    raise pa.FormulaError(f"cannot emit {formula!r}")


def _has_quantifier(formula: Formula) -> bool:
    if isinstance(formula, (Exists, Forall)):
        return True
    if isinstance(formula, (And, Or)):
        return any(_has_quantifier(p) for p in formula.parts)
    if isinstance(formula, Not):
        return _has_quantifier(formula.body)
    if isinstance(formula, Implies):
        return _has_quantifier(formula.lhs) or _has_quantifier(formula.rhs)
    return False


def to_smtlib2(
    formula: Formula,
    free_sorts: dict[str, str] | None = None,
    body_only: bool = False,
) -> str:
    """Deterministic SMT-LIB2 script for the formula.

    Top-level existentials are hoisted into declarations (natural-sorted
    variables get an explicit nonnegativity assertion); free variables are
    declared with the sorts from ``free_sorts`` (default natural).  With
    ``body_only`` the set-logic/check-sat/get-model framing is omitted so the
    text can be fed into a running session.
    """
    sorts = dict(free_sorts or {})
    bound, matrix = _shallow_hoist(formula)
    declarations = [(v, sorts.get(v, NAT)) for v in sorted(pa.free_variables(formula))]
    declarations += bound
    lines: list[str] = []
    quantified = _has_quantifier(matrix)
    if not body_only:
        lines.append(f"(set-logic {'LIA' if quantified else 'QF_LIA'})")
    for v, sort in declarations:
        lines.append(f"(declare-const {v} Int)")
        if sort == NAT:
            lines.append(f"(assert (>= {v} 0))")
    lines.append(f"(assert {emit_formula(matrix)})")
    if not body_only:
        lines.append("(check-sat)")
        if declarations:
            lines.append("(get-model)")
    return "\n".join(lines) + "\n"


# -- solver configuration and invocation --------------------------------------


class SolverError(RuntimeError):
    """Process failure or unparseable solver output (distinct from unknown)."""


@dataclass(frozen=True)
class SolverConfig:
    command: tuple[str, ...]
    timeout_ms: int = 120_000
    env: tuple[tuple[str, str], ...] = ()

    def environment(self) -> dict[str, str]:
        merged = dict(os.environ)
        merged.update(dict(self.env))
        return merged


@dataclass
class SolverResult:
    status: str  # sat | unsat | unknown
    model: dict[str, int] | None
    diagnostics: str = ""


_CACHED_DEFAULT: list[SolverConfig | None] = []


def shim_path() -> str:
    return str(importlib.resources.files("intvass").joinpath("data/z3_wasm_shim.js"))


def _node_module_roots() -> list[str]:
    roots = [p for p in os.environ.get("NODE_PATH", "").split(os.pathsep) if p]
    try:
        out = subprocess.run(
            ["npm", "root", "-g"], capture_output=True, text=True, timeout=30
        )
        if out.returncode == 0 and out.stdout.strip():
            roots.append(out.stdout.strip())
    except (OSError, subprocess.TimeoutExpired):
        pass
    return roots


def default_solver_config(timeout_ms: int = 120_000) -> SolverConfig:
    """Locate an SMT-LIB2 solver: $INTVASS_SOLVER, a z3 binary, or the WASM shim."""
    if _CACHED_DEFAULT:
        base = _CACHED_DEFAULT[0]
        if base is None:
            raise SolverError("no SMT solver found (set INTVASS_SOLVER or install z3)")
        return SolverConfig(base.command, timeout_ms, base.env)
    override = os.environ.get("INTVASS_SOLVER")
    if override:
        cfg = SolverConfig(tuple(shlex.split(override)), timeout_ms)
        _CACHED_DEFAULT.append(cfg)
        return cfg
    z3 = shutil.which("z3")
    if z3:
        cfg = SolverConfig((z3, "-in"), timeout_ms)
        _CACHED_DEFAULT.append(cfg)
        return cfg
    node = shutil.which("node")
    if node:
        for root in _node_module_roots():
            if os.path.isdir(os.path.join(root, "z3-solver")):
                cfg = SolverConfig((node, shim_path()), timeout_ms, (("NODE_PATH", root),))
                _CACHED_DEFAULT.append(cfg)
                return cfg
    _CACHED_DEFAULT.append(None)
    raise SolverError("no SMT solver found (set INTVASS_SOLVER or install z3)")


def solver_available() -> bool:
    try:
        default_solver_config()
        return True
    except SolverError:
        return False


def invoke(script: str, config: SolverConfig | None = None) -> SolverResult:
    """Run one solver process on a complete script and parse its verdict."""
    config = config or default_solver_config()
    try:
        proc = subprocess.run(
            list(config.command),
            input=script + "(exit)\n",
            capture_output=True,
            text=True,
            timeout=config.timeout_ms / 1000.0,
            env=config.environment(),
        )
    except subprocess.TimeoutExpired:
        return SolverResult("unknown", None, f"timeout after {config.timeout_ms} ms")
    except OSError as exc:
        raise SolverError(f"could not start solver {config.command}: {exc}") from exc
    return _parse_solver_output(proc.stdout, proc.stderr, want_model="(get-model)" in script)


def _parse_solver_output(stdout: str, stderr: str, want_model: bool) -> SolverResult:
    lines = [ln.strip() for ln in stdout.splitlines()]
    lines = [ln for ln in lines if ln and ln != "success"]
    status = None
    rest_index = 0
    for i, ln in enumerate(lines):
        if ln in ("sat", "unsat", "unknown"):
            status = ln
            rest_index = i + 1
            break
        if ln.startswith("(error"):
            raise SolverError(f"solver error: {ln}")
    if status is None:
        raise SolverError(f"unparseable solver output: {stdout!r} / stderr: {stderr[-500:]!r}")
    model = None
    if status == "sat" and want_model:
        rest = "\n".join(lines[rest_index:])
        if rest.strip():
            model = parse_model(rest)
    return SolverResult(status, model, stderr.strip())


class SolverSession:
    """One long-lived solver process driven through the print-success protocol."""

    def __init__(self, config: SolverConfig | None = None):
        self.config = config or default_solver_config()
        try:
            self.proc = subprocess.Popen(
                list(self.config.command),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
                text=True,
                env=self.config.environment(),
            )
        except OSError as exc:
            raise SolverError(f"could not start solver {self.config.command}: {exc}") from exc
        # a reader thread decouples us from pipe buffering, letting reads
        # time out without risking a deadlock on partially buffered lines
        self._lines: queue.Queue[str | None] = queue.Queue()
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()
        self.command("(set-option :print-success true)")
        self.command("(set-logic LIA)")

    def _pump(self) -> None:
        assert self.proc.stdout is not None
        for line in self.proc.stdout:
            self._lines.put(line)
        self._lines.put(None)

    def _read_line(self) -> str:
        deadline = time.monotonic() + self.config.timeout_ms / 1000.0
        while True:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                self.close()
                raise SolverError("session timed out waiting for solver output")
            try:
                item = self._lines.get(timeout=min(remaining, 1.0))
            except queue.Empty:
                continue
            if item is None:
                raise SolverError("solver process closed its output")
            if item.strip():
                return item.strip()

    def _send(self, text: str) -> None:
        assert self.proc.stdin is not None
        try:
            self.proc.stdin.write(text + "\n")
            self.proc.stdin.flush()
        except BrokenPipeError as exc:
            raise SolverError("solver process is gone") from exc

    def command(self, text: str) -> None:
        """Send one command expected to answer success."""
        self._send(text)
        reply = self._read_line()
        if reply != "success":
            raise SolverError(f"solver rejected {text!r}: {reply}")

    def add_script(self, body: str) -> None:
        """Send a body-only script (one command per line), pipelined."""
        commands = [ln for ln in body.splitlines() if ln.strip()]
        if not commands:
            return
        self._send("\n".join(commands))
        for cmd in commands:
            reply = self._read_line()
            if reply != "success":
                raise SolverError(f"solver rejected {cmd!r}: {reply}")

    def check_sat(self) -> str:
        self._send("(check-sat)")
        reply = self._read_line()
        if reply not in ("sat", "unsat", "unknown"):
            raise SolverError(f"unexpected check-sat answer: {reply}")
        return reply

    def get_model(self) -> dict[str, int]:
        self._send("(get-model)")
        chunks: list[str] = []
        depth = 0
        while True:
            line = self._read_line()
            if line.startswith("(error"):
                raise SolverError(f"get-model failed: {line}")
            chunks.append(line)
            depth += line.count("(") - line.count(")")
            if depth <= 0:
                break
        return parse_model("\n".join(chunks))

    def push(self) -> None:
        self.command("(push 1)")

    def pop(self) -> None:
        self.command("(pop 1)")

    def close(self) -> None:
        if self.proc.poll() is None:
            try:
                if self.proc.stdin is not None:
                    self.proc.stdin.close()
            except OSError:
                pass
            try:
                self.proc.wait(timeout=2)
            except subprocess.TimeoutExpired:
                self.proc.kill()

    def __enter__(self) -> "SolverSession":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def solve(self, formula: Formula, want_model: bool = True) -> SolverResult:
        """Push, assert, check, optionally model, pop -- one pipelined write."""
        body = to_smtlib2(formula, body_only=True)
        commands = ["(push 1)"] + [ln for ln in body.splitlines() if ln.strip()]
        self._send("\n".join(commands) + "\n(check-sat)")
        try:
            for cmd in commands:
                reply = self._read_line()
                if reply != "success":
                    raise SolverError(f"solver rejected {cmd!r}: {reply}")
            status = self._read_line()
            if status not in ("sat", "unsat", "unknown"):
                raise SolverError(f"unexpected check-sat answer: {status}")
            model = None
            if status == "sat" and want_model:
                model = self.get_model()
            return SolverResult(status, model)
        finally:
            self.pop()


def solve_formula(
    formula: Formula,
    config: SolverConfig | None = None,
    session: SolverSession | None = None,
    want_model: bool = True,
) -> SolverResult:
    if session is not None:
        return session.solve(formula, want_model)
    return invoke(to_smtlib2(formula), config)


# -- witnesses ----------------------------------------------------------------


class FlowError(ValueError):
    pass


class WitnessError(RuntimeError):
    """A sat model failed to reconstruct or re-simulate; never ignored."""


@dataclass(frozen=True)
class FlowWitness:
    """Per-segment transition multiplicities with endpoints, from a model."""

    padding: int
    sigma: tuple[int, ...]
    endpoints: tuple[tuple[int, int], ...]
    flows: tuple[dict[int, int], ...]


def witness_from_model(machine: Machine, model: dict[str, int], names: VarNames | None = None) -> FlowWitness:
    names = names or VarNames()
    nfa = nfa_of_machine(machine)
    k = machine.dim
    padding = model.get(names.padding, 0)
    sigma = tuple(model.get(names.sigma(i), 0) for i in range(1, k + 1))
    endpoints = tuple((model.get(names.src(i), 0), model.get(names.tgt(i), 0)) for i in range(k + 1))
    flows = tuple(
        {
            tid: model.get(names.flow(i, tid), 0)
            for tid in range(len(nfa.transitions))
            if model.get(names.flow(i, tid), 0) > 0
        }
        for i in range(k + 1)
    )
    return FlowWitness(padding, sigma, endpoints, flows)


def _eulerian_path(
    transitions: tuple[Transition, ...], flow: dict[int, int], start: int, end: int
) -> list[int]:
    """Transition ids realizing the flow as a path from start to end.

    Hierholzer with ascending-id tie-breaking; raises FlowError when the flow
    is inconsistent or disconnected.
    """
    if not flow:
        if start != end:
            raise FlowError(f"empty flow cannot move from {start} to {end}")
        return []
    remaining = dict(flow)
    out_edges: dict[int, list[int]] = {}
    for tid in sorted(flow):
        out_edges.setdefault(transitions[tid].src, []).append(tid)

    path: list[int] = []
    stack: list[tuple[int, int | None]] = [(start, None)]  # (state, incoming tid)
    while stack:
        state, _ = stack[-1]
        candidates = out_edges.get(state, [])
        chosen = None
        for tid in candidates:
            if remaining.get(tid, 0) > 0:
                chosen = tid
                break
        if chosen is None:
            _, tid = stack.pop()
            if tid is not None:
                path.append(tid)
        else:
            remaining[chosen] -= 1
            stack.append((transitions[chosen].dst, chosen))
    if any(v > 0 for v in remaining.values()):
        raise FlowError("flow is disconnected: leftover edge multiplicities")
    path.reverse()
    state = start
    for tid in path:
        if transitions[tid].src != state:
            raise FlowError("flow is not consistent with an Eulerian path")
        state = transitions[tid].dst
    if state != end:
        raise FlowError(f"Eulerian path ends in {state}, expected {end}")
    return path


def flows_to_run(machine: Machine, witness: FlowWitness, src: Configuration) -> Run:
    """Join per-segment Eulerian paths with the guessed reset transitions."""
    if not machine.is_normal_form():
        raise FlowError("witness reconstruction needs the normal-form machine")
    nfa = nfa_of_machine(machine)
    k = machine.dim
    p = witness.padding
    for i in range(p):
        if witness.flows[i]:
            raise FlowError(f"dummy segment {i} carries flow")
    if witness.endpoints[p][0] != src.state:
        raise FlowError("witness does not start at the source state")
    sequence: list[int] = []
    joins: list[Transition] = []
    trans_ids: list[Transition | int] = []
    for i in range(p, k + 1):
        s_i, t_i = witness.endpoints[i]
        if i > p:
            letter = f"r{witness.sigma[i - 1]}"
            prev_t = witness.endpoints[i - 1][1]
            options = [
                t for t in nfa.transitions if t.src == prev_t and t.dst == s_i and t.letter == letter
            ]
            if not options:
                raise FlowError(f"no joining transition ({prev_t}, {letter}, {s_i})")
            trans_ids.append(options[0])
        for tid in _eulerian_path(nfa.transitions, witness.flows[i], s_i, t_i):
            trans_ids.append(tid)
    steps = [nfa.transitions[t] if isinstance(t, int) else t for t in trans_ids]
    return simulate_transitions(machine, src, steps)


# -- verdicts ------------------------------------------------------------------


@dataclass(frozen=True)
class ReachQuery:
    src: Configuration
    dst: Configuration
    mode: str = "reach"  # reach | cover


@dataclass(frozen=True)
class InclusionQuery:
    machine_b: Machine
    src_a: Configuration
    src_b: Configuration


@dataclass
class Verdict:
    answer: str  # yes | no | unknown
    witness: Run | None = None
    counterexample: Vector | None = None
    reason: str = ""
    stats: dict = field(default_factory=dict)


def _prepare(machine: Machine) -> Machine:
    if machine.mclass == "zrm":
        raise MachineError("decide rejects zrm machines (general affine transforms)")
    return machine if machine.is_normal_form() else normalize(machine)


def decide(
    machine: Machine,
    query: ReachQuery | InclusionQuery,
    config: SolverConfig | None = None,
    session: SolverSession | None = None,
) -> Verdict:
    """Encode, solve and (for yes answers) reconstruct and re-check a witness.

    Witness runs live in the normal form of the machine; their endpoints are
    original states.  A yes verdict is only produced after the reconstructed
    run simulates to the queried target (reach) or above it (cover); failures
    raise :class:`WitnessError` instead of being reported as yes.
    """
    started = time.monotonic()
    if isinstance(query, InclusionQuery):
        return _decide_inclusion(machine, query, config, session, started)
    norm = _prepare(machine)
    if not (1 <= query.src.state <= machine.num_states and 1 <= query.dst.state <= machine.num_states):
        raise MachineError("query mentions unknown states")
    formula = encode_query(norm, query.src, query.dst, query.mode)
    result = solve_formula(formula, config, session)
    stats = {"solver_ms": int((time.monotonic() - started) * 1000)}
    if result.status == "unknown":
        return Verdict("unknown", reason=result.diagnostics or "solver returned unknown", stats=stats)
    if result.status == "unsat":
        return Verdict("no", stats=stats)
    if result.model is None:
        raise WitnessError("sat without a model")
    witness = witness_from_model(norm, result.model)
    run = flows_to_run(norm, witness, query.src)
    final = run.configs[-1]
    if query.mode == "reach":
        ok = final.state == query.dst.state and final.counters == query.dst.counters
    else:
        ok = final.state == query.dst.state and all(
            a >= b for a, b in zip(final.counters, query.dst.counters)
        )
    if not ok:
        raise WitnessError(f"reconstructed run ends at {final}, query was {query.dst} ({query.mode})")
    stats["witness_length"] = len(run.transitions)
    return Verdict("yes", witness=run, stats=stats)


def _decide_inclusion(
    machine_a: Machine,
    query: InclusionQuery,
    config: SolverConfig | None,
    session: SolverSession | None,
    started: float,
) -> Verdict:
    norm_a = _prepare(machine_a)
    norm_b = _prepare(query.machine_b)
    if machine_a.dim != query.machine_b.dim:
        raise EncodeError("inclusion needs machines of equal dimension")
    sentence = encode_inclusion(norm_a, query.src_a, norm_b, query.src_b)
    result = solve_formula(sentence, config, session, want_model=False)
    stats = {"solver_ms": int((time.monotonic() - started) * 1000)}
    if result.status == "unknown":
        return Verdict("unknown", reason=result.diagnostics or "solver returned unknown", stats=stats)
    if result.status == "sat":
        return Verdict("yes", stats=stats)
    cex = _find_counterexample(norm_a, query.src_a, norm_b, query.src_b, config, session)
    stats["confirmed"] = True
    return Verdict("no", counterexample=cex, stats=stats)


def _refutation_sorts(dim: int) -> dict[str, str]:
    return {f"x{i}": INT for i in range(1, dim + 1)}


def _find_counterexample(
    machine_a: Machine,
    src_a: Configuration,
    machine_b: Machine,
    src_b: Configuration,
    config: SolverConfig | None,
    session: SolverSession | None,
) -> Vector:
    d = machine_a.dim
    x_vars = tuple(f"x{i}" for i in range(1, d + 1))

    def solve_refutation(max_norm: int | None):
        body = inclusion_refutation(machine_a, src_a, machine_b, src_b, max_norm)
        closed = Exists(tuple((x, INT) for x in x_vars), body)
        return solve_formula(closed, config, session)

    base = solve_refutation(None)
    if base.status != "sat" or base.model is None:
        raise WitnessError("inclusion refuted but no counterexample model found")
    vec = tuple(base.model.get(x, 0) for x in x_vars)
    # shrink to the least infinity-norm witness so tiny instances give the
    # canonical counterexample
    hi = max((abs(v) for v in vec), default=0)
    lo = 0
    best = vec
    while lo < hi:
        mid = (lo + hi) // 2
        probe = solve_refutation(mid)
        if probe.status == "sat" and probe.model is not None:
            best = tuple(probe.model.get(x, 0) for x in x_vars)
            hi = max(abs(v) for v in best) if best else 0
            hi = min(hi, mid)
        else:
            lo = mid + 1
    vec = best
    member_a = _membership_formula(machine_a, src_a, vec, "A_")
    member_b = _membership_formula(machine_b, src_b, vec, "B_")
    in_a = solve_formula(member_a, config, session, want_model=False)
    in_b = solve_formula(member_b, config, session, want_model=False)
    if in_a.status != "sat" or in_b.status != "unsat":
        raise WitnessError(
            f"counterexample {vec} failed confirmation: in A: {in_a.status}, in B: {in_b.status}"
        )
    return vec


def _membership_formula(machine: Machine, src: Configuration, vec: Vector, prefix: str) -> Formula:
    x_vars = tuple(f"cx{i}" for i in range(1, machine.dim + 1))
    member = reachability_membership(machine, src, x_vars, prefix)
    eqs = [pa.var_eq(x, v) for x, v in zip(x_vars, vec)]
    return Exists(tuple((x, INT) for x in x_vars), And(tuple(eqs + [member])))


def membership_checker(machine: Machine, src: Configuration, config: SolverConfig | None = None):
    """Callable deciding x in reach(machine, src) by one existential query."""
    norm = _prepare(machine)

    def check(vec: Vector) -> bool:
        res = solve_formula(_membership_formula(norm, src, vec, "M_"), config, want_model=False)
        if res.status == "unknown":
            raise SolverError("membership query returned unknown")
        return res.status == "sat"

    return check
