"""Executable reductions from hardness constructions; they double as
test-corpus generators whose ground truth is independently checkable.

Each generator returns machines/instances plus enough structure to verify
the claimed equivalence by brute force (subset enumeration, bounded ILP) or
by handing the source formula to the solver directly.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass

from . import pa
from .model import Add, Affine, Configuration, Machine, Vector, make_machine, zero_vector
from .pa import INT, NAT, And, Exists, Forall, Formula, Implies, Not, conj, disj, term


class GenError(ValueError):
    pass


# -- linear Diophantine systems ------------------------------------------------


@dataclass(frozen=True)
class DiophantineSystem:
    """A x = b, x >= 0; rows index counters, columns index variables."""

    matrix: tuple[tuple[int, ...], ...]
    rhs: tuple[int, ...]

    def __post_init__(self) -> None:
        if any(len(row) != len(self.matrix[0]) for row in self.matrix):
            raise GenError("ragged matrix")
        if len(self.rhs) != len(self.matrix):
            raise GenError("rhs length must match row count")

    @property
    def rows(self) -> int:
        return len(self.matrix)

    @property
    def cols(self) -> int:
        return len(self.matrix[0]) if self.matrix else 0


def diophantine_to_zvas(system: DiophantineSystem) -> tuple[Machine, Configuration, Configuration]:
    """Single-state machine with one add-column self-loop per variable.

    Feasibility of the system is exactly reachability of b from the origin:
    loop counts are the variable values.
    """
    if system.rows == 0:
        raise GenError("system needs at least one row")
    effects = {}
    transitions = []
    for j in range(system.cols):
        name = f"c{j + 1}"
        effects[name] = Add(tuple(system.matrix[i][j] for i in range(system.rows)))
        transitions.append((1, name, 1))
    if not effects:
        effects["c1"] = Add(zero_vector(system.rows))
        transitions.append((1, "c1", 1))
    machine = make_machine("diophantine", "zvas", system.rows, 1, effects, transitions)
    return machine, Configuration(1, zero_vector(system.rows)), Configuration(1, tuple(system.rhs))


# -- Pi2 Presburger sentences over term CNFs ------------------------------------


@dataclass(frozen=True)
class TermSpec:
    """One comparison  a.x + z >= b.y  between universal and existential sides."""

    a: tuple[int, ...]
    z: int
    b: tuple[int, ...]


@dataclass(frozen=True)
class Pi2Cnf:
    """forall x exists y. CNF whose literals are TermSpec comparisons."""

    x_count: int
    y_count: int
    clauses: tuple[tuple[TermSpec, ...], ...]

    def __post_init__(self) -> None:
        for clause in self.clauses:
            if not clause:
                raise GenError("empty clause in Pi2 CNF")
            for t in clause:
                if len(t.a) != self.x_count or len(t.b) != self.y_count:
                    raise GenError("term arity does not match variable counts")

    def occurrences(self) -> list[TermSpec]:
        return [t for clause in self.clauses for t in clause]

    def to_formula(self) -> Formula:
        xs = [f"u{i}" for i in range(1, self.x_count + 1)]
        ys = [f"e{i}" for i in range(1, self.y_count + 1)]

        def lit(t: TermSpec) -> Formula:
            coeffs = {x: c for x, c in zip(xs, t.a)}
            for y, c in zip(ys, t.b):
                coeffs[y] = coeffs.get(y, 0) - c
            return term(coeffs, ">=", -t.z)

        body = conj([disj([lit(t) for t in clause]) for clause in self.clauses])
        inner = Exists(tuple((y, NAT) for y in ys), body) if ys else body
        return Forall(tuple((x, NAT) for x in xs), inner) if xs else inner


def pi2pa_to_inclusion(
    cnf: Pi2Cnf,
) -> tuple[Machine, Configuration, Machine, Configuration]:
    """Machines A, B with reach(A, q(0)) included in reach(B, p(0)) iff the
    sentence is valid.

    One counter per term occurrence.  A writes the absolute terms, then adds
    left-hand-side columns freely.  B adds right-hand-side columns at its
    initial state, walks one branch per clause (decrementing, via a single
    shared loop, every term of the clause except the chosen one) and finally
    bumps any counter upward to match A exactly; the chosen terms are
    matchable only upward, i.e. only when they hold.
    """
    occs = cnf.occurrences()
    d = len(occs)
    if d == 0:
        raise GenError("need at least one term occurrence")

    # machine A: q --init--> q1 with lhs-column self-loops
    effects_a = {"init": Add(tuple(t.z for t in occs))}
    transitions_a = [(1, "init", 2)]
    for j in range(cnf.x_count):
        name = f"lx{j + 1}"
        effects_a[name] = Add(tuple(t.a[j] for t in occs))
        transitions_a.append((2, name, 2))
    machine_a = make_machine("pi2-lhs", "zvass", d, 2, effects_a, transitions_a)

    # machine B: rhs loops at state 1, one branching gadget per clause
    effects_b = {"tau": Add(zero_vector(d))}
    transitions_b = []
    for j in range(cnf.y_count):
        name = f"ry{j + 1}"
        effects_b[name] = Add(tuple(t.b[j] for t in occs))
        transitions_b.append((1, name, 1))
    entry = 1
    next_state = 1
    occ_index = 0
    for c, clause in enumerate(cnf.clauses, start=1):
        clause_occs = list(range(occ_index, occ_index + len(clause)))
        occ_index += len(clause)
        exit_state = next_state + len(clause) + 1
        for t_pos, _ in enumerate(clause, start=1):
            branch = next_state + t_pos
            others = [o for o in clause_occs if o != clause_occs[t_pos - 1]]
            transitions_b.append((entry, "tau", branch))
            if others:
                name = f"d{c}_{t_pos}"
                effects_b[name] = Add(tuple(-1 if j in others else 0 for j in range(d)))
                transitions_b.append((branch, name, branch))
            transitions_b.append((branch, "tau", exit_state))
        next_state = exit_state
        entry = exit_state
    for o in range(d):
        name = f"up{o + 1}"
        effects_b[name] = Add(tuple(1 if j == o else 0 for j in range(d)))
        transitions_b.append((entry, name, entry))
    machine_b = make_machine("pi2-rhs", "zvass", d, next_state, effects_b, transitions_b)
    origin = Configuration(1, zero_vector(d))
    return machine_a, origin, machine_b, origin


# -- quantified subset sums ------------------------------------------------------


@dataclass(frozen=True)
class QsosInstance:
    """Alternating subset choices: forall S1 of M1, exists S2 of M2, ...;
    the sums must hit (k even) or miss (k odd) the target."""

    sets: tuple[tuple[int, ...], ...]
    target: int

    def __post_init__(self) -> None:
        for mset in self.sets:
            if any(v < 0 for v in mset):
                raise GenError("QSOS values must be nonnegative")
            if len(set(mset)) != len(mset):
                raise GenError("QSOS sets must not repeat values")


def _subset_sums(values: tuple[int, ...]) -> list[int]:
    sums = [0]
    for v in values:
        sums += [s + v for s in sums]
    return sums


def qsos_truth(instance: QsosInstance) -> bool:
    """Brute-force truth of the alternating subset-sum statement."""
    k = len(instance.sets)

    def rec(i: int, acc: int) -> bool:
        if i == k:
            return acc == instance.target if k % 2 == 0 else acc != instance.target
        sums = _subset_sums(instance.sets[i])
        if (i + 1) % 2 == 1:  # odd blocks choose universally
            return all(rec(i + 1, acc + s) for s in sums)
        return any(rec(i + 1, acc + s) for s in sums)

    return rec(0, 0)


@dataclass(frozen=True)
class QuantifiedSystem:
    """Quantified linear Diophantine equations A1 x1 + ... + Ak xk ~ c.

    ``guard`` (over the first, universal block) is taken as an antecedent:
    universal choices breaking their own structural equations satisfy the
    sentence vacuously.  Without it, any out-of-range universal value would
    falsify the plain conjunction reading outright.
    """

    blocks: tuple[tuple[str, int], ...]
    matrices: tuple[tuple[tuple[int, ...], ...], ...]
    target: tuple[int, ...]
    relation: str = "="
    guard: Formula | None = None

    def var(self, block: int, j: int) -> str:
        return f"q{block}_{j}"

    def to_formula(self) -> Formula:
        rows = []
        for r in range(len(self.target)):
            coeffs: dict[str, int] = {}
            for bi, matrix in enumerate(self.matrices, start=1):
                for j, c in enumerate(matrix[r], start=1):
                    if c:
                        coeffs[self.var(bi, j)] = c
            rows.append(term(coeffs, "=", self.target[r]))
        body: Formula = conj(rows) if self.relation == "=" else Not(conj(rows))
        for bi in range(len(self.blocks), 0, -1):
            quantifier, count = self.blocks[bi - 1]
            bound = tuple((self.var(bi, j), NAT) for j in range(1, count + 1))
            if quantifier == "exists":
                body = Exists(bound, body)
            else:
                if bi == 1 and self.guard is not None:
                    body = Implies(self.guard, body)
                body = Forall(bound, body)
        return body


def qsos2_to_qslde(instance: QsosInstance, encoding: str) -> QuantifiedSystem:
    """Pi2 quantified Diophantine system equivalent to a 2-block QSOS.

    ``binary`` keeps set values as matrix entries; identity blocks force 0/1
    choices and a value row sums the chosen elements.  ``unary`` replaces the
    value row by per-element binary-digit recurrences so every matrix entry
    stays in [-2, 2].
    """
    if len(instance.sets) != 2:
        raise GenError("this reduction is for two alternation blocks")
    m1, m2 = instance.sets
    p, r = len(m1), len(m2)
    target_value = instance.target
    if encoding == "binary":
        d = 1 + p + r
        a_rows = []
        b_rows = []
        a_rows.append(tuple(m1) + ())
        b_rows.append(tuple(m2) + (0,) * p + (0,) * r)
        for i in range(p):
            a_rows.append(tuple(1 if j == i else 0 for j in range(p)))
            b_rows.append((0,) * r + tuple(1 if j == i else 0 for j in range(p)) + (0,) * r)
        for i in range(r):
            a_rows.append((0,) * p)
            b_rows.append(
                tuple(1 if j == i else 0 for j in range(r)) + (0,) * p + tuple(1 if j == i else 0 for j in range(r))
            )
        target = (target_value,) + (1,) * p + (1,) * r
        system = QuantifiedSystem(
            blocks=(("forall", p), ("exists", r + p + r)),
            matrices=(tuple(a_rows), tuple(b_rows)),
            target=target,
        )
        guard = conj([term({system.var(1, j): 1}, "<=", 1) for j in range(1, p + 1)])
        return QuantifiedSystem(system.blocks, system.matrices, system.target, "=", guard)
    if encoding != "unary":
        raise GenError(f"unknown encoding {encoding!r}")
    # digit variant: variables per element are (choice, complement, digits 0..q)
    q = max((max(mset) for mset in instance.sets if mset), default=1).bit_length() - 1
    q = max(q, 0)
    width = 2 + q + 1

    def digits(value: int) -> list[int]:
        return [(value >> j) & 1 for j in range(q + 1)]

    def block_matrix(values: tuple[int, ...], rows: list[dict[int, int]]) -> tuple[tuple[int, ...], ...]:
        cols = width * len(values)
        return tuple(tuple(row.get(j, 0) for j in range(cols)) for row in rows)

    def var_offsets(i: int) -> tuple[int, int, int]:
        base = width * i
        return base, base + 1, base + 2  # choice, complement, first digit

    # row plan: value row, then per block: choice rows, then digit rows
    rows_a: list[dict[int, int]] = []
    rows_b: list[dict[int, int]] = []
    target_list: list[int] = []

    def add_row(ra: dict[int, int], rb: dict[int, int], t: int) -> None:
        rows_a.append(ra)
        rows_b.append(rb)
        target_list.append(t)

    value_a = {var_offsets(i)[2] + 0: 1 for i in range(p)}
    value_b = {var_offsets(i)[2] + 0: 1 for i in range(r)}
    add_row(value_a, value_b, target_value)
    for i in range(p):
        choice, comp, dig = var_offsets(i)
        add_row({choice: 1, comp: 1}, {}, 1)
        ds = digits(m1[i])
        add_row({dig + q: 1, choice: -ds[q]}, {}, 0)
        for j in range(q):
            add_row({dig + j: 1, dig + j + 1: -2, choice: -ds[j]}, {}, 0)
    for i in range(r):
        choice, comp, dig = var_offsets(i)
        add_row({}, {choice: 1, comp: 1}, 1)
        ds = digits(m2[i])
        add_row({}, {dig + q: 1, choice: -ds[q]}, 0)
        for j in range(q):
            add_row({}, {dig + j: 1, dig + j + 1: -2, choice: -ds[j]}, 0)
    matrix_a = block_matrix(m1, rows_a)
    matrix_b = block_matrix(m2, rows_b)
    system = QuantifiedSystem(
        blocks=(("forall", width * p), ("exists", width * r)),
        matrices=(matrix_a, matrix_b),
        target=tuple(target_list),
    )
    # the universal block's own rows (choice + digit recurrences) become the
    # guard; rows 1 + i*(q+2) .. are exactly those with empty B part
    guard_terms = []
    for row_a, row_b, t in zip(rows_a[1:], rows_b[1:], target_list[1:]):
        if row_b:
            continue
        coeffs = {system.var(1, j + 1): c for j, c in row_a.items()}
        guard_terms.append(term(coeffs, "=", t))
    guard = conj(guard_terms)
    return QuantifiedSystem(system.blocks, system.matrices, system.target, "=", guard)


# -- QBF to QSOS -----------------------------------------------------------------


@dataclass(frozen=True)
class Qbf:
    """Prenex 3-CNF with alternating blocks, outermost universal."""

    blocks: tuple[tuple[str, ...], ...]
    clauses: tuple[tuple[tuple[str, bool], ...], ...]

    def __post_init__(self) -> None:
        declared = [v for block in self.blocks for v in block]
        if len(set(declared)) != len(declared):
            raise GenError("duplicate QBF variable")
        for clause in self.clauses:
            if len(clause) != 3:
                raise GenError("every clause must have exactly 3 literals")
            for v, _ in clause:
                if v not in declared:
                    raise GenError(f"unbound QBF variable {v!r}")


def qbf_truth(qbf: Qbf) -> bool:
    def rec(i: int, assignment: dict[str, bool]) -> bool:
        if i == len(qbf.blocks):
            return all(any(assignment[v] == pos for v, pos in clause) for clause in qbf.clauses)
        options = itertools.product([False, True], repeat=len(qbf.blocks[i]))
        results = (
            rec(i + 1, {**assignment, **dict(zip(qbf.blocks[i], choice))}) for choice in options
        )
        return all(results) if (i + 1) % 2 == 1 else any(results)

    return rec(0, {})


def qbf_to_qsos(qbf: Qbf) -> QsosInstance:
    """Digit-encoded subset-sum instance, true iff the QBF is true.

    Base-10 digits: one per clause counting satisfied-literal occurrences,
    one per variable enforcing a true/false choice.  The negative-literal
    numbers and the per-clause balancing numbers (+1, +2) join the last,
    existential set; the target asks for 4 in every clause digit and 1 in
    every variable digit.  Only even alternation depth is supported, matching
    the printed construction.
    """
    k = len(qbf.blocks)
    if k == 0 or k % 2 != 0:
        raise GenError("the construction needs an even number of blocks")
    variables = [v for block in qbf.blocks for v in block]
    m = len(qbf.clauses)
    n_vars = len(variables)
    width = m + n_vars

    def number(clause_digits: dict[int, int], var_digit: int | None) -> int:
        value = 0
        for pos in range(width):
            digit = clause_digits.get(pos, 0)
            if var_digit is not None and pos == m + var_digit:
                digit += 1
            value += digit * 10 ** (width - 1 - pos)
        return value

    def literal_number(v: str, positive: bool) -> int:
        counts = {
            ci: sum(1 for lv, lp in clause if lv == v and lp == positive)
            for ci, clause in enumerate(qbf.clauses)
        }
        return number(counts, variables.index(v))

    sets: list[tuple[int, ...]] = []
    for block in qbf.blocks:
        sets.append(tuple(literal_number(v, True) for v in block))
    pool: list[int] = [literal_number(v, False) for v in variables]
    for ci in range(m):
        pool.append(number({ci: 1}, None))
        pool.append(number({ci: 2}, None))
    last = tuple(sorted(set(sets[-1]) | set(pool)))
    sets[-1] = last
    target = number({ci: 4 for ci in range(m)}, None) + sum(10 ** (n_vars - 1 - j) for j in range(n_vars))
    return QsosInstance(tuple(sets), target)


# -- PCP to an affine two-counter machine ----------------------------------------


@dataclass(frozen=True)
class PcpInstance:
    pairs: tuple[tuple[str, str], ...]

    def __post_init__(self) -> None:
        if not self.pairs:
            raise GenError("PCP instance needs at least one pair")
        for u, v in self.pairs:
            if any(c not in "01" for c in u + v):
                raise GenError("PCP words must be over {0,1}")

    def has_matching_concatenation(self, indices: tuple[int, ...]) -> bool:
        u = "".join(self.pairs[i - 1][0] for i in indices)
        v = "".join(self.pairs[i - 1][1] for i in indices)
        return u == v


def pcp_to_affine_rm(instance: PcpInstance) -> tuple[Machine, Configuration, Configuration]:
    """Two-counter affine machine reaching the origin at q_f iff the chosen
    index sequence concatenates both sides to the same word.

    Appending a digit to a counter is doubling plus the digit; the separator
    letter decrements both counters in lockstep.  Simulation only: leading
    zero digits collapse in this encoding, faithfully reproducing the printed
    machine.
    """
    effects = {
        "u0": Affine(((2, 0), (0, 1)), (0, 0)),
        "u1": Affine(((2, 0), (0, 1)), (1, 0)),
        "v0": Affine(((1, 0), (0, 2)), (0, 0)),
        "v1": Affine(((1, 0), (0, 2)), (0, 1)),
        "end": Add((-1, -1)),
    }
    transitions = [(1, "end", 2), (2, "end", 2)]
    next_state = 2
    for u, v in instance.pairs:
        word = [f"u{c}" for c in u] + [f"v{c}" for c in v]
        cur = 1
        for i, letter in enumerate(word):
            last = i == len(word) - 1
            dst = 1 if last else next_state + 1
            if not last:
                next_state += 1
            transitions.append((cur, letter, dst))
            cur = dst
    machine = make_machine("pcp", "zrm", 2, next_state, effects, transitions)
    return machine, Configuration(1, (0, 0)), Configuration(2, (0, 0))


def pcp_loop_word(instance: PcpInstance, indices: tuple[int, ...]) -> tuple[str, ...]:
    """The letters read when firing the pair loops for the given indices."""
    out: list[str] = []
    for i in indices:
        u, v = instance.pairs[i - 1]
        out.extend(f"u{c}" for c in u)
        out.extend(f"v{c}" for c in v)
    return tuple(out)


# -- random instances for batch validation ---------------------------------------


def random_diophantine(rng: random.Random, max_rows: int = 3, max_cols: int = 3) -> DiophantineSystem:
    rows = rng.randint(1, max_rows)
    cols = rng.randint(1, max_cols)
    matrix = tuple(tuple(rng.randint(-3, 3) for _ in range(cols)) for _ in range(rows))
    rhs = tuple(rng.randint(-6, 6) for _ in range(rows))
    return DiophantineSystem(matrix, rhs)


def random_qsos2(rng: random.Random, max_size: int = 3, max_value: int = 7) -> QsosInstance:
    def mset() -> tuple[int, ...]:
        size = rng.randint(0, max_size)
        return tuple(sorted(rng.sample(range(0, max_value + 1), size)))

    return QsosInstance((mset(), mset()), rng.randint(0, 2 * max_value))


def random_pi2cnf(rng: random.Random) -> Pi2Cnf:
    x_count = rng.randint(1, 2)
    y_count = rng.randint(1, 2)
    clauses = []
    for _ in range(rng.randint(1, 2)):
        terms = []
        for _ in range(rng.randint(1, 2)):
            terms.append(
                TermSpec(
                    tuple(rng.randint(-2, 2) for _ in range(x_count)),
                    rng.randint(-2, 2),
                    tuple(rng.randint(-2, 2) for _ in range(y_count)),
                )
            )
        clauses.append(tuple(terms))
    return Pi2Cnf(x_count, y_count, tuple(clauses))
