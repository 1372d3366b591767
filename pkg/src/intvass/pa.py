"""Presburger arithmetic: terms, formulas, evaluation and bounded search.

Terms are linear constraints ``sum(coeff * var) op const``.  The comparator
set includes =, !=, <, <=, > as sugar over >= plus boolean structure; all of
them evaluate directly, and :func:`ge_canonical` rewrites a quantifier-free
formula into >=-only form for cross-checking.

Variables are plain strings.  Sorts ("nat" or "int") are attached at binder
sites; free variables default to "nat" unless a sort map says otherwise.
Empty conjunction is true, empty disjunction is false.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

NAT = "nat"
INT = "int"

Assignment = dict[str, int]


class FormulaError(ValueError):
    pass


class MissingVariable(FormulaError):
    pass


class NotExistential(FormulaError):
    pass


@dataclass(frozen=True)
class Term:
    coeffs: tuple[tuple[str, int], ...]
    op: str
    const: int

    def __post_init__(self) -> None:
        if self.op not in (">=", "<=", "=", "!=", ">", "<"):
            raise FormulaError(f"unknown comparator {self.op!r}")

    def value(self, assignment: Mapping[str, int]) -> int:
        total = 0
        for var, coeff in self.coeffs:
            if var not in assignment:
                raise MissingVariable(f"no value for variable {var!r}")
            total += coeff * assignment[var]
        return total


@dataclass(frozen=True)
class And:
    parts: tuple["Formula", ...]


@dataclass(frozen=True)
class Or:
    parts: tuple["Formula", ...]


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class Implies:
    lhs: "Formula"
    rhs: "Formula"


@dataclass(frozen=True)
class Exists:
    bound: tuple[tuple[str, str], ...]  # (variable, sort)
    body: "Formula"


@dataclass(frozen=True)
class Forall:
    bound: tuple[tuple[str, str], ...]
    body: "Formula"


Formula = Term | And | Or | Not | Implies | Exists | Forall

TRUE = And(())
FALSE = Or(())


def term(coeffs: Mapping[str, int] | Iterable[tuple[str, int]], op: str, const: int) -> Term:
    """Build a term; coefficients are merged, zero coefficients dropped."""
    merged: dict[str, int] = {}
    items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
    for var, c in items:
        merged[var] = merged.get(var, 0) + c
    cleaned = tuple(sorted((v, c) for v, c in merged.items() if c != 0))
    return Term(cleaned, op, const)


def var_eq(var: str, value: int) -> Term:
    return term({var: 1}, "=", value)


def vars_equal(a: str, b: str) -> Term:
    return term({a: 1, b: -1}, "=", 0)


def conj(parts: Iterable[Formula]) -> Formula:
    return And(tuple(parts))


def disj(parts: Iterable[Formula]) -> Formula:
    return Or(tuple(parts))


def exists(bound: Iterable[tuple[str, str]], body: Formula) -> Formula:
    bound = tuple(bound)
    return Exists(bound, body) if bound else body


def forall(bound: Iterable[tuple[str, str]], body: Formula) -> Formula:
    bound = tuple(bound)
    return Forall(bound, body) if bound else body


# -- evaluation --------------------------------------------------------------


def evaluate(formula: Formula, assignment: Mapping[str, int]) -> bool:
    """Truth value of a quantifier-free formula under a total assignment."""
    if isinstance(formula, Term):
        lhs = formula.value(assignment)
        c = formula.const
        return {
            ">=": lhs >= c,
            "<=": lhs <= c,
            "=": lhs == c,
            "!=": lhs != c,
            ">": lhs > c,
            "<": lhs < c,
        }[formula.op]
    if isinstance(formula, And):
        return all(evaluate(p, assignment) for p in formula.parts)
    if isinstance(formula, Or):
        return any(evaluate(p, assignment) for p in formula.parts)
    if isinstance(formula, Not):
        return not evaluate(formula.body, assignment)
    if isinstance(formula, Implies):
        return (not evaluate(formula.lhs, assignment)) or evaluate(formula.rhs, assignment)
    raise FormulaError("evaluate expects a quantifier-free formula")


def free_variables(formula: Formula) -> set[str]:
    if isinstance(formula, Term):
        return {v for v, _ in formula.coeffs}
    if isinstance(formula, (And, Or)):
        out: set[str] = set()
        for p in formula.parts:
            out |= free_variables(p)
        return out
    if isinstance(formula, Not):
        return free_variables(formula.body)
    if isinstance(formula, Implies):
        return free_variables(formula.lhs) | free_variables(formula.rhs)
    return free_variables(formula.body) - {v for v, _ in formula.bound}


def ge_canonical(formula: Formula) -> Formula:
    """Rewrite every comparator into >= form (sugar elimination)."""
    if isinstance(formula, Term):
        neg = tuple((v, -c) for v, c in formula.coeffs)
        if formula.op == ">=":
            return formula
        if formula.op == ">":
            return Term(formula.coeffs, ">=", formula.const + 1)
        if formula.op == "<=":
            return Term(neg, ">=", -formula.const)
        if formula.op == "<":
            return Term(neg, ">=", -formula.const + 1)
        if formula.op == "=":
            return And((Term(formula.coeffs, ">=", formula.const), Term(neg, ">=", -formula.const)))
        return Or((Term(formula.coeffs, ">=", formula.const + 1), Term(neg, ">=", -formula.const + 1)))
    if isinstance(formula, And):
        return And(tuple(ge_canonical(p) for p in formula.parts))
    if isinstance(formula, Or):
        return Or(tuple(ge_canonical(p) for p in formula.parts))
    if isinstance(formula, Not):
        return Not(ge_canonical(formula.body))
    if isinstance(formula, Implies):
        return Implies(ge_canonical(formula.lhs), ge_canonical(formula.rhs))
    if isinstance(formula, Exists):
        return Exists(formula.bound, ge_canonical(formula.body))
    return Forall(formula.bound, ge_canonical(formula.body))


# -- existential prefix handling ---------------------------------------------


class _Namer:
    def __init__(self, taken: set[str]):
        self.taken = set(taken)
        self.counter = 0

    def fresh(self, base: str) -> str:
        name = base
        while name in self.taken:
            self.counter += 1
            name = f"{base}~{self.counter}"
        self.taken.add(name)
        return name


def _rename(formula: Formula, mapping: Mapping[str, str]) -> Formula:
    if isinstance(formula, Term):
        return Term(tuple(sorted((mapping.get(v, v), c) for v, c in formula.coeffs)), formula.op, formula.const)
    if isinstance(formula, And):
        return And(tuple(_rename(p, mapping) for p in formula.parts))
    if isinstance(formula, Or):
        return Or(tuple(_rename(p, mapping) for p in formula.parts))
    if isinstance(formula, Not):
        return Not(_rename(formula.body, mapping))
    if isinstance(formula, Implies):
        return Implies(_rename(formula.lhs, mapping), _rename(formula.rhs, mapping))
    inner = {k: v for k, v in mapping.items() if k not in {b for b, _ in formula.bound}}
    body = _rename(formula.body, inner)
    if isinstance(formula, Exists):
        return Exists(formula.bound, body)
    return Forall(formula.bound, body)


def hoist_existentials(formula: Formula, namer: _Namer | None = None) -> tuple[list[tuple[str, str]], Formula]:
    """Pull every existential through and/or to the front, renaming clashes.

    Raises :class:`NotExistential` if a universal quantifier occurs, or an
    existential occurs under negation or on the left of an implication.
    """
    if namer is None:
        namer = _Namer(free_variables(formula))

    def walk(f: Formula, positive: bool) -> tuple[list[tuple[str, str]], Formula]:
        if isinstance(f, Term):
            return [], f
        if isinstance(f, (And, Or)):
            bound: list[tuple[str, str]] = []
            parts = []
            for p in f.parts:
                b, q = walk(p, positive)
                bound.extend(b)
                parts.append(q)
            return bound, (And(tuple(parts)) if isinstance(f, And) else Or(tuple(parts)))
        if isinstance(f, Not):
            b, q = walk(f.body, not positive)
            if b:
                raise NotExistential("existential under negation")
            return [], Not(q)
        if isinstance(f, Implies):
            bl, ql = walk(f.lhs, not positive)
            if bl:
                raise NotExistential("existential on the left of an implication")
            br, qr = walk(f.rhs, positive)
            return br, Implies(ql, qr)
        if isinstance(f, Forall):
            raise NotExistential("universal quantifier in an existential formula")
        if not positive:
            raise NotExistential("existential under negation")
        renaming = {}
        fresh_bound = []
        for v, sort in f.bound:
            nv = namer.fresh(v)
            if nv != v:
                renaming[v] = nv
            fresh_bound.append((nv, sort))
        body = _rename(f.body, renaming) if renaming else f.body
        b, q = walk(body, positive)
        return fresh_bound + b, q

    return walk(formula, True)


def is_existential(formula: Formula) -> bool:
    try:
        hoist_existentials(formula)
        return True
    except NotExistential:
        return False


@dataclass(frozen=True)
class NoneWithinBound:
    """Explicit 'no assignment within the bound' token; not an unsat claim."""

    bound: int


def sat_bounded(
    formula: Formula,
    bound: int,
    free_sorts: Mapping[str, str] | None = None,
) -> Assignment | NoneWithinBound:
    """Brute-force search for a satisfying assignment with bounded values.

    Natural variables range over [0, bound], integer ones over [-bound,
    bound].  The formula must be existential; its prefix is stripped into the
    searched variables.  Only suitable for small formulas.
    """
    sorts = dict(free_sorts or {})
    bound_vars, matrix = hoist_existentials(formula)
    variables = sorted(free_variables(formula)) + [v for v, _ in bound_vars]
    for v, sort in bound_vars:
        sorts[v] = sort
    ranges = []
    for v in variables:
        sort = sorts.get(v, NAT)
        ranges.append(range(0, bound + 1) if sort == NAT else range(-bound, bound + 1))
    for values in itertools.product(*ranges):
        assignment = dict(zip(variables, values))
        if evaluate(matrix, assignment):
            return assignment
    return NoneWithinBound(bound)


def to_prenex_pi2(formula: Formula) -> Formula:
    """Prenex form of ``not (exists x. psi_a and not psi_b)``.

    Produces ``forall x,u. exists z. (mat_a -> mat_b)`` where u and z are the
    hoisted existential prefixes of psi_a and psi_b.
    """
    if not isinstance(formula, Not) or not isinstance(formula.body, Exists):
        raise FormulaError("expected shape: not (exists x. psi_a and not psi_b)")
    outer = formula.body
    if not isinstance(outer.body, And) or len(outer.body.parts) != 2 or not isinstance(outer.body.parts[1], Not):
        raise FormulaError("expected shape: not (exists x. psi_a and not psi_b)")
    psi_a = outer.body.parts[0]
    psi_b = outer.body.parts[1].body
    namer = _Namer(free_variables(formula) | {v for v, _ in outer.bound})
    bound_a, mat_a = hoist_existentials(psi_a, namer)
    bound_b, mat_b = hoist_existentials(psi_b, namer)
    return forall(tuple(outer.bound) + tuple(bound_a), exists(bound_b, Implies(mat_a, mat_b)))


# -- size metrics ------------------------------------------------------------


def size(formula: Formula, convention: str = "nodes") -> int:
    """Formula size.

    ``nodes``: one per variable occurrence, constant and comparator, plus one
    per connective/quantifier node and bound variable.  ``unary``: same, but
    a number c costs ``abs(c) + 1`` symbols (unary encoding of numbers).
    """
    if convention not in ("nodes", "unary"):
        raise FormulaError(f"unknown size convention {convention!r}")
    unary = convention == "unary"

    def num(c: int) -> int:
        return abs(c) + 1 if unary else 1

    def walk(f: Formula) -> int:
        if isinstance(f, Term):
            # one symbol per variable occurrence (plus its coefficient in
            # unary), the constant, and the comparator
            per_var = sum(num(c) for _, c in f.coeffs) if unary else len(f.coeffs)
            return per_var + num(f.const) + 1
        if isinstance(f, (And, Or)):
            return 1 + sum(walk(p) for p in f.parts)
        if isinstance(f, Not):
            return 1 + walk(f.body)
        if isinstance(f, Implies):
            return 1 + walk(f.lhs) + walk(f.rhs)
        return 1 + len(f.bound) + walk(f.body)

    return walk(formula)


def pretty(formula: Formula) -> str:
    """Deterministic parenthesized rendering, stable across runs."""
    if isinstance(formula, Term):
        if not formula.coeffs:
            lhs = "0"
        else:
            bits = []
            for v, c in formula.coeffs:
                if c == 1:
                    bits.append(f"+ {v}")
                elif c == -1:
                    bits.append(f"- {v}")
                elif c < 0:
                    bits.append(f"- {-c}·{v}")
                else:
                    bits.append(f"+ {c}·{v}")
            lhs = " ".join(bits)
            lhs = lhs[2:] if lhs.startswith("+ ") else "-" + lhs[2:]
        return f"({lhs} {formula.op} {formula.const})"
    if isinstance(formula, And):
        return "true" if not formula.parts else "(" + " ∧ ".join(pretty(p) for p in formula.parts) + ")"
    if isinstance(formula, Or):
        return "false" if not formula.parts else "(" + " ∨ ".join(pretty(p) for p in formula.parts) + ")"
    if isinstance(formula, Not):
        return f"¬{pretty(formula.body)}"
    if isinstance(formula, Implies):
        return f"({pretty(formula.lhs)} → {pretty(formula.rhs)})"
    q = "∃" if isinstance(formula, Exists) else "∀"
    binder = ",".join(f"{v}:{s}" for v, s in formula.bound)
    return f"({q}{binder}. {pretty(formula.body)})"


def all_assignments(variables: list[str], lo: int, hi: int) -> Iterator[Assignment]:
    """Every assignment of the variables over [lo, hi]; test helper."""
    for values in itertools.product(range(lo, hi + 1), repeat=len(variables)):
        yield dict(zip(variables, values))
