"""Existential Presburger encodings of runs, reachability and inclusion.

The centerpiece is ``psi_gpi``: for an automaton over a monitored alphabet it
builds an existential formula whose models, projected to the free variables
(alpha, sigma), are exactly the generalized Parikh images of the accepted
language.  Per segment of the decomposition it carries one flow variable per
transition plus guessed segment endpoints; flow consistency and connectivity
are the Eulerian-path conditions, connectivity via per-state distance
variables (a state with positive in-flow needs a positive-flow in-edge from a
state of strictly smaller distance, with the segment source at distance 0).

``phi_counters`` turns an image plus start vector into end counters through
guarded partial sums, ``phi_reach`` glues the two, and ``encode_query`` /
``encode_inclusion`` close everything into solver-ready sentences.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import pa
from .model import (
    Add,
    Affine,
    Configuration,
    Machine,
    Transform,
    Transition,
    _diagonal_mask,
    make_machine,
    transform_offset,
    zero_vector,
)
from .parikh import MonitoredAlphabet, machine_alphabet
from .pa import INT, NAT, And, Exists, Formula, Implies, Not, Or, conj, disj, term, var_eq, vars_equal


class EncodeError(ValueError):
    pass


@dataclass(frozen=True)
class Nfa:
    """Automaton view used by the encodings; transition ids are positions."""

    num_states: int
    alphabet: MonitoredAlphabet
    transitions: tuple[Transition, ...]
    initial: int
    finals: tuple[int, ...]

    def letter_id(self, letter: str) -> int:
        letters = self.alphabet.plain + self.alphabet.monitored
        return letters.index(letter) + 1

    def size(self) -> int:
        """Encoding size |B|: states + alphabet + transitions."""
        return self.num_states + self.alphabet.n + self.alphabet.k + len(self.transitions)


def nfa_of_machine(machine: Machine, initial: int = 1, finals: tuple[int, ...] | None = None) -> Nfa:
    if finals is None:
        finals = tuple(range(1, machine.num_states + 1))
    return Nfa(
        num_states=machine.num_states,
        alphabet=machine_alphabet(machine),
        transitions=machine.sorted_transitions(),
        initial=initial,
        finals=finals,
    )


class VarNames:
    """Deterministic variable names; a prefix keeps machines apart."""

    def __init__(self, prefix: str = ""):
        self.prefix = prefix

    def sigma(self, i: int) -> str:
        return f"{self.prefix}sig{i}"

    @property
    def padding(self) -> str:
        return f"{self.prefix}pad"

    def src(self, i: int) -> str:
        return f"{self.prefix}s{i}"

    def tgt(self, i: int) -> str:
        return f"{self.prefix}t{i}"

    def flow(self, segment: int, tid: int) -> str:
        return f"{self.prefix}x{segment}_{tid}"

    def dist(self, segment: int, state: int) -> str:
        return f"{self.prefix}z{segment}_{state}"

    def alpha(self, segment: int, letter: int) -> str:
        return f"{self.prefix}al{segment}_{letter}"

    def beta(self, coord: int, step: int) -> str:
        return f"{self.prefix}be{coord}_{step}"

    def nu(self, coord: int) -> str:
        return f"{self.prefix}nu{coord}"

    def vsrc(self, coord: int) -> str:
        return f"{self.prefix}v{coord}"

    def vdst(self, coord: int) -> str:
        return f"{self.prefix}w{coord}"

    @property
    def qsrc(self) -> str:
        return f"{self.prefix}qs"

    @property
    def qdst(self) -> str:
        return f"{self.prefix}qt"


def phi_perm(k: int, names: VarNames | None = None) -> Formula:
    """sigma_1..sigma_k form a permutation of [k]."""
    names = names or VarNames()
    parts = []
    for i in range(1, k + 1):
        bits: list[Formula] = [
            term({names.sigma(i): 1}, ">=", 1),
            term({names.sigma(i): 1}, "<=", k),
        ]
        for j in range(1, k + 1):
            if j != i:
                bits.append(term({names.sigma(i): 1, names.sigma(j): -1}, "!=", 0))
        parts.append(conj(bits))
    return conj(parts)


def phi_delta_monitored(nfa: Nfa, t_var: str, sigma_var: str, s_var: str) -> Formula:
    """Transition relation as a disjunction; the letter is n + sigma."""
    n = nfa.alphabet.n
    options = []
    for t in nfa.transitions:
        lid = nfa.letter_id(t.letter)
        options.append(conj([var_eq(t_var, t.src), term({sigma_var: 1}, "=", lid - n), var_eq(s_var, t.dst)]))
    return disj(options)


def phi_states(
    nfa: Nfa,
    names: VarNames | None = None,
    initial_var: str | None = None,
    final_var: str | None = None,
) -> Formula:
    """Segment endpoints: dummies collapse, real segments join via resets.

    With ``initial_var``/``final_var`` the designated states become free
    variables instead of the automaton's constants.
    """
    names = names or VarNames()
    k = nfa.alphabet.k
    pad = names.padding
    parts: list[Formula] = []
    if initial_var is None:
        parts.append(var_eq(names.src(0), nfa.initial))
    else:
        parts.append(vars_equal(names.src(0), initial_var))
    if final_var is None:
        parts.append(disj([var_eq(names.tgt(k), q) for q in nfa.finals]))
    else:
        parts.append(vars_equal(names.tgt(k), final_var))
    for i in range(1, k + 1):
        collapse = conj(
            [vars_equal(names.src(i - 1), names.tgt(i - 1)), vars_equal(names.tgt(i - 1), names.src(i))]
        )
        join = phi_delta_monitored(nfa, names.tgt(i - 1), names.sigma(i), names.src(i))
        parts.append(Implies(term({pad: 1}, ">=", i), collapse))  # i <= p
        parts.append(Implies(term({pad: 1}, "<=", i - 1), join))  # p < i
    return conj(parts)


def _connected_flow_parts(
    nfa: Nfa, names: VarNames, segment: int
) -> tuple[list[tuple[str, str]], list[Formula]]:
    """Matrix of the consistent-connected-flow formula plus its distance binders."""
    s_var, t_var = names.src(segment), names.tgt(segment)
    m = nfa.num_states
    parts: list[Formula] = [
        term({s_var: 1}, ">=", 1),
        term({s_var: 1}, "<=", m),
        term({t_var: 1}, ">=", 1),
        term({t_var: 1}, "<=", m),
    ]
    in_edges: dict[int, list[int]] = {q: [] for q in range(1, m + 1)}
    balance: dict[int, dict[str, int]] = {q: {} for q in range(1, m + 1)}
    for tid, t in enumerate(nfa.transitions):
        x = names.flow(segment, tid)
        in_edges[t.dst].append(tid)
        balance[t.dst][x] = balance[t.dst].get(x, 0) + 1
        balance[t.src][x] = balance[t.src].get(x, 0) - 1
    for q in range(1, m + 1):
        delta = balance[q]
        # in - out = h(q): 0 off the endpoints, -1 at s, +1 at t, 0 if s = t
        parts.append(Implies(conj([var_eq(s_var, q), var_eq(t_var, q)]), term(delta, "=", 0)))
        parts.append(Implies(conj([var_eq(s_var, q), term({t_var: 1}, "!=", q)]), term(delta, "=", -1)))
        parts.append(Implies(conj([term({s_var: 1}, "!=", q), var_eq(t_var, q)]), term(delta, "=", 1)))
        parts.append(
            Implies(conj([term({s_var: 1}, "!=", q), term({t_var: 1}, "!=", q)]), term(delta, "=", 0))
        )
    dist_bound: list[tuple[str, str]] = []
    for q in range(1, m + 1):
        z = names.dist(segment, q)
        dist_bound.append((z, NAT))
        parts.append(term({z: 1}, "<=", m))
        parts.append(Implies(var_eq(s_var, q), var_eq(z, 0)))
        in_flow = {names.flow(segment, tid): 1 for tid in in_edges[q]}
        reachable = [term(in_flow, "=", 0), var_eq(s_var, q)]
        for tid in in_edges[q]:
            p = nfa.transitions[tid].src
            reachable.append(
                conj(
                    [
                        term({names.flow(segment, tid): 1}, ">=", 1),
                        term({names.dist(segment, p): 1, z: -1}, "<=", -1),
                    ]
                )
            )
        parts.append(disj(reachable))
    return dist_bound, parts


def phi_connected_flow(nfa: Nfa, names: VarNames | None = None, segment: int = 0) -> Formula:
    """Consistent and connected flow from s to t (Eulerian path conditions).

    Free variables: one flow per transition plus the endpoints; the distance
    variables witnessing connectivity are bound existentially.
    """
    names = names or VarNames()
    dist_bound, parts = _connected_flow_parts(nfa, names, segment)
    return Exists(tuple(dist_bound), conj(parts))


def phi_flows(nfa: Nfa, names: VarNames | None = None) -> Formula:
    """Per-segment flows: zero for dummy segments, Eulerian plus expiry after.

    Segment i may not use the monitored letters already consumed: flows of
    transitions labelled n + sigma_j vanish for every j <= i (the separator
    letter of segment i itself is expired inside it as well).
    """
    names = names or VarNames()
    k = nfa.alphabet.k
    n = nfa.alphabet.n
    pad = names.padding
    parts: list[Formula] = []
    binders: list[tuple[str, str]] = []
    for i in range(k + 1):
        total = {names.flow(i, tid): 1 for tid in range(len(nfa.transitions))}
        if total:
            parts.append(Implies(term({pad: 1}, ">=", i + 1), term(total, "=", 0)))  # i < p
        expired: list[Formula] = []
        for j in range(1, i + 1):
            for tid, t in enumerate(nfa.transitions):
                lid = nfa.letter_id(t.letter)
                expired.append(
                    Implies(
                        term({names.sigma(j): 1}, "=", lid - n),
                        term({names.flow(i, tid): 1}, "=", 0),
                    )
                )
        # the distance binders only occur in this segment's matrix, so they
        # may soundly float above the padding guard
        dist_bound, flow_parts = _connected_flow_parts(nfa, names, segment=i)
        binders.extend(dist_bound)
        parts.append(Implies(term({pad: 1}, "<=", i), conj(flow_parts + expired)))  # p <= i
    return Exists(tuple(binders), conj(parts))


def psi_gpi(
    nfa: Nfa,
    names: VarNames | None = None,
    initial_var: str | None = None,
    final_var: str | None = None,
    bind_padding: bool = True,
) -> Formula:
    """Existential formula defining the generalized Parikh image of L(nfa).

    Free variables: alpha blocks and sigma (plus the designated states and,
    with ``bind_padding=False``, the padding -- the primed variant used by
    the reachability assembly).
    """
    names = names or VarNames()
    k, n = nfa.alphabet.k, nfa.alphabet.n
    pad = names.padding
    parts: list[Formula] = [term({pad: 1}, "<=", k)]
    parts.append(phi_perm(k, names))
    parts.append(phi_states(nfa, names, initial_var, final_var))
    parts.append(phi_flows(nfa, names))
    for i in range(k + 1):
        for a in range(1, n + 1):
            coeffs = {names.alpha(i, a): 1}
            for tid, t in enumerate(nfa.transitions):
                if nfa.letter_id(t.letter) == a:
                    coeffs[names.flow(i, tid)] = -1
            parts.append(term(coeffs, "=", 0))
    bound: list[tuple[str, str]] = []
    if bind_padding:
        bound.append((pad, NAT))
    for i in range(k + 1):
        bound.append((names.src(i), NAT))
        bound.append((names.tgt(i), NAT))
        for tid in range(len(nfa.transitions)):
            bound.append((names.flow(i, tid), NAT))
    return Exists(tuple(bound), conj(parts))


def psi_free_variables(nfa: Nfa, names: VarNames | None = None) -> list[str]:
    names = names or VarNames()
    out = [names.alpha(i, a) for i in range(nfa.alphabet.k + 1) for a in range(1, nfa.alphabet.n + 1)]
    out.extend(names.sigma(i) for i in range(1, nfa.alphabet.k + 1))
    return out


def phi_counters(machine: Machine, names: VarNames | None = None) -> Formula:
    """End counters from an image and a start vector, via guarded partial sums.

    For coordinate i with sigma(kappa) = i, the partial sums beta pick up the
    matrix contribution of every segment from kappa on; the erasure term nu
    keeps the start value exactly when the coordinate is never really reset
    (kappa <= padding).  beta and nu are integer-sorted and bound here; free
    variables are alpha, sigma, padding, v (start) and w (end).
    """
    names = names or VarNames()
    if not machine.is_normal_form():
        raise EncodeError("phi_counters requires a normal-form reset machine")
    d = machine.dim
    n = len(machine.plain)
    from .parikh import effect_matrix

    b_matrix = effect_matrix(machine)
    pad = names.padding
    parts: list[Formula] = []
    bound: list[tuple[str, str]] = []
    for i in range(1, d + 1):
        for j in range(d + 1):
            bound.append((names.beta(i, j), INT))
        bound.append((names.nu(i), INT))
        parts.append(var_eq(names.beta(i, 0), 0))
        parts.append(term({names.vdst(i): 1, names.beta(i, d): -1, names.nu(i): -1}, "=", 0))
        for kappa in range(1, d + 1):
            guarded: list[Formula] = []
            for j in range(1, d + 1):
                if kappa > j:
                    guarded.append(term({names.beta(i, j): 1, names.beta(i, j - 1): -1}, "=", 0))
                else:
                    coeffs = {names.beta(i, j): 1, names.beta(i, j - 1): -1}
                    for a in range(1, n + 1):
                        c = b_matrix[i - 1][a - 1]
                        if c:
                            coeffs[names.alpha(j, a)] = coeffs.get(names.alpha(j, a), 0) - c
                    guarded.append(term(coeffs, "=", 0))
            guarded.append(Implies(term({pad: 1}, "<=", kappa - 1), var_eq(names.nu(i), 0)))
            guarded.append(
                Implies(term({pad: 1}, ">=", kappa), term({names.nu(i): 1, names.vsrc(i): -1}, "=", 0))
            )
            parts.append(Implies(var_eq(names.sigma(kappa), i), conj(guarded)))
    return Exists(tuple(bound), conj(parts))


def phi_reach(machine: Machine, names: VarNames | None = None) -> Formula:
    """Runs between free states/counters: psi' for the flows, counters glued.

    Free variables: qs, qt (states), v, w (integer counter vectors), alpha,
    sigma.  A model witnesses a word gamma with qs(v) -> qt(w) whose image is
    (alpha, sigma).
    """
    names = names or VarNames()
    if not machine.is_normal_form():
        raise EncodeError("phi_reach requires a normal-form reset machine")
    nfa = nfa_of_machine(machine)
    psi = psi_gpi(nfa, names, initial_var=names.qsrc, final_var=names.qdst, bind_padding=False)
    counters = phi_counters(machine, names)
    return Exists(((names.padding, NAT),), And((psi, counters)))


def encode_query(machine: Machine, src: Configuration, dst: Configuration, mode: str) -> Formula:
    """Closed existential sentence: dst is reached (mode 'reach') or covered."""
    if mode not in ("reach", "cover"):
        raise EncodeError(f"unknown query mode {mode!r}")
    if not machine.is_normal_form():
        raise EncodeError("encode_query requires a normal-form machine (normalize first)")
    if len(src.counters) != machine.dim or len(dst.counters) != machine.dim:
        raise EncodeError("configuration dimension does not match the machine")
    names = VarNames()
    d = machine.dim
    parts: list[Formula] = [
        var_eq(names.qsrc, src.state),
        var_eq(names.qdst, dst.state),
    ]
    for i in range(1, d + 1):
        parts.append(var_eq(names.vsrc(i), src.counters[i - 1]))
        op = "=" if mode == "reach" else ">="
        parts.append(term({names.vdst(i): 1}, op, dst.counters[i - 1]))
    parts.append(phi_reach(machine, names))
    bound = [(names.qsrc, NAT), (names.qdst, NAT)]
    bound += [(names.vsrc(i), INT) for i in range(1, d + 1)]
    bound += [(names.vdst(i), INT) for i in range(1, d + 1)]
    k, n = machine.dim, len(machine.plain)
    bound += [(names.alpha(i, a), NAT) for i in range(k + 1) for a in range(1, n + 1)]
    bound += [(names.sigma(i), NAT) for i in range(1, k + 1)]
    return Exists(tuple(bound), conj(parts))


def reachability_membership(machine: Machine, src: Configuration, x_vars: tuple[str, ...], prefix: str) -> Formula:
    """Existential formula: the vector named by ``x_vars`` is in reach(machine, src)."""
    if not machine.is_normal_form():
        raise EncodeError("membership formula requires a normal-form machine")
    names = VarNames(prefix)
    d = machine.dim
    if len(x_vars) != d:
        raise EncodeError("dimension mismatch between vector variables and machine")
    parts: list[Formula] = [var_eq(names.qsrc, src.state)]
    parts.append(conj([term({names.qdst: 1}, ">=", 1), term({names.qdst: 1}, "<=", machine.num_states)]))
    for i in range(1, d + 1):
        parts.append(var_eq(names.vsrc(i), src.counters[i - 1]))
        parts.append(vars_equal(names.vdst(i), x_vars[i - 1]))
    parts.append(phi_reach(machine, names))
    k, n = machine.dim, len(machine.plain)
    bound = [(names.qsrc, NAT), (names.qdst, NAT)]
    bound += [(names.vsrc(i), INT) for i in range(1, d + 1)]
    bound += [(names.vdst(i), INT) for i in range(1, d + 1)]
    bound += [(names.alpha(i, a), NAT) for i in range(k + 1) for a in range(1, n + 1)]
    bound += [(names.sigma(i), NAT) for i in range(1, k + 1)]
    return Exists(tuple(bound), conj(parts))


def encode_inclusion(
    machine_a: Machine,
    src_a: Configuration,
    machine_b: Machine,
    src_b: Configuration,
) -> Formula:
    """Prenex Pi2 sentence: reach(A, src_a) is included in reach(B, src_b)."""
    if machine_a.dim != machine_b.dim:
        raise EncodeError("inclusion needs machines of equal dimension")
    d = machine_a.dim
    x_vars = tuple(f"x{i}" for i in range(1, d + 1))
    psi_a = reachability_membership(machine_a, src_a, x_vars, "A_")
    psi_b = reachability_membership(machine_b, src_b, x_vars, "B_")
    sentence = Not(Exists(tuple((x, INT) for x in x_vars), And((psi_a, Not(psi_b)))))
    return pa.to_prenex_pi2(sentence)


def inclusion_refutation(
    machine_a: Machine,
    src_a: Configuration,
    machine_b: Machine,
    src_b: Configuration,
    max_norm: int | None = None,
) -> Formula:
    """Sentence: some x reachable in A (optionally with |x|_inf <= max_norm)
    is unreachable in B.  The x variables stay free for model extraction."""
    d = machine_a.dim
    x_vars = tuple(f"x{i}" for i in range(1, d + 1))
    psi_a = reachability_membership(machine_a, src_a, x_vars, "A_")
    psi_b = reachability_membership(machine_b, src_b, x_vars, "B_")
    bound_b, mat_b = pa.hoist_existentials(psi_b)
    parts: list[Formula] = [psi_a, pa.forall(bound_b, Not(mat_b))]
    if max_norm is not None:
        for x in x_vars:
            parts.append(term({x: 1}, "<=", max_norm))
            parts.append(term({x: 1}, ">=", -max_norm))
    return conj(parts)


def reduce_query(
    machine: Machine, src: Configuration, dst: Configuration, direction: str
) -> tuple[Machine, Configuration, Configuration]:
    """Lemma-style inter-reductions between reachability and coverability.

    ``reach_to_cover`` doubles the dimension, acting as (b, -b) on mirrored
    coordinates, so covering (v', -v') pins the value exactly.
    ``cover_to_reach`` adds per-coordinate decrement self-loops at the target
    state (the folklore direction), keeping the dimension.
    """
    if machine.mclass not in ("zvassr", "zvass", "zvas"):
        raise EncodeError(f"reduction undefined for class {machine.mclass}")
    d = machine.dim
    if direction == "reach_to_cover":
        effects: dict[str, Transform] = {}
        any_reset = False
        for a in machine.plain:
            eff = machine.effects[a]
            if isinstance(eff, Add):
                effects[a] = Add(eff.delta + tuple(-x for x in eff.delta))
            else:
                any_reset = True
                mask = _diagonal_mask(eff, d)
                if mask is None:
                    raise EncodeError(f"letter {a!r} is not a reset-machine transform")
                offset = transform_offset(eff, d)
                mm = mask + mask
                bb = offset + tuple(-x for x in offset)
                matrix = tuple(tuple(mm[i] if i == j else 0 for j in range(2 * d)) for i in range(2 * d))
                effects[a] = Affine(matrix, bb)
        for r in machine.monitored:
            any_reset = True
            coord = machine.effects[r].coord  # type: ignore[union-attr]
            matrix = tuple(
                tuple(0 if (i == j and (i + 1 in (coord, coord + d))) else (1 if i == j else 0) for j in range(2 * d))
                for i in range(2 * d)
            )
            effects[r + "both"] = Affine(matrix, zero_vector(2 * d))
        mclass = machine.mclass if not any_reset else "zvassr"
        transitions = [
            (t.src, t.letter + "both" if t.letter in machine.monitored else t.letter, t.dst)
            for t in machine.sorted_transitions()
        ]
        doubled = make_machine(
            machine.name + ".doubled",
            mclass,
            2 * d,
            machine.num_states,
            effects,
            transitions,
            monitored=0,
        )
        neg = tuple(-x for x in src.counters)
        neg_d = tuple(-x for x in dst.counters)
        return doubled, Configuration(src.state, src.counters + neg), Configuration(dst.state, dst.counters + neg_d)
    if direction == "cover_to_reach":
        effects = {a: machine.effects[a] for a in machine.plain}
        transitions = [(t.src, t.letter, t.dst) for t in machine.sorted_transitions() if t.letter in machine.plain]
        monitored_transitions = [
            (t.src, t.letter, t.dst) for t in machine.sorted_transitions() if t.letter in machine.monitored
        ]
        for i in range(1, d + 1):
            name = f"dec{i}"
            while name in machine.effects or name in effects:
                name += "'"
            delta = tuple(-1 if j == i - 1 else 0 for j in range(d))
            effects[name] = Add(delta)
            transitions.append((dst.state, name, dst.state))
        lowered = make_machine(
            machine.name + ".dec",
            machine.mclass,
            d,
            machine.num_states,
            effects,
            transitions + monitored_transitions,
            monitored=len(machine.monitored),
        )
        return lowered, src, dst
    raise EncodeError(f"unknown reduction direction {direction!r}")


def psi_size_table(nfa_base: Nfa, ks: list[int], convention: str = "unary") -> list[tuple[int, int, int]]:
    """Rows (k, |B|, size) for the same automaton under growing monitored alphabets.

    Monitored letters beyond those used by transitions are declared but
    unused, which keeps the automaton structure fixed while k grows.
    """
    used = {nfa_base.alphabet.monitored_index(t.letter) for t in nfa_base.transitions if t.letter in nfa_base.alphabet.monitored}
    rows = []
    for k in ks:
        if used and k < max(used):
            raise EncodeError(f"k={k} smaller than a used monitored letter")
        alphabet = MonitoredAlphabet(nfa_base.alphabet.plain, tuple(f"r{i}" for i in range(1, k + 1)))
        nfa = Nfa(nfa_base.num_states, alphabet, nfa_base.transitions, nfa_base.initial, nfa_base.finals)
        formula = psi_gpi(nfa)
        rows.append((k, nfa.size(), pa.size(formula, convention)))
    return rows
