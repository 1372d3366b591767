"""Counter machine syntax and operational semantics.

A machine is a finite-state controller over an alphabet of letters, each
letter carrying an affine counter transform ``v -> Av + b``.  Four classes
are distinguished by the matrices they allow:

* ``zrm``    -- arbitrary integer matrices (simulation only, undecidable),
* ``zvassr`` -- 0/1-diagonal matrices (adds plus per-coordinate resets),
* ``zvass``  -- identity matrices (pure adds),
* ``zvas``   -- pure adds with a single control state.

States are numbered ``1..m`` and letters are identified by position: plain
letters get ids ``1..n``, monitored (reset) letters ids ``n+1..n+k``.  That
numbering is what the logic encoding in :mod:`intvass.encode` relies on.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping

Vector = tuple[int, ...]


class MachineError(ValueError):
    """Raised for ill-formed machines, transforms or configurations."""


def vector(entries: Iterable[int]) -> Vector:
    return tuple(int(x) for x in entries)


def zero_vector(dim: int) -> Vector:
    return (0,) * dim


def add_vectors(u: Vector, v: Vector) -> Vector:
    if len(u) != len(v):
        raise MachineError(f"dimension mismatch: {len(u)} vs {len(v)}")
    return tuple(a + b for a, b in zip(u, v))


def reset_coords(v: Vector, coords: Iterable[int]) -> Vector:
    """``v`` with the 1-based coordinates in ``coords`` set to zero."""
    s = set(coords)
    return tuple(0 if i + 1 in s else x for i, x in enumerate(v))


@dataclass(frozen=True)
class Add:
    """Pure translation ``v -> v + delta``."""

    delta: Vector


@dataclass(frozen=True)
class Reset:
    """Single-coordinate reset ``v -> v`` with coordinate ``coord`` zeroed (1-based)."""

    coord: int


@dataclass(frozen=True)
class Affine:
    """General affine map ``v -> Av + b`` with a row-major square matrix."""

    matrix: tuple[tuple[int, ...], ...]
    offset: Vector


Transform = Add | Reset | Affine


def apply(transform: Transform, v: Vector) -> Vector:
    """Image of ``v`` under ``transform``; raises on dimension mismatch."""
    if isinstance(transform, Add):
        return add_vectors(v, transform.delta)
    if isinstance(transform, Reset):
        if not 1 <= transform.coord <= len(v):
            raise MachineError(f"reset coordinate {transform.coord} out of range for dim {len(v)}")
        return reset_coords(v, (transform.coord,))
    if isinstance(transform, Affine):
        a, b = transform.matrix, transform.offset
        if len(a) != len(v) or any(len(row) != len(v) for row in a) or len(b) != len(v):
            raise MachineError("affine transform dimensions do not match vector")
        return tuple(sum(row[j] * v[j] for j in range(len(v))) + b[i] for i, row in enumerate(a))
    raise MachineError(f"unknown transform {transform!r}")


def _diagonal_mask(transform: Transform, dim: int) -> tuple[int, ...] | None:
    """0/1 diagonal of the transform's matrix, or None if not 0/1-diagonal."""
    if isinstance(transform, Add):
        return (1,) * dim
    if isinstance(transform, Reset):
        return tuple(0 if i + 1 == transform.coord else 1 for i in range(dim))
    a = transform.matrix
    diag = []
    for i in range(dim):
        for j in range(dim):
            if i != j and a[i][j] != 0:
                return None
        if a[i][i] not in (0, 1):
            return None
        diag.append(a[i][i])
    return tuple(diag)


def transform_offset(transform: Transform, dim: int) -> Vector:
    if isinstance(transform, Add):
        return transform.delta
    if isinstance(transform, Reset):
        return zero_vector(dim)
    return transform.offset


CLASSES = ("zrm", "zvassr", "zvass", "zvas")

_MONITORED_NAME = re.compile(r"^r([1-9][0-9]*)$")


@dataclass(frozen=True)
class Transition:
    src: int
    letter: str
    dst: int


@dataclass(frozen=True)
class Configuration:
    state: int
    counters: Vector

    def __str__(self) -> str:
        return f"{self.state}:{','.join(str(c) for c in self.counters)}"


@dataclass(frozen=True)
class Machine:
    """A counter machine; immutable after construction.

    ``plain`` and ``monitored`` hold letter names; effects map every letter
    name to its transform.  Monitored letters, when present, must be named
    ``r1..rk`` and reset their own coordinate -- that is the normal form the
    encoder expects.
    """

    name: str
    mclass: str
    dim: int
    num_states: int
    plain: tuple[str, ...]
    monitored: tuple[str, ...]
    effects: Mapping[str, Transform]
    transitions: tuple[Transition, ...]

    def __post_init__(self) -> None:
        if self.mclass not in CLASSES:
            raise MachineError(f"unknown machine class {self.mclass!r}")
        if self.dim <= 0:
            raise MachineError("dimension must be positive")
        if self.num_states <= 0:
            raise MachineError("machine needs at least one state")
        if self.mclass == "zvas" and self.num_states != 1:
            raise MachineError("class zvas requires a single state")
        names = self.plain + self.monitored
        if len(set(names)) != len(names):
            raise MachineError("duplicate letter names")
        for a in self.plain:
            if _MONITORED_NAME.match(a):
                raise MachineError(f"plain letter {a!r} clashes with reserved reset letter names")
        for i, r in enumerate(self.monitored):
            if r != f"r{i + 1}":
                raise MachineError(f"monitored letter {i + 1} must be named r{i + 1}, got {r!r}")
            if self.effects.get(r) != Reset(i + 1):
                raise MachineError(f"monitored letter {r} must reset coordinate {i + 1}")
        for a in names:
            if a not in self.effects:
                raise MachineError(f"letter {a!r} has no effect")
            self._check_effect(a, self.effects[a])
        for t in self.transitions:
            if not (1 <= t.src <= self.num_states and 1 <= t.dst <= self.num_states):
                raise MachineError(f"transition {t} mentions an unknown state")
            if t.letter not in self.effects or t.letter not in names:
                raise MachineError(f"transition {t} uses undeclared letter")

    def _check_effect(self, letter: str, tr: Transform) -> None:
        if isinstance(tr, Add):
            if len(tr.delta) != self.dim:
                raise MachineError(f"effect of {letter!r} has wrong dimension")
            return
        if isinstance(tr, Reset):
            if not 1 <= tr.coord <= self.dim:
                raise MachineError(f"reset coordinate of {letter!r} out of range")
            if self.mclass in ("zvass", "zvas"):
                raise MachineError(f"class {self.mclass} admits no resets (letter {letter!r})")
            return
        if len(tr.matrix) != self.dim or any(len(r) != self.dim for r in tr.matrix) or len(tr.offset) != self.dim:
            raise MachineError(f"affine effect of {letter!r} has wrong dimensions")
        if self.mclass in ("zvass", "zvas"):
            if _diagonal_mask(tr, self.dim) != (1,) * self.dim:
                raise MachineError(f"class {self.mclass} admits only pure adds (letter {letter!r})")
        elif self.mclass == "zvassr":
            if _diagonal_mask(tr, self.dim) is None:
                raise MachineError(f"class zvassr needs a 0/1-diagonal matrix (letter {letter!r})")

    # -- derived views -----------------------------------------------------

    @property
    def letters(self) -> tuple[str, ...]:
        return self.plain + self.monitored

    def letter_id(self, letter: str) -> int:
        """1-based letter id; plain letters come first, monitored after."""
        return self.letters.index(letter) + 1

    def transitions_from(self, state: int, letter: str) -> list[Transition]:
        return [t for t in self.transitions if t.src == state and t.letter == letter]

    def sorted_transitions(self) -> tuple[Transition, ...]:
        return tuple(sorted(self.transitions, key=lambda t: (t.src, self.letter_id(t.letter), t.dst)))

    def is_normal_form(self) -> bool:
        """Normal form: class zvassr, monitored letters r1..rd, plain letters pure adds."""
        return (
            self.mclass == "zvassr"
            and self.monitored == tuple(f"r{i}" for i in range(1, self.dim + 1))
            and all(isinstance(self.effects[a], Add) for a in self.plain)
        )


def make_machine(
    name: str,
    mclass: str,
    dim: int,
    num_states: int,
    effects: Mapping[str, Transform],
    transitions: Iterable[tuple[int, str, int]],
    monitored: int = 0,
) -> Machine:
    """Convenience constructor: monitored letters are implied as r1..r<monitored>."""
    mon = tuple(f"r{i}" for i in range(1, monitored + 1))
    plain = tuple(a for a in effects if a not in mon)
    full_effects = dict(effects)
    for i, r in enumerate(mon):
        full_effects.setdefault(r, Reset(i + 1))
    trans = tuple(Transition(s, a, d) for (s, a, d) in transitions)
    return Machine(name, mclass, dim, num_states, plain, mon, full_effects, trans)


@dataclass(frozen=True)
class Run:
    """A run: n transitions together with the n+1 visited configurations."""

    configs: tuple[Configuration, ...]
    transitions: tuple[Transition, ...]

    def __post_init__(self) -> None:
        if len(self.configs) != len(self.transitions) + 1:
            raise MachineError("run needs exactly one more configuration than transitions")

    @property
    def word(self) -> tuple[str, ...]:
        return tuple(t.letter for t in self.transitions)

    def validate(self, machine: Machine) -> None:
        """Check every step against the machine's transition relation and effects."""
        for i, t in enumerate(self.transitions):
            before, after = self.configs[i], self.configs[i + 1]
            if t not in machine.transitions:
                raise MachineError(f"step {i}: {t} is not a transition of the machine")
            if before.state != t.src or after.state != t.dst:
                raise MachineError(f"step {i}: states of {t} do not match the configurations")
            if apply(machine.effects[t.letter], before.counters) != after.counters:
                raise MachineError(f"step {i}: counters do not follow the effect of {t.letter!r}")


def step(machine: Machine, config: Configuration, letter: str) -> set[Configuration]:
    """All successor configurations of ``config`` under ``letter``."""
    if letter not in machine.effects:
        raise MachineError(f"unknown letter {letter!r}")
    if len(config.counters) != machine.dim:
        raise MachineError("configuration dimension does not match the machine")
    image = apply(machine.effects[letter], config.counters)
    return {Configuration(t.dst, image) for t in machine.transitions if t.src == config.state and t.letter == letter}


def run(machine: Machine, config: Configuration, word: Iterable[str]) -> set[Configuration]:
    """All configurations reachable from ``config`` by reading ``word``."""
    current = {config}
    for letter in word:
        current = {c2 for c in current for c2 in step(machine, c, letter)}
        if not current:
            return set()
    return current


def simulate_transitions(machine: Machine, start: Configuration, transitions: Iterable[Transition]) -> Run:
    """Deterministically follow a concrete transition sequence, building a Run."""
    configs = [start]
    trans = tuple(transitions)
    for t in trans:
        cur = configs[-1]
        if cur.state != t.src:
            raise MachineError(f"transition {t} does not start at state {cur.state}")
        configs.append(Configuration(t.dst, apply(machine.effects[t.letter], cur.counters)))
    r = Run(tuple(configs), trans)
    r.validate(machine)
    return r


def normalize(machine: Machine) -> Machine:
    """Normal form of a reset machine: plain letters are pure adds, resets are r1..rd.

    Letters combining resets with adds (0/1-diagonal affine effects) are split
    per transition into a chain of single-coordinate resets followed by one
    add, threaded through fresh states.  Resets must precede the add so that
    the composite equals ``v -> Av + b`` exactly: coordinates with a zero
    diagonal end up at ``b_i``, not at zero.  Reachability between original
    states and counter vectors is preserved.

    Classes zvass/zvas are accepted and gain (unused) monitored letters.
    """
    if machine.mclass not in ("zvassr", "zvass", "zvas"):
        raise MachineError(f"cannot normalize class {machine.mclass}")
    d = machine.dim
    plain: list[str] = []
    effects: dict[str, Transform] = {}
    # Plan per letter: either keep as a pure add, rename to the canonical
    # reset letter, or split into (reset coords, fresh add letter).
    plan: dict[str, tuple[str, ...] | tuple[tuple[int, ...], str | None]] = {}

    def fresh_add_letter(base: str, delta: Vector) -> str:
        name = base + "+"
        while name in machine.effects or name in effects:
            name += "+"
        plain.append(name)
        effects[name] = Add(delta)
        return name

    for a in machine.plain:
        tr = machine.effects[a]
        mask = _diagonal_mask(tr, d)
        if mask is None:
            raise MachineError(f"letter {a!r} is not a reset-machine transform")
        resets = tuple(i + 1 for i in range(d) if mask[i] == 0)
        offset = transform_offset(tr, d)
        if not resets:
            plain.append(a)
            effects[a] = Add(offset)
            plan[a] = ((), a)
        elif len(resets) == 1 and offset == zero_vector(d):
            plan[a] = (resets, None)  # becomes the canonical reset letter
        else:
            add_letter = fresh_add_letter(a, offset) if offset != zero_vector(d) else None
            plan[a] = (resets, add_letter)

    transitions: list[Transition] = []
    next_state = machine.num_states
    for t in machine.sorted_transitions():
        if t.letter in machine.monitored:
            transitions.append(t)
            continue
        resets, add_letter = plan[t.letter]
        if not resets and add_letter is not None:
            transitions.append(Transition(t.src, add_letter, t.dst))
            continue
        steps = [f"r{i}" for i in resets] + ([add_letter] if add_letter else [])
        cur = t.src
        for j, letter in enumerate(steps):
            last = j == len(steps) - 1
            dst = t.dst if last else next_state + 1
            if not last:
                next_state += 1
            transitions.append(Transition(cur, letter, dst))
            cur = dst

    mon = tuple(f"r{i}" for i in range(1, d + 1))
    for i, r in enumerate(mon):
        effects[r] = Reset(i + 1)
    return Machine(
        name=machine.name + ".normal",
        mclass="zvassr",
        dim=d,
        num_states=next_state,
        plain=tuple(plain),
        monitored=mon,
        effects=effects,
        transitions=tuple(transitions),
    )
