"""Line-based machine file format and CLI configuration syntax.

::

    machine <name>
    class zrm|zvassr|zvass|zvas
    dim <d>
    states <id> <id> ...
    letters <name> ...            # plain letters; r1..rd are implicit for zvassr
    effect <letter> add <d ints>
    effect <letter> reset <i>
    effect <letter> affine <d*d ints row-major> ; <d ints>
    transition <state> <letter> <state>

``#`` starts a comment.  Configurations are written ``state:c1,c2,...,cd``.
"""

from __future__ import annotations

from pathlib import Path

from .model import Add, Affine, Configuration, Machine, MachineError, Reset, Transform, Transition


class ParseError(ValueError):
    def __init__(self, message: str, source: str = "<string>", line: int | None = None):
        loc = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(loc + message)
        self.source = source
        self.line = line


def parse_machine(text: str, source: str = "<string>") -> Machine:
    name = None
    mclass = None
    dim = None
    states: list[int] | None = None
    plain: list[str] = []
    effects: dict[str, Transform] = {}
    transitions: list[Transition] = []

    def err(lineno: int, msg: str) -> ParseError:
        return ParseError(msg, source, lineno)

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        kw, args = fields[0], fields[1:]
        try:
            if kw == "machine":
                name = " ".join(args) or "machine"
            elif kw == "class":
                (mclass,) = args
            elif kw == "dim":
                dim = int(args[0])
            elif kw == "states":
                states = [int(a) for a in args]
            elif kw == "letters":
                plain.extend(args)
            elif kw == "effect":
                letter, kind, rest = args[0], args[1], args[2:]
                if kind == "add":
                    effects[letter] = Add(tuple(int(x) for x in rest))
                elif kind == "reset":
                    effects[letter] = Reset(int(rest[0]))
                elif kind == "affine":
                    if ";" not in rest:
                        raise err(lineno, "affine effect needs '; ' between matrix and offset")
                    cut = rest.index(";")
                    flat = [int(x) for x in rest[:cut]]
                    offset = tuple(int(x) for x in rest[cut + 1 :])
                    d = len(offset)
                    if len(flat) != d * d:
                        raise err(lineno, f"affine matrix needs {d}*{d} entries, got {len(flat)}")
                    matrix = tuple(tuple(flat[i * d : (i + 1) * d]) for i in range(d))
                    effects[letter] = Affine(matrix, offset)
                else:
                    raise err(lineno, f"unknown effect kind {kind!r}")
            elif kw == "transition":
                src, letter, dst = args
                transitions.append(Transition(int(src), letter, int(dst)))
            else:
                raise err(lineno, f"unknown keyword {kw!r}")
        except ParseError:
            raise
        except (ValueError, IndexError) as exc:
            raise err(lineno, f"malformed {kw} line: {exc}") from exc

    if mclass is None or dim is None or states is None:
        raise ParseError("file must declare class, dim and states", source)
    if sorted(states) != list(range(1, len(states) + 1)):
        raise ParseError("states must be exactly 1..m", source)

    monitored: tuple[str, ...] = ()
    if mclass == "zvassr":
        monitored = tuple(f"r{i}" for i in range(1, dim + 1))
        for i, r in enumerate(monitored):
            declared = effects.get(r)
            if declared is not None and declared != Reset(i + 1):
                raise ParseError(f"effect of {r} must be reset {i + 1}", source)
            effects[r] = Reset(i + 1)
    try:
        return Machine(
            name=name or "machine",
            mclass=mclass,
            dim=dim,
            num_states=len(states),
            plain=tuple(plain),
            monitored=monitored,
            effects=effects,
            transitions=tuple(transitions),
        )
    except MachineError as exc:
        raise ParseError(str(exc), source) from exc


def parse_machine_file(path: str | Path) -> Machine:
    p = Path(path)
    return parse_machine(p.read_text(encoding="utf-8"), source=str(p))


def format_machine(machine: Machine) -> str:
    lines = [
        f"machine {machine.name}",
        f"class {machine.mclass}",
        f"dim {machine.dim}",
        "states " + " ".join(str(i) for i in range(1, machine.num_states + 1)),
    ]
    if machine.plain:
        lines.append("letters " + " ".join(machine.plain))
    for a in machine.plain:
        tr = machine.effects[a]
        if isinstance(tr, Add):
            lines.append(f"effect {a} add " + " ".join(str(x) for x in tr.delta))
        elif isinstance(tr, Reset):
            lines.append(f"effect {a} reset {tr.coord}")
        else:
            flat = " ".join(str(x) for row in tr.matrix for x in row)
            lines.append(f"effect {a} affine {flat} ; " + " ".join(str(x) for x in tr.offset))
    for t in machine.sorted_transitions():
        lines.append(f"transition {t.src} {t.letter} {t.dst}")
    return "\n".join(lines) + "\n"


def parse_configuration(text: str, dim: int | None = None) -> Configuration:
    """Parse ``state:c1,c2,...,cd``; a bare ``state`` means all-zero counters."""
    try:
        if ":" in text:
            state_part, counters_part = text.split(":", 1)
            counters = tuple(int(x) for x in counters_part.split(",")) if counters_part else ()
        else:
            state_part, counters = text, ()
        state = int(state_part)
    except ValueError as exc:
        raise ParseError(f"bad configuration {text!r} (expected state:c1,...,cd)") from exc
    if dim is not None:
        if not counters:
            counters = (0,) * dim
        if len(counters) != dim:
            raise ParseError(f"configuration {text!r} has {len(counters)} counters, machine has {dim}")
    return Configuration(state, counters)
