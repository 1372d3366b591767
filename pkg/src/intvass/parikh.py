"""Monitored alphabets, word decompositions and generalized Parikh images.

Over an alphabet split into plain letters and monitored letters r1..rk, every
word decomposes uniquely around the *last* occurrence of each monitored
letter that appears.  A generalized Parikh image records, per segment of that
decomposition, how often each plain letter occurs, together with the order in
which the monitored letters make their last appearance.  Monitored letters
that never occur are padded in as leading dummies, which is the only source
of ambiguity: two images of the same word differ at most in the dummy order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .model import Add, Machine, MachineError

Word = tuple[str, ...]


class ParikhError(ValueError):
    pass


@dataclass(frozen=True)
class MonitoredAlphabet:
    plain: tuple[str, ...]
    monitored: tuple[str, ...]

    def __post_init__(self) -> None:
        names = self.plain + self.monitored
        if len(set(names)) != len(names):
            raise ParikhError("duplicate letter names in alphabet")

    @property
    def n(self) -> int:
        return len(self.plain)

    @property
    def k(self) -> int:
        return len(self.monitored)

    def check_word(self, word: Word) -> None:
        for a in word:
            if a not in self.plain and a not in self.monitored:
                raise ParikhError(f"letter {a!r} not in alphabet")

    def monitored_index(self, letter: str) -> int:
        """1-based index of a monitored letter."""
        return self.monitored.index(letter) + 1

    def plain_counts(self, word: Word) -> tuple[int, ...]:
        """Parikh vector of ``word`` restricted to the plain letters."""
        return tuple(sum(1 for a in word if a == b) for b in self.plain)


def monitored_alphabet(n: int, k: int, plain_names: tuple[str, ...] | None = None) -> MonitoredAlphabet:
    plain = plain_names if plain_names is not None else tuple(f"a{i}" for i in range(1, n + 1))
    return MonitoredAlphabet(plain, tuple(f"r{i}" for i in range(1, k + 1)))


@dataclass(frozen=True)
class Decomposition:
    """Canonical cut of a word at the last occurrences of its monitored letters.

    ``segments`` holds the partial words gamma_p .. gamma_k; ``sigma`` maps
    position i (1-based) to the index of the monitored letter whose last
    occurrence sits between gamma_{i-1} and gamma_i.  Positions 1..p carry
    the dummy letters that never occur.
    """

    padding: int
    sigma: tuple[int, ...]
    segments: tuple[Word, ...]

    def word(self, alphabet: MonitoredAlphabet) -> Word:
        out: list[str] = list(self.segments[0])
        for i, seg in enumerate(self.segments[1:], start=self.padding + 1):
            out.append(alphabet.monitored[self.sigma[i - 1] - 1])
            out.extend(seg)
        return tuple(out)


@dataclass(frozen=True)
class GeneralizedParikhImage:
    """Per-segment plain-letter counts alpha_0..alpha_k plus the reset order sigma."""

    counts: tuple[tuple[int, ...], ...]
    sigma: tuple[int, ...]


def decompose(alphabet: MonitoredAlphabet, word: Word) -> Decomposition:
    """The canonical decomposition: dummies first in ascending index order."""
    alphabet.check_word(word)
    k = alphabet.k
    last: dict[int, int] = {}
    for pos, a in enumerate(word):
        if a in alphabet.monitored:
            last[alphabet.monitored_index(a)] = pos
    occurring = sorted(last, key=lambda idx: last[idx])
    p = k - len(occurring)
    dummies = sorted(set(range(1, k + 1)) - set(occurring))
    sigma = tuple(dummies + occurring)
    cuts = [last[idx] for idx in occurring]
    segments: list[Word] = []
    start = 0
    for c in cuts:
        segments.append(tuple(word[start:c]))
        start = c + 1
    segments.append(tuple(word[start:]))
    return Decomposition(p, sigma, tuple(segments))


def gpi_of_decomposition(alphabet: MonitoredAlphabet, dec: Decomposition) -> GeneralizedParikhImage:
    counts = [(0,) * alphabet.n] * dec.padding + [alphabet.plain_counts(seg) for seg in dec.segments]
    return GeneralizedParikhImage(tuple(counts), dec.sigma)


def gpi_set(alphabet: MonitoredAlphabet, word: Word, max_k: int = 6) -> frozenset[GeneralizedParikhImage]:
    """All generalized Parikh images of ``word``.

    Members differ only in the order of the dummy monitored letters, so there
    are exactly p! of them.  Bounded because the dummy permutations are
    enumerated explicitly.
    """
    if alphabet.k > max_k:
        raise ParikhError(f"k={alphabet.k} exceeds the enumeration bound {max_k}")
    dec = decompose(alphabet, word)
    base = gpi_of_decomposition(alphabet, dec)
    dummies = dec.sigma[: dec.padding]
    tail = dec.sigma[dec.padding :]
    return frozenset(
        GeneralizedParikhImage(base.counts, tuple(perm) + tail) for perm in itertools.permutations(dummies)
    )


def is_gpi(alphabet: MonitoredAlphabet, word: Word, gpi: GeneralizedParikhImage) -> bool:
    """Does some padding p and decomposition witness the definition for ``gpi``?

    Deliberately independent of :func:`decompose`: it searches over all
    paddings and all choices of separator positions.
    """
    alphabet.check_word(word)
    n, k = alphabet.n, alphabet.k
    if len(gpi.counts) != k + 1 or any(len(c) != n for c in gpi.counts):
        return False
    if sorted(gpi.sigma) != list(range(1, k + 1)):
        return False
    for p in range(k + 1):
        if any(gpi.counts[i] != (0,) * n for i in range(p)):
            continue
        separators = gpi.sigma[p:]
        positions_per_sep = [
            [pos for pos, a in enumerate(word) if a == alphabet.monitored[idx - 1]] for idx in separators
        ]
        for picks in itertools.product(*positions_per_sep):
            if list(picks) != sorted(set(picks)):
                continue
            segments: list[Word] = []
            start = 0
            for c in picks:
                segments.append(tuple(word[start:c]))
                start = c + 1
            segments.append(tuple(word[start:]))
            ok = True
            for i, seg in enumerate(segments, start=p):
                allowed = {alphabet.monitored[idx - 1] for idx in gpi.sigma[i:]}
                if any(a in alphabet.monitored and a not in allowed for a in seg):
                    ok = False
                    break
                if alphabet.plain_counts(seg) != gpi.counts[i]:
                    ok = False
                    break
            if ok:
                return True
    return False


def machine_alphabet(machine: Machine) -> MonitoredAlphabet:
    return MonitoredAlphabet(machine.plain, machine.monitored)


def effect_matrix(machine: Machine) -> tuple[tuple[int, ...], ...]:
    """d x n matrix whose column i is the add vector of the i-th plain letter."""
    if not machine.is_normal_form():
        raise MachineError("effect matrix requires a normal-form reset machine")
    columns = []
    for a in machine.plain:
        eff = machine.effects[a]
        assert isinstance(eff, Add)
        columns.append(eff.delta)
    return tuple(tuple(col[i] for col in columns) for i in range(machine.dim))


def gpi_effect(gpi: GeneralizedParikhImage, matrix: tuple[tuple[int, ...], ...]) -> tuple[int, ...]:
    """Counter vector realized from the origin by any word with image ``gpi``.

    Requires k = d: each monitored letter resets its own coordinate.  The
    i-th summand contributes the segment counts alpha_{i-1} scaled by the
    matrix, with the coordinates reset later (sigma(i)..sigma(d)) erased.
    """
    d = len(matrix)
    k = len(gpi.sigma)
    if k != d:
        raise ParikhError(f"effect needs k = d, got k={k}, d={d}")

    def matvec(alpha: tuple[int, ...]) -> list[int]:
        return [sum(row[j] * alpha[j] for j in range(len(alpha))) for row in matrix]

    total = [0] * d
    for i in range(1, d + 1):
        term = matvec(gpi.counts[i - 1])
        erased = {gpi.sigma[j - 1] for j in range(i, d + 1)}
        for c in range(d):
            if c + 1 not in erased:
                total[c] += term[c]
    for c, x in enumerate(matvec(gpi.counts[d])):
        total[c] += x
    return tuple(total)
