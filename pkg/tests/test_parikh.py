import itertools
import math
import random

import pytest

from intvass.model import Add, Configuration, make_machine, run
from intvass.parikh import (
    GeneralizedParikhImage,
    MonitoredAlphabet,
    ParikhError,
    decompose,
    effect_matrix,
    gpi_effect,
    gpi_set,
    is_gpi,
    machine_alphabet,
    monitored_alphabet,
)

AB4 = MonitoredAlphabet(("a", "b"), ("r1", "r2", "r3", "r4"))
# the word aabr1br3abr3ar1 as letters
RUNNING = ("a", "a", "b", "r1", "b", "r3", "a", "b", "r3", "a", "r1")


def test_decompose_running_example():
    dec = decompose(AB4, RUNNING)
    assert dec.padding == 2
    assert dec.sigma == (2, 4, 3, 1)  # dummies 2,4 ascending, then r3, r1
    assert dec.segments == (
        ("a", "a", "b", "r1", "b", "r3", "a", "b"),
        ("a",),
        (),
    )
    assert dec.word(AB4) == RUNNING


def test_decompose_empty_word():
    alphabet = monitored_alphabet(2, 2)
    dec = decompose(alphabet, ())
    assert dec.padding == 2
    assert dec.segments == ((),)


def test_decompose_single_reset():
    alphabet = monitored_alphabet(1, 1)
    dec = decompose(alphabet, ("r1",))
    assert dec.padding == 0
    assert dec.sigma == (1,)
    assert dec.segments == ((), ())


def test_gpi_set_running_example():
    images = gpi_set(AB4, RUNNING)
    assert len(images) == 2
    counts = {g.counts for g in images}
    assert counts == {((0, 0), (0, 0), (3, 3), (1, 0), (0, 0))}
    for g in images:
        assert g.sigma[2:] == (3, 1)
        assert set(g.sigma[:2]) == {2, 4}


def test_gpi_set_plain_word():
    alphabet = monitored_alphabet(2, 0, ("a", "b"))
    images = gpi_set(alphabet, ("a", "b"))
    assert images == frozenset({GeneralizedParikhImage(((1, 1),), ())})


def test_gpi_set_bound():
    alphabet = monitored_alphabet(1, 7)
    with pytest.raises(ParikhError):
        gpi_set(alphabet, ())


def test_is_gpi_accepts_running_images():
    for g in gpi_set(AB4, RUNNING):
        assert is_gpi(AB4, RUNNING, g)


def test_is_gpi_rejects_swapped_counts():
    g = next(iter(gpi_set(AB4, RUNNING)))
    swapped = list(g.counts)
    swapped[2], swapped[3] = swapped[3], swapped[2]
    assert not is_gpi(AB4, RUNNING, GeneralizedParikhImage(tuple(swapped), g.sigma))


def test_is_gpi_empty_word():
    alphabet = monitored_alphabet(1, 2)
    zero = ((0,), (0,), (0,))
    assert is_gpi(alphabet, (), GeneralizedParikhImage(zero, (1, 2)))
    assert is_gpi(alphabet, (), GeneralizedParikhImage(zero, (2, 1)))


def enumerate_candidates(alphabet, word):
    """All images with per-letter totals matching the word (others violate
    the counting condition outright, checked separately on a sample)."""
    totals = alphabet.plain_counts(word)
    k, n = alphabet.k, alphabet.n

    def splits(total, parts):
        if parts == 1:
            yield (total,)
            return
        for head in range(total + 1):
            for tail in splits(total - head, parts - 1):
                yield (head,) + tail

    per_letter = [list(splits(t, k + 1)) for t in totals]
    for combo in itertools.product(*per_letter):
        counts = tuple(tuple(combo[a][i] for a in range(n)) for i in range(k + 1))
        for sigma in itertools.permutations(range(1, k + 1)):
            yield GeneralizedParikhImage(counts, sigma)


@pytest.mark.parametrize("length", range(5))
def test_gpi_set_matches_is_gpi_exhaustively(length):
    alphabet = monitored_alphabet(2, 2, ("a", "b"))
    letters = ("a", "b", "r1", "r2")
    for word in itertools.product(letters, repeat=length):
        expected = gpi_set(alphabet, word)
        found = {g for g in enumerate_candidates(alphabet, word) if is_gpi(alphabet, word, g)}
        assert found == expected
        p = 2 - len({a for a in word if a in ("r1", "r2")})
        assert len(expected) == math.factorial(p)


def test_wrong_mass_candidates_rejected():
    alphabet = monitored_alphabet(2, 2, ("a", "b"))
    word = ("a", "r1", "b")
    bad = GeneralizedParikhImage(((0, 0), (2, 0), (0, 1)), (2, 1))
    assert not is_gpi(alphabet, word, bad)


# -- counter effects -------------------------------------------------------------


def simple_machine(d, columns):
    """Normal-form machine, one state, plain letters with the given columns."""
    effects = {}
    transitions = []
    for j, col in enumerate(columns):
        name = f"a{j + 1}"
        effects[name] = Add(tuple(col))
        transitions.append((1, name, 1))
    for i in range(1, d + 1):
        transitions.append((1, f"r{i}", 1))
    return make_machine("simple", "zvassr", d, 1, effects, transitions, monitored=d)


def test_effect_matrix_columns():
    machine = simple_machine(2, [(1, 0), (3, -1)])
    assert effect_matrix(machine) == ((1, 3), (0, -1))


def test_effect_one_dimensional():
    machine = simple_machine(1, [(1,)])
    alphabet = machine_alphabet(machine)
    word = ("a1", "r1", "a1")
    matrix = effect_matrix(machine)
    for g in gpi_set(alphabet, word):
        assert gpi_effect(g, matrix) == (1,)
    (final,) = run(machine, Configuration(1, (0,)), word)
    assert final.counters == (1,)


def test_effect_zero_counts():
    machine = simple_machine(2, [(1, 0), (0, 1)])
    zero = GeneralizedParikhImage(((0, 0), (0, 0), (0, 0)), (1, 2))
    assert gpi_effect(zero, effect_matrix(machine)) == (0, 0)


def test_effect_two_dimensional_example():
    machine = simple_machine(2, [(1, 0), (0, 1)])
    alphabet = machine_alphabet(machine)
    word = ("a1", "a2", "r1", "a1")
    (final,) = run(machine, Configuration(1, (0, 0)), word)
    assert final.counters == (1, 1)
    for g in gpi_set(alphabet, word):
        assert gpi_effect(g, effect_matrix(machine)) == (1, 1)


def test_effect_requires_square():
    machine = simple_machine(2, [(1, 0)])
    g = GeneralizedParikhImage(((0,),), ())
    with pytest.raises(ParikhError):
        gpi_effect(g, effect_matrix(machine))


@pytest.mark.parametrize("seed", range(10))
def test_effect_equals_simulation_on_random_words(seed):
    rng = random.Random(seed)
    d = rng.randint(1, 3)
    n = rng.randint(1, 3)
    columns = [tuple(rng.randint(-2, 2) for _ in range(d)) for _ in range(n)]
    machine = simple_machine(d, columns)
    alphabet = machine_alphabet(machine)
    letters = alphabet.plain + alphabet.monitored
    matrix = effect_matrix(machine)
    for _ in range(25):
        word = tuple(rng.choice(letters) for _ in range(rng.randint(0, 10)))
        (final,) = run(machine, Configuration(1, (0,) * d), word)
        for g in gpi_set(alphabet, word):
            assert gpi_effect(g, matrix) == final.counters


def test_canonical_decomposition_induces_valid_image():
    rng = random.Random(7)
    alphabet = monitored_alphabet(2, 3, ("a", "b"))
    letters = alphabet.plain + alphabet.monitored
    for _ in range(50):
        word = tuple(rng.choice(letters) for _ in range(rng.randint(0, 8)))
        for g in gpi_set(alphabet, word, max_k=3):
            assert is_gpi(alphabet, word, g)
