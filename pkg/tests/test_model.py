import itertools

import pytest
from hypothesis import given, strategies as st

from intvass.model import (
    Add,
    Affine,
    Configuration,
    Machine,
    MachineError,
    Reset,
    apply,
    make_machine,
    normalize,
    run,
    step,
)
from intvass.machine_io import format_machine, parse_configuration, parse_machine
from intvass.oracle import reach_set_bounded


def naive_matvec(matrix, vec):
    return tuple(sum(matrix[i][j] * vec[j] for j in range(len(vec))) for i in range(len(matrix)))


def test_apply_add():
    assert apply(Add((1, -2)), (0, 0)) == (1, -2)


def test_apply_reset():
    assert apply(Reset(2), (3, 7)) == (3, 0)


def test_apply_affine_matches_naive_multiply():
    matrix = ((2, 0), (0, 1))
    offset = (1, 0)
    v = (3, 5)
    expected = tuple(a + b for a, b in zip(naive_matvec(matrix, v), offset))
    assert expected == (7, 5)
    assert apply(Affine(matrix, offset), v) == (7, 5)


def test_apply_dimension_mismatch():
    with pytest.raises(MachineError):
        apply(Add((1, 2)), (0,))


@pytest.fixture
def loop_machine():
    return make_machine(
        "loop", "zvass", 1, 1, {"a": Add((1,))}, [(1, "a", 1)]
    )


def test_step_self_loop(loop_machine):
    assert step(loop_machine, Configuration(1, (0,)), "a") == {Configuration(1, (1,))}


def test_step_no_transition():
    machine = make_machine("empty", "zvass", 1, 1, {"a": Add((1,))}, [])
    assert step(machine, Configuration(1, (0,)), "a") == set()


def test_step_branches():
    machine = make_machine(
        "branch", "zvass", 1, 3, {"a": Add((1,))}, [(1, "a", 2), (1, "a", 3)]
    )
    assert step(machine, Configuration(1, (0,)), "a") == {
        Configuration(2, (1,)),
        Configuration(3, (1,)),
    }


def test_run_empty_word(loop_machine):
    start = Configuration(1, (5,))
    assert run(loop_machine, start, ()) == {start}


def test_run_add_reset_add():
    machine = make_machine(
        "ar", "zvassr", 1, 1, {"a": Add((1,))}, [(1, "a", 1), (1, "r1", 1)], monitored=1
    )
    assert run(machine, Configuration(1, (0,)), ("a", "r1", "a")) == {Configuration(1, (1,))}


def test_run_is_fold_of_apply():
    # the word alone fixes the counters: stepwise reading equals folding the
    # per-letter transforms, whatever path the nondeterminism takes
    machine = make_machine(
        "fold",
        "zvassr",
        2,
        2,
        {"a": Add((1, -1)), "b": Add((0, 2))},
        [(1, "a", 2), (2, "b", 1), (1, "r1", 1), (2, "r2", 2)],
        monitored=2,
    )
    for word in itertools.product(("a", "b", "r1", "r2"), repeat=4):
        folded = (3, 4)
        for letter in word:
            folded = apply(machine.effects[letter], folded)
        for final in run(machine, Configuration(1, (3, 4)), word):
            assert final.counters == folded


def test_zvass_effects_commute_on_single_state():
    machine = make_machine(
        "commute", "zvas", 2, 1, {"a": Add((1, 2)), "b": Add((-1, 3))}, [(1, "a", 1), (1, "b", 1)]
    )
    words = set(itertools.permutations(("a", "a", "b", "b", "a")))
    finals = {next(iter(run(machine, Configuration(1, (0, 0)), w))).counters for w in words}
    assert len(finals) == 1


# -- normalize -----------------------------------------------------------------


def test_normalize_keeps_normal_machines():
    machine = make_machine(
        "plain", "zvassr", 2, 2, {"a": Add((1, 0))}, [(1, "a", 2), (2, "r1", 1)], monitored=2
    )
    norm = normalize(machine)
    assert norm.is_normal_form()
    assert norm.num_states == machine.num_states
    assert {(t.src, t.letter, t.dst) for t in norm.transitions} == {
        (t.src, t.letter, t.dst) for t in machine.transitions
    }


def test_normalize_splits_mixed_transition():
    # resets {1,2} while adding (0,0,5): one add plus two resets via fresh states
    mixed = Affine(
        ((0, 0, 0), (0, 0, 0), (0, 0, 1)),
        (0, 0, 5),
    )
    machine = make_machine("mixed", "zvassr", 3, 2, {"m": mixed}, [(1, "m", 2)], monitored=0)
    norm = normalize(machine)
    assert norm.is_normal_form()
    assert norm.num_states == 2 + 2  # chain r1, r2, add through 2 fresh states
    expected = apply(mixed, (7, 8, 9))
    got = run(norm, Configuration(1, (7, 8, 9)), ("r1", "r2", "m+"))
    assert got == {Configuration(2, expected)}
    assert expected == (0, 0, 14)


def test_normalize_reset_then_add_order():
    # diag(0,1) with offset (2,3): v -> (2, y+3); the add must come after the
    # reset or the reset coordinate would lose its offset
    eff = Affine(((0, 0), (0, 1)), (2, 3))
    machine = make_machine("order", "zvassr", 2, 1, {"m": eff}, [(1, "m", 1)])
    assert apply(eff, (9, 4)) == (2, 7)
    norm = normalize(machine)
    finals = run(norm, Configuration(1, (9, 4)), ("r1", "m+"))
    assert finals == {Configuration(1, (2, 7))}


@pytest.mark.parametrize("seed", range(6))
def test_normalize_preserves_bounded_reachability(seed):
    import random

    rng = random.Random(seed)
    effects = {}
    letters = ["a", "b"]
    for name in letters:
        if rng.random() < 0.5:
            effects[name] = Add(tuple(rng.randint(-1, 1) for _ in range(2)))
        else:
            mask = [rng.randint(0, 1), rng.randint(0, 1)]
            offset = tuple(rng.randint(-1, 1) for _ in range(2))
            effects[name] = Affine(tuple(tuple(mask[i] if i == j else 0 for j in range(2)) for i in range(2)), offset)
    transitions = [
        (rng.randint(1, 2), rng.choice(letters), rng.randint(1, 2)) for _ in range(3)
    ]
    machine = make_machine("rand", "zvassr", 2, 2, effects, transitions, monitored=0)
    norm = normalize(machine)
    src = Configuration(1, (0, 0))
    orig = {(q, v) for q, v in reach_set_bounded(machine, src, 4) if q <= 2}
    normed = {(q, v) for q, v in reach_set_bounded(norm, src, 12) if q <= 2}
    assert orig <= normed
    # nothing new between original states either: every normalized-reachable
    # original configuration is reachable in the original within the blowup
    orig_wide = {(q, v) for q, v in reach_set_bounded(machine, src, 12) if q <= 2}
    normed_tight = {(q, v) for q, v in reach_set_bounded(norm, src, 4) if q <= 2}
    assert normed_tight <= orig_wide


def test_normalize_rejects_zrm():
    machine = make_machine(
        "zrm", "zrm", 1, 1, {"a": Affine(((2,),), (0,))}, [(1, "a", 1)]
    )
    with pytest.raises(MachineError):
        normalize(machine)


# -- machine files --------------------------------------------------------------


MACHINE_TEXT = """\
machine demo
class zvassr
dim 2
states 1 2
letters a b   # two plain letters
effect a add 1 0
effect b add -1 2
transition 1 a 2
transition 2 r1 1   # monitored letters are implicit
transition 2 b 2
"""


def test_machine_file_round_trip():
    machine = parse_machine(MACHINE_TEXT, "demo.zvassr")
    assert machine.dim == 2
    assert machine.plain == ("a", "b")
    assert machine.monitored == ("r1", "r2")
    text = format_machine(machine)
    again = parse_machine(text)
    assert set(again.transitions) == set(machine.transitions)
    assert again.effects == machine.effects


def test_machine_file_errors_carry_position():
    bad = "machine x\nclass zvassr\ndim 1\nstates 1\neffect a add notanint\n"
    with pytest.raises(Exception) as info:
        parse_machine(bad, "bad.zvassr")
    assert "bad.zvassr:5" in str(info.value)


def test_parse_configuration():
    c = parse_configuration("2:1,-3", 2)
    assert c == Configuration(2, (1, -3))
    assert parse_configuration("1", 2) == Configuration(1, (0, 0))


@given(st.lists(st.integers(-5, 5), min_size=1, max_size=4))
def test_affine_identity_matches_add(delta):
    d = len(delta)
    identity = tuple(tuple(1 if i == j else 0 for j in range(d)) for i in range(d))
    v = tuple(range(d))
    assert apply(Affine(identity, tuple(delta)), v) == apply(Add(tuple(delta)), v)
