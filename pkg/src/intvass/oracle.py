"""Bounded brute-force ground truth: BFS over configurations and ILP search.

Counter values are unbounded over the integers, but a run of length L moves
each counter by at most L times the largest offset, so breadth-first search
up to a length bound is exact within that bound.  Results are deterministic:
transitions fire in id order and the first (shortest, lexicographically
least) witness is kept.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable

from .model import Configuration, Machine, Run, Transition, Vector, apply, simulate_transitions


@dataclass
class BoundedAnswer:
    status: str  # found | none_within_bound
    witness: Run | None = None
    vector: Vector | None = None
    explored: int = 0

    @property
    def found(self) -> bool:
        return self.status == "found"


def _successors(machine: Machine, config: Configuration) -> Iterable[tuple[Transition, Configuration]]:
    for t in machine.sorted_transitions():
        if t.src == config.state:
            yield t, Configuration(t.dst, apply(machine.effects[t.letter], config.counters))


def bfs(machine: Machine, src: Configuration, dst: Configuration, mode: str, max_len: int) -> BoundedAnswer:
    """Shortest witness run of length <= max_len, or none_within_bound."""
    if mode not in ("reach", "cover"):
        raise ValueError(f"unknown mode {mode!r}")

    def is_goal(c: Configuration) -> bool:
        if c.state != dst.state:
            return False
        if mode == "reach":
            return c.counters == dst.counters
        return all(a >= b for a, b in zip(c.counters, dst.counters))

    parent: dict[Configuration, tuple[Configuration, Transition] | None] = {src: None}
    frontier = deque([(src, 0)])
    explored = 0
    while frontier:
        config, depth = frontier.popleft()
        explored += 1
        if is_goal(config):
            steps: list[Transition] = []
            cur = config
            while parent[cur] is not None:
                prev, t = parent[cur]  # type: ignore[misc]
                steps.append(t)
                cur = prev
            run = simulate_transitions(machine, src, tuple(reversed(steps)))
            return BoundedAnswer("found", witness=run, vector=config.counters, explored=explored)
        if depth == max_len:
            continue
        for t, nxt in _successors(machine, config):
            if nxt not in parent:
                parent[nxt] = (config, t)
                frontier.append((nxt, depth + 1))
    return BoundedAnswer("none_within_bound", explored=explored)


def reach_set_bounded(machine: Machine, src: Configuration, max_len: int) -> set[tuple[int, Vector]]:
    """All configurations (state, counters) reachable within max_len steps."""
    seen = {(src.state, src.counters)}
    frontier = deque([(src, 0)])
    while frontier:
        config, depth = frontier.popleft()
        if depth == max_len:
            continue
        for _, nxt in _successors(machine, config):
            key = (nxt.state, nxt.counters)
            if key not in seen:
                seen.add(key)
                frontier.append((nxt, depth + 1))
    return seen


def incl_counterexample_bounded(
    machine_a: Machine,
    src_a: Configuration,
    machine_b: Machine,
    src_b: Configuration,
    max_len_a: int,
    max_len_b: int,
    confirm: Callable[[Vector], bool] | None = None,
) -> BoundedAnswer:
    """A candidate vector reachable in A but not (boundedly) in B.

    Reach sets are infinite, so a candidate only proves non-inclusion once
    ``confirm`` (a complete non-membership check, normally the solver-backed
    one) agrees; unconfirmed candidates are skipped.  Without a confirmer the
    first candidate is returned as-is and the caller owns the caveat.
    """
    vec_a = {v for _, v in reach_set_bounded(machine_a, src_a, max_len_a)}
    vec_b = {v for _, v in reach_set_bounded(machine_b, src_b, max_len_b)}
    candidates = sorted(vec_a - vec_b)
    explored = len(vec_a) + len(vec_b)
    for cand in candidates:
        if confirm is None or confirm(cand):
            return BoundedAnswer("found", vector=cand, explored=explored)
    return BoundedAnswer("none_within_bound", explored=explored)


def ilp_feasible(matrix: tuple[tuple[int, ...], ...], rhs: Vector, bound: int) -> tuple[int, ...] | None:
    """Least x in [0, bound]^n with matrix @ x = rhs, by plain enumeration."""
    if not matrix:
        return ()
    n = len(matrix[0])

    def column_sum(x: tuple[int, ...]) -> tuple[int, ...]:
        return tuple(sum(row[j] * x[j] for j in range(n)) for row in matrix)

    import itertools

    for x in itertools.product(range(bound + 1), repeat=n):
        if column_sum(x) == rhs:
            return x
    return None
