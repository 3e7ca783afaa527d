"""Observer-set reduction.

Non-observer nodes split into equivalence classes: two nodes are
equivalent when the path between them avoids every observer, i.e. the
classes are the components left after deleting the observers. A class is
feasible for a given observation exactly when its boundary (the adjacent
observers) contains the earliest-infected observer; the source almost
surely lies in a feasible class, the feasible boundaries share a common
observer, and the boundary times of the feasible union carry all the
information the full observation has about the source.

The fast feasibility test is the boundary/argmin characterization; the
definition-level check (infection order respects ancestor order in every
subtree hanging off a boundary observer) is kept as a slow oracle for
cross-validation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .errors import (
    EmptyObserversError,
    NodeOutOfRangeError,
    NotAStarError,
    ObserversCoverAllNodesError,
    TiedMinimumError,
)
from .simulate import Observation
from .tree import Tree


@dataclass(frozen=True)
class EquivalenceClass:
    """A component of non-observers plus the observers adjacent to it."""

    members: frozenset
    boundary: frozenset


@dataclass(frozen=True)
class StarArrangement:
    """Classes whose boundaries share an observer; the shared observer is
    the center and is only defined when there is more than one class."""

    classes: tuple
    center: int | None


def _validated_observers(tree: Tree, observers: Iterable[int]) -> frozenset:
    obs = frozenset(int(o) for o in observers)
    if not obs:
        raise EmptyObserversError("observer set is empty")
    for o in obs:
        if not 0 <= o < tree.n:
            raise NodeOutOfRangeError(f"observer {o} outside 0..{tree.n - 1}")
    if len(obs) >= tree.n:
        raise ObserversCoverAllNodesError("observers must be a proper subset of the nodes")
    return obs


def _validated_observation(observers: frozenset, obs: Observation) -> Observation:
    if set(obs.times) != set(observers):
        raise ValueError("observation must cover exactly the observer set")
    return obs


def equivalence_classes(tree: Tree, observers: Iterable[int]) -> list[EquivalenceClass]:
    """Components of the forest obtained by deleting the observers,
    each with its boundary. Deterministic order (by smallest member)."""
    obs = _validated_observers(tree, observers)
    unvisited = set(range(tree.n)) - obs
    classes = []
    while unvisited:
        start = min(unvisited)
        members = {start}
        boundary = set()
        stack = [start]
        unvisited.discard(start)
        while stack:
            x = stack.pop()
            for y in tree.adjacency[x]:
                if y in obs:
                    boundary.add(y)
                elif y not in members:
                    members.add(y)
                    unvisited.discard(y)
                    stack.append(y)
        classes.append(EquivalenceClass(members=frozenset(members), boundary=frozenset(boundary)))
    classes.sort(key=lambda c: min(c.members))
    return classes


def first_infected_observer(obs: Observation) -> int:
    """Observer with the minimum time; exact ties abort."""
    items = sorted(obs.times.items())
    best = min(t for _, t in items)
    hits = [o for o, t in items if t == best]
    if len(hits) > 1:
        raise TiedMinimumError(f"observers {hits} share the minimum time {best}")
    return hits[0]


def feasible_classes(
    tree: Tree, observers: Iterable[int], obs: Observation
) -> list[EquivalenceClass]:
    """Classes whose boundary contains the earliest-infected observer."""
    observers = _validated_observers(tree, observers)
    obs = _validated_observation(observers, obs)
    winner = first_infected_observer(obs)
    return [c for c in equivalence_classes(tree, observers) if winner in c.boundary]


def feasible_classes_definitional(
    tree: Tree, observers: Iterable[int], obs: Observation
) -> list[EquivalenceClass]:
    """Slow reference implementation of feasibility.

    A class r is feasible when, for every boundary observer o, walking
    the subtree hanging off o away from r never meets an observer whose
    time is below that of the nearest observer between it and o.
    """
    observers = _validated_observers(tree, observers)
    obs = _validated_observation(observers, obs)
    out = []
    for cls in equivalence_classes(tree, observers):
        if all(_order_respected(tree, observers, obs, o, cls) for o in sorted(cls.boundary)):
            out.append(cls)
    return out


def _order_respected(tree, observers, obs, root_obs, cls) -> bool:
    # DFS over nodes whose path to root_obs avoids the class; carry the
    # infection time of the last observer seen on the way down
    stack = [(root_obs, obs.times[root_obs])]
    seen = {root_obs}
    while stack:
        x, floor_time = stack.pop()
        for y in tree.adjacency[x]:
            if y in seen or y in cls.members:
                continue
            seen.add(y)
            if y in observers:
                if obs.times[y] < floor_time:
                    return False
                stack.append((y, obs.times[y]))
            else:
                stack.append((y, floor_time))
    return True


def star_arrangement_of(classes: Iterable[EquivalenceClass]) -> StarArrangement:
    """Bundle classes into a star arrangement.

    Raises NotAStarError when the boundaries share no observer, which
    cannot happen for the output of feasible_classes.
    """
    classes = tuple(classes)
    if not classes:
        raise ValueError("no classes given")
    common = frozenset.intersection(*(c.boundary for c in classes))
    if not common:
        raise NotAStarError("class boundaries share no observer")
    if len(classes) == 1:
        return StarArrangement(classes=classes, center=None)
    if len(common) > 1:
        raise NotAStarError(f"multiple shared boundary observers {sorted(common)} imply a cycle")
    return StarArrangement(classes=classes, center=next(iter(common)))


def sufficient_observers(tree: Tree, observers: Iterable[int], obs: Observation) -> frozenset:
    """Boundary of the union of feasible classes: the observers whose
    times are jointly sufficient for locating the source."""
    feas = feasible_classes(tree, observers, obs)
    out: set = set()
    for c in feas:
        out |= c.boundary
    return frozenset(out)


def feasible_candidates(tree: Tree, observers: Iterable[int], obs: Observation) -> frozenset:
    """Union of the feasible classes: every node the source can still be."""
    feas = feasible_classes(tree, observers, obs)
    out: set = set()
    for c in feas:
        out |= c.members
    return frozenset(out)
