"""Spatial logic over closure spaces: formulas and global model checking.

``check`` maps a formula to the exact set of points satisfying it. The
propositional fragment is plain set algebra; the two reachability modalities
are computed by flood fill over the corridor-restricted relation, with a
vectorized connected-component path for voxel grids. ``brute_force_check``
re-derives the same semantics by transitive-closure path enumeration and
shares no traversal code with ``check``; it exists purely as an oracle.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy import ndimage

from .pointset import PointSet, UniverseMismatchError
from .space import ClosureSpace, Connectivity, GridSpace, closure_of


class UnknownAtomError(KeyError):
    """Formula mentions an atom absent from the model's valuation."""


class ModelTooLargeError(ValueError):
    """Brute-force oracle invoked beyond its intended size."""


# Formula AST ---------------------------------------------------------------
#
# Core connectives only; everything else is sugar that expands at
# construction time. Nodes are frozen, so structurally equal subtrees hash
# alike and share one evaluation.


@dataclass(frozen=True)
class Formula:
    def __and__(self, other: "Formula") -> "Formula":
        return And(self, other)

    def __or__(self, other: "Formula") -> "Formula":
        return or_(self, other)

    def __invert__(self) -> "Formula":
        return Not(self)


@dataclass(frozen=True)
class TrueFormula(Formula):
    pass


@dataclass(frozen=True)
class Atom(Formula):
    name: str

    def __post_init__(self):
        if not self.name:
            raise ValueError("atom name must be nonempty")


@dataclass(frozen=True)
class Not(Formula):
    operand: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Near(Formula):
    """Closure of the operand's denotation (the set plus its border)."""

    operand: Formula


@dataclass(frozen=True)
class ForwardReach(Formula):
    """Points with a path into ``target`` whose intermediate points satisfy
    ``corridor``; zero-length paths are admitted, so ``target`` itself
    always qualifies."""

    target: Formula
    corridor: Formula


@dataclass(frozen=True)
class BackwardReach(Formula):
    """Mirror of :class:`ForwardReach` with every step reversed: points
    reachable *from* ``source`` through the corridor."""

    source: Formula
    corridor: Formula


TRUE = TrueFormula()
FALSE = Not(TRUE)


def or_(f: Formula, g: Formula) -> Formula:
    return Not(And(Not(f), Not(g)))


def implies(f: Formula, g: Formula) -> Formula:
    return or_(Not(f), g)


def interior(f: Formula) -> Formula:
    """Dual of near: points all of whose neighbors satisfy ``f``."""
    return Not(Near(Not(f)))


def atom_names(f: Formula) -> frozenset[str]:
    out: set[str] = set()
    stack = [f]
    while stack:
        node = stack.pop()
        if isinstance(node, Atom):
            out.add(node.name)
        elif isinstance(node, Not):
            stack.append(node.operand)
        elif isinstance(node, And):
            stack.extend((node.left, node.right))
        elif isinstance(node, Near):
            stack.append(node.operand)
        elif isinstance(node, ForwardReach):
            stack.extend((node.target, node.corridor))
        elif isinstance(node, BackwardReach):
            stack.extend((node.source, node.corridor))
    return frozenset(out)


# Models ---------------------------------------------------------------------


@dataclass(frozen=True)
class ClosureModel:
    """A closure space plus a valuation naming distinguished point sets."""

    space: ClosureSpace
    valuation: Mapping[str, PointSet] = field(default_factory=dict)

    def __post_init__(self):
        for name, points in self.valuation.items():
            if points.size != self.space.n:
                raise UniverseMismatchError(
                    f"valuation of atom {name!r} has universe {points.size}, "
                    f"space has {self.space.n}"
                )


# Reachability ----------------------------------------------------------------
#
# Semantics of forward reach, as implemented: s is in the result iff s is in
# the target (zero-length path), or some relation step from s lands in the
# least set Z satisfying Z = target | (corridor & pre(Z)). Z collects the
# points that can walk to the target while staying inside the corridor until
# the final hop; the extra one-step fringe around Z needs no corridor
# membership because a path's own endpoints are unconstrained.


def _reach_worklist(space: ClosureSpace, target: np.ndarray, corridor: np.ndarray,
                    *, backward: bool) -> np.ndarray:
    # Flood fill over the corridor-restricted relation. Forward reach walks
    # edges s -> s1 (s1 in R(s)), so propagation from the target runs along
    # reversed edges; backward reach is the same fill along forward edges.
    rel = space.relation if backward else space.relation.reversed()
    in_z = target.copy()
    worklist = deque(np.flatnonzero(target).tolist())
    while worklist:
        z = worklist.popleft()
        for x in rel.neighbors(z).tolist():
            if corridor[x] and not in_z[x]:
                in_z[x] = True
                worklist.append(x)
    result = target.copy()
    for z in np.flatnonzero(in_z).tolist():
        result[rel.neighbors(z)] = True
    return result


_STRUCTURES = {
    Connectivity.FACE6: ndimage.generate_binary_structure(3, 1),
    Connectivity.FULL26: ndimage.generate_binary_structure(3, 3),
}


def _reach_grid(space: GridSpace, target: np.ndarray, corridor: np.ndarray) -> np.ndarray:
    # Grid adjacency is symmetric, so the corridor points that can reach the
    # target are exactly the corridor points sharing a connected component of
    # (corridor | target) with a target point. Component labeling replaces
    # the worklist; one closure step then adds the corridor-free fringe.
    if not target.any():
        return target.copy()
    grid_target = space.as_grid(target)
    mask = space.as_grid(corridor) | grid_target
    labels, count = ndimage.label(mask, structure=_STRUCTURES[space.spec.connectivity])
    reachable = np.zeros(count + 1, dtype=bool)
    reachable[np.unique(labels[grid_target])] = True
    reachable[0] = False
    z = (reachable[labels] & mask) | grid_target
    return space.closure_bits(z.reshape(-1))


def _reach_bits(space: ClosureSpace, target: np.ndarray, corridor: np.ndarray,
                *, backward: bool) -> np.ndarray:
    if isinstance(space, GridSpace):
        return _reach_grid(space, target, corridor)
    return _reach_worklist(space, target, corridor, backward=backward)


def sat_forward_reach(model: ClosureModel, target: PointSet, corridor: PointSet) -> PointSet:
    """Points from which a path leads into ``target`` through ``corridor``."""
    _check_model_set(model, target)
    _check_model_set(model, corridor)
    return PointSet(_reach_bits(model.space, target.bits, corridor.bits, backward=False))


def sat_backward_reach(model: ClosureModel, source: PointSet, corridor: PointSet) -> PointSet:
    """Points into which a path arrives from ``source`` through ``corridor``."""
    _check_model_set(model, source)
    _check_model_set(model, corridor)
    return PointSet(_reach_bits(model.space, source.bits, corridor.bits, backward=True))


def _check_model_set(model: ClosureModel, xs: PointSet) -> None:
    if xs.size != model.space.n:
        raise UniverseMismatchError(
            f"point set universe {xs.size} does not match model size {model.space.n}"
        )


# Checker ---------------------------------------------------------------------


def check(model: ClosureModel, f: Formula,
          memo: dict[Formula, PointSet] | None = None) -> PointSet:
    """Global model checking: the set of points satisfying ``f``.

    Evaluation is bottom-up with memoization keyed on structural equality,
    so repeated subformulas are computed once. Passing a shared ``memo``
    lets one session reuse denotations across several formulas.
    """
    if memo is None:
        memo = {}
    cached = memo.get(f)
    if cached is not None:
        return cached
    space = model.space
    if isinstance(f, TrueFormula):
        result = PointSet.full(space.n)
    elif isinstance(f, Atom):
        try:
            result = model.valuation[f.name]
        except KeyError:
            raise UnknownAtomError(f.name) from None
    elif isinstance(f, Not):
        result = check(model, f.operand, memo).complement()
    elif isinstance(f, And):
        result = check(model, f.left, memo) & check(model, f.right, memo)
    elif isinstance(f, Near):
        result = closure_of(space, check(model, f.operand, memo))
    elif isinstance(f, ForwardReach):
        result = sat_forward_reach(
            model, check(model, f.target, memo), check(model, f.corridor, memo)
        )
    elif isinstance(f, BackwardReach):
        result = sat_backward_reach(
            model, check(model, f.source, memo), check(model, f.corridor, memo)
        )
    else:
        raise TypeError(f"not a formula node: {f!r}")
    memo[f] = result
    return result


# Brute-force oracle -----------------------------------------------------------


DEFAULT_ORACLE_LIMIT = 24


def brute_force_check(model: ClosureModel, f: Formula,
                      max_points: int = DEFAULT_ORACLE_LIMIT) -> PointSet:
    """Reference semantics by explicit path enumeration. Oracle use only.

    Reachability is decided from the reflexive-transitive closure (Warshall)
    of the relation restricted to corridor targets: a point satisfies
    forward reach iff it is in the target, or one of its corridor-closure
    descendants has a direct edge into the target. No code is shared with
    ``check``.
    """
    n = model.space.n
    if n > max_points:
        raise ModelTooLargeError(f"oracle limited to {max_points} points, model has {n}")
    succ = [set(model.space.relation.neighbors(x).tolist()) for x in range(n)]
    members = _brute_eval(model, f, succ)
    return PointSet.from_indices(n, members)


def _brute_eval(model: ClosureModel, f: Formula, succ: list[set[int]]) -> set[int]:
    n = model.space.n
    universe = set(range(n))
    if isinstance(f, TrueFormula):
        return set(universe)
    if isinstance(f, Atom):
        if f.name not in model.valuation:
            raise UnknownAtomError(f.name)
        return set(model.valuation[f.name].indices().tolist())
    if isinstance(f, Not):
        return universe - _brute_eval(model, f.operand, succ)
    if isinstance(f, And):
        return _brute_eval(model, f.left, succ) & _brute_eval(model, f.right, succ)
    if isinstance(f, Near):
        sat = _brute_eval(model, f.operand, succ)
        return {t for x in sat for t in succ[x]}
    if isinstance(f, ForwardReach):
        target = _brute_eval(model, f.target, succ)
        corridor = _brute_eval(model, f.corridor, succ)
        return _brute_reach(succ, target, corridor)
    if isinstance(f, BackwardReach):
        source = _brute_eval(model, f.source, succ)
        corridor = _brute_eval(model, f.corridor, succ)
        pred = [set() for _ in range(n)]
        for x, row in enumerate(succ):
            for t in row:
                pred[t].add(x)
        return _brute_reach(pred, source, corridor)
    raise TypeError(f"not a formula node: {f!r}")


def _brute_reach(step: list[set[int]], goal: set[int], corridor: set[int]) -> set[int]:
    n = len(step)
    # closure[x] = points reachable from x via edges whose endpoints all lie
    # in the corridor (zero or more hops).
    closure = [({x} | (step[x] & corridor)) for x in range(n)]
    for k in range(n):
        for x in range(n):
            if k in closure[x]:
                closure[x] |= closure[k]
    result = set(goal)
    for s in range(n):
        if s in result:
            continue
        for mid in closure[s]:
            if step[mid] & goal:
                result.add(s)
                break
    return result
