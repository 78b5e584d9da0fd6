"""Checker semantics against the brute-force oracle and the logic laws."""
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from voxlab import (
    And,
    Atom,
    BackwardReach,
    ClosureModel,
    Connectivity,
    FALSE,
    ForwardReach,
    GridSpec,
    Near,
    Not,
    PointSet,
    Relation,
    TRUE,
    brute_force_check,
    check,
    closure_of,
    grid_relation,
    induced_space,
    sat_backward_reach,
    sat_forward_reach,
)
from voxlab.logic import (
    ModelTooLargeError,
    UnknownAtomError,
    atom_names,
    interior,
    or_,
)


def _ps(n, xs):
    return PointSet.from_indices(n, xs)


# Spec examples ---------------------------------------------------------------


def test_forward_reach_through_corridor(path_model):
    # Derived by enumerating all simple paths at n=3.
    result = check(path_model, ForwardReach(Atom("p"), Atom("q")))
    assert sorted(result) == [0, 1, 2]


def test_forward_reach_empty_corridor(path_model):
    # 0 has no corridor-free path; 1 reaches 2 in one step; 2 satisfies p.
    result = check(path_model, ForwardReach(Atom("p"), FALSE))
    assert sorted(result) == [1, 2]


def test_contradiction_is_empty(path_model):
    f = Atom("p")
    assert check(path_model, And(f, Not(f))).is_empty()


def test_sat_forward_reach_direct(path_model):
    n = 3
    assert sorted(sat_forward_reach(path_model, _ps(n, [2]), _ps(n, [1]))) == [0, 1, 2]
    assert sat_forward_reach(path_model, PointSet.empty(n), _ps(n, [1])).is_empty()
    full = PointSet.full(n)
    assert sat_forward_reach(path_model, full, PointSet.empty(n)) == full


def test_sat_backward_reach_direct(path_model):
    n = 3
    assert sorted(sat_backward_reach(path_model, _ps(n, [0]), PointSet.empty(n))) == [0, 1]
    assert sorted(sat_backward_reach(path_model, _ps(n, [0]), _ps(n, [1]))) == [0, 1, 2]
    assert sat_backward_reach(path_model, PointSet.empty(n), full_corridor := PointSet.full(n)).is_empty()
    del full_corridor


def test_backward_differs_from_forward_on_asymmetric_relation():
    # 0 -> 1 -> 2 chain (reflexive); nothing flows back.
    rel = Relation.from_mapping(3, {0: [0, 1], 1: [1, 2], 2: [2]})
    model = ClosureModel(induced_space(rel), {"a": _ps(3, [0])})
    fwd = check(model, ForwardReach(Atom("a"), TRUE))
    bwd = check(model, BackwardReach(Atom("a"), TRUE))
    assert sorted(fwd) == [0]
    assert sorted(bwd) == [0, 1, 2]


def test_near_is_closure(path_model):
    for xs in ([0], [2], [0, 2], []):
        model = ClosureModel(path_model.space, {"a": _ps(3, xs)})
        assert check(model, Near(Atom("a"))) == closure_of(model.space, _ps(3, xs))


def test_near_equals_one_step_backward_reach_on_reflexive(path_model):
    # On reflexive relations the closure coincides with reach-from in one hop.
    for xs in ([0], [1], [0, 2]):
        model = ClosureModel(path_model.space, {"a": _ps(3, xs)})
        assert check(model, Near(Atom("a"))) == check(
            model, BackwardReach(Atom("a"), FALSE)
        )


def test_interior_definition(path_model):
    f = interior(Atom("q"))
    assert check(path_model, f) == check(path_model, Not(Near(Not(Atom("q")))))


def test_unknown_atom_raises(path_model):
    with pytest.raises(UnknownAtomError):
        check(path_model, Atom("nope"))
    with pytest.raises(UnknownAtomError):
        brute_force_check(path_model, Atom("nope"))


def test_universe_mismatch_in_valuation(path_space):
    with pytest.raises(Exception):
        ClosureModel(path_space, {"a": PointSet.empty(5)})


# Oracle ------------------------------------------------------------------------


def test_oracle_agrees_on_examples(path_model):
    for f in (
        ForwardReach(Atom("p"), Atom("q")),
        ForwardReach(Atom("p"), FALSE),
        And(Atom("p"), Not(Atom("p"))),
        TRUE,
    ):
        assert brute_force_check(path_model, f) == check(path_model, f)


def test_oracle_true_is_full(path_model):
    assert brute_force_check(path_model, TRUE) == PointSet.full(3)


def test_oracle_size_limit(path_model):
    with pytest.raises(ModelTooLargeError):
        brute_force_check(path_model, TRUE, max_points=2)


# Random equivalence (the acceptance suite runs the full 500-pair version) -------


def random_model(rng, n):
    rows = [rng.choice(n, size=rng.integers(0, n + 1), replace=False) for _ in range(n)]
    space = induced_space(Relation(n, [r.tolist() for r in rows]))
    valuation = {
        name: PointSet(rng.random(n) < rng.random())
        for name in ("a", "b", "c")
    }
    return ClosureModel(space, valuation)


def random_formula(rng, depth):
    if depth == 0:
        choice = rng.integers(0, 4)
        if choice == 3:
            return TRUE
        return Atom("abc"[choice])
    choice = rng.integers(0, 6)
    if choice == 0:
        return Not(random_formula(rng, depth - 1))
    if choice == 1:
        return And(random_formula(rng, depth - 1), random_formula(rng, depth - 1))
    if choice == 2:
        return Near(random_formula(rng, depth - 1))
    if choice == 3:
        return ForwardReach(random_formula(rng, depth - 1), random_formula(rng, depth - 1))
    if choice == 4:
        return BackwardReach(random_formula(rng, depth - 1), random_formula(rng, depth - 1))
    return or_(random_formula(rng, depth - 1), random_formula(rng, depth - 1))


def test_check_equals_oracle_on_random_models():
    rng = np.random.default_rng(1234)
    for _ in range(120):
        n = int(rng.integers(1, 13))
        model = random_model(rng, n)
        f = random_formula(rng, int(rng.integers(0, 4)))
        assert check(model, f) == brute_force_check(model, f)


def test_check_equals_oracle_on_random_grid_models():
    rng = np.random.default_rng(77)
    for _ in range(60):
        dims = tuple(int(d) for d in rng.integers(1, 4, size=3))
        conn = Connectivity.FACE6 if rng.random() < 0.5 else Connectivity.FULL26
        from voxlab import GridSpace

        space = GridSpace(GridSpec(dims, connectivity=conn))
        n = space.n
        model = ClosureModel(space, {
            "a": PointSet(rng.random(n) < 0.4),
            "b": PointSet(rng.random(n) < 0.5),
            "c": PointSet(rng.random(n) < 0.6),
        })
        f = random_formula(rng, int(rng.integers(1, 4)))
        assert check(model, f) == brute_force_check(model, f, max_points=27)


# Laws -------------------------------------------------------------------------


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 10), st.data())
def test_monotonicity_of_reach(n, data):
    rng_rows = data.draw(st.lists(
        st.lists(st.integers(0, n - 1), max_size=n), min_size=n, max_size=n))
    model = ClosureModel(induced_space(Relation(n, rng_rows)))
    small = data.draw(st.lists(st.integers(0, n - 1), max_size=n))
    extra = data.draw(st.lists(st.integers(0, n - 1), max_size=n))
    corridor = data.draw(st.lists(st.integers(0, n - 1), max_size=n))

    target_small = _ps(n, small)
    target_big = target_small | _ps(n, extra)
    cor = _ps(n, corridor)
    assert sat_forward_reach(model, target_small, cor).subset_of(
        sat_forward_reach(model, target_big, cor))
    assert sat_backward_reach(model, target_small, cor).subset_of(
        sat_backward_reach(model, target_big, cor))
    # Corridor monotonicity
    cor_big = cor | _ps(n, extra)
    assert sat_forward_reach(model, target_small, cor).subset_of(
        sat_forward_reach(model, target_small, cor_big))
    # Zero-length paths: the target is always included.
    assert target_small.subset_of(sat_forward_reach(model, target_small, cor))


def test_de_morgan_for_check(path_model):
    f, g = Atom("p"), Atom("q")
    assert check(path_model, or_(f, g)) == check(path_model, f) | check(path_model, g)
    assert check(path_model, Not(f)) == ~check(path_model, f)


def test_forward_equals_backward_on_symmetric():
    rng = np.random.default_rng(5)
    for _ in range(30):
        spec = GridSpec(tuple(int(d) for d in rng.integers(1, 4, size=3)))
        space = induced_space(grid_relation(spec))
        model = ClosureModel(space)
        n = space.n
        target = PointSet(rng.random(n) < 0.3)
        corridor = PointSet(rng.random(n) < 0.5)
        assert sat_forward_reach(model, target, corridor) == \
            sat_backward_reach(model, target, corridor)


def test_determinism(path_model):
    f = ForwardReach(or_(Atom("p"), Atom("q")), Near(Atom("q")))
    assert check(path_model, f) == check(path_model, f)


def test_memo_shares_identical_subtrees(path_model):
    f = And(ForwardReach(Atom("p"), Atom("q")), ForwardReach(Atom("p"), Atom("q")))
    memo = {}
    check(path_model, f, memo)
    assert ForwardReach(Atom("p"), Atom("q")) in memo


def test_atom_names():
    f = And(ForwardReach(Atom("p"), Atom("q")), Not(Near(Atom("r"))))
    assert atom_names(f) == frozenset({"p", "q", "r"})
