import pytest

from planrl.errors import EvaluatorError, ParseError, VocabularyMismatch
from planrl.grid.env import LEFT, RIGHT, UP, WAIT
from planrl.symbolic import (
    AbstractionFn,
    GroundAtom,
    Predicate,
    SymbolicState,
    build_abstraction,
    matches,
)


@pytest.fixture()
def ft_fn(ft_env, ft_tree):
    return build_abstraction(ft_env, ft_tree.vocabulary, ft_tree.objects, vocab_id="findtreasure")


def atom(text):
    return GroundAtom.parse(text)


def state_of(*atoms, vocab=None):
    return SymbolicState([atom(a) for a in atoms], vocabulary=vocab)


def test_atom_parse_and_str():
    a = atom("at(r1,lever)")
    assert a.predicate == "at" and a.args == ("r1", "lever")
    assert str(a) == "at(r1,lever)"
    assert atom("carrying()").args == ()
    with pytest.raises(ParseError):
        atom("at r1 lever")


def test_initial_abstraction_matches_initial_subgoal(ft_env, ft_fn, ft_tree):
    state, _ = ft_env.reset()
    current = ft_fn.abstract(state)
    expected = state_of("in_room(r1,lower)", "in_room(r2,lower)")
    assert expected.atoms <= current.atoms
    assert matches(ft_tree.nodes["both_lower"].subgoal, current)


def test_abstract_contains_lever_atom_when_on_lever(ft_env, ft_fn):
    state, _ = ft_env.reset()
    for a in [(WAIT, UP), (WAIT, LEFT)]:
        state, _ = ft_env.step(state, a)
    current = ft_fn.abstract(state)
    assert atom("at(r2,lever)") in current.atoms
    assert atom("at(r1,lever)") not in current.atoms


def test_abstract_idempotent(ft_env, ft_fn):
    state, _ = ft_env.reset()
    assert ft_fn.abstract(state) == ft_fn.abstract(state)


def test_matches_subset_semantics():
    target = state_of("at(r2,lever)")
    current = state_of("at(r2,lever)", "in_room(r1,lower)")
    assert matches(target, current)
    assert matches(state_of(), current)  # vacuous target
    assert not matches(state_of("at(r1,treasure_west)"), current)


def test_matches_exact_mode():
    a = state_of("at(r2,lever)")
    b = state_of("at(r2,lever)", "in_room(r1,lower)")
    assert not matches(a, b, exact=True)
    assert matches(b, b, exact=True)


def test_vocabulary_mismatch():
    a = state_of("at(r2,lever)", vocab="one")
    b = state_of("at(r2,lever)", vocab="two")
    with pytest.raises(VocabularyMismatch):
        matches(a, b)


def test_unknown_region_object_rejected(ft_env, ft_tree):
    objects = dict(ft_tree.objects)
    objects["nowhere"] = "region"
    with pytest.raises(EvaluatorError, match="nowhere"):
        build_abstraction(ft_env, ft_tree.vocabulary, objects, vocab_id="x")


def test_holds_rejects_unknown_atom(ft_env, ft_fn):
    state, _ = ft_env.reset()
    with pytest.raises(EvaluatorError):
        ft_fn.holds(atom("flying(r1)"), state)
    with pytest.raises(EvaluatorError):
        ft_fn.holds(atom("at(r1,mars)"), state)


def test_satisfies_equals_subset_of_abstract(ft_env, ft_fn, ft_tree):
    state, _ = ft_env.reset()
    current = ft_fn.abstract(state)
    for node in ft_tree.nodes.values():
        assert ft_fn.satisfies(state, node.subgoal) == (node.subgoal.atoms <= current.atoms)


def test_movebox_abstraction(mb_env, mb_tree):
    fn = build_abstraction(mb_env, mb_tree.vocabulary, mb_tree.objects, vocab_id="movebox")
    state, _ = mb_env.reset()
    current = fn.abstract(state)
    assert atom("box_in(base_zone)") in current.atoms
    assert atom("carrying()") not in current.atoms
    assert atom("has_key(k)") not in current.atoms
    for a in [(RIGHT, WAIT), (WAIT, LEFT), (UP, UP)]:
        state, _ = mb_env.step(state, a)
    current = fn.abstract(state)
    assert atom("carrying()") in current.atoms
    assert atom("has_key(k)") in current.atoms


def test_predicate_arity_consistency():
    with pytest.raises(Exception):
        Predicate("p", 2, ("thing",))
