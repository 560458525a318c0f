import random

import pytest

from common.errors import AlgebraError, NormalizationError, TermSyntaxError
from tropical.algebra import MIN_MAX, MIN_PLUS
from tropical.arena import TreeArena, tree_game
from tropical.evaluator import eval_exhaustive
from tropical.smallstep import (
    PlayerNode,
    PositionTerm,
    RuleSet,
    Value,
    normalize,
    parse_term,
    reduction_graph,
    reduction_sequence,
    render_term,
    step,
    step_labeled,
    subterms,
    term_of_game,
)


def test_value_is_normal():
    assert step(MIN_PLUS, Value(4)) == ()


def test_player_reduce_then_return():
    term = parse_term("P[ 3 5 ]")
    assert step(MIN_PLUS, term) == (PlayerNode((Value(3),)),)
    assert step(MIN_PLUS, PlayerNode((Value(3),))) == (Value(3),)


def test_player_cut_reduct():
    term = parse_term("P[ 2 O[ 3 4 ] ]")
    reducts = step_labeled(MIN_PLUS, term, RuleSet.with_player_cuts())
    assert ("p_cut", parse_term("P[ 2 ]")) in reducts
    assert ("o_reduce", parse_term("P[ 2 O[ 7 ] ]")) in reducts
    # without cut rules only the inner reduction applies
    assert step(MIN_PLUS, term) == (parse_term("P[ 2 O[ 7 ] ]"),)


def test_player_will_fires_wherever_it_matches():
    term = parse_term("P[ 2 O[ 3 P[ 4 1 ] ] ]")
    reducts = step(MIN_PLUS, term, RuleSet.with_player_cuts())
    assert parse_term("P[ 2 O[ 3 P[ 2 4 1 ] ] ]") in reducts
    assert parse_term("P[ 2 ]") in reducts
    # and again on its own output
    again = step(MIN_PLUS, parse_term("P[ 2 O[ 3 P[ 2 4 1 ] ] ]"), RuleSet.with_player_cuts())
    assert parse_term("P[ 2 O[ 3 P[ 2 2 4 1 ] ] ]") in again


def test_opponent_rules_need_bi_tropical():
    with pytest.raises(AlgebraError):
        step(MIN_PLUS, Value(1), RuleSet.with_all_cuts())
    reducts = step_labeled(MIN_MAX, parse_term("O[ 5 P[ 3 7 ] 1 ]"), RuleSet.with_all_cuts())
    assert ("o_cut", parse_term("O[ 5 1 ]")) in reducts


def test_term_text_roundtrip():
    text = "P[ O[ 2 inf ] O[ 1 P[ -inf 9 ] ] ]"
    assert render_term(parse_term(text)) == text
    assert render_term(PlayerNode((PositionTerm((0,)), Value(2)))) == "P[ @(0,) 2 ]"
    with pytest.raises(TermSyntaxError):
        parse_term("P[ ]")
    with pytest.raises(TermSyntaxError):
        PlayerNode(())


def test_normalize_terminal_position():
    game, root = tree_game("7", MIN_PLUS)
    assert normalize(game, term_of_game(game, root)) == 7


def test_normalize_hand_game():
    game, root = tree_game("P[ O[ 2 3 ] O[ 1 9 ] ]", MIN_PLUS)
    assert normalize(game, term_of_game(game, root)) == 5
    assert normalize(game, term_of_game(game, root), RuleSet.with_player_cuts()) == 5


def test_normalize_budget_and_stuck_terms():
    game, root = tree_game("P[ O[ 2 3 ] O[ 1 9 ] ]", MIN_PLUS)
    with pytest.raises(NormalizationError):
        normalize(game, term_of_game(game, root), budget=3)
    with pytest.raises(NormalizationError):
        normalize(game, term_of_game(game, root), RuleSet(payoff=False))
    with pytest.raises(NormalizationError):
        normalize(MIN_PLUS, PositionTerm(()))


def test_normalize_is_leftmost_innermost():
    term = parse_term("P[ 2 O[ 3 P[ 4 1 ] ] ]")
    expected = [parse_term(s) for s in ("P[ 2 O[ 3 P[ 4 1 ] ] ]", "P[ 2 O[ 3 P[ 1 ] ] ]", "P[ 2 O[ 3 1 ] ]", "P[ 2 O[ 4 ] ]", "P[ 2 4 ]", "P[ 2 ]")]
    # same path with the cut rules on: no Will, and the inner reduction goes before any cut at the root
    for rules in (RuleSet.base(), RuleSet.with_player_cuts()):
        assert list(reduction_sequence(MIN_PLUS, term, rules)) == expected + [Value(2)]
    sequence = list(reduction_sequence(MIN_PLUS, parse_term("P[ 2 O[ 3 5 ] 7 ]"), RuleSet.with_player_cuts()))
    assert sequence[1] == parse_term("P[ 2 O[ 8 ] 7 ]")


def test_single_value_graph():
    graph = reduction_graph(MIN_PLUS, Value(4))
    assert len(graph.nodes) == 1
    assert graph.normal_forms == [Value(4)]
    assert graph.closed


def test_associativity_fork_converges():
    graph = reduction_graph(MIN_PLUS, parse_term("P[ 1 2 3 ]"))
    assert graph.closed
    assert len(graph.nodes) == 5
    assert graph.normal_forms == [Value(1)]
    # two different first steps
    assert len([e for e in graph.edges if e[0] == 0]) == 2


def test_graph_truncation_is_flagged():
    game, root = tree_game("P[ O[ 2 3 ] O[ 1 9 ] ]", MIN_PLUS)
    graph = reduction_graph(game, term_of_game(game, root), budget=5)
    assert graph.truncated
    assert len(graph.nodes) == 5


def test_will_simulation():
    left = parse_term("P[ 2 O[ 3 P[ 4 1 ] ] ]")
    right = parse_term("P[ 2 O[ 3 P[ 2 4 1 ] ] ]")
    assert normalize(MIN_PLUS, left) == normalize(MIN_PLUS, right) == 2


def test_cut_simulation():
    left = parse_term("P[ 2 O[ 3 5 ] 7 ]")
    right = parse_term("P[ 2 7 ]")
    assert normalize(MIN_PLUS, left) == normalize(MIN_PLUS, right) == 2
    left = parse_term("O[ 5 P[ 3 7 ] 1 ]")
    right = parse_term("O[ 5 1 ]")
    assert normalize(MIN_MAX, left) == normalize(MIN_MAX, right) == 5


def test_subterms_paths():
    term = parse_term("P[ 2 O[ 3 4 ] ]")
    paths = [p for p, _ in subterms(term)]
    assert paths == [(), (0,), (1,), (1, 0), (1, 1)]


def test_tiny_games_confluent(tiny_corpus):
    for spec in tiny_corpus:
        arena = TreeArena(spec)
        game = arena.game(MIN_PLUS)
        graph = reduction_graph(game, term_of_game(game, arena.root))
        assert graph.closed, arena.to_text()
        assert graph.normal_values() == [eval_exhaustive(game, arena.root).value]
        assert len(graph.normal_forms) == 1


def test_cut_rules_sound_on_corpus(corpus):
    for spec in corpus:
        arena = TreeArena(spec)
        term = term_of_game(None, arena.root)
        plus = arena.game(MIN_PLUS)
        base = normalize(plus, term)
        assert base == eval_exhaustive(plus, arena.root).value
        assert normalize(plus, term, RuleSet.with_player_cuts()) == base
        mm = arena.game(MIN_MAX)
        assert normalize(mm, term, RuleSet.with_all_cuts()) == normalize(mm, term)


def test_subterms_of_converging_terms_converge():
    rng = random.Random(4)
    game, root = tree_game("P[ O[ 2 P[ 3 O[ 1 1 ] ] ] O[ 4 P[ 0 6 ] ] ]", MIN_PLUS)
    sequence = list(reduction_sequence(game, term_of_game(game, root)))
    for term in rng.sample(sequence, 8):
        for _, sub in subterms(term):
            normalize(game, sub)
