"""
End-to-end checks on the three benchmark strings and on seeded random games.
"""
import random

import pytest

from cli.commands import cmd_oracle
from common.schema import RunConfig
from conftest import AMBIGUOUS, GRAMMAR_PATH, NON_AMBIGUOUS, WRONG, cached_parse, tree_corpus
from parsegame.game import parse_game
from parsegame.grammar import load_grammar_file
from parsegame.tokens import tokenize
from tropical.algebra import BUILTIN_ALGEBRAS, MIN_MAX, MIN_PLUS, full_report
from tropical.arena import TreeArena, alternate_turn_game, is_alternate_turn, random_game
from tropical.evaluator import eval_exhaustive, replay
from tropical.smallstep import RuleSet, normalize, reduction_graph, term_of_game

STRINGS = [NON_AMBIGUOUS, AMBIGUOUS, WRONG]


@pytest.mark.parametrize("name", sorted(BUILTIN_ALGEBRAS))
def test_laws_on_ten_thousand_samples(name):
    report = full_report(BUILTIN_ALGEBRAS[name], 10_000, random.Random(2024))
    assert report.passed, [r.to_dict() for r in report.failures()]
    assert report["insertion"].checked == 10_000


def test_oracle_thousand_games(capsys):
    config = RunConfig(command="oracle", count=1000, seed=42).validate()
    assert cmd_oracle(config) == 0
    assert "failures=0" in capsys.readouterr().out


def test_rewrite_confluence_and_cut_soundness():
    for spec in tree_corpus(seed=99, count=200, depth=2, branching=2):
        arena = TreeArena(spec)
        term = term_of_game(None, arena.root)
        for algebra, cuts in ((MIN_PLUS, RuleSet.with_player_cuts()), (MIN_MAX, RuleSet.with_all_cuts())):
            game = arena.game(algebra)
            graph = reduction_graph(game, term)
            assert graph.closed and len(graph.normal_forms) == 1, arena.to_text()
            assert normalize(game, term, cuts) == normalize(game, term) == graph.normal_values()[0]


def test_benchmark_costs():
    assert cached_parse(NON_AMBIGUOUS).cost == 0
    assert cached_parse(AMBIGUOUS).cost == 0
    wrong = cached_parse(WRONG)
    assert wrong.cost == 6
    assert [(s.excerpt, s.size) for s in wrong.error_spans[0]] == [("if true", 6), ("", 0)]
    assert cached_parse(WRONG, "fm", False, False).cost == 6


@pytest.mark.parametrize("text", STRINGS)
def test_pruning_efficacy(text):
    exhaustive = cached_parse(text, "fm", False, False).stats.recursive_calls
    fm = cached_parse(text, "fm", True, False).stats.recursive_calls
    am = cached_parse(text, "am", True, False).stats.recursive_calls
    # token-level arena: fm saves over half the calls, am over a quarter
    assert 2 * fm < exhaustive, (fm, exhaustive)
    assert 4 * am < 3 * exhaustive, (am, exhaustive)
    assert fm <= am


def test_pruning_gains_grow_with_input():
    ratios = []
    for text in (NON_AMBIGUOUS, WRONG):
        exhaustive = cached_parse(text, "fm", False, False).stats.recursive_calls
        ratios.append(cached_parse(text, "fm", True, False).stats.recursive_calls / exhaustive)
    assert ratios[1] < ratios[0]


@pytest.mark.parametrize("text", STRINGS)
def test_memoization(text):
    plain = cached_parse(text, "fm", False, False)
    memo_only = cached_parse(text, "fm", False, True)
    memo_pruned = cached_parse(text, "fm", True, True)
    assert memo_only.cost == memo_pruned.cost == plain.cost == cached_parse(text).cost
    assert memo_only.stats.recursive_calls < plain.stats.recursive_calls
    assert memo_pruned.stats.recursive_calls <= memo_only.stats.recursive_calls


@pytest.mark.parametrize("text", STRINGS)
def test_policy_consistency(text):
    fm = cached_parse(text, "fm")
    am = cached_parse(text, "am")
    assert fm.result.strategy in am.result.strategies
    game = am.result.game
    for strategy in am.result.strategies:
        assert replay(game, am.result.root, strategy) == am.cost


def test_parse_arena_alternates():
    grammar = load_grammar_file(GRAMMAR_PATH)
    for text in ("1 + 2 * 3", "let x = 1 in x", "if x then ( 1 ) else 2 = 3", "+ ) let"):
        game, root = parse_game(grammar, tokenize(text, grammar.literals))
        assert is_alternate_turn(game.arena, root)


def test_transform_invariance():
    rng = random.Random(8)
    checked = 0
    while checked < 100:
        game, root = random_game(rng, MIN_PLUS, turns="random")
        if is_alternate_turn(game.arena, root):
            continue
        alt, lift = alternate_turn_game(game)
        assert is_alternate_turn(alt.arena, lift(root))
        assert eval_exhaustive(alt, lift(root)).value == eval_exhaustive(game, root).value
        checked += 1


def test_memoization_under_all_minimals():
    pruned = cached_parse(WRONG, "am", True, False)
    memo_only = cached_parse(WRONG, "am", False, True)
    memo_pruned = cached_parse(WRONG, "am", True, True)
    assert memo_pruned.cost == memo_only.cost == pruned.cost == 6
    assert memo_pruned.stats.memo_hits > 0
    # am keeps equal-valued siblings, so pruning on top of memo only pays off against pruning alone
    assert memo_pruned.stats.recursive_calls < pruned.stats.recursive_calls
