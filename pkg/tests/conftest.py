import functools
import os
import random
import sys

import pytest

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
# 与 scripts/ 相同：让 python 能找到 src/
sys.path.insert(0, os.path.join(ROOT, "src"))
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from parsegame.game import best_parse  # noqa: E402
from parsegame.grammar import load_grammar_file  # noqa: E402
from tropical.arena import FunctionArena, Turn, random_tree_spec  # noqa: E402

GRAMMAR_PATH = os.path.join(ROOT, "data", "expr.grammar")
CONFIG_PATH = os.path.join(ROOT, "config", "default.yaml")

NON_AMBIGUOUS = "let x = 42 in x + if 84=42 then 55 else 77"
AMBIGUOUS = "let x = 84 = 42 = 21 in 1 + 2 * 3"
WRONG = "if if if true then true else false then 10 else (1+(2+)+3)"


@pytest.fixture(scope="session")
def grammar_path():
    return GRAMMAR_PATH


@pytest.fixture(scope="session")
def config_path():
    return CONFIG_PATH


@pytest.fixture(scope="session")
def grammar():
    return load_grammar_file(GRAMMAR_PATH)


def tree_corpus(seed, count, depth=4, branching=3, low=0, high=20, turns="alternate"):
    """Seeded random tree specs shared by the evaluator and rewrite checks."""
    rng = random.Random(seed)
    return [random_tree_spec(rng, depth=depth, branching=branching, low=low, high=high, turns=turns) for _ in range(count)]


@pytest.fixture(scope="session")
def corpus():
    return tree_corpus(seed=7, count=300)


@pytest.fixture(scope="session")
def tiny_corpus():
    return tree_corpus(seed=11, count=200, depth=2, branching=2)


def layered_dag(rng, layers=5, width=3, low=0, high=9):
    """Alternating layers, root (0, 0) to move; successors are drawn from the next layer so positions get shared."""
    succ = {}
    for layer in range(layers - 1):
        below = [(layer + 1, j) for j in range(width)]
        for i in range(width):
            succ[(layer, i)] = tuple(rng.sample(below, rng.randint(1, width)))
    payoff = {(layers - 1, j): rng.randint(low, high) for j in range(width)}
    arena = FunctionArena(
        turn=lambda p: Turn.PLAYER if p[0] % 2 == 0 else Turn.OPPONENT,
        succ=lambda p: succ.get(p, ()),
    )
    return arena, payoff


@pytest.fixture(scope="session")
def dag_corpus():
    rng = random.Random(13)
    return [layered_dag(rng) for _ in range(300)]


@functools.lru_cache(maxsize=None)
def cached_parse(text, policy="fm", prune=True, memo=False, max_trees=64):
    """best_parse memoized per session; the exhaustive runs on the long inputs are slow."""
    return best_parse(load_grammar_file(GRAMMAR_PATH), None, text, policy=policy, prune=prune, memo=memo, max_trees=max_trees)
