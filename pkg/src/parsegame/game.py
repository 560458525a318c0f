"""
Error-tolerant parsing as a min-plus game.

A player position is a token span paired with a nonterminal; the player
picks a production and a placement of its terminals inside the span. The
resulting opponent position lists the nonterminal sub-spans left between the
placed terminals, and the opponent must face all of them. A player position
with no matching production is terminal and pays the number of non-blank
characters it covers, so the game value is the least number of characters
that must be left unmatched.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, NamedTuple, Optional, Sequence, Tuple, Union

from common.errors import GrammarError, PayoffError
from parsegame.grammar import Grammar, Production, Terminal
from parsegame.tokens import TokenString, tokenize
from tropical.algebra import MIN_PLUS
from tropical.arena import Arena, GameInstance, Strategy, Turn
from tropical.evaluator import DEFAULT_STRATEGY_LIMIT, EvalResult, EvalStats, Policy, evaluate

logger = logging.getLogger(__name__)


class PlayerPos(NamedTuple):
    start: int  # token indices, end exclusive
    end: int
    nt: str


class OpponentPos(NamedTuple):
    parts: Tuple[PlayerPos, ...]
    production: Production
    placement: Tuple[int, ...]  # first token of each non-empty terminal run


ParsePosition = Union[PlayerPos, OpponentPos]


def _run_matches(run: Sequence[Terminal], tokens: TokenString, at: int) -> bool:
    if at + len(run) > len(tokens):
        return False
    return all(t.matches(tokens[at + k]) for k, t in enumerate(run))


def placements(prod: Production, tokens: TokenString, start: int, end: int) -> Iterator[Tuple[Tuple[Tuple[int, int], ...], Tuple[int, ...]]]:
    """Every way to place the terminal runs of `prod` inside [start, end).

    Yields (nonterminal sub-spans, run start indices), leftmost placements
    first. Leading and trailing runs are anchored at the span boundaries.
    """
    runs = prod.runs
    k = len(runs) - 1
    if k == 0:
        if end - start == len(runs[0]) and _run_matches(runs[0], tokens, start):
            yield (), (start,)
        return
    lead, trail = runs[0], runs[k]
    cursor = start
    placed: Tuple[int, ...] = ()
    if lead:
        if start + len(lead) > end or not _run_matches(lead, tokens, start):
            return
        cursor = start + len(lead)
        placed = (start,)
    limit = end - len(trail)
    if limit < cursor:
        return
    if trail and not _run_matches(trail, tokens, limit):
        return
    tail = (limit,) if trail else ()

    def inner(r: int, cur: int, spans: Tuple[Tuple[int, int], ...], at: Tuple[int, ...]):
        if r == k:
            yield spans + ((cur, limit),), at + tail
            return
        run = runs[r]
        for p in range(cur, limit - len(run) + 1):
            if _run_matches(run, tokens, p):
                yield from inner(r + 1, p + len(run), spans + ((cur, p),), at + (p,))

    yield from inner(1, cursor, (), placed)


def succ_player(grammar: Grammar, tokens: TokenString, pos: PlayerPos) -> Tuple[OpponentPos, ...]:
    out: List[OpponentPos] = []
    for prod in grammar.productions_of(pos.nt):
        nts = prod.nonterminals
        for spans, at in placements(prod, tokens, pos.start, pos.end):
            parts = tuple(PlayerPos(s, e, nt) for (s, e), nt in zip(spans, nts))
            out.append(OpponentPos(parts, prod, at))
    return tuple(out)


def succ_opponent(pos: OpponentPos) -> Tuple[PlayerPos, ...]:
    return pos.parts


class ParseArena(Arena):
    """Parsing positions over one token string; player successors are cached."""

    def __init__(self, grammar: Grammar, tokens: TokenString):
        self.grammar = grammar
        self.tokens = tokens
        self._cache: Dict[PlayerPos, Tuple[OpponentPos, ...]] = {}

    def turn(self, pos: ParsePosition) -> Turn:
        return Turn.PLAYER if isinstance(pos, PlayerPos) else Turn.OPPONENT

    def succ(self, pos: ParsePosition) -> Sequence[ParsePosition]:
        if isinstance(pos, OpponentPos):
            return pos.parts
        hit = self._cache.get(pos)
        if hit is None:
            hit = self._cache[pos] = succ_player(self.grammar, self.tokens, pos)
        return hit

    def payoff(self, pos: ParsePosition) -> int:
        if isinstance(pos, PlayerPos):
            return self.tokens.nonblank_size(pos.start, pos.end)
        if pos.parts:
            raise PayoffError(f"opponent position with {len(pos.parts)} parts is not terminal")
        return 0


def parse_game(grammar: Grammar, tokens: TokenString, start: Optional[str] = None) -> Tuple[GameInstance, PlayerPos]:
    start = start or grammar.start
    if start not in grammar.productions:
        raise GrammarError(f"unknown start symbol {start!r}", source=grammar.source)
    arena = ParseArena(grammar, tokens)
    return GameInstance(arena=arena, algebra=MIN_PLUS, payoff=arena.payoff), PlayerPos(0, len(tokens), start)


# ---------------------------------------------------------------------------
# trees and error spans
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ParseTree:
    nt: str
    start: int
    end: int
    production: Optional[Production] = None  # None: unmatched span
    placement: Tuple[int, ...] = ()
    children: Tuple["ParseTree", ...] = ()

    @property
    def matched(self) -> bool:
        return self.production is not None

    def leaves(self) -> Iterator["ParseTree"]:
        if not self.matched:
            yield self
        for c in self.children:
            yield from c.leaves()


@dataclass(frozen=True)
class ErrorSpan:
    nt: str
    char_start: int
    char_end: int
    excerpt: str
    size: int

    def to_dict(self) -> Dict[str, Any]:
        return {"nt": self.nt, "start": self.char_start, "end": self.char_end, "excerpt": self.excerpt, "size": self.size}


def build_tree(arena: ParseArena, pos: PlayerPos, strategy: Strategy) -> ParseTree:
    succs = arena.succ(pos)
    if not succs:
        return ParseTree(pos.nt, pos.start, pos.end)
    opp = succs[strategy.choice(pos)]
    children = tuple(build_tree(arena, part, strategy) for part in opp.parts)
    return ParseTree(pos.nt, pos.start, pos.end, opp.production, opp.placement, children)


def render_tree(tree: ParseTree, tokens: TokenString) -> str:
    if not tree.matched:
        return f'{tree.nt}!"{tokens.excerpt(tree.start, tree.end)}"'
    items: List[str] = []
    runs = tree.production.runs
    at = iter(tree.placement)
    for r, run in enumerate(runs):
        if run:
            p = next(at)
            items.extend(tokens[p + k].text for k in range(len(run)))
        if r < len(tree.children):
            items.append(render_tree(tree.children[r], tokens))
    return f"{tree.production.label}[ " + " ".join(items) + " ]"


def error_spans(tree: ParseTree, tokens: TokenString) -> List[ErrorSpan]:
    out = []
    for leaf in tree.leaves():
        lo, hi = tokens.char_range(leaf.start, leaf.end)
        out.append(ErrorSpan(leaf.nt, lo, hi, tokens.excerpt(leaf.start, leaf.end), tokens.nonblank_size(leaf.start, leaf.end)))
    return out


@dataclass
class ParseOutcome:
    text: str
    cost: int
    trees: Tuple[ParseTree, ...]
    error_spans: Tuple[Tuple[ErrorSpan, ...], ...]
    stats: EvalStats
    tokens: TokenString = field(repr=False)
    policy: Policy = Policy.FM
    prune: bool = True
    memo: bool = False
    overflow: bool = False
    millis: float = 0.0
    result: Optional[EvalResult] = field(default=None, repr=False)

    def rendered(self) -> List[str]:
        return [render_tree(t, self.tokens) for t in self.trees]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "input": self.text,
            "policy": self.policy.value,
            "prune": self.prune,
            "memo": self.memo,
            "cost": self.cost,
            "tree_count": len(self.trees),
            "overflow": self.overflow,
            "trees": self.rendered(),
            "error_spans": [[s.to_dict() for s in spans] for spans in self.error_spans],
            "calls": self.stats.recursive_calls,
            "cuts": self.stats.cuts,
            "memo_hits": self.stats.memo_hits,
            "millis": round(self.millis, 3),
        }


def best_parse(
    grammar: Grammar,
    start: Optional[str],
    text: str,
    policy: "Policy | str" = Policy.FM,
    prune: bool = True,
    memo: bool = False,
    max_trees: int = DEFAULT_STRATEGY_LIMIT,
) -> ParseOutcome:
    policy = Policy.parse(policy)
    tokens = tokenize(text, grammar.literals)
    game, root = parse_game(grammar, tokens, start)
    t0 = time.perf_counter()
    result = evaluate(game, root, prune=prune, memo=memo, policy=policy, limit=max_trees)
    millis = (time.perf_counter() - t0) * 1000.0
    arena = game.arena
    trees: List[ParseTree] = []
    seen = set()
    for strategy in result.strategies:
        tree = build_tree(arena, root, strategy)
        if tree not in seen:
            seen.add(tree)
            trees.append(tree)
    spans = tuple(tuple(error_spans(t, tokens)) for t in trees)
    logger.info(
        "[parsegame] %r cost=%s trees=%d calls=%d (%s prune=%s memo=%s)",
        text, result.value, len(trees), result.stats.recursive_calls, policy.value, prune, memo,
    )
    return ParseOutcome(
        text=text,
        cost=result.value,
        trees=tuple(trees),
        error_spans=spans,
        stats=result.stats,
        tokens=tokens,
        policy=policy,
        prune=prune,
        memo=memo,
        overflow=result.overflow,
        millis=millis,
        result=result,
    )
