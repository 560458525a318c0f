"""
Game syntax: positions, turns and successors.

Arenas are intensional: `turn` and `succ` are computed on demand and nothing is
materialized up front. Every traversal takes an explicit budget.
"""
from __future__ import annotations

import logging
import random
import re
from abc import ABC, abstractmethod
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Dict, Hashable, Iterator, List, Mapping, NamedTuple, Optional, Sequence, Tuple

from common.errors import BudgetExceeded, PayoffError, StrategyError, TermSyntaxError
from tropical.algebra import INF, NEG_INF, TropicalAlgebra

logger = logging.getLogger(__name__)

Position = Hashable


class Turn(Enum):
    PLAYER = "P"
    OPPONENT = "O"

    def flip(self) -> "Turn":
        return Turn.OPPONENT if self is Turn.PLAYER else Turn.PLAYER


class Arena(ABC):
    @abstractmethod
    def turn(self, pos: Position) -> Turn:
        ...

    @abstractmethod
    def succ(self, pos: Position) -> Sequence[Position]:
        ...

    def is_terminal(self, pos: Position) -> bool:
        return len(self.succ(pos)) == 0


class FunctionArena(Arena):
    def __init__(self, turn: Callable[[Position], Turn], succ: Callable[[Position], Sequence[Position]]):
        self._turn = turn
        self._succ = succ

    def turn(self, pos: Position) -> Turn:
        return self._turn(pos)

    def succ(self, pos: Position) -> Sequence[Position]:
        return tuple(self._succ(pos))


class DualArena(Arena):
    """Same positions and moves, every turn flipped."""

    def __init__(self, base: Arena):
        self.base = base

    def turn(self, pos: Position) -> Turn:
        return self.base.turn(pos).flip()

    def succ(self, pos: Position) -> Sequence[Position]:
        return self.base.succ(pos)


@dataclass(frozen=True)
class GameInstance:
    arena: Arena
    algebra: TropicalAlgebra
    payoff: Callable[[Position], Any]

    def payoff_of(self, pos: Position) -> Any:
        if not self.arena.is_terminal(pos):
            raise PayoffError(f"payoff queried on non-terminal position {pos!r}")
        try:
            return self.payoff(pos)
        except (KeyError, LookupError, TypeError, ValueError) as e:
            raise PayoffError(f"payoff undefined at {pos!r}: {e}") from e


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------


def is_terminal(arena: Arena, pos: Position) -> bool:
    return arena.is_terminal(pos)


def dual(arena: Arena) -> Arena:
    if isinstance(arena, DualArena):
        return arena.base
    return DualArena(arena)


@dataclass(frozen=True)
class ReachResult:
    positions: frozenset
    truncated: bool

    def __len__(self) -> int:
        return len(self.positions)

    def __contains__(self, pos: object) -> bool:
        return pos in self.positions


def _explore(arena: Arena, pos: Position, bound: int) -> Iterator[Tuple[Position, Sequence[Position], bool]]:
    """Breadth-first walk yielding (position, successors, truncated-so-far)."""
    if bound < 1:
        raise ValueError("bound must be >= 1")
    seen = {pos}
    queue = deque([pos])
    truncated = False
    while queue:
        cur = queue.popleft()
        succs = arena.succ(cur)
        for nxt in succs:
            if nxt in seen:
                continue
            if len(seen) >= bound:
                truncated = True
                continue
            seen.add(nxt)
            queue.append(nxt)
        yield cur, succs, truncated


def reachable(arena: Arena, pos: Position, bound: int = 100_000) -> ReachResult:
    seen: List[Position] = []
    truncated = False
    for cur, _succs, truncated in _explore(arena, pos, bound):
        seen.append(cur)
    if truncated:
        logger.warning("[arena] reachable set truncated at %d positions", bound)
    return ReachResult(positions=frozenset(seen), truncated=truncated)


def is_alternate_turn(arena: Arena, pos: Position, bound: int = 100_000) -> bool:
    for cur, succs, _ in _explore(arena, pos, bound):
        t = arena.turn(cur)
        for nxt in succs:
            if arena.turn(nxt) == t:
                return False
    return True


class AltPosition(NamedTuple):
    pos: Position
    turn: Turn


class AlternateTurnArena(Arena):
    """Collapses runs of consecutive same-turn moves into a single move.

    Positions are wrapped as `AltPosition(pos, turn)`. A non-terminal successor
    whose turn equals its parent's is replaced, in place and in order, by its
    own (collapsed) successors; terminal successors keep their payoff and get
    the opposite turn so that every edge alternates.
    """

    def __init__(self, base: Arena, depth_budget: int = 256):
        self.base = base
        self.depth_budget = depth_budget

    def lift(self, pos: Position) -> AltPosition:
        return AltPosition(pos, self.base.turn(pos))

    def turn(self, pos: AltPosition) -> Turn:
        return pos.turn

    def succ(self, pos: AltPosition) -> Sequence[AltPosition]:
        if self.base.is_terminal(pos.pos):
            return ()
        out: List[AltPosition] = []
        self._collapse(pos.pos, pos.turn, out, [pos.pos])
        return tuple(out)

    def _collapse(self, base_pos: Position, turn: Turn, out: List[AltPosition], path: List[Position]) -> None:
        if len(path) > self.depth_budget:
            raise BudgetExceeded(f"alternate-turn collapse deeper than {self.depth_budget}", path)
        for child in self.base.succ(base_pos):
            if self.base.is_terminal(child):
                out.append(AltPosition(child, turn.flip()))
            elif self.base.turn(child) == turn:
                path.append(child)
                self._collapse(child, turn, out, path)
                path.pop()
            else:
                out.append(AltPosition(child, self.base.turn(child)))


def alternate_turn_transform(arena: Arena, depth_budget: int = 256) -> AlternateTurnArena:
    return AlternateTurnArena(arena, depth_budget=depth_budget)


def alternate_turn_game(game: GameInstance, depth_budget: int = 256) -> Tuple[GameInstance, Callable[[Position], AltPosition]]:
    alt = alternate_turn_transform(game.arena, depth_budget)
    lifted = GameInstance(arena=alt, algebra=game.algebra, payoff=lambda p: game.payoff(p.pos))
    return lifted, alt.lift


# ---------------------------------------------------------------------------
# strategies
# ---------------------------------------------------------------------------


class Strategy:
    """Chosen successor index per reachable player position."""

    __slots__ = ("_choices",)

    def __init__(self, choices: Mapping[Position, int]):
        self._choices: Dict[Position, int] = dict(choices)

    def choice(self, pos: Position) -> int:
        try:
            return self._choices[pos]
        except KeyError:
            raise StrategyError(f"strategy has no choice at {pos!r}") from None

    def items(self):
        return self._choices.items()

    def __contains__(self, pos: object) -> bool:
        return pos in self._choices

    def __len__(self) -> int:
        return len(self._choices)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Strategy) and self._choices == other._choices

    def __hash__(self) -> int:
        return hash(frozenset(self._choices.items()))

    def __repr__(self) -> str:
        return f"Strategy({len(self._choices)} choices)"

    def validate(self, arena: Arena, root: Position, bound: int = 100_000) -> None:
        seen = set()
        stack = [root]
        visited = 0
        while stack:
            pos = stack.pop()
            visited += 1
            if visited > bound:
                raise BudgetExceeded(f"strategy validation exceeded {bound} positions", [root])
            succs = arena.succ(pos)
            if not succs:
                if pos in self._choices:
                    raise StrategyError(f"choice recorded at terminal position {pos!r}")
                continue
            if arena.turn(pos) is Turn.PLAYER:
                idx = self.choice(pos)
                if not 0 <= idx < len(succs):
                    raise StrategyError(f"choice {idx} out of range at {pos!r}")
                seen.add(pos)
                stack.append(succs[idx])
            else:
                if pos in self._choices:
                    raise StrategyError(f"choice recorded at opponent position {pos!r}")
                stack.extend(reversed(succs))
        extra = set(self._choices) - seen
        if extra:
            raise StrategyError(f"{len(extra)} choices at unreachable positions")


# ---------------------------------------------------------------------------
# explicit trees (tests, oracle corpus, counterexamples)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TreeNode:
    turn: Turn
    arity: int
    payoff: Any = None


_TREE_TOKEN = re.compile(r"\s*(?:(?P<open>[PO])\[|(?P<close>\])|(?P<atom>[^\s\[\]]+))")


def parse_value(text: str) -> Any:
    if text in ("inf", "+inf"):
        return INF
    if text == "-inf":
        return NEG_INF
    try:
        return int(text)
    except ValueError:
        raise TermSyntaxError(f"bad value literal {text!r}") from None


def show_value(v: Any) -> str:
    if v == INF:
        return "inf"
    if v == NEG_INF:
        return "-inf"
    return str(v)


def parse_bracket_text(text: str, value_parser: Callable[[str], Any] = parse_value) -> Any:
    """`P[ O[ 2 3 ] O[ 1 9 ] ]` -> nested spec `("P", [("O", [2, 3]), ("O", [1, 9])])`."""
    tokens: List[Tuple[str, str]] = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TREE_TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise TermSyntaxError(f"unexpected character at offset {pos} in {text!r}")
        pos = m.end()
        if m.group("open"):
            tokens.append(("open", m.group("open")))
        elif m.group("close"):
            tokens.append(("close", "]"))
        else:
            tokens.append(("atom", m.group("atom")))

    def node(i: int) -> Tuple[Any, int]:
        if i >= len(tokens):
            raise TermSyntaxError("unexpected end of input")
        kind, val = tokens[i]
        if kind == "atom":
            return value_parser(val), i + 1
        if kind == "close":
            raise TermSyntaxError("unexpected ']'")
        children = []
        i += 1
        while True:
            if i >= len(tokens):
                raise TermSyntaxError(f"unclosed {val}[")
            if tokens[i][0] == "close":
                break
            child, i = node(i)
            children.append(child)
        if not children:
            raise TermSyntaxError(f"empty {val}[ ] node")
        return (val, children), i + 1

    spec, end = node(0)
    if end != len(tokens):
        raise TermSyntaxError("trailing input after term")
    return spec


class TreeArena(Arena):
    """A finite game tree; positions are index paths from the root `()`."""

    root: Tuple[int, ...] = ()

    def __init__(self, spec: Any, root_turn: Turn = Turn.PLAYER):
        self.nodes: Dict[Tuple[int, ...], TreeNode] = {}
        self._add((), spec, root_turn)

    def _add(self, path: Tuple[int, ...], spec: Any, leaf_turn: Turn) -> None:
        if isinstance(spec, tuple) and len(spec) == 2 and isinstance(spec[1], list):
            label, children = spec
            turn = label if isinstance(label, Turn) else Turn(label)
            self.nodes[path] = TreeNode(turn=turn, arity=len(children))
            for i, child in enumerate(children):
                self._add(path + (i,), child, turn.flip())
        else:
            self.nodes[path] = TreeNode(turn=leaf_turn, arity=0, payoff=spec)

    @classmethod
    def from_text(cls, text: str, value_parser: Callable[[str], Any] = parse_value) -> "TreeArena":
        return cls(parse_bracket_text(text, value_parser))

    def turn(self, pos: Tuple[int, ...]) -> Turn:
        return self.nodes[pos].turn

    def succ(self, pos: Tuple[int, ...]) -> Sequence[Tuple[int, ...]]:
        return tuple(pos + (i,) for i in range(self.nodes[pos].arity))

    def payoff(self, pos: Tuple[int, ...]) -> Any:
        return self.nodes[pos].payoff

    def game(self, algebra: TropicalAlgebra) -> GameInstance:
        return GameInstance(arena=self, algebra=algebra, payoff=self.payoff)

    def to_text(self, pos: Tuple[int, ...] = ()) -> str:
        node = self.nodes[pos]
        if node.arity == 0:
            return show_value(node.payoff)
        inner = " ".join(self.to_text(c) for c in self.succ(pos))
        return f"{node.turn.value}[ {inner} ]"

    def __len__(self) -> int:
        return len(self.nodes)


def tree_game(spec: Any, algebra: TropicalAlgebra) -> Tuple[GameInstance, Tuple[int, ...]]:
    arena = TreeArena.from_text(spec) if isinstance(spec, str) else TreeArena(spec)
    return arena.game(algebra), arena.root


def random_tree_spec(
    rng: random.Random,
    depth: int = 4,
    branching: int = 3,
    low: int = 0,
    high: int = 20,
    turns: str = "alternate",
    leaf_prob: float = 0.25,
) -> Any:
    if turns not in ("alternate", "random"):
        raise ValueError(f"unknown turn pattern {turns!r}")

    def build(level: int, turn: Turn) -> Any:
        if level >= depth or (level > 0 and rng.random() < leaf_prob):
            return rng.randint(low, high)
        kids = rng.randint(1, branching)
        children = []
        for _ in range(kids):
            nxt = turn.flip() if turns == "alternate" else rng.choice((Turn.PLAYER, Turn.OPPONENT))
            children.append(build(level + 1, nxt))
        return (turn.value, children)

    root_turn = Turn.PLAYER if turns == "alternate" else rng.choice((Turn.PLAYER, Turn.OPPONENT))
    return build(0, root_turn)


def random_game(
    rng: random.Random,
    algebra: TropicalAlgebra,
    depth: int = 4,
    branching: int = 3,
    low: int = 0,
    high: int = 20,
    turns: str = "alternate",
) -> Tuple[GameInstance, Tuple[int, ...]]:
    spec = random_tree_spec(rng, depth=depth, branching=branching, low=low, high=high, turns=turns)
    arena = TreeArena(spec)
    return arena.game(algebra), arena.root
