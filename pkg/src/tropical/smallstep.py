"""
Small-step rewrite semantics of games, used as an executable oracle.

Terms are immutable trees: a position still to be expanded, a value, or a
player/opponent node over a non-empty child sequence. Contexts are index
paths, so `step` can enumerate every one-step reduct of a term.

Debug text form: `P[ O[ 2 3 ] O[ 1 9 ] ]`; positions render as `@<repr>`.
"""
from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple, Union

from common.errors import AlgebraError, NormalizationError, TermSyntaxError
from tropical.algebra import TropicalAlgebra
from tropical.arena import GameInstance, Position, Turn, parse_bracket_text, parse_value, show_value

logger = logging.getLogger(__name__)

DEFAULT_STEP_BUDGET = 100_000
DEFAULT_NODE_BUDGET = 10_000


# ---------------------------------------------------------------------------
# terms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PositionTerm:
    pos: Position


@dataclass(frozen=True)
class Value:
    value: Any


@dataclass(frozen=True)
class PlayerNode:
    children: Tuple["Term", ...]

    def __post_init__(self) -> None:
        if not self.children:
            raise TermSyntaxError("player node needs at least one child")


@dataclass(frozen=True)
class OpponentNode:
    children: Tuple["Term", ...]

    def __post_init__(self) -> None:
        if not self.children:
            raise TermSyntaxError("opponent node needs at least one child")


Term = Union[PositionTerm, Value, PlayerNode, OpponentNode]
Node = Union[PlayerNode, OpponentNode]
Path = Tuple[int, ...]


def _is_node(t: Term) -> bool:
    return isinstance(t, (PlayerNode, OpponentNode))


def _with_children(node: Node, children: Sequence[Term]) -> Node:
    return type(node)(tuple(children))


def _replace(node: Node, i: int, child: Term) -> Node:
    kids = list(node.children)
    kids[i] = child
    return _with_children(node, kids)


def term_of_game(game: GameInstance, pos: Position) -> Term:
    """The initial configuration for evaluating `pos`."""
    return PositionTerm(pos)


def subterms(term: Term) -> List[Tuple[Path, Term]]:
    out: List[Tuple[Path, Term]] = []
    stack: List[Tuple[Path, Term]] = [((), term)]
    while stack:
        path, t = stack.pop()
        out.append((path, t))
        if _is_node(t):
            for i in reversed(range(len(t.children))):
                stack.append((path + (i,), t.children[i]))
    return out


def render_term(term: Term) -> str:
    if isinstance(term, Value):
        return show_value(term.value)
    if isinstance(term, PositionTerm):
        return f"@{term.pos!r}"
    tag = "P" if isinstance(term, PlayerNode) else "O"
    return f"{tag}[ " + " ".join(render_term(c) for c in term.children) + " ]"


def parse_term(text: str) -> Term:
    def build(spec: Any) -> Term:
        if isinstance(spec, tuple):
            tag, children = spec
            kids = tuple(build(c) for c in children)
            return PlayerNode(kids) if tag == "P" else OpponentNode(kids)
        return Value(spec)

    def value_parser(atom: str) -> Any:
        if atom.startswith("@"):
            raise TermSyntaxError(f"position atoms cannot be parsed back: {atom!r}")
        return parse_value(atom)

    return build(parse_bracket_text(text, value_parser))


# ---------------------------------------------------------------------------
# rules
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RuleSet:
    """Enabled rules. Context closure is always on."""

    payoff: bool = True
    p_expand: bool = True
    o_expand: bool = True
    p_reduce: bool = True
    o_reduce: bool = True
    ret: bool = True
    p_will: bool = False
    p_cut: bool = False
    o_will: bool = False
    o_cut: bool = False

    @classmethod
    def base(cls) -> "RuleSet":
        return cls()

    @classmethod
    def with_player_cuts(cls) -> "RuleSet":
        return cls(p_will=True, p_cut=True)

    @classmethod
    def with_all_cuts(cls) -> "RuleSet":
        return cls(p_will=True, p_cut=True, o_will=True, o_cut=True)

    def check(self, algebra: TropicalAlgebra) -> None:
        if (self.o_will or self.o_cut) and not algebra.bi_tropical:
            raise AlgebraError(f"opponent cut rules need a bi-tropical algebra, {algebra.name} is not")

    def enabled(self) -> List[str]:
        return [name for name, on in self.__dict__.items() if on]


class _Rewriter:
    def __init__(self, game: "GameInstance | TropicalAlgebra", rules: RuleSet):
        if isinstance(game, TropicalAlgebra):
            self.game: Optional[GameInstance] = None
            self.algebra = game
        else:
            self.game = game
            self.algebra = game.algebra
        rules.check(self.algebra)
        self.rules = rules

    # -- rule matching at the root of a term --------------------------------

    def position_rule(self, t: PositionTerm) -> Optional[Tuple[str, Term]]:
        if self.game is None:
            raise NormalizationError(f"position {t.pos!r} in a term evaluated without a game")
        arena = self.game.arena
        succs = arena.succ(t.pos)
        r = self.rules
        if not succs:
            return ("payoff", Value(self.game.payoff_of(t.pos))) if r.payoff else None
        kids = tuple(PositionTerm(c) for c in succs)
        if arena.turn(t.pos) is Turn.PLAYER:
            return ("p_expand", PlayerNode(kids)) if r.p_expand else None
        return ("o_expand", OpponentNode(kids)) if r.o_expand else None

    def cut(self, t: Node) -> Optional[Tuple[str, Term]]:
        kids = t.children
        if len(kids) < 2 or not isinstance(kids[0], Value):
            return None
        head, inner = kids[0].value, kids[1]
        if isinstance(t, PlayerNode):
            if not (self.rules.p_cut and isinstance(inner, OpponentNode) and isinstance(inner.children[0], Value)):
                return None
            if self.algebra.oplus(head, inner.children[0].value) == head:
                return "p_cut", PlayerNode((kids[0],) + kids[2:])
            return None
        if not (self.rules.o_cut and isinstance(inner, PlayerNode) and isinstance(inner.children[0], Value)):
            return None
        if self.algebra.otimes(head, inner.children[0].value) == head:
            return "o_cut", OpponentNode((kids[0],) + kids[2:])
        return None

    def will(self, t: Node) -> Optional[Tuple[str, Term]]:
        kids = t.children
        if len(kids) < 2 or not isinstance(kids[0], Value):
            return None
        player = isinstance(t, PlayerNode)
        if not (self.rules.p_will if player else self.rules.o_will):
            return None
        inner = kids[1]
        inner_type = OpponentNode if player else PlayerNode
        if not isinstance(inner, inner_type) or len(inner.children) < 2:
            return None
        if not isinstance(inner.children[0], Value):
            return None
        grand = inner.children[1]
        if type(grand) is not type(t):
            return None
        new_grand = _with_children(grand, (kids[0],) + grand.children)
        return ("p_will" if player else "o_will"), _replace(t, 1, _replace(inner, 1, new_grand))

    def local(self, t: Term) -> List[Tuple[str, Term]]:
        """Every reduct obtained by a rule applied at the root of `t`."""
        if isinstance(t, Value):
            return []
        if isinstance(t, PositionTerm):
            hit = self.position_rule(t)
            return [hit] if hit else []
        out: List[Tuple[str, Term]] = []
        kids = t.children
        player = isinstance(t, PlayerNode)
        if len(kids) == 1 and isinstance(kids[0], Value) and self.rules.ret:
            out.append(("return", kids[0]))
        if self.rules.p_reduce if player else self.rules.o_reduce:
            op = self.algebra.oplus if player else self.algebra.otimes
            for i in range(len(kids) - 1):
                a, b = kids[i], kids[i + 1]
                if isinstance(a, Value) and isinstance(b, Value):
                    merged = Value(op(a.value, b.value))
                    out.append(("p_reduce" if player else "o_reduce", _with_children(t, kids[:i] + (merged,) + kids[i + 2:])))
        for hit in (self.will(t), self.cut(t)):
            if hit:
                out.append(hit)
        return out

    def all_reducts(self, t: Term) -> Iterator[Tuple[str, Term]]:
        yield from self.local(t)
        if _is_node(t):
            for i, child in enumerate(t.children):
                for rule, r in self.all_reducts(child):
                    yield rule, _replace(t, i, r)

    # -- the fixed normalization strategy ------------------------------------

    def next_step(self, t: Term) -> Optional[Tuple[str, Term]]:
        """Leftmost-innermost: reduce inside the leftmost reducible child before touching `t`."""
        if isinstance(t, Value):
            return None
        if isinstance(t, PositionTerm):
            return self.position_rule(t)
        kids = t.children
        for i, child in enumerate(kids):
            hit = self.next_step(child)
            if hit:
                return hit[0], _replace(t, i, hit[1])
        if len(kids) == 1 and isinstance(kids[0], Value):
            return ("return", kids[0]) if self.rules.ret else None
        player = isinstance(t, PlayerNode)
        if self.rules.p_reduce if player else self.rules.o_reduce:
            op = self.algebra.oplus if player else self.algebra.otimes
            for i in range(len(kids) - 1):
                a, b = kids[i], kids[i + 1]
                if isinstance(a, Value) and isinstance(b, Value):
                    merged = Value(op(a.value, b.value))
                    return ("p_reduce" if player else "o_reduce"), _with_children(t, kids[:i] + (merged,) + kids[i + 2:])
        # Will rules never fire here; they only feed cuts
        return self.cut(t)


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------


def step(game: "GameInstance | TropicalAlgebra", term: Term, rules: Optional[RuleSet] = None) -> Tuple[Term, ...]:
    """All one-step reducts of `term`, at every context, deduplicated in order."""
    rw = _Rewriter(game, rules or RuleSet.base())
    return tuple(dict.fromkeys(r for _, r in rw.all_reducts(term)))


def step_labeled(game: "GameInstance | TropicalAlgebra", term: Term, rules: Optional[RuleSet] = None) -> List[Tuple[str, Term]]:
    rw = _Rewriter(game, rules or RuleSet.base())
    return list(dict.fromkeys(rw.all_reducts(term)))


def reduction_sequence(
    game: "GameInstance | TropicalAlgebra",
    term: Term,
    rules: Optional[RuleSet] = None,
    budget: int = DEFAULT_STEP_BUDGET,
) -> Iterator[Term]:
    """Terms visited by the normalization strategy, starting with `term`."""
    rw = _Rewriter(game, rules or RuleSet.base())
    yield term
    steps = 0
    while not isinstance(term, Value):
        if steps >= budget:
            raise NormalizationError(f"no normal form within {budget} steps")
        hit = rw.next_step(term)
        if hit is None:
            raise NormalizationError(f"stuck term: {render_term(term)}")
        term = hit[1]
        steps += 1
        yield term


def normalize(
    game: "GameInstance | TropicalAlgebra",
    term: Term,
    rules: Optional[RuleSet] = None,
    budget: int = DEFAULT_STEP_BUDGET,
) -> Any:
    """Rewrite to a single value, leftmost-innermost."""
    last = term
    for last in reduction_sequence(game, term, rules, budget):
        pass
    assert isinstance(last, Value)
    return last.value


@dataclass
class ReductionGraph:
    nodes: List[Term] = field(default_factory=list)
    edges: List[Tuple[int, int, str]] = field(default_factory=list)
    normal_forms: List[Term] = field(default_factory=list)
    truncated: bool = False

    @property
    def closed(self) -> bool:
        return not self.truncated

    def normal_values(self) -> List[Any]:
        return [t.value for t in self.normal_forms if isinstance(t, Value)]


def reduction_graph(
    game: "GameInstance | TropicalAlgebra",
    term: Term,
    rules: Optional[RuleSet] = None,
    budget: int = DEFAULT_NODE_BUDGET,
) -> ReductionGraph:
    rw = _Rewriter(game, rules or RuleSet.base())
    graph = ReductionGraph(nodes=[term])
    index: Dict[Term, int] = {term: 0}
    queue = deque([term])
    while queue:
        cur = queue.popleft()
        src = index[cur]
        reducts = list(dict.fromkeys(rw.all_reducts(cur)))
        if not reducts:
            graph.normal_forms.append(cur)
            continue
        for rule, nxt in reducts:
            dst = index.get(nxt)
            if dst is None:
                if len(graph.nodes) >= budget:
                    graph.truncated = True
                    continue
                dst = len(graph.nodes)
                index[nxt] = dst
                graph.nodes.append(nxt)
                queue.append(nxt)
            graph.edges.append((src, dst, rule))
    if graph.truncated:
        logger.warning("[smallstep] reduction graph truncated at %d terms", budget)
    return graph
