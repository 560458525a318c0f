"""
Procedural game evaluation.

- eval_exhaustive: plain ⊕/⊗ fold over the whole tree.
- eval_tropical:   one-threshold α-pruning, sound on rational tropical algebras.
- eval_alpha_beta: the classic two-threshold window, for bi-tropical algebras.
- eval_memo:       either of the first two with a per-evaluation memo table.

Pruned procedures return `(value, exact)`. An inexact value v is an α-bound:
the caller's α satisfies α ⊕ v = α ⊕ true_value, so v can neither improve the
caller's accumulator nor be recorded as an optimal choice. Only exact player
positions record choices, which keeps FM/AM extraction and the memo table
sound when cuts fire.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, Iterator, List, Optional, Sequence, Tuple

from common.errors import AlgebraError, BudgetExceeded, StrategyError
from tropical.arena import GameInstance, Position, Strategy, Turn

logger = logging.getLogger(__name__)

DEFAULT_STRATEGY_LIMIT = 64


class Policy(str, Enum):
    FM = "fm"  # first minimal: one optimal strategy
    AM = "am"  # all minimals: every optimal strategy

    @classmethod
    def parse(cls, text: "str | Policy") -> "Policy":
        if isinstance(text, Policy):
            return text
        try:
            return cls(str(text).lower())
        except ValueError:
            raise ValueError(f"unknown policy {text!r} (expected fm or am)") from None


@dataclass
class EvalStats:
    recursive_calls: int = 0
    cuts: int = 0
    memo_hits: int = 0
    memo_entries: int = 0
    expanded_positions: int = 0

    def to_dict(self) -> Dict[str, int]:
        return {
            "recursive_calls": self.recursive_calls,
            "cuts": self.cuts,
            "memo_hits": self.memo_hits,
            "memo_entries": self.memo_entries,
            "expanded_positions": self.expanded_positions,
        }


@dataclass(frozen=True)
class MemoEntry:
    value: Any
    exact: bool


@dataclass
class EvalResult:
    value: Any
    strategies: Tuple[Strategy, ...]
    stats: EvalStats
    root: Position
    policy: Policy = Policy.FM
    exact: bool = True
    overflow: bool = False
    choices: Dict[Position, Tuple[int, ...]] = field(default_factory=dict, repr=False)
    game: Optional[GameInstance] = field(default=None, repr=False, compare=False)

    @property
    def strategy(self) -> Strategy:
        if not self.strategies:
            raise StrategyError("evaluation produced no strategy")
        return self.strategies[0]


_ROOT = object()


class _Search:
    def __init__(
        self,
        game: GameInstance,
        policy: Policy = Policy.FM,
        depth_budget: Optional[int] = None,
        memo: bool = False,
    ):
        self.game = game
        self.arena = game.arena
        self.algebra = game.algebra
        self.policy = policy
        self.depth_budget = depth_budget
        self.stats = EvalStats()
        self.memo: Optional[Dict[Position, MemoEntry]] = {} if memo else None
        self.choices: Dict[Position, Tuple[int, ...]] = {}
        self._path: List[Position] = []

    # -- bookkeeping ---------------------------------------------------------

    def _enter(self, pos: Position) -> None:
        self.stats.recursive_calls += 1
        if self.depth_budget is not None and len(self._path) >= self.depth_budget:
            raise BudgetExceeded(
                f"depth budget {self.depth_budget} exceeded (non-Noetherian game?)",
                self._path + [pos],
            )
        self._path.append(pos)

    def _memo_lookup(self, pos: Position, alpha: Any = None, pruned: bool = False) -> Optional[MemoEntry]:
        if self.memo is None:
            return None
        entry = self.memo.get(pos)
        if entry is None:
            return None
        if entry.exact or (pruned and alpha is not None and self.algebra.prefers(alpha, entry.value)):
            self.stats.memo_hits += 1
            return entry
        return None

    def _memo_store(self, pos: Position, value: Any, exact: bool) -> None:
        if self.memo is None or value is None:
            return
        old = self.memo.get(pos)
        if exact:
            self.memo[pos] = MemoEntry(value, True)
        elif old is None or (not old.exact and self.algebra.prefers(old.value, value)):
            # keep the loosest bound: it stays reusable under more thresholds
            self.memo[pos] = MemoEntry(value, False)

    # -- exhaustive ----------------------------------------------------------

    def exhaustive(self, pos: Position) -> Any:
        self._enter(pos)
        try:
            return self._exhaustive(pos)
        finally:
            self._path.pop()

    def _exhaustive(self, pos: Position) -> Any:
        player = self.arena.turn(pos) is Turn.PLAYER
        if player:
            hit = self._memo_lookup(pos)
            if hit is not None:
                return hit.value
        succs = self.arena.succ(pos)
        if not succs:
            value = self.game.payoff_of(pos)
            if player:
                self._memo_store(pos, value, True)
            return value
        self.stats.expanded_positions += 1
        values = [self.exhaustive(child) for child in succs]
        if not player:
            return self.algebra.fold_times(values)
        value = self.algebra.fold_plus(values)
        attaining = tuple(i for i, w in enumerate(values) if w == value)
        if attaining:
            self.choices[pos] = attaining[:1] if self.policy is Policy.FM else attaining
        self._memo_store(pos, value, True)
        return value

    # -- tropical α-pruning ----------------------------------------------------

    def _cut(self, alpha: Any, v: Any) -> bool:
        if not self.algebra.prefers(alpha, v):
            return False
        # AM keeps ties alive so that every optimal strategy is found
        return self.policy is Policy.FM or v != alpha

    def tropical(self, pos: Position, alpha: Any) -> Tuple[Any, bool]:
        self._enter(pos)
        try:
            return self._tropical(pos, alpha)
        finally:
            self._path.pop()

    def _tropical(self, pos: Position, alpha: Any) -> Tuple[Any, bool]:
        player = self.arena.turn(pos) is Turn.PLAYER
        if player:
            hit = self._memo_lookup(pos, alpha, pruned=True)
            if hit is not None:
                return hit.value, hit.exact
        succs = self.arena.succ(pos)
        if not succs:
            value = self.game.payoff_of(pos)
            if player:
                self._memo_store(pos, value, True)
            return value, True
        self.stats.expanded_positions += 1
        if player:
            return self._tropical_player(pos, succs, alpha)
        return self._tropical_opponent(succs, alpha)

    def _tropical_player(self, pos: Position, succs: Sequence[Position], alpha: Any) -> Tuple[Any, bool]:
        oplus = self.algebra.oplus
        v = alpha
        attained = False
        blocked = False
        chosen: List[int] = []
        # no pruning at the player's level
        for i, child in enumerate(succs):
            w, w_exact = self.tropical(child, v)
            nv = w if v is None else oplus(v, w)
            if v is None or nv != v:
                v = nv
                attained = w_exact
                blocked = not w_exact
                chosen = [i] if w_exact else []
            elif w_exact and w == v:
                if self.policy is Policy.AM:
                    chosen.append(i)
                    attained = True
                elif not attained and not blocked:
                    chosen = [i]
                    attained = True
            elif not w_exact and not attained:
                # an earlier sibling may tie with the final value unseen
                blocked = True
        if attained:
            self.choices[pos] = tuple(chosen)
        self._memo_store(pos, v, attained)
        return v, attained

    def _tropical_opponent(self, succs: Sequence[Position], alpha: Any) -> Tuple[Any, bool]:
        otimes = self.algebra.otimes
        # first child unrolled: no neutral element for ⊗ is needed
        v, exact = self.tropical(succs[0], alpha)
        for child in succs[1:]:
            if alpha is not None and self._cut(alpha, v):
                self.stats.cuts += 1
                return v, False
            w, w_exact = self.tropical(child, alpha)
            v = otimes(v, w)
            exact = exact and w_exact
        return v, exact

    # -- classic α-β -----------------------------------------------------------

    def alpha_beta(self, pos: Position, alpha: Any, beta: Any) -> Any:
        self._enter(pos)
        try:
            return self._alpha_beta(pos, alpha, beta)
        finally:
            self._path.pop()

    def _alpha_beta(self, pos: Position, alpha: Any, beta: Any) -> Any:
        succs = self.arena.succ(pos)
        if not succs:
            return self.game.payoff_of(pos)
        self.stats.expanded_positions += 1
        alg = self.algebra
        if self.arena.turn(pos) is Turn.PLAYER:
            v = alpha
            best: Optional[int] = None
            for i, child in enumerate(succs):
                if alg.prefers(v, beta):
                    self.stats.cuts += 1
                    break
                w = self.alpha_beta(child, v, beta)
                nv = alg.oplus(v, w)
                if nv != v:
                    v = nv
                    best = i
            if self.policy is Policy.FM and best is not None and self.window_exact(Turn.PLAYER, v, alpha, beta):
                self.choices[pos] = (best,)
            return v
        v = beta
        for child in succs:
            if alg.otimes(v, alpha) == v:
                self.stats.cuts += 1
                break
            w = self.alpha_beta(child, alpha, v)
            v = alg.otimes(v, w)
        return v

    def window_exact(self, turn: Turn, v: Any, alpha: Any, beta: Any) -> bool:
        """A value strictly inside the (β, α) window is exact."""
        alg = self.algebra
        if turn is Turn.PLAYER:
            return v != alpha and not alg.prefers(v, beta)
        return v != beta and alg.otimes(v, alpha) != v

    # -- strategies ------------------------------------------------------------

    def _fill(self, pos: Position) -> None:
        helper = _Search(self.game, self.policy, self.depth_budget)
        helper.exhaustive(pos)
        for k, c in helper.choices.items():
            self.choices.setdefault(k, c)
        logger.debug("[evaluator] filled %d choices below %r exhaustively", len(helper.choices), pos)

    def choices_at(self, pos: Position) -> Tuple[int, ...]:
        ch = self.choices.get(pos)
        if not ch:
            self._fill(pos)
            ch = self.choices.get(pos)
            if not ch:
                raise StrategyError(f"no successor attains the value at {pos!r}")
        return ch

    def result(self, root: Position, value: Any, exact: bool, limit: int) -> EvalResult:
        if self.memo is not None:
            self.stats.memo_entries = len(self.memo)
        try:
            strategies, overflow = enumerate_strategies(self.game, root, self.choices_at, self.policy, limit)
        except StrategyError as e:
            logger.warning("[evaluator] no strategy extracted: %s", e)
            strategies, overflow = (), False
        logger.debug(
            "[evaluator] value=%r exact=%s calls=%d cuts=%d memo_hits=%d strategies=%d",
            value, exact, self.stats.recursive_calls, self.stats.cuts, self.stats.memo_hits, len(strategies),
        )
        return EvalResult(
            value=value,
            strategies=strategies,
            stats=self.stats,
            root=root,
            policy=self.policy,
            exact=exact,
            overflow=overflow,
            choices=self.choices,
            game=self.game,
        )


# ---------------------------------------------------------------------------
# strategy enumeration
# ---------------------------------------------------------------------------


def enumerate_strategies(
    game: GameInstance,
    root: Position,
    choices_at: Callable[[Position], Tuple[int, ...]],
    policy: Policy,
    limit: int = DEFAULT_STRATEGY_LIMIT,
) -> Tuple[Tuple[Strategy, ...], bool]:
    """Walk recorded choices; FM follows the first choice, AM every one.

    Output order is lexicographic in successor order, so the FM strategy is
    always the first AM strategy. Returns (strategies, overflow).
    """
    arena = game.arena
    cap = max(1, limit) + 1

    def gen(pos: Position) -> Iterator[Dict[Position, int]]:
        succs = arena.succ(pos)
        if not succs:
            yield {}
            return
        if arena.turn(pos) is Turn.PLAYER:
            idxs = choices_at(pos)
            if policy is Policy.FM:
                idxs = idxs[:1]
            for c in idxs:
                for sub in gen(succs[c]):
                    d = dict(sub)
                    d[pos] = c
                    yield d
        else:
            yield from product(list(succs))

    def product(children: List[Position]) -> Iterator[Dict[Position, int]]:
        if not children:
            yield {}
            return
        rest = list(itertools.islice(product(children[1:]), cap))
        for head in gen(children[0]):
            for tail in rest:
                if any(k in head and head[k] != c for k, c in tail.items()):
                    continue
                d = dict(head)
                d.update(tail)
                yield d

    found = list(itertools.islice(gen(root), cap))
    overflow = len(found) > limit
    return tuple(Strategy(d) for d in found[:limit]), overflow


def _from_result(result: EvalResult, policy: Policy, limit: int) -> Tuple[Strategy, ...]:
    if result.game is None:
        raise StrategyError("result carries no game to walk")

    def choices_at(pos: Position) -> Tuple[int, ...]:
        ch = result.choices.get(pos)
        if not ch:
            raise StrategyError(f"no recorded choice at {pos!r}")
        return ch

    strategies, _ = enumerate_strategies(result.game, result.root, choices_at, policy, limit)
    return strategies


def extract_fm(result: EvalResult) -> Strategy:
    strategies = _from_result(result, Policy.FM, 1)
    if not strategies:
        raise StrategyError("no strategy")
    return strategies[0]


def extract_am(result: EvalResult, limit: int = DEFAULT_STRATEGY_LIMIT) -> Tuple[Strategy, ...]:
    return _from_result(result, Policy.AM, limit)


def replay(game: GameInstance, pos: Position, strategy: Strategy) -> Any:
    """Evaluate with ⊕ replaced by the strategy's choice."""
    succs = game.arena.succ(pos)
    if not succs:
        return game.payoff_of(pos)
    if game.arena.turn(pos) is Turn.PLAYER:
        return replay(game, succs[strategy.choice(pos)], strategy)
    return game.algebra.fold_times(replay(game, c, strategy) for c in succs)


# ---------------------------------------------------------------------------
# public entry points
# ---------------------------------------------------------------------------


def eval_exhaustive(
    game: GameInstance,
    pos: Position,
    policy: "Policy | str" = Policy.FM,
    depth_budget: Optional[int] = None,
    limit: int = DEFAULT_STRATEGY_LIMIT,
) -> EvalResult:
    search = _Search(game, Policy.parse(policy), depth_budget)
    value = search.exhaustive(pos)
    return search.result(pos, value, True, limit)


def _root_alpha(game: GameInstance, alpha: Any) -> Any:
    # 0̄ makes the first ⊕ a no-op; without one the root unrolls its first child
    return game.algebra.zero if alpha is _ROOT else alpha


def _require_rational(game: GameInstance) -> None:
    if not game.algebra.rational:
        raise AlgebraError(f"tropical pruning needs a rational algebra, {game.algebra.name} is not flagged rational")


def eval_tropical(
    game: GameInstance,
    pos: Position,
    alpha: Any = _ROOT,
    policy: "Policy | str" = Policy.FM,
    depth_budget: Optional[int] = None,
    limit: int = DEFAULT_STRATEGY_LIMIT,
) -> EvalResult:
    _require_rational(game)
    search = _Search(game, Policy.parse(policy), depth_budget)
    value, exact = search.tropical(pos, _root_alpha(game, alpha))
    return search.result(pos, value, exact, limit)


def eval_alpha_beta(
    game: GameInstance,
    pos: Position,
    alpha: Any = _ROOT,
    beta: Any = _ROOT,
    policy: "Policy | str" = Policy.FM,
    depth_budget: Optional[int] = None,
    limit: int = DEFAULT_STRATEGY_LIMIT,
) -> EvalResult:
    alg = game.algebra
    if not alg.bi_tropical:
        raise AlgebraError(f"alpha-beta needs a bi-tropical algebra, {alg.name} is not")
    alpha = alg.zero if alpha is _ROOT else alpha
    beta = alg.one if beta is _ROOT else beta
    if alpha is None or beta is None:
        raise AlgebraError(f"alpha-beta needs both neutral elements of {alg.name} for the root window")
    search = _Search(game, Policy.parse(policy), depth_budget)
    value = search.alpha_beta(pos, alpha, beta)
    exact = search.window_exact(game.arena.turn(pos), value, alpha, beta)
    return search.result(pos, value, exact, limit)


def eval_memo(
    game: GameInstance,
    pos: Position,
    pruning: bool = True,
    policy: "Policy | str" = Policy.FM,
    depth_budget: Optional[int] = None,
    limit: int = DEFAULT_STRATEGY_LIMIT,
) -> EvalResult:
    search = _Search(game, Policy.parse(policy), depth_budget, memo=True)
    if pruning:
        _require_rational(game)
        value, exact = search.tropical(pos, _root_alpha(game, _ROOT))
    else:
        value, exact = search.exhaustive(pos), True
    return search.result(pos, value, exact, limit)


def evaluate(
    game: GameInstance,
    pos: Position,
    prune: bool = True,
    memo: bool = False,
    policy: "Policy | str" = Policy.FM,
    depth_budget: Optional[int] = None,
    limit: int = DEFAULT_STRATEGY_LIMIT,
) -> EvalResult:
    """Dispatch on the (prune, memo) switches."""
    if memo:
        return eval_memo(game, pos, pruning=prune, policy=policy, depth_budget=depth_budget, limit=limit)
    if prune:
        return eval_tropical(game, pos, policy=policy, depth_budget=depth_budget, limit=limit)
    return eval_exhaustive(game, pos, policy=policy, depth_budget=depth_budget, limit=limit)
