from __future__ import annotations
import json
import logging
import random
from typing import Any, Callable, Dict, List, Optional, Tuple

from common.schema import BenchInput, RunConfig
from parsegame.game import ParseOutcome, best_parse
from parsegame.grammar import Grammar, load_grammar_file
from tropical.algebra import BUILTIN_ALGEBRAS, MIN_MAX, MIN_PLUS, full_report
from tropical.arena import GameInstance, Position, TreeArena, random_tree_spec
from tropical.evaluator import EvalResult, eval_alpha_beta, eval_exhaustive, eval_memo, eval_tropical
from tropical.smallstep import RuleSet, normalize, term_of_game

logger = logging.getLogger(__name__)

PrunedEvaluator = Callable[[GameInstance, Position], EvalResult]


def _emit(record: Dict[str, Any]) -> None:
    print(json.dumps(record, ensure_ascii=False))


def _read_inputs(config: RunConfig) -> List[str]:
    inputs = list(config.inputs)
    if config.input_file:
        with open(config.input_file, "r", encoding="utf-8") as f:
            inputs.extend(line.rstrip("\n") for line in f if line.strip())
    return inputs


# ---------------------------------------------------------------------------
# parse
# ---------------------------------------------------------------------------


def _print_outcome(outcome: ParseOutcome) -> None:
    print(f"[parse] input: {outcome.text!r}")
    print(f"[parse] cost={outcome.cost} trees={len(outcome.trees)}{' (truncated)' if outcome.overflow else ''}")
    for k, (rendered, spans) in enumerate(zip(outcome.rendered(), outcome.error_spans), start=1):
        print(f"  tree {k}: {rendered}")
        for s in spans:
            print(f"    error {s.char_start}..{s.char_end} {s.excerpt!r} size={s.size}")
    st = outcome.stats
    print(f"[parse] calls={st.recursive_calls} cuts={st.cuts} memo_hits={st.memo_hits} millis={outcome.millis:.1f}")


def cmd_parse(config: RunConfig) -> int:
    grammar = load_grammar_file(config.grammar)
    for text in _read_inputs(config):
        outcome = best_parse(
            grammar,
            config.start,
            text,
            policy=config.policy,
            prune=config.prune,
            memo=config.memo,
            max_trees=config.max_trees,
        )
        if config.format == "json-lines":
            _emit(outcome.to_dict())
        else:
            _print_outcome(outcome)
    return 0


# ---------------------------------------------------------------------------
# bench
# ---------------------------------------------------------------------------

BENCH_RUNS: Tuple[Tuple[bool, bool, str], ...] = tuple(
    (memo, prune, policy) for memo in (False, True) for prune in (False, True) for policy in ("fm", "am")
)


def run_key(prune: bool, memo: bool, policy: str) -> str:
    return ("memo_" if memo else "") + (policy if prune else "exhaustive")


def bench_input(grammar: Grammar, start: Optional[str], item: BenchInput, max_trees: int = 64) -> List[Dict[str, Any]]:
    """Run every (memo, prune, policy) combination on one input."""
    rows: List[Dict[str, Any]] = []
    baseline: Optional[int] = None
    for memo, prune, policy in BENCH_RUNS:
        out = best_parse(grammar, start, item.text, policy=policy, prune=prune, memo=memo, max_trees=max_trees)
        calls = out.stats.recursive_calls
        if baseline is None:
            baseline = calls
        key = run_key(prune, memo, policy)
        rows.append(
            {
                "name": item.name,
                "input": item.text,
                "run": key,
                "policy": policy,
                "prune": prune,
                "memo": memo,
                "cost": out.cost,
                "trees": len(out.trees),
                "calls": calls,
                "cuts": out.stats.cuts,
                "memo_hits": out.stats.memo_hits,
                "reduction": round(100.0 * (1.0 - calls / baseline), 1) if baseline else 0.0,
                "millis": round(out.millis, 3),
                "reference": item.reference.get(key),
            }
        )
    return rows


def ratio_breaches(rows: List[Dict[str, Any]], max_ratio: Dict[str, float]) -> List[Dict[str, Any]]:
    """Pruned runs without memo whose calls exceed ``max_ratio[policy]`` of the exhaustive run."""
    exhaustive = next((r["calls"] for r in rows if not r["prune"] and not r["memo"]), None)
    if not exhaustive:
        return []
    breaches = []
    for r in rows:
        limit = max_ratio.get(r["policy"])
        if not r["prune"] or r["memo"] or limit is None:
            continue
        ratio = r["calls"] / exhaustive
        if ratio > limit:
            breaches.append({"run": r["run"], "calls": r["calls"], "exhaustive": exhaustive, "ratio": round(ratio, 3), "limit": limit})
    return breaches


def cmd_bench(config: RunConfig) -> int:
    grammar = load_grammar_file(config.grammar)
    explicit = _read_inputs(config)
    items = [BenchInput(name=t, text=t) for t in explicit] if explicit else list(config.bench)
    status = 0
    for item in items:
        rows = bench_input(grammar, config.start, item, config.max_trees)
        costs = {r["cost"] for r in rows}
        if config.format == "json-lines":
            for r in rows:
                _emit(r)
        else:
            print(f"[bench] {item.name}: {item.text!r}")
            print(f"  {'run':<18}{'cost':>6}{'trees':>7}{'calls':>10}{'cuts':>8}{'hits':>8}{'red.%':>8}{'ms':>10}{'ref':>10}")
            for r in rows:
                ref = "" if r["reference"] is None else str(r["reference"])
                label = r["run"] if r["prune"] else f"{r['run']}/{r['policy']}"
                print(
                    f"  {label:<18}{r['cost']:>6}{r['trees']:>7}{r['calls']:>10}{r['cuts']:>8}"
                    f"{r['memo_hits']:>8}{r['reduction']:>8.1f}{r['millis']:>10.1f}{ref:>10}"
                )
        if len(costs) != 1:
            logger.error("[bench] %s: cost differs across runs: %s", item.name, sorted(costs))
            print(f"[bench] FAIL {item.name}: costs {sorted(costs)}")
            status = 1
        for b in ratio_breaches(rows, config.max_ratio):
            tag = "FAIL" if config.strict_ratio else "WARN"
            logger.warning("[bench] %s: %s ratio %.3f above %.2f", item.name, b["run"], b["ratio"], b["limit"])
            print(f"[bench] {tag} ratio {item.name} {b['run']}: {b['calls']}/{b['exhaustive']}={b['ratio']} > {b['limit']}")
            if config.strict_ratio:
                status = 1
    print("[bench] finished")
    return status


# ---------------------------------------------------------------------------
# laws
# ---------------------------------------------------------------------------


def cmd_laws(config: RunConfig) -> int:
    rng = random.Random(config.seed)
    status = 0
    for name, algebra in BUILTIN_ALGEBRAS.items():
        report = full_report(algebra, config.samples, rng)
        if config.format == "json-lines":
            _emit(report.to_dict())
        else:
            for r in report.results:
                if r.skipped:
                    print(f"[laws] {name} {r.law}: skipped")
                elif r.passed:
                    print(f"[laws] {name} {r.law}: ok ({r.checked})")
                else:
                    print(f"[laws] {name} {r.law}: FAIL counterexample={r.to_dict()['counterexample']}")
        if not report.passed:
            status = 1
    print(f"[laws] finished seed={config.seed}")
    return status


# ---------------------------------------------------------------------------
# oracle
# ---------------------------------------------------------------------------


def oracle_values(arena: TreeArena, config: RunConfig, pruned: PrunedEvaluator) -> Tuple[Dict[str, Any], Dict[str, Any]]:
    """Values of one random tree under every evaluator, per algebra."""
    root = arena.root
    game = arena.game(MIN_PLUS)
    term = term_of_game(game, root)
    min_plus = {
        "exhaustive": eval_exhaustive(game, root, depth_budget=config.depth_budget).value,
        "tropical": pruned(game, root).value,
        "memo_tropical": eval_memo(game, root, pruning=True, depth_budget=config.depth_budget).value,
        "smallstep": normalize(game, term, RuleSet.base(), config.step_budget),
        "smallstep_cuts": normalize(game, term, RuleSet.with_player_cuts(), config.step_budget),
    }
    mm = arena.game(MIN_MAX)
    min_max = {
        "exhaustive": eval_exhaustive(mm, root, depth_budget=config.depth_budget).value,
        "alpha_beta": eval_alpha_beta(mm, root, depth_budget=config.depth_budget).value,
        "tropical": eval_tropical(mm, root, depth_budget=config.depth_budget).value,
        "smallstep_cuts": normalize(mm, term, RuleSet.with_all_cuts(), config.step_budget),
    }
    return min_plus, min_max


def cmd_oracle(config: RunConfig, pruned: Optional[PrunedEvaluator] = None) -> int:
    pruned = pruned or eval_tropical
    failures = 0
    for i in range(config.count):
        seed = f"{config.seed}/{i}"
        rng = random.Random(seed)
        spec = random_tree_spec(rng, depth=config.depth, branching=config.branching, low=config.low, high=config.high)
        arena = TreeArena(spec)
        min_plus, min_max = oracle_values(arena, config, pruned)
        if len(set(min_plus.values())) == 1 and len(set(min_max.values())) == 1:
            continue
        failures += 1
        record = {
            "seed": seed,
            "index": i,
            "game": arena.to_text(),
            "min_plus": {k: str(v) for k, v in min_plus.items()},
            "min_max": {k: str(v) for k, v in min_max.items()},
        }
        if config.format == "json-lines":
            _emit(record)
        else:
            print(f"[oracle] FAIL game {i} (seed {seed!r}): {record['game']}")
            print(f"  min-plus {record['min_plus']}")
            print(f"  min-max  {record['min_max']}")
    print(f"[oracle] finished games={config.count} failures={failures} seed={config.seed}")
    return 1 if failures else 0
