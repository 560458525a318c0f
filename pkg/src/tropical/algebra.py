"""
Tropical algebras: a carrier with a player operation (oplus) and an opponent
operation (otimes), plus the executable law checks used by tests and the
`laws` command.

Carriers are exact: naturals/integers extended with infinities, represented
with Python ints and `math.inf`. Equality is plain `==`.
"""
from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from common.errors import AlgebraError

INF = math.inf
NEG_INF = -math.inf

BinOp = Callable[[Any, Any], Any]


@dataclass(frozen=True)
class TropicalAlgebra:
    name: str
    oplus: BinOp
    otimes: BinOp
    zero: Optional[Any] = None  # neutral for oplus
    one: Optional[Any] = None  # neutral for otimes
    rational: bool = False
    bi_tropical: bool = False
    sampler: Optional[Callable[[random.Random], Any]] = field(default=None, compare=False, repr=False)

    def plus(self, a: Any, b: Any) -> Any:
        return self.oplus(a, b)

    def times(self, a: Any, b: Any) -> Any:
        return self.otimes(a, b)

    def prefers(self, a: Any, b: Any) -> bool:
        """True when the player is content with `a` against `b` (a ⊕ b = a)."""
        return self.oplus(a, b) == a

    def fold_plus(self, values: Iterable[Any]) -> Any:
        return self._fold(self.oplus, self.zero, values, "oplus")

    def fold_times(self, values: Iterable[Any]) -> Any:
        return self._fold(self.otimes, self.one, values, "otimes")

    def _fold(self, op: BinOp, neutral: Optional[Any], values: Iterable[Any], label: str) -> Any:
        it = iter(values)
        try:
            acc = next(it)
        except StopIteration:
            if neutral is None:
                raise AlgebraError(f"[algebra] empty {label} fold over {self.name} which has no neutral element")
            return neutral
        for v in it:
            acc = op(acc, v)
        return acc

    def dual(self) -> "TropicalAlgebra":
        """Swap the two operations (and their neutrals).

        The dual of a bi-tropical algebra is tropical and rational by definition;
        for anything else we make no claim and clear the flags.
        """
        return TropicalAlgebra(
            name=f"dual({self.name})",
            oplus=self.otimes,
            otimes=self.oplus,
            zero=self.one,
            one=self.zero,
            rational=self.bi_tropical,
            bi_tropical=self.bi_tropical,
            sampler=self.sampler,
        )

    def sample(self, rng: random.Random) -> Any:
        if self.sampler is None:
            raise AlgebraError(f"[algebra] {self.name} has no value sampler")
        return self.sampler(rng)


def _saturating_add(a: Any, b: Any) -> Any:
    if a == INF or b == INF:
        return INF
    return a + b


def _sample_natural(rng: random.Random) -> Any:
    return INF if rng.random() < 0.1 else rng.randint(0, 100)


def _sample_integer(rng: random.Random) -> Any:
    r = rng.random()
    if r < 0.05:
        return INF
    if r < 0.10:
        return NEG_INF
    return rng.randint(-50, 50)


MIN_PLUS = TropicalAlgebra(
    name="min-plus",
    oplus=min,
    otimes=_saturating_add,
    zero=INF,
    one=0,
    rational=True,
    bi_tropical=False,
    sampler=_sample_natural,
)

MIN_MAX = TropicalAlgebra(
    name="min-max",
    oplus=min,
    otimes=max,
    zero=INF,
    one=NEG_INF,
    rational=True,
    bi_tropical=True,
    sampler=_sample_integer,
)

BUILTIN_ALGEBRAS: Dict[str, TropicalAlgebra] = {
    MIN_PLUS.name: MIN_PLUS,
    MIN_MAX.name: MIN_MAX,
}


# ---------------------------------------------------------------------------
# law checks
# ---------------------------------------------------------------------------


@dataclass
class LawResult:
    law: str
    checked: int = 0
    passed: bool = True
    counterexample: Optional[Tuple[Any, ...]] = None
    skipped: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {
            "law": self.law,
            "checked": self.checked,
            "passed": self.passed,
            "skipped": self.skipped,
            "counterexample": None if self.counterexample is None else [_show(v) for v in self.counterexample],
        }


@dataclass
class LawReport:
    algebra: str
    results: List[LawResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def failures(self) -> List[LawResult]:
        return [r for r in self.results if not r.passed]

    def __getitem__(self, law: str) -> LawResult:
        for r in self.results:
            if r.law == law:
                return r
        raise KeyError(law)

    def extend(self, other: "LawReport") -> "LawReport":
        self.results.extend(other.results)
        return self

    def to_dict(self) -> Dict[str, Any]:
        return {"algebra": self.algebra, "passed": self.passed, "results": [r.to_dict() for r in self.results]}


def _show(v: Any) -> Any:
    if v == INF:
        return "inf"
    if v == NEG_INF:
        return "-inf"
    return v


def _check(law: str, samples: Sequence[Tuple[Any, ...]], holds: Callable[..., bool]) -> LawResult:
    result = LawResult(law=law)
    for sample in samples:
        result.checked += 1
        if not holds(*sample):
            result.passed = False
            result.counterexample = tuple(sample)
            break
    return result


def _require(samples: Sequence[Any]) -> Sequence[Any]:
    samples = list(samples)
    if not samples:
        raise ValueError("law checks need at least one sample")
    return samples


def check_laws(algebra: TropicalAlgebra, samples: Sequence[Tuple[Any, Any, Any]]) -> LawReport:
    """Associativity of both operations and two-sided distributivity on triples."""
    samples = _require(samples)
    p, t = algebra.oplus, algebra.otimes
    report = LawReport(algebra=algebra.name)
    report.results.append(_check("assoc_plus", samples, lambda a, b, c: p(a, p(b, c)) == p(p(a, b), c)))
    report.results.append(_check("assoc_times", samples, lambda a, b, c: t(a, t(b, c)) == t(t(a, b), c)))
    report.results.append(_check("left_distrib", samples, lambda a, b, c: t(a, p(b, c)) == p(t(a, b), t(a, c))))
    report.results.append(_check("right_distrib", samples, lambda a, b, c: t(p(a, b), c) == p(t(a, c), t(b, c))))
    return report


def check_rationality(algebra: TropicalAlgebra, samples: Sequence[Tuple[Any, Any, Any]]) -> LawReport:
    samples = _require(samples)
    p, t = algebra.oplus, algebra.otimes
    report = LawReport(algebra=algebra.name)
    report.results.append(_check("rationality", samples, lambda x, y, z: p(x, t(t(y, x), z)) == x))
    return report


def check_insertion(algebra: TropicalAlgebra, samples: Sequence[Tuple[Any, Any, Any, Any]]) -> LawReport:
    """alpha ⊕ (beta ⊗ x ⊗ y) = alpha ⊕ (beta ⊗ (alpha ⊕ x) ⊗ y) on (x, y, alpha, beta)."""
    samples = _require(samples)
    p, t = algebra.oplus, algebra.otimes

    def holds(x: Any, y: Any, alpha: Any, beta: Any) -> bool:
        return p(alpha, t(t(beta, x), y)) == p(alpha, t(t(beta, p(alpha, x)), y))

    report = LawReport(algebra=algebra.name)
    report.results.append(_check("insertion", samples, holds))
    return report


def check_neutrals(algebra: TropicalAlgebra, samples: Sequence[Any]) -> LawReport:
    samples = [(x,) for x in _require(samples)]
    p, t = algebra.oplus, algebra.otimes
    report = LawReport(algebra=algebra.name)
    if algebra.zero is None:
        report.results.append(LawResult(law="zero_neutral", skipped=True))
    else:
        z = algebra.zero
        report.results.append(_check("zero_neutral", samples, lambda x: p(z, x) == x and p(x, z) == x))
    if algebra.one is None:
        report.results.append(LawResult(law="one_neutral", skipped=True))
    else:
        o = algebra.one
        report.results.append(_check("one_neutral", samples, lambda x: t(o, x) == x and t(x, o) == x))
    return report


def is_irrelevant(algebra: TropicalAlgebra, alpha: Any, beta: Any, x: Any) -> bool:
    """x is player-irrelevant w.r.t. alpha and beta iff alpha ⊕ (beta ⊗ x) = alpha."""
    return algebra.oplus(alpha, algebra.otimes(beta, x)) == alpha


def check_irrelevance(algebra: TropicalAlgebra, samples: Sequence[Tuple[Any, Any, Any]]) -> LawReport:
    """Whenever alpha ⊕ beta = alpha, every x must be irrelevant."""
    samples = _require(samples)

    def holds(alpha: Any, beta: Any, x: Any) -> bool:
        if not algebra.prefers(alpha, beta):
            return True
        return is_irrelevant(algebra, alpha, beta, x)

    report = LawReport(algebra=algebra.name)
    report.results.append(_check("irrelevance", samples, holds))
    return report


# ---------------------------------------------------------------------------
# sampling helpers
# ---------------------------------------------------------------------------


def sample_tuples(algebra: TropicalAlgebra, arity: int, n: int, rng: random.Random) -> List[Tuple[Any, ...]]:
    return [tuple(algebra.sample(rng) for _ in range(arity)) for _ in range(n)]


def sample_triples(algebra: TropicalAlgebra, n: int, rng: random.Random) -> List[Tuple[Any, Any, Any]]:
    return sample_tuples(algebra, 3, n, rng)  # type: ignore[return-value]


def sample_quadruples(algebra: TropicalAlgebra, n: int, rng: random.Random) -> List[Tuple[Any, Any, Any, Any]]:
    return sample_tuples(algebra, 4, n, rng)  # type: ignore[return-value]


def all_tuples(values: Sequence[Any], arity: int) -> List[Tuple[Any, ...]]:
    """Every tuple over a small carrier, for exhaustive checks."""
    return list(itertools.product(values, repeat=arity))


def full_report(algebra: TropicalAlgebra, n: int, rng: random.Random) -> LawReport:
    """Run every law that the algebra claims to satisfy on `n` random samples each."""
    triples = sample_triples(algebra, n, rng)
    report = check_laws(algebra, triples)
    report.extend(check_neutrals(algebra, [t[0] for t in triples]))
    if algebra.rational:
        report.extend(check_rationality(algebra, triples))
        report.extend(check_insertion(algebra, sample_quadruples(algebra, n, rng)))
        report.extend(check_irrelevance(algebra, sample_triples(algebra, n, rng)))
    if algebra.bi_tropical:
        dual = algebra.dual()
        dual_report = check_laws(dual, triples)
        dual_report.extend(check_rationality(dual, triples))
        for r in dual_report.results:
            r.law = f"dual_{r.law}"
        report.extend(dual_report)
    return report
