from __future__ import annotations
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from common.errors import ConfigError

COMMANDS = ("parse", "bench", "laws", "oracle")
FORMATS = ("text", "json-lines")
DEFAULT_MAX_RATIO = {"fm": 0.10, "am": 0.15}


@dataclass
class BenchInput:
    name: str
    text: str
    # 参考调用次数，只打印不断言
    reference: Dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "text": self.text, "reference": dict(self.reference)}

    @staticmethod
    def from_dict(d: Dict[str, Any]) -> "BenchInput":
        ref = d.get("reference", {}) or {}
        text = d.get("text")
        if text is None:
            raise ConfigError("bench input needs a 'text' field")
        return BenchInput(name=str(d.get("name") or text), text=str(text), reference={str(k): int(v) for k, v in ref.items()})


@dataclass
class RunConfig:
    command: str = "parse"
    # parse / bench
    grammar: Optional[str] = None
    start: Optional[str] = None
    inputs: List[str] = field(default_factory=list)
    input_file: Optional[str] = None
    policy: str = "fm"
    prune: bool = True
    memo: bool = False
    format: str = "text"
    max_trees: int = 64
    # laws / oracle
    seed: int = 42
    count: int = 1000
    samples: int = 10_000
    depth: int = 4
    branching: int = 3
    low: int = 0
    high: int = 20
    depth_budget: int = 256
    step_budget: int = 100_000
    bench: List[BenchInput] = field(default_factory=list)
    # 剪枝调用数 / 穷举调用数 的上限
    max_ratio: Dict[str, float] = field(default_factory=lambda: dict(DEFAULT_MAX_RATIO))
    strict_ratio: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {
            "command": self.command,
            "parse": {
                "grammar": self.grammar,
                "start": self.start,
                "inputs": list(self.inputs),
                "input_file": self.input_file,
                "policy": self.policy,
                "prune": self.prune,
                "memo": self.memo,
                "format": self.format,
                "max_trees": self.max_trees,
            },
            "checks": {
                "seed": self.seed,
                "count": self.count,
                "samples": self.samples,
                "depth": self.depth,
                "branching": self.branching,
                "low": self.low,
                "high": self.high,
                "depth_budget": self.depth_budget,
                "step_budget": self.step_budget,
            },
            "bench": {
                "inputs": [b.to_dict() for b in self.bench],
                "max_ratio": dict(self.max_ratio),
                "strict_ratio": self.strict_ratio,
            },
        }

    @staticmethod
    def from_dict(cfg: Dict[str, Any], command: str = "parse") -> "RunConfig":
        parse = cfg.get("parse", {}) or {}
        checks = cfg.get("checks", {}) or {}
        bench = cfg.get("bench", {}) or {}
        inputs = parse.get("inputs", []) or []
        if isinstance(inputs, str):
            inputs = [inputs]
        try:
            return RunConfig(
                command=command,
                grammar=parse.get("grammar"),
                start=parse.get("start"),
                inputs=[str(s) for s in inputs],
                input_file=parse.get("input_file"),
                policy=str(parse.get("policy", "fm")).lower(),
                prune=bool(parse.get("prune", True)),
                memo=bool(parse.get("memo", False)),
                format=str(parse.get("format", "text")),
                max_trees=int(parse.get("max_trees", 64)),
                seed=int(checks.get("seed", 42)),
                count=int(checks.get("count", 1000)),
                samples=int(checks.get("samples", 10_000)),
                depth=int(checks.get("depth", 4)),
                branching=int(checks.get("branching", 3)),
                low=int(checks.get("low", 0)),
                high=int(checks.get("high", 20)),
                depth_budget=int(checks.get("depth_budget", 256)),
                step_budget=int(checks.get("step_budget", 100_000)),
                bench=[BenchInput.from_dict(b) for b in (bench.get("inputs", []) or [])],
                max_ratio={str(k): float(v) for k, v in (bench.get("max_ratio") or DEFAULT_MAX_RATIO).items()},
                strict_ratio=bool(bench.get("strict_ratio", False)),
            )
        except (TypeError, ValueError) as e:
            if isinstance(e, ConfigError):
                raise
            raise ConfigError(f"bad configuration value: {e}") from e

    def validate(self) -> "RunConfig":
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.policy not in ("fm", "am"):
            raise ConfigError(f"policy must be fm or am, got {self.policy!r}")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {', '.join(FORMATS)}, got {self.format!r}")
        if self.max_trees < 1:
            raise ConfigError("max_trees must be >= 1")
        if self.command in ("parse", "bench") and not self.grammar:
            raise ConfigError(f"{self.command} needs a grammar")
        if self.command == "parse" and not (self.inputs or self.input_file):
            raise ConfigError("parse needs --input or --input-file")
        if self.command == "bench" and not (self.bench or self.inputs or self.input_file):
            raise ConfigError("bench needs inputs (config bench.inputs or --input)")
        for policy, ratio in self.max_ratio.items():
            if policy not in ("fm", "am") or not 0.0 < ratio <= 1.0:
                raise ConfigError(f"bench.max_ratio needs fm/am keys with values in (0, 1], got {policy}={ratio}")
        if self.command in ("laws", "oracle"):
            if self.count < 0 or self.samples < 1:
                raise ConfigError("count must be >= 0 and samples >= 1")
            if self.low > self.high:
                raise ConfigError("payoff range is empty (low > high)")
            if self.depth < 0 or self.branching < 1:
                raise ConfigError("depth must be >= 0 and branching >= 1")
        return self
