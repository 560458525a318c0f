from __future__ import annotations
import argparse
import logging
import sys
from typing import List, Optional

from cli.commands import cmd_bench, cmd_laws, cmd_oracle, cmd_parse
from common.config import DEFAULT_CONFIG, load_config
from common.errors import TropicalError
from common.logs import setup_logging
from common.schema import RunConfig

logger = logging.getLogger(__name__)

COMMANDS = {
    "parse": cmd_parse,
    "bench": cmd_bench,
    "laws": cmd_laws,
    "oracle": cmd_oracle,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=DEFAULT_CONFIG, help="YAML config file")
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v INFO, -vv DEBUG")
    common.add_argument("--format", choices=["text", "json-lines"])

    grammar = argparse.ArgumentParser(add_help=False)
    grammar.add_argument("--grammar")
    grammar.add_argument("--start")
    grammar.add_argument("--input", action="append", help="input string (repeatable)")
    grammar.add_argument("--input-file")
    grammar.add_argument("--max-trees", type=int)

    checks = argparse.ArgumentParser(add_help=False)
    checks.add_argument("--seed", type=int)
    checks.add_argument("--count", type=int)
    checks.add_argument("--samples", type=int)

    ap = argparse.ArgumentParser(prog="tropical-games", description="Tropical game search and error-tolerant parsing")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", parents=[common, grammar], help="parse input strings")
    p.add_argument("--policy", choices=["fm", "am"], type=str.lower)
    p.add_argument("--prune", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--memo", action=argparse.BooleanOptionalAction, default=None)

    b = sub.add_parser("bench", parents=[common, grammar], help="compare pruning and memoization call counts")
    b.add_argument("--strict-ratio", action=argparse.BooleanOptionalAction, default=None, help="exit 1 when a pruned run exceeds bench.max_ratio")
    sub.add_parser("laws", parents=[common, checks], help="check algebra laws on random samples")
    o = sub.add_parser("oracle", parents=[common, checks], help="cross-check evaluators on random games")
    o.add_argument("--depth", type=int)
    o.add_argument("--branching", type=int)
    return ap


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = load_config(args.config)
    config = RunConfig.from_dict(cfg, command=args.command)
    # 命令行参数覆盖 YAML
    overrides = {
        "grammar": "grammar",
        "start": "start",
        "input": "inputs",
        "input_file": "input_file",
        "max_trees": "max_trees",
        "policy": "policy",
        "prune": "prune",
        "memo": "memo",
        "format": "format",
        "seed": "seed",
        "count": "count",
        "samples": "samples",
        "depth": "depth",
        "branching": "branching",
        "strict_ratio": "strict_ratio",
    }
    for arg, attr in overrides.items():
        value = getattr(args, arg, None)
        if value is not None:
            setattr(config, attr, value)
    return config.validate()


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.verbose)
    try:
        config = config_from_args(args)
        logger.info("[cli] %s with %s", config.command, args.config)
        return COMMANDS[config.command](config)
    except (TropicalError, FileNotFoundError, ValueError) as e:
        print(f"[cli] error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
