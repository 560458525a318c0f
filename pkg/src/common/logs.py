from __future__ import annotations
import logging
import sys


def setup_logging(verbosity: int = 0) -> None:
    # 0 -> WARNING, 1 -> INFO, 2+ -> DEBUG
    if verbosity >= 2:
        level = logging.DEBUG
    elif verbosity == 1:
        level = logging.INFO
    else:
        level = logging.WARNING
    logging.basicConfig(
        level=level,
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s %(message)s",
        force=True,
    )
