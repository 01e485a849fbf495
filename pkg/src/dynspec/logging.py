from __future__ import annotations

import logging
import os

_ROOT = "dynspec"
_FORMAT = "%(levelname)s %(name)s: %(message)s"


def get_logger(module: str, level: int | str | None = None) -> logging.Logger:
    """Return a logger below the ``dynspec`` namespace.

    The package logger gets a single stderr handler on first use; its level
    comes from ``level`` or ``DYNSPEC_LOG_LEVEL`` (default WARNING).
    """
    root = logging.getLogger(_ROOT)
    if not root.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(_FORMAT))
        root.addHandler(handler)
        root.setLevel(os.environ.get("DYNSPEC_LOG_LEVEL", "WARNING").upper())
        root.propagate = False

    if level is not None:
        root.setLevel(level)

    name = module if module.startswith(_ROOT) else f"{_ROOT}.{module}"
    return logging.getLogger(name)


def set_verbosity(count: int) -> None:
    if count <= 0:
        return
    get_logger(_ROOT, logging.INFO if count == 1 else logging.DEBUG)
