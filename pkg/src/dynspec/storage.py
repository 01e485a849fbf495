from __future__ import annotations

from typing import Any

import fsspec


def read_text(uri: str, *, fs_kwargs: dict[str, Any] | None = None) -> str:
    fs_kwargs = fs_kwargs or {}
    with fsspec.open(uri, "r", encoding="utf-8", **fs_kwargs) as handle:
        return handle.read()


def write_text(
    uri: str, data: str, *, fs_kwargs: dict[str, Any] | None = None
) -> None:
    fs_kwargs = fs_kwargs or {}
    with fsspec.open(uri, "w", encoding="utf-8", newline="", **fs_kwargs) as handle:
        handle.write(data)
