from __future__ import annotations

import json
from importlib import resources

from .errors import MapFileError
from .mapfile import AnyMap, load_map, parse_map

EXAMPLE_PREFIX = "example:"


def example_map_names() -> list[str]:
    root = resources.files("dynspec.data")
    return sorted(
        entry.name.removesuffix(".json")
        for entry in root.iterdir()
        if entry.name.endswith(".json")
    )


def load_example_map_text(name: str) -> str:
    if name not in example_map_names():
        raise MapFileError(
            f"No bundled map named {name!r}; choose from {', '.join(example_map_names())}"
        )
    return resources.files("dynspec.data").joinpath(f"{name}.json").read_text("utf-8")


def load_example_map(name: str) -> AnyMap:
    return parse_map(json.loads(load_example_map_text(name)))


def resolve_map(path: str | None) -> AnyMap:
    if not path:
        raise MapFileError("A map file is required")
    if path.startswith(EXAMPLE_PREFIX):
        return load_example_map(path[len(EXAMPLE_PREFIX) :])
    return load_map(path)
