from __future__ import annotations

import json
from typing import Any, Union

from .errors import MapFileError
from .map_model import (
    PiecewiseLinearMarkovMap,
    SmoothFullBranchMap,
    moebius,
)
from .storage import read_text, write_text

AnyMap = Union[PiecewiseLinearMarkovMap, SmoothFullBranchMap]

_PIECEWISE_KEYS = {"type", "domain", "breakpoints", "branches"}
_BRANCH_KEYS = {"slope", "intercept"}
_MOEBIUS_KEYS = {"type", "c"}


def load_map(uri: str) -> AnyMap:
    try:
        data = json.loads(read_text(uri))
    except json.JSONDecodeError as exc:
        raise MapFileError(f"{uri}: not valid JSON ({exc.msg} at line {exc.lineno})") from exc
    return parse_map(data)


def parse_map(data: Any) -> AnyMap:
    if not isinstance(data, dict):
        raise MapFileError("Map JSON must be an object")
    kind = data.get("type")
    if kind == "piecewise_linear":
        return _parse_piecewise(data)
    if kind == "moebius":
        _reject_unknown(data, _MOEBIUS_KEYS, "moebius map")
        if "c" not in data:
            raise MapFileError("moebius map needs a 'c' parameter")
        return moebius(_number(data["c"], "c"))
    raise MapFileError(f"Unknown map type {kind!r}; expected 'piecewise_linear' or 'moebius'")


def _parse_piecewise(data: dict[str, Any]) -> PiecewiseLinearMarkovMap:
    _reject_unknown(data, _PIECEWISE_KEYS, "piecewise_linear map")
    for key in ("breakpoints", "branches"):
        if not isinstance(data.get(key), list):
            raise MapFileError(f"piecewise_linear map needs a '{key}' list")

    breakpoints = [_number(v, "breakpoints") for v in data["breakpoints"]]
    branches = []
    for index, entry in enumerate(data["branches"]):
        if not isinstance(entry, dict):
            raise MapFileError(f"branches[{index}] must be an object")
        _reject_unknown(entry, _BRANCH_KEYS, f"branches[{index}]")
        missing = _BRANCH_KEYS - entry.keys()
        if missing:
            raise MapFileError(f"branches[{index}] is missing {sorted(missing)}")
        branches.append(
            (
                _number(entry["slope"], f"branches[{index}].slope"),
                _number(entry["intercept"], f"branches[{index}].intercept"),
            )
        )

    fmap = PiecewiseLinearMarkovMap.from_branches(breakpoints, branches)
    if "domain" in data:
        domain = data["domain"]
        if (
            not isinstance(domain, list)
            or len(domain) != 2
            or [_number(v, "domain") for v in domain] != fmap.domain.as_list()
        ):
            raise MapFileError(
                f"domain {domain!r} does not match breakpoints {fmap.domain.as_list()}"
            )
    return fmap


def _reject_unknown(data: dict[str, Any], allowed: set[str], where: str) -> None:
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise MapFileError(f"Unknown keys in {where}: {', '.join(unknown)}")


def _number(value: Any, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise MapFileError(f"{name} must be a number, got {value!r}")
    return float(value)


def dump_map(fmap: AnyMap, pretty: bool = True) -> str:
    return json.dumps(fmap.to_dict(), indent=2 if pretty else None) + "\n"


def save_map(fmap: AnyMap, uri: str, pretty: bool = True) -> None:
    write_text(uri, dump_map(fmap, pretty))
