from __future__ import annotations

from contextlib import asynccontextmanager
from pathlib import Path

import pytest
from fastmcp import Client
from fastmcp.exceptions import ToolError

from dynspec.mapfile import load_map
from dynspec.mcp_server import mcp


def _tool_names(tools) -> set[str]:
    names: set[str] = set()
    for tool in tools:
        if isinstance(tool, dict):
            name = tool.get("name")
        else:
            name = getattr(tool, "name", None)
        if name:
            names.add(name)
    return names


@pytest.fixture
async def mcp_client(monkeypatch):
    @asynccontextmanager
    async def _no_docket():
        yield

    monkeypatch.setattr(mcp, "_docket_lifespan", _no_docket)
    async with Client(transport=mcp) as client:
        yield client


async def test_mcp_list_tools_includes_core(mcp_client) -> None:
    tools = await mcp_client.list_tools()
    names = _tool_names(tools)
    for expected in {
        "validate_map",
        "spectrum",
        "pressure",
        "lyapunov",
        "linearize",
        "cheb",
        "sweep",
        "verify",
    }:
        assert expected in names


async def test_mcp_validate_and_spectrum(mcp_client) -> None:
    result = await mcp_client.call_tool(
        name="validate_map", arguments={"path": "example:golden23"}
    )
    assert result.data["ok"] is True
    assert result.data["transition_matrix"] == [[1, 1], [1, 0]]

    result = await mcp_client.call_tool(name="spectrum", arguments={"path": "example:tent"})
    assert result.data["mixing_rate"] == pytest.approx(1.3862943611198906, rel=1e-10)


async def test_mcp_pressure_and_lyapunov(mcp_client) -> None:
    result = await mcp_client.call_tool(
        name="pressure", arguments={"path": "example:golden23", "betas": [1.0]}
    )
    assert result.data["pressure"][0] == pytest.approx(0.0, abs=1e-12)

    result = await mcp_client.call_tool(name="lyapunov", arguments={"path": "example:moebius"})
    assert result.data["lyapunov"] == pytest.approx(0.685, abs=5e-3)


async def test_mcp_linearize_writes_map(tmp_path: Path, mcp_client) -> None:
    out = tmp_path / "f3.json"
    result = await mcp_client.call_tool(
        name="linearize",
        arguments={"path": "example:moebius", "level": 3, "output": str(out)},
    )
    assert result.data["branches"] == 8
    assert load_map(str(out)).size == 8


async def test_mcp_cheb_and_verify(mcp_client) -> None:
    result = await mcp_client.call_tool(name="cheb", arguments={"path": "example:moebius"})
    assert result.data["subleading_modulus"] == pytest.approx(0.10415, abs=5e-4)

    result = await mcp_client.call_tool(name="verify", arguments={"path": "example:doubling"})
    assert result.data["ok"] is True
    assert result.data["kind"] == "piecewise_linear"


async def test_mcp_rejects_wrong_map_kind(mcp_client) -> None:
    with pytest.raises(ToolError):
        await mcp_client.call_tool(name="spectrum", arguments={"path": "example:moebius"})
