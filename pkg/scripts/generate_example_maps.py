from __future__ import annotations

from pathlib import Path

from dynspec.map_model import PiecewiseLinearMarkovMap, moebius
from dynspec.mapfile import save_map


def main() -> None:
    out_dir = Path("src/dynspec/data")
    out_dir.mkdir(parents=True, exist_ok=True)

    maps = {
        "tent": PiecewiseLinearMarkovMap.from_branches(
            [0.0, 0.5, 1.0], [(2.0, 0.0), (-2.0, 2.0)]
        ),
        "doubling": PiecewiseLinearMarkovMap.from_branches(
            [0.0, 0.5, 1.0], [(2.0, 0.0), (2.0, -1.0)]
        ),
        "golden23": PiecewiseLinearMarkovMap.from_branches(
            [0.0, 2.0 / 3.0, 1.0], [(1.5, 0.0), (2.0, -4.0 / 3.0)]
        ),
        "moebius": moebius(-0.11),
    }
    for name, fmap in maps.items():
        save_map(fmap, str(out_dir / f"{name}.json"))
        print(f"Wrote {out_dir / name}.json")


if __name__ == "__main__":
    main()
