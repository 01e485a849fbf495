"""Transfer-operator spectra, pressure and mixing rates of expanding interval maps."""

from importlib.metadata import PackageNotFoundError, version

from .errors import DynSpecError, InputError, NumericalError
from .map_model import MoebiusMap, PiecewiseLinearMarkovMap, moebius
from .mapfile import load_map, save_map

__all__ = [
    "DynSpecError",
    "InputError",
    "MoebiusMap",
    "NumericalError",
    "PiecewiseLinearMarkovMap",
    "load_map",
    "moebius",
    "save_map",
]

try:
    __version__ = version("dynspec")
except PackageNotFoundError:
    __version__ = "0.0.0"
