"""Availability-sampling toolkit: sparse erasure codes, coded Merkle trees,
fraud proofs, sampling-game simulation, and bound/cost analysis."""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("sparda")
except PackageNotFoundError:  # pragma: no cover - source tree without install
    __version__ = "0.0.0"

from .kernel import BACKEND

__all__ = ["__version__", "BACKEND"]
