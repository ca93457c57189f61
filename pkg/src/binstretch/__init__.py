"""Exact game search, lower-bound trees and the Evasive packer for online bin stretching."""
from .core import BinConfig, GameOutcome, ItemMultiset, SearchParams

__version__ = "0.1.0"

__all__ = ["BinConfig", "GameOutcome", "ItemMultiset", "SearchParams", "__version__"]
