"""Second-order-cone representations of rational power cones via mediated graphs."""

from .core import AlphaWeight, normalize_alpha

__all__ = ["AlphaWeight", "normalize_alpha"]
__version__ = "0.1.0"
