"""Mean-field upper bounds on total correlations in thermal spin systems."""

from __future__ import annotations

__version__ = "0.1.0"
