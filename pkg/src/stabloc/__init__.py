"""Localizable entanglement of graph states under Pauli noise."""

from __future__ import annotations

__version__ = "0.1.0"
