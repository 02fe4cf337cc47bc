"""Discrete model of a four-linear paraproduct: tiles, wave packets, size and energy, tree selection, Whitney splitting and restricted-type experiments."""

__version__ = "0.1.0"
