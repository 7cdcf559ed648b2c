"""Catalytic branching random walks: Malthusian parameter, propagation front, simulation"""

__version__ = "0.1.1"
