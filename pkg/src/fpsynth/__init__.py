"""Fictitious play against an intelligent player: simulation, exact LP synthesis
of the player's convergence-based mixed strategy, and trajectory compilation."""

__version__ = "0.1.0"
