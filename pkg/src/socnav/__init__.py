"""socnav: a 2D socially-aware robot navigation laboratory.

Trains and evaluates a hybrid (discrete interaction code + continuous
velocity) soft actor-critic policy against an interactive RVO pedestrian,
with a bidirectional text dialogue protocol and a live human-in-the-loop
session mode.
"""

__version__ = "0.1.0"
