"""Rank-1 convex hulls with linear side constraints and their application to
LP/MILP relaxations and restrictions of the generalized pooling problem."""

__version__ = "0.1.0"
