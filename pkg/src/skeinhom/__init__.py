"""Hom complexes for crossingless tangles in seamed surfaces.

The layers, bottom up: planar diagrams, their Frobenius-algebra evaluation,
exact integer homological algebra, bar complexes and bottom projectors,
assembled surface hom complexes, and a Temperley-Lieb / spin-network layer
that predicts decategorified answers for cross-checking.
"""

__version__ = "0.1.0"
