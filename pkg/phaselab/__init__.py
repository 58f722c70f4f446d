"""
phaselab: numerical laboratory for material-phase causality.

Evolves wavefunctions, extracts and independently evolves the Madelung
amplitude/action fields, simulates phase-sensitive dressed two-level
dynamics, and measures phase-to-fringe shifts in matter-wave interference.
"""

__version__ = "0.3.0"
