"""Exact combinatorics of equivariant sheaves on smooth complete toric
surfaces: fan validation, Chern and Hilbert invariants, stability tests,
GIT weight systems, and torus-fixed-point enumeration."""

__version__ = "0.1.0"
