"""Exact-arithmetic construction and verification of factorized rational
R-operators for sl(2) and sl(3) on truncated polynomial modules."""

__version__ = "0.1.0"
