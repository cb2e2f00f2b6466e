"""Exception types raised by the verification library."""

from __future__ import annotations


class ChenIndexError(ValueError):
    """Base class for every error the library raises on bad input."""


class WordError(ChenIndexError):
    pass


class DegreeCapMismatch(ChenIndexError):
    pass


class ConstantTermError(ChenIndexError):
    pass


class DimensionError(ChenIndexError):
    pass


class SkewnessError(ChenIndexError):
    pass


class ConvergenceError(ChenIndexError):
    pass


class CurvatureSpecError(ChenIndexError):
    pass


class SymmetryError(ChenIndexError):
    pass
