"""Nonsmooth optimization on tame (o-minimal) objectives."""

__version__ = "0.1.0"
