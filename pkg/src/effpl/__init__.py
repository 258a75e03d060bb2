"""Prolog with algebraic effect handlers: engine, elaborator and optimizer."""

__version__ = "0.1.0"
