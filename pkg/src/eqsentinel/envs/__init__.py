"""Desk-scale stochastic testbeds: grid soccer and predator-prey."""

from . import prey, soccer

__all__ = ["soccer", "prey"]
