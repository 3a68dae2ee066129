"""Fault-tolerance toolkit for majority-vote cellular automata on regular tessellations."""

__version__ = "0.1.0"
