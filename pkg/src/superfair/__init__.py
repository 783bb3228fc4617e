"""Decide and simulate the behaviour of finite-state betting strategies on
normal sequences."""

__version__ = "0.1.0"
