"""Fully discrete P1 / backward-Euler solver for diffusant uptake into rubber
with a moving interface."""

__version__ = "0.1.0"
