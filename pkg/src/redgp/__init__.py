"""Evolve redundant features with multi-tree genetic programming."""
