"""Annealing benchmarks on perturbed Hamming-weight oracle (PHWO) problems."""

__version__ = "0.1.0"
