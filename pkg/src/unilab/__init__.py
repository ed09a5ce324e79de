"""Geometric functionals and universality experiments for randomized dimension reduction."""
