"""Simulation-based stochastic approximation for Markov models."""
