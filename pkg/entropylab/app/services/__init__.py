"""Computational services: spaces, entropy numbers, trees, summation operators, asymptotics."""
