"""Resource budgets read at call time, so the CLI flags reach nested calls."""

from dataclasses import dataclass


@dataclass
class Limits:
    vertices: int = 1_000_000  # cover and hierarchy states
    ball: int = 200_000  # developed universal-cover vertices
    group: int = 200_000  # permutation group elements
    orbit: int = 100_000  # RAAG cyclic-permutation orbits


limits = Limits()


def pick(value, field):
    return getattr(limits, field) if value is None else value
