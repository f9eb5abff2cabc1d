"""
Seeded sampling of exact-rational points in the open simplex.

Stream splitting: the draw for sweep cell (m, d) and sample index s comes from
``numpy.random.Generator(PCG64(SeedSequence(seed, spawn_key=(m, d, s))))``, so
each cell owns an independent stream and no result depends on the order or
the process in which cells are evaluated.
"""
from enum import Enum
from fractions import Fraction
from typing import Sequence

import numpy as np

from gpi_multinomial.exceptions import InvalidInputException
from gpi_multinomial.multinomial import ProbVector

MAX_SEED = 2**64 - 1


class Sampler(str, Enum):
    DIRICHLET_RAMP = "dirichlet-ramp"
    UNIFORM = "uniform"
    FIXED = "fixed"


def cell_generator(seed: int, m: int, d: int, sample: int) -> np.random.Generator:
    if not 0 <= seed <= MAX_SEED:
        raise InvalidInputException(f"seed must be a 64-bit unsigned integer, got {seed}")
    sequence = np.random.SeedSequence(entropy=seed, spawn_key=(m, d, sample))
    return np.random.Generator(np.random.PCG64(sequence))


def rationalize(values: Sequence[float], grid: int) -> tuple[Fraction, ...]:
    """
    Snap floats to the nearest multiple of 1/grid.

    >>> rationalize((0.5, 0.25), 100)
    (Fraction(1, 2), Fraction(1, 4))
    """
    return tuple(Fraction(round(value * grid), grid) for value in values)


def _repair_weights(weights: list[int], grid: int) -> list[int]:
    # Every part at least 1 and the parts summing to grid; the largest part
    # (lowest index on ties) absorbs the difference one unit at a time
    weights = [max(weight, 1) for weight in weights]
    while (excess := sum(weights) - grid) != 0:
        if excess > 0:
            candidates = [i for i, weight in enumerate(weights) if weight > 1]
            step = -1
        else:
            candidates = list(range(len(weights)))
            step = 1
        largest = max(candidates, key=lambda i: (weights[i], -i))
        weights[largest] += step
    return weights


def sample_simplex(
    d: int, sampler: Sampler | str, grid: int, rng: np.random.Generator
) -> ProbVector:
    """
    Draw an interior point with every p_i >= 1/grid and remainder >= 1/grid.

    ``UNIFORM`` picks a uniform composition of grid into d + 1 positive parts;
    ``DIRICHLET_RAMP`` draws Dirichlet(1, 2, ..., d + 1) in floating point and
    snaps it to the grid.
    """
    sampler = Sampler(sampler)
    if d < 1:
        raise InvalidInputException(f"d must be >= 1, got {d}")
    if grid < d + 1:
        raise InvalidInputException(f"grid {grid} is too coarse for d={d}")

    if sampler is Sampler.UNIFORM:
        cuts = sorted(
            int(cut) for cut in rng.choice(np.arange(1, grid), size=d, replace=False)
        )
        bounds = [0, *cuts, grid]
        weights = [upper - lower for lower, upper in zip(bounds, bounds[1:])]
    elif sampler is Sampler.DIRICHLET_RAMP:
        draw = rng.dirichlet(np.arange(1, d + 2, dtype=float))
        weights = _repair_weights([int(round(x * grid)) for x in draw], grid)
    else:
        raise InvalidInputException(
            "the fixed sampler reads the configured point list, it does not draw"
        )

    return ProbVector(tuple(Fraction(weight, grid) for weight in weights[:d]))
