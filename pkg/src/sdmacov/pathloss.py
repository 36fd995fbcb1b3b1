"""Multi-slope distance pathloss.

The model is a piecewise power law

    l(d) = K_n d^(-alpha_n)   for  R_n <= d < R_{n+1},

with R_0 = 0, R_N = infinity, K_0 = 1 and the remaining constants derived
from continuity at the breakpoints: K_n = prod_{i<=n} R_i^(alpha_i - alpha_{i-1}).
"""

from dataclasses import dataclass

import numpy as np


class NonMonotoneExponentsError(ValueError):
    """Pathloss exponents must be non-decreasing with distance."""


class FinalExponentError(ValueError):
    """The far-field exponent must exceed 2 for finite interference."""


class BreakpointOrderError(ValueError):
    """Breakpoints must be positive and strictly increasing."""


@dataclass(frozen=True)
class PathlossModel:
    exponents: tuple      # alpha_0 .. alpha_{N-1}
    breakpoints: tuple    # R_1 .. R_{N-1}, meters
    constants: tuple      # K_0 .. K_{N-1}, derived

    @property
    def n_slopes(self) -> int:
        return len(self.exponents)

    @property
    def is_single_slope(self) -> bool:
        return len(self.breakpoints) == 0

    @property
    def final_exponent(self) -> float:
        return self.exponents[-1]

    @property
    def final_constant(self) -> float:
        return self.constants[-1]

    @property
    def last_breakpoint(self) -> float:
        """R_{N-1}; zero for the single-slope model."""
        return self.breakpoints[-1] if self.breakpoints else 0.0

    def as_arrays(self):
        """(exponents, constants, breakpoints) as float64 arrays for kernels."""
        return (
            np.asarray(self.exponents, dtype=np.float64),
            np.asarray(self.constants, dtype=np.float64),
            np.asarray(self.breakpoints, dtype=np.float64),
        )


def make_pathloss(exponents, breakpoints=()) -> PathlossModel:
    """Build a validated model with derived continuity constants."""
    exponents = tuple(float(a) for a in exponents)
    breakpoints = tuple(float(r) for r in breakpoints)
    if not exponents:
        raise ValueError("at least one pathloss exponent is required")
    if len(breakpoints) != len(exponents) - 1:
        raise ValueError(
            f"{len(exponents)} exponents require {len(exponents) - 1} breakpoints, "
            f"got {len(breakpoints)}"
        )
    for lo, hi in zip(exponents, exponents[1:]):
        if hi < lo:
            raise NonMonotoneExponentsError(f"exponents must be non-decreasing, got {exponents}")
    if exponents[-1] <= 2:
        raise FinalExponentError(f"final exponent {exponents[-1]} must exceed 2")
    prev = 0.0
    for r in breakpoints:
        if r <= prev:
            raise BreakpointOrderError(
                f"breakpoints must be positive and strictly increasing, got {breakpoints}"
            )
        prev = r

    constants = [1.0]
    for i, r in enumerate(breakpoints, start=1):
        constants.append(constants[-1] * r ** (exponents[i] - exponents[i - 1]))
    return PathlossModel(exponents, breakpoints, tuple(constants))


def loss_at(model: PathlossModel, d: float) -> float:
    """l(d) for d > 0; segment membership follows R_n <= d < R_{n+1}."""
    if d <= 0:
        raise ValueError(f"distance must be positive, got {d}")
    n = 0
    for r in model.breakpoints:
        if d < r:
            break
        n += 1
    return model.constants[n] * d ** (-model.exponents[n])
