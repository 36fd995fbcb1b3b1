"""Special-function kernel: Gauss hypergeometric 2F1 on the negative real
axis, the omega shorthand used throughout the coverage formulas, rising
factorials, and complete Bell polynomials.

The 2F1 evaluator is deliberately narrow.  Every call site in this package
has a positive first parameter, c - b = 1, c > 0 and argument z <= 0, where
the Pfaff transformation z -> z/(z-1) maps onto [0, 1) and the transformed
series has all-positive terms (no cancellation).  Out-of-region calls raise
instead of silently degrading.
"""

import math

# Relative truncation threshold for the transformed power series and the
# hard cap that converts silent divergence into an explicit error.
SERIES_RTOL = 1e-15
SERIES_MAX_TERMS = 10_000


class SeriesConvergenceError(ArithmeticError):
    """Series did not converge within the iteration cap (parameters outside
    the supported region)."""


def hyp2f1(a: float, b: float, c: float, z: float) -> float:
    """Evaluate 2F1(a, b; c; z) for z <= 0.

    Uses the Pfaff transformation

        2F1(a, b; c; z) = (1 - z)^(-a) * 2F1(a, c - b; c; z / (z - 1))

    so the series argument w = z/(z-1) lies in [0, 1) for every z <= 0.
    Truncates when the running term falls below SERIES_RTOL of the partial
    sum.
    """
    if math.isnan(a) or math.isnan(b) or math.isnan(c) or math.isnan(z):
        raise ValueError("hyp2f1: nan parameter")
    if c <= 0 and c == math.floor(c):
        raise ValueError(f"hyp2f1: c={c} is zero or a negative integer")
    if z > 0:
        raise ValueError(f"hyp2f1: argument z={z} outside supported region z <= 0")
    if z == 0.0:
        return 1.0

    w = z / (z - 1.0)
    b2 = c - b
    term = 1.0
    total = 1.0
    for k in range(SERIES_MAX_TERMS):
        term *= (a + k) * (b2 + k) / ((c + k) * (k + 1.0)) * w
        total += term
        if abs(term) <= SERIES_RTOL * abs(total):
            return (1.0 - z) ** (-a) * total
    raise SeriesConvergenceError(
        f"hyp2f1({a}, {b}, {c}, {z}): no convergence after {SERIES_MAX_TERMS} terms"
    )


def omega(x: float, y: float, z: float) -> float:
    """The shorthand omega(x, y, z) = 2F1(x, -2/y; 1 - 2/y; -z).

    Requires y > 2 (the far-field pathloss exponent condition), z >= 0 and
    x >= 1.  The result is >= 1 with equality iff z = 0.
    """
    if y <= 2:
        raise ValueError(f"omega: y={y} must exceed 2")
    if z < 0:
        raise ValueError(f"omega: z={z} must be nonnegative")
    if x < 1:
        raise ValueError(f"omega: x={x} must be >= 1")
    return hyp2f1(x, -2.0 / y, 1.0 - 2.0 / y, -z)


def rising_factorial(x: float, m: int) -> float:
    """x (x+1) ... (x+m-1); equals 1 for m = 0."""
    if m < 0:
        raise ValueError(f"rising_factorial: m={m} must be nonnegative")
    out = 1.0
    for i in range(m):
        out *= x + i
    return out


def complete_bell(derivs, k: int) -> float:
    """Complete Bell polynomial B_k(x_1, ..., x_k).

    ``derivs[m-1]`` holds x_m.  Uses the recurrence

        B_{n+1} = sum_{j=0}^{n} C(n, j) B_{n-j} x_{j+1},   B_0 = 1,

    which is O(k^2) as opposed to enumerating partitions.
    """
    if k < 0:
        raise ValueError(f"complete_bell: k={k} must be nonnegative")
    if len(derivs) < k:
        raise ValueError(f"complete_bell: need at least {k} arguments, got {len(derivs)}")
    bell = [1.0]
    for n in range(k):
        acc = 0.0
        for j in range(n + 1):
            acc += math.comb(n, j) * bell[n - j] * derivs[j]
        bell.append(acc)
    return bell[k]
