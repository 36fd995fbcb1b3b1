import numpy as np
import pytest

from sdmacov.pathloss import (
    BreakpointOrderError,
    FinalExponentError,
    NonMonotoneExponentsError,
    loss_at,
    make_pathloss,
)


def test_single_slope_constants():
    m = make_pathloss([4.0])
    assert m.constants == (1.0,)
    assert m.is_single_slope
    assert m.last_breakpoint == 0.0


def test_dual_slope_constant():
    m = make_pathloss([2.5, 4.0], [10.0])
    assert m.constants[0] == 1.0
    assert m.constants[1] == pytest.approx(10.0 ** 1.5, rel=1e-15)


def test_three_slope_constants():
    m = make_pathloss([2.0, 3.0, 4.5], [5.0, 80.0])
    assert m.constants[1] == pytest.approx(5.0 ** 1.0)
    assert m.constants[2] == pytest.approx(5.0 ** 1.0 * 80.0 ** 1.5)


def test_construction_errors_are_distinct():
    with pytest.raises(NonMonotoneExponentsError):
        make_pathloss([4.0, 3.0], [10.0])
    with pytest.raises(FinalExponentError):
        make_pathloss([1.5, 2.0], [10.0])
    with pytest.raises(BreakpointOrderError):
        make_pathloss([2.0, 3.0, 4.0], [50.0, 10.0])
    with pytest.raises(BreakpointOrderError):
        make_pathloss([2.0, 4.0], [-1.0])
    with pytest.raises(ValueError):
        make_pathloss([2.5, 4.0], [])


def test_loss_values():
    sspm = make_pathloss([4.0])
    assert loss_at(sspm, 2.0) == 0.0625

    dspm = make_pathloss([2.5, 4.0], [10.0])
    # continuity at the breakpoint: both segments give 10^-2.5
    assert loss_at(dspm, 10.0) == pytest.approx(10.0 ** -2.5, rel=1e-15)
    # beyond the breakpoint; cross-checked by anchoring at the breakpoint:
    # l(20) = l(10) * (10/20)^4
    assert loss_at(dspm, 20.0) == pytest.approx(1.9764235376052372e-04, rel=1e-12)
    assert loss_at(dspm, 20.0) == pytest.approx(10.0 ** -2.5 * 0.5 ** 4, rel=1e-12)


def test_loss_rejects_nonpositive_distance():
    m = make_pathloss([4.0])
    for d in (0.0, -1.0):
        with pytest.raises(ValueError):
            loss_at(m, d)


def test_continuity_at_every_breakpoint():
    m = make_pathloss([1.5, 2.5, 3.0, 4.5], [2.0, 30.0, 200.0])
    for r in m.breakpoints:
        below = loss_at(m, r * (1 - 1e-13))
        at = loss_at(m, r)
        assert at == pytest.approx(below, rel=1e-12)


def test_strictly_decreasing():
    rng = np.random.default_rng(7)
    m = make_pathloss([2.0, 2.5, 4.0], [3.0, 60.0])
    d = np.sort(rng.uniform(1e-3, 1e4, size=200))
    vals = [loss_at(m, x) for x in d]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_single_slope_is_plain_power_law():
    m = make_pathloss([3.7])
    rng = np.random.default_rng(11)
    for d in rng.uniform(0.01, 1e4, size=50):
        assert loss_at(m, d) == d ** -3.7
