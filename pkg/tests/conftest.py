import math

import numpy as np
import pytest

from cygshell import arith, gapwidth


@pytest.fixture(scope="session")
def r2_10k():
    return arith.build_r2(10_000)


@pytest.fixture(scope="session")
def r2_200k():
    return arith.build_r2(200_000)


@pytest.fixture(scope="session")
def inv_log():
    return gapwidth.make_slowly_varying("inv_log")


@pytest.fixture(scope="session")
def constant_gap():
    """A test-only constant gap width (value 1/4, zero derivatives)."""
    return gapwidth.GapWidth(
        name="const_quarter",
        _value=lambda x: np.full_like(np.asarray(x, dtype=float), 0.25),
        _d1=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        _d2=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
    )


@pytest.fixture(scope="session")
def zero_gap():
    """Degenerate omega == 0, only for cancellation identities."""
    return gapwidth.GapWidth(
        name="zero",
        _value=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        _d1=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        _d2=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
    )


def r2_direct_enumeration(m: int) -> int:
    """Independent oracle: count representations of m by direct trial."""
    count = 0
    r = math.isqrt(m)
    for a in range(-r, r + 1):
        rem = m - a * a
        if rem < 0:
            continue
        s = math.isqrt(rem)
        if s * s == rem:
            count += 1 if s == 0 else 2
    return count
