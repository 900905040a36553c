from fractions import Fraction

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from mtype_lab.scalars import QuadRational
from mtype_lab.stepfn import IntervalPartition, StepFunction

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

small_fractions = st.fractions(min_value=-8, max_value=8, max_denominator=12)
quads = st.builds(QuadRational, small_fractions, small_fractions)
nonzero_quads = quads.filter(lambda x: bool(x))


@st.composite
def partitions(draw, max_cells=5):
    inner = draw(st.sets(st.fractions(min_value=0, max_value=1, max_denominator=16), max_size=max_cells - 1))
    pts = sorted({Fraction(0), Fraction(1)} | set(inner))
    return IntervalPartition(pts)


@st.composite
def step_functions(draw, dim=None, max_cells=5):
    d = dim if dim is not None else draw(st.integers(1, 3))
    P = draw(partitions(max_cells))
    vals = [tuple(draw(quads) for _ in range(d)) for _ in range(P.cell_count)]
    return StepFunction(P, vals, d)


@pytest.fixture
def rng():
    return np.random.default_rng(20240517)
