"""Shared fixtures: small analytic problems with known optima."""

import numpy as np
import pytest

from onlp.model import NlpProblem, QuadraticForm


@pytest.fixture
def toy_problem():
    """min x1^2 + x2^2  s.t.  x1 + x2 = 1,  x1^2 <= 1,  -10 <= x <= 10.

    Optimum (0.5, 0.5) with f* = 0.5; the inequality is inactive there.
    """
    return NlpProblem(
        objective=QuadraticForm(np.diag([2.0, 2.0]), np.zeros(2)),
        eq_matrix=[[1.0, 1.0]],
        eq_rhs=[1.0],
        ineqs=(QuadraticForm(np.diag([2.0, 0.0]), np.zeros(2)),),
        ineq_rhs=[1.0],
        lower=np.full(2, -10.0),
        upper=np.full(2, 10.0),
    )


@pytest.fixture
def equality_only_problem():
    """min y1^2 + y2^2  s.t.  y1 + y2 = 1, unbounded box."""
    return NlpProblem(
        objective=QuadraticForm(np.diag([2.0, 2.0]), np.zeros(2)),
        eq_matrix=[[1.0, 1.0]],
        eq_rhs=[1.0],
        ineqs=(),
        ineq_rhs=[],
        lower=np.full(2, -np.inf),
        upper=np.full(2, np.inf),
    )
