"""Shared fixtures: the expensive eps-ladder sweeps are computed once per
session and reused by the per-module and acceptance tests."""

import math

import pytest

from ballblowup.asympt import records_from_sweep
from ballblowup.greenfn import BallDomain, RadialCoefficient
from ballblowup.solver import ProblemConfig, sweep

CRITICAL_A = -math.pi**2 / 4.0
EPS_LADDER = [0.04, 0.02, 0.01, 0.005]


def const(c):
    return RadialCoefficient.constant_coeff(c)


def make_config(eps, V_const=-1.0, a_const=CRITICAL_A, R=1.0):
    return ProblemConfig(
        domain=BallDomain(R),
        a=const(a_const),
        V=const(V_const),
        eps=eps,
    )


@pytest.fixture(scope="session")
def canonical_solutions():
    """Ground states for V = -1, critical a, over the standard eps ladder."""
    return sweep(make_config(EPS_LADDER[0]), EPS_LADDER)


@pytest.fixture(scope="session")
def canonical_records(canonical_solutions):
    return records_from_sweep(canonical_solutions, const(CRITICAL_A), 1.0)


@pytest.fixture(scope="session")
def v2_records():
    """Records for V = -2, used to check linearity of the rate in Q_V."""
    sols = sweep(make_config(EPS_LADDER[0], V_const=-2.0), EPS_LADDER)
    return records_from_sweep(sols, const(CRITICAL_A), 1.0)
