"""Shared fixtures and helpers for the test suite."""

import pytest

from regbel import (
    bundled_theory, eval_belief, parse_action_sequence, parse_formula,
    regress_belief,
)


@pytest.fixture(scope="session")
def discrete():
    return bundled_theory("wall-discrete")


@pytest.fixture(scope="session")
def continuous():
    return bundled_theory("wall-continuous")


def belief(theory, query: str, after: str = "", tol: float = 1e-6):
    """Parse, regress and evaluate a belief query; returns an EvalResult."""
    phi = parse_formula(query, fluents=theory.fluent_names)
    situation = parse_action_sequence(after)
    expr, _ = regress_belief(theory, phi, situation)
    return eval_belief(theory, expr, tol=tol)


def regressed(theory, query: str, after: str = ""):
    phi = parse_formula(query, fluents=theory.fluent_names)
    situation = parse_action_sequence(after)
    return regress_belief(theory, phi, situation)
