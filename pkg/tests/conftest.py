"""Shared helpers for the test suite.

Random sampling is always driven by an explicit ``numpy`` generator with a
fixed seed, so every test is reproducible run to run.
"""

from __future__ import annotations

import numpy as np
import pytest

from tdmech.expr import Binary, Const, Node, Unary, Var, expression


def sample_cube(rng: np.random.Generator, count: int, dim: int, low=-1.0, high=1.0) -> np.ndarray:
    return rng.uniform(low, high, size=(count, dim))


def random_smooth_tree(rng: np.random.Generator, names: list[str], depth: int) -> Node:
    """A random expression tree that is smooth and defined on all of R^k.

    Compositions that could leave a domain (log, sqrt, division) are guarded
    with strictly positive arguments, and exp/tan arguments are compressed
    through sin so values stay bounded at any sample point.
    """
    if depth <= 0:
        if rng.random() < 0.6:
            return Var(str(rng.choice(names)))
        return Const(round(float(rng.uniform(0.1, 2.0)), 3))
    pick = rng.integers(0, 10)
    sub = lambda: random_smooth_tree(rng, names, depth - 1)  # noqa: E731
    if pick == 0:
        return Binary("+", sub(), sub())
    if pick == 1:
        return Binary("-", sub(), sub())
    if pick == 2:
        return Binary("*", sub(), sub())
    if pick == 3:
        return Unary("sin", sub())
    if pick == 4:
        return Unary("cos", sub())
    if pick == 5:
        return Unary("exp", Binary("*", Const(0.4), Unary("sin", sub())))
    if pick == 6:
        return Unary("sqrt", Binary("+", Const(1.2), Binary("^", sub(), Const(2.0))))
    if pick == 7:
        return Unary("log", Binary("+", Const(1.5), Binary("^", sub(), Const(2.0))))
    if pick == 8:
        return Binary("/", sub(), Binary("+", Const(1.5), Binary("^", sub(), Const(2.0))))
    return Binary("^", sub(), Const(float(rng.integers(2, 4))))


def random_smooth_expression(rng: np.random.Generator, names: list[str], depth: int = 3):
    return expression(random_smooth_tree(rng, names, depth))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260823)
