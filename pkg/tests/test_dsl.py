from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings

from sympq.actions import builtin
from sympq.dsl import ParseError, format_form, parse_form
from sympq.forms import DifferentialForm, exterior_derivative, wedge
from sympq.poly import Poly

from strategies import rand_form, seeds


def test_basic_expressions():
    f = parse_form("x1*dy1 - y1*dx1", n=1)
    assert f.degree == 1
    assert exterior_derivative(f) == wedge(DifferentialForm.dx(2, 0), DifferentialForm.dx(2, 1)).scale(2)
    assert parse_form("dx1 /\\ dx1", n=1) == DifferentialForm.zero(2, 2)
    assert parse_form("(x1^2 + y1^2)/2", n=1).coefficient(()) == (Poly.var(2, 0) ** 2 + Poly.var(2, 1) ** 2).scale(Fraction(1, 2))


def test_derivative_and_contraction():
    assert parse_form("d(x1*y1)", n=1) == parse_form("y1*dx1 + x1*dy1", n=1)
    assert parse_form("i(E; dx1 /\\ dy1)", n=1) == parse_form("x1*dy1 - y1*dx1", n=1)
    assert parse_form("i(ddy1; dx1 /\\ dy1)", n=1) == -parse_form("dx1", n=1)
    assert parse_form("i([1, 0]; dx1)", n=1) == parse_form("1", n=1)


def test_xi_needs_action():
    a = builtin("cp1")
    f = parse_form("i(xi1; dx1 /\\ dy1)", action=a)
    assert f.degree == 1
    with pytest.raises(ParseError):
        parse_form("i(xi1; dx1)", n=2)


def test_angles():
    f = parse_form("dth1 /\\ dx1", angles=1, n=1)
    assert f.dim == 3 and f.degree == 2
    assert format_form(f, angles=1) == "dth1 /\\ dx1"


def test_inferred_dimension():
    assert parse_form("x3").dim == 6


@pytest.mark.parametrize(
    "text, line, column",
    [
        ("x1 +", 1, 5),
        ("dx1 * dy1", 1, 5),
        ("x1 + dx1", 1, 4),
        ("(x1\n  + (y1", 2, 8),
        ("x1 $ y1", 1, 4),
        ("x9", 1, 1),
        ("dx1^2", 1, 4),
        ("x1 / y1", 1, 4),
        ("x1 / 0", 1, 4),
        ("i(E; x1)", 1, 1),
    ],
)
def test_errors_report_position(text, line, column):
    with pytest.raises(ParseError) as info:
        parse_form(text, n=2)
    assert (info.value.line, info.value.column) == (line, column)
    assert f"line {line}, column {column}" in str(info.value)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_round_trip(seed):
    rng = random.Random(seed)
    f = rand_form(rng, 4)
    assert parse_form(format_form(f), n=2) == f


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_parsed_wedge_matches_library(seed):
    rng = random.Random(seed)
    a, b = rand_form(rng, 4, 1), rand_form(rng, 4, 2)
    text = f"({format_form(a)}) /\\ ({format_form(b)})"
    assert parse_form(text, n=2) == wedge(a, b)
