import numpy as np
import pytest

from halognn._utils.math import (
    distribute_integers,
    equitable_split,
    prioritize,
    relative_deviation,
    split_offsets,
)
from halognn._utils.text import align, format_cell, render_table


@pytest.mark.parametrize(
    "total, parts, expected",
    [
        (4, 2, (2, 2)),
        (5, 2, (3, 2)),
        (7, 3, (3, 2, 2)),
        (2, 4, (1, 1, 0, 0)),
        (0, 3, (0, 0, 0)),
    ],
)
def test_equitable_split(total, parts, expected):
    assert equitable_split(total, parts) == expected
    assert sum(expected) == total


def test_equitable_split_rejects_no_parts():
    with pytest.raises(ValueError):
        equitable_split(4, 0)


def test_split_offsets():
    assert split_offsets(7, 3) == (0, 3, 5, 7)


def test_distribute_integers_preserves_total():
    allocations = [1.4, 2.3, 3.3]
    assert sum(distribute_integers(allocations)) == 7
    # the largest rounding loss gets the missing integer
    assert distribute_integers(allocations) == (2, 2, 3)


def test_prioritize():
    assert prioritize(None, 2, 3, default=0) == 2
    assert prioritize(None, None, default=0) == 0
    # falsy but not None
    assert prioritize(0, 1, default=5) == 0


def test_relative_deviation():
    assert relative_deviation(np.array([1.0, 2.0]), np.array([1.0, 2.0])) == 0.0
    assert relative_deviation(np.array([1.0, 2.5]), np.array([1.0, 2.0])) == pytest.approx(0.25)
    # zero reference: absolute deviation
    assert relative_deviation(np.array([0.5]), np.array([0.0])) == 0.5
    assert relative_deviation(np.array([]), np.array([])) == 0.0


def test_align():
    assert align(["  a", "bbb "], "left") == ["a  ", "bbb"]
    assert align(["  a", "bbb "], "right") == ["  a", "bbb"]
    assert align(["a", "bbb"], "center") == [" a ", "bbb"]


def test_format_cell():
    assert format_cell(3) == "3"
    assert format_cell(0.5) == "0.5"
    assert format_cell(0.0) == "0"
    assert format_cell(1e-13) == "1.0000e-13"
    assert format_cell("na2a") == "na2a"


def test_render_table():
    table = render_table(("ranks", "mode"), [(1, "none"), (16, "na2a")])
    assert table.splitlines() == [
        "ranks  mode",
        "-----------",
        "    1  none",
        "   16  na2a",
    ]


def test_render_table_without_rows():
    assert render_table(("a", "bb"), []).splitlines() == ["a  bb", "-----"]
