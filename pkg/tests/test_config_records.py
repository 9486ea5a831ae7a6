import io
import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ddeperiodic.config import load_config
from ddeperiodic.degree import degree
from ddeperiodic.errors import ConfigError
from ddeperiodic.expr import compile_vector
from ddeperiodic.records import dumps, read_records, write_records

CUBIC = """\
[system]
name = cubic
manifold = euclidean(1)
g = x1*(1 - x1^2)
f = cos(2*pi*t) - y1/2
period = 1
delay = 0.3

[region]
lo = -2
hi = 2

[window0]
center = 0
radius = 0.5
"""


def test_expression_vector():
    fn = compile_vector("x1*y2, sin(t) + x2^2", 2, delayed=True)
    assert np.allclose(fn(0.5, [2.0, 3.0], [0.0, 4.0]), [8.0, np.sin(0.5) + 9.0])


@pytest.mark.parametrize("text", ["__import__('os')", "x1.real", "lambda: 1", "[x1]", "sin(x1, x1)", "x1 if x1 else 0"])
def test_expression_rejects_unsafe(text):
    with pytest.raises(ConfigError):
        compile_vector(text, 1)


def test_load_config_cubic():
    s = load_config(CUBIC)
    assert s.name == "cubic" and s.period == 1.0 and abs(s.delay - 0.3) < 1e-15
    assert degree(s.M, s.g, s.region) == -1
    assert len(s.windows) == 1


def test_sphere_config_is_tangent():
    s = load_config("[system]\nmanifold = sphere(3)\ng = 0, 0, 1\n")
    p = s.M.project(np.array([0.3, 0.1, 0.5]))
    assert abs(p @ s.g(p)) < 1e-12
    assert degree(s.M, s.g, s.region) == 2


@pytest.mark.parametrize("text, line, fragment", [
    ("[system]\ng = x1\nbogus = 1\n", 3, "unknown key"),
    ("[system]\ng = x1\n[nonsense]\na = 1\n", 3, "unknown section"),
    ("[system]\ng = z\n", 2, "unknown variable"),
    ("[system]\nmanifold = blob\ng = x1\n", 2, "manifold"),
    ("[system]\nmanifold = euclidean(2)\ng = x1\n", 3, "components"),
    ("[system]\ng = x1\nperiod = -1\n", 3, "positive"),
    ("[system]\ng = x1\n[region]\nlo = 1 2\n", 4, "expected 1 numbers"),
])
def test_config_errors_carry_line(text, line, fragment):
    with pytest.raises(ConfigError) as info:
        load_config(text)
    assert info.value.line == line and fragment in str(info.value)
    assert str(info.value).startswith(f"line {line}:")


def test_missing_g():
    with pytest.raises(ConfigError):
        load_config("[system]\nperiod = 1\n")


@given(st.lists(st.floats(allow_nan=False, allow_infinity=False), min_size=1, max_size=5))
def test_records_round_trip_exactly(xs):
    line = dumps({"t": xs[0], "x": xs, "sign": -1})
    back = json.loads(line)
    assert back["t"] == xs[0] and back["x"] == xs and back["sign"] == -1


def test_write_read_records():
    buf = io.StringIO()
    write_records([{"a": 1.5}, {"a": np.float64(2.0), "b": np.array([1.0, 2.0])}], buf)
    buf.seek(0)
    assert read_records(buf) == [{"a": 1.5}, {"a": 2.0, "b": [1.0, 2.0]}]
    assert "1.50000000000000000e+00" in buf.getvalue()
