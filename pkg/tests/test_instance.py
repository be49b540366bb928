import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import make_instance
from mavrp.instance import (
    U,
    InstanceError,
    InstanceFormatError,
    distance,
    format_instance,
    generate,
    instance_name,
    parse_instance,
    parse_name,
    read_instance,
    write_instance,
)

coord = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False)
point = st.tuples(coord, coord)


def test_distance_examples():
    assert distance((0, 0), (0, 0)) == 0
    assert distance((0, 0), (3, 4)) == 5
    assert distance((1, 1), (4, 5)) == 5


@given(point, point, point)
def test_distance_is_a_metric(a, b, c):
    assert distance(a, b) >= 0
    assert distance(a, b) == distance(b, a)
    assert distance(a, a) == 0
    assert distance(a, c) <= distance(a, b) + distance(b, c) + 1e-9


def test_generate_named_example():
    inst = generate("R", 2, 2, 5, 7, (1, 3), seed=42)
    assert inst.name == "R_2_2_5_7"
    assert (inst.d, inst.a, inst.m, inst.n) == (2, 2, 5, 7)
    assert inst.capacity == 6 and inst.t_max == 10 and inst.map_side == 30.0


def test_generate_minimal():
    inst = generate("R", 1, 1, 1, 0, (1, 1), seed=5)
    assert inst.num_customers == 1
    assert inst.linehauls[0].demand == 1
    assert inst.linehauls[0].home_depot == 1


def test_generate_is_deterministic():
    a = format_instance(generate("R", 2, 3, 4, 5, seed=9))
    b = format_instance(generate("R", 2, 3, 4, 5, seed=9))
    assert a == b
    assert a != format_instance(generate("R", 2, 3, 4, 5, seed=10))


@pytest.mark.parametrize("args", [(1, 0, 1, 1), (1, 1, 0, 0), (0, 1, 1, 1)])
def test_generate_rejects_degenerate_counts(args):
    with pytest.raises(ValueError):
        generate("R", *args)


@settings(max_examples=60, deadline=None)
@given(
    st.integers(1, 3),
    st.integers(1, 3),
    st.integers(0, 8),
    st.integers(0, 8),
    st.integers(0, 2**31),
)
def test_generated_instances_hold_invariants(d, a, m, n, seed):
    if m + n == 0:
        m = 1
    inst = generate("R", d, a, m, n, (1, 3), seed)
    ids = [x.id for x in inst.depots] + [c.id for c in inst.linehauls + inst.backhauls] + [v.id for v in inst.vehicles]
    assert ids == list(range(1, d + m + n + a + 1))
    for c in inst.linehauls:
        assert 1 <= c.demand <= 3 and c.home_depot in inst.depot_ids
    for c in inst.backhauls:
        assert -3 <= c.demand <= -1 and c.home_depot is None
    for pos in inst.positions.values():
        assert 0 <= pos[0] <= 30 and 0 <= pos[1] <= 30
    assert parse_name(inst.name) == ("R", d, a, m, n)


@given(st.integers(1, 9), st.integers(1, 9), st.integers(0, 99), st.integers(0, 99))
def test_name_round_trip(d, a, m, n):
    assert parse_name(instance_name("R", d, a, m, n)) == ("R", d, a, m, n)


def test_dummy_terminal_costs_nothing():
    inst = generate("R", 2, 2, 3, 3, seed=1)
    for node in range(inst.num_nodes + 1):
        assert inst.dist[node][U] == 0.0


def test_nearest_depot_and_home():
    inst = make_instance([(0, 0), (10, 0)], [(5, 5)], linehauls=[(9, 0, 1, 0)], backhauls=[(1, 0, -1)])
    assert inst.nearest_depot[4] == 1  # backhaul at (1, 0)
    assert inst.nearest_depot[3] == 2  # linehaul at (9, 0)
    assert inst.home[3] == 1


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_text_round_trip(seed):
    inst = generate("R", 2, 2, 3, 4, seed=seed)
    text = format_instance(inst)
    back = parse_instance(text)
    assert back == inst
    assert format_instance(back) == text


def test_file_round_trip(tmp_path):
    inst = generate("R", 2, 2, 5, 7, seed=42)
    path = tmp_path / "inst.txt"
    write_instance(inst, path)
    assert read_instance(path) == inst


def _text():
    return format_instance(generate("R", 1, 1, 1, 1, seed=0))


def test_negative_linehaul_demand_names_customer():
    text = _text().replace("27.382667318331652 2 1", "27.382667318331652 -2 1")
    with pytest.raises(InstanceFormatError, match="linehaul 2"):
        parse_instance(text)


def test_missing_home_depot_is_an_error():
    text = _text().replace("27.382667318331652 2 1", "27.382667318331652 2 -")
    with pytest.raises(InstanceFormatError, match="home_depot"):
        parse_instance(text)
    text = _text().replace("27.382667318331652 2 1", "27.382667318331652 2")
    with pytest.raises(InstanceFormatError, match="line"):
        parse_instance(text)


def test_duplicated_id_reports_line():
    text = _text().replace("[vehicles]\n4 ", "[vehicles]\n1 ")
    with pytest.raises(InstanceFormatError, match=r"line \d+: duplicated id 1"):
        parse_instance(text)


def test_demand_above_capacity_rejected_on_read():
    text = _text().replace("16.308749743962686 -2", "16.308749743962686 -7")
    with pytest.raises(InstanceFormatError, match="exceeds capacity"):
        parse_instance(text)


def test_malformed_number_reports_field():
    text = _text().replace("capacity = 6", "capacity = six")
    with pytest.raises(InstanceFormatError, match="capacity"):
        parse_instance(text)


def test_constructor_checks_layout():
    with pytest.raises(InstanceError):
        make_instance([], [(1, 1)], linehauls=[(1, 1, 1, 0)])
    with pytest.raises(InstanceError):
        make_instance([(0, 0)], [(40, 1)], linehauls=[(1, 1, 1, 0)])
    with pytest.raises(InstanceError):
        make_instance([(0, 0)], [(1, 1)], backhauls=[(1, 1, 2)])


def test_oversized_demand_allowed_in_memory_but_flagged():
    inst = make_instance([(0, 0)], [(1, 1)], linehauls=[(1, 1, 7, 0)])
    assert inst.infeasible_customers() == [2]
    assert math.isclose(inst.dist[1][2], math.sqrt(2))
