import itertools
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ordmms.core import (
    Allocation,
    Instance,
    OrderingMaps,
    dump_instance,
    load_instance,
    order_instance,
    pad_to,
    pad_with_dummies,
    unorder_allocation,
)
from ordmms.fixtures import load_fixture


def test_instance_validation():
    with pytest.raises(ValueError):
        Instance.from_rows([[1, 2], [3]])
    with pytest.raises(ValueError):
        Instance.from_rows([[1, -1]])
    inst = Instance.from_rows([[1, 2, 3], [0, 0, 5]])
    assert (inst.n, inst.m) == (2, 3)
    assert inst.total(1) == 5


def test_json_roundtrip(tmp_path):
    inst = Instance.from_rows([[3, 10, 2], [1, 1, 1]])
    path = tmp_path / "i.json"
    dump_instance(inst, path)
    assert load_instance(path) == inst
    assert json.loads(path.read_text()) == {"n": 2, "m": 3, "values": [[3, 10, 2], [1, 1, 1]]}


@pytest.mark.parametrize(
    "data",
    [
        {"values": [[1.5, 2]]},
        {"n": 3, "values": [[1, 2]]},
        {"m": 4, "values": [[1, 2]]},
        [[1, 2]],
    ],
)
def test_from_dict_rejects(data):
    with pytest.raises(ValueError):
        Instance.from_dict(data)


def test_order_small_row():
    ordered, maps = order_instance(Instance.from_rows([[3, 10, 2]]))
    assert ordered.values == ((10, 3, 2),)
    assert maps.perms == ((1, 0, 2),)


def test_order_already_sorted_is_identity():
    inst = load_fixture("example-5.1")
    ordered, maps = order_instance(inst)
    assert ordered == inst
    assert all(p == tuple(range(inst.m)) for p in maps.perms)


def test_ties_keep_index_order():
    _, maps = order_instance(Instance.from_rows([[5, 7, 5, 7]]))
    assert maps.perms[0] == (1, 3, 0, 2)


def test_allocation_rejects_overlap():
    with pytest.raises(ValueError):
        Allocation({0: frozenset({1, 2}), 1: frozenset({2})})
    with pytest.raises(ValueError):
        Allocation({0: frozenset({1})}, frozenset({1}))


def test_unorder_identity_maps():
    alloc = Allocation({0: frozenset({0, 3}), 1: frozenset({1, 2})})
    maps = OrderingMaps((tuple(range(4)), tuple(range(4))))
    assert unorder_allocation(alloc, maps) == alloc


def test_unowned_position_is_skipped():
    # nobody picks at turn 2, so agent 0's turn 3 takes good 2
    alloc = Allocation({0: frozenset({0, 3}), 1: frozenset({1})}, frozenset({2}))
    maps = OrderingMaps((tuple(range(4)), tuple(range(4))))
    out = unorder_allocation(alloc, maps)
    assert out.bundles == {0: frozenset({0, 2}), 1: frozenset({1})}
    assert out.unallocated == frozenset({3})


def test_unorder_single_agent_gets_everything():
    inst = Instance.from_rows([[4, 9, 1, 7]])
    _, maps = order_instance(inst)
    out = unorder_allocation(Allocation({0: frozenset(range(4))}), maps)
    assert out.bundles[0] == frozenset(range(4))


def test_unorder_rejects_overlap():
    # Allocation itself refuses overlap, so feed a raw object
    class Raw:
        bundles = {0: frozenset({0}), 1: frozenset({0})}

    with pytest.raises(ValueError):
        unorder_allocation(Raw(), OrderingMaps(((0, 1), (0, 1))))


def _all_ordered_allocations(n, m):
    # each position goes to an agent or stays unallocated (label n)
    for labels in itertools.product(range(n + 1), repeat=m):
        bundles = {a: frozenset(p for p, l in enumerate(labels) if l == a) for a in range(n)}
        yield Allocation(bundles, frozenset(p for p, l in enumerate(labels) if l == n))


@pytest.mark.parametrize("m", [2, 3])
def test_unorder_never_loses_value_exhaustive(m):
    # every 2-agent instance with values <= 3, every allocation of positions
    checked = 0
    for flat in itertools.product(range(4), repeat=2 * m):
        inst = Instance.from_rows([flat[:m], flat[m:]])
        ordered, maps = order_instance(inst)
        for alloc in _all_ordered_allocations(2, m):
            out = unorder_allocation(alloc, maps)
            for a in range(2):
                assert len(out.bundles[a]) == len(alloc.bundles[a])
                assert out.values(inst)[a] >= alloc.values(ordered)[a]
            checked += 1
    assert checked == 4 ** (2 * m) * 3 ** m


rows_st = st.integers(1, 4).flatmap(
    lambda n: st.integers(1, 7).flatmap(
        lambda m: st.lists(st.lists(st.integers(0, 30), min_size=m, max_size=m), min_size=n, max_size=n)
    )
)


@settings(max_examples=200, deadline=None)
@given(rows=rows_st, data=st.data())
def test_order_and_unorder_properties(rows, data):
    inst = Instance.from_rows(rows)
    ordered, maps = order_instance(inst)
    for i in range(inst.n):
        assert list(ordered.row(i)) == sorted(inst.row(i), reverse=True)
        assert sorted(maps.perms[i]) == list(range(inst.m))
        assert tuple(inst.row(i)[g] for g in maps.perms[i]) == ordered.row(i)
    labels = data.draw(st.lists(st.integers(0, inst.n), min_size=inst.m, max_size=inst.m))
    alloc = Allocation(
        {a: frozenset(p for p, l in enumerate(labels) if l == a) for a in range(inst.n)},
        frozenset(p for p, l in enumerate(labels) if l == inst.n),
    )
    out = unorder_allocation(alloc, maps)
    assert out.is_complete(inst.m)
    for a in range(inst.n):
        assert out.values(inst)[a] >= alloc.values(ordered)[a]


def test_padding():
    inst = Instance.from_rows([[1, 2]])
    assert pad_with_dummies(inst, 3).values == ((1, 2, 0, 0, 0),)
    assert pad_to(inst, 1) == inst
    assert pad_to(inst, 4).m == 4
    with pytest.raises(ValueError):
        pad_with_dummies(inst, -1)


def test_allocation_restrict_drops_dummies():
    alloc = Allocation({0: frozenset({0, 3}), 1: frozenset({1, 4})}, frozenset({2}))
    r = alloc.restrict(3)
    assert r.bundles == {0: frozenset({0}), 1: frozenset({1})}
    assert r.to_dict() == {"bundles": {"0": [0], "1": [1]}, "unallocated": [2]}
