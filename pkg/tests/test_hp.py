import itertools
import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hpx.groups import Element, GroupSpec, add
from hpx.hp import (HPParams, HPSpec, format_tuple, hp_contains, hp_eval, hp_size,
                    hp_tuple, is_trivial, load_hpspec, member_ranks, parse_tuple,
                    tail_elements)


def all_params(hp):
    spec = hp.spec
    pools = [[Element(spec, tuple(int(v) for v in row)) for row in tail_elements(spec, i)]
             for i in range(hp.k)]
    for coeffs in itertools.product(*pools):
        yield HPParams(coeffs)


@st.composite
def hp_and_params(draw):
    p = draw(st.sampled_from([3, 5, 7]))
    m = draw(st.integers(1, 3))
    dims = tuple(draw(st.lists(st.integers(0, 2), min_size=m, max_size=m)))
    k = draw(st.integers(1, p))
    default = draw(st.booleans())
    if default:
        hp = HPSpec.default(GroupSpec(p, dims), k)
    else:
        pts = draw(st.permutations(range(p)))[:k]
        hp = HPSpec(GroupSpec(p, dims), tuple(pts))
    spec = hp.spec

    def draw_param():
        coeffs = []
        for i in range(k):
            tail = spec.tail_mask(i)
            vals = [draw(st.integers(0, p - 1)) if tail[j] else 0 for j in range(spec.n)]
            coeffs.append(Element(spec, tuple(vals)))
        return HPParams(tuple(coeffs))

    return hp, draw_param(), draw_param()


def test_constant_polynomial():
    spec = GroupSpec(5, (2,))
    u0 = Element(spec, (3, 1))
    params = HPParams((u0, spec.zero(), spec.zero()))
    assert all(hp_eval(params, c) == u0 for c in range(5))


def test_ap_terms():
    spec = GroupSpec(5, (1,))
    x, d = Element(spec, (2,)), Element(spec, (4,))
    params = HPParams((x, d))
    for c in range(5):
        assert hp_eval(params, c) == add(x, Element(spec, ((c * 4) % 5,)))
    hp3 = HPSpec.default(spec, 3)
    t = hp_tuple(HPParams((x, d, spec.zero())), hp3)
    assert [e.coords[0] for e in t] == [2, 1, 0]


def test_two_block_evaluation_example():
    spec = GroupSpec(3, (1, 1))
    params = HPParams((Element(spec, (1, 0)), Element(spec, (1, 1)), Element(spec, (0, 2))))
    assert str(hp_eval(params, 2)) == "0|1"


def test_tail_constraint_enforced():
    spec = GroupSpec(3, (1, 1))
    with pytest.raises(ValueError):
        HPParams((spec.zero(), spec.zero(), Element(spec, (1, 0))))


def test_hpspec_validation():
    spec = GroupSpec(3, (1,))
    with pytest.raises(ValueError):
        HPSpec.default(spec, 4)
    with pytest.raises(ValueError):
        HPSpec(spec, (0, 0))
    with pytest.raises(ValueError):
        HPSpec(spec, ())


def test_zero_params_give_zero_tuple():
    hp = HPSpec.default(GroupSpec(3, (1, 1)), 3)
    t = hp_tuple(HPParams((hp.spec.zero(),) * 3), hp)
    assert all(e.is_zero() for e in t)


def test_injectivity_and_size_two_blocks():
    hp = HPSpec.default(GroupSpec(3, (1, 1)), 3)
    tuples = {tuple(e.coords for e in hp_tuple(pr, hp)) for pr in all_params(hp)}
    assert len(tuples) == hp_size(hp) == 243


@pytest.mark.parametrize("p,dims,k", [(3, (2,), 3), (5, (1,), 3), (3, (1, 1), 2),
                                      (5, (1, 1), 4), (3, (0, 1, 1), 3), (7, (1,), 5)])
def test_injectivity_exhaustive(p, dims, k):
    hp = HPSpec.default(GroupSpec(p, dims), k)
    tuples = {tuple(e.coords for e in hp_tuple(pr, hp)) for pr in all_params(hp)}
    assert len(tuples) == hp_size(hp)
    assert len(set(map(tuple, member_ranks(hp)))) == hp_size(hp)


def test_membership_examples():
    spec = GroupSpec(5, (1,))
    hp = HPSpec.default(spec, 3)
    u = Element(spec, (3,))
    assert hp_contains((u, u, u), hp)[0]
    t = tuple(Element(spec, (v,)) for v in (0, 1, 3))
    assert hp_contains(t, hp) == (False, None)


def test_membership_matches_image_exhaustively():
    spec = GroupSpec(3, (1, 1))
    hp = HPSpec.default(spec, 3)
    image = {tuple(e.coords for e in hp_tuple(pr, hp)) for pr in all_params(hp)}
    els = [Element(spec, c) for c in itertools.product(range(3), repeat=2)]
    for t in itertools.product(els, repeat=3):
        assert hp_contains(t, hp)[0] == (tuple(e.coords for e in t) in image)


def test_ap_first_block_arbitrary_second():
    spec = GroupSpec(3, (1, 1))
    hp = HPSpec.default(spec, 3)
    t = (Element(spec, (0, 2)), Element(spec, (1, 0)), Element(spec, (2, 2)))
    assert hp_contains(t, hp)[0]


@given(hp_and_params())
def test_round_trip_and_closure(data):
    hp, a, b = data
    ta, tb = hp_tuple(a, hp), hp_tuple(b, hp)
    ok, rec = hp_contains(ta, hp)
    assert ok and rec == a
    assert hp_contains(tuple(add(x, y) for x, y in zip(ta, tb)), hp)[0]


def test_single_block_members_are_aps():
    spec = GroupSpec(5, (1,))
    hp = HPSpec.default(spec, 4)
    rows = {tuple(r) for r in member_ranks(hp)}
    aps = {tuple((x + i * d) % 5 for i in range(4)) for x in range(5) for d in range(5)}
    assert rows == aps


def test_hp_size_shapes():
    assert hp_size(HPSpec.default(GroupSpec(3, (2,)), 3)) == 3 ** 4
    spec = GroupSpec(5, (1, 2))
    assert hp_size(HPSpec.default(spec, 1)) == spec.size
    with pytest.raises(OverflowError):
        hp_size(HPSpec.default(GroupSpec(7, (5, 5)), 3))


def test_is_trivial():
    spec = GroupSpec(3, (1,))
    u, d = Element(spec, (1,)), Element(spec, (2,))
    assert is_trivial((u, u, u))
    assert not is_trivial((spec.zero(), d, 2 * d))
    hp = HPSpec.default(spec, 3)
    assert is_trivial(hp_tuple(HPParams((u, spec.zero(), spec.zero())), hp))


def test_json_and_text_forms(tmp_path):
    hp = HPSpec(GroupSpec(5, (1, 1)), (0, 2, 4))
    path = tmp_path / "hp.json"
    path.write_text(json.dumps(hp.to_json()))
    assert load_hpspec(str(path)) == hp
    assert HPSpec.from_json({"p": 3, "dims": [2]}, k=3) == HPSpec.default(GroupSpec(3, (2,)), 3)
    t = (Element(hp.spec, (1, 2)), Element(hp.spec, (0, 0)), Element(hp.spec, (4, 4)))
    assert format_tuple(t) == ["1|2", "0|0", "4|4"]
    assert parse_tuple(format_tuple(t), hp.spec) == t
