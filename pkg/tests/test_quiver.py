import warnings

import pytest
from hypothesis import given, strategies as st

from cometquiver.errors import (
    EmptyLikely,
    InvalidFlag,
    MismatchedCentralRank,
    NonIdenticalArms,
    UnsupportedFlagType,
)
from cometquiver.quiver import (
    FlagString,
    build_comet,
    complete_comet,
    count_gt_hamiltonians,
    dim_hyperpolygon_space,
    dim_polygon_space,
    flag_dim,
    minimal_comet,
    quiver_from_dict,
    wildify,
)


@pytest.mark.parametrize(
    "flag, expected",
    [((1, 2), 1), ((1, 2, 3), 3), ((1, 3), 2), ((1, 2, 4), 5), ((2, 5), 6), ((3,), 0)],
)
def test_flag_dim(flag, expected):
    assert flag_dim(flag) == expected


@pytest.mark.parametrize(
    "quiver, dim_p, gt",
    [
        (minimal_comet(2, 4), 1, 1),
        (complete_comet(2, 5), 2, 2),
        (complete_comet(3, 3), 1, 1),
        (complete_comet(3, 4, 1), 12, 12),
        (minimal_comet(3, 5), 2, 2),
        (minimal_comet(3, 3, 1), 6, 6),
        (complete_comet(3, 5, 2), 23, 23),
        (build_comet([[1, 2, 3], [1, 3], [1, 3]], 1), 7, 7),
    ],
)
def test_dimension_and_tally(quiver, dim_p, gt):
    assert dim_polygon_space(quiver) == dim_p
    assert dim_hyperpolygon_space(quiver) == 2 * dim_p
    assert count_gt_hamiltonians(quiver) == gt


def test_tally_equals_half_dimension_for_complete_and_minimal():
    # GT count is always dim_P for these flag types
    for r in (2, 3, 4):
        for n in range(1, 6):
            for g in range(3):
                for q in (complete_comet(r, n, g), minimal_comet(r, n, g)):
                    assert count_gt_hamiltonians(q) == dim_polygon_space(q, warn=False)


def test_negative_dimension_warns():
    with pytest.warns(EmptyLikely):
        assert dim_polygon_space(minimal_comet(3, 2)) == -4


def test_flag_validation():
    with pytest.raises(InvalidFlag):
        FlagString((2, 1))
    with pytest.raises(InvalidFlag):
        FlagString((0, 2))
    with pytest.raises(InvalidFlag):
        FlagString(())
    with pytest.raises(MismatchedCentralRank):
        build_comet([[1, 2], [1, 3]])
    with pytest.raises(InvalidFlag):
        build_comet([], 1)
    with pytest.raises(InvalidFlag):
        build_comet([[1, 2]], -1)


def test_count_rejects_other_flag_types():
    with pytest.raises(UnsupportedFlagType):
        count_gt_hamiltonians(build_comet([[1, 2, 4]] * 3))


def test_loop_only_comet():
    q = build_comet([], 2, central_rank=2)
    assert (q.n, q.g, q.r) == (0, 2, 2)
    assert dim_polygon_space(q) == 3
    assert quiver_from_dict(q.to_dict()) == q


def test_wildify():
    q = minimal_comet(2, 4, 1)
    w = wildify(q)
    assert w.n == 1 and w.multiplicities == ((4,),) and not w.is_tame
    assert w.edge_count() == q.edge_count()
    assert wildify(minimal_comet(2, 1)) == minimal_comet(2, 1)
    with pytest.raises(NonIdenticalArms):
        wildify(build_comet([[1, 3], [1, 2, 3]]))
    with pytest.raises(NonIdenticalArms):
        wildify(w)


def test_dict_round_trip_and_digest():
    q = build_comet([[1, 2, 3], [1, 3]], 2)
    doc = q.to_dict()
    assert doc == {"arms": [[1, 2, 3], [1, 3]], "loops": 2}
    assert quiver_from_dict(doc) == q
    assert quiver_from_dict(doc).digest() == q.digest()
    assert q.digest() != complete_comet(3, 2, 2).digest()
    with pytest.raises(InvalidFlag):
        quiver_from_dict({"arms": [[1, 2]], "colour": "red"})


def flags_of_rank(r):
    return st.sets(st.integers(1, r - 1), max_size=r - 1).map(lambda s: tuple(sorted(s)) + (r,))


flags = st.integers(2, 5).flatmap(flags_of_rank)


@given(flags)
def test_flag_dim_matches_flag_variety_dimension(flag):
    # sum r_i (r_{i+1} - r_i) = (r^2 - sum of squared block sizes) / 2
    blocks = [b - a for a, b in zip((0,) + flag[:-1], flag)]
    assert flag_dim(flag) == (flag[-1] ** 2 - sum(b * b for b in blocks)) // 2


@given(st.integers(2, 4).flatmap(lambda r: st.lists(flags_of_rank(r), min_size=1, max_size=5)), st.integers(0, 3))
def test_dims_additive_in_arms(arm_list, g):
    r = arm_list[0][-1]
    q = build_comet(arm_list, g)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        d = dim_polygon_space(q)
    assert d == sum(flag_dim(f) for f in arm_list) + (g - 1) * (r * r - 1)
    assert dim_hyperpolygon_space(q, warn=False) == 2 * d
