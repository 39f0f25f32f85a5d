import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cometquiver._linalg import trace_free_basis
from cometquiver.errors import ShapeMismatch
from cometquiver.quiver import build_comet, complete_comet, minimal_comet, wildify
from cometquiver.rep import (
    Representation,
    apply_gauge,
    check_representation,
    circle_action,
    from_flat,
    gauge_orbit_tangent_basis,
    identity_gauge,
    layout,
    quaternion_apply,
    random_gauge,
    random_representation,
    to_flat,
    zero_representation,
)

QUIVERS = [
    minimal_comet(2, 4),
    complete_comet(3, 3, 1),
    build_comet([[1, 2, 4], [1, 4], [2, 4]], 2),
    wildify(minimal_comet(2, 3, 1)),
    build_comet([], 2, central_rank=3),
]


def flat(rep):
    return layout(rep.quiver).pack(rep)


@pytest.mark.parametrize("q", QUIVERS)
def test_layout_dimensions(q):
    lay = layout(q)
    edges = sum(c * a * b for arm, row in zip(q.arms, q.multiplicities) for a, b, c in zip(arm, arm.entries[1:], row))
    assert lay.complex_dim == 2 * edges + 2 * q.g * (q.r**2 - 1)
    assert lay.real_dim == 2 * lay.complex_dim
    assert lay.y_mask().sum() == lay.complex_dim // 2


def test_d4_layout_is_sixteen_complex_coordinates():
    assert layout(minimal_comet(2, 4)).complex_dim == 16


@pytest.mark.parametrize("q", QUIVERS)
def test_flat_round_trip(q):
    rep = random_representation(q, 3)
    back = from_flat(q, to_flat(rep))
    # loop coefficients pass through an orthonormal basis, so allow an ulp or two
    assert back.allclose(rep, atol=1e-15)
    z = flat(rep)
    assert np.allclose(flat(back), z, atol=1e-15, rtol=0)
    # edge slots carry no basis change and are exact
    off = layout(q).loop_offset
    assert np.array_equal(flat(back)[:off], z[:off])


def test_flat_order_x_then_y_outer_edge_first():
    q = build_comet([[1, 2, 3]], 0)
    rep = zero_representation(q)
    x = tuple(tuple(np.full(m.shape, 10 * (k + 1), dtype=complex) for m in e) for k, e in enumerate(rep.x[0]))
    y = tuple(tuple(np.full(m.shape, 10 * (k + 1) + 1, dtype=complex) for m in e) for k, e in enumerate(rep.y[0]))
    z = flat(Representation(q, (x,), (y,), (), ()))
    assert list(z.real) == [10, 10, 11, 11, 20] * 1 + [20] * 5 + [21] * 6


def test_trace_free_basis_orthonormal():
    for r in (2, 3, 4):
        basis = trace_free_basis(r)
        gram = np.einsum("kpq,lpq->kl", basis, basis)
        assert np.allclose(gram, np.eye(r * r - 1), atol=1e-15)
        assert np.allclose(np.trace(basis, axis1=1, axis2=2), 0, atol=1e-15)
        assert not basis.flags.writeable


def test_random_representation_is_seeded():
    q = complete_comet(3, 3, 1)
    assert np.array_equal(flat(random_representation(q, 5)), flat(random_representation(q, 5)))
    assert not np.array_equal(flat(random_representation(q, 5)), flat(random_representation(q, 6)))
    check_representation(random_representation(q, 5))


def test_check_representation_rejects_bad_shapes():
    q = minimal_comet(2, 3, 1)
    rep = random_representation(q, 0)
    bad = Representation(q, rep.x, rep.y, (np.eye(2, dtype=complex),), rep.b)
    with pytest.raises(ShapeMismatch):
        check_representation(bad)
    with pytest.raises(ShapeMismatch):
        check_representation(Representation(q, rep.x[:2], rep.y, rep.a, rep.b))


@pytest.mark.parametrize("q", QUIVERS)
def test_quaternion_relations(q):
    rep = random_representation(q, 1)
    z = flat(rep)
    I = lambda v: quaternion_apply(v, "I")  # noqa: E731
    J = lambda v: quaternion_apply(v, "J")  # noqa: E731
    K = lambda v: quaternion_apply(v, "K")  # noqa: E731
    for S in (I, J, K):
        assert np.allclose(flat(S(S(rep))), -z, atol=1e-14, rtol=0)
    assert np.allclose(flat(I(J(rep))), flat(K(rep)), atol=1e-14, rtol=0)
    assert np.allclose(flat(J(K(rep))), flat(I(rep)), atol=1e-14, rtol=0)
    assert np.allclose(flat(K(I(rep))), flat(J(rep)), atol=1e-14, rtol=0)


def test_quaternion_rejects_unknown_structure():
    with pytest.raises(ValueError):
        quaternion_apply(random_representation(minimal_comet(2, 3), 0), "L")


def test_circle_action():
    q = complete_comet(2, 3, 1)
    rep = random_representation(q, 2)
    assert np.array_equal(flat(circle_action(rep, 0.0)), flat(rep))
    half = circle_action(rep, math.pi)
    mask = layout(q).y_mask()
    z = flat(rep)
    assert np.array_equal(flat(half)[mask], -z[mask])
    assert np.array_equal(flat(half)[~mask], z[~mask])
    twice = circle_action(circle_action(rep, 0.4), 0.3)
    assert np.allclose(flat(twice), flat(circle_action(rep, 0.7)), atol=1e-15)


@pytest.mark.parametrize("complexified", [False, True])
def test_gauge_inverse_round_trip(complexified):
    q = complete_comet(3, 2, 1)
    rep = random_representation(q, 4)
    g = random_gauge(q, 9, complexified)
    back = apply_gauge(apply_gauge(rep, g), g.inverse())
    assert back.allclose(rep, atol=1e-12)
    assert apply_gauge(rep, identity_gauge(q)).allclose(rep, atol=0)


def test_unitary_gauge_preserves_norm():
    q = complete_comet(3, 3, 1)
    rep = random_representation(q, 4)
    moved = apply_gauge(rep, random_gauge(q, 1))
    assert np.linalg.norm(flat(moved)) == pytest.approx(np.linalg.norm(flat(rep)), rel=1e-13)


def test_orbit_tangent_matches_curve_derivative():
    q = complete_comet(2, 3, 1)
    rep = random_representation(q, 8)
    tangent = gauge_orbit_tangent_basis(q, rep)
    from cometquiver.rep import GaugeElement, gauge_algebra_basis
    from scipy.linalg import expm

    xi = gauge_algebra_basis(q)[0]
    t = 1e-6

    def exp_gauge(s):
        arms = tuple(
            tuple(expm(s * xi.get(("arm", i, k), np.zeros((n, n)))) for k, n in enumerate(arm.entries[:-1]))
            for i, arm in enumerate(q.arms)
        )
        return GaugeElement(arms, expm(s * xi.get(("centre",), np.zeros((q.r, q.r)))))

    fd = (to_flat(apply_gauge(rep, exp_gauge(t))) - to_flat(apply_gauge(rep, exp_gauge(-t)))) / (2 * t)
    assert np.allclose(fd, tangent[0], atol=1e-8)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31), st.sampled_from(range(len(QUIVERS))))
def test_flat_pack_is_linear(seed, which):
    q = QUIVERS[which]
    u = random_representation(q, seed)
    v = random_representation(q, seed + 1)
    lay = layout(q)
    w = lay.unpack(2.0 * lay.pack(u) - lay.pack(v))
    assert np.allclose(lay.pack(w), 2.0 * lay.pack(u) - lay.pack(v), atol=1e-14)


def test_unpack_batches():
    q = minimal_comet(2, 3, 1)
    lay = layout(q)
    z = np.stack([lay.pack(random_representation(q, s)) for s in range(4)])
    assert np.allclose(lay.pack(lay.unpack(z)), z, atol=1e-15, rtol=0)
    assert lay.unpack(z).x[0][0][0].shape == (4, 2, 1)
