import numpy as np
import pytest

from cometquiver.errors import FewArms, InvalidLevel, LengthMismatch, NotConverged
from cometquiver.moment import hyperpolygon_residual
from cometquiver.quiver import complete_comet, minimal_comet
from cometquiver.solver import (
    THREADS_ENV,
    SolveOptions,
    constraint_jacobian,
    default_workers,
    dimension_report,
    solve,
    solve_polygon,
)
from cometquiver.rep import Representation, layout
from conftest import generic_alpha, solved

SWEEP = [
    ("minimal", 2, 4, 0),
    ("complete", 2, 5, 0),
    ("complete", 2, 3, 1),
    ("complete", 3, 3, 0),
    ("complete", 3, 4, 0),
    ("minimal", 3, 5, 0),
    ("minimal", 3, 3, 1),
    ("complete", 3, 4, 1),
]

# quotient complex dimensions measured at the solved points (seed 11)
FROZEN_DIMS = {
    ("minimal", 2, 4, 0): 2,
    ("complete", 2, 5, 0): 4,
    ("complete", 2, 3, 1): 6,
    ("complete", 3, 3, 0): 2,
    ("complete", 3, 4, 0): 8,
    ("minimal", 3, 5, 0): 4,
    ("minimal", 3, 3, 1): 12,
    ("complete", 3, 4, 1): 24,
}


@pytest.mark.parametrize("key", SWEEP)
def test_solve_and_count(key):
    q, res = solved(*key)
    assert res.converged and res.residual < 1e-11
    report = dimension_report(q, res.representation, res.alpha)
    assert not report.singular
    assert report.gap > 1e3
    assert report.quotient_complex_dim == FROZEN_DIMS[key]
    assert report.matches_prediction


def test_d4_dimension_report_frozen(d4):
    q, res = d4
    report = dimension_report(q, res.representation, res.alpha)
    assert report.ambient_real_dim == 32
    assert report.constraint_rank == 21
    assert report.level_set_real_dim == 11
    assert report.gauge_orbit_real_dim == 7
    assert report.quotient_real_dim == 4
    assert report.to_dict()["quotient_complex_dim"] == 2


def test_jacobian_is_exact_for_quadratic_residual(d4):
    q, res = d4
    jac = constraint_jacobian(q, res.representation, res.alpha)
    u = layout(q).pack(res.representation).view(float)
    rng = np.random.default_rng(0)
    v = rng.standard_normal(u.size)
    from cometquiver.solver import _Problem

    prob = _Problem(q, res.alpha, polygon=False)
    t = 1e-3
    fd = (prob.residual(u + t * v) - prob.residual(u - t * v)) / (2 * t)
    assert np.allclose(jac @ v, fd, atol=1e-12)


def test_solution_reverifies_independently(d4):
    q, res = d4
    assert hyperpolygon_residual(q, res.representation, res.alpha).aggregate < 1e-10


def test_deterministic_and_worker_independent():
    q = minimal_comet(2, 4)
    alpha = generic_alpha(4)
    a = solve(q, alpha, SolveOptions(seed=3, starts=4, workers=1))
    b = solve(q, alpha, SolveOptions(seed=3, starts=4, workers=3))
    assert a.start == b.start
    assert np.array_equal(layout(q).pack(a.representation), layout(q).pack(b.representation))


def test_threads_env(monkeypatch):
    monkeypatch.setenv(THREADS_ENV, "3")
    assert default_workers() == 3
    monkeypatch.setenv(THREADS_ENV, "lots")
    assert default_workers() == 1


def test_not_converged_carries_best_iterate():
    q = complete_comet(3, 4, 1)
    with pytest.raises(NotConverged) as info:
        solve(q, generic_alpha(4), SolveOptions(max_iterations=1, starts=1))
    assert info.value.result is not None
    assert info.value.result.residual > 1e-11
    relaxed = solve(q, generic_alpha(4), SolveOptions(max_iterations=1, starts=1), strict=False)
    assert not relaxed.converged


def test_level_validation():
    q = minimal_comet(2, 4)
    with pytest.raises(InvalidLevel):
        solve(q, [1.0, 1.0, -1.0, 1.0])
    with pytest.raises(LengthMismatch):
        solve(q, [1.0, 1.0])
    with pytest.warns(FewArms):
        solve(minimal_comet(3, 3), [1.0, 1.1, 1.2], SolveOptions(starts=1, max_iterations=5), strict=False)


def test_options_validation():
    with pytest.raises(ValueError):
        SolveOptions(tolerance=0.0)
    with pytest.raises(ValueError):
        SolveOptions(starts=0)


@pytest.mark.parametrize("r, n", [(2, 4), (2, 5), (3, 4)])
def test_polygon_solve_keeps_y_and_b_zero(r, n):
    q = minimal_comet(r, n, 0)
    res = solve_polygon(q, generic_alpha(n), SolveOptions(seed=3))
    assert res.residual < 1e-11
    assert res.representation.norms()["y"] == 0.0


def test_collinear_polygon_is_singular():
    # sides e1, e2, e1, e2 (as (x x*)_0) are collinear: the diagonal torus fixes the point
    q = minimal_comet(2, 4)
    e1 = np.array([[1.0], [0.0]], dtype=complex)
    e2 = np.array([[0.0], [1.0]], dtype=complex)
    zero = np.zeros((1, 2), dtype=complex)
    rep = Representation(q, tuple(((v,),) for v in (e1, e2, e1, e2)), (((zero,),),) * 4, (), ())
    alpha = [1.0, 1.0, 1.0, 1.0]
    assert hyperpolygon_residual(q, rep, alpha).aggregate == 0.0
    report = dimension_report(q, rep, alpha)
    assert report.singular
    assert report.stabilizer_dim == 1
    assert not report.matches_prediction
