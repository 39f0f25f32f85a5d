"""Gelfand-Tsetlin Hamiltonians on comet representations.

Descriptor kinds and their values at a representation:

* ``arm_block_trace`` (complete arm i, level k, coefficient j): t_j of the
  leading (k-1) x (k-1) block of the k x k matrix (x y)_0 on the edge that
  ends at the node of rank k.
* ``minimal_corner`` (minimal arm i): top-right entry of (x y)_0.
* ``minimal_block_trace`` (minimal arm i, block size k, coefficient j): t_j of
  the leading k x k block of (x y)_0; used only to top up minimal arms.
* ``loop_entry`` (loop j, position p, q): entry of b_j.

``t_j`` is the j-th elementary symmetric polynomial of the eigenvalues.
Arm and loop indices are 0-based, ``coeff`` is 1-based, level and block sizes
are matrix sizes.

Brackets use the canonical holomorphic pairing on the flat coordinates with
derivatives from central differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._linalg import numerical_rank, trace_free
from .errors import NotOnShell, SingularPoint, UnsupportedFlagType
from .geometry import elementary_symmetric
from .moment import hyperpolygon_residual, infer_alpha
from .quiver import CometQuiver, count_gt_hamiltonians
from .rep import GaugeElement, Representation, apply_gauge, gauge_orbit_tangent_basis, layout
from .solver import REGULAR_GAP, constraint_jacobian

ON_SHELL_TOL = 1e-8
FD_RELATIVE_STEP = 1e-5
RANK_RTOL = 1e-7
COMMUTE_TOL = 1e-6

KINDS = ("arm_block_trace", "minimal_corner", "minimal_block_trace", "loop_entry")


@dataclass(frozen=True)
class HamiltonianDescriptor:
    kind: str
    index: int  # arm index, or loop index for loop_entry
    level: int = 0
    coeff: int = 0
    position: tuple = ()

    def label(self) -> str:
        if self.kind == "arm_block_trace":
            return f"h[arm={self.index + 1},j={self.coeff},k={self.level}]"
        if self.kind == "minimal_corner":
            return f"corner[arm={self.index + 1}]"
        if self.kind == "minimal_block_trace":
            return f"block[arm={self.index + 1},size={self.level},j={self.coeff}]"
        p, q = self.position
        return f"b[loop={self.index + 1},p={p + 1},q={q + 1}]"

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "index": self.index,
            "level": self.level,
            "coeff": self.coeff,
            "position": list(self.position),
            "label": self.label(),
        }


@dataclass(frozen=True)
class HamiltonianSet:
    descriptors: tuple
    policy: str

    def __len__(self):
        return len(self.descriptors)

    def __iter__(self):
        return iter(self.descriptors)


def _check_types(q: CometQuiver) -> None:
    for arm in q.arms:
        if not (arm.is_complete or arm.is_minimal):
            raise UnsupportedFlagType(f"arm {arm.entries} is neither complete nor minimal")


def _arm_functions(q: CometQuiver, i: int) -> list:
    arm = q.arms[i]
    if arm.is_complete:
        return [
            HamiltonianDescriptor("arm_block_trace", i, level=k, coeff=j)
            for k in range(2, q.r + 1)
            for j in range(1, k)
        ]
    return [HamiltonianDescriptor("minimal_corner", i)]


def _loop_functions(q: CometQuiver, j: int) -> list:
    r = q.r
    return [
        HamiltonianDescriptor("loop_entry", j, position=(p, s))
        for p in range(r)
        for s in range(r)
        if (p, s) != (r - 1, r - 1)
    ]


def corollary_set(q: CometQuiver) -> HamiltonianSet:
    """Fixed index ranges for complete comets.

    g = 0: arms r+2..n (1-based); g = 1: all arms; g > 1: all arms and the
    entries of b_2..b_g except the (r, r) entry.  Minimal arms contribute
    their corner function.  For g = 0 and r >= 3 this yields fewer functions
    than :func:`count_gt_hamiltonians`; the ``tally_greedy`` policy covers
    that case.
    """
    _check_types(q)
    first = q.r + 1 if q.g == 0 else 0
    out = []
    for i in range(first, q.n):
        out.extend(_arm_functions(q, i))
    if q.g > 1:
        for j in range(1, q.g):
            out.extend(_loop_functions(q, j))
    return HamiltonianSet(tuple(out), "corollary")


def candidate_functions(q: CometQuiver) -> list:
    """Every function the greedy policy may pick from, in a fixed order."""
    _check_types(q)
    out = []
    for i, arm in enumerate(q.arms):
        if arm.is_minimal and not arm.is_complete:
            # principal-block chain first: the corner entry does not commute with it
            out.extend(
                HamiltonianDescriptor("minimal_block_trace", i, level=s, coeff=j)
                for s in range(1, q.r)
                for j in range(1, s + 1)
            )
        out.extend(_arm_functions(q, i))
    for j in range(q.g):
        out.extend(_loop_functions(q, j))
    return out


def gt_hamiltonians(q: CometQuiver, policy: str = "tally_greedy", rep: Representation | None = None) -> HamiltonianSet:
    """Select Hamiltonians under ``policy``.

    ``corollary`` lists the explicit index ranges.  ``tally_greedy`` walks
    :func:`candidate_functions` and keeps a candidate when it raises the
    on-shell rank and commutes (to ``COMMUTE_TOL``) with those already kept,
    stopping at :func:`count_gt_hamiltonians`.
    """
    if policy == "corollary":
        return corollary_set(q)
    if policy != "tally_greedy":
        raise ValueError(f"unknown policy {policy!r}")
    if rep is None:
        raise ValueError("tally_greedy selection needs a solved representation")
    target = count_gt_hamiltonians(q)
    horizontal = horizontal_basis(q, rep)
    chosen, grads = [], []
    rows = np.zeros((0, horizontal.shape[0]))
    rank = 0
    for d in candidate_functions(q):
        if len(chosen) >= target or horizontal.shape[1] == 0:
            break
        grad = holomorphic_gradient(q, rep, _evaluator(d, q))
        if any(_normalized_bracket(q, grad, other) > COMMUTE_TOL for other in grads):
            continue
        trial = np.vstack([rows, _real_differential(grad)])
        new_rank, _, _ = numerical_rank(trial @ horizontal, rtol=RANK_RTOL)
        if new_rank > rank:
            chosen.append(d)
            grads.append(grad)
            rows, rank = trial, new_rank
    return HamiltonianSet(tuple(chosen), "tally_greedy")


# ---------------------------------------------------------------------------
# evaluation


def _edge_product(q: CometQuiver, rep: Representation, i: int, edge: int):
    m = 0
    for x, y in zip(rep.x[i][edge], rep.y[i][edge]):
        m = m + x @ y
    return trace_free(m)


def _evaluator(d: HamiltonianDescriptor, q: CometQuiver):
    if d.kind == "arm_block_trace":
        if not q.arms[d.index].is_complete:
            raise UnsupportedFlagType("arm_block_trace needs a complete arm")
        k, j = d.level, d.coeff
        if not (2 <= k <= q.r and 1 <= j <= k - 1):
            raise ValueError(f"invalid level/coefficient ({k}, {j})")

        def f(rep):
            m = _edge_product(q, rep, d.index, k - 2)
            return elementary_symmetric(m[..., : k - 1, : k - 1])[..., j - 1]

    elif d.kind == "minimal_corner":

        def f(rep):
            return _edge_product(q, rep, d.index, -1)[..., 0, q.r - 1]

    elif d.kind == "minimal_block_trace":
        s, j = d.level, d.coeff

        def f(rep):
            m = _edge_product(q, rep, d.index, -1)
            return elementary_symmetric(m[..., :s, :s])[..., j - 1]

    elif d.kind == "loop_entry":
        p, s = d.position
        if (p, s) == (q.r - 1, q.r - 1):
            raise ValueError("the (r, r) entry of a loop momentum is excluded")

        def f(rep):
            return rep.b[d.index][..., p, s]

    else:
        raise ValueError(f"unknown kind {d.kind!r}")
    return f


def evaluate_hamiltonian(
    d: HamiltonianDescriptor, q: CometQuiver, rep: Representation, gauge: GaugeElement | None = None
) -> complex:
    """Value of one Hamiltonian; ``gauge`` is applied first if given (normal-form hook)."""
    if gauge is not None:
        rep = apply_gauge(rep, gauge)
    return complex(_evaluator(d, q)(rep))


# ---------------------------------------------------------------------------
# derivatives and brackets


def holomorphic_gradient(q: CometQuiver, rep: Representation, f, step: float = FD_RELATIVE_STEP) -> np.ndarray:
    """df/dz_c for every complex coordinate by central differences.

    Step per coordinate is ``step * (1 + |z_c|)``.  ``f`` must accept batched
    representations.
    """
    lay = layout(q)
    z = lay.pack(rep)
    n = z.size
    h = step * (1.0 + np.abs(z))
    shift = np.diag(h).astype(complex)
    batch = np.concatenate([z + shift, z - shift])
    vals = np.asarray(f(lay.unpack(batch)), dtype=complex)
    return (vals[:n] - vals[n:]) / (2.0 * h)


def _bracket_from_gradients(q: CometQuiver, gf: np.ndarray, gg: np.ndarray) -> complex:
    partner, sign = layout(q).canonical_pairing()
    return complex(np.sum(sign * gf * gg[partner]))


def _normalized_bracket(q: CometQuiver, gf: np.ndarray, gg: np.ndarray) -> float:
    scale = max(1.0, float(np.linalg.norm(gf) * np.linalg.norm(gg)))
    return abs(_bracket_from_gradients(q, gf, gg)) / scale


def poisson_bracket(f, g, q: CometQuiver, rep: Representation) -> complex:
    """Canonical bracket {f, g} of two holomorphic functions of the representation."""
    return _bracket_from_gradients(q, holomorphic_gradient(q, rep, f), holomorphic_gradient(q, rep, g))


def _real_differential(grad: np.ndarray) -> np.ndarray:
    """Rows d(Re f), d(Im f) in the interleaved real coordinates."""
    re = np.empty(2 * grad.size)
    im = np.empty(2 * grad.size)
    re[0::2], re[1::2] = grad.real, -grad.imag
    im[0::2], im[1::2] = grad.imag, grad.real
    return np.vstack([re, im])


def on_shell_residual(q: CometQuiver, rep: Representation) -> tuple[float, np.ndarray]:
    """Aggregate residual at the inferred level (and that level)."""
    alpha = infer_alpha(q, rep)
    if np.any(alpha <= 0):
        return math.inf, alpha
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return hyperpolygon_residual(q, rep, alpha).aggregate, alpha


@dataclass
class CommutationReport:
    labels: list
    matrix: np.ndarray
    normalized_max: float
    on_shell: bool
    residual: float
    gradient_norms: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "labels": self.labels,
            "normalized_max": self.normalized_max,
            "raw_max": float(np.max(np.abs(self.matrix))) if self.matrix.size else 0.0,
            "on_shell": self.on_shell,
            "residual": self.residual,
            "gradient_norms": self.gradient_norms,
        }


def commutation_matrix(hset: HamiltonianSet, q: CometQuiver, rep: Representation, strict: bool = False) -> CommutationReport:
    """All pairwise brackets; off-shell points are reported, not rejected, unless ``strict``."""
    residual, _ = on_shell_residual(q, rep)
    on_shell = residual <= ON_SHELL_TOL
    if strict and not on_shell:
        raise NotOnShell(f"residual {residual:.3e} exceeds {ON_SHELL_TOL}")
    grads = [holomorphic_gradient(q, rep, _evaluator(d, q)) for d in hset]
    k = len(grads)
    mat = np.zeros((k, k), dtype=complex)
    norms = [float(np.linalg.norm(g)) for g in grads]
    worst = 0.0
    for a in range(k):
        for b in range(a + 1, k):
            v = _bracket_from_gradients(q, grads[a], grads[b])
            mat[a, b], mat[b, a] = v, -v
            worst = max(worst, abs(v) / max(1.0, norms[a] * norms[b]))
    return CommutationReport([d.label() for d in hset], mat, worst, on_shell, residual, norms)


def horizontal_basis(q: CometQuiver, rep: Representation) -> np.ndarray:
    """Orthonormal columns spanning ker(constraint Jacobian) intersected with the
    Frobenius-orthogonal complement of the gauge orbit tangent."""
    _, alpha = on_shell_residual(q, rep)
    jac = constraint_jacobian(q, rep, alpha)
    orbit = gauge_orbit_tangent_basis(q, rep)
    stacked = np.vstack([jac, orbit]) if orbit.size else jac
    rank, _, _ = numerical_rank(stacked)
    _, _, vh = np.linalg.svd(stacked)
    return vh[rank:].T


@dataclass
class IndependenceReport:
    rank: int
    real_rank: int
    size: int
    gap: float
    horizontal_real_dim: int


def independence_details(hset: HamiltonianSet, q: CometQuiver, rep: Representation, check: bool = True) -> IndependenceReport:
    if check:
        residual, alpha = on_shell_residual(q, rep)
        if residual > ON_SHELL_TOL:
            raise NotOnShell(f"residual {residual:.3e} exceeds {ON_SHELL_TOL}")
        from .solver import dimension_report

        dims = dimension_report(q, rep, alpha)
        if dims.singular:
            raise SingularPoint(f"rank gap {dims.gap:.3e} below {REGULAR_GAP:g}")
    horizontal = horizontal_basis(q, rep)
    if not len(hset) or horizontal.shape[1] == 0:
        return IndependenceReport(0, 0, len(hset), math.inf, horizontal.shape[1])
    rows = np.vstack([_real_differential(holomorphic_gradient(q, rep, _evaluator(d, q))) for d in hset])
    real_rank, gap, _ = numerical_rank(rows @ horizontal, rtol=RANK_RTOL)
    return IndependenceReport((real_rank + 1) // 2, real_rank, len(hset), gap, horizontal.shape[1])


def independence_rank(hset: HamiltonianSet, q: CometQuiver, rep: Representation) -> int:
    """Complex rank of the set's differentials on the horizontal slice."""
    return independence_details(hset, q, rep).rank


def hamiltonian_values(hset: HamiltonianSet, q: CometQuiver, rep: Representation) -> list:
    return [evaluate_hamiltonian(d, q, rep) for d in hset]


__all__ = [
    "HamiltonianDescriptor",
    "HamiltonianSet",
    "gt_hamiltonians",
    "corollary_set",
    "candidate_functions",
    "evaluate_hamiltonian",
    "holomorphic_gradient",
    "poisson_bracket",
    "commutation_matrix",
    "horizontal_basis",
    "independence_rank",
    "independence_details",
    "hamiltonian_values",
]
