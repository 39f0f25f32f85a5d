"""Polygon sides, Higgs-field residues and characteristic coefficients."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._linalg import comm, dag, fro, trace_free, trace_free_basis
from .errors import DuplicatePunctures, EvaluationAtPole, LengthMismatch
from .quiver import CometQuiver
from .rep import Representation


@dataclass(frozen=True, eq=False)
class PolygonFigure:
    """Sides in su(r), stored as the Hermitian matrices (trace-free)."""

    arm_sides: tuple
    loop_sides: tuple
    lengths: tuple
    closure_defect: float

    @property
    def sides(self) -> tuple:
        return self.arm_sides + self.loop_sides

    def vectors(self) -> np.ndarray:
        """Sides as isometric coordinate vectors in R^(r^2 - 1)."""
        return np.array([hermitian_coordinates(s) for s in self.sides])


def hermitian_coordinates(h: np.ndarray) -> np.ndarray:
    """Coordinates of a trace-free Hermitian matrix in an orthonormal basis.

    Off-diagonal pairs give sqrt(2) Re h_pq, sqrt(2) Im h_pq (p < q); the
    diagonal is expanded in the diagonal part of :func:`trace_free_basis`.
    """
    r = h.shape[0]
    iu = np.triu_indices(r, 1)
    off = np.sqrt(2.0) * h[iu]
    diag = trace_free_basis(r)[r * (r - 1):]
    d = np.einsum("kpp,p->k", diag, np.real(np.diag(h)))
    return np.concatenate([np.stack([off.real, off.imag], axis=1).ravel(), d])


def polygon_sides(q: CometQuiver, rep: Representation) -> PolygonFigure:
    """Arm sides (x x* - y* y)_0 on the last edge, loop sides [a,a*] + [b,b*]."""
    arm_sides = []
    for i in range(q.n):
        side = 0
        for x, y in zip(rep.x[i][-1], rep.y[i][-1]):
            side = side + (x @ dag(x) - dag(y) @ y)
        arm_sides.append(trace_free(side))
    loop_sides = [comm(a, dag(a)) + comm(b, dag(b)) for a, b in zip(rep.a, rep.b)]
    sides = arm_sides + loop_sides
    total = sum(sides) if sides else np.zeros((q.r, q.r))
    return PolygonFigure(
        tuple(arm_sides),
        tuple(loop_sides),
        tuple(fro(s) for s in sides),
        fro(total),
    )


def rank_one_side_length(alpha: float, r: int) -> float:
    """Frobenius length of (v v*)_0 for |v|^2 = alpha in C^r: alpha sqrt((r-1)/r).

    This is alpha / sqrt(2) at r = 2.  Every arm side of a closed polygon is of
    this form because x x* on the last edge has a single nonzero eigenvalue.
    """
    return alpha * math.sqrt((r - 1) / r)


def higgs_polygon_sides(q: CometQuiver, rep: Representation) -> tuple:
    """Sides (x y)_0 and [a, b] of the closed figure in sl(r, C)."""
    sides = []
    for i in range(q.n):
        side = 0
        for x, y in zip(rep.x[i][-1], rep.y[i][-1]):
            side = side + x @ y
        sides.append(trace_free(side))
    sides.extend(comm(a, b) for a, b in zip(rep.a, rep.b))
    return tuple(sides)


@dataclass(frozen=True, eq=False)
class HiggsData:
    punctures: tuple
    residues: tuple
    loop_commutator_sum: np.ndarray
    nilpotency_orders: tuple

    def to_dict(self) -> dict:
        from .io import encode_matrix

        return {
            "punctures": [[z.real, z.imag] for z in self.punctures],
            "residues": [encode_matrix(m) for m in self.residues],
            "loop_commutator_sum": encode_matrix(self.loop_commutator_sum),
            "nilpotency_orders": list(self.nilpotency_orders),
        }


def residues(q: CometQuiver, rep: Representation) -> tuple:
    out = []
    for i in range(q.n):
        m = 0
        for x, y in zip(rep.x[i][-1], rep.y[i][-1]):
            m = m + x @ y
        out.append(trace_free(m))
    return tuple(out)


def nilpotency_order(m: np.ndarray, cap: int | None = None, rtol: float = 1e-8) -> int:
    """Smallest p with ||m^p|| < rtol ||m||^p, capped at ``cap`` (default size)."""
    cap = cap or m.shape[0]
    nrm = fro(m)
    if nrm == 0.0:
        return 1
    power = np.eye(m.shape[0], dtype=complex)
    for p in range(1, cap + 1):
        power = power @ m
        if fro(power) < rtol * nrm**p:
            return p
    return cap


def higgs_data(q: CometQuiver, rep: Representation, punctures) -> HiggsData:
    pts = tuple(complex(z) for z in punctures)
    if len(pts) != q.n:
        raise LengthMismatch(f"need one puncture per arm ({q.n}), got {len(pts)}")
    if len(set(pts)) != len(pts):
        raise DuplicatePunctures("punctures must be pairwise distinct")
    res = residues(q, rep)
    loops = sum((comm(b, a) for a, b in zip(rep.a, rep.b)), np.zeros((q.r, q.r), dtype=complex))
    orders = tuple(nilpotency_order(m, cap=q.r) for m in res)
    return HiggsData(pts, res, loops, orders)


def residue_sum_check(q: CometQuiver, rep: Representation) -> float:
    """|| sum_i R_i - sum_j [b_j, a_j] ||."""
    total = sum(residues(q, rep), np.zeros((q.r, q.r), dtype=complex))
    for a, b in zip(rep.a, rep.b):
        total = total - comm(b, a)
    return fro(total)


def higgs_eval(data: HiggsData, z: complex) -> np.ndarray:
    """Coefficient of dz in sum_i R_i / (z - z_i)."""
    z = complex(z)
    r = data.loop_commutator_sum.shape[0]
    out = np.zeros((r, r), dtype=complex)
    for zi, res in zip(data.punctures, data.residues):
        if z == zi:
            raise EvaluationAtPole(f"z = {z} is a puncture")
        out = out + res / (z - zi)
    return out


def elementary_symmetric(m: np.ndarray) -> np.ndarray:
    """t_1..t_k of the eigenvalues (t_1 = trace, t_k = det); broadcasts over batches."""
    m = np.asarray(m, dtype=complex)
    k = m.shape[-1]
    lam = np.linalg.eigvals(m) if k else np.zeros(m.shape[:-1], dtype=complex)
    e = [np.ones(m.shape[:-2], dtype=complex)] + [np.zeros(m.shape[:-2], dtype=complex)] * k
    for idx in range(k):
        li = lam[..., idx]
        for j in range(idx + 1, 0, -1):
            e[j] = e[j] + li * e[j - 1]
    if k == 0:
        return np.zeros(m.shape[:-2] + (0,), dtype=complex)
    return np.stack(e[1:], axis=-1)


def char_coefficients(m: np.ndarray) -> np.ndarray:
    """c_1..c_k with det(lambda - M) = lambda^k + sum_j c_j lambda^(k-j).

    Computed from the eigenvalues as signed elementary symmetric polynomials.
    """
    m = np.asarray(m)
    if m.ndim < 2 or m.shape[-1] != m.shape[-2]:
        raise ValueError("char_coefficients needs a square matrix")
    t = elementary_symmetric(m)
    return t * (-1.0) ** np.arange(1, t.shape[-1] + 1)
