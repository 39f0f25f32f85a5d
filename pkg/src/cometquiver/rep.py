"""Points of the doubled comet representation space and the group actions on them.

Layout conventions
------------------
Arm ``i`` with flag ``(r_1, ..., r_m)`` has edges ``k = 0..m-2`` from node
``k`` (size ``r_{k+1}`` in 1-based flag terms) towards the centre.  For each
edge there are ``mult`` parallel copies; ``x[i][k][c]`` has shape
``(r_{k+2}, r_{k+1})`` and ``y[i][k][c]`` the transposed shape.  Loops carry
trace-free ``a[j]``, ``b[j]`` of size ``r x r``.

Flat coordinates list, in order: for each arm (outer edge first), for each
edge, all x copies then all y copies, each matrix row-major; then for each
loop the coefficients of ``a_j`` and then of ``b_j`` in the basis of
:func:`trace_free_basis`.  Every complex entry is stored as (real, imag),
which is exactly numpy's complex128 memory layout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ._linalg import comm, dag, trace_free, trace_free_basis
from .errors import ShapeMismatch
from .quiver import CometQuiver

Nested = tuple  # x[i][k][c] -> ndarray


@dataclass(frozen=True, eq=False)
class Representation:
    """A point (x, y, a, b) of Rep of the doubled comet.

    Arrays may carry leading batch axes; all maps in this package broadcast.
    """

    quiver: CometQuiver
    x: Nested
    y: Nested
    a: tuple
    b: tuple

    def map_slots(self, fx: Callable, fy: Callable, fa: Callable, fb: Callable) -> "Representation":
        return Representation(
            self.quiver,
            tuple(tuple(tuple(fx(m) for m in e) for e in arm) for arm in self.x),
            tuple(tuple(tuple(fy(m) for m in e) for e in arm) for arm in self.y),
            tuple(fa(m) for m in self.a),
            tuple(fb(m) for m in self.b),
        )

    def last_x(self, i: int) -> tuple:
        return self.x[i][-1]

    def last_y(self, i: int) -> tuple:
        return self.y[i][-1]

    def norms(self) -> dict:
        """Frobenius norms of the x, y, a, b blocks taken together."""

        def total(blocks):
            return math.sqrt(sum(float(np.sum(np.abs(m) ** 2)) for m in blocks))

        xs = [m for arm in self.x for e in arm for m in e]
        ys = [m for arm in self.y for e in arm for m in e]
        return {"x": total(xs), "y": total(ys), "a": total(self.a), "b": total(self.b)}

    def allclose(self, other: "Representation", atol: float = 0.0, rtol: float = 0.0) -> bool:
        u, v = to_flat(self), to_flat(other)
        return u.shape == v.shape and bool(np.allclose(u, v, atol=atol, rtol=rtol))


class Layout:
    """Bookkeeping between Representation objects and flat coordinate vectors."""

    def __init__(self, q: CometQuiver):
        self.quiver = q
        self.slots = []  # (kind, i, k, c, shape, offset)
        off = 0
        for i, (arm, mult) in enumerate(zip(q.arms, q.multiplicities)):
            for k in range(len(arm) - 1):
                lo, hi = arm[k], arm[k + 1]
                for c in range(mult[k]):
                    self.slots.append(("x", i, k, c, (hi, lo), off))
                    off += hi * lo
                for c in range(mult[k]):
                    self.slots.append(("y", i, k, c, (lo, hi), off))
                    off += hi * lo
        self.loop_dim = q.r * q.r - 1
        self.loop_offset = off
        for j in range(q.g):
            self.slots.append(("a", j, 0, 0, (q.r, q.r), off))
            off += self.loop_dim
            self.slots.append(("b", j, 0, 0, (q.r, q.r), off))
            off += self.loop_dim
        self.complex_dim = off
        self.real_dim = 2 * off

    def y_mask(self) -> np.ndarray:
        """Boolean mask (complex coordinates) of the y and b slots."""
        mask = np.zeros(self.complex_dim, dtype=bool)
        for kind, i, k, c, shape, off in self.slots:
            size = self.loop_dim if kind in "ab" else shape[0] * shape[1]
            if kind in ("y", "b"):
                mask[off:off + size] = True
        return mask

    def canonical_pairing(self) -> tuple[np.ndarray, np.ndarray]:
        """(partner, sign) over complex coordinates for the holomorphic bracket.

        x entry (p, q) pairs with y entry (q, p) of the same edge copy; loop
        coefficient k of a_j pairs with coefficient k of b_j.  ``sign`` is +1 on
        x/a coordinates and -1 on y/b coordinates.
        """
        partner = np.empty(self.complex_dim, dtype=int)
        sign = np.empty(self.complex_dim)
        offsets = {(kind, i, k, c): (shape, off) for kind, i, k, c, shape, off in self.slots}
        for kind, i, k, c, shape, off in self.slots:
            if kind == "x":
                (lo, hi), yoff = offsets[("y", i, k, c)]
                rows, cols = shape
                for p in range(rows):
                    for qq in range(cols):
                        xi, yi = off + p * cols + qq, yoff + qq * hi + p
                        partner[xi], partner[yi] = yi, xi
                        sign[xi], sign[yi] = 1.0, -1.0
            elif kind == "a":
                _, boff = offsets[("b", i, 0, 0)]
                for t in range(self.loop_dim):
                    partner[off + t], partner[boff + t] = boff + t, off + t
                    sign[off + t], sign[boff + t] = 1.0, -1.0
        return partner, sign

    def pack(self, rep: Representation) -> np.ndarray:
        """Complex coordinate vector (batch axes preserved in front)."""
        basis = trace_free_basis(self.quiver.r)
        parts = []
        for kind, i, k, c, shape, off in self.slots:
            if kind == "x":
                m = rep.x[i][k][c]
            elif kind == "y":
                m = rep.y[i][k][c]
            else:
                m = rep.a[i] if kind == "a" else rep.b[i]
                parts.append(np.einsum("...pq,kpq->...k", m, basis))
                continue
            if m.shape[-2:] != shape:
                raise ShapeMismatch(f"{kind}[{i}][{k}][{c}] has shape {m.shape[-2:]}, expected {shape}")
            parts.append(m.reshape(m.shape[:-2] + (shape[0] * shape[1],)))
        if not parts:
            return np.zeros(0, dtype=complex)
        batch = np.broadcast_shapes(*(p.shape[:-1] for p in parts))
        parts = [np.broadcast_to(p, batch + p.shape[-1:]) for p in parts]
        return np.concatenate(parts, axis=-1).astype(complex)

    def unpack(self, z: np.ndarray) -> Representation:
        z = np.asarray(z)
        if z.shape[-1] != self.complex_dim:
            raise ShapeMismatch(f"expected {self.complex_dim} complex coordinates, got {z.shape[-1]}")
        q = self.quiver
        batch = z.shape[:-1]
        basis = trace_free_basis(q.r)
        xs = [[[None] * mult[k] for k in range(len(arm) - 1)] for arm, mult in zip(q.arms, q.multiplicities)]
        ys = [[[None] * mult[k] for k in range(len(arm) - 1)] for arm, mult in zip(q.arms, q.multiplicities)]
        a = [None] * q.g
        b = [None] * q.g
        for kind, i, k, c, shape, off in self.slots:
            if kind in ("x", "y"):
                m = z[..., off:off + shape[0] * shape[1]].reshape(batch + shape)
                (xs if kind == "x" else ys)[i][k][c] = m
            else:
                coef = z[..., off:off + self.loop_dim]
                m = np.einsum("...k,kpq->...pq", coef, basis)
                (a if kind == "a" else b)[i] = m
        freeze = lambda nest: tuple(tuple(tuple(e) for e in arm) for arm in nest)  # noqa: E731
        return Representation(q, freeze(xs), freeze(ys), tuple(a), tuple(b))


_LAYOUTS: dict = {}


def layout(q: CometQuiver) -> Layout:
    key = (q.arms, q.loops, q.central_rank, q.multiplicities)
    if key not in _LAYOUTS:
        _LAYOUTS[key] = Layout(q)
    return _LAYOUTS[key]


def to_flat(rep: Representation) -> np.ndarray:
    """Real FlatCoordinates vector (re, im interleaved)."""
    z = np.ascontiguousarray(layout(rep.quiver).pack(rep))
    return z.view(float)


def from_flat(q: CometQuiver, flat: np.ndarray) -> Representation:
    flat = np.ascontiguousarray(flat, dtype=float)
    return layout(q).unpack(flat.view(complex))


def zero_representation(q: CometQuiver) -> Representation:
    return layout(q).unpack(np.zeros(layout(q).complex_dim, dtype=complex))


def random_representation(q: CometQuiver, seed=0, scale: float = 1.0) -> Representation:
    """I.i.d. complex Gaussian entries with E|z|^2 = scale^2; loops trace-free.

    ``seed`` may be an int, a SeedSequence or a Generator.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    s = scale / math.sqrt(2.0)

    def draw(shape):
        return s * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))

    xs, ys = [], []
    for arm, mult in zip(q.arms, q.multiplicities):
        ax, ay = [], []
        for k in range(len(arm) - 1):
            lo, hi = arm[k], arm[k + 1]
            ax.append(tuple(draw((hi, lo)) for _ in range(mult[k])))
            ay.append(tuple(draw((lo, hi)) for _ in range(mult[k])))
        xs.append(tuple(ax))
        ys.append(tuple(ay))
    a, b = [], []
    for _ in range(q.g):
        a.append(trace_free(draw((q.r, q.r))))
        b.append(trace_free(draw((q.r, q.r))))
    return Representation(q, tuple(xs), tuple(ys), tuple(a), tuple(b))


def check_representation(rep: Representation, atol: float = 1e-12) -> None:
    """Raise ShapeMismatch if shapes or loop traces are off."""
    q = rep.quiver
    if len(rep.x) != q.n or len(rep.y) != q.n or len(rep.a) != q.g or len(rep.b) != q.g:
        raise ShapeMismatch("slot counts do not match the quiver")
    for i, (arm, mult) in enumerate(zip(q.arms, q.multiplicities)):
        if len(rep.x[i]) != len(arm) - 1 or len(rep.y[i]) != len(arm) - 1:
            raise ShapeMismatch(f"arm {i} has the wrong number of edges")
        for k in range(len(arm) - 1):
            lo, hi = arm[k], arm[k + 1]
            if len(rep.x[i][k]) != mult[k] or len(rep.y[i][k]) != mult[k]:
                raise ShapeMismatch(f"arm {i} edge {k} has the wrong multiplicity")
            for m in rep.x[i][k]:
                if m.shape[-2:] != (hi, lo):
                    raise ShapeMismatch(f"x[{i}][{k}] shape {m.shape[-2:]} != {(hi, lo)}")
            for m in rep.y[i][k]:
                if m.shape[-2:] != (lo, hi):
                    raise ShapeMismatch(f"y[{i}][{k}] shape {m.shape[-2:]} != {(lo, hi)}")
    for m in rep.a + rep.b:
        if m.shape[-2:] != (q.r, q.r):
            raise ShapeMismatch("loop matrices must be r x r")
        if np.max(np.abs(np.trace(m, axis1=-2, axis2=-1)), initial=0.0) > atol:
            raise ShapeMismatch("loop matrices must be trace-free")


# ---------------------------------------------------------------------------
# gauge group


@dataclass(frozen=True, eq=False)
class GaugeElement:
    """One matrix per node: ``arms[i][k]`` for non-central node k of arm i,
    ``central`` for the centre.  Unitary/special-unitary unless complexified."""

    arms: tuple
    central: np.ndarray
    complexified: bool = False

    def inverse(self) -> "GaugeElement":
        inv = np.linalg.inv
        return GaugeElement(
            tuple(tuple(inv(u) for u in arm) for arm in self.arms), inv(self.central), self.complexified
        )

    def validate(self, q: CometQuiver, tol: float = 1e-10) -> None:
        if len(self.arms) != q.n:
            raise ShapeMismatch("gauge needs one factor list per arm")
        mats = []
        for arm, factors in zip(q.arms, self.arms):
            if len(factors) != len(arm) - 1:
                raise ShapeMismatch("gauge needs one factor per non-central node")
            for size, u in zip(arm.entries, factors):
                if u.shape != (size, size):
                    raise ShapeMismatch(f"gauge factor shape {u.shape} != {(size, size)}")
                mats.append(u)
        if self.central.shape != (q.r, q.r):
            raise ShapeMismatch("central gauge factor must be r x r")
        mats.append(self.central)
        for u in mats:
            if self.complexified:
                if abs(np.linalg.det(u)) < tol:
                    raise ShapeMismatch("gauge factor is not invertible")
            elif np.max(np.abs(u @ dag(u) - np.eye(u.shape[0]))) > tol:
                raise ShapeMismatch("gauge factor is not unitary")
        if abs(np.linalg.det(self.central) - 1.0) > tol:
            raise ShapeMismatch("central gauge factor must have determinant one")


def identity_gauge(q: CometQuiver) -> GaugeElement:
    return GaugeElement(
        tuple(tuple(np.eye(s, dtype=complex) for s in arm.entries[:-1]) for arm in q.arms),
        np.eye(q.r, dtype=complex),
    )


def _random_unitary(rng, n):
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2)
    qm, rm = np.linalg.qr(z)
    d = np.diag(rm)
    return qm * (d / np.abs(d))


def random_gauge(q: CometQuiver, seed=0, complexified: bool = False) -> GaugeElement:
    rng = np.random.default_rng(seed)

    def draw(n):
        if complexified:
            return np.eye(n) + 0.5 * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
        return _random_unitary(rng, n)

    arms = tuple(tuple(draw(s) for s in arm.entries[:-1]) for arm in q.arms)
    c = draw(q.r)
    c = c / np.linalg.det(c) ** (1.0 / q.r)
    return GaugeElement(arms, c, complexified)


def apply_gauge(rep: Representation, gauge: GaugeElement) -> Representation:
    """x -> g_head x g_tail^-1, y -> g_tail y g_head^-1, loops by central conjugation."""
    q = rep.quiver
    gauge.validate(q)
    inv = gauge.inverse()
    xs, ys = [], []
    for i, arm in enumerate(q.arms):
        nodes = list(gauge.arms[i]) + [gauge.central]
        inodes = list(inv.arms[i]) + [inv.central]
        xs.append(tuple(
            tuple(nodes[k + 1] @ m @ inodes[k] for m in rep.x[i][k]) for k in range(len(arm) - 1)
        ))
        ys.append(tuple(
            tuple(nodes[k] @ m @ inodes[k + 1] for m in rep.y[i][k]) for k in range(len(arm) - 1)
        ))
    g, gi = gauge.central, inv.central
    return Representation(
        q, tuple(xs), tuple(ys), tuple(g @ m @ gi for m in rep.a), tuple(g @ m @ gi for m in rep.b)
    )


# ---------------------------------------------------------------------------
# quaternionic structure and the circle action


def quaternion_apply(rep: Representation, which: str) -> Representation:
    """I: (ix, iy, ia, ib); J: (-y*, x*, -b*, a*); K: (-iy*, ix*, -ib*, ia*)."""
    which = which.upper()
    q = rep.quiver
    if which == "I":
        return rep.map_slots(*(lambda m: 1j * m,) * 4)
    if which == "J":
        sx, sy = -1.0, 1.0
    elif which == "K":
        sx, sy = -1j, 1j
    else:
        raise ValueError(f"unknown complex structure {which!r}")
    x = tuple(tuple(tuple(sx * dag(m) for m in e) for e in arm) for arm in rep.y)
    y = tuple(tuple(tuple(sy * dag(m) for m in e) for e in arm) for arm in rep.x)
    a = tuple(sx * dag(m) for m in rep.b)
    b = tuple(sy * dag(m) for m in rep.a)
    return Representation(q, x, y, a, b)


def _phase(theta: float) -> complex:
    # snap rounding noise so that theta = pi gives exactly -1
    c, s = math.cos(theta), math.sin(theta)
    tiny = 4 * np.finfo(float).eps
    if abs(s) < tiny:
        s = 0.0
    if abs(c) < tiny:
        c = 0.0
    return complex(c, s)


def circle_action(rep: Representation, theta: float) -> Representation:
    """[x, y, a, b] -> [x, e^{i theta} y, a, e^{i theta} b]."""
    w = _phase(theta)
    keep = lambda m: m  # noqa: E731
    turn = lambda m: w * m  # noqa: E731
    return rep.map_slots(keep, turn, keep, turn)


# ---------------------------------------------------------------------------
# infinitesimal gauge action


def unitary_algebra_basis(n: int, special: bool = False) -> list:
    """Anti-Hermitian basis of u(n) (or su(n)), orthogonal under Re tr(A B*)."""
    out = []
    for p in range(n):
        for q in range(p + 1, n):
            e = np.zeros((n, n), dtype=complex)
            e[p, q], e[q, p] = 1.0, -1.0
            out.append(e)
            e = np.zeros((n, n), dtype=complex)
            e[p, q], e[q, p] = 1j, 1j
            out.append(e)
    if special:
        out.extend(1j * d for d in trace_free_basis(n)[n * (n - 1):])
    else:
        for p in range(n):
            e = np.zeros((n, n), dtype=complex)
            e[p, p] = 1j
            out.append(e)
    return out


def infinitesimal_action(rep: Representation, node_xi: dict) -> Representation:
    """Tangent vector of the gauge action for Lie algebra element ``node_xi``.

    ``node_xi`` maps ("arm", i, k) or ("centre",) to a matrix; missing nodes are 0.
    """
    q = rep.quiver

    def xi_at(i, k, size):
        key = ("centre",) if k == len(q.arms[i]) - 1 else ("arm", i, k)
        return node_xi.get(key, np.zeros((size, size), dtype=complex))

    xs, ys = [], []
    for i, arm in enumerate(q.arms):
        ex, ey = [], []
        for k in range(len(arm) - 1):
            tail = xi_at(i, k, arm[k])
            head = xi_at(i, k + 1, arm[k + 1])
            ex.append(tuple(head @ m - m @ tail for m in rep.x[i][k]))
            ey.append(tuple(tail @ m - m @ head for m in rep.y[i][k]))
        xs.append(tuple(ex))
        ys.append(tuple(ey))
    c = node_xi.get(("centre",), np.zeros((q.r, q.r), dtype=complex))
    return Representation(q, tuple(xs), tuple(ys), tuple(comm(c, m) for m in rep.a),
                          tuple(comm(c, m) for m in rep.b))


def gauge_algebra_basis(q: CometQuiver) -> list:
    """List of ``node_xi`` dicts spanning the compact gauge Lie algebra."""
    out = []
    for i, arm in enumerate(q.arms):
        for k, size in enumerate(arm.entries[:-1]):
            for e in unitary_algebra_basis(size):
                out.append({("arm", i, k): e})
    for e in unitary_algebra_basis(q.r, special=True):
        out.append({("centre",): e})
    return out


def gauge_orbit_tangent_basis(q: CometQuiver, rep: Representation) -> np.ndarray:
    """Rows are FlatCoordinates of the orbit tangent images of a Lie algebra basis."""
    basis = gauge_algebra_basis(q)
    if not basis:
        return np.zeros((0, layout(q).real_dim))
    return np.array([to_flat(infinitesimal_action(rep, xi)) for xi in basis])


__all__ = [
    "Representation",
    "Layout",
    "layout",
    "to_flat",
    "from_flat",
    "zero_representation",
    "random_representation",
    "check_representation",
    "GaugeElement",
    "identity_gauge",
    "random_gauge",
    "apply_gauge",
    "quaternion_apply",
    "circle_action",
    "gauge_orbit_tangent_basis",
    "infinitesimal_action",
    "gauge_algebra_basis",
    "unitary_algebra_basis",
]
