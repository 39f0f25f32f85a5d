"""Real and complex moment maps and the hyperpolygon residual.

Two independent routes are kept on purpose.  :func:`real_moment` and
:func:`complex_moment` follow the node-by-node calculus for an arbitrary
comet (incoming minus outgoing contributions, trace removed at the centre).
:func:`hyperpolygon_blocks` transcribes the six hyperpolygon equations
directly.  Tests compare the two.

Sign convention: at the outer (terminal) node of every arm both moment maps
are negated, so the terminal real moment is ``|x_1|^2 - |y_1|^2`` and the level
``alpha_i`` is positive.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from ._linalg import comm, dag, trace_free
from .errors import ArmNotBased, LengthMismatch, NonGeneric, NonIdenticalArms, ShapeMismatch
from .quiver import CometQuiver, wildify
from .rep import Representation, check_representation


@dataclass(frozen=True, eq=False)
class MomentValue:
    """Moment-map value: ``arms[i][k]`` at non-central node k of arm i, plus ``central``."""

    kind: str  # "real" or "complex"
    arms: tuple
    central: np.ndarray

    def blocks(self):
        for i, arm in enumerate(self.arms):
            for k, m in enumerate(arm):
                yield (i, k), m
        yield ("centre",), self.central

    def norm(self) -> float:
        return math.sqrt(sum(float(np.sum(np.abs(m) ** 2)) for _, m in self.blocks()))


def _check(q: CometQuiver, rep: Representation) -> None:
    if rep.quiver != q:
        raise ShapeMismatch("representation belongs to a different quiver")
    check_representation(rep, atol=1e-10)


def _edge_sum(f, xs, ys):
    out = f(xs[0], ys[0])
    for x, y in zip(xs[1:], ys[1:]):
        out = out + f(x, y)
    return out


def _node_moments(q: CometQuiver, rep: Representation, incoming, outgoing, central_loop):
    arms = []
    central = 0
    for i, arm in enumerate(q.arms):
        vals = []
        m = len(arm)
        for k in range(m - 1):
            val = -_edge_sum(outgoing, rep.x[i][k], rep.y[i][k])
            if k > 0:
                val = _edge_sum(incoming, rep.x[i][k - 1], rep.y[i][k - 1]) + val
            else:
                val = -val  # terminal node: sign flipped
            vals.append(val)
        arms.append(tuple(vals))
        central = central + _edge_sum(incoming, rep.x[i][m - 2], rep.y[i][m - 2])
    if q.n:
        central = trace_free(central)
    else:
        central = np.zeros(rep.a[0].shape[:-2] + (q.r, q.r), dtype=complex)
    for a, b in zip(rep.a, rep.b):
        central = central + central_loop(a, b)
    return tuple(arms), central


def real_moment(q: CometQuiver, rep: Representation) -> MomentValue:
    _check(q, rep)
    arms, central = _node_moments(
        q,
        rep,
        lambda x, y: x @ dag(x) - dag(y) @ y,
        lambda x, y: dag(x) @ x - y @ dag(y),
        lambda a, b: comm(a, dag(a)) + comm(b, dag(b)),
    )
    return MomentValue("real", arms, central)


def complex_moment(q: CometQuiver, rep: Representation) -> MomentValue:
    _check(q, rep)
    arms, central = _node_moments(
        q,
        rep,
        lambda x, y: x @ y,
        lambda x, y: y @ x,
        lambda a, b: comm(a, b),
    )
    return MomentValue("complex", arms, central)


# ---------------------------------------------------------------------------
# hyperpolygon equations


EQUATIONS = ("eq_i", "eq_ii", "eq_iii", "eq_I", "eq_II", "eq_III")


def _validate_level(q: CometQuiver, alpha) -> np.ndarray:
    alpha = np.asarray(alpha, dtype=float).reshape(-1)
    if alpha.size != q.n:
        raise LengthMismatch(f"alpha has {alpha.size} entries, quiver has {q.n} arms")
    for arm in q.arms:
        if arm[0] != 1:
            raise ArmNotBased(f"arm {arm.entries} does not start at rank 1")
    if np.any(alpha <= 0):
        warnings.warn("alpha has non-positive entries", NonGeneric, stacklevel=3)
    return alpha


def hyperpolygon_blocks(q: CometQuiver, rep: Representation, alpha) -> list:
    """Residual blocks of the six hyperpolygon equations, in a fixed order.

    Returns a list of ``(equation, index, matrix)``.  Equations (ii) and (II)
    are imposed at every node strictly between the outer node and the centre.
    """
    x, y, a, b = rep.x, rep.y, rep.a, rep.b
    out = []

    def s(f, xs, ys):
        return _edge_sum(f, xs, ys)

    # (i)
    if q.n:
        eq = trace_free(sum(s(lambda u, v: u @ dag(u) - dag(v) @ v, x[i][-1], y[i][-1]) for i in range(q.n)))
    else:
        eq = np.zeros(a[0].shape[:-2] + (q.r, q.r), dtype=complex)
    for j in range(q.g):
        eq = eq + (a[j] @ dag(a[j]) - dag(a[j]) @ a[j]) + (b[j] @ dag(b[j]) - dag(b[j]) @ b[j])
    out.append(("eq_i", (), eq))
    # (ii)
    for i, arm in enumerate(q.arms):
        for k in range(1, len(arm) - 1):
            eq = (
                s(lambda u, v: u @ dag(u), x[i][k - 1], y[i][k - 1])
                + s(lambda u, v: v @ dag(v), x[i][k], y[i][k])
                - s(lambda u, v: dag(u) @ u, x[i][k], y[i][k])
                - s(lambda u, v: dag(v) @ v, x[i][k - 1], y[i][k - 1])
            )
            out.append(("eq_ii", (i, k), eq))
    # (iii)
    for i in range(q.n):
        eq = s(lambda u, v: dag(u) @ u - v @ dag(v), x[i][0], y[i][0]) - alpha[i]
        out.append(("eq_iii", (i,), eq))
    # (I)
    if q.n:
        eq = trace_free(sum(s(lambda u, v: u @ v, x[i][-1], y[i][-1]) for i in range(q.n)))
    else:
        eq = np.zeros(a[0].shape[:-2] + (q.r, q.r), dtype=complex)
    for j in range(q.g):
        eq = eq + (a[j] @ b[j] - b[j] @ a[j])
    out.append(("eq_I", (), eq))
    # (II)
    for i, arm in enumerate(q.arms):
        for k in range(1, len(arm) - 1):
            eq = s(lambda u, v: u @ v, x[i][k - 1], y[i][k - 1]) - s(lambda u, v: v @ u, x[i][k], y[i][k])
            out.append(("eq_II", (i, k), eq))
    # (III)
    for i in range(q.n):
        out.append(("eq_III", (i,), s(lambda u, v: v @ u, x[i][0], y[i][0])))
    return out


def moment_assembly_blocks(q: CometQuiver, rep: Representation, alpha) -> list:
    """The same blocks as :func:`hyperpolygon_blocks`, built from the general moment maps."""
    alpha = np.asarray(alpha, dtype=float)
    mu = real_moment(q, rep)
    nu = complex_moment(q, rep)
    out = [("eq_i", (), mu.central)]
    for i, arm in enumerate(q.arms):
        for k in range(1, len(arm) - 1):
            out.append(("eq_ii", (i, k), mu.arms[i][k]))
    for i in range(q.n):
        out.append(("eq_iii", (i,), mu.arms[i][0] - alpha[i]))
    out.append(("eq_I", (), nu.central))
    for i, arm in enumerate(q.arms):
        for k in range(1, len(arm) - 1):
            out.append(("eq_II", (i, k), nu.arms[i][k]))
    for i in range(q.n):
        out.append(("eq_III", (i,), nu.arms[i][0]))
    return out


def blocks_to_vector(blocks: list) -> np.ndarray:
    """Concatenate residual blocks into a real vector (re, im of every entry)."""
    parts = [np.asarray(m, dtype=complex) for _, _, m in blocks]
    batch = np.broadcast_shapes(*(p.shape[:-2] for p in parts))
    flat = [np.broadcast_to(p, batch + p.shape[-2:]).reshape(batch + (-1,)) for p in parts]
    z = np.ascontiguousarray(np.concatenate(flat, axis=-1))
    return z.view(float)


def residual_vector(q: CometQuiver, rep: Representation, alpha) -> np.ndarray:
    """Flattened real residual of the hyperpolygon equations (broadcasts over batches)."""
    return blocks_to_vector(hyperpolygon_blocks(q, rep, np.asarray(alpha, dtype=float)))


@dataclass
class ResidualReport:
    """Per-equation Frobenius residual norms and their aggregate."""

    eq_i: float
    eq_ii: list
    eq_iii: list
    eq_I: float
    eq_II: list
    eq_III: list
    aggregate: float
    terminal_defects: list = field(default_factory=list)
    interior_nodes: int = 0
    interior_nodes_short_range: int = 0
    advisories: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "eq_i": self.eq_i,
            "eq_ii": self.eq_ii,
            "eq_iii": self.eq_iii,
            "eq_I": self.eq_I,
            "eq_II": self.eq_II,
            "eq_III": self.eq_III,
            "aggregate": self.aggregate,
            "terminal_defects": self.terminal_defects,
            "interior_nodes": self.interior_nodes,
            "interior_nodes_short_range": self.interior_nodes_short_range,
            "advisories": list(self.advisories),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ResidualReport":
        return cls(**{k: doc[k] for k in cls.__dataclass_fields__ if k in doc})


def _report(q: CometQuiver, blocks: list, advisories: list) -> ResidualReport:
    def nrm(m):
        return float(np.linalg.norm(np.asarray(m).ravel()))

    per = {e: [] for e in EQUATIONS}
    for name, idx, m in blocks:
        per[name].append((idx, m))
    eq_ii = [[0.0] * (len(arm) - 2) for arm in q.arms]
    eq_II = [[0.0] * (len(arm) - 2) for arm in q.arms]
    for (i, k), m in per["eq_ii"]:
        eq_ii[i][k - 1] = nrm(m)
    for (i, k), m in per["eq_II"]:
        eq_II[i][k - 1] = nrm(m)
    terminal = [float(np.real(m).ravel()[0]) for _, m in per["eq_iii"]]
    eq_iii = [nrm(m) for _, m in per["eq_iii"]]
    eq_III = [nrm(m) for _, m in per["eq_III"]]
    eq_i = nrm(per["eq_i"][0][1])
    eq_I = nrm(per["eq_I"][0][1])
    total = eq_i**2 + eq_I**2 + sum(v**2 for v in eq_iii + eq_III)
    total += sum(v**2 for row in eq_ii + eq_II for v in row)
    interior = sum(max(len(arm) - 2, 0) for arm in q.arms)
    # the shorter node range k = 2..m-2 skips the node next to the centre
    short = sum(max(len(arm) - 3, 0) for arm in q.arms)
    return ResidualReport(
        eq_i=eq_i,
        eq_ii=eq_ii,
        eq_iii=eq_iii,
        eq_I=eq_I,
        eq_II=eq_II,
        eq_III=eq_III,
        aggregate=math.sqrt(total),
        terminal_defects=terminal,
        interior_nodes=interior,
        interior_nodes_short_range=short,
        advisories=advisories,
    )


def hyperpolygon_residual(q: CometQuiver, rep: Representation, alpha) -> ResidualReport:
    _check(q, rep)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        alpha = _validate_level(q, alpha)
    advisories = ["NonGeneric"] if any(issubclass(w.category, NonGeneric) for w in caught) else []
    return _report(q, hyperpolygon_blocks(q, rep, alpha), advisories)


def infer_alpha(q: CometQuiver, rep: Representation) -> np.ndarray:
    """Terminal real-moment values |x_1|^2 - |y_1|^2 (the level the point sits at)."""
    mu = real_moment(q, rep)
    return np.array([float(np.real(mu.arms[i][0]).ravel()[0]) for i in range(q.n)])


def wild_representation(q_tame: CometQuiver, rep: Representation) -> Representation:
    """Reinterpret a tame representation with identical arms on the merged wild comet."""
    q_wild = wildify(q_tame)
    if q_tame.n == 0:
        return rep
    m = len(q_tame.arms[0])
    x = ((tuple(tuple(rep.x[c][k][0] for c in range(q_tame.n)) for k in range(m - 1))),)
    y = ((tuple(tuple(rep.y[c][k][0] for c in range(q_tame.n)) for k in range(m - 1))),)
    return Representation(q_wild, x, y, rep.a, rep.b)


def wild_specialization_check(q_tame: CometQuiver, rep: Representation, alpha) -> ResidualReport:
    """Residual of the tame point viewed on the wild comet at merged level sum(alpha)."""
    if any(arm != q_tame.arms[0] for arm in q_tame.arms):
        raise NonIdenticalArms("tame comet must have identical arms")
    alpha = np.asarray(alpha, dtype=float)
    if alpha.size != q_tame.n:
        raise LengthMismatch("alpha must have one entry per tame arm")
    q_wild = wildify(q_tame)
    return hyperpolygon_residual(q_wild, wild_representation(q_tame, rep), [float(np.sum(alpha))])
