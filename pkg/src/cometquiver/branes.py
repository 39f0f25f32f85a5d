"""The sign involution [x, y, a, b] -> [x, -y, a, -b] and its brane type."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import Inconclusive
from .quiver import CometQuiver
from .rep import Representation, layout, quaternion_apply, random_representation

DEFECT_TOL = 1e-12
STRUCTURES = ("I", "J", "K")


def sign_involution(rep: Representation) -> Representation:
    neg = np.negative
    return rep.map_slots(lambda m: m, neg, lambda m: m, neg)


def _flat(q: CometQuiver, rep: Representation) -> np.ndarray:
    return layout(q).pack(rep)


@dataclass
class BraneReport:
    classification: dict
    commutator_defects: dict
    anticommutator_defects: dict
    samples: int
    seed: int

    @property
    def signature(self) -> tuple:
        return tuple(self.classification[s] for s in STRUCTURES)

    def to_dict(self) -> dict:
        return {
            "classification": dict(self.classification),
            "signature": "".join(self.signature),
            "commutator_defects": dict(self.commutator_defects),
            "anticommutator_defects": dict(self.anticommutator_defects),
            "samples": self.samples,
            "seed": self.seed,
        }


def involution_type_report(q: CometQuiver, samples: int = 100, seed: int = 0, tol: float = DEFECT_TOL) -> BraneReport:
    """Classify the involution against I, J, K over random representations.

    Defects are relative: ||S(I-(v)) -/+ I-(S(v))|| / ||v||, maximised over
    the sample.  "B" means the commutator vanishes, "A" the anti-commutator.
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    comm = {s: 0.0 for s in STRUCTURES}
    anti = {s: 0.0 for s in STRUCTURES}
    for child in np.random.SeedSequence(seed).spawn(samples):
        rep = random_representation(q, child)
        scale = max(np.linalg.norm(_flat(q, rep)), np.finfo(float).tiny)
        flipped = sign_involution(rep)
        for s in STRUCTURES:
            lhs = _flat(q, quaternion_apply(flipped, s))
            rhs = _flat(q, sign_involution(quaternion_apply(rep, s)))
            comm[s] = max(comm[s], float(np.linalg.norm(lhs - rhs)) / scale)
            anti[s] = max(anti[s], float(np.linalg.norm(lhs + rhs)) / scale)
    classification = {}
    for s in STRUCTURES:
        if comm[s] < tol:
            classification[s] = "B"
        elif anti[s] < tol:
            classification[s] = "A"
        else:
            raise Inconclusive(f"structure {s}: commutator {comm[s]:.3e}, anti-commutator {anti[s]:.3e}")
    return BraneReport(classification, comm, anti, samples, seed)


def fixed_locus_check(rep: Representation, tol: float = 1e-12) -> bool:
    """True iff every y and b slot has Frobenius norm below ``tol``."""
    norms = rep.norms()
    return norms["y"] < tol and norms["b"] < tol
