"""Comet-shaped quivers: flag strings, dimension counts and arm merging.

A comet quiver is a star of A-type arms meeting at a central node of rank
``r``, with ``g`` loops attached at the centre.  Each arm is described by a
strictly increasing flag string ``(r_1, ..., r_m)`` whose last entry is the
central rank.  Arrows point towards the centre.
"""

from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass, field
from typing import Sequence

from .errors import (
    EmptyLikely,
    InvalidFlag,
    MismatchedCentralRank,
    NonIdenticalArms,
    UnsupportedFlagType,
)


@dataclass(frozen=True)
class FlagString:
    entries: tuple[int, ...]

    def __post_init__(self):
        entries = tuple(int(e) for e in self.entries)
        object.__setattr__(self, "entries", entries)
        if not entries:
            raise InvalidFlag("flag string must be nonempty")
        if entries[0] < 1:
            raise InvalidFlag(f"flag entries must be positive: {entries}")
        if any(b <= a for a, b in zip(entries, entries[1:])):
            raise InvalidFlag(f"flag entries must be strictly increasing: {entries}")

    @property
    def rank(self) -> int:
        return self.entries[-1]

    @property
    def length(self) -> int:
        return len(self.entries)

    @property
    def is_complete(self) -> bool:
        return self.entries == tuple(range(1, self.rank + 1))

    @property
    def is_minimal(self) -> bool:
        return self.entries == (1, self.rank)

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, k):
        return self.entries[k]


@dataclass(frozen=True)
class CometQuiver:
    """Validated comet quiver.

    ``multiplicities[i][k]`` is the number of parallel arrows between nodes
    ``k`` and ``k + 1`` of arm ``i`` (0-based, node 0 is the outer end).
    """

    arms: tuple[FlagString, ...]
    loops: int
    central_rank: int
    multiplicities: tuple[tuple[int, ...], ...] = field(default=())

    def __post_init__(self):
        if self.loops < 0:
            raise InvalidFlag(f"loop count must be nonnegative, got {self.loops}")
        if self.central_rank < 1:
            raise InvalidFlag("central rank must be positive")
        if len(self.arms) + self.loops < 1:
            raise InvalidFlag("a comet needs at least one arm or loop")
        for arm in self.arms:
            if arm.rank != self.central_rank:
                raise MismatchedCentralRank(
                    f"arm {arm.entries} ends at {arm.rank}, central rank is {self.central_rank}"
                )
        mult = self.multiplicities
        if not mult:
            mult = tuple((1,) * (len(arm) - 1) for arm in self.arms)
        mult = tuple(tuple(int(c) for c in row) for row in mult)
        if len(mult) != len(self.arms):
            raise InvalidFlag("one multiplicity row per arm is required")
        for arm, row in zip(self.arms, mult):
            if len(row) != len(arm) - 1:
                raise InvalidFlag(
                    f"arm {arm.entries} needs {len(arm) - 1} multiplicities, got {len(row)}"
                )
            if any(c < 1 for c in row):
                raise InvalidFlag("multiplicities must be positive")
        object.__setattr__(self, "multiplicities", mult)

    @property
    def n(self) -> int:
        return len(self.arms)

    @property
    def g(self) -> int:
        return self.loops

    @property
    def r(self) -> int:
        return self.central_rank

    @property
    def is_tame(self) -> bool:
        return all(c == 1 for row in self.multiplicities for c in row)

    def edge_count(self) -> int:
        """Total number of x arrows, counting parallel copies."""
        return sum(sum(row) for row in self.multiplicities)

    def to_dict(self) -> dict:
        doc = {"arms": [list(a.entries) for a in self.arms], "loops": self.loops}
        if not self.is_tame:
            doc["multiplicities"] = [list(row) for row in self.multiplicities]
        if not self.arms:
            doc["central_rank"] = self.r
        return doc

    def digest(self) -> str:
        """Stable sha256 of the canonical quiver document."""
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()


def build_comet(
    arms: Sequence[Sequence[int]],
    g: int = 0,
    multiplicities: Sequence[Sequence[int]] | None = None,
    central_rank: int | None = None,
) -> CometQuiver:
    """Build a validated comet quiver from raw flag lists.

    ``central_rank`` is only needed when there are no arms.
    """
    flags = tuple(FlagString(tuple(a)) for a in arms)
    ranks = {f.rank for f in flags}
    if len(ranks) > 1:
        raise MismatchedCentralRank(f"arms end at different ranks: {sorted(ranks)}")
    if flags:
        r = flags[0].rank
        if central_rank is not None and central_rank != r:
            raise MismatchedCentralRank(f"central_rank={central_rank} but arms end at {r}")
    elif central_rank is None:
        raise InvalidFlag("central_rank is required for a comet without arms")
    else:
        r = int(central_rank)
    mult = tuple(tuple(row) for row in multiplicities) if multiplicities is not None else ()
    return CometQuiver(arms=flags, loops=int(g), central_rank=r, multiplicities=mult)


def complete_comet(r: int, n: int, g: int = 0) -> CometQuiver:
    return build_comet([list(range(1, r + 1))] * n, g, central_rank=r)


def minimal_comet(r: int, n: int, g: int = 0) -> CometQuiver:
    return build_comet([[1, r]] * n, g, central_rank=r)


def flag_dim(flag: FlagString | Sequence[int]) -> int:
    if not isinstance(flag, FlagString):
        flag = FlagString(tuple(flag))
    e = flag.entries
    return sum(e[i] * (e[i + 1] - e[i]) for i in range(len(e) - 1))


def dim_polygon_space(q: CometQuiver, warn: bool = True) -> int:
    """Complex dimension sum(f_i) + (g - 1)(r^2 - 1); may be negative."""
    d = sum(flag_dim(a) for a in q.arms) + (q.g - 1) * (q.r**2 - 1)
    if d < 0 and warn:
        warnings.warn(f"predicted dimension {d} < 0", EmptyLikely, stacklevel=2)
    return d


def dim_hyperpolygon_space(q: CometQuiver, warn: bool = True) -> int:
    return 2 * dim_polygon_space(q, warn=warn)


def count_gt_hamiltonians(q: CometQuiver) -> int:
    r = q.r
    c = 0
    for arm in q.arms:
        # r = 2 arms are both complete and minimal; count them as complete
        if arm.is_complete:
            c += 1
        elif not arm.is_minimal:
            raise UnsupportedFlagType(f"arm {arm.entries} is neither complete nor minimal")
    return c * r * (r - 1) // 2 + (q.n - c) * (r - 1) + (q.g - 1) * (r**2 - 1)


def wildify(q: CometQuiver) -> CometQuiver:
    """Merge identical arms into one arm with n-fold arrows."""
    if not q.is_tame:
        raise NonIdenticalArms("wildify expects a tame comet")
    if q.n == 0:
        return q
    first = q.arms[0]
    if any(a != first for a in q.arms):
        raise NonIdenticalArms("all arms must share one flag string")
    mult = ((q.n,) * (len(first) - 1),)
    return CometQuiver(arms=(first,), loops=q.g, central_rank=q.r, multiplicities=mult)


_QUIVER_KEYS = {"arms", "loops", "multiplicities", "central_rank"}


def quiver_from_dict(doc: dict) -> CometQuiver:
    unknown = set(doc) - _QUIVER_KEYS
    if unknown:
        raise InvalidFlag(f"unknown quiver fields: {sorted(unknown)}")
    if "arms" not in doc:
        raise InvalidFlag("quiver document needs 'arms'")
    return build_comet(
        doc["arms"],
        int(doc.get("loops", 0)),
        doc.get("multiplicities"),
        doc.get("central_rank"),
    )
