"""Extremal problems over subsets: r_k, R(delta), annealing, convex envelope.

Exact routines return the lexicographically least witness among optimal
sets, comparing sorted member ranks (so ``{0, 1}`` precedes ``{0, 2}``).
"""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import BudgetExceeded, DegenerateWarning
from .groups import SubsetMask
from .hp import HPSpec, hp_size, member_ranks

EXHAUSTIVE_LIMIT = 32
BRANCH_LIMIT = 128
R_EXACT_LIMIT = 25


def cardinality_for(delta, size: int) -> int:
    """Smallest cardinality ``c`` with ``c >= delta * size``."""
    d = Fraction(delta) if not isinstance(delta, float) else Fraction(delta).limit_denominator(10**9)
    if not 0 <= d <= 1:
        raise ValueError(f"delta={delta} outside [0, 1]")
    return math.ceil(d * size)


def _forbidden_masks(hp: HPSpec) -> list[int]:
    """Distinct-entry bitmasks of the non-constant member tuples."""
    rows = member_ranks(hp)
    nonconst = rows[np.any(rows != rows[:, :1], axis=1)]
    masks = {sum(1 << int(r) for r in set(row.tolist())) for row in nonconst}
    return sorted(masks)


def _warn_degenerate(hp: HPSpec) -> None:
    if hp.k < 3:
        warnings.warn(
            f"k={hp.k}: the progression-free problem is degenerate below k=3",
            DegenerateWarning, stacklevel=3)


def _mask_to_subset(hp: HPSpec, mask: int) -> SubsetMask:
    return SubsetMask.from_ranks(hp.spec, (i for i in range(hp.spec.size) if mask >> i & 1))


def _branch_and_bound(size: int, forbidden: Sequence[int]) -> int:
    by_top: list[list[int]] = [[] for _ in range(size)]
    for F in forbidden:
        by_top[F.bit_length() - 1].append(F)
    best_mask, best_size = 0, -1

    def dfs(x: int, mask: int, count: int) -> None:
        nonlocal best_mask, best_size
        if count + (size - x) <= best_size:
            return
        if x == size:
            best_mask, best_size = mask, count
            return
        with_x = mask | (1 << x)
        if all(F & with_x != F for F in by_top[x]):
            dfs(x + 1, with_x, count + 1)
        dfs(x + 1, mask, count)

    dfs(0, 0, 0)
    return best_mask


def _exhaustive(size: int, forbidden: Sequence[int]) -> int:
    for c in range(size, -1, -1):
        for combo in itertools.combinations(range(size), c):
            mask = sum(1 << i for i in combo)
            if all(F & mask != F for F in forbidden):
                return mask
    return 0


def r_k_exact(hp: HPSpec, method: str = "branch") -> tuple[Fraction, SubsetMask]:
    """Largest density of a set with no non-trivial member tuple in ``A^k``.

    ``method="branch"`` runs an include-first depth-first search with a
    cardinality bound (|U| <= 128); ``method="exhaustive"`` scans
    combinations from the largest cardinality down (|U| <= 32).  Both return
    the same lexicographically least witness.
    """
    size = hp.spec.size
    _warn_degenerate(hp)
    if method == "branch":
        if size > BRANCH_LIMIT:
            raise BudgetExceeded(f"|U|={size} beyond the exact range {BRANCH_LIMIT}")
        mask = _branch_and_bound(size, _forbidden_masks(hp))
    elif method == "exhaustive":
        if size > EXHAUSTIVE_LIMIT:
            raise BudgetExceeded(f"|U|={size} beyond the exhaustive range {EXHAUSTIVE_LIMIT}")
        mask = _exhaustive(size, _forbidden_masks(hp))
    else:
        raise ValueError(f"unknown method {method!r}")
    witness = _mask_to_subset(hp, mask)
    return Fraction(witness.cardinality, size), witness


def _weighted_param_masks(hp: HPSpec) -> tuple[np.ndarray, np.ndarray]:
    rows = member_ranks(hp)
    bits = np.left_shift(np.uint64(1), rows.astype(np.uint64))
    masks = np.bitwise_or.reduce(bits, axis=1)
    return np.unique(masks, return_counts=True)


def R_exact(hp: HPSpec, delta, chunk: int = 1 << 15) -> tuple[Fraction, SubsetMask]:
    """Exact minimum of ``S^k(1_A)`` over ``|A| >= delta |U|`` at fixed dims.

    Only the minimal cardinality is scanned: adding points never lowers the
    count.
    """
    size = hp.spec.size
    if size > R_EXACT_LIMIT:
        raise BudgetExceeded(f"|U|={size} beyond the exact range {R_EXACT_LIMIT}")
    c = cardinality_for(delta, size)
    total = hp_size(hp)
    masks, counts = _weighted_param_masks(hp)
    best_count, best_combo = None, None
    combos = itertools.combinations(range(size), c)
    weights = np.uint64(1) << np.arange(size, dtype=np.uint64)
    while True:
        block = list(itertools.islice(combos, chunk))
        if not block:
            break
        idx = np.array(block, dtype=np.int64).reshape(len(block), c)
        sets = weights[idx].sum(axis=1, dtype=np.uint64) if c else np.zeros(len(block), np.uint64)
        inside = (sets[:, None] & masks[None, :]) == masks[None, :]
        scores = inside.astype(np.int64) @ counts
        j = int(np.argmin(scores))
        if best_count is None or scores[j] < best_count:
            best_count, best_combo = int(scores[j]), block[j]
    witness = SubsetMask.from_ranks(hp.spec, best_combo)
    return Fraction(best_count, total), witness


@dataclass(frozen=True)
class SearchConfig:
    """Annealing parameters; temperatures are in units of tuple counts."""

    seed: int = 0
    chains: int = 4
    steps: int = 20000
    t_initial: float = 2.0
    t_final: float = 0.02
    move: str = "swap"

    def __post_init__(self):
        if self.steps < 1 or self.chains < 1:
            raise ValueError("steps and chains must be positive")
        if not (self.t_initial > 0 and self.t_final > 0):
            raise ValueError("temperatures must be positive")
        if self.t_final > self.t_initial:
            raise ValueError("temperature schedule must be nonincreasing")
        if self.move not in ("swap", "toggle-with-repair"):
            raise ValueError(f"unknown move {self.move!r}")

    def to_json(self) -> dict:
        return {"seed": self.seed, "chains": self.chains, "steps": self.steps,
                "t_initial": self.t_initial, "t_final": self.t_final,
                "move": self.move}

    @classmethod
    def from_json(cls, obj: dict) -> "SearchConfig":
        return cls(**{k: obj[k] for k in
                      ("seed", "chains", "steps", "t_initial", "t_final", "move")
                      if k in obj})


class _IncidenceState:
    """Set membership plus the number of member tuples inside the set."""

    def __init__(self, rows: np.ndarray, size: int, members: np.ndarray):
        self.rows = rows
        self.size = size
        # tuples through x, each parameter listed once even if x repeats
        flat = rows.ravel()
        owner = np.repeat(np.arange(rows.shape[0]), rows.shape[1])
        pairs = np.unique(np.stack([flat, owner], axis=1), axis=0)
        bounds = np.searchsorted(pairs[:, 0], np.arange(size + 1))
        self.incident = [pairs[bounds[x]:bounds[x + 1], 1] for x in range(size)]
        self.inside = np.zeros(size, dtype=bool)
        self.inside[members] = True
        self.count = int(np.count_nonzero(self.inside[rows].all(axis=1)))

    def local(self, x: int) -> int:
        """Tuples through ``x`` fully inside the set, counting ``x`` as present."""
        was = self.inside[x]
        self.inside[x] = True
        val = int(np.count_nonzero(self.inside[self.rows[self.incident[x]]].all(axis=1)))
        self.inside[x] = was
        return val

    def remove(self, x: int) -> None:
        self.count -= self.local(x)
        self.inside[x] = False

    def insert(self, x: int) -> None:
        self.count += self.local(x)
        self.inside[x] = True


def _anneal_chain(rows, size, c, cfg: SearchConfig, rng: np.random.Generator):
    start = np.sort(rng.choice(size, size=c, replace=False))
    st = _IncidenceState(rows, size, start)
    best_count, best_bits = st.count, st.inside.copy()
    ratio = cfg.t_final / cfg.t_initial
    for step in range(cfg.steps):
        temp = cfg.t_initial * ratio ** (step / max(1, cfg.steps - 1))
        before = st.count
        if cfg.move == "swap":
            out = int(rng.choice(np.flatnonzero(st.inside)))
            inn = int(rng.choice(np.flatnonzero(~st.inside)))
        else:
            x = int(rng.integers(size))
            if st.inside[x]:
                out = x
                others = np.flatnonzero(~st.inside)
                st.remove(out)
                gains = [st.local(int(y)) for y in others]
                inn = int(others[int(np.argmin(gains))])
                st.inside[out] = True
                st.count = before
            else:
                inn = x
                others = np.flatnonzero(st.inside)
                losses = [st.local(int(y)) for y in others]
                out = int(others[int(np.argmax(losses))])
        st.remove(out)
        st.insert(inn)
        delta = st.count - before
        if delta > 0 and rng.random() >= math.exp(-delta / temp):
            st.remove(inn)
            st.insert(out)
            continue
        if st.count < best_count:
            best_count, best_bits = st.count, st.inside.copy()
    return best_count, best_bits


def d_hp_search(hp: HPSpec, delta, cfg: SearchConfig = SearchConfig()
                ) -> tuple[Fraction, SubsetMask]:
    """Heuristic upper bound on ``min S^k(1_A)`` over ``|A| = ceil(delta |U|)``.

    Runs ``cfg.chains`` independent annealing chains with cardinality
    preserving moves; chain ``i`` uses the ``i``-th child of
    ``SeedSequence(cfg.seed)``.  Ties between chains go to the lowest index.
    """
    size = hp.spec.size
    c = cardinality_for(delta, size)
    total = hp_size(hp)
    rows = member_ranks(hp)
    if c in (0, size):
        bits = np.zeros(size, bool) if c == 0 else np.ones(size, bool)
        A = SubsetMask(hp.spec, bits)
        return Fraction(total if c else 0, total), A
    best = None
    for child in np.random.SeedSequence(cfg.seed).spawn(cfg.chains):
        count, bits = _anneal_chain(rows, size, c, cfg, np.random.default_rng(child))
        if best is None or count < best[0]:
            best = (count, bits)
    return Fraction(best[0], total), SubsetMask(hp.spec, best[1])


@dataclass(frozen=True)
class EnvelopePoints:
    """Samples ``(delta, value)`` with a provenance tag per point."""

    deltas: tuple[float, ...]
    values: tuple[float, ...]
    provenance: tuple[str, ...] = field(default=())

    def __post_init__(self):
        d = tuple(float(x) for x in self.deltas)
        v = tuple(float(x) for x in self.values)
        prov = tuple(self.provenance) or ("exact",) * len(d)
        if not (len(d) == len(v) == len(prov)):
            raise ValueError("deltas, values and provenance differ in length")
        if any(b <= a for a, b in zip(d, d[1:])):
            raise ValueError("deltas must be strictly increasing")
        object.__setattr__(self, "deltas", d)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "provenance", prov)

    @classmethod
    def anchored(cls, samples: dict, provenance: dict | None = None) -> "EnvelopePoints":
        """Build from ``{delta: value}`` adding the exact anchors (0,0), (1,1)."""
        pts = {0.0: 0.0, 1.0: 1.0}
        prov = {0.0: "exact", 1.0: "exact"}
        for d, v in samples.items():
            pts[float(d)] = float(v)
            prov[float(d)] = (provenance or {}).get(d, "search")
        keys = sorted(pts)
        return cls(tuple(keys), tuple(pts[k] for k in keys), tuple(prov[k] for k in keys))


@dataclass(frozen=True)
class PiecewiseLinear:
    """Piecewise-linear function through the given vertices."""

    xs: tuple[float, ...]
    ys: tuple[float, ...]

    def __call__(self, x):
        return np.interp(x, self.xs, self.ys)

    def vertices(self) -> list[tuple[float, float]]:
        return list(zip(self.xs, self.ys))


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_envelope(points: EnvelopePoints) -> PiecewiseLinear:
    """Lower convex hull of the samples (monotone chain, lower half)."""
    pts = list(zip(points.deltas, points.values))
    if len(pts) < 2:
        raise ValueError("need at least two points")
    lower: list[tuple[float, float]] = []
    for q in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], q) <= 0:
            lower.pop()
        lower.append(q)
    xs, ys = zip(*lower)
    return PiecewiseLinear(tuple(xs), tuple(ys))
