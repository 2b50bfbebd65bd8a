"""Random sets driven by a distribution function, and their statistics.

Windows are the nested boxes ``F_p^N`` inside ``F_p^omega``.  An element is
identified across windows by its rank: ``F_p^{N-1}`` sits inside ``F_p^N``
as the elements whose leading coordinate is zero, which keeps ranks fixed.
Bernoulli draws are keyed by ``(seed, rank)`` through Philox, so every
window sees the same random set.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .groups import Element, GroupSpec, SubsetMask, rank

Z_GATE = 4.0


def counter_uniforms(seed: int, start: int, stop: int) -> np.ndarray:
    """Uniforms on [0, 1) for ranks ``start..stop-1``; a pure function of (seed, rank)."""
    if stop <= start:
        return np.empty(0)
    block0 = start // 4
    raw = np.random.Philox(key=int(seed), counter=block0).random_raw(stop - 4 * block0)
    raw = raw[start - 4 * block0:]
    return (raw >> np.uint64(11)).astype(np.float64) * 2.0**-53


def omega_digits(ranks: np.ndarray, p: int, count: int) -> np.ndarray:
    """The first ``count`` coordinates of ``F_p^omega`` (least significant digits)."""
    out = np.empty((len(ranks), count), dtype=np.int64)
    r = np.asarray(ranks, dtype=np.int64).copy()
    for i in range(count):
        r, out[:, i] = np.divmod(r, p)
    return out


@dataclass(frozen=True, eq=False)
class DistributionFn:
    """A map ``F_p^omega -> [0, 1]``.

    kinds: ``constant`` (``value``), ``coordinate-product`` (``factors[i][c]``
    multiplies in when omega-coordinate ``i`` equals ``c``; missing
    coordinates contribute 1), ``table`` (values on the first ``M``
    omega-coordinates, extended as a cylinder).
    """

    p: int
    kind: str = "constant"
    value: float = 0.0
    factors: tuple = ()
    table: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("constant", "coordinate-product", "table"):
            raise ValueError(f"unknown distribution kind {self.kind!r}")
        if self.kind == "constant" and not 0 <= self.value <= 1:
            raise ValueError("constant value outside [0, 1]")
        if self.kind == "coordinate-product":
            fac = tuple(tuple(float(v) for v in f) for f in self.factors)
            if any(len(f) != self.p or min(f) < 0 or max(f) > 1 for f in fac):
                raise ValueError("each factor needs p values in [0, 1]")
            object.__setattr__(self, "factors", fac)
        if self.kind == "table":
            t = np.asarray(self.table, dtype=float)
            M = round(math.log(t.size, self.p)) if t.size > 1 else 0
            if self.p ** M != t.size or t.min() < 0 or t.max() > 1:
                raise ValueError("table must hold p^M values in [0, 1]")
            object.__setattr__(self, "table", t)

    @classmethod
    def constant(cls, p: int, value: float) -> "DistributionFn":
        return cls(p, "constant", value=float(value))

    def values(self, ranks: np.ndarray) -> np.ndarray:
        ranks = np.asarray(ranks, dtype=np.int64)
        if self.kind == "constant":
            return np.full(ranks.shape, self.value)
        if self.kind == "table":
            return self.table[ranks % self.table.size]
        digits = omega_digits(ranks, self.p, len(self.factors))
        out = np.ones(ranks.shape)
        for i, fac in enumerate(self.factors):
            out = out * np.asarray(fac)[digits[:, i]]
        return out

    def on_window(self, window: GroupSpec) -> np.ndarray:
        return self.values(np.arange(window.size))

    def describe(self) -> dict:
        out = {"p": self.p, "kind": self.kind}
        if self.kind == "constant":
            out["value"] = self.value
        elif self.kind == "coordinate-product":
            out["factors"] = [list(f) for f in self.factors]
        else:
            out["table_size"] = int(self.table.size)
        return out


def window_spec(p: int, N: int) -> GroupSpec:
    return GroupSpec(p, (N,))


def sample_random_set(F: DistributionFn, window: GroupSpec, seed: int) -> SubsetMask:
    """Independent ``Bernoulli(F(gamma))`` membership for every window element."""
    if window.m != 1 or window.p != F.p:
        raise ValueError("window must be a single-block F_p^N with F's prime")
    u = counter_uniforms(seed, 0, window.size)
    return SubsetMask(window, u < F.on_window(window))


@dataclass
class ShiftRow:
    window: int
    shift: int
    empirical: float
    target: float
    sigma: float
    z: float
    passed: bool


@dataclass
class SimReport:
    seed: int
    p: int
    k: int
    distribution: dict
    windows: list[int]
    densities: list[dict] = field(default_factory=list)
    rows: list[ShiftRow] = field(default_factory=list)
    gate: float = Z_GATE
    provenance: str = "monte-carlo"

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows) and all(d["passed"] for d in self.densities)

    def to_json(self) -> dict:
        out = asdict(self)
        out["passed"] = self.passed
        return out


def _z(emp: float, target: float, var: float) -> tuple[float, float]:
    sigma = math.sqrt(max(var, 0.0))
    if sigma == 0.0:
        return 0.0, (0.0 if math.isclose(emp, target, abs_tol=1e-12) else math.inf)
    return sigma, (emp - target) / sigma


def _shift_rank(a, window: GroupSpec) -> int:
    r = rank(a) if isinstance(a, Element) else int(a)
    if not 0 < r < window.size:
        raise ValueError(f"shift rank {r} is zero or outside the window F_{window.p}^{window.n}")
    return r


def progression_statistics(bits: np.ndarray, Fv: np.ndarray, window: GroupSpec,
                           a: int, k: int) -> tuple[float, float, float]:
    """Empirical and expected ``E_x prod_i 1_E(x + i a)`` and the exact variance.

    ``Y_x`` and ``Y_{x'}`` are dependent only when ``x' = x + t a`` with the two
    progressions overlapping; the variance sums those covariances exactly,
    ``E[Y_x Y_x'] = prod F`` over the union of the two progressions.
    """
    p = window.p
    coords = window.coords()
    step = coords[a]
    line = np.stack([window.rank_array(coords + s * step) for s in range(p)])  # (p, |W|)
    own = set(range(k))
    Fline = Fv[line]
    mean_terms = np.prod(Fline[:k], axis=0)
    empirical = float(np.mean(np.all(bits[line[:k]], axis=0)))
    target = float(mean_terms.mean())
    cov = 0.0
    for t in range(p):
        union = own | {(t + j) % p for j in range(k)}
        if len(union) == 2 * k and t != 0:
            continue  # disjoint progressions are independent
        joint = np.prod(Fline[sorted(union)], axis=0)
        other = mean_terms[line[t]]
        cov += float(np.sum(joint - mean_terms * other))
    var = cov / window.size**2
    return empirical, target, var


def verify_randomset(F: DistributionFn, k: int, shifts: Sequence, windows: Iterable[int],
                     seed: int, gate: float = Z_GATE) -> SimReport:
    """Compare empirical progression densities of one random set with their targets."""
    if k > F.p:
        raise ValueError(f"k={k} exceeds p={F.p}")
    windows = list(windows)
    report = SimReport(seed=seed, p=F.p, k=k, distribution=F.describe(),
                       windows=windows, gate=gate)
    for N in windows:
        spec = window_spec(F.p, N)
        Fv = F.on_window(spec)
        E = sample_random_set(F, spec, seed)
        emp = E.density
        target = float(Fv.mean())
        sigma, z = _z(emp, target, float(np.sum(Fv * (1 - Fv))) / spec.size**2)
        report.densities.append({"window": N, "empirical": emp, "target": target,
                                 "sigma": sigma, "z": z, "passed": abs(z) <= gate})
        for a in shifts:
            r = _shift_rank(a, spec)
            emp, target, var = progression_statistics(E.bits, Fv, spec, r, k)
            sigma, z = _z(emp, target, var)
            report.rows.append(ShiftRow(window=N, shift=r, empirical=emp, target=target,
                                        sigma=sigma, z=z, passed=abs(z) <= gate))
    return report


def default_shifts(p: int, N: int, count: int = 4) -> list[int]:
    """Ranks of the basis vectors ``e_1, ..., e_count`` of ``F_p^omega``."""
    return [p ** i for i in range(min(count, N))]


def delta_k_experiment(p: int, k: int, delta: float, window: int, seed: int,
                       shifts: Sequence | None = None, gate: float = Z_GATE) -> SimReport:
    """Constant-density random set: progression densities against ``delta^k``."""
    F = DistributionFn.constant(p, delta)
    shifts = default_shifts(p, window) if shifts is None else shifts
    return verify_randomset(F, k, shifts, [window], seed, gate=gate)
