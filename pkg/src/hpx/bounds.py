"""Analytic constants and the bound sandwich for three-term progressions.

The removal-lemma exponent is ``C_p = 1 + 1/c_p`` where
``p^(1 - c_p) = inf_{0<x<1} x^{-(p-1)/3} (1 + x + ... + x^{p-1})``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np
from scipy.optimize import minimize_scalar

from .groups import is_prime


@dataclass(frozen=True)
class CpSolution:
    p: int
    x_star: float
    inf_value: float
    c_p: float
    C_p: float
    method: str = "bisection"


def cp_objective(x: float, p: int) -> float:
    """``x^{-(p-1)/3} * sum_{i<p} x^i``."""
    return x ** (-(p - 1) / 3) * sum(x ** i for i in range(p))


def _log_slope(x: float, p: int) -> float:
    # d/d(log x) of log g: mean of i under weights x^i, minus (p-1)/3
    w = np.array([x ** i for i in range(p)])
    return float(np.dot(np.arange(p), w) / w.sum()) - (p - 1) / 3


def solve_cp(p: int, tol: float = 1e-12) -> CpSolution:
    """Minimise :func:`cp_objective` on (0, 1) by bisection on the log-slope.

    The log-slope is a weighted mean of ``0..p-1`` minus a constant and is
    increasing in ``x``; a golden-section search takes over if a sampled
    sign pattern says otherwise at working precision.
    """
    if not is_prime(p) or p == 2:
        raise ValueError(f"p={p} must be an odd prime")
    if tol <= 0:
        raise ValueError("tol must be positive")
    grid = np.linspace(1e-6, 1 - 1e-6, 65)
    slopes = np.array([_log_slope(x, p) for x in grid])
    lo, hi = 1e-12, 1.0 - 1e-12
    monotone = bool(np.all(np.diff(slopes) > 0)) and _log_slope(lo, p) < 0 < _log_slope(hi, p)
    if monotone:
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if _log_slope(mid, p) < 0:
                lo = mid
            else:
                hi = mid
        x_star, method = 0.5 * (lo + hi), "bisection"
    else:
        res = minimize_scalar(lambda x: math.log(cp_objective(x, p)),
                              bounds=(lo, hi), method="bounded",
                              options={"xatol": tol})
        x_star, method = float(res.x), "golden-fallback"
    inf_value = cp_objective(x_star, p)
    c_p = 1.0 - math.log(inf_value, p)
    return CpSolution(p=p, x_star=x_star, inf_value=inf_value, c_p=c_p,
                      C_p=1.0 + 1.0 / c_p, method=method)


@dataclass
class BoundsRow:
    delta: float
    lower: float
    upper_weak: float
    upper_strong: float
    strong_term_linear: float
    strong_term_quadratic: float
    strong_valid: bool
    search_value: float | None = None
    envelope_value: float | None = None
    status: str = "ok"
    violations: list[str] = field(default_factory=list)


@dataclass
class BoundsReport:
    p: int
    C_p: float
    base: float
    rows: list[BoundsRow]
    notes: list[str] = field(default_factory=list)
    provenance: str = "float-analytic"

    @property
    def has_violation(self) -> bool:
        return any(r.status == "VIOLATION" for r in self.rows)

    def to_json(self) -> dict:
        return {"p": self.p, "C_p": self.C_p, "base": self.base,
                "provenance": self.provenance, "notes": list(self.notes),
                "rows": [asdict(r) for r in self.rows]}

    def to_csv_rows(self) -> list[dict]:
        keys = ("delta", "lower", "upper_weak", "upper_strong", "strong_valid",
                "search_value", "envelope_value", "status")
        return [{k: getattr(r, k) for k in keys} for r in self.rows]


# relative slack for float rounding, e.g. 3/81 against (1/3)**3
REL_TOL = 1e-12


def _check(row: BoundsRow, label: str, value: float | None) -> None:
    if value is None:
        return
    if value < row.lower * (1 - REL_TOL):
        row.violations.append(f"{label} {value!r} below lower bound {row.lower!r}")
    if value > row.upper_weak * (1 + REL_TOL):
        row.violations.append(f"{label} {value!r} above delta^3 = {row.upper_weak!r}")
    if row.violations:
        row.status = "VIOLATION"


def sandwich(p: int, deltas: Iterable[float], base: float = 2.0,
             search_values: Mapping[float, float] | None = None,
             envelope_values: Mapping[float, float] | None = None,
             cp: CpSolution | None = None) -> BoundsReport:
    """Lower ``(delta/3)^{C_p}``, weak upper ``delta^3`` and the strong upper
    ``delta^{1+log_b p} + delta^{2 log_b p}`` for each delta.

    Attached search or envelope values outside ``[lower, delta^3]`` mark the
    row ``VIOLATION``.
    """
    cp = cp or solve_cp(p)
    lp = math.log(p, base)
    search_values = search_values or {}
    envelope_values = envelope_values or {}
    rows = []
    for d in deltas:
        d = float(d)
        if not 0.0 <= d <= 1.0:
            raise ValueError(f"delta={d} outside [0, 1]")
        t1, t2 = d ** (1 + lp), d ** (2 * lp)
        row = BoundsRow(delta=d, lower=(d / 3) ** cp.C_p, upper_weak=d ** 3,
                        upper_strong=t1 + t2, strong_term_linear=t1,
                        strong_term_quadratic=t2, strong_valid=t1 + t2 < d ** 3,
                        search_value=_lookup(search_values, d),
                        envelope_value=_lookup(envelope_values, d))
        _check(row, "search value", row.search_value)
        _check(row, "envelope value", row.envelope_value)
        rows.append(row)
    notes = [
        "strong upper bound needs a progression-free set of size ceil((p/2)^n) "
        "in F_p^n, guaranteed only for n large in terms of p",
    ]
    if 1 + lp <= 3:
        notes.append(
            f"1 + log_{base:g} {p} = {1 + lp:.4f} <= 3: the strong bound never "
            "improves on delta^3 for this p")
    else:
        notes.append(
            f"1 + log_{base:g} {p} = {1 + lp:.4f} > 3: the strong bound improves "
            "on delta^3 for small delta")
    return BoundsReport(p=p, C_p=cp.C_p, base=base, rows=rows, notes=notes)


def _lookup(table: Mapping[float, float], d: float) -> float | None:
    for key, val in table.items():
        if math.isclose(float(key), d, rel_tol=0, abs_tol=1e-12):
            return None if val is None else float(val)
    return None


def behrend_threshold(p: int, n: int, c) -> int:
    """``ceil((c p)^n)``: the size a progression-free set in F_p^n must reach."""
    cf = Fraction(str(c)) if isinstance(c, float) else Fraction(c)
    if not Fraction(1, 2) < cf < 1:
        raise ValueError(f"c={c} must lie in (1/2, 1)")
    if n < 0:
        raise ValueError("n must be nonnegative")
    val = (cf * p) ** n
    return math.ceil(val)


def simple_constants(k: int, delta: float) -> float:
    """The common value ``delta^k`` of all constants for ``k = 1, 2``."""
    if k not in (1, 2):
        raise ValueError("closed form only for k = 1 or 2")
    if not 0 <= delta <= 1:
        raise ValueError(f"delta={delta} outside [0, 1]")
    return delta ** k
