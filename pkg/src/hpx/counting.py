"""Evaluate the Hall-Petresco correlation ``S^k(f)`` exactly.

``S^k(f)`` is the average of ``f(x_0) ... f(x_{k-1})`` over all member tuples
of the Hall-Petresco group.  The brute-force path handles every group and
every k; :func:`s3_fourier` is a fast path for three-term progressions in a
single block.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import BudgetExceeded
from .groups import DenseFunction, GroupSpec, SubsetMask, as_values, check_same_spec
from .hp import HPSpec, hp_size, iter_offsets

DEFAULT_BUDGET = 10**9
_WORK_CHUNK = 2**22


def _value_tables(f, hp: HPSpec) -> list[np.ndarray]:
    if isinstance(f, (DenseFunction, SubsetMask)):
        fs = [f] * hp.k
    else:
        fs = list(f)
        if len(fs) != hp.k:
            raise ValueError(f"need {hp.k} functions, got {len(fs)}")
    check_same_spec(fs, hp.spec)
    return [as_values(g) for g in fs]


def _check_budget(hp: HPSpec, budget: int) -> int:
    size = hp_size(hp)
    if size > budget:
        raise BudgetExceeded(
            f"|HP| = {size} parameter evaluations exceeds budget {budget}")
    return size


def _correlation_sum(tables: Sequence[np.ndarray], hp: HPSpec, exact: bool):
    """Sum over all member tuples of the product of the tables."""
    spec = hp.spec
    coords = spec.coords()
    chunk = max(1, _WORK_CHUNK // max(1, spec.size * hp.k))
    total = 0 if exact else 0.0
    for off in iter_offsets(hp, chunk=chunk):
        idx = spec.rank_array((coords[None, None, :, :] + off[:, :, None, :]) % spec.p)
        if exact:
            acc = np.ones(idx.shape[::2], dtype=bool)
            for j, t in enumerate(tables):
                acc &= t[idx[:, j, :]]
            total += int(np.count_nonzero(acc))
        else:
            acc = np.ones(idx.shape[::2], dtype=float)
            for j, t in enumerate(tables):
                acc *= t[idx[:, j, :]]
            # fixed-order partial sums keep repeated runs bitwise identical
            total += float(acc.sum(axis=1).sum())
    return total


def s_k_bruteforce(f, hp: HPSpec, budget: int = DEFAULT_BUDGET) -> float:
    """Haar average of ``prod_j f_j(P(c_j))`` over the Hall-Petresco group.

    ``f`` is a single :class:`DenseFunction`/:class:`SubsetMask` (used in every
    slot) or a sequence of ``k`` of them.
    """
    tables = _value_tables(f, hp)
    size = _check_budget(hp, budget)
    if all(t.dtype == bool for t in tables):
        return _correlation_sum(tables, hp, exact=True) / size
    tables = [np.asarray(t, dtype=float) for t in tables]
    return _correlation_sum(tables, hp, exact=False) / size


def hp_count(A: SubsetMask, hp: HPSpec, budget: int = DEFAULT_BUDGET) -> int:
    """Number of member tuples lying entirely in ``A`` (trivial ones included)."""
    if A.spec != hp.spec:
        raise ValueError("set defined on a different group")
    _check_budget(hp, budget)
    return _correlation_sum([A.bits] * hp.k, hp, exact=True)


def hp_density_subset(A: SubsetMask, hp: HPSpec, budget: int = DEFAULT_BUDGET) -> Fraction:
    """``S^k(1_A)`` as an exact rational."""
    return Fraction(hp_count(A, hp, budget), hp_size(hp))


def nontrivial_hp_count(A: SubsetMask, hp: HPSpec, budget: int = DEFAULT_BUDGET) -> int:
    """Member tuples inside ``A^k`` that are not constant.

    Constant tuples correspond exactly to parameters with ``u_1 = ... = 0``,
    so there are ``|A|`` of them.
    """
    return hp_count(A, hp, budget) - A.cardinality


def is_hp_free(A: SubsetMask, hp: HPSpec, budget: int = DEFAULT_BUDGET) -> bool:
    return nontrivial_hp_count(A, hp, budget) == 0


def _single_block(spec: GroupSpec) -> None:
    if spec.m != 1:
        raise ValueError("the Fourier path needs a single-block group (m = 1)")
    if spec.p == 2:
        raise ValueError("the Fourier path needs an odd prime")


def character_transform(values: np.ndarray, spec: GroupSpec) -> np.ndarray:
    """``f^(xi) = E_x f(x) zeta^{-<xi, x>}`` as an n-dimensional array."""
    arr = np.asarray(values, dtype=float).reshape(spec.shape)
    if spec.n == 0:
        return arr.astype(complex)
    return np.fft.fftn(arr) / spec.size


def s3_fourier(f, g=None, h=None) -> float:
    """``E_{x,a} f(x) g(x+a) h(x+2a)`` via ``sum_xi f^(xi) g^(-2 xi) h^(xi)``."""
    g = f if g is None else g
    h = f if h is None else h
    spec = f.spec
    _single_block(spec)
    check_same_spec([g, h], spec)
    fh, gh, hh = (character_transform(as_values(t), spec) for t in (f, g, h))
    if spec.n == 0:
        return float((fh * gh * hh).real)
    p = spec.p
    neg2 = (-2 * np.arange(p)) % p
    g_perm = gh[np.ix_(*([neg2] * spec.n))]
    return float(np.sum(fh * g_perm * hh).real)


def s3_fourier_exact(A: SubsetMask) -> Fraction:
    """3-AP density of a set as a rational, recovered from the Fourier sum.

    The count ``p^{2n} * s3`` is an integer; the float result is rounded and
    the rounding error is checked to be far below 1/2.
    """
    _single_block(A.spec)
    denom = A.spec.size ** 2
    raw = s3_fourier(A) * denom
    count = round(raw)
    if abs(raw - count) > 1e-6:
        raise ArithmeticError(f"Fourier count {raw} is not near an integer")
    return Fraction(int(count), denom)
