"""Hall-Petresco groups over finite products of F_p-vector spaces.

A member tuple is ``(P(c_0), ..., P(c_{k-1}))`` where
``P(n) = sum_i C(n, i) u_i`` and the coefficient ``u_i`` lies in the tail
subgroup ``U_i`` (blocks ``1..i-1`` vanish).  Equivalently, the block-``j``
coordinate of ``P`` is a polynomial of degree at most ``j``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import BudgetExceeded
from .groups import Element, GroupSpec, binom_mod_p, format_element, parse_element

INDEX_LIMIT = 2**63 - 1


@dataclass(frozen=True)
class HPSpec:
    """A Hall-Petresco group ``HP_{c_0,...,c_{k-1}}(U_1, ..., U_m)``."""

    spec: GroupSpec
    points: tuple[int, ...]

    def __post_init__(self):
        pts = tuple(int(c) for c in self.points)
        p = self.spec.p
        if len(pts) < 1:
            raise ValueError("need at least one evaluation point")
        if len(pts) > p:
            raise ValueError(f"k={len(pts)} points exceeds p={p}")
        if len({c % p for c in pts}) != len(pts):
            raise ValueError(f"evaluation points {pts} are not distinct mod {p}")
        if any(not 0 <= c < p for c in pts):
            raise ValueError(f"evaluation points {pts} not reduced mod {p}")
        object.__setattr__(self, "points", pts)

    @classmethod
    def default(cls, spec: GroupSpec, k: int) -> "HPSpec":
        """Points ``0, 1, ..., k-1`` (k-term progressions)."""
        return cls(spec, tuple(range(k)))

    @property
    def k(self) -> int:
        return len(self.points)

    @property
    def is_default(self) -> bool:
        return self.points == tuple(range(self.k))

    def binomial_matrix(self) -> np.ndarray:
        """``M[j, i] = C(c_j, i) mod p``; tuple = M @ coefficients."""
        p = self.spec.p
        return np.array([[binom_mod_p(c, i, p) for i in range(self.k)]
                         for c in self.points], dtype=np.int64)

    def to_json(self) -> dict:
        return {"p": self.spec.p, "dims": list(self.spec.dims),
                "points": list(self.points)}

    @classmethod
    def from_json(cls, obj: dict, k: int | None = None) -> "HPSpec":
        spec = GroupSpec(int(obj["p"]), tuple(obj["dims"]))
        points = obj.get("points")
        if points is None:
            if k is None:
                raise ValueError("spec JSON has no points and no k was given")
            return cls.default(spec, k)
        return cls(spec, tuple(points))


@dataclass(frozen=True)
class HPParams:
    """Coefficients ``(u_0, ..., u_{k-1})`` of a Hall-Petresco polynomial."""

    coeffs: tuple[Element, ...]

    def __post_init__(self):
        coeffs = tuple(self.coeffs)
        object.__setattr__(self, "coeffs", coeffs)
        if not coeffs:
            raise ValueError("empty coefficient list")
        spec = coeffs[0].spec
        for i, u in enumerate(coeffs):
            if u.spec != spec:
                raise ValueError("coefficients from different groups")
            outside = ~spec.tail_mask(i)
            if np.any(np.asarray(u.coords, dtype=np.int64)[outside]):
                raise ValueError(f"u_{i} = {u} is not in the tail subgroup U_{i}")

    @property
    def spec(self) -> GroupSpec:
        return self.coeffs[0].spec


HPTuple = tuple  # tuple[Element, ...]


def hp_eval(params: HPParams, c: int) -> Element:
    spec = params.spec
    p = spec.p
    acc = np.zeros(spec.n, dtype=np.int64)
    for i, u in enumerate(params.coeffs):
        b = binom_mod_p(c, i, p)
        if b:
            acc += b * np.asarray(u.coords, dtype=np.int64)
    return Element(spec, tuple(int(v) for v in acc % p))


def hp_tuple(params: HPParams, hp: HPSpec) -> HPTuple:
    if len(params.coeffs) != hp.k:
        raise ValueError(f"expected {hp.k} coefficients, got {len(params.coeffs)}")
    if params.spec != hp.spec:
        raise ValueError("parameters and HP group live on different groups")
    return tuple(hp_eval(params, c) for c in hp.points)


def _solve_mod_p(M: np.ndarray, rhs: np.ndarray, p: int) -> np.ndarray:
    """Solve ``M x = rhs`` over F_p for square invertible ``M`` (rhs may be 2-D)."""
    k = M.shape[0]
    a = np.concatenate([M % p, rhs.reshape(k, -1) % p], axis=1).astype(np.int64)
    for col in range(k):
        piv = next(r for r in range(col, k) if a[r, col] % p)
        a[[col, piv]] = a[[piv, col]]
        a[col] = a[col] * pow(int(a[col, col]), -1, p) % p
        for r in range(k):
            if r != col and a[r, col]:
                a[r] = (a[r] - a[r, col] * a[col]) % p
    return a[:, k:].reshape(rhs.shape)


def _forward_differences(t: np.ndarray, p: int) -> np.ndarray:
    """Rows ``Delta^i t_0`` for ``i = 0..k-1`` (t has shape (k, n))."""
    diffs = [t[0]]
    cur = t
    for _ in range(1, t.shape[0]):
        cur = (cur[1:] - cur[:-1]) % p
        diffs.append(cur[0])
    return np.array(diffs, dtype=np.int64)


def hp_contains(t: Sequence[Element], hp: HPSpec) -> tuple[bool, HPParams | None]:
    """Membership test; on success also returns the unique parameters."""
    if len(t) != hp.k:
        raise ValueError(f"expected a {hp.k}-tuple, got {len(t)} entries")
    spec = hp.spec
    if any(e.spec != spec for e in t):
        raise ValueError("tuple entries from a different group")
    arr = np.array([e.coords for e in t], dtype=np.int64).reshape(hp.k, spec.n)
    if hp.is_default:
        u = _forward_differences(arr, spec.p)
    else:
        u = _solve_mod_p(hp.binomial_matrix(), arr, spec.p)
    for i in range(hp.k):
        if np.any(u[i][~spec.tail_mask(i)]):
            return False, None
    params = HPParams(tuple(Element(spec, tuple(int(v) for v in row)) for row in u))
    return True, params


def hp_size(hp: HPSpec) -> int:
    size = 1
    for i in range(hp.k):
        size *= hp.spec.tail_size(i)
    if size > INDEX_LIMIT:
        raise OverflowError(f"|HP| = {size} does not fit a 64-bit index")
    return size


def is_trivial(t: Sequence[Element]) -> bool:
    return all(e == t[0] for e in t)


def tail_elements(spec: GroupSpec, i: int) -> np.ndarray:
    """All elements of the tail subgroup ``U_i`` as a ``(|U_i|, n)`` array."""
    free = np.flatnonzero(spec.tail_mask(i))
    out = np.zeros((spec.p ** free.size, spec.n), dtype=np.int64)
    if free.size:
        out[:, free] = np.indices((spec.p,) * free.size).reshape(free.size, -1).T
    return out


def shape_count(hp: HPSpec) -> int:
    """Number of parameter choices ``(u_1, ..., u_{k-1})``."""
    return hp_size(hp) // hp.spec.size


def iter_offsets(hp: HPSpec, chunk: int = 4096) -> Iterator[np.ndarray]:
    """Yield blocks of offset tuples of shape ``(b, k, n)``.

    Entry ``[s, j]`` is ``sum_{i >= 1} C(c_j, i) u_i`` for the ``s``-th choice
    of ``(u_1, ..., u_{k-1})``; the member tuples are ``u_0 + offsets[s]``
    for every ``u_0`` in the group.
    """
    spec, p, k = hp.spec, hp.spec.p, hp.k
    tails = [tail_elements(spec, i) for i in range(1, k)]
    radices = [len(t) for t in tails]
    total = int(np.prod(radices, dtype=object)) if radices else 1
    B = hp.binomial_matrix()
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        off = np.zeros((idx.size, k, spec.n), dtype=np.int64)
        rem = idx.copy()
        digits = []
        for r in reversed(radices):
            rem, d = np.divmod(rem, r)
            digits.append(d)
        digits.reverse()
        for i, (tail, d) in enumerate(zip(tails, digits), start=1):
            u = tail[d]
            off += B[:, i][None, :, None] * u[:, None, :]
        yield off % p


def member_ranks(hp: HPSpec, budget: int = 10**7) -> np.ndarray:
    """Every member tuple as element ranks, shape ``(|HP|, k)``.

    Row ``s * |U| + x`` is the tuple with ``u_0 = unrank(x)`` and the ``s``-th
    offset choice.
    """
    size = hp_size(hp)
    if size * hp.k > budget:
        raise BudgetExceeded(f"{size} member tuples x k={hp.k} exceeds budget {budget}")
    spec = hp.spec
    coords = spec.coords()
    rows = []
    for off in iter_offsets(hp, chunk=max(1, budget // max(1, spec.size * hp.k))):
        pts = (coords[None, None, :, :] + off[:, :, None, :]) % spec.p
        r = spec.rank_array(pts)  # (b, k, |U|)
        rows.append(np.transpose(r, (0, 2, 1)).reshape(-1, hp.k))
    return np.concatenate(rows, axis=0)


def format_tuple(t: Sequence[Element]) -> list[str]:
    return [format_element(e) for e in t]


def parse_tuple(items: Sequence[str], spec: GroupSpec) -> HPTuple:
    return tuple(parse_element(s, spec) for s in items)


def load_hpspec(path: str, k: int | None = None) -> HPSpec:
    with open(path) as fh:
        return HPSpec.from_json(json.load(fh), k=k)
