"""Finite products of F_p-vector spaces: elements, indexing, dense tables.

A group ``F_p^{n_1} x ... x F_p^{n_m}`` is described by a :class:`GroupSpec`.
Elements are indexed by a global mixed-radix rank (base ``p``, first
coordinate most significant); every dense table in the package uses this
order, so an array of length ``spec.size`` is a function on the group.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

MAX_GROUP_SIZE = 2**31


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    r = math.isqrt(n)
    return all(n % q for q in range(3, r + 1, 2))


@dataclass(frozen=True)
class GroupSpec:
    """The group ``F_p^{dims[0]} x ... x F_p^{dims[-1]}``.

    Blocks are numbered from 1 as in ``U_1, ..., U_m``; block ``j`` is the
    one whose Hall-Petresco coordinate may be a polynomial of degree ``<= j``.
    """

    p: int
    dims: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        if not is_prime(self.p):
            raise ValueError(f"p={self.p} is not prime")
        if len(self.dims) < 1:
            raise ValueError("need at least one block")
        if any(d < 0 for d in self.dims):
            raise ValueError(f"negative block dimension in {self.dims}")
        if self.p ** self.n > MAX_GROUP_SIZE:
            raise ValueError(
                f"|U| = {self.p}^{self.n} exceeds the dense-table limit 2^31")

    @property
    def m(self) -> int:
        return len(self.dims)

    @property
    def n(self) -> int:
        """Total number of coordinates."""
        return sum(self.dims)

    @property
    def size(self) -> int:
        return self.p ** self.n

    @property
    def shape(self) -> tuple[int, ...]:
        """Shape of a dense table viewed as an n-dimensional array."""
        return (self.p,) * self.n

    @property
    def place_values(self) -> np.ndarray:
        return self.p ** np.arange(self.n - 1, -1, -1, dtype=np.int64)

    def block_of(self) -> np.ndarray:
        """1-based block number of every coordinate."""
        return np.repeat(np.arange(1, self.m + 1), self.dims)

    def block_slices(self) -> list[slice]:
        edges = np.concatenate([[0], np.cumsum(self.dims)]).astype(int)
        return [slice(a, b) for a, b in zip(edges[:-1], edges[1:])]

    def tail_mask(self, i: int) -> np.ndarray:
        """Coordinates allowed to be nonzero in the tail subgroup ``U_i``.

        ``U_0 = U_1 = U`` and ``U_i = prod_{j >= i} U_j``; for ``i > m`` the
        tail is trivial.
        """
        return self.block_of() >= i

    def tail_size(self, i: int) -> int:
        return self.p ** int(self.tail_mask(i).sum())

    def coords(self) -> np.ndarray:
        """All elements as a read-only ``(size, n)`` array in rank order."""
        return _all_coords(self.p, self.n)

    def rank_array(self, coords: np.ndarray) -> np.ndarray:
        """Vectorised rank of coordinate rows (last axis = coordinates)."""
        coords = np.asarray(coords, dtype=np.int64) % self.p
        return coords @ self.place_values

    def zero(self) -> "Element":
        return Element(self, (0,) * self.n)

    def to_json(self) -> dict:
        return {"p": self.p, "dims": list(self.dims)}


@lru_cache(maxsize=32)
def _all_coords(p: int, n: int) -> np.ndarray:
    if n == 0:
        out = np.zeros((1, 0), dtype=np.int64)
    else:
        grids = np.indices((p,) * n).reshape(n, -1).T
        out = np.ascontiguousarray(grids, dtype=np.int64)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class Element:
    """A point of the group, stored as a tuple of residues."""

    spec: GroupSpec
    coords: tuple[int, ...]

    def __post_init__(self):
        coords = tuple(int(c) for c in self.coords)
        if len(coords) != self.spec.n:
            raise ValueError(
                f"expected {self.spec.n} coordinates, got {len(coords)}")
        if any(not 0 <= c < self.spec.p for c in coords):
            raise ValueError(f"coordinates {coords} not reduced mod {self.spec.p}")
        object.__setattr__(self, "coords", coords)

    @classmethod
    def from_any(cls, spec: GroupSpec, coords: Iterable[int]) -> "Element":
        return cls(spec, tuple(int(c) % spec.p for c in coords))

    def __add__(self, other: "Element") -> "Element":
        return add(self, other)

    def __neg__(self) -> "Element":
        return scale(self.spec.p - 1, self)

    def __sub__(self, other: "Element") -> "Element":
        return add(self, -other)

    def __rmul__(self, c: int) -> "Element":
        return scale(c, self)

    @property
    def rank(self) -> int:
        return rank(self)

    def blocks(self) -> list[tuple[int, ...]]:
        return [self.coords[s] for s in self.spec.block_slices()]

    def is_zero(self) -> bool:
        return not any(self.coords)

    def __str__(self) -> str:
        return format_element(self)


def rank(e: Element) -> int:
    r = 0
    for c in e.coords:
        r = r * e.spec.p + c
    return r


def unrank(i: int, spec: GroupSpec) -> Element:
    if not 0 <= i < spec.size:
        raise IndexError(f"index {i} outside [0, {spec.size})")
    digits = []
    for _ in range(spec.n):
        i, d = divmod(i, spec.p)
        digits.append(d)
    return Element(spec, tuple(reversed(digits)))


def add(a: Element, b: Element) -> Element:
    if a.spec != b.spec:
        raise ValueError("elements belong to different groups")
    p = a.spec.p
    return Element(a.spec, tuple((x + y) % p for x, y in zip(a.coords, b.coords)))


def scale(c: int, a: Element) -> Element:
    p = a.spec.p
    return Element(a.spec, tuple((c * x) % p for x in a.coords))


def binom_mod_p(n: int, i: int, p: int) -> int:
    """``C(n, i) mod p`` by Lucas' theorem; zero when ``i > n``."""
    if n < 0 or i < 0:
        raise ValueError("binom_mod_p needs nonnegative arguments")
    if i > n:
        return 0
    out = 1
    while n or i:
        n, nd = divmod(n, p)
        i, id_ = divmod(i, p)
        if id_ > nd:
            return 0
        out = out * math.comb(nd, id_) % p
    return out


def format_element(e: Element) -> str:
    """Canonical text form, e.g. ``"1,2|0"`` for dims (2, 1)."""
    return "|".join(",".join(str(c) for c in block) for block in e.blocks())


def parse_element(text: str, spec: GroupSpec) -> Element:
    parts = text.strip().split("|")
    if len(parts) != spec.m:
        raise ValueError(f"{text!r}: expected {spec.m} blocks")
    coords: list[int] = []
    for part, d in zip(parts, spec.dims):
        vals = [int(v) for v in part.split(",")] if part.strip() else []
        if len(vals) != d:
            raise ValueError(f"{text!r}: block {part!r} should have {d} entries")
        coords.extend(vals)
    return Element(spec, tuple(coords))


@dataclass(frozen=True)
class DenseFunction:
    """A function ``U -> [0, 1]`` tabulated in rank order."""

    spec: GroupSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.spec.size,):
            raise ValueError(f"expected {self.spec.size} values, got shape {v.shape}")
        if v.size and (v.min() < 0.0 or v.max() > 1.0):
            raise ValueError("function values must lie in [0, 1]")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @classmethod
    def constant(cls, spec: GroupSpec, value: float) -> "DenseFunction":
        return cls(spec, np.full(spec.size, float(value)))

    def mean(self) -> float:
        return float(self.values.mean())

    def as_array(self) -> np.ndarray:
        return self.values.reshape(self.spec.shape)


@dataclass(frozen=True)
class SubsetMask:
    """Indicator of a subset ``A`` of the group."""

    spec: GroupSpec
    bits: np.ndarray = field(repr=False)

    def __post_init__(self):
        b = np.asarray(self.bits)
        if b.shape != (self.spec.size,):
            raise ValueError(f"expected {self.spec.size} bits, got shape {b.shape}")
        b = b.astype(bool, copy=True)
        b.flags.writeable = False
        object.__setattr__(self, "bits", b)

    @classmethod
    def empty(cls, spec: GroupSpec) -> "SubsetMask":
        return cls(spec, np.zeros(spec.size, dtype=bool))

    @classmethod
    def full(cls, spec: GroupSpec) -> "SubsetMask":
        return cls(spec, np.ones(spec.size, dtype=bool))

    @classmethod
    def from_ranks(cls, spec: GroupSpec, ranks: Iterable[int]) -> "SubsetMask":
        bits = np.zeros(spec.size, dtype=bool)
        bits[np.fromiter(ranks, dtype=np.int64)] = True
        return cls(spec, bits)

    @classmethod
    def from_elements(cls, spec: GroupSpec, elements: Iterable[Element]) -> "SubsetMask":
        return cls.from_ranks(spec, (rank(e) for e in elements))

    @property
    def cardinality(self) -> int:
        return int(np.count_nonzero(self.bits))

    @property
    def density(self) -> float:
        return self.cardinality / self.spec.size

    def ranks(self) -> np.ndarray:
        return np.flatnonzero(self.bits)

    def elements(self) -> list[Element]:
        return [unrank(int(r), self.spec) for r in self.ranks()]

    def to_function(self) -> DenseFunction:
        return DenseFunction(self.spec, self.bits.astype(float))

    def __contains__(self, e: Element) -> bool:
        return bool(self.bits[rank(e)])

    def __eq__(self, other) -> bool:
        if not isinstance(other, SubsetMask):
            return NotImplemented
        return self.spec == other.spec and bool(np.array_equal(self.bits, other.bits))

    def __hash__(self) -> int:
        return hash((self.spec, self.bits.tobytes()))


def product_spec(a: GroupSpec, b: GroupSpec) -> GroupSpec:
    """Blockwise product: block ``j`` of the result is ``U_j x U'_j``."""
    if a.p != b.p:
        raise ValueError("groups over different primes")
    m = max(a.m, b.m)
    da = a.dims + (0,) * (m - a.m)
    db = b.dims + (0,) * (m - b.m)
    return GroupSpec(a.p, tuple(x + y for x, y in zip(da, db)))


def product_mask(A: SubsetMask, B: SubsetMask) -> SubsetMask:
    """The set ``A x B`` inside :func:`product_spec` of the two groups.

    Within each block the coordinates of ``A`` come before those of ``B``.
    """
    spec = product_spec(A.spec, B.spec)
    ca, cb = A.spec.coords(), B.spec.coords()
    ia = np.repeat(np.arange(A.spec.size), B.spec.size)
    ib = np.tile(np.arange(B.spec.size), A.spec.size)
    cols = []
    sa, sb = A.spec.block_slices(), B.spec.block_slices()
    for j in range(spec.m):
        if j < A.spec.m:
            cols.append(ca[ia][:, sa[j]])
        if j < B.spec.m:
            cols.append(cb[ib][:, sb[j]])
    coords = np.concatenate(cols, axis=1) if cols else np.zeros((ia.size, 0), int)
    bits = np.zeros(spec.size, dtype=bool)
    bits[spec.rank_array(coords)] = A.bits[ia] & B.bits[ib]
    return SubsetMask(spec, bits)


def as_values(f: "DenseFunction | SubsetMask") -> np.ndarray:
    """Value table of a function or indicator (bool for masks)."""
    if isinstance(f, SubsetMask):
        return f.bits
    if isinstance(f, DenseFunction):
        return f.values
    raise TypeError(f"expected DenseFunction or SubsetMask, got {type(f).__name__}")


def check_same_spec(items: Sequence, spec: GroupSpec) -> None:
    for it in items:
        if it.spec != spec:
            raise ValueError("function defined on a different group")
