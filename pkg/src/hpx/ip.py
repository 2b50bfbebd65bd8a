"""Averages along finite IP windows and their limits on finite systems.

Everything here is exact at finite scale: window averages are computed
either by enumerating the ``2^(N-D)`` subset sums, through the product
formula on characters, or through the exact distribution of the IP sum.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .counting import s_k_bruteforce
from .errors import BudgetExceeded, DegenerateWarning
from .groups import DenseFunction, GroupSpec, SubsetMask, as_values
from .hp import HPSpec

ENUMERATION_BUDGET = 2**24


def _as_gens(gens, p: int) -> np.ndarray:
    g = np.asarray(gens, dtype=np.int64)
    if g.ndim != 2:
        raise ValueError("generators must be a 2-D array (L, d)")
    return g % p


@dataclass(frozen=True, eq=False)
class IPWindow:
    """Generators ``gamma_1..gamma_L`` and the index window ``{D+1, ..., N}``."""

    p: int
    gens: np.ndarray
    D: int
    N: int

    def __post_init__(self):
        g = _as_gens(self.gens, self.p)
        g.flags.writeable = False
        object.__setattr__(self, "gens", g)
        if not 0 <= self.D < self.N <= len(g):
            raise ValueError(
                f"window ({self.D}, {self.N}] empty or beyond {len(g)} generators")

    @property
    def d(self) -> int:
        return self.gens.shape[1]

    @property
    def length(self) -> int:
        return self.N - self.D

    def window_gens(self) -> np.ndarray:
        return self.gens[self.D:self.N]


@dataclass(frozen=True)
class CharacterId:
    """The character ``gamma -> zeta_p^{<freq, gamma>}``."""

    p: int
    freq: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "freq", tuple(int(v) % self.p for v in self.freq))

    def pairing(self, gens: np.ndarray) -> np.ndarray:
        return (np.asarray(gens, dtype=np.int64) @ np.asarray(self.freq, dtype=np.int64)) % self.p

    def __call__(self, gens: np.ndarray) -> np.ndarray:
        return np.exp(2j * np.pi * self.pairing(gens) / self.p)

    @property
    def is_trivial(self) -> bool:
        return not any(self.freq)


def repeated_basis(d: int, length: int) -> np.ndarray:
    """``e_1, ..., e_d, e_1, ...`` truncated to ``length`` generators."""
    return np.eye(d, dtype=np.int64)[np.arange(length) % d]


def ip_multiset(w: IPWindow, budget: int = ENUMERATION_BUDGET) -> np.ndarray:
    """All ``2^(N-D)`` subset sums of the window generators, with multiplicity.

    The empty sum comes first; row ``b`` is the sum over the set bits of ``b``.
    """
    if 2 ** w.length > budget:
        raise BudgetExceeded(f"2^{w.length} subset sums exceed budget {budget}")
    dtype = np.uint8 if w.p < 128 else np.int64
    sums = np.zeros((1, w.d), dtype=dtype)
    for g in w.window_gens():
        sums = np.concatenate([sums, (sums + g.astype(dtype)) % w.p])
    return sums


def ip_char_average(xi: CharacterId, w: IPWindow, budget: int = ENUMERATION_BUDGET) -> complex:
    """``E_{gamma in IP window} xi(gamma)`` by enumeration."""
    sums = ip_multiset(w, budget).astype(np.int64)
    t = xi.pairing(sums)
    counts = np.bincount(t, minlength=w.p)
    roots = np.exp(2j * np.pi * np.arange(w.p) / w.p)
    return complex(counts @ roots / len(t))


def product_formula(xi: CharacterId, w: IPWindow) -> complex:
    """``prod_{n in window} (1 + xi(gamma_n)) / 2``."""
    factors = (1 + xi(w.window_gens())) / 2
    return complex(np.prod(factors))


def junta_test(xi: CharacterId, gens, D: int) -> bool:
    """True iff ``xi(gamma_n) = 1`` for every listed ``n > D``."""
    g = _as_gens(gens, xi.p)
    return not np.any(xi.pairing(g[D:]))


# --- finite systems -------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TranslationSystem:
    """``F_p^n`` with ``T^gamma x = x + phi(gamma)`` for linear ``phi: F_p^d -> F_p^n``."""

    p: int
    phi: np.ndarray  # shape (n, d)

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=np.int64) % self.p
        if phi.ndim != 2:
            raise ValueError("phi must be an (n, d) matrix")
        object.__setattr__(self, "phi", phi)

    @classmethod
    def identity(cls, p: int, n: int) -> "TranslationSystem":
        return cls(p, np.eye(n, dtype=np.int64))

    @property
    def state_spec(self) -> GroupSpec:
        return GroupSpec(self.p, (self.phi.shape[0],))

    @property
    def d(self) -> int:
        return self.phi.shape[1]

    def translation(self, gamma) -> np.ndarray:
        return (self.phi @ np.asarray(gamma, dtype=np.int64)) % self.p

    def act(self, gamma, states: np.ndarray) -> np.ndarray:
        """Apply ``T^gamma`` to state ranks."""
        spec = self.state_spec
        coords = spec.coords()[states]
        return spec.rank_array(coords + self.translation(gamma))

    def is_action(self, gens) -> bool:
        """Check ``T^{a+b} = T^a T^b`` on all generator pairs and bijectivity."""
        states = np.arange(self.state_spec.size)
        g = _as_gens(gens, self.p)
        for a in g:
            img = self.act(a, states)
            if np.unique(img).size != img.size:
                return False
            for b in g:
                if not np.array_equal(self.act((a + b) % self.p, states),
                                      self.act(a, self.act(b, states))):
                    return False
        return True


@dataclass(frozen=True)
class MatrixSkewSystem:
    """States ``(x, y)`` with ``x`` in ``F_p^{d x n}``, ``y`` in ``F_p^n`` and
    ``T^gamma (x, y) = (x, y + gamma^T x)`` for ``gamma`` in ``F_p^d``."""

    p: int
    n: int
    d: int

    @property
    def num_states(self) -> int:
        return self.p ** (self.d * self.n + self.n)

    def states(self) -> tuple[np.ndarray, np.ndarray]:
        """All states: ``x`` of shape ``(S, d, n)`` and ``y`` of shape ``(S, n)``."""
        total = self.d * self.n + self.n
        if self.num_states > ENUMERATION_BUDGET:
            raise BudgetExceeded(f"{self.num_states} states exceed {ENUMERATION_BUDGET}")
        flat = GroupSpec(self.p, (total,)).coords()
        x = flat[:, :self.d * self.n].reshape(-1, self.d, self.n)
        return x, flat[:, self.d * self.n:]

    def act(self, gamma, x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        g = np.asarray(gamma, dtype=np.int64)
        return x, (y + np.einsum("d,sdn->sn", g, x)) % self.p


# --- exact IP-sum distributions ----------------------------------------------

def binomial_mod_p(count: int, p: int) -> np.ndarray:
    """Law of ``Binomial(count, 1/2) mod p`` as exact dyadic probabilities."""
    num = [0] * p
    for j in range(count + 1):
        num[j % p] += math.comb(count, j)
    return np.array([float(Fraction(v, 2 ** count)) for v in num])


def _window_counts(w: IPWindow) -> np.ndarray | None:
    """Occurrences of each standard basis vector, or None if some generator
    in the window is not a basis vector."""
    g = w.window_gens()
    is_basis = (g.sum(axis=1) == 1) & (g.max(axis=1) == 1)
    if not np.all(is_basis):
        return None
    return np.bincount(np.argmax(g, axis=1), minlength=w.d)


def shift_distribution(w: IPWindow) -> np.ndarray:
    """Exact law of the IP sum over ``F_p^d``, flat in rank order.

    Windows made of basis vectors use the product of ``Binomial(count_j, 1/2)
    mod p`` laws; other windows convolve one generator at a time.
    """
    p, d = w.p, w.d
    counts = _window_counts(w)
    if counts is not None:
        dist = np.ones(())
        for c in counts:
            dist = np.multiply.outer(dist, binomial_mod_p(int(c), p))
        return np.asarray(dist).reshape(-1)
    dist = np.zeros((p,) * d)
    dist[(0,) * d] = 1.0
    axes = tuple(range(d))
    for g in w.window_gens():
        dist = 0.5 * (dist + np.roll(dist, tuple(int(v) for v in g), axis=axes))
    return dist.reshape(-1)


def total_variation_from_uniform(dist: np.ndarray) -> float:
    return 0.5 * float(np.abs(dist - 1.0 / dist.size).sum())


# --- double limit ----------------------------------------------------------

def _values(f) -> np.ndarray:
    if isinstance(f, (DenseFunction, SubsetMask)):
        return as_values(f).astype(float)
    return np.asarray(f)


def _pulled_back_pairings(sys: TranslationSystem, gens: np.ndarray) -> np.ndarray:
    """``<phi^T chi, gamma_n> mod p`` for every state character chi (rows)."""
    chars = sys.state_spec.coords()
    return (chars @ sys.phi @ gens.T) % sys.p


def _transform(f: np.ndarray, spec: GroupSpec) -> np.ndarray:
    return (np.fft.fftn(f.reshape(spec.shape)) / spec.size).reshape(-1) if spec.n else f.astype(complex)


def _inverse(coef: np.ndarray, spec: GroupSpec) -> np.ndarray:
    if not spec.n:
        return coef
    return (np.fft.ifftn(coef.reshape(spec.shape)) * spec.size).reshape(-1)


def _realify(z: np.ndarray, like: np.ndarray) -> np.ndarray:
    return z if np.iscomplexobj(like) else z.real


def double_limit_average(f, sys: TranslationSystem, gens,
                         grid: Iterable[tuple[int, int]]) -> dict[tuple[int, int], np.ndarray]:
    """``E_{gamma in IP window (D, N]} T^gamma f`` for every ``(D, N)`` in ``grid``.

    Uses the character expansion of ``f``: the coefficient of ``chi`` is
    multiplied by the product formula for ``chi o phi`` on the window.
    """
    if not isinstance(sys, TranslationSystem):
        raise TypeError("double_limit_average needs a translation system")
    spec = sys.state_spec
    fv = _values(f)
    g = _as_gens(gens, sys.p)
    coef = _transform(fv, spec)
    pair = _pulled_back_pairings(sys, g)
    half = (1 + np.exp(2j * np.pi * np.arange(sys.p) / sys.p)) / 2
    out = {}
    for D, N in grid:
        IPWindow(sys.p, g, D, N)  # validates the window
        weight = np.prod(half[pair[:, D:N]], axis=1)
        out[(D, N)] = _realify(_inverse(coef * weight, spec), fv)
    return out


def average_by_distribution(f, sys: TranslationSystem, w: IPWindow) -> np.ndarray:
    """Same average computed from the exact law of the IP sum (independent route)."""
    spec = sys.state_spec
    fv = _values(f)
    dist = shift_distribution(w)
    shifts = GroupSpec(sys.p, (w.d,)).coords()
    moved = (shifts @ sys.phi.T) % sys.p
    states = np.arange(spec.size)
    out = np.zeros(spec.size, dtype=np.result_type(fv, float))
    coords = spec.coords()
    for prob, v in zip(dist, moved):
        if prob:
            out = out + prob * fv[spec.rank_array(coords[states] + v)]
    return out


def junta_projection(f, sys: TranslationSystem, gens, D: int = 0) -> np.ndarray:
    """Keep the character components whose pull-back is trivial on ``gamma_n``, ``n > D``."""
    spec = sys.state_spec
    fv = _values(f)
    g = _as_gens(gens, sys.p)
    keep = ~np.any(_pulled_back_pairings(sys, g[D:]), axis=1)
    return _realify(_inverse(_transform(fv, spec) * keep, spec), fv)


# --- Weyl limit, translation case -----------------------------------------------

def correlation_profile(fs: Sequence, p: int, n: int) -> np.ndarray:
    """``C(v) = E_x prod_i f_i(x + i v)`` for every ``v`` in ``F_p^n`` (rank order)."""
    spec = GroupSpec(p, (n,))
    if spec.size ** 2 * len(fs) > ENUMERATION_BUDGET * 4:
        raise BudgetExceeded(f"|F_{p}^{n}|^2 too large for the correlation profile")
    coords = spec.coords()
    tables = [_values(f) for f in fs]
    prof = np.empty(spec.size)
    for v in range(spec.size):
        acc = np.ones(spec.size)
        for i, t in enumerate(tables):
            acc = acc * t[spec.rank_array(coords + i * coords[v])]
        prof[v] = acc.mean()
    return prof


def weyl_limit_experiment(fs: Sequence, p: int, n: int,
                          grid: Iterable[tuple[int, int]]) -> list[dict]:
    """Compare IP-averaged progression correlations with ``S^k``.

    Generators are the basis of ``F_p^n`` repeated cyclically.  For each
    ``(D, N)`` the value ``E_{gamma in IP window} E_x prod_i f_i(x + i gamma)``
    is computed exactly from the law of the IP sum.
    """
    k = len(fs)
    if k > p:
        raise ValueError(f"k={k} exceeds p={p}")
    spec = GroupSpec(p, (n,))
    target = s_k_bruteforce(list(_as_function(f, spec) for f in fs), HPSpec.default(spec, k))
    prof = correlation_profile(fs, p, n)
    grid = list(grid)
    L = max(N for _, N in grid)
    gens = repeated_basis(n, L)
    rows = []
    for D, N in grid:
        dist = shift_distribution(IPWindow(p, gens, D, N))
        value = float(dist @ prof)
        rows.append({"D": D, "N": N, "value": value, "target": target,
                     "deviation": abs(value - target),
                     "tv_bound": total_variation_from_uniform(dist)})
    return rows


def _as_function(f, spec: GroupSpec):
    if isinstance(f, (DenseFunction, SubsetMask)):
        return f
    return DenseFunction(spec, np.asarray(f, dtype=float))


def matrix_correlation(A: SubsetMask, gamma, d: int | None = None) -> Fraction:
    """``mu(A' & T^-g A' & T^-2g A')`` on the matrix skew system, ``A' = X x A``.

    Summed directly over every state of the truncated system.
    """
    spec = A.spec
    if spec.m != 1:
        raise ValueError("A must live in a single-block group F_p^n")
    p, n = spec.p, spec.n
    g = np.asarray(gamma, dtype=np.int64) % p
    d = len(g) if d is None else d
    if len(g) != d:
        raise ValueError(f"gamma has {len(g)} coordinates, expected d={d}")
    sys = MatrixSkewSystem(p, n, d)
    if not g.any():
        warnings.warn("gamma = 0 acts trivially; returning mu(A)", DegenerateWarning,
                      stacklevel=2)
        return Fraction(A.cardinality, spec.size)
    x, y = sys.states()
    _, y1 = sys.act(g, x, y)
    _, y2 = sys.act((2 * g) % p, x, y)
    inside = A.bits[spec.rank_array(y)] & A.bits[spec.rank_array(y1)] & A.bits[spec.rank_array(y2)]
    return Fraction(int(np.count_nonzero(inside)), sys.num_states)
