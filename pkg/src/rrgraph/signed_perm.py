"""Signed permutations, the hyperoctahedral group B_n.

A signed permutation of length n is stored as a tuple of n nonzero integers
whose absolute values form a permutation of 1..n. Positions in the public API
are 1-based.

Group law: ``compose(v, w)[h] = sign(w[h]) * v[|w[h]| - 1]``, i.e. ``w`` acts on
the positions of ``v`` from the right. With this convention applying the
reversal rho(i, j) to v is ``compose(v, reversal_as_perm(n, i, j))``.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from enum import Enum
from functools import cached_property, lru_cache
from typing import Iterator, List, Sequence, Tuple, Union

import numpy as np

from rrgraph.errors import InvalidParameterError

Entries = Tuple[int, ...]

_PERM_RE = re.compile(r"^\(\s*([+-]?\d+(?:\s*,\s*[+-]?\d+)*)\s*\)$")


@dataclass(frozen=True)
class SignedPerm:
    entries: Entries

    def __post_init__(self) -> None:
        entries = tuple(int(e) for e in self.entries)
        object.__setattr__(self, "entries", entries)
        n = len(entries)
        if n == 0:
            raise InvalidParameterError("a signed permutation needs n >= 1")
        if 0 in entries or sorted(abs(e) for e in entries) != list(range(1, n + 1)):
            raise InvalidParameterError(f"not a signed permutation: {entries}")

    @classmethod
    def trusted(cls, entries: Entries) -> SignedPerm:
        """Build without validation; callers guarantee the invariants."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "entries", entries)
        return obj

    @property
    def n(self) -> int:
        return len(self.entries)

    def __str__(self) -> str:
        return format_perm(self)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[int]:
        return iter(self.entries)


@dataclass(frozen=True)
class Reversal:
    i: int
    j: int

    def check(self, n: int) -> None:
        if not 1 <= self.i <= self.j <= n:
            raise InvalidParameterError(f"reversal ({self.i},{self.j}) out of range for n={n}")


@dataclass(frozen=True)
class SignChangeTransposition:
    i: int
    j: int

    def check(self, n: int) -> None:
        if not 1 <= self.i <= self.j <= n:
            raise InvalidParameterError(
                f"transposition ({self.i},{self.j}) out of range for n={n}"
            )


Move = Union[Reversal, SignChangeTransposition]


class GeneratorKind(str, Enum):
    REVERSALS = "reversals"
    TRANSPOSITIONS = "transpositions"
    # tau(i, j) with i < j only; leaves out the single sign flips tau(i, i)
    TRANSPOSITIONS_NO_FLIPS = "transpositions_no_flips"


@dataclass(frozen=True)
class GeneratorSet:
    kind: GeneratorKind
    n: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", GeneratorKind(self.kind))
        if self.n < 1:
            raise InvalidParameterError("generator sets need n >= 1")
        if self.kind is GeneratorKind.TRANSPOSITIONS_NO_FLIPS and self.n < 2:
            raise InvalidParameterError("transpositions without flips need n >= 2")

    @classmethod
    def reversals(cls, n: int) -> GeneratorSet:
        return cls(GeneratorKind.REVERSALS, n)

    @classmethod
    def transpositions(cls, n: int, flips: bool = True) -> GeneratorSet:
        kind = GeneratorKind.TRANSPOSITIONS if flips else GeneratorKind.TRANSPOSITIONS_NO_FLIPS
        return cls(kind, n)

    def with_n(self, n: int) -> GeneratorSet:
        return GeneratorSet(self.kind, n)

    @property
    def degree(self) -> int:
        if self.kind is GeneratorKind.TRANSPOSITIONS_NO_FLIPS:
            return math.comb(self.n, 2)
        return math.comb(self.n + 1, 2)

    @cached_property
    def moves(self) -> List[Move]:
        pairs = [(i, j) for i in range(1, self.n + 1) for j in range(i, self.n + 1)]
        if self.kind is GeneratorKind.REVERSALS:
            return [Reversal(i, j) for i, j in pairs]
        if self.kind is GeneratorKind.TRANSPOSITIONS:
            return [SignChangeTransposition(i, j) for i, j in pairs]
        return [SignChangeTransposition(i, j) for i, j in pairs if i < j]

    @cached_property
    def elements(self) -> List[SignedPerm]:
        return [move_as_perm(self.n, move) for move in self.moves]

    @cached_property
    def index_arrays(self) -> List[Tuple[np.ndarray, np.ndarray]]:
        """Per generator, the (source column, sign) pair used by ``compose_array``."""
        out = []
        for g in self.elements:
            e = np.asarray(g.entries, dtype=np.int64)
            out.append((np.abs(e) - 1, np.sign(e).astype(np.int8)))
        return out


# -- construction and parsing -------------------------------------------------


def identity(n: int) -> SignedPerm:
    if n < 1:
        raise InvalidParameterError("identity needs n >= 1")
    return SignedPerm.trusted(tuple(range(1, n + 1)))


def reversal_as_perm(n: int, i: int, j: int) -> SignedPerm:
    Reversal(i, j).check(n)
    entries = list(range(1, n + 1))
    for h in range(i, j + 1):
        entries[h - 1] = -(i + j - h)
    return SignedPerm.trusted(tuple(entries))


def transposition_as_perm(n: int, i: int, j: int) -> SignedPerm:
    SignChangeTransposition(i, j).check(n)
    entries = list(range(1, n + 1))
    entries[i - 1] = -j
    entries[j - 1] = -i
    return SignedPerm.trusted(tuple(entries))


def move_as_perm(n: int, move: Move) -> SignedPerm:
    if isinstance(move, Reversal):
        return reversal_as_perm(n, move.i, move.j)
    return transposition_as_perm(n, move.i, move.j)


def parse(text: str) -> SignedPerm:
    """Parse ``"(+1,-3,+2)"``; whitespace is optional and ``+`` may be omitted."""
    match = _PERM_RE.match(text.strip())
    if not match:
        raise InvalidParameterError(f"cannot parse signed permutation: {text!r}")
    return SignedPerm(tuple(int(tok) for tok in match.group(1).split(",")))


def format_perm(v: SignedPerm) -> str:
    return "(" + ",".join(f"{e:+d}" for e in v.entries) + ")"


# -- group operations ---------------------------------------------------------


def _same_n(v: SignedPerm, w: SignedPerm) -> None:
    if v.n != w.n:
        raise InvalidParameterError(f"mismatched lengths: {v.n} != {w.n}")


def compose_entries(v: Entries, w: Entries) -> Entries:
    return tuple(v[x - 1] if x > 0 else -v[-x - 1] for x in w)


def compose(v: SignedPerm, w: SignedPerm) -> SignedPerm:
    _same_n(v, w)
    return SignedPerm.trusted(compose_entries(v.entries, w.entries))


def inverse(v: SignedPerm) -> SignedPerm:
    # compose(v, u) = id needs sign(u_h) * v[|u_h|] = h, so u at position |v_k| is sign(v_k) * k
    out = [0] * v.n
    for k, e in enumerate(v.entries, start=1):
        out[abs(e) - 1] = k if e > 0 else -k
    return SignedPerm.trusted(tuple(out))


def apply_reversal(v: SignedPerm, r: Reversal) -> SignedPerm:
    r.check(v.n)
    e = v.entries
    segment = tuple(-x for x in reversed(e[r.i - 1 : r.j]))
    return SignedPerm.trusted(e[: r.i - 1] + segment + e[r.j :])


def apply_transposition(v: SignedPerm, t: SignChangeTransposition) -> SignedPerm:
    t.check(v.n)
    e = list(v.entries)
    a, b = e[t.i - 1], e[t.j - 1]
    e[t.i - 1], e[t.j - 1] = -b, -a
    return SignedPerm.trusted(tuple(e))


def generators(gs: GeneratorSet) -> List[SignedPerm]:
    return list(gs.elements)


# -- ranking ------------------------------------------------------------------


def group_order(n: int) -> int:
    return (2**n) * math.factorial(n)


def rank_entries(e: Sequence[int]) -> int:
    n = len(e)
    lehmer = 0
    for i in range(n):
        a = abs(e[i])
        smaller = sum(1 for j in range(i + 1, n) if abs(e[j]) < a)
        lehmer = lehmer * (n - i) + smaller
    signs = 0
    for i, x in enumerate(e):
        if x < 0:
            signs |= 1 << i
    return (lehmer << n) | signs


def rank(v: SignedPerm) -> int:
    """Mixed-radix code: Lehmer rank of ``|v|`` times 2^n plus the sign bits."""
    return rank_entries(v.entries)


def unrank(n: int, r: int) -> SignedPerm:
    if n < 1:
        raise InvalidParameterError("unrank needs n >= 1")
    if not 0 <= r < group_order(n):
        raise InvalidParameterError(f"rank {r} out of range for n={n}")
    signs = r & ((1 << n) - 1)
    lehmer = r >> n
    digits = []
    for radix in range(1, n + 1):
        digits.append(lehmer % radix)
        lehmer //= radix
    digits.reverse()
    pool = list(range(1, n + 1))
    entries = []
    for i, d in enumerate(digits):
        value = pool.pop(d)
        entries.append(-value if signs >> i & 1 else value)
    return SignedPerm.trusted(tuple(entries))


@lru_cache(maxsize=8)
def all_signed_perms(n: int) -> np.ndarray:
    """All of B_n as an ``(|B_n|, n)`` int8 array; row r is ``unrank(n, r)``."""
    perms = np.array(list(itertools.permutations(range(1, n + 1))), dtype=np.int8)
    width = 1 << n
    bits = (np.arange(width, dtype=np.int64)[:, None] >> np.arange(n)) & 1
    signs = (1 - 2 * bits).astype(np.int8)
    out = np.repeat(perms, width, axis=0) * np.tile(signs, (len(perms), 1))
    out.setflags(write=False)
    return out


def rank_array(a: np.ndarray) -> np.ndarray:
    """Vectorized ``rank`` over the rows of an ``(N, n)`` array."""
    n = a.shape[1]
    mags = np.abs(a)
    lehmer = np.zeros(a.shape[0], dtype=np.int64)
    for i in range(n):
        smaller = np.zeros(a.shape[0], dtype=np.int64)
        for j in range(i + 1, n):
            smaller += mags[:, j] < mags[:, i]
        lehmer = lehmer * (n - i) + smaller
    signs = np.zeros(a.shape[0], dtype=np.int64)
    for i in range(n):
        signs |= (a[:, i] < 0).astype(np.int64) << i
    return (lehmer << n) | signs


def compose_array(a: np.ndarray, columns: np.ndarray, sign: np.ndarray) -> np.ndarray:
    """Right-multiply every row of ``a`` by the generator given as (columns, sign)."""
    return a[:, columns] * sign


# -- ordering -----------------------------------------------------------------


def entry_key(e: int) -> int:
    # -1 < +1 < -2 < +2 < ...
    return 2 * abs(e) - (1 if e < 0 else 0)


def lex_key(v: SignedPerm) -> Tuple[int, ...]:
    return tuple(entry_key(e) for e in v.entries)


def lex_compare(v: SignedPerm, w: SignedPerm) -> int:
    """-1, 0 or 1 as ``v`` sorts before, equal to or after ``w``."""
    _same_n(v, w)
    a, b = lex_key(v), lex_key(w)
    return (a > b) - (a < b)
