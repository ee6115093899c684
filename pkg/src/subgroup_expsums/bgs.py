"""Sumsets, product sets, and a constructive Balog-Gowers-Szemeredi extractor
over a finite cyclic group Z/nZ."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable

from .errors import ExtractionFailed, InvalidInput, ZeroElement

BGS_DOUBLING = Fraction(2**37)
BGS_DOUBLING_EXP = 8
BGS_SIZE = Fraction(1, 2**15)
BGS_SIZE_EXP = 4
EXHAUSTIVE_LIMIT = 20


def sumset(A: Iterable[int], B: Iterable[int], n: int) -> frozenset[int]:
    B = tuple(B)
    return frozenset((a + b) % n for a in A for b in B)


def productset(A: Iterable[int], B: Iterable[int], p: int) -> frozenset[int]:
    A, B = tuple(A), tuple(B)
    if any(x % p == 0 for x in A + B):
        raise ZeroElement("product sets are taken in F_p^x")
    return frozenset(a * b % p for a in A for b in B)


@dataclass(frozen=True)
class SumProductScore:
    size: int
    sumset_size: int
    productset_size: int
    score: int
    exponent: float | None

    def to_json(self) -> dict:
        return {
            "size": self.size,
            "sumset_size": self.sumset_size,
            "productset_size": self.productset_size,
            "score": self.score,
            "exponent": self.exponent,
        }


def sum_product_score(A: Iterable[int], p: int) -> SumProductScore:
    """|A+A| + |A.A| and the empirical exponent log_|A| of it (None for |A| < 2)."""
    A = tuple(sorted(set(a % p for a in A)))
    s = len(sumset(A, A, p))
    m = len(productset(A, A, p))
    exponent = math.log(s + m) / math.log(len(A)) if len(A) >= 2 else None
    return SumProductScore(len(A), s, m, s + m, exponent)


@dataclass(frozen=True)
class BgsInstance:
    """Finite A, B in Z/nZ with a graph G in A x B whose sums S are few.

    ``N`` and ``alpha`` may be rational.
    """

    n: int
    A: frozenset
    B: frozenset
    G: frozenset
    N: Fraction
    alpha: Fraction

    def __post_init__(self):
        object.__setattr__(self, "A", frozenset(a % self.n for a in self.A))
        object.__setattr__(self, "B", frozenset(b % self.n for b in self.B))
        object.__setattr__(self, "G", frozenset((a % self.n, b % self.n) for a, b in self.G))
        object.__setattr__(self, "N", Fraction(self.N))
        object.__setattr__(self, "alpha", Fraction(self.alpha))
        if not self.G <= {(a, b) for a in self.A for b in self.B}:
            raise InvalidInput("G must be a subset of A x B")
        if len(self.A) > self.N or len(self.B) > self.N or len(self.sums) > self.N:
            raise InvalidInput("|A|, |B| and |S| must not exceed N")
        if not 0 < self.alpha <= 1:
            raise InvalidInput("alpha must lie in (0, 1]")
        if len(self.G) < self.alpha * self.N**2:
            raise InvalidInput("|G| < alpha N^2")

    @property
    def sums(self) -> frozenset:
        return frozenset((a + b) % self.n for a, b in self.G)

    @property
    def doubling_bound(self) -> Fraction:
        return BGS_DOUBLING / self.alpha**BGS_DOUBLING_EXP * self.N

    @property
    def size_bound(self) -> Fraction:
        return self.alpha**BGS_SIZE_EXP * BGS_SIZE * self.N

    def degrees(self) -> dict[int, int]:
        deg = {a: 0 for a in self.A}
        for a, _ in self.G:
            deg[a] += 1
        return deg


@dataclass
class ExtractionResult:
    A_prime: tuple[int, ...]
    doubling: int
    certified: dict[str, bool]
    strategy: str
    doubling_bound: Fraction = field(repr=False)
    size_bound: Fraction = field(repr=False)

    @property
    def ok(self) -> bool:
        return all(self.certified.values())


def max_doubling(size: int, n: int) -> int:
    """Largest possible |X+X| for |X| = size in Z/nZ."""
    return min(n, size * (size + 1) // 2)


def _popularity_order(A: Iterable[int], degree: dict[int, int]) -> list[int]:
    return sorted(A, key=lambda a: (-degree.get(a, 0), a))


def exhaustive_small_doubling(A: Iterable[int], n: int, max_doubling_: Fraction, min_size: int):
    """First (lexicographic) subset of size ``min_size`` with |X+X| <= max_doubling_, or None.

    Any certified set contains such a subset, so this decides existence.
    """
    A = sorted(A)
    if min_size > len(A):
        return None
    for combo in combinations(A, min_size):
        if len(sumset(combo, combo, n)) <= max_doubling_:
            return combo
    return None


def find_small_doubling_subset(A: Iterable[int], n: int, max_doubling_: Fraction, min_size: int,
                               degree: dict[int, int] | None = None,
                               exhaustive_limit: int = EXHAUSTIVE_LIMIT):
    """Search for X subset of A with |X+X| <= max_doubling_ and |X| >= min_size.

    Returns (X, strategy) or (None, reason).
    """
    A = sorted(set(A))
    degree = degree or {}
    min_size = max(1, min_size)
    if min_size > len(A):
        return None, "too-few-elements"
    if max_doubling_ >= max_doubling(len(A), n):
        return tuple(A), "vacuous"
    chosen: list[int] = []
    sums: set[int] = set()
    for a in _popularity_order(A, degree):
        new = {(a + b) % n for b in chosen} | {(2 * a) % n}
        if len(sums | new) <= max_doubling_:
            chosen.append(a)
            sums |= new
    if len(chosen) >= min_size:
        return tuple(sorted(chosen)), "greedy"
    if len(A) <= exhaustive_limit:
        found = exhaustive_small_doubling(A, n, max_doubling_, min_size)
        if found is not None:
            grown = list(found)
            sums = set(sumset(grown, grown, n))
            for a in A:
                if a in grown:
                    continue
                new = {(a + b) % n for b in grown} | {(2 * a) % n}
                if len(sums | new) <= max_doubling_:
                    grown.append(a)
                    sums |= new
            return tuple(sorted(grown)), "exhaustive"
        return None, "exhaustive-none"
    return None, "greedy-failed"


def bgs_extract(instance: BgsInstance) -> ExtractionResult:
    """Return A' in A with |A'+A'| <= 2^37 N / alpha^8 and |A'| >= alpha^4 N / 2^15."""
    dbound = instance.doubling_bound
    sbound = instance.size_bound
    min_size = max(1, math.ceil(sbound))
    found, strategy = find_small_doubling_subset(
        instance.A, instance.n, dbound, min_size, degree=instance.degrees()
    )
    if found is None:
        raise ExtractionFailed(
            f"no A' found ({strategy}); |A|={len(instance.A)}, bounds {float(dbound):.3g}/{float(sbound):.3g}"
        )
    doubling = len(sumset(found, found, instance.n))
    certified = {"i": doubling <= dbound, "ii": len(found) >= sbound}
    if not all(certified.values()):
        raise ExtractionFailed(f"candidate A' fails certification: {certified}")
    return ExtractionResult(found, doubling, certified, strategy, dbound, sbound)
