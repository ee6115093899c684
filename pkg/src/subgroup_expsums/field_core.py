"""Prime field F_p: primitive roots, discrete-log tables, subgroups and segments."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from math import gcd

import numpy as np
from sympy import divisors, factorint, isprime

from .config import p_cap as _p_cap
from .errors import (
    EmptySegment,
    IndexNotDividing,
    InvalidInput,
    NotPrime,
    TooLarge,
    ZeroArgument,
)


@lru_cache(maxsize=64)
def psi_table(p: int) -> np.ndarray:
    """Values e^{2 pi i j / p} for j = 0..p-1 (read-only)."""
    angles = 2.0 * np.pi * np.arange(p, dtype=np.float64) / p
    table = np.cos(angles) + 1j * np.sin(angles)
    table[0] = 1.0
    table.flags.writeable = False
    return table


def least_primitive_root(p: int) -> int:
    if p == 2:
        return 1
    qs = list(factorint(p - 1))
    for g in range(2, p):
        if all(pow(g, (p - 1) // q, p) != 1 for q in qs):
            return g
    raise NotPrime(f"{p} has no primitive root")


@dataclass(frozen=True, eq=False)
class FieldContext:
    """Immutable view of F_p with a fixed primitive root.

    ``log_table[x]`` is the discrete log of x (``-1`` at x = 0),
    ``exp_table[t]`` is g^t for 0 <= t < p - 1.
    """

    p: int
    g: int
    log_table: np.ndarray = field(repr=False)
    exp_table: np.ndarray = field(repr=False)
    psi_table: np.ndarray = field(repr=False)

    @property
    def order(self) -> int:
        return self.p - 1

    def log(self, s: int) -> int:
        return discrete_log(self, s)

    def power(self, t: int) -> int:
        return int(self.exp_table[t % (self.p - 1)])

    def inverse(self, x: int) -> int:
        x %= self.p
        if x == 0:
            raise ZeroArgument("0 has no inverse")
        return pow(x, self.p - 2, self.p)

    def element_order(self, a: int) -> int:
        return (self.p - 1) // gcd(self.log(a), self.p - 1)


def make_field_context(p: int, cap: int | None = None) -> FieldContext:
    p = int(p)
    if p < 2 or not isprime(p):
        raise NotPrime(f"{p} is not prime")
    if p < 3:
        raise InvalidInput("p must be an odd prime")
    limit = _p_cap(cap)
    if p > limit:
        raise TooLarge(f"p={p} exceeds the prime cap {limit}")
    g = least_primitive_root(p)
    exp_table = np.empty(p - 1, dtype=np.int64)
    x = 1
    for t in range(p - 1):
        exp_table[t] = x
        x = x * g % p
    log_table = np.full(p, -1, dtype=np.int64)
    log_table[exp_table] = np.arange(p - 1, dtype=np.int64)
    exp_table.flags.writeable = False
    log_table.flags.writeable = False
    return FieldContext(p, g, log_table, exp_table, psi_table(p))


def discrete_log(ctx: FieldContext, s: int) -> int:
    s %= ctx.p
    if s == 0:
        raise ZeroArgument("discrete log of 0 is undefined")
    return int(ctx.log_table[s])


@dataclass(frozen=True)
class SubgroupSpec:
    """Either a full multiplicative subgroup (``kind='subgroup'``, by index)
    or a geometric segment ``{g0^t : 0 <= t < length}``."""

    p: int
    kind: str
    elements: tuple[int, ...]
    generator: int
    index: int | None = None
    length: int | None = None

    @property
    def order(self) -> int:
        return len(self.elements)

    def __contains__(self, x: int) -> bool:
        return x % self.p in self._members

    @cached_property
    def _members(self) -> frozenset:
        return frozenset(self.elements)

    def label(self) -> str:
        if self.kind == "subgroup":
            return f"subgroup(p={self.p}, index={self.index})"
        return f"segment(p={self.p}, g0={self.generator}, T={self.length})"


def subgroup(ctx: FieldContext, m: int) -> SubgroupSpec:
    m = int(m)
    if m < 1 or (ctx.p - 1) % m:
        raise IndexNotDividing(f"index {m} does not divide p-1={ctx.p - 1}")
    elements = tuple(sorted(int(x) for x in ctx.exp_table[::m]))
    return SubgroupSpec(ctx.p, "subgroup", elements, ctx.power(m), index=m)


def all_subgroups(ctx: FieldContext):
    for m in divisors(ctx.p - 1):
        yield subgroup(ctx, m)


def segment(ctx: FieldContext, g0: int, T: int) -> SubgroupSpec:
    g0 %= ctx.p
    T = int(T)
    if g0 == 0:
        raise ZeroArgument("segment generator must be nonzero")
    if T < 1:
        raise EmptySegment(f"segment length {T} < 1")
    order = ctx.element_order(g0)
    if T > order:
        raise InvalidInput(f"T={T} exceeds ord({g0})={order}")
    powers = []
    x = 1
    for _ in range(T):
        powers.append(x)
        x = x * g0 % ctx.p
    return SubgroupSpec(ctx.p, "segment", tuple(sorted(powers)), g0, length=T)


def segment_powers(ctx: FieldContext, g0: int, T: int) -> list[int]:
    """Elements g0^0, ..., g0^(T-1) in exponent order."""
    out, x = [], 1
    for _ in range(T):
        out.append(x)
        x = x * g0 % ctx.p
    return out
