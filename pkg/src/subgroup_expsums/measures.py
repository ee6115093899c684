"""Probability measures on F_p.

A ``Measure`` stores its masses exactly as integer weights over one common
denominator; its Fourier transform is a double-precision mirror computed on
demand.  Convolutions are exact (Kronecker substitution into one big-integer
product), so denominators such as |H|^(2k) never lose precision.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import gcd
from typing import Iterable, Sequence

import numpy as np

from .config import frac_str
from .errors import EmptySupport, InvalidInput, ModulusMismatch
from .field_core import psi_table

_CHUNK_ENTRIES = 1 << 22


def _reduce(weights: Sequence[int], denom: int) -> tuple[tuple[int, ...], int]:
    d = gcd(denom, *weights)
    if d > 1:
        return tuple(w // d for w in weights), denom // d
    return tuple(weights), denom


@dataclass(frozen=True, eq=False)
class Measure:
    """Probability measure ``mass[x] = weights[x] / denom`` on F_p."""

    p: int
    weights: tuple[int, ...]
    denom: int

    def __post_init__(self):
        if len(self.weights) != self.p:
            raise InvalidInput(f"expected {self.p} weights, got {len(self.weights)}")
        if any(w < 0 for w in self.weights):
            raise InvalidInput("masses must be nonnegative")
        if self.denom <= 0 or sum(self.weights) != self.denom:
            raise InvalidInput("masses must sum to exactly 1")
        weights, denom = _reduce(tuple(int(w) for w in self.weights), int(self.denom))
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "denom", denom)

    @classmethod
    def from_weights(cls, p: int, weights: Iterable[int]) -> "Measure":
        """Normalise nonnegative integer weights to a probability measure."""
        weights = tuple(int(w) for w in weights)
        total = sum(weights)
        if total <= 0:
            raise EmptySupport("weights have no positive mass")
        return cls(p, weights, total)

    @classmethod
    def from_fractions(cls, p: int, masses: Sequence) -> "Measure":
        masses = [Fraction(m) for m in masses]
        den = 1
        for m in masses:
            den = den * m.denominator // gcd(den, m.denominator)
        return cls(p, tuple(m.numerator * (den // m.denominator) for m in masses), den)

    def __eq__(self, other):
        if not isinstance(other, Measure):
            return NotImplemented
        return (self.p, self.denom, self.weights) == (other.p, other.denom, other.weights)

    def __hash__(self):
        return hash((self.p, self.denom, self.weights))

    @property
    def mass(self) -> list[Fraction]:
        return [Fraction(w, self.denom) for w in self.weights]

    def __getitem__(self, x: int) -> Fraction:
        return Fraction(self.weights[x % self.p], self.denom)

    @cached_property
    def support(self) -> tuple[int, ...]:
        return tuple(x for x, w in enumerate(self.weights) if w)

    @cached_property
    def as_float(self) -> np.ndarray:
        # int / int is correctly rounded even for huge operands
        arr = np.array([w / self.denom for w in self.weights], dtype=np.float64)
        arr.flags.writeable = False
        return arr

    @cached_property
    def spectral_mirror(self) -> np.ndarray:
        spec = dft(self.as_float, self.p, support=self.support)
        spec.flags.writeable = False
        return spec

    def max_mass(self) -> Fraction:
        return Fraction(max(self.weights), self.denom)

    def l2_squared(self) -> Fraction:
        """Exact sum of squared masses."""
        return Fraction(sum(w * w for w in self.weights), self.denom * self.denom)

    def to_json(self) -> dict:
        return {"p": self.p, "mass": [frac_str(m) for m in self.mass]}

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def from_json(cls, obj) -> "Measure":
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls.from_fractions(int(obj["p"]), [Fraction(s) for s in obj["mass"]])


@dataclass(frozen=True, eq=False)
class PhiFunction:
    """phi(x) = p * (mu * mu^-)(x), stored as ``numer[x] / denom``."""

    p: int
    numer: tuple[int, ...]
    denom: int

    @property
    def values(self) -> list[Fraction]:
        return [Fraction(n, self.denom) for n in self.numer]

    def __getitem__(self, x: int) -> Fraction:
        return Fraction(self.numer[x % self.p], self.denom)

    @property
    def at_zero(self) -> Fraction:
        return self[0]

    @cached_property
    def as_float(self) -> np.ndarray:
        return np.array([n / self.denom for n in self.numer], dtype=np.float64)


# --- transforms -------------------------------------------------------------


def dft(values: np.ndarray, p: int, support: Sequence[int] | None = None, sign: int = 1) -> np.ndarray:
    """out[xi] = sum_x values[x] * psi(sign * x * xi), by direct O(p * |support|) summation."""
    values = np.asarray(values)
    psi = psi_table(p)
    if support is None:
        support = np.nonzero(values)[0]
    support = np.asarray(support, dtype=np.int64)
    out = np.zeros(p, dtype=np.complex128)
    if support.size == 0:
        return out
    vals = values[support].astype(np.complex128)
    step = max(1, _CHUNK_ENTRIES // support.size)
    for start in range(0, p, step):
        xi = np.arange(start, min(p, start + step), dtype=np.int64)
        idx = (sign * np.outer(xi, support)) % p
        out[start : start + xi.size] = psi[idx] @ vals
    return out


def fourier(mu: Measure) -> np.ndarray:
    """mu_hat(xi) = sum_x mu(x) psi(x xi)."""
    return mu.spectral_mirror


def inverse_fourier(spectrum: np.ndarray, p: int) -> np.ndarray:
    """Real part of (1/p) sum_xi spectrum[xi] psi(-x xi)."""
    return (dft(np.asarray(spectrum, dtype=np.complex128), p, sign=-1) / p).real


def dilation_sum(w: np.ndarray, weights: np.ndarray, p: int, support: Sequence[int] | None = None) -> np.ndarray:
    """out[xi] = sum_x weights[x] * w[x * xi mod p]."""
    w = np.asarray(w, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    if support is None:
        support = np.nonzero(weights)[0]
    support = np.asarray(support, dtype=np.int64)
    out = np.zeros(p, dtype=np.float64)
    if support.size == 0:
        return out
    vals = weights[support]
    step = max(1, _CHUNK_ENTRIES // support.size)
    for start in range(0, p, step):
        xi = np.arange(start, min(p, start + step), dtype=np.int64)
        out[start : start + xi.size] = w[np.outer(xi, support) % p] @ vals
    return out


# --- exact algebra ----------------------------------------------------------


def cyclic_convolve_int(a: Sequence[int], b: Sequence[int], p: int) -> list[int]:
    """Exact cyclic convolution of nonnegative integer sequences of length p."""
    ma, mb = max(a), max(b)
    if ma == 0 or mb == 0:
        return [0] * p
    width = (ma.bit_length() + mb.bit_length() + p.bit_length() + 8) // 8
    pack_a = int.from_bytes(b"".join(x.to_bytes(width, "little") for x in a), "little")
    pack_b = pack_a if a is b else int.from_bytes(
        b"".join(x.to_bytes(width, "little") for x in b), "little"
    )
    raw = (pack_a * pack_b).to_bytes(width * (2 * p - 1), "little")
    coeffs = [int.from_bytes(raw[i * width : (i + 1) * width], "little") for i in range(2 * p - 1)]
    out = coeffs[:p]
    for i in range(p - 1):
        out[i] += coeffs[p + i]
    return out


def uniform_on(p: int, support: Iterable[int]) -> Measure:
    points = {int(x) % p for x in support}
    if not points:
        raise EmptySupport("support must be nonempty")
    weights = [0] * p
    for x in points:
        weights[x] = 1
    return Measure(p, tuple(weights), len(points))


def point_mass(p: int, a: int) -> Measure:
    return uniform_on(p, [a])


def reflect(mu: Measure) -> Measure:
    p = mu.p
    return Measure(p, tuple(mu.weights[(-x) % p] for x in range(p)), mu.denom)


def convolve(mu: Measure, rho: Measure) -> Measure:
    if mu.p != rho.p:
        raise ModulusMismatch(f"moduli differ: {mu.p} vs {rho.p}")
    weights = cyclic_convolve_int(mu.weights, rho.weights, mu.p)
    return Measure(mu.p, tuple(weights), mu.denom * rho.denom)


def _square(mu: Measure) -> Measure:
    weights = cyclic_convolve_int(mu.weights, mu.weights, mu.p)
    return Measure(mu.p, tuple(weights), mu.denom * mu.denom)


def nu_of(mu: Measure) -> Measure:
    """nu = mu * mu^-."""
    return convolve(mu, reflect(mu))


def k_fold_nu(mu: Measure, k: int) -> Measure:
    """k-fold convolution power of mu * mu^-, by binary exponentiation."""
    if k < 1:
        raise InvalidInput("k must be >= 1")
    base = nu_of(mu)
    result = None
    while k:
        if k & 1:
            result = base if result is None else convolve(result, base)
        k >>= 1
        if k:
            base = _square(base)
    return result


def phi_of(mu: Measure) -> PhiFunction:
    nu = nu_of(mu)
    numer = tuple(mu.p * w for w in nu.weights)
    numer, denom = _reduce(numer, nu.denom)
    return PhiFunction(mu.p, numer, denom)


def random_measure(p: int, rng: np.random.Generator, support_size: int | None = None, max_weight: int = 1000) -> Measure:
    """Random measure with integer weights in [1, max_weight] on a random support."""
    if support_size is None:
        support_size = int(rng.integers(1, p + 1))
    support = rng.choice(p, size=support_size, replace=False)
    weights = [0] * p
    for x in support:
        weights[int(x)] = int(rng.integers(1, max_weight + 1))
    return Measure.from_weights(p, weights)
