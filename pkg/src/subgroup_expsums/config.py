"""Runtime caps, tolerances and small parsing helpers shared by all modules."""

from __future__ import annotations

import numbers
import os
from dataclasses import dataclass, fields, replace
from fractions import Fraction

DEFAULT_P_CAP = 200_000
DEFAULT_K_CAP = 64
P_CAP_ENV = "EXPSUM_P_CAP"

# |value|^(2k) below this is treated as an exact zero in spectral sums
UNDERFLOW_CLAMP = 1e-300


def p_cap(override: int | None = None) -> int:
    if override is not None:
        return int(override)
    env = os.environ.get(P_CAP_ENV)
    if env:
        return int(env)
    return DEFAULT_P_CAP


@dataclass(frozen=True)
class Tolerances:
    unit_modulus: float = 1e-12
    parseval: float = 1e-9
    dual_path: float = 1e-8
    boundary: float = 1e-9
    bracket: float = 1e-9
    # relative slack for double-precision inequality checks
    inequality: float = 1e-12

    def override(self, spec: str | None) -> "Tolerances":
        """Apply ``name=value,name=value`` overrides."""
        if not spec:
            return self
        known = {f.name for f in fields(self)}
        changes = {}
        for item in spec.split(","):
            item = item.strip()
            if not item:
                continue
            name, _, value = item.partition("=")
            name = name.strip()
            if name not in known:
                raise ValueError(f"unknown tolerance {name!r}")
            changes[name] = float(value)
        return replace(self, **changes)


TOL = Tolerances()


def as_fraction(x) -> Fraction:
    """Exact rational from int, Fraction, decimal string or float (via its repr)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, numbers.Integral):
        return Fraction(int(x))
    if isinstance(x, float):
        return Fraction(repr(float(x)))
    return Fraction(str(x).strip())


def frac_str(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_frac_str(s: str) -> Fraction:
    return Fraction(s)


def leq(lhs: float, rhs: float, rel: float = TOL.inequality) -> bool:
    """``lhs <= rhs`` allowing relative rounding slack on doubles."""
    return lhs <= rhs + rel * max(abs(lhs), abs(rhs))
