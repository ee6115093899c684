"""Large Fourier coefficients, the (k, delta) selection loop and the
smear-out / statistical multiplicative stability checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .config import DEFAULT_K_CAP, TOL, UNDERFLOW_CLAMP, Tolerances, as_fraction, frac_str, leq
from .errors import BoundaryAmbiguity, EtaTooSmall, InequalityViolated, KCapExceeded, LoopCapExceeded
from .field_core import FieldContext, SubgroupSpec
from .measures import Measure, dilation_sum, k_fold_nu, uniform_on


def subgroup_measure(H: SubgroupSpec) -> Measure:
    return uniform_on(H.p, H.elements)


def coefficient_magnitudes(mu: Measure) -> np.ndarray:
    a = np.abs(mu.spectral_mirror)
    a[0] = 1.0
    return a


def nu_hat(mu: Measure, k: int) -> tuple[np.ndarray, int]:
    """|mu_hat|^(2k) with sub-UNDERFLOW_CLAMP values set to 0; returns (values, clamp count)."""
    with np.errstate(under="ignore"):
        vals = coefficient_magnitudes(mu) ** (2 * k)
    tiny = vals < UNDERFLOW_CLAMP
    clamped = int(np.count_nonzero(tiny & (vals > 0)))
    vals[tiny] = 0.0
    return vals, clamped


def _pow(vals: np.ndarray, e: int) -> np.ndarray:
    with np.errstate(under="ignore"):
        return vals**e


def lambda_delta(mu: Measure, delta, tol: Tolerances = TOL) -> tuple[int, ...]:
    """Frequencies with |mu_hat(xi)| > p^(-delta); xi = 0 is always included."""
    delta = float(as_fraction(delta))
    if delta <= 0:
        raise ValueError("delta must be positive")
    threshold = mu.p ** (-delta)
    a = coefficient_magnitudes(mu)
    near = np.nonzero(np.abs(a[1:] - threshold) <= tol.boundary)[0]
    if near.size:
        xi = int(near[0]) + 1
        raise BoundaryAmbiguity(
            f"|mu_hat({xi})|={a[xi]!r} is within {tol.boundary} of threshold {threshold!r}"
        )
    return (0,) + tuple(int(x) + 1 for x in np.nonzero(a[1:] > threshold)[0])


@dataclass
class LambdaBoundsReport:
    p: int
    order: int
    delta: float
    size: int
    upper_rhs: float
    upper_pass: bool
    has_nonzero_large: bool
    lower_rhs: int
    lower_pass: bool | None

    @property
    def passed(self) -> bool:
        return self.upper_pass and self.lower_pass is not False


def check_lambda_bounds(ctx: FieldContext, H: SubgroupSpec, delta, tol: Tolerances = TOL) -> LambdaBoundsReport:
    """|Lambda_delta| <= p^(1+2 delta)/|H|, and |Lambda_delta| >= |H| once a nonzero xi is large."""
    mu = subgroup_measure(H)
    lam = lambda_delta(mu, delta, tol)
    d = float(as_fraction(delta))
    upper = ctx.p ** (1 + 2 * d) / H.order
    nonzero = len(lam) > 1
    return LambdaBoundsReport(
        p=ctx.p,
        order=H.order,
        delta=d,
        size=len(lam),
        upper_rhs=upper,
        upper_pass=leq(len(lam), upper, tol.inequality),
        has_nonzero_large=nonzero,
        lower_rhs=H.order,
        lower_pass=(len(lam) >= H.order) if nonzero else None,
    )


@dataclass
class SpectrumReport:
    p: int
    delta: Fraction
    lambda_set: tuple[int, ...]
    k: int
    eta: Fraction
    l2_spectral_mass: float
    iterations: list[tuple[int, Fraction]] = field(default_factory=list)
    clamp_count: int = 0
    l2_on_lambda: float = 0.0
    bracket_lower: float = 0.0
    bracket_upper: float = 0.0

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "delta": frac_str(self.delta),
            "lambda_set": list(self.lambda_set),
            "k": self.k,
            "eta": frac_str(self.eta),
            "l2_spectral_mass": self.l2_spectral_mass,
            "l2_on_lambda": self.l2_on_lambda,
            "bracket": [self.bracket_lower, self.bracket_upper],
            "iterations": [{"k": k, "delta": frac_str(d)} for k, d in self.iterations],
            "clamp_count": self.clamp_count,
        }


def eta_floor(p: int) -> float:
    return 5.0 / (p**3 * math.log(p))


def next_k(k: int, eta: Fraction) -> int:
    """floor(k^2 / eta) + 1 in exact arithmetic."""
    return (k * k * eta.denominator) // eta.numerator + 1


def select_k_delta(mu: Measure, eta, k_cap: int | None = DEFAULT_K_CAP, tol: Tolerances = TOL) -> SpectrumReport:
    """First i <= M with sum |nu_hat_{k_i}|^2 <= p^eta |Lambda_{delta_i}|,
    where k_0 = 4, k_{i+1} = floor(k_i^2/eta) + 1, delta_i = 1/k_{i+1}."""
    eta = as_fraction(eta)
    p = mu.p
    if eta <= 0 or float(eta) < eta_floor(p):
        raise EtaTooSmall(f"eta={eta} is below 5/(p^3 log p)={eta_floor(p):.3g}")
    loop_cap = 2 * (math.floor(1 / eta) + 1)
    p_eta = p ** float(eta)
    k = 4
    iterations = []
    for _ in range(loop_cap + 1):
        if k_cap is not None and k > k_cap:
            raise KCapExceeded(k, k_cap)
        delta = Fraction(1, next_k(k, eta))
        iterations.append((k, delta))
        vals, clamped = nu_hat(mu, k)
        sq = _pow(vals, 2)
        l2 = math.fsum(sq)
        lam = lambda_delta(mu, delta, tol)
        if l2 <= p_eta * len(lam):
            on_lam = math.fsum(sq[list(lam)])
            report = SpectrumReport(
                p=p,
                delta=delta,
                lambda_set=lam,
                k=k,
                eta=eta,
                l2_spectral_mass=l2,
                iterations=iterations,
                clamp_count=clamped,
                l2_on_lambda=on_lam,
                bracket_lower=len(lam) / p_eta,
                bracket_upper=p_eta * len(lam),
            )
            _verify_bracket(report, tol)
            return report
        k = next_k(k, eta)
    raise LoopCapExceeded(f"no admissible k within M={loop_cap} iterations")


def _verify_bracket(r: SpectrumReport, tol: Tolerances) -> None:
    if not r.delta < r.eta / (r.k * r.k):
        raise InequalityViolated(f"delta={r.delta} is not below eta/k^2")
    if not leq(r.bracket_lower, r.l2_spectral_mass, tol.bracket):
        raise InequalityViolated(f"p^-eta |Lambda| = {r.bracket_lower} > {r.l2_spectral_mass}")
    if not leq(r.l2_spectral_mass, r.bracket_upper, tol.bracket):
        raise InequalityViolated(f"{r.l2_spectral_mass} > p^eta |Lambda| = {r.bracket_upper}")
    if not leq(r.l2_spectral_mass, r.p ** (2 * float(r.eta)) * r.l2_on_lambda, tol.bracket):
        raise InequalityViolated("l2 mass is not essentially supported on Lambda_delta")


@dataclass
class SmearReport:
    p: int
    order: int
    k: int
    min_margin: float
    argmin_xi: int
    lhs: np.ndarray = field(repr=False)
    rhs: np.ndarray = field(repr=False)


def smear_out_margins(mu: Measure, k: int, nu_k: Measure | None = None, tol: Tolerances = TOL) -> SmearReport:
    """nu_hat_k(xi)^(4k) <= sum_x nu_hat_k(x xi)^2 nu_k(x) for every xi.

    Only guaranteed when mu is invariant under a subgroup it is uniform on.
    """
    p = mu.p
    if nu_k is None:
        nu_k = k_fold_nu(mu, k)
    vals, _ = nu_hat(mu, k)
    lhs = _pow(vals, 4 * k)
    rhs = dilation_sum(_pow(vals, 2), nu_k.as_float, p, support=nu_k.support)
    margins = rhs - lhs
    i = int(np.argmin(margins))
    bad = [xi for xi in range(p) if not leq(lhs[xi], rhs[xi], tol.inequality)]
    if bad:
        xi = bad[0]
        raise InequalityViolated(f"smear-out fails at p={p}, k={k}, xi={xi}: {lhs[xi]!r} > {rhs[xi]!r}")
    return SmearReport(p, len(mu.support), k, float(margins[i]), i, lhs, rhs)


def check_smear_out(ctx: FieldContext, H: SubgroupSpec, k: int, tol: Tolerances = TOL) -> SmearReport:
    return smear_out_margins(subgroup_measure(H), k, tol=tol)


@dataclass
class StatMultReport:
    p: int
    k: int
    delta: Fraction
    eta: Fraction
    lhs: float
    rhs: float
    trivial_upper: float
    chain: list[float]
    passed: bool

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "k": self.k,
            "delta": frac_str(self.delta),
            "eta": frac_str(self.eta),
            "lhs": self.lhs,
            "rhs": self.rhs,
            "trivial_upper": self.trivial_upper,
            "chain": self.chain,
            "margin": self.margin,
            "pass": self.passed,
        }


def double_sum_terms(mu: Measure, k: int, nu_k: Measure | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Return (w, R) with w = nu_hat_k^2 and R(xi) = sum_x w(x xi) nu_k(x)."""
    if nu_k is None:
        nu_k = k_fold_nu(mu, k)
    vals, _ = nu_hat(mu, k)
    w = _pow(vals, 2)
    return w, dilation_sum(w, nu_k.as_float, mu.p, support=nu_k.support)


def statistical_mult(mu: Measure, eta, report: SpectrumReport | None = None,
                     k_cap: int | None = DEFAULT_K_CAP, tol: Tolerances = TOL) -> StatMultReport:
    """p^(-10 eta) sum nu_hat_k^2 <= sum_{xi,x} nu_hat_k(xi)^2 nu_hat_k(x xi)^2 nu_k(x),
    together with every link of the chain that proves it."""
    eta = as_fraction(eta)
    if report is None:
        report = select_k_delta(mu, eta, k_cap=k_cap, tol=tol)
    p, k, delta = mu.p, report.k, report.delta
    vals, _ = nu_hat(mu, k)
    w, R = double_sum_terms(mu, k)
    total = math.fsum(w)
    rhs = math.fsum(w * R)
    lhs = p ** (-10 * float(eta)) * total
    lam = list(report.lambda_set)
    high = _pow(vals, 4 * k + 2)
    chain = [
        p ** (-2 * float(eta)) * total,
        math.fsum(w[lam]),
        p ** (8 * k * k * float(delta)) * math.fsum(high[lam]),
        p ** (8 * float(eta)) * math.fsum(high),
        p ** (8 * float(eta)) * rhs,
    ]
    for i in range(len(chain) - 1):
        if not leq(chain[i], chain[i + 1], tol.inequality):
            raise InequalityViolated(f"smearing-out chain link {i} fails: {chain[i]!r} > {chain[i + 1]!r}")
    if not leq(rhs, total, tol.inequality):
        raise InequalityViolated(f"double sum {rhs!r} exceeds trivial bound {total!r}")
    passed = leq(lhs, rhs, tol.inequality)
    if not passed:
        raise InequalityViolated(f"statistical multiplicative stability fails: {lhs!r} > {rhs!r}")
    return StatMultReport(p, k, delta, eta, lhs, rhs, total, chain, passed)


def check_statistical_mult(ctx: FieldContext, H: SubgroupSpec, eta, report: SpectrumReport | None = None,
                           k_cap: int | None = DEFAULT_K_CAP, tol: Tolerances = TOL) -> StatMultReport:
    return statistical_mult(subgroup_measure(H), eta, report=report, k_cap=k_cap, tol=tol)
