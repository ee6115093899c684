"""Exponential sums over subgroups and geometric segments of F_p^x."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from .config import DEFAULT_K_CAP, TOL, Tolerances, as_fraction, frac_str, leq
from .errors import EmptySegment, InequalityViolated, InvalidInput, ZeroArgument
from .field_core import FieldContext, SubgroupSpec, segment, segment_powers
from .measures import dft, dilation_sum, k_fold_nu, uniform_on
from .spectrum import coefficient_magnitudes, lambda_delta, nu_hat, select_k_delta

# beyond this denominator the exact power comparison is replaced by mpmath
_EXACT_DENOM_LIMIT = 4096


@dataclass(frozen=True)
class ExpSumResult:
    xi: int
    value: complex
    magnitude: float
    normalized: float

    def to_json(self) -> dict:
        return {
            "xi": self.xi,
            "re": self.value.real,
            "im": self.value.imag,
            "magnitude": self.magnitude,
            "normalized": self.normalized,
        }


@dataclass(frozen=True)
class EmpiricalBound:
    p: int
    order: int
    max_nontrivial: float
    argmax_xi: int
    beta_emp: float

    @property
    def alpha(self) -> float:
        return math.log(self.order) / math.log(self.p)

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "subgroup_order": self.order,
            "alpha": self.alpha,
            "max_coeff": self.max_nontrivial,
            "argmax_xi": self.argmax_xi,
            "beta_emp": self.beta_emp,
        }


def exp_sum(ctx: FieldContext, H: SubgroupSpec, xi: int) -> ExpSumResult:
    """sum_{x in H} e^(2 pi i x xi / p), summed in ascending x."""
    xi %= ctx.p
    idx = (np.asarray(H.elements, dtype=np.int64) * xi) % ctx.p
    value = complex(np.add.reduce(ctx.psi_table[idx]))
    if xi == 0:
        value = complex(H.order)
    magnitude = min(abs(value), float(H.order))
    return ExpSumResult(xi, value, magnitude, magnitude / H.order)


def all_exp_sums(ctx: FieldContext, H: SubgroupSpec) -> np.ndarray:
    """S(H, xi) for every xi."""
    ones = np.zeros(ctx.p)
    ones[list(H.elements)] = 1.0
    out = dft(ones, ctx.p, support=H.elements)
    out[0] = H.order
    return out


def max_nontrivial_fourier(ctx: FieldContext, H: SubgroupSpec, tie_tol: float = 1e-12) -> EmpiricalBound:
    normalized = np.minimum(np.abs(all_exp_sums(ctx, H)) / H.order, 1.0)
    rest = normalized[1:]
    top = float(rest.max())
    argmax = int(np.nonzero(rest >= top - tie_tol)[0][0]) + 1
    beta = -math.log(top) / math.log(ctx.p) if top > 0 else math.inf
    return EmpiricalBound(ctx.p, H.order, top, argmax, 0.0 if top >= 1 else beta)


def complete_sum_bound_check(ctx: FieldContext, H: SubgroupSpec) -> bool:
    """|sum_{x in H} psi(x xi)| < sqrt(p) for every xi != 0 (full subgroups only)."""
    if H.kind != "subgroup":
        raise InvalidInput("the complete-sum bound applies to full subgroups only")
    mags = np.abs(all_exp_sums(ctx, H))[1:]
    root = math.sqrt(ctx.p)
    bad = np.nonzero(mags >= root)[0]
    if bad.size:
        xi = int(bad[0]) + 1
        raise InequalityViolated(f"|S(H,{xi})|={mags[xi - 1]!r} >= sqrt({ctx.p})")
    return True


# --- incomplete sums --------------------------------------------------------


def _below_scaled(t: int, T: int, p: int, delta: Fraction) -> bool:
    """Exact test of t < T p^(-delta) / 4, i.e. (4t)^d p^n < T^d for delta = n/d."""
    if t < 0:
        return True
    if t == 0:
        return T > 0
    n, d = delta.numerator, delta.denominator
    if d <= _EXACT_DENOM_LIMIT and abs(n) <= _EXACT_DENOM_LIMIT * 64:
        if n >= 0:
            return (4 * t) ** d * p**n < T**d
        return (4 * t) ** d < T**d * p ** (-n)
    with mpmath.workdps(60):
        return mpmath.mpf(4 * t) < mpmath.mpf(T) * mpmath.power(p, -mpmath.mpf(n) / d)


def h1_length(p: int, T: int, delta) -> int:
    """Number of integers 0 <= t with t < T p^(-delta) / 4."""
    delta = as_fraction(delta)
    if delta < 0:
        raise InvalidInput("delta must be nonnegative")
    c = max(0, math.ceil(T * p ** (-float(delta)) / 4))
    while c > 0 and not _below_scaled(c - 1, T, p, delta):
        c -= 1
    while _below_scaled(c, T, p, delta):
        c += 1
    return c


def build_H1(ctx: FieldContext, g0: int, T: int, delta) -> SubgroupSpec:
    H = segment(ctx, g0, T)
    length = h1_length(ctx.p, H.order, delta)
    if length < 1:
        raise EmptySegment(f"H1 is empty for T={T}, delta={delta}")
    ratio = H.order / length
    cap = 8 * ctx.p ** float(as_fraction(delta))
    if not leq(ratio, cap):
        raise InequalityViolated(f"|H|/|H1|={ratio} exceeds 8 p^delta={cap}")
    return segment(ctx, g0, length)


@dataclass(frozen=True)
class TranslateReport:
    xi: int
    l: int
    lhs: float
    rhs: float

    @property
    def margin(self) -> float:
        return self.lhs - self.rhs


def _segment_coefficients(ctx: FieldContext, g0: int, T: int) -> np.ndarray:
    H = segment(ctx, g0, T)
    return coefficient_magnitudes(uniform_on(ctx.p, H.elements))


def check_translate_inequality(ctx: FieldContext, g0: int, T: int, delta, xi: int, l: int) -> TranslateReport:
    """|mu_H(g0^l xi)| > |mu_H(xi)| - p^(-delta)/2 for admissible l < T p^(-delta)/4."""
    delta = as_fraction(delta)
    xi %= ctx.p
    if xi == 0:
        raise ZeroArgument("xi must be nonzero")
    if l < 0 or not _below_scaled(l, T, ctx.p, delta):
        raise InvalidInput(f"l={l} is not below T p^-delta / 4")
    mags = _segment_coefficients(ctx, g0, T)
    shifted = pow(g0, l, ctx.p) * xi % ctx.p
    r = TranslateReport(xi, l, float(mags[shifted]), float(mags[xi]) - ctx.p ** (-float(delta)) / 2)
    if not r.lhs > r.rhs:
        raise InequalityViolated(f"translate inequality fails at xi={xi}, l={l}: {r.lhs!r} <= {r.rhs!r}")
    return r


def translate_margins(ctx: FieldContext, g0: int, T: int, delta) -> TranslateReport:
    """Check every xi != 0 and every admissible l; return the tightest case."""
    delta = as_fraction(delta)
    p = ctx.p
    mags = _segment_coefficients(ctx, g0, T)
    drop = p ** (-float(delta)) / 2
    xs = np.arange(1, p, dtype=np.int64)
    worst = None
    for l in range(h1_length(p, T, delta)):
        gl = pow(g0, l, p)
        lhs = mags[(gl * xs) % p]
        rhs = mags[xs] - drop
        margin = lhs - rhs
        i = int(np.argmin(margin))
        if not margin[i] > 0:
            raise InequalityViolated(f"translate inequality fails at xi={int(xs[i])}, l={l}")
        if worst is None or margin[i] < worst.margin:
            worst = TranslateReport(int(xs[i]), l, float(lhs[i]), float(rhs[i]))
    return worst


def _log(x) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(x)


def _log_leq(a: float, b: float, rel: float = TOL.inequality) -> bool:
    if a == -math.inf:
        return True
    return a <= b + rel * max(1.0, abs(a), abs(b))


@dataclass
class IncompleteReport:
    p: int
    g0: int
    T: int
    eta: Fraction
    k: int
    delta: Fraction
    h1_size: int
    lambda_size: int
    hypothesis_present: bool
    xi0: int | None
    step_margins: dict
    chain_log: list[float]
    chain_pass: list[bool]
    final_lhs: float
    final_rhs: float
    final_pass: bool
    status: str = "checked"
    notes: list[str] = field(default_factory=list)

    @property
    def final_margin(self) -> float:
        return self.final_rhs - self.final_lhs

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "g0": self.g0,
            "T": self.T,
            "eta": frac_str(self.eta),
            "k": self.k,
            "delta": frac_str(self.delta),
            "h1_size": self.h1_size,
            "lambda_size": self.lambda_size,
            "hypothesis_present": self.hypothesis_present,
            "xi0": self.xi0,
            "status": self.status,
            "step_margins": self.step_margins,
            "chain_log": self.chain_log,
            "chain_pass": self.chain_pass,
            "final": {
                "lhs": self.final_lhs,
                "rhs": self.final_rhs,
                "margin": self.final_margin,
                "pass": self.final_pass,
            },
            "notes": self.notes,
        }


def check_incomplete_smear(ctx: FieldContext, g0: int, T: int, eta, k_cap: int | None = DEFAULT_K_CAP,
                           tol: Tolerances = TOL) -> IncompleteReport:
    """H1-averaged smear inequality on Lambda_delta, its 2k-th power form with
    constant 2^(8k^2+6k) p^(2k delta), and the final p^(-11 eta) correlation bound.

    The final bound is only claimed for large p, so it is recorded rather than
    asserted; every other link is unconditional and raises on failure.
    """
    eta = as_fraction(eta)
    p = ctx.p
    H = segment(ctx, g0, T)
    mu = uniform_on(p, H.elements)
    spec = select_k_delta(mu, eta, k_cap=k_cap, tol=tol)
    k, delta = spec.k, spec.delta
    d = float(delta)
    mags = coefficient_magnitudes(mu)
    big = np.nonzero(mags[1:] > 2 * p ** (-d))[0]
    xi0 = int(big[0]) + 1 if big.size else None

    H1 = build_H1(ctx, g0, T, delta)
    h1 = np.asarray(segment_powers(ctx, g0, H1.order), dtype=np.int64)
    lam = np.asarray(lambda_delta(mu, delta, tol), dtype=np.int64)
    nu_k = k_fold_nu(mu, k)
    vals, _ = nu_hat(mu, k)
    with np.errstate(under="ignore"):
        w = vals**2
        high = vals ** (4 * k + 2)
    R_mu = dilation_sum(w, mu.as_float, p, support=mu.support)
    R_nu = dilation_sum(w, nu_k.as_float, p, support=nu_k.support)

    # step 1: w(xi) <= 2^(4k)/|H1| * sum_{h in H1} w(h xi)
    avg = w[np.outer(lam, h1) % p].sum(axis=1) / H1.order
    log2 = math.log(2)
    step1_l, step1_r = _log(w[lam]), 4 * k * log2 + _log(avg)
    # step 2: ... <= 2^(4k) |H|/|H1| sum_x w(x xi) mu_H(x) <= 2^(4k+3) p^delta sum_x w(x xi) mu_H(x)
    step2_r = 4 * k * log2 + math.log(H.order / H1.order) + _log(R_mu[lam])
    step2b_r = (4 * k + 3) * log2 + d * math.log(p) + _log(R_mu[lam])
    # Jensen: (sum_x w(x xi) mu_H(x))^(2k) <= sum_x w(x xi) nu_k(x)
    jensen_l, jensen_r = 2 * k * _log(R_mu[lam]), _log(R_nu[lam])
    # step 3: nu_hat(xi)^(4k) <= 2^(8k^2+6k) p^(2k delta) sum_x w(x xi) nu_k(x)
    step3_l = 4 * k * _log(vals[lam])
    step3_r = (8 * k * k + 6 * k) * log2 + 2 * k * d * math.log(p) + _log(R_nu[lam])

    margins = {}
    for name, left, right in [
        ("h1_average", step1_l, step1_r),
        ("mu_H_extension", step1_r, step2_r),
        ("h_ratio", step2_r, step2b_r),
        ("jensen", jensen_l, jensen_r),
        ("substitute_one", step3_l, step3_r),
    ]:
        for i, xi in enumerate(lam):
            if not _log_leq(float(left[i]), float(right[i]), tol.inequality):
                raise InequalityViolated(f"{name} fails at xi={int(xi)}: {left[i]!r} > {right[i]!r}")
        gaps = np.asarray(right) - np.asarray(left)
        finite = gaps[np.isfinite(gaps)]
        margins[name] = float(finite.min()) if finite.size else math.inf

    total = math.fsum(w)
    rhs = math.fsum(w * R_nu)
    logp = math.log(p)
    on_lam_high = math.fsum(high[lam])
    chain_log = [
        -2 * float(eta) * logp + math.log(total),
        math.log(math.fsum(w[lam])),
        8 * k * k * d * logp + math.log(on_lam_high),
        8 * float(eta) * logp + math.log(on_lam_high),
        (8 * float(eta) + 2 * k * d) * logp + (8 * k * k + 6 * k) * log2 + math.log(math.fsum((w * R_nu)[lam])),
        9 * float(eta) * logp + math.log(rhs),
    ]
    chain_pass = [_log_leq(chain_log[i], chain_log[i + 1], tol.inequality) for i in range(len(chain_log) - 1)]
    # the last link needs 2^(8k^2+6k) p^(2k delta) <= p^eta, i.e. p large
    for i, ok in enumerate(chain_pass[:-1]):
        if not ok:
            raise InequalityViolated(f"incomplete-sum chain link {i} fails")
    final_lhs = p ** (-11 * float(eta)) * total
    report = IncompleteReport(
        p=p, g0=g0 % p, T=H.order, eta=eta, k=k, delta=delta, h1_size=H1.order,
        lambda_size=int(lam.size), hypothesis_present=xi0 is not None, xi0=xi0,
        step_margins=margins, chain_log=chain_log, chain_pass=chain_pass,
        final_lhs=final_lhs, final_rhs=rhs, final_pass=leq(final_lhs, rhs, tol.inequality),
    )
    if xi0 is None:
        report.status = "hypothesis_absent"
        report.notes.append("no xi0 with |mu_H(xi0)| > 2 p^-delta; links evaluated on Lambda_delta regardless")
    if not chain_pass[-1]:
        report.notes.append("last chain link needs p large enough that 2^(8k^2+6k) p^(2k delta) <= p^eta")
    return report
