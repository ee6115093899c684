"""From a statistically stable measure to a set with small sum and product
sets, with every intermediate inequality evaluated exactly.

Stages (a)-(l) follow the construction S1 -> S2 -> T -> G -> S3 -> S0 -> G' -> S4.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .bgs import BgsInstance, bgs_extract, productset, sum_product_score, sumset
from .config import DEFAULT_K_CAP, TOL, Tolerances, as_fraction, frac_str
from .errors import (
    ExtractionFailed,
    HypothesesEffectivelyEmpty,
    HypothesesFail,
    InvalidInput,
    StageViolation,
)
from .field_core import FieldContext, SubgroupSpec, make_field_context
from .measures import Measure, dilation_sum, k_fold_nu, phi_of
from .spectrum import coefficient_magnitudes, select_k_delta, subgroup_measure

SCHEMA = "cert/1"

_RELATIONS = {
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
}


@dataclass(frozen=True)
class StabilityParams:
    Delta: Fraction

    def __post_init__(self):
        d = as_fraction(self.Delta)
        if not 0 < d <= Fraction(1, 2):
            raise InvalidInput(f"Delta={d} must lie in (0, 1/2]")
        object.__setattr__(self, "Delta", d)

    @property
    def s1_cut(self) -> Fraction:
        """Multiplier of phi(0) in the S1 threshold."""
        return self.Delta / 8

    @property
    def s0_cut(self) -> Fraction:
        return self.Delta**2 / 2**7

    def t_cut(self, p: int, phi0: Fraction) -> Fraction:
        return self.Delta * p / (8 * phi0)


@dataclass
class StageRecord:
    stage: str
    name: str
    lhs: Fraction
    relation: str
    rhs: Fraction
    set_size: int | None = None

    @property
    def passed(self) -> bool:
        return _RELATIONS[self.relation](self.lhs, self.rhs)

    def to_json(self) -> dict:
        return {
            "stage": self.stage,
            "name": self.name,
            "lhs": frac_str(self.lhs),
            "relation": self.relation,
            "rhs": frac_str(self.rhs),
            "pass": self.passed,
            "set_size": self.set_size,
        }


@dataclass
class HypothesisReport:
    Delta: Fraction
    records: list[StageRecord]
    spectral_lhs: float
    spectral_rhs: float

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    def to_json(self) -> dict:
        return {
            "Delta": frac_str(self.Delta),
            "pass": self.passed,
            "records": [r.to_json() for r in self.records],
            "spectral_check": {"lhs": self.spectral_lhs, "rhs": self.spectral_rhs},
        }


@dataclass
class PipelineCertificate:
    p: int
    Delta: Fraction
    hypotheses: HypothesisReport
    stages: list[StageRecord] = field(default_factory=list)
    sets: dict[str, tuple[int, ...]] = field(default_factory=dict)
    final: dict = field(default_factory=dict)
    extraction: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.hypotheses.passed and all(r.passed for r in self.stages)

    @property
    def S(self) -> tuple[int, ...]:
        return self.sets["S"]

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA,
            "p": self.p,
            "Delta": frac_str(self.Delta),
            "pass": self.passed,
            "hypotheses": self.hypotheses.to_json(),
            "stages": [r.to_json() for r in self.stages],
            "sets": {k: list(v) for k, v in self.sets.items()},
            "extraction": self.extraction,
            "final": self.final,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


class _Exact:
    """Integer views of mu and phi with their denominators."""

    def __init__(self, mu: Measure):
        self.p = mu.p
        self.mu = mu
        self.phi = phi_of(mu)
        self.M = mu.weights
        self.Dm = mu.denom
        self.F = self.phi.numer
        self.Df = self.phi.denom
        self.phi0 = self.phi.at_zero

    def phi_correlation(self, y: int, xs=None, targets: frozenset | None = None) -> int:
        """sum over x (in xs) with x*y in targets of F[x] * F[x*y]."""
        p, F = self.p, self.F
        xs = range(p) if xs is None else xs
        if targets is None:
            return sum(F[x] * F[x * y % p] for x in xs)
        return sum(F[x] * F[x * y % p] for x in xs if x * y % p in targets)

    def weighted_correlation(self, xs=None, targets=None) -> Fraction:
        """sum_{y != 0} mu(y) sum_x phi(x) phi(xy), optionally restricted."""
        total = 0
        for y in self.mu.support:
            if y == 0:
                continue
            total += self.M[y] * self.phi_correlation(y, xs, targets)
        return Fraction(total, self.Df * self.Df * self.Dm)


def verify_hypotheses(mu: Measure, Delta) -> HypothesisReport:
    """Evaluate the correlation hypothesis and both smallness conditions exactly,
    with a spectral cross-check of the correlation."""
    params = StabilityParams(as_fraction(Delta))
    D = params.Delta
    ex = _Exact(mu)
    p = mu.p
    # sum_{xi} |mu^(xi)|^2 |mu^(y xi)|^2 = (1/p) sum_x phi(x) phi(xy) for y != 0, and phi(0) for y = 0
    lhs = mu[0] * ex.phi0 + ex.weighted_correlation() / p
    rhs = D * ex.phi0
    records = [
        StageRecord("hyp", "correlation", lhs, ">", rhs),
        StageRecord("hyp", "mass-at-zero", mu[0], "<", D / 4),
        StageRecord("hyp", "l2-mass", mu.l2_squared(), "<", D / 4),
    ]
    a2 = coefficient_magnitudes(mu) ** 2
    spec_lhs = float(np.dot(a2, dilation_sum(a2, mu.as_float, p, support=mu.support)))
    spec_rhs = float(D) * float(a2.sum())
    return HypothesisReport(D, records, spec_lhs, spec_rhs)


def _check(cert: PipelineCertificate, stage: str, records: list[StageRecord]) -> None:
    cert.stages.extend(records)
    for r in records:
        if not r.passed:
            err = StageViolation(stage, r.to_json())
            err.certificate = cert
            raise err


def _sorted(xs) -> tuple[int, ...]:
    return tuple(sorted(xs))


def run_pipeline(mu: Measure, Delta, ctx: FieldContext | None = None,
                 hypotheses: HypothesisReport | None = None) -> PipelineCertificate:
    params = StabilityParams(as_fraction(Delta))
    D = params.Delta
    p = mu.p
    if ctx is None:
        ctx = make_field_context(p)
    hyp = hypotheses or verify_hypotheses(mu, D)
    if not hyp.passed:
        raise HypothesesFail(hyp)
    ex = _Exact(mu)
    phi0 = ex.phi0
    F, Df = ex.F, ex.Df
    cert = PipelineCertificate(p, D, hyp)

    # (a) statistical multiplicative stability
    total = ex.weighted_correlation()
    _check(cert, "a", [
        StageRecord("a", "stat-mult", total, ">", Fraction(3, 4) * D * p * phi0),
        StageRecord("a", "stat-mult:trivial-upper", total, "<=", p * phi0),
    ])

    # (b) S1 = {phi(x) > Delta phi(0) / 8}
    cut = params.s1_cut * phi0
    S1 = frozenset(x for x in range(p) if Fraction(F[x], Df) > cut)
    restricted = ex.weighted_correlation(xs=_sorted(S1), targets=S1)
    _check(cert, "b", [StageRecord("b", "S1:restricted-sum", restricted, ">", D * p * phi0 / 2, len(S1))])

    # (c) size of S1, S2 = S1 \ {0}
    S2 = S1 - {0}
    if not S2:
        raise HypothesesEffectivelyEmpty("S2 is empty")
    _check(cert, "c", [
        StageRecord("c", "S1:size-lower", D * p / (2 * phi0), "<", Fraction(len(S1)), len(S1)),
        StageRecord("c", "S1:size-upper", Fraction(len(S1)), "<", 8 * p / (D * phi0), len(S1)),
        StageRecord("c", "S2:half", Fraction(len(S2)), ">=", Fraction(len(S1), 2), len(S2)),
    ])

    # (d) expected intersection size
    S2_sorted = _sorted(S2)
    inter = {y: sum(1 for x in S2_sorted if x * y % p in S2) for y in range(1, p)}
    expected = Fraction(sum(mu.weights[y] * c for y, c in inter.items()), mu.denom)
    _check(cert, "d", [StageRecord("d", "intersection-mean", expected, ">=", D * p / (4 * phi0))])

    # (e) T = popular dilations, trimmed to |S2|
    t_cut = params.t_cut(p, phi0)
    T_full = [y for y in range(1, p) if inter[y] > t_cut]
    if not T_full:
        raise HypothesesEffectivelyEmpty("T is empty")
    T_ranked = sorted(T_full, key=lambda y: (-inter[y], y))
    T = frozenset(T_ranked[: len(S2)])
    min_inter = min(inter[y] for y in T)
    _check(cert, "e", [
        StageRecord("e", "T:size", Fraction(len(T_full)), ">=", D**5 / 2**15 * len(S1), len(T_full)),
        StageRecord("e", "T:trimmed-lower", Fraction(len(T)), ">=", D**5 / 2**15 * len(S2), len(T)),
        StageRecord("e", "T:trimmed-upper", Fraction(len(T)), "<=", Fraction(len(S2)), len(T)),
        StageRecord("e", "T:intersections", Fraction(min_inter), ">", D**2 / 2**6 * len(S2)),
    ])

    # (f) multiplicative graph
    T_sorted = _sorted(T)
    G = [(x, y) for y in T_sorted for x in S2_sorted if x * y % p in S2]
    _check(cert, "f", [StageRecord("f", "G", Fraction(len(G)), ">=", (D / 8) ** 7 * len(S2) ** 2, len(G))])

    # (g) multiplicative BGS through discrete logs in Z/(p-1)
    n = p - 1
    log = ctx.log
    inst = BgsInstance(
        n=n,
        A=frozenset(log(x) for x in S2),
        B=frozenset(log(y) for y in T),
        G=frozenset((log(x), log(y)) for x, y in G),
        N=Fraction(len(S2)),
        alpha=(D / 8) ** 7,
    )
    ext = bgs_extract(inst)
    S3 = frozenset(ctx.power(a) for a in ext.A_prime)
    prod3 = productset(S3, S3, p)
    cert.extraction["multiplicative"] = {"strategy": ext.strategy, "size": len(ext.A_prime), "doubling": ext.doubling}
    _check(cert, "g", [
        StageRecord("g", "BGS-mult:i", Fraction(ext.doubling), "<=", ext.doubling_bound, len(ext.A_prime)),
        StageRecord("g", "BGS-mult:ii", Fraction(len(ext.A_prime)), ">=", ext.size_bound, len(ext.A_prime)),
        StageRecord("g", "S3:size", Fraction(len(S3)), ">", D**28 / 2**100 * len(S1), len(S3)),
        StageRecord("g", "S3:product", Fraction(len(prod3)), "<=", Fraction(2**304) / D**84 * len(S3), len(prod3)),
    ])
    if not S3 <= S2:
        raise StageViolation("g", "S3 is not contained in S2")

    # (h) statistical additive stability
    S3_sorted = _sorted(S3)
    add_sum = Fraction(sum(F[(x1 - x2) % p] for x1 in S3_sorted for x2 in S3_sorted), Df)
    _check(cert, "h", [StageRecord("h", "add-stability", add_sum, ">", D**2 / 2**6 * phi0 * len(S3) ** 2)])

    # (i) S0 = {phi(x) > 2^-7 Delta^2 phi(0)}
    cut0 = params.s0_cut * phi0
    S0 = frozenset(x for x in range(p) if Fraction(F[x], Df) > cut0)
    _check(cert, "i", [
        StageRecord("i", "S0:l1", Fraction(len(S0)), "<=", 2**7 * p / (D**2 * phi0), len(S0)),
        StageRecord("i", "S0:vs-S3", Fraction(len(S0)), "<", Fraction(2**108) / D**31 * len(S3), len(S0)),
    ])

    # (j) additive graph G' in S3 x (-S3)
    G2 = [(x1, (-x2) % p) for x1 in S3_sorted for x2 in S3_sorted if (x1 - x2) % p in S0]
    _check(cert, "j", [StageRecord("j", "G'", Fraction(len(G2)), ">=", D**2 / 2**7 * len(S3) ** 2, len(G2))])

    # (k) additive BGS
    N_add = Fraction(2**108) / D**31 * len(S3)
    inst2 = BgsInstance(
        n=p,
        A=S3,
        B=frozenset((-x) % p for x in S3),
        G=frozenset(G2),
        N=N_add,
        alpha=D**64 / 2**223,
    )
    ext2 = bgs_extract(inst2)
    S4 = frozenset(ext2.A_prime)
    sum4 = sumset(S4, S4, p)
    prod4 = productset(S4, S4, p)
    cert.extraction["additive"] = {"strategy": ext2.strategy, "size": len(S4), "doubling": ext2.doubling}
    _check(cert, "k", [
        StageRecord("k", "BGS-add:i", Fraction(ext2.doubling), "<=", ext2.doubling_bound, len(S4)),
        StageRecord("k", "BGS-add:ii", Fraction(len(S4)), ">=", ext2.size_bound, len(S4)),
        StageRecord("k", "S4:size", Fraction(len(S4)), ">", D**225 / 2**799 * len(S3), len(S4)),
        StageRecord("k", "S4:sum", Fraction(len(sum4)), "<", Fraction(2**2728) / D**768 * len(S4), len(sum4)),
        StageRecord("k", "S4:product", Fraction(len(prod4)), "<", Fraction(2**1103) / D**309 * len(S4), len(prod4)),
    ])
    if not S4 <= S3:
        raise StageViolation("k", "S4 is not contained in S3")

    # (l) final sandwich; sum_xi |mu^(xi)|^2 = phi(0) by Parseval
    S = S4
    size_l2 = len(S) * phi0
    _check(cert, "l", [
        StageRecord("l", "sandwich:lower", D**254 / 2**900 * p, "<", size_l2, len(S)),
        StageRecord("l", "sandwich:upper", size_l2, "<", 8 * p / D, len(S)),
        StageRecord("l", "sum-product", Fraction(len(sum4) + len(prod4)), "<",
                    Fraction(2**2729) / D**768 * len(S), len(S)),
    ])
    if 0 in S:
        raise StageViolation("l", "S contains 0")

    cert.sets = {
        "S1": _sorted(S1),
        "S2": S2_sorted,
        "T": T_sorted,
        "S3": S3_sorted,
        "S0": _sorted(S0),
        "S4": _sorted(S4),
        "S": _sorted(S),
    }
    cert.final = {
        "size_S": len(S),
        "sumset_size": len(sum4),
        "productset_size": len(prod4),
        "phi0": frac_str(phi0),
        "G_size": len(G),
        "G_prime_size": len(G2),
    }
    return cert


def rational_delta(p: int, eta) -> Fraction:
    """p^(-10 eta) as the exact rational value of its double approximation."""
    return Fraction(p ** (-10 * float(as_fraction(eta))))


@dataclass
class AssemblyReport:
    p: int
    order: int
    eta: Fraction
    status: str
    spectrum: dict
    max_nontrivial: float
    threshold: float
    large_xi: list[int]
    Delta: Fraction | None = None
    guard: dict | None = None
    hypotheses: HypothesisReport | None = None
    certificate: PipelineCertificate | None = None
    summary: dict = field(default_factory=dict)
    alpha: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {
            "schema": SCHEMA,
            "kind": "assembly",
            "p": self.p,
            "order": self.order,
            "eta": frac_str(self.eta),
            "status": self.status,
            "spectrum": self.spectrum,
            "max_nontrivial": self.max_nontrivial,
            "threshold": self.threshold,
            "large_xi": self.large_xi,
            "alpha": self.alpha,
        }
        if self.Delta is not None:
            out["Delta"] = frac_str(self.Delta)
        if self.guard is not None:
            out["guard"] = self.guard
        if self.hypotheses is not None:
            out["hypotheses"] = self.hypotheses.to_json()
        if self.certificate is not None:
            out["certificate"] = self.certificate.to_json()
        out["summary"] = self.summary
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def assemble_contradiction(ctx: FieldContext, H: SubgroupSpec, eta, alpha=None, Delta=None,
                           k_cap: int | None = DEFAULT_K_CAP, tol: Tolerances = TOL) -> AssemblyReport:
    """Chain (k, delta) selection, the hypothesis check at Delta = p^(-10 eta), and the pipeline."""
    eta = as_fraction(eta)
    p = ctx.p
    mu = subgroup_measure(H)
    spec = select_k_delta(mu, eta, k_cap=k_cap, tol=tol)
    mags = coefficient_magnitudes(mu)
    threshold = p ** (-float(spec.delta))
    large = [xi for xi in spec.lambda_set if xi != 0]
    nontrivial = float(mags[1:].max()) if p > 1 else 0.0
    report = AssemblyReport(p, H.order, eta, "bound_holds", spec.to_json(), nontrivial, threshold, large)

    alpha_h = math.log(H.order) / math.log(p) if H.order > 1 else 0.0
    report.alpha = {"log_p_order": alpha_h}
    if alpha is not None:
        a = float(as_fraction(alpha))
        report.alpha.update({
            "alpha": a,
            "order_exceeds_p_alpha": H.order > p**a,
            "eta_within_alpha_budget": float(eta) <= a / 6000,
        })
    if not large:
        return report

    D = as_fraction(Delta) if Delta is not None else rational_delta(p, eta)
    report.Delta = D
    if not 0 < D <= Fraction(1, 2):
        report.status = "delta_out_of_range"
        return report
    report.guard = {"lhs": frac_str(Fraction(1, H.order)), "rhs": frac_str(D / 4),
                    "pass": Fraction(1, H.order) < D / 4}
    nu_k = k_fold_nu(mu, spec.k)
    hyp = verify_hypotheses(nu_k, D)
    report.hypotheses = hyp
    if not hyp.passed:
        report.status = "hypotheses_fail"
        return report
    cert = run_pipeline(nu_k, D, ctx=ctx, hypotheses=hyp)
    report.certificate = cert
    report.status = "certificate"
    S = cert.S
    score = sum_product_score(S, p) if S else None
    logp = math.log(p)
    log_s = math.log(len(S))
    report.summary = {
        "size_S": len(S),
        "sum_plus_product": cert.final["sumset_size"] + cert.final["productset_size"],
        "score": score.to_json() if score else None,
        "size_lower_log": math.log(H.order) - 2542 * float(eta) * logp - 900 * math.log(2),
        "size_upper_log": math.log(8) + (1 + 11 * float(eta)) * logp - math.log(H.order),
        "log_size_S": log_s,
        "doubling_bound_log": 2729 * math.log(2) + 7680 * float(eta) * logp + log_s,
    }
    s = report.summary
    s["size_sandwich_pass"] = s["size_lower_log"] < log_s < s["size_upper_log"]
    s["doubling_pass"] = math.log(s["sum_plus_product"]) < s["doubling_bound_log"]
    return report
