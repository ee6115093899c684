"""Property suites run over every prime up to a bound and all of its subgroups."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator

import numpy as np
from sympy import primerange

from .config import TOL, Tolerances
from .errors import CheckFailure, ExpSumError, HypothesesFail, KCapExceeded
from .expsum import check_incomplete_smear, complete_sum_bound_check, translate_margins
from .field_core import all_subgroups, make_field_context
from .measures import fourier, inverse_fourier, k_fold_nu, phi_of, random_measure, uniform_on
from .pipeline import run_pipeline, verify_hypotheses
from .spectrum import (
    check_lambda_bounds,
    check_smear_out,
    check_statistical_mult,
    coefficient_magnitudes,
    subgroup_measure,
)

SUITES = ("parseval", "convolution", "smear", "lemmas", "incomplete")


@dataclass
class SuiteResult:
    name: str
    instances: int = 0
    skipped: int = 0
    violations: int = 0
    first_violation: str | None = None
    skip_reasons: list[str] = field(default_factory=list)
    elapsed_s: float = 0.0

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_json(self) -> dict:
        return {
            "suite": self.name,
            "pass": self.passed,
            "instances": self.instances,
            "skipped": self.skipped,
            "violations": self.violations,
            "first_violation": self.first_violation,
            "skip_reasons": self.skip_reasons[:10],
            "elapsed_s": round(self.elapsed_s, 3),
        }

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        out = f"{self.name}: {verdict} instances={self.instances} skipped={self.skipped} time={self.elapsed_s:.2f}s"
        if self.first_violation:
            out += f" first_violation=[{self.first_violation}]"
        return out


class Violation(AssertionError):
    pass


def _require(ok: bool, what: str) -> None:
    if not ok:
        raise Violation(what)


def _primes(p_max: int) -> list[int]:
    return list(primerange(3, p_max + 1))


# each suite yields (label, thunk) pairs; a thunk raises on violation


def _parseval_cases(p_max: int, seed: int, tol: Tolerances) -> Iterator[tuple[str, Callable[[], None]]]:
    rng = np.random.default_rng(seed)
    for p in _primes(p_max):
        ctx = make_field_context(p)
        measures = [(H.label(), subgroup_measure(H)) for H in all_subgroups(ctx)]
        measures += [(f"random#{i}", random_measure(p, rng)) for i in range(5)]
        for label, mu in measures:
            def case(mu=mu, p=p, rng_state=int(rng.integers(2**31))):
                spec = fourier(mu)
                _require(abs(spec[0] - 1) <= tol.unit_modulus, "mu^(0) != 1")
                conj_err = np.max(np.abs(spec[(-np.arange(p)) % p] - np.conj(spec)))
                _require(conj_err <= tol.unit_modulus, f"conjugate symmetry off by {conj_err:.3g}")
                lhs = p * float(mu.l2_squared())
                rhs = math.fsum(np.abs(spec) ** 2)
                _require(abs(lhs - rhs) <= tol.parseval * rhs, f"Parseval {lhs!r} vs {rhs!r}")
                rho = random_measure(p, np.random.default_rng(rng_state))
                left = math.fsum(mu.as_float * fourier(rho).real)
                right = math.fsum((spec * rho.as_float).real)
                _require(abs(left - right) <= tol.parseval * max(1.0, abs(right)), f"duality {left!r} vs {right!r}")
            yield f"p={p} {label}", case


def _convolution_cases(p_max, seed, tol):
    for p in _primes(p_max):
        ctx = make_field_context(p)
        for H in all_subgroups(ctx):
            def case(H=H, p=p):
                mu = subgroup_measure(H)
                a = coefficient_magnitudes(mu)
                top = mu.max_mass()
                nu = None
                for k in range(1, 5):
                    nu = k_fold_nu(mu, k)
                    recon = inverse_fourier(a ** (2 * k), p).real
                    err = float(np.max(np.abs(nu.as_float - recon)))
                    _require(err <= tol.dual_path, f"k={k} dual-path error {err:.3g}")
                    _require(nu.max_mass() <= top, f"k={k} sup-norm bound fails")
                    for h in H.elements[:3]:
                        _require(all(nu.weights[x] == nu.weights[h * x % p] for x in range(p)),
                                 f"k={k} not invariant under {h}")
                phi = phi_of(mu)
                _require(min(phi.numer) >= 0, "phi negative")
                _require(sum(phi.numer) == p * phi.denom, "phi mass != p")
                _require(max(phi.numer) == phi.numer[0], "phi peak not at 0")
            yield f"p={p} {H.label()}", case


def _smear_cases(p_max, seed, tol):
    for p in _primes(p_max):
        ctx = make_field_context(p)
        for H in all_subgroups(ctx):
            for k in (1, 2, 3):
                yield f"p={p} {H.label()} k={k}", (lambda H=H, k=k, ctx=ctx: check_smear_out(ctx, H, k, tol))


def _lemma_cases(p_max, seed, tol):
    for p in _primes(p_max):
        ctx = make_field_context(p)
        for H in all_subgroups(ctx):
            yield f"p={p} {H.label()} complete-sum", (lambda H=H, ctx=ctx: complete_sum_bound_check(ctx, H))
            for delta in (Fraction(1, 10), Fraction(3, 10)):
                def lam(H=H, ctx=ctx, delta=delta):
                    _require(check_lambda_bounds(ctx, H, delta, tol).passed, "Lambda_delta size bounds fail")
                yield f"p={p} {H.label()} lambda delta={delta}", lam
            for eta in (Fraction(1, 4), Fraction(1, 2)):
                def stat(H=H, ctx=ctx, eta=eta):
                    _require(check_statistical_mult(ctx, H, eta, tol=tol).passed, "statistical multiplicativity fails")
                yield f"p={p} {H.label()} stat-mult eta={eta}", stat
        if p > 8:
            def uniform(p=p, ctx=ctx):
                mu = uniform_on(p, range(p))
                hyp = verify_hypotheses(mu, Fraction(1, 2))
                _require(hyp.passed, "uniform-measure hypotheses fail")
                _require(run_pipeline(mu, Fraction(1, 2), ctx=ctx, hypotheses=hyp).passed, "pipeline fails")
            yield f"p={p} uniform pipeline", uniform


def _incomplete_cases(p_max, seed, tol):
    for p in _primes(p_max):
        ctx = make_field_context(p)
        for T in sorted({max(1, (p - 1) // 5), (p - 1) // 2, p - 1}):
            def case(ctx=ctx, T=T):
                translate_margins(ctx, ctx.g, T, Fraction(1, 5))
                check_incomplete_smear(ctx, ctx.g, T, Fraction(1, 4), tol=tol)
            yield f"p={p} g0={ctx.g} T={T}", case


_CASES = {
    "parseval": _parseval_cases,
    "convolution": _convolution_cases,
    "smear": _smear_cases,
    "lemmas": _lemma_cases,
    "incomplete": _incomplete_cases,
}


def run_suite(name: str, p_max: int, seed: int = 0, tol: Tolerances = TOL) -> SuiteResult:
    result = SuiteResult(name)
    start = time.perf_counter()
    for label, case in _CASES[name](p_max, seed, tol):
        result.instances += 1
        try:
            case()
        except (KCapExceeded, HypothesesFail) as exc:
            result.skipped += 1
            result.skip_reasons.append(f"{label}: {type(exc).__name__}: {exc}")
        except (Violation, CheckFailure) as exc:
            result.violations += 1
            if result.first_violation is None:
                result.first_violation = f"{label}: {type(exc).__name__}: {exc}"
        except ExpSumError as exc:
            result.skipped += 1
            result.skip_reasons.append(f"{label}: {type(exc).__name__}: {exc}")
    result.elapsed_s = time.perf_counter() - start
    return result


def run_suites(suite: str, p_max: int, seed: int = 0, tol: Tolerances = TOL) -> list[SuiteResult]:
    names = SUITES if suite == "all" else (suite,)
    return [run_suite(n, p_max, seed, tol) for n in names]
