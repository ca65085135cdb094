"""Reference-value checks reproduced from closed forms and published numbers."""
from __future__ import annotations

import warnings
from dataclasses import asdict, dataclass

import numpy as np

from .core import DEFAULT_TOL, Pom, Tolerances, max_abs, validate_pom
from .ensembles import tetrad, trine, two_pure
from .maxconf import confidence, max_confidence_pom, no_signaling_confidence_oracle, weighted_average_confidence
from .minerror import (
    IncompleteMeasurementWarning,
    OptimizerConfig,
    helstrom_two_pure,
    optimize_min_error,
    square_root_measurement,
)
from .mutualinfo import best_projective_qubit, elimination_measurement, mutual_information
from .simulator import empirical_figures, sample_outcomes
from .unambiguous import coherent_overlap, coherent_overlap_demo, no_signaling_unamb_oracle, unamb_two_pure


# Residuals are computed in float64 from O(dim) products; below this level a
# residual cannot be told apart from rounding, so tighter tolerances are unverifiable.
TOLERANCE_FLOOR = 1e-14


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    reference: float
    deviation: float
    tolerance: float
    passed: bool

    def to_dict(self) -> dict:
        return asdict(self)


def _check(name: str, value: float, reference: float, tolerance: float) -> Check:
    deviation = abs(float(value) - float(reference))
    return Check(name, float(value), float(reference), deviation, tolerance, bool(deviation <= tolerance))


def _worst(pairs) -> tuple[float, float]:
    """(value, reference) pair with the largest deviation."""
    return max(pairs, key=lambda vr: abs(vr[0] - vr[1]))


def verify_suite(tol: Tolerances = DEFAULT_TOL, seed: int = 2024) -> list[Check]:
    """Run every reference check; ``tol`` sets the POM-axiom threshold that is reported."""
    checks: list[Check] = []
    poms: list[Pom] = []

    for deg in (5, 15, 30, 45):
        th = np.radians(deg)
        e = two_pure(th)
        res = helstrom_two_pure(*e.kets, 0.5)
        poms.append(res.pom)
        checks.append(_check(f"helstrom p_error theta={deg}deg", res.p_error, 0.5 * (1 - np.sin(2 * th)), 1e-10))

    t = trine()
    srm = square_root_measurement(t)
    poms.append(srm)
    checks.append(_check("trine SRM success", weighted_average_confidence(t, srm), 2 / 3, 1e-12))
    opt = optimize_min_error(t, OptimizerConfig(start="random", seed=seed))
    poms.append(opt.pom)
    checks.append(_check("trine optimizer success (random start)", opt.p_correct, 2 / 3, 1e-6))

    grid = np.radians(np.arange(1, 46))
    results = [unamb_two_pure(th, 0.5) for th in grid]
    poms.extend(r.pom for r in results)
    value, ref = _worst([(r.p_inconclusive, np.cos(2 * th)) for r, th in zip(results, grid)])
    checks.append(_check("unambiguous P(?) equal priors, theta 1..45deg", value, ref, 1e-10))
    th, p0 = np.radians(40), 0.4
    value = unamb_two_pure(th, p0).p_inconclusive
    checks.append(_check("unambiguous P(?) p0=0.4 theta=40deg", value, 2 * np.sqrt(p0 * (1 - p0)) * np.cos(2 * th), 1e-10))
    checks.append(_check("unambiguous no-signalling oracle p0=0.4 theta=40deg", no_signaling_unamb_oracle(th, p0), value, 1e-4))

    for alpha in (0.5, 1.0, 2.0):
        checks.append(
            _check(f"coherent P(?) alpha={alpha}", coherent_overlap_demo(alpha), abs(coherent_overlap(alpha, -alpha)), 1e-12)
        )

    conf_pairs, inc_pairs, oracle_pairs, me_pairs = [], [], [], []
    for deg in range(1, 45):
        th = np.radians(deg)
        e = trine(th)
        mc = max_confidence_pom(e)
        poms.append(mc.pom)
        conf_pairs.extend((c, 2 / 3) for c in mc.per_outcome_confidence)
        expected = (1 - np.tan(th) ** 2) * np.diag([1.0, 0.0])
        inc_pairs.append((max_abs(mc.pom.element("?") - expected), 0.0))
        oracle_pairs.extend((b, 2 / 3) for b in no_signaling_confidence_oracle(e))
        me = square_root_measurement(e)
        me_pairs.append((confidence(e, me, 0), (1 + np.sin(2 * th)) / 3))
    checks.append(_check("max-confidence trine confidence, theta 1..44deg", *_worst(conf_pairs), 1e-9))
    checks.append(_check("max-confidence trine inconclusive element", *_worst(inc_pairs), 1e-9))
    checks.append(_check("no-signalling confidence bound trine", *_worst(oracle_pairs), 1e-9))
    checks.append(_check("min-error trine confidence (1+sin2theta)/3", *_worst(me_pairs), 1e-9))

    tt = tetrad()
    for name, ens, ref in (("trine", t, 0.585), ("tetrad", tt, 0.415)):
        pom = elimination_measurement(ens)
        poms.append(pom)
        checks.append(_check(f"{name} elimination MI (bits)", mutual_information(ens, pom), ref, 1e-3))
    for name, ens, ref in (("trine", t, 0.459), ("tetrad", tt, 0.311)):
        pom, bits = best_projective_qubit(ens)
        poms.append(pom)
        checks.append(_check(f"{name} best projective MI (bits)", bits, ref, 2e-3))
    e15 = two_pure(np.radians(15))
    h15 = helstrom_two_pure(*e15.kets, 0.5)
    checks.append(_check("two-state theta=15deg Helstrom MI (bits)", mutual_information(e15, h15.pom), 0.189, 1e-3))

    n = 100_000
    counts = sample_outcomes(t, srm, n, seed=seed)
    success = 1 - empirical_figures(counts, t).p_error
    checks.append(_check("Monte Carlo trine SRM success (3 sigma)", success, 2 / 3, 3 * np.sqrt(2 / 9 / n)))

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IncompleteMeasurementWarning)
        reports = [validate_pom(p, tol) for p in poms]
    worst = max(r.completeness for r in reports)
    negativity = max(0.0, -min(r.positivity for r in reports))
    herm = max(r.hermiticity for r in reports)
    checks.append(_check("POM completeness residual", worst, 0.0, tol.completeness))
    checks.append(_check("POM positivity violation", negativity, 0.0, tol.positivity))
    checks.append(_check("POM hermiticity residual", herm, 0.0, tol.hermiticity))
    tightest = min(tol.hermiticity, tol.positivity, tol.completeness, tol.rank)
    checks.append(
        Check("tolerances above float64 floor", tightest, TOLERANCE_FLOOR, max(0.0, TOLERANCE_FLOOR - tightest),
              0.0, bool(tightest >= TOLERANCE_FLOOR))
    )
    return checks
