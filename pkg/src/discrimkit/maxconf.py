"""Maximum-confidence discrimination and its relation to the other strategies."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    DEFAULT_TOL,
    INCONCLUSIVE,
    DiscriminationError,
    Pom,
    StateEnsemble,
    Tolerances,
    dagger,
    eigendecompose,
    max_eigenvalue,
    min_eigenvalue,
    support_inverse_sqrt,
)


class ZeroProbabilityOutcome(DiscriminationError):
    """Confidence is undefined for an outcome that never occurs."""


@dataclass(frozen=True, eq=False)
class ConfidenceResult:
    pom: Pom
    per_outcome_confidence: tuple
    max_confidence: tuple
    p_inconclusive: float

    def to_dict(self) -> dict:
        return {
            "strategy": "max-confidence",
            "pom": self.pom.to_dict(),
            "per_outcome_confidence": list(self.per_outcome_confidence),
            "max_confidence": list(self.max_confidence),
            "p_inconclusive": self.p_inconclusive,
        }


def confidence(ensemble: StateEnsemble, pom: Pom, outcome: int) -> float:
    """Posterior probability that state ``outcome`` was sent given that outcome fired."""
    element = pom.element(outcome)
    occurs = np.trace(ensemble.average() @ element).real
    if occurs <= 1e-14:
        raise ZeroProbabilityOutcome(f"outcome {outcome!r} has probability {occurs:.3e}")
    return float(np.trace(ensemble.weighted(outcome) @ element).real / occurs)


def _whitened(ensemble: StateEnsemble, i: int, tol: Tolerances) -> np.ndarray:
    r = support_inverse_sqrt(ensemble.average(), tol)
    return r @ ensemble.weighted(i) @ r


def max_confidence_value(ensemble: StateEnsemble, i: int, tol: Tolerances = DEFAULT_TOL) -> float:
    """Largest eigenvalue of ρ^(-1/2) p_i ρ_i ρ^(-1/2); inverses on the support of ρ."""
    return max_eigenvalue(_whitened(ensemble, i, tol))


def _direction(ensemble: StateEnsemble, i: int, tol: Tolerances) -> np.ndarray:
    """ρ^(-1/2) σ_i ρ^(-1/2) with σ_i uniform over the top eigenspace of the whitened state."""
    values, vectors = eigendecompose(_whitened(ensemble, i, tol), tol)
    top = values[0]
    if top <= 0:
        return np.zeros((ensemble.dim, ensemble.dim), dtype=complex)
    v = vectors[:, values >= top - tol.rank * max(top, 1.0)]
    sigma = v @ dagger(v) / v.shape[1]
    r = support_inverse_sqrt(ensemble.average(), tol)
    return r @ sigma @ r


def _largest_step(m: np.ndarray, b: np.ndarray, floor: float, iterations: int = 80) -> float:
    """Largest δ ≥ 0 keeping m - δ b positive (down to ``floor``), by bisection."""
    top = max_eigenvalue(b)
    if top <= 0:
        return 0.0
    lo, hi = 0.0, 1.0 / top
    if min_eigenvalue(m - hi * b) >= floor:
        return hi
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if min_eigenvalue(m - mid * b) >= floor:
            lo = mid
        else:
            hi = mid
    return lo


def max_confidence_pom(ensemble: StateEnsemble, tol: Tolerances = DEFAULT_TOL, sweeps: int = 20) -> ConfidenceResult:
    """Maximum-confidence POM completed with an inconclusive outcome.

    Conclusive element i is α_i ρ^(-1/2) σ_i ρ^(-1/2). The scalings start on
    the ray α_i ∝ 1/λ_max(element) pushed to the boundary of π_? ≥ 0, then
    coordinate ascent grows each α_i while π_? stays positive, lowering
    P(?) = Tr(ρ π_?).
    """
    n, d = len(ensemble), ensemble.dim
    eye = np.eye(d)
    directions = [_direction(ensemble, i, tol) for i in range(n)]
    weights = np.array([1.0 / max_eigenvalue(b) if max_eigenvalue(b) > 0 else 0.0 for b in directions])
    ray = sum(w * b for w, b in zip(weights, directions))
    alphas = weights / max_eigenvalue(ray) if np.any(weights) else weights
    floor = -1e-13
    for _ in range(sweeps):
        grown = False
        for i in range(n):
            m = eye - sum(a * b for a, b in zip(alphas, directions))
            step = _largest_step(m, directions[i], min(floor, min_eigenvalue(m)))
            if step > 1e-15 * max(alphas[i], 1.0):
                alphas[i] += step
                grown = True
        if not grown:
            break
    elements = [a * b for a, b in zip(alphas, directions)]
    inc = eye - sum(elements)
    pom = Pom(tuple(elements) + (inc,), tuple(range(n)) + (INCONCLUSIVE,))
    limits = tuple(max_confidence_value(ensemble, i, tol) for i in range(n))
    achieved = []
    for i in range(n):
        try:
            achieved.append(confidence(ensemble, pom, i))
        except ZeroProbabilityOutcome:
            achieved.append(float("nan"))
    p_inc = float(np.trace(ensemble.average() @ inc).real)
    return ConfidenceResult(pom, tuple(achieved), limits, p_inc)


def weighted_average_confidence(ensemble: StateEnsemble, pom: Pom) -> float:
    """Σ_i P(i) P(ρ_i|i), which equals the minimum-error success probability Σ_i p_i Tr(ρ_i π_i)."""
    if INCONCLUSIVE in pom.labels:
        raise DiscriminationError("weighted average confidence needs a POM without inconclusive outcome")
    rho = ensemble.average()
    total = 0.0
    for i in range(len(ensemble)):
        occurs = np.trace(rho @ pom.element(i)).real
        if occurs > 1e-14:
            total += occurs * confidence(ensemble, pom, i)
    return float(total)


def no_signaling_confidence_oracle(ensemble: StateEnsemble, tol: Tolerances = DEFAULT_TOL) -> tuple:
    """Per-state confidence bound <j|P_D|j> from the entangled-partner argument.

    The pure states are purified as Σ_i √p_i |ψ_i>|i>; P_D projects onto the
    support of the partner's reduced state.
    """
    if not ensemble.is_pure:
        raise DiscriminationError("the no-signalling oracle needs a pure-state ensemble")
    m = np.column_stack([np.sqrt(p) * k for p, k in zip(ensemble.priors, ensemble.kets)])
    # amplitudes Ψ[a, i] -> reduced state of the partner: (ρ_R)_ij = Σ_a Ψ[a, i] conj(Ψ[a, j])
    rho_r = m.T @ m.conj()
    values, vectors = np.linalg.eigh(0.5 * (rho_r + dagger(rho_r)))
    keep = values > tol.rank * values[-1]
    v = vectors[:, keep]
    p_d = v @ dagger(v)
    return tuple(float(p_d[j, j].real) for j in range(len(ensemble)))
