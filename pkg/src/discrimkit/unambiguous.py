"""Unambiguous (error-free, possibly inconclusive) discrimination."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .core import (
    DEFAULT_TOL,
    INCONCLUSIVE,
    DimensionMismatch,
    DiscriminationError,
    Pom,
    StateEnsemble,
    Tolerances,
    born_probability,
    dagger,
    kernel_projector,
    max_abs,
    min_eigenvalue,
    normalize,
    projector,
)


class LinearDependenceError(DiscriminationError):
    """Unambiguous identification of every state needs linearly independent states."""


class InfeasibleMeasurementError(DiscriminationError):
    def __init__(self, message: str, min_eigenvalue: float):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


class Regime(enum.Enum):
    EQUAL_PRIORS = "equal-priors"
    JAEGER_SHIMONY = "jaeger-shimony"
    VON_NEUMANN = "von-neumann"


@dataclass(frozen=True, eq=False)
class UnambiguousResult:
    pom: Pom
    p_inconclusive: float
    per_state_success: tuple
    regime: Regime | None
    residual_zero_error: float

    def to_dict(self) -> dict:
        return {
            "strategy": "unambiguous",
            "pom": self.pom.to_dict(),
            "p_inconclusive": self.p_inconclusive,
            "per_state_success": list(self.per_state_success),
            "regime": self.regime.value if self.regime else None,
            "residual_zero_error": self.residual_zero_error,
        }


def _evaluate(ensemble: StateEnsemble, pom: Pom, regime, tol: Tolerances) -> UnambiguousResult:
    n = len(ensemble)
    success = tuple(born_probability(ensemble.states[i], pom.element(i), tol) for i in range(n))
    p_inc = sum(p * born_probability(rho, pom.element(INCONCLUSIVE), tol) for p, rho in zip(ensemble.priors, ensemble.states))
    # raw traces, not clamped Born probabilities, so small violations stay visible
    cross = 0.0
    for i, rho in enumerate(ensemble.states):
        wrong = sum(np.trace(rho @ pom.element(j)).real for j in range(n) if j != i)
        cross = max(cross, abs(wrong))
    return UnambiguousResult(pom, float(p_inc), success, regime, float(cross))


def two_pure_regime(theta: float, p0: float) -> Regime:
    p1 = 1.0 - p0
    c2 = np.cos(2 * theta) ** 2
    if p0 * c2 > p1 or p1 * c2 > p0:
        return Regime.VON_NEUMANN
    if p0 == p1:
        return Regime.EQUAL_PRIORS
    return Regime.JAEGER_SHIMONY


def unamb_two_pure(theta: float, p0: float, tol: Tolerances = DEFAULT_TOL) -> UnambiguousResult:
    """Optimal unambiguous measurement for cosθ|0> ± sinθ|1>, 0 < θ ≤ π/4.

    Uses the scaled reciprocal-state POM while the prior ratio stays below
    1/cos²2θ and the von Neumann measurement that never identifies the less
    likely state beyond it.
    """
    if not 0.0 < theta <= np.pi / 4 + 1e-15:
        raise DiscriminationError(
            "theta must lie in (0, pi/4]; identical states cannot be discriminated unambiguously"
        )
    if not 0.0 <= p0 <= 1.0:
        raise DiscriminationError(f"p0 must lie in [0, 1], got {p0}")
    p1 = 1.0 - p0
    c, s = np.cos(theta), np.sin(theta)
    overlap = np.cos(2 * theta)
    psi0, psi1 = np.array([c, s]), np.array([c, -s])
    phi0, phi1 = np.array([s, c]), np.array([s, -c])
    regime = two_pure_regime(theta, p0)
    zero = np.zeros((2, 2))
    if regime is Regime.VON_NEUMANN:
        if p0 > p1:
            pi0, pi1, inc = projector(phi0), zero, projector(psi1)
        else:
            pi0, pi1, inc = zero, projector(phi1), projector(psi0)
    else:
        sin2 = np.sin(2 * theta) ** 2
        a0 = (1.0 - np.sqrt(p1 / p0) * overlap) / sin2 if overlap else 1.0
        a1 = (1.0 - np.sqrt(p0 / p1) * overlap) / sin2 if overlap else 1.0
        pi0, pi1 = a0 * projector(phi0), a1 * projector(phi1)
        inc = np.eye(2) - pi0 - pi1
    pom = Pom((pi0, pi1, inc), (0, 1, INCONCLUSIVE))
    ensemble = StateEnsemble.from_kets([psi0, psi1], [p0, p1])
    return _evaluate(ensemble, pom, regime, tol)


def canonical_two_pure(psi0, psi1) -> tuple[float, np.ndarray]:
    """Angle θ and an isometry B (d x 2) with ψ0 = B(cosθ, sinθ) and ψ1 ∝ B(cosθ, -sinθ).

    The relative phase of ψ1 is absorbed so that the overlap becomes real.
    """
    psi0, psi1 = normalize(psi0), normalize(psi1)
    if psi0.shape != psi1.shape:
        raise DimensionMismatch("states have different dimensions")
    overlap = np.vdot(psi0, psi1)
    r = min(abs(overlap), 1.0)
    theta = 0.5 * np.arccos(r)
    if theta < 1e-12:
        raise DiscriminationError("states are identical up to phase")
    phase = overlap / r if r > 0 else 1.0
    psi1 = psi1 / phase
    e0 = (psi0 + psi1) / (2 * np.cos(theta))
    e1 = (psi0 - psi1) / (2 * np.sin(theta))
    return float(theta), np.column_stack([e0, e1])


def unamb_two_pure_states(psi0, psi1, p0: float, tol: Tolerances = DEFAULT_TOL) -> UnambiguousResult:
    """:func:`unamb_two_pure` for an arbitrary pair of pure states of any dimension."""
    theta, b = canonical_two_pure(psi0, psi1)
    canonical = unamb_two_pure(theta, p0, tol)
    rest = np.eye(b.shape[0]) - b @ dagger(b)
    elements = [b @ e @ dagger(b) for e in canonical.pom.elements]
    elements[2] = elements[2] + rest
    pom = Pom(tuple(elements), canonical.pom.labels)
    ensemble = StateEnsemble.from_kets([psi0, psi1], [p0, 1.0 - p0])
    return _evaluate(ensemble, pom, canonical.regime, tol)


@dataclass(frozen=True, eq=False)
class ReciprocalSet:
    states: tuple
    gram_diagonal: tuple


def linear_independence(states, tol: Tolerances = DEFAULT_TOL) -> tuple[bool, float]:
    """Whether the smallest Gram eigenvalue exceeds the rank cutoff, and that eigenvalue."""
    psi = np.column_stack([normalize(s) for s in states])
    values = np.linalg.eigvalsh(dagger(psi) @ psi)
    return bool(values[0] > tol.rank * values[-1]), float(values[0])


def _dual_basis(states, tol: Tolerances) -> np.ndarray:
    independent, smallest = linear_independence(states, tol)
    if not independent:
        raise LinearDependenceError(
            f"states are linearly dependent (smallest Gram eigenvalue {smallest:.3e}); "
            "unambiguous discrimination needs linearly independent states"
        )
    psi = np.column_stack([normalize(s) for s in states])
    # columns r_j satisfy <ψ_i|r_j> = δ_ij
    return psi @ np.linalg.inv(dagger(psi) @ psi)


def reciprocal_states(states, tol: Tolerances = DEFAULT_TOL) -> ReciprocalSet:
    """Unit vectors |ψ_j^⊥> orthogonal to every |ψ_i>, i ≠ j."""
    dual = _dual_basis(states, tol)
    norms = np.linalg.norm(dual, axis=0)
    vectors = tuple(dual[:, j] / norms[j] for j in range(dual.shape[1]))
    return ReciprocalSet(vectors, tuple(complex(1.0 / n) for n in norms))


def unamb_n_pure(states, priors, success_probs, tol: Tolerances = DEFAULT_TOL) -> UnambiguousResult:
    """POM identifying state j with probability P_j and never misidentifying.

    π_j = P_j |ψ_j^⊥><ψ_j^⊥| / |<ψ_j|ψ_j^⊥>|², completed with π_? = 1 - Σ π_j.
    Raises :class:`InfeasibleMeasurementError` when π_? is not positive.
    """
    p = np.asarray(success_probs, dtype=float).reshape(-1)
    if p.size != len(states) or np.any(p < 0) or np.any(p > 1):
        raise DiscriminationError("success probabilities must lie in [0, 1], one per state")
    dual = _dual_basis(states, tol)
    elements = [pj * projector(dual[:, j]) for j, pj in enumerate(p)]
    inc = np.eye(dual.shape[0]) - sum(elements)
    lowest = min_eigenvalue(inc)
    if lowest < -tol.positivity:
        raise InfeasibleMeasurementError(
            f"requested success probabilities need an inconclusive element with eigenvalue {lowest:.3e}",
            lowest,
        )
    pom = Pom(tuple(elements) + (inc,), tuple(range(len(elements))) + (INCONCLUSIVE,))
    ensemble = StateEnsemble.from_kets(states, priors)
    return _evaluate(ensemble, pom, None, tol)


def max_equal_success(states, priors=None, tol: Tolerances = DEFAULT_TOL, iterations: int = 60) -> UnambiguousResult:
    """Largest common success probability P_j = P, found by bisection on π_? ≥ 0."""
    dual = _dual_basis(states, tol)
    total = sum(projector(dual[:, j]) for j in range(dual.shape[1]))
    eye = np.eye(dual.shape[0])
    lo, hi = 0.0, 1.0
    if min_eigenvalue(eye - total) >= 0:
        lo = 1.0
    for _ in range(iterations):
        if hi - lo < 1e-16:
            break
        mid = 0.5 * (lo + hi)
        if min_eigenvalue(eye - mid * total) >= 0:
            lo = mid
        else:
            hi = mid
    if priors is None:
        priors = np.full(len(states), 1.0 / len(states))
    return unamb_n_pure(states, priors, np.full(len(states), lo), tol)


@dataclass(frozen=True, eq=False)
class MixedFeasibility:
    """Which of two mixed states can ever be identified without error.

    ``candidates[i]`` is a positive operator in the kernel of the other state
    with non-zero weight on state i, or None.
    """

    identifiable: tuple
    kernels: tuple
    candidates: tuple


def mixed_unamb_feasibility(rho0, rho1, tol: Tolerances = DEFAULT_TOL) -> MixedFeasibility:
    ensemble = StateEnsemble((rho0, rho1), [0.5, 0.5])
    rho0, rho1 = ensemble.states
    k0, k1 = kernel_projector(rho0, tol), kernel_projector(rho1, tol)
    # state 1 is identifiable through operators living in the kernel of state 0
    id1 = max_abs(k0 @ rho1 @ k0) > tol.rank
    id0 = max_abs(k1 @ rho0 @ k1) > tol.rank
    return MixedFeasibility(
        (bool(id0), bool(id1)),
        (k0, k1),
        (k1 if id0 else None, k0 if id1 else None),
    )


def coherent_overlap(alpha: complex, beta: complex) -> complex:
    """<α|β> for coherent states."""
    return complex(np.exp(-0.5 * abs(alpha) ** 2 - 0.5 * abs(beta) ** 2 + np.conj(alpha) * beta))


def indistinguishable_result(n_states: int, dim: int) -> UnambiguousResult:
    """Degenerate answer for identical states: always inconclusive."""
    zero = np.zeros((dim, dim))
    pom = Pom((zero,) * n_states + (np.eye(dim),), tuple(range(n_states)) + (INCONCLUSIVE,))
    return UnambiguousResult(pom, 1.0, (0.0,) * n_states, None, 0.0)


def coherent_overlap_demo(alpha: complex) -> float:
    """Inconclusive probability for |±α> after the beam-splitter trick.

    The probe output mode holds |i√2α> or vacuum; the run is inconclusive when
    it is found empty, with probability |<i√2α|0>|² = exp(-2|α|²).
    """
    return abs(coherent_overlap(1j * np.sqrt(2) * alpha, 0.0)) ** 2


def no_signaling_unamb_oracle(theta: float, p0: float, resolution: int = 2001) -> float:
    """Minimal inconclusive weight allowed by no-signalling, by direct search.

    The reduced state of the partner system must equal diag(q0, q1) + q_? ρ_?.
    For each q0 on a grid the largest feasible q1 follows from positivity of the
    2x2 remainder; the best grid cell is then refined with a bounded scalar
    search. Shares no code with the POM constructions.
    """
    p1 = 1.0 - p0
    c, s = np.cos(theta), np.sin(theta)
    left = [np.array([c, s]), np.array([c, -s])]
    joint = np.sqrt(p0) * np.kron(left[0], [1, 0]) + np.sqrt(p1) * np.kron(left[1], [0, 1])
    m = joint.reshape(2, 2)
    rho_r = m.T @ m.conj()
    a, b, d = rho_r[0, 0].real, rho_r[0, 1], rho_r[1, 1].real
    b2 = abs(b) ** 2

    def best_q1(q0):
        rem = a - q0
        if rem < 0:
            return None
        if rem == 0:
            return d if b2 == 0 else None
        q1 = d - b2 / rem
        return q1 if q1 >= 0 else None

    def inconclusive(q0):
        # infeasible points get a finite penalty above any feasible value (≤ 1)
        q1 = best_q1(q0)
        return 2.0 + q0 if q1 is None else 1.0 - q0 - q1

    grid = np.linspace(0.0, a, resolution)
    values = np.array([inconclusive(q) for q in grid])
    k = int(np.argmin(values))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, resolution - 1)]
    best = values[k]
    if hi > lo:
        res = minimize_scalar(inconclusive, bounds=(lo, hi), method="bounded", options={"xatol": 1e-14})
        if res.fun <= 1.0:
            best = min(best, float(res.fun))
    return float(max(best, 0.0))
