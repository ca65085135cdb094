"""Minimum-error discrimination."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

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
    eigendecompose,
    kernel_projector,
    max_abs,
    min_eigenvalue,
    normalize,
    projector,
    support_inverse_sqrt,
    support_projector,
    validate_pom,
)


class IncompleteMeasurementWarning(UserWarning):
    """The a priori density operator is rank deficient; the POM only resolves its support."""


@dataclass(frozen=True, eq=False)
class MinErrorResult:
    pom: Pom
    p_error: float
    p_correct: float
    residual_hel1: float
    residual_hel2: float
    converged: bool = True
    iterations: int = 0
    history: tuple = field(default=(), repr=False)

    def to_dict(self) -> dict:
        return {
            "strategy": "min-error",
            "pom": self.pom.to_dict(),
            "p_error": self.p_error,
            "p_correct": self.p_correct,
            "residual_hel1": self.residual_hel1,
            "residual_hel2": self.residual_hel2,
            "converged": self.converged,
            "iterations": self.iterations,
        }


def helstrom_error(overlap: float, p0: float) -> float:
    """½(1 - √(1 - 4 p0 p1 |<ψ0|ψ1>|²))."""
    p1 = 1.0 - p0
    return 0.5 * (1.0 - np.sqrt(max(0.0, 1.0 - 4.0 * p0 * p1 * abs(overlap) ** 2)))


def success_probability(ensemble: StateEnsemble, pom: Pom, tol: Tolerances = DEFAULT_TOL) -> float:
    """Σ_i p_i Tr(ρ_i π_i) where π_i is the POM element labelled i."""
    if pom.dim != ensemble.dim:
        raise DimensionMismatch("POM and ensemble dimensions differ")
    return float(
        sum(p * born_probability(rho, pom.element(i), tol) for i, (p, rho) in enumerate(zip(ensemble.priors, ensemble.states)))
    )


def _result(ensemble, pom, tol, **kw) -> MinErrorResult:
    p_correct = success_probability(ensemble, pom, tol)
    hel1, hel2 = check_optimality(ensemble, pom, tol)
    return MinErrorResult(pom, 1.0 - p_correct, p_correct, hel1, hel2, **kw)


def two_mixed_optimal(rho0, rho1, p0: float, tol: Tolerances = DEFAULT_TOL) -> MinErrorResult:
    """Projective measurement onto the positive / non-positive eigenspaces of p0ρ0 - p1ρ1.

    Eigenvalues within the rank cutoff of zero go to outcome 1.
    """
    if not 0.0 <= p0 <= 1.0:
        raise DiscriminationError(f"p0 must lie in [0, 1], got {p0}")
    ensemble = StateEnsemble((rho0, rho1), [p0, 1.0 - p0])
    gamma = ensemble.weighted(0) - ensemble.weighted(1)
    values, vectors = eigendecompose(gamma, tol)
    scale = max(np.max(np.abs(values)), 1.0)
    v = vectors[:, values > tol.rank * scale]
    pi0 = v @ dagger(v)
    pom = Pom((pi0, np.eye(ensemble.dim) - pi0), (0, 1))
    return _result(ensemble, pom, tol)


def helstrom_two_pure(psi0, psi1, p0: float, tol: Tolerances = DEFAULT_TOL) -> MinErrorResult:
    """Optimal two-outcome measurement for two pure states.

    The achieved Born-rule error is checked against the closed-form bound.
    """
    psi0, psi1 = normalize(psi0), normalize(psi1)
    if psi0.shape != psi1.shape:
        raise DimensionMismatch("states have different dimensions")
    result = two_mixed_optimal(projector(psi0), projector(psi1), p0, tol)
    bound = helstrom_error(np.vdot(psi0, psi1), p0)
    if abs(result.p_error - bound) > 1e-10:
        raise ArithmeticError(f"achieved error {result.p_error!r} departs from the bound {bound!r}")
    return result


def weighted_srm(ensemble: StateEnsemble, weights, tol: Tolerances = DEFAULT_TOL) -> Pom:
    """Square-root measurement built with weights w_i in place of the priors.

    π_i = σ^(-1/2) w_i ρ_i σ^(-1/2), σ = Σ w_i ρ_i. Inverses are taken on the
    support of σ; if σ is rank deficient an :class:`IncompleteMeasurementWarning`
    is issued and the elements sum to the support projector only.
    """
    w = np.asarray(weights, dtype=float).reshape(-1)
    if w.size != len(ensemble) or np.any(w < 0) or abs(w.sum() - 1.0) > tol.completeness:
        raise DiscriminationError("weights must be a probability distribution over the states")
    sigma = np.einsum("i,ijk->jk", w, np.array(ensemble.states))
    r = support_inverse_sqrt(sigma, tol)
    elements = tuple(r @ (wi * rho) @ r for wi, rho in zip(w, ensemble.states))
    if max_abs(support_projector(sigma, tol) - np.eye(ensemble.dim)) > tol.completeness:
        warnings.warn(
            "ensemble does not span the space; square-root measurement is complete on the support only",
            IncompleteMeasurementWarning,
            stacklevel=2,
        )
    return Pom(elements, tuple(range(len(ensemble))))


def square_root_measurement(ensemble: StateEnsemble, tol: Tolerances = DEFAULT_TOL) -> Pom:
    """π_i = p_i ρ^(-1/2) ρ_i ρ^(-1/2) with ρ the a priori density operator."""
    with warnings.catch_warnings():
        warnings.simplefilter("error", IncompleteMeasurementWarning)
        try:
            return weighted_srm(ensemble, ensemble.priors, tol)
        except IncompleteMeasurementWarning as w:
            message = str(w)
    warnings.warn(message, IncompleteMeasurementWarning, stacklevel=2)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IncompleteMeasurementWarning)
        return weighted_srm(ensemble, ensemble.priors, tol)


def complete_on_kernel(pom: Pom, ensemble: StateEnsemble, tol: Tolerances = DEFAULT_TOL) -> Pom:
    """Add the kernel projector of the a priori state to the first element.

    No ensemble member has weight on that kernel, so no probability changes.
    """
    k = kernel_projector(ensemble.average(), tol)
    elements = list(pom.elements)
    elements[0] = elements[0] + k
    return Pom(tuple(elements), pom.labels)


def _per_state_elements(ensemble: StateEnsemble, pom: Pom) -> list[np.ndarray]:
    if pom.dim != ensemble.dim:
        raise DimensionMismatch("POM and ensemble dimensions differ")
    if INCONCLUSIVE in pom.labels:
        raise DiscriminationError("minimum-error POMs have no inconclusive outcome")
    return [pom.element(i) for i in range(len(ensemble))]


def check_optimality(ensemble: StateEnsemble, pom: Pom, tol: Tolerances = DEFAULT_TOL) -> tuple[float, float]:
    """Residuals of the two necessary-and-sufficient minimum-error conditions.

    hel1 = max_j max(0, -λ_min(Γ - p_j ρ_j)), Γ = Σ_i p_i ρ_i π_i;
    hel2 = max_ij ‖π_i (p_i ρ_i - p_j ρ_j) π_j‖.
    Γ is replaced by its Hermitian part: Tr(Γ) is unchanged, so the
    sufficiency argument still holds for non-optimal POMs.
    """
    pis = _per_state_elements(ensemble, pom)
    weighted = [ensemble.weighted(i) for i in range(len(ensemble))]
    gamma = sum(w @ pi for w, pi in zip(weighted, pis))
    gamma = 0.5 * (gamma + dagger(gamma))
    hel1 = max(max(0.0, -min_eigenvalue(gamma - w)) for w in weighted)
    hel2 = 0.0
    for i, pi_i in enumerate(pis):
        for j, pi_j in enumerate(pis):
            if i != j:
                hel2 = max(hel2, max_abs(pi_i @ (weighted[i] - weighted[j]) @ pi_j))
    return hel1, hel2


def no_measurement_optimal(ensemble: StateEnsemble, tol: Tolerances = DEFAULT_TOL) -> int | None:
    """Index i for which guessing state i without measuring is optimal, else None.

    Requires p_i ρ_i - p_j ρ_j ≥ 0 for every j; the smallest qualifying index wins.
    """
    for i in range(len(ensemble)):
        wi = ensemble.weighted(i)
        if all(min_eigenvalue(wi - ensemble.weighted(j)) >= -tol.positivity for j in range(len(ensemble)) if j != i):
            return i
    return None


def guess_pom(ensemble: StateEnsemble, i: int | None = None) -> Pom:
    """Identity on outcome ``i`` (default: the likeliest state), zero elsewhere."""
    if i is None:
        i = int(np.argmax(ensemble.priors))
    zero = np.zeros((ensemble.dim, ensemble.dim))
    return Pom(tuple(np.eye(ensemble.dim) if k == i else zero for k in range(len(ensemble))))


@dataclass(frozen=True)
class OptimizerConfig:
    max_iter: int = 20000
    # below ~1e-9 the success probability no longer resolves POM changes in double precision
    threshold: float = 1e-8
    patience: int = 50
    start: str = "srm"
    seed: int | None = None


def _hermitian_part(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + dagger(a))


def _normalize_pom(ops: list[np.ndarray], tol: Tolerances) -> list[np.ndarray]:
    ops = [_hermitian_part(y) for y in ops]
    s = support_inverse_sqrt(sum(ops), tol)
    return [_hermitian_part(s @ y @ s) for y in ops]


def _random_pom(ensemble: StateEnsemble, rng: np.random.Generator, tol: Tolerances) -> list[np.ndarray]:
    d = ensemble.dim
    ops = []
    for _ in range(len(ensemble)):
        a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        ops.append(a @ dagger(a))
    return _normalize_pom(ops, tol)


def optimize_min_error(
    ensemble: StateEnsemble,
    config: OptimizerConfig = OptimizerConfig(),
    tol: Tolerances = DEFAULT_TOL,
) -> MinErrorResult:
    """Iterative search for the minimum-error POM.

    Each step maps π_j -> S^(-1/2) X_j π_j X_j† S^(-1/2) with X_j = 1 + t p_j ρ_j and
    S the sum of the numerators, so completeness is restored exactly. The step
    size t grows after an improving step and shrinks otherwise; steps that
    would lower the success probability are rejected, which keeps the
    sequence monotone. The result is the best of the iterate, the
    square-root measurement and the best no-measurement guess.
    """
    n, d = len(ensemble), ensemble.dim
    weighted = [ensemble.weighted(i) for i in range(n)]
    eye = np.eye(d)

    def p_correct(ops):
        return float(sum(np.trace(w @ pi).real for w, pi in zip(weighted, ops)))

    if config.start == "srm":
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", IncompleteMeasurementWarning)
            ops = list(complete_on_kernel(square_root_measurement(ensemble, tol), ensemble, tol).elements)
    elif config.start == "random":
        ops = _random_pom(ensemble, np.random.default_rng(config.seed), tol)
    else:
        raise ValueError(f"unknown start {config.start!r}")

    norm = max(np.linalg.norm(w, 2) for w in weighted) or 1.0
    t = 1.0 / norm
    current = p_correct(ops)
    history = [current]
    converged = False
    it = 0
    flat = 0
    for it in range(1, config.max_iter + 1):
        pom = Pom(tuple(ops))
        hel1, hel2 = check_optimality(ensemble, pom, tol)
        if max(hel1, hel2) < config.threshold:
            converged = True
            break
        while True:
            xs = [eye + t * w for w in weighted]
            candidate = _normalize_pom([x @ pi @ dagger(x) for x, pi in zip(xs, ops)], tol)
            value = p_correct(candidate)
            if value >= current:
                flat = flat + 1 if value == current else 0
                ops, current = candidate, value
                t = min(t * 2.0, 1e12 / norm)
                break
            t *= 0.5
            if t * norm < 1e-14:
                break
        history.append(current)
        if t * norm < 1e-14 or flat >= config.patience:
            break

    candidates = [Pom(tuple(ops))]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IncompleteMeasurementWarning)
        candidates.append(complete_on_kernel(square_root_measurement(ensemble, tol), ensemble, tol))
    candidates.append(guess_pom(ensemble))
    best = max(candidates, key=lambda c: success_probability(ensemble, c, tol))
    result = _result(ensemble, best, tol, iterations=it, history=tuple(history))
    converged = converged or max(result.residual_hel1, result.residual_hel2) < config.threshold
    if not validate_pom(best, tol).passed:
        raise ArithmeticError("optimizer produced an invalid POM")
    return MinErrorResult(
        result.pom, result.p_error, result.p_correct, result.residual_hel1, result.residual_hel2,
        converged=converged, iterations=it, history=tuple(history),
    )
