"""Mutual information between preparation and measurement outcome, in bits."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .core import (
    DEFAULT_TOL,
    DimensionMismatch,
    DiscriminationError,
    Pom,
    StateEnsemble,
    Tolerances,
    joint_probabilities,
    max_abs,
    support_inverse_sqrt,
)
from .minerror import IncompleteMeasurementWarning, square_root_measurement

PAULI = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)


class UnsupportedEnsembleError(DiscriminationError):
    """The requested construction does not exist for this ensemble."""


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """P(state i, outcome j); rows sum to the priors."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2:
            raise DiscriminationError("joint distribution must be a matrix")
        if np.any(m < -DEFAULT_TOL.positivity):
            raise DiscriminationError("joint distribution has negative entries")
        if abs(m.sum() - 1.0) > 1e-6:
            raise DiscriminationError(f"joint distribution sums to {m.sum():.12g}")
        m = np.clip(m, 0.0, None)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)


def _entropy(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


def mutual_information_from_joint(joint) -> float:
    """H(A) + H(B) - H(A,B) in bits, with 0 log 0 = 0."""
    m = joint.matrix if isinstance(joint, JointDistribution) else np.clip(np.asarray(joint, dtype=float), 0, None)
    value = _entropy(m.sum(axis=1)) + _entropy(m.sum(axis=0)) - _entropy(m.ravel())
    return max(value, 0.0)


def joint_distribution(ensemble: StateEnsemble, pom: Pom, tol: Tolerances = DEFAULT_TOL) -> JointDistribution:
    return JointDistribution(joint_probabilities(ensemble, pom, tol))


def mutual_information(ensemble: StateEnsemble, pom: Pom, tol: Tolerances = DEFAULT_TOL) -> float:
    return mutual_information_from_joint(joint_distribution(ensemble, pom, tol))


def _orthogonal_qubit(ket: np.ndarray) -> np.ndarray:
    a, b = ket
    return np.array([-np.conj(b), np.conj(a)])


def elimination_measurement(ensemble: StateEnsemble, tol: Tolerances = DEFAULT_TOL) -> Pom:
    """POM whose outcome j rules out state j.

    Built as the square-root measurement of the orthogonal-complement states;
    it exists for the trine and tetrad and is rejected when outcome j can
    still fire for state j.
    """
    if not ensemble.is_pure or ensemble.dim != 2:
        raise UnsupportedEnsembleError("elimination measurement needs pure qubit states")
    flipped = StateEnsemble.from_kets([_orthogonal_qubit(k) for k in ensemble.kets], ensemble.priors)
    pom = square_root_measurement(flipped, tol)
    leaks = max(abs(np.trace(rho @ pom.element(i))) for i, rho in enumerate(ensemble.states))
    if leaks > tol.completeness or max_abs(pom.total() - np.eye(2)) > tol.completeness:
        raise UnsupportedEnsembleError("ensemble admits no elimination measurement of this form")
    return pom


def bloch_vector(rho: np.ndarray) -> np.ndarray:
    return np.einsum("kab,ba->k", PAULI, rho).real


def _projective_pom(theta: float, phi: float) -> Pom:
    n = np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])
    ns = np.einsum("k,kab->ab", n, PAULI)
    eye = np.eye(2)
    return Pom(((eye + ns) / 2, (eye - ns) / 2))


def _projective_mi(priors: np.ndarray, bloch: np.ndarray, theta, phi) -> np.ndarray:
    """MI of the two-outcome measurement along n(θ, φ), vectorized over θ and φ."""
    theta, phi = np.broadcast_arrays(np.asarray(theta, dtype=float), np.asarray(phi, dtype=float))
    n = np.stack([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)], axis=-1)
    plus = np.clip((1 + n @ bloch.T) / 2, 0.0, 1.0)
    joint = np.stack([plus * priors, (1 - plus) * priors], axis=-1)

    def h(p):
        with np.errstate(divide="ignore", invalid="ignore"):
            return -np.sum(np.where(p > 0, p * np.log2(p), 0.0), axis=-1)

    prior_entropy = _entropy(priors)
    return prior_entropy + h(joint.sum(axis=-2)) - h(joint.reshape(*joint.shape[:-2], -1))


def best_projective_qubit(ensemble: StateEnsemble, resolution_deg: float = 1.0, rounds: int = 4) -> tuple[Pom, float]:
    """Best two-outcome projective qubit measurement.

    An exhaustive grid over the measurement axis (polar and azimuthal steps of
    ``resolution_deg``) is refined by alternating bounded scalar searches in
    each angle within one grid cell.
    """
    if ensemble.dim != 2:
        raise DimensionMismatch("projective qubit search needs dim = 2")
    priors = np.asarray(ensemble.priors)
    bloch = np.array([bloch_vector(s) for s in ensemble.states])
    step = np.radians(resolution_deg)
    thetas = np.arange(0.0, np.pi + step / 2, step)
    phis = np.arange(0.0, 2 * np.pi, step)
    grid = _projective_mi(priors, bloch, thetas[:, None], phis[None, :])
    a, b = np.unravel_index(np.argmax(grid), grid.shape)
    theta, phi = thetas[a], phis[b]
    best = float(grid[a, b])
    for _ in range(rounds):
        res = minimize_scalar(
            lambda t: -float(_projective_mi(priors, bloch, t, phi)),
            bounds=(theta - step, theta + step),
            method="bounded",
            options={"xatol": 1e-10},
        )
        if -res.fun > best:
            theta, best = float(res.x), float(-res.fun)
        res = minimize_scalar(
            lambda f: -float(_projective_mi(priors, bloch, theta, f)),
            bounds=(phi - step, phi + step),
            method="bounded",
            options={"xatol": 1e-10},
        )
        if -res.fun > best:
            phi, best = float(res.x), float(-res.fun)
    pom = _projective_pom(theta, phi)
    return pom, mutual_information(ensemble, pom)


@dataclass(frozen=True, eq=False)
class AccessibleInfoResult:
    pom: Pom
    bits: float
    converged: bool
    restarts: int

    def __iter__(self):
        yield self.pom
        yield self.bits


def _rank_one_pom(vectors: np.ndarray) -> list[np.ndarray]:
    """Elements S^(-1/2) w_k w_k† S^(-1/2) with S = Σ w_k w_k†.

    Any kernel of S is added to the last element so the set stays complete.
    """
    s = np.einsum("ka,kb->ab", vectors, vectors.conj())
    r = support_inverse_sqrt(s)
    ws = vectors @ r.T
    elements = [np.outer(w, w.conj()) for w in ws]
    elements[-1] = elements[-1] + np.eye(s.shape[0]) - sum(elements)
    return elements


def _pack(vectors: np.ndarray) -> np.ndarray:
    return np.concatenate([vectors.real.ravel(), vectors.imag.ravel()])


def _unpack(x: np.ndarray, shape) -> np.ndarray:
    half = x.size // 2
    return (x[:half] + 1j * x[half:]).reshape(shape)


def _pom_vectors(pom: Pom, n_outcomes: int, rng: np.random.Generator) -> np.ndarray | None:
    """Rank-one weight vectors reproducing ``pom``, padded with small random vectors."""
    vectors = []
    for e in pom.elements:
        values, vecs = np.linalg.eigh(e)
        if np.sum(values > 1e-12) > 1:
            return None
        vectors.append(np.sqrt(max(values[-1], 0.0)) * vecs[:, -1])
    if len(vectors) > n_outcomes:
        return None
    d = pom.dim
    while len(vectors) < n_outcomes:
        vectors.append(1e-3 * (rng.normal(size=d) + 1j * rng.normal(size=d)))
    return np.array(vectors)


def accessible_info_search(
    ensemble: StateEnsemble,
    n_outcomes: int,
    restarts: int = 8,
    seed: int = 0,
    max_iter: int = 500,
) -> AccessibleInfoResult:
    """Seeded multi-start local ascent of the mutual information over rank-one POMs.

    Starts include random vector sets, the square-root measurement when it is
    rank-one, and (for qubits) the best projective measurement, so the result
    never falls below those baselines. The best restart wins; ties keep the
    earliest, which makes the outcome deterministic for a fixed seed.
    """
    if n_outcomes < 1:
        raise DiscriminationError("n_outcomes must be at least 1")
    d = ensemble.dim
    shape = (n_outcomes, d)
    priors = np.asarray(ensemble.priors)
    states = np.array(ensemble.states)
    rng = np.random.default_rng(seed)

    def objective(x):
        elements = np.array(_rank_one_pom(_unpack(x, shape)))
        joint = np.clip(np.einsum("i,iab,kba->ik", priors, states, elements).real, 0.0, None)
        return -mutual_information_from_joint(joint)

    starts, baseline = [], None
    if ensemble.dim == 2 and n_outcomes >= 2:
        projective = best_projective_qubit(ensemble)[0]
        zero = np.zeros((2, 2), dtype=complex)
        baseline = Pom(projective.elements + (zero,) * (n_outcomes - 2))
        starts.append(_pom_vectors(projective, n_outcomes, rng))
    if ensemble.is_pure:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", IncompleteMeasurementWarning)
            starts.append(_pom_vectors(square_root_measurement(ensemble), n_outcomes, rng))
    starts = [s for s in starts if s is not None]
    while len(starts) < restarts:
        starts.append(rng.normal(size=shape) + 1j * rng.normal(size=shape))

    best_x, best_value, best_ok = None, np.inf, False
    for start in starts:
        x0 = _pack(start)
        value0 = objective(x0)
        res = minimize(objective, x0, method="L-BFGS-B", options={"maxiter": max_iter})
        x, value, ok = (res.x, res.fun, bool(res.success)) if res.fun <= value0 else (x0, value0, True)
        if value < best_value - 1e-15:
            best_x, best_value, best_ok = x, value, ok
    pom = Pom(tuple(_rank_one_pom(_unpack(best_x, shape))))
    bits = mutual_information(ensemble, pom)
    if baseline is not None and mutual_information(ensemble, baseline) > bits:
        pom, bits = baseline, mutual_information(ensemble, baseline)
    return AccessibleInfoResult(pom, bits, best_ok, len(starts))

