"""Monte Carlo sampling of prepare-and-measure runs, and path (dilation) encodings.

Random stream: trials are grouped in fixed blocks of :data:`BLOCK` trials.
Block ``b`` draws from ``PCG64(SeedSequence(seed, spawn_key=(b,)))``, two
uniforms per trial in trial order (the first picks the state from the priors,
the second the outcome from the Born probabilities). A trial's randomness
therefore depends only on ``(seed, trial index)``, so raising ``n_trials``
never reshuffles earlier trials and any split of blocks across workers
reproduces the single-threaded counts.
"""
from __future__ import annotations

import io
from concurrent.futures import ThreadPoolExecutor
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
    max_abs,
    validate_pom,
)
from .mutualinfo import mutual_information_from_joint

BLOCK = 1024


@dataclass(frozen=True, eq=False)
class OutcomeCounts:
    """Counts of (prepared state, POM element) pairs; columns follow the POM elements."""

    matrix: np.ndarray
    n_trials: int
    seed: int
    labels: tuple

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write(f"# seed={self.seed} n_trials={self.n_trials}\n")
        out.write("state,outcome,count\n")
        for i, row in enumerate(self.matrix):
            for label, count in zip(self.labels, row):
                out.write(f"{i},{label},{int(count)}\n")
        return out.getvalue()

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "n_trials": self.n_trials,
            "labels": list(self.labels),
            "counts": self.matrix.tolist(),
        }


def _conditional_table(ensemble: StateEnsemble, pom: Pom) -> np.ndarray:
    """P(outcome j | state i), rows renormalised against rounding."""
    table = np.clip(np.einsum("iab,kba->ik", np.array(ensemble.states), np.array(pom.elements)).real, 0.0, None)
    return table / table.sum(axis=1, keepdims=True)


def _block_counts(block: int, size: int, seed: int, cum_priors, cum_table) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))
    u = rng.random((size, 2))
    n_states, n_outcomes = cum_table.shape
    states = np.minimum(np.searchsorted(cum_priors, u[:, 0], side="right"), n_states - 1)
    outcomes = np.minimum((cum_table[states] <= u[:, 1:]).sum(axis=1), n_outcomes - 1)
    return np.bincount(states * n_outcomes + outcomes, minlength=n_states * n_outcomes).reshape(n_states, n_outcomes)


def sample_outcomes(
    ensemble: StateEnsemble,
    pom: Pom,
    n_trials: int,
    seed: int = 0,
    workers: int = 1,
    tol: Tolerances = DEFAULT_TOL,
) -> OutcomeCounts:
    """Sample ``n_trials`` preparations and measurements; deterministic in ``seed``."""
    if n_trials < 1:
        raise DiscriminationError("n_trials must be at least 1")
    if pom.dim != ensemble.dim:
        raise DiscriminationError("POM and ensemble dimensions differ")
    report = validate_pom(pom, tol)
    if not report.passed:
        raise DiscriminationError("POM fails validation; refusing to sample")
    cum_priors = np.cumsum(ensemble.priors)
    cum_table = np.cumsum(_conditional_table(ensemble, pom), axis=1)
    blocks = [(b, min(BLOCK, n_trials - b * BLOCK)) for b in range(-(-n_trials // BLOCK))]

    def run(job):
        return _block_counts(job[0], job[1], seed, cum_priors, cum_table)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, blocks))
    else:
        parts = [run(job) for job in blocks]
    return OutcomeCounts(np.sum(parts, axis=0), n_trials, seed, pom.labels)


@dataclass(frozen=True)
class EmpiricalFigures:
    p_error: float
    p_inconclusive: float
    confidence: dict
    mutual_information: float

    def to_dict(self) -> dict:
        return {
            "p_error": self.p_error,
            "p_inconclusive": self.p_inconclusive,
            "confidence": {str(k): v for k, v in self.confidence.items()},
            "mutual_information": self.mutual_information,
        }


def empirical_figures(counts: OutcomeCounts, ensemble: StateEnsemble) -> EmpiricalFigures:
    """Plug-in estimates from counts.

    Confidence for an outcome that never fired is reported as ``None``.
    """
    m = np.asarray(counts.matrix, dtype=float)
    if m.shape[0] != len(ensemble):
        raise DiscriminationError("counts do not match the ensemble size")
    n = m.sum()
    if n < 1:
        raise DiscriminationError("no trials recorded")
    errors = inconclusive = 0.0
    fired: dict = {}
    for j, label in enumerate(counts.labels):
        column = m[:, j]
        if label == INCONCLUSIVE:
            inconclusive += column.sum()
            continue
        errors += column.sum() - (column[label] if 0 <= label < len(column) else 0.0)
        hits, total = fired.get(label, (0.0, 0.0))
        fired[label] = (hits + (column[label] if 0 <= label < len(column) else 0.0), total + column.sum())
    confidence = {
        label: (float(hits / total) if total > 0 else None)
        for label, (hits, total) in sorted(fired.items())
    }
    return EmpiricalFigures(
        float(errors / n),
        float(inconclusive / n),
        confidence,
        mutual_information_from_joint(m / n),
    )


@dataclass(frozen=True, eq=False)
class PathEncoding:
    """Isometry from the input space onto one path per rank-one POM element."""

    isometry: np.ndarray
    outcome_map: tuple

    def path_probabilities(self, state) -> np.ndarray:
        """|<path_j|V ψ>|² for a ket, or diag(V ρ V†) for a density matrix."""
        a = np.asarray(state, dtype=complex)
        if a.ndim == 1:
            return np.abs(self.isometry @ a) ** 2
        return np.diag(self.isometry @ a @ dagger(self.isometry)).real


def split_rank_one(pom: Pom, tol: Tolerances = DEFAULT_TOL) -> Pom:
    """Split every element into rank-one parts from its eigendecomposition, keeping labels."""
    elements, labels = [], []
    for label, e in zip(pom.labels, pom.elements):
        values, vectors = np.linalg.eigh(0.5 * (e + dagger(e)))
        cutoff = tol.rank * max(values[-1], 1.0)
        kept = [(v, vectors[:, k]) for k, v in enumerate(values) if v > cutoff]
        for v, vec in kept:
            elements.append(v * np.outer(vec, vec.conj()))
            labels.append(label)
        if not kept:
            elements.append(np.zeros_like(e))
            labels.append(label)
    return Pom(tuple(elements), tuple(labels))


def _phase_fixed(w: np.ndarray) -> np.ndarray:
    nonzero = np.flatnonzero(np.abs(w) > 1e-12)
    if nonzero.size == 0:
        return w
    first = w[nonzero[0]]
    return w * (abs(first) / first)


def naimark_path_encoding(pom: Pom, tol: Tolerances = DEFAULT_TOL) -> PathEncoding:
    """Row j of the isometry is w_j† where π_j = |w_j><w_j|.

    The first nonzero component of each w_j is made real and positive so the
    encoding is deterministic.
    """
    report = validate_pom(pom, tol)
    if not report.passed:
        raise DiscriminationError("POM fails validation")
    rows = []
    for label, e in zip(pom.labels, pom.elements):
        values, vectors = np.linalg.eigh(0.5 * (e + dagger(e)))
        cutoff = tol.rank * max(values[-1], 1.0)
        if np.sum(values > cutoff) > 1:
            raise DiscriminationError(f"element {label!r} has rank > 1; split it with split_rank_one first")
        w = np.sqrt(max(values[-1], 0.0)) * vectors[:, -1]
        rows.append(_phase_fixed(w).conj())
    v = np.array(rows)
    residual = max_abs(dagger(v) @ v - np.eye(pom.dim))
    if residual > tol.completeness:
        raise DiscriminationError(f"isometry columns not orthonormal (residual {residual:.3e})")
    return PathEncoding(v, tuple(pom.labels))
