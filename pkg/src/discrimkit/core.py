"""
Hermitian matrix machinery, state/measurement containers and POM validation.

All operators are dense complex numpy arrays. Pure states are kept as
vectors and promoted to rank-1 density operators where the strategy code
needs them, so every strategy has a single code path.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields, replace
from typing import Iterable, Sequence, Union

import numpy as np

INCONCLUSIVE = "?"

Label = Union[int, str]


class DiscriminationError(ValueError):
    """Base class for invalid inputs to the discrimination routines."""


class DimensionMismatch(DiscriminationError):
    pass


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances shared by all modules.

    ``positivity`` is the magnitude of the allowed negative eigenvalue floor and
    ``rank`` is an eigenvalue cutoff relative to the largest eigenvalue.
    """

    hermiticity: float = 1e-9
    positivity: float = 1e-9
    completeness: float = 1e-9
    rank: float = 1e-9

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not value > 0:
                raise ValueError(f"tolerance {f.name!r} must be strictly positive, got {value!r}")

    @classmethod
    def from_env(cls, var: str = "DISCRIMKIT_TOL") -> "Tolerances":
        """Read overrides from an environment variable.

        Accepts a JSON object (``{"completeness": 1e-15}``), ``key=value`` pairs
        separated by commas, or a bare number applied to every field.
        """
        raw = os.environ.get(var, "").strip()
        if not raw:
            return cls()
        return cls.parse(raw)

    @classmethod
    def parse(cls, raw: str) -> "Tolerances":
        names = {f.name for f in fields(cls)}
        try:
            value = float(raw)
        except ValueError:
            pass
        else:
            return cls(**{name: value for name in names})
        if raw.startswith("{"):
            overrides = json.loads(raw)
        else:
            overrides = {}
            for item in raw.split(","):
                key, _, val = item.partition("=")
                overrides[key.strip()] = val
        unknown = set(overrides) - names
        if unknown:
            raise ValueError(f"unknown tolerance fields: {sorted(unknown)}")
        return replace(cls(), **{k: float(v) for k, v in overrides.items()})


DEFAULT_TOL = Tolerances()


def max_abs(a: np.ndarray) -> float:
    """Max-absolute-entry norm used for every residual in the package."""
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def as_operator(matrix) -> np.ndarray:
    a = np.array(matrix, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise DimensionMismatch(f"expected a non-empty square matrix, got shape {a.shape}")
    return a


def hermitian(matrix, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Return ``matrix`` as a symmetrised Hermitian array, raising if it is not Hermitian."""
    a = as_operator(matrix)
    residual = max_abs(a - dagger(a))
    if residual > tol.hermiticity:
        raise DiscriminationError(f"operator is not Hermitian (residual {residual:.3e})")
    return 0.5 * (a + dagger(a))


def normalize(vector, tol: float = 1e-6) -> np.ndarray:
    """Normalise a state vector, rejecting vectors further than ``tol`` from unit norm."""
    v = np.array(vector, dtype=complex).reshape(-1)
    if v.size == 0:
        raise DimensionMismatch("empty state vector")
    norm = np.linalg.norm(v)
    if abs(norm - 1.0) > tol:
        raise DiscriminationError(f"state vector norm {norm:.9g} is not within {tol:g} of 1")
    return v / norm


def projector(vector) -> np.ndarray:
    v = np.asarray(vector, dtype=complex).reshape(-1)
    return np.outer(v, v.conj())


def density(matrix, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Validate a density operator: Hermitian, unit trace, no eigenvalue below ``-tol.positivity``."""
    rho = hermitian(matrix, tol)
    trace = np.trace(rho).real
    if abs(trace - 1.0) > tol.completeness:
        raise DiscriminationError(f"density operator trace {trace:.12g} differs from 1")
    lowest = np.linalg.eigvalsh(rho)[0]
    if lowest < -tol.positivity:
        raise DiscriminationError(f"density operator has negative eigenvalue {lowest:.3e}")
    return rho


def eigendecompose(op, tol: Tolerances = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues in descending order and the matching orthonormal eigenvectors (as columns).

    Repeated eigenvalues come back with an arbitrary orthonormal basis of the
    eigenspace.
    """
    a = hermitian(op, tol)
    values, vectors = np.linalg.eigh(a)
    return values[::-1].copy(), vectors[:, ::-1].copy()


def _support_mask(values: np.ndarray, tol: Tolerances) -> np.ndarray:
    scale = np.max(np.abs(values)) if values.size else 0.0
    if scale == 0.0:
        return np.zeros(values.shape, dtype=bool)
    return values > tol.rank * scale


def support_projector(rho, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    values, vectors = eigendecompose(rho, tol)
    v = vectors[:, _support_mask(values, tol)]
    return v @ dagger(v)


def kernel_projector(rho, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Projector onto the kernel of ``rho``: identity minus the support projector."""
    p = support_projector(rho, tol)
    return np.eye(p.shape[0]) - p


def support_inverse_sqrt(rho, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Pseudo-inverse square root: eigenvalues above the rank cutoff map to λ^(-1/2), the rest to 0."""
    values, vectors = eigendecompose(rho, tol)
    keep = _support_mask(values, tol)
    v = vectors[:, keep]
    return (v * values[keep] ** -0.5) @ dagger(v)


def operator_sqrt(op, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Square root of a positive semidefinite operator (tiny negative eigenvalues clipped)."""
    values, vectors = eigendecompose(op, tol)
    return (vectors * np.sqrt(np.clip(values, 0.0, None))) @ dagger(vectors)


def min_eigenvalue(op) -> float:
    a = np.asarray(op, dtype=complex)
    return float(np.linalg.eigvalsh(0.5 * (a + dagger(a)))[0])


def max_eigenvalue(op) -> float:
    a = np.asarray(op, dtype=complex)
    return float(np.linalg.eigvalsh(0.5 * (a + dagger(a)))[-1])


@dataclass(frozen=True, eq=False)
class Pom:
    """Ordered probability operators with outcome labels.

    Labels are state indices (ints) or :data:`INCONCLUSIVE`. Construction only
    checks shapes; use :func:`validate_pom` to check the measurement axioms.
    """

    elements: tuple
    labels: tuple = ()

    def __post_init__(self):
        elements = tuple(as_operator(e) for e in self.elements)
        if not elements:
            raise DiscriminationError("a POM needs at least one element")
        dims = {e.shape[0] for e in elements}
        if len(dims) != 1:
            raise DimensionMismatch(f"POM elements have mismatched dimensions {sorted(dims)}")
        labels = tuple(self.labels) if self.labels else tuple(range(len(elements)))
        if len(labels) != len(elements):
            raise DiscriminationError("POM needs exactly one label per element")
        for e in elements:
            e.setflags(write=False)
        object.__setattr__(self, "elements", elements)
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    def __len__(self) -> int:
        return len(self.elements)

    def element(self, label: Label) -> np.ndarray:
        """Sum of the elements carrying ``label`` (zero operator if none do)."""
        total = np.zeros((self.dim, self.dim), dtype=complex)
        for lab, e in zip(self.labels, self.elements):
            if lab == label:
                total = total + e
        return total

    def total(self) -> np.ndarray:
        return np.sum(self.elements, axis=0)

    def relabel(self, labels: Sequence[Label]) -> "Pom":
        return Pom(self.elements, tuple(labels))

    def conjugate(self, unitary: np.ndarray) -> "Pom":
        """Apply ``π -> U π U†`` to every element."""
        u = np.asarray(unitary, dtype=complex)
        return Pom(tuple(u @ e @ dagger(u) for e in self.elements), self.labels)

    def to_dict(self) -> dict:
        return {
            "labels": [lab for lab in self.labels],
            "elements": [matrix_to_json(e) for e in self.elements],
        }


@dataclass(frozen=True)
class ValidationReport:
    passed: bool
    hermiticity: float
    min_eigenvalues: tuple
    completeness: float

    @property
    def positivity(self) -> float:
        return min(self.min_eigenvalues)


def validate_pom(pom: Pom, tol: Tolerances = DEFAULT_TOL) -> ValidationReport:
    """Check the three POM axioms: Hermitian, positive, complete."""
    herm = max(max_abs(e - dagger(e)) for e in pom.elements)
    mins = tuple(min_eigenvalue(e) for e in pom.elements)
    completeness = max_abs(pom.total() - np.eye(pom.dim))
    passed = (
        herm <= tol.hermiticity
        and min(mins) >= -tol.positivity
        and completeness <= tol.completeness
    )
    return ValidationReport(bool(passed), herm, mins, completeness)


def born_probability(state, element, tol: Tolerances = DEFAULT_TOL) -> float:
    """Tr(ρ π), checked to be real and clamped into [0, 1]."""
    rho = np.asarray(state, dtype=complex)
    pi = np.asarray(element, dtype=complex)
    if rho.shape != pi.shape:
        raise DimensionMismatch(f"state shape {rho.shape} does not match element shape {pi.shape}")
    value = np.trace(rho @ pi)
    if abs(value.imag) > tol.hermiticity:
        raise DiscriminationError(f"Born probability has imaginary part {value.imag:.3e}")
    p = value.real
    if p < -tol.positivity or p > 1.0 + tol.positivity:
        raise DiscriminationError(f"Born probability {p:.3e} lies outside [0, 1]")
    return float(min(max(p, 0.0), 1.0))


@dataclass(frozen=True, eq=False)
class StateEnsemble:
    """Density operators with prior probabilities.

    ``kets`` holds the state vectors when every member was given as a pure state.
    """

    states: tuple
    priors: np.ndarray
    kets: tuple | None = field(default=None)

    def __post_init__(self):
        states = tuple(density(s) for s in self.states)
        if not states:
            raise DiscriminationError("an ensemble needs at least one state")
        if len({s.shape[0] for s in states}) != 1:
            raise DimensionMismatch("ensemble states have mismatched dimensions")
        priors = np.array(self.priors, dtype=float).reshape(-1)
        if priors.size != len(states):
            raise DiscriminationError(f"{len(states)} states but {priors.size} priors")
        if np.any(priors < 0) or np.any(priors > 1):
            raise DiscriminationError("priors must lie in [0, 1]")
        if abs(priors.sum() - 1.0) > DEFAULT_TOL.completeness:
            raise DiscriminationError(f"priors sum to {priors.sum():.12g}, not 1")
        for s in states:
            s.setflags(write=False)
        priors.setflags(write=False)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "priors", priors)
        if self.kets is not None:
            kets = tuple(np.asarray(k, dtype=complex) for k in self.kets)
            object.__setattr__(self, "kets", kets)

    @classmethod
    def from_kets(cls, kets: Iterable, priors=None) -> "StateEnsemble":
        kets = [normalize(k) for k in kets]
        if priors is None:
            priors = np.full(len(kets), 1.0 / len(kets))
        return cls(tuple(projector(k) for k in kets), priors, kets=tuple(kets))

    @property
    def dim(self) -> int:
        return self.states[0].shape[0]

    def __len__(self) -> int:
        return len(self.states)

    @property
    def is_pure(self) -> bool:
        return self.kets is not None

    def average(self) -> np.ndarray:
        """The a priori density operator Σ p_i ρ_i."""
        return np.einsum("i,ijk->jk", self.priors, np.array(self.states))

    def weighted(self, i: int) -> np.ndarray:
        return self.priors[i] * self.states[i]

    def conjugate(self, unitary: np.ndarray) -> "StateEnsemble":
        u = np.asarray(unitary, dtype=complex)
        if self.kets is not None:
            return StateEnsemble.from_kets([u @ k for k in self.kets], self.priors)
        return StateEnsemble(tuple(u @ s @ dagger(u) for s in self.states), self.priors)

    def to_dict(self) -> dict:
        if self.kets is not None:
            entries = [{"vector": [[z.real, z.imag] for z in k]} for k in self.kets]
        else:
            entries = [{"matrix": matrix_to_json(s)} for s in self.states]
        return {"dim": self.dim, "states": entries, "priors": [float(p) for p in self.priors]}


def joint_probabilities(ensemble: StateEnsemble, pom: Pom, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Matrix of P(state i, outcome j) = p_i Tr(ρ_i π_j)."""
    if pom.dim != ensemble.dim:
        raise DimensionMismatch(f"POM dimension {pom.dim} does not match ensemble dimension {ensemble.dim}")
    return np.array(
        [[p * born_probability(rho, e, tol) for e in pom.elements] for p, rho in zip(ensemble.priors, ensemble.states)]
    )


def matrix_to_json(a: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(a)]
