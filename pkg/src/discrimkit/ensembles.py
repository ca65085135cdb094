"""Built-in ensembles and the JSON ensemble format."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import (
    DimensionMismatch,
    DiscriminationError,
    StateEnsemble,
    dagger,
    max_abs,
    normalize,
    projector,
)

OMEGA = np.exp(2j * np.pi / 3)


class EnsembleFormatError(DiscriminationError):
    """Malformed ensemble JSON; the message names the offending field."""


def two_pure_kets(theta: float) -> tuple[np.ndarray, np.ndarray]:
    """cosθ|0> ± sinθ|1>, the canonical pair with overlap cos 2θ."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([c, s], dtype=complex), np.array([c, -s], dtype=complex)


def two_pure(theta: float, p0: float = 0.5) -> StateEnsemble:
    if not 0.0 <= p0 <= 1.0:
        raise DiscriminationError(f"p0 must lie in [0, 1], got {p0}")
    return StateEnsemble.from_kets(two_pure_kets(theta), [p0, 1.0 - p0])


def trine(latitude: float | None = None) -> StateEnsemble:
    """Equiprobable trine.

    Without ``latitude`` these are the real states |0>, -1/2|0> ± √3/2|1>.
    With it, the states cosθ|0> + ω^k sinθ|1> share one latitude of the Bloch
    sphere and become equatorial at θ = π/4.
    """
    if latitude is None:
        kets = [
            [1.0, 0.0],
            [-0.5, np.sqrt(3) / 2],
            [-0.5, -np.sqrt(3) / 2],
        ]
    else:
        c, s = np.cos(latitude), np.sin(latitude)
        kets = [[c, s], [c, OMEGA * s], [c, OMEGA.conjugate() * s]]
    return StateEnsemble.from_kets(kets)


def tetrad() -> StateEnsemble:
    """Four equiprobable qubit states forming a regular tetrahedron."""
    r = 1 / np.sqrt(3)
    kets = [
        [-r, r * np.sqrt(2) * OMEGA.conjugate()],
        [-r, r * np.sqrt(2) * OMEGA],
        [-r, r * np.sqrt(2)],
        [1.0, 0.0],
    ]
    return StateEnsemble.from_kets(kets)


def coherent_pair(alpha: complex, p0: float = 0.5) -> StateEnsemble:
    """Qubit pair with the same Gram matrix as the coherent states |α>, |-α>.

    Their overlap exp(-2|α|²) is real and positive, so the pair is
    cosθ|0> ± sinθ|1> with cos 2θ equal to that overlap.
    """
    overlap = np.exp(-2 * abs(alpha) ** 2)
    return two_pure(0.5 * np.arccos(overlap), p0)


@dataclass(frozen=True)
class SymmetricEnsembleSpec:
    """States V^i|ψ_0>, i = 0..N-1, for a unitary V with V^N = 1."""

    generator: np.ndarray
    seed_state: np.ndarray
    count: int

    def __post_init__(self):
        v = np.array(self.generator, dtype=complex)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise DimensionMismatch("generator must be square")
        psi = normalize(self.seed_state)
        if psi.size != v.shape[0]:
            raise DimensionMismatch("seed state dimension does not match generator")
        if self.count < 1:
            raise DiscriminationError("count must be at least 1")
        eye = np.eye(v.shape[0])
        if max_abs(dagger(v) @ v - eye) > 1e-8:
            raise DiscriminationError("generator is not unitary")
        if max_abs(np.linalg.matrix_power(v, self.count) - eye) > 1e-8:
            raise DiscriminationError(f"generator does not satisfy V^{self.count} = 1")
        object.__setattr__(self, "generator", v)
        object.__setattr__(self, "seed_state", psi)

    def ensemble(self) -> StateEnsemble:
        kets, psi = [], self.seed_state
        for _ in range(self.count):
            kets.append(psi)
            psi = self.generator @ psi
        return StateEnsemble.from_kets(kets)


def random_symmetric_spec(dim: int, count: int, rng: np.random.Generator) -> SymmetricEnsembleSpec:
    """Random V = U diag(ω^k) U† with ω = exp(2πi/N), and a random seed state."""
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    u = q * (np.diag(r) / np.abs(np.diag(r)))
    phases = np.exp(2j * np.pi * rng.integers(0, count, size=dim) / count)
    v = (u * phases) @ dagger(u)
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return SymmetricEnsembleSpec(v, psi / np.linalg.norm(psi), count)


def _complex(entry, where: str) -> complex:
    if isinstance(entry, (int, float)) and not isinstance(entry, bool):
        return complex(entry)
    if (
        isinstance(entry, (list, tuple))
        and len(entry) == 2
        and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in entry)
    ):
        return complex(entry[0], entry[1])
    raise EnsembleFormatError(f"{where}: expected a number or [re, im] pair, got {entry!r}")


def ensemble_from_dict(data: dict) -> StateEnsemble:
    """Build an ensemble from the JSON schema ``{"dim", "states", "priors"}``.

    Each state is ``{"vector": [[re, im], ...]}`` or ``{"matrix": [[[re, im], ...], ...]}``.
    Vectors are normalised when within 1e-6 of unit norm and rejected otherwise.
    """
    if not isinstance(data, dict):
        raise EnsembleFormatError("top level: expected an object")
    for key in ("dim", "states", "priors"):
        if key not in data:
            raise EnsembleFormatError(f"missing field {key!r}")
    dim = data["dim"]
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise EnsembleFormatError(f"dim: expected a positive integer, got {dim!r}")
    states, kets = [], []
    if not isinstance(data["states"], list) or not data["states"]:
        raise EnsembleFormatError("states: expected a non-empty list")
    for i, entry in enumerate(data["states"]):
        where = f"states[{i}]"
        if isinstance(entry, dict) and "vector" in entry:
            vec = entry["vector"]
            if not isinstance(vec, list) or len(vec) != dim:
                raise EnsembleFormatError(f"{where}.vector: expected {dim} entries")
            v = np.array([_complex(z, f"{where}.vector[{j}]") for j, z in enumerate(vec)])
            try:
                k = normalize(v, tol=1e-6)
            except DiscriminationError as exc:
                raise EnsembleFormatError(f"{where}.vector: {exc}") from None
            kets.append(k)
            states.append(projector(k))
        elif isinstance(entry, dict) and "matrix" in entry:
            rows = entry["matrix"]
            if not isinstance(rows, list) or len(rows) != dim or any(
                not isinstance(r, list) or len(r) != dim for r in rows
            ):
                raise EnsembleFormatError(f"{where}.matrix: expected a {dim}x{dim} array")
            m = np.array(
                [[_complex(z, f"{where}.matrix[{a}][{b}]") for b, z in enumerate(r)] for a, r in enumerate(rows)]
            )
            kets.append(None)
            states.append(m)
        else:
            raise EnsembleFormatError(f"{where}: expected an object with 'vector' or 'matrix'")
    priors = data["priors"]
    if not isinstance(priors, list) or not all(
        isinstance(p, (int, float)) and not isinstance(p, bool) for p in priors
    ):
        raise EnsembleFormatError("priors: expected a list of numbers")
    try:
        if all(k is not None for k in kets):
            return StateEnsemble.from_kets(kets, priors)
        return StateEnsemble(tuple(states), priors)
    except DiscriminationError as exc:
        raise EnsembleFormatError(str(exc)) from None


def load_ensemble(path) -> StateEnsemble:
    """Read an ensemble JSON file. ``json.JSONDecodeError`` propagates with line/column info."""
    text = Path(path).read_text()
    return ensemble_from_dict(json.loads(text))


def save_ensemble(ensemble: StateEnsemble, path) -> None:
    Path(path).write_text(json.dumps(ensemble.to_dict(), indent=2))


BUILTINS = ("two-pure", "trine", "tetrad", "coherent")


def builtin(name: str, theta: float | None = None, p0: float = 0.5, alpha: complex = 1.0) -> StateEnsemble:
    """Look up a built-in ensemble by name; ``theta`` in radians."""
    if name == "two-pure":
        return two_pure(np.pi / 12 if theta is None else theta, p0)
    if name == "trine":
        return trine(theta)
    if name == "tetrad":
        return tetrad()
    if name == "coherent":
        return coherent_pair(alpha, p0)
    raise DiscriminationError(f"unknown built-in ensemble {name!r}")


__all__ = [
    "EnsembleFormatError",
    "SymmetricEnsembleSpec",
    "builtin",
    "coherent_pair",
    "ensemble_from_dict",
    "load_ensemble",
    "random_symmetric_spec",
    "save_ensemble",
    "tetrad",
    "trine",
    "two_pure",
    "two_pure_kets",
]
