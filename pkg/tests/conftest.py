import numpy as np
import pytest

from discrimkit.core import StateEnsemble


def random_ket(rng, dim):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_density(rng, dim, rank=None):
    rank = dim if rank is None else rank
    a = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def random_unitary(rng, dim):
    q, r = np.linalg.qr(rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_pure_ensemble(rng, dim, count):
    kets = [random_ket(rng, dim) for _ in range(count)]
    return StateEnsemble.from_kets(kets, rng.dirichlet(np.ones(count)))


def random_pom_elements(rng, dim, count, rank=None):
    """Random complete POM: S^(-1/2) A_k A_k† S^(-1/2)."""
    rank = dim if rank is None else rank
    ops = []
    for _ in range(count):
        a = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
        ops.append(a @ a.conj().T)
    values, vectors = np.linalg.eigh(sum(ops))
    r = vectors @ np.diag(values ** -0.5) @ vectors.conj().T
    return [r @ o @ r for o in ops]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# "PASS/FAIL criterion N: ..." lines collected by test_acceptance and repeated in the summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
