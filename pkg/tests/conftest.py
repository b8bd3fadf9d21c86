import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


def random_density(rng, n, rank=None):
    rank = rank or n
    A = rng.normal(size=(n, rank)) + 1j * rng.normal(size=(n, rank))
    rho = A @ A.conj().T
    return rho / np.trace(rho).real


def random_hermitian(rng, n):
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return 0.5 * (A + A.conj().T)


def random_unitary(rng, n):
    Q, R = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def random_x_params(rng):
    a, b, c, d = rng.dirichlet(np.ones(4))
    delta = np.sqrt(a * d) * rng.uniform() * np.exp(2j * np.pi * rng.uniform())
    beta = np.sqrt(b * c) * rng.uniform() * np.exp(2j * np.pi * rng.uniform())
    return a, b, c, d, delta, beta


BELL_PHI_PLUS = np.outer([1, 0, 0, 1], [1, 0, 0, 1]).astype(complex) / 2


_ACCEPTANCE = []


@pytest.fixture
def criterion(request):
    """Record one acceptance criterion: call with (ok, detail) and assert on ok."""
    import time

    start = time.perf_counter()

    def record(ok, detail, budget=None):
        elapsed = time.perf_counter() - start
        ok = bool(ok) and (budget is None or elapsed < budget)
        timing = f"{elapsed:.2f}s" + (f" / {budget:g}s" if budget else "")
        line = f"{'PASS' if ok else 'FAIL'} {request.node.name}: {detail} [{timing}]"
        _ACCEPTANCE.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
