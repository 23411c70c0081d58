"""Shared brute-force oracles.

The dense builders here enumerate basis states directly and share no code
with either the statevector kernel or the Kronecker-product oracle module.
"""

import numpy as np
import pytest
import scipy.linalg

from deltavqe.ansatz import HvaAnsatz
from deltavqe.pauli import ModelId, build_model
from deltavqe.vqe import evaluate_energy

SINGLE = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def brute_pauli(P, n, with_coefficient=True):
    """Dense matrix of a Pauli string by enumerating matrix elements."""
    dim = 1 << n
    axes = dict(P.factors)
    M = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        for row in range(dim):
            amp = 1.0 + 0j
            for site in range(n):
                r, c = (row >> site) & 1, (col >> site) & 1
                op = SINGLE.get(axes.get(site))
                amp *= (1.0 if r == c else 0.0) if op is None else op[r, c]
                if amp == 0:
                    break
            M[row, col] = amp
    return P.coefficient * M if with_coefficient else M


def brute_sum(terms, n):
    dim = 1 << n
    out = np.zeros((dim, dim), dtype=complex)
    for t in terms:
        out += brute_pauli(t, n)
    return out


def single_site_gate(U, site, n):
    """Dense embedding of a 2x2 gate acting on ``site``."""
    dim = 1 << n
    M = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        for row in range(dim):
            if (row ^ col) & ~(1 << site):
                continue
            M[row, col] = U[(row >> site) & 1, (col >> site) & 1]
    return M


def expm_i(theta, M):
    return scipy.linalg.expm(1j * theta * M)


def random_state(n, rng):
    v = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
    return v / np.linalg.norm(v)


def tfim_free_fermion_energy(n, h):
    """Ground energy of the periodic TFIM for even ``n`` from the Jordan-Wigner
    solution (even-parity sector, antiperiodic momenta)."""
    ks = 2 * np.pi * (np.arange(n) + 0.5) / n
    return -np.sum(np.sqrt(1 + h * h - 2 * h * np.cos(ks)))


SUPPORTED_REFERENCES = {
    ModelId.TFIM: ("zero", "plus-x", "ghz-z"),
    ModelId.XZ: ("zero", "plus-x", "ghz-z"),
    ModelId.CLUSTER_ISING: ("cluster", "plus-y", "ghz-y"),
}


def central_difference(ansatz, theta, h, step=1e-5):
    theta = np.asarray(theta, dtype=float).ravel()
    out = np.zeros_like(theta)
    for k in range(theta.size):
        e = np.zeros_like(theta)
        e[k] = step
        out[k] = (evaluate_energy(ansatz, theta + e, h)
                  - evaluate_energy(ansatz, theta - e, h)) / (2 * step)
    return out.reshape(ansatz.shape)


def random_configs(count, seed=7):
    """Random (ansatz, theta, h) with N in 3..6 and p in 1..3 over every model."""
    rng = np.random.default_rng(seed)
    models = list(ModelId)
    for _ in range(count):
        model = models[rng.integers(len(models))]
        n = int(rng.integers(3, 7))
        ref = SUPPORTED_REFERENCES[model][rng.integers(3)]
        p = int(rng.integers(1, 4))
        h = float(rng.uniform(0, 2))
        a = HvaAnsatz.for_model(build_model(model, n), ref, p)
        yield a, rng.uniform(-np.pi, np.pi, size=a.shape), h


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_KEY = pytest.StashKey[dict]()


@pytest.fixture
def acceptance(request):
    """Record ``(criterion, passed, detail)``; lines are printed after the run."""
    results = request.config.stash.setdefault(ACCEPTANCE_KEY, {})

    def record(number, passed, detail):
        results[number] = (bool(passed), detail)
        print(f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}")
        return passed

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(ACCEPTANCE_KEY, None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        passed, detail = results[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}")
