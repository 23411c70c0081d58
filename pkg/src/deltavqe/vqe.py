"""Variational energies, adjoint gradients and multi-start optimization."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .ansatz import HvaAnsatz, apply_ansatz
from .pauli import hamiltonian_at
from .statevec import apply_terms, evolve_group, expectation


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 8
    init_half_width: float = math.pi / 4
    max_iterations: int = 500
    grad_tolerance: float = 1e-6
    energy_tolerance: float = 1e-10
    seed: int = 0

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        for name in ("init_half_width", "grad_tolerance", "energy_tolerance"):
            val = getattr(self, name)
            if not (val > 0 and math.isfinite(val)):
                raise ValueError(f"{name} must be a positive finite number, got {val}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")

    def to_dict(self) -> dict:
        return {
            "restarts": self.restarts,
            "init_half_width": self.init_half_width,
            "max_iterations": self.max_iterations,
            "grad_tolerance": self.grad_tolerance,
            "energy_tolerance": self.energy_tolerance,
            "seed": self.seed,
        }


@dataclass
class VqeResult:
    best_energy: float
    best_theta: np.ndarray
    per_restart_energies: list[float] = field(default_factory=list)
    iterations_used: list[int] = field(default_factory=list)
    converged: list[bool] = field(default_factory=list)

    @property
    def best_restart(self) -> int:
        return int(np.argmin(self.per_restart_energies))


def evaluate_energy(ansatz: HvaAnsatz, theta, h: float) -> float:
    """``<psi(theta)| H(h) |psi(theta)>``."""
    state = apply_ansatz(ansatz, theta)
    return expectation(state, hamiltonian_at(ansatz.hamiltonian, h))


def hamiltonian_arrays(H, h: float):
    """Kernel arrays for ``H(h)`` with the field weights folded into the coefficients."""
    parts = [g.arrays for g in H.groups]
    coeffs = np.concatenate([p[3] * w for p, w in zip(parts, H.weights(h))])
    return tuple(np.concatenate([p[i] for p in parts]) for i in range(3)) + (coeffs,)


def energy_and_gradient(ansatz: HvaAnsatz, theta, h: float, *,
                        h_arrays=None) -> tuple[float, np.ndarray]:
    """Energy and exact parameter gradient by a reverse (adjoint) sweep.

    With ``U_k = exp(i theta_k G_k)`` and ``phi_k`` the state right after
    ``U_k``, ``dE/dtheta_k = 2 Re <lambda_k| i G_k |phi_k>`` where
    ``lambda_k`` is ``H|psi>`` pulled back through the later gates. Costs
    three group evolutions and one group action per parameter.
    """
    theta = ansatz.check_theta(theta)
    n = ansatz.hamiltonian.n_sites
    if h_arrays is None:
        h_arrays = hamiltonian_arrays(ansatz.hamiltonian, h)

    phi = apply_ansatz(ansatz, theta).amplitudes
    lam = apply_terms(h_arrays, phi, n)
    energy = float(np.vdot(phi, lam).real)

    grad = np.zeros(ansatz.shape)
    scratch = np.empty_like(phi)
    for i, k, g in reversed(ansatz.schedule()):
        apply_terms(g.arrays, phi, n, out=scratch)
        # 2 Re(i z) = -2 Im(z)
        grad[i, k] = -2.0 * np.vdot(lam, scratch).imag
        evolve_group(phi, g, -theta[i, k], n)
        evolve_group(lam, g, -theta[i, k], n)
    return energy, grad


def gradient(ansatz: HvaAnsatz, theta, h: float) -> np.ndarray:
    return energy_and_gradient(ansatz, theta, h)[1]


@dataclass
class _MinimizeResult:
    x: np.ndarray
    fun: float
    nit: int
    converged: bool


def minimize_bfgs(fun_grad, x0: np.ndarray, *, max_iterations: int = 500,
                  grad_tolerance: float = 1e-6, energy_tolerance: float = 1e-10,
                  c1: float = 1e-4, shrink: float = 0.5, max_backtracks: int = 40) -> _MinimizeResult:
    """Dense BFGS with an Armijo backtracking line search.

    Stops when the gradient infinity-norm drops below ``grad_tolerance`` or
    an accepted step lowers the objective by less than ``energy_tolerance``.
    """
    x = np.array(x0, dtype=float)
    f, g = fun_grad(x)
    if not math.isfinite(f):
        return _MinimizeResult(x, f, 0, False)
    n = x.size
    Hinv = np.eye(n)
    for it in range(1, max_iterations + 1):
        if np.max(np.abs(g)) < grad_tolerance:
            return _MinimizeResult(x, f, it - 1, True)
        d = -Hinv @ g
        slope = float(g @ d)
        if slope >= 0.0:
            # lost descent; fall back to steepest descent
            Hinv = np.eye(n)
            d = -g
            slope = float(g @ d)
        step = 1.0
        for _ in range(max_backtracks):
            x_new = x + step * d
            f_new, g_new = fun_grad(x_new)
            if math.isfinite(f_new) and f_new <= f + c1 * step * slope:
                break
            step *= shrink
        else:
            return _MinimizeResult(x, f, it, False)
        s = x_new - x
        y = g_new - g
        improvement = f - f_new
        x, f, g = x_new, f_new, g_new
        if improvement < energy_tolerance:
            return _MinimizeResult(x, f, it, True)
        sy = float(s @ y)
        if sy > 1e-12 * float(np.linalg.norm(s) * np.linalg.norm(y)):
            if it == 1:
                # scale the initial inverse Hessian guess
                Hinv = np.eye(n) * (sy / float(y @ y))
            rho = 1.0 / sy
            Hy = Hinv @ y
            Hinv = (Hinv - rho * (np.outer(s, Hy) + np.outer(Hy, s))
                    + (rho * rho * float(y @ Hy) + rho) * np.outer(s, s))
    converged = bool(np.max(np.abs(g)) < grad_tolerance)
    return _MinimizeResult(x, f, max_iterations, converged)


def restart_rng(seed: int, stream: tuple[int, ...], restart: int) -> np.random.Generator:
    """Independent generator for one restart; depends only on its key."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(*stream, restart)))


def initial_theta(ansatz: HvaAnsatz, config: OptimizerConfig, stream: tuple[int, ...],
                  restart: int) -> np.ndarray:
    rng = restart_rng(config.seed, stream, restart)
    w = config.init_half_width
    return rng.uniform(-w, w, size=ansatz.n_params)


def optimize(ansatz: HvaAnsatz, h: float, config: OptimizerConfig | None = None, *,
             stream: tuple[int, ...] = (), start: np.ndarray | None = None) -> VqeResult:
    """Multi-start local minimization of the variational energy at field ``h``.

    Restart ``r`` starts from a uniform draw keyed on ``(seed, *stream, r)``,
    so adding restarts never changes the earlier ones. ``start`` replaces
    the draw of restart 0 (used for warm starts).
    """
    config = config or OptimizerConfig()

    h_arrays = hamiltonian_arrays(ansatz.hamiltonian, h)

    def fun_grad(x):
        e, g = energy_and_gradient(ansatz, x, h, h_arrays=h_arrays)
        return e, g.ravel()

    energies, iters, conv, thetas = [], [], [], []
    for r in range(config.restarts):
        if r == 0 and start is not None:
            x0 = np.asarray(start, dtype=float).ravel().copy()
        else:
            x0 = initial_theta(ansatz, config, stream, r)
        res = minimize_bfgs(fun_grad, x0, max_iterations=config.max_iterations,
                            grad_tolerance=config.grad_tolerance,
                            energy_tolerance=config.energy_tolerance)
        energies.append(float(res.fun))
        iters.append(int(res.nit))
        conv.append(bool(res.converged))
        thetas.append(res.x.reshape(ansatz.shape))

    finite = [e for e in energies if math.isfinite(e)]
    if not finite:
        raise ArithmeticError("every restart produced a non-finite energy")
    # np.argmin picks the lowest restart index on ties
    best = int(np.argmin([e if math.isfinite(e) else np.inf for e in energies]))
    return VqeResult(energies[best], thetas[best], energies, iters, conv)
