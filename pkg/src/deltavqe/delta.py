"""Two-reference optimization, energy-difference sweeps and critical-point location."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .ansatz import DEFAULT_REFERENCES, HvaAnsatz, ReferenceId
from .oracle import ground_energy
from .pauli import ModelId, build_model
from .vqe import OptimizerConfig, optimize

log = logging.getLogger(__name__)

RefPair = tuple[ReferenceId, ReferenceId]


@dataclass(frozen=True)
class DeltaPoint:
    h: float
    e0: float
    e1: float
    e_exact: float | None = None
    theta0: np.ndarray | None = field(default=None, compare=False, repr=False)
    theta1: np.ndarray | None = field(default=None, compare=False, repr=False)

    @property
    def delta(self) -> float:
        return abs(self.e0 - self.e1)


@dataclass(frozen=True)
class SweepConfig:
    h_min: float = 0.2
    h_max: float = 2.0
    h_step: float = 0.05
    depth: int = 1
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    compute_exact: bool = False
    warm_start: bool = False

    def __post_init__(self):
        if not self.h_min <= self.h_max:
            raise ValueError(f"h_min ({self.h_min}) must not exceed h_max ({self.h_max})")
        if not self.h_step > 0:
            raise ValueError(f"h_step must be positive, got {self.h_step}")
        if self.depth < 1:
            raise ValueError("depth must be >= 1")

    def grid(self) -> np.ndarray:
        count = int(round((self.h_max - self.h_min) / self.h_step)) + 1
        # round away representation noise so grid values print cleanly
        return np.round(self.h_min + self.h_step * np.arange(count), 12)


@dataclass
class DeltaCurve:
    model: ModelId
    n_sites: int
    depth: int
    reference_pair: RefPair
    points: list[DeltaPoint]

    def __post_init__(self):
        hs = [p.h for p in self.points]
        if any(b <= a for a, b in zip(hs, hs[1:])):
            raise ValueError("curve points must have strictly increasing h")
        if not self.points:
            raise ValueError("a curve needs at least one point")

    @property
    def h(self) -> np.ndarray:
        return np.array([p.h for p in self.points])

    @property
    def deltas(self) -> np.ndarray:
        return np.array([p.delta for p in self.points])

    @property
    def located_minimum(self) -> float:
        # argmin returns the first (smallest-h) index on ties
        return float(self.points[int(np.argmin(self.deltas))].h)


def resolve_refs(model: ModelId | str, refs: Sequence | None) -> RefPair:
    model = ModelId.parse(model)
    if refs is None:
        return DEFAULT_REFERENCES[model]
    if len(refs) != 2:
        raise ValueError(f"need exactly two references, got {len(refs)}")
    return ReferenceId.parse(refs[0]), ReferenceId.parse(refs[1])


def delta_point(model: ModelId | str, n_sites: int, depth: int, h: float,
                refs: Sequence | None = None, opt: OptimizerConfig | None = None, *,
                stream: tuple[int, ...] = (), exact: bool = False,
                orders: tuple | None = None, starts: tuple | None = None) -> DeltaPoint:
    """Optimize the same-depth ansatz from both references and record both energies.

    Both optimizations draw the same initial parameters (keyed on ``stream``),
    so swapping the references swaps ``e0`` and ``e1`` exactly.
    """
    model = ModelId.parse(model)
    refs = resolve_refs(model, refs)
    opt = opt or OptimizerConfig()
    H = build_model(model, n_sites)
    orders = orders or (None, None)
    starts = starts or (None, None)
    energies, thetas = [], []
    for ref, order, start in zip(refs, orders, starts):
        ansatz = HvaAnsatz.for_model(H, ref, depth, order)
        res = optimize(ansatz, h, opt, stream=stream, start=start)
        energies.append(res.best_energy)
        thetas.append(res.best_theta)
    e_exact = ground_energy(H, h).energy if exact else None
    return DeltaPoint(float(h), energies[0], energies[1], e_exact, thetas[0], thetas[1])


def _point_task(args):
    model, n_sites, depth, h, refs, opt, stream, exact, orders = args
    return delta_point(model, n_sites, depth, h, refs, opt, stream=stream, exact=exact,
                       orders=orders)


def _run_tasks(tasks, threads: int):
    if threads <= 1 or len(tasks) <= 1:
        return [_point_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(_point_task, tasks))


def sweep(model: ModelId | str, n_sites: int, cfg: SweepConfig | None = None,
          refs: Sequence | None = None, *, threads: int = 1,
          orders: tuple | None = None) -> DeltaCurve:
    """Energy difference over the h grid; point ``k`` uses random stream ``(k,)``."""
    model = ModelId.parse(model)
    cfg = cfg or SweepConfig()
    refs = resolve_refs(model, refs)
    grid = cfg.grid()
    if cfg.warm_start:
        points, starts = [], None
        for k, h in enumerate(grid):
            pt = delta_point(model, n_sites, cfg.depth, h, refs, cfg.optimizer, stream=(k,),
                             exact=cfg.compute_exact, orders=orders, starts=starts)
            starts = (pt.theta0, pt.theta1)
            points.append(pt)
    else:
        tasks = [(model, n_sites, cfg.depth, float(h), refs, cfg.optimizer, (k,),
                  cfg.compute_exact, orders) for k, h in enumerate(grid)]
        points = _run_tasks(tasks, threads)
    for pt in points:
        log.debug("h=%.4f e0=%.10f e1=%.10f delta=%.3e", pt.h, pt.e0, pt.e1, pt.delta)
    return DeltaCurve(model, int(n_sites), cfg.depth, refs, points)


@dataclass
class DepthScan:
    model: ModelId
    n_sites: int
    reference_pair: RefPair
    h_values: list[float]
    p_values: list[int]
    cells: dict[tuple[int, float], DeltaPoint]

    def delta(self, p: int, h: float) -> float:
        return self.cells[(p, h)].delta

    def table(self) -> np.ndarray:
        """``delta[i_h, i_p]``."""
        return np.array([[self.delta(p, h) for p in self.p_values] for h in self.h_values])

    def rows(self):
        for p in self.p_values:
            for h in self.h_values:
                yield p, self.cells[(p, h)]


def depth_scan(model: ModelId | str, n_sites: int, h_values: Sequence[float],
               p_values: Sequence[int], refs: Sequence | None = None,
               opt: OptimizerConfig | None = None, *, threads: int = 1,
               exact: bool = False) -> DepthScan:
    """Energy difference for every ``(h, p)`` pair; cell ``(i_h, i_p)`` uses stream ``(i_h, p)``."""
    model = ModelId.parse(model)
    h_values = [float(h) for h in h_values]
    p_values = [int(p) for p in p_values]
    if not h_values or not p_values:
        raise ValueError("depth scan needs non-empty h and p lists")
    refs = resolve_refs(model, refs)
    opt = opt or OptimizerConfig()
    keys, tasks = [], []
    for p in p_values:
        for ih, h in enumerate(h_values):
            keys.append((p, h))
            tasks.append((model, n_sites, p, h, refs, opt, (ih, p), exact, None))
    points = _run_tasks(tasks, threads)
    return DepthScan(model, int(n_sites), refs, h_values, p_values, dict(zip(keys, points)))

