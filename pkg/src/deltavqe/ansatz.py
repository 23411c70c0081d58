"""Reference states and Hamiltonian-variational circuits built from them."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .pauli import GroupedHamiltonian, ModelId
from .statevec import StateVector, apply_cz, apply_hadamard, evolve_group


class ReferenceId(enum.Enum):
    ALL_ZERO = "zero"
    ALL_PLUS_X = "plus-x"
    ALL_PLUS_Y = "plus-y"
    CLUSTER = "cluster"
    GHZ_Z = "ghz-z"
    GHZ_Y = "ghz-y"

    @classmethod
    def parse(cls, name: str | ReferenceId) -> ReferenceId:
        if isinstance(name, ReferenceId):
            return name
        key = name.strip().lower().replace("_", "").replace("-", "")
        for ref in cls:
            if key in (ref.value.replace("-", ""), ref.name.lower().replace("_", "")):
                return ref
        extra = {"allzero": cls.ALL_ZERO, "allplusx": cls.ALL_PLUS_X, "plus": cls.ALL_PLUS_X,
                 "allplusy": cls.ALL_PLUS_Y, "ghzz": cls.GHZ_Z, "ghzy": cls.GHZ_Y, "ghz": cls.GHZ_Z}
        if key in extra:
            return extra[key]
        names = ", ".join(r.value for r in cls)
        raise ValueError(f"unknown reference {name!r}; expected one of {names}")


def _product_state(n: int, single: np.ndarray) -> np.ndarray:
    amps = np.ones(1, dtype=complex)
    for _ in range(n):
        # kron(single, amps) puts the new site at the most-significant bit
        amps = np.kron(single, amps)
    return amps


def prepare_reference(ref: ReferenceId | str, n_sites: int) -> StateVector:
    ref = ReferenceId.parse(ref)
    n = int(n_sites)
    if n < 1:
        raise ValueError("need at least one site")
    r = 1.0 / math.sqrt(2.0)
    plus_x = np.array([r, r], dtype=complex)
    plus_y = np.array([r, 1j * r])
    minus_y = np.array([r, -1j * r])

    if ref is ReferenceId.ALL_ZERO:
        return StateVector.basis(n, 0)
    if ref is ReferenceId.ALL_PLUS_X:
        return StateVector(n, _product_state(n, plus_x))
    if ref is ReferenceId.ALL_PLUS_Y:
        return StateVector(n, _product_state(n, plus_y))
    if ref is ReferenceId.GHZ_Z:
        amps = np.zeros(1 << n, dtype=complex)
        amps[0] = amps[-1] = r
        return StateVector(n, amps)
    if ref is ReferenceId.GHZ_Y:
        amps = r * (_product_state(n, plus_y) + _product_state(n, minus_y))
        return StateVector(n, amps)
    # cluster: H on every site, then CZ around the ring
    if n < 3:
        raise ValueError(f"cluster reference needs n_sites >= 3, got {n}")
    state = StateVector.basis(n, 0)
    for i in range(n):
        apply_hadamard(state, i)
    for i in range(n):
        apply_cz(state, i, (i + 1) % n)
    return state


@lru_cache(maxsize=64)
def _reference_amplitudes(ref: ReferenceId, n_sites: int) -> np.ndarray:
    amps = prepare_reference(ref, n_sites).amplitudes
    amps.setflags(write=False)
    return amps


# Group label of which each reference is an eigenstate, per model.
_STABILIZING_GROUP = {
    ModelId.TFIM: {ReferenceId.ALL_ZERO: "zz", ReferenceId.GHZ_Z: "zz", ReferenceId.ALL_PLUS_X: "x"},
    ModelId.XZ: {ReferenceId.ALL_ZERO: "zz", ReferenceId.GHZ_Z: "zz", ReferenceId.ALL_PLUS_X: "xx"},
    ModelId.CLUSTER_ISING: {ReferenceId.CLUSTER: "cluster", ReferenceId.ALL_PLUS_Y: "yy",
                            ReferenceId.GHZ_Y: "yy"},
}

DEFAULT_REFERENCES = {
    ModelId.TFIM: (ReferenceId.ALL_ZERO, ReferenceId.ALL_PLUS_X),
    ModelId.XZ: (ReferenceId.ALL_ZERO, ReferenceId.ALL_PLUS_X),
    ModelId.CLUSTER_ISING: (ReferenceId.CLUSTER, ReferenceId.ALL_PLUS_Y),
}


def stabilizing_group(model: ModelId | str, ref: ReferenceId | str) -> str:
    model, ref = ModelId.parse(model), ReferenceId.parse(ref)
    try:
        return _STABILIZING_GROUP[model][ref]
    except KeyError:
        raise ValueError(f"reference {ref.value!r} is not supported for model {model.value!r}") from None


def default_order(model: ModelId | str, ref: ReferenceId | str,
                  hamiltonian: GroupedHamiltonian | None = None) -> tuple[int, ...]:
    """Group indices applied within each layer, first-applied first.

    The group the reference is an eigenstate of goes last: evolving it
    first would only contribute a global phase and waste a parameter.
    """
    model = ModelId.parse(model)
    last = stabilizing_group(model, ref)
    labels = hamiltonian.labels if hamiltonian is not None else _MODEL_LABELS[model]
    last_idx = labels.index(last)
    return tuple(i for i in range(len(labels)) if i != last_idx) + (last_idx,)


_MODEL_LABELS = {
    ModelId.TFIM: ("zz", "x"),
    ModelId.XZ: ("zz", "xx"),
    ModelId.CLUSTER_ISING: ("cluster", "yy"),
}


def parse_order(spec: str | Sequence, hamiltonian: GroupedHamiltonian) -> tuple[int, ...]:
    """Turn ``"x,zz"`` (group labels) or ``(1, 0)`` (indices) into a layer order."""
    items = spec.split(",") if isinstance(spec, str) else list(spec)
    order = []
    for item in items:
        if isinstance(item, str):
            item = item.strip()
            order.append(int(item) if item.isdigit() else hamiltonian.group_index(item))
        else:
            order.append(int(item))
    return tuple(order)


@dataclass(frozen=True)
class HvaAnsatz:
    hamiltonian: GroupedHamiltonian
    reference: ReferenceId
    depth: int
    layer_order: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "reference", ReferenceId.parse(self.reference))
        object.__setattr__(self, "layer_order", tuple(int(i) for i in self.layer_order))
        if self.depth < 1:
            raise ValueError(f"depth must be >= 1, got {self.depth}")
        n = len(self.hamiltonian.groups)
        if sorted(self.layer_order) != list(range(n)):
            raise ValueError(f"layer_order {self.layer_order} is not a permutation of {n} groups")

    @classmethod
    def for_model(cls, hamiltonian: GroupedHamiltonian, reference: ReferenceId | str, depth: int,
                  order: Sequence[int] | str | None = None) -> HvaAnsatz:
        """Ansatz with the stabilizer-last ordering unless ``order`` overrides it."""
        reference = ReferenceId.parse(reference)
        if order is None:
            if hamiltonian.model is None:
                raise ValueError("hamiltonian has no model id; pass an explicit order")
            layer_order = default_order(hamiltonian.model, reference, hamiltonian)
        else:
            layer_order = parse_order(order, hamiltonian)
        return cls(hamiltonian, reference, int(depth), layer_order)

    @property
    def n_groups(self) -> int:
        return len(self.hamiltonian.groups)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.depth, self.n_groups)

    @property
    def n_params(self) -> int:
        return self.depth * self.n_groups

    def schedule(self) -> list:
        """``(layer, position, group)`` triples in application order."""
        cached = self.__dict__.get("_schedule")
        if cached is None:
            groups = self.hamiltonian.groups
            cached = [(i, k, groups[j]) for i in range(self.depth)
                      for k, j in enumerate(self.layer_order)]
            object.__setattr__(self, "_schedule", cached)
        return cached

    def reference_state(self) -> StateVector:
        return StateVector(self.hamiltonian.n_sites,
                           _reference_amplitudes(self.reference, self.hamiltonian.n_sites).copy())

    def check_theta(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if theta.size != self.n_params:
            raise ValueError(f"expected {self.n_params} parameters for shape {self.shape}, "
                             f"got {theta.size}")
        theta = theta.reshape(self.shape)
        if not np.all(np.isfinite(theta)):
            raise ValueError("parameters must be finite")
        return theta


def apply_ansatz(ansatz: HvaAnsatz, theta, state: StateVector | None = None) -> StateVector:
    """Prepare the reference and apply every layer; ``theta[i, k]`` drives the
    ``k``-th group of ``layer_order`` in layer ``i``.

    Generators are the bare groups (no field weight). A caller-provided
    ``state`` buffer is overwritten with the reference first.
    """
    theta = ansatz.check_theta(theta)
    ref = ansatz.reference_state()
    if state is None:
        state = ref
    else:
        state.amplitudes[:] = ref.amplitudes
    for i, k, g in ansatz.schedule():
        evolve_group(state.amplitudes, g, theta[i, k], state.n_sites)
    return state
