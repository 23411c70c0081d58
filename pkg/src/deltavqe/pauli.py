"""Pauli strings, commuting groups and the spin-chain model catalog.

All models live on a periodic ring of ``n_sites`` qubits. Site ``i`` is
bit ``i`` of a basis index (site 0 is the least-significant bit).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

AXES = ("X", "Y", "Z")


class ModelId(enum.Enum):
    TFIM = "tfim"
    XZ = "xz"
    CLUSTER_ISING = "cluster"

    @classmethod
    def parse(cls, name: str | ModelId) -> ModelId:
        if isinstance(name, ModelId):
            return name
        key = name.strip().lower().replace("_", "").replace("-", "")
        aliases = {"tfim": cls.TFIM, "xz": cls.XZ, "cluster": cls.CLUSTER_ISING,
                   "clusterising": cls.CLUSTER_ISING}
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown model {name!r}; expected one of tfim, xz, cluster") from None


@dataclass(frozen=True)
class PauliString:
    """``coefficient`` times a tensor product of single-site Pauli operators.

    ``factors`` is stored as a tuple of ``(site, axis)`` pairs sorted by site;
    identity sites are omitted and an empty tuple means ``coefficient * I``.
    """

    coefficient: float
    factors: tuple[tuple[int, str], ...] = ()

    def __post_init__(self):
        items = self.factors.items() if isinstance(self.factors, Mapping) else self.factors
        cleaned = tuple(sorted((int(s), str(a).upper()) for s, a in items))
        sites = [s for s, _ in cleaned]
        if len(set(sites)) != len(sites):
            raise ValueError(f"site repeated in Pauli string {cleaned}")
        for s, a in cleaned:
            if s < 0:
                raise ValueError(f"negative site index {s}")
            if a not in AXES:
                raise ValueError(f"unknown Pauli axis {a!r}")
        object.__setattr__(self, "factors", cleaned)
        object.__setattr__(self, "coefficient", float(self.coefficient))

    @classmethod
    def from_label(cls, coefficient: float, label: str) -> PauliString:
        """Build from a compact label such as ``"Z0 Z1"`` or ``"Z3 X0 Z1"``."""
        factors = []
        for tok in label.split():
            factors.append((int(tok[1:]), tok[0]))
        return cls(coefficient, tuple(factors))

    @property
    def sites(self) -> tuple[int, ...]:
        return tuple(s for s, _ in self.factors)

    @cached_property
    def max_site(self) -> int:
        return max(self.sites, default=-1)

    def axis(self, site: int) -> str | None:
        for s, a in self.factors:
            if s == site:
                return a
        return None

    @cached_property
    def masks(self) -> tuple[int, int, int]:
        """``(x_mask, z_mask, n_y)``: bit-flip mask, phase mask and Y count."""
        xm = zm = ny = 0
        for s, a in self.factors:
            if a in "XY":
                xm |= 1 << s
            if a in "YZ":
                zm |= 1 << s
            if a == "Y":
                ny += 1
        return xm, zm, ny

    @property
    def is_diagonal(self) -> bool:
        return self.masks[0] == 0

    def scaled(self, factor: float) -> PauliString:
        return PauliString(self.coefficient * factor, self.factors)

    def shifted(self, offset: int, n_sites: int) -> PauliString:
        """Translate every site by ``offset`` around a ring of ``n_sites``."""
        return PauliString(self.coefficient,
                           tuple(((s + offset) % n_sites, a) for s, a in self.factors))

    def to_text(self, order: Iterable[int] | None = None) -> str:
        """Serialize as ``coeff * A_i B_j ...``, e.g. ``-1.0 * Z0 Z1``.

        ``order`` lists the sites in the order they should be printed; by
        default sites are printed ascending.
        """
        if order is None:
            order = self.sites
        body = " ".join(f"{self.axis(s)}{s}" for s in order)
        return f"{self.coefficient!r} * {body or 'I'}"

    def __str__(self) -> str:
        return self.to_text()


def term_arrays(terms: Sequence[PauliString]):
    """``(x_masks, z_masks, n_ys, coeffs)`` arrays for the compiled kernels."""
    masks = np.array([t.masks for t in terms], dtype=np.int64).reshape(-1, 3)
    coeffs = np.array([t.coefficient for t in terms], dtype=float)
    return (np.ascontiguousarray(masks[:, 0]), np.ascontiguousarray(masks[:, 1]),
            np.ascontiguousarray(masks[:, 2]), coeffs)


def commutes(a: PauliString, b: PauliString) -> bool:
    """True iff the two strings commute as operators.

    Two Pauli strings commute exactly when the number of sites carrying
    different non-identity axes is even.
    """
    other = dict(b.factors)
    clashes = sum(1 for s, ax in a.factors if s in other and other[s] != ax)
    return clashes % 2 == 0


@dataclass(frozen=True)
class CommutingGroup:
    label: str
    terms: tuple[PauliString, ...]
    # print order of each term's sites (keeps e.g. Z_{i-1} X_i Z_{i+1} readable)
    display_orders: tuple[tuple[int, ...], ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if not self.is_commuting():
            raise ValueError(f"group {self.label!r} contains anticommuting terms")

    def is_commuting(self) -> bool:
        ts = self.terms
        return all(commutes(ts[i], ts[j]) for i in range(len(ts)) for j in range(i + 1, len(ts)))

    @cached_property
    def is_diagonal(self) -> bool:
        return all(t.is_diagonal for t in self.terms)

    @cached_property
    def arrays(self):
        return term_arrays(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def lines(self) -> list[str]:
        orders = self.display_orders or [None] * len(self.terms)
        return [t.to_text(o) for t, o in zip(self.terms, orders)]


@dataclass(frozen=True)
class GroupedHamiltonian:
    """``H(h) = sum_g w_g(h) H_g`` with weights ``(1, h)`` for the catalog models."""

    n_sites: int
    groups: tuple[CommutingGroup, ...]
    model: ModelId | None = None

    def __post_init__(self):
        object.__setattr__(self, "groups", tuple(self.groups))
        if len(self.groups) < 2:
            raise ValueError("a grouped Hamiltonian needs at least two groups")
        for g in self.groups:
            for t in g.terms:
                if t.max_site >= self.n_sites:
                    raise ValueError(f"term {t} addresses a site beyond n_sites={self.n_sites}")

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(g.label for g in self.groups)

    def group_index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ValueError(f"no group {label!r} in {self.labels}") from None

    def weights(self, h: float) -> tuple[float, ...]:
        return (1.0,) + (float(h),) * (len(self.groups) - 1)

    def groups_commute(self, i: int, j: int) -> bool:
        """True iff groups ``i`` and ``j`` commute as whole operators.

        Sufficient check only: every cross pair commuting implies the sums
        commute. The catalog models all have at least one anticommuting pair.
        """
        return all(commutes(a, b) for a in self.groups[i].terms for b in self.groups[j].terms)


def hamiltonian_at(H: GroupedHamiltonian, h: float) -> list[PauliString]:
    """Flatten ``H`` at field value ``h`` into a list of weighted Pauli strings."""
    out = []
    for g, w in zip(H.groups, H.weights(h)):
        out.extend(t.scaled(w) for t in g.terms)
    return out


def _ring_group(label, n, axes_by_offset):
    terms, orders = [], []
    for i in range(n):
        sites = [(i + off) % n for off, _ in axes_by_offset]
        terms.append(PauliString(-1.0, tuple((s, ax) for s, (_, ax) in zip(sites, axes_by_offset))))
        orders.append(tuple(sites))
    return CommutingGroup(label, tuple(terms), tuple(orders))


def build_model(model: ModelId | str, n_sites: int) -> GroupedHamiltonian:
    """Periodic-boundary catalog Hamiltonian, grouped as (model group, field group).

    TFIM: ``-sum Z_i Z_{i+1} - h sum X_i``; XZ: ``-sum Z_i Z_{i+1} - h sum X_i X_{i+1}``;
    cluster-Ising: ``-sum Z_{i-1} X_i Z_{i+1} - h sum Y_i Y_{i+1}``.
    """
    model = ModelId.parse(model)
    n = int(n_sites)
    # the cluster term spans three sites; two-site models still form a (doubled-bond) ring
    min_sites = 3 if model is ModelId.CLUSTER_ISING else 2
    if n < min_sites:
        raise ValueError(f"{model.value} needs n_sites >= {min_sites}, got {n_sites}")
    if model is ModelId.TFIM:
        groups = (_ring_group("zz", n, [(0, "Z"), (1, "Z")]), _ring_group("x", n, [(0, "X")]))
    elif model is ModelId.XZ:
        groups = (_ring_group("zz", n, [(0, "Z"), (1, "Z")]),
                  _ring_group("xx", n, [(0, "X"), (1, "X")]))
    else:
        groups = (_ring_group("cluster", n, [(-1, "Z"), (0, "X"), (1, "Z")]),
                  _ring_group("yy", n, [(0, "Y"), (1, "Y")]))
    return GroupedHamiltonian(n, groups, model)
