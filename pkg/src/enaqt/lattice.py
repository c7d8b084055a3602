"""Lattice geometries and hopping matrices.

Builds 1D chains and 2D square lattices with either nearest-neighbor or
power-law (dipolar-type) couplings, under open or periodic boundary
conditions.  Site ordering is row-major and fixed: every vectorized object
downstream depends on it.  Units are ``a = 1`` for the lattice constant and
all rates are expressed relative to the nearest-neighbor hopping ``J``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np


class Dims(enum.Enum):
    ONE_D = "1d"
    TWO_D = "2d"


class Boundary(enum.Enum):
    OPEN = "open"
    PERIODIC = "periodic"


class HoppingModel(enum.Enum):
    DIPOLAR = "dipolar"
    NEAREST_NEIGHBOR = "nearest_neighbor"


class InvalidSpecError(ValueError):
    """Raised for geometrically inconsistent lattice specifications."""


@dataclass(frozen=True)
class LatticeSpec:
    """Geometry, boundary conditions and sink location of a lattice.

    ``L`` is the number of sites per direction, so the total site count is
    ``N = L`` in 1D and ``N = L**2`` in 2D.  ``alpha`` is the power-law
    exponent of the long-range coupling (3 for dipolar).  The closed-form
    1D results require odd ``L`` with the sink at the chain center.
    """

    dims: Dims
    L: int
    boundary: Boundary = Boundary.OPEN
    a: float = 1.0
    alpha: float = 3.0
    hopping_model: HoppingModel = HoppingModel.DIPOLAR
    sink_index: int | None = None  # None -> center site

    def __post_init__(self):
        if self.L < 1:
            raise InvalidSpecError(f"L must be positive, got {self.L}")
        if self.a <= 0:
            raise InvalidSpecError(f"lattice constant must be positive, got {self.a}")
        if self.alpha <= 0:
            raise InvalidSpecError(f"alpha must be positive, got {self.alpha}")
        if self.sink_index is not None and not 0 <= self.sink_index < self.n_sites:
            raise InvalidSpecError(
                f"sink_index {self.sink_index} out of range for {self.n_sites} sites"
            )

    @property
    def n_sites(self) -> int:
        return self.L if self.dims is Dims.ONE_D else self.L**2

    @property
    def sink(self) -> int:
        """Sink site index; defaults to the (row-major) central site."""
        if self.sink_index is not None:
            return self.sink_index
        return (self.n_sites - 1) // 2

    @classmethod
    def chain(cls, L: int, **kwargs) -> "LatticeSpec":
        return cls(dims=Dims.ONE_D, L=L, **kwargs)

    @classmethod
    def square(cls, L: int, **kwargs) -> "LatticeSpec":
        return cls(dims=Dims.TWO_D, L=L, **kwargs)


@dataclass(frozen=True)
class HoppingMatrix:
    """Real symmetric coupling matrix with zero diagonal, in units of energy."""

    j_mat: np.ndarray = field(repr=False)
    J: float = 1.0

    @property
    def n_sites(self) -> int:
        return self.j_mat.shape[0]


def site_coordinates(spec: LatticeSpec, i: int) -> np.ndarray:
    """Position of site ``i`` in units of the lattice constant.

    Row-major in 2D: ``i = x * L + y``.  The center of an odd 2D lattice is
    index ``(L**2 - 1) / 2``.
    """
    if not 0 <= i < spec.n_sites:
        raise IndexError(f"site index {i} out of range for {spec.n_sites} sites")
    if spec.dims is Dims.ONE_D:
        return np.array([float(i)])
    return np.array([float(i // spec.L), float(i % spec.L)])


def _all_coordinates(spec: LatticeSpec) -> np.ndarray:
    idx = np.arange(spec.n_sites)
    if spec.dims is Dims.ONE_D:
        return idx[:, None].astype(float)
    return np.stack([idx // spec.L, idx % spec.L], axis=1).astype(float)


def build_hopping(spec: LatticeSpec, J: float = 1.0) -> HoppingMatrix:
    """Hopping matrix for the given lattice, ``J`` being the
    nearest-neighbor rate.

    Dipolar couplings fall off as ``J * (a / r)**alpha``.  Under periodic
    boundary conditions the separation ``r`` is the minimum-image distance
    on the torus (no lattice-sum resummation is performed).
    """
    if spec.L < 2:
        raise InvalidSpecError("hopping requires at least 2 sites per direction")
    r = _all_coordinates(spec)
    d = r[:, None, :] - r[None, :, :]
    if spec.boundary is Boundary.PERIODIC:
        d = (d + spec.L / 2.0) % spec.L - spec.L / 2.0
    dist = np.sqrt((d**2).sum(axis=-1))
    n = spec.n_sites
    if spec.hopping_model is HoppingModel.NEAREST_NEIGHBOR:
        j_mat = np.where(np.isclose(dist, 1.0), J, 0.0)
    else:
        with np.errstate(divide="ignore"):
            j_mat = J / np.where(dist > 0, dist, np.inf) ** spec.alpha
    np.fill_diagonal(j_mat, 0.0)
    # mirror the upper triangle so symmetry is bitwise, not just approximate
    iu = np.triu_indices(n, k=1)
    j_mat[(iu[1], iu[0])] = j_mat[iu]
    return HoppingMatrix(j_mat=j_mat, J=J)
