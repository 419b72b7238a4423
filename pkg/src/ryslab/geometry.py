"""Charts, points, and smooth fields on open boxes in R^n.

Every geometric object in the package is evaluated on a ``ChartDomain``,
an open coordinate box.  Fields are closed-form component functions
written against the polymorphic math wrappers in :mod:`ryslab.ad`, so a
single definition serves plain evaluation and nested-dual
differentiation.  All evaluations are pure; the module is safe for
concurrent read-only use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import ad
from .errors import NotSPD, OrderTooHigh, StencilOutOfDomain

# Finite-difference base step is this fraction of the coordinate width;
# the stencil margin keeps 5 such steps clear of every boundary so both
# differentiation backends stay inside the chart.
FD_STEP_FRACTION = 1e-2
STENCIL_STEPS = 5


@dataclass(frozen=True)
class ChartDomain:
    """Open box in R^n with per-coordinate bounds."""

    dim: int
    bounds: tuple[tuple[float, float], ...]
    label: str = "chart"

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError(f"chart dimension must be >= 2, got {self.dim}")
        if len(self.bounds) != self.dim:
            raise ValueError("bounds length must equal dim")
        for lo, hi in self.bounds:
            if not (math.isfinite(lo) and math.isfinite(hi) and hi > lo):
                raise ValueError(f"invalid interval ({lo}, {hi})")

    def width(self, i: int) -> float:
        lo, hi = self.bounds[i]
        return hi - lo

    def fd_step(self, i: int) -> float:
        return FD_STEP_FRACTION * self.width(i)

    def fd_steps(self) -> list[float]:
        return [self.fd_step(i) for i in range(self.dim)]

    def margin(self, i: int) -> float:
        return STENCIL_STEPS * self.fd_step(i)

    def contains_with_margin(self, coords: Sequence[float]) -> bool:
        if len(coords) != self.dim:
            return False
        for i, x in enumerate(coords):
            lo, hi = self.bounds[i]
            m = self.margin(i)
            if not (lo + m < x < hi - m):
                return False
        return True

    def require_interior(self, coords: Sequence[float]) -> None:
        if not self.contains_with_margin(coords):
            raise StencilOutOfDomain(
                f"point {tuple(coords)} is not interior to chart "
                f"'{self.label}' with stencil margin"
            )


@dataclass(frozen=True)
class ChartPoint:
    """Coordinates of a point in some chart."""

    coords: tuple[float, ...]

    def __post_init__(self):
        if not all(math.isfinite(c) for c in self.coords):
            raise ValueError(f"non-finite coordinates {self.coords}")

    def __len__(self):
        return len(self.coords)


def coords_of(p) -> list:
    """Accept ChartPoint or any coordinate sequence, return a list."""
    if isinstance(p, ChartPoint):
        return list(p.coords)
    return list(p)


@dataclass(frozen=True)
class ScalarField:
    """Smooth real function on a chart, differentiable to order 4."""

    fn: Callable
    domain: ChartDomain
    name: str = "scalar"

    def __call__(self, coords):
        return self.fn(list(coords))


@dataclass(frozen=True)
class VectorField:
    """Contravariant components X^i on a chart."""

    fn: Callable
    domain: ChartDomain
    name: str = "vector"

    def __call__(self, coords):
        v = self.fn(list(coords))
        if len(v) != self.domain.dim:
            raise ValueError(
                f"vector field '{self.name}' returned {len(v)} components "
                f"on a dim-{self.domain.dim} chart"
            )
        return list(v)


@dataclass(frozen=True)
class OneFormField:
    """Covariant components eta_i on a chart."""

    fn: Callable
    domain: ChartDomain
    name: str = "one-form"

    def __call__(self, coords):
        v = self.fn(list(coords))
        if len(v) != self.domain.dim:
            raise ValueError(
                f"one-form '{self.name}' returned {len(v)} components "
                f"on a dim-{self.domain.dim} chart"
            )
        return list(v)


@dataclass(frozen=True)
class MetricField:
    """Symmetric positive-definite metric components g_ij on a chart.

    Evaluation symmetrizes the raw component matrix, so g_ij == g_ji
    holds by construction.  Positive definiteness is a sampled-point
    contract checked by :meth:`require_spd`.
    """

    fn: Callable
    domain: ChartDomain
    name: str = "metric"

    def matrix(self, coords):
        m = self.fn(list(coords))
        n = self.domain.dim
        return [
            [(m[i][j] + m[j][i]) * 0.5 for j in range(n)] for i in range(n)
        ]

    __call__ = matrix

    def matrix_np(self, coords) -> np.ndarray:
        return np.array(self.matrix(coords), dtype=float)

    def require_spd(self, points, tol: float = 0.0) -> None:
        """Hard error unless g is positive definite at every given point."""
        for p in points:
            w = np.linalg.eigvalsh(self.matrix_np(coords_of(p)))
            if w.min() <= tol:
                raise NotSPD(
                    f"metric '{self.name}' is not positive definite at "
                    f"{tuple(coords_of(p))}: eigenvalues {w}"
                )


def partial_derivative(field: ScalarField, p, multi_index, backend: str = "dual") -> float:
    """Mixed partial of a scalar field at an interior point.

    ``multi_index`` lists coordinate indices, one per differentiation,
    total order at most 4; the empty index returns the plain value.  The
    primary backend is nested forward-mode duals; ``backend='fd'``
    selects the Richardson central-difference cross-check.
    """
    index = tuple(multi_index)
    if len(index) > ad.MAX_ORDER:
        raise OrderTooHigh(
            f"derivative order {len(index)} exceeds supported maximum {ad.MAX_ORDER}"
        )
    x = coords_of(p)
    field.domain.require_interior(x)
    for i in index:
        if not 0 <= i < field.domain.dim:
            raise ValueError(f"coordinate index {i} out of range")
    if backend == "dual":
        return float(ad.value_of(ad.derive(field.fn, x, index)))
    if backend == "fd":
        return float(ad.fd_derive(field.fn, x, index, field.domain.fd_steps()))
    raise ValueError(f"unknown backend '{backend}'")


def sample_points(domain: ChartDomain, count: int, seed: int) -> list[ChartPoint]:
    """Seeded uniform interior samples respecting the stencil margin.

    Deterministic for a fixed (domain, count, seed) triple.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    lows = np.array([lo + domain.margin(i) for i, (lo, _) in enumerate(domain.bounds)])
    highs = np.array([hi - domain.margin(i) for i, (_, hi) in enumerate(domain.bounds)])
    raw = rng.uniform(lows, highs, size=(count, domain.dim))
    return [ChartPoint(tuple(float(c) for c in row)) for row in raw]


def constant_scalar(domain: ChartDomain, value: float, name: str = "const") -> ScalarField:
    return ScalarField(lambda x, v=value: v, domain, name)


def zero_vector(domain: ChartDomain, name: str = "zero") -> VectorField:
    n = domain.dim
    return VectorField(lambda x, n=n: [0.0] * n, domain, name)
