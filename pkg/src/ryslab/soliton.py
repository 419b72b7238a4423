"""Soliton parameter sets, defining residual tensors, and classification.

The defining equation in coordinate form is

    alpha R_ij + D_ij + (lambda - beta/2 R) g_ij + mu T_ij = 0

where D_ij is 1/2 (L_X g)_ij for a vector-field instance or the Hessian
of the potential for a gradient instance, and the mu-term T is eta (x) eta
or df (x) df depending on the flavor.  A true soliton has vanishing
residual; the residual tensor itself is the unit of verification.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from .ad import value_and_gradient, value_of, vlift, vparts
from .curvature import (
    Sym2Tensor,
    christoffel_generic,
    hessian_generic,
    lie_metric_generic,
    ricci_generic,
)
from .geometry import (
    MetricField,
    OneFormField,
    ScalarField,
    VectorField,
    coords_of,
)
from .errors import AlphaZero, DegenerateBeta
from .tensors import mat_inverse, trace_pair

STEADY_TOL = 1e-12


class SolitonClass(str, enum.Enum):
    EXPANDING = "expanding"
    STEADY = "steady"
    SHRINKING = "shrinking"


@dataclass(frozen=True)
class SolitonParams:
    """The four real constants of the soliton equations."""

    alpha: float
    beta: float
    lam: float
    mu: float = 0.0

    def __post_init__(self):
        for name in ("alpha", "beta", "lam", "mu"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"parameter {name} must be finite")

    @property
    def is_proper(self) -> bool:
        return self.alpha not in (0.0, 1.0)

    @property
    def is_ricci_soliton(self) -> bool:
        return (self.alpha, self.beta) == (1.0, 0.0)

    @property
    def is_yamabe_soliton(self) -> bool:
        return (self.alpha, self.beta) == (0.0, 2.0)

    def rho_einstein_factor(self) -> Optional[float]:
        """rho with (alpha, beta) = (1, 2*rho), if this is that family."""
        return self.beta / 2.0 if self.alpha == 1.0 else None


def classify(params: SolitonParams, tol: float = STEADY_TOL) -> SolitonClass:
    """Expanding for lam > 0, steady for |lam| <= tol, else shrinking."""
    if params.lam > tol:
        return SolitonClass.EXPANDING
    if params.lam < -tol:
        return SolitonClass.SHRINKING
    return SolitonClass.STEADY


class SolitonKind(str, enum.Enum):
    RYS = "rys"                # vector field X
    GRYS = "grys"              # gradient potential f
    ETA_RYS = "eta-rys"        # vector field X plus mu eta(x)eta
    GEN_GRYS = "gen-grys"      # potential f plus mu df(x)df


@dataclass(frozen=True)
class SolitonInstance:
    """A metric with soliton data of one of the four flavors.

    ``entry`` is an optional back-reference to the catalog entry that
    built the instance (charts, compactness flag, quadrature atlas).
    """

    params: SolitonParams
    metric: MetricField
    kind: SolitonKind
    potential: Optional[ScalarField] = None
    vector_field: Optional[VectorField] = None
    eta: Optional[OneFormField] = None
    phi: Optional[float] = None      # concircular factor, when known
    compact: bool = False
    note: str = ""
    entry: Any = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        needs_potential = self.kind in (SolitonKind.GRYS, SolitonKind.GEN_GRYS)
        if needs_potential and self.potential is None:
            raise ValueError(f"{self.kind.value} instance needs a potential")
        if not needs_potential and self.vector_field is None:
            raise ValueError(f"{self.kind.value} instance needs a vector field")
        if self.kind is SolitonKind.ETA_RYS and self.eta is None:
            raise ValueError("eta-rys instance needs a one-form")

    @property
    def n(self) -> int:
        return self.metric.domain.dim


def rys_residual(inst: SolitonInstance, p) -> Sym2Tensor:
    """alpha Ric + 1/2 L_X g + (lam - beta/2 R) g at a point."""
    if inst.kind not in (SolitonKind.RYS, SolitonKind.ETA_RYS):
        raise ValueError(f"rys_residual needs a vector-field instance, got {inst.kind}")
    return Sym2Tensor.from_matrix(
        _base_residual_generic(inst, coords_of(p), mu_term=False)
    )


def grys_residual(inst: SolitonInstance, p) -> Sym2Tensor:
    """alpha Ric + Hess f + (lam - beta/2 R) g at a point."""
    if inst.kind not in (SolitonKind.GRYS, SolitonKind.GEN_GRYS):
        raise ValueError(f"grys_residual needs a gradient instance, got {inst.kind}")
    return Sym2Tensor.from_matrix(
        _base_residual_generic(inst, coords_of(p), mu_term=False)
    )


def eta_rys_residual(inst: SolitonInstance, p) -> Sym2Tensor:
    if inst.kind is not SolitonKind.ETA_RYS:
        raise ValueError(f"eta_rys_residual needs kind eta-rys, got {inst.kind}")
    return Sym2Tensor.from_matrix(
        _base_residual_generic(inst, coords_of(p), mu_term=True)
    )


def gen_grys_residual(inst: SolitonInstance, p) -> Sym2Tensor:
    if inst.kind is not SolitonKind.GEN_GRYS:
        raise ValueError(f"gen_grys_residual needs kind gen-grys, got {inst.kind}")
    return Sym2Tensor.from_matrix(
        _base_residual_generic(inst, coords_of(p), mu_term=True)
    )


def defining_residual(inst: SolitonInstance, p) -> Sym2Tensor:
    """Dispatch to the residual operation matching the instance kind."""
    return {
        SolitonKind.RYS: rys_residual,
        SolitonKind.GRYS: grys_residual,
        SolitonKind.ETA_RYS: eta_rys_residual,
        SolitonKind.GEN_GRYS: gen_grys_residual,
    }[inst.kind](inst, p)


def _base_residual_generic(inst: SolitonInstance, x, mu_term: bool):
    """Residual matrix with generic (dual-capable) entries."""
    g = inst.metric
    n = g.domain.dim
    pr = inst.params
    gm = g.matrix(x)
    ric = ricci_generic(g, x)
    ginv = mat_inverse(gm)
    scal = trace_pair(ginv, ric)

    if inst.kind in (SolitonKind.GRYS, SolitonKind.GEN_GRYS):
        second = hessian_generic(g, inst.potential, x)
    else:
        lie = lie_metric_generic(g, inst.vector_field, x)
        second = [[0.5 * lie[i][j] for j in range(n)] for i in range(n)]

    coef = pr.lam - 0.5 * pr.beta * scal
    out = [
        [
            pr.alpha * ric[i][j] + second[i][j] + coef * gm[i][j]
            for j in range(n)
        ]
        for i in range(n)
    ]
    if mu_term and pr.mu != 0.0:
        if inst.kind is SolitonKind.GEN_GRYS:
            _, w = value_and_gradient(inst.potential.fn, x)
        else:
            w = inst.eta(x)
        for i in range(n):
            for j in range(n):
                out[i][j] = out[i][j] + pr.mu * w[i] * w[j]
    return out


def residual_report(inst: SolitonInstance, p) -> dict:
    """Max-abs component and g-norm of the defining residual at a point."""
    x = coords_of(p)
    res = defining_residual(inst, p).components
    ginv = np.array(
        [
            [float(value_of(v)) for v in row]
            for row in mat_inverse(inst.metric.matrix(x))
        ]
    )
    gnorm_sq = float(np.einsum("ij,kl,ik,jl->", res, res, ginv, ginv))
    return {
        "max_abs": float(np.max(np.abs(res))),
        "g_norm": math.sqrt(max(gnorm_sq, 0.0)),
    }


def concircular_defect(
    g: MetricField, X: VectorField, phi, p
) -> np.ndarray:
    """nabla X - phi * identity as a (1,1) matrix; zero iff X is
    concircular with factor phi at the point."""
    x = coords_of(p)
    n = g.domain.dim
    gamma = christoffel_generic(g, x)
    xv = X(x)
    phi_val = phi(x) if callable(phi) else float(phi)
    lifted = X(vlift(x))
    dX = [[vparts(lifted[i], n)[j] for i in range(n)] for j in range(n)]
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            v = dX[j][i] + sum(gamma[i][j][k] * xv[k] for k in range(n))
            if i == j:
                v = v - phi_val
            out[i][j] = float(value_of(v))
    return out


def concircular_conclusions(
    g: MetricField, params: SolitonParams, phi_value: float, p
) -> dict:
    """Einstein defect and the predictions forced by a concircular field.

    For a soliton whose vector field satisfies nabla_Y X = phi Y the
    metric is Einstein, the scalar curvature equals
    2 n (lam + phi) / (beta - 2 alpha), and every vector is a Ricci
    eigenvector with eigenvalue (beta R - 2 phi - 2 lam) / (2 alpha).
    Classification threshold: expanding, steady or shrinking according
    as phi is below, at, or above (beta - 2 alpha) R / (2 n).
    """
    if params.alpha == 0.0:
        raise AlphaZero("concircular conclusions need alpha != 0")
    x = coords_of(p)
    n = g.domain.dim
    ric = ricci_generic(g, x)
    gm = g.matrix(x)
    ginv = mat_inverse(gm)
    scal = float(value_of(trace_pair(ginv, ric)))
    defect = max(
        abs(float(value_of(ric[i][j])) - (scal / n) * float(value_of(gm[i][j])))
        for i in range(n)
        for j in range(n)
    )
    if params.beta == 2.0 * params.alpha:
        raise DegenerateBeta(
            "beta = 2*alpha degenerates the scalar-curvature prediction"
        )
    scalar_pred = 2.0 * n * (params.lam + phi_value) / (params.beta - 2.0 * params.alpha)
    eigen_pred = (params.beta * scal - 2.0 * phi_value - 2.0 * params.lam) / (
        2.0 * params.alpha
    )
    threshold = (params.beta - 2.0 * params.alpha) * scal / (2.0 * n)
    if phi_value < threshold - STEADY_TOL:
        cls = SolitonClass.EXPANDING
    elif phi_value > threshold + STEADY_TOL:
        cls = SolitonClass.SHRINKING
    else:
        cls = SolitonClass.STEADY
    return {
        "einstein_defect": defect,
        "scalar_pred": scalar_pred,
        "eigenvalue_pred": eigen_pred,
        "class": cls,
    }


def phi_constancy(phi: ScalarField, points, tol: float = 1e-9) -> float:
    """Max variation of a concircular factor over samples.

    Conclusions that need a constant factor check this first; the
    Bianchi argument forces constancy, it is never assumed.
    """
    vals = [float(value_of(phi(coords_of(p)))) for p in points]
    return max(vals) - min(vals)
