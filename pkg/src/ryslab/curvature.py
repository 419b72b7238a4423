"""Curvature pipeline on coordinate charts.

Christoffel symbols, Ricci tensor, scalar curvature, covariant Hessian,
Laplacian, gradient, Lie derivative of the metric, Ricci operator, and
derivatives of the scalar-curvature field.

Sign convention: the Riemann contraction is chosen so the round unit
sphere has Ric = (n-1) g and positive scalar curvature n(n-1).

Every ``_generic`` helper accepts coordinates whose entries are floats or
dual towers, which is how third and fourth derivatives of curvature
quantities are produced: the scalar-curvature map itself is fed back
through the forward-mode differentiator rather than expanding
fourth-order tensor formulas.  Public wrappers take a ``MetricField``
plus a point and return floats / numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ad import VDual, jet2, value_and_gradient, value_of, vlift, vparts
from .geometry import ChartPoint, MetricField, ScalarField, VectorField, coords_of
from .tensors import mat_inverse, mat_vec, sym2_norm_sq, trace_pair, vec_dot

SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class Sym2Tensor:
    """Covariant symmetric 2-tensor value at a point."""

    components: np.ndarray

    @classmethod
    def from_matrix(cls, m) -> "Sym2Tensor":
        arr = np.array(
            [[float(value_of(x)) for x in row] for row in m], dtype=float
        )
        gap = float(np.max(np.abs(arr - arr.T)))
        if gap > SYMMETRY_TOL * (1.0 + float(np.max(np.abs(arr)))):
            raise ValueError(f"matrix is not symmetric, antisymmetry {gap:.3e}")
        return cls(0.5 * (arr + arr.T))

    @property
    def n(self) -> int:
        return self.components.shape[0]

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.components)))

    def __getitem__(self, ij):
        return float(self.components[ij])


@dataclass(frozen=True)
class CurvatureBundle:
    """All pointwise curvature data needed by the soliton residuals."""

    christoffel: np.ndarray  # Gamma^k_ij indexed [k][i][j]
    ricci: Sym2Tensor
    scalar: float
    ricci_norm_sq: float
    at: ChartPoint


# -- generic core (float or dual coordinates) ------------------------------

def metric_at(g: MetricField, x):
    return g.matrix(x)


def metric_partials(g: MetricField, x):
    """dg[l][i][j] = d g_ij / dx_l from one vector-lifted metric evaluation."""
    n = g.domain.dim
    m = g.matrix(vlift(x))
    cols = [[vparts(m[i][j], n) for j in range(n)] for i in range(n)]
    return [
        [[cols[i][j][l] for j in range(n)] for i in range(n)] for l in range(n)
    ]


def christoffel_generic(g: MetricField, x):
    """Gamma^k_ij = 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij)."""
    n = g.domain.dim
    gm = g.matrix(x)
    ginv = mat_inverse(gm)
    dg = metric_partials(g, x)
    gamma = [[[0.0] * n for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            # bracket_l = d_i g_jl + d_j g_il - d_l g_ij
            bracket = [dg[i][j][l] + dg[j][i][l] - dg[l][i][j] for l in range(n)]
            for k in range(n):
                v = 0.5 * sum(ginv[k][l] * bracket[l] for l in range(n))
                gamma[k][i][j] = v
                gamma[k][j][i] = v
    return gamma


def christoffel_with_partials(g: MetricField, x):
    """Gamma and dGamma[m][k][i][j] = d_m Gamma^k_ij.

    One vector-lifted Christoffel evaluation carries the value in its
    primal part and all coordinate partials in the derivative slots.
    """
    n = g.domain.dim
    gl = christoffel_generic(g, vlift(x))
    gamma = [[[0.0] * n for _ in range(n)] for _ in range(n)]
    dgamma = [
        [[[0.0] * n for _ in range(n)] for _ in range(n)] for _ in range(n)
    ]
    for k in range(n):
        for i in range(n):
            for j in range(n):
                v = gl[k][i][j]
                if isinstance(v, VDual):
                    gamma[k][i][j] = v.a
                    for m_dir in range(n):
                        dgamma[m_dir][k][i][j] = v.b[m_dir]
                else:
                    gamma[k][i][j] = v
    return gamma, dgamma


def ricci_generic(g: MetricField, x):
    """R_ij from the Riemann contraction; round spheres come out positive."""
    n = g.domain.dim
    gamma, dgamma = christoffel_with_partials(g, x)
    ric = [[0.0] * n for _ in range(n)]
    # Precontract Gamma^k_kl for the trace term.
    gtrace = [sum(gamma[k][k][l] for k in range(n)) for l in range(n)]
    for i in range(n):
        for j in range(i, n):
            term = 0.0
            for k in range(n):
                term = term + dgamma[k][k][i][j] - dgamma[i][k][k][j]
            for l in range(n):
                term = term + gtrace[l] * gamma[l][i][j]
                for k in range(n):
                    term = term - gamma[k][i][l] * gamma[l][k][j]
            ric[i][j] = term
            ric[j][i] = term
    return ric


def scalar_curvature_generic(g: MetricField, x):
    gm = g.matrix(x)
    ginv = mat_inverse(gm)
    return trace_pair(ginv, ricci_generic(g, x))


def hessian_generic(g: MetricField, f: ScalarField, x):
    """(Hess f)_ij = d_i d_j f - Gamma^k_ij d_k f."""
    n = g.domain.dim
    gamma = christoffel_generic(g, x)
    _, df, ddf = jet2(f.fn, x)
    h = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            v = ddf[i][j] - sum(gamma[k][i][j] * df[k] for k in range(n))
            h[i][j] = v
            h[j][i] = v
    return h


def laplacian_generic(g: MetricField, f: ScalarField, x):
    ginv = mat_inverse(g.matrix(x))
    return trace_pair(ginv, hessian_generic(g, f, x))


def gradient_generic(g: MetricField, f: ScalarField, x):
    n = g.domain.dim
    ginv = mat_inverse(g.matrix(x))
    _, df = value_and_gradient(f.fn, x)
    return mat_vec(ginv, df), df, ginv


def grad_norm_sq_generic(g: MetricField, f: ScalarField, x):
    up, df, _ = gradient_generic(g, f, x)
    return vec_dot(up, df)


def lie_metric_generic(g: MetricField, X: VectorField, x):
    """(L_X g)_ij = d_i X_j + d_j X_i - 2 Gamma^k_ij X_k, X lowered by g."""
    n = g.domain.dim

    def lowered(q):
        m = g.matrix(q)
        xv = X(q)
        return [sum(m[j][k] * xv[k] for k in range(n)) for j in range(n)]

    lifted_low = lowered(vlift(x))
    low = [c.a if isinstance(c, VDual) else c for c in lifted_low]
    dlow = [
        [vparts(lifted_low[j], n)[i] for j in range(n)] for i in range(n)
    ]
    gamma = christoffel_generic(g, x)
    out = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            v = dlow[i][j] + dlow[j][i] - 2.0 * sum(
                gamma[k][i][j] * low[k] for k in range(n)
            )
            out[i][j] = v
            out[j][i] = v
    return out


def ricci_with_partials(g: MetricField, x):
    """Ric together with dric[k][i][j] = d_k R_ij from one lifted pass."""
    n = g.domain.dim
    rl = ricci_generic(g, vlift(x))
    ric = [[0.0] * n for _ in range(n)]
    dric = [[[0.0] * n for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(n):
            v = rl[i][j]
            if isinstance(v, VDual):
                ric[i][j] = v.a
                for k in range(n):
                    dric[k][i][j] = v.b[k]
            else:
                ric[i][j] = v
    return ric, dric


def ricci_partials(g: MetricField, x):
    """dric[k][i][j] = d_k R_ij (coordinate partials of the Ricci field)."""
    return ricci_with_partials(g, x)[1]


def divergence_ricci_generic(g: MetricField, x):
    """(div Ric)_i = g^{jk} nabla_k R_ij."""
    n = g.domain.dim
    ginv = mat_inverse(g.matrix(x))
    gamma = christoffel_generic(g, x)
    ric, dric = ricci_with_partials(g, x)
    out = []
    for i in range(n):
        total = 0.0
        for j in range(n):
            for k in range(n):
                cov = dric[k][i][j] - sum(
                    gamma[l][k][i] * ric[l][j] + gamma[l][k][j] * ric[i][l]
                    for l in range(n)
                )
                total = total + ginv[j][k] * cov
        out.append(total)
    return out


# -- public API -------------------------------------------------------------

def _point(p) -> ChartPoint:
    return p if isinstance(p, ChartPoint) else ChartPoint(tuple(float(c) for c in p))


def christoffel(g: MetricField, p) -> np.ndarray:
    """Levi-Civita connection coefficients Gamma^k_ij at a point."""
    gamma = christoffel_generic(g, coords_of(p))
    return np.array(gamma, dtype=float)


def ricci(g: MetricField, p) -> Sym2Tensor:
    return Sym2Tensor.from_matrix(ricci_generic(g, coords_of(p)))


def scalar_curvature(g: MetricField, p) -> float:
    return float(value_of(scalar_curvature_generic(g, coords_of(p))))


def ricci_norm_sq(g: MetricField, p) -> float:
    x = coords_of(p)
    ginv = mat_inverse(g.matrix(x))
    return float(value_of(sym2_norm_sq(ginv, ricci_generic(g, x))))


def ricci_operator(g: MetricField, p) -> np.ndarray:
    """(1,1) Ricci operator Q^i_j = g^{ik} R_kj; g-self-adjoint."""
    x = coords_of(p)
    ginv = np.array(
        [[float(value_of(v)) for v in row] for row in mat_inverse(g.matrix(x))]
    )
    ric = ricci(g, p).components
    return ginv @ ric


def curvature_bundle(g: MetricField, p) -> CurvatureBundle:
    x = coords_of(p)
    gamma, dgamma = christoffel_with_partials(g, x)
    n = g.domain.dim
    ric = [[0.0] * n for _ in range(n)]
    gtrace = [sum(gamma[k][k][l] for k in range(n)) for l in range(n)]
    for i in range(n):
        for j in range(i, n):
            term = 0.0
            for k in range(n):
                term = term + dgamma[k][k][i][j] - dgamma[i][k][k][j]
            for l in range(n):
                term = term + gtrace[l] * gamma[l][i][j]
                for k in range(n):
                    term = term - gamma[k][i][l] * gamma[l][k][j]
            ric[i][j] = term
            ric[j][i] = term
    ginv = mat_inverse(g.matrix(x))
    return CurvatureBundle(
        christoffel=np.array(gamma, dtype=float),
        ricci=Sym2Tensor.from_matrix(ric),
        scalar=float(value_of(trace_pair(ginv, ric))),
        ricci_norm_sq=float(value_of(sym2_norm_sq(ginv, ric))),
        at=_point(p),
    )


def hessian(g: MetricField, f: ScalarField, p) -> Sym2Tensor:
    return Sym2Tensor.from_matrix(hessian_generic(g, f, coords_of(p)))


def laplacian(g: MetricField, f: ScalarField, p) -> float:
    return float(value_of(laplacian_generic(g, f, coords_of(p))))


def gradient(g: MetricField, f: ScalarField, p) -> np.ndarray:
    """Contravariant gradient components (grad f)^i = g^{ij} d_j f."""
    up, _, _ = gradient_generic(g, f, coords_of(p))
    return np.array([float(value_of(v)) for v in up])


def grad_norm_sq(g: MetricField, f: ScalarField, p) -> float:
    return float(value_of(grad_norm_sq_generic(g, f, coords_of(p))))


def lie_derivative_metric(g: MetricField, X: VectorField, p) -> Sym2Tensor:
    return Sym2Tensor.from_matrix(lie_metric_generic(g, X, coords_of(p)))


def scalar_curvature_field(g: MetricField) -> ScalarField:
    """The scalar-curvature map as a differentiable scalar field."""
    return ScalarField(
        lambda x: scalar_curvature_generic(g, x), g.domain, name="scalar-curvature"
    )


def grad_scalar_curvature(g: MetricField, p) -> np.ndarray:
    """Coordinate partials d_i R (third metric derivatives inside)."""
    x = coords_of(p)
    rf = scalar_curvature_field(g)
    _, dR = value_and_gradient(rf.fn, x)
    return np.array([float(value_of(v)) for v in dR])


def laplacian_scalar_curvature(g: MetricField, p) -> float:
    """Delta R, reaching fourth metric derivatives through the R field."""
    rf = scalar_curvature_field(g)
    return float(value_of(laplacian_generic(g, rf, coords_of(p))))


def divergence_ricci(g: MetricField, p) -> np.ndarray:
    return np.array(
        [float(value_of(v)) for v in divergence_ricci_generic(g, coords_of(p))]
    )
