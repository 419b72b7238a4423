"""Small dense linear algebra generic over floats and dual towers.

The curvature pipeline must run at dual-number points (that is how
derivatives of curvature are taken), so inversion and contractions are
written for nested lists whose entries are floats or :class:`ryslab.ad.Dual`
towers.  Pivoting decisions use the float value part only.
"""

from __future__ import annotations

import numpy as np

from .ad import Dual, value_of
from .errors import MetricSingular

CONDITION_LIMIT = 1e10


def mat_inverse(m, cond_limit: float = CONDITION_LIMIT):
    """Inverse of a small dense matrix with generic entries.

    Dimensions 2 and 3 (the hot path) use the closed-form adjugate;
    larger matrices fall back to Gauss-Jordan with partial pivoting on
    value magnitude.  Raises MetricSingular when the matrix is not
    invertible to the conditioning threshold.
    """
    n = len(m)
    if n == 2:
        a, b = m[0]
        c, d = m[1]
        det = a * d - b * c
        _guard_det(det, m, n, cond_limit)
        if isinstance(det, Dual):
            return [[d / det, (-b) / det], [(-c) / det, a / det]]
        inv = 1.0 / det
        return [[d * inv, -b * inv], [-c * inv, a * inv]]
    if n == 3:
        (a, b, c), (d, e, f), (g, h, i) = m
        co00 = e * i - f * h
        co01 = c * h - b * i
        co02 = b * f - c * e
        co10 = f * g - d * i
        co11 = a * i - c * g
        co12 = c * d - a * f
        co20 = d * h - e * g
        co21 = b * g - a * h
        co22 = a * e - b * d
        det = a * co00 + b * co10 + c * co20
        _guard_det(det, m, n, cond_limit)
        if isinstance(det, Dual):
            return [
                [co00 / det, co01 / det, co02 / det],
                [co10 / det, co11 / det, co12 / det],
                [co20 / det, co21 / det, co22 / det],
            ]
        inv = 1.0 / det
        return [
            [co00 * inv, co01 * inv, co02 * inv],
            [co10 * inv, co11 * inv, co12 * inv],
            [co20 * inv, co21 * inv, co22 * inv],
        ]
    return _gauss_jordan_inverse(m, cond_limit)


def _guard_det(det, m, n, cond_limit):
    dv = np.abs(value_of(det))
    scale = value_of(m[0][0])
    scale = np.abs(scale)
    for i in range(n):
        for j in range(n):
            scale = np.maximum(scale, np.abs(value_of(m[i][j])))
    if np.any(dv * cond_limit <= scale**n):
        bad = float(np.min(dv)) if np.ndim(dv) else float(dv)
        raise MetricSingular(
            f"determinant {bad:.3e} below conditioning floor (threshold {cond_limit:.1e})"
        )


def _gauss_jordan_inverse(m, cond_limit: float = CONDITION_LIMIT):
    n = len(m)
    a = [row[:] for row in m]
    inv = [[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)]
    scale = max(abs(value_of(a[i][j])) for i in range(n) for j in range(n))
    if scale == 0.0:
        raise MetricSingular("zero matrix")
    floor = scale / cond_limit
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(value_of(a[r][col])))
        if abs(value_of(a[piv][col])) <= floor:
            raise MetricSingular(
                f"pivot {value_of(a[piv][col]):.3e} below conditioning floor "
                f"{floor:.3e}"
            )
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            inv[col], inv[piv] = inv[piv], inv[col]
        d = a[col][col]
        arow, irow = a[col], inv[col]
        for j in range(n):
            arow[j] = arow[j] / d
            irow[j] = irow[j] / d
        for r in range(n):
            if r == col:
                continue
            f = a[r][col]
            if isinstance(f, float) and f == 0.0:
                continue
            ar, ir = a[r], inv[r]
            for j in range(n):
                ar[j] = ar[j] - f * arow[j]
                ir[j] = ir[j] - f * irow[j]
    return inv


def mat_det(m):
    """Determinant with generic entries; closed form for n <= 3."""
    n = len(m)
    if n == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    if n == 3:
        (a, b, c), (d, e, f), (g, h, i) = m
        return (
            a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)
        )
    a = [row[:] for row in m]
    det = 1.0
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(value_of(a[r][col])))
        if abs(value_of(a[piv][col])) == 0.0:
            return 0.0
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        d = a[col][col]
        det = det * d
        for r in range(col + 1, n):
            f = a[r][col] / d
            if isinstance(f, float) and f == 0.0:
                continue
            for j in range(col, n):
                a[r][j] = a[r][j] - f * a[col][j]
    return det


def mat_vec(m, v):
    n = len(m)
    return [sum(m[i][j] * v[j] for j in range(len(v))) for i in range(n)]


def vec_dot(u, v):
    return sum(u[i] * v[i] for i in range(len(u)))


def trace_pair(ginv, t):
    """g^{ij} T_ij for matching square matrices."""
    n = len(ginv)
    return sum(ginv[i][j] * t[i][j] for i in range(n) for j in range(n))


def sym2_norm_sq(ginv, t):
    """|T|^2 = T_ij T_kl g^{ik} g^{jl} with both indices raised."""
    n = len(ginv)
    total = 0.0
    for i in range(n):
        for j in range(n):
            raised = sum(
                ginv[i][k] * ginv[j][l] * t[k][l] for k in range(n) for l in range(n)
            )
            total = total + t[i][j] * raised
    return total


def symmetrize(m):
    n = len(m)
    return [[(m[i][j] + m[j][i]) * 0.5 for j in range(n)] for i in range(n)]
