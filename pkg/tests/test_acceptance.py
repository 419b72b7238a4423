"""Acceptance suite: every exit criterion at its stated tolerance.

Each test prints one pass/fail line; the assertions pin the tolerances,
point counts, and runtime bounds exactly as contracted.
"""

import json
import math
import time

import numpy as np

from ryslab import catalog, identities, quadrature, solver
from ryslab import curvature as cv
from ryslab.cli import main as cli_main
from ryslab.geometry import sample_points
from ryslab.soliton import (
    SolitonClass,
    SolitonInstance,
    SolitonKind,
    SolitonParams,
    classify,
    concircular_conclusions,
    concircular_defect,
    defining_residual,
)

UNIT_VOLUME = 2.0 * math.pi**2


def _line(num: int, label: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    suffix = f"  ({detail})" if detail else ""
    print(f"[{status}] criterion {num}: {label}{suffix}")


def test_criterion_1_curvature_oracle():
    start = time.perf_counter()
    worst = 0.0
    entry = catalog.sphere_entry(1.0)
    for chart in entry.charts:
        for p in sample_points(chart, 3, seed=1):
            gm = entry.metric.matrix_np(p.coords)
            ric = cv.ricci(entry.metric, p).components
            worst = max(worst, float(np.max(np.abs(ric - 2.0 * gm))))
            worst = max(worst, abs(cv.scalar_curvature(entry.metric, p) - 6.0))
    h3 = catalog.hyperbolic_entry()
    for p in sample_points(h3.metric.domain, 3, seed=2):
        worst = max(worst, abs(cv.scalar_curvature(h3.metric, p) + 6.0))
    for radius in (0.5, 1.0, 2.0):
        sp = catalog.sphere_entry(radius)
        p = sample_points(sp.charts[0], 2, seed=3)[0]
        expected = 6.0 / radius**2
        worst = max(worst, abs(cv.scalar_curvature(sp.metric, p) - expected))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-7 and elapsed < 1.0
    _line(1, "curvature oracle on spheres and hyperbolic space", ok,
          f"worst gap {worst:.2e}, {elapsed:.2f}s")
    assert worst <= 1e-7
    assert elapsed < 1.0


def test_criterion_2_universal_identity_suite():
    start = time.perf_counter()
    worst = 0.0
    for k in range(5):
        entry = catalog.make_perturbed_flat(1e-2, 7 + k)
        f = catalog.random_polynomial_field(entry.metric.domain, seed=1007 + k)
        for p in sample_points(entry.metric.domain, 100, seed=2007 + k):
            for res in identities.universal_residuals(entry.metric, f, p):
                worst = max(worst, res.rel_gap)
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-6 and elapsed < 10.0
    _line(2, "Bianchi / commutation / Bochner on 5 random geometries x 100 points",
          ok, f"worst rel gap {worst:.2e}, {elapsed:.1f}s")
    assert worst <= 1e-6
    assert elapsed < 10.0


def test_criterion_3_soliton_residuals_and_controls():
    worst = 0.0
    for lam in (-2.0, 0.0, 1.0, 2.0):
        inst = catalog.gaussian_instance(SolitonParams(1.0, 0.0, lam))
        for p in sample_points(inst.metric.domain, 25, seed=11):
            worst = max(worst, defining_residual(inst, p).max_abs())
    for build, params in (
        (catalog.einstein_sphere_instance, SolitonParams(1.0, 0.0, -2.0)),
        (catalog.einstein_sphere_instance, SolitonParams(1.0, 2.0, 4.0)),
        (catalog.einstein_hyperbolic_instance, SolitonParams(1.0, 0.0, 2.0)),
    ):
        inst = build(params)
        for chart in inst.entry.charts:
            for p in sample_points(chart, 15, seed=12):
                worst = max(worst, defining_residual(inst, p).max_abs())

    # negative controls must overshoot 10x the tolerance
    controls = []
    off = catalog.einstein_sphere_instance(SolitonParams(1.0, 0.0, 0.0))
    p = sample_points(off.entry.charts[0], 1, seed=13)[0]
    controls.append(defining_residual(off, p).max_abs())
    bad_mu = SolitonInstance(
        SolitonParams(1.0, 0.0, 1.0, 1.0),
        catalog.flat_entry(3).metric,
        SolitonKind.GEN_GRYS,
        potential=catalog.gaussian_potential(catalog.flat_entry(3).metric.domain, 1.0),
    )
    controls.append(defining_residual(bad_mu, (0.6, 0.5, 0.4)).max_abs())
    control_min = min(controls)
    ok = worst <= 1e-8 and control_min > 10 * 1e-8
    _line(3, "defining residuals vanish; negative controls exceed 10x tolerance",
          ok, f"worst {worst:.2e}, weakest control {control_min:.2e}")
    assert worst <= 1e-8
    assert control_min > 1e-7


def test_criterion_4_derived_identity_ladder():
    cases = [
        catalog.gaussian_instance(SolitonParams(1.0, 0.0, 2.0)),
        catalog.gaussian_instance(SolitonParams(1.0, 0.5, -2.0)),
        catalog.einstein_sphere_instance(SolitonParams(1.0, 0.0, -2.0)),
        catalog.einstein_sphere_instance(SolitonParams(1.0, 0.0, -2.0, 1.0)),
        catalog.einstein_hyperbolic_instance(SolitonParams(1.0, 0.0, 2.0)),
        catalog.cylinder_instance(SolitonParams(0.0, 1.0, 1.0)),
        catalog.flat_product_instance(SolitonParams(1.0, 0.0, 0.0)),
    ]
    worst_trace = worst_grad = worst_lap = 0.0
    for inst in cases:
        entry = inst.entry or catalog.flat_entry(3)
        pts = sample_points(entry.charts[0], 20, seed=17)
        for p in pts:
            worst_trace = max(worst_trace, identities.check_trace_identity(inst, p).rel_gap)
            worst_grad = max(worst_grad, identities.check_gradient_identity(inst, p).rel_gap)
            worst_lap = max(worst_lap, identities.check_laplacian_identity(inst, p).rel_gap)
    ok = worst_trace <= 1e-8 and worst_grad <= 1e-6 and worst_lap <= 1e-4
    _line(4, "trace / gradient / Laplacian identity ladder on verified instances",
          ok, f"{worst_trace:.1e} / {worst_grad:.1e} / {worst_lap:.1e}")
    assert worst_trace <= 1e-8
    assert worst_grad <= 1e-6
    assert worst_lap <= 1e-4


def test_criterion_5_compact_scalar_constancy():
    inst = catalog.einstein_sphere_instance(SolitonParams(1.0, 2.0, 4.0))
    pts = [
        p
        for chart in inst.entry.charts
        for p in sample_points(chart, 10, seed=19)
    ]
    out = identities.check_scalar_constancy(inst, pts, tol=1e-9)
    ok = (
        abs(out["predicted"] - 6.0) < 1e-12
        and out["gap"] <= 1e-9 * (1 + abs(out["predicted"]))
        and out["sign_law_applies"]
        and out["sign_consistent"]
        and out["soliton_class"] is SolitonClass.EXPANDING
    )
    _line(5, "compact scalar constancy R = 2n lam/(n beta - 2 alpha) with sign law",
          ok, f"gap {out['gap']:.2e}")
    assert ok


def test_criterion_6_integral_machinery():
    entry = catalog.sphere_entry(1.0)
    vol = quadrature.volume(entry, 24)
    vol_rel = abs(vol - UNIT_VOLUME) / UNIT_VOLUME

    worst_div = 0.0
    for seed in range(20):
        rng = np.random.default_rng(300 + seed)
        coef = rng.uniform(-1.0, 1.0, size=(4, 4))
        lin = rng.uniform(-1.0, 1.0, size=4)

        def ambient_fn(X, coef=coef, lin=lin):
            total = 0.0
            for i in range(4):
                total = total + lin[i] * X[i]
                for j in range(4):
                    total = total + coef[i][j] * X[i] * X[j]
            return total

        field = quadrature.ManifoldScalarField.from_ambient(entry, ambient_fn)
        out = quadrature.integrate_laplacian(entry, field, 12)
        worst_div = max(worst_div, abs(out["integral"]) / out["scale"])

    steady = catalog.einstein_sphere_instance(SolitonParams(1.5, 1.0, 0.0))
    steady_out = quadrature.check_steady_integral_inequality(steady, 12)
    equality_gap = max(abs(steady_out["lhs"]), abs(steady_out["rhs"]))
    ok = (
        vol_rel <= 1e-5
        and worst_div <= 1e-5
        and steady_out["holds"]
        and equality_gap <= 1e-6
    )
    _line(6, "volume 2 pi^2, divergence theorem x20, steady integral equality",
          ok, f"vol rel {vol_rel:.2e}, div {worst_div:.2e}, eq {equality_gap:.2e}")
    assert vol_rel <= 1e-5
    assert worst_div <= 1e-5
    assert steady_out["holds"] and equality_gap <= 1e-6


def test_criterion_7_splitting_geometry():
    worst_split = 0.0
    gaussian = catalog.gaussian_instance(SolitonParams(1.0, 0.0, 2.0))
    for p in sample_points(gaussian.metric.domain, 20, seed=23):
        worst_split = max(
            worst_split, identities.check_splitting_identity(gaussian, p).rel_gap
        )
    cylinder = catalog.cylinder_instance(SolitonParams(0.0, 1.0, 1.0))
    cyl_pts = sample_points(cylinder.metric.domain, 20, seed=29)
    for p in cyl_pts:
        worst_split = max(
            worst_split, identities.check_splitting_identity(cylinder, p).rel_gap
        )
    flags = identities.check_affine_splitting_flags(cylinder, cyl_pts)

    product = catalog.flat_product_instance(SolitonParams(1.0, 0.0, 0.0))
    prod_pts = sample_points(product.metric.domain, 20, seed=31)
    ric_max = max(cv.ricci(product.metric, p).max_abs() for p in prod_pts)
    ok = (
        worst_split <= 1e-5
        and flags["hessian_norm"] <= 1e-9
        and flags["grad_norm_variation"] <= 1e-9
        and ric_max <= 1e-10
        and product.params.lam == 0.0
    )
    _line(7, "splitting identity, affine flags, steady Ricci-flat product",
          ok, f"split {worst_split:.1e}, hess {flags['hessian_norm']:.1e}")
    assert worst_split <= 1e-5
    assert flags["hessian_norm"] <= 1e-9
    assert flags["grad_norm_variation"] <= 1e-9
    assert ric_max <= 1e-10
    assert product.params.lam == 0.0


def test_criterion_8_concircular_reduction():
    inst = catalog.concircular_flat_instance(SolitonParams(1.0, 0.0, -1.0))
    pts = sample_points(inst.metric.domain, 20, seed=37)
    worst_defect = worst_einstein = worst_scalar = worst_eigen = 0.0
    classes_ok = True
    for p in pts:
        worst_defect = max(
            worst_defect,
            float(np.max(np.abs(concircular_defect(inst.metric, inst.vector_field, 1.0, p)))),
        )
        out = concircular_conclusions(inst.metric, inst.params, 1.0, p)
        worst_einstein = max(worst_einstein, out["einstein_defect"])
        measured = cv.scalar_curvature(inst.metric, p)
        worst_scalar = max(worst_scalar, abs(measured - out["scalar_pred"]))
        q = cv.ricci_operator(inst.metric, p)
        worst_eigen = max(
            worst_eigen,
            float(np.max(np.abs(q - out["eigenvalue_pred"] * np.eye(3)))),
        )
        classes_ok = classes_ok and out["class"] is classify(inst.params)
    ok = (
        worst_defect <= 1e-10
        and worst_einstein <= 1e-10
        and worst_scalar <= 1e-10
        and worst_eigen <= 1e-10
        and classes_ok
    )
    _line(8, "concircular field forces Einstein with predicted eigenvalue and class",
          ok, f"defect {worst_defect:.1e}, eigen {worst_eigen:.1e}")
    assert ok


def test_criterion_9_solver_recovery():
    start = time.perf_counter()
    grid = solver.make_grid(128)
    prof = solver.solve_radial(
        SolitonParams(1.0, 0.0, 2.0, 0.0), solver.Background.flat(), grid
    )
    elapsed = time.perf_counter() - start
    expected = -(grid**2) + grid[0] ** 2
    err = float(np.max(np.abs(prof.values - expected)))

    bg = solver.Background.sphere(1.0)
    params = SolitonParams(1.0, 0.3, -0.7, 0.0)
    values = np.cos(grid)
    check = solver.RadialProfile(grid, values, params, bg)
    jac = solver.residual_jacobian(check)
    eps = 1e-6
    scale = 1.0 + float(np.max(np.abs(jac)))
    jac_gap = 0.0
    for k in range(0, len(grid), 16):
        vp, vm = values.copy(), values.copy()
        vp[k] += eps
        vm[k] -= eps
        rp = solver.radial_residual(solver.RadialProfile(grid, vp, params, bg))
        rm = solver.radial_residual(solver.RadialProfile(grid, vm, params, bg))
        jac_gap = max(jac_gap, float(np.max(np.abs(jac[:, k] - (rp - rm) / (2 * eps)))))
    jac_rel = jac_gap / scale
    ok = err <= 1e-6 and elapsed < 5.0 and jac_rel <= 1e-6
    _line(9, "solver recovers the Gaussian potential; Jacobian matches FD",
          ok, f"err {err:.1e}, {elapsed:.2f}s, jac {jac_rel:.1e}")
    assert err <= 1e-6
    assert elapsed < 5.0
    assert jac_rel <= 1e-6


def test_criterion_10_determinism_and_runtime(tmp_path, capsys):
    out = tmp_path / "verify.json"
    argv = ["verify", "--points", "200", "--seed", "7", "--out", str(out)]
    start = time.perf_counter()
    code1 = cli_main(argv)
    first_time = time.perf_counter() - start
    first = out.read_bytes()
    start = time.perf_counter()
    code2 = cli_main(argv)
    second_time = time.perf_counter() - start
    second = out.read_bytes()
    payload = json.loads(first)
    ok = (
        code1 == 0
        and code2 == 0
        and first == second
        and first_time < 60.0
        and second_time < 60.0
        and payload["summary"]["fail"] == 0
    )
    with capsys.disabled():
        _line(10, "full verify suite: byte-identical reports under 60 s",
              ok, f"{first_time:.1f}s / {second_time:.1f}s, {payload['summary']['total']} checks")
    assert code1 == 0 and code2 == 0
    assert first == second
    assert first_time < 60.0 and second_time < 60.0
