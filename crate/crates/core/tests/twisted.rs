use chernlab::linalg::{c, subspace_angle, CMatrix, C64};
use chernlab::models::model_registry;
use chernlab::sampling::sample_points;
use chernlab::twisted::*;
use chernlab::*;

#[test]
fn twisted_curvature_formula_on_hopf() {
    let m = model_registry("hopf_standard").unwrap();
    for p in sample_points(&m.field.sample_region, 2, 21, 10) {
        let r = tt_curvature(&wirtinger_jet(&m.field, &p, 3).unwrap())
            .unwrap()
            .residuals;
        assert!(r.discrepancy() < 1e-5, "{r:?}");
        assert!(r.anti_norm < 1e-6);
    }
}

#[test]
fn twisted_curvature_formula_on_perturbation() {
    let m = model_registry("polynomial_perturbation(seed=9,eps=0.15)").unwrap();
    for p in sample_points(&m.field.sample_region, 2, 2, 5) {
        let r = tt_curvature(&wirtinger_jet(&m.field, &p, 3).unwrap())
            .unwrap()
            .residuals;
        assert!(r.discrepancy() < 1e-5, "{r:?}");
    }
}

#[test]
fn twisted_coefficients_transpose_chern() {
    let m = model_registry("hopf_standard").unwrap();
    let p = ChartPoint::new(vec![c(0.9, 0.1), c(0.2, -0.3)]);
    let jet = wirtinger_jet(&m.field, &p, 1).unwrap();
    let tt = tt_coefficients(&jet).unwrap();
    let gamma = chernlab::chart::pack::chern_tensors(&jet).unwrap().gamma.value();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                assert_eq!(tt[[i, j, k]], gamma[[j, i, k]]);
            }
        }
    }
}

#[test]
fn zeta_is_killing_and_parallel() {
    let m = model_registry("hopf_standard").unwrap();
    let zeta = m.zeta.clone().unwrap();
    for p in sample_points(&m.field.sample_region, 2, 4, 10) {
        let k = killing_residual(&m.field, &zeta, &p).unwrap();
        assert!(k.total() < 1e-6, "{k:?}");
        assert!(nt_parallel_residual(&m.field, &zeta, &p).unwrap() < 1e-6);
    }
}

#[test]
fn perturbed_fields_fail_both() {
    let m = model_registry("hopf_standard").unwrap();
    let zeta = m.zeta.clone().unwrap();
    let p = ChartPoint::new(vec![c(0.7, 0.4), c(-0.2, 0.6)]);
    for vf in perturbed_fields(&zeta, 7, 5, 0.2, 0.01) {
        assert!(killing_residual(&m.field, &vf, &p).unwrap().total() > 1e-3);
        assert!(nt_parallel_residual(&m.field, &vf, &p).unwrap() > 1e-3);
    }
}

#[test]
fn coordinate_field_is_not_killing_on_hopf() {
    let m = model_registry("hopf_standard").unwrap();
    let p = ChartPoint::real(&[1.0, 0.0]);
    let d1 = VectorField::coordinate(2, 0);
    assert!(killing_residual(&m.field, &d1, &p).unwrap().total() > 0.1);
}

#[test]
fn flat_transport_is_identity() {
    let m = model_registry("flat").unwrap();
    let path = PathSpec::circle(vec![c(0.0, 0.0), c(0.0, 0.0)], 1, 0.5);
    let r = transport_matrix(&m.field, &path, &TransportOptions::default()).unwrap();
    assert!((r.matrix - CMatrix::identity(2, 2)).norm() < 1e-12);
}

#[test]
fn hopf_transport_preserves_zeta_and_reverses() {
    let m = model_registry("hopf_standard").unwrap();
    let base = vec![c(1.0, 0.0), c(0.0, 0.0)];
    let path = PathSpec::circle(base.clone(), 1, 0.3);
    let opts = TransportOptions::default();
    let fwd = transport_matrix(&m.field, &path, &opts).unwrap();
    let back = transport_matrix(&m.field, &path.reversed(), &opts).unwrap();
    let v = fwd.apply(&base);
    assert!((v[0] - base[0]).norm() < 1e-8 && v[1].norm() < 1e-8);
    let loop_id = &back.matrix * &fwd.matrix;
    let tol = 2.0 * (fwd.error_estimate + back.error_estimate) + 1e-10;
    assert!((loop_id - CMatrix::identity(2, 2)).norm() < tol.max(1e-8));
    // the holonomy is not trivial off ζ
    let w = fwd.apply(&[c(0.0, 0.0), c(1.0, 0.0)]);
    assert!((w[1] - c(1.0, 0.0)).norm() > 1e-2);
}

#[test]
fn open_path_composition() {
    let m = model_registry("hopf_standard").unwrap();
    let path = PathSpec::segment(vec![c(0.8, 0.1), c(0.1, 0.2)], vec![c(0.6, -0.3), c(0.5, 0.4)]);
    let opts = TransportOptions::default();
    let whole = transport_matrix(&m.field, &path, &opts).unwrap().matrix;
    let a = transport_matrix(&m.field, &path.portion(0.0, 0.4), &opts)
        .unwrap()
        .matrix;
    let b = transport_matrix(&m.field, &path.portion(0.4, 1.0), &opts)
        .unwrap()
        .matrix;
    assert!((whole - b * a).norm() < 1e-8);
}

#[test]
fn hopf_fixed_subspace_is_zeta_line() {
    let m = model_registry("hopf_standard").unwrap();
    let sample = sample_holonomy(&m.field, &m.loops, 1, 12).unwrap();
    let f = fixed_subspace(&sample);
    assert_eq!(f.dim, 1, "{f:?}");
    let zeta = vec![m.loops.base.clone()];
    assert!(subspace_angle(&sample.metric, &f.basis, &zeta) < 1e-6);
    assert!(f.spectral_gap.unwrap() > 1e3);
}

#[test]
fn flat_fixed_subspace_is_everything() {
    let m = model_registry("flat").unwrap();
    let f = fixed_subspace(&sample_holonomy(&m.field, &m.loops, 1, 6).unwrap());
    assert_eq!(f.dim, 2);
}

#[test]
fn loops_are_seeded_and_inside() {
    let m = model_registry("hopf_standard").unwrap();
    let a = random_loops(&m.loops, 5, 6).unwrap();
    let b = random_loops(&m.loops, 5, 6).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.to_json(), y.to_json());
        assert!(x.closed());
        assert!(x.stays_in(&m.loops.region, 200));
    }
}

fn affine_fields() -> Vec<VectorField> {
    // left-invariant fields of z ↦ (az + b): X_0 = z_0 ∂_0, X_1 = z_0 ∂_1
    vec![
        VectorField::new("X0", 2, |z: &[C64]| vec![z[0], c(0.0, 0.0)]),
        VectorField::new("X1", 2, |z: &[C64]| vec![c(0.0, 0.0), z[0]]),
    ]
}

#[test]
fn affine_brackets_recover_structure_constants() {
    let points: Vec<ChartPoint> = (0..6)
        .map(|k| ChartPoint::new(vec![c(1.0 + 0.1 * k as f64, 0.2 * k as f64), c(-0.3, 0.1 * k as f64)]))
        .collect();
    let b = bracket_structure(&affine_fields(), &points).unwrap();
    assert!(b.variation < 1e-6);
    assert!(b.out_of_span < 1e-6);
    for p in 0..points.len() {
        assert!((b.coefficient(p, 0, 1, 1) - c(1.0, 0.0)).norm() < 1e-6);
        assert!((b.coefficient(p, 1, 0, 1) + c(1.0, 0.0)).norm() < 1e-6);
        assert!(b.coefficient(p, 0, 1, 0).norm() < 1e-6);
    }
}

#[test]
fn coordinate_brackets_vanish() {
    let fields = vec![VectorField::coordinate(2, 0), VectorField::coordinate(2, 1)];
    let points = vec![ChartPoint::real(&[0.1, 0.2]), ChartPoint::real(&[-0.5, 0.3])];
    let b = bracket_structure(&fields, &points).unwrap();
    assert!(b.variation < 1e-12);
    assert!(b.coefficients.iter().flatten().all(|z| z.norm() < 1e-10));
}

#[test]
fn dependent_fields_rejected() {
    let fields = vec![VectorField::coordinate(2, 0), VectorField::coordinate(2, 0)];
    let r = bracket_structure(&fields, &[ChartPoint::real(&[0.1, 0.2])]);
    assert!(matches!(r, Err(Error::DependentFields { .. })));
}
