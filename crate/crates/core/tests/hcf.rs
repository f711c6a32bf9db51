use chernlab::hcf::*;
use chernlab::linalg::{c, is_positive_definite, CMatrix};
use chernlab::models::*;
use chernlab::sampling::sample_points;
use chernlab::*;
use nalgebra::DVector;

fn diag(v: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&DVector::from_vec(v.iter().map(|&x| c(x, 0.0)).collect()))
}

fn affine(g: CMatrix) -> FrameMetric {
    FrameMetric::new(LieAlgebraData::builtin("affine").unwrap(), g).unwrap()
}

#[test]
fn affine_unit_metric_decays_exponentially() {
    let traj = flow_invariant(&affine(diag(&[1.0, 1.0])), 1.0, 20).unwrap();
    for (t, g) in traj.times.iter().zip(&traj.metrics) {
        assert!((g[(0, 0)].re - 1.0).abs() < 1e-14);
        assert!((g[(1, 1)].re - (-t).exp()).abs() < 1e-7 * (-t).exp());
        assert!(g[(0, 1)].norm() < 1e-15);
    }
}

#[test]
fn affine_step_halving_is_fourth_order() {
    let exact = (-1.0f64).exp();
    let err = |steps| {
        let traj = flow_invariant(&affine(diag(&[1.0, 1.0])), 1.0, steps).unwrap();
        (traj.final_metric()[(1, 1)].re - exact).abs()
    };
    let (coarse, fine) = (err(8), err(16));
    assert!(coarse / fine >= 8.0, "{coarse:e} {fine:e}");
}

#[test]
fn affine_non_diagonal_start_stays_positive() {
    let g0 = CMatrix::from_row_slice(2, 2, &[c(1.5, 0.0), c(0.4, 0.3), c(0.4, -0.3), c(1.0, 0.0)]);
    let traj = flow_invariant(&affine(g0), 2.0, 40).unwrap();
    for g in &traj.metrics {
        assert!(is_positive_definite(g));
    }
    let rates = traj.log_det_rates().unwrap();
    assert!(rates.iter().all(|r| *r <= 1e-14), "{rates:?}");
    assert!(traj.step_errors.iter().all(|e| *e < 1e-6));
}

#[test]
fn scaled_metrics_follow_rescaled_time() {
    // Q(λg) = Q(g), so λ g(t) solves the flow at time λt
    let sl2 = LieAlgebraData::builtin("sl2").unwrap();
    let g0 = diag(&[2.0, 3.0, 2.5]);
    let base = flow_invariant(&FrameMetric::new(sl2.clone(), g0.clone()).unwrap(), 0.1, 40).unwrap();
    let scaled = flow_invariant(&FrameMetric::new(sl2, &g0 * c(4.0, 0.0)).unwrap(), 0.4, 40).unwrap();
    let diff = scaled.final_metric() - base.final_metric() * c(4.0, 0.0);
    assert!(diff.norm() < 1e-9, "{:e}", diff.norm());
}

#[test]
fn sl2_from_identity_loses_positivity() {
    let sl2 = LieAlgebraData::builtin("sl2").unwrap();
    match flow_invariant(&FrameMetric::identity(sl2), 1.0, 20) {
        Err(Error::PositivityLost { t_lo, t_hi }) => {
            assert!(t_lo <= t_hi && t_lo > 0.3 && t_hi < 0.45, "{t_lo} {t_hi}");
        }
        other => panic!("expected positivity loss, got {other:?}"),
    }
}

#[test]
fn persistence_on_affine_and_sl2() {
    let affine_report = parallel_persistence_check(&affine(diag(&[1.0, 1.0])), 1.0, 20).unwrap();
    assert!(affine_report.residual < 1e-8);
    assert!(affine_report.chart_omega < 1e-6);
    let sl2 = LieAlgebraData::builtin("sl2").unwrap();
    let fm = FrameMetric::new(sl2, diag(&[10.0, 10.0, 10.0])).unwrap();
    let r = parallel_persistence_check(&fm, 1.0, 20).unwrap();
    assert!(r.residual < 1e-8);
    assert!(r.chart_twisted < 1e-8);
    assert_eq!(r.chart_times, vec![0.0, 0.5, 1.0]);
}

#[test]
fn trajectory_exports() {
    let traj = flow_invariant(&affine(diag(&[1.0, 2.0])), 0.5, 5).unwrap();
    let json = traj.to_json();
    assert_eq!(json["times"].as_array().unwrap().len(), 6);
    assert_eq!(json["metrics"].as_array().unwrap().len(), 6);
    let csv = traj.to_csv();
    assert!(csv.starts_with("t,g00_re,g00_im,g01_re"));
}

#[test]
fn hopf_variation_formulas() {
    let m = model_registry("hopf_standard").unwrap();
    for p in sample_points(&m.field.sample_region, 2, 17, 5) {
        let r = variation_check(&m.field, &HSource::Hcf, &p, 1e-3).unwrap();
        assert!(r.max_residual() < 1e-4, "{r:?}");
        assert!(r.residual_lemma.unwrap() < 1e-4);
        assert!(r.residual_lemma_direct.unwrap() < 1e-8);
        assert!((r.observed_order - 2.0).abs() < 0.3);
        assert_eq!(r.residual_anti, 0.0);
    }
}

#[test]
fn variation_formulas_on_perturbation() {
    let m = model_registry("polynomial_perturbation(seed=4,eps=0.2)").unwrap();
    let p = ChartPoint::new(vec![c(0.15, -0.2), c(0.3, 0.05)]);
    let r = variation_check(&m.field, &HSource::Hcf, &p, 1e-3).unwrap();
    assert!(r.max_residual() < 1e-4, "{r:?}");
}

#[test]
fn explicit_variation_on_hopf() {
    let m = model_registry("hopf_standard").unwrap();
    let h = MetricField::new("bump", 2, Region::Everywhere, Region::Everywhere, |z| {
        let a = z[0] * z[1].conj();
        CMatrix::from_row_slice(2, 2, &[c(1.0 + z[0].norm_sqr(), 0.0), a, a.conj(), c(0.5, 0.0)])
    });
    let p = ChartPoint::new(vec![c(0.9, 0.2), c(-0.3, 0.4)]);
    let r = variation_check(&m.field, &HSource::Explicit(h), &p, 1e-3).unwrap();
    assert!(r.residual_gamma < 1e-6 && r.residual_torsion < 1e-6, "{r:?}");
    assert!(r.residual_lemma.is_none());
}

#[test]
fn rejects_bad_epsilon() {
    let m = model_registry("flat").unwrap();
    let p = ChartPoint::real(&[0.0, 0.0]);
    assert!(variation_check(&m.field, &HSource::Hcf, &p, 0.0).is_err());
}
