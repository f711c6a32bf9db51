use chernlab::chart::pack::chern_pack;
use chernlab::linalg::{c, hermitian_angle, CMatrix, C64};
use chernlab::models::model_registry;
use chernlab::sampling::sample_points;
use chernlab::*;

fn kron(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

// g = e^φ δ with φ = -log|z|²: Ω_{ij̄k}^l = -∂_i∂_j̄ φ δ_kl.
fn hopf_omega_low(z: &[C64], i: usize, j: usize, k: usize, l: usize) -> C64 {
    let r2: f64 = z.iter().map(|w| w.norm_sqr()).sum();
    let ddbar = c(kron(i, j) / r2, 0.0) - z[i].conj() * z[j] / (r2 * r2);
    ddbar * (kron(k, l) / r2)
}

#[test]
fn hopf_curvature_matches_closed_form() {
    let m = model_registry("hopf_standard").unwrap();
    for p in sample_points(&m.field.sample_region, 2, 11, 25) {
        let pack = chern_pack(&wirtinger_jet(&m.field, &p, 2).unwrap()).unwrap();
        let mut scale: f64 = 0.0;
        let mut err: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        let exact = hopf_omega_low(&p, i, j, k, l);
                        scale = scale.max(exact.norm());
                        err = err.max((pack.omega_low[[i, j, k, l]] - exact).norm());
                    }
                }
            }
        }
        assert!(err / scale < 1e-6, "omega at {p:?}: {err:e}");
        // ρ_{ij̄} = n (-∂_i∂_j̄ φ)
        let r2 = p.norm().powi(2);
        for i in 0..2 {
            for j in 0..2 {
                let exact = (c(kron(i, j) / r2, 0.0) - p[i].conj() * p[j] / (r2 * r2)) * 2.0;
                assert!((pack.rho[(i, j)] - exact).norm() < 1e-6 * r2.recip());
            }
        }
    }
}

#[test]
fn hopf_torsion_closed_form() {
    let m = model_registry("hopf_standard").unwrap();
    let p = ChartPoint::new(vec![c(0.6, -0.2), c(0.3, 0.7)]);
    let pack = chern_pack(&wirtinger_jet(&m.field, &p, 2).unwrap()).unwrap();
    let r2 = p.norm().powi(2);
    let dphi: Vec<C64> = p.iter().map(|z| -z.conj() / r2).collect();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                let exact = dphi[i] * kron(j, k) - dphi[j] * kron(i, k);
                assert!((pack.torsion[[i, j, k]] - exact).norm() < 1e-8);
            }
        }
    }
}

#[test]
fn hopf_velocity_at_unit_point() {
    // S = I and Q = diag(0, 1) at (1, 0)
    let m = model_registry("hopf_standard").unwrap();
    let p = ChartPoint::real(&[1.0, 0.0]);
    let h = hcf_velocity(&wirtinger_jet(&m.field, &p, 2).unwrap()).unwrap();
    let expect = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(-1.0, 0.0), c(-2.0, 0.0)]));
    assert!((h - expect).norm() < 1e-7);
}

#[test]
fn flat_velocity_vanishes() {
    let m = model_registry("flat(n=3)").unwrap();
    let p = ChartPoint::new(vec![c(0.1, 0.2), c(-0.3, 0.0), c(0.0, 0.5)]);
    let h = hcf_velocity(&wirtinger_jet(&m.field, &p, 2).unwrap()).unwrap();
    assert!(h.norm() < 1e-9);
}

#[test]
fn bianchi_on_models() {
    for spec in [
        "hopf_standard",
        "polynomial_perturbation(seed=5,eps=0.1)",
        "flat",
        "hopf_diagonal(a1=2,a2=1)",
    ] {
        let m = model_registry(spec).unwrap();
        for p in sample_points(&m.field.sample_region, m.field.dim, 3, 10) {
            let r = bianchi_residuals(&wirtinger_jet(&m.field, &p, 3).unwrap()).unwrap();
            assert!(r.max() < 1e-6, "{spec} at {p:?}: {r:?}");
        }
    }
}

#[test]
fn rho_null_direction_is_zeta() {
    let m = model_registry("hopf_standard").unwrap();
    for p in sample_points(&m.field.sample_region, 2, 8, 10) {
        let pack = chern_pack(&wirtinger_jet(&m.field, &p, 2).unwrap()).unwrap();
        let ns = rho_nullspace(&pack.rho, &pack.g).unwrap();
        assert_eq!(ns.rank, 1);
        assert!(hermitian_angle(&pack.g, &ns.basis[0], &p) < 1e-6);
    }
}

#[test]
fn rho_is_closed() {
    let m = model_registry("polynomial_perturbation(seed=2,eps=0.1)").unwrap();
    for p in sample_points(&m.field.sample_region, 2, 4, 5) {
        assert!(rho_closedness_residual(&m.field, &p).unwrap() < 1e-6);
    }
}

#[test]
fn griffiths_signs() {
    let hopf = model_registry("hopf_standard").unwrap();
    let min = griffiths_min(&hopf.field, &SamplerConfig::new(50, 10, 1)).unwrap();
    assert!(min.value >= -1e-9, "{min:?}");
    let gauss = model_registry("gaussian_1d").unwrap();
    let min = griffiths_min(&gauss.field, &SamplerConfig::new(50, 4, 1)).unwrap();
    assert!(min.value < -1e-2, "{min:?}");
}

#[test]
fn unknown_model_and_bad_point() {
    assert!(matches!(model_registry("klein_bottle"), Err(Error::UnknownModel(_))));
    let m = model_registry("hopf_standard").unwrap();
    let origin = ChartPoint::real(&[0.0, 0.0]);
    assert!(matches!(
        wirtinger_jet(&m.field, &origin, 2),
        Err(Error::DomainViolation { .. })
    ));
}
