use chernlab::linalg::{c, subspace_angle, CMatrix, C64};
use chernlab::models::frame::{frame_geometry, frame_twisted_coefficients};
use chernlab::models::lie_chart::{commuting_fields, frame_fields};
use chernlab::models::*;
use chernlab::twisted::bracket_structure;
use chernlab::*;

fn id(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

#[test]
fn sl2_borel_quotient_has_no_null_directions() {
    let sl2 = LieAlgebraData::builtin("sl2").unwrap();
    let borel = SubalgebraData::named(&sl2, "borel").unwrap();
    let check = null_rho_equals_normalizer_check(&sl2, &borel, &id(3), 3, 40).unwrap();
    assert!(check.passed(1e-8), "{check:?}");
    assert_eq!(check.quotient_null_dim, 0);
    assert_eq!(check.dim_normalizer, 2);
    assert!(subspace_angle(&id(3), &normalizer(&sl2, &borel), &borel.basis) < 1e-12);
}

#[test]
fn heisenberg_center_has_vanishing_rho() {
    let h = LieAlgebraData::builtin("heisenberg").unwrap();
    let center = SubalgebraData::named(&h, "center").unwrap();
    assert_eq!(center.dim(), 1);
    let r = rho_form(&h, &center, &id(3)).unwrap();
    assert!(r.norm() < 1e-15);
    assert_eq!(normalizer(&h, &center).len(), 3);
    let check = null_rho_equals_normalizer_check(&h, &center, &id(3), 3, 20).unwrap();
    assert!(check.passed(1e-8));
    assert_eq!(check.dim_null, 3);
}

#[test]
fn normalizer_check_with_skewed_metric() {
    let sl2 = LieAlgebraData::builtin("sl2").unwrap();
    let borel = SubalgebraData::named(&sl2, "borel").unwrap();
    let h = CMatrix::from_row_slice(
        3,
        3,
        &[
            c(2.0, 0.0),
            c(0.3, 0.1),
            c(0.0, 0.0),
            c(0.3, -0.1),
            c(1.0, 0.0),
            c(0.2, 0.0),
            c(0.0, 0.0),
            c(0.2, 0.0),
            c(1.5, 0.0),
        ],
    );
    let check = null_rho_equals_normalizer_check(&sl2, &borel, &h, 1, 40).unwrap();
    assert!(check.passed(1e-8), "{check:?}");
}

#[test]
fn submersion_rho_scales_quadratically() {
    let sum = LieAlgebraData::builtin("abelian_plus_affine").unwrap();
    let sub = SubalgebraData::named(&sum, "span:1").unwrap();
    let v = vec![c(0.3, 0.1), c(-0.2, 0.4), c(0.5, 0.0)];
    let r1 = submersion_rho(&sum, &sub, &id(3), &v).unwrap();
    let v2: Vec<C64> = v.iter().map(|z| z * c(0.0, 3.0)).collect();
    let r2 = submersion_rho(&sum, &sub, &id(3), &v2).unwrap();
    assert!((r2 - 9.0 * r1).abs() < 1e-12 * (1.0 + r2));
}

#[test]
fn frame_torsion_and_q() {
    for name in LieAlgebraData::builtin_names() {
        let alg = LieAlgebraData::builtin(name).unwrap();
        let geo = frame_geometry(&FrameMetric::identity(alg.clone())).unwrap();
        let n = alg.dim;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    assert_eq!(geo.torsion[[i, j, k]], -alg.coef(i, j, k));
                }
            }
        }
        assert!(geo.omega_vanishes);
        if alg.is_abelian() {
            assert!(geo.q.norm() == 0.0);
        }
    }
}

#[test]
fn frame_connection_is_adjoint() {
    let alg = LieAlgebraData::builtin("sl2").unwrap();
    let a = frame_twisted_coefficients(&alg);
    for (i, ai) in a.iter().enumerate() {
        assert_eq!(ai, &alg.ad(&alg.basis_vector(i)));
    }
    assert_eq!(frame_fixed_subspace(&FrameMetric::identity(alg)).dim, 3);
}

#[test]
fn lie_chart_is_chern_flat_at_origin() {
    for name in ["affine", "heisenberg", "sl2"] {
        let fm = FrameMetric::identity(LieAlgebraData::builtin(name).unwrap());
        let (omega, twisted) = chernlab::hcf::chart_cross_check(&fm).unwrap();
        assert!(omega < 1e-6, "{name}: {omega:e}");
        assert!(twisted < 1e-8, "{name}: {twisted:e}");
    }
}

#[test]
fn chart_frames_bracket_like_the_algebra_at_origin() {
    for name in ["affine", "heisenberg", "sl2"] {
        let alg = LieAlgebraData::builtin(name).unwrap();
        let n = alg.dim;
        let origin = ChartPoint::new(vec![c(0.0, 0.0); n]);
        let b = bracket_structure(&frame_fields(&alg), &[origin.clone()]).unwrap();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    assert!((b.coefficient(0, i, j, k) - alg.coef(i, j, k)).norm() < 1e-8, "{name}");
                }
            }
        }
        // X and Y commute at the origin
        let mut both = frame_fields(&alg);
        both.truncate(1);
        both.push(commuting_fields(&alg)[1].clone());
        if alg.coef(0, 1, 0).norm() + alg.coef(0, 1, 1).norm() > 0.0 {
            let b = bracket_structure(&both, &[origin]).unwrap();
            assert!(b.coefficients[0].iter().all(|z| z.norm() < 1e-8), "{name}");
        }
    }
}

#[test]
fn algebra_json_roundtrip_with_subalgebra() {
    let text =
        r#"{"dim": 2, "c": [[0, 1, 1, 1.0, 0.0], [1, 0, 1, -1.0, 0.0]], "subalgebra": [[[0.0, 0.0], [1.0, 0.0]]]}"#;
    let value: serde_json::Value = serde_json::from_str(text).unwrap();
    let parsed = LieAlgebraData::from_json("custom", &value);
    let (alg, sub) = parsed.unwrap();
    assert_eq!(alg.coef(0, 1, 1), c(1.0, 0.0));
    assert_eq!(alg.coef(1, 0, 1), c(-1.0, 0.0));
    assert_eq!(sub.unwrap().len(), 1);
}

#[test]
fn broken_jacobi_is_rejected() {
    // [e0, e1] = e1, [e1, e2] = e0, [e0, e2] = 0 violates Jacobi
    let r = LieAlgebraData::from_brackets("bad", 3, &[(0, 1, 1, c(1.0, 0.0)), (1, 2, 0, c(1.0, 0.0))]);
    assert!(matches!(r, Err(Error::InvalidAlgebra(_))));
}

#[test]
fn registry_models_have_expected_f_dims() {
    assert_eq!(model_registry("hopf_standard").unwrap().expected_f_dim, Some(1));
    assert_eq!(model_registry("flat(n=3)").unwrap().expected_f_dim, Some(3));
    assert!(model_registry("hopf_diagonal(a1=1,a2=2)").is_err());
    for name in MODEL_NAMES {
        model_registry(name).unwrap();
    }
}
