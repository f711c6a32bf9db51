use chernlab::chart::griffiths::griffiths_value;
use chernlab::chart::pack::{chern_pack, q_from_torsion};
use chernlab::chart::tensor::CTensor;
use chernlab::linalg::{c, smallest_eigenvalue, subspace_angle, CMatrix, C64};
use chernlab::models::*;
use chernlab::twisted::*;
use chernlab::*;
use proptest::prelude::*;

fn complex() -> impl Strategy<Value = C64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| c(a, b))
}

fn hermitian_pd(n: usize) -> impl Strategy<Value = CMatrix> {
    proptest::collection::vec(complex(), n * n).prop_map(move |v| {
        let a = CMatrix::from_vec(n, n, v);
        &a * a.adjoint() + CMatrix::identity(n, n) * c(0.2, 0.0)
    })
}

fn torsion(n: usize) -> impl Strategy<Value = CTensor> {
    proptest::collection::vec(complex(), n * n * n).prop_map(move |v| {
        CTensor::from_fn(n, 3, |ix| {
            v[(ix[0] * n + ix[1]) * n + ix[2]] - v[(ix[1] * n + ix[0]) * n + ix[2]]
        })
    })
}

// Q by direct summation over all indices.
fn brute_q(t: &CTensor, g: &CMatrix) -> CMatrix {
    let n = g.nrows();
    let inv = g.clone().try_inverse().unwrap();
    let gi = |k: usize, l: usize| inv[(l, k)];
    let low = |m: usize, p: usize, j: usize| -> C64 { (0..n).map(|l| t[[m, p, l]] * g[(l, j)]).sum() };
    CMatrix::from_fn(n, n, |i, j| {
        let mut acc = c(0.0, 0.0);
        for m in 0..n {
            for nn in 0..n {
                for p in 0..n {
                    for s in 0..n {
                        acc += gi(m, nn) * gi(p, s) * low(m, p, j) * low(nn, s, i).conj();
                    }
                }
            }
        }
        acc * 0.5
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn q_is_positive_semidefinite(g in hermitian_pd(3), t in torsion(3)) {
        let inv = g.clone().try_inverse().unwrap().transpose();
        let q = q_from_torsion(&t, &g, &inv);
        let brute = brute_q(&t, &g);
        prop_assert!((&q - &brute).norm() < 1e-9 * (1.0 + brute.norm()));
        prop_assert!((&q - q.adjoint()).norm() < 1e-10 * (1.0 + q.norm()));
        prop_assert!(smallest_eigenvalue(&q) > -1e-9 * (1.0 + q.norm()));
    }

    #[test]
    fn q_is_scale_invariant(g in hermitian_pd(2), t in torsion(2), s in 0.1f64..10.0) {
        let q1 = q_from_torsion(&t, &g, &g.clone().try_inverse().unwrap().transpose());
        let gs = &g * c(s, 0.0);
        let q2 = q_from_torsion(&t, &gs, &gs.clone().try_inverse().unwrap().transpose());
        prop_assert!((&q1 - &q2).norm() < 1e-9 * (1.0 + q1.norm()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn griffiths_value_is_scale_invariant(
        x in proptest::collection::vec(complex(), 2),
        y in proptest::collection::vec(complex(), 2),
        a in complex(),
        b in complex(),
    ) {
        prop_assume!(x.iter().map(|z| z.norm()).sum::<f64>() > 1e-3);
        prop_assume!(y.iter().map(|z| z.norm()).sum::<f64>() > 1e-3);
        prop_assume!(a.norm() > 1e-2 && b.norm() > 1e-2);
        let m = model_registry("hopf_standard").unwrap();
        let p = ChartPoint::new(vec![c(0.8, 0.2), c(-0.1, 0.5)]);
        let pack = chern_pack(&wirtinger_jet(&m.field, &p, 2).unwrap()).unwrap();
        let v0 = griffiths_value(&pack.omega_low, &pack.g, &x, &y);
        let xs: Vec<C64> = x.iter().map(|z| z * a).collect();
        let ys: Vec<C64> = y.iter().map(|z| z * b).collect();
        let v1 = griffiths_value(&pack.omega_low, &pack.g, &xs, &ys);
        prop_assert!((v0 - v1).abs() < 1e-9 * (1.0 + v0.abs()));
        prop_assert!(v0 > -1e-9);
    }

    #[test]
    fn flow_preserves_hermitian_positivity(g in hermitian_pd(2)) {
        let fm = FrameMetric::new(LieAlgebraData::builtin("affine").unwrap(), g).unwrap();
        let traj = chernlab::hcf::flow_invariant(&fm, 1.0, 10).unwrap();
        for m in &traj.metrics {
            prop_assert!((m - m.adjoint()).norm() == 0.0);
            prop_assert!(smallest_eigenvalue(m) > 0.0);
        }
        prop_assert!(traj.log_det_rates().unwrap().iter().all(|r| *r <= 1e-12));
    }

    #[test]
    fn basis_change_preserves_jacobi(m in proptest::collection::vec(complex(), 9)) {
        let p = CMatrix::from_vec(3, 3, m) + CMatrix::identity(3, 3) * c(2.0, 0.0);
        let pinv = p.clone().try_inverse().unwrap();
        let sl2 = LieAlgebraData::builtin("sl2").unwrap();
        // structure constants of sl2 in the basis f_i = Σ_a p[(a, i)] e_a
        let mut entries = Vec::new();
        for i in 0..3 {
            for j in (i + 1)..3 {
                let fi: Vec<C64> = (0..3).map(|a| p[(a, i)]).collect();
                let fj: Vec<C64> = (0..3).map(|a| p[(a, j)]).collect();
                let br = sl2.bracket(&fi, &fj);
                for k in 0..3 {
                    let v: C64 = (0..3).map(|a| pinv[(k, a)] * br[a]).sum();
                    entries.push((i, j, k, v));
                }
            }
        }
        let alg = LieAlgebraData::from_brackets("sl2'", 3, &entries);
        prop_assert!(alg.is_ok());
        prop_assert!(alg.unwrap().jacobi_residual() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn loop_then_reverse_is_identity(seed in 0u64..1000) {
        let m = model_registry("hopf_standard").unwrap();
        let path = m.loops.loop_at(seed, 0).unwrap();
        let opts = TransportOptions::default();
        let fwd = transport_matrix(&m.field, &path, &opts).unwrap();
        let back = transport_matrix(&m.field, &path.reversed(), &opts).unwrap();
        let defect = (&back.matrix * &fwd.matrix - CMatrix::identity(2, 2)).norm();
        prop_assert!(defect <= 2.0 * (fwd.error_estimate + back.error_estimate) + 1e-9, "{defect:e}");
        // ζ at the base is parallel, so every holonomy fixes it
        let v = fwd.apply(&m.loops.base);
        prop_assert!((v[0] - m.loops.base[0]).norm() + v[1].norm() < 1e-8);
    }

    #[test]
    fn fixed_subspace_is_stable_under_more_loops(seed in 0u64..1000) {
        let m = model_registry("hopf_standard").unwrap();
        let small = sample_holonomy(&m.field, &m.loops, seed, 6).unwrap();
        let large = sample_holonomy(&m.field, &m.loops, seed, 12).unwrap();
        let (f1, f2) = (fixed_subspace(&small), fixed_subspace(&large));
        prop_assert_eq!(f1.dim, f2.dim);
        prop_assert!(subspace_angle(&small.metric, &f1.basis, &f2.basis) < 1e-6);
    }
}
