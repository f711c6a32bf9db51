//! Residuals of the Bianchi identities for Chern curvature and torsion.

use serde::{Deserialize, Serialize};

use super::jet::MetricJet;
use super::pack::{chern_tensors, lower_last, ChernTensors};
use super::tensor::{CTensor, Conn, Dir, PolyTensor, Slot};
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::poly::Poly;

/// Tensor magnitudes below this are treated as absolute zero scale.
pub const SCALE_FLOOR: f64 = 1e-6;

/// Max-norm residuals of the five identities, each relative to the largest
/// term entering it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BianchiResiduals {
    /// `Ω_{ij̄kl̄} = Ω_{kj̄il̄} + ∇_j̄ T_{kil̄}`.
    pub swap_holo: f64,
    /// `Ω_{ij̄kl̄} = Ω_{il̄kj̄} + ∇_i T_{l̄j̄k}`.
    pub swap_anti: f64,
    /// Cyclic sum of `∇T` against quadratic torsion.
    pub cyclic: f64,
    /// `∇_m Ω_{ij̄kl̄} = ∇_i Ω_{mj̄kl̄} + T^p_{im} Ω_{pj̄kl̄}`.
    pub second_holo: f64,
    /// Conjugate-direction second identity.
    pub second_anti: f64,
}

impl BianchiResiduals {
    pub fn max(&self) -> f64 {
        self.as_array().iter().cloned().fold(0.0, f64::max)
    }

    pub fn as_array(&self) -> [f64; 5] {
        [
            self.swap_holo,
            self.swap_anti,
            self.cyclic,
            self.second_holo,
            self.second_anti,
        ]
    }

    pub fn names() -> [&'static str; 5] {
        ["swap_holo", "swap_anti", "cyclic", "second_holo", "second_anti"]
    }
}

/// Accumulates `max |lhs - rhs|` and the largest term magnitude.
#[derive(Default)]
struct Residual {
    diff: f64,
    scale: f64,
}

impl Residual {
    fn add(&mut self, terms: &[C64], diff: C64) {
        for t in terms {
            self.scale = self.scale.max(t.norm());
        }
        self.diff = self.diff.max(diff.norm());
    }

    fn relative(&self) -> f64 {
        self.diff / self.scale.max(SCALE_FLOOR)
    }
}

pub fn bianchi_residuals(jet: &MetricJet) -> Result<BianchiResiduals> {
    if jet.order < 3 {
        return Err(Error::InsufficientJet {
            have: jet.order,
            need: 3,
        });
    }
    let t = chern_tensors(jet)?;
    bianchi_from_tensors(&t)
}

pub fn bianchi_from_tensors(t: &ChernTensors) -> Result<BianchiResiduals> {
    t.require(3)?;
    let n = t.n;
    let chern = |s: Slot| (s, Conn::Chern);
    let om = t.omega_low()?.value();
    let tor = t.torsion.value();

    // ∇_j̄ T_{kil̄}, stored [j, k, i, l]
    let t_low = lower_last(&t.torsion, &t.g);
    let d_tlow = t_low
        .covariant(
            &[chern(Slot::Lower), chern(Slot::Lower), chern(Slot::LowerBar)],
            Dir::Anti,
            &t.gamma,
        )
        .value();
    // T_{l̄j̄k} = conj(T^p_{lj}) g_{kp̄}, stored [l, j, k]
    let basis = t.g.basis().clone();
    let tor_bar = t.torsion.conj();
    let t_barbar = PolyTensor::from_fn(n, 3, |ix| {
        let mut acc = Poly::zero(&basis);
        for p in 0..n {
            acc.add_product(tor_bar.get(&[ix[0], ix[1], p]), t.g.get(&[ix[2], p]));
        }
        acc
    });
    // ∇_i T_{l̄j̄k}, stored [i, l, j, k]
    let d_tbar = t_barbar
        .covariant(
            &[chern(Slot::LowerBar), chern(Slot::LowerBar), chern(Slot::Lower)],
            Dir::Holo,
            &t.gamma,
        )
        .value();
    // ∇_i T^l_{jk}, stored [i, j, k, l]
    let d_tor = covariant_torsion(t);
    let om_slots = [
        chern(Slot::Lower),
        chern(Slot::LowerBar),
        chern(Slot::Lower),
        chern(Slot::LowerBar),
    ];
    let d_om = t.omega_low()?.covariant(&om_slots, Dir::Holo, &t.gamma).value();
    let dbar_om = t.omega_low()?.covariant(&om_slots, Dir::Anti, &t.gamma).value();

    let mut r = [
        Residual::default(),
        Residual::default(),
        Residual::default(),
        Residual::default(),
        Residual::default(),
    ];
    let get5 = |x: &CTensor, ix: [usize; 5]| x.get(&ix);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let a = om[[i, j, k, l]];
                    let b = om[[k, j, i, l]];
                    let d = d_tlow[[j, k, i, l]];
                    r[0].add(&[a, b, d], a - b - d);

                    let b = om[[i, l, k, j]];
                    let d = d_tbar[[i, l, j, k]];
                    r[1].add(&[a, b, d], a - b - d);

                    let lhs = d_tor[[i, j, k, l]] + d_tor[[k, i, j, l]] + d_tor[[j, k, i, l]];
                    let mut rhs = C64::new(0.0, 0.0);
                    for p in 0..n {
                        rhs += tor[[i, j, p]] * tor[[k, p, l]]
                            + tor[[j, k, p]] * tor[[i, p, l]]
                            + tor[[k, i, p]] * tor[[j, p, l]];
                    }
                    r[2].add(
                        &[d_tor[[i, j, k, l]], d_tor[[k, i, j, l]], d_tor[[j, k, i, l]], rhs],
                        lhs - rhs,
                    );

                    for m in 0..n {
                        let lhs = get5(&d_om, [m, i, j, k, l]);
                        let first = get5(&d_om, [i, m, j, k, l]);
                        let mut tt = C64::new(0.0, 0.0);
                        for p in 0..n {
                            tt += tor[[i, m, p]] * om[[p, j, k, l]];
                        }
                        r[3].add(&[lhs, first, tt], lhs - first - tt);

                        // m plays n̄ here
                        let lhs = get5(&dbar_om, [m, i, j, k, l]);
                        let first = get5(&dbar_om, [j, i, m, k, l]);
                        let mut tt = C64::new(0.0, 0.0);
                        for s in 0..n {
                            tt += tor[[j, m, s]].conj() * om[[i, s, k, l]];
                        }
                        r[4].add(&[lhs, first, tt], lhs - first - tt);
                    }
                }
            }
        }
    }
    Ok(BianchiResiduals {
        swap_holo: r[0].relative(),
        swap_anti: r[1].relative(),
        cyclic: r[2].relative(),
        second_holo: r[3].relative(),
        second_anti: r[4].relative(),
    })
}

/// `∇_i T^l_{jk}` (Chern), stored `[i, j, k, l]`.
pub fn covariant_torsion(t: &ChernTensors) -> CTensor {
    t.torsion
        .covariant(
            &[
                (Slot::Lower, Conn::Chern),
                (Slot::Lower, Conn::Chern),
                (Slot::Upper, Conn::Chern),
            ],
            Dir::Holo,
            &t.gamma,
        )
        .value()
}
