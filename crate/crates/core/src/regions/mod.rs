//! Point evaluators and membership tests for the bound regions.
//!
//! Two sources `(x, z)` are described by auxiliaries `u` (of `x`) and `v`
//! (of `z`). Each evaluator maps a joint pmf to a [`RegionPoint`]
//! `(mu, r1, r2)`: the corner of the region generated by that joint, i.e.
//! every `(mu', r1', r2')` with `mu' <= mu`, `r1' >= r1`, `r2' >= r2` is
//! inside.
//!
//! * inner bound: long chain `u - x - z - v`, `mu = I(u; v)`
//! * outer bound `ro`: short chains `u - x - z`, `x - z - v`,
//!   `mu = I(u; x) + I(v; z) - I(uv; xz)`
//! * outer bound `ro'`: same chains, `mu = min(I(u; z), I(v; x))`
//!
//! The [`multi`] and [`ceo`] submodules cover `K` sources and the CEO /
//! information-bottleneck specialization.

pub mod ceo;
pub mod multi;

use std::f64::consts::LN_2;

use crate::error::{check_probability, Error, Result};
use crate::probability::{
    bconv, cmi_table, compose_markov, compose_markov_mixed, hb, hb_inverse, mi_table, Channel,
    JointPmf,
};

pub use ceo::{
    ceo_point, decoder_distance, ib_point, log_loss_fidelity, optimal_posterior_decoder,
    target_label, CeoPoint, Decoder,
};
pub use multi::{
    aux_label, korner_marton_point, korner_marton_source, multi_inner_membership,
    multi_inner_search, multi_joint, multi_outer_point_ro, multi_outer_point_ro_prime,
    source_label, BinningChoice, IndexSet, Membership, MultiRegionPoint, PairCertificate,
    SubsetPair, MAX_SEARCH_SOURCES,
};

/// A Markov chain is taken to hold when its conditional mutual information
/// is at most this many nats.
pub const MARKOV_TOLERANCE: f64 = 1e-9;

/// Slack allowed when comparing a target point against a bound.
pub const MEMBERSHIP_TOLERANCE: f64 = 1e-9;

/// `(mu, R1, R2)` in nats.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegionPoint {
    pub mu: f64,
    pub r1: f64,
    pub r2: f64,
}

impl RegionPoint {
    pub fn new(mu: f64, r1: f64, r2: f64) -> Self {
        Self { mu, r1, r2 }
    }

    /// `mu <= min(r1, r2)`, which every achievable point satisfies.
    pub fn is_consistent(&self) -> bool {
        self.mu <= self.r1.min(self.r2) + 1e-9
    }

    /// Whether `target` lies in the region cornered at `self`.
    pub fn dominates(&self, target: &RegionPoint) -> bool {
        target.mu <= self.mu + MEMBERSHIP_TOLERANCE
            && target.r1 >= self.r1 - MEMBERSHIP_TOLERANCE
            && target.r2 >= self.r2 - MEMBERSHIP_TOLERANCE
    }

    /// Largest of the two rates: the abscissa of this point when both
    /// encoders must run at a common rate.
    pub fn symmetric_rate(&self) -> f64 {
        self.r1.max(self.r2)
    }
}

/// Information quantities of a dense `(u, x, z, v)` table.
pub(crate) struct FourWay<'a> {
    dims: [usize; 4],
    t: &'a [f64],
}

impl<'a> FourWay<'a> {
    pub(crate) fn new(dims: [usize; 4], t: &'a [f64]) -> Self {
        debug_assert_eq!(t.len(), dims.iter().product::<usize>());
        Self { dims, t }
    }

    /// Marginal over the axes flagged in `keep` (in `u, x, z, v` order).
    fn marginal(&self, keep: [bool; 4]) -> Vec<f64> {
        let d = self.dims;
        let mut stride = [0usize; 4];
        let mut s = 1;
        for i in (0..4).rev() {
            if keep[i] {
                stride[i] = s;
                s *= d[i];
            }
        }
        let mut out = vec![0.0; s];
        let mut k = 0;
        for u in 0..d[0] {
            for x in 0..d[1] {
                for z in 0..d[2] {
                    let base = u * stride[0] + x * stride[1] + z * stride[2];
                    for v in 0..d[3] {
                        out[base + v * stride[3]] += self.t[k];
                        k += 1;
                    }
                }
            }
        }
        out
    }

    pub(crate) fn i_ux(&self) -> f64 {
        mi_table(
            &self.marginal([true, true, false, false]),
            self.dims[0],
            self.dims[1],
        )
    }

    pub(crate) fn i_zv(&self) -> f64 {
        mi_table(
            &self.marginal([false, false, true, true]),
            self.dims[2],
            self.dims[3],
        )
    }

    pub(crate) fn i_uz(&self) -> f64 {
        mi_table(
            &self.marginal([true, false, true, false]),
            self.dims[0],
            self.dims[2],
        )
    }

    pub(crate) fn i_xv(&self) -> f64 {
        mi_table(
            &self.marginal([false, true, false, true]),
            self.dims[1],
            self.dims[3],
        )
    }

    pub(crate) fn i_uv(&self) -> f64 {
        mi_table(
            &self.marginal([true, false, false, true]),
            self.dims[0],
            self.dims[3],
        )
    }

    /// `I(uv; xz)`.
    pub(crate) fn i_uv_xz(&self) -> f64 {
        let [nu, nx, nz, nv] = self.dims;
        let mut table = vec![0.0; self.t.len()];
        let mut k = 0;
        for u in 0..nu {
            for x in 0..nx {
                for z in 0..nz {
                    for v in 0..nv {
                        table[(u * nv + v) * nx * nz + x * nz + z] = self.t[k];
                        k += 1;
                    }
                }
            }
        }
        mi_table(&table, nu * nv, nx * nz)
    }

    /// `I(u; z | x)`, zero under `u - x - z`.
    pub(crate) fn chain_uxz(&self) -> f64 {
        let [nu, nx, nz, _] = self.dims;
        let m = self.marginal([true, true, true, false]);
        // reorder [u][x][z] -> [u][z][x]
        let mut table = vec![0.0; m.len()];
        for u in 0..nu {
            for x in 0..nx {
                for z in 0..nz {
                    table[(u * nz + z) * nx + x] = m[(u * nx + x) * nz + z];
                }
            }
        }
        cmi_table(&table, nu, nz, nx)
    }

    /// `I(v; x | z)`, zero under `x - z - v`.
    pub(crate) fn chain_xzv(&self) -> f64 {
        let [_, nx, nz, nv] = self.dims;
        let m = self.marginal([false, true, true, true]);
        // reorder [x][z][v] -> [v][x][z]
        let mut table = vec![0.0; m.len()];
        for x in 0..nx {
            for z in 0..nz {
                for v in 0..nv {
                    table[(v * nx + x) * nz + z] = m[(x * nz + z) * nv + v];
                }
            }
        }
        cmi_table(&table, nv, nx, nz)
    }

    pub(crate) fn check_short_chains(&self) -> Result<()> {
        let cmi = self.chain_uxz();
        if cmi > MARKOV_TOLERANCE {
            return Err(Error::Markov {
                chain: "u - x - z".into(),
                cmi,
            });
        }
        let cmi = self.chain_xzv();
        if cmi > MARKOV_TOLERANCE {
            return Err(Error::Markov {
                chain: "x - z - v".into(),
                cmi,
            });
        }
        Ok(())
    }

    /// `ro` corner; the short chains are assumed to hold.
    pub(crate) fn ro(&self) -> RegionPoint {
        let r1 = self.i_ux();
        let r2 = self.i_zv();
        RegionPoint::new(r1 + r2 - self.i_uv_xz(), r1, r2)
    }

    pub(crate) fn ro_prime(&self) -> RegionPoint {
        RegionPoint::new(self.i_uz().min(self.i_xv()), self.i_ux(), self.i_zv())
    }

    pub(crate) fn inner(&self) -> RegionPoint {
        RegionPoint::new(self.i_uv(), self.i_ux(), self.i_zv())
    }
}

fn four_way_dims(p: &JointPmf) -> Result<([usize; 4], JointPmf)> {
    if p.axes().len() != 4 {
        return Err(Error::Axis(
            "expected a joint over exactly (u, x, z, v)".into(),
        ));
    }
    let ordered = p.marginalize(&["u", "x", "z", "v"])?;
    let s = ordered.shape();
    Ok(([s[0], s[1], s[2], s[3]], ordered))
}

/// Inner-bound corner `(I(u; v), I(u; x), I(v; z))` for test channels
/// `p(u | x)` and `p(v | z)`.
pub fn inner_point(p_xz: &JointPmf, ch_u: &Channel, ch_v: &Channel) -> Result<RegionPoint> {
    let joint = compose_markov(p_xz, ch_u, ch_v)?;
    let (dims, ordered) = four_way_dims(&joint)?;
    Ok(FourWay::new(dims, ordered.mass()).inner())
}

/// Convexified inner bound with a time-sharing variable `q`:
/// `(I(u; v | q), I(u; x | q), I(v; z | q))`.
pub fn inner_point_time_shared(
    p_xz: &JointPmf,
    branches: &[(f64, Channel, Channel)],
) -> Result<RegionPoint> {
    let joint = compose_markov_mixed(p_xz, branches)?;
    let cmi = |a: &str, b: &str| {
        crate::probability::conditional_mutual_information(&joint, &[a], &[b], &["q"])
    };
    Ok(RegionPoint::new(
        cmi("u", "v")?,
        cmi("u", "x")?,
        cmi("v", "z")?,
    ))
}

/// Closed-form corner of the binary region generated by BSC test channels
/// with crossovers `alpha` and `beta` on a DSBS with crossover `p`.
pub fn sb_point(p: f64, alpha: f64, beta: f64) -> Result<RegionPoint> {
    for (what, value) in [("dsbs crossover", p), ("alpha", alpha), ("beta", beta)] {
        if !(0.0..=0.5).contains(&value) {
            return Err(Error::Domain { what, value });
        }
    }
    Ok(RegionPoint::new(
        LN_2 - hb(bconv(bconv(alpha, p), beta)),
        LN_2 - hb(alpha),
        LN_2 - hb(beta),
    ))
}

/// Corner of the outer bound `ro`. The reported `mu` is the raw value and
/// may be negative.
pub fn outer_point_ro(p_uxzv: &JointPmf) -> Result<RegionPoint> {
    let (dims, ordered) = four_way_dims(p_uxzv)?;
    let four = FourWay::new(dims, ordered.mass());
    four.check_short_chains()?;
    Ok(four.ro())
}

/// Corner of the outer bound `ro'`.
pub fn outer_point_ro_prime(p_uxzv: &JointPmf) -> Result<RegionPoint> {
    let (dims, ordered) = four_way_dims(p_uxzv)?;
    let four = FourWay::new(dims, ordered.mass());
    four.check_short_chains()?;
    Ok(four.ro_prime())
}

/// Margin of the strict inequality
/// `(ln 2 - h(alpha * p)) / (ln 2 - h(p)) > 1 - h(alpha) / ln 2`
/// that separates the convexified binary inner bound from `ro'`.
/// Positive means the inequality holds.
pub fn loose_bound_margin(alpha: f64, p: f64) -> Result<f64> {
    check_probability("alpha", alpha)?;
    check_probability("dsbs crossover", p)?;
    let lhs = (LN_2 - hb(bconv(alpha, p))) / (LN_2 - hb(p));
    let rhs = 1.0 - hb(alpha) / LN_2;
    Ok(lhs - rhs)
}

/// `H(x | v) - h(h^{-1}(H(z | v)) * p)` for a DSBS with crossover `p` and
/// binary-input test channel `p(v | z)`; nonnegative by Mrs. Gerber's lemma.
pub fn gerber_margin(p: f64, ch_v: &Channel) -> Result<f64> {
    let src = crate::probability::dsbs(p)?;
    let id = Channel::identity(2)?;
    let joint = compose_markov(&src, &id, ch_v)?;
    let (dims, ordered) = four_way_dims(&joint)?;
    let four = FourWay::new(dims, ordered.mass());
    let xv = four.marginal([false, true, false, true]);
    let zv = four.marginal([false, false, true, true]);
    let v = four.marginal([false, false, false, true]);
    let h_v = crate::probability::entropy_slice(&v);
    let h_x_given_v = crate::probability::entropy_slice(&xv) - h_v;
    let h_z_given_v = (crate::probability::entropy_slice(&zv) - h_v).clamp(0.0, LN_2);
    Ok(h_x_given_v - hb(bconv(hb_inverse(h_z_given_v), p)))
}
