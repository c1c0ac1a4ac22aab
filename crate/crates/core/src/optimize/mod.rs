//! Seeded sampling of auxiliary channels, support-function maximization,
//! upper concave envelopes and the binary-source boundary curves.
//!
//! Every randomized routine draws sample `i` from its own ChaCha8 stream
//! `i` of the configured seed and reduces in index order, so results do not
//! depend on the number of rayon threads.

mod bottleneck;
mod dsbs;
mod envelope;
mod sampling;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::regions::RegionPoint;

pub use bottleneck::ib_curve;
pub use dsbs::{
    cardinality_robustness, conjecture_margin, conjecture_test, default_alpha_grid,
    dsbs_inner_boundary, dsbs_outer_boundary_sampled, CardinalityRow, ConjectureReport,
};
pub use envelope::{upper_concave_envelope, EnvelopeCurve};
pub use sampling::{
    evaluate_candidate, local_refine, sample_channel, sample_channel_with_concentration,
    sample_region_points, support_function, Candidate, SupportResult,
};

/// Weight `(l1, l2, l3)` of the support function
/// `psi(l) = sup l1 mu + l2 R1 + l3 R2`, restricted to the quadrant
/// `l1 >= 0, l2 <= 0, l3 <= 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SupportWeight {
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
}

impl SupportWeight {
    pub fn new(l1: f64, l2: f64, l3: f64) -> Result<Self> {
        if !(l1 >= 0.0 && l2 <= 0.0 && l3 <= 0.0) {
            return Err(Error::Constraint(format!(
                "support weight ({l1}, {l2}, {l3}) is outside the quadrant"
            )));
        }
        Ok(Self { l1, l2, l3 })
    }

    pub fn apply(&self, pt: &RegionPoint) -> f64 {
        self.l1 * pt.mu + self.l2 * pt.r1 + self.l3 * pt.r2
    }

    /// `l1 + min(l2, l3) <= 0`: the outer support functions vanish.
    pub fn is_degenerate(&self) -> bool {
        self.l1 + self.l2.min(self.l3) <= 0.0
    }
}

/// Markov structure of the sampled auxiliaries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Long chain `u - x - z - v`, `mu = I(u; v)`.
    Inner,
    /// Short chains only, `mu = I(u; x) + I(v; z) - I(uv; xz)`.
    Ro,
    /// Long chain, `mu = min(I(u; z), I(v; x))`.
    RoPrime,
    /// Single auxiliary `u - x - z`; the point is `(I(u; z), I(u; x), 0)`.
    Bottleneck,
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inner" => Ok(Self::Inner),
            "ro" => Ok(Self::Ro),
            "ro-prime" | "ro_prime" => Ok(Self::RoPrime),
            "bottleneck" => Ok(Self::Bottleneck),
            other => Err(Error::Constraint(format!("unknown variant `{other}`"))),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Inner => "inner",
            Self::Ro => "ro",
            Self::RoPrime => "ro-prime",
            Self::Bottleneck => "bottleneck",
        })
    }
}

/// What the optimizers maximize over region points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Objective {
    Weighted(SupportWeight),
    /// `mu - slope * max(r1, r2)`: a supporting line of the symmetric-rate
    /// boundary.
    Slope(f64),
}

impl Objective {
    pub fn score(&self, pt: &RegionPoint) -> f64 {
        match self {
            Self::Weighted(w) => w.apply(pt),
            Self::Slope(s) => pt.mu - s * pt.symmetric_rate(),
        }
    }
}

/// Sampling protocol and budgets.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleConfig {
    pub seed: u64,
    pub count: usize,
    pub concentration: f64,
    /// `|U|`; `None` means `|X|`.
    pub u_cap: Option<usize>,
    /// `|V|`; `None` means `|Z|`.
    pub v_cap: Option<usize>,
    pub refine_top: usize,
    pub refine_steps: usize,
    pub step_size: f64,
}

impl SampleConfig {
    /// Default budgets: `10^5` flat-Dirichlet samples, the best 100 refined
    /// with 500 coordinate trials each.
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            count: 100_000,
            concentration: 1.0,
            u_cap: None,
            v_cap: None,
            refine_top: 100,
            refine_steps: 500,
            step_size: 0.05,
        }
    }

    pub fn with_count(mut self, count: usize) -> Self {
        self.count = count;
        self
    }

    pub fn with_caps(mut self, u: usize, v: usize) -> Self {
        self.u_cap = Some(u);
        self.v_cap = Some(v);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::Constraint("sample count must be positive".into()));
        }
        if !(self.concentration > 0.0 && self.concentration.is_finite()) {
            return Err(Error::Domain {
                what: "dirichlet concentration",
                value: self.concentration,
            });
        }
        if self.u_cap == Some(0) || self.v_cap == Some(0) {
            return Err(Error::Constraint(
                "cardinality caps must be at least 1".into(),
            ));
        }
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(Error::Domain {
                what: "step size",
                value: self.step_size,
            });
        }
        Ok(())
    }
}
