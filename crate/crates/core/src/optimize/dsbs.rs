use std::f64::consts::LN_2;

use rayon::prelude::*;

use super::envelope::{upper_concave_envelope, EnvelopeCurve};
use super::sampling::{support_function, Candidate, Engine, Pool};
use super::{SampleConfig, SupportWeight, Variant};
use crate::error::{Error, Result};
use crate::probability::{bconv, dsbs, hb, hb_inverse, Channel, JointPmf};
use crate::regions::{inner_point, RegionPoint};

/// `n + 1` crossovers `0.5 (k / n)^3`, dense near 0 where the rate
/// approaches `ln 2`.
pub fn default_alpha_grid(n: usize) -> Vec<f64> {
    let n = n.max(1);
    (0..=n)
        .map(|k| 0.5 * (k as f64 / n as f64).powi(3))
        .collect()
}

fn check_half(what: &'static str, value: f64) -> Result<()> {
    if !(0.0..=0.5).contains(&value) {
        return Err(Error::Domain { what, value });
    }
    Ok(())
}

/// Envelope of the symmetric-rate points
/// `(ln 2 - h(a), ln 2 - h(a * p * a))` over `alpha_grid`.
pub fn dsbs_inner_boundary(p: f64, alpha_grid: &[f64]) -> Result<EnvelopeCurve> {
    check_half("dsbs crossover", p)?;
    let mut points = Vec::with_capacity(alpha_grid.len());
    for &a in alpha_grid {
        check_half("alpha", a)?;
        points.push((LN_2 - hb(a), LN_2 - hb(bconv(bconv(a, p), a))));
    }
    upper_concave_envelope(&points)
}

const INNER_GRID: usize = 4096;

/// Sampled envelope of `(max(R1, R2), mu)` over joints with both short
/// chains, for binary auxiliaries unless `cfg` caps say otherwise.
///
/// The pool is the anchors, BSC warm starts with the independent coupling,
/// and `cfg.count` random couplings. For every distinct supporting slope of
/// the inner boundary at a point of `r_grid`, the best `cfg.refine_top`
/// pool entries under that slope are refined.
pub fn dsbs_outer_boundary_sampled(
    p: f64,
    r_grid: &[f64],
    cfg: &SampleConfig,
) -> Result<EnvelopeCurve> {
    if !(p > 0.0 && p < 0.5) {
        return Err(Error::Domain {
            what: "dsbs crossover",
            value: p,
        });
    }
    if r_grid.is_empty() {
        return Err(Error::Size("empty rate grid".into()));
    }
    cfg.validate()?;
    let src = dsbs(p)?;
    let engine = Engine::new(
        &src,
        Variant::Ro,
        cfg.u_cap.or(Some(2)),
        cfg.v_cap.or(Some(2)),
    )?;
    let alphas = default_alpha_grid(INNER_GRID);
    let warm = if engine.nu == 2 && engine.nv == 2 {
        alphas
            .iter()
            .map(|&a| {
                let t = vec![1.0 - a, a, a, 1.0 - a];
                engine.from_tables(t.clone(), t)
            })
            .collect()
    } else {
        Vec::new()
    };
    let pool = Pool::build(&engine, cfg, warm)?;
    let inner = dsbs_inner_boundary(p, &alphas)?;
    let mut slopes: Vec<f64> = r_grid.iter().filter_map(|&r| inner.slope_at(r)).collect();
    slopes.dedup();
    let refined = pool.refine_slopes(&engine, &slopes, cfg.refine_top, cfg);
    let points: Vec<(f64, f64)> = pool
        .points
        .iter()
        .flatten()
        .chain(refined.iter())
        .map(|pt| (pt.symmetric_rate(), pt.mu))
        .collect();
    upper_concave_envelope(&points)
}

/// `(ln 2 - h(a * p * b)) - I(u; v)` with `a`, `b` the smallest crossovers
/// allowed by `I(u; x)` and `I(v; z)`.
fn margin_of(p: f64, pt: &RegionPoint) -> (f64, f64, f64) {
    let a = hb_inverse((LN_2 - pt.r1).clamp(0.0, LN_2));
    let b = hb_inverse((LN_2 - pt.r2).clamp(0.0, LN_2));
    (LN_2 - hb(bconv(bconv(a, p), b)) - pt.mu, a, b)
}

/// Conjecture margin of one pair of test channels on a DSBS.
pub fn conjecture_margin(p: f64, ch_u: &Channel, ch_v: &Channel) -> Result<f64> {
    check_half("dsbs crossover", p)?;
    let pt = inner_point(&dsbs(p)?, ch_u, ch_v)?;
    Ok(margin_of(p, &pt).0)
}

/// Smallest conjecture margin over a sampled pool.
#[derive(Clone, Debug, PartialEq)]
pub struct ConjectureReport {
    pub p: f64,
    pub min_margin: f64,
    /// Pool index of the minimizer (anchors first).
    pub worst_index: usize,
    pub worst: Candidate,
    pub worst_point: RegionPoint,
    pub alpha: f64,
    pub beta: f64,
    pub samples: usize,
}

/// Searches long-chain test channels on a DSBS for a negative margin.
pub fn conjecture_test(p: f64, cfg: &SampleConfig) -> Result<ConjectureReport> {
    check_half("dsbs crossover", p)?;
    cfg.validate()?;
    let engine = Engine::new(&dsbs(p)?, Variant::Inner, cfg.u_cap, cfg.v_cap)?;
    let pool = Pool::build(&engine, cfg, Vec::new())?;
    let margins: Vec<Option<(f64, f64, f64)>> = pool
        .points
        .par_iter()
        .map(|pt| pt.map(|pt| margin_of(p, &pt)))
        .collect();
    let (worst_index, (min_margin, alpha, beta)) = margins
        .iter()
        .enumerate()
        .filter_map(|(i, m)| m.map(|m| (i, m)))
        .fold(
            None,
            |acc: Option<(usize, (f64, f64, f64))>, cur| match acc {
                Some(a) if a.1 .0 <= cur.1 .0 => Some(a),
                _ => Some(cur),
            },
        )
        .ok_or_else(|| Error::Constraint("no feasible samples".into()))?;
    let params = pool.params(&engine, worst_index);
    Ok(ConjectureReport {
        p,
        min_margin,
        worst_index,
        worst: engine.candidate(&params),
        worst_point: pool.points[worst_index].expect("feasible"),
        alpha,
        beta,
        samples: cfg.count,
    })
}

/// Support-function values with the default caps and with both caps
/// raised by one.
#[derive(Clone, Debug, PartialEq)]
pub struct CardinalityRow {
    pub weight: SupportWeight,
    pub base: f64,
    pub extended: f64,
    pub difference: f64,
}

pub fn cardinality_robustness(
    p_xz: &JointPmf,
    weights: &[SupportWeight],
    cfg: &SampleConfig,
    variant: Variant,
) -> Result<Vec<CardinalityRow>> {
    let shape = p_xz.marginalize(&["x", "z"])?.shape().to_vec();
    let (nx, nz) = (shape[0], shape[1]);
    let base_cfg = cfg.clone().with_caps(nx, nz);
    let ext_cfg = cfg.clone().with_caps(nx + 1, nz + 1);
    weights
        .iter()
        .map(|&weight| {
            let base = support_function(p_xz, weight, &base_cfg, variant)?.value;
            let extended = support_function(p_xz, weight, &ext_cfg, variant)?.value;
            Ok(CardinalityRow {
                weight,
                base,
                extended,
                difference: extended - base,
            })
        })
        .collect()
}
