use super::envelope::upper_concave_envelope;
use super::sampling::{Engine, Pool};
use super::{SampleConfig, Variant};
use crate::error::{Error, Result};
use crate::probability::JointPmf;

/// Sampled relevance-compression curve: for each `R` in `r_grid`, the best
/// `I(u; z)` with `I(u; x) <= R` over `u - x - z`, `|U| <= |X| + 1` unless
/// `cfg.u_cap` says otherwise. The returned values lie on a nondecreasing
/// concave envelope.
pub fn ib_curve(p_xz: &JointPmf, r_grid: &[f64], cfg: &SampleConfig) -> Result<Vec<(f64, f64)>> {
    if let Some(&r) = r_grid.iter().find(|r| !(**r >= 0.0 && r.is_finite())) {
        return Err(Error::Domain {
            what: "compression rate",
            value: r,
        });
    }
    cfg.validate()?;
    let nx = p_xz.marginalize(&["x"])?.shape()[0];
    let engine = Engine::new(
        p_xz,
        Variant::Bottleneck,
        Some(cfg.u_cap.unwrap_or(nx + 1)),
        None,
    )?;
    let pool = Pool::build(&engine, cfg, Vec::new())?;
    let points: Vec<(f64, f64)> = pool
        .points
        .iter()
        .flatten()
        .map(|pt| (pt.r1, pt.mu))
        .collect();
    let rough = upper_concave_envelope(&points)?.monotone();
    let mut slopes: Vec<f64> = r_grid.iter().filter_map(|&r| rough.slope_at(r)).collect();
    slopes.dedup();
    let refined = pool.refine_slopes(&engine, &slopes, cfg.refine_top, cfg);
    let all: Vec<(f64, f64)> = points
        .into_iter()
        .chain(refined.iter().map(|pt| (pt.r1, pt.mu)))
        .collect();
    let curve = upper_concave_envelope(&all)?.monotone();
    Ok(r_grid
        .iter()
        .map(|&r| {
            (
                r,
                curve
                    .eval_monotone(r)
                    .expect("grid starts at the constant anchor"),
            )
        })
        .collect())
}
