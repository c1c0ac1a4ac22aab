use std::f64::consts::LN_2;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bicluster::optimize::{
    self, cardinality_robustness, conjecture_test, default_alpha_grid, dsbs_inner_boundary,
    dsbs_outer_boundary_sampled, sample_region_points, SupportWeight, Variant,
};
use bicluster::probability::{binary_entropy, entropy_of, mutual_information, Channel, JointPmf};
use bicluster::regions::sb_point;
use bicluster::typicality::{
    best_theta, enumerate_types, sequence_probability_identity_check, type_count,
    typical_sequences, typical_set_report,
};

use crate::error::{CliError, CliResult};
use crate::output::{number, Document, Manifest};
use crate::source::load_source;
use crate::{
    BruteforceArgs, CardinalityArgs, ConjectureArgs, GapArgs, IbArgs, Outcome, RegionArgs,
    SurfaceArgs, TypicalityArgs,
};

const INNER_ALPHA_GRID: usize = 4096;
const GAP_TOLERANCE: f64 = 1e-9;
const CHECK_TOLERANCE: f64 = 1e-12;

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn check_grid(grid: usize) -> CliResult<()> {
    if grid < 2 {
        return Err(invalid("--grid needs at least 2 points"));
    }
    Ok(())
}

fn even(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| {
            if k + 1 == n {
                hi
            } else {
                lo + (hi - lo) * k as f64 / (n - 1) as f64
            }
        })
        .collect()
}

fn write(doc: &Document, path: &Path, outcome: &mut Outcome) -> CliResult<()> {
    doc.write(path)?;
    outcome.files.push(path.to_path_buf());
    Ok(())
}

fn channel_rows(doc: &mut Document, name: &str, ch: &Channel) {
    doc.comment(format!(
        "{name}: {} rows of {} outputs",
        ch.inputs(),
        ch.outputs()
    ));
    for i in 0..ch.inputs() {
        doc.reals(ch.row(i));
    }
}

pub fn dsbs_surface(a: &SurfaceArgs) -> CliResult<Outcome> {
    check_grid(a.grid)?;
    if !(a.p > 0.0 && a.p <= 0.5) {
        return Err(invalid(format!("--p must lie in (0, 1/2], got {}", a.p)));
    }
    let u = a.output.units;
    let alphas = even(0.0, 0.5, a.grid);
    let manifest = Manifest::new("dsbs-surface")
        .with("p", a.p)
        .with("grid", format!("{} points on [0, 0.5] per axis", a.grid))
        .with("units", u.name());
    let mut doc = Document::new(&manifest);
    doc.comment("columns: R1 R2 mu (row-major in alpha, beta)");
    let mut mesh = Vec::with_capacity(a.grid * a.grid);
    for &alpha in &alphas {
        for &beta in &alphas {
            let pt = sb_point(a.p, alpha, beta)?;
            doc.reals(&[u.scale(pt.r1), u.scale(pt.r2), u.scale(pt.mu)]);
            mesh.push(pt);
        }
    }
    let mut outcome = Outcome::default();
    let corner = mesh[0];
    let expected_mu = LN_2 - binary_entropy(a.p)?;
    if (corner.r1 - LN_2).abs() > CHECK_TOLERANCE
        || (corner.r2 - LN_2).abs() > CHECK_TOLERANCE
        || (corner.mu - expected_mu).abs() > CHECK_TOLERANCE
    {
        outcome.failures.push(format!(
            "corner {corner:?} differs from (ln 2, ln 2, {expected_mu})"
        ));
    }
    let n = a.grid;
    let at = |i: usize, j: usize| mesh[i * n + j];
    let mut worst: f64 = 0.0;
    for fixed in 0..n {
        let along_alpha: Vec<(f64, f64)> = (0..n)
            .rev()
            .map(|i| (at(i, fixed).r1, at(i, fixed).mu))
            .collect();
        let along_beta: Vec<(f64, f64)> = (0..n)
            .rev()
            .map(|j| (at(fixed, j).r2, at(fixed, j).mu))
            .collect();
        worst = worst
            .max(concavity_violation(&along_alpha))
            .max(concavity_violation(&along_beta));
    }
    if worst > GAP_TOLERANCE {
        outcome.failures.push(format!(
            "surface is not concave along an axis (excess slope {worst:e})"
        ));
    }
    outcome.summary.push(format!("rows {}", mesh.len()));
    write(&doc, &a.output.out, &mut outcome)?;
    Ok(outcome)
}

/// Largest increase between consecutive slopes of a curve with increasing
/// abscissae.
pub(crate) fn concavity_violation(curve: &[(f64, f64)]) -> f64 {
    let slopes: Vec<f64> = curve
        .windows(2)
        .filter(|w| w[1].0 > w[0].0)
        .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
        .collect();
    slopes.windows(2).map(|s| s[1] - s[0]).fold(0.0, f64::max)
}

pub fn dsbs_gap(a: &GapArgs) -> CliResult<Outcome> {
    check_grid(a.grid)?;
    let (lo, hi) = a.window;
    if !(lo < hi && lo >= 0.0) {
        return Err(invalid(format!("bad window [{lo}, {hi}]")));
    }
    let cfg = a.sampling.config(a.caps);
    let u = a.output.units;
    let mut rates = even(lo, hi, a.grid);
    let alphas = default_alpha_grid(INNER_ALPHA_GRID);
    let inner = dsbs_inner_boundary(a.p, &alphas)?;
    let outer = dsbs_outer_boundary_sampled(a.p, &rates, &cfg)?;
    let top = inner.max_rate().min(outer.max_rate());
    let bottom = inner.min_rate().max(outer.min_rate());
    rates.retain(|&r| r >= bottom && r <= top);
    if top >= lo && top <= hi && rates.last() != Some(&top) {
        rates.push(top);
    }
    if rates.is_empty() {
        return Err(invalid("window does not meet the curves' rate range"));
    }
    let manifest = a
        .sampling
        .record(
            Manifest::new("dsbs-gap")
                .with("p", a.p)
                .with("window", format!("{lo},{hi}"))
                .with("grid", a.grid)
                .with(
                    "caps",
                    a.caps.map_or("2,2".into(), |c| format!("{},{}", c.0, c.1)),
                )
                .with("inner_alpha_grid", format!("0.5 (k/{INNER_ALPHA_GRID})^3")),
        )
        .with("units", u.name());
    let mut outer_doc = Document::new(&manifest);
    let mut inner_doc = Document::new(&manifest);
    outer_doc.comment("sampled outer envelope; columns: R mu");
    inner_doc.comment("inner envelope; columns: R mu");
    let mut outcome = Outcome::default();
    let mut best = (f64::NEG_INFINITY, lo);
    for &r in &rates {
        let (o, i) = (
            outer.eval(r).expect("in range"),
            inner.eval(r).expect("in range"),
        );
        outer_doc.reals(&[u.scale(r), u.scale(o)]);
        inner_doc.reals(&[u.scale(r), u.scale(i)]);
        let gap = o - i;
        if gap > best.0 {
            best = (gap, r);
        }
        if gap < -GAP_TOLERANCE {
            outcome
                .failures
                .push(format!("outer below inner at R = {r}: gap {gap:e}"));
        }
    }
    outcome.summary.push(format!(
        "max_gap {} at R {}",
        number(u.scale(best.0)),
        number(u.scale(best.1))
    ));
    let dir = &a.output.out;
    write(&outer_doc, &dir.join("outer.dat"), &mut outcome)?;
    write(&inner_doc, &dir.join("inner.dat"), &mut outcome)?;
    Ok(outcome)
}

fn xz_source(spec: &str) -> CliResult<JointPmf> {
    let src = load_source(spec)?;
    if src.axes().len() != 2 || !src.has_axis("x") || !src.has_axis("z") {
        return Err(invalid(format!(
            "source `{spec}` must be a joint over axes x and z"
        )));
    }
    Ok(src)
}

pub fn ib_curve(a: &IbArgs) -> CliResult<Outcome> {
    check_grid(a.grid)?;
    let src = xz_source(&a.source)?;
    let h_x = entropy_of(&src, &["x"])?;
    let i_xz = mutual_information(&src, &["x"], &["z"])?;
    let rmax = a.rmax.unwrap_or(h_x);
    if !(rmax > 0.0 && rmax.is_finite()) {
        return Err(invalid(format!("--rmax must be positive, got {rmax}")));
    }
    let nx = src.size_of("x")?;
    let u_cap = a.caps.unwrap_or(nx + 1);
    let mut cfg = a.sampling.config(None);
    cfg.u_cap = Some(u_cap);
    let grid = even(0.0, rmax, a.grid);
    let curve = optimize::ib_curve(&src, &grid, &cfg)?;
    let u = a.output.units;
    let manifest = a
        .sampling
        .record(
            Manifest::new("ib-curve")
                .with("source", &a.source)
                .with("grid", format!("{} points on [0, {rmax}]", a.grid))
                .with("u_cap", u_cap),
        )
        .with("units", u.name());
    let mut doc = Document::new(&manifest);
    doc.comment("columns: R mu");
    let mut outcome = Outcome::default();
    for &(r, mu) in &curve {
        doc.reals(&[u.scale(r), u.scale(mu)]);
        if mu > i_xz + GAP_TOLERANCE {
            outcome
                .failures
                .push(format!("relevance {mu} exceeds I(x;z) = {i_xz} at R = {r}"));
        }
    }
    if curve[0].1 > GAP_TOLERANCE {
        outcome
            .failures
            .push(format!("relevance at R = 0 is {}", curve[0].1));
    }
    if curve.windows(2).any(|w| w[1].1 < w[0].1) {
        outcome.failures.push("curve decreases".into());
    }
    if concavity_violation(&curve) > GAP_TOLERANCE {
        outcome.failures.push("curve is not concave".into());
    }
    outcome.summary.push(format!(
        "mu(rmax) {} I(x;z) {}",
        number(u.scale(curve[curve.len() - 1].1)),
        number(u.scale(i_xz))
    ));
    write(&doc, &a.output.out, &mut outcome)?;
    Ok(outcome)
}

pub fn conjecture(a: &ConjectureArgs) -> CliResult<Outcome> {
    let cfg = a.sampling.config(None);
    let report = conjecture_test(a.p, &cfg)?;
    let u = a.output.units;
    let manifest = a
        .sampling
        .record(Manifest::new("conjecture").with("p", a.p))
        .with("units", u.name());
    let mut doc = Document::new(&manifest);
    doc.comment("columns: min_margin alpha beta I(u;x) I(v;z) I(u;v) worst_index samples");
    let pt = report.worst_point;
    let mut row: Vec<String> = [u.scale(report.min_margin), report.alpha, report.beta]
        .into_iter()
        .chain([pt.r1, pt.r2, pt.mu].map(|x| u.scale(x)))
        .map(number)
        .collect();
    row.push(report.worst_index.to_string());
    row.push(report.samples.to_string());
    doc.row(&row);
    channel_rows(&mut doc, "minimizer p(u|x)", &report.worst.ch_u);
    channel_rows(&mut doc, "minimizer p(v|z)", &report.worst.ch_v);
    let mut outcome = Outcome::default();
    if report.min_margin < -GAP_TOLERANCE {
        outcome.failures.push(format!(
            "COUNTEREXAMPLE CANDIDATE: margin {:e} at pool index {}",
            report.min_margin, report.worst_index
        ));
    }
    outcome.summary.push(format!(
        "min_margin {} samples {}",
        number(u.scale(report.min_margin)),
        report.samples
    ));
    write(&doc, &a.output.out, &mut outcome)?;
    Ok(outcome)
}

pub fn bruteforce(a: &BruteforceArgs) -> CliResult<Outcome> {
    let src = xz_source(&a.source)?;
    let (value, code) = best_theta(&src, a.n, a.m1, a.m2)?;
    let i_xz = mutual_information(&src, &["x"], &["z"])?;
    let n = a.n as f64;
    let (cap1, cap2) = ((a.m1 as f64).ln() / n, (a.m2 as f64).ln() / n);
    let u = a.output.units;
    let manifest = Manifest::new("bruteforce")
        .with("source", &a.source)
        .with("n", a.n)
        .with("m1", a.m1)
        .with("m2", a.m2)
        .with("units", u.name());
    let mut doc = Document::new(&manifest);
    doc.comment("columns: theta log(M1)/n log(M2)/n I(x;z)");
    doc.reals(&[value, cap1, cap2, i_xz].map(|x| u.scale(x)));
    doc.comment("f: x-block index (lexicographic, first letter most significant) and label");
    for (i, l) in code.f.iter().enumerate() {
        doc.row(&[i.to_string(), l.to_string()]);
    }
    doc.comment("g: z-block index and label");
    for (i, l) in code.g.iter().enumerate() {
        doc.row(&[i.to_string(), l.to_string()]);
    }
    let mut outcome = Outcome::default();
    for (name, bound) in [("log(M1)/n", cap1), ("log(M2)/n", cap2), ("I(x;z)", i_xz)] {
        if value > bound + CHECK_TOLERANCE {
            outcome
                .failures
                .push(format!("theta {value} exceeds {name} = {bound}"));
        }
    }
    if value < 0.0 {
        outcome.failures.push(format!("theta {value} is negative"));
    }
    outcome
        .summary
        .push(format!("theta {}", number(u.scale(value))));
    write(&doc, &a.output.out, &mut outcome)?;
    Ok(outcome)
}

pub fn region_sample(a: &RegionArgs) -> CliResult<Outcome> {
    let src = xz_source(&a.source)?;
    let cfg = a.sampling.config(a.caps);
    let points = sample_region_points(&src, &cfg, a.variant)?;
    let u = a.output.units;
    let manifest = Manifest::new("region-sample")
        .with("source", &a.source)
        .with("variant", a.variant)
        .with(
            "caps",
            a.caps
                .map_or("default".into(), |c| format!("{},{}", c.0, c.1)),
        )
        .with("seed", a.sampling.seed)
        .with("samples", a.sampling.samples)
        .with("concentration", a.sampling.concentration)
        .with("units", u.name());
    let mut doc = Document::new(&manifest);
    doc.comment("columns: index mu R1 R2 (rejected samples omitted)");
    let mut outcome = Outcome::default();
    let mut rejected = 0;
    for (i, pt) in points.iter().enumerate() {
        let Some(pt) = pt else {
            rejected += 1;
            continue;
        };
        let mut row = vec![i.to_string()];
        row.extend([pt.mu, pt.r1, pt.r2].map(|x| number(u.scale(x))));
        doc.row(&row);
        let bound = match a.variant {
            Variant::Bottleneck => pt.r1,
            _ => pt.r1.min(pt.r2),
        };
        let finite = pt.mu.is_finite() && pt.r1.is_finite() && pt.r2.is_finite();
        if !finite
            || pt.r1 < -CHECK_TOLERANCE
            || pt.r2 < -CHECK_TOLERANCE
            || pt.mu > bound + GAP_TOLERANCE
        {
            outcome
                .failures
                .push(format!("sample {i} gives an inconsistent point {pt:?}"));
        }
    }
    outcome.summary.push(format!(
        "feasible {} rejected {rejected}",
        points.len() - rejected
    ));
    write(&doc, &a.output.out, &mut outcome)?;
    Ok(outcome)
}

pub fn typicality_check(a: &TypicalityArgs) -> CliResult<Outcome> {
    let manifest = Manifest::new("typicality-check")
        .with("seed", a.seed)
        .with("samples", a.samples)
        .with("units", "nats");
    let mut doc = Document::new(&manifest);
    let mut outcome = Outcome::default();

    doc.comment("type counts; columns: alphabet n count (n+1)^alphabet");
    for size in 1..=4usize {
        for n in 1..=10usize {
            let count = type_count(size, n).expect("small");
            let listed = enumerate_types(size, n)?.len() as u128;
            let bound = (n as u128 + 1).pow(size as u32);
            doc.row(&[
                size.to_string(),
                n.to_string(),
                count.to_string(),
                bound.to_string(),
            ]);
            if listed != count {
                outcome.failures.push(format!(
                    "|X| = {size}, n = {n}: {listed} types listed, {count} counted"
                ));
            }
            if count >= bound {
                outcome.failures.push(format!(
                    "|X| = {size}, n = {n}: {count} types reach the bound {bound}"
                ));
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut worst: f64 = 0.0;
    for _ in 0..a.samples {
        let size = rng.random_range(2..=4);
        let n = rng.random_range(1..=30);
        let pmf = optimize::sample_channel(1, size, &mut rng)?;
        let p = pmf.row(0).to_vec();
        if p.iter().any(|&q| q <= 0.0) {
            continue;
        }
        let seq: Vec<usize> = (0..n)
            .map(|_| {
                let t: f64 = rng.random();
                let mut acc = 0.0;
                p.iter()
                    .position(|&q| {
                        acc += q;
                        t < acc
                    })
                    .unwrap_or(size - 1)
            })
            .collect();
        let joint = JointPmf::from_vector("x", &p)?;
        worst = worst.max(sequence_probability_identity_check(&joint, &seq)?);
    }
    doc.comment("sequence probability identity; columns: sequences max_residual");
    doc.row(&[a.samples.to_string(), number(worst)]);
    if worst > 1e-10 {
        outcome
            .failures
            .push(format!("probability identity residual {worst:e}"));
    }

    doc.comment(
        "Bernoulli(0.3) typical sets; columns: n delta size enumerated probability upper lower",
    );
    let bern = JointPmf::from_vector("x", &[0.7, 0.3])?;
    for n in 1..=20usize {
        for delta in [0.05, 0.1, 0.2, 0.5] {
            let r = typical_set_report(&bern, n, delta)?;
            let enumerated = if n <= 12 {
                typical_sequences(&bern, n, delta)?.count().to_string()
            } else {
                "-".into()
            };
            if enumerated != "-" && enumerated != r.size.to_string() {
                outcome.failures.push(format!(
                    "n = {n}, delta = {delta}: enumeration {enumerated} vs {}",
                    r.size
                ));
            }
            if r.size as f64 > r.upper {
                outcome.failures.push(format!(
                    "n = {n}, delta = {delta}: size {} above {}",
                    r.size, r.upper
                ));
            }
            doc.row(&[
                n.to_string(),
                number(delta),
                r.size.to_string(),
                enumerated,
                number(r.probability),
                number(r.upper),
                number(r.lower),
            ]);
        }
    }
    outcome.summary.push(format!(
        "identity residual {} failures {}",
        number(worst),
        outcome.failures.len()
    ));
    write(&doc, &a.output.out, &mut outcome)?;
    Ok(outcome)
}

fn parse_weights(s: &str) -> CliResult<Vec<SupportWeight>> {
    s.split(';')
        .filter(|w| !w.trim().is_empty())
        .map(|w| {
            let v: Vec<f64> = w
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| invalid(format!("bad weight `{w}`")))?;
            if v.len() != 3 {
                return Err(invalid(format!("weight `{w}` needs three components")));
            }
            Ok(SupportWeight::new(v[0], v[1], v[2])?)
        })
        .collect()
}

pub fn cardinality(a: &CardinalityArgs) -> CliResult<Outcome> {
    let src = xz_source(&a.source)?;
    let weights = parse_weights(&a.weights)?;
    if weights.is_empty() {
        return Err(invalid("no weights given"));
    }
    let cfg = a.sampling.config(None);
    let rows = cardinality_robustness(&src, &weights, &cfg, a.variant)?;
    let u = a.output.units;
    let manifest = a
        .sampling
        .record(
            Manifest::new("cardinality")
                .with("source", &a.source)
                .with("weights", &a.weights)
                .with("variant", a.variant),
        )
        .with("units", u.name());
    let mut doc = Document::new(&manifest);
    doc.comment("columns: l1 l2 l3 value(|X|,|Z|) value(|X|+1,|Z|+1) difference");
    let mut worst: f64 = 0.0;
    for r in &rows {
        let w = r.weight;
        doc.reals(&[
            w.l1,
            w.l2,
            w.l3,
            u.scale(r.base),
            u.scale(r.extended),
            u.scale(r.difference),
        ]);
        worst = worst.max(r.difference.abs());
    }
    let mut outcome = Outcome::default();
    outcome
        .summary
        .push(format!("max_abs_difference {}", number(u.scale(worst))));
    write(&doc, &a.output.out, &mut outcome)?;
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn concavity_measure() {
        assert_eq!(
            concavity_violation(&[(0.0, 0.0), (1.0, 1.0), (2.0, 1.5)]),
            0.0
        );
        assert!(concavity_violation(&[(0.0, 0.0), (1.0, 0.2), (2.0, 1.0)]) > 0.5);
    }

    #[test]
    fn weights_parse() {
        let w = parse_weights("1,-0.3,-0.3; 0,-1,0").unwrap();
        assert_eq!(w.len(), 2);
        assert!(parse_weights("1,0.3,0").is_err());
        assert!(parse_weights("1,0").is_err());
    }

    #[test]
    fn even_grid_hits_both_ends() {
        let g = even(0.673, 0.694, 22);
        assert_eq!(g[0], 0.673);
        assert_eq!(g[21], 0.694);
    }
}
