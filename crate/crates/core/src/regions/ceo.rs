//! CEO problem under a mutual-information constraint, its log-loss
//! counterpart and the information-bottleneck special case.
//!
//! Encoders observe `x1..xJ` and must be informative about unobserved
//! targets `y1..yL`. Subset pairs here index two different families: `a`
//! ranges over encoders and `b` over targets.

use std::collections::BTreeMap;

use super::multi::{aux_label, multi_joint, source_label, IndexSet, SubsetPair};
use crate::error::{Error, Result};
use crate::probability::{entropy_slice, mutual_information, Alphabet, Channel, JointPmf};

/// Label of target `l` (0-based): `y{l+1}`.
pub fn target_label(l: usize) -> String {
    format!("y{}", l + 1)
}

/// `(nu, R_J)` with `nu[A, B] = I(u_A; y_B)` and `R_j = I(u_j; x_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CeoPoint {
    pub nu: BTreeMap<SubsetPair, f64>,
    pub rates: Vec<f64>,
}

/// Evaluates the CEO point generated by per-encoder channels. `p` is a
/// joint over `x1..xJ, y1..yL`; `channels.len()` fixes `J`.
pub fn ceo_point(p: &JointPmf, channels: &[Channel]) -> Result<CeoPoint> {
    let j = channels.len();
    let l = p.axes().len().checked_sub(j).unwrap_or(0);
    if j == 0 || l == 0 {
        return Err(Error::Axis("expected axes x1..xJ and y1..yL".into()));
    }
    let xs: Vec<String> = (0..j).map(source_label).collect();
    let ys: Vec<String> = (0..l).map(target_label).collect();
    let us: Vec<String> = (0..j).map(aux_label).collect();
    for name in xs.iter().chain(&ys) {
        if !p.has_axis(name) {
            return Err(Error::Axis(format!("missing axis {name}")));
        }
    }
    // attach the targets to the encoder joint through x: p(u, x, y)
    let x_refs: Vec<&str> = xs.iter().map(String::as_str).collect();
    let encoders = multi_joint(&p.marginalize(&x_refs)?, channels)?;
    let all: Vec<&str> = xs.iter().chain(&ys).map(String::as_str).collect();
    let source = p.marginalize(&all)?;
    let nx: usize = source.shape()[..j].iter().product();
    let ny: usize = source.shape()[j..].iter().product();
    let nu: usize = channels.iter().map(Channel::outputs).product();
    let mut axes = source.axes().to_vec();
    for (i, ch) in channels.iter().enumerate() {
        axes.push(Alphabet::new(aux_label(i), ch.outputs())?);
    }
    let mut mass = Vec::with_capacity(nx * ny * nu);
    let enc = encoders.mass();
    let src = source.mass();
    // cells ordered (x, y, u); p(u | x) = enc[x, u] / p(x)
    for xi in 0..nx {
        let px: f64 = (0..ny).map(|yi| src[xi * ny + yi]).sum();
        for yi in 0..ny {
            let pxy = src[xi * ny + yi];
            for ui in 0..nu {
                let cond = if px > 0.0 {
                    enc[xi * nu + ui] / px
                } else {
                    0.0
                };
                mass.push(pxy * cond);
            }
        }
    }
    let joint = JointPmf::new(axes, mass)?;
    let rates = (0..j)
        .map(|i| mutual_information(&joint, &[&us[i]], &[&xs[i]]))
        .collect::<Result<Vec<_>>>()?;
    let mut nu_map = BTreeMap::new();
    for a in IndexSet::full(j).subsets().filter(|s| !s.is_empty()) {
        for b in IndexSet::full(l).subsets().filter(|s| !s.is_empty()) {
            let ua: Vec<&str> = a.iter().map(|i| us[i].as_str()).collect();
            let yb: Vec<&str> = b.iter().map(|i| ys[i].as_str()).collect();
            nu_map.insert(
                SubsetPair::cross(a, b)?,
                mutual_information(&joint, &ua, &yb)?,
            );
        }
    }
    Ok(CeoPoint { nu: nu_map, rates })
}

/// `(I(u; x), I(u; z))` for `u - x - z`; a point under the
/// information-bottleneck curve.
pub fn ib_point(p_xz: &JointPmf, ch_u: &Channel) -> Result<(f64, f64)> {
    let relabeled = p_xz.relabel(&[("x", "x1"), ("z", "y1")])?;
    let point = ceo_point(&relabeled, std::slice::from_ref(ch_u))?;
    let single = SubsetPair::cross(IndexSet::of(&[1]), IndexSet::of(&[1]))?;
    Ok((point.rates[0], point.nu[&single]))
}

/// Probabilistic reconstruction `g(y | u)`, one pmf per encoder output.
#[derive(Clone, Debug, PartialEq)]
pub struct Decoder {
    outputs: usize,
    reconstructions: usize,
    rows: Vec<f64>,
}

impl Decoder {
    /// Row-major `outputs x reconstructions` table; rows are renormalized
    /// within tolerance like channels.
    pub fn new(outputs: usize, reconstructions: usize, rows: Vec<f64>) -> Result<Self> {
        let ch = Channel::new(outputs, reconstructions, rows)?;
        Ok(Self {
            outputs,
            reconstructions,
            rows: ch.table().to_vec(),
        })
    }

    /// Ignores the description and always reconstructs `pmf`.
    pub fn constant(outputs: usize, pmf: &[f64]) -> Result<Self> {
        Self::new(outputs, pmf.len(), pmf.repeat(outputs))
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn reconstructions(&self) -> usize {
        self.reconstructions
    }

    pub fn row(&self, u: usize) -> &[f64] {
        &self.rows[u * self.reconstructions..(u + 1) * self.reconstructions]
    }
}

/// `[u][y]` table of `p` with `u` the flattened `u_labels` axes.
fn split(p: &JointPmf, u_labels: &[&str], y_labels: &[&str]) -> Result<(Vec<f64>, usize, usize)> {
    let mut all = u_labels.to_vec();
    all.extend_from_slice(y_labels);
    if u_labels.is_empty() || y_labels.is_empty() {
        return Err(Error::Axis(
            "need nonempty description and target groups".into(),
        ));
    }
    let ordered = p.marginalize(&all)?;
    let shape = ordered.shape();
    let nu = shape[..u_labels.len()].iter().product();
    let ny = shape[u_labels.len()..].iter().product();
    Ok((ordered.mass().to_vec(), nu, ny))
}

/// `E[zeta] = (H(y) + E log g(y | u)) / n`, in nats per symbol, where
/// `y` is the flattened `y_labels` block of length `n`.
pub fn log_loss_fidelity(
    p: &JointPmf,
    u_labels: &[&str],
    y_labels: &[&str],
    decoder: &Decoder,
    blocklength: usize,
) -> Result<f64> {
    if blocklength == 0 {
        return Err(Error::Domain {
            what: "blocklength",
            value: 0.0,
        });
    }
    let (table, nu, ny) = split(p, u_labels, y_labels)?;
    if decoder.outputs() != nu || decoder.reconstructions() != ny {
        return Err(Error::Axis(format!(
            "decoder is {}x{} but the joint is {nu}x{ny}",
            decoder.outputs(),
            decoder.reconstructions()
        )));
    }
    let mut py = vec![0.0; ny];
    let mut cross = 0.0;
    for u in 0..nu {
        let g = decoder.row(u);
        for y in 0..ny {
            let m = table[u * ny + y];
            py[y] += m;
            if m > 0.0 {
                if g[y] <= 0.0 {
                    return Err(Error::Support(format!(
                        "decoder gives zero mass to outcome {y} after description {u}"
                    )));
                }
                cross += m * g[y].ln();
            }
        }
    }
    Ok((entropy_slice(&py) + cross) / blocklength as f64)
}

/// The posterior `p(y | u)`; uniform for descriptions of probability zero.
pub fn optimal_posterior_decoder(
    p: &JointPmf,
    u_labels: &[&str],
    y_labels: &[&str],
) -> Result<Decoder> {
    let (table, nu, ny) = split(p, u_labels, y_labels)?;
    let mut rows = Vec::with_capacity(nu * ny);
    for u in 0..nu {
        let row = &table[u * ny..(u + 1) * ny];
        let pu: f64 = row.iter().sum();
        if pu > 0.0 {
            rows.extend(row.iter().map(|m| m / pu));
        } else {
            rows.extend(std::iter::repeat_n(1.0 / ny as f64, ny));
        }
    }
    Decoder::new(nu, ny, rows)
}

/// `sum_u p(u) TV(g(. | u), h(. | u))` over the `u` marginal of `p`.
pub fn decoder_distance(
    p: &JointPmf,
    u_labels: &[&str],
    y_labels: &[&str],
    g: &Decoder,
    h: &Decoder,
) -> Result<f64> {
    let (table, nu, ny) = split(p, u_labels, y_labels)?;
    for d in [g, h] {
        if d.outputs() != nu || d.reconstructions() != ny {
            return Err(Error::Axis("decoder shape does not match the joint".into()));
        }
    }
    let mut total = 0.0;
    for u in 0..nu {
        let pu: f64 = table[u * ny..(u + 1) * ny].iter().sum();
        let tv: f64 = g
            .row(u)
            .iter()
            .zip(h.row(u))
            .map(|(a, b)| (a - b).abs())
            .sum();
        total += pu * 0.5 * tv;
    }
    Ok(total)
}
