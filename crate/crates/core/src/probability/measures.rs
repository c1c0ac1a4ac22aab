//! Entropy, mutual information and divergence in nats.
//!
//! All measures use `0 log 0 = 0`; a term `p log(p / 0)` with `p > 0`
//! makes a divergence infinite. Information measures of valid joints are
//! clamped at zero to absorb rounding of order `1e-16`.

use super::pmf::JointPmf;
use crate::error::{Error, Result};

pub fn entropy(p: &JointPmf) -> f64 {
    entropy_slice(p.mass())
}

/// Entropy of the marginal over `labels`.
pub fn entropy_of(p: &JointPmf, labels: &[&str]) -> Result<f64> {
    let positions = p.positions(labels)?;
    Ok(entropy_slice(&p.project(&positions)))
}

pub(crate) fn entropy_slice(p: &[f64]) -> f64 {
    p.iter().filter(|&&m| m > 0.0).map(|&m| -m * m.ln()).sum()
}

/// `I(A; B)` between two disjoint, nonempty groups of axes.
pub fn mutual_information(p: &JointPmf, a: &[&str], b: &[&str]) -> Result<f64> {
    conditional_mutual_information(p, a, b, &[])
}

/// `I(A; B | C)`; `c` may be empty.
pub fn conditional_mutual_information(
    p: &JointPmf,
    a: &[&str],
    b: &[&str],
    c: &[&str],
) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Axis(
            "mutual information needs two nonempty groups".into(),
        ));
    }
    let mut labels = Vec::with_capacity(a.len() + b.len() + c.len());
    labels.extend_from_slice(a);
    labels.extend_from_slice(b);
    labels.extend_from_slice(c);
    // `positions` rejects repeats, which covers overlapping groups
    let positions = p
        .positions(&labels)
        .map_err(|e| Error::Axis(format!("{e} (groups must be disjoint and present)")))?;
    let shape = p.shape();
    let size = |range: &[usize]| range.iter().map(|&i| shape[i]).product::<usize>();
    let na = size(&positions[..a.len()]);
    let nb = size(&positions[a.len()..a.len() + b.len()]);
    let nc = size(&positions[a.len() + b.len()..]);
    let table = p.project(&positions);
    Ok(cmi_table(&table, na, nb, nc))
}

/// `I(A; B | C)` for a row-major table indexed `[a][b][c]`.
pub(crate) fn cmi_table(table: &[f64], na: usize, nb: usize, nc: usize) -> f64 {
    debug_assert_eq!(table.len(), na * nb * nc);
    let mut pc = vec![0.0; nc];
    let mut pac = vec![0.0; na * nc];
    let mut pbc = vec![0.0; nb * nc];
    for ia in 0..na {
        for ib in 0..nb {
            let row = &table[(ia * nb + ib) * nc..(ia * nb + ib + 1) * nc];
            for (ic, &m) in row.iter().enumerate() {
                pc[ic] += m;
                pac[ia * nc + ic] += m;
                pbc[ib * nc + ic] += m;
            }
        }
    }
    let mut total = 0.0;
    for ia in 0..na {
        for ib in 0..nb {
            let row = &table[(ia * nb + ib) * nc..(ia * nb + ib + 1) * nc];
            for (ic, &m) in row.iter().enumerate() {
                if m > 0.0 {
                    total += m * (m * pc[ic] / (pac[ia * nc + ic] * pbc[ib * nc + ic])).ln();
                }
            }
        }
    }
    total.max(0.0)
}

/// `I(A; B)` for a row-major table indexed `[a][b]`.
pub(crate) fn mi_table(table: &[f64], na: usize, nb: usize) -> f64 {
    cmi_table(table, na, nb, 1)
}

/// `D(p || q)`. Axes are matched by label; `q` may list them in another
/// order. Returns `f64::INFINITY` when `p` is not absolutely continuous
/// with respect to `q`.
pub fn kl_divergence(p: &JointPmf, q: &JointPmf) -> Result<f64> {
    if p.axes().len() != q.axes().len() {
        return Err(Error::Axis("kl_divergence: axis count mismatch".into()));
    }
    let labels = p.labels();
    let q = q.marginalize(&labels)?;
    if q.axes() != p.axes() {
        return Err(Error::Axis("kl_divergence: alphabet sizes differ".into()));
    }
    Ok(kl_slice(p.mass(), q.mass()))
}

pub(crate) fn kl_slice(p: &[f64], q: &[f64]) -> f64 {
    let mut total = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a > 0.0 {
            if b <= 0.0 {
                return f64::INFINITY;
            }
            total += a * (a / b).ln();
        }
    }
    total.max(0.0)
}
