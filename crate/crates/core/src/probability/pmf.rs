use std::fmt;

use crate::error::{Error, Result};

/// Input pmfs whose total mass is within this distance of 1 are
/// renormalized; anything further off is rejected.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// Upper bound on the number of cells of a dense joint pmf.
pub const MAX_CELLS: usize = 10_000_000;

/// A labeled finite alphabet `{0, .., size - 1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Alphabet {
    label: String,
    size: usize,
}

impl Alphabet {
    pub fn new(label: impl Into<String>, size: usize) -> Result<Self> {
        let label = label.into();
        if size == 0 {
            return Err(Error::Axis(format!("alphabet `{label}` is empty")));
        }
        if label.is_empty() || label.chars().any(char::is_whitespace) {
            return Err(Error::Axis(format!("invalid axis label {label:?}")));
        }
        Ok(Self { label, size })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub(crate) fn relabeled(&self, label: &str) -> Result<Self> {
        Self::new(label, self.size)
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.label, self.size)
    }
}

/// Dense joint pmf over an ordered list of labeled axes, stored row-major
/// (last axis fastest).
#[derive(Clone, Debug, PartialEq)]
pub struct JointPmf {
    axes: Vec<Alphabet>,
    mass: Vec<f64>,
}

impl JointPmf {
    pub fn new(axes: Vec<Alphabet>, mass: Vec<f64>) -> Result<Self> {
        let cells = cell_count(&axes)?;
        for (i, a) in axes.iter().enumerate() {
            if axes[..i].iter().any(|b| b.label == a.label) {
                return Err(Error::Axis(format!("duplicate axis label `{}`", a.label)));
            }
        }
        if mass.len() != cells {
            return Err(Error::Axis(format!(
                "mass has {} cells but axes describe {cells}",
                mass.len()
            )));
        }
        if let Some(&bad) = mass.iter().find(|m| !(m.is_finite() && **m >= 0.0)) {
            return Err(Error::Domain {
                what: "probability mass",
                value: bad,
            });
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::Normalization { total });
        }
        let mass = if total == 1.0 {
            mass
        } else {
            mass.into_iter().map(|m| m / total).collect()
        };
        Ok(Self { axes, mass })
    }

    /// Builds a pmf by evaluating `f` at every multi-index.
    pub fn from_fn(axes: Vec<Alphabet>, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let shape: Vec<usize> = axes.iter().map(Alphabet::size).collect();
        let cells = cell_count(&axes)?;
        let mut mass = Vec::with_capacity(cells);
        let mut index = vec![0; shape.len()];
        for _ in 0..cells {
            mass.push(f(&index));
            advance(&mut index, &shape);
        }
        Self::new(axes, mass)
    }

    /// Uniform pmf on a single axis.
    pub fn uniform(label: &str, size: usize) -> Result<Self> {
        let axis = Alphabet::new(label, size)?;
        Self::new(vec![axis], vec![1.0 / size as f64; size])
    }

    /// Single-axis pmf from a probability vector.
    pub fn from_vector(label: &str, probabilities: &[f64]) -> Result<Self> {
        let axis = Alphabet::new(label, probabilities.len())?;
        Self::new(vec![axis], probabilities.to_vec())
    }

    pub fn axes(&self) -> &[Alphabet] {
        &self.axes
    }

    pub fn labels(&self) -> Vec<&str> {
        self.axes.iter().map(Alphabet::label).collect()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(Alphabet::size).collect()
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn axis(&self, label: &str) -> Result<usize> {
        self.axes
            .iter()
            .position(|a| a.label == label)
            .ok_or_else(|| Error::Axis(format!("no axis labeled `{label}`")))
    }

    pub fn size_of(&self, label: &str) -> Result<usize> {
        Ok(self.axes[self.axis(label)?].size)
    }

    pub fn has_axis(&self, label: &str) -> bool {
        self.axes.iter().any(|a| a.label == label)
    }

    /// Mass at a multi-index given in axis order.
    pub fn get(&self, index: &[usize]) -> f64 {
        assert_eq!(index.len(), self.axes.len(), "index arity");
        let mut offset = 0;
        for (i, a) in index.iter().zip(&self.axes) {
            assert!(*i < a.size, "index out of range");
            offset = offset * a.size + i;
        }
        self.mass[offset]
    }

    /// Iterates over `(multi-index, mass)` in storage order.
    pub fn cells(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        let shape = self.shape();
        let mut index = vec![0; shape.len()];
        self.mass.iter().map(move |&m| {
            let current = index.clone();
            advance(&mut index, &shape);
            (current, m)
        })
    }

    /// Sums out every axis not in `keep`; the result has its axes in the
    /// order given by `keep`.
    pub fn marginalize(&self, keep: &[&str]) -> Result<JointPmf> {
        if keep.is_empty() {
            return Err(Error::Axis("marginalize needs at least one axis".into()));
        }
        let positions = self.positions(keep)?;
        let mass = self.project(&positions);
        let axes = positions.iter().map(|&i| self.axes[i].clone()).collect();
        Ok(JointPmf { axes, mass })
    }

    /// Renames axes; `renames` maps old labels to new ones.
    pub fn relabel(&self, renames: &[(&str, &str)]) -> Result<JointPmf> {
        let mut axes = self.axes.clone();
        for (from, to) in renames {
            let i = self.axis(from)?;
            axes[i] = axes[i].relabeled(to)?;
        }
        JointPmf::new(axes, self.mass.clone())
    }

    /// Product pmf `p(a) q(b)` over the concatenated axes.
    pub fn product(&self, other: &JointPmf) -> Result<JointPmf> {
        let mut axes = self.axes.clone();
        axes.extend(other.axes.iter().cloned());
        cell_count(&axes)?;
        let mut mass = Vec::with_capacity(self.mass.len() * other.mass.len());
        for &a in &self.mass {
            mass.extend(other.mass.iter().map(|&b| a * b));
        }
        JointPmf::new(axes, mass)
    }

    pub(crate) fn positions(&self, labels: &[&str]) -> Result<Vec<usize>> {
        let mut positions = Vec::with_capacity(labels.len());
        for l in labels {
            let i = self.axis(l)?;
            if positions.contains(&i) {
                return Err(Error::Axis(format!("axis `{l}` listed twice")));
            }
            positions.push(i);
        }
        Ok(positions)
    }

    /// Marginal table over the axes at `positions` (in that order),
    /// flattened row-major. Empty `positions` yields `[1.0]`.
    pub(crate) fn project(&self, positions: &[usize]) -> Vec<f64> {
        let shape = self.shape();
        let mut out_stride = vec![0usize; shape.len()];
        let mut stride = 1;
        for &p in positions.iter().rev() {
            out_stride[p] = stride;
            stride *= shape[p];
        }
        let mut out = vec![0.0; stride];
        if positions.len() == shape.len() && positions.iter().enumerate().all(|(i, &p)| i == p) {
            out.copy_from_slice(&self.mass);
            return out;
        }
        let mut index = vec![0usize; shape.len()];
        let mut offset = 0usize;
        for &m in &self.mass {
            out[offset] += m;
            // odometer step, keeping the output offset in sync
            for d in (0..shape.len()).rev() {
                index[d] += 1;
                offset += out_stride[d];
                if index[d] < shape[d] {
                    break;
                }
                offset -= out_stride[d] * shape[d];
                index[d] = 0;
            }
        }
        out
    }
}

fn cell_count(axes: &[Alphabet]) -> Result<usize> {
    let mut cells: usize = 1;
    for a in axes {
        cells = cells
            .checked_mul(a.size)
            .filter(|&c| c <= MAX_CELLS)
            .ok_or_else(|| Error::Size(format!("joint pmf exceeds {MAX_CELLS} cells")))?;
    }
    Ok(cells)
}

pub(crate) fn advance(index: &mut [usize], shape: &[usize]) {
    for d in (0..shape.len()).rev() {
        index[d] += 1;
        if index[d] < shape[d] {
            return;
        }
        index[d] = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_coins() -> JointPmf {
        let axes = vec![
            Alphabet::new("a", 2).unwrap(),
            Alphabet::new("b", 3).unwrap(),
        ];
        JointPmf::new(axes, vec![0.1, 0.2, 0.1, 0.3, 0.2, 0.1]).unwrap()
    }

    #[test]
    fn rejects_unnormalized_mass() {
        let axes = vec![Alphabet::new("x", 2).unwrap()];
        let err = JointPmf::new(axes, vec![0.5, 0.6]).unwrap_err();
        assert!(matches!(err, Error::Normalization { .. }));
    }

    #[test]
    fn renormalizes_small_drift() {
        let axes = vec![Alphabet::new("x", 2).unwrap()];
        let p = JointPmf::new(axes, vec![0.5, 0.5 + 5e-10]).unwrap();
        assert!((p.mass().iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_duplicate_labels_and_negative_mass() {
        let x = Alphabet::new("x", 1).unwrap();
        assert!(JointPmf::new(vec![x.clone(), x.clone()], vec![1.0]).is_err());
        let axes = vec![Alphabet::new("x", 2).unwrap()];
        assert!(JointPmf::new(axes, vec![1.5, -0.5]).is_err());
    }

    #[test]
    fn marginalize_reorders_and_sums() {
        let p = two_coins();
        let b = p.marginalize(&["b"]).unwrap();
        let expect = [0.4, 0.4, 0.2];
        for (m, e) in b.mass().iter().zip(expect) {
            assert!((m - e).abs() < 1e-15);
        }
        let ba = p.marginalize(&["b", "a"]).unwrap();
        assert_eq!(ba.labels(), vec!["b", "a"]);
        assert_eq!(ba.get(&[2, 0]), p.get(&[0, 2]));
        assert_eq!(ba.get(&[1, 1]), p.get(&[1, 1]));
    }

    #[test]
    fn marginalize_all_axes_is_identity() {
        let p = two_coins();
        assert_eq!(p.marginalize(&["a", "b"]).unwrap(), p);
    }

    #[test]
    fn marginalize_errors() {
        let p = two_coins();
        assert!(matches!(p.marginalize(&[]), Err(Error::Axis(_))));
        assert!(matches!(p.marginalize(&["c"]), Err(Error::Axis(_))));
        assert!(matches!(p.marginalize(&["a", "a"]), Err(Error::Axis(_))));
    }

    #[test]
    fn independent_coins_marginal() {
        let c = JointPmf::uniform("c", 2).unwrap();
        let d = JointPmf::uniform("d", 2).unwrap();
        let joint = c.product(&d).unwrap();
        assert_eq!(joint.marginalize(&["d"]).unwrap().mass(), &[0.5, 0.5]);
    }

    #[test]
    fn cell_guard() {
        let axes = vec![
            Alphabet::new("a", 10_000).unwrap(),
            Alphabet::new("b", 10_000).unwrap(),
        ];
        assert!(matches!(
            JointPmf::from_fn(axes, |_| 0.0),
            Err(Error::Size(_))
        ));
    }
}
