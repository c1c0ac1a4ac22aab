use super::pmf::{Alphabet, JointPmf, NORMALIZATION_TOLERANCE};
use crate::error::{check_probability, Error, Result};

/// Largest time-sharing alphabet accepted by [`compose_markov_mixed`].
pub const MAX_TIME_SHARING: usize = 3;

/// Row-stochastic matrix `p(output = j | input = i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    inputs: usize,
    outputs: usize,
    rows: Vec<f64>,
}

impl Channel {
    /// `rows` is row-major with `inputs` rows of length `outputs`. Rows
    /// within [`NORMALIZATION_TOLERANCE`] of 1 are renormalized.
    pub fn new(inputs: usize, outputs: usize, mut rows: Vec<f64>) -> Result<Self> {
        if inputs == 0 || outputs == 0 {
            return Err(Error::Axis("channel alphabets must be nonempty".into()));
        }
        if rows.len() != inputs * outputs {
            return Err(Error::Axis(format!(
                "channel table has {} entries, expected {inputs} x {outputs}",
                rows.len()
            )));
        }
        if let Some(&bad) = rows.iter().find(|m| !(m.is_finite() && **m >= 0.0)) {
            return Err(Error::Domain {
                what: "channel entry",
                value: bad,
            });
        }
        for row in rows.chunks_mut(outputs) {
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
                return Err(Error::Normalization { total });
            }
            if total != 1.0 {
                row.iter_mut().for_each(|m| *m /= total);
            }
        }
        Ok(Self {
            inputs,
            outputs,
            rows,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let outputs = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != outputs) {
            return Err(Error::Axis("ragged channel rows".into()));
        }
        Self::new(rows.len(), outputs, rows.concat())
    }

    pub fn identity(size: usize) -> Result<Self> {
        let mut rows = vec![0.0; size * size];
        for i in 0..size {
            rows[i * size + i] = 1.0;
        }
        Self::new(size, size, rows)
    }

    /// Every input maps to the same output pmf.
    pub fn constant(inputs: usize, output: &[f64]) -> Result<Self> {
        Self::new(inputs, output.len(), output.repeat(inputs))
    }

    /// Deterministic channel `input -> map[input]`.
    pub fn deterministic(map: &[usize], outputs: usize) -> Result<Self> {
        let mut rows = vec![0.0; map.len() * outputs];
        for (i, &o) in map.iter().enumerate() {
            if o >= outputs {
                return Err(Error::Axis(format!("output {o} out of range {outputs}")));
            }
            rows[i * outputs + o] = 1.0;
        }
        Self::new(map.len(), outputs, rows)
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn row(&self, input: usize) -> &[f64] {
        &self.rows[input * self.outputs..(input + 1) * self.outputs]
    }

    pub fn get(&self, input: usize, output: usize) -> f64 {
        self.rows[input * self.outputs + output]
    }

    pub fn table(&self) -> &[f64] {
        &self.rows
    }

    /// Cascade: `self` followed by `next`.
    pub fn then(&self, next: &Channel) -> Result<Channel> {
        if self.outputs != next.inputs {
            return Err(Error::Axis("cascaded channel sizes do not chain".into()));
        }
        let mut rows = vec![0.0; self.inputs * next.outputs];
        for i in 0..self.inputs {
            for k in 0..self.outputs {
                let w = self.get(i, k);
                for j in 0..next.outputs {
                    rows[i * next.outputs + j] += w * next.get(k, j);
                }
            }
        }
        Channel::new(self.inputs, next.outputs, rows)
    }

    /// Whether every row is a point mass.
    pub fn is_deterministic(&self) -> bool {
        self.rows
            .chunks(self.outputs)
            .all(|r| r.iter().filter(|&&m| m > 0.0).count() == 1)
    }
}

/// Binary symmetric channel with crossover `alpha`.
pub fn bsc_channel(alpha: f64) -> Result<Channel> {
    check_probability("bsc crossover", alpha)?;
    Channel::new(2, 2, vec![1.0 - alpha, alpha, alpha, 1.0 - alpha])
}

fn source_xz(p_xz: &JointPmf) -> Result<(usize, usize, Vec<f64>)> {
    if p_xz.axes().len() != 2 {
        return Err(Error::Axis(
            "source must have exactly the axes `x` and `z`".into(),
        ));
    }
    let ordered = p_xz.marginalize(&["x", "z"])?;
    let shape = ordered.shape();
    Ok((shape[0], shape[1], ordered.mass().to_vec()))
}

/// Joint of `(u, x, z, v)` under the long Markov chain `u - x - z - v`:
/// `p(x, z) p(u | x) p(v | z)`.
pub fn compose_markov(p_xz: &JointPmf, ch_u: &Channel, ch_v: &Channel) -> Result<JointPmf> {
    let (nx, nz, src) = source_xz(p_xz)?;
    check_inputs(ch_u, nx, "u")?;
    check_inputs(ch_v, nz, "v")?;
    let (nu, nv) = (ch_u.outputs, ch_v.outputs);
    let axes = vec![
        Alphabet::new("u", nu)?,
        Alphabet::new("x", nx)?,
        Alphabet::new("z", nz)?,
        Alphabet::new("v", nv)?,
    ];
    let mut mass = Vec::with_capacity(nu * nx * nz * nv);
    for u in 0..nu {
        for x in 0..nx {
            for z in 0..nz {
                let w = src[x * nz + z] * ch_u.get(x, u);
                mass.extend((0..nv).map(|v| w * ch_v.get(z, v)));
            }
        }
    }
    JointPmf::new(axes, mass)
}

/// Time-shared variant over `(u, x, z, v, q)`:
/// `p(x, z) p(q) p(u | x, q) p(v | z, q)` with one `(weight, ch_u, ch_v)`
/// branch per value of `q`.
pub fn compose_markov_mixed(
    p_xz: &JointPmf,
    branches: &[(f64, Channel, Channel)],
) -> Result<JointPmf> {
    if branches.is_empty() || branches.len() > MAX_TIME_SHARING {
        return Err(Error::Constraint(format!(
            "time sharing needs 1..={MAX_TIME_SHARING} branches, got {}",
            branches.len()
        )));
    }
    let (nx, nz, src) = source_xz(p_xz)?;
    let (nu, nv) = (branches[0].1.outputs, branches[0].2.outputs);
    for (_, cu, cv) in branches {
        check_inputs(cu, nx, "u")?;
        check_inputs(cv, nz, "v")?;
        if cu.outputs != nu || cv.outputs != nv {
            return Err(Error::Axis(
                "branches disagree on auxiliary alphabets".into(),
            ));
        }
    }
    let weights: Vec<f64> = branches.iter().map(|b| b.0).collect();
    // validates the weights as a pmf
    let q = JointPmf::from_vector("q", &weights)?;
    let nq = branches.len();
    let axes = vec![
        Alphabet::new("u", nu)?,
        Alphabet::new("x", nx)?,
        Alphabet::new("z", nz)?,
        Alphabet::new("v", nv)?,
        Alphabet::new("q", nq)?,
    ];
    JointPmf::from_fn(axes, |i| {
        let (u, x, z, v, k) = (i[0], i[1], i[2], i[3], i[4]);
        let (_, cu, cv) = &branches[k];
        src[x * nz + z] * q.mass()[k] * cu.get(x, u) * cv.get(z, v)
    })
}

fn check_inputs(ch: &Channel, expected: usize, which: &str) -> Result<()> {
    if ch.inputs != expected {
        return Err(Error::Axis(format!(
            "channel for `{which}` has {} inputs, source axis has {expected}",
            ch.inputs
        )));
    }
    Ok(())
}
