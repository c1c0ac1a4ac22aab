use std::fs;

use bicluster::probability::{dsbs, Alphabet, JointPmf};

use crate::error::{CliError, CliResult};

/// Loads `dsbs:<p>` or a labeled joint-pmf file.
///
/// File format: `#` lines and blank lines are ignored. The first line lists
/// the axis labels, each optionally with its size (`x:3`). Every further
/// line holds one index per axis followed by the mass of that cell; cells
/// not listed have mass zero. Sizes default to the largest index plus one.
pub fn load_source(spec: &str) -> CliResult<JointPmf> {
    if let Some(p) = spec.strip_prefix("dsbs:") {
        let p: f64 = p
            .trim()
            .parse()
            .map_err(|_| CliError::Validation(format!("bad dsbs crossover in `{spec}`")))?;
        return Ok(dsbs(p)?);
    }
    let text = fs::read_to_string(spec).map_err(|e| CliError::io(spec, e))?;
    parse_pmf(&text)
}

pub fn parse_pmf(text: &str) -> CliResult<JointPmf> {
    let bad =
        |line: usize, msg: &str| CliError::Validation(format!("pmf line {}: {msg}", line + 1));
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hi, header) = lines
        .next()
        .ok_or_else(|| CliError::Validation("pmf file has no header".into()))?;
    let mut labels = Vec::new();
    let mut sizes = Vec::new();
    for tok in header.split_whitespace() {
        match tok.split_once(':') {
            Some((label, size)) => {
                let size: usize = size.parse().map_err(|_| bad(hi, "bad axis size"))?;
                labels.push(label.to_string());
                sizes.push(Some(size));
            }
            None => {
                labels.push(tok.to_string());
                sizes.push(None);
            }
        }
    }
    let k = labels.len();
    let mut cells: Vec<(Vec<usize>, f64)> = Vec::new();
    for (i, line) in lines {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != k + 1 {
            return Err(bad(i, &format!("expected {} indices and a mass", k)));
        }
        let index = toks[..k]
            .iter()
            .map(|t| t.parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| bad(i, "bad index"))?;
        let mass: f64 = toks[k].parse().map_err(|_| bad(i, "bad mass"))?;
        cells.push((index, mass));
    }
    let mut shape = Vec::with_capacity(k);
    for (a, size) in sizes.iter().enumerate() {
        let largest = cells.iter().map(|(ix, _)| ix[a] + 1).max().unwrap_or(1);
        match size {
            Some(s) if largest > *s => {
                return Err(CliError::Validation(format!(
                    "index {} out of range for axis `{}` of size {s}",
                    largest - 1,
                    labels[a]
                )))
            }
            Some(s) => shape.push(*s),
            None => shape.push(largest),
        }
    }
    let axes = labels
        .iter()
        .zip(&shape)
        .map(|(l, &s)| Alphabet::new(l.as_str(), s))
        .collect::<Result<Vec<_>, _>>()?;
    let mut mass = vec![0.0; shape.iter().product()];
    for (ix, m) in cells {
        let flat = ix.iter().zip(&shape).fold(0, |acc, (&i, &s)| acc * s + i);
        mass[flat] += m;
    }
    Ok(JointPmf::new(axes, mass)?)
}
