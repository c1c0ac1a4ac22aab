//! Method of types and the exhaustive small-blocklength code oracle.
//!
//! Sequences over an alphabet of size `a` are `usize` slices with symbols
//! in `0..a`. Block sequences are indexed lexicographically with the first
//! letter most significant, so the sequence `(s_0, .., s_{n-1})` has index
//! `sum_t s_t a^(n-1-t)`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::probability::{entropy_slice, kl_slice, mi_table, JointPmf};

/// Largest number of type classes [`enumerate_types`] will list.
pub const MAX_TYPES: u128 = 100_000_000;
/// Largest number of block sequences (or sequence pairs) enumerated.
pub const MAX_SEQUENCES: u128 = 10_000_000;
/// Largest number of canonical code pairs [`best_theta`] will evaluate.
pub const MAX_CODES: u128 = 100_000_000;

/// Empirical counts of a sequence of length `n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeClass {
    counts: Vec<usize>,
    n: usize,
}

impl TypeClass {
    pub fn new(counts: Vec<usize>) -> Result<Self> {
        let n = counts.iter().sum();
        if counts.is_empty() || n == 0 {
            return Err(Error::Size("a type needs a positive blocklength".into()));
        }
        Ok(Self { counts, n })
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alphabet_size(&self) -> usize {
        self.counts.len()
    }

    /// `counts / n`.
    pub fn pmf(&self) -> Vec<f64> {
        self.counts
            .iter()
            .map(|&c| c as f64 / self.n as f64)
            .collect()
    }

    pub fn entropy(&self) -> f64 {
        entropy_slice(&self.pmf())
    }

    /// Number of sequences of this type, `n! / prod counts!`.
    pub fn multiplicity(&self) -> Result<u128> {
        let mut total: u128 = 1;
        let mut left = self.n as u128;
        for &c in &self.counts {
            total = total
                .checked_mul(binomial(left, c as u128).ok_or_else(overflow)?)
                .ok_or_else(overflow)?;
            left -= c as u128;
        }
        Ok(total)
    }

    /// Robust typicality: `|t(x) - p(x)| <= delta p(x)` for every symbol.
    pub fn is_typical(&self, pmf: &[f64], delta: f64) -> bool {
        self.counts.len() == pmf.len()
            && self
                .pmf()
                .iter()
                .zip(pmf)
                .all(|(&t, &p)| (t - p).abs() <= delta * p)
    }
}

fn overflow() -> Error {
    Error::Size("type multiplicity overflows 128 bits".into())
}

fn binomial(n: u128, k: u128) -> Option<u128> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // exact: acc * (n - i) is divisible by (i + 1)
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

/// Number of types of length-`n` sequences over `a` symbols,
/// `C(n + a - 1, a - 1)`.
pub fn type_count(alphabet_size: usize, n: usize) -> Option<u128> {
    if alphabet_size == 0 {
        return Some(0);
    }
    binomial((n + alphabet_size - 1) as u128, (alphabet_size - 1) as u128)
}

pub fn type_of(seq: &[usize], alphabet_size: usize) -> Result<TypeClass> {
    if seq.is_empty() {
        return Err(Error::Size("type of an empty sequence".into()));
    }
    let mut counts = vec![0; alphabet_size];
    for &s in seq {
        *counts.get_mut(s).ok_or_else(|| {
            Error::Axis(format!(
                "symbol {s} outside an alphabet of size {alphabet_size}"
            ))
        })? += 1;
    }
    TypeClass::new(counts)
}

/// All types of length-`n` sequences over `a` symbols, in lexicographically
/// decreasing order of counts.
pub fn enumerate_types(alphabet_size: usize, n: usize) -> Result<Vec<TypeClass>> {
    if alphabet_size == 0 || n == 0 {
        return Err(Error::Size("need alphabet_size >= 1 and n >= 1".into()));
    }
    match type_count(alphabet_size, n) {
        Some(c) if c <= MAX_TYPES => {}
        c => {
            return Err(Error::Size(format!(
                "{} types exceed the limit of {MAX_TYPES}",
                c.map_or("more than 2^128".into(), |c| c.to_string())
            )))
        }
    }
    let mut out = Vec::new();
    let mut counts = vec![0; alphabet_size];
    compositions(&mut counts, 0, n, &mut out);
    Ok(out)
}

fn compositions(counts: &mut Vec<usize>, at: usize, left: usize, out: &mut Vec<TypeClass>) {
    if at + 1 == counts.len() {
        counts[at] = left;
        out.push(TypeClass {
            counts: counts.clone(),
            n: counts.iter().sum(),
        });
        return;
    }
    for c in (0..=left).rev() {
        counts[at] = c;
        compositions(counts, at + 1, left - c, out);
    }
}

fn single_axis(pmf: &JointPmf) -> Result<&[f64]> {
    if pmf.axes().len() != 1 {
        return Err(Error::Axis("expected a pmf over a single axis".into()));
    }
    Ok(pmf.mass())
}

fn sequence_space(alphabet_size: usize, n: usize) -> Result<usize> {
    match (alphabet_size as u128).checked_pow(n as u32) {
        Some(c) if c <= MAX_SEQUENCES && n > 0 => Ok(c as usize),
        _ => Err(Error::Size(format!(
            "{alphabet_size}^{n} sequences exceed the limit of {MAX_SEQUENCES}"
        ))),
    }
}

/// Typical types with their multiplicities.
pub fn typical_types(pmf: &JointPmf, n: usize, delta: f64) -> Result<Vec<(TypeClass, u128)>> {
    let p = single_axis(pmf)?;
    enumerate_types(p.len(), n)?
        .into_iter()
        .filter(|t| t.is_typical(p, delta))
        .map(|t| {
            let m = t.multiplicity()?;
            Ok((t, m))
        })
        .collect()
}

/// Every robustly `delta`-typical sequence of length `n`, enumerated
/// sequence by sequence in lexicographic order.
pub fn typical_sequences(
    pmf: &JointPmf,
    n: usize,
    delta: f64,
) -> Result<impl Iterator<Item = Vec<usize>> + '_> {
    let p = single_axis(pmf)?;
    let a = p.len();
    let total = sequence_space(a, n)?;
    Ok((0..total).filter_map(move |index| {
        let seq = decode(index, a, n);
        type_of(&seq, a)
            .ok()
            .filter(|t| t.is_typical(p, delta))
            .map(|_| seq)
    }))
}

/// Sequence with lexicographic index `index`.
pub fn decode(mut index: usize, alphabet_size: usize, n: usize) -> Vec<usize> {
    let mut seq = vec![0; n];
    for slot in seq.iter_mut().rev() {
        *slot = index % alphabet_size;
        index /= alphabet_size;
    }
    seq
}

/// Size and probability of a typical set with the exponential bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct TypicalSetReport {
    pub n: usize,
    pub delta: f64,
    pub size: u128,
    pub probability: f64,
    pub entropy: f64,
    /// `exp(n (H + delta H))`, never exceeded.
    pub upper: f64,
    /// `exp(n (H - delta H))`; the size exceeds `(1 - eps) lower` once the
    /// set carries probability `1 - eps`.
    pub lower: f64,
}

pub fn typical_set_report(pmf: &JointPmf, n: usize, delta: f64) -> Result<TypicalSetReport> {
    let p = single_axis(pmf)?;
    let h = entropy_slice(p);
    let mut size = 0u128;
    let mut probability = 0.0;
    for (t, m) in typical_types(pmf, n, delta)? {
        size += m;
        let log_seq: f64 = t
            .counts()
            .iter()
            .zip(p)
            .filter(|(&c, _)| c > 0)
            .map(|(&c, &q)| c as f64 * q.ln())
            .sum();
        probability += m as f64 * log_seq.exp();
    }
    let nf = n as f64;
    Ok(TypicalSetReport {
        n,
        delta,
        size,
        probability,
        entropy: h,
        upper: (nf * (h + delta * h)).exp(),
        lower: (nf * (h - delta * h)).exp(),
    })
}

/// `|ln P(seq) + n (H(t) + D(t || p))|` for the type `t` of `seq`; zero up
/// to rounding.
pub fn sequence_probability_identity_check(pmf: &JointPmf, seq: &[usize]) -> Result<f64> {
    let p = single_axis(pmf)?;
    let t = type_of(seq, p.len())?;
    let mut log_p = 0.0;
    for &s in seq {
        if p[s] <= 0.0 {
            return Err(Error::Support(format!("symbol {s} has probability zero")));
        }
        log_p += p[s].ln();
    }
    let q = t.pmf();
    let exponent = t.n() as f64 * (entropy_slice(&q) + kl_slice(&q, p));
    Ok((log_p + exponent).abs())
}

/// A deterministic block code pair: `f` on `X^n`, `g` on `Z^n`, both as
/// lookup tables indexed lexicographically, with labels `0..m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeSpec {
    pub n: usize,
    pub m1: usize,
    pub m2: usize,
    pub f: Vec<usize>,
    pub g: Vec<usize>,
}

impl CodeSpec {
    /// Validates the tables against the alphabet sizes of `x` and `z`.
    pub fn new(
        n: usize,
        (x_size, z_size): (usize, usize),
        (m1, m2): (usize, usize),
        f: Vec<usize>,
        g: Vec<usize>,
    ) -> Result<Self> {
        if n == 0 || m1 == 0 || m2 == 0 {
            return Err(Error::Size("need n, M1, M2 >= 1".into()));
        }
        for (name, table, a, m) in [("f", &f, x_size, m1), ("g", &g, z_size, m2)] {
            let expected = sequence_space(a, n)?;
            if table.len() != expected {
                return Err(Error::Size(format!(
                    "{name} has {} entries, expected {expected}",
                    table.len()
                )));
            }
            if let Some(bad) = table.iter().find(|&&v| v >= m) {
                return Err(Error::Domain {
                    what: "code label",
                    value: *bad as f64,
                });
            }
        }
        Ok(Self { n, m1, m2, f, g })
    }
}

fn source_xz(p_xz: &JointPmf) -> Result<(usize, usize, JointPmf)> {
    if p_xz.axes().len() != 2 {
        return Err(Error::Axis("expected a joint over exactly (x, z)".into()));
    }
    let ordered = p_xz.marginalize(&["x", "z"])?;
    let s = ordered.shape();
    Ok((s[0], s[1], ordered))
}

/// `n`-fold product of `p(x, z)` as an `|X|^n x |Z|^n` table.
fn block_source(nx: usize, nz: usize, mass: &[f64], n: usize) -> Result<(usize, usize, Vec<f64>)> {
    let bx = sequence_space(nx, n)?;
    let bz = sequence_space(nz, n)?;
    if (bx as u128) * (bz as u128) > MAX_SEQUENCES {
        return Err(Error::Size(format!(
            "{bx} x {bz} sequence pairs exceed the limit of {MAX_SEQUENCES}"
        )));
    }
    let mut table = vec![1.0];
    let (mut rx, mut rz) = (1, 1);
    for _ in 0..n {
        let mut next = vec![0.0; rx * nx * rz * nz];
        let width = rz * nz;
        for i in 0..rx {
            for j in 0..rz {
                let w = table[i * rz + j];
                for a in 0..nx {
                    for b in 0..nz {
                        next[(i * nx + a) * width + j * nz + b] = w * mass[a * nz + b];
                    }
                }
            }
        }
        table = next;
        rx *= nx;
        rz *= nz;
    }
    Ok((bx, bz, table))
}

/// `I(f; g)` of a pushforward, summed over `x` then `z`.
fn code_information(
    block: &[f64],
    bz: usize,
    f: &[usize],
    g: &[usize],
    m1: usize,
    m2: usize,
) -> f64 {
    let mut t = vec![0.0; m1 * m2];
    for (x, &a) in f.iter().enumerate() {
        let row = &block[x * bz..(x + 1) * bz];
        for (&m, &b) in row.iter().zip(g) {
            t[a * m2 + b] += m;
        }
    }
    mi_table(&t, m1, m2)
}

/// Co-information `(1/n) I(f(x^n); g(z^n))` of a code pair.
pub fn theta(p_xz: &JointPmf, code: &CodeSpec) -> Result<f64> {
    let (nx, nz, src) = source_xz(p_xz)?;
    let (bx, bz, block) = block_source(nx, nz, src.mass(), code.n)?;
    if code.f.len() != bx || code.g.len() != bz {
        return Err(Error::Size(
            "code tables do not match the source alphabets".into(),
        ));
    }
    let f = canonical_labels(&code.f, code.m1);
    let g = canonical_labels(&code.g, code.m2);
    Ok(code_information(&block, bz, &f, &g, code.m1, code.m2) / code.n as f64)
}

/// Relabels by order of first occurrence so that permuted codes produce
/// the same table bit for bit.
fn canonical_labels(table: &[usize], m: usize) -> Vec<usize> {
    let mut map = vec![usize::MAX; m];
    let mut next = 0;
    table
        .iter()
        .map(|&v| {
            if map[v] == usize::MAX {
                map[v] = next;
                next += 1;
            }
            map[v]
        })
        .collect()
}

/// Restricted growth strings of length `len` using fewer than `m` labels:
/// one canonical representative per labeling up to permutation.
struct Canonical {
    next: Option<Vec<usize>>,
    m: usize,
}

impl Canonical {
    fn new(len: usize, m: usize) -> Self {
        Self {
            next: Some(vec![0; len]),
            m,
        }
    }
}

impl Iterator for Canonical {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.next.take()?;
        let mut s = current.clone();
        // prefix maxima decide how far each position may grow
        let mut prefix_max = vec![0; s.len()];
        let mut m = 0;
        for (i, &v) in s.iter().enumerate() {
            prefix_max[i] = m;
            m = m.max(v);
        }
        for i in (1..s.len()).rev() {
            if s[i] < prefix_max[i] + 1 && s[i] + 1 < self.m {
                s[i] += 1;
                for v in &mut s[i + 1..] {
                    *v = 0;
                }
                self.next = Some(s);
                break;
            }
        }
        Some(current)
    }
}

/// Number of restricted growth strings of length `len` with at most `m`
/// labels (a sum of Stirling numbers of the second kind).
fn canonical_count(len: usize, m: usize) -> u128 {
    // s[k] = S(i, k) row by row
    let mut s = vec![0u128; m + 1];
    s[0] = 1;
    for _ in 0..len {
        for k in (1..=m).rev() {
            s[k] = (k as u128).saturating_mul(s[k]).saturating_add(s[k - 1]);
        }
        s[0] = 0;
    }
    s[1..].iter().fold(0u128, |a, &b| a.saturating_add(b))
}

/// Maximum co-information over all deterministic `(n, M1, M2)` codes.
/// Codes are enumerated up to relabeling; ties keep the first code in
/// enumeration order.
pub fn best_theta(p_xz: &JointPmf, n: usize, m1: usize, m2: usize) -> Result<(f64, CodeSpec)> {
    if n == 0 || m1 == 0 || m2 == 0 {
        return Err(Error::Size("need n, M1, M2 >= 1".into()));
    }
    let (nx, nz, src) = source_xz(p_xz)?;
    let (bx, bz, block) = block_source(nx, nz, src.mass(), n)?;
    let pruned = canonical_count(bx, m1).saturating_mul(canonical_count(bz, m2));
    if pruned > MAX_CODES {
        let raw = (m1 as f64).powf(bx as f64) * (m2 as f64).powf(bz as f64);
        return Err(Error::Size(format!(
            "{m1}^{bx} * {m2}^{bz} = {raw:.3e} code pairs ({pruned} after relabeling) exceed the limit of {MAX_CODES}"
        )));
    }
    let gs: Vec<Vec<usize>> = Canonical::new(bz, m2).collect();
    let (value, _, gi, f) = Canonical::new(bx, m1)
        .enumerate()
        .par_bridge()
        .map(|(fi, f)| {
            let mut best = (f64::NEG_INFINITY, fi, 0usize);
            for (gi, g) in gs.iter().enumerate() {
                let v = code_information(&block, bz, &f, g, m1, m2);
                if v > best.0 {
                    best = (v, fi, gi);
                }
            }
            (best.0, best.1, best.2, f)
        })
        .reduce_with(|a, b| {
            if b.0 > a.0 || (b.0 == a.0 && (b.1, b.2) < (a.1, a.2)) {
                b
            } else {
                a
            }
        })
        .expect("at least one code");
    let code = CodeSpec {
        n,
        m1,
        m2,
        f,
        g: gs[gi].clone(),
    };
    Ok((value / n as f64, code))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probability::{dsbs, hb, mutual_information, Channel};
    use crate::regions::inner_point;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::LN_2;

    #[test]
    fn type_of_examples() {
        assert_eq!(type_of(&[0, 1, 0, 1], 2).unwrap().counts(), &[2, 2]);
        assert_eq!(type_of(&[2, 2, 2], 3).unwrap().counts(), &[0, 0, 3]);
        let t = type_of(&[0, 0, 1], 2).unwrap();
        assert_eq!(t.pmf(), vec![2.0 / 3.0, 1.0 / 3.0]);
        assert!(matches!(type_of(&[], 2), Err(Error::Size(_))));
        assert!(matches!(type_of(&[3], 2), Err(Error::Axis(_))));
    }

    #[test]
    fn enumerate_type_examples() {
        let two = enumerate_types(2, 2).unwrap();
        let counts: Vec<&[usize]> = two.iter().map(|t| t.counts()).collect();
        assert_eq!(counts, vec![&[2, 0][..], &[1, 1], &[0, 2]]);
        assert_eq!(enumerate_types(1, 7).unwrap().len(), 1);
        assert_eq!(enumerate_types(3, 8).unwrap().len(), 45);
        assert!(enumerate_types(40, 40).is_err());
    }

    #[test]
    fn type_count_bound() {
        for a in 1..=4usize {
            for n in 1..=10usize {
                let listed = enumerate_types(a, n).unwrap().len() as u128;
                assert_eq!(Some(listed), type_count(a, n));
                assert!(listed < (n as u128 + 1).pow(a as u32));
            }
        }
    }

    #[test]
    fn multiplicities_sum_to_all_sequences() {
        for (a, n) in [(2usize, 10usize), (3, 6), (4, 5)] {
            let total: u128 = enumerate_types(a, n)
                .unwrap()
                .iter()
                .map(|t| t.multiplicity().unwrap())
                .sum();
            assert_eq!(total, (a as u128).pow(n as u32));
        }
    }

    #[test]
    fn typical_set_examples() {
        let b = JointPmf::from_vector("x", &[0.75, 0.25]).unwrap();
        let ones: Vec<usize> = typical_types(&b, 8, 0.5)
            .unwrap()
            .iter()
            .map(|(t, _)| t.counts()[1])
            .collect();
        assert_eq!(ones, vec![1, 2, 3]);
        // delta large enough admits everything
        assert_eq!(typical_sequences(&b, 6, 3.0).unwrap().count(), 64);
        let u = JointPmf::uniform("x", 3).unwrap();
        let balanced: Vec<Vec<usize>> = typical_sequences(&u, 3, 0.0).unwrap().collect();
        assert_eq!(balanced.len(), 6);
        assert!(balanced
            .iter()
            .all(|s| type_of(s, 3).unwrap().counts() == [1, 1, 1]));
    }

    #[test]
    fn two_routes_agree() {
        let p = JointPmf::from_vector("x", &[0.5, 0.3, 0.2]).unwrap();
        for n in [4, 7, 9] {
            for delta in [0.1, 0.3, 0.6] {
                let by_type: u128 = typical_types(&p, n, delta)
                    .unwrap()
                    .iter()
                    .map(|x| x.1)
                    .sum();
                let by_seq = typical_sequences(&p, n, delta).unwrap().count() as u128;
                assert_eq!(by_type, by_seq);
            }
        }
    }

    #[test]
    fn typical_set_size_bounds() {
        let p = JointPmf::from_vector("x", &[0.7, 0.3]).unwrap();
        for n in [8, 12, 16] {
            let r = typical_set_report(&p, n, 0.2).unwrap();
            assert!((r.size as f64) <= r.upper);
            assert!(r.size as f64 >= r.probability * r.lower);
        }
    }

    #[test]
    fn sequence_probability_identity() {
        let fair = JointPmf::uniform("x", 2).unwrap();
        assert!(sequence_probability_identity_check(&fair, &[0, 1, 1, 0, 1]).unwrap() < 1e-14);
        let b = JointPmf::from_vector("x", &[0.75, 0.25]).unwrap();
        assert!(sequence_probability_identity_check(&b, &[1, 1, 0, 0]).unwrap() <= 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let p = JointPmf::from_vector("x", &[0.1, 0.2, 0.3, 0.4]).unwrap();
        for _ in 0..200 {
            let n = rng.random_range(1..40);
            let seq: Vec<usize> = (0..n).map(|_| rng.random_range(0..4)).collect();
            assert!(sequence_probability_identity_check(&p, &seq).unwrap() <= 1e-10);
        }
        let z = JointPmf::from_vector("x", &[1.0, 0.0]).unwrap();
        assert!(matches!(
            sequence_probability_identity_check(&z, &[0, 1]),
            Err(Error::Support(_))
        ));
    }

    #[test]
    fn canonical_labelings() {
        let all: Vec<Vec<usize>> = Canonical::new(4, 2).collect();
        assert_eq!(all.len(), 8);
        assert_eq!(all[0], vec![0, 0, 0, 0]);
        assert!(all.iter().all(|s| s[0] == 0));
        assert_eq!(Canonical::new(5, 5).count() as u128, canonical_count(5, 5));
        assert_eq!(canonical_count(5, 5), 52);
        assert_eq!(Canonical::new(3, 1).count(), 1);
    }

    #[test]
    fn theta_examples() {
        let p = 0.25;
        let src = dsbs(p).unwrap();
        let constant = CodeSpec::new(1, (2, 2), (1, 1), vec![0, 0], vec![0, 0]).unwrap();
        assert_eq!(theta(&src, &constant).unwrap(), 0.0);
        let ident = CodeSpec::new(1, (2, 2), (2, 2), vec![0, 1], vec![0, 1]).unwrap();
        assert!((theta(&src, &ident).unwrap() - (LN_2 - hb(p))).abs() < 1e-15);
        // first-coordinate projections at n = 2
        let first = vec![0, 0, 1, 1];
        let proj = CodeSpec::new(2, (2, 2), (2, 2), first.clone(), first).unwrap();
        assert!((theta(&src, &proj).unwrap() - 0.5 * (LN_2 - hb(p))).abs() < 1e-15);
    }

    #[test]
    fn theta_is_label_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        let src = dsbs(0.2).unwrap();
        for _ in 0..20 {
            let f: Vec<usize> = (0..8).map(|_| rng.random_range(0..3)).collect();
            let g: Vec<usize> = (0..8).map(|_| rng.random_range(0..3)).collect();
            let code = CodeSpec::new(3, (2, 2), (3, 3), f.clone(), g.clone()).unwrap();
            let perm = [2, 0, 1];
            let relabeled = CodeSpec::new(
                3,
                (2, 2),
                (3, 3),
                f.iter().map(|&v| perm[v]).collect(),
                g.iter().map(|&v| perm[(v + 1) % 3]).collect(),
            )
            .unwrap();
            assert_eq!(
                theta(&src, &code).unwrap(),
                theta(&src, &relabeled).unwrap()
            );
        }
    }

    #[test]
    fn best_theta_examples() {
        let src = dsbs(0.25).unwrap();
        assert_eq!(best_theta(&src, 1, 1, 1).unwrap().0, 0.0);
        let (v, code) = best_theta(&src, 1, 2, 2).unwrap();
        assert!((v - 0.130812035941137).abs() < 1e-15);
        assert_eq!(code.f, vec![0, 1]);
        assert_eq!(code.g, vec![0, 1]);
        let (v2, _) = best_theta(&src, 2, 2, 2).unwrap();
        assert!(v2 <= (LN_2 - hb(0.25)) + 1e-12);
        assert!(v2 <= LN_2 / 2.0 + 1e-12);
    }

    #[test]
    fn best_theta_grows_with_codebooks() {
        let src = dsbs(0.1).unwrap();
        let mut last = 0.0;
        for m in 1..=4 {
            let (v, _) = best_theta(&src, 2, m, 2).unwrap();
            assert!(v >= last);
            last = v;
        }
    }

    #[test]
    fn best_theta_guard_reports_raw_count() {
        let src = dsbs(0.1).unwrap();
        match best_theta(&src, 5, 3, 3) {
            Err(Error::Size(msg)) => assert!(msg.contains("3^32")),
            other => panic!("expected size error, got {other:?}"),
        }
    }

    #[test]
    fn single_letter_oracle_matches_deterministic_inner_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let src = dsbs(0.25).unwrap();
        let mut sources = vec![src];
        for _ in 0..5 {
            let raw: Vec<f64> = (0..6).map(|_| rng.random::<f64>()).collect();
            let t: f64 = raw.iter().sum();
            sources.push(
                JointPmf::new(
                    vec![
                        crate::probability::Alphabet::new("x", 3).unwrap(),
                        crate::probability::Alphabet::new("z", 2).unwrap(),
                    ],
                    raw.into_iter().map(|m| m / t).collect(),
                )
                .unwrap(),
            );
        }
        for (k, src) in sources.iter().enumerate() {
            let nx = src.size_of("x").unwrap();
            let nz = src.size_of("z").unwrap();
            for (m1, m2) in [(2, 2), (3, 2)] {
                let (oracle, _) = best_theta(src, 1, m1, m2).unwrap();
                let mut inner = f64::NEG_INFINITY;
                for fi in 0..m1.pow(nx as u32) {
                    let f = decode(fi, m1, nx);
                    let cu = Channel::deterministic(&f, m1).unwrap();
                    for gi in 0..m2.pow(nz as u32) {
                        let g = decode(gi, m2, nz);
                        let cv = Channel::deterministic(&g, m2).unwrap();
                        inner = inner.max(inner_point(src, &cu, &cv).unwrap().mu);
                    }
                }
                if k == 0 {
                    assert_eq!(oracle, inner);
                } else {
                    assert!((oracle - inner).abs() < 1e-15);
                }
                let ixz = mutual_information(src, &["x"], &["z"]).unwrap();
                assert!(oracle <= ixz + 1e-12);
            }
        }
    }
}
