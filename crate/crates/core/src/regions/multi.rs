//! `K`-source bounds. Sources are labeled `x1..xK`, auxiliaries `u1..uK`.
//! Index sets are 0-based internally and displayed 1-based.

use std::collections::BTreeMap;
use std::f64::consts::LN_2;
use std::fmt;

use super::{MARKOV_TOLERANCE, MEMBERSHIP_TOLERANCE};
use crate::error::{Error, Result};
use crate::probability::{
    conditional_mutual_information, hb, mutual_information, Alphabet, Channel, JointPmf,
};

/// Largest `K` accepted by [`multi_inner_search`].
pub const MAX_SEARCH_SOURCES: usize = 6;

/// Markov conditions are checked on every subset up to this many sources,
/// and on singletons plus the full set beyond it.
const FULL_MARKOV_CHECK: usize = 4;

/// Label of source `k` (0-based): `x{k+1}`.
pub fn source_label(k: usize) -> String {
    format!("x{}", k + 1)
}

/// Label of auxiliary `k` (0-based): `u{k+1}`.
pub fn aux_label(k: usize) -> String {
    format!("u{}", k + 1)
}

/// Subset of `{0, .., 31}` as a bitmask.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexSet(u32);

impl IndexSet {
    pub const EMPTY: IndexSet = IndexSet(0);

    pub fn from_bits(bits: u32) -> Self {
        Self(bits)
    }

    /// From 1-based indices, as written in the literature.
    pub fn of(indices: &[usize]) -> Self {
        Self(indices.iter().fold(0, |m, &i| {
            assert!((1..=32).contains(&i), "index {i} out of range");
            m | 1 << (i - 1)
        }))
    }

    pub fn full(k: usize) -> Self {
        Self(if k >= 32 { u32::MAX } else { (1u32 << k) - 1 })
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn is_subset_of(self, other: IndexSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: IndexSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn union(self, other: IndexSet) -> Self {
        Self(self.0 | other.0)
    }

    pub fn intersection(self, other: IndexSet) -> Self {
        Self(self.0 & other.0)
    }

    pub fn difference(self, other: IndexSet) -> Self {
        Self(self.0 & !other.0)
    }

    /// Members in increasing order, 0-based.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |&i| self.contains(i))
    }

    /// Every subset including the empty set and `self`.
    pub fn subsets(self) -> impl Iterator<Item = IndexSet> {
        // standard submask walk, emitted in increasing bit order
        let mut all = Vec::with_capacity(1 << self.len());
        let mut sub = 0u32;
        loop {
            all.push(IndexSet(sub));
            if sub == self.0 {
                break;
            }
            sub = (sub.wrapping_sub(self.0)) & self.0;
        }
        all.into_iter()
    }

    fn lexicographic(self, other: IndexSet) -> std::cmp::Ordering {
        self.iter().cmp(other.iter())
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (n, i) in self.iter().enumerate() {
            if n > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        write!(f, "}}")
    }
}

/// A pair `(A, B)` of nonempty index sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubsetPair {
    pub a: IndexSet,
    pub b: IndexSet,
}

impl SubsetPair {
    /// A pair of disjoint nonempty subsets of the same source family.
    pub fn new(a: IndexSet, b: IndexSet) -> Result<Self> {
        if a.is_empty() || b.is_empty() || !a.is_disjoint(b) {
            return Err(Error::Constraint(format!(
                "subset pair {a}|{b} must be nonempty and disjoint"
            )));
        }
        Ok(Self { a, b })
    }

    /// A pair indexing two different families (encoders and targets), so
    /// only nonemptiness is required.
    pub fn cross(a: IndexSet, b: IndexSet) -> Result<Self> {
        if a.is_empty() || b.is_empty() {
            return Err(Error::Constraint(format!(
                "subset pair {a}|{b} must be nonempty"
            )));
        }
        Ok(Self { a, b })
    }

    /// All ordered pairs of disjoint nonempty subsets of `{1..k}`;
    /// `3^k - 2^(k+1) + 1` of them.
    pub fn all(k: usize) -> Vec<SubsetPair> {
        let full = IndexSet::full(k);
        let mut out = Vec::new();
        for a in full.subsets().filter(|s| !s.is_empty()) {
            for b in full.difference(a).subsets().filter(|s| !s.is_empty()) {
                out.push(SubsetPair { a, b });
            }
        }
        out.sort();
        out
    }
}

impl fmt::Display for SubsetPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}|{}", self.a, self.b)
    }
}

/// `(mu_Omega, R_K)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MultiRegionPoint {
    pub mu: BTreeMap<SubsetPair, f64>,
    pub rates: Vec<f64>,
}

/// Decoding sets for one pair: `A_b ⊆ A_a ⊆ A` and `B_b ⊆ B_a ⊆ B`.
/// An empty `A_b` (or `B_b`) is allowed and certifies only `mu <= 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BinningChoice {
    pub a_active: IndexSet,
    pub a_bin: IndexSet,
    pub b_active: IndexSet,
    pub b_bin: IndexSet,
}

impl BinningChoice {
    /// `A_b = A_a = A`, `B_b = B_a = B`.
    pub fn no_binning(pair: SubsetPair) -> Self {
        Self {
            a_active: pair.a,
            a_bin: pair.a,
            b_active: pair.b,
            b_bin: pair.b,
        }
    }

    pub fn validate(&self, pair: SubsetPair) -> Result<()> {
        if self.a_bin.is_subset_of(self.a_active)
            && self.a_active.is_subset_of(pair.a)
            && self.b_bin.is_subset_of(self.b_active)
            && self.b_active.is_subset_of(pair.b)
        {
            Ok(())
        } else {
            Err(Error::Constraint(format!(
                "binning choice {self} is not nested inside {pair}"
            )))
        }
    }
}

impl fmt::Display for BinningChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "A_a={} A_b={} B_a={} B_b={}",
            self.a_active, self.a_bin, self.b_active, self.b_bin
        )
    }
}

/// Outcome of checking one pair.
#[derive(Clone, Debug, PartialEq)]
pub struct PairCertificate {
    pub pair: SubsetPair,
    pub choice: BinningChoice,
    pub satisfied: bool,
    /// The tightest constraint, e.g. `R{1,2} >= I(x{1,2}; u{1,2} | u{})`.
    pub binding: String,
    /// Smallest slack over all constraints of the pair (negative if violated).
    pub slack: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Membership {
    pub member: bool,
    pub pairs: Vec<PairCertificate>,
}

/// Number of sources of a joint over `x1..xK, u1..uK`.
fn source_count(p: &JointPmf) -> Result<usize> {
    let n = p.axes().len();
    if n % 2 != 0 || n == 0 {
        return Err(Error::Axis("expected axes x1..xK and u1..uK".into()));
    }
    let k = n / 2;
    for i in 0..k {
        if !p.has_axis(&source_label(i)) || !p.has_axis(&aux_label(i)) {
            return Err(Error::Axis(format!(
                "missing {} or {}; expected axes x1..x{k} and u1..u{k}",
                source_label(i),
                aux_label(i)
            )));
        }
    }
    Ok(k)
}

fn labels(set: IndexSet, f: fn(usize) -> String) -> Vec<String> {
    set.iter().map(f).collect()
}

fn refs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

/// `I(A; B | C)` on label lists; empty `A` or `B` gives 0.
fn info(p: &JointPmf, a: &[String], b: &[String], c: &[String]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Ok(0.0);
    }
    conditional_mutual_information(p, &refs(a), &refs(b), &refs(c))
}

/// Joint of sources and auxiliaries `u_k ~ channels[k](. | x_k)`.
pub fn multi_joint(p_x: &JointPmf, channels: &[Channel]) -> Result<JointPmf> {
    let k = channels.len();
    if k == 0 || p_x.axes().len() != k {
        return Err(Error::Axis(format!(
            "{} channels for a source with {} axes",
            k,
            p_x.axes().len()
        )));
    }
    let names: Vec<String> = (0..k).map(source_label).collect();
    let ordered = p_x.marginalize(&refs(&names))?;
    let mut axes = ordered.axes().to_vec();
    for (i, ch) in channels.iter().enumerate() {
        if ch.inputs() != axes[i].size() {
            return Err(Error::Axis(format!(
                "channel {} expects {} inputs but {} has {}",
                i + 1,
                ch.inputs(),
                names[i],
                axes[i].size()
            )));
        }
    }
    for (i, ch) in channels.iter().enumerate() {
        axes.push(Alphabet::new(aux_label(i), ch.outputs())?);
    }
    JointPmf::from_fn(axes, |idx| {
        let (x, u) = idx.split_at(k);
        let mut m = ordered.get(x);
        for (i, ch) in channels.iter().enumerate() {
            if m == 0.0 {
                break;
            }
            m *= ch.get(x[i], u[i]);
        }
        m
    })
}

fn check_multi_markov(p: &JointPmf, k: usize) -> Result<()> {
    let full = IndexSet::full(k);
    let sets: Vec<IndexSet> = if k <= FULL_MARKOV_CHECK {
        full.subsets().filter(|s| !s.is_empty()).collect()
    } else {
        (0..k)
            .map(|i| IndexSet::of(&[i + 1]))
            .chain([full])
            .collect()
    };
    for a in sets {
        let rest = full.difference(a);
        let cmi = info(
            p,
            &labels(a, aux_label),
            &labels(rest, source_label),
            &labels(a, source_label),
        )?;
        if cmi > MARKOV_TOLERANCE {
            return Err(Error::Markov {
                chain: format!("u{a} - x{a} - x{full}"),
                cmi,
            });
        }
    }
    Ok(())
}

fn multi_outer(
    p: &JointPmf,
    mu: impl Fn(&JointPmf, SubsetPair) -> Result<f64>,
) -> Result<MultiRegionPoint> {
    let k = source_count(p)?;
    check_multi_markov(p, k)?;
    let rates = (0..k)
        .map(|i| mutual_information(p, &[&aux_label(i)], &[&source_label(i)]))
        .collect::<Result<Vec<_>>>()?;
    let mut map = BTreeMap::new();
    for pair in SubsetPair::all(k) {
        map.insert(pair, mu(p, pair)?);
    }
    Ok(MultiRegionPoint { mu: map, rates })
}

/// Outer bound with `mu[A, B] = I(u_A; x_B)`.
pub fn multi_outer_point_ro_prime(p: &JointPmf) -> Result<MultiRegionPoint> {
    multi_outer(p, |p, pair| {
        info(
            p,
            &labels(pair.a, aux_label),
            &labels(pair.b, source_label),
            &[],
        )
    })
}

/// Outer bound with
/// `mu[A, B] = I(u_A; x_A) + I(u_B; x_B) - I(u_A u_B; x_A x_B)`, unclamped.
pub fn multi_outer_point_ro(p: &JointPmf) -> Result<MultiRegionPoint> {
    multi_outer(p, |p, pair| {
        let both = pair.a.union(pair.b);
        let term = |s: IndexSet| info(p, &labels(s, aux_label), &labels(s, source_label), &[]);
        Ok(term(pair.a)? + term(pair.b)? - term(both)?)
    })
}

/// Evaluates the inner-bound constraints of one side `(S, S_a, S_b)`:
/// `sum_{k in S'} R_k >= I(x_S'; u_S' | u_{S_a \ S'})` for every
/// `S' ⊆ S_a` meeting `S_b`. Returns the minimal slack and its label.
fn side_slack(
    p: &JointPmf,
    rates: &[f64],
    active: IndexSet,
    bin: IndexSet,
) -> Result<(f64, String)> {
    let mut best = (f64::INFINITY, String::from("none"));
    for sub in active.subsets() {
        if sub.is_disjoint(bin) {
            continue;
        }
        let need = info(
            p,
            &labels(sub, source_label),
            &labels(sub, aux_label),
            &labels(active.difference(sub), aux_label),
        )?;
        let have: f64 = sub.iter().map(|i| rates[i]).sum();
        let slack = have - need;
        if slack < best.0 {
            best = (
                slack,
                format!("R{sub} >= I(x{sub}; u{sub} | u{})", active.difference(sub)),
            );
        }
    }
    Ok(best)
}

fn mu_slack(p: &JointPmf, target: f64, choice: &BinningChoice) -> Result<(f64, String)> {
    let bound = info(
        p,
        &labels(choice.a_bin, aux_label),
        &labels(choice.b_bin, aux_label),
        &[],
    )?;
    Ok((
        bound - target,
        format!("mu <= I(u{}; u{})", choice.a_bin, choice.b_bin),
    ))
}

fn certify(
    p: &JointPmf,
    rates: &[f64],
    pair: SubsetPair,
    target: f64,
    choice: BinningChoice,
) -> Result<PairCertificate> {
    choice.validate(pair)?;
    let mut worst = side_slack(p, rates, choice.a_active, choice.a_bin)?;
    for candidate in [
        side_slack(p, rates, choice.b_active, choice.b_bin)?,
        mu_slack(p, target, &choice)?,
    ] {
        if candidate.0 < worst.0 {
            worst = candidate;
        }
    }
    Ok(PairCertificate {
        pair,
        choice,
        satisfied: worst.0 >= -MEMBERSHIP_TOLERANCE,
        binding: worst.1,
        slack: worst.0,
    })
}

fn check_point(p_x: &JointPmf, channels: &[Channel], point: &MultiRegionPoint) -> Result<JointPmf> {
    let joint = multi_joint(p_x, channels)?;
    let k = channels.len();
    if point.rates.len() != k {
        return Err(Error::Constraint(format!(
            "point has {} rates for {k} sources",
            point.rates.len()
        )));
    }
    let full = IndexSet::full(k);
    for pair in point.mu.keys() {
        if pair.a.is_empty()
            || pair.b.is_empty()
            || !pair.a.is_disjoint(pair.b)
            || !pair.a.union(pair.b).is_subset_of(full)
        {
            return Err(Error::Constraint(format!(
                "invalid pair {pair} for K = {k}"
            )));
        }
    }
    Ok(joint)
}

/// Checks a target point against the inner bound generated by `channels`
/// with the given binning choice per pair. Every pair of the point needs a
/// choice.
pub fn multi_inner_membership(
    p_x: &JointPmf,
    channels: &[Channel],
    point: &MultiRegionPoint,
    choices: &BTreeMap<SubsetPair, BinningChoice>,
) -> Result<Membership> {
    let joint = check_point(p_x, channels, point)?;
    let mut pairs = Vec::with_capacity(point.mu.len());
    for (&pair, &target) in &point.mu {
        let choice = *choices
            .get(&pair)
            .ok_or_else(|| Error::Constraint(format!("no binning choice for pair {pair}")))?;
        pairs.push(certify(&joint, &point.rates, pair, target, choice)?);
    }
    Ok(Membership {
        member: pairs.iter().all(|c| c.satisfied),
        pairs,
    })
}

/// `(S_a, S_b)` options for one side, in search order: `|S_a|` descending,
/// then `|S_b|` descending, then lexicographic; the empty option last.
fn side_options(s: IndexSet) -> Vec<(IndexSet, IndexSet)> {
    let mut out = Vec::new();
    for active in s.subsets().filter(|x| !x.is_empty()) {
        for bin in active.subsets().filter(|x| !x.is_empty()) {
            out.push((active, bin));
        }
    }
    out.sort_by(|x, y| {
        y.0.len()
            .cmp(&x.0.len())
            .then(y.1.len().cmp(&x.1.len()))
            .then(x.0.lexicographic(y.0))
            .then(x.1.lexicographic(y.1))
    });
    out.push((IndexSet::EMPTY, IndexSet::EMPTY));
    out
}

/// Finds, for every pair of the point, the first binning choice (in the
/// documented order, `A` options outer, `B` options inner) that certifies
/// it. Returns `None` if some pair admits no choice.
pub fn multi_inner_search(
    p_x: &JointPmf,
    channels: &[Channel],
    point: &MultiRegionPoint,
) -> Result<Option<BTreeMap<SubsetPair, BinningChoice>>> {
    if channels.len() > MAX_SEARCH_SOURCES {
        return Err(Error::Size(format!(
            "binning search supports at most {MAX_SEARCH_SOURCES} sources, got {}",
            channels.len()
        )));
    }
    let joint = check_point(p_x, channels, point)?;
    let mut side_ok: BTreeMap<(IndexSet, IndexSet), bool> = BTreeMap::new();
    let mut feasible = |active: IndexSet, bin: IndexSet| -> Result<bool> {
        if let Some(&ok) = side_ok.get(&(active, bin)) {
            return Ok(ok);
        }
        let ok = side_slack(&joint, &point.rates, active, bin)?.0 >= -MEMBERSHIP_TOLERANCE;
        side_ok.insert((active, bin), ok);
        Ok(ok)
    };
    let mut found = BTreeMap::new();
    for (&pair, &target) in &point.mu {
        let b_sides = side_options(pair.b);
        let mut hit = None;
        'search: for (a_active, a_bin) in side_options(pair.a) {
            if !feasible(a_active, a_bin)? {
                continue;
            }
            for &(b_active, b_bin) in &b_sides {
                if !feasible(b_active, b_bin)? {
                    continue;
                }
                let choice = BinningChoice {
                    a_active,
                    a_bin,
                    b_active,
                    b_bin,
                };
                if mu_slack(&joint, target, &choice)?.0 >= -MEMBERSHIP_TOLERANCE {
                    hit = Some(choice);
                    break 'search;
                }
            }
        }
        match hit {
            Some(choice) => {
                found.insert(pair, choice);
            }
            None => return Ok(None),
        }
    }
    Ok(Some(found))
}

/// Three binary sources with `x1` fair, `x3 ~ B(p)` and `x2 = x1 xor x3`.
pub fn korner_marton_source(p: f64) -> Result<JointPmf> {
    crate::error::check_probability("korner-marton crossover", p)?;
    let axes = (0..3)
        .map(|i| Alphabet::new(source_label(i), 2))
        .collect::<Result<Vec<_>>>()?;
    JointPmf::from_fn(axes, |i| {
        if i[1] != i[0] ^ i[2] {
            0.0
        } else if i[2] == 1 {
            0.5 * p
        } else {
            0.5 * (1.0 - p)
        }
    })
}

/// Target point `R3 = ln 2`, `R1 = R2 = h(p)`, `mu[{1,2},{3}] = h(p)` and
/// zero for every other pair.
pub fn korner_marton_point(p: f64) -> Result<MultiRegionPoint> {
    crate::error::check_probability("korner-marton crossover", p)?;
    let h = hb(p);
    let mut mu: BTreeMap<SubsetPair, f64> =
        SubsetPair::all(3).into_iter().map(|q| (q, 0.0)).collect();
    mu.insert(
        SubsetPair::new(IndexSet::of(&[1, 2]), IndexSet::of(&[3]))?,
        h,
    );
    Ok(MultiRegionPoint {
        mu,
        rates: vec![h, h, LN_2],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probability::{bsc_channel, compose_markov, dsbs};
    use crate::regions::{inner_point, outer_point_ro, outer_point_ro_prime, RegionPoint};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_channel(rng: &mut ChaCha8Rng, inputs: usize, outputs: usize) -> Channel {
        let rows: Vec<Vec<f64>> = (0..inputs)
            .map(|_| {
                let r: Vec<f64> = (0..outputs).map(|_| rng.random::<f64>() + 1e-3).collect();
                let t: f64 = r.iter().sum();
                r.into_iter().map(|m| m / t).collect()
            })
            .collect();
        Channel::from_rows(&rows).unwrap()
    }

    fn random_source(rng: &mut ChaCha8Rng, sizes: &[usize]) -> JointPmf {
        let axes = sizes
            .iter()
            .enumerate()
            .map(|(i, &s)| Alphabet::new(source_label(i), s).unwrap())
            .collect();
        let n: usize = sizes.iter().product();
        let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let t: f64 = raw.iter().sum();
        JointPmf::new(axes, raw.into_iter().map(|m| m / t).collect()).unwrap()
    }

    fn dsbs_as_pair(p: f64) -> JointPmf {
        dsbs(p)
            .unwrap()
            .relabel(&[("x", "x1"), ("z", "x2")])
            .unwrap()
    }

    fn pair(a: &[usize], b: &[usize]) -> SubsetPair {
        SubsetPair::new(IndexSet::of(a), IndexSet::of(b)).unwrap()
    }

    #[test]
    fn index_set_basics() {
        let s = IndexSet::of(&[1, 3]);
        assert_eq!(s.to_string(), "{1,3}");
        assert_eq!(s.len(), 2);
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![0, 2]);
        assert_eq!(s.subsets().count(), 4);
        assert_eq!(IndexSet::EMPTY.subsets().count(), 1);
        assert!(IndexSet::of(&[1]).is_subset_of(s));
        assert_eq!(pair(&[1, 2], &[3]).to_string(), "{1,2}|{3}");
    }

    #[test]
    fn pair_counts() {
        for k in 1..=6 {
            let expected = 3usize.pow(k as u32) + 1 - 2usize.pow(k as u32 + 1);
            assert_eq!(SubsetPair::all(k).len(), expected);
        }
        assert!(SubsetPair::new(IndexSet::of(&[1]), IndexSet::of(&[1])).is_err());
        assert!(SubsetPair::new(IndexSet::EMPTY, IndexSet::of(&[1])).is_err());
        assert!(SubsetPair::cross(IndexSet::of(&[1]), IndexSet::of(&[1])).is_ok());
    }

    #[test]
    fn two_source_reduction() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..100 {
            let p = rng.random::<f64>() * 0.5;
            let cu = random_channel(&mut rng, 2, 3);
            let cv = random_channel(&mut rng, 2, 2);
            let two = compose_markov(&dsbs(p).unwrap(), &cu, &cv).unwrap();
            let multi = multi_joint(&dsbs_as_pair(p), &[cu.clone(), cv.clone()]).unwrap();
            let ro_p = multi_outer_point_ro_prime(&multi).unwrap();
            let ro = multi_outer_point_ro(&multi).unwrap();
            let ref_p = outer_point_ro_prime(&two).unwrap();
            let ref_o = outer_point_ro(&two).unwrap();
            let forward = ro_p.mu[&pair(&[1], &[2])];
            let backward = ro_p.mu[&pair(&[2], &[1])];
            assert!((forward.min(backward) - ref_p.mu).abs() < 1e-10);
            assert!((ro.mu[&pair(&[1], &[2])] - ref_o.mu).abs() < 1e-10);
            assert!((ro.rates[0] - ref_o.r1).abs() < 1e-10);
            assert!((ro.rates[1] - ref_o.r2).abs() < 1e-10);
        }
    }

    #[test]
    fn identity_auxiliaries_give_source_information() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let src = random_source(&mut rng, &[2, 3, 2]);
        let ids: Vec<Channel> = [2, 3, 2]
            .iter()
            .map(|&s| Channel::identity(s).unwrap())
            .collect();
        let joint = multi_joint(&src, &ids).unwrap();
        let pt = multi_outer_point_ro_prime(&joint).unwrap();
        assert_eq!(pt.mu.len(), 12);
        for (q, &m) in &pt.mu {
            let direct = info(
                &src,
                &labels(q.a, source_label),
                &labels(q.b, source_label),
                &[],
            )
            .unwrap();
            assert!((m - direct).abs() < 1e-12, "{q}");
        }
    }

    #[test]
    fn constant_auxiliary_has_no_relevance() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let src = random_source(&mut rng, &[2, 2, 2]);
        let chans = vec![
            random_channel(&mut rng, 2, 2),
            random_channel(&mut rng, 2, 2),
            Channel::constant(2, &[0.4, 0.6]).unwrap(),
        ];
        let pt = multi_outer_point_ro_prime(&multi_joint(&src, &chans).unwrap()).unwrap();
        assert!(pt.mu[&pair(&[3], &[1, 2])].abs() < 1e-15);
    }

    #[test]
    fn ro_dominated_by_ro_prime_for_three_sources() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        for _ in 0..200 {
            let src = random_source(&mut rng, &[2, 2, 2]);
            let chans: Vec<Channel> = (0..3).map(|_| random_channel(&mut rng, 2, 2)).collect();
            let joint = multi_joint(&src, &chans).unwrap();
            let ro = multi_outer_point_ro(&joint).unwrap();
            let ro_p = multi_outer_point_ro_prime(&joint).unwrap();
            for (q, &m) in &ro.mu {
                assert!(m <= ro_p.mu[q] + 1e-10, "{q}");
            }
        }
    }

    #[test]
    fn independent_sources_have_no_co_information() {
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        let x1 = JointPmf::from_vector("x1", &[0.3, 0.7]).unwrap();
        let x2 = JointPmf::from_vector("x2", &[0.6, 0.1, 0.3]).unwrap();
        let src = x1.product(&x2).unwrap();
        let chans = vec![
            random_channel(&mut rng, 2, 2),
            random_channel(&mut rng, 3, 2),
        ];
        let pt = multi_outer_point_ro(&multi_joint(&src, &chans).unwrap()).unwrap();
        assert!(pt.mu[&pair(&[1], &[2])] <= 1e-15);
    }

    #[test]
    fn markov_violation_names_the_set() {
        // u1 copies x2
        let src = dsbs_as_pair(0.2);
        let axes = ["x1", "x2", "u1", "u2"]
            .iter()
            .map(|l| Alphabet::new(*l, 2).unwrap())
            .collect();
        let joint = JointPmf::from_fn(axes, |i| {
            if i[2] == i[1] && i[3] == i[1] {
                src.get(&[i[0], i[1]])
            } else {
                0.0
            }
        })
        .unwrap();
        match multi_outer_point_ro_prime(&joint) {
            Err(Error::Markov { chain, .. }) => assert!(chain.contains("u{1}"), "{chain}"),
            other => panic!("expected Markov error, got {other:?}"),
        }
    }

    #[test]
    fn no_binning_requires_single_letter_rates() {
        let mut rng = ChaCha8Rng::seed_from_u64(36);
        let p = 0.15;
        let chans = vec![
            random_channel(&mut rng, 2, 2),
            random_channel(&mut rng, 2, 2),
        ];
        let joint = multi_joint(&dsbs_as_pair(p), &chans).unwrap();
        let r1 = mutual_information(&joint, &["x1"], &["u1"]).unwrap();
        let r2 = mutual_information(&joint, &["x2"], &["u2"]).unwrap();
        let q = pair(&[1], &[2]);
        let choice = BTreeMap::from([(q, BinningChoice::no_binning(q))]);
        let at = |rates: Vec<f64>| MultiRegionPoint {
            mu: BTreeMap::from([(q, 0.0)]),
            rates,
        };
        let yes =
            multi_inner_membership(&dsbs_as_pair(p), &chans, &at(vec![r1, r2]), &choice).unwrap();
        assert!(yes.member);
        let no =
            multi_inner_membership(&dsbs_as_pair(p), &chans, &at(vec![r1 - 1e-6, r2]), &choice)
                .unwrap();
        assert!(!no.member);
        assert!(no.pairs[0].binding.starts_with("R{1}"));
    }

    #[test]
    fn two_source_membership_matches_inner_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..50 {
            let p = rng.random::<f64>() * 0.5;
            let cu = random_channel(&mut rng, 2, 2);
            let cv = random_channel(&mut rng, 2, 2);
            let corner = inner_point(&dsbs(p).unwrap(), &cu, &cv).unwrap();
            let target = RegionPoint::new(
                corner.mu + rng.random_range(-0.02..0.02),
                corner.r1 + rng.random_range(-0.02..0.02),
                corner.r2 + rng.random_range(-0.02..0.02),
            );
            let q = pair(&[1], &[2]);
            let point = MultiRegionPoint {
                mu: BTreeMap::from([(q, target.mu)]),
                rates: vec![target.r1, target.r2],
            };
            let choices = BTreeMap::from([(q, BinningChoice::no_binning(q))]);
            let m = multi_inner_membership(&dsbs_as_pair(p), &[cu, cv], &point, &choices).unwrap();
            assert_eq!(m.member, corner.dominates(&target));
        }
    }

    #[test]
    fn helper_binning_beats_no_binning() {
        // x2 and x3 are noisy copies of x1
        let axes = (0..3)
            .map(|i| Alphabet::new(source_label(i), 2).unwrap())
            .collect();
        let src = JointPmf::from_fn(axes, |i| {
            let n = if i[1] == i[0] { 0.9 } else { 0.1 };
            let m = if i[2] == i[0] { 0.8 } else { 0.2 };
            0.5 * n * m
        })
        .unwrap();
        let chans: Vec<Channel> = (0..3).map(|_| bsc_channel(0.05).unwrap()).collect();
        let joint = multi_joint(&src, &chans).unwrap();
        let a = IndexSet::of(&[1, 2]);
        let i_x2u2 = mutual_information(&joint, &["x2"], &["u2"]).unwrap();
        let r2_full = conditional_mutual_information(&joint, &["x2"], &["u2"], &["u1"]).unwrap();
        let r1_help = conditional_mutual_information(&joint, &["x1"], &["u1"], &["u2"]).unwrap();
        let sum = mutual_information(&joint, &["x1", "x2"], &["u1", "u2"]).unwrap();
        let r2 = 0.5 * r2_full;
        assert!(r2 < i_x2u2);
        let r1 = (sum - r2).max(r1_help) + 1e-6;
        let r3 = LN_2;
        let target = mutual_information(&joint, &["u1"], &["u3"]).unwrap();
        let q = SubsetPair::new(a, IndexSet::of(&[3])).unwrap();
        let point = MultiRegionPoint {
            mu: BTreeMap::from([(q, target)]),
            rates: vec![r1, r2, r3],
        };
        let helper = BinningChoice {
            a_active: a,
            a_bin: IndexSet::of(&[1]),
            b_active: IndexSet::of(&[3]),
            b_bin: IndexSet::of(&[3]),
        };
        let with =
            multi_inner_membership(&src, &chans, &point, &BTreeMap::from([(q, helper)])).unwrap();
        assert!(with.member, "{:?}", with.pairs);
        let without = multi_inner_membership(
            &src,
            &chans,
            &point,
            &BTreeMap::from([(q, BinningChoice::no_binning(q))]),
        )
        .unwrap();
        assert!(!without.member);
        // exhaustive check of the helper choice: sum and singleton constraints
        assert!(r1 >= r1_help && r1 + r2 >= sum);
        let found = multi_inner_search(&src, &chans, &point).unwrap().unwrap();
        assert_eq!(found[&q], helper);
    }

    #[test]
    fn invalid_choice_is_rejected() {
        let q = pair(&[1], &[2]);
        let bad = BinningChoice {
            a_active: IndexSet::of(&[1]),
            a_bin: IndexSet::of(&[1, 2]),
            b_active: IndexSet::of(&[2]),
            b_bin: IndexSet::of(&[2]),
        };
        let point = MultiRegionPoint {
            mu: BTreeMap::from([(q, 0.0)]),
            rates: vec![1.0, 1.0],
        };
        let chans = vec![Channel::identity(2).unwrap(), Channel::identity(2).unwrap()];
        let r = multi_inner_membership(
            &dsbs_as_pair(0.1),
            &chans,
            &point,
            &BTreeMap::from([(q, bad)]),
        );
        assert!(matches!(r, Err(Error::Constraint(_))));
    }

    #[test]
    fn search_prefers_full_sets_and_reports_none() {
        let p = 0.1;
        let chans = vec![bsc_channel(0.1).unwrap(), bsc_channel(0.1).unwrap()];
        let joint = multi_joint(&dsbs_as_pair(p), &chans).unwrap();
        let q = pair(&[1], &[2]);
        let i_uu = mutual_information(&joint, &["u1"], &["u2"]).unwrap();
        let r = mutual_information(&joint, &["x1"], &["u1"]).unwrap();
        let mut point = MultiRegionPoint {
            mu: BTreeMap::from([(q, i_uu * 0.5)]),
            rates: vec![r, r],
        };
        let found = multi_inner_search(&dsbs_as_pair(p), &chans, &point)
            .unwrap()
            .unwrap();
        assert_eq!(found[&q], BinningChoice::no_binning(q));
        point.mu.insert(q, i_uu + 1e-6);
        assert!(multi_inner_search(&dsbs_as_pair(p), &chans, &point)
            .unwrap()
            .is_none());
    }

    #[test]
    fn search_guard() {
        let src = (0..7)
            .map(|i| JointPmf::uniform(&source_label(i), 2).unwrap())
            .reduce(|a, b| a.product(&b).unwrap())
            .unwrap();
        let chans = vec![Channel::identity(2).unwrap(); 7];
        let point = MultiRegionPoint {
            mu: BTreeMap::new(),
            rates: vec![1.0; 7],
        };
        assert!(matches!(
            multi_inner_search(&src, &chans, &point),
            Err(Error::Size(_))
        ));
    }

    #[test]
    fn korner_marton_point_is_not_certified() {
        let p = 0.25;
        let src = korner_marton_source(p).unwrap();
        let target = korner_marton_point(p).unwrap();
        assert_eq!(target.mu.len(), 12);
        let ids = vec![Channel::identity(2).unwrap(); 3];
        assert!(multi_inner_search(&src, &ids, &target).unwrap().is_none());
        let mut rng = ChaCha8Rng::seed_from_u64(38);
        for _ in 0..20 {
            let chans: Vec<Channel> = (0..3).map(|_| random_channel(&mut rng, 2, 2)).collect();
            assert!(multi_inner_search(&src, &chans, &target).unwrap().is_none());
        }
    }
}
