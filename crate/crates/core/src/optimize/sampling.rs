use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;

use super::{Objective, SampleConfig, SupportWeight, Variant};
use crate::error::{Error, Result};
use crate::probability::{Alphabet, Channel, JointPmf};
use crate::regions::{FourWay, RegionPoint, MARKOV_TOLERANCE};

const SINKHORN_SWEEPS: usize = 200;
const SINKHORN_TOLERANCE: f64 = 1e-14;
const MAX_STEP: f64 = 4.0;
const MIN_STEP: f64 = 1e-9;
/// Entries are lifted to this floor before a multiplicative move so that
/// exact zeros can leave the boundary.
const ENTRY_FLOOR: f64 = 1e-12;

/// Generator for sample `index` of a run seeded with `seed`.
pub(crate) fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn dirichlet_row<R: Rng + ?Sized>(rng: &mut R, len: usize, gamma: &Gamma<f64>) -> Vec<f64> {
    if len == 1 {
        return vec![1.0];
    }
    loop {
        let row: Vec<f64> = (0..len).map(|_| gamma.sample(rng)).collect();
        let total: f64 = row.iter().sum();
        if total > 0.0 && total.is_finite() {
            return row.into_iter().map(|g| g / total).collect();
        }
    }
}

/// Channel whose rows are independent flat-Dirichlet draws.
pub fn sample_channel<R: Rng + ?Sized>(
    inputs: usize,
    outputs: usize,
    rng: &mut R,
) -> Result<Channel> {
    sample_channel_with_concentration(inputs, outputs, 1.0, rng)
}

/// Channel whose rows are independent symmetric Dirichlet draws.
pub fn sample_channel_with_concentration<R: Rng + ?Sized>(
    inputs: usize,
    outputs: usize,
    concentration: f64,
    rng: &mut R,
) -> Result<Channel> {
    let gamma = Gamma::new(concentration, 1.0).map_err(|_| Error::Domain {
        what: "dirichlet concentration",
        value: concentration,
    })?;
    let rows: Vec<f64> = (0..inputs)
        .flat_map(|_| dirichlet_row(rng, outputs, &gamma))
        .collect();
    Channel::new(inputs, outputs, rows)
}

/// Auxiliary channels `p(u | x)`, `p(v | z)` and, for [`Variant::Ro`], a
/// positive kernel per source cell `(x, z)` (row-major `[x][z][u][v]`)
/// whose Sinkhorn scaling to the two channel rows couples `u` and `v`.
#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    pub ch_u: Channel,
    pub ch_v: Channel,
    pub coupling: Option<Vec<f64>>,
}

impl Candidate {
    /// The joint over `(u, x, z, v)` this candidate induces on `p_xz`.
    pub fn joint(&self, p_xz: &JointPmf) -> Result<JointPmf> {
        let variant = if self.coupling.is_some() {
            Variant::Ro
        } else {
            Variant::Inner
        };
        let engine = Engine::for_candidate(p_xz, self, variant)?;
        let params = engine.params_of(self)?;
        let mut table = Vec::new();
        if !engine.table(&params, &mut table) {
            return Err(Error::Constraint(
                "coupling kernel does not scale to the channel rows".into(),
            ));
        }
        let axes = vec![
            Alphabet::new("u", engine.nu)?,
            Alphabet::new("x", engine.nx)?,
            Alphabet::new("z", engine.nz)?,
            Alphabet::new("v", engine.nv)?,
        ];
        JointPmf::new(axes, table)
    }
}

/// Raw parameters of a candidate.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Params {
    pub(crate) u: Vec<f64>,
    pub(crate) v: Vec<f64>,
    pub(crate) k: Vec<f64>,
}

/// Dense evaluator for one source and variant.
pub(crate) struct Engine {
    pub(crate) nx: usize,
    pub(crate) nz: usize,
    pub(crate) nu: usize,
    pub(crate) nv: usize,
    src: Vec<f64>,
    pub(crate) variant: Variant,
}

impl Engine {
    pub(crate) fn new(
        p_xz: &JointPmf,
        variant: Variant,
        u_cap: Option<usize>,
        v_cap: Option<usize>,
    ) -> Result<Self> {
        if p_xz.axes().len() != 2 {
            return Err(Error::Axis("expected a joint over exactly (x, z)".into()));
        }
        let ordered = p_xz.marginalize(&["x", "z"])?;
        let (nx, nz) = (ordered.shape()[0], ordered.shape()[1]);
        let nu = u_cap.unwrap_or(nx);
        let nv = if variant == Variant::Bottleneck {
            1
        } else {
            v_cap.unwrap_or(nz)
        };
        if nu == 0 || nv == 0 {
            return Err(Error::Constraint(
                "cardinality caps must be at least 1".into(),
            ));
        }
        Ok(Self {
            nx,
            nz,
            nu,
            nv,
            src: ordered.mass().to_vec(),
            variant,
        })
    }

    fn for_candidate(p_xz: &JointPmf, c: &Candidate, variant: Variant) -> Result<Self> {
        Self::new(
            p_xz,
            variant,
            Some(c.ch_u.outputs()),
            Some(c.ch_v.outputs()),
        )
    }

    pub(crate) fn params_of(&self, c: &Candidate) -> Result<Params> {
        if c.ch_u.inputs() != self.nx
            || c.ch_v.inputs() != self.nz
            || c.ch_u.outputs() != self.nu
            || c.ch_v.outputs() != self.nv
        {
            return Err(Error::Axis(
                "candidate channels do not fit the source".into(),
            ));
        }
        let k = match (&c.coupling, self.variant) {
            (Some(k), Variant::Ro) if k.len() == self.kernel_len() => k.clone(),
            (None, Variant::Ro) => vec![1.0; self.kernel_len()],
            (Some(_), Variant::Ro) => {
                return Err(Error::Axis("coupling kernel has the wrong size".into()))
            }
            _ => Vec::new(),
        };
        if k.iter().any(|&w| !(w >= 0.0 && w.is_finite())) {
            return Err(Error::Domain {
                what: "coupling kernel entry",
                value: k.iter().copied().find(|w| !(*w >= 0.0)).unwrap_or(f64::NAN),
            });
        }
        Ok(Params {
            u: c.ch_u.table().to_vec(),
            v: c.ch_v.table().to_vec(),
            k,
        })
    }

    pub(crate) fn candidate(&self, p: &Params) -> Candidate {
        Candidate {
            ch_u: Channel::new(self.nx, self.nu, p.u.clone()).expect("rows stay normalized"),
            ch_v: Channel::new(self.nz, self.nv, p.v.clone()).expect("rows stay normalized"),
            coupling: (self.variant == Variant::Ro).then(|| p.k.clone()),
        }
    }

    fn kernel_len(&self) -> usize {
        self.nx * self.nz * self.nu * self.nv
    }

    pub(crate) fn sample(&self, rng: &mut ChaCha8Rng, gamma: &Gamma<f64>) -> Params {
        let u = (0..self.nx)
            .flat_map(|_| dirichlet_row(rng, self.nu, gamma))
            .collect();
        let v = if self.variant == Variant::Bottleneck {
            vec![1.0; self.nz]
        } else {
            (0..self.nz)
                .flat_map(|_| dirichlet_row(rng, self.nv, gamma))
                .collect()
        };
        let k = if self.variant == Variant::Ro {
            let block = self.nu * self.nv;
            (0..self.nx * self.nz)
                .flat_map(|_| dirichlet_row(rng, block, gamma))
                .collect()
        } else {
            Vec::new()
        };
        Params { u, v, k }
    }

    /// Parameters from explicit channel tables, with the independent
    /// coupling for [`Variant::Ro`].
    pub(crate) fn from_tables(&self, u: Vec<f64>, v: Vec<f64>) -> Params {
        let k = if self.variant == Variant::Ro {
            vec![1.0; self.kernel_len()]
        } else {
            Vec::new()
        };
        let v = if self.variant == Variant::Bottleneck {
            vec![1.0; self.nz]
        } else {
            v
        };
        Params { u, v, k }
    }

    /// Constant and (where the caps allow) identity channels on each side.
    pub(crate) fn anchors(&self) -> Vec<Params> {
        let constant = |inputs: usize, outputs: usize| {
            let mut t = vec![0.0; inputs * outputs];
            for i in 0..inputs {
                t[i * outputs] = 1.0;
            }
            t
        };
        let identity = |inputs: usize, outputs: usize| {
            (outputs >= inputs).then(|| {
                let mut t = vec![0.0; inputs * outputs];
                for i in 0..inputs {
                    t[i * outputs + i] = 1.0;
                }
                t
            })
        };
        let us: Vec<Vec<f64>> = std::iter::once(constant(self.nx, self.nu))
            .chain(identity(self.nx, self.nu))
            .collect();
        let vs: Vec<Vec<f64>> = if self.variant == Variant::Bottleneck {
            vec![vec![1.0; self.nz]]
        } else {
            std::iter::once(constant(self.nz, self.nv))
                .chain(identity(self.nz, self.nv))
                .collect()
        };
        let mut out = Vec::new();
        for u in &us {
            for v in &vs {
                out.push(self.from_tables(u.clone(), v.clone()));
            }
        }
        out
    }

    /// Fills `out` with the `(u, x, z, v)` table; `false` if the coupling
    /// could not be scaled.
    pub(crate) fn table(&self, p: &Params, out: &mut Vec<f64>) -> bool {
        let (nx, nz, nu, nv) = (self.nx, self.nz, self.nu, self.nv);
        out.clear();
        out.resize(nu * nx * nz * nv, 0.0);
        let at = |u: usize, x: usize, z: usize, v: usize| ((u * nx + x) * nz + z) * nv + v;
        if self.variant == Variant::Ro {
            let block = nu * nv;
            let mut c = vec![0.0; block];
            for x in 0..nx {
                for z in 0..nz {
                    let cell = x * nz + z;
                    let kernel = &p.k[cell * block..(cell + 1) * block];
                    if !sinkhorn(
                        kernel,
                        &p.u[x * nu..(x + 1) * nu],
                        &p.v[z * nv..(z + 1) * nv],
                        &mut c,
                    ) {
                        return false;
                    }
                    let w = self.src[cell];
                    for u in 0..nu {
                        for v in 0..nv {
                            out[at(u, x, z, v)] = w * c[u * nv + v];
                        }
                    }
                }
            }
        } else {
            for u in 0..nu {
                for x in 0..nx {
                    for z in 0..nz {
                        let w = self.src[x * nz + z] * p.u[x * nu + u];
                        for v in 0..nv {
                            out[at(u, x, z, v)] = w * p.v[z * nv + v];
                        }
                    }
                }
            }
        }
        true
    }

    /// Region point of a candidate; `None` if it is infeasible.
    pub(crate) fn point(&self, p: &Params) -> Option<RegionPoint> {
        let mut t = Vec::new();
        if !self.table(p, &mut t) {
            return None;
        }
        let four = FourWay::new([self.nu, self.nx, self.nz, self.nv], &t);
        Some(match self.variant {
            Variant::Inner => four.inner(),
            Variant::RoPrime => four.ro_prime(),
            Variant::Bottleneck => RegionPoint::new(four.i_uz(), four.i_ux(), 0.0),
            Variant::Ro => {
                if four.chain_uxz() > MARKOV_TOLERANCE || four.chain_xzv() > MARKOV_TOLERANCE {
                    return None;
                }
                four.ro()
            }
        })
    }

    /// Coordinates as `(vector, row start, row length, entry)`.
    fn coordinates(&self) -> Vec<(u8, usize, usize, usize)> {
        let mut out = Vec::new();
        let mut push = |which: u8, rows: usize, len: usize| {
            if len > 1 {
                for r in 0..rows {
                    for j in 0..len {
                        out.push((which, r * len, len, j));
                    }
                }
            }
        };
        push(0, self.nx, self.nu);
        if self.variant != Variant::Bottleneck {
            push(1, self.nz, self.nv);
        }
        if self.variant == Variant::Ro {
            push(2, self.nx * self.nz, self.nu * self.nv);
        }
        out
    }

    /// Coordinate hill climbing with multiplicative moves and a per
    /// coordinate step that doubles on success and halves on failure.
    pub(crate) fn refine(
        &self,
        start: Params,
        objective: &Objective,
        steps: usize,
        step_size: f64,
    ) -> Option<(Params, f64, RegionPoint)> {
        let mut point = self.point(&start)?;
        let mut best = objective.score(&point);
        let mut current = start;
        let coords = self.coordinates();
        if coords.is_empty() {
            return Some((current, best, point));
        }
        let mut step = vec![step_size; coords.len()];
        let mut saved = Vec::new();
        for t in 0..steps {
            let c = t % coords.len();
            let (which, start, len, j) = coords[c];
            let mut improved = false;
            for dir in [1.0, -1.0] {
                let row = match which {
                    0 => &mut current.u[start..start + len],
                    1 => &mut current.v[start..start + len],
                    _ => &mut current.k[start..start + len],
                };
                saved.clear();
                saved.extend_from_slice(row);
                row[j] = row[j].max(ENTRY_FLOOR) * (dir * step[c]).exp();
                let total: f64 = row.iter().sum();
                row.iter_mut().for_each(|e| *e /= total);
                if let Some(pt) = self.point(&current) {
                    let score = objective.score(&pt);
                    if score > best {
                        best = score;
                        point = pt;
                        improved = true;
                        break;
                    }
                }
                let row = match which {
                    0 => &mut current.u[start..start + len],
                    1 => &mut current.v[start..start + len],
                    _ => &mut current.k[start..start + len],
                };
                row.copy_from_slice(&saved);
            }
            step[c] = if improved {
                (step[c] * 2.0).min(MAX_STEP)
            } else {
                (step[c] * 0.5).max(MIN_STEP)
            };
        }
        Some((current, best, point))
    }
}

/// Scales `kernel` (row-major `rows.len() x cols.len()`) to the given
/// marginals by alternating row and column normalization.
fn sinkhorn(kernel: &[f64], rows: &[f64], cols: &[f64], out: &mut [f64]) -> bool {
    let (nr, nc) = (rows.len(), cols.len());
    out.copy_from_slice(kernel);
    for _ in 0..SINKHORN_SWEEPS {
        for i in 0..nr {
            let row = &mut out[i * nc..(i + 1) * nc];
            let s: f64 = row.iter().sum();
            if s > 0.0 {
                let f = rows[i] / s;
                row.iter_mut().for_each(|e| *e *= f);
            } else if rows[i] > 0.0 {
                return false;
            }
        }
        for j in 0..nc {
            let s: f64 = (0..nr).map(|i| out[i * nc + j]).sum();
            if s > 0.0 {
                let f = cols[j] / s;
                (0..nr).for_each(|i| out[i * nc + j] *= f);
            } else if cols[j] > 0.0 {
                return false;
            }
        }
        let err = (0..nr)
            .map(|i| (out[i * nc..(i + 1) * nc].iter().sum::<f64>() - rows[i]).abs())
            .fold(0.0, f64::max);
        if err <= SINKHORN_TOLERANCE {
            return true;
        }
    }
    false
}

/// Region point of an explicit candidate. For [`Variant::Ro`] a candidate
/// without a kernel uses the independent coupling.
pub fn evaluate_candidate(
    p_xz: &JointPmf,
    candidate: &Candidate,
    variant: Variant,
) -> Result<RegionPoint> {
    let engine = Engine::for_candidate(p_xz, candidate, variant)?;
    let params = engine.params_of(candidate)?;
    engine.point(&params).ok_or_else(|| Error::Markov {
        chain: "u - x - z / x - z - v".into(),
        cmi: f64::NAN,
    })
}

/// Hill-climbs `candidate` on `objective`; the objective never decreases.
/// Returns the improved candidate and its objective value.
pub fn local_refine(
    p_xz: &JointPmf,
    candidate: &Candidate,
    objective: Objective,
    variant: Variant,
    steps: usize,
    step_size: f64,
) -> Result<(Candidate, f64)> {
    let engine = Engine::for_candidate(p_xz, candidate, variant)?;
    let params = engine.params_of(candidate)?;
    let (p, value, _) = engine
        .refine(params, &objective, steps, step_size)
        .ok_or_else(|| Error::Constraint("starting candidate is infeasible".into()))?;
    Ok((engine.candidate(&p), value))
}

/// Outcome of a support-function evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct SupportResult {
    pub value: f64,
    pub point: RegionPoint,
    pub candidate: Candidate,
    /// Samples rejected as infeasible.
    pub rejected: usize,
    /// Candidates passed to the hill climber.
    pub refined: usize,
}

/// Total order on scores for the selection heap.
#[derive(Clone, Copy, PartialEq)]
struct Score(f64);

impl Eq for Score {}

impl PartialOrd for Score {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Score {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Indices `i` whose score beats the `r`-th best among entries `0..i`.
/// The selected set for a prefix is the restriction of the selected set for
/// any longer sequence.
pub(crate) fn prefix_top(scores: &[Option<f64>], r: usize) -> Vec<usize> {
    let mut heap: BinaryHeap<Reverse<Score>> = BinaryHeap::new();
    let mut out = Vec::new();
    for (i, s) in scores.iter().enumerate() {
        let Some(s) = *s else { continue };
        if r == 0 {
            continue;
        }
        if heap.len() < r {
            heap.push(Reverse(Score(s)));
            out.push(i);
        } else if s > heap.peek().expect("nonempty").0 .0 {
            heap.pop();
            heap.push(Reverse(Score(s)));
            out.push(i);
        }
    }
    out
}

/// Best sampled-and-refined value of `weight . (mu, R1, R2)` over
/// candidates with the variant's Markov structure.
///
/// The pool holds the anchors (constant and identity channels) followed by
/// `cfg.count` samples; every pool entry that beats the `refine_top`-th
/// best entry before it is refined. The value is nondecreasing in
/// `cfg.count` for a fixed seed.
pub fn support_function(
    p_xz: &JointPmf,
    weight: SupportWeight,
    cfg: &SampleConfig,
    variant: Variant,
) -> Result<SupportResult> {
    cfg.validate()?;
    let engine = Engine::new(p_xz, variant, cfg.u_cap, cfg.v_cap)?;
    let objective = Objective::Weighted(weight);
    let pool = Pool::build(&engine, cfg, Vec::new())?;
    let scores: Vec<Option<f64>> = pool
        .points
        .iter()
        .map(|p| p.map(|pt| objective.score(&pt)))
        .collect();
    let chosen = prefix_top(&scores, cfg.refine_top.max(1));
    let refined: Vec<(usize, Params, f64, RegionPoint)> = chosen
        .par_iter()
        .filter_map(|&i| {
            let start = pool.params(&engine, i);
            engine
                .refine(start, &objective, cfg.refine_steps, cfg.step_size)
                .map(|(p, v, pt)| (i, p, v, pt))
        })
        .collect();
    let best = refined
        .iter()
        .fold(
            None::<&(usize, Params, f64, RegionPoint)>,
            |acc, r| match acc {
                Some(a) if r.2 <= a.2 => Some(a),
                _ => Some(r),
            },
        )
        .expect("anchors are always feasible");
    Ok(SupportResult {
        value: best.2,
        point: best.3,
        candidate: engine.candidate(&best.1),
        rejected: pool.points.iter().filter(|p| p.is_none()).count(),
        refined: refined.len(),
    })
}

/// Region points of `cfg.count` raw samples (no anchors, no refinement);
/// `None` marks a rejected sample.
pub fn sample_region_points(
    p_xz: &JointPmf,
    cfg: &SampleConfig,
    variant: Variant,
) -> Result<Vec<Option<RegionPoint>>> {
    cfg.validate()?;
    let engine = Engine::new(p_xz, variant, cfg.u_cap, cfg.v_cap)?;
    let gamma = Gamma::new(cfg.concentration, 1.0).map_err(|_| Error::Domain {
        what: "dirichlet concentration",
        value: cfg.concentration,
    })?;
    Ok((0..cfg.count as u64)
        .into_par_iter()
        .map(|i| engine.point(&engine.sample(&mut stream(cfg.seed, i), &gamma)))
        .collect())
}

/// Anchors, explicit warm starts and random samples with their points.
pub(crate) struct Pool {
    fixed: Vec<Params>,
    pub(crate) points: Vec<Option<RegionPoint>>,
    seed: u64,
    gamma: Gamma<f64>,
}

impl Pool {
    pub(crate) fn build(engine: &Engine, cfg: &SampleConfig, warm: Vec<Params>) -> Result<Self> {
        let gamma = Gamma::new(cfg.concentration, 1.0).map_err(|_| Error::Domain {
            what: "dirichlet concentration",
            value: cfg.concentration,
        })?;
        let mut fixed = engine.anchors();
        fixed.extend(warm);
        let mut points: Vec<Option<RegionPoint>> =
            fixed.par_iter().map(|p| engine.point(p)).collect();
        let sampled: Vec<Option<RegionPoint>> = (0..cfg.count as u64)
            .into_par_iter()
            .map(|i| engine.point(&engine.sample(&mut stream(cfg.seed, i), &gamma)))
            .collect();
        points.extend(sampled);
        Ok(Self {
            fixed,
            points,
            seed: cfg.seed,
            gamma,
        })
    }

    pub(crate) fn params(&self, engine: &Engine, i: usize) -> Params {
        if i < self.fixed.len() {
            self.fixed[i].clone()
        } else {
            engine.sample(
                &mut stream(self.seed, (i - self.fixed.len()) as u64),
                &self.gamma,
            )
        }
    }

    /// Refines the best `top` entries for each slope and returns the
    /// refined points, in slope-major order.
    pub(crate) fn refine_slopes(
        &self,
        engine: &Engine,
        slopes: &[f64],
        top: usize,
        cfg: &SampleConfig,
    ) -> Vec<RegionPoint> {
        let mut tasks = Vec::new();
        for &s in slopes {
            let objective = Objective::Slope(s);
            let mut ranked: Vec<(f64, usize)> = self
                .points
                .iter()
                .enumerate()
                .filter_map(|(i, p)| p.map(|pt| (objective.score(&pt), i)))
                .collect();
            // descending score, ascending index on ties
            ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
            tasks.extend(ranked.into_iter().take(top).map(|(_, i)| (s, i)));
        }
        tasks
            .par_iter()
            .filter_map(|&(s, i)| {
                engine
                    .refine(
                        self.params(engine, i),
                        &Objective::Slope(s),
                        cfg.refine_steps,
                        cfg.step_size,
                    )
                    .map(|r| r.2)
            })
            .collect()
    }
}
