//! Counting algebraically new invariants per case over exact field samples.
//!
//! A case's schemes are compared, as functions of the metric jet, against
//! products of representatives from earlier cases. Counting is linear: the
//! rewriting identities (Ricci-pair symmetry, contracted divergences, and
//! the derivative commutator, which in 3D turns one twice-differentiated
//! factor into a pair of factors of orders 0 and d-2) relate scheme values
//! linearly, so the number of new invariants is the dimension the case adds
//! to the span of those products. Spans are measured on random metric jets
//! over GF(2^61 - 1): rank of a family of rational functions in the jet
//! coefficients is preserved by a generic prime-field evaluation, and exact
//! arithmetic removes rank tolerances entirely.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{CurvError, Result};
use crate::gf::{Gf61, GF_P};
use crate::invariants::evalv::PointCurvature;
use crate::invariants::scheme::{enumerate_schemes, slot_total, ContractionScheme};
use crate::jet::{Jet, JetCtx};
use crate::scalar::Scalar;
use crate::tensor::Geometry;

/// Values of a scheme list on a set of samples; rows are schemes, columns
/// are samples.
#[derive(Clone, Debug)]
pub struct InvariantValueTable<S> {
    pub schemes: Vec<ContractionScheme>,
    pub values: Vec<Vec<S>>,
}

impl<S> InvariantValueTable<S> {
    pub fn shape_consistent(&self) -> bool {
        self.values.len() == self.schemes.len()
            && self.values.windows(2).all(|w| w[0].len() == w[1].len())
    }
}

impl InvariantValueTable<f64> {
    pub fn validate(&self) -> Result<()> {
        if !self.shape_consistent() {
            return Err(CurvError::Invalid("value table shape mismatch".into()));
        }
        if self.values.iter().flatten().any(|v| v.is_nan()) {
            return Err(CurvError::Invalid("value table contains NaN".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct DedupOutcome {
    pub count: usize,
    pub representatives: Vec<ContractionScheme>,
    pub scheme_classes: usize,
    pub pool_size: usize,
    pub samples_used: usize,
}

#[derive(Clone, Debug)]
pub struct CensusRow {
    pub case_signature: Vec<u8>,
    pub scheme_classes: usize,
    pub pool_size: usize,
    pub new_count: usize,
    pub samples_used: usize,
    pub representatives: Vec<ContractionScheme>,
}

/// Multisets reachable from `sig` by the derivative commutator rewrite:
/// replace any factor order d ≥ 2 by the pair {0, d-2}. Total weight is
/// preserved. Includes `sig` itself.
pub(crate) fn reachable_multisets(sig: &[u8]) -> BTreeSet<Vec<u8>> {
    let mut start = sig.to_vec();
    start.sort_unstable();
    let mut set = BTreeSet::new();
    let mut queue = vec![start];
    while let Some(m) = queue.pop() {
        if !set.insert(m.clone()) {
            continue;
        }
        for i in 0..m.len() {
            if m[i] >= 2 {
                let mut next = m.clone();
                next[i] -= 2;
                next.push(0);
                next.sort_unstable();
                queue.push(next);
            }
        }
    }
    set
}

/// Non-empty sub-multisets with even slot count.
fn even_submultisets(m: &[u8]) -> Vec<Vec<u8>> {
    let mut mult: BTreeMap<u8, usize> = BTreeMap::new();
    for &d in m {
        *mult.entry(d).or_insert(0) += 1;
    }
    let vals: Vec<(u8, usize)> = mult.into_iter().collect();
    let mut out = Vec::new();
    let mut counts = vec![0usize; vals.len()];
    loop {
        // advance odometer
        let mut i = 0;
        loop {
            if i == counts.len() {
                return out;
            }
            counts[i] += 1;
            if counts[i] <= vals[i].1 {
                break;
            }
            counts[i] = 0;
            i += 1;
        }
        let mut sub = Vec::new();
        for (c, &(v, _)) in counts.iter().zip(&vals) {
            for _ in 0..*c {
                sub.push(v);
            }
        }
        if slot_total(&sub) % 2 == 0 {
            out.push(sub);
        }
    }
}

fn case_order(a: &[u8], b: &[u8]) -> std::cmp::Ordering {
    slot_total(a)
        .cmp(&slot_total(b))
        .then(b.len().cmp(&a.len()))
        .then(a.cmp(b))
}

/// Every case whose representatives can enter some target's product pool,
/// in processing order: weight ascending, then factor count descending,
/// then lexicographic. A case always sorts after the cases its pool needs.
pub fn census_closure(targets: &[Vec<u8>]) -> Vec<Vec<u8>> {
    let mut set: BTreeSet<Vec<u8>> = BTreeSet::new();
    for t in targets {
        let mut s = t.clone();
        s.sort_unstable();
        set.insert(s);
    }
    loop {
        let mut grew = false;
        for m in set.clone() {
            for r in reachable_multisets(&m) {
                for s in even_submultisets(&r) {
                    grew |= set.insert(s);
                }
            }
        }
        if !grew {
            break;
        }
    }
    let mut v: Vec<Vec<u8>> = set.into_iter().collect();
    v.sort_by(|a, b| case_order(a, b));
    v
}

/// Products of lower-basis elements (repetition allowed) whose combined
/// factor multiset is reachable from `sig`. Each entry is a sorted index
/// multiset into the lower basis.
fn pool_products(
    sig: &[u8],
    lower: &[ContractionScheme],
    reach: &BTreeSet<Vec<u8>>,
) -> Vec<Vec<usize>> {
    let target = slot_total(sig);
    let mut out = Vec::new();
    let mut chosen: Vec<usize> = Vec::new();
    fn rec(
        start: usize,
        weight: usize,
        target: usize,
        lower: &[ContractionScheme],
        reach: &BTreeSet<Vec<u8>>,
        chosen: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if weight == target {
            let mut combined: Vec<u8> = chosen
                .iter()
                .flat_map(|&i| lower[i].degrees().iter().copied())
                .collect();
            combined.sort_unstable();
            if reach.contains(&combined) {
                out.push(chosen.clone());
            }
            return;
        }
        for i in start..lower.len() {
            let w = lower[i].weight();
            if weight + w <= target {
                chosen.push(i);
                rec(i, weight + w, target, lower, reach, chosen, out);
                chosen.pop();
            }
        }
    }
    rec(0, 0, target, lower, reach, &mut chosen, &mut out);
    out
}

fn uniform_gf(rng: &mut ChaCha8Rng) -> Gf61 {
    loop {
        let v = rng.next_u64() & ((1u64 << 61) - 1);
        if v < GF_P {
            return Gf61::new(v);
        }
    }
}

/// A random 3D metric jet with uniform prime-field coefficients. Genericity
/// over the field is what the rank argument needs; no signature condition
/// applies here.
fn random_field_geometry(rng: &mut ChaCha8Rng, order: usize) -> Result<Geometry<Jet<Gf61>>> {
    let dim = 3usize;
    let ctx = JetCtx::get(dim, order);
    let n = ctx.len();
    let mut tri: Vec<Vec<Gf61>> = Vec::with_capacity(6);
    for _ in 0..6 {
        tri.push((0..n).map(|_| uniform_gf(rng)).collect());
    }
    let mut comps: Vec<Jet<Gf61>> = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            let (a, b) = if i <= j { (i, j) } else { (j, i) };
            let t = a * dim + b - a * (a + 1) / 2;
            comps.push(Jet::from_coeffs(&ctx, tri[t].clone()));
        }
    }
    let coords = vec!["x0".to_string(), "x1".to_string(), "x2".to_string()];
    Geometry::new(coords, comps)
}

struct CaseProblem<'a> {
    schemes: Vec<ContractionScheme>,
    pool: Vec<Vec<usize>>,
    used: Vec<usize>,
    lower: &'a [ContractionScheme],
    maxd: usize,
    order: usize,
}

fn sample_seed(seed: u64, sig: &[u8], i: usize) -> u64 {
    let mut h = 0x9E37_79B9_7F4A_7C15u64 ^ seed;
    for &d in sig {
        h = (h ^ (d as u64).wrapping_add(1)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        h ^= h >> 27;
    }
    h = (h ^ i as u64).wrapping_mul(0x94D0_49BB_1331_11EB);
    h ^ (h >> 31)
}

fn try_column(prob: &CaseProblem, rng: &mut ChaCha8Rng) -> Result<Vec<Gf61>> {
    let mut geom = random_field_geometry(rng, prob.order)?;
    let pc = PointCurvature::from_geometry(&mut geom, prob.maxd)?;
    let mut rep_vals: HashMap<usize, Gf61> = HashMap::new();
    for &i in &prob.used {
        rep_vals.insert(i, pc.eval_scheme(&prob.lower[i])?);
    }
    let mut col = Vec::with_capacity(prob.pool.len() + prob.schemes.len());
    for entry in &prob.pool {
        let mut v = <Gf61 as Scalar>::one();
        for &i in entry {
            v = v.mul(&rep_vals[&i]);
        }
        col.push(v);
    }
    for s in &prob.schemes {
        col.push(pc.eval_scheme(s)?);
    }
    Ok(col)
}

fn sample_column(prob: &CaseProblem, seed: u64) -> Result<Vec<Gf61>> {
    // resample on the (vanishingly rare) singular draw
    let mut attempt = 0u64;
    loop {
        let s = seed.wrapping_add(attempt.wrapping_mul(0xA24B_AED4_963E_E407));
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        match try_column(prob, &mut rng) {
            Ok(col) => return Ok(col),
            Err(e) => {
                attempt += 1;
                if attempt > 8 {
                    return Err(e);
                }
            }
        }
    }
}

/// Exact row echelon over GF(2^61 - 1), kept fully reduced.
struct Echelon {
    pivots: Vec<usize>,
    rows: Vec<Vec<Gf61>>,
}

impl Echelon {
    fn new() -> Self {
        Echelon {
            pivots: Vec::new(),
            rows: Vec::new(),
        }
    }

    /// Returns true when the row enlarges the span.
    fn insert(&mut self, mut v: Vec<Gf61>) -> bool {
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            let c = v[p];
            if !Scalar::is_zero(&c) {
                for t in 0..v.len() {
                    v[t] = v[t].sub(&c.mul(&row[t]));
                }
            }
        }
        let p = match v.iter().position(|x| !Scalar::is_zero(x)) {
            None => return false,
            Some(p) => p,
        };
        let inv = v[p].inv().expect("pivot is nonzero");
        for t in v.iter_mut() {
            *t = t.mul(&inv);
        }
        for row in self.rows.iter_mut() {
            let c = row[p];
            if !Scalar::is_zero(&c) {
                for t in 0..row.len() {
                    row[t] = row[t].sub(&c.mul(&v[t]));
                }
            }
        }
        self.pivots.push(p);
        self.rows.push(v);
        true
    }
}

fn rank_pass(prob: &CaseProblem, columns: &[Vec<Gf61>]) -> (usize, Vec<usize>) {
    let ncols = columns.len();
    let npool = prob.pool.len();
    let mut ech = Echelon::new();
    for r in 0..npool {
        let row: Vec<Gf61> = (0..ncols).map(|c| columns[c][r]).collect();
        ech.insert(row);
    }
    let mut reps = Vec::new();
    let mut count = 0;
    for (s, _) in prob.schemes.iter().enumerate() {
        let row: Vec<Gf61> = (0..ncols).map(|c| columns[c][npool + s]).collect();
        if ech.insert(row) {
            count += 1;
            reps.push(s);
        }
    }
    (count, reps)
}

/// Counts how many schemes of `case` are new relative to products of
/// `lower_basis` elements, and returns greedy representatives in
/// enumeration order. Counts stabilize across independent seeds because
/// ranks are exact; the sample set still grows until two passes agree.
pub fn dedup_and_count(
    case: &[u8],
    lower_basis: &[ContractionScheme],
    seed: u64,
) -> Result<DedupOutcome> {
    let mut sig = case.to_vec();
    sig.sort_unstable();
    let schemes = enumerate_schemes(&sig)?;
    let reach = reachable_multisets(&sig);
    let pool = pool_products(&sig, lower_basis, &reach);
    let used: Vec<usize> = pool
        .iter()
        .flatten()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let maxd = used
        .iter()
        .map(|&i| lower_basis[i].max_degree())
        .chain(sig.iter().copied())
        .max()
        .unwrap() as usize;
    let prob = CaseProblem {
        schemes,
        pool,
        used,
        lower: lower_basis,
        maxd,
        order: maxd + 2,
    };

    let nrows = prob.pool.len() + prob.schemes.len();
    let mut ncols = nrows + 16;
    let mut columns: Vec<Vec<Gf61>> = (0..ncols)
        .into_par_iter()
        .map(|i| sample_column(&prob, sample_seed(seed, &sig, i)))
        .collect::<Result<_>>()?;

    let mut last: Option<(usize, Vec<usize>)> = None;
    for _ in 0..8 {
        let pass = rank_pass(&prob, &columns);
        if last.as_ref() == Some(&pass) {
            let (count, reps) = pass;
            return Ok(DedupOutcome {
                count,
                representatives: reps.iter().map(|&i| prob.schemes[i].clone()).collect(),
                scheme_classes: prob.schemes.len(),
                pool_size: prob.pool.len(),
                samples_used: ncols,
            });
        }
        last = Some(pass);
        let extra: Vec<Vec<Gf61>> = (ncols..ncols + 16)
            .into_par_iter()
            .map(|i| sample_column(&prob, sample_seed(seed, &sig, i)))
            .collect::<Result<_>>()?;
        columns.extend(extra);
        ncols += 16;
    }
    Err(CurvError::Unstable(format!(
        "rank of case {:?} did not stabilize at {} samples",
        sig, ncols
    )))
}

/// Processes the closure of the target cases in order, feeding each case's
/// representatives into the pools of the later ones.
pub fn run_census(targets: &[Vec<u8>], seed: u64) -> Result<Vec<CensusRow>> {
    let cases = census_closure(targets);
    let mut lower: Vec<ContractionScheme> = Vec::new();
    let mut rows = Vec::new();
    for sig in &cases {
        let out = dedup_and_count(sig, &lower, seed)?;
        rows.push(CensusRow {
            case_signature: sig.clone(),
            scheme_classes: out.scheme_classes,
            pool_size: out.pool_size,
            new_count: out.count,
            samples_used: out.samples_used,
            representatives: out.representatives.clone(),
        });
        lower.extend(out.representatives);
    }
    Ok(rows)
}
