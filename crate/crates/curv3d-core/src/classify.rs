//! Pointwise Segre classification of the trace-free Ricci operator of a 3D
//! Lorentzian metric.
//!
//! The classifier looks at S^a_b = R^a_b − (R/3)δ^a_b at one chart point and
//! reports the Segre tag (eigenvalue multiplicities, Jordan blocks, causal
//! character of eigenvectors), the Ricci type, and the isotropy dimension the
//! tag carries. λ1 denotes the eigenvalue of the *full* Ricci operator
//! attached to the repeated block; the three tags whose triple eigenvalue is
//! forced to zero by tracelessness ({(1,11)}, {(21)}, {3}) switch type on
//! λ1 = 0, i.e. on R = 0.
//!
//! Two arithmetic routes share the decision logic. When the metric and the
//! point evaluate over exact rationals, every branch (discriminant sign,
//! matrix ranks, causal signs) is decided exactly and the result is marked
//! `exact`. Otherwise eigenvalues are clustered with gap threshold √tol
//! (defective eigenvalues computed in floats split by about the square root
//! of the perturbation, so a linear threshold would misread every Jordan
//! block) and ranks come from singular values cut at tol·‖S‖. Causal and
//! null tests compare g(v,v) of a Euclidean-unit eigenvector against tol;
//! all of these are tolerance-sensitive by nature, and near-threshold inputs
//! surface as extra candidate tags with sub-unit margins rather than as hard
//! errors.

use crate::error::{CurvError, Result};
use crate::expr::Point;
use crate::scalar::Scalar;
use crate::tensor::{jet_geometry, MetricSpec};
use nalgebra::{Matrix3, Vector3};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use std::cmp::Ordering;
use std::fmt;

/// Segre tag of the trace-free Ricci operator, named by eigenstructure.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub enum SegreTag {
    /// {1,11}: three distinct real eigenvalues, one timelike eigenvector.
    RealDistinct,
    /// {1,(11)}: repeated pair on a spacelike plane, simple timelike direction.
    SpacelikeDegenerate,
    /// {(1,1)1}: repeated pair spanning a Lorentzian plane, simple spacelike direction.
    TimelikeDegenerate,
    /// {(1,11)}: S = 0, every direction an eigenvector.
    FullyDegenerate,
    /// {1zz̄}: one real eigenvalue and a complex-conjugate pair.
    ComplexPair,
    /// {21}: Jordan 2-block on a null direction plus a distinct simple eigenvalue.
    NullDouble,
    /// {(21)}: Jordan 2-block sharing its (zero) eigenvalue with the 1-block.
    NullDoubleDegenerate,
    /// {3}: a single Jordan 3-block, eigenvalue zero.
    NullTriple,
}

impl SegreTag {
    pub fn label(self) -> &'static str {
        match self {
            SegreTag::RealDistinct => "{1,11}",
            SegreTag::SpacelikeDegenerate => "{1,(11)}",
            SegreTag::TimelikeDegenerate => "{(1,1)1}",
            SegreTag::FullyDegenerate => "{(1,11)}",
            SegreTag::ComplexPair => "{1zz̄}",
            SegreTag::NullDouble => "{21}",
            SegreTag::NullDoubleDegenerate => "{(21)}",
            SegreTag::NullTriple => "{3}",
        }
    }

    /// Eigenvalue-multiplicity partition encoded as a coarseness level:
    /// 0 = (1,1,1), 1 = (2,1), 2 = (3). Raising the tolerance can only
    /// raise this level.
    pub fn coarseness(self) -> u8 {
        match self {
            SegreTag::RealDistinct | SegreTag::ComplexPair => 0,
            SegreTag::SpacelikeDegenerate | SegreTag::TimelikeDegenerate | SegreTag::NullDouble => {
                1
            }
            SegreTag::FullyDegenerate | SegreTag::NullDoubleDegenerate | SegreTag::NullTriple => 2,
        }
    }

    /// True for the tags whose type column switches on λ1 = 0.
    pub fn splits_on_lambda1(self) -> bool {
        matches!(
            self,
            SegreTag::FullyDegenerate | SegreTag::NullDoubleDegenerate | SegreTag::NullTriple
        )
    }
}

impl fmt::Display for SegreTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Algebraic Ricci type attached to a Segre tag.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
#[allow(clippy::upper_case_acronyms)]
pub enum RicciType {
    I,
    D,
    O,
    II,
    N,
    III,
}

impl fmt::Display for RicciType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RicciType::I => "I",
            RicciType::D => "D",
            RicciType::O => "O",
            RicciType::II => "II",
            RicciType::N => "N",
            RicciType::III => "III",
        };
        f.write_str(s)
    }
}

/// Pointwise classification result.
///
/// `candidates` always starts with the reported tag; further entries appear
/// when a decision fell inside its tolerance band. Margins are ratios of
/// decision evidence to threshold, so ≥ 1 reads as comfortable and exact
/// decisions report infinity.
#[derive(Clone, Debug)]
pub struct SegreType {
    pub tag: SegreTag,
    /// Eigenvalues of the trace-free operator as (re, im), sorted.
    pub eigenvalues: [(f64, f64); 3],
    /// Full-operator eigenvalue of the repeated or Jordan block, when one exists.
    pub lambda1: Option<f64>,
    /// λ1 = 0 branch taken (only for tags that split on it).
    pub degenerate: bool,
    pub ricci_type: RicciType,
    pub isotropy_dim: u8,
    pub ricci_scalar: f64,
    /// Every classification decision was made in rational arithmetic.
    pub exact: bool,
    pub candidates: Vec<(SegreTag, f64)>,
}

impl SegreType {
    /// Primary margin ≥ 1 and no rival candidate at unit strength.
    pub fn is_stable(&self) -> bool {
        self.candidates[0].1 >= 1.0 && self.candidates.iter().skip(1).all(|&(_, m)| m < 1.0)
    }
}

/// (Ricci type, isotropy dimension) for a tag, with `lambda1_zero` selecting
/// the branch on the three tags that split.
fn conversion_row(tag: SegreTag, lambda1_zero: bool) -> (RicciType, u8) {
    match (tag, lambda1_zero) {
        (SegreTag::RealDistinct, _) => (RicciType::I, 0),
        (SegreTag::SpacelikeDegenerate, _) => (RicciType::I, 1),
        (SegreTag::TimelikeDegenerate, _) => (RicciType::D, 1),
        (SegreTag::FullyDegenerate, false) => (RicciType::D, 3),
        (SegreTag::FullyDegenerate, true) => (RicciType::O, 3),
        (SegreTag::ComplexPair, _) => (RicciType::I, 0),
        (SegreTag::NullDouble, _) => (RicciType::II, 0),
        (SegreTag::NullDoubleDegenerate, false) => (RicciType::II, 1),
        (SegreTag::NullDoubleDegenerate, true) => (RicciType::N, 1),
        (SegreTag::NullTriple, false) => (RicciType::II, 0),
        (SegreTag::NullTriple, true) => (RicciType::III, 0),
    }
}

fn assemble(
    tag: SegreTag,
    mut eigenvalues: [(f64, f64); 3],
    lambda1: Option<f64>,
    lambda1_zero: bool,
    ricci_scalar: f64,
    exact: bool,
    candidates: Vec<(SegreTag, f64)>,
) -> SegreType {
    eigenvalues.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let branch = lambda1_zero && tag.splits_on_lambda1();
    let (ricci_type, isotropy_dim) = conversion_row(tag, branch);
    SegreType {
        tag,
        eigenvalues,
        lambda1,
        degenerate: branch,
        ricci_type,
        isotropy_dim,
        ricci_scalar,
        exact,
        candidates,
    }
}

/// Classifies the trace-free Ricci operator of `spec` at `p`.
///
/// Decisions run in exact rational arithmetic whenever the metric components
/// evaluate over rationals at the (dyadic) point; metrics that need
/// transcendental functions fall back to the float classifier with `tol`.
pub fn segre_type(spec: &MetricSpec, p: &Point<f64>, tol: f64) -> Result<SegreType> {
    if spec.dim != 3 {
        return Err(CurvError::Invalid(format!(
            "Segre classification needs a 3-dimensional metric, got dimension {}",
            spec.dim
        )));
    }
    check_tol(tol)?;
    let at: Vec<f64> = spec
        .coords
        .iter()
        .map(|c| {
            p.get(c)
                .copied()
                .ok_or_else(|| CurvError::UnboundSymbol { name: c.clone() })
        })
        .collect::<Result<Vec<_>>>()?;

    let exact_coords: Option<Vec<BigRational>> =
        at.iter().map(|x| BigRational::from_float(*x)).collect();
    if let Some(at_q) = exact_coords {
        match operator_at::<BigRational>(spec, &at_q) {
            Ok((s, g, r)) => return classify_operator_exact(&s, &g, &r),
            // metrics with transcendental components cannot evaluate over
            // rationals; everything else (singular metric, poles) is real
            Err(CurvError::Domain { msg, .. }) if msg.contains("unsupported") => {}
            Err(e) => return Err(e),
        }
    }
    let (s, g, r) = operator_at::<f64>(spec, &at)?;
    classify_operator(&s, &g, r, tol)
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(CurvError::Invalid(format!(
            "classification tolerance must lie in (0,1), got {tol}"
        )));
    }
    Ok(())
}

/// Mixed trace-free operator S^a_b, metric g_ab, and Ricci scalar at a point.
fn operator_at<T: Scalar>(spec: &MetricSpec, at: &[T]) -> Result<(Mat3<T>, Mat3<T>, T)> {
    let mut geo = jet_geometry(spec, at, 0)?;
    let r = geo.ricci_scalar()?;
    let s_low = geo.trace_free_ricci()?;
    let s_mix = geo.raise_index(&s_low, 0)?;
    let mut s: Mat3<T> = std::array::from_fn(|_| std::array::from_fn(|_| T::zero()));
    let mut g: Mat3<T> = std::array::from_fn(|_| std::array::from_fn(|_| T::zero()));
    for a in 0..3 {
        for b in 0..3 {
            s[a][b] = s_mix.get(&[a, b]).value().clone();
            g[a][b] = geo.metric().get(&[a, b]).value().clone();
        }
    }
    Ok((s, g, r.value().clone()))
}

type Mat3<T> = [[T; 3]; 3];
type Mat3Q = Mat3<BigRational>;
type Vec3Q = [BigRational; 3];

// ---------------------------------------------------------------------------
// exact route

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn mat_mul_q(a: &Mat3Q, b: &Mat3Q) -> Mat3Q {
    let mut out: Mat3Q = Default::default();
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let mut acc = BigRational::zero();
            for (k, aik) in a[i].iter().enumerate() {
                acc += aik * &b[k][j];
            }
            *cell = acc;
        }
    }
    out
}

fn det3_q(m: &Mat3Q) -> BigRational {
    let mut det = BigRational::zero();
    det += &m[0][0] * (&m[1][1] * &m[2][2] - &m[1][2] * &m[2][1]);
    det -= &m[0][1] * (&m[1][0] * &m[2][2] - &m[1][2] * &m[2][0]);
    det += &m[0][2] * (&m[1][0] * &m[2][1] - &m[1][1] * &m[2][0]);
    det
}

fn rank_q(m: &Mat3Q) -> usize {
    if !det3_q(m).is_zero() {
        return 3;
    }
    for r0 in 0..3 {
        for r1 in (r0 + 1)..3 {
            for c0 in 0..3 {
                for c1 in (c0 + 1)..3 {
                    let minor = &m[r0][c0] * &m[r1][c1] - &m[r0][c1] * &m[r1][c0];
                    if !minor.is_zero() {
                        return 2;
                    }
                }
            }
        }
    }
    if m.iter().flatten().any(|e| !e.is_zero()) {
        return 1;
    }
    0
}

fn sub_scaled_identity_q(m: &Mat3Q, lam: &BigRational) -> Mat3Q {
    let mut out = m.clone();
    for (i, row) in out.iter_mut().enumerate() {
        row[i] -= lam;
    }
    out
}

/// Kernel direction of a rank-2 matrix: the cross product of two independent
/// rows annihilates both, and the third row is dependent.
fn kernel_rank2_q(m: &Mat3Q) -> Result<Vec3Q> {
    for (i, j) in [(0usize, 1usize), (0, 2), (1, 2)] {
        let a = &m[i];
        let b = &m[j];
        let v: Vec3Q = [
            &a[1] * &b[2] - &a[2] * &b[1],
            &a[2] * &b[0] - &a[0] * &b[2],
            &a[0] * &b[1] - &a[1] * &b[0],
        ];
        if v.iter().any(|e| !e.is_zero()) {
            return Ok(v);
        }
    }
    Err(CurvError::Unstable(
        "kernel extraction expected a rank-2 matrix".into(),
    ))
}

fn first_nonzero_col_q(m: &Mat3Q) -> Result<Vec3Q> {
    for j in 0..3 {
        let v: Vec3Q = [m[0][j].clone(), m[1][j].clone(), m[2][j].clone()];
        if v.iter().any(|e| !e.is_zero()) {
            return Ok(v);
        }
    }
    Err(CurvError::Unstable("image extraction of a zero matrix".into()))
}

fn quad_q(g: &Mat3Q, v: &Vec3Q) -> BigRational {
    let mut acc = BigRational::zero();
    for (a, row) in g.iter().enumerate() {
        for (b, gab) in row.iter().enumerate() {
            acc += gab * &v[a] * &v[b];
        }
    }
    acc
}

/// Exact-arithmetic classification of a mixed trace-free operator `s` that is
/// self-adjoint with respect to the nondegenerate metric `g`.
pub fn classify_operator_exact(
    s: &Mat3Q,
    g: &Mat3Q,
    ricci_scalar: &BigRational,
) -> Result<SegreType> {
    let tr = &s[0][0] + &s[1][1] + &s[2][2];
    if !tr.is_zero() {
        return Err(CurvError::Invalid(format!(
            "operator must be trace-free, trace = {tr}"
        )));
    }
    let r_f = ricci_scalar.to_f64().unwrap_or(f64::NAN);
    let third = ricci_scalar * rat(1, 3);
    let third_f = third.to_f64().unwrap_or(f64::NAN);

    if s.iter().flatten().all(|e| e.is_zero()) {
        return Ok(assemble(
            SegreTag::FullyDegenerate,
            [(0.0, 0.0); 3],
            Some(third_f),
            third.is_zero(),
            r_f,
            true,
            vec![(SegreTag::FullyDegenerate, f64::INFINITY)],
        ));
    }

    // characteristic cubic λ³ + pλ + q of the traceless operator
    let s2 = mat_mul_q(s, s);
    let tr2 = &s2[0][0] + &s2[1][1] + &s2[2][2];
    let p = -tr2 * rat(1, 2);
    let q = -det3_q(s);
    let disc = rat(-4, 1) * &p * &p * &p - rat(27, 1) * &q * &q;
    let evals = depressed_cubic_roots(
        p.to_f64().unwrap_or(f64::NAN),
        q.to_f64().unwrap_or(f64::NAN),
    );
    let stable = |tag: SegreTag| vec![(tag, f64::INFINITY)];

    match disc.cmp(&BigRational::zero()) {
        Ordering::Greater => Ok(assemble(
            SegreTag::RealDistinct,
            evals,
            None,
            false,
            r_f,
            true,
            stable(SegreTag::RealDistinct),
        )),
        Ordering::Less => Ok(assemble(
            SegreTag::ComplexPair,
            evals,
            None,
            false,
            r_f,
            true,
            stable(SegreTag::ComplexPair),
        )),
        Ordering::Equal if p.is_zero() => {
            // triple eigenvalue, zero by tracelessness: S is nilpotent
            let tag = match rank_q(s) {
                1 => {
                    let v = first_nonzero_col_q(s)?;
                    expect_null_q(g, &v)?;
                    SegreTag::NullDoubleDegenerate
                }
                2 => {
                    let v = first_nonzero_col_q(&s2)?;
                    expect_null_q(g, &v)?;
                    SegreTag::NullTriple
                }
                other => {
                    return Err(CurvError::Unstable(format!(
                        "nilpotent trace-free operator of rank {other}"
                    )))
                }
            };
            Ok(assemble(
                tag,
                evals,
                Some(third_f),
                third.is_zero(),
                r_f,
                true,
                stable(tag),
            ))
        }
        Ordering::Equal => {
            // double root λd and simple root λs = −2λd, both rational
            let ld = rat(-3, 2) * &q / &p;
            let ls = -&ld - &ld;
            let lambda1 = &ld + &third;
            let l1_f = lambda1.to_f64().unwrap_or(f64::NAN);
            let m = sub_scaled_identity_q(s, &ld);
            let tag = match rank_q(&m) {
                1 => {
                    // semisimple pair; the simple eigenvector decides the plane
                    let u = kernel_rank2_q(&sub_scaled_identity_q(s, &ls))?;
                    let c = quad_q(g, &u);
                    match c.cmp(&BigRational::zero()) {
                        Ordering::Greater => SegreTag::TimelikeDegenerate,
                        Ordering::Less => SegreTag::SpacelikeDegenerate,
                        Ordering::Equal => {
                            return Err(CurvError::Unstable(
                                "simple eigenvector of a semisimple pair is null".into(),
                            ))
                        }
                    }
                }
                2 => {
                    let v = kernel_rank2_q(&m)?;
                    expect_null_q(g, &v)?;
                    SegreTag::NullDouble
                }
                other => {
                    return Err(CurvError::Unstable(format!(
                        "repeated eigenvalue with eigenspace defect {other}"
                    )))
                }
            };
            Ok(assemble(
                tag,
                evals,
                Some(l1_f),
                lambda1.is_zero(),
                r_f,
                true,
                stable(tag),
            ))
        }
    }
}

/// Jordan eigenvectors of a g-self-adjoint operator are null; a failure here
/// means the inputs were not a consistent (operator, metric) pair.
fn expect_null_q(g: &Mat3Q, v: &Vec3Q) -> Result<()> {
    let c = quad_q(g, v);
    if c.is_zero() {
        Ok(())
    } else {
        Err(CurvError::Unstable(format!(
            "Jordan eigenvector has g(v,v) = {c}, expected null"
        )))
    }
}

// ---------------------------------------------------------------------------
// float route

/// Roots of λ³ + pλ + q as (re, im); a complex pair lands in the last two
/// slots. The discriminant is −4p³ − 27q².
fn depressed_cubic_roots(p: f64, q: f64) -> [(f64, f64); 3] {
    let disc = -4.0 * p * p * p - 27.0 * q * q;
    if disc >= 0.0 {
        if p == 0.0 {
            // disc ≥ 0 forces q = 0: triple zero
            return [(0.0, 0.0); 3];
        }
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let phi = arg.acos();
        let root = |k: f64| (m * ((phi - 2.0 * std::f64::consts::PI * k) / 3.0).cos(), 0.0);
        [root(0.0), root(1.0), root(2.0)]
    } else {
        let inner = (q * q / 4.0 + p * p * p / 27.0).sqrt();
        let u = (-q / 2.0 + inner).cbrt();
        let v = (-q / 2.0 - inner).cbrt();
        let im = (3.0f64.sqrt() / 2.0) * (u - v).abs();
        [(u + v, 0.0), (-(u + v) / 2.0, im), (-(u + v) / 2.0, -im)]
    }
}

fn safe_ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

struct Svd3 {
    sv: [f64; 3],
    u: Matrix3<f64>,
    vt: Matrix3<f64>,
}

impl Svd3 {
    fn new(m: &Matrix3<f64>) -> Self {
        let svd = (*m).svd(true, true);
        let u = svd.u.expect("svd with u requested");
        let vt = svd.v_t.expect("svd with v_t requested");
        let mut ord = [0usize, 1, 2];
        ord.sort_by(|&a, &b| {
            svd.singular_values[b]
                .partial_cmp(&svd.singular_values[a])
                .unwrap_or(Ordering::Equal)
        });
        let mut s = Svd3 {
            sv: [0.0; 3],
            u: Matrix3::zeros(),
            vt: Matrix3::zeros(),
        };
        for (k, &i) in ord.iter().enumerate() {
            s.sv[k] = svd.singular_values[i];
            s.u.set_column(k, &u.column(i));
            s.vt.set_row(k, &vt.row(i));
        }
        s
    }

    fn rank(&self, thresh: f64) -> usize {
        self.sv.iter().filter(|&&s| s > thresh).count()
    }

    /// Right-singular direction of the smallest singular value.
    fn kernel_dir(&self) -> Vector3<f64> {
        self.vt.row(2).transpose()
    }

    /// Left-singular direction of the largest singular value.
    fn image_dir(&self) -> Vector3<f64> {
        self.u.column(0).into_owned()
    }
}

/// One regime's verdict: primary tag, its margin, rival readings, and the
/// normalized eigenvalue of the repeated block when there is one.
struct Reading {
    tag: SegreTag,
    margin: f64,
    extras: Vec<(SegreTag, f64)>,
    block_eig: f64,
    has_block: bool,
}

fn quad_f(g: &Matrix3<f64>, v: &Vector3<f64>) -> f64 {
    v.dot(&(g * v))
}

/// Float classification of a mixed trace-free operator against the chart
/// metric; `ricci_scalar` feeds the λ1 branches. `segre_type` extracts the
/// matrices from a metric, this entry point serves callers that already hold
/// them.
pub fn classify_operator(
    s: &Mat3<f64>,
    g: &Mat3<f64>,
    ricci_scalar: f64,
    tol: f64,
) -> Result<SegreType> {
    check_tol(tol)?;
    let s_m = Matrix3::from_fn(|i, j| s[i][j]);
    let g_m = Matrix3::from_fn(|i, j| g[i][j]);
    if g_m.determinant() == 0.0 {
        return Err(CurvError::SingularMetric(
            "chart metric has zero determinant".into(),
        ));
    }
    let s_norm = s_m.norm();
    let tr = s_m.trace();
    if tr.abs() > tol * (s_norm + 1.0) {
        return Err(CurvError::Invalid(format!(
            "operator must be trace-free, trace = {tr:e}"
        )));
    }
    let r = ricci_scalar;
    let full_norm = (s_m + Matrix3::identity() * (r / 3.0)).norm();
    let curv_scale = full_norm.max(1.0);

    if s_norm <= tol * curv_scale {
        let lambda1 = r / 3.0;
        let margin = safe_ratio(tol * curv_scale, s_norm);
        return Ok(assemble(
            SegreTag::FullyDegenerate,
            [(0.0, 0.0); 3],
            Some(lambda1),
            lambda1.abs() <= tol * curv_scale,
            r,
            false,
            vec![(SegreTag::FullyDegenerate, margin)],
        ));
    }

    let sh = s_m / s_norm;
    let p = -(sh * sh).trace() / 2.0;
    let q = -sh.determinant();
    let roots = depressed_cubic_roots(p, q);
    let ct = tol.sqrt();

    let mut cross: Vec<(SegreTag, f64)> = Vec::new();
    let reading = if roots[1].1 != 0.0 {
        let re = roots[1].0;
        let im = roots[1].1.abs();
        if im > ct {
            Reading {
                tag: SegreTag::ComplexPair,
                margin: im / ct,
                extras: Vec::new(),
                block_eig: 0.0,
                has_block: false,
            }
        } else {
            // near-real pair: merge it and classify the repeated block
            cross.push((SegreTag::ComplexPair, im / ct));
            let mut rd = double_merge(&sh, &g_m, re, roots[0].0, safe_ratio(ct, im), tol);
            rd.margin = rd.margin.min(safe_ratio(ct, im));
            rd
        }
    } else {
        let mut rs = [roots[0].0, roots[1].0, roots[2].0];
        rs.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
        let d1 = rs[1] - rs[0];
        let d2 = rs[2] - rs[1];
        let (dmin, dmax) = (d1.min(d2), d1.max(d2));
        if dmax <= ct {
            cross.push((SegreTag::RealDistinct, dmax / ct));
            triple_merge(&sh, &g_m, tol)
        } else if dmin <= ct {
            cross.push((SegreTag::RealDistinct, dmin / ct));
            let (ld, ls) = if d1 <= d2 {
                ((rs[0] + rs[1]) / 2.0, rs[2])
            } else {
                ((rs[1] + rs[2]) / 2.0, rs[0])
            };
            let mut rd = double_merge(&sh, &g_m, ld, ls, safe_ratio(ct, dmin), tol);
            rd.margin = rd.margin.min(dmax / ct);
            rd
        } else {
            Reading {
                tag: SegreTag::RealDistinct,
                margin: dmin / ct,
                extras: Vec::new(),
                block_eig: 0.0,
                has_block: false,
            }
        }
    };

    let lambda1 = reading
        .has_block
        .then(|| reading.block_eig * s_norm + r / 3.0);
    let lambda1_zero = lambda1.map(|l| l.abs() <= tol * curv_scale).unwrap_or(false);
    let evals = roots.map(|(re, im)| (re * s_norm, im * s_norm));

    let mut candidates = vec![(reading.tag, reading.margin)];
    for (t, m) in reading.extras.into_iter().chain(cross) {
        if m < 1e-3 {
            continue;
        }
        match candidates.iter_mut().find(|(ct_, _)| *ct_ == t) {
            Some(entry) => entry.1 = entry.1.max(m),
            None => candidates.push((t, m)),
        }
    }
    candidates[1..].sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal));

    Ok(assemble(
        reading.tag,
        evals,
        lambda1,
        lambda1_zero,
        r,
        false,
        candidates,
    ))
}

/// All three normalized eigenvalues merged: a zero triple. Ranks of Ŝ and Ŝ²
/// separate {(21)} from {3}; the distinguished eigenvector is the image.
fn triple_merge(sh: &Matrix3<f64>, g: &Matrix3<f64>, tol: f64) -> Reading {
    let svd1 = Svd3::new(sh);
    let sq = sh * sh;
    let svd2 = Svd3::new(&sq);
    match svd1.rank(tol) {
        1 => {
            let v = svd1.image_dir();
            let c = quad_f(g, &v).abs();
            let margin = safe_ratio(tol, svd1.sv[1])
                .min(safe_ratio(tol, svd2.sv[0]))
                .min(safe_ratio(tol, c));
            let mut extras = Vec::new();
            let rival = (svd1.sv[1] / tol).min(svd2.sv[0] / tol);
            if rival > 1e-3 {
                extras.push((SegreTag::NullTriple, rival));
            }
            Reading {
                tag: SegreTag::NullDoubleDegenerate,
                margin,
                extras,
                block_eig: 0.0,
                has_block: true,
            }
        }
        2 => {
            let v = svd2.image_dir();
            let c = quad_f(g, &v).abs();
            let margin = (svd1.sv[1] / tol)
                .min(safe_ratio(tol, svd1.sv[2]))
                .min(svd2.sv[0] / tol)
                .min(safe_ratio(tol, svd2.sv[1]))
                .min(safe_ratio(tol, c));
            let mut extras = Vec::new();
            let rival = safe_ratio(tol, svd1.sv[1]).min(safe_ratio(tol, svd2.sv[0]));
            if rival > 1e-3 {
                extras.push((SegreTag::NullDoubleDegenerate, rival));
            }
            Reading {
                tag: SegreTag::NullTriple,
                margin,
                extras,
                block_eig: 0.0,
                has_block: true,
            }
        }
        0 => Reading {
            tag: SegreTag::FullyDegenerate,
            margin: safe_ratio(tol, svd1.sv[0]),
            extras: vec![(SegreTag::NullDoubleDegenerate, svd1.sv[0] / tol)],
            block_eig: 0.0,
            has_block: true,
        },
        _ => Reading {
            // full rank contradicts a zero triple eigenvalue
            tag: SegreTag::NullTriple,
            margin: safe_ratio(tol, svd1.sv[2]),
            extras: vec![(SegreTag::RealDistinct, svd1.sv[2] / tol)],
            block_eig: 0.0,
            has_block: true,
        },
    }
}

/// Two normalized eigenvalues merged at `ld` with a separate simple root
/// `ls`. The eigenspace defect of Ŝ − λd·I separates the semisimple pair
/// tags from the Jordan tag; causal character of the relevant eigenvector
/// finishes the call.
fn double_merge(
    sh: &Matrix3<f64>,
    g: &Matrix3<f64>,
    ld: f64,
    ls: f64,
    merge_evidence: f64,
    tol: f64,
) -> Reading {
    let m = sh - Matrix3::identity() * ld;
    let svm = Svd3::new(&m);
    match svm.rank(tol) {
        1 => {
            let msimple = sh - Matrix3::identity() * ls;
            let u = Svd3::new(&msimple).kernel_dir();
            let c = quad_f(g, &u);
            let base = merge_evidence
                .min(safe_ratio(tol, svm.sv[1]))
                .min(svm.sv[0] / tol);
            let mut extras = Vec::new();
            if safe_ratio(tol, svm.sv[1]) < 4.0 {
                extras.push((SegreTag::NullDouble, svm.sv[1] / tol));
            }
            let (tag, other) = if c >= 0.0 {
                (SegreTag::TimelikeDegenerate, SegreTag::SpacelikeDegenerate)
            } else {
                (SegreTag::SpacelikeDegenerate, SegreTag::TimelikeDegenerate)
            };
            let sign_margin = c.abs() / tol;
            if sign_margin < 4.0 {
                extras.push((other, sign_margin.min(1.0)));
                extras.push((SegreTag::NullDouble, safe_ratio(tol, c.abs()).min(1.0)));
            }
            Reading {
                tag,
                margin: base.min(sign_margin),
                extras,
                block_eig: ld,
                has_block: true,
            }
        }
        2 => {
            let v = svm.kernel_dir();
            let c = quad_f(g, &v).abs();
            let margin = merge_evidence
                .min(svm.sv[1] / tol)
                .min(safe_ratio(tol, svm.sv[2]))
                .min(safe_ratio(tol, c));
            let mut extras = Vec::new();
            if svm.sv[1] / tol < 4.0 || c > tol {
                let u = Svd3::new(&(sh - Matrix3::identity() * ls)).kernel_dir();
                let semisimple = if quad_f(g, &u) >= 0.0 {
                    SegreTag::TimelikeDegenerate
                } else {
                    SegreTag::SpacelikeDegenerate
                };
                extras.push((semisimple, safe_ratio(tol, svm.sv[1]).min(c / tol).min(1.0)));
            }
            Reading {
                tag: SegreTag::NullDouble,
                margin,
                extras,
                block_eig: ld,
                has_block: true,
            }
        }
        0 => {
            // Ŝ ≈ λd·I is impossible for a traceless unit-norm operator
            // unless the cluster was really a triple; reread it as one.
            let mut rd = triple_merge(sh, g, tol);
            rd.margin = rd.margin.min(safe_ratio(tol, ld.abs()));
            rd
        }
        _ => Reading {
            // λd is not an eigenvalue at this tolerance: complex-pair zone
            tag: SegreTag::ComplexPair,
            margin: svm.sv[2] / tol.sqrt(),
            extras: vec![(SegreTag::NullDouble, safe_ratio(tol, svm.sv[2]))],
            block_eig: ld,
            has_block: false,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eta_q() -> Mat3Q {
        let mut g: Mat3Q = Default::default();
        g[0][0] = rat(-1, 1);
        g[1][1] = rat(1, 1);
        g[2][2] = rat(1, 1);
        g
    }

    fn eta_f() -> Mat3<f64> {
        [[-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
    }

    fn diag_q(a: (i64, i64), b: (i64, i64), c: (i64, i64)) -> Mat3Q {
        let mut m: Mat3Q = Default::default();
        m[0][0] = rat(a.0, a.1);
        m[1][1] = rat(b.0, b.1);
        m[2][2] = rat(c.0, c.1);
        m
    }

    fn to_f(m: &Mat3Q) -> Mat3<f64> {
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = m[i][j].to_f64().unwrap();
            }
        }
        out
    }

    /// Jordan 2-block with eigenvalue `a` on the null direction l=(1,1,0),
    /// simple eigenvalue `b` on m=(0,0,1); traceless when 2a + b = 0.
    fn jordan_pair_q(a: i64, b: i64, coupling: (i64, i64)) -> Mat3Q {
        let c = rat(coupling.0, coupling.1);
        let mut m = diag_q((a, 1), (a, 1), (b, 1));
        // l⊗l̃ with l̃ = (−1, 1, 0)
        m[0][0] -= &c;
        m[0][1] += &c;
        m[1][0] -= &c;
        m[1][1] += &c;
        m
    }

    /// Single Jordan 3-block: chain n → −m → −l → 0 over the null l=(1,1,0).
    fn jordan_triple_q() -> Mat3Q {
        let mut m: Mat3Q = Default::default();
        m[0][2] = rat(1, 1);
        m[1][2] = rat(1, 1);
        m[2][0] = rat(-1, 1);
        m[2][1] = rat(1, 1);
        m
    }

    fn nilpotent_pair_q() -> Mat3Q {
        // l⊗l̃: rank one, square zero
        let mut m: Mat3Q = Default::default();
        m[0][0] = rat(-1, 1);
        m[0][1] = rat(1, 1);
        m[1][0] = rat(-1, 1);
        m[1][1] = rat(1, 1);
        m
    }

    fn rotation_pair_q() -> Mat3Q {
        // complex pair ±i mixing the (t,x) Lorentzian plane
        let mut m: Mat3Q = Default::default();
        m[0][1] = rat(1, 1);
        m[1][0] = rat(-1, 1);
        m
    }

    #[test]
    fn cubic_solver_matches_known_roots() {
        // (λ−1)²(λ+2): p = −3, q = 2
        let r = depressed_cubic_roots(-3.0, 2.0);
        let mut re: Vec<f64> = r.iter().map(|x| x.0).collect();
        re.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((re[0] + 2.0).abs() < 1e-12);
        assert!((re[1] - 1.0).abs() < 1e-12);
        assert!((re[2] - 1.0).abs() < 1e-12);
        // λ³ + λ: roots 0, ±i
        let r = depressed_cubic_roots(1.0, 0.0);
        assert!(r[0].0.abs() < 1e-12);
        assert!((r[1].1.abs() - 1.0).abs() < 1e-12);
        // distinct: (λ−1)(λ−2)(λ+3): e2 = −7, e3 = −6 → p = −7, q = 6
        let r = depressed_cubic_roots(-7.0, 6.0);
        let mut re: Vec<f64> = r.iter().map(|x| x.0).collect();
        re.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((re[0] + 3.0).abs() < 1e-12, "{re:?}");
        assert!((re[1] - 1.0).abs() < 1e-12);
        assert!((re[2] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn exact_rows_cover_the_conversion_table() {
        let g = eta_q();
        let zero = BigRational::zero();
        let r32 = rat(3, 2);

        let t = classify_operator_exact(&diag_q((1, 1), (2, 1), (-3, 1)), &g, &zero).unwrap();
        assert_eq!(t.tag, SegreTag::RealDistinct);
        assert_eq!((t.ricci_type, t.isotropy_dim), (RicciType::I, 0));
        assert!(t.lambda1.is_none() && t.exact && t.candidates.len() == 1);

        let t = classify_operator_exact(&diag_q((-2, 1), (1, 1), (1, 1)), &g, &zero).unwrap();
        assert_eq!(t.tag, SegreTag::SpacelikeDegenerate);
        assert_eq!((t.ricci_type, t.isotropy_dim), (RicciType::I, 1));
        assert_eq!(t.lambda1, Some(1.0));

        let t = classify_operator_exact(&diag_q((1, 1), (1, 1), (-2, 1)), &g, &zero).unwrap();
        assert_eq!(t.tag, SegreTag::TimelikeDegenerate);
        assert_eq!((t.ricci_type, t.isotropy_dim), (RicciType::D, 1));

        let zeros: Mat3Q = Default::default();
        let t = classify_operator_exact(&zeros, &g, &zero).unwrap();
        assert_eq!(t.tag, SegreTag::FullyDegenerate);
        assert_eq!((t.ricci_type, t.isotropy_dim), (RicciType::O, 3));
        assert!(t.degenerate);
        let t = classify_operator_exact(&zeros, &g, &rat(-6, 1)).unwrap();
        assert_eq!((t.ricci_type, t.isotropy_dim), (RicciType::D, 3));
        assert_eq!(t.lambda1, Some(-2.0));
        assert!(!t.degenerate);

        let t = classify_operator_exact(&rotation_pair_q(), &g, &zero).unwrap();
        assert_eq!(t.tag, SegreTag::ComplexPair);
        assert_eq!((t.ricci_type, t.isotropy_dim), (RicciType::I, 0));

        let t = classify_operator_exact(&jordan_pair_q(1, -2, (1, 1)), &g, &r32).unwrap();
        assert_eq!(t.tag, SegreTag::NullDouble);
        assert_eq!((t.ricci_type, t.isotropy_dim), (RicciType::II, 0));
        assert_eq!(t.lambda1, Some(1.5));

        let t = classify_operator_exact(&nilpotent_pair_q(), &g, &zero).unwrap();
        assert_eq!(t.tag, SegreTag::NullDoubleDegenerate);
        assert_eq!((t.ricci_type, t.isotropy_dim), (RicciType::N, 1));
        assert!(t.degenerate);
        let t = classify_operator_exact(&nilpotent_pair_q(), &g, &r32).unwrap();
        assert_eq!((t.ricci_type, t.isotropy_dim), (RicciType::II, 1));
        assert!(!t.degenerate);

        let t = classify_operator_exact(&jordan_triple_q(), &g, &zero).unwrap();
        assert_eq!(t.tag, SegreTag::NullTriple);
        assert_eq!((t.ricci_type, t.isotropy_dim), (RicciType::III, 0));
        assert!(t.degenerate);
        let t = classify_operator_exact(&jordan_triple_q(), &g, &r32).unwrap();
        assert_eq!((t.ricci_type, t.isotropy_dim), (RicciType::II, 0));
    }

    #[test]
    fn float_route_agrees_on_every_row() {
        let g = eta_f();
        let tol = 1e-10;
        let rows: Vec<(Mat3Q, f64, SegreTag)> = vec![
            (diag_q((1, 1), (2, 1), (-3, 1)), 0.0, SegreTag::RealDistinct),
            (
                diag_q((-2, 1), (1, 1), (1, 1)),
                0.0,
                SegreTag::SpacelikeDegenerate,
            ),
            (
                diag_q((1, 1), (1, 1), (-2, 1)),
                0.0,
                SegreTag::TimelikeDegenerate,
            ),
            (rotation_pair_q(), 0.0, SegreTag::ComplexPair),
            (jordan_pair_q(1, -2, (1, 1)), 1.5, SegreTag::NullDouble),
            (nilpotent_pair_q(), 0.0, SegreTag::NullDoubleDegenerate),
            (jordan_triple_q(), 0.0, SegreTag::NullTriple),
        ];
        for (m, r, want) in rows {
            let t = classify_operator(&to_f(&m), &g, r, tol).unwrap();
            assert_eq!(t.tag, want, "operator {m:?}");
            assert!(!t.exact);
            let e = classify_operator_exact(&m, &eta_q(), &BigRational::from_float(r).unwrap())
                .unwrap();
            assert_eq!(
                (t.ricci_type, t.isotropy_dim),
                (e.ricci_type, e.isotropy_dim)
            );
        }
        let zeros = [[0.0; 3]; 3];
        let t = classify_operator(&zeros, &g, 0.0, tol).unwrap();
        assert_eq!(t.tag, SegreTag::FullyDegenerate);
        assert_eq!(t.ricci_type, RicciType::O);
    }

    #[test]
    fn trace_precondition_is_enforced() {
        let g = eta_f();
        let m = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert!(matches!(
            classify_operator(&m, &g, 0.0, 1e-10),
            Err(CurvError::Invalid(_))
        ));
        let mq = diag_q((1, 1), (1, 1), (1, 1));
        assert!(matches!(
            classify_operator_exact(&mq, &eta_q(), &BigRational::zero()),
            Err(CurvError::Invalid(_))
        ));
    }

    #[test]
    fn tolerance_sweep_only_coarsens() {
        let g = eta_f();
        let e = 1e-6;
        let m = [
            [1.0 + e, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, -2.0 - e],
        ];
        let mut last = 0u8;
        for k in (2..=14).rev() {
            let tol = 10f64.powi(-k);
            let t = classify_operator(&m, &g, 0.0, tol).unwrap();
            assert!(
                t.tag.coarseness() >= last,
                "tol {tol:e} refined {last} -> {}",
                t.tag.coarseness()
            );
            // the degenerate pair spans the (t,x) Lorentzian plane; the
            // spacelike-pair branch must never appear along the sweep
            assert_ne!(t.tag, SegreTag::SpacelikeDegenerate, "tol {tol:e}");
            last = t.tag.coarseness();
        }
        assert!(last >= 1, "sweep never merged the close pair");
    }

    #[test]
    fn threshold_coupling_reports_rival_candidates() {
        let g = eta_f();
        let tol = 1e-10;
        // Jordan coupling scaled to sit on the rank threshold: the σ of the
        // off-diagonal block matches tol·‖S‖ up to O(1) factors
        let m = jordan_pair_q(1, -2, (1, 8_000_000_000)); // coupling 1.25e-10
        let t = classify_operator(&to_f(&m), &g, 0.0, tol).unwrap();
        let tags: Vec<SegreTag> = t.candidates.iter().map(|&(tag, _)| tag).collect();
        assert!(
            tags.contains(&SegreTag::NullDouble) && tags.contains(&SegreTag::TimelikeDegenerate),
            "candidates {tags:?}"
        );
        // both readings sit inside the evidence band around unit margin
        assert!(t.candidates[0].1 < 4.0, "margins {:?}", t.candidates);
        assert!(t.candidates[1].1 > 0.25, "margins {:?}", t.candidates);
    }

    #[test]
    fn clean_rows_are_stable_with_wide_margins() {
        let g = eta_f();
        for m in [
            diag_q((1, 1), (2, 1), (-3, 1)),
            jordan_pair_q(1, -2, (1, 1)),
            jordan_triple_q(),
        ] {
            let t = classify_operator(&to_f(&m), &g, 0.0, 1e-10).unwrap();
            assert!(t.is_stable(), "{m:?} candidates {:?}", t.candidates);
            assert!(t.candidates[0].1 > 1e3);
        }
    }
}
