//! Component tensors over a coordinate chart, and the curvature pipeline
//! built on them: metric, Christoffel symbols, Riemann/Ricci tensors,
//! covariant derivatives to arbitrary order, index gymnastics.
//!
//! Conventions, fixed once for the whole crate and validated by the
//! rotating-dust acceptance checks:
//!   signature (-,+,+)
//!   Γ^a_bc = ½ g^ad (∂_b g_dc + ∂_c g_db − ∂_d g_bc)
//!   R^a_bcd = ∂_c Γ^a_db − ∂_d Γ^a_cb + Γ^a_ce Γ^e_db − Γ^a_de Γ^e_cb
//!   R_ab = R^c_acb,  S_ab = R_ab − (R/n) g_ab
//!   covariant-derivative slots appended rightmost: T_ab;c;d ↦ slots [a,b,c,d]

mod engine;
mod jetgeom;
mod sample;

pub use engine::{Christoffel, Geometry};
pub use jetgeom::{jet_geometry, jet_geometry_with_order};
pub use sample::MetricJetSample;

use crate::error::{CurvError, Result};
use crate::expr::{parse_expr_strict, Bindings, Expr, Point};
use crate::scalar::Scalar;
use serde::Deserialize;

/// Index character of one tensor slot.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Slot {
    Cov,
    Con,
}

/// Dense multi-index array of components with valence metadata.
///
/// `dorder` counts trailing covariant-derivative slots and is advisory
/// bookkeeping; contraction resets it. Symmetry metadata likewise carries no
/// semantics in the engine, it only drives spot checks in tests.
#[derive(Clone, Debug)]
pub struct TensorField<S> {
    pub dim: usize,
    pub slots: Vec<Slot>,
    pub comps: Vec<S>,
    pub dorder: usize,
    pub sym_pairs: Vec<(usize, usize)>,
    pub antisym_pairs: Vec<(usize, usize)>,
}

impl<S: Scalar> TensorField<S> {
    pub fn zeros(dim: usize, slots: Vec<Slot>) -> Self {
        let len = dim.pow(slots.len() as u32);
        TensorField {
            dim,
            slots,
            comps: vec![S::zero(); len],
            dorder: 0,
            sym_pairs: Vec::new(),
            antisym_pairs: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.slots.len()
    }

    pub fn flat(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank());
        let mut f = 0;
        for &i in idx {
            debug_assert!(i < self.dim);
            f = f * self.dim + i;
        }
        f
    }

    pub fn get(&self, idx: &[usize]) -> &S {
        &self.comps[self.flat(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: S) {
        let f = self.flat(idx);
        self.comps[f] = v;
    }

    /// All multi-indices of this tensor's rank, odometer order.
    pub fn indices(&self) -> MultiIndexIter {
        MultiIndexIter::new(self.dim, self.rank())
    }
}

pub struct MultiIndexIter {
    dim: usize,
    cur: Vec<usize>,
    done: bool,
}

impl MultiIndexIter {
    pub fn new(dim: usize, rank: usize) -> Self {
        MultiIndexIter {
            dim,
            cur: vec![0; rank],
            done: dim == 0,
        }
    }
}

impl Iterator for MultiIndexIter {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.cur.clone();
        let mut k = self.cur.len();
        loop {
            if k == 0 {
                self.done = true;
                break;
            }
            k -= 1;
            self.cur[k] += 1;
            if self.cur[k] < self.dim {
                break;
            }
            self.cur[k] = 0;
        }
        Some(out)
    }
}

/// A Lorentzian metric on a named chart: symmetric matrix of expressions
/// plus the declared signature. Function symbols used by the components
/// (like H(r), D(r)) live in `bindings`.
#[derive(Clone, Debug)]
pub struct MetricSpec {
    pub dim: usize,
    pub coords: Vec<String>,
    /// one sign per eigenvalue, e.g. [-1, 1, 1]
    pub signature: Vec<i8>,
    /// dense n×n, structurally symmetric
    pub g: Vec<Expr>,
    pub bindings: Bindings,
}

#[derive(Deserialize)]
struct RawMetric {
    dimension: Option<usize>,
    coordinates: Vec<String>,
    signature: Option<String>,
    components: std::collections::BTreeMap<String, String>,
    #[serde(default)]
    functions: std::collections::BTreeMap<String, RawFunc>,
}

#[derive(Deserialize)]
struct RawFunc {
    params: Vec<String>,
    body: String,
}

impl MetricSpec {
    pub fn new(coords: Vec<String>, entries: &[(usize, usize, Expr)]) -> Result<Self> {
        let dim = coords.len();
        let mut g = vec![Expr::int(0); dim * dim];
        for (i, j, e) in entries {
            g[i * dim + j] = e.clone();
            g[j * dim + i] = e.clone();
        }
        let mut signature = vec![1i8; dim];
        if dim >= 1 {
            signature[0] = -1;
        }
        Ok(MetricSpec {
            dim,
            coords,
            signature,
            g,
            bindings: Bindings::new(),
        })
    }

    pub fn with_bindings(mut self, bindings: Bindings) -> Self {
        self.bindings = bindings;
        self
    }

    pub fn component(&self, i: usize, j: usize) -> &Expr {
        &self.g[i * self.dim + j]
    }

    /// Parse the JSON metric-definition format. Off-diagonal entries default
    /// to zero; symmetric entries may be given once; giving both with
    /// different expressions is an error.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawMetric = serde_json::from_str(text)
            .map_err(|e| CurvError::Invalid(format!("metric JSON: {e}")))?;
        let coords = raw.coordinates;
        if coords.is_empty() {
            return Err(CurvError::Invalid("metric needs at least one coordinate".into()));
        }
        let dim = coords.len();
        if let Some(d) = raw.dimension {
            if d != dim {
                return Err(CurvError::Invalid(format!(
                    "dimension {d} disagrees with {} coordinates",
                    dim
                )));
            }
        }
        let signature = match raw.signature.as_deref() {
            None => {
                let mut s = vec![1i8; dim];
                s[0] = -1;
                s
            }
            Some(text) => {
                let s: Vec<i8> = text
                    .chars()
                    .map(|c| match c {
                        '-' => Ok(-1),
                        '+' => Ok(1),
                        other => Err(CurvError::Invalid(format!(
                            "signature char `{other}` (use + and -)"
                        ))),
                    })
                    .collect::<Result<_>>()?;
                if s.len() != dim {
                    return Err(CurvError::Invalid(format!(
                        "signature `{text}` has {} slots for dimension {dim}",
                        s.len()
                    )));
                }
                s
            }
        };

        let allowed: Vec<&str> = coords.iter().map(|s| s.as_str()).collect();
        let mut g: Vec<Option<Expr>> = vec![None; dim * dim];
        for (key, text) in &raw.components {
            let (i, j) = split_component_key(key, &coords)?;
            let e = parse_expr_strict(text, &allowed)?;
            for (a, b) in [(i, j), (j, i)] {
                match &g[a * dim + b] {
                    None => g[a * dim + b] = Some(e.clone()),
                    Some(prev) if *prev == e => {}
                    Some(prev) => {
                        return Err(CurvError::Invalid(format!(
                            "conflicting entries for g[{a}][{b}]: `{prev}` vs `{e}`"
                        )))
                    }
                }
            }
        }
        let g = g
            .into_iter()
            .map(|e| e.unwrap_or_else(|| Expr::int(0)))
            .collect();

        let mut bindings = Bindings::new();
        for (name, f) in raw.functions {
            let params: Vec<&str> = f.params.iter().map(|s| s.as_str()).collect();
            let body = parse_expr_strict(&f.body, &params)?;
            bindings = bindings.bind(name, &params, body);
        }

        Ok(MetricSpec {
            dim,
            coords,
            signature,
            g,
            bindings,
        })
    }

    /// Numeric sanity check at a point: nondegeneracy plus eigenvalue sign
    /// count against the declared signature.
    pub fn check_signature_at(&self, point: &Point<f64>) -> Result<()> {
        let n = self.dim;
        let mut m = nalgebra::DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = crate::expr::evaluate_f64(self.component(i, j), point, &self.bindings)?;
            }
        }
        let scale = m.iter().map(|v| v.abs()).fold(0.0f64, f64::max).max(1.0);
        let eig = nalgebra::SymmetricEigen::new(m);
        let mut neg = 0usize;
        let mut pos = 0usize;
        for &ev in eig.eigenvalues.iter() {
            if ev.abs() < 1e-10 * scale {
                return Err(CurvError::SingularMetric(format!(
                    "eigenvalue {ev:.3e} at the requested point"
                )));
            }
            if ev < 0.0 {
                neg += 1;
            } else {
                pos += 1;
            }
        }
        let want_neg = self.signature.iter().filter(|&&s| s < 0).count();
        if neg != want_neg || pos != self.dim - want_neg {
            return Err(CurvError::Invalid(format!(
                "metric has signature ({neg} negative, {pos} positive) at the point, declared {:?}",
                self.signature
            )));
        }
        Ok(())
    }

    /// Symbolic geometry over this metric.
    pub fn geometry(&self) -> Result<Geometry<Expr>> {
        Geometry::new(self.coords.clone(), self.g.clone())
    }
}

/// Splits `g_tt` / `g_tphi` / `g_t_phi` into the two coordinate indices.
/// Coordinate names are matched greedily with backtracking, so multi-letter
/// names work without separators whenever the split is unambiguous.
fn split_component_key(key: &str, coords: &[String]) -> Result<(usize, usize)> {
    let body = key
        .strip_prefix("g_")
        .ok_or_else(|| CurvError::Invalid(format!("component key `{key}` must start with g_")))?;
    let mut matches = Vec::new();
    for (i, a) in coords.iter().enumerate() {
        for (j, b) in coords.iter().enumerate() {
            if body == format!("{a}{b}") || body == format!("{a}_{b}") {
                matches.push((i, j));
            }
        }
    }
    matches.sort();
    matches.dedup();
    match matches.len() {
        0 => Err(CurvError::Invalid(format!(
            "component key `{key}` does not name two chart coordinates"
        ))),
        1 => Ok(matches[0]),
        _ => {
            // g_tt style keys can match (t,t) twice only when distinct pairs
            // collide, e.g. coords "a", "ab", "b" with key g_aab
            Err(CurvError::Invalid(format!(
                "component key `{key}` is ambiguous; separate the names with `_`"
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_and_defaults() {
        let spec = MetricSpec::from_json(
            r#"{
                "coordinates": ["t", "r", "phi"],
                "signature": "-++",
                "components": {
                    "g_tt": "-1",
                    "g_tphi": "-H(r)",
                    "g_phiphi": "D(r)^2 - H(r)^2",
                    "g_rr": "1"
                },
                "functions": {
                    "H": {"params": ["r"], "body": "r^2"},
                    "D": {"params": ["r"], "body": "r"}
                }
            }"#,
        )
        .unwrap();
        assert_eq!(spec.dim, 3);
        assert_eq!(spec.component(0, 0), &Expr::int(-1));
        // symmetric fill
        assert_eq!(spec.component(2, 0), spec.component(0, 2));
        // omitted off-diagonals are zero
        assert!(spec.component(1, 2).is_zero());
    }

    #[test]
    fn component_keys_with_multiletter_names() {
        assert_eq!(
            split_component_key("g_tphi", &["t".into(), "r".into(), "phi".into()]).unwrap(),
            (0, 2)
        );
        assert_eq!(
            split_component_key("g_phi_phi", &["t".into(), "phi".into()]).unwrap(),
            (1, 1)
        );
        assert!(split_component_key("g_xy", &["t".into(), "r".into()]).is_err());
        assert!(split_component_key("h_tt", &["t".into()]).is_err());
    }

    #[test]
    fn unknown_symbols_rejected() {
        let err = MetricSpec::from_json(
            r#"{"coordinates": ["t"], "components": {"g_tt": "-z"}}"#,
        );
        assert!(err.is_err());
    }

    #[test]
    fn conflicting_symmetric_entries_rejected() {
        let err = MetricSpec::from_json(
            r#"{"coordinates": ["t", "x"], "components": {"g_tx": "1", "g_xt": "2"}}"#,
        );
        assert!(err.is_err());
    }

    #[test]
    fn signature_counting() {
        let spec = MetricSpec::from_json(
            r#"{"coordinates": ["t", "x"], "signature": "-+",
                "components": {"g_tt": "-1", "g_xx": "t"}}"#,
        )
        .unwrap();
        let good = Point::new().set("t", 1.0);
        assert!(spec.check_signature_at(&good).is_ok());
        let wrong = Point::new().set("t", -1.0);
        assert!(spec.check_signature_at(&wrong).is_err());
        let singular = Point::new().set("t", 0.0);
        assert!(matches!(
            spec.check_signature_at(&singular),
            Err(CurvError::SingularMetric(_))
        ));
    }

    #[test]
    fn multi_index_iteration() {
        let idx: Vec<_> = MultiIndexIter::new(2, 3).collect();
        assert_eq!(idx.len(), 8);
        assert_eq!(idx[0], vec![0, 0, 0]);
        assert_eq!(idx[7], vec![1, 1, 1]);
    }
}
