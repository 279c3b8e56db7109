//! The curvature pipeline, generic over any differentiable scalar backend.
//!
//! Instantiated with `Expr` it produces symbolic component tensors; with
//! `Jet<T>` it produces Taylor data of everything at a point. Results are
//! cached on first computation, so repeated queries share work.

use super::{MultiIndexIter, Slot, TensorField};
use crate::error::{CurvError, Result};
use crate::scalar::{DiffScalar, Scalar, ScalarError};
use std::sync::Arc;

/// Levi-Civita connection coefficients Γ^a_bc, symmetric in bc.
#[derive(Clone, Debug)]
pub struct Christoffel<S> {
    pub dim: usize,
    comps: Vec<S>,
}

impl<S: Scalar> Christoffel<S> {
    pub fn get(&self, a: usize, b: usize, c: usize) -> &S {
        &self.comps[(a * self.dim + b) * self.dim + c]
    }

    fn set(&mut self, a: usize, b: usize, c: usize, v: S) {
        self.comps[(a * self.dim + b) * self.dim + c] = v;
    }
}

pub struct Geometry<S: DiffScalar> {
    dim: usize,
    coords: Arc<Vec<String>>,
    g: TensorField<S>,
    det: Option<S>,
    ginv: Option<TensorField<S>>,
    gamma: Option<Arc<Christoffel<S>>>,
    dgamma: Option<Vec<S>>,
    riemann_up: Option<TensorField<S>>,
    riemann_low: Option<TensorField<S>>,
    /// chain [d] = ∇^d Ric with 2+d slots
    ricci_chain: Vec<TensorField<S>>,
    rscalar: Option<S>,
}

fn div_metric<S: Scalar>(num: &S, den: &S) -> Result<S> {
    num.div(den).map_err(|e| match e {
        ScalarError::DivisionByZero => {
            CurvError::SingularMetric("zero determinant at evaluation point".into())
        }
        other => CurvError::Invalid(other.to_string()),
    })
}

impl<S: DiffScalar> Geometry<S> {
    pub fn new(coords: Vec<String>, g_comps: Vec<S>) -> Result<Self> {
        let dim = coords.len();
        if g_comps.len() != dim * dim {
            return Err(CurvError::Invalid(format!(
                "metric needs {} components, got {}",
                dim * dim,
                g_comps.len()
            )));
        }
        for i in 0..dim {
            for j in 0..i {
                if g_comps[i * dim + j] != g_comps[j * dim + i] {
                    return Err(CurvError::Invalid(format!(
                        "metric components not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        let mut g = TensorField {
            dim,
            slots: vec![Slot::Cov, Slot::Cov],
            comps: g_comps,
            dorder: 0,
            sym_pairs: vec![(0, 1)],
            antisym_pairs: Vec::new(),
        };
        g.dorder = 0;
        Ok(Geometry {
            dim,
            coords: Arc::new(coords),
            g,
            det: None,
            ginv: None,
            gamma: None,
            dgamma: None,
            riemann_up: None,
            riemann_low: None,
            ricci_chain: Vec::new(),
            rscalar: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn metric(&self) -> &TensorField<S> {
        &self.g
    }

    fn partial(&self, v: &S, i: usize) -> Result<S> {
        v.partial_dir(&self.coords, i)
    }

    fn det_of(&self, m: &[S], n: usize) -> S {
        // Laplace expansion along the first row; fine for n ≤ 5
        if n == 1 {
            return m[0].clone();
        }
        let mut acc = S::zero();
        for j in 0..n {
            if m[j].is_zero() {
                continue;
            }
            let mut minor = Vec::with_capacity((n - 1) * (n - 1));
            for r in 1..n {
                for c in 0..n {
                    if c != j {
                        minor.push(m[r * n + c].clone());
                    }
                }
            }
            let term = m[j].mul(&self.det_of(&minor, n - 1));
            acc = if j % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
        }
        acc
    }

    pub fn det(&mut self) -> Result<S> {
        if self.det.is_none() {
            self.det = Some(self.det_of(&self.g.comps, self.dim));
        }
        Ok(self.det.clone().unwrap())
    }

    pub fn metric_inverse(&mut self) -> Result<&TensorField<S>> {
        if self.ginv.is_none() {
            let n = self.dim;
            let det = self.det()?;
            if det.is_zero() {
                return Err(CurvError::SingularMetric(
                    "metric determinant is identically zero".into(),
                ));
            }
            let mut inv = TensorField::zeros(n, vec![Slot::Con, Slot::Con]);
            for i in 0..n {
                for j in 0..n {
                    // adjugate entry: (-1)^{i+j} times the (j,i) minor
                    let mut minor = Vec::with_capacity((n - 1) * (n - 1));
                    for r in 0..n {
                        if r == j {
                            continue;
                        }
                        for c in 0..n {
                            if c == i {
                                continue;
                            }
                            minor.push(self.g.comps[r * n + c].clone());
                        }
                    }
                    let mut cof = if n == 1 {
                        S::one()
                    } else {
                        self.det_of(&minor, n - 1)
                    };
                    if (i + j) % 2 == 1 {
                        cof = Scalar::neg(&cof);
                    }
                    inv.set(&[i, j], div_metric(&cof, &det)?);
                }
            }
            inv.sym_pairs = vec![(0, 1)];
            self.ginv = Some(inv);
        }
        Ok(self.ginv.as_ref().unwrap())
    }

    pub fn christoffel(&mut self) -> Result<Arc<Christoffel<S>>> {
        if self.gamma.is_none() {
            let n = self.dim;
            self.metric_inverse()?;
            // dg[b][d][c] = ∂_b g_dc
            let mut dg = vec![S::zero(); n * n * n];
            for b in 0..n {
                for d in 0..n {
                    for c in 0..n {
                        dg[(b * n + d) * n + c] = self.partial(self.g.get(&[d, c]), b)?;
                    }
                }
            }
            let ginv = self.ginv.as_ref().unwrap();
            let half = S::from_rational(&num_rational::BigRational::new(1.into(), 2.into()));
            let mut gamma = Christoffel {
                dim: n,
                comps: vec![S::zero(); n * n * n],
            };
            for a in 0..n {
                for b in 0..n {
                    for c in 0..=b {
                        let mut acc = S::zero();
                        for d in 0..n {
                            let gad = ginv.get(&[a, d]);
                            if gad.is_zero() {
                                continue;
                            }
                            let sum = dg[(b * n + d) * n + c]
                                .add(&dg[(c * n + d) * n + b])
                                .sub(&dg[(d * n + b) * n + c]);
                            acc = acc.add(&gad.mul(&sum));
                        }
                        let v = half.mul(&acc);
                        gamma.set(a, b, c, v.clone());
                        gamma.set(a, c, b, v);
                    }
                }
            }
            self.gamma = Some(Arc::new(gamma));
        }
        Ok(self.gamma.clone().unwrap())
    }

    /// dΓ[c][a][d][b] = ∂_c Γ^a_db, cached flat
    fn dgamma(&mut self) -> Result<&[S]> {
        if self.dgamma.is_none() {
            let n = self.dim;
            let gamma = self.christoffel()?;
            let mut out = vec![S::zero(); n * n * n * n];
            for c in 0..n {
                for a in 0..n {
                    for d in 0..n {
                        for b in 0..=d {
                            let v = self.partial(gamma.get(a, d, b), c)?;
                            out[((c * n + a) * n + d) * n + b] = v.clone();
                            out[((c * n + a) * n + b) * n + d] = v;
                        }
                    }
                }
            }
            self.dgamma = Some(out);
        }
        Ok(self.dgamma.as_ref().unwrap())
    }

    /// R^a_bcd
    pub fn riemann(&mut self) -> Result<&TensorField<S>> {
        if self.riemann_up.is_none() {
            let n = self.dim;
            let gamma = self.christoffel()?;
            self.dgamma()?;
            let dgamma = self.dgamma.as_ref().unwrap();
            let dg = |c: usize, a: usize, d: usize, b: usize| -> &S {
                &dgamma[((c * n + a) * n + d) * n + b]
            };
            let mut r = TensorField::zeros(n, vec![Slot::Con, Slot::Cov, Slot::Cov, Slot::Cov]);
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        for d in 0..c {
                            // antisymmetric in cd: compute upper triangle
                            let mut acc = dg(c, a, d, b).sub(dg(d, a, c, b));
                            for e in 0..n {
                                let t1 = gamma.get(a, c, e).mul(gamma.get(e, d, b));
                                let t2 = gamma.get(a, d, e).mul(gamma.get(e, c, b));
                                acc = acc.add(&t1).sub(&t2);
                            }
                            r.set(&[a, b, c, d], acc.clone());
                            r.set(&[a, b, d, c], Scalar::neg(&acc));
                        }
                    }
                }
            }
            r.antisym_pairs = vec![(2, 3)];
            self.riemann_up = Some(r);
        }
        Ok(self.riemann_up.as_ref().unwrap())
    }

    /// R_abcd
    pub fn riemann_lower(&mut self) -> Result<&TensorField<S>> {
        if self.riemann_low.is_none() {
            self.riemann()?;
            let up = self.riemann_up.clone().unwrap();
            let mut low = self.lower_index(&up, 0)?;
            low.sym_pairs = vec![];
            low.antisym_pairs = vec![(0, 1), (2, 3)];
            self.riemann_low = Some(low);
        }
        Ok(self.riemann_low.as_ref().unwrap())
    }

    /// R_ab computed directly from the connection (no rank-4 intermediate);
    /// equality with the contracted Riemann tensor is an oracle test.
    pub fn ricci(&mut self) -> Result<&TensorField<S>> {
        self.ensure_ricci()?;
        Ok(&self.ricci_chain[0])
    }

    fn ensure_ricci(&mut self) -> Result<()> {
        if self.ricci_chain.is_empty() {
            let n = self.dim;
            let gamma = self.christoffel()?;
            self.dgamma()?;
            let dgamma = self.dgamma.as_ref().unwrap();
            let dg = |c: usize, a: usize, d: usize, b: usize| -> &S {
                &dgamma[((c * n + a) * n + d) * n + b]
            };
            let mut ric = TensorField::zeros(n, vec![Slot::Cov, Slot::Cov]);
            for a in 0..n {
                for b in 0..=a {
                    // R_ab = ∂_c Γ^c_ba − ∂_b Γ^c_ca + Γ^c_ce Γ^e_ba − Γ^c_be Γ^e_ca
                    let mut acc = S::zero();
                    for c in 0..n {
                        acc = acc.add(dg(c, c, b, a)).sub(dg(b, c, c, a));
                        for e in 0..n {
                            acc = acc
                                .add(&gamma.get(c, c, e).mul(gamma.get(e, b, a)))
                                .sub(&gamma.get(c, b, e).mul(gamma.get(e, c, a)));
                        }
                    }
                    ric.set(&[a, b], acc.clone());
                    ric.set(&[b, a], acc);
                }
            }
            ric.sym_pairs = vec![(0, 1)];
            self.ricci_chain.push(ric);
        }
        Ok(())
    }

    pub fn ricci_scalar(&mut self) -> Result<S> {
        if self.rscalar.is_none() {
            self.ensure_ricci()?;
            self.metric_inverse()?;
            let ric = &self.ricci_chain[0];
            let ginv = self.ginv.as_ref().unwrap();
            let mut acc = S::zero();
            for a in 0..self.dim {
                for b in 0..self.dim {
                    acc = acc.add(&ginv.get(&[a, b]).mul(ric.get(&[a, b])));
                }
            }
            self.rscalar = Some(acc);
        }
        Ok(self.rscalar.clone().unwrap())
    }

    /// S_ab = R_ab − (R/n) g_ab
    pub fn trace_free_ricci(&mut self) -> Result<TensorField<S>> {
        let r = self.ricci_scalar()?;
        self.ensure_ricci()?;
        let frac = S::from_rational(&num_rational::BigRational::new(
            1.into(),
            (self.dim as i64).into(),
        ));
        let scale = r.mul(&frac);
        let mut s = self.ricci_chain[0].clone();
        for idx in s.indices() {
            let v = s.get(&idx).sub(&scale.mul(self.g.get(&idx)));
            s.set(&idx, v);
        }
        s.sym_pairs = vec![(0, 1)];
        Ok(s)
    }

    /// ∇^d applied to the Ricci tensor, with results cached per order.
    pub fn nabla_ricci(&mut self, d: usize) -> Result<&TensorField<S>> {
        self.ensure_ricci()?;
        while self.ricci_chain.len() <= d {
            let last = self.ricci_chain.last().unwrap().clone();
            let next = self.covariant_derivative(&last)?;
            self.ricci_chain.push(next);
        }
        Ok(&self.ricci_chain[d])
    }

    /// Appends one covariant slot rightmost: (∇T)_{...c} = ∇_c T_{...}
    pub fn covariant_derivative(&mut self, t: &TensorField<S>) -> Result<TensorField<S>> {
        let n = self.dim;
        let gamma = self.christoffel()?;
        let rank = t.rank();
        let mut slots = t.slots.clone();
        slots.push(Slot::Cov);
        let mut out = TensorField::zeros(n, slots);
        out.dorder = t.dorder + 1;
        out.sym_pairs = t.sym_pairs.clone();
        out.antisym_pairs = t.antisym_pairs.clone();
        let mut idx_in = vec![0usize; rank];
        for idx in MultiIndexIter::new(n, rank + 1) {
            let c = idx[rank];
            idx_in.copy_from_slice(&idx[..rank]);
            let mut acc = self.partial(t.get(&idx_in), c)?;
            for (k, slot) in t.slots.iter().enumerate() {
                let orig = idx_in[k];
                for e in 0..n {
                    idx_in[k] = e;
                    let tv = t.get(&idx_in);
                    if tv.is_zero() {
                        continue;
                    }
                    match slot {
                        Slot::Cov => {
                            let gam = gamma.get(e, c, orig);
                            if !gam.is_zero() {
                                acc = acc.sub(&gam.mul(tv));
                            }
                        }
                        Slot::Con => {
                            let gam = gamma.get(orig, c, e);
                            if !gam.is_zero() {
                                acc = acc.add(&gam.mul(tv));
                            }
                        }
                    }
                }
                idx_in[k] = orig;
            }
            out.set(&idx, acc);
        }
        Ok(out)
    }

    pub fn raise_index(&mut self, t: &TensorField<S>, slot: usize) -> Result<TensorField<S>> {
        if slot >= t.rank() {
            return Err(CurvError::Invalid(format!("slot {slot} out of range")));
        }
        if t.slots[slot] == Slot::Con {
            return Err(CurvError::Invalid(format!("slot {slot} is already contravariant")));
        }
        self.metric_inverse()?;
        let ginv = self.ginv.clone().unwrap();
        let mut out = self.apply_metric(t, slot, &ginv);
        out.slots[slot] = Slot::Con;
        Ok(out)
    }

    pub fn lower_index(&mut self, t: &TensorField<S>, slot: usize) -> Result<TensorField<S>> {
        if slot >= t.rank() {
            return Err(CurvError::Invalid(format!("slot {slot} out of range")));
        }
        if t.slots[slot] == Slot::Cov {
            return Err(CurvError::Invalid(format!("slot {slot} is already covariant")));
        }
        let g = self.g.clone();
        let mut out = self.apply_metric(t, slot, &g);
        out.slots[slot] = Slot::Cov;
        Ok(out)
    }

    fn apply_metric(&self, t: &TensorField<S>, slot: usize, m: &TensorField<S>) -> TensorField<S> {
        let n = self.dim;
        let mut out = t.clone();
        let mut idx_in = vec![0usize; t.rank()];
        for idx in MultiIndexIter::new(n, t.rank()) {
            idx_in.copy_from_slice(&idx);
            let a = idx[slot];
            let mut acc = S::zero();
            for b in 0..n {
                let mab = m.get(&[a, b]);
                if mab.is_zero() {
                    continue;
                }
                idx_in[slot] = b;
                let tv = t.get(&idx_in);
                if !tv.is_zero() {
                    acc = acc.add(&mab.mul(tv));
                }
            }
            out.set(&idx, acc);
        }
        out.sym_pairs = Vec::new();
        out.antisym_pairs = Vec::new();
        out
    }

    /// Contract two slots. Opposite-valence slots trace directly; same
    /// valence silently inserts the (inverse) metric, keeping contraction
    /// specifications positional.
    pub fn contract(&mut self, t: &TensorField<S>, si: usize, sj: usize) -> Result<TensorField<S>> {
        if si == sj || si >= t.rank() || sj >= t.rank() {
            return Err(CurvError::Invalid(format!(
                "bad contraction slots ({si},{sj}) for rank {}",
                t.rank()
            )));
        }
        let (si, sj) = if si < sj { (si, sj) } else { (sj, si) };
        let n = self.dim;
        let weights: Option<TensorField<S>> = match (t.slots[si], t.slots[sj]) {
            (Slot::Cov, Slot::Con) | (Slot::Con, Slot::Cov) => None,
            (Slot::Cov, Slot::Cov) => {
                self.metric_inverse()?;
                Some(self.ginv.clone().unwrap())
            }
            (Slot::Con, Slot::Con) => Some(self.g.clone()),
        };
        let out_slots: Vec<Slot> = t
            .slots
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != si && *k != sj)
            .map(|(_, s)| *s)
            .collect();
        let mut out = TensorField::zeros(n, out_slots);
        let rank = t.rank();
        let mut idx_full = vec![0usize; rank];
        for idx_out in MultiIndexIter::new(n, rank - 2) {
            let mut pos = 0;
            for k in 0..rank {
                if k != si && k != sj {
                    idx_full[k] = idx_out[pos];
                    pos += 1;
                }
            }
            let mut acc = S::zero();
            for a in 0..n {
                for b in 0..n {
                    let w = match &weights {
                        None => {
                            if a != b {
                                continue;
                            }
                            None
                        }
                        Some(m) => {
                            let w = m.get(&[a, b]);
                            if w.is_zero() {
                                continue;
                            }
                            Some(w)
                        }
                    };
                    idx_full[si] = a;
                    idx_full[sj] = b;
                    let tv = t.get(&idx_full);
                    if tv.is_zero() {
                        continue;
                    }
                    acc = match w {
                        None => acc.add(tv),
                        Some(w) => acc.add(&w.mul(tv)),
                    };
                }
            }
            out.set(&idx_out, acc);
        }
        Ok(out)
    }

    /// The 3D reconstruction of the Riemann tensor from Ricci data; the Weyl
    /// tensor vanishes in three dimensions so this is exact.
    pub fn riemann_from_ricci(&mut self) -> Result<TensorField<S>> {
        if self.dim != 3 {
            return Err(CurvError::Invalid(format!(
                "riemann_from_ricci needs dimension 3, got {}",
                self.dim
            )));
        }
        self.ensure_ricci()?;
        let r = self.ricci_scalar()?;
        let ric = self.ricci_chain[0].clone();
        let g = self.g.clone();
        let half_r = r.mul(&S::from_rational(&num_rational::BigRational::new(
            1.into(),
            2.into(),
        )));
        let mut out = TensorField::zeros(3, vec![Slot::Cov; 4]);
        for idx in MultiIndexIter::new(3, 4) {
            let (a, b, c, d) = (idx[0], idx[1], idx[2], idx[3]);
            let mut acc = g.get(&[a, c]).mul(ric.get(&[b, d]));
            acc = acc.add(&g.get(&[b, d]).mul(ric.get(&[a, c])));
            acc = acc.sub(&g.get(&[a, d]).mul(ric.get(&[b, c])));
            acc = acc.sub(&g.get(&[b, c]).mul(ric.get(&[a, d])));
            let gg = g.get(&[a, c]).mul(g.get(&[b, d])).sub(&g.get(&[a, d]).mul(g.get(&[b, c])));
            acc = acc.sub(&half_r.mul(&gg));
            out.set(&idx, acc);
        }
        out.antisym_pairs = vec![(0, 1), (2, 3)];
        Ok(out)
    }
}
