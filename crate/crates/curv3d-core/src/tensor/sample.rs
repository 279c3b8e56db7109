//! Randomly perturbed flat metrics, given as exact Taylor data at a point.

use super::{Geometry, Slot, TensorField};
use crate::error::Result;
use crate::jet::{Jet, JetCtx};
use crate::scalar::Scalar;
use num_rational::BigRational;
use rand::RngCore;

/// Coefficient jets of one sample metric. Entries are dyadic rationals, so
/// every backend (floats, exact rationals, the word-size prime field) sees
/// literally the same geometry.
#[derive(Clone, Debug)]
pub struct MetricJetSample {
    pub dim: usize,
    pub order: usize,
    /// row-major symmetric dim×dim; one full coefficient vector per entry
    pub coeffs: Vec<Vec<BigRational>>,
}

fn dyadic(rng: &mut dyn RngCore) -> BigRational {
    // k/64 with k uniform in [-16, 16]
    let k = (rng.next_u64() % 33) as i64 - 16;
    BigRational::new(k.into(), 64.into())
}

impl MetricJetSample {
    /// g_ab = η_ab + (small random polynomial). The degree-zero perturbation
    /// has operator norm at most 3/4, so the signature (-,+,+,...) and
    /// invertibility survive for any draw.
    pub fn random(rng: &mut dyn RngCore, dim: usize, order: usize) -> Self {
        let ctx = JetCtx::get(dim, order);
        let len = ctx.len();
        let zero = BigRational::from_integer(0.into());
        let mut coeffs = vec![vec![zero.clone(); len]; dim * dim];
        for i in 0..dim {
            for j in 0..=i {
                let mut v: Vec<BigRational> = (0..len).map(|_| dyadic(rng)).collect();
                if i == j {
                    let eta = if i == 0 { -1 } else { 1 };
                    v[0] += BigRational::from_integer(eta.into());
                }
                coeffs[i * dim + j] = v.clone();
                coeffs[j * dim + i] = v;
            }
        }
        MetricJetSample { dim, order, coeffs }
    }

    /// Unperturbed flat metric, mostly useful as a degenerate sanity input.
    pub fn flat(dim: usize, order: usize) -> Self {
        let ctx = JetCtx::get(dim, order);
        let len = ctx.len();
        let zero = BigRational::from_integer(0.into());
        let mut coeffs = vec![vec![zero; len]; dim * dim];
        for i in 0..dim {
            let eta = if i == 0 { -1 } else { 1 };
            coeffs[i * dim + i][0] = BigRational::from_integer(eta.into());
        }
        MetricJetSample { dim, order, coeffs }
    }

    pub fn geometry<T: Scalar>(&self) -> Result<Geometry<Jet<T>>> {
        let ctx = JetCtx::get(self.dim, self.order);
        let comps: Vec<Jet<T>> = self
            .coeffs
            .iter()
            .map(|v| Jet::from_coeffs(&ctx, v.iter().map(|c| T::from_rational(c)).collect()))
            .collect();
        let coords: Vec<String> = (0..self.dim).map(|i| format!("x{i}")).collect();
        Geometry::new(coords, comps)
    }

    /// The metric as a bare tensor field of jets, untied to a geometry.
    pub fn metric_field<T: Scalar>(&self) -> TensorField<Jet<T>> {
        let ctx = JetCtx::get(self.dim, self.order);
        let comps: Vec<Jet<T>> = self
            .coeffs
            .iter()
            .map(|v| Jet::from_coeffs(&ctx, v.iter().map(|c| T::from_rational(c)).collect()))
            .collect();
        let mut t = TensorField {
            dim: self.dim,
            slots: vec![Slot::Cov, Slot::Cov],
            comps,
            dorder: 0,
            sym_pairs: vec![(0, 1)],
            antisym_pairs: Vec::new(),
        };
        t.dorder = 0;
        t
    }
}
