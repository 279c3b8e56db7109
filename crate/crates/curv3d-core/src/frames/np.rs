//! First-order scalar invariants evaluated from frame data.
//!
//! The four polynomials come from `calibration`, where they are proved equal
//! to the frame expansion of the tensor expressions they stand for:
//!
//! - `[0]` nabla_a R nabla^a R
//! - `[1]` (1/4) nabla_c S_ab nabla^c S^ab
//! - `[2]` (1/2) nabla_c S_ab nabla^b S^ac
//! - `[3]` nabla_a S^a_b nabla^b R
//!
//! with S the trace-free Ricci tensor. They are only valid in a canonical
//! frame (Psi1 = Psi3 = 0, Psi0 = Psi4), which `np_invariant_values` checks
//! before evaluating.

use std::sync::OnceLock;

use super::calibration::{self, Poly};
use crate::error::{CurvError, Result};

/// Numeric frame scalar bundle at one point: curvature scalars, their
/// D/Del/delta derivatives, and the nine rotation coefficients.
#[derive(Clone, Copy, Debug)]
pub struct FrameScalarValues {
    pub psi0: f64,
    pub psi1: f64,
    pub psi2: f64,
    pub psi3: f64,
    pub psi4: f64,
    pub r: f64,
    pub d_psi0: f64,
    pub del_psi0: f64,
    pub dlt_psi0: f64,
    pub d_psi2: f64,
    pub del_psi2: f64,
    pub dlt_psi2: f64,
    pub d_r: f64,
    pub del_r: f64,
    pub dlt_r: f64,
    pub alpha: f64,
    pub epsilon: f64,
    pub gamma: f64,
    pub kappa: f64,
    pub tau: f64,
    pub sigma: f64,
    pub pi: f64,
    pub nu: f64,
    pub lambda: f64,
}

impl FrameScalarValues {
    /// The eighteen first-order scalars in their conventional order:
    /// derivatives of Psi0, Psi2, R, then the rotation coefficients.
    pub fn first_order(&self) -> [f64; 18] {
        [
            self.d_psi0,
            self.del_psi0,
            self.dlt_psi0,
            self.d_psi2,
            self.del_psi2,
            self.dlt_psi2,
            self.d_r,
            self.del_r,
            self.dlt_r,
            self.alpha,
            self.epsilon,
            self.lambda,
            self.kappa,
            self.pi,
            self.gamma,
            self.tau,
            self.sigma,
            self.nu,
        ]
    }

    /// Distance from canonical form: max of |Psi1|, |Psi3|, |Psi0 - Psi4|.
    pub fn canonical_residual(&self) -> f64 {
        self.psi1
            .abs()
            .max(self.psi3.abs())
            .max((self.psi0 - self.psi4).abs())
    }

    /// Magnitude of the curvature scalars, for relative tolerances.
    pub fn curvature_scale(&self) -> f64 {
        self.psi0
            .abs()
            .max(self.psi1.abs())
            .max(self.psi2.abs())
            .max(self.psi3.abs())
            .max(self.psi4.abs())
    }

    /// Symbol assignment in the `calibration` ordering.
    fn sym_values(&self) -> [f64; calibration::NSYM] {
        let mut x = [0.0; calibration::NSYM];
        x[calibration::PSI0] = self.psi0;
        x[calibration::PSI2] = self.psi2;
        x[calibration::R] = self.r;
        x[calibration::D_PSI0] = self.d_psi0;
        x[calibration::DEL_PSI0] = self.del_psi0;
        x[calibration::DLT_PSI0] = self.dlt_psi0;
        x[calibration::D_PSI2] = self.d_psi2;
        x[calibration::DEL_PSI2] = self.del_psi2;
        x[calibration::DLT_PSI2] = self.dlt_psi2;
        x[calibration::D_R] = self.d_r;
        x[calibration::DEL_R] = self.del_r;
        x[calibration::DLT_R] = self.dlt_r;
        x[calibration::ALPHA] = self.alpha;
        x[calibration::EPSILON] = self.epsilon;
        x[calibration::LAMBDA] = self.lambda;
        x[calibration::KAPPA] = self.kappa;
        x[calibration::PI] = self.pi;
        x[calibration::GAMMA] = self.gamma;
        x[calibration::TAU] = self.tau;
        x[calibration::SIGMA] = self.sigma;
        x[calibration::NU] = self.nu;
        x
    }
}

fn forms() -> &'static [Poly; 4] {
    static FORMS: OnceLock<[Poly; 4]> = OnceLock::new();
    FORMS.get_or_init(|| {
        [
            calibration::gradient_square_poly(),
            calibration::sym_gradient_square_poly(),
            calibration::cross_gradient_square_poly(),
            calibration::divergence_gradient_poly(),
        ]
    })
}

/// (1/2) S_ab S^ab from the curvature scalars, valid in any null triad.
pub fn trace_free_quad(v: &FrameScalarValues) -> f64 {
    v.psi0 * v.psi4 + 3.0 * v.psi2 * v.psi2 - 4.0 * v.psi1 * v.psi3
}

/// -(1/6) S^a_b S^b_c S^c_a from the curvature scalars, valid in any null
/// triad; computed through the mixed-component matrix.
pub fn trace_free_cube(v: &FrameScalarValues) -> f64 {
    let s2 = 2f64.sqrt();
    let m = [
        [-v.psi2, -v.psi4, -s2 * v.psi3],
        [-v.psi0, -v.psi2, -s2 * v.psi1],
        [s2 * v.psi1, s2 * v.psi3, 2.0 * v.psi2],
    ];
    let mut tr = 0.0;
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                tr += m[a][b] * m[b][c] * m[c][a];
            }
        }
    }
    -tr / 6.0
}

/// The four first-order invariants listed in the module docs, in order.
/// Errors unless the bundle is canonical to within `1e-8` of its own scale.
pub fn np_invariant_values(v: &FrameScalarValues) -> Result<[f64; 4]> {
    let tol = 1e-8 * v.curvature_scale().max(1.0);
    if v.canonical_residual() > tol {
        return Err(CurvError::Invalid(format!(
            "first-order invariant polynomials need a canonical frame; residual {:.3e} exceeds {:.3e}",
            v.canonical_residual(),
            tol
        )));
    }
    let x = v.sym_values();
    let f = forms();
    Ok([
        f[0].eval_f64(&x),
        f[1].eval_f64(&x),
        f[2].eval_f64(&x),
        f[3].eval_f64(&x),
    ])
}
