//! Point evaluation of contraction schemes from cached curvature values.

use crate::error::{CurvError, Result};
use crate::expr::Point;
use crate::invariants::scheme::{ContractionScheme, InvariantExpr};
use crate::jet::Jet;
use crate::scalar::Scalar;
use crate::tensor::{jet_geometry_with_order, Geometry, MetricSpec};

/// Highest factor derivative order accepted by the evaluation entry points.
pub const DERIVATIVE_CAP: u8 = 5;

/// Values of ∇^(d) Ricci at one point, cached with every combination of
/// raised slots so a contraction scheme reduces to a sum over pair indices.
pub struct PointCurvature<S> {
    dim: usize,
    /// variants[d][mask][flat]: slot i of ∇^(d)Ric is raised iff bit i of mask
    variants: Vec<Vec<Vec<S>>>,
}

fn value_vec<T: Scalar>(comps: &[Jet<T>]) -> Vec<T> {
    comps.iter().map(|j| j.value().clone()).collect()
}

fn raise_slot<S: Scalar>(dim: usize, rank: usize, vals: &[S], slot: usize, ginv: &[S]) -> Vec<S> {
    let stride = dim.pow((rank - 1 - slot) as u32);
    let mut out = Vec::with_capacity(vals.len());
    for f in 0..vals.len() {
        let i = (f / stride) % dim;
        let base = f - i * stride;
        let mut acc = S::zero();
        for j in 0..dim {
            acc = acc.add(&ginv[i * dim + j].mul(&vals[base + j * stride]));
        }
        out.push(acc);
    }
    out
}

impl<S: Scalar> PointCurvature<S> {
    /// Extracts the point values of ∇^(d)Ric for d = 0..=max_degree from a
    /// jet-backed geometry. The geometry's jet order must be at least
    /// max_degree + 2.
    pub fn from_geometry(geom: &mut Geometry<Jet<S>>, max_degree: usize) -> Result<Self> {
        let dim = geom.dim();
        let ginv = value_vec(&geom.metric_inverse()?.comps);
        let mut variants = Vec::with_capacity(max_degree + 1);
        for d in 0..=max_degree {
            let rank = 2 + d;
            let base = value_vec(&geom.nabla_ricci(d)?.comps);
            let mut vs: Vec<Vec<S>> = Vec::with_capacity(1 << rank);
            vs.push(base);
            for mask in 1..(1usize << rank) {
                let low = mask.trailing_zeros() as usize;
                let prev = &vs[mask & (mask - 1)];
                vs.push(raise_slot(dim, rank, prev, low, &ginv));
            }
            variants.push(vs);
        }
        Ok(PointCurvature { dim, variants })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_degree(&self) -> usize {
        self.variants.len() - 1
    }

    /// Full contraction value. Each pair is contracted by raising its
    /// higher-numbered slot, summing over one index per pair.
    pub fn eval_scheme(&self, s: &ContractionScheme) -> Result<S> {
        if s.max_degree() as usize > self.max_degree() {
            return Err(CurvError::Invalid(format!(
                "scheme needs derivative order {}, cache holds {}",
                s.max_degree(),
                self.max_degree()
            )));
        }
        let dim = self.dim;
        let degrees = s.degrees();
        let bases = s.factor_bases();
        let pairs = s.pairs();
        let np = pairs.len();
        let total = s.slot_count();
        let k = degrees.len();

        let mut pair_of = vec![0usize; total];
        for (t, &(i, j)) in pairs.iter().enumerate() {
            pair_of[i] = t;
            pair_of[j] = t;
        }
        let mut masks = vec![0usize; k];
        for &(_, j) in &pairs {
            let f = (0..k)
                .find(|&f| j < bases[f] + 2 + degrees[f] as usize)
                .unwrap();
            masks[f] |= 1 << (j - bases[f]);
        }

        let mut idx = vec![0usize; np];
        let mut acc = S::zero();
        loop {
            let mut term = S::one();
            for f in 0..k {
                let r = 2 + degrees[f] as usize;
                let mut flat = 0usize;
                for t in 0..r {
                    flat = flat * dim + idx[pair_of[bases[f] + t]];
                }
                term = term.mul(&self.variants[degrees[f] as usize][masks[f]][flat]);
            }
            acc = acc.add(&term);
            let mut c = np;
            loop {
                if c == 0 {
                    return Ok(acc);
                }
                c -= 1;
                idx[c] += 1;
                if idx[c] < dim {
                    break;
                }
                idx[c] = 0;
            }
        }
    }

    pub fn eval_expr(&self, e: &InvariantExpr) -> Result<S> {
        let mut acc = S::zero();
        for (c, s) in &e.terms {
            acc = acc.add(&S::from_rational(c).mul(&self.eval_scheme(s)?));
        }
        Ok(acc)
    }
}

fn point_values<T: Scalar>(g: &MetricSpec, p: &Point<T>) -> Result<Vec<T>> {
    g.coords
        .iter()
        .map(|c| {
            p.get(c)
                .cloned()
                .ok_or_else(|| CurvError::UnboundSymbol { name: c.clone() })
        })
        .collect()
}

fn cap_check(maxd: u8) -> Result<()> {
    if maxd > DERIVATIVE_CAP {
        return Err(CurvError::Invalid(format!(
            "derivative order {} exceeds the cap {}",
            maxd, DERIVATIVE_CAP
        )));
    }
    Ok(())
}

/// Evaluates one scheme on a metric at a point, in any scalar type.
pub fn evaluate_invariant_in<T: Scalar>(
    s: &ContractionScheme,
    g: &MetricSpec,
    p: &Point<T>,
) -> Result<T> {
    cap_check(s.max_degree())?;
    let at = point_values(g, p)?;
    let maxd = s.max_degree() as usize;
    let mut geom = jet_geometry_with_order(g, &at, maxd + 2)?;
    let pc = PointCurvature::from_geometry(&mut geom, maxd)?;
    pc.eval_scheme(s)
}

pub fn evaluate_invariant(s: &ContractionScheme, g: &MetricSpec, p: &Point<f64>) -> Result<f64> {
    evaluate_invariant_in(s, g, p)
}

/// Evaluates a scheme combination, sharing one curvature cache.
pub fn evaluate_invariant_expr(e: &InvariantExpr, g: &MetricSpec, p: &Point<f64>) -> Result<f64> {
    cap_check(e.max_degree())?;
    let at = point_values(g, p)?;
    let maxd = e.max_degree() as usize;
    let mut geom = jet_geometry_with_order(g, &at, maxd + 2)?;
    let pc = PointCurvature::from_geometry(&mut geom, maxd)?;
    pc.eval_expr(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;
    use crate::gf::Gf61;
    use crate::invariants::scheme::enumerate_schemes;
    use crate::tensor::MetricJetSample;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn scheme(degrees: &[u8], pairing: &[usize]) -> ContractionScheme {
        ContractionScheme::new(degrees.to_vec(), pairing.to_vec()).unwrap()
    }

    fn ricci_trace() -> ContractionScheme {
        scheme(&[0], &[1, 0])
    }

    fn ricci_sq() -> ContractionScheme {
        scheme(&[0, 0], &[2, 3, 0, 1])
    }

    fn ricci_cube() -> ContractionScheme {
        // R_a^b R_b^c R_c^a
        scheme(&[0, 0, 0], &[5, 2, 1, 4, 3, 0])
    }

    fn rotating_dust() -> MetricSpec {
        // H = r^2, D = r substituted directly
        let e = |s: &str| parse_expr(s).unwrap();
        MetricSpec::new(
            vec!["t".into(), "r".into(), "phi".into()],
            &[
                (0, 0, e("-1")),
                (0, 2, e("-(r^2)")),
                (2, 2, e("r^2 - r^4")),
                (1, 1, e("1")),
            ],
        )
        .unwrap()
    }

    #[test]
    fn dust_curvature_traces() {
        let g = rotating_dust();
        for r in [0.5_f64, 0.8, 1.3] {
            let p = Point::new().set("t", 0.0).set("r", r).set("phi", 0.0);
            let rs = evaluate_invariant(&ricci_trace(), &g, &p).unwrap();
            let r2 = evaluate_invariant(&ricci_sq(), &g, &p).unwrap();
            let r3 = evaluate_invariant(&ricci_cube(), &g, &p).unwrap();
            assert!((rs - 2.0).abs() < 1e-9, "R = {rs} at r = {r}");
            assert!((r2 - 12.0).abs() < 1e-9, "tr2 = {r2} at r = {r}");
            assert!((r3 - 8.0).abs() < 1e-8, "tr3 = {r3} at r = {r}");
        }
    }

    #[test]
    fn constant_curvature_traces() {
        // anti-de Sitter slice: R = -6, R_ab = (R/3) g_ab
        let e = |s: &str| parse_expr(s).unwrap();
        let g = MetricSpec::new(
            vec!["t".into(), "rho".into(), "ph".into()],
            &[
                (0, 0, e("-(cosh(rho)^2)")),
                (1, 1, e("1")),
                (2, 2, e("sinh(rho)^2")),
            ],
        )
        .unwrap();
        let p = Point::new().set("t", 0.4).set("rho", 0.9).set("ph", 1.1);
        let rs = evaluate_invariant(&ricci_trace(), &g, &p).unwrap();
        let r2 = evaluate_invariant(&ricci_sq(), &g, &p).unwrap();
        let r3 = evaluate_invariant(&ricci_cube(), &g, &p).unwrap();
        assert!((rs + 6.0).abs() < 1e-9);
        assert!((r2 - 12.0).abs() < 1e-8); // R²/3
        assert!((r3 + 24.0).abs() < 1e-7); // R³/9
    }

    #[test]
    fn flat_metric_kills_everything() {
        let sample = MetricJetSample::flat(3, 4);
        let mut geom = sample.geometry::<f64>().unwrap();
        let pc = PointCurvature::from_geometry(&mut geom, 2).unwrap();
        for case in [&[0u8][..], &[0, 0], &[1, 1], &[2]] {
            for s in enumerate_schemes(case).unwrap() {
                assert_eq!(pc.eval_scheme(&s).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn divergence_identity_on_random_jets() {
        // ∇_b∇_a R^{ab} = ½ □R, exact over the prime field
        let schemes = enumerate_schemes(&[2]).unwrap();
        assert_eq!(schemes.len(), 2);
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let half = Gf61::from_i64(2).inv().unwrap();
        for _ in 0..3 {
            let sample = MetricJetSample::random(&mut rng, 3, 4);
            let mut geom = sample.geometry::<Gf61>().unwrap();
            let pc = PointCurvature::from_geometry(&mut geom, 2).unwrap();
            let a = pc.eval_scheme(&schemes[0]).unwrap();
            let b = pc.eval_scheme(&schemes[1]).unwrap();
            assert_ne!(a, Gf61::from_i64(0));
            // one of the two classes is the box, the other the double divergence
            let ok = a.mul(&half) == b || b.mul(&half) == a;
            assert!(ok, "divergence relation failed: {:?} vs {:?}", a, b);
        }
    }

    #[test]
    fn swapped_ricci_pair_evaluates_equal() {
        // same monomial written with a Ricci pair transposed
        let s1 = scheme(&[0, 0], &[2, 3, 0, 1]);
        let s2 = scheme(&[0, 0], &[3, 2, 1, 0]);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let sample = MetricJetSample::random(&mut rng, 3, 2);
        let mut geom = sample.geometry::<Gf61>().unwrap();
        let pc = PointCurvature::from_geometry(&mut geom, 0).unwrap();
        assert_eq!(pc.eval_scheme(&s1).unwrap(), pc.eval_scheme(&s2).unwrap());
    }

    #[test]
    fn degree_above_cache_rejected() {
        let sample = MetricJetSample::flat(3, 3);
        let mut geom = sample.geometry::<f64>().unwrap();
        let pc = PointCurvature::from_geometry(&mut geom, 1).unwrap();
        let s = scheme(&[2], &[1, 0, 3, 2]);
        assert!(pc.eval_scheme(&s).is_err());
    }

    #[test]
    fn cap_enforced() {
        let g = rotating_dust();
        let p = Point::new().set("t", 0.0).set("r", 1.0).set("phi", 0.0);
        // ∇^6 Ric factor: slots 0..8, chain-paired
        let s = scheme(&[6], &[1, 0, 3, 2, 5, 4, 7, 6]);
        assert!(evaluate_invariant(&s, &g, &p).is_err());
    }
}
