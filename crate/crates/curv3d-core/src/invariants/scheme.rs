//! Contraction schemes: fully contracted monomials in ∇^(d) Ricci factors.

use std::collections::BTreeSet;
use std::fmt;

use num_rational::BigRational;

use crate::error::{CurvError, Result};

/// One fully contracted product of covariant derivatives of the Ricci tensor.
///
/// A factor of derivative order `d` occupies `2 + d` consecutive slots: the
/// two symmetric Ricci slots first, then the derivative slots from innermost
/// to outermost. The derivative slots are ordered (covariant derivatives do
/// not commute); only the Ricci pair may be swapped without changing the
/// value. `pairing[i] = j` contracts slot `i` against slot `j` through the
/// inverse metric. Scalar factors like R or □R are factors whose Ricci pair
/// is contracted with itself.
///
/// The case signature `[d1, …, dk]` (one derivative order per factor, kept
/// sorted ascending) names the contraction class the scheme belongs to.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ContractionScheme {
    degrees: Vec<u8>,
    pairing: Vec<usize>,
}

/// A rational linear combination of schemes. Produced when input notation
/// (a Riemann-headed factor, valid in 3D only) expands into a sum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantExpr {
    pub terms: Vec<(BigRational, ContractionScheme)>,
}

impl InvariantExpr {
    pub fn single(s: ContractionScheme) -> Self {
        InvariantExpr {
            terms: vec![(BigRational::from_integer(1.into()), s)],
        }
    }

    pub fn max_degree(&self) -> u8 {
        self.terms
            .iter()
            .map(|(_, s)| s.max_degree())
            .max()
            .unwrap_or(0)
    }
}

pub(crate) fn slot_total(degrees: &[u8]) -> usize {
    degrees.iter().map(|&d| 2 + d as usize).sum()
}

fn factor_bases_of(degrees: &[u8]) -> Vec<usize> {
    let mut bases = Vec::with_capacity(degrees.len());
    let mut b = 0;
    for &d in degrees {
        bases.push(b);
        b += 2 + d as usize;
    }
    bases
}

impl ContractionScheme {
    /// Factor degrees must be sorted ascending; the pairing must be a
    /// fixed-point-free involution on all slots.
    pub fn new(degrees: Vec<u8>, pairing: Vec<usize>) -> Result<Self> {
        if degrees.is_empty() {
            return Err(CurvError::Invalid("scheme needs at least one factor".into()));
        }
        if degrees.windows(2).any(|w| w[0] > w[1]) {
            return Err(CurvError::Invalid(
                "factor degrees must be sorted ascending".into(),
            ));
        }
        let total = slot_total(&degrees);
        if pairing.len() != total {
            return Err(CurvError::Invalid(format!(
                "pairing covers {} slots, factors have {}",
                pairing.len(),
                total
            )));
        }
        for i in 0..total {
            let j = pairing[i];
            if j >= total || j == i || pairing[j] != i {
                return Err(CurvError::Invalid(
                    "pairing must be a fixed-point-free involution".into(),
                ));
            }
        }
        Ok(ContractionScheme { degrees, pairing })
    }

    /// Builds a scheme from factors in arbitrary order, sorting them by
    /// degree (stably) and remapping the pairing.
    pub fn from_unsorted(degrees: Vec<u8>, pairing: Vec<usize>) -> Result<Self> {
        let k = degrees.len();
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by_key(|&f| degrees[f]);
        let old_bases = factor_bases_of(&degrees);
        let sorted: Vec<u8> = order.iter().map(|&f| degrees[f]).collect();
        let new_bases = factor_bases_of(&sorted);
        // sigma maps old slot -> new slot
        let mut sigma = vec![0usize; pairing.len()];
        for (newf, &oldf) in order.iter().enumerate() {
            for t in 0..2 + degrees[oldf] as usize {
                sigma[old_bases[oldf] + t] = new_bases[newf] + t;
            }
        }
        let mut remapped = vec![0usize; pairing.len()];
        for i in 0..pairing.len() {
            remapped[sigma[i]] = sigma[pairing[i]];
        }
        ContractionScheme::new(sorted, remapped)
    }

    pub fn degrees(&self) -> &[u8] {
        &self.degrees
    }

    /// Case signature, same as the sorted factor degrees.
    pub fn case_signature(&self) -> &[u8] {
        &self.degrees
    }

    pub fn pairing(&self) -> &[usize] {
        &self.pairing
    }

    pub fn factor_count(&self) -> usize {
        self.degrees.len()
    }

    pub fn slot_count(&self) -> usize {
        self.pairing.len()
    }

    /// Total weight Σ(2 + d_i); invariant under rewriting identities.
    pub fn weight(&self) -> usize {
        self.slot_count()
    }

    pub fn max_degree(&self) -> u8 {
        *self.degrees.last().unwrap()
    }

    pub fn factor_bases(&self) -> Vec<usize> {
        factor_bases_of(&self.degrees)
    }

    /// The contracted pairs as (i, j) with i < j, ordered by i.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.pairing.len() / 2);
        for i in 0..self.pairing.len() {
            if self.pairing[i] > i {
                out.push((i, self.pairing[i]));
            }
        }
        out
    }

    /// Minimal pairing encoding over factor permutations and Ricci-pair
    /// swaps. Schemes with equal canonical form evaluate identically.
    pub fn canonicalize(&self) -> ContractionScheme {
        let sigmas = slot_symmetries(&self.degrees);
        ContractionScheme {
            degrees: self.degrees.clone(),
            pairing: canonical_under(&self.pairing, &sigmas),
        }
    }

    /// Index-notation rendering; round-trips through the invariant parser.
    pub fn notation(&self) -> String {
        let letters = "abcdefghijklmnopqrstuvwxyz";
        let mut label = vec![0usize; self.slot_count()];
        for (t, (i, j)) in self.pairs().into_iter().enumerate() {
            label[i] = t;
            label[j] = t;
        }
        let bases = self.factor_bases();
        let mut parts = Vec::new();
        for (f, &d) in self.degrees.iter().enumerate() {
            let b = bases[f];
            let mut s = String::from("R");
            if self.pairing[b] != b + 1 {
                for t in 0..2 {
                    let raised = self.pairing[b + t] < b + t;
                    s.push(if raised { '^' } else { '_' });
                    s.push('{');
                    s.push(letters.as_bytes()[label[b + t]] as char);
                    s.push('}');
                }
            }
            for t in 0..d as usize {
                let slot = b + 2 + t;
                let raised = self.pairing[slot] < slot;
                s.push(if raised { '^' } else { '_' });
                s.push('{');
                s.push(';');
                s.push(letters.as_bytes()[label[slot]] as char);
                s.push('}');
            }
            parts.push(s);
        }
        parts.join(" ")
    }
}

impl fmt::Display for ContractionScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.notation())
    }
}

fn factor_permutations(degrees: &[u8]) -> Vec<Vec<usize>> {
    // blocks of equal degree are contiguous (degrees sorted)
    let k = degrees.len();
    let mut blocks = Vec::new();
    let mut start = 0;
    for f in 1..=k {
        if f == k || degrees[f] != degrees[start] {
            blocks.push((start, f));
            start = f;
        }
    }
    let mut perms: Vec<Vec<usize>> = vec![(0..k).collect()];
    for (lo, hi) in blocks {
        let mut next = Vec::new();
        for base in &perms {
            permute_block(base, lo, hi, &mut next);
        }
        perms = next;
    }
    perms
}

fn permute_block(base: &[usize], lo: usize, hi: usize, out: &mut Vec<Vec<usize>>) {
    let mut targets: Vec<usize> = (lo..hi).collect();
    let mut perm = base.to_vec();
    fn rec(
        perm: &mut Vec<usize>,
        pos: usize,
        hi: usize,
        targets: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if pos == hi {
            out.push(perm.clone());
            return;
        }
        for t in 0..targets.len() {
            let tv = targets.swap_remove(t);
            perm[pos] = tv;
            rec(perm, pos + 1, hi, targets, out);
            targets.push(tv);
            let last = targets.len() - 1;
            targets.swap(t, last);
        }
    }
    rec(&mut perm, lo, hi, &mut targets, out);
}

/// All slot permutations generated by permuting equal-degree factors and
/// swapping Ricci pairs. Size Π(block sizes)! · 2^k.
fn slot_symmetries(degrees: &[u8]) -> Vec<Vec<usize>> {
    let k = degrees.len();
    let bases = factor_bases_of(degrees);
    let total = slot_total(degrees);
    let fperms = factor_permutations(degrees);
    let mut out = Vec::with_capacity(fperms.len() << k);
    for fp in &fperms {
        for mask in 0..(1u32 << k) {
            let mut sigma = vec![0usize; total];
            for f in 0..k {
                let t = fp[f];
                let swap = (mask >> f) & 1 == 1;
                sigma[bases[f]] = bases[t] + swap as usize;
                sigma[bases[f] + 1] = bases[t] + 1 - swap as usize;
                for j in 0..degrees[f] as usize {
                    sigma[bases[f] + 2 + j] = bases[t] + 2 + j;
                }
            }
            out.push(sigma);
        }
    }
    out
}

fn canonical_under(pairing: &[usize], sigmas: &[Vec<usize>]) -> Vec<usize> {
    let mut best: Option<Vec<usize>> = None;
    let mut buf = vec![0usize; pairing.len()];
    for sigma in sigmas {
        for i in 0..pairing.len() {
            buf[sigma[i]] = sigma[pairing[i]];
        }
        if best.as_ref().map_or(true, |b| buf < *b) {
            best = Some(buf.clone());
        }
    }
    best.unwrap()
}

fn enumerate_matchings(p: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
    match p.iter().position(|&x| x == usize::MAX) {
        None => visit(p),
        Some(i) => {
            for j in i + 1..p.len() {
                if p[j] == usize::MAX {
                    p[i] = j;
                    p[j] = i;
                    enumerate_matchings(p, visit);
                    p[i] = usize::MAX;
                    p[j] = usize::MAX;
                }
            }
        }
    }
}

/// All contraction schemes of a case, one per equivalence class under factor
/// permutation and Ricci-pair swaps, ordered by canonical pairing encoding.
pub fn enumerate_schemes(case: &[u8]) -> Result<Vec<ContractionScheme>> {
    if case.is_empty() {
        return Err(CurvError::Invalid("case needs at least one factor".into()));
    }
    let mut degrees = case.to_vec();
    degrees.sort_unstable();
    let total = slot_total(&degrees);
    if total % 2 != 0 {
        return Err(CurvError::Invalid(format!(
            "case {:?} has odd slot count {}",
            case, total
        )));
    }
    let sigmas = slot_symmetries(&degrees);
    let mut keys: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut p = vec![usize::MAX; total];
    enumerate_matchings(&mut p, &mut |m| {
        keys.insert(canonical_under(m, &sigmas));
    });
    Ok(keys
        .into_iter()
        .map(|pairing| ContractionScheme {
            degrees: degrees.clone(),
            pairing,
        })
        .collect())
}
