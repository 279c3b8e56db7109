//! Built-in invariant lists, stored in index notation and parsed on demand.

use super::parse::parse_invariant;
use super::scheme::ContractionScheme;

/// The shipped invariant lists.
///
/// `Zeroth` are the three trace powers of Ricci. `First29` is the
/// overdetermined first-order list: three quadratic gradient invariants
/// followed by 26 quartic ones. `FkwcRank0` is the rank-0 polynomial basis
/// through order six in metric derivatives, grouped 1 + 3 + 10. `Components`
/// are the component-counting basis heads, three zeroth-order plus the two
/// displayed first-order contractions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisKind {
    Zeroth,
    First29,
    FkwcRank0,
    Components,
}

const ZEROTH: [&str; 3] = ["R", "R^{ab}R_{ab}", "R^{ab}{R_a}^cR_{bc}"];

// Three entries repair obvious misprints in the circulated list; index
// balance forces each reading (a dropped ';' in items 8 and 19, a '.' for
// ';' in item 22). Everything else is verbatim.
const FIRST29: [&str; 29] = [
    "R^{;a}R_{;a}",
    "R^{bc;d}R_{bc;d}",
    "R^{bc;d}R_{bd;c}",
    "R^{;c}{R_c}^{e;f}R_{;e}R_{;f}",
    "R^{;c}{R_c}^{e;f}{R_{ef}}^{;h}R_{;h}",
    "R^{;c}{R_c}^{e;f}{{R_e}^{h}}_{;f}R_{;h}",
    "R^{;c}{R_c}^{e;f}{{R_f}^h}_{;e}R_{;h}",
    "R^{;c}R^{;f}{R^{hi}}_{;c}R_{hi;f}",
    "R^{;c}{R_c}^{e;f}{R_e}^{h;i}R_{fh;i}",
    "R^{;c}{R_c}^{e;f}{R_e}^{h;i}R_{fi;h}",
    "R^{;c}{R_c}^{e;f}{R_e}^{h;i}R_{hi;f}",
    "R^{;c}{R_c}^{e;f}{R_f}^{h;i}R_{hi;e}",
    "R^{;c}{R_c}^{e;f}{R^{hi}}_{;e}R_{hi;f}",
    "R^{;c}{R^{ef}}_{;c}{R_e}^{h;i}R_{fh;i}",
    "R^{;c}{R^{ef}}_{;c}{R_e}^{h;i}R_{fi;h}",
    "R^{;c}{R^{ef}}_{;c}{R_e}^{h;i}R_{hi;f}",
    "R^{;c}{R^{ef}}_{;c}{R^{hi}}_{;e}R_{hi;f}",
    "R^{bc;d}{R_{bc}}^{;f}{R_d}^{h;i}R_{fh;i}",
    "R^{bc;d}{R_{bc}}^{;f}{R_d}^{h;i}R_{fi;h}",
    "R^{bc;d}{R_{bc}}^{;f}{R_d}^{h;i}R_{hi;f}",
    "R^{bc;d}{R_{bd}}^{;f}{R_c}^{h;i}R_{fh;i}",
    "R^{bc;d}{R_{bd}}^{;f}{R_c}^{h;i}R_{fi;h}",
    "R^{bc;d}{R_{bd}}^{;f}{R_c}^{h;i}R_{hi;f}",
    "R^{bc;d}{R_{bd}}^{;f}{R_f}^{h;i}R_{hi;c}",
    "R^{bc;d}{R_{bc}}^{;f}{R^{hi}}_{;d}R_{hi;f}",
    "R^{bc;d}{{R_b}^f}_{;d}{R_c}^{h;i}R_{fh;i}",
    "R^{bc;d}{R_b}^{f;g}{R_{cf}}^{;i}R_{dg;i}",
    "R^{bc;d}{R_b}^{f;g}{R_{cg}}^{;i}R_{df;i}",
    "R^{bc;d}{R_b}^{f;g}{R_{cg}}^{;i}R_{di;f}",
];

const FKWC_RANK0: [&str; 14] = [
    // order 2
    "R",
    // order 4
    "R_{;p}^{;p}",
    "R R",
    "R_{pq}R^{pq}",
    // order 6
    "R_{;p}^{;p}_{;q}^{;q}",
    "R R_{;p}^{;p}",
    "R_{;pq}R^{pq}",
    "R_{pq;r}^{;r}R^{pq}",
    "R_{;p}R^{;p}",
    "R_{pq;r}R^{pq;r}",
    "R_{pq;r}R^{pr;q}",
    "R R R",
    "R R_{pq}R^{pq}",
    "R_{pq}{R^p}_rR^{qr}",
];

const COMPONENTS: [&str; 5] = [
    "R",
    "{R_a}^b{R_b}^a",
    "{R_a}^b{R_b}^c{R_c}^a",
    "R_{ab;c}R^{ab;c}",
    "R_{ab;c}R_{de;f}R^{ab;f}R^{de;c}",
];

pub fn builtin_basis(kind: BasisKind) -> Vec<ContractionScheme> {
    let texts: &[&str] = match kind {
        BasisKind::Zeroth => &ZEROTH,
        BasisKind::First29 => &FIRST29,
        BasisKind::FkwcRank0 => &FKWC_RANK0,
        BasisKind::Components => &COMPONENTS,
    };
    texts
        .iter()
        .map(|t| parse_invariant(t).expect("builtin notation parses"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariants::enumerate_schemes;

    #[test]
    fn sizes() {
        assert_eq!(builtin_basis(BasisKind::Zeroth).len(), 3);
        assert_eq!(builtin_basis(BasisKind::First29).len(), 29);
        assert_eq!(builtin_basis(BasisKind::FkwcRank0).len(), 14);
        assert_eq!(builtin_basis(BasisKind::Components).len(), 5);
    }

    #[test]
    fn first29_cases() {
        let b = builtin_basis(BasisKind::First29);
        for s in &b[..3] {
            assert_eq!(s.case_signature(), &[1, 1]);
        }
        for s in &b[3..] {
            assert_eq!(s.case_signature(), &[1, 1, 1, 1]);
        }
        // pairwise distinct canonical forms
        for i in 0..b.len() {
            for j in i + 1..b.len() {
                assert_ne!(b[i], b[j], "items {} and {} coincide", i + 1, j + 1);
            }
        }
        // the quartic items are among the enumerated classes of their case
        let classes = enumerate_schemes(&[1, 1, 1, 1]).unwrap();
        for s in &b[3..] {
            assert!(classes.contains(s));
        }
    }

    #[test]
    fn fkwc_order_grading() {
        let b = builtin_basis(BasisKind::FkwcRank0);
        let weights: Vec<usize> = b.iter().map(|s| s.weight()).collect();
        assert_eq!(weights[0], 2);
        assert!(weights[1..4].iter().all(|&w| w == 4));
        assert!(weights[4..].iter().all(|&w| w == 6));
        assert_eq!(weights[4..].len(), 10);
    }

    #[test]
    fn zeroth_matches_trace_schemes() {
        let b = builtin_basis(BasisKind::Zeroth);
        assert_eq!(b[0].case_signature(), &[0]);
        assert_eq!(b[1].case_signature(), &[0, 0]);
        assert_eq!(b[2].case_signature(), &[0, 0, 0]);
    }
}
