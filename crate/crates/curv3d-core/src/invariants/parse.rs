//! Index-notation parser for contraction schemes.
//!
//! Grammar: one or more factors, each a head `R` followed by subscript and
//! superscript index groups. Braces around a factor or group are transparent,
//! so `{R_{bc}}^{;f}` and `R_{bc}^{;f}` read the same. Inside a group a `;`
//! (or a stray `.`, a common misprint) switches to derivative indices, which
//! apply left to right, innermost first. `~` is alignment padding. Index
//! labels are single ASCII letters; every label must appear exactly twice in
//! the monomial, and variance is ignored because contraction through the
//! metric commutes with everything in sight.
//!
//! Heads carry 0 position indices (the Ricci scalar), 2 (Ricci), or 4
//! (Riemann). Riemann factors only exist here as input sugar: they are
//! expanded through the three-dimensional decomposition into metric and
//! Ricci terms, so a Riemann-headed monomial generally parses to a linear
//! combination of Ricci schemes rather than a single one.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::scheme::{ContractionScheme, InvariantExpr};
use crate::error::{CurvError, Result};

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Clone, Debug)]
struct RawFactor {
    pos: Vec<u8>,
    derivs: Vec<u8>,
}

/// Tokenizes into factors with position and derivative labels. Reports
/// offsets into the original text on error.
fn tokenize(text: &str) -> Result<Vec<RawFactor>> {
    let bytes = text.as_bytes();
    let mut factors: Vec<RawFactor> = Vec::new();
    let mut i = 0usize;
    let err = |offset: usize, msg: &str| CurvError::Parse {
        offset,
        msg: msg.into(),
    };
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '{' | '}' | '*' => i += 1,
            'R' => {
                factors.push(RawFactor {
                    pos: Vec::new(),
                    derivs: Vec::new(),
                });
                i += 1;
            }
            '^' | '_' => {
                let f = factors
                    .last_mut()
                    .ok_or_else(|| err(i, "index group before any tensor head"))?;
                i += 1;
                // transparent braces between the script mark and its group
                while i < bytes.len() && bytes[i] == b' ' {
                    i += 1;
                }
                if i >= bytes.len() {
                    return Err(err(i, "dangling script mark"));
                }
                if bytes[i] == b'{' {
                    i += 1;
                    let mut deriv_mode = false;
                    loop {
                        if i >= bytes.len() {
                            return Err(err(i, "unclosed index group"));
                        }
                        match bytes[i] as char {
                            '}' => {
                                i += 1;
                                break;
                            }
                            ';' | '.' => {
                                deriv_mode = true;
                                i += 1;
                            }
                            '~' | ' ' => i += 1,
                            ch if ch.is_ascii_alphabetic() => {
                                if deriv_mode {
                                    f.derivs.push(ch as u8);
                                } else {
                                    f.pos.push(ch as u8);
                                }
                                i += 1;
                            }
                            _ => return Err(err(i, "unexpected character in index group")),
                        }
                    }
                } else {
                    let ch = bytes[i] as char;
                    if ch == '~' {
                        i += 1;
                    } else if ch.is_ascii_alphabetic() {
                        f.pos.push(ch as u8);
                        i += 1;
                    } else {
                        return Err(err(i, "expected an index after script mark"));
                    }
                }
            }
            ch if ch.is_ascii_alphabetic() => {
                return Err(err(i, &format!("unknown tensor head '{}'", ch)));
            }
            _ => return Err(err(i, "unexpected character")),
        }
    }
    if factors.is_empty() {
        return Err(err(0, "empty invariant"));
    }
    for f in &factors {
        let n = f.pos.len();
        if n != 0 && n != 2 && n != 4 {
            return Err(CurvError::Invalid(format!(
                "head R carries {} position indices; 0 (scalar), 2 (Ricci), or 4 (Riemann) expected",
                n
            )));
        }
    }
    Ok(factors)
}

fn check_balance(factors: &[RawFactor]) -> Result<()> {
    let mut counts = [0u32; 256];
    for f in factors {
        for &l in f.pos.iter().chain(f.derivs.iter()) {
            counts[l as usize] += 1;
        }
    }
    for (l, &n) in counts.iter().enumerate() {
        if n == 1 {
            return Err(CurvError::Invalid(format!(
                "free index '{}': the expression is not a scalar",
                l as u8 as char
            )));
        }
        if n > 2 {
            return Err(CurvError::Invalid(format!(
                "index '{}' appears {} times; contracted labels appear exactly twice",
                l as u8 as char, n
            )));
        }
    }
    Ok(())
}

/// One Ricci-or-scalar factor in an expanded term. `pos: None` is a scalar
/// curvature factor (the Ricci trace), which owns no position labels.
#[derive(Clone, Debug)]
struct RicFactor {
    pos: Option<(u8, u8)>,
    derivs: Vec<u8>,
}

#[derive(Clone, Debug)]
struct Term {
    coeff: BigRational,
    factors: Vec<RicFactor>,
    metrics: Vec<(u8, u8)>,
}

/// Expands Riemann factors through the 3D decomposition
/// R_abcd = g_ac R_bd + g_bd R_ac − g_ad R_bc − g_bc R_ad
///          − (R/2)(g_ac g_bd − g_ad g_bc),
/// which commutes with covariant differentiation.
fn expand(factors: &[RawFactor]) -> Vec<Term> {
    let mut terms = vec![Term {
        coeff: BigRational::one(),
        factors: Vec::new(),
        metrics: Vec::new(),
    }];
    for f in factors {
        match f.pos.len() {
            0 => {
                for t in &mut terms {
                    t.factors.push(RicFactor {
                        pos: None,
                        derivs: f.derivs.clone(),
                    });
                }
            }
            2 => {
                for t in &mut terms {
                    t.factors.push(RicFactor {
                        pos: Some((f.pos[0], f.pos[1])),
                        derivs: f.derivs.clone(),
                    });
                }
            }
            4 => {
                let (a, b, c, d) = (f.pos[0], f.pos[1], f.pos[2], f.pos[3]);
                // (coeff, metric pairs, ricci pos or None for the R·g·g parts)
                let branches: [(BigRational, Vec<(u8, u8)>, Option<(u8, u8)>); 6] = [
                    (ratio(1, 1), vec![(a, c)], Some((b, d))),
                    (ratio(1, 1), vec![(b, d)], Some((a, c))),
                    (ratio(-1, 1), vec![(a, d)], Some((b, c))),
                    (ratio(-1, 1), vec![(b, c)], Some((a, d))),
                    (ratio(-1, 2), vec![(a, c), (b, d)], None),
                    (ratio(1, 2), vec![(a, d), (b, c)], None),
                ];
                let mut next = Vec::with_capacity(terms.len() * 6);
                for t in &terms {
                    for (co, ms, pos) in &branches {
                        let mut nt = t.clone();
                        nt.coeff *= co;
                        nt.metrics.extend_from_slice(ms);
                        nt.factors.push(RicFactor {
                            pos: *pos,
                            derivs: f.derivs.clone(),
                        });
                        next.push(nt);
                    }
                }
                terms = next;
            }
            _ => unreachable!("arity checked during tokenization"),
        }
    }
    terms
}

/// Removes explicit metric factors by joining the slots they contract.
/// A metric whose two labels coincide is a full trace and contributes a
/// factor of 3 (the dimension this expansion is valid in).
fn eliminate_metrics(t: &mut Term) {
    while let Some((x, y)) = t.metrics.pop() {
        if x == y {
            t.coeff *= ratio(3, 1);
            continue;
        }
        let rename = |l: &mut u8| {
            if *l == x {
                *l = y;
            }
        };
        for m in t.metrics.iter_mut() {
            rename(&mut m.0);
            rename(&mut m.1);
        }
        for f in t.factors.iter_mut() {
            if let Some((ref mut p, ref mut q)) = f.pos {
                rename(p);
                rename(q);
            }
            for d in f.derivs.iter_mut() {
                rename(d);
            }
        }
    }
}

/// Builds the scheme of a metric-free term: slots in writing order, pairing
/// from label matching, factors then sorted by derivative order.
fn term_scheme(t: &Term) -> Result<ContractionScheme> {
    let degrees: Vec<u8> = t.factors.iter().map(|f| f.derivs.len() as u8).collect();
    let mut slot_labels: Vec<Option<u8>> = Vec::new();
    let mut self_pairs: Vec<(usize, usize)> = Vec::new();
    for f in &t.factors {
        let base = slot_labels.len();
        match f.pos {
            Some((p, q)) => {
                slot_labels.push(Some(p));
                slot_labels.push(Some(q));
            }
            None => {
                slot_labels.push(None);
                slot_labels.push(None);
                self_pairs.push((base, base + 1));
            }
        }
        for &d in &f.derivs {
            slot_labels.push(Some(d));
        }
    }
    let n = slot_labels.len();
    let mut pairing = vec![usize::MAX; n];
    for (i, j) in self_pairs {
        pairing[i] = j;
        pairing[j] = i;
    }
    for i in 0..n {
        if pairing[i] != usize::MAX {
            continue;
        }
        let l = slot_labels[i].expect("labeled slot");
        for j in i + 1..n {
            if slot_labels[j] == Some(l) && pairing[j] == usize::MAX {
                pairing[i] = j;
                pairing[j] = i;
                break;
            }
        }
        if pairing[i] == usize::MAX {
            return Err(CurvError::Invalid(format!(
                "index '{}' left unmatched",
                l as char
            )));
        }
    }
    Ok(ContractionScheme::from_unsorted(degrees, pairing)?.canonicalize())
}

/// Parses a monomial into a linear combination of canonical schemes. The
/// result has a single unit-coefficient term exactly when the input was
/// Riemann-free (or collapses, like the double trace of one Riemann onto R).
pub fn parse_invariant_expr(text: &str) -> Result<InvariantExpr> {
    let factors = tokenize(text)?;
    check_balance(&factors)?;
    let mut combined: Vec<(BigRational, ContractionScheme)> = Vec::new();
    for mut t in expand(&factors) {
        eliminate_metrics(&mut t);
        let s = term_scheme(&t)?;
        match combined.iter_mut().find(|(_, c)| *c == s) {
            Some((acc, _)) => *acc += &t.coeff,
            None => combined.push((t.coeff, s)),
        }
    }
    combined.retain(|(c, _)| !c.is_zero());
    combined.sort_by(|a, b| a.1.cmp(&b.1));
    Ok(InvariantExpr { terms: combined })
}

/// Parses notation that denotes a single contraction scheme, in canonical
/// form. Riemann-headed input that expands to a proper combination is
/// rejected; `parse_invariant_expr` accepts it.
pub fn parse_invariant(text: &str) -> Result<ContractionScheme> {
    let expr = parse_invariant_expr(text)?;
    match expr.terms.as_slice() {
        [(c, s)] if c.is_one() => Ok(s.clone()),
        _ => Err(CurvError::Invalid(
            "expands to a combination of schemes; parse_invariant_expr handles those".into(),
        )),
    }
}
